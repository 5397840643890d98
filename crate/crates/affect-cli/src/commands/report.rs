//! `affect report`: human-readable summary of a run directory.

use super::{parse_flags, required_flag};
use crate::error::CliError;
use crate::fsio;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

const FLAGS: &[&str] = &["run"];

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let run_dir = PathBuf::from(required_flag(&flags, "run")?);
    let lock = ["run.lock", "personalise.lock", "predict.lock", "ensemble.lock"]
        .iter()
        .map(|name| run_dir.join(name))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            CliError::data(format!("{} is not a run directory (no lock file)", run_dir.display()))
        })?;

    let mut out = String::new();
    let _ = writeln!(out, "run directory: {}", run_dir.display());
    let _ = writeln!(
        out,
        "== resolved configuration ({}) ==",
        lock.file_name().unwrap().to_string_lossy()
    );
    out.push_str(&fsio::read_text(&lock)?);

    let stage1 = run_dir.join("stage1");
    if stage1.is_dir() {
        let _ = writeln!(out, "== stage-1 pretraining ==");
        for dim in ["arousal", "valence"] {
            let report = stage1.join(format!("{dim}_report.csv"));
            if report.is_file() {
                let text = fsio::read_text(&report)?;
                let epochs = text.lines().count().saturating_sub(1);
                let best = text
                    .lines()
                    .skip(1)
                    .filter_map(|l| l.split(',').nth(2)?.parse::<f64>().ok())
                    .fold(f64::NEG_INFINITY, f64::max);
                let _ = writeln!(out, "{dim}: {epochs} epochs, best dev ccc {best:.6}");
            }
        }
    }

    let personalised = run_dir.join("personalised");
    if personalised.is_dir() {
        let _ = writeln!(out, "== personalisation ==");
        let mut subjects: Vec<PathBuf> = std::fs::read_dir(&personalised)
            .map_err(|e| CliError::io(&personalised, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect();
        subjects.sort();
        for subject_dir in subjects {
            let subject = subject_dir.file_name().unwrap().to_string_lossy().into_owned();
            for dim in ["arousal", "valence"] {
                let seeds = subject_dir.join(dim).join("seeds.csv");
                if !seeds.is_file() {
                    continue;
                }
                let text = fsio::read_text(&seeds)?;
                let chosen = text
                    .lines()
                    .skip(1)
                    .find(|l| l.ends_with(",1"))
                    .unwrap_or("?,?,?");
                let mut fields = chosen.split(',');
                let seed = fields.next().unwrap_or("?");
                let ccc = fields.next().unwrap_or("?");
                let _ = writeln!(out, "{subject} {dim}: seed {seed}, personal-dev ccc {ccc}");
            }
        }
    }

    let evaluation = run_dir.join("evaluation.csv");
    if evaluation.is_file() {
        let _ = writeln!(out, "== evaluation ==");
        let text = fsio::read_text(&evaluation)?;
        for line in text.lines().skip(1) {
            if line.starts_with("mean,") || line.starts_with("combined,") {
                let _ = writeln!(out, "{line}");
            }
        }
    }

    // A closed pipe downstream (e.g. `| head`) is not an error.
    let _ = std::io::stdout().write_all(out.as_bytes());
    Ok(())
}
