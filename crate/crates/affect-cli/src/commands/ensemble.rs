//! `affect ensemble`: average prediction files from several member run
//! directories into a new prediction set.

use super::{out_dir, parse_flags, required_flag};
use crate::error::CliError;
use crate::fsio;
use affect_core::ensemble::{ensemble_mean, EnsembleSpec, PredictionSequence, ProvenanceTag};
use affect_core::seqdata::csv::{parse_signal_csv, render_series};
use affect_core::seqdata::Dimension;
use std::path::{Path, PathBuf};

const FLAGS: &[&str] = &["members", "out", "dimension"];

/// `<subject>_<dimension>.csv` -> (subject, dimension).
fn parse_prediction_name(name: &str) -> Option<(String, Dimension)> {
    let stem = name.strip_suffix(".csv")?;
    let (subject, dim) = stem.rsplit_once('_')?;
    Some((subject.to_string(), Dimension::parse(dim)?))
}

fn read_prediction(
    path: &Path,
    subject: &str,
    dim: Dimension,
    combo: &str,
) -> Result<PredictionSequence, CliError> {
    let series = parse_signal_csv(&fsio::read_text(path)?)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let step_ms = (1000.0 / series.rate_hz()) as i64;
    let timestamps: Vec<i64> = (0..series.len() as i64)
        .map(|i| series.start_ms() + i * step_ms)
        .collect();
    PredictionSequence::new(
        subject,
        dim,
        timestamps,
        series.samples().to_vec(),
        vec![ProvenanceTag::combo(combo)],
    )
    .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let out = out_dir(&flags, "ensemble")?;
    let member_dirs: Vec<PathBuf> = required_flag(&flags, "members")?
        .split(',')
        .map(|s| PathBuf::from(s.trim()))
        .collect();
    if member_dirs.is_empty() {
        return Err(CliError::usage("--members needs at least one directory"));
    }
    let dim_filter = match flags.get("dimension") {
        None => None,
        Some(text) => Some(Dimension::parse(text).ok_or_else(|| {
            CliError::usage(format!("flag --dimension: bad value {text:?}"))
        })?),
    };

    // The first member defines the prediction set; every other member must
    // provide the same files.
    let first_pred_dir = member_dirs[0].join("predictions");
    let mut names: Vec<String> = std::fs::read_dir(&first_pred_dir)
        .map_err(|e| CliError::io(&first_pred_dir, e))?
        .filter_map(|entry| entry.ok())
        .filter_map(|entry| entry.file_name().into_string().ok())
        .filter(|name| name.ends_with(".csv"))
        .collect();
    names.sort();

    let member_combos: Vec<String> = member_dirs
        .iter()
        .map(|dir| {
            dir.file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| dir.display().to_string())
        })
        .collect();

    let mut written = 0usize;
    for name in names {
        let Some((subject, dim)) = parse_prediction_name(&name) else {
            continue;
        };
        if dim_filter.is_some_and(|d| d != dim) {
            continue;
        }
        let spec = EnsembleSpec::new(dim, member_combos.clone())?;
        let members: Vec<PredictionSequence> = member_dirs
            .iter()
            .zip(&spec.member_combos)
            .map(|(dir, combo)| {
                read_prediction(&dir.join("predictions").join(&name), &subject, dim, combo)
            })
            .collect::<Result<_, _>>()?;
        let combined = ensemble_mean(&members)?;
        fsio::write_text(
            &out.join("predictions").join(&name),
            &render_series(combined.timestamps_ms(), combined.values()),
        )?;
        written += 1;
    }
    if written == 0 {
        return Err(CliError::data(format!(
            "no prediction files found under {}",
            first_pred_dir.display()
        )));
    }

    fsio::write_text(
        &out.join("ensemble.lock"),
        &format!(
            "subcommand = ensemble\nmembers = {}\n",
            member_dirs
                .iter()
                .map(|d| d.display().to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
    )?;
    eprintln!("[ensemble] averaged {written} prediction files from {} members", member_dirs.len());
    Ok(())
}
