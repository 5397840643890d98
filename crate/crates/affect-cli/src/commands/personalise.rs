//! `affect personalise`: per-test-subject fine-tuning with the fixed
//! 10-seed sweep, selecting on each subject's personal-dev CCC.

use super::{jobs, parse_flags, required_flag};
use crate::config::parse_config;
use crate::error::CliError;
use crate::fsio;
use crate::jobs::run_indexed;
use crate::manifest::Manifest;
use affect_core::seqdata::{split_subject, AlignedSample, Dimension, Role};
use affect_core::training::{personalise, Personalised};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const FLAGS: &[&str] = &["config", "run", "out", "jobs"];

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let cfg = parse_config(Path::new(required_flag(&flags, "config")?))?;
    let run_dir = PathBuf::from(required_flag(&flags, "run")?);
    let out = flags
        .get("out")
        .map(PathBuf::from)
        .unwrap_or_else(|| run_dir.clone());
    let jobs = jobs(&flags)?;

    let manifest = Manifest::parse_file(&cfg.manifest_path)?;
    let subjects: Vec<AlignedSample> = manifest
        .subjects_with_role(Role::Test)
        .iter()
        .map(|id| manifest.load_subject(id, &cfg.combo))
        .collect::<Result<_, _>>()?;
    if subjects.is_empty() {
        return Err(CliError::data("manifest has no test subjects"));
    }

    for &dim in &cfg.dimensions {
        let ckpt_path = run_dir.join(format!("stage1/{dim}.ckpt"));
        let (model, stats) = fsio::load_checkpoint(&ckpt_path)?;

        let results: Vec<Result<Personalised, CliError>> = run_indexed(subjects.len(), jobs, |i| {
            let split = split_subject(&subjects[i]);
            personalise(&model, &stats, &split, &cfg.train, dim).map_err(CliError::from)
        });
        for (subject, result) in subjects.iter().zip(results) {
            let result = result?;
            let dir = out.join(format!("personalised/{}/{dim}", subject.subject_id()));
            fsio::save_checkpoint(
                &result.model,
                &stats,
                &dir.join(format!("{}.ckpt", result.chosen_seed)),
            )?;
            fsio::save_checkpoint(&result.model, &stats, &dir.join("best.ckpt"))?;
            let mut csv = String::from("seed,dev_ccc,chosen\n");
            for (seed, ccc) in &result.seed_scores {
                let _ = writeln!(
                    csv,
                    "{seed},{ccc},{}",
                    if *seed == result.chosen_seed { "1" } else { "0" }
                );
            }
            fsio::write_text(&dir.join("seeds.csv"), &csv)?;
            eprintln!(
                "[personalise {dim}] {}: seed {} with personal-dev ccc {:.6}",
                subject.subject_id(),
                result.chosen_seed,
                result.dev_ccc
            );
        }
    }
    fsio::write_text(
        &out.join("personalise.lock"),
        &format!("subcommand = personalise\nrun = {}\n{}", run_dir.display(), cfg.render()),
    )?;
    Ok(())
}

/// Best-checkpoint path for a subject/dimension, shared with `predict`.
pub fn best_checkpoint(run_dir: &Path, subject: &str, dim: Dimension) -> PathBuf {
    run_dir.join(format!("personalised/{subject}/{dim}/best.ckpt"))
}
