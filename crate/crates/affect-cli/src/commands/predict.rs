//! `affect predict`: full-sequence predictions per subject and dimension,
//! using each subject's personalised checkpoint when one exists and the
//! stage-1 checkpoint otherwise.

use super::{parse_flags, prediction_file_name, required_flag};
use crate::config::parse_config;
use crate::error::CliError;
use crate::fsio;
use crate::manifest::Manifest;
use affect_core::ensemble::ProvenanceTag;
use affect_core::seqdata::csv::render_series;
use affect_core::seqdata::{apply_norm, split_subject, AlignedSample, Role};
use affect_core::training::predict_full;
use std::path::{Path, PathBuf};

const FLAGS: &[&str] = &["config", "run", "out", "role", "segment"];

#[derive(Clone, Copy, PartialEq)]
enum Segment {
    Full,
    PersonalTest,
}

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let cfg = parse_config(Path::new(required_flag(&flags, "config")?))?;
    let run_dir = PathBuf::from(required_flag(&flags, "run")?);
    let out = flags
        .get("out")
        .map(PathBuf::from)
        .unwrap_or_else(|| run_dir.clone());
    let role = match flags.get("role").map(|s| s.as_str()) {
        None => Role::Test,
        Some(text) => Role::parse(text)
            .ok_or_else(|| CliError::usage(format!("flag --role: bad value {text:?}")))?,
    };
    let segment = match flags.get("segment").map(|s| s.as_str()) {
        None | Some("full") => Segment::Full,
        Some("personal_test") => Segment::PersonalTest,
        Some(text) => {
            return Err(CliError::usage(format!(
                "flag --segment: expected full or personal_test, got {text:?}"
            )))
        }
    };

    let manifest = Manifest::parse_file(&cfg.manifest_path)?;
    for id in manifest.subjects_with_role(role) {
        let sample = manifest.load_subject(id, &cfg.combo)?;
        let scored: AlignedSample = match segment {
            Segment::Full => sample,
            Segment::PersonalTest => split_subject(&sample).personal_test.ok_or_else(|| {
                CliError::data(format!("subject {id:?} is too short for a personal_test segment"))
            })?,
        };
        for &dim in &cfg.dimensions {
            let personalised = super::personalise::best_checkpoint(&run_dir, id, dim);
            let ckpt = if personalised.is_file() {
                personalised
            } else {
                run_dir.join(format!("stage1/{dim}.ckpt"))
            };
            let (model, stats) = fsio::load_checkpoint(&ckpt)?;
            let normalized = apply_norm(&scored, &stats)?;
            let provenance = vec![ProvenanceTag::combo(cfg.combo_name.clone())
                .with_checkpoint(ckpt.display().to_string())];
            let pred = predict_full(&model, &normalized, dim, provenance)?;
            let rel = format!("predictions/{}", prediction_file_name(id, dim));
            fsio::write_text(
                &out.join(&rel),
                &render_series(pred.timestamps_ms(), pred.values()),
            )?;
            eprintln!("[predict {dim}] {id}: {} steps -> {rel}", pred.len());
        }
    }
    fsio::write_text(
        &out.join("predict.lock"),
        &format!(
            "subcommand = predict\nrun = {}\nrole = {role}\nsegment = {}\n{}",
            run_dir.display(),
            match segment {
                Segment::Full => "full",
                Segment::PersonalTest => "personal_test",
            },
            cfg.render()
        ),
    )?;
    Ok(())
}
