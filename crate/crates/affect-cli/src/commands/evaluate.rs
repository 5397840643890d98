//! `affect evaluate`: CCC scoring of prediction files against a labeled
//! corpus, per subject and dimension, with per-dimension means and the
//! combined score.

use super::{parse_flags, prediction_file_name, required_flag};
use crate::error::CliError;
use crate::fsio;
use crate::manifest::Manifest;
use affect_core::ensemble::{evaluate_corpus, render_report_csv, PredictionSequence, ProvenanceTag};
use affect_core::seqdata::csv::parse_signal_csv;
use affect_core::seqdata::{split_subject, AlignedSample, Role};
use std::path::{Path, PathBuf};

const FLAGS: &[&str] = &["manifest", "predictions", "out", "role", "segment"];

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let manifest = Manifest::parse_file(Path::new(required_flag(&flags, "manifest")?))?;
    let pred_dir = PathBuf::from(required_flag(&flags, "predictions")?);
    let out_file = match flags.get("out") {
        Some(f) => PathBuf::from(f),
        None => pred_dir.join("evaluation.csv"),
    };
    let role = match flags.get("role").map(|s| s.as_str()) {
        None => Role::Test,
        Some(text) => Role::parse(text)
            .ok_or_else(|| CliError::usage(format!("flag --role: bad value {text:?}")))?,
    };
    let personal_test_only = match flags.get("segment").map(|s| s.as_str()) {
        None | Some("full") => false,
        Some("personal_test") => true,
        Some(text) => {
            return Err(CliError::usage(format!(
                "flag --segment: expected full or personal_test, got {text:?}"
            )))
        }
    };

    let all_modalities: Vec<String> = manifest
        .modality_names()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut labeled: Vec<AlignedSample> = Vec::new();
    for id in manifest.subjects_with_role(role) {
        let sample = manifest.load_subject(id, &all_modalities)?;
        labeled.push(if personal_test_only {
            split_subject(&sample).personal_test.ok_or_else(|| {
                CliError::data(format!("subject {id:?} is too short for a personal_test segment"))
            })?
        } else {
            sample
        });
    }

    let mut predictions: Vec<PredictionSequence> = Vec::new();
    for sample in &labeled {
        let dims: Vec<_> = sample.labels().keys().copied().collect();
        for dim in dims {
            let path = pred_dir.join(prediction_file_name(sample.subject_id(), dim));
            if !path.is_file() {
                // Leave it out; evaluate_corpus reports the missing subject.
                continue;
            }
            let series = parse_signal_csv(&fsio::read_text(&path)?)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let steps = series.len();
            let start = series.start_ms();
            let step_ms = (1000.0 / series.rate_hz()) as i64;
            let timestamps: Vec<i64> = (0..steps as i64).map(|i| start + i * step_ms).collect();
            predictions.push(
                PredictionSequence::new(
                    sample.subject_id(),
                    dim,
                    timestamps,
                    series.samples().to_vec(),
                    vec![ProvenanceTag::combo(path.display().to_string())],
                )
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
            );
        }
    }

    let refs: Vec<&AlignedSample> = labeled.iter().collect();
    let report = evaluate_corpus(&predictions, &refs)?;
    fsio::write_text(&out_file, &render_report_csv(&report))?;
    for (dim, mean) in &report.dimension_means {
        eprintln!("[evaluate] {dim} mean ccc {mean:.6}");
    }
    eprintln!(
        "[evaluate] combined {:.6} -> {}",
        report.combined,
        out_file.display()
    );
    Ok(())
}
