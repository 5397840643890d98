//! `affect extract-hrv`: compute the 21-d physiological feature CSVs from
//! each subject's raw signals and emit an extended manifest.

use super::{out_dir, parse_flags, required_flag};
use crate::error::CliError;
use crate::fsio;
use crate::manifest::{FeatureEntry, Manifest};
use affect_core::ecg::{extract_phys_sequence, PHYS_DIM};
use affect_core::seqdata::csv::render_feature_csv;
use std::path::Path;

const FLAGS: &[&str] = &["manifest", "out", "name"];

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let manifest_path = Path::new(required_flag(&flags, "manifest")?);
    let out = out_dir(&flags, "extract-hrv")?;
    let default_name = "phys".to_string();
    let name = flags.get("name").unwrap_or(&default_name);

    let manifest = Manifest::parse_file(manifest_path)?;
    if manifest.modality_names().iter().any(|m| m == name) {
        return Err(CliError::usage(format!(
            "manifest already has a {name:?} modality; pick another --name"
        )));
    }

    // The extended manifest lives in the output directory: original entries
    // keep resolving via absolute paths, new feature files are relative.
    let mut extended = Manifest {
        dir: out.clone(),
        subjects: manifest.subjects.clone(),
        features: manifest
            .features
            .iter()
            .map(|f| FeatureEntry {
                path: manifest.absolutize(&f.path),
                ..f.clone()
            })
            .collect(),
        labels: manifest
            .labels
            .iter()
            .map(|l| crate::manifest::LabelEntry {
                path: manifest.absolutize(&l.path),
                ..l.clone()
            })
            .collect(),
        signals: manifest
            .signals
            .iter()
            .map(|s| crate::manifest::SignalEntry {
                path: manifest.absolutize(&s.path),
                ..s.clone()
            })
            .collect(),
    };

    for (id, _) in &manifest.subjects {
        let signals = manifest.load_signals(id)?;
        let seq = extract_phys_sequence(
            id,
            name,
            &signals.ecg_raw,
            &signals.resp,
            &signals.bpm,
            &signals.ecg_2hz,
        )?;
        let rel = format!("features/{id}_{name}.csv");
        fsio::write_text(&out.join(&rel), &render_feature_csv(&seq))?;
        extended.features.push(FeatureEntry {
            subject: id.clone(),
            modality: name.clone(),
            dim: PHYS_DIM,
            path: rel,
        });
        eprintln!("extract-hrv: {id}: {} steps x {} features", seq.len(), seq.dim());
    }

    fsio::write_text(&out.join("manifest.txt"), &extended.render())?;
    fsio::write_text(
        &out.join("run.lock"),
        &format!(
            "subcommand = extract-hrv\nmanifest = {}\nname = {name}\n",
            manifest_path.display()
        ),
    )?;
    Ok(())
}
