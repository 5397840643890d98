//! `affect synth`: write a synthetic corpus (feature/label/signal CSVs plus
//! the manifest) to disk.

use super::{flag_parse, out_dir, parse_flags};
use crate::error::CliError;
use crate::fsio;
use crate::manifest::{FeatureEntry, LabelEntry, Manifest, SignalEntry, SignalKind};
use affect_core::seqdata::csv::{render_feature_csv, render_label_csv, render_signal_csv};
use affect_core::seqdata::synth::{generate_synthetic_corpus, ModalitySpec, SynthSpec};
use std::fmt::Write as _;

const FLAGS: &[&str] = &[
    "out",
    "seed",
    "subjects",
    "train",
    "dev",
    "test",
    "duration-secs",
    "noise",
    "offset",
    "modalities",
];

/// `name:dim+name:dim` -> modality specs.
fn parse_modalities(text: &str) -> Result<Vec<ModalitySpec>, CliError> {
    text.split('+')
        .map(|part| {
            let (name, dim) = part
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("bad modality spec {part:?} (want name:dim)")))?;
            let dim: usize = dim
                .parse()
                .map_err(|_| CliError::usage(format!("bad modality width in {part:?}")))?;
            Ok(ModalitySpec::new(name, dim))
        })
        .collect()
}

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let out = out_dir(&flags, "synth")?;
    let seed: u64 = flag_parse(&flags, "seed", 0)?;

    let mut spec = SynthSpec {
        duration_secs: flag_parse(&flags, "duration-secs", 300)?,
        noise: flag_parse(&flags, "noise", 0.1)?,
        subject_offset: flag_parse(&flags, "offset", 0.0)?,
        ..SynthSpec::default()
    };
    if let Some(mods) = flags.get("modalities") {
        spec.modalities = parse_modalities(mods)?;
    }
    if let Some(total) = flags.get("subjects") {
        // A single subject count splits roughly 60/20/20.
        let total: usize = total
            .parse()
            .map_err(|_| CliError::usage(format!("flag --subjects: bad value {total:?}")))?;
        let side = (total / 5).max(1);
        if total < 2 * side + 1 {
            return Err(CliError::usage(format!(
                "--subjects {total} is too small to split into train/dev/test"
            )));
        }
        spec.dev_subjects = side;
        spec.test_subjects = side;
        spec.train_subjects = total - 2 * side;
    }
    spec.train_subjects = flag_parse(&flags, "train", spec.train_subjects)?;
    spec.dev_subjects = flag_parse(&flags, "dev", spec.dev_subjects)?;
    spec.test_subjects = flag_parse(&flags, "test", spec.test_subjects)?;

    let corpus = generate_synthetic_corpus(&spec, seed).map_err(|e| CliError::usage(e.to_string()))?;

    let mut manifest = Manifest::default();
    for subject in &corpus.subjects {
        let id = subject.sample.subject_id().to_string();
        manifest.subjects.push((id.clone(), subject.sample.role()));
        for m in subject.sample.modalities() {
            let rel = format!("features/{id}_{}.csv", m.modality());
            fsio::write_text(&out.join(&rel), &render_feature_csv(m))?;
            manifest.features.push(FeatureEntry {
                subject: id.clone(),
                modality: m.modality().to_string(),
                dim: m.dim(),
                path: rel,
            });
        }
        for (dim, label) in subject.sample.labels() {
            let rel = format!("labels/{id}_{dim}.csv");
            fsio::write_text(&out.join(&rel), &render_label_csv(label))?;
            manifest.labels.push(LabelEntry {
                subject: id.clone(),
                dimension: *dim,
                path: rel,
            });
        }
        for (kind, signal) in [
            (SignalKind::EcgRaw, &subject.ecg_raw),
            (SignalKind::Ecg2Hz, &subject.ecg_2hz),
            (SignalKind::Resp, &subject.resp),
            (SignalKind::Bpm, &subject.bpm),
        ] {
            let rel = format!("signals/{id}_{}.csv", kind.as_str());
            fsio::write_text(&out.join(&rel), &render_signal_csv(signal))?;
            manifest.signals.push(SignalEntry {
                subject: id.clone(),
                kind,
                rate_hz: signal.rate_hz(),
                path: rel,
            });
        }
    }
    fsio::write_text(&out.join("manifest.txt"), &manifest.render())?;

    let mut lock = String::new();
    let _ = writeln!(lock, "subcommand = synth");
    let _ = writeln!(lock, "seed = {seed}");
    let _ = writeln!(lock, "train = {}", spec.train_subjects);
    let _ = writeln!(lock, "dev = {}", spec.dev_subjects);
    let _ = writeln!(lock, "test = {}", spec.test_subjects);
    let _ = writeln!(lock, "duration_secs = {}", spec.duration_secs);
    let _ = writeln!(lock, "noise = {}", spec.noise);
    let _ = writeln!(lock, "offset = {}", spec.subject_offset);
    let mods = spec
        .modalities
        .iter()
        .map(|m| format!("{}:{}", m.name, m.dim))
        .collect::<Vec<_>>()
        .join("+");
    let _ = writeln!(lock, "modalities = {mods}");
    fsio::write_text(&out.join("run.lock"), &lock)?;

    eprintln!(
        "synth: wrote {} subjects ({} train / {} dev / {} test) to {}",
        corpus.subjects.len(),
        spec.train_subjects,
        spec.dev_subjects,
        spec.test_subjects,
        out.display()
    );
    Ok(())
}
