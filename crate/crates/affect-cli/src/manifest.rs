//! Corpus manifest: one text file mapping subjects to roles and listing the
//! per-modality feature files, per-dimension label files, and raw signal
//! files.
//!
//! Format (whitespace-separated fields, `#` comments, paths relative to the
//! manifest's directory unless absolute):
//!
//! ```text
//! subject <id> <train|dev|test>
//! feature <subject> <modality> <dim> <path>
//! label   <subject> <arousal|valence> <path>
//! signal  <subject> <ecg_raw|ecg_2hz|resp|bpm> <rate_hz> <path>
//! ```

use crate::error::CliError;
use crate::fsio;
use affect_core::ecg::RawSignal;
use affect_core::seqdata::{align_and_label, AlignedSample, Dimension, Role};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct FeatureEntry {
    pub subject: String,
    pub modality: String,
    pub dim: usize,
    pub path: String,
}

#[derive(Debug, Clone)]
pub struct LabelEntry {
    pub subject: String,
    pub dimension: Dimension,
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    EcgRaw,
    Ecg2Hz,
    Resp,
    Bpm,
}

impl SignalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::EcgRaw => "ecg_raw",
            SignalKind::Ecg2Hz => "ecg_2hz",
            SignalKind::Resp => "resp",
            SignalKind::Bpm => "bpm",
        }
    }

    fn parse(s: &str) -> Option<SignalKind> {
        match s {
            "ecg_raw" => Some(SignalKind::EcgRaw),
            "ecg_2hz" => Some(SignalKind::Ecg2Hz),
            "resp" => Some(SignalKind::Resp),
            "bpm" => Some(SignalKind::Bpm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SignalEntry {
    pub subject: String,
    pub kind: SignalKind,
    pub rate_hz: f64,
    pub path: String,
}

/// All four raw channels of one subject.
pub struct SubjectSignals {
    pub ecg_raw: RawSignal,
    pub ecg_2hz: RawSignal,
    pub resp: RawSignal,
    pub bpm: RawSignal,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    /// Directory the manifest was read from; base for relative paths.
    pub dir: PathBuf,
    pub subjects: Vec<(String, Role)>,
    pub features: Vec<FeatureEntry>,
    pub labels: Vec<LabelEntry>,
    pub signals: Vec<SignalEntry>,
}

impl Manifest {
    pub fn parse_file(path: &Path) -> Result<Manifest, CliError> {
        let text = fsio::read_text(path)?;
        // Absolute base directory, so re-emitted entries stay resolvable
        // from manifests written elsewhere.
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let dir = std::fs::canonicalize(parent).unwrap_or_else(|_| parent.to_path_buf());
        Self::parse(&text, dir).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    fn parse(text: &str, dir: PathBuf) -> Result<Manifest, String> {
        let mut m = Manifest {
            dir,
            ..Manifest::default()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["subject", id, role] => {
                    let role = Role::parse(role)
                        .ok_or_else(|| format!("line {lineno}: unknown role {role:?}"))?;
                    if m.subjects.iter().any(|(s, _)| s == id) {
                        return Err(format!("line {lineno}: duplicate subject {id:?}"));
                    }
                    m.subjects.push((id.to_string(), role));
                }
                ["feature", subject, modality, dim, path] => {
                    let dim: usize = dim
                        .parse()
                        .map_err(|_| format!("line {lineno}: bad dim {dim:?}"))?;
                    m.features.push(FeatureEntry {
                        subject: subject.to_string(),
                        modality: modality.to_string(),
                        dim,
                        path: path.to_string(),
                    });
                }
                ["label", subject, dimension, path] => {
                    let dimension = Dimension::parse(dimension)
                        .ok_or_else(|| format!("line {lineno}: unknown dimension {dimension:?}"))?;
                    m.labels.push(LabelEntry {
                        subject: subject.to_string(),
                        dimension,
                        path: path.to_string(),
                    });
                }
                ["signal", subject, kind, rate, path] => {
                    let kind = SignalKind::parse(kind)
                        .ok_or_else(|| format!("line {lineno}: unknown signal kind {kind:?}"))?;
                    let rate_hz: f64 = rate
                        .parse()
                        .map_err(|_| format!("line {lineno}: bad rate {rate:?}"))?;
                    m.signals.push(SignalEntry {
                        subject: subject.to_string(),
                        kind,
                        rate_hz,
                        path: path.to_string(),
                    });
                }
                _ => return Err(format!("line {lineno}: unrecognized entry {line:?}")),
            }
        }
        for e in &m.features {
            if m.role(&e.subject).is_none() {
                return Err(format!("feature entry references unknown subject {:?}", e.subject));
            }
        }
        Ok(m)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# affect corpus manifest\n");
        for (id, role) in &self.subjects {
            let _ = writeln!(out, "subject {id} {role}");
        }
        for f in &self.features {
            let _ = writeln!(out, "feature {} {} {} {}", f.subject, f.modality, f.dim, f.path);
        }
        for l in &self.labels {
            let _ = writeln!(out, "label {} {} {}", l.subject, l.dimension, l.path);
        }
        for s in &self.signals {
            let _ = writeln!(out, "signal {} {} {} {}", s.subject, s.kind.as_str(), s.rate_hz, s.path);
        }
        out
    }

    pub fn role(&self, subject: &str) -> Option<Role> {
        self.subjects
            .iter()
            .find(|(s, _)| s == subject)
            .map(|(_, r)| *r)
    }

    pub fn subjects_with_role(&self, role: Role) -> Vec<&str> {
        self.subjects
            .iter()
            .filter(|(_, r)| *r == role)
            .map(|(s, _)| s.as_str())
            .collect()
    }

    /// Names of all modalities appearing in the manifest, in first-seen
    /// order.
    pub fn modality_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for f in &self.features {
            if !out.contains(&f.modality.as_str()) {
                out.push(&f.modality);
            }
        }
        out
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    /// Absolute-path string for re-emitting an entry into a manifest that
    /// lives in a different directory.
    pub fn absolutize(&self, path: &str) -> String {
        self.resolve(path).display().to_string()
    }

    fn feature_entry(&self, subject: &str, modality: &str) -> Result<&FeatureEntry, CliError> {
        self.features
            .iter()
            .find(|f| f.subject == subject && f.modality == modality)
            .ok_or_else(|| {
                CliError::data(format!(
                    "manifest has no {modality:?} features for subject {subject:?}"
                ))
            })
    }

    /// Loads one subject's sample: combo modalities in combo order plus
    /// every label the manifest lists, aligned onto the common grid.
    pub fn load_subject(&self, subject: &str, combo: &[String]) -> Result<AlignedSample, CliError> {
        let role = self
            .role(subject)
            .ok_or_else(|| CliError::data(format!("unknown subject {subject:?}")))?;
        let mut features = Vec::with_capacity(combo.len());
        for modality in combo {
            let entry = self.feature_entry(subject, modality)?;
            features.push(fsio::load_feature_csv(
                &self.resolve(&entry.path),
                subject,
                modality,
                Some(entry.dim),
            )?);
        }
        let mut labels = Vec::new();
        for entry in self.labels.iter().filter(|l| l.subject == subject) {
            labels.push(fsio::load_label_csv(
                &self.resolve(&entry.path),
                subject,
                entry.dimension,
            )?);
        }
        Ok(align_and_label(features, labels)?.with_role(role))
    }

    /// Loads every subject (manifest order) with the given combo.
    pub fn load_corpus(&self, combo: &[String]) -> Result<Vec<AlignedSample>, CliError> {
        self.subjects
            .iter()
            .map(|(id, _)| self.load_subject(id, combo))
            .collect()
    }

    /// Loads the four raw signal channels of one subject.
    pub fn load_signals(&self, subject: &str) -> Result<SubjectSignals, CliError> {
        let get = |kind: SignalKind| -> Result<RawSignal, CliError> {
            let entry = self
                .signals
                .iter()
                .find(|s| s.subject == subject && s.kind == kind)
                .ok_or_else(|| {
                    CliError::data(format!(
                        "manifest has no {} signal for subject {subject:?}",
                        kind.as_str()
                    ))
                })?;
            let path = self.resolve(&entry.path);
            let signal = fsio::load_signal_csv(&path)?;
            if (signal.rate_hz() - entry.rate_hz).abs() > 1e-9 {
                return Err(CliError::data(format!(
                    "{}: file rate {} Hz does not match declared {} Hz",
                    path.display(),
                    signal.rate_hz(),
                    entry.rate_hz
                )));
            }
            Ok(signal)
        };
        Ok(SubjectSignals {
            ecg_raw: get(SignalKind::EcgRaw)?,
            ecg_2hz: get(SignalKind::Ecg2Hz)?,
            resp: get(SignalKind::Resp)?,
            bpm: get(SignalKind::Bpm)?,
        })
    }
}
