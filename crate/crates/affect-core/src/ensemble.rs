//! Prediction sequences, ensemble averaging, and corpus-level scoring.

use crate::objective::{ccc, CccError};
use crate::seqdata::{AlignedSample, Dimension, SeqError};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleError {
    EmptyEnsemble,
    GridMismatch { detail: String },
    MissingPrediction { subject: String, dimension: Dimension },
    DuplicatePrediction { subject: String, dimension: Dimension },
    Metric(CccError),
    Data(SeqError),
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleError::EmptyEnsemble => write!(f, "ensemble has no members"),
            EnsembleError::GridMismatch { detail } => write!(f, "grid mismatch: {detail}"),
            EnsembleError::MissingPrediction { subject, dimension } => {
                write!(f, "no prediction for subject {subject:?}, dimension {dimension}")
            }
            EnsembleError::DuplicatePrediction { subject, dimension } => {
                write!(
                    f,
                    "more than one prediction for subject {subject:?}, dimension {dimension}"
                )
            }
            EnsembleError::Metric(e) => write!(f, "metric error: {e}"),
            EnsembleError::Data(e) => write!(f, "data error: {e}"),
        }
    }
}

impl core::error::Error for EnsembleError {}

impl From<CccError> for EnsembleError {
    fn from(e: CccError) -> Self {
        EnsembleError::Metric(e)
    }
}

impl From<SeqError> for EnsembleError {
    fn from(e: SeqError) -> Self {
        EnsembleError::Data(e)
    }
}

/// Where a prediction came from: the feature combination, and, for
/// personalised runs, the winning seed and checkpoint id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProvenanceTag {
    pub combo: String,
    pub seed: Option<u64>,
    pub checkpoint_id: Option<String>,
}

impl ProvenanceTag {
    pub fn combo(combo: impl Into<String>) -> Self {
        ProvenanceTag {
            combo: combo.into(),
            seed: None,
            checkpoint_id: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_checkpoint(mut self, id: impl Into<String>) -> Self {
        self.checkpoint_id = Some(id.into());
        self
    }
}

impl fmt::Display for ProvenanceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.combo)?;
        if let Some(seed) = self.seed {
            write!(f, " seed={seed}")?;
        }
        if let Some(ckpt) = &self.checkpoint_id {
            write!(f, " ckpt={ckpt}")?;
        }
        Ok(())
    }
}

/// Per-step scalar predictions for one subject and one emotion dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSequence {
    subject_id: String,
    dimension: Dimension,
    timestamps_ms: Vec<i64>,
    values: Vec<f64>,
    provenance: Vec<ProvenanceTag>,
}

impl PredictionSequence {
    pub fn new(
        subject_id: impl Into<String>,
        dimension: Dimension,
        timestamps_ms: Vec<i64>,
        values: Vec<f64>,
        provenance: Vec<ProvenanceTag>,
    ) -> Result<Self, SeqError> {
        crate::seqdata::validate_grid(&timestamps_ms)?;
        if values.len() != timestamps_ms.len() {
            return Err(SeqError::DimensionMismatch {
                expected: timestamps_ms.len(),
                actual: values.len(),
            });
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeqError::NonFiniteValue { row, col: 0 });
        }
        Ok(PredictionSequence {
            subject_id: subject_id.into(),
            dimension,
            timestamps_ms,
            values,
            provenance,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn timestamps_ms(&self) -> &[i64] {
        &self.timestamps_ms
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &[ProvenanceTag] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A named ensemble: which feature combinations are averaged for one
/// emotion dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub dimension: Dimension,
    /// Names of the member feature combinations.
    pub member_combos: Vec<String>,
}

impl EnsembleSpec {
    pub fn new(dimension: Dimension, member_combos: Vec<String>) -> Result<Self, EnsembleError> {
        if member_combos.is_empty() {
            return Err(EnsembleError::EmptyEnsemble);
        }
        Ok(EnsembleSpec {
            dimension,
            member_combos,
        })
    }
}

/// Element-wise unweighted mean of member predictions.
///
/// Members are summed in sorted provenance order, so the result is
/// bit-identical under any permutation of the input. The output's
/// provenance concatenates all member tags.
pub fn ensemble_mean(members: &[PredictionSequence]) -> Result<PredictionSequence, EnsembleError> {
    let first = members.first().ok_or(EnsembleError::EmptyEnsemble)?;
    for m in members {
        if m.subject_id != first.subject_id || m.dimension != first.dimension {
            return Err(EnsembleError::GridMismatch {
                detail: format!(
                    "member {} / {} does not match {} / {}",
                    m.subject_id, m.dimension, first.subject_id, first.dimension
                ),
            });
        }
        if m.timestamps_ms != first.timestamps_ms {
            return Err(EnsembleError::GridMismatch {
                detail: format!("member grids differ for subject {}", m.subject_id),
            });
        }
    }

    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| members[a].provenance.cmp(&members[b].provenance));

    let scale = 1.0 / members.len() as f64;
    let mut values = alloc::vec![0.0; first.len()];
    for (i, v) in values.iter_mut().enumerate() {
        // Unanimous members pass through untouched so that the mean of
        // identical sequences is bit-identical to its members.
        let head = members[order[0]].values[i];
        if order.iter().all(|&m| members[m].values[i] == head) {
            *v = head;
        } else {
            *v = order.iter().map(|&m| members[m].values[i]).sum::<f64>() * scale;
        }
    }
    let mut provenance = Vec::new();
    for &i in &order {
        provenance.extend(members[i].provenance.iter().cloned());
    }
    Ok(PredictionSequence {
        subject_id: first.subject_id.clone(),
        dimension: first.dimension,
        timestamps_ms: first.timestamps_ms.clone(),
        values,
        provenance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectScore {
    pub subject_id: String,
    pub dimension: Dimension,
    pub ccc: f64,
}

/// Corpus-level evaluation: per-subject per-dimension CCC, per-dimension
/// means over subjects, and the combined score (mean of dimension means).
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    pub rows: Vec<SubjectScore>,
    pub dimension_means: Vec<(Dimension, f64)>,
    pub combined: f64,
}

/// Scores every labeled subject against exactly one prediction per
/// dimension.
pub fn evaluate_corpus(
    predictions: &[PredictionSequence],
    labeled: &[&AlignedSample],
) -> Result<CorpusReport, EnsembleError> {
    let mut rows = Vec::new();
    for sample in labeled {
        for (dim, label) in sample.labels() {
            let mut found: Option<&PredictionSequence> = None;
            for p in predictions {
                if p.subject_id == sample.subject_id() && p.dimension == *dim {
                    if found.is_some() {
                        return Err(EnsembleError::DuplicatePrediction {
                            subject: sample.subject_id().to_string(),
                            dimension: *dim,
                        });
                    }
                    found = Some(p);
                }
            }
            let pred = found.ok_or_else(|| EnsembleError::MissingPrediction {
                subject: sample.subject_id().to_string(),
                dimension: *dim,
            })?;
            if pred.timestamps_ms() != label.timestamps_ms() {
                return Err(EnsembleError::GridMismatch {
                    detail: format!(
                        "prediction grid differs from labels for subject {} / {dim}",
                        sample.subject_id()
                    ),
                });
            }
            let score = ccc(pred.values(), label.values())?;
            rows.push(SubjectScore {
                subject_id: sample.subject_id().to_string(),
                dimension: *dim,
                ccc: score.ccc,
            });
        }
    }

    let mut dimension_means = Vec::new();
    for dim in Dimension::ALL {
        let scores: Vec<f64> = rows
            .iter()
            .filter(|r| r.dimension == dim)
            .map(|r| r.ccc)
            .collect();
        if !scores.is_empty() {
            dimension_means.push((dim, scores.iter().sum::<f64>() / scores.len() as f64));
        }
    }
    let combined = combined_from_dimension_means(&dimension_means);
    Ok(CorpusReport {
        rows,
        dimension_means,
        combined,
    })
}

/// Mean of the per-dimension mean CCCs (the combined leaderboard score).
pub fn combined_from_dimension_means(means: &[(Dimension, f64)]) -> f64 {
    if means.is_empty() {
        return 0.0;
    }
    means.iter().map(|(_, v)| v).sum::<f64>() / means.len() as f64
}

/// Renders the evaluation report as `subject,dimension,ccc` rows followed
/// by per-dimension mean rows and the combined summary row.
pub fn render_report_csv(report: &CorpusReport) -> String {
    let mut out = String::from("subject,dimension,ccc\n");
    for r in &report.rows {
        let _ = core::fmt::write(
            &mut out,
            format_args!("{},{},{}\n", r.subject_id, r.dimension, r.ccc),
        );
    }
    for (dim, mean) in &report.dimension_means {
        let _ = core::fmt::write(&mut out, format_args!("mean,{dim},{mean}\n"));
    }
    let _ = core::fmt::write(&mut out, format_args!("combined,,{}\n", report.combined));
    out
}
