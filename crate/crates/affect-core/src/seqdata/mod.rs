//! Sequence data model: per-modality feature series, labels, aligned
//! samples, train-set normalization, and per-subject personalisation splits.
//!
//! Every sequence lives on the common 2 Hz grid (timestamps in integer
//! milliseconds, 500 ms apart). Types are immutable after construction and
//! constructors enforce the grid and finiteness invariants, so downstream
//! code never re-validates.

use crate::mat::Mat;
use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub mod csv;
pub mod synth;

/// Grid step of the official 2 Hz rate.
pub const GRID_STEP_MS: i64 = 500;

/// Steps per personalisation segment: 60 s at 2 Hz.
pub const PERSONAL_SEGMENT_STEPS: usize = 120;

/// A continuous emotion dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Arousal,
    Valence,
}

impl Dimension {
    pub const ALL: [Dimension; 2] = [Dimension::Arousal, Dimension::Valence];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Arousal => "arousal",
            Dimension::Valence => "valence",
        }
    }

    pub fn parse(s: &str) -> Option<Dimension> {
        match s {
            "arousal" => Some(Dimension::Arousal),
            "valence" => Some(Dimension::Valence),
            _ => None,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Corpus partition a subject belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Train,
    Dev,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Dev => "dev",
            Role::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "train" => Some(Role::Train),
            "dev" => Some(Role::Dev),
            "test" => Some(Role::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeqError {
    MalformedCsv { line: usize, reason: String },
    NonMonotoneTimestamps { row: usize },
    /// Timestamps increase but not by the 500 ms grid step.
    IrregularGrid { row: usize },
    NonFiniteValue { row: usize, col: usize },
    DimensionMismatch { expected: usize, actual: usize },
    TooShort { len: usize },
    SubjectMismatch { a: String, b: String },
    EmptyIntersection,
    EmptyInput,
    /// Modality layouts (names/dims/order) differ between samples.
    LayoutMismatch { detail: String },
    InvalidSpec { detail: String },
}

impl fmt::Display for SeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqError::MalformedCsv { line, reason } => {
                write!(f, "malformed csv at line {line}: {reason}")
            }
            SeqError::NonMonotoneTimestamps { row } => {
                write!(f, "timestamps not strictly increasing at row {row}")
            }
            SeqError::IrregularGrid { row } => {
                write!(f, "timestamp step is not {GRID_STEP_MS} ms at row {row}")
            }
            SeqError::NonFiniteValue { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            SeqError::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            SeqError::TooShort { len } => write!(f, "sequence needs at least 2 steps, got {len}"),
            SeqError::SubjectMismatch { a, b } => {
                write!(f, "subject mismatch: {a:?} vs {b:?}")
            }
            SeqError::EmptyIntersection => write!(f, "timestamp grids have no common range"),
            SeqError::EmptyInput => write!(f, "empty input"),
            SeqError::LayoutMismatch { detail } => write!(f, "modality layout mismatch: {detail}"),
            SeqError::InvalidSpec { detail } => write!(f, "invalid synthesis spec: {detail}"),
        }
    }
}

impl core::error::Error for SeqError {}

pub(crate) fn validate_grid(timestamps: &[i64]) -> Result<(), SeqError> {
    if timestamps.len() < 2 {
        return Err(SeqError::TooShort {
            len: timestamps.len(),
        });
    }
    for i in 1..timestamps.len() {
        let step = timestamps[i] - timestamps[i - 1];
        if step <= 0 {
            return Err(SeqError::NonMonotoneTimestamps { row: i });
        }
        if step != GRID_STEP_MS {
            return Err(SeqError::IrregularGrid { row: i });
        }
    }
    Ok(())
}

fn validate_finite(values: &Mat) -> Result<(), SeqError> {
    for r in 0..values.rows() {
        for (c, v) in values.row(r).iter().enumerate() {
            if !v.is_finite() {
                return Err(SeqError::NonFiniteValue { row: r, col: c });
            }
        }
    }
    Ok(())
}

/// One modality's per-timestep feature matrix on the 2 Hz grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    subject_id: String,
    modality: String,
    timestamps_ms: Vec<i64>,
    values: Mat,
}

impl FeatureSequence {
    pub fn new(
        subject_id: impl Into<String>,
        modality: impl Into<String>,
        timestamps_ms: Vec<i64>,
        values: Mat,
    ) -> Result<Self, SeqError> {
        validate_grid(&timestamps_ms)?;
        if values.rows() != timestamps_ms.len() {
            return Err(SeqError::DimensionMismatch {
                expected: timestamps_ms.len(),
                actual: values.rows(),
            });
        }
        if values.cols() == 0 {
            return Err(SeqError::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        validate_finite(&values)?;
        Ok(FeatureSequence {
            subject_id: subject_id.into(),
            modality: modality.into(),
            timestamps_ms,
            values,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn modality(&self) -> &str {
        &self.modality
    }

    pub fn timestamps_ms(&self) -> &[i64] {
        &self.timestamps_ms
    }

    /// Number of steps `T`.
    pub fn len(&self) -> usize {
        self.timestamps_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_ms.is_empty()
    }

    /// Feature width `n`.
    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    fn slice_steps(&self, start: usize, end: usize) -> FeatureSequence {
        FeatureSequence {
            subject_id: self.subject_id.clone(),
            modality: self.modality.clone(),
            timestamps_ms: self.timestamps_ms[start..end].to_vec(),
            values: self.values.row_range(start, end),
        }
    }
}

/// Ground-truth series for one emotion dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSequence {
    subject_id: String,
    dimension: Dimension,
    timestamps_ms: Vec<i64>,
    values: Vec<f64>,
}

impl LabelSequence {
    pub fn new(
        subject_id: impl Into<String>,
        dimension: Dimension,
        timestamps_ms: Vec<i64>,
        values: Vec<f64>,
    ) -> Result<Self, SeqError> {
        validate_grid(&timestamps_ms)?;
        if values.len() != timestamps_ms.len() {
            return Err(SeqError::DimensionMismatch {
                expected: timestamps_ms.len(),
                actual: values.len(),
            });
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeqError::NonFiniteValue { row, col: 0 });
        }
        Ok(LabelSequence {
            subject_id: subject_id.into(),
            dimension,
            timestamps_ms,
            values,
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

    pub fn len(&self) -> usize {
        self.timestamps_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_ms.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn slice_steps(&self, start: usize, end: usize) -> LabelSequence {
        LabelSequence {
            subject_id: self.subject_id.clone(),
            dimension: self.dimension,
            timestamps_ms: self.timestamps_ms[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }
}

/// One subject's fusion-ready bundle: modalities and labels on one grid.
///
/// Modality order is fixed at construction and defines the feature
/// concatenation order everywhere downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSample {
    subject_id: String,
    modalities: Vec<FeatureSequence>,
    labels: BTreeMap<Dimension, LabelSequence>,
    role: Role,
}

impl AlignedSample {
    /// Assembles a sample from already-aligned parts, checking that every
    /// member sequence shares the identical timestamp grid.
    pub fn new(
        modalities: Vec<FeatureSequence>,
        labels: Vec<LabelSequence>,
        role: Role,
    ) -> Result<Self, SeqError> {
        let first = modalities.first().ok_or(SeqError::EmptyInput)?;
        let subject_id = first.subject_id().to_owned();
        let grid = first.timestamps_ms().to_vec();
        for m in &modalities {
            if m.subject_id() != subject_id {
                return Err(SeqError::SubjectMismatch {
                    a: subject_id.clone(),
                    b: m.subject_id().to_owned(),
                });
            }
            if m.timestamps_ms() != grid.as_slice() {
                return Err(SeqError::LayoutMismatch {
                    detail: "modality grids differ".into(),
                });
            }
        }
        let mut label_map = BTreeMap::new();
        for l in labels {
            if l.subject_id() != subject_id {
                return Err(SeqError::SubjectMismatch {
                    a: subject_id.clone(),
                    b: l.subject_id().to_owned(),
                });
            }
            if l.timestamps_ms() != grid.as_slice() {
                return Err(SeqError::LayoutMismatch {
                    detail: "label grid differs from modality grid".into(),
                });
            }
            label_map.insert(l.dimension(), l);
        }
        Ok(AlignedSample {
            subject_id,
            modalities,
            labels: label_map,
            role,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn modalities(&self) -> &[FeatureSequence] {
        &self.modalities
    }

    pub fn labels(&self) -> &BTreeMap<Dimension, LabelSequence> {
        &self.labels
    }

    pub fn label(&self, dim: Dimension) -> Option<&LabelSequence> {
        self.labels.get(&dim)
    }

    pub fn timestamps_ms(&self) -> &[i64] {
        self.modalities[0].timestamps_ms()
    }

    /// Steps `T` on the common grid.
    pub fn len(&self) -> usize {
        self.modalities[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total concatenated feature width `N`.
    pub fn total_dim(&self) -> usize {
        self.modalities.iter().map(|m| m.dim()).sum()
    }

    /// Per-modality widths in concatenation order.
    pub fn modality_dims(&self) -> Vec<usize> {
        self.modalities.iter().map(|m| m.dim()).collect()
    }

    /// Concatenates all modalities into one `T x N` matrix in the recorded
    /// modality order.
    pub fn concat_features(&self) -> Mat {
        let t = self.len();
        let n = self.total_dim();
        let mut out = Mat::zeros(t, n);
        for r in 0..t {
            let row = out.row_mut(r);
            let mut off = 0;
            for m in &self.modalities {
                let src = m.values().row(r);
                row[off..off + src.len()].copy_from_slice(src);
                off += src.len();
            }
        }
        out
    }

    /// Sub-sample over the step range `[start, end)`, preserving absolute
    /// timestamps. Requires at least 2 steps.
    pub fn slice_steps(&self, start: usize, end: usize) -> Result<AlignedSample, SeqError> {
        if end > self.len() || start >= end {
            return Err(SeqError::EmptyIntersection);
        }
        if end - start < 2 {
            return Err(SeqError::TooShort { len: end - start });
        }
        Ok(AlignedSample {
            subject_id: self.subject_id.clone(),
            modalities: self
                .modalities
                .iter()
                .map(|m| m.slice_steps(start, end))
                .collect(),
            labels: self
                .labels
                .iter()
                .map(|(d, l)| (*d, l.slice_steps(start, end)))
                .collect(),
            role: self.role,
        })
    }

    /// True when `other` has the same modality names and widths in the same
    /// order.
    pub fn layout_matches(&self, other: &AlignedSample) -> bool {
        self.modalities.len() == other.modalities.len()
            && self
                .modalities
                .iter()
                .zip(&other.modalities)
                .all(|(a, b)| a.modality() == b.modality() && a.dim() == b.dim())
    }
}

/// Intersects the timestamp grids of all inputs, crops every sequence to the
/// common range, and bundles them. Modality order is preserved from the
/// input order; no interpolation is performed.
pub fn align_and_label(
    features: Vec<FeatureSequence>,
    labels: Vec<LabelSequence>,
) -> Result<AlignedSample, SeqError> {
    let first = features.first().ok_or(SeqError::EmptyInput)?;
    let subject = first.subject_id().to_owned();
    for f in &features {
        if f.subject_id() != subject {
            return Err(SeqError::SubjectMismatch {
                a: subject.clone(),
                b: f.subject_id().to_owned(),
            });
        }
    }
    for l in &labels {
        if l.subject_id() != subject {
            return Err(SeqError::SubjectMismatch {
                a: subject.clone(),
                b: l.subject_id().to_owned(),
            });
        }
    }

    let starts_ends = features
        .iter()
        .map(|f| (f.timestamps_ms()[0], *f.timestamps_ms().last().unwrap()))
        .chain(
            labels
                .iter()
                .map(|l| (l.timestamps_ms()[0], *l.timestamps_ms().last().unwrap())),
        );
    let mut start = i64::MIN;
    let mut end = i64::MAX;
    for (s, e) in starts_ends {
        start = start.max(s);
        end = end.min(e);
    }
    if end - start < GRID_STEP_MS {
        // Fewer than 2 common grid points.
        return Err(SeqError::EmptyIntersection);
    }
    // All grids share the 500 ms step; a non-empty intersection additionally
    // requires equal phase.
    for f in &features {
        if (start - f.timestamps_ms()[0]) % GRID_STEP_MS != 0 {
            return Err(SeqError::EmptyIntersection);
        }
    }
    for l in &labels {
        if (start - l.timestamps_ms()[0]) % GRID_STEP_MS != 0 {
            return Err(SeqError::EmptyIntersection);
        }
    }

    let steps = ((end - start) / GRID_STEP_MS) as usize + 1;
    let cropped_features = features
        .iter()
        .map(|f| {
            let off = ((start - f.timestamps_ms()[0]) / GRID_STEP_MS) as usize;
            f.slice_steps(off, off + steps)
        })
        .collect();
    let cropped_labels = labels
        .iter()
        .map(|l| {
            let off = ((start - l.timestamps_ms()[0]) / GRID_STEP_MS) as usize;
            l.slice_steps(off, off + steps)
        })
        .collect();
    AlignedSample::new(cropped_features, cropped_labels, Role::Train)
}

/// Per-modality z-score statistics fitted on the training partition.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    modalities: Vec<ModalityStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalityStats {
    pub name: String,
    pub mean: Vec<f64>,
    /// Population standard deviation, floored at [`NormStats::STD_FLOOR`].
    pub std: Vec<f64>,
}

impl NormStats {
    /// Floor applied to every standard deviation so constant features map
    /// to exactly zero instead of dividing by zero.
    pub const STD_FLOOR: f64 = 1e-6;

    pub fn from_parts(modalities: Vec<ModalityStats>) -> Self {
        NormStats { modalities }
    }

    pub fn modalities(&self) -> &[ModalityStats] {
        &self.modalities
    }
}

/// Fits per-feature mean/std over all timesteps of all training samples.
pub fn fit_norm_stats(train_samples: &[&AlignedSample]) -> Result<NormStats, SeqError> {
    let first = *train_samples.first().ok_or(SeqError::EmptyInput)?;
    for s in train_samples {
        if !first.layout_matches(s) {
            return Err(SeqError::LayoutMismatch {
                detail: "training samples disagree on modality layout".into(),
            });
        }
    }
    let mut out = Vec::with_capacity(first.modalities().len());
    for (mi, m) in first.modalities().iter().enumerate() {
        let dim = m.dim();
        let mut sum = alloc::vec![0.0; dim];
        let mut count = 0usize;
        for s in train_samples {
            let vals = s.modalities()[mi].values();
            for r in 0..vals.rows() {
                for (c, v) in vals.row(r).iter().enumerate() {
                    sum[c] += v;
                }
            }
            count += vals.rows();
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        let mut sq = alloc::vec![0.0; dim];
        for s in train_samples {
            let vals = s.modalities()[mi].values();
            for r in 0..vals.rows() {
                for (c, v) in vals.row(r).iter().enumerate() {
                    let d = v - mean[c];
                    sq[c] += d * d;
                }
            }
        }
        let std: Vec<f64> = sq
            .iter()
            .map(|s| crate::math::sqrt(s / count as f64).max(NormStats::STD_FLOOR))
            .collect();
        out.push(ModalityStats {
            name: m.modality().to_owned(),
            mean,
            std,
        });
    }
    Ok(NormStats::from_parts(out))
}

/// Applies z-score normalization to every feature. Labels pass through
/// untouched.
pub fn apply_norm(sample: &AlignedSample, stats: &NormStats) -> Result<AlignedSample, SeqError> {
    if stats.modalities().len() != sample.modalities().len() {
        return Err(SeqError::DimensionMismatch {
            expected: stats.modalities().len(),
            actual: sample.modalities().len(),
        });
    }
    let mut modalities = Vec::with_capacity(sample.modalities().len());
    for (m, st) in sample.modalities().iter().zip(stats.modalities()) {
        if st.mean.len() != m.dim() {
            return Err(SeqError::DimensionMismatch {
                expected: st.mean.len(),
                actual: m.dim(),
            });
        }
        let mut values = m.values().clone();
        for r in 0..values.rows() {
            for (c, v) in values.row_mut(r).iter_mut().enumerate() {
                *v = (*v - st.mean[c]) / st.std[c];
            }
        }
        modalities.push(FeatureSequence {
            subject_id: m.subject_id().to_owned(),
            modality: m.modality().to_owned(),
            timestamps_ms: m.timestamps_ms().to_vec(),
            values,
        });
    }
    Ok(AlignedSample {
        subject_id: sample.subject_id().to_owned(),
        modalities,
        labels: sample.labels().clone(),
        role: sample.role(),
    })
}

/// A test subject's timeline partitioned for personalisation: the first
/// 60 s for subject-specific training, the next 60 s for seed selection,
/// and the remainder as the held-out personal test segment.
#[derive(Debug, Clone)]
pub struct SubjectSplit {
    pub subject_id: String,
    /// Segments with fewer than 2 steps are `None`.
    pub personal_train: Option<AlignedSample>,
    pub personal_dev: Option<AlignedSample>,
    pub personal_test: Option<AlignedSample>,
    /// Step index ranges of the three segments, in order.
    pub ranges: [(usize, usize); 3],
}

pub fn split_subject(sample: &AlignedSample) -> SubjectSplit {
    let t = sample.len();
    let b1 = t.min(PERSONAL_SEGMENT_STEPS);
    let b2 = t.min(2 * PERSONAL_SEGMENT_STEPS);
    let seg = |s: usize, e: usize| {
        if e - s >= 2 {
            Some(sample.slice_steps(s, e).expect("segment within bounds"))
        } else {
            None
        }
    };
    SubjectSplit {
        subject_id: sample.subject_id().to_owned(),
        personal_train: seg(0, b1),
        personal_dev: seg(b1, b2),
        personal_test: seg(b2, t),
        ranges: [(0, b1), (b1, b2), (b2, t)],
    }
}
