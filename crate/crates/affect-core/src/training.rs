//! Training: window segmentation, global pretraining with early stopping,
//! the per-subject personalisation protocol with its fixed 10-seed sweep,
//! and full-sequence prediction.
//!
//! Two-step protocol: [`pretrain`] fits one model per emotion dimension on
//! the whole training partition (stage-1 windows, CCC loss, Adam, model
//! selection on dev CCC); [`personalise`] then copies that model for one
//! test subject and fine-tunes it on the subject's first 60 s with stage-2
//! windows, once per seed, keeping the seed that maximises CCC on the
//! subject's next 60 s.
//!
//! Evaluation always runs the model over the unsegmented full sequence;
//! windows exist only to form training batches. All shuffling draws from a
//! [`SplitMix64`] stream salted from the run seed, so every checkpoint is a
//! pure function of `(corpus, configs, seeds)`.

use crate::ensemble::{PredictionSequence, ProvenanceTag};
use crate::mat::Mat;
use crate::nn::{
    adam_step, backward, forward, init_model, AdamState, Gradients, Model, ModelConfig, NnError,
};
use crate::objective::{ccc, ccc_loss, CccError};
use crate::rng::SplitMix64;
use crate::seqdata::{
    apply_norm, fit_norm_stats, AlignedSample, Dimension, NormStats, SeqError, SubjectSplit,
};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Salt xor-ed into seeds to derive the batch-shuffling stream, keeping it
/// distinct from the weight-initialisation stream ("SHUFFLE1").
const SHUFFLE_STREAM_SALT: u64 = 0x5348_5546_464C_4531;

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    EmptyCorpus,
    LayoutMismatch { detail: String },
    EmptySegment { subject: String, segment: &'static str },
    MissingLabel { subject: String, dimension: Dimension },
    InvalidConfig { detail: String },
    NonFiniteLoss { epoch: usize },
    Nn(NnError),
    Metric(CccError),
    Data(SeqError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyCorpus => write!(f, "empty corpus"),
            TrainError::LayoutMismatch { detail } => write!(f, "layout mismatch: {detail}"),
            TrainError::EmptySegment { subject, segment } => {
                write!(f, "subject {subject:?} has an empty {segment} segment")
            }
            TrainError::MissingLabel { subject, dimension } => {
                write!(f, "subject {subject:?} has no {dimension} labels")
            }
            TrainError::InvalidConfig { detail } => write!(f, "invalid train config: {detail}"),
            TrainError::NonFiniteLoss { epoch } => {
                write!(f, "non-finite loss at epoch {epoch}")
            }
            TrainError::Nn(e) => write!(f, "{e}"),
            TrainError::Metric(e) => write!(f, "{e}"),
            TrainError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<NnError> for TrainError {
    fn from(e: NnError) -> Self {
        TrainError::Nn(e)
    }
}

impl From<CccError> for TrainError {
    fn from(e: CccError) -> Self {
        TrainError::Metric(e)
    }
}

impl From<SeqError> for TrainError {
    fn from(e: SeqError) -> Self {
        TrainError::Data(e)
    }
}

/// Window/hop sizes in 2 Hz label steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowingConfig {
    pub win_steps: usize,
    pub hop_steps: usize,
}

impl WindowingConfig {
    pub fn new(win_steps: usize, hop_steps: usize) -> Self {
        WindowingConfig {
            win_steps,
            hop_steps,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.win_steps < 2 || self.hop_steps == 0 || self.hop_steps > self.win_steps {
            return Err(TrainError::InvalidConfig {
                detail: format!(
                    "windowing needs win >= 2 and 1 <= hop <= win, got win {} hop {}",
                    self.win_steps, self.hop_steps
                ),
            });
        }
        Ok(())
    }
}

/// Hyperparameters of the two-step training protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Stage-1 (global pretraining) windows: 200 steps / 100 steps.
    pub stage1_window: WindowingConfig,
    /// Stage-2 (personalisation) windows: 10 steps / 5 steps.
    pub stage2_window: WindowingConfig,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without dev improvement tolerated before stopping.
    pub patience: usize,
    pub finetune_learning_rate: f64,
    pub finetune_max_epochs: usize,
    pub finetune_patience: usize,
    /// The fixed sweep seeds; always exactly 10.
    pub seeds: Vec<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            stage1_window: WindowingConfig::new(200, 100),
            stage2_window: WindowingConfig::new(10, 5),
            learning_rate: 1e-3,
            batch_size: 128,
            max_epochs: 100,
            patience: 15,
            finetune_learning_rate: 1e-4,
            finetune_max_epochs: 50,
            finetune_patience: 10,
            seeds: (0..10).collect(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        self.stage1_window.validate()?;
        self.stage2_window.validate()?;
        let invalid = |detail: String| TrainError::InvalidConfig { detail };
        let valid_rate = |x: f64| x.is_finite() && x >= 0.0;
        if !valid_rate(self.learning_rate) || !valid_rate(self.finetune_learning_rate) {
            return Err(invalid("learning rates must be non-negative".into()));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(invalid("max_epochs must be positive".into()));
        }
        if self.seeds.len() != 10 {
            return Err(invalid(format!(
                "the sweep uses exactly 10 seeds, got {}",
                self.seeds.len()
            )));
        }
        Ok(())
    }
}

/// One training window: concatenated features and the target series.
#[derive(Debug, Clone)]
pub struct TrainWindow {
    pub features: Mat,
    pub targets: Vec<f64>,
    pub start_step: usize,
}

/// Segments a sample into overlapping windows. Starts run `0, hop, 2 hop,
/// ...` while they fall inside the sequence; each window is clipped to the
/// sequence end and windows shorter than 2 steps are dropped.
pub fn make_windows(
    sample: &AlignedSample,
    cfg: &WindowingConfig,
    dimension: Dimension,
) -> Result<Vec<TrainWindow>, TrainError> {
    cfg.validate()?;
    let label = sample
        .label(dimension)
        .ok_or_else(|| TrainError::MissingLabel {
            subject: sample.subject_id().to_string(),
            dimension,
        })?;
    let features = sample.concat_features();
    let t = sample.len();
    let mut out = Vec::new();
    let mut start = 0;
    while start < t {
        let end = (start + cfg.win_steps).min(t);
        if end - start >= 2 {
            out.push(TrainWindow {
                features: features.row_range(start, end),
                targets: label.values()[start..end].to_vec(),
                start_step: start,
            });
        }
        start += cfg.hop_steps;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub train_loss: f64,
    pub dev_ccc: f64,
}

/// Per-epoch bookkeeping of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Stats per epoch, in order (epoch numbers are 1-based).
    pub epochs: Vec<EpochStats>,
    /// 1-based epoch whose parameters were kept; 0 if no epoch ran.
    pub best_epoch: usize,
    pub best_dev_ccc: f64,
    pub wall_time_secs: f64,
}

/// `epoch,train_loss,dev_ccc` rows.
pub fn render_train_report_csv(report: &TrainReport) -> String {
    let mut out = String::from("epoch,train_loss,dev_ccc\n");
    for (i, e) in report.epochs.iter().enumerate() {
        let _ = core::fmt::write(
            &mut out,
            format_args!("{},{},{}\n", i + 1, e.train_loss, e.dev_ccc),
        );
    }
    out
}

/// A pretrained model bundled with the normalization statistics it expects
/// (together these form the checkpoint payload).
#[derive(Debug, Clone, PartialEq)]
pub struct Pretrained {
    pub model: Model,
    pub stats: NormStats,
    pub report: TrainReport,
}

/// Result of the per-subject seed sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Personalised {
    pub model: Model,
    pub chosen_seed: u64,
    /// Personal-dev CCC of the chosen model.
    pub dev_ccc: f64,
    /// Every seed's personal-dev CCC, in sweep order.
    pub seed_scores: Vec<(u64, f64)>,
}

fn check_layout(model_cfg: &ModelConfig, sample: &AlignedSample) -> Result<(), TrainError> {
    if model_cfg.input_dims != sample.modality_dims() {
        return Err(TrainError::LayoutMismatch {
            detail: format!(
                "model expects widths {:?}, sample {:?} has {:?}",
                model_cfg.input_dims,
                sample.subject_id(),
                sample.modality_dims()
            ),
        });
    }
    Ok(())
}

/// CCC of a full-sequence pass against the sample's labels.
fn full_sequence_ccc(
    model: &Model,
    sample: &AlignedSample,
    dimension: Dimension,
) -> Result<f64, TrainError> {
    let label = sample
        .label(dimension)
        .ok_or_else(|| TrainError::MissingLabel {
            subject: sample.subject_id().to_string(),
            dimension,
        })?;
    let (preds, _) = forward(model, &sample.concat_features())?;
    if preds.iter().any(|p| !p.is_finite()) {
        return Err(TrainError::NonFiniteLoss { epoch: 0 });
    }
    Ok(ccc(&preds, label.values())?.ccc)
}

fn mean_dev_ccc(
    model: &Model,
    dev: &[AlignedSample],
    dimension: Dimension,
) -> Result<f64, TrainError> {
    let mut sum = 0.0;
    for s in dev {
        sum += full_sequence_ccc(model, s, dimension)?;
    }
    Ok(sum / dev.len() as f64)
}

/// One pass over all windows in shuffled order; returns the mean window
/// loss. Per batch: the CCC loss of each window is averaged, gradients are
/// accumulated in batch order, and one Adam step is taken. Windows whose
/// targets are degenerate (constant and exactly matched) contribute loss 1
/// with zero gradient.
fn train_epoch(
    model: &mut Model,
    adam: &mut AdamState,
    windows: &[TrainWindow],
    order: &mut [usize],
    shuffle_rng: &mut SplitMix64,
    batch_size: usize,
) -> Result<f64, TrainError> {
    shuffle_rng.shuffle(order);
    let mut loss_sum = 0.0;
    for batch in order.chunks(batch_size) {
        let mut acc = vec![0.0; model.param_count()];
        let inv = 1.0 / batch.len() as f64;
        for &wi in batch {
            let w = &windows[wi];
            let (preds, cache) = forward(model, &w.features)?;
            match ccc_loss(&preds, &w.targets) {
                Ok((loss, mut d_pred)) => {
                    loss_sum += loss;
                    for g in d_pred.iter_mut() {
                        *g *= inv;
                    }
                    let grads = backward(model, &cache, &d_pred)?;
                    for (a, g) in acc.iter_mut().zip(grads.as_slice()) {
                        *a += g;
                    }
                }
                Err(CccError::Degenerate) => loss_sum += 1.0,
                Err(e) => return Err(e.into()),
            }
        }
        adam_step(model, &Gradients::from_flat(acc), adam)?;
    }
    Ok(loss_sum / windows.len() as f64)
}

/// Global pretraining on the whole training partition.
///
/// Fits normalization statistics on `train`, segments every normalized
/// subject with the stage-1 windows, and optimizes the CCC loss with Adam.
/// After each epoch the dev CCC (full-sequence inference, averaged over dev
/// subjects) is evaluated; the best epoch's parameters are kept and
/// training stops after `patience` epochs without improvement. `on_epoch`
/// is invoked once per epoch for progress reporting.
pub fn pretrain(
    train: &[&AlignedSample],
    dev: &[&AlignedSample],
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    dimension: Dimension,
    mut on_epoch: impl FnMut(usize, &EpochStats),
) -> Result<Pretrained, TrainError> {
    train_cfg.validate()?;
    model_cfg.validate()?;
    if train.is_empty() || dev.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    for s in train.iter().chain(dev.iter()) {
        check_layout(model_cfg, s)?;
    }

    #[cfg(feature = "std")]
    let t0 = std::time::Instant::now();

    let stats = fit_norm_stats(train)?;
    let train_n: Vec<AlignedSample> = train
        .iter()
        .map(|s| apply_norm(s, &stats))
        .collect::<Result<_, _>>()?;
    let dev_n: Vec<AlignedSample> = dev
        .iter()
        .map(|s| apply_norm(s, &stats))
        .collect::<Result<_, _>>()?;

    let mut windows = Vec::new();
    for s in &train_n {
        windows.extend(make_windows(s, &train_cfg.stage1_window, dimension)?);
    }
    if windows.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }

    let mut model = init_model(model_cfg)?;
    let mut adam = AdamState::new(model.param_count(), train_cfg.learning_rate);
    let mut shuffle_rng = SplitMix64::new(model_cfg.seed ^ SHUFFLE_STREAM_SALT);
    let mut order: Vec<usize> = (0..windows.len()).collect();

    let mut best_params = model.params().to_vec();
    let mut best_ccc = f64::NEG_INFINITY;
    let mut best_epoch = 0usize;
    let mut stale = 0usize;
    let mut epochs = Vec::new();
    for epoch in 1..=train_cfg.max_epochs {
        let train_loss = train_epoch(
            &mut model,
            &mut adam,
            &windows,
            &mut order,
            &mut shuffle_rng,
            train_cfg.batch_size,
        )?;
        if !train_loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        let dev_ccc = mean_dev_ccc(&model, &dev_n, dimension)?;
        let stats_row = EpochStats {
            train_loss,
            dev_ccc,
        };
        on_epoch(epoch, &stats_row);
        epochs.push(stats_row);
        if dev_ccc > best_ccc {
            best_ccc = dev_ccc;
            best_epoch = epoch;
            best_params.copy_from_slice(model.params());
            stale = 0;
        } else {
            stale += 1;
            if stale > train_cfg.patience {
                break;
            }
        }
    }
    model.params_mut().copy_from_slice(&best_params);

    #[cfg(feature = "std")]
    let wall_time_secs = t0.elapsed().as_secs_f64();
    #[cfg(not(feature = "std"))]
    let wall_time_secs = 0.0;

    Ok(Pretrained {
        model,
        stats,
        report: TrainReport {
            epochs,
            best_epoch,
            best_dev_ccc: best_ccc,
            wall_time_secs,
        },
    })
}

fn fine_tune_one_seed(
    pretrained: &Model,
    windows: &[TrainWindow],
    personal_dev: &AlignedSample,
    train_cfg: &TrainConfig,
    dimension: Dimension,
    seed: u64,
) -> Result<(Model, f64), TrainError> {
    let mut model = pretrained.clone();
    if train_cfg.finetune_max_epochs == 0 {
        let dev_ccc = full_sequence_ccc(&model, personal_dev, dimension)?;
        return Ok((model, dev_ccc));
    }
    let mut adam = AdamState::new(model.param_count(), train_cfg.finetune_learning_rate);
    let mut shuffle_rng = SplitMix64::new(seed ^ SHUFFLE_STREAM_SALT);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    let mut best_params = model.params().to_vec();
    let mut best_ccc = f64::NEG_INFINITY;
    let mut stale = 0usize;
    for epoch in 1..=train_cfg.finetune_max_epochs {
        let loss = train_epoch(
            &mut model,
            &mut adam,
            windows,
            &mut order,
            &mut shuffle_rng,
            train_cfg.batch_size,
        )?;
        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        let dev_ccc = full_sequence_ccc(&model, personal_dev, dimension)?;
        if dev_ccc > best_ccc {
            best_ccc = dev_ccc;
            best_params.copy_from_slice(model.params());
            stale = 0;
        } else {
            stale += 1;
            if stale > train_cfg.finetune_patience {
                break;
            }
        }
    }
    model.params_mut().copy_from_slice(&best_params);
    Ok((model, best_ccc))
}

/// Per-subject personalisation: for each of the 10 fixed seeds, copy the
/// pretrained parameters, fine-tune on the subject's personal-train segment
/// (stage-2 windows, fresh Adam at the fine-tune rate, early stopping on
/// the personal-dev CCC), and keep the seed whose model scores highest on
/// personal-dev. Ties go to the earliest seed in sweep order.
pub fn personalise(
    pretrained: &Model,
    stats: &NormStats,
    split: &SubjectSplit,
    train_cfg: &TrainConfig,
    dimension: Dimension,
) -> Result<Personalised, TrainError> {
    train_cfg.validate()?;
    let p_train = split
        .personal_train
        .as_ref()
        .ok_or_else(|| TrainError::EmptySegment {
            subject: split.subject_id.clone(),
            segment: "personal_train",
        })?;
    let p_dev = split
        .personal_dev
        .as_ref()
        .ok_or_else(|| TrainError::EmptySegment {
            subject: split.subject_id.clone(),
            segment: "personal_dev",
        })?;
    check_layout(pretrained.config(), p_train)?;

    let train_n = apply_norm(p_train, stats)?;
    let dev_n = apply_norm(p_dev, stats)?;
    let windows = make_windows(&train_n, &train_cfg.stage2_window, dimension)?;

    let mut best: Option<(u64, f64, Model)> = None;
    let mut seed_scores = Vec::with_capacity(train_cfg.seeds.len());
    for &seed in &train_cfg.seeds {
        let (model, dev_ccc) =
            fine_tune_one_seed(pretrained, &windows, &dev_n, train_cfg, dimension, seed)?;
        seed_scores.push((seed, dev_ccc));
        let improves = match &best {
            None => true,
            Some((_, best_ccc, _)) => dev_ccc > *best_ccc,
        };
        if improves {
            best = Some((seed, dev_ccc, model));
        }
    }
    let (chosen_seed, dev_ccc, model) = best.expect("seed list is non-empty");
    Ok(Personalised {
        model,
        chosen_seed,
        dev_ccc,
        seed_scores,
    })
}

/// Runs the model over the entire (already normalized) sequence in one
/// unsegmented pass and packages the result.
pub fn predict_full(
    model: &Model,
    sample: &AlignedSample,
    dimension: Dimension,
    provenance: Vec<ProvenanceTag>,
) -> Result<PredictionSequence, TrainError> {
    check_layout(model.config(), sample)?;
    let (preds, _) = forward(model, &sample.concat_features())?;
    PredictionSequence::new(
        sample.subject_id().to_string(),
        dimension,
        sample.timestamps_ms().to_vec(),
        preds,
        provenance,
    )
    .map_err(TrainError::Data)
}
