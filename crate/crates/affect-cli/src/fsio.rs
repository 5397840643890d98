//! Filesystem wrappers: the path-based loaders over the core text codecs,
//! and the checkpoint save/load pair over the core byte format.

use crate::error::CliError;
use affect_core::ecg::RawSignal;
use affect_core::nn::{decode_checkpoint, encode_checkpoint, Model};
use affect_core::seqdata::csv::{parse_feature_csv, parse_label_csv, parse_signal_csv};
use affect_core::seqdata::{Dimension, FeatureSequence, LabelSequence, NormStats};
use std::fs;
use std::path::Path;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Loads one modality's feature CSV, enforcing `expected_dim` when given.
pub fn load_feature_csv(
    path: &Path,
    subject_id: &str,
    modality: &str,
    expected_dim: Option<usize>,
) -> Result<FeatureSequence, CliError> {
    let text = read_text(path)?;
    parse_feature_csv(&text, subject_id, modality, expected_dim)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn load_label_csv(
    path: &Path,
    subject_id: &str,
    dimension: Dimension,
) -> Result<LabelSequence, CliError> {
    let text = read_text(path)?;
    parse_label_csv(&text, subject_id, dimension)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Loads a `timestamp,value` signal file, inferring the rate from the step.
pub fn load_signal_csv(path: &Path) -> Result<RawSignal, CliError> {
    let text = read_text(path)?;
    parse_signal_csv(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn save_checkpoint(model: &Model, stats: &NormStats, path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, encode_checkpoint(model, stats)).map_err(|e| CliError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, NormStats), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_checkpoint(&bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}
