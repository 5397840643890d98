//! Run configuration: flat `key = value` text files.
//!
//! Required keys: `manifest`, `combo` (modality names joined with `+`),
//! `dimension` (`arousal`, `valence`, or `both`). Everything else has the
//! standard operating-point defaults. Unknown and duplicate keys are
//! rejected; the manifest must exist and the combo must reference
//! modalities it defines.

use crate::error::CliError;
use crate::manifest::Manifest;
use affect_core::seqdata::Dimension;
use affect_core::training::{TrainConfig, WindowingConfig};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest_path: PathBuf,
    /// Modality names in concatenation order.
    pub combo: Vec<String>,
    /// The raw combo string, used as provenance and in file names.
    pub combo_name: String,
    pub dimensions: Vec<Dimension>,
    pub model_dim: usize,
    pub rnn_layers: usize,
    pub rnn_bi: bool,
    /// Defaults to `model_dim / 2` when absent.
    pub head_hidden: Option<usize>,
    pub seed: u64,
    pub train: TrainConfig,
}

impl RunConfig {
    /// Input widths of the combo, resolved against a manifest.
    pub fn input_dims(&self, manifest: &Manifest) -> Result<Vec<usize>, CliError> {
        self.combo
            .iter()
            .map(|name| {
                manifest
                    .features
                    .iter()
                    .find(|f| &f.modality == name)
                    .map(|f| f.dim)
                    .ok_or_else(|| {
                        CliError::usage(format!("combo modality {name:?} not in manifest"))
                    })
            })
            .collect()
    }

    pub fn model_config(&self, manifest: &Manifest) -> Result<affect_core::nn::ModelConfig, CliError> {
        let mut cfg = affect_core::nn::ModelConfig::new(self.input_dims(manifest)?, self.model_dim)
            .with_layers(self.rnn_layers)
            .with_bidirectional(self.rnn_bi)
            .with_seed(self.seed);
        if let Some(hh) = self.head_hidden {
            cfg = cfg.with_head_hidden(hh);
        }
        Ok(cfg)
    }

    /// Canonical `key = value` rendering of the fully resolved config (the
    /// `run.lock` payload).
    pub fn render(&self) -> String {
        let mut out = String::new();
        let dims = self
            .dimensions
            .iter()
            .map(|d| d.as_str())
            .collect::<Vec<_>>()
            .join(",");
        let t = &self.train;
        let _ = writeln!(out, "manifest = {}", self.manifest_path.display());
        let _ = writeln!(out, "combo = {}", self.combo_name);
        let _ = writeln!(out, "dimension = {dims}");
        let _ = writeln!(out, "model_dim = {}", self.model_dim);
        let _ = writeln!(out, "rnn_layers = {}", self.rnn_layers);
        let _ = writeln!(out, "rnn_bi = {}", self.rnn_bi);
        let _ = writeln!(
            out,
            "head_hidden = {}",
            self.head_hidden.unwrap_or((self.model_dim / 2).max(1))
        );
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "lr = {}", t.learning_rate);
        let _ = writeln!(out, "batch_size = {}", t.batch_size);
        let _ = writeln!(out, "max_epochs = {}", t.max_epochs);
        let _ = writeln!(out, "patience = {}", t.patience);
        let _ = writeln!(out, "win_steps = {}", t.stage1_window.win_steps);
        let _ = writeln!(out, "hop_steps = {}", t.stage1_window.hop_steps);
        let _ = writeln!(out, "finetune_lr = {}", t.finetune_learning_rate);
        let _ = writeln!(out, "finetune_max_epochs = {}", t.finetune_max_epochs);
        let _ = writeln!(out, "finetune_patience = {}", t.finetune_patience);
        let _ = writeln!(out, "finetune_win_steps = {}", t.stage2_window.win_steps);
        let _ = writeln!(out, "finetune_hop_steps = {}", t.stage2_window.hop_steps);
        let seeds = t
            .seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "seeds = {seeds}");
        out
    }
}

const KNOWN_KEYS: &[&str] = &[
    "manifest",
    "combo",
    "dimension",
    "model_dim",
    "rnn_layers",
    "rnn_bi",
    "head_hidden",
    "seed",
    "lr",
    "batch_size",
    "max_epochs",
    "patience",
    "win_steps",
    "hop_steps",
    "finetune_lr",
    "finetune_max_epochs",
    "finetune_patience",
    "finetune_win_steps",
    "finetune_hop_steps",
    "seeds",
];

struct Raw {
    map: BTreeMap<String, String>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(text) => text.parse().map_err(|_| {
                CliError::usage(format!("key {key:?}: cannot parse value {text:?}"))
            }),
        }
    }
}

/// Parses and fully validates a run configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = crate::fsio::read_text(path)
        .map_err(|_| CliError::usage(format!("config file {} not readable", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("line {}: expected `key = value`, got {line:?}", i + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(format!("unknown key {key:?}")));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(CliError::usage(format!("duplicate key {key:?}")));
        }
    }
    let raw = Raw { map };

    let manifest_text = raw
        .get("manifest")
        .ok_or_else(|| CliError::usage("missing required key \"manifest\""))?;
    let manifest_path = {
        let p = PathBuf::from(manifest_text);
        if p.is_absolute() {
            p
        } else {
            path.parent().unwrap_or(Path::new(".")).join(p)
        }
    };
    if !manifest_path.is_file() {
        return Err(CliError::usage(format!(
            "manifest path {} does not exist",
            manifest_path.display()
        )));
    }
    // Absolute in run.lock so results reproduce from the output directory.
    let manifest_path = std::fs::canonicalize(&manifest_path).unwrap_or(manifest_path);

    let combo_name = raw
        .get("combo")
        .ok_or_else(|| CliError::usage("missing required key \"combo\""))?
        .to_string();
    let combo: Vec<String> = combo_name.split('+').map(|s| s.trim().to_string()).collect();
    if combo.iter().any(|c| c.is_empty()) {
        return Err(CliError::usage(format!("key \"combo\": bad value {combo_name:?}")));
    }

    let dimensions = match raw
        .get("dimension")
        .ok_or_else(|| CliError::usage("missing required key \"dimension\""))?
    {
        "both" => vec![Dimension::Arousal, Dimension::Valence],
        text => match Dimension::parse(text) {
            Some(d) => vec![d],
            None => {
                return Err(CliError::usage(format!(
                    "key \"dimension\": expected arousal, valence, or both, got {text:?}"
                )))
            }
        },
    };

    let model_dim: usize = raw.parse_as("model_dim", 256)?;
    if model_dim != 128 && model_dim != 256 {
        eprintln!("warning: model_dim = {model_dim} is outside the standard {{128, 256}} operating points");
    }
    let seeds = match raw.get("seeds") {
        None => (0..10).collect(),
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::usage(format!("key \"seeds\": bad value {s:?}")))
            })
            .collect::<Result<Vec<u64>, CliError>>()?,
    };

    let train = TrainConfig {
        stage1_window: WindowingConfig::new(
            raw.parse_as("win_steps", 200)?,
            raw.parse_as("hop_steps", 100)?,
        ),
        stage2_window: WindowingConfig::new(
            raw.parse_as("finetune_win_steps", 10)?,
            raw.parse_as("finetune_hop_steps", 5)?,
        ),
        learning_rate: raw.parse_as("lr", 1e-3)?,
        batch_size: raw.parse_as("batch_size", 128)?,
        max_epochs: raw.parse_as("max_epochs", 100)?,
        patience: raw.parse_as("patience", 15)?,
        finetune_learning_rate: raw.parse_as("finetune_lr", 1e-4)?,
        finetune_max_epochs: raw.parse_as("finetune_max_epochs", 50)?,
        finetune_patience: raw.parse_as("finetune_patience", 10)?,
        seeds,
    };
    train.validate()?;

    let config = RunConfig {
        manifest_path,
        combo,
        combo_name,
        dimensions,
        model_dim,
        rnn_layers: raw.parse_as("rnn_layers", 1)?,
        rnn_bi: raw.parse_as("rnn_bi", false)?,
        head_hidden: match raw.get("head_hidden") {
            None => None,
            Some(_) => Some(raw.parse_as("head_hidden", 0)?),
        },
        seed: raw.parse_as("seed", 0)?,
        train,
    };

    // The combo must reference modalities the manifest actually provides.
    let manifest = Manifest::parse_file(&config.manifest_path)?;
    config.input_dims(&manifest)?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_fixture(dir: &Path) -> PathBuf {
        fs::create_dir_all(dir).unwrap();
        let feat = "timestamp,f_0\n0,0.1\n500,0.2\n";
        let label = "timestamp,value\n0,0.1\n500,0.2\n";
        fs::write(dir.join("f.csv"), feat).unwrap();
        fs::write(dir.join("l.csv"), label).unwrap();
        let manifest = "subject s1 train\nfeature s1 audio 1 f.csv\nlabel s1 arousal l.csv\n";
        let mpath = dir.join("manifest.txt");
        fs::write(&mpath, manifest).unwrap();
        mpath
    }

    fn tmpdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("affect-config-test-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tmpdir("minimal");
        write_fixture(&dir);
        let cfg_path = dir.join("run.cfg");
        fs::write(&cfg_path, "manifest = manifest.txt\ncombo = audio\ndimension = arousal\n")
            .unwrap();
        let cfg = parse_config(&cfg_path).unwrap();
        assert_eq!(cfg.model_dim, 256);
        assert_eq!(cfg.rnn_layers, 1);
        assert!(!cfg.rnn_bi);
        assert_eq!(cfg.train.learning_rate, 1e-3);
        assert_eq!(cfg.train.batch_size, 128);
        assert_eq!(cfg.train.seeds, (0..10).collect::<Vec<u64>>());
        assert_eq!(cfg.dimensions, vec![Dimension::Arousal]);
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = tmpdir("unknown");
        write_fixture(&dir);
        let cfg_path = dir.join("run.cfg");
        fs::write(
            &cfg_path,
            "manifest = manifest.txt\ncombo = audio\ndimension = arousal\nwibble = 3\n",
        )
        .unwrap();
        let err = parse_config(&cfg_path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("wibble"));
    }

    #[test]
    fn type_error_names_the_key() {
        let dir = tmpdir("type");
        write_fixture(&dir);
        let cfg_path = dir.join("run.cfg");
        fs::write(
            &cfg_path,
            "manifest = manifest.txt\ncombo = audio\ndimension = arousal\nmodel_dim = abc\n",
        )
        .unwrap();
        let err = parse_config(&cfg_path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("model_dim"));
    }

    #[test]
    fn nonstandard_model_dim_accepted() {
        let dir = tmpdir("dim300");
        write_fixture(&dir);
        let cfg_path = dir.join("run.cfg");
        fs::write(
            &cfg_path,
            "manifest = manifest.txt\ncombo = audio\ndimension = arousal\nmodel_dim = 300\n",
        )
        .unwrap();
        assert_eq!(parse_config(&cfg_path).unwrap().model_dim, 300);
    }

    #[test]
    fn combo_must_exist_in_manifest() {
        let dir = tmpdir("combo");
        write_fixture(&dir);
        let cfg_path = dir.join("run.cfg");
        fs::write(&cfg_path, "manifest = manifest.txt\ncombo = video\ndimension = arousal\n")
            .unwrap();
        let err = parse_config(&cfg_path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("video"));
    }

    #[test]
    fn missing_required_key_rejected() {
        let dir = tmpdir("missing-key");
        write_fixture(&dir);
        let cfg_path = dir.join("run.cfg");
        fs::write(&cfg_path, "manifest = manifest.txt\ncombo = audio\n").unwrap();
        let err = parse_config(&cfg_path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("dimension"));
    }

    #[test]
    fn missing_manifest_is_a_path_error() {
        let dir = tmpdir("nopath");
        let cfg_path = dir.join("run.cfg");
        fs::write(&cfg_path, "manifest = nowhere.txt\ncombo = audio\ndimension = arousal\n")
            .unwrap();
        let err = parse_config(&cfg_path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("nowhere.txt"));
    }
}
