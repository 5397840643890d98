//! `affect ablate`: the 2x2x2 hyperparameter grid (layers, model width,
//! bidirectionality) with dev and test CCC per cell.

use super::{jobs, out_dir, parse_flags, required_flag};
use crate::config::parse_config;
use crate::error::CliError;
use crate::fsio;
use crate::jobs::run_indexed;
use crate::manifest::Manifest;
use affect_core::nn::ModelConfig;
use affect_core::objective::ccc;
use affect_core::seqdata::{apply_norm, Role};
use affect_core::training::pretrain;
use affect_core::mat::Mat;
use std::fmt::Write as _;
use std::path::Path;

const FLAGS: &[&str] = &["config", "out", "jobs"];

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let cfg = parse_config(Path::new(required_flag(&flags, "config")?))?;
    let out = out_dir(&flags, "ablate")?;
    let jobs = jobs(&flags)?;
    if cfg.dimensions.len() != 1 {
        return Err(CliError::usage(
            "ablate needs a single dimension in the config (arousal or valence)",
        ));
    }
    let dim = cfg.dimensions[0];

    let manifest = Manifest::parse_file(&cfg.manifest_path)?;
    let corpus = manifest.load_corpus(&cfg.combo)?;
    let train: Vec<_> = corpus.iter().filter(|s| s.role() == Role::Train).collect();
    let dev: Vec<_> = corpus.iter().filter(|s| s.role() == Role::Dev).collect();
    let test: Vec<_> = corpus.iter().filter(|s| s.role() == Role::Test).collect();
    if test.is_empty() {
        return Err(CliError::data("ablate needs test subjects in the manifest"));
    }
    let input_dims = cfg.input_dims(&manifest)?;

    let mut grid = Vec::new();
    for layers in [1usize, 2] {
        for model_dim in [128usize, 256] {
            for bi in [false, true] {
                grid.push((layers, model_dim, bi));
            }
        }
    }

    let results: Vec<Result<(f64, f64), CliError>> = run_indexed(grid.len(), jobs, |i| {
        let (layers, model_dim, bi) = grid[i];
        let model_cfg = ModelConfig::new(input_dims.clone(), model_dim)
            .with_layers(layers)
            .with_bidirectional(bi)
            .with_seed(cfg.seed);
        let trained = pretrain(&train, &dev, &model_cfg, &cfg.train, dim, |_, _| {})?;
        // Test CCC: full-sequence inference averaged over test subjects.
        let mut sum = 0.0;
        for s in &test {
            let normalized = apply_norm(s, &trained.stats)?;
            let features: Mat = normalized.concat_features();
            let (preds, _) = affect_core::nn::forward(&trained.model, &features)
                .map_err(CliError::from)?;
            let label = normalized
                .label(dim)
                .ok_or_else(|| CliError::data(format!("{}: no {dim} labels", s.subject_id())))?;
            sum += ccc(&preds, label.values()).map_err(|e| CliError::data(e.to_string()))?.ccc;
        }
        let test_ccc = sum / test.len() as f64;
        eprintln!(
            "[ablate {dim}] layers={layers} model_dim={model_dim} rnn_bi={} dev {:.4} test {:.4}",
            if bi { "Y" } else { "N" },
            trained.report.best_dev_ccc,
            test_ccc
        );
        Ok((trained.report.best_dev_ccc, test_ccc))
    });

    let mut csv = String::from("layers,model_dim,rnn_bi,dev_ccc,test_ccc\n");
    for ((layers, model_dim, bi), result) in grid.iter().zip(results) {
        let (dev_ccc, test_ccc) = result?;
        let _ = writeln!(
            csv,
            "{layers},{model_dim},{},{dev_ccc},{test_ccc}",
            if *bi { "Y" } else { "N" }
        );
    }
    fsio::write_text(&out.join("ablation.csv"), &csv)?;
    fsio::write_text(
        &out.join("run.lock"),
        &format!("subcommand = ablate\n{}", cfg.render()),
    )?;
    eprintln!("[ablate {dim}] wrote {}", out.join("ablation.csv").display());
    Ok(())
}
