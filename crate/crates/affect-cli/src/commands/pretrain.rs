//! `affect pretrain`: global stage-1 training, one checkpoint per emotion
//! dimension.

use super::{out_dir, parse_flags, required_flag};
use crate::config::parse_config;
use crate::error::CliError;
use crate::fsio;
use crate::manifest::Manifest;
use affect_core::seqdata::Role;
use affect_core::training::{pretrain, render_train_report_csv};
use std::path::Path;

const FLAGS: &[&str] = &["config", "out", "jobs"];

pub fn run(args: &[String]) -> Result<(), CliError> {
    let flags = parse_flags(args, FLAGS)?;
    let cfg = parse_config(Path::new(required_flag(&flags, "config")?))?;
    let out = out_dir(&flags, "pretrain")?;

    let manifest = Manifest::parse_file(&cfg.manifest_path)?;
    let corpus = manifest.load_corpus(&cfg.combo)?;
    let train: Vec<_> = corpus.iter().filter(|s| s.role() == Role::Train).collect();
    let dev: Vec<_> = corpus.iter().filter(|s| s.role() == Role::Dev).collect();
    let model_cfg = cfg.model_config(&manifest)?;

    fsio::write_text(&out.join("run.lock"), &cfg.render())?;
    for &dim in &cfg.dimensions {
        let result = pretrain(&train, &dev, &model_cfg, &cfg.train, dim, |epoch, s| {
            eprintln!(
                "[pretrain {dim}] epoch {epoch}: train_loss {:.6} dev_ccc {:.6}",
                s.train_loss, s.dev_ccc
            );
        })?;
        fsio::save_checkpoint(
            &result.model,
            &result.stats,
            &out.join(format!("stage1/{dim}.ckpt")),
        )?;
        fsio::write_text(
            &out.join(format!("stage1/{dim}_report.csv")),
            &render_train_report_csv(&result.report),
        )?;
        eprintln!(
            "[pretrain {dim}] best dev_ccc {:.6} at epoch {} ({:.1} s)",
            result.report.best_dev_ccc, result.report.best_epoch, result.report.wall_time_secs
        );
    }
    Ok(())
}
