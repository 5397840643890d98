//! Subcommand implementations and shared flag plumbing.

pub mod ablate;
pub mod ensemble;
pub mod evaluate;
pub mod extract_hrv;
pub mod personalise;
pub mod predict;
pub mod pretrain;
pub mod report;
pub mod synth;

use crate::error::CliError;
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Environment variable holding the default output root, used when a
/// subcommand is invoked without `--out`.
pub const OUTPUT_ROOT_ENV: &str = "AFFECT_OUTPUT_ROOT";

/// Parses `--flag value` pairs, rejecting anything not in `allowed`.
pub fn parse_flags(args: &[String], allowed: &[&str]) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::usage(format!("expected a --flag, got {arg:?}")))?;
        if !allowed.contains(&key) {
            return Err(CliError::usage(format!(
                "unknown flag --{key} (expected one of: {})",
                allowed
                    .iter()
                    .map(|f| format!("--{f}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        let value = it
            .next()
            .ok_or_else(|| CliError::usage(format!("flag --{key} needs a value")))?;
        if map.insert(key.to_string(), value.clone()).is_some() {
            return Err(CliError::usage(format!("flag --{key} given twice")));
        }
    }
    Ok(map)
}

pub fn flag_parse<T: std::str::FromStr>(
    flags: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    match flags.get(key) {
        None => Ok(default),
        Some(text) => text
            .parse()
            .map_err(|_| CliError::usage(format!("flag --{key}: cannot parse value {text:?}"))),
    }
}

pub fn required_flag<'a>(
    flags: &'a BTreeMap<String, String>,
    key: &str,
) -> Result<&'a str, CliError> {
    flags
        .get(key)
        .map(|s| s.as_str())
        .ok_or_else(|| CliError::usage(format!("missing required flag --{key}")))
}

/// Output directory: `--out`, or `$AFFECT_OUTPUT_ROOT/<subcommand>`.
pub fn out_dir(flags: &BTreeMap<String, String>, subcommand: &str) -> Result<PathBuf, CliError> {
    if let Some(out) = flags.get("out") {
        return Ok(PathBuf::from(out));
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) => Ok(PathBuf::from(root).join(subcommand)),
        None => Err(CliError::usage(format!(
            "missing --out (or set {OUTPUT_ROOT_ENV})"
        ))),
    }
}

pub fn jobs(flags: &BTreeMap<String, String>) -> Result<usize, CliError> {
    let n: usize = flag_parse(flags, "jobs", 1)?;
    if n == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    Ok(n)
}

/// Prediction file name for a subject/dimension pair.
pub fn prediction_file_name(subject: &str, dimension: affect_core::seqdata::Dimension) -> String {
    format!("{subject}_{dimension}.csv")
}
