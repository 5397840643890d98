//! Command-line pipeline around `affect-core`.
//!
//! Subcommands: `synth`, `extract-hrv`, `pretrain`, `personalise`,
//! `predict`, `evaluate`, `ensemble`, `ablate`, `report`. Exit codes:
//! 0 success, 2 usage error, 3 data error, 4 numeric failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod fsio;
pub mod jobs;
pub mod manifest;

use error::CliError;

const USAGE: &str = "\
usage: affect <subcommand> [--flag value ...]

subcommands:
  synth        write a synthetic corpus
               --out DIR [--seed N] [--subjects N | --train N --dev N --test N]
               [--duration-secs N] [--noise F] [--offset F] [--modalities name:dim+...]
  extract-hrv  compute 21-d physiological features from raw signals
               --manifest FILE --out DIR [--name phys]
  pretrain     stage-1 global training
               --config FILE --out DIR
  personalise  per-test-subject fine-tuning (10-seed sweep)
               --config FILE --run DIR [--out DIR] [--jobs N]
  predict      full-sequence predictions
               --config FILE --run DIR [--out DIR] [--role test] [--segment full|personal_test]
  evaluate     CCC report for prediction files
               --manifest FILE --predictions DIR [--out FILE] [--role test]
               [--segment full|personal_test]
  ensemble     average prediction sets
               --members DIR1,DIR2,... --out DIR [--dimension arousal|valence]
  ablate       {layers} x {model_dim} x {rnn_bi} grid
               --config FILE --out DIR [--jobs N]
  report       human-readable summary of a run directory
               --run DIR

The AFFECT_OUTPUT_ROOT environment variable provides a default output root
when --out is omitted.
";

/// Dispatches a full argument vector (without the binary name); returns the
/// process exit code.
pub fn run(args: &[String]) -> i32 {
    let Some((subcommand, rest)) = args.split_first() else {
        eprint!("{USAGE}");
        return 2;
    };
    if subcommand == "--help" || subcommand == "help" {
        print!("{USAGE}");
        return 0;
    }
    let result: Result<(), CliError> = match subcommand.as_str() {
        "synth" => commands::synth::run(rest),
        "extract-hrv" => commands::extract_hrv::run(rest),
        "pretrain" => commands::pretrain::run(rest),
        "personalise" => commands::personalise::run(rest),
        "predict" => commands::predict::run(rest),
        "evaluate" => commands::evaluate::run(rest),
        "ensemble" => commands::ensemble::run(rest),
        "ablate" => commands::ablate::run(rest),
        "report" => commands::report::run(rest),
        other => {
            eprintln!("affect: unknown subcommand {other:?}");
            eprint!("{USAGE}");
            return 2;
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("affect {subcommand}: {e}");
            e.exit_code()
        }
    }
}
