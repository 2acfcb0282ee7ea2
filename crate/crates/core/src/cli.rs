//! The `tagmetrics` command line.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 unreadable or invalid
//! rule file.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::num::NonZeroU64;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distribution::TupleDistribution;
use crate::harness::{compare, TrialConfig};
use crate::predictor::{predict_epochs_with, EmptyProductions, LengthProjection, PredictOptions};
use crate::render::{render_evolution, Palette};
use crate::report;
use crate::rules::{parse_rules, RuleSet};
use crate::simulator::{random_queue, run_epochs, run_epochs_traced, run_snapshots};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RULES: i32 = 2;

const DEFAULT_LENGTH: usize = 10_000;
const DEFAULT_COMPARE_LENGTH: usize = 1_000;
const DEFAULT_RENDER_LENGTH: usize = 1_000;

#[derive(Debug, Parser)]
#[command(
    name = "tagmetrics",
    version,
    about = "Simulate and predict the large-scale evolution of tag systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum CommandKind {
    Simulate,
    Predict,
    Compare,
    Render,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate from a random queue and report every epoch start
    Simulate(RunSpec),
    /// Predict per-epoch growth, densities and length from the rules alone
    Predict(RunSpec),
    /// Compare predictions with averages over seeded simulations
    Compare(RunSpec),
    /// Write the queue evolution as a binary PGM image
    Render(RunSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct RunSpec {
    /// Rule file, one `lhs -> rhs` per line
    #[arg(long)]
    rules: PathBuf,
    /// Initial queue length [default: 10000; 1000 for compare and render]
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, default_value_t = 10)]
    epochs: u64,
    /// Number of simulations averaged by `compare`
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampling interval, in steps, for traces and rendered rows
    #[arg(long, default_value_t = NonZeroU64::MIN)]
    stride: NonZeroU64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output file [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-step `step,length` trace to this file (simulate)
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Length predictions start from and measured lengths are rescaled to (compare)
    #[arg(long, default_value_t = TrialConfig::DEFAULT_REFERENCE_LENGTH)]
    reference_length: f64,
    /// Round growth to 3 decimals when chaining epoch lengths (predict)
    #[arg(long)]
    tabulated: bool,
    /// Drop windows that run into an empty production instead of skipping it (predict)
    #[arg(long)]
    break_on_empty: bool,
    /// Insert a marker row at every epoch start (render)
    #[arg(long)]
    mark_epochs: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Rules(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn load_rules(path: &Path) -> Result<RuleSet, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Rules(format!("{}: {e}", path.display())))?;
    parse_rules(&text).map_err(|e| Failure::Rules(format!("{}: {e}", path.display())))
}

fn validate(kind: CommandKind, spec: &RunSpec) -> Result<(), Failure> {
    if spec.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    if kind != CommandKind::Compare && spec.trials != 1 {
        return Err(Failure::Usage("--trials only applies to compare".into()));
    }
    if kind != CommandKind::Simulate && spec.trace.is_some() {
        return Err(Failure::Usage("--trace only applies to simulate".into()));
    }
    if kind == CommandKind::Render && spec.format != Format::Text {
        return Err(Failure::Usage("render always writes PGM; omit --format".into()));
    }
    if !(spec.reference_length > 0.0) {
        return Err(Failure::Usage("--reference-length must be positive".into()));
    }
    if kind == CommandKind::Compare && spec.epochs == 0 {
        return Err(Failure::Usage("compare needs --epochs of at least 1".into()));
    }
    Ok(())
}

fn open_output<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn execute(kind: CommandKind, spec: &RunSpec, stdout: &mut dyn Write) -> Result<(), Failure> {
    validate(kind, spec)?;
    let rules = load_rules(&spec.rules)?;
    let alphabet = rules.alphabet();
    let default_length = match kind {
        CommandKind::Compare => DEFAULT_COMPARE_LENGTH,
        CommandKind::Render => DEFAULT_RENDER_LENGTH,
        _ => DEFAULT_LENGTH,
    };
    let length = spec.length.unwrap_or(default_length);
    if length == 0 {
        return Err(Failure::Usage("--length must be at least 1".into()));
    }

    match kind {
        CommandKind::Simulate => {
            let initial = random_queue(length, rules.alphabet_size(), spec.seed);
            let run = match &spec.trace {
                Some(path) => {
                    let (run, trace) = run_epochs_traced(&initial, &rules, spec.epochs, spec.stride);
                    let mut f = BufWriter::new(File::create(path)?);
                    report::write_trace_csv(&mut f, &trace)?;
                    f.flush()?;
                    run
                }
                None => run_epochs(&initial, &rules, spec.epochs),
            };
            let mut out = open_output(spec.out.as_deref(), stdout)?;
            match spec.format {
                Format::Text => report::write_run_text(&mut out, alphabet, &run)?,
                Format::Csv => report::write_run_csv(&mut out, alphabet, &run)?,
                Format::Json => report::write_run_json(&mut out, &rules, &run)?,
            }
            out.flush()?;
        }
        CommandKind::Predict => {
            let options = PredictOptions {
                projection: if spec.tabulated {
                    LengthProjection::TABULATED
                } else {
                    LengthProjection::Exact
                },
                empty: if spec.break_on_empty {
                    EmptyProductions::Break
                } else {
                    EmptyProductions::Skip
                },
            };
            let initial = TupleDistribution::uniform(rules.n(), rules.alphabet_size());
            let prediction = predict_epochs_with(&initial, &rules, length as f64, spec.epochs, options)
                .map_err(|e| Failure::Rules(e.to_string()))?;
            let mut out = open_output(spec.out.as_deref(), stdout)?;
            match spec.format {
                Format::Text => report::write_prediction_text(&mut out, alphabet, &prediction)?,
                Format::Csv => report::write_prediction_csv(&mut out, alphabet, &prediction)?,
                Format::Json => report::write_prediction_json(&mut out, &rules, &prediction)?,
            }
            out.flush()?;
        }
        CommandKind::Compare => {
            if length < rules.n() {
                return Err(Failure::Usage(format!("--length must be at least n = {}", rules.n())));
            }
            let mut cfg = TrialConfig::new(rules.clone(), length, spec.trials, spec.epochs, spec.seed);
            cfg.reference_length = spec.reference_length;
            let initial = TupleDistribution::uniform(rules.n(), rules.alphabet_size());
            let table = compare(&cfg, &initial).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut out = open_output(spec.out.as_deref(), stdout)?;
            match spec.format {
                Format::Text => report::write_comparison_text(&mut out, &table)?,
                Format::Csv => report::write_comparison_csv(&mut out, &table)?,
                Format::Json => report::write_comparison_json(&mut out, &table)?,
            }
            out.flush()?;
        }
        CommandKind::Render => {
            let initial = random_queue(length, rules.alphabet_size(), spec.seed);
            let (_, rows) = run_snapshots(&initial, &rules, spec.epochs, spec.stride, spec.mark_epochs);
            let pgm = render_evolution(&rows, &Palette::for_alphabet(rules.alphabet_size()))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let mut out = open_output(spec.out.as_deref(), stdout)?;
            out.write_all(&pgm)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let (kind, spec) = match &cli.command {
        Command::Simulate(s) => (CommandKind::Simulate, s),
        Command::Predict(s) => (CommandKind::Predict, s),
        Command::Compare(s) => (CommandKind::Compare, s),
        Command::Render(s) => (CommandKind::Render, s),
    };
    match execute(kind, spec, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Rules(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RULES
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("tagmetrics").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8_lossy(&out).into_owned(),
            String::from_utf8(err).unwrap(),
        )
    }

    fn rule_file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn missing_rule_file_exits_2() {
        let (code, _, err) = run_capture(&["predict", "--rules", "/nonexistent/rules.txt"]);
        assert_eq!(code, EXIT_RULES);
        assert!(err.contains("rules.txt"));
    }

    #[test]
    fn invalid_rule_file_exits_2() {
        let f = rule_file("aa -> ab\nab -> ba\nba -> aa\n");
        let (code, _, err) = run_capture(&["simulate", "--rules", f.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_RULES);
        assert!(err.contains("no rule for bb"), "{err}");
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["predict"]).0, EXIT_USAGE);
        let f = rule_file("aa -> a\nab -> b\nba -> a\nbb -> b\n");
        let p = f.path().to_str().unwrap();
        assert_eq!(run_capture(&["predict", "--rules", p, "--stride", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["simulate", "--rules", p, "--trials", "3"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["predict", "--rules", p, "--format", "xml"]).0, EXIT_USAGE);
    }

    #[test]
    fn simulate_zero_epochs_prints_initial_state() {
        let f = rule_file("aa -> aaa\nab -> b\nba -> a\nbb -> b\n");
        let (code, out, _) = run_capture(&[
            "simulate",
            "--rules",
            f.path().to_str().unwrap(),
            "--length",
            "100",
            "--epochs",
            "0",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("Epoch 0\nLength: 100\n"));
        assert!(!out.contains("Epoch 1"));
    }

    #[test]
    fn identical_specs_give_identical_files() {
        let f = rule_file("aa -> aaa\nab -> b\nba -> a\nbb -> b\n");
        let dir = tempfile::tempdir().unwrap();
        let mut outputs = Vec::new();
        for i in 0..2 {
            let out = dir.path().join(format!("sim{i}.csv"));
            let trace = dir.path().join(format!("trace{i}.csv"));
            let (code, stdout, _) = run_capture(&[
                "simulate",
                "--rules",
                f.path().to_str().unwrap(),
                "--length",
                "500",
                "--epochs",
                "4",
                "--seed",
                "3",
                "--stride",
                "7",
                "--format",
                "csv",
                "--out",
                out.to_str().unwrap(),
                "--trace",
                trace.to_str().unwrap(),
            ]);
            assert_eq!(code, EXIT_OK);
            assert!(stdout.is_empty());
            outputs.push((std::fs::read(&out).unwrap(), std::fs::read(&trace).unwrap()));
        }
        assert_eq!(outputs[0], outputs[1]);
        let trace = String::from_utf8(outputs[0].1.clone()).unwrap();
        assert!(trace.starts_with("step,length\n0,500\n7,"));
    }

    #[test]
    fn render_writes_pgm() {
        let f = rule_file("aa -> aaa\nab -> b\nba -> a\nbb -> b\n");
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("evo.pgm");
        let (code, _, err) = run_capture(&[
            "render",
            "--rules",
            f.path().to_str().unwrap(),
            "--length",
            "100",
            "--epochs",
            "3",
            "--mark-epochs",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        let bytes = std::fs::read(out).unwrap();
        assert!(bytes.starts_with(b"P5\n"));
    }
}
