use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skewflow::experiment::{self, Command, ExperimentConfig};
use skewflow::Error;

/// Experiments for fractional Brownian motion, its kernel calculus and
/// SDEs with local-time drift.
#[derive(Parser, Debug)]
#[command(name = "skewflow", version)]
struct Cli {
    /// Flat key = value file; command-line settings override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output prefix: writes <out>.csv and <out>.json. CSV goes to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: $SKEWFLOW_WORKERS, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Settings {
    /// Parameters as `--key value` pairs; see `skewflow keys <command>`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    rest: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Empirical fBm covariance against the exact kernel.
    FbmCheck(Settings),
    /// Fractional integral/derivative inversion.
    FracCheck(Settings),
    /// Kernel factorization and operator round trip.
    KernelCheck(Settings),
    /// Girsanov density checks and exponential-moment probe.
    GirsanovCheck(Settings),
    /// Mollified skew-fBm simulation with local-time estimates.
    SkewSim(Settings),
    /// Moment table of flow derivatives.
    FlowReg(Settings),
    /// Shuffle counts and iterated-integral identities.
    ShuffleVerify(Settings),
    /// Summability scan of the derivative-bound series.
    BoundScan(Settings),
    /// Exact Hurst thresholds.
    Thresholds(Settings),
    /// List the keys of a command with their defaults.
    Keys { name: String },
}

fn split(cmd: Cmd) -> std::result::Result<(Command, Vec<String>), String> {
    Ok(match cmd {
        Cmd::FbmCheck(s) => (Command::FbmCheck, s.rest),
        Cmd::FracCheck(s) => (Command::FracCheck, s.rest),
        Cmd::KernelCheck(s) => (Command::KernelCheck, s.rest),
        Cmd::GirsanovCheck(s) => (Command::GirsanovCheck, s.rest),
        Cmd::SkewSim(s) => (Command::SkewSim, s.rest),
        Cmd::FlowReg(s) => (Command::FlowReg, s.rest),
        Cmd::ShuffleVerify(s) => (Command::ShuffleVerify, s.rest),
        Cmd::BoundScan(s) => (Command::BoundScan, s.rest),
        Cmd::Thresholds(s) => (Command::Thresholds, s.rest),
        Cmd::Keys { name } => return Err(name),
    })
}

fn key_help(c: Command) -> String {
    let mut s = format!("keys of {c}:\n");
    for (k, d, help) in c.keys() {
        s.push_str(&format!("  --{k:<14} {help} [default: {}]\n", if d.is_empty() { "-" } else { d }));
    }
    s
}

/// `--key value` or `--key=value` pairs.
fn parse_rest(rest: &[String]) -> std::result::Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut it = rest.iter();
    while let Some(arg) = it.next() {
        let key = arg.strip_prefix("--").ok_or_else(|| format!("expected --key, got `{arg}`"))?;
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            let v = it.next().ok_or_else(|| format!("missing value for --{key}"))?;
            out.push((key.to_string(), v.clone()));
        }
    }
    Ok(out)
}

struct Globals {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    seed: Option<u64>,
}

fn build(g: &Globals, command: Command, rest: &[String]) -> std::result::Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::new(command);
    if let Some(path) = &g.config {
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
    }
    for (k, v) in parse_rest(rest).map_err(Error::Config)? {
        cfg.set(&k.replace('-', "_"), &v)?;
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.out = Some(out.clone());
    }
    if let Some(w) = g.workers {
        cfg.set("workers", &w.to_string())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let Cli { config, out, workers, seed, command } = Cli::parse();
    let globals = Globals { config, out, workers, seed };
    let (command, rest) = match split(command) {
        Ok(x) => x,
        Err(name) => {
            return match name.parse::<Command>() {
                Ok(c) => {
                    print!("{}", key_help(c));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    let cfg = match build(&globals, command, &rest) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}\n\n{}", key_help(command));
            eprintln!("usage: skewflow [--config FILE] [--out PREFIX] [--workers N] [--seed S] {command} [--KEY VALUE]...");
            return ExitCode::from(2);
        }
    };
    let report = match experiment::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {command}: {e}");
            return ExitCode::from(2);
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = experiment::write_outputs(&report, path) {
                eprintln!("error: writing outputs: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{}", report.to_csv()),
    }
    eprint!("{}", report.check_lines());
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
