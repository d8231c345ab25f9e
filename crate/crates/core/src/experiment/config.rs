use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SKEWFLOW_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FbmCheck,
    FracCheck,
    KernelCheck,
    GirsanovCheck,
    SkewSim,
    FlowReg,
    ShuffleVerify,
    BoundScan,
    Thresholds,
}

/// `(key, default, description)`.
pub type KeySpec = (&'static str, &'static str, &'static str);

impl Command {
    pub const ALL: [Command; 9] = [
        Command::FbmCheck,
        Command::FracCheck,
        Command::KernelCheck,
        Command::GirsanovCheck,
        Command::SkewSim,
        Command::FlowReg,
        Command::ShuffleVerify,
        Command::BoundScan,
        Command::Thresholds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::FbmCheck => "fbm-check",
            Command::FracCheck => "frac-check",
            Command::KernelCheck => "kernel-check",
            Command::GirsanovCheck => "girsanov-check",
            Command::SkewSim => "skew-sim",
            Command::FlowReg => "flow-reg",
            Command::ShuffleVerify => "shuffle-verify",
            Command::BoundScan => "bound-scan",
            Command::Thresholds => "thresholds",
        }
    }

    pub fn keys(self) -> &'static [KeySpec] {
        match self {
            Command::FbmCheck => &[
                ("h", "0.1,0.25,0.4", "Hurst parameters"),
                ("n", "16", "grid steps"),
                ("t", "1", "horizon"),
                ("count", "50000", "paths per h"),
                ("method", "cholesky", "cholesky | circulant | volterra"),
                ("z", "5", "gate in standard errors"),
            ],
            Command::FracCheck => &[
                ("alpha", "0.1,0.3,0.45", "fractional orders"),
                ("n", "4096", "grid nodes"),
                ("tol", "1e-3", "relative L2 gate"),
            ],
            Command::KernelCheck => &[
                ("h", "0.1,0.3", "Hurst parameters for the factorization"),
                ("pairs", "1:1,2:1,1:0.5", "t:s pairs"),
                ("tol", "1e-2", "relative gate for the factorization"),
                ("roundtrip_h", "0.3", "Hurst parameter of the operator round trip"),
                ("n", "4096", "grid nodes of the round trip"),
                ("roundtrip_tol", "1e-2", "relative L2 gate of the round trip"),
            ],
            Command::GirsanovCheck => &[
                ("h", "0.3", "Hurst parameter of the mean check"),
                ("n", "128", "grid steps"),
                ("t", "1", "horizon"),
                ("count", "100000", "paths of the mean check"),
                ("amplitude", "0.5", "drift u(t) = amplitude·cos(3t)"),
                ("z", "3", "gate in standard errors"),
                ("brownian_tol", "1e-10", "relative gate of the h = 1/2 reduction"),
                ("probe_h", "0.2", "Hurst parameter of the exponential-moment probe"),
                ("eps", "1,0.5,0.25,0.125", "mollifier widths of the probe"),
                ("k", "0,0.5,1", "exponents of the probe"),
                ("probe_count", "20000", "paths of the probe"),
            ],
            Command::SkewSim => &[
                ("d", "1", "dimension"),
                ("h", "0.5", "Hurst parameter"),
                ("alpha", "0", "skewness coefficient"),
                ("x0", "0", "start point (one value per coordinate, or one for all)"),
                ("n_moll", "16", "mollification index n (drift width 1/n)"),
                ("n", "2048", "grid steps"),
                ("t", "1", "horizon"),
                ("count", "50000", "paths"),
                ("level", "0", "local-time level"),
                ("eps", "", "local-time widths (default 2^-2..2^-7)"),
                ("z", "3", "gate in standard errors (Brownian case only)"),
            ],
            Command::FlowReg => &[
                ("d", "1", "dimension"),
                ("h", "0.1", "Hurst parameter"),
                ("alpha", "1", "skewness coefficient"),
                ("n_moll", "4,16,64,256", "mollification indices"),
                ("p", "2", "moment exponent"),
                ("k", "1", "derivative order (1 or 2)"),
                ("x", "-1,0,1", "start points (scalar grid, used on the diagonal)"),
                ("n", "256", "grid steps"),
                ("t", "1", "horizon"),
                ("count", "2000", "paths"),
            ],
            Command::ShuffleVerify => &[
                ("mmax", "3", "largest block size"),
                ("battery", "3", "random polynomial sets per case"),
                ("tol", "1e-8", "residual gate"),
            ],
            Command::BoundScan => &[
                ("d", "1", "dimension"),
                ("k", "1", "derivative order"),
                ("q", "1", "Hölder exponent index"),
                ("h", "", "Hurst grid (default 0.02, 0.04, …, 0.50)"),
                ("m_max", "50", "largest series index"),
            ],
            Command::Thresholds => &[("d", "1", "dimension")],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand `{s}`")))
    }
}

/// One fully specified run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self { command, params: BTreeMap::new(), seed: 1, out: None, workers: None }
    }

    /// Applies `key = value` settings. `seed`, `out` and `workers` are
    /// recognised; every other key must belong to the command.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => {
                self.seed = value.parse().map_err(|_| Error::Config(format!("seed must be an unsigned integer, got `{value}`")))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "workers" => self.workers = Some(parse_workers(value)?),
            _ => {
                if !self.command.keys().iter().any(|(k, _, _)| *k == key) {
                    let known: Vec<&str> = self.command.keys().iter().map(|k| k.0).collect();
                    return Err(Error::Config(format!(
                        "unknown key `{key}` for {}; known keys: {}",
                        self.command,
                        known.join(", ")
                    )));
                }
                self.params.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (key, value) in parse_key_values(text)? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    /// Value of `key`, falling back to the command default.
    pub fn raw(&self, key: &str) -> &str {
        if let Some(v) = self.params.get(key) {
            return v;
        }
        self.command
            .keys()
            .iter()
            .find(|(k, _, _)| *k == key)
            .map(|(_, d, _)| *d)
            .unwrap_or_else(|| panic!("{} has no key `{key}`", self.command))
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<V> {
        let raw = self.raw(key);
        raw.trim()
            .parse()
            .map_err(|_| Error::Config(format!("{key}: cannot parse `{raw}`")))
    }

    pub fn list<V: FromStr>(&self, key: &str) -> Result<Vec<V>> {
        let raw = self.raw(key);
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{s}` in `{raw}`"))))
            .collect()
    }

    /// Effective parameters, defaults included, for the report echo.
    pub fn effective(&self) -> BTreeMap<String, String> {
        self.command.keys().iter().map(|(k, _, _)| (k.to_string(), self.raw(k).to_string())).collect()
    }
}

pub fn parse_workers(value: &str) -> Result<usize> {
    match value.trim().parse::<usize>() {
        Ok(w) if w > 0 => Ok(w),
        _ => Err(Error::Config(format!("workers must be a positive integer, got `{value}`"))),
    }
}

pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got `{line}`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}
