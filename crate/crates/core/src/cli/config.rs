//! Flat key-value run configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value          # trailing comments allowed
//! list_key = 0.1, 0.2  # comma-separated lists
//! ```
//!
//! Blank lines are ignored, keys are case-sensitive, a repeated key is an
//! error and an unknown key is an error. Command-line `--set key=value`
//! overrides are applied after the file with the same rules, except that
//! they may replace a value from the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bath::BathSpec;
use crate::error::{config, Error, Result};
use crate::model::{BathTopology, QubitPairParams};
use crate::quapi::{QuapiConfig, Storage, DEFAULT_MAX_ENTRIES};

/// Every recognised key, in manifest order.
pub const KEYS: &[&str] = &[
    "eps1", "eps2", "J", "gamma", "delta", "topology", "K_L", "K_R", "T_L", "T_R", "omega_c_L",
    "omega_c_R", "a", "dt", "dk_max", "n_steps", "storage", "max_entries", "sweep_K", "sweep_a",
    "sweep_T", "converge_dt", "converge_dk", "output", "workers",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Converge,
    Steady,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Converge => "converge",
            Command::Steady => "steady",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Command::Simulate),
            "sweep" => Ok(Command::Sweep),
            "converge" => Ok(Command::Converge),
            "steady" => Ok(Command::Steady),
            other => config(format!("unknown command '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: QubitPairParams,
    pub topology: BathTopology,
    pub bath_left: BathSpec,
    pub bath_right: BathSpec,
    pub a: f64,
    pub quapi: QuapiConfig,
    pub n_steps: usize,
    pub sweep_k: Vec<f64>,
    pub sweep_a: Vec<f64>,
    pub sweep_t: Vec<f64>,
    pub converge_dt: Vec<f64>,
    pub converge_dk: Vec<usize>,
    pub output: PathBuf,
    /// Worker threads for sweeps; `None` means all available cores.
    pub workers: Option<usize>,
}

/// Raw key-value pairs prior to resolution.
#[derive(Debug, Clone, Default)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_entry(line)
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            check_key(key)?;
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return config(format!("line {}: duplicate key '{key}'", lineno + 1));
            }
        }
        Ok(Self(map))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = split_entry(assignment)
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        check_key(key)?;
        self.0.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse value '{v}' for key '{key}'"))),
        }
    }

    fn list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(v) if v.trim().is_empty() => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim().parse().map_err(|_| {
                        Error::Config(format!("cannot parse list item '{}' for key '{key}'", item.trim()))
                    })
                })
                .collect(),
        }
    }

    pub fn resolve(&self, command: Command) -> Result<RunConfig> {
        let params = QubitPairParams {
            eps1: self.get("eps1", 0.2)?,
            eps2: self.get("eps2", 0.2)?,
            j: self.get("J", 1.0)?,
            gamma: self.get("gamma", 0.5)?,
            delta: self.get("delta", 0.1)?,
        };
        let topology: BathTopology = self.get("topology", BathTopology::SingleLeft)?;
        let t_left: f64 = self.get("T_L", 0.2)?;
        let wc_left: f64 = self.get("omega_c_L", 7.5)?;
        let bath_left = BathSpec {
            kondo: self.get("K_L", 0.05)?,
            temperature: t_left,
            cutoff: wc_left,
        };
        let bath_right = BathSpec {
            kondo: self.get("K_R", 0.0)?,
            temperature: self.get("T_R", t_left)?,
            cutoff: self.get("omega_c_R", wc_left)?,
        };
        let storage = match self.get::<String>("storage", "auto".into())?.as_str() {
            "auto" => Storage::Auto,
            "dense" => Storage::Dense,
            "sparse" => Storage::Sparse,
            other => return config(format!("unknown storage '{other}' (auto, dense, sparse)")),
        };
        let quapi = QuapiConfig {
            dt: self.get("dt", 0.25)?,
            dk_max: self.get("dk_max", 9)?,
            storage,
            max_entries: self.get("max_entries", DEFAULT_MAX_ENTRIES)?,
        };
        let workers = match self.0.get("workers") {
            None => None,
            Some(_) => Some(self.get::<usize>("workers", 0)?),
        };
        let cfg = RunConfig {
            command,
            params,
            topology,
            bath_left,
            bath_right,
            a: self.get("a", 0.5)?,
            quapi,
            n_steps: self.get("n_steps", 400)?,
            sweep_k: self.list("sweep_K", &[])?,
            sweep_a: self.list("sweep_a", &[])?,
            sweep_t: self.list("sweep_T", &[])?,
            converge_dt: self.list("converge_dt", &[0.25, 0.125])?,
            converge_dk: self.list("converge_dk", &[9, 11])?,
            output: PathBuf::from(self.get::<String>("output", "out".into())?),
            workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn split_entry(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then_some((k, v.trim()))
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        config(format!("unknown key '{key}'"))
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

impl RunConfig {
    /// Validates everything the chosen command will touch.
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(as_config)?;
        self.bath_left.validate().map_err(as_config)?;
        self.bath_right.validate().map_err(as_config)?;
        crate::model::build_branches(&self.params, self.topology, self.bath_left.kondo, self.bath_right.kondo)
            .map_err(as_config)?;
        crate::quapi::effective_bath(self.topology, &self.bath_left, &self.bath_right).map_err(as_config)?;
        if !(0.0..=1.0).contains(&self.a) {
            return config(format!("a must lie in [0, 1], got {}", self.a));
        }
        if !(self.quapi.dt > 0.0 && self.quapi.dt.is_finite()) {
            return config(format!("dt must be > 0, got {}", self.quapi.dt));
        }
        if self.quapi.dk_max == 0 {
            return config("dk_max must be >= 1");
        }
        if self.n_steps == 0 {
            return config("n_steps must be >= 1");
        }
        if self.workers == Some(0) {
            return config("workers must be >= 1");
        }
        if matches!(self.command, Command::Sweep | Command::Steady) {
            for (name, axis) in [("sweep_K", &self.sweep_k), ("sweep_a", &self.sweep_a), ("sweep_T", &self.sweep_t)] {
                if axis.is_empty() {
                    return config(format!("{} needs a non-empty {name} axis", self.command.name()));
                }
                if axis.iter().any(|v| !v.is_finite()) {
                    return config(format!("{name} contains a non-finite value"));
                }
            }
            if self.sweep_k.iter().any(|&k| k < 0.0) {
                return config("sweep_K values must be >= 0");
            }
            if self.sweep_a.iter().any(|a| !(0.0..=1.0).contains(a)) {
                return config("sweep_a values must lie in [0, 1]");
            }
            if self.sweep_t.iter().any(|&t| t <= 0.0) {
                return config("sweep_T values must be > 0");
            }
        }
        if self.command == Command::Converge {
            if self.converge_dt.is_empty() || self.converge_dk.is_empty() {
                return config("converge needs non-empty converge_dt and converge_dk");
            }
            if self.converge_dt.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
                return config("converge_dt values must be > 0");
            }
            if self.converge_dk.contains(&0) {
                return config("converge_dk values must be >= 1");
            }
        }
        Ok(())
    }

    /// Fully resolved configuration in the same key-value grammar.
    pub fn manifest(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let storage = match self.quapi.storage {
            Storage::Auto => "auto",
            Storage::Dense => "dense",
            Storage::Sparse => "sparse",
        };
        let mut s = String::new();
        let _ = writeln!(s, "# resolved configuration for '{}'", self.command.name());
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("eps1", self.params.eps1.to_string());
        put("eps2", self.params.eps2.to_string());
        put("J", self.params.j.to_string());
        put("gamma", self.params.gamma.to_string());
        put("delta", self.params.delta.to_string());
        put("topology", self.topology.to_string());
        put("K_L", self.bath_left.kondo.to_string());
        put("K_R", self.bath_right.kondo.to_string());
        put("T_L", self.bath_left.temperature.to_string());
        put("T_R", self.bath_right.temperature.to_string());
        put("omega_c_L", self.bath_left.cutoff.to_string());
        put("omega_c_R", self.bath_right.cutoff.to_string());
        put("a", self.a.to_string());
        put("dt", self.quapi.dt.to_string());
        put("dk_max", self.quapi.dk_max.to_string());
        put("n_steps", self.n_steps.to_string());
        put("storage", storage.to_string());
        put("max_entries", self.quapi.max_entries.to_string());
        put("sweep_K", list(&self.sweep_k));
        put("sweep_a", list(&self.sweep_a));
        put("sweep_T", list(&self.sweep_t));
        put("converge_dt", list(&self.converge_dt));
        put(
            "converge_dk",
            self.converge_dk.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
        );
        put("output", self.output.display().to_string());
        if let Some(w) = self.workers {
            put("workers", w.to_string());
        }
        s
    }
}
