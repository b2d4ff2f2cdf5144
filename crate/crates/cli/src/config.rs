//! Run configuration.
//!
//! Documents are flat TOML. Parameters and options are top-level keys; the
//! sweep axis is `sweep.<variable>.{start,stop,points,scale}`:
//!
//! ```toml
//! mode = "ebn0-lowpower"
//! bandwidth = 1e5
//! theta_list = [0.001, 0.01]
//! sweep.snr.start = 1e-6
//! sweep.snr.stop = 1.0
//! sweep.snr.points = 61
//! sweep.snr.scale = "log"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use effcap_core::SystemParams;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("`mode` is required (one of {MODE_LIST})")]
    MissingMode,
    #[error("unknown mode `{0}` (expected one of {MODE_LIST})")]
    UnknownMode(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("a sweep covers exactly one variable, found {}", .0.join(" and "))]
    MultipleSweeps(Vec<String>),
    #[error("`--set` expects key=value, got `{0}`")]
    BadOverride(String),
}

const MODE_LIST: &str = "ebn0-lowpower, ebn0-wideband, wideband-table, optimal-rho, validate-queue";

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ebn0LowPower,
    Ebn0Wideband,
    WidebandTable,
    OptimalRho,
    ValidateQueue,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Ebn0LowPower => "ebn0-lowpower",
            Mode::Ebn0Wideband => "ebn0-wideband",
            Mode::WidebandTable => "wideband-table",
            Mode::OptimalRho => "optimal-rho",
            Mode::ValidateQueue => "validate-queue",
        }
    }

    /// The variable this mode sweeps, if any.
    pub fn sweep_var(self) -> Option<SweepVar> {
        match self {
            Mode::Ebn0LowPower | Mode::OptimalRho => Some(SweepVar::Snr),
            Mode::Ebn0Wideband => Some(SweepVar::Bandwidth),
            Mode::WidebandTable | Mode::ValidateQueue => None,
        }
    }

    fn default_thetas(self) -> Vec<f64> {
        match self {
            Mode::Ebn0LowPower | Mode::Ebn0Wideband => vec![0.001, 0.01, 0.1, 1.0],
            Mode::WidebandTable => vec![0.0, 0.001, 0.01, 0.1, 1.0],
            Mode::OptimalRho => vec![],
            Mode::ValidateQueue => vec![0.01],
        }
    }

    fn default_sweep(self) -> Option<SweepAxis> {
        let axis = |var, start, stop, points| SweepAxis {
            var,
            start,
            stop,
            points,
            scale: Scale::Log,
        };
        match self {
            Mode::Ebn0LowPower => Some(axis(SweepVar::Snr, 1e-6, 1.0, 61)),
            Mode::OptimalRho => Some(axis(SweepVar::Snr, 1e-6, 1e2, 41)),
            Mode::Ebn0Wideband => Some(axis(SweepVar::Bandwidth, 1e3, 1e8, 51)),
            Mode::WidebandTable | Mode::ValidateQueue => None,
        }
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ebn0-lowpower" => Mode::Ebn0LowPower,
            "ebn0-wideband" => Mode::Ebn0Wideband,
            "wideband-table" => Mode::WidebandTable,
            "optimal-rho" => Mode::OptimalRho,
            "validate-queue" => Mode::ValidateQueue,
            other => return Err(ConfigError::UnknownMode(other.to_string())),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// `P̄/(N0 B)` at fixed bandwidth.
    Snr,
    /// Bandwidth at fixed `P̄`.
    Bandwidth,
}

impl SweepVar {
    fn parse(name: &str) -> Option<Self> {
        match name {
            "snr" => Some(SweepVar::Snr),
            "bandwidth" => Some(SweepVar::Bandwidth),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Snr => "snr",
            SweepVar::Bandwidth => "bandwidth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepAxis {
    /// Grid points from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: SystemParams,
    pub sweep: Option<SweepAxis>,
    pub theta_list: Vec<f64>,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    /// Queue validation: frames per replication.
    pub frames: u64,
    /// Queue validation: independent replications.
    pub replications: u64,
    /// Queue validation: arrivals as a fraction of the effective capacity.
    pub safety: f64,
    pub warmup_fraction: f64,
}

const TOP_KEYS: [&str; 13] = [
    "mode",
    "gamma",
    "n0",
    "frame_t",
    "bandwidth",
    "pbar",
    "theta_list",
    "output",
    "seed",
    "frames",
    "replications",
    "safety",
    "warmup_fraction",
];
const SWEEP_FIELDS: [&str; 4] = ["start", "stop", "points", "scale"];

/// Flattened `dotted.key -> value` view of a document.
pub type Entries = BTreeMap<String, Value>;

/// Parse a document into flattened entries without validating them.
pub fn parse_entries(text: &str) -> Result<Entries, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Malformed(e.message().to_string()))?;
    let mut out = Entries::new();
    flatten("", &table, &mut out);
    Ok(out)
}

fn flatten(prefix: &str, table: &Table, out: &mut Entries) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Apply a `key=value` override. The value is read as a TOML value when
/// possible and as a bare string otherwise.
pub fn apply_override(entries: &mut Entries, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::BadOverride(spec.to_string()));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    entries.insert(key.to_string(), value);
    Ok(())
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::from_entries(&parse_entries(text)?)
}

fn number(entries: &Entries, key: &str) -> Result<Option<f64>, ConfigError> {
    match entries.get(key) {
        None => Ok(None),
        Some(Value::Float(f)) => Ok(Some(*f)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(invalid(key, format!("expected a number, got {other}"))),
    }
}

fn integer(entries: &Entries, key: &str) -> Result<Option<u64>, ConfigError> {
    match entries.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
        Some(other) => Err(invalid(key, format!("expected a non-negative integer, got {other}"))),
    }
}

fn string<'a>(entries: &'a Entries, key: &str) -> Result<Option<&'a str>, ConfigError> {
    match entries.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(invalid(key, format!("expected a string, got {other}"))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be finite and > 0, got {v}")))
    }
}

impl RunConfig {
    /// Validate flattened entries. Unknown keys are rejected by name.
    pub fn from_entries(entries: &Entries) -> Result<Self, ConfigError> {
        let mut sweep_vars: Vec<String> = Vec::new();
        for key in entries.keys() {
            if TOP_KEYS.contains(&key.as_str()) {
                continue;
            }
            match key.split('.').collect::<Vec<_>>()[..] {
                ["sweep", var, field] if SWEEP_FIELDS.contains(&field) => {
                    if SweepVar::parse(var).is_none() {
                        return Err(invalid(
                            format!("sweep.{var}"),
                            "sweep variable must be `snr` or `bandwidth`",
                        ));
                    }
                    if !sweep_vars.iter().any(|v| v == var) {
                        sweep_vars.push(var.to_string());
                    }
                }
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        if sweep_vars.len() > 1 {
            return Err(ConfigError::MultipleSweeps(sweep_vars));
        }

        let mode: Mode = string(entries, "mode")?
            .ok_or(ConfigError::MissingMode)?
            .parse()?;

        let gamma = positive("gamma", number(entries, "gamma")?.unwrap_or(1.0))?;
        let n0 = positive("n0", number(entries, "n0")?.unwrap_or(1.0))?;
        let frame_t = positive("frame_t", number(entries, "frame_t")?.unwrap_or(2e-3))?;
        let bandwidth = positive("bandwidth", number(entries, "bandwidth")?.unwrap_or(1e5))?;
        let pbar = positive("pbar", number(entries, "pbar")?.unwrap_or(1e4))?;
        let params = SystemParams::new(gamma, n0, frame_t, bandwidth, pbar)
            .map_err(|e| invalid("params", e.to_string()))?;

        let sweep = match sweep_vars.first() {
            Some(var) => Some(Self::sweep_from(entries, var, mode)?),
            None => mode.default_sweep(),
        };

        let theta_list = match entries.get("theta_list") {
            None => mode.default_thetas(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(invalid("theta_list", format!("expected numbers, got {other}"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
            Some(Value::Float(f)) => vec![*f],
            Some(Value::Integer(i)) => vec![*i as f64],
            Some(other) => return Err(invalid("theta_list", format!("expected a list, got {other}"))),
        };
        if let Some(t) = theta_list.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(invalid("theta_list", format!("entries must be finite and >= 0, got {t}")));
        }
        let needs_theta = !matches!(mode, Mode::OptimalRho);
        if needs_theta && theta_list.is_empty() {
            return Err(invalid("theta_list", "must not be empty"));
        }
        if mode == Mode::ValidateQueue && theta_list.iter().any(|&t| t == 0.0) {
            return Err(invalid("theta_list", "queue validation needs theta > 0"));
        }

        let frames = integer(entries, "frames")?.unwrap_or(10_000_000);
        let replications = integer(entries, "replications")?.unwrap_or(10);
        let safety = number(entries, "safety")?.unwrap_or(1.0);
        let warmup_fraction = number(entries, "warmup_fraction")?.unwrap_or(0.01);
        if frames < 2 {
            return Err(invalid("frames", "must be at least 2"));
        }
        if replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(invalid("safety", format!("must lie in (0, 1], got {safety}")));
        }
        if !(0.0..1.0).contains(&warmup_fraction) {
            return Err(invalid("warmup_fraction", "must lie in [0, 1)"));
        }

        Ok(RunConfig {
            mode,
            params,
            sweep,
            theta_list,
            output_path: string(entries, "output")?.map(PathBuf::from),
            seed: integer(entries, "seed")?.unwrap_or(1),
            frames,
            replications,
            safety,
            warmup_fraction,
        })
    }

    fn sweep_from(entries: &Entries, var: &str, mode: Mode) -> Result<SweepAxis, ConfigError> {
        let field = |f: &str| format!("sweep.{var}.{f}");
        let parsed = SweepVar::parse(var).expect("checked by caller");
        match mode.sweep_var() {
            Some(expected) if expected == parsed => {}
            Some(expected) => {
                return Err(invalid(
                    format!("sweep.{var}"),
                    format!("mode {mode} sweeps `{}`", expected.name()),
                ))
            }
            None => return Err(invalid(format!("sweep.{var}"), format!("mode {mode} takes no sweep"))),
        }
        let default = mode.default_sweep().expect("sweeping modes have defaults");
        let start = number(entries, &field("start"))?.unwrap_or(default.start);
        let stop = number(entries, &field("stop"))?.unwrap_or(default.stop);
        let points = integer(entries, &field("points"))?.unwrap_or(default.points as u64) as usize;
        let scale = match string(entries, &field("scale"))? {
            None | Some("log") => Scale::Log,
            Some("linear") => Scale::Linear,
            Some(other) => return Err(invalid(field("scale"), format!("expected `log` or `linear`, got `{other}`"))),
        };
        positive(&field("start"), start)?;
        positive(&field("stop"), stop)?;
        if points < 2 {
            return Err(invalid(field("points"), format!("must be at least 2, got {points}")));
        }
        if start == stop {
            return Err(invalid(field("stop"), "must differ from start"));
        }
        if parsed == SweepVar::Bandwidth {
            let low = start.min(stop);
            if low * entries_frame_t(entries) <= 2.0 {
                return Err(invalid(field("start"), "bandwidth * frame_t must exceed 2 over the sweep"));
            }
        }
        Ok(SweepAxis {
            var: parsed,
            start,
            stop,
            points,
            scale,
        })
    }
}

fn entries_frame_t(entries: &Entries) -> f64 {
    number(entries, "frame_t").ok().flatten().unwrap_or(2e-3)
}
