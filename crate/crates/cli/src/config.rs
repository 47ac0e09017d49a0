//! Sweep configuration from command-line flags and flat `key = value` files.
//!
//! Every flag has a file key of the same name without the leading dashes.
//! Flags win over file values, and the worker count falls back to
//! `WQED_WORKERS` when neither sets it.

use clap::{Parser, ValueEnum};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

use wqed_core::dynamics::Method;

pub const WORKERS_ENV: &str = "WQED_WORKERS";

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Malformed command line; clap formats its own message.
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Dynamics,
    Spectrum,
    Qfi,
    QfiScan,
    Qbic,
    Baseline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dynamics => "dynamics",
            Command::Spectrum => "spectrum",
            Command::Qfi => "qfi",
            Command::QfiScan => "qfi-scan",
            Command::Qbic => "qbic",
            Command::Baseline => "baseline",
        }
    }

    fn parse(text: &str) -> Result<Self, ConfigError> {
        Command::from_str(text, false)
            .map_err(|_| invalid(format!("unknown command '{text}' (expected dynamics, spectrum, qfi, qfi-scan, qbic or baseline)")))
    }

    /// File keys this command reads besides `command`, `out`, `format`,
    /// `workers` and `log`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Dynamics => &["eta", "delta", "beta", "t-max", "dt", "method", "j-cut"],
            Command::Spectrum => &["eta", "delta", "beta", "omega-range"],
            Command::Qfi | Command::QfiScan => &["eta", "delta", "beta", "t", "j-cut"],
            Command::Qbic => &["eta", "delta", "beta", "method", "j-cut"],
            Command::Baseline => &["t"],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Values of one swept quantity.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// `start:stop:count`, endpoints included.
    Range {
        start: f64,
        stop: f64,
        count: usize,
        log: bool,
    },
    /// Explicit comma-separated values (a single value is a one-point list).
    List(Vec<f64>),
}

impl Axis {
    pub fn parse(name: &str, text: &str) -> Result<Axis, ConfigError> {
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| invalid(format!("--{name}: '{s}' is not a finite number")))
        };
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [start, stop, count] => {
                let (start, stop) = (number(start)?, number(stop)?);
                let count: usize = count.trim().parse().map_err(|_| {
                    invalid(format!(
                        "--{name}: count '{count}' is not a positive integer"
                    ))
                })?;
                if count < 1 {
                    return Err(invalid(format!("--{name}: count must be at least 1")));
                }
                if count > 1 && !(start < stop) {
                    return Err(invalid(format!(
                        "--{name}: start {start} must be below stop {stop}"
                    )));
                }
                Ok(Axis::Range {
                    start,
                    stop,
                    count,
                    log: false,
                })
            }
            [list] => Ok(Axis::List(
                list.split(',').map(number).collect::<Result<_, _>>()?,
            )),
            _ => Err(invalid(format!(
                "--{name}: expected start:stop:count or a comma-separated list, got '{text}'"
            ))),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::List(ref v) => v.clone(),
            Axis::Range {
                start,
                stop,
                count,
                log,
            } => {
                if count == 1 {
                    return vec![start];
                }
                let last = (count - 1) as f64;
                (0..count)
                    .map(|k| {
                        let f = k as f64 / last;
                        if log {
                            (start.ln() + f * (stop.ln() - start.ln())).exp()
                        } else {
                            start + f * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::List(v) => v.len(),
            Axis::Range { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn render(&self) -> String {
        match self {
            Axis::List(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            Axis::Range {
                start, stop, count, ..
            } => format!("{start}:{stop}:{count}"),
        }
    }

    fn is_log(&self) -> bool {
        matches!(self, Axis::Range { log: true, .. })
    }

    fn min(&self) -> f64 {
        self.values().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// A fully validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub command: Command,
    pub eta: Option<Axis>,
    pub delta: Option<Axis>,
    pub t: Option<Axis>,
    pub omega: Option<Axis>,
    pub beta: f64,
    pub j_cut: usize,
    pub t_max: f64,
    pub dt: f64,
    pub method: Method,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
}

impl SweepConfig {
    /// The configuration as file keys, omitting `workers` (it does not
    /// change the results) and defaults the command never reads.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let keys = self.command.keys();
        let mut put = |k: &str, v: String| {
            if keys.contains(&k) || ["command", "format", "out", "log"].contains(&k) {
                m.insert(k.to_string(), v);
            }
        };
        put("command", self.command.name().to_string());
        let mut log = Vec::new();
        for (name, axis) in [
            ("eta", &self.eta),
            ("delta", &self.delta),
            ("t", &self.t),
            ("omega-range", &self.omega),
        ] {
            if let Some(a) = axis {
                put(name, a.render());
                if a.is_log() {
                    log.push(name);
                }
            }
        }
        if !log.is_empty() {
            put("log", log.join(","));
        }
        put("beta", self.beta.to_string());
        put("j-cut", self.j_cut.to_string());
        put("t-max", self.t_max.to_string());
        put("dt", self.dt.to_string());
        put("method", self.method.name().to_string());
        put("format", self.format.name().to_string());
        if let Some(out) = &self.out {
            put("out", out.display().to_string());
        }
        m
    }

    /// [`to_pairs`](Self::to_pairs) as a config file.
    pub fn to_text(&self) -> String {
        self.to_pairs()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wqed",
    version,
    about = "Sweeps over two emitters coupled through a delayed waveguide"
)]
struct Cli {
    /// What to compute (may instead come from the config file).
    #[arg(value_enum)]
    command: Option<Command>,
    /// Delay gamma d / v: value, list a,b,c or range start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Detuning in units of gamma: value, list or range.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Waveguide coupling efficiency in (0, 1].
    #[arg(long)]
    beta: Option<String>,
    /// Times gamma t: value, list or range.
    #[arg(long)]
    t: Option<String>,
    /// Final time of a dynamics trace.
    #[arg(long = "t-max")]
    t_max: Option<String>,
    /// Output step of a dynamics trace.
    #[arg(long)]
    dt: Option<String>,
    /// Solver: series, poles or ode.
    #[arg(long)]
    method: Option<String>,
    /// Spectrum frequencies omega - omega_0 as start:stop:count or a list.
    #[arg(long = "omega-range", allow_hyphen_values = true)]
    omega_range: Option<String>,
    /// Pole branches kept on each side.
    #[arg(long = "j-cut")]
    j_cut: Option<String>,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads [env: WQED_WORKERS].
    #[arg(long)]
    workers: Option<String>,
    /// Flat key = value file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated axes (eta, delta, t, omega-range) to space logarithmically.
    #[arg(long)]
    log: Option<String>,
}

impl Cli {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("eta", &self.eta),
            ("delta", &self.delta),
            ("beta", &self.beta),
            ("t", &self.t),
            ("t-max", &self.t_max),
            ("dt", &self.dt),
            ("method", &self.method),
            ("omega-range", &self.omega_range),
            ("j-cut", &self.j_cut),
            ("out", &self.out),
            ("format", &self.format),
            ("workers", &self.workers),
            ("log", &self.log),
        ]
    }
}

const ALL_KEYS: &[&str] = &[
    "command",
    "eta",
    "delta",
    "beta",
    "t",
    "t-max",
    "dt",
    "method",
    "omega-range",
    "j-cut",
    "out",
    "format",
    "workers",
    "log",
];

/// Parses a flat `key = value` document; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut m = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(invalid(format!(
                "config line {}: expected 'key = value', got '{line}'",
                n + 1
            )));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        if !ALL_KEYS.contains(&key.as_str()) {
            return Err(invalid(format!(
                "config line {}: unknown key '{key}'",
                n + 1
            )));
        }
        if m.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(invalid(format!(
                "config line {}: '{key}' given twice",
                n + 1
            )));
        }
    }
    Ok(m)
}

/// Parses command-line arguments (including the program name), merging in
/// the `--config` file if given.
pub fn parse_config<I, T>(args: I) -> Result<SweepConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let mut pairs = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            parse_pairs(&text)?
        }
        None => BTreeMap::new(),
    };
    if let Some(c) = cli.command {
        pairs.insert("command".into(), c.name().into());
    }
    for (k, v) in cli.pairs() {
        if let Some(v) = v {
            pairs.insert(k.into(), v.clone());
        }
    }
    from_pairs(&pairs)
}

/// Parses a config document on its own.
pub fn parse_config_text(text: &str) -> Result<SweepConfig, ConfigError> {
    from_pairs(&parse_pairs(text)?)
}

fn scalar<T: std::str::FromStr>(
    pairs: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, ConfigError> {
    match pairs.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| invalid(format!("--{key}: cannot parse '{v}'"))),
    }
}

fn default_workers() -> Result<usize, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("{WORKERS_ENV}: '{v}' is not a positive integer"))),
        Err(_) => Ok(wqed_core::parallel::current_workers()),
    }
}

/// Validates merged key-value pairs into a [`SweepConfig`].
pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<SweepConfig, ConfigError> {
    let command = match pairs.get("command") {
        Some(c) => Command::parse(c)?,
        None => {
            return Err(invalid(
                "missing command (dynamics, spectrum, qfi, qfi-scan, qbic or baseline)",
            ))
        }
    };
    let keys = command.keys();
    for k in pairs.keys() {
        let shared = ["command", "out", "format", "workers", "log"].contains(&k.as_str());
        if !shared && !keys.contains(&k.as_str()) {
            return Err(invalid(format!(
                "--{k} is not used by the {command} command"
            )));
        }
    }
    let axis = |name: &str| pairs.get(name).map(|v| Axis::parse(name, v)).transpose();
    let mut eta = axis("eta")?;
    let mut delta = axis("delta")?;
    let mut t = axis("t")?;
    let mut omega = axis("omega-range")?;

    if let Some(list) = pairs.get("log") {
        for name in list.split(',').map(str::trim) {
            let target = match name {
                "eta" => &mut eta,
                "delta" => &mut delta,
                "t" => &mut t,
                "omega-range" | "omega" => &mut omega,
                other => return Err(invalid(format!("--log: unknown axis '{other}'"))),
            };
            match target {
                Some(Axis::Range { start, log, .. }) if *start > 0.0 => *log = true,
                Some(Axis::Range { .. }) => {
                    return Err(invalid(format!(
                        "--log {name}: log spacing needs a positive start"
                    )))
                }
                _ => {
                    return Err(invalid(format!(
                        "--log {name}: needs --{name} given as start:stop:count"
                    )))
                }
            }
        }
    }

    let method_default = if command == Command::Qbic {
        Method::Poles
    } else {
        Method::Series
    };
    let method = match pairs.get("method") {
        Some(m) => m
            .parse::<Method>()
            .map_err(|e| invalid(format!("--method: {e}")))?,
        None => method_default,
    };
    let format = match pairs.get("format").map(String::as_str) {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => {
            return Err(invalid(format!(
                "--format: unknown format '{other}' (expected csv or json)"
            )))
        }
    };
    let workers = match pairs.get("workers") {
        Some(_) => scalar(pairs, "workers", 1usize)?,
        None => default_workers()?,
    };
    let config = SweepConfig {
        command,
        eta,
        delta,
        t,
        omega,
        beta: scalar(pairs, "beta", 1.0)?,
        j_cut: scalar(pairs, "j-cut", 250usize)?,
        t_max: scalar(pairs, "t-max", 20.0)?,
        dt: scalar(pairs, "dt", 0.01)?,
        method,
        out: pairs.get("out").map(PathBuf::from),
        format,
        workers,
    };
    validate(&config)?;
    Ok(config)
}

fn validate(c: &SweepConfig) -> Result<(), ConfigError> {
    let need = |axis: &Option<Axis>, name: &str| match axis {
        Some(_) => Ok(()),
        None => Err(invalid(format!("{} needs --{name}", c.command))),
    };
    let single = |axis: &Option<Axis>, name: &str| match axis {
        Some(a) if a.len() != 1 => Err(invalid(format!(
            "{} takes a single --{name} value (use qfi-scan or a list-capable command for sweeps)",
            c.command
        ))),
        _ => Ok(()),
    };
    match c.command {
        Command::Dynamics | Command::Spectrum => {
            need(&c.eta, "eta")?;
            need(&c.delta, "delta")?;
            single(&c.eta, "eta")?;
            single(&c.delta, "delta")?;
        }
        Command::Qfi => {
            need(&c.eta, "eta")?;
            need(&c.delta, "delta")?;
            need(&c.t, "t")?;
            single(&c.eta, "eta")?;
            single(&c.delta, "delta")?;
        }
        Command::QfiScan => {
            need(&c.eta, "eta")?;
            need(&c.delta, "delta")?;
            need(&c.t, "t")?;
        }
        Command::Qbic => {
            need(&c.eta, "eta")?;
            need(&c.delta, "delta")?;
        }
        Command::Baseline => need(&c.t, "t")?,
    }
    if let Some(eta) = &c.eta {
        if !(eta.min() > 0.0) {
            return Err(invalid(format!(
                "--eta: delays must be positive, got {}",
                eta.min()
            )));
        }
    }
    if let Some(t) = &c.t {
        if !(t.min() >= 0.0) {
            return Err(invalid(format!(
                "--t: times must be non-negative, got {}",
                t.min()
            )));
        }
    }
    if !(c.beta > 0.0 && c.beta <= 1.0) {
        return Err(invalid(format!(
            "--beta: must lie in (0, 1], got {}",
            c.beta
        )));
    }
    if matches!(c.command, Command::Qfi | Command::QfiScan) && c.beta != 1.0 {
        return Err(invalid(format!(
            "--beta: the Fisher information needs beta = 1, got {}",
            c.beta
        )));
    }
    if c.j_cut < 1 {
        return Err(invalid("--j-cut: must be at least 1"));
    }
    if !(c.t_max > 0.0 && c.t_max.is_finite()) {
        return Err(invalid(format!(
            "--t-max: must be positive, got {}",
            c.t_max
        )));
    }
    if !(c.dt > 0.0 && c.dt <= c.t_max) {
        return Err(invalid(format!(
            "--dt: must lie in (0, t-max], got {}",
            c.dt
        )));
    }
    if c.command == Command::Qbic && c.method == Method::Ode {
        return Err(invalid("--method: qbic uses series or poles"));
    }
    if c.workers < 1 {
        return Err(invalid("--workers: must be at least 1"));
    }
    Ok(())
}
