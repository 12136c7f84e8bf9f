//! Command-line front end.
//!
//! Every option can also come from a `key=value` file given by `--config`;
//! flags on the command line override the file. A resolved [`RunConfig`]
//! writes itself back out in the same format.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::analysis::{
    ansatz_residual_check_with_step, convergence_study, linspace, sweep_with, verify_lemmas_with,
    LemmaTolerances, THREADS_ENV,
};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Form, IntegratorSettings};
use crate::io::{format_float, sweep_csv_string, trajectory_csv_string, JsonReport};
use crate::params::{make_params, Params};
use crate::solver::{continue_branch, newton_solve_with, refinement_report, MIN_SHOOT_ZETA_MAX};

/// Normalised residual below which the ansatz check passes.
pub const ANSATZ_THRESHOLD: f64 = 1e-4;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Integrate,
    Verify,
    Converge,
    Sweep,
    Shoot,
    Branch,
    AnsatzCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Integrate => "integrate",
            Command::Verify => "verify",
            Command::Converge => "converge",
            Command::Sweep => "sweep",
            Command::Shoot => "shoot",
            Command::Branch => "branch",
            Command::AnsatzCheck => "ansatz-check",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            Command::Integrate,
            Command::Verify,
            Command::Converge,
            Command::Sweep,
            Command::Shoot,
            Command::Branch,
            Command::AnsatzCheck,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }

    /// Keys the command reads besides the integrator settings and `out`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Integrate => &["a", "rho0", "dim", "zeta_max"],
            Command::Verify => &[
                "a",
                "rho0",
                "dim",
                "zeta_max",
                "growth_factor",
                "decay",
                "limit_ratio",
                "zero_energy_tol",
            ],
            Command::Converge => &["a", "rho0", "dim", "zeta_list"],
            Command::Sweep => &["rho0_range", "a_range", "grid", "zeta_max"],
            Command::Shoot => &["start", "zeta_max", "tol", "max_iter", "zeta_list"],
            Command::Branch => &["start", "zeta_max", "tol", "max_iter", "a_step", "steps"],
            Command::AnsatzCheck => &[
                "a", "rho0", "dim", "zeta_max", "t_blowup", "r_points", "t_points", "fd_step",
            ],
        }
    }

    fn uses(self, key: &str) -> bool {
        COMMON_KEYS.contains(&key) || self.keys().contains(&key)
    }
}

const COMMON_KEYS: [&str; 5] = ["rtol", "atol", "form", "sample_spacing", "out"];

const ALL_KEYS: [&str; 26] = [
    "a",
    "rho0",
    "dim",
    "zeta_max",
    "rtol",
    "atol",
    "form",
    "sample_spacing",
    "out",
    "start",
    "tol",
    "max_iter",
    "zeta_list",
    "rho0_range",
    "a_range",
    "grid",
    "a_step",
    "steps",
    "t_blowup",
    "r_points",
    "t_points",
    "fd_step",
    "growth_factor",
    "decay",
    "limit_ratio",
    "zero_energy_tol",
];

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Absent for `sweep`, `shoot` and `branch`, which range over parameters.
    pub params: Option<Params>,
    pub settings: IntegratorSettings,
    pub zeta_max: f64,
    pub zeta_list: Vec<f64>,
    pub rho0_range: (f64, f64),
    pub a_range: (f64, f64),
    pub grid: (usize, usize),
    /// Newton start `(ρ₀, a)`.
    pub start: (f64, f64),
    pub tol: f64,
    pub max_iter: usize,
    pub a_step: f64,
    pub steps: usize,
    pub t_blowup: f64,
    pub r_points: Vec<f64>,
    pub t_points: Vec<f64>,
    pub fd_step: f64,
    pub tolerances: LemmaTolerances,
    pub out: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(
    name = "nls-profile",
    version,
    about = "Self-similar NLS blow-up profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Integrate one profile and write it as CSV
    Integrate(Flags),
    /// Far-field audit report for one profile (JSON)
    Verify(Flags),
    /// Residual trends over several truncation radii (JSON)
    Converge(Flags),
    /// Classify a (rho0, a) grid (CSV)
    Sweep(Flags),
    /// Newton shooting with a truncation-radius refinement report (JSON)
    Shoot(Flags),
    /// Continue a converged root in a (JSON)
    Branch(Flags),
    /// Finite-difference PDE residual of the self-similar field (JSON)
    AnsatzCheck(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// key=value file; flags given here override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rho0: Option<String>,
    /// spatial dimension [default: 3]
    #[arg(long, allow_hyphen_values = true)]
    dim: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    zeta_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rtol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    atol: Option<String>,
    /// cartesian | polar
    #[arg(long)]
    form: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sample_spacing: Option<String>,
    /// output file; stdout when absent
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// Newton start as rho0,a
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    max_iter: Option<String>,
    /// comma-separated truncation radii
    #[arg(long, allow_hyphen_values = true)]
    zeta_list: Option<String>,
    /// lo,hi
    #[arg(long, allow_hyphen_values = true)]
    rho0_range: Option<String>,
    /// lo,hi
    #[arg(long, allow_hyphen_values = true)]
    a_range: Option<String>,
    /// n_rho0,n_a
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a_step: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    steps: Option<String>,
    /// blow-up time
    #[arg(long = "T", alias = "t-blowup", allow_hyphen_values = true)]
    t_blowup: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r_points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    fd_step: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    growth_factor: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    decay: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    limit_ratio: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    zero_energy_tol: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let fields = [
            ("a", &self.a),
            ("rho0", &self.rho0),
            ("dim", &self.dim),
            ("zeta_max", &self.zeta_max),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
            ("form", &self.form),
            ("sample_spacing", &self.sample_spacing),
            ("out", &self.out),
            ("start", &self.start),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("zeta_list", &self.zeta_list),
            ("rho0_range", &self.rho0_range),
            ("a_range", &self.a_range),
            ("grid", &self.grid),
            ("a_step", &self.a_step),
            ("steps", &self.steps),
            ("t_blowup", &self.t_blowup),
            ("r_points", &self.r_points),
            ("t_points", &self.t_points),
            ("fd_step", &self.fd_step),
            ("growth_factor", &self.growth_factor),
            ("decay", &self.decay),
            ("limit_ratio", &self.limit_ratio),
            ("zero_energy_tol", &self.zero_energy_tol),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

fn flag(key: &str) -> String {
    if key == "t_blowup" {
        "--T".into()
    } else {
        format!("--{}", key.replace('_', "-"))
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

/// Parses `argv` (program name first) into a validated configuration.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| usage(e.to_string()))?;
    from_cli(cli)
}

fn from_cli(cli: Cli) -> Result<RunConfig> {
    let (command, flags) = match cli.command {
        Sub::Integrate(f) => (Command::Integrate, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Converge(f) => (Command::Converge, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Shoot(f) => (Command::Shoot, f),
        Sub::Branch(f) => (Command::Branch, f),
        Sub::AnsatzCheck(f) => (Command::AnsatzCheck, f),
    };
    let cli_pairs = flags.pairs();
    for (k, _) in &cli_pairs {
        if !command.uses(k) {
            return Err(usage(format!(
                "{} is not used by {}",
                flag(k),
                command.name()
            )));
        }
    }
    let mut merged = BTreeMap::new();
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
        let (file_command, pairs) = parse_config_text(&text)?;
        if let Some(c) = file_command {
            if c != command {
                return Err(usage(format!(
                    "--config names command {} but {} was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        merged.extend(pairs.into_iter().filter(|(k, _)| command.uses(k)));
    }
    merged.extend(cli_pairs.into_iter().map(|(k, v)| (k.to_string(), v)));
    resolve(command, &merged)
}

/// Splits a config file into its optional `command` and its other keys.
/// Blank lines and lines starting with `#` are skipped; `-` in keys reads as `_`.
fn parse_config_text(text: &str) -> Result<(Option<Command>, BTreeMap<String, String>)> {
    let mut command = None;
    let mut pairs = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = k.trim().replace('-', "_");
        let value = v.trim().to_string();
        if key == "command" {
            command = Some(Command::from_name(&value).ok_or_else(|| {
                usage(format!("config line {}: unknown command {value:?}", n + 1))
            })?);
        } else if ALL_KEYS.contains(&key.as_str()) {
            pairs.insert(key, value);
        } else {
            return Err(usage(format!("config line {}: unknown key {key:?}", n + 1)));
        }
    }
    Ok((command, pairs))
}

struct Lookup<'a>(&'a BTreeMap<String, String>);

impl Lookup<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| usage(format!("missing required value {}", flag(key))))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| parse_number(key, v)).transpose()
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| {
                usage(format!(
                    "{} expects a non-negative integer, got {v:?}",
                    flag(key)
                ))
            }),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| v.split(',').map(|x| parse_number(key, x)).collect())
            .transpose()
    }

    fn pair(&self, key: &str) -> Result<Option<(f64, f64)>> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some(_) => Err(usage(format!(
                "{} expects two comma-separated values",
                flag(key)
            ))),
        }
    }
}

fn parse_number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| usage(format!("{} expects a number, got {v:?}", flag(key))))?;
    if !x.is_finite() {
        return Err(usage(format!("{} must be finite", flag(key))));
    }
    Ok(x)
}

/// Turns a library validation error into a usage error naming the flag.
fn as_usage(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => usage(format!("{} {reason}", flag(name))),
        other => other,
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(usage(format!("{} must be positive", flag(key))))
    }
}

fn resolve(command: Command, map: &BTreeMap<String, String>) -> Result<RunConfig> {
    let get = Lookup(map);
    let defaults = IntegratorSettings::default();
    let form = match get.raw("form") {
        None => defaults.form,
        Some("cartesian") => Form::Cartesian,
        Some("polar") => Form::BoundedPolar,
        Some(other) => {
            return Err(usage(format!(
                "--form expects cartesian or polar, got {other:?}"
            )))
        }
    };
    let settings = IntegratorSettings {
        rtol: get.number_or("rtol", defaults.rtol)?,
        atol: get.number_or("atol", defaults.atol)?,
        form,
        sample_spacing: get.number_or("sample_spacing", defaults.sample_spacing)?,
        ..defaults
    };
    settings.validate().map_err(as_usage)?;

    let uses = |k: &str| command.keys().contains(&k);
    let params = if uses("a") {
        let a = parse_number("a", get.required("a")?)?;
        let rho0 = parse_number("rho0", get.required("rho0")?)?;
        let dim = get.number_or("dim", 3.0)?;
        Some(make_params(a, rho0, dim).map_err(as_usage)?)
    } else {
        None
    };

    let default_zeta_max = match command {
        Command::Verify => 400.0,
        Command::Shoot | Command::Branch => 50.0,
        _ => 100.0,
    };
    let mut zeta_max = get.number_or("zeta_max", default_zeta_max)?;

    let zeta_list = match command {
        Command::Converge => get
            .list("zeta_list")?
            .unwrap_or_else(|| vec![100.0, 200.0, 400.0]),
        Command::Shoot => get
            .list("zeta_list")?
            .unwrap_or_else(|| vec![50.0, 100.0, 200.0]),
        _ => Vec::new(),
    };
    if zeta_list.iter().any(|&z| !(z > 1.0)) {
        return Err(usage("--zeta-list entries must exceed 1"));
    }

    let start = if uses("start") {
        let s = get
            .pair("start")?
            .ok_or_else(|| usage("missing required value --start"))?;
        positive("start", s.0)?;
        positive("start", s.1)?;
        if zeta_max < MIN_SHOOT_ZETA_MAX {
            return Err(usage(format!(
                "--zeta-max must be at least {MIN_SHOOT_ZETA_MAX} for shooting"
            )));
        }
        s
    } else {
        (0.0, 0.0)
    };
    let tol = positive("tol", get.number_or("tol", 1e-8)?)?;
    let max_iter = get.count_or("max_iter", 50)?;
    let a_step = get.number_or("a_step", -0.02)?;
    if a_step == 0.0 {
        return Err(usage("--a-step must be nonzero"));
    }
    let steps = get.count_or("steps", 5)?;

    let rho0_range = get.pair("rho0_range")?.unwrap_or((0.5, 3.0));
    let a_range = get.pair("a_range")?.unwrap_or((0.5, 1.5));
    for (key, (lo, hi)) in [("rho0_range", rho0_range), ("a_range", a_range)] {
        if !(lo > 0.0 && hi >= lo) {
            return Err(usage(format!(
                "{} must be positive with lo <= hi",
                flag(key)
            )));
        }
    }
    let grid = match get.list("grid")? {
        None => (10, 10),
        Some(v) if v.len() == 2 && v.iter().all(|&x| x >= 1.0 && x.fract() == 0.0) => {
            (v[0] as usize, v[1] as usize)
        }
        Some(_) => return Err(usage("--grid expects two positive integers n_rho0,n_a")),
    };

    let t_blowup = positive("t_blowup", get.number_or("t_blowup", 1.0)?)?;
    let r_points = get
        .list("r_points")?
        .unwrap_or_else(|| linspace(0.2, 2.0, 10));
    let t_points = get
        .list("t_points")?
        .unwrap_or_else(|| (0..10).map(|k| 0.11 * k as f64).collect());
    let fd_step = get.number_or("fd_step", crate::analysis::DEFAULT_FD_STEP)?;
    if command == Command::AnsatzCheck {
        if r_points.iter().any(|&r| !(r > 0.0)) {
            return Err(usage("--r-points must be positive"));
        }
        if t_points.iter().any(|&t| t >= t_blowup) {
            return Err(usage("--t-points must stay below --T"));
        }
        if !(fd_step > 0.0 && fd_step < 0.5) {
            return Err(usage("--fd-step must lie in (0, 0.5)"));
        }
        if get.raw("zeta_max").is_none() {
            zeta_max = ansatz_zeta_max(
                params.expect("ansatz-check has params").a,
                t_blowup,
                &r_points,
                &t_points,
            );
        }
    }
    if !(zeta_max > 1.0) {
        return Err(usage("--zeta-max must exceed 1"));
    }

    let base = LemmaTolerances::default();
    let tolerances = LemmaTolerances {
        growth_factor: get.number_or("growth_factor", base.growth_factor)?,
        decay: get.number_or("decay", base.decay)?,
        limit_ratio: get.number_or("limit_ratio", base.limit_ratio)?,
        zero_energy: get.number_or("zero_energy_tol", base.zero_energy)?,
        ..base
    };

    Ok(RunConfig {
        command,
        params,
        settings,
        zeta_max,
        zeta_list,
        rho0_range,
        a_range,
        grid,
        start,
        tol,
        max_iter,
        a_step,
        steps,
        t_blowup,
        r_points,
        t_points,
        fd_step,
        tolerances,
        out: get.raw("out").map(PathBuf::from),
    })
}

/// Radius covering every stencil of the ansatz grid, with room to spare.
fn ansatz_zeta_max(a: f64, t_blowup: f64, r_points: &[f64], t_points: &[f64]) -> f64 {
    let r = r_points.iter().copied().fold(0.0, f64::max);
    let t = t_points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let need = r / (2.0 * a * (t_blowup - t)).sqrt();
    (1.2 * need + 2.0).ceil().max(10.0)
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|&x| format_float(x))
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Reads a file previously written by [`RunConfig::to_config_string`].
    pub fn from_config_str(text: &str) -> Result<RunConfig> {
        let (command, pairs) = parse_config_text(text)?;
        let command = command.ok_or_else(|| usage("config has no command line"))?;
        let pairs = pairs.into_iter().filter(|(k, _)| command.uses(k)).collect();
        resolve(command, &pairs)
    }

    pub fn from_config_file(path: &Path) -> Result<RunConfig> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }

    /// Every resolved value the command reads, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![("command".into(), self.command.name().into())];
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        if let Some(p) = &self.params {
            push("a", format_float(p.a));
            push("rho0", format_float(p.rho0));
            push("dim", format_float(p.dim));
        }
        push("rtol", format_float(self.settings.rtol));
        push("atol", format_float(self.settings.atol));
        push("form", self.settings.form.to_string());
        push("sample_spacing", format_float(self.settings.sample_spacing));
        let keys = self.command.keys();
        for &k in keys {
            let v = match k {
                "a" | "rho0" | "dim" => continue,
                "zeta_max" => format_float(self.zeta_max),
                "zeta_list" => join(&self.zeta_list),
                "rho0_range" => join(&[self.rho0_range.0, self.rho0_range.1]),
                "a_range" => join(&[self.a_range.0, self.a_range.1]),
                "grid" => format!("{},{}", self.grid.0, self.grid.1),
                "start" => join(&[self.start.0, self.start.1]),
                "tol" => format_float(self.tol),
                "max_iter" => self.max_iter.to_string(),
                "a_step" => format_float(self.a_step),
                "steps" => self.steps.to_string(),
                "t_blowup" => format_float(self.t_blowup),
                "r_points" => join(&self.r_points),
                "t_points" => join(&self.t_points),
                "fd_step" => format_float(self.fd_step),
                "growth_factor" => format_float(self.tolerances.growth_factor),
                "decay" => format_float(self.tolerances.decay),
                "limit_ratio" => format_float(self.tolerances.limit_ratio),
                "zero_energy_tol" => format_float(self.tolerances.zero_energy),
                _ => unreachable!("unlisted key {k}"),
            };
            push(k, v);
        }
        if let Some(o) = &self.out {
            push("out", o.display().to_string());
        }
        out
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_pairs() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// The `settings` object embedded in JSON reports.
    fn settings_json(&self) -> Value {
        let mut m = Map::new();
        let s = &self.settings;
        m.insert("rtol".into(), Value::from(s.rtol));
        m.insert("atol".into(), Value::from(s.atol));
        m.insert("max_step_factor".into(), Value::from(s.max_step_factor));
        m.insert("form".into(), Value::from(s.form.to_string()));
        m.insert("sample_spacing".into(), Value::from(s.sample_spacing));
        m.insert("zeta0".into(), Value::from(s.zeta0));
        m.insert("command".into(), Value::from(self.command.name()));
        m.insert("config".into(), Value::from(self.to_config_string()));
        Value::Object(m)
    }
}

/// What a run produced: the text written and whether it counts as a success.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub output: String,
    pub success: bool,
    pub summary: String,
}

/// Runs the configured command and returns its output without writing it.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let settings = &cfg.settings;
    match cfg.command {
        Command::Integrate => {
            let p = cfg.params.expect("integrate has params");
            let traj = integrate(&p, cfg.zeta_max, settings)?;
            let output = trajectory_csv_string(&traj)?;
            Ok(Outcome {
                summary: format!(
                    "{} samples to zeta={}, status {}",
                    traj.samples().len(),
                    format_float(traj.last().zeta()),
                    traj.status
                ),
                success: traj.is_completed(),
                output,
            })
        }
        Command::Verify => {
            let p = cfg.params.expect("verify has params");
            let report = verify_lemmas_with(&p, cfg.zeta_max, &cfg.tolerances, settings)?;
            let failed: Vec<&str> = report
                .entries
                .iter()
                .filter(|e| !e.pass)
                .map(|e| e.name.as_str())
                .collect();
            Ok(Outcome {
                summary: if failed.is_empty() {
                    "all entries pass".into()
                } else {
                    format!("failing entries: {}", failed.join(", "))
                },
                success: report.pass(),
                output: JsonReport::lemma_report(&report, cfg.settings_json()).to_json_string(),
            })
        }
        Command::Converge => {
            let p = cfg.params.expect("converge has params");
            let table = convergence_study(&p, &cfg.zeta_list, settings)?;
            Ok(Outcome {
                summary: format!(
                    "Z decreasing: {}, H defect decreasing: {}",
                    table.z_decreasing, table.h_decreasing
                ),
                success: table.pass(),
                output: JsonReport::convergence(&table, cfg.settings_json()).to_json_string(),
            })
        }
        Command::Sweep => {
            let threads = std::env::var(THREADS_ENV)
                .ok()
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer")))
                })
                .transpose()?;
            let cells = sweep_with(
                cfg.rho0_range,
                cfg.a_range,
                cfg.grid,
                cfg.zeta_max,
                settings,
                threads,
            )?;
            let done = cells.iter().filter(|c| c.error.is_none()).count();
            let mut header = cfg.to_pairs();
            header.retain(|(k, _)| k != "out");
            Ok(Outcome {
                summary: format!("{} cells, {done} integrated", cells.len()),
                success: true,
                output: sweep_csv_string(&cells, &header),
            })
        }
        Command::Shoot => {
            let solved =
                newton_solve_with(cfg.start, cfg.zeta_max, cfg.tol, cfg.max_iter, settings)?;
            let seed = if solved.converged {
                (solved.rho0, solved.a)
            } else {
                cfg.start
            };
            let refinement =
                refinement_report(seed, &cfg.zeta_list, cfg.tol, cfg.max_iter, settings)?;
            Ok(Outcome {
                summary: format!(
                    "rho0={} a={} |W|={:e} iterations={} bumps={} converged={}",
                    solved.rho0,
                    solved.a,
                    solved.residual_norm,
                    solved.iterations,
                    solved.bump_count,
                    solved.converged
                ),
                success: solved.converged,
                output: JsonReport::shooting(&solved, &refinement, cfg.settings_json())
                    .to_json_string(),
            })
        }
        Command::Branch => {
            let seed = newton_solve_with(cfg.start, cfg.zeta_max, cfg.tol, cfg.max_iter, settings)?;
            if !seed.converged {
                return Err(Error::Integration(format!(
                    "seed did not converge from --start (|W|={:e})",
                    seed.residual_norm
                )));
            }
            let branch = continue_branch(&seed, cfg.a_step, cfg.steps, cfg.tol, settings)?;
            let report = JsonReport::branch(&branch, &seed, cfg.settings_json());
            Ok(Outcome {
                summary: format!(
                    "{} members, stopped early: {}",
                    branch.members.iter().filter(|m| m.converged).count(),
                    branch.stopped_early
                ),
                success: report.pass == Some(true),
                output: report.to_json_string(),
            })
        }
        Command::AnsatzCheck => {
            let p = cfg.params.expect("ansatz-check has params");
            let traj = integrate(&p, cfg.zeta_max, settings)?;
            let check = ansatz_residual_check_with_step(
                &traj,
                &p,
                cfg.t_blowup,
                &cfg.r_points,
                &cfg.t_points,
                cfg.fd_step,
            )?;
            Ok(Outcome {
                summary: format!("normalized residual {:e}", check.normalized),
                success: check.normalized < ANSATZ_THRESHOLD,
                output: JsonReport::ansatz(&check, &p, ANSATZ_THRESHOLD, cfg.settings_json())
                    .to_json_string(),
            })
        }
    }
}

/// Runs `cfg` and writes its output to `cfg.out` or stdout.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let outcome = execute(cfg)?;
    match &cfg.out {
        Some(path) => write_text(path, &outcome.output)?,
        None => print!("{}", outcome.output),
    }
    Ok(outcome)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Err(e) = std::fs::write(path, text) {
        let _ = std::fs::remove_file(path);
        return Err(e.into());
    }
    Ok(())
}

/// Exit code for an error: 2 for usage and validation, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::InvalidParameter { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Full command-line behaviour, returning the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match run(&cfg) {
        Ok(o) => {
            eprintln!("{}: {}", cfg.command.name(), o.summary);
            if o.success {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
