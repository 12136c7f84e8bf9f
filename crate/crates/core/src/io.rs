//! CSV output for trajectories and sweeps, JSON output for reports.
//!
//! Floats are written in the shortest form that parses back to the same bits.
//! Every file carries the configuration that produced it: CSV files as
//! leading `# key=value` lines, JSON files under `params` and `settings`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::analysis::{AnsatzCheck, ConvergenceTable, LemmaReport, SweepCell};
use crate::error::{Error, Result};
use crate::functionals::{budd_residual_series, energy_series, zero_energy_residual};
use crate::integrator::{IntegratorSettings, Trajectory};
use crate::params::Params;
use crate::solver::{Branch, ShootingResult};

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "zeta",
    "rho",
    "zrho",
    "dzrho",
    "theta",
    "theta_prime",
    "q_re",
    "q_im",
    "dq_re",
    "dq_im",
    "E",
    "budd_residual",
    "Z",
];

pub const SWEEP_COLUMNS: [&str; 7] = [
    "rho0",
    "a",
    "bump_count",
    "E_final",
    "k_plateau",
    "Z_final",
    "status",
];

/// Shortest decimal that round-trips; scientific notation outside
/// `[1e-4, 1e15)`.
pub fn format_float(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&m) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Runs `body` against a buffered file at `path`, removing the file if
/// anything fails.
fn write_atomically<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let result = body(&mut w).and_then(|_| w.flush().map_err(Error::from));
    if result.is_err() {
        drop(w);
        let _ = std::fs::remove_file(path);
    }
    result
}

pub fn config_lines(params: &Params, settings: &IntegratorSettings) -> Vec<(String, String)> {
    vec![
        ("a".into(), format_float(params.a)),
        ("rho0".into(), format_float(params.rho0)),
        ("dim".into(), format_float(params.dim)),
        ("rtol".into(), format_float(settings.rtol)),
        ("atol".into(), format_float(settings.atol)),
        (
            "max_step_factor".into(),
            format_float(settings.max_step_factor),
        ),
        ("form".into(), settings.form.to_string()),
        (
            "sample_spacing".into(),
            format_float(settings.sample_spacing),
        ),
        ("zeta0".into(), format_float(settings.zeta0)),
    ]
}

/// One row per stored sample, then `# status=<status>`.
///
/// At `dim = 3` the `E` column must be strictly decreasing; a violation is
/// reported as an error and no file is left behind.
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let text = trajectory_csv_string(traj)?;
    write_atomically(path, |w| Ok(w.write_all(text.as_bytes())?))
}

/// The contents [`write_trajectory_csv`] would write.
pub fn trajectory_csv_string(traj: &Trajectory) -> Result<String> {
    use std::fmt::Write as _;
    let energy = energy_series(traj);
    if traj.params.is_dim3() {
        if let Some(i) = energy.windows(2).position(|w| !(w[1] < w[0])) {
            return Err(Error::Integration(format!(
                "E is not strictly decreasing between rows {i} and {}",
                i + 1
            )));
        }
    }
    let budd = budd_residual_series(traj);
    let mut out = String::new();
    for (k, v) in config_lines(&traj.params, &traj.settings) {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# zeta_max={}", format_float(traj.zeta_max));
    let _ = writeln!(out, "{}", TRAJECTORY_COLUMNS.join(","));
    for ((s, e), b) in traj.samples().iter().zip(&energy).zip(&budd) {
        let p = &s.polar;
        let c = &s.cartesian;
        let row = [
            p.zeta,
            p.rho(),
            p.p1,
            p.p2,
            p.theta,
            p.theta_prime(),
            c.q.re,
            c.q.im,
            c.p.re,
            c.p.im,
            *e,
            *b,
            zero_energy_residual(c, &traj.params),
        ];
        let fields: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    let _ = writeln!(out, "# status={}", traj.status);
    Ok(out)
}

/// One row per cell in sweep order.
pub fn write_sweep_csv(
    cells: &[SweepCell],
    header: &[(String, String)],
    path: &Path,
) -> Result<()> {
    let text = sweep_csv_string(cells, header);
    write_atomically(path, |w| Ok(w.write_all(text.as_bytes())?))
}

pub fn sweep_csv_string(cells: &[SweepCell], header: &[(String, String)]) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{}", SWEEP_COLUMNS.join(","));
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_float(c.rho0),
            format_float(c.a),
            c.bump_count,
            format_float(c.e_final),
            format_float(c.k_plateau),
            format_float(c.z_final),
            c.status
        );
    }
    out
}

/// Structured report with the fixed key order
/// `kind, params, settings, results, pass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsonReport {
    pub kind: String,
    pub params: Option<Params>,
    pub settings: Value,
    pub results: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise to JSON")
}

impl JsonReport {
    fn new(
        kind: &str,
        params: Option<Params>,
        settings: Value,
        results: Vec<Value>,
        pass: Option<bool>,
    ) -> Self {
        Self {
            kind: kind.into(),
            params,
            settings,
            results,
            pass,
        }
    }

    pub fn lemma_report(report: &LemmaReport, settings: Value) -> Self {
        let mut results: Vec<Value> = report.entries.iter().map(to_value).collect();
        results.push(serde_json::json!({
            "zeta_max": report.zeta_max,
            "checkpoints": report.checkpoints,
            "status": report.status,
            "complete": report.complete,
            "tolerances": report.tolerances,
        }));
        Self::new(
            "lemma_report",
            Some(report.params),
            settings,
            results,
            Some(report.pass()),
        )
    }

    pub fn shooting(
        result: &ShootingResult,
        refinement: &[ShootingResult],
        settings: Value,
    ) -> Self {
        let mut results = vec![tagged("solve", result)];
        results.extend(refinement.iter().map(|r| tagged("refine", r)));
        let params = Params::dim3(result.a, result.rho0).ok();
        Self::new(
            "shooting_result",
            params,
            settings,
            results,
            Some(result.converged),
        )
    }

    pub fn branch(branch: &Branch, seed: &ShootingResult, settings: Value) -> Self {
        let mut results = vec![tagged("seed", seed)];
        results.extend(branch.members.iter().map(|r| tagged("member", r)));
        let pass = !branch.stopped_early && branch.members.iter().all(|m| m.converged);
        let params = Params::dim3(seed.a, seed.rho0).ok();
        Self::new("branch", params, settings, results, Some(pass))
    }

    pub fn convergence(table: &ConvergenceTable, settings: Value) -> Self {
        let mut results: Vec<Value> = table.rows.iter().map(to_value).collect();
        results.push(serde_json::json!({
            "z_decreasing": table.z_decreasing,
            "h_decreasing": table.h_decreasing,
        }));
        Self::new(
            "convergence_table",
            Some(table.params),
            settings,
            results,
            Some(table.pass()),
        )
    }

    pub fn ansatz(check: &AnsatzCheck, params: &Params, threshold: f64, settings: Value) -> Self {
        let pass = check.normalized < threshold;
        Self::new(
            "ansatz_check",
            Some(*params),
            settings,
            vec![to_value(check)],
            Some(pass),
        )
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn tagged<T: Serialize>(role: &str, x: &T) -> Value {
    let mut v = to_value(x);
    if let Value::Object(map) = &mut v {
        map.insert("role".into(), Value::String(role.into()));
    }
    v
}

pub fn write_report_json(report: &JsonReport, path: &Path) -> Result<()> {
    let text = report.to_json_string();
    write_atomically(path, |w| {
        w.write_all(text.as_bytes())?;
        Ok(())
    })
}

/// Parses a trajectory CSV back into its header map, numeric rows and status.
pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryCsv> {
    let text = std::fs::read_to_string(path)?;
    let mut out = TrajectoryCsv::default();
    let mut saw_header = false;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                if k == "status" {
                    out.status = Some(v.to_string());
                } else {
                    out.config.push((k.to_string(), v.to_string()));
                }
            }
        } else if !saw_header {
            out.columns = line.split(',').map(str::to_string).collect();
            saw_header = true;
        } else {
            let row = line
                .split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Io(format!("bad float {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            out.rows.push(row);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryCsv {
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub status: Option<String>,
}
