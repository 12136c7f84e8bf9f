use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    energy_series, hamiltonian_truncated_at, mass_moment_integral, zero_energy_residual,
};
use crate::integrator::{integrate, IntegratorSettings, Status, Trajectory};
use crate::params::Params;

/// Thresholds used by [`verify_lemmas`]. All zero gives a report that fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaTolerances {
    /// Ceiling on the bounded quantities `ζρ`, `|ζρ'|`, `|ζρθ'|`.
    pub bound: f64,
    /// `ρ` must stay above this floor.
    pub positivity_floor: f64,
    /// Required ratio between successive checkpoints for divergent quantities.
    pub growth_factor: f64,
    /// Quantities tending to zero must have an envelope below this at `ζmax`.
    pub decay: f64,
    /// Allowed relative gap `|ζρ − √(−E)| / ζρ` at `ζmax`.
    pub limit_ratio: f64,
    /// `E(ζmax)` must lie below `−energy_margin`; also the allowed number of
    /// non-decreasing steps of `E`, rounded down.
    pub energy_margin: f64,
    /// Ceiling on `Z(ζmax)`.
    pub zero_energy: f64,
}

impl Default for LemmaTolerances {
    fn default() -> Self {
        Self {
            bound: 1e6,
            positivity_floor: 0.0,
            growth_factor: 1.5,
            decay: 1e-2,
            limit_ratio: 0.05,
            energy_margin: 0.0,
            zero_energy: 1e-2,
        }
    }
}

impl LemmaTolerances {
    pub fn zero() -> Self {
        Self {
            bound: 0.0,
            positivity_floor: 0.0,
            growth_factor: 0.0,
            decay: 0.0,
            limit_ratio: 0.0,
            energy_margin: 0.0,
            zero_energy: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaEntry {
    pub name: String,
    pub observed: Vec<(String, f64)>,
    pub pass: bool,
    pub tolerance_used: f64,
    pub checkpoints: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub params: Params,
    pub zeta_max: f64,
    pub checkpoints: Vec<f64>,
    pub status: Status,
    /// False when the integration stopped before `ζmax`.
    pub complete: bool,
    pub tolerances: LemmaTolerances,
    pub entries: Vec<LemmaEntry>,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.complete && self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&LemmaEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// `ζmax/4, ζmax/2, ζmax`
pub fn checkpoints(zeta_max: f64) -> [f64; 3] {
    [0.25 * zeta_max, 0.5 * zeta_max, zeta_max]
}

/// Audit with the default settings and tolerances.
pub fn verify_lemmas(
    params: &Params,
    zeta_max: f64,
    tolerances: &LemmaTolerances,
) -> Result<LemmaReport> {
    verify_lemmas_with(params, zeta_max, tolerances, &IntegratorSettings::default())
}

pub fn verify_lemmas_with(
    params: &Params,
    zeta_max: f64,
    tol: &LemmaTolerances,
    settings: &IntegratorSettings,
) -> Result<LemmaReport> {
    if !params.is_dim3() {
        return Err(Error::Unsupported("lemma audit requires dim = 3".into()));
    }
    let traj = integrate(params, zeta_max, settings)?;
    let cps = checkpoints(zeta_max);
    let mut report = LemmaReport {
        params: *params,
        zeta_max,
        checkpoints: cps.to_vec(),
        status: traj.status,
        complete: traj.is_completed(),
        tolerances: *tol,
        entries: Vec::new(),
    };
    report.entries.push(positivity(&traj, tol, &cps));
    if !report.complete {
        return Ok(report);
    }
    report.entries.insert(0, bounds(&traj, tol, &cps));
    report.entries.push(divergence(&traj, tol, &cps)?);
    report.entries.push(growth_limits(&traj, tol, &cps)?);
    let energy = energy_series(&traj);
    report
        .entries
        .push(energy_bounded(&traj, &energy, tol, &cps));
    report.entries.push(energy_negative(&energy, tol, &cps));
    report
        .entries
        .push(phase_limits(&traj, &energy, tol, &cps)?);
    report.entries.push(zero_energy(&traj, tol, &cps)?);
    Ok(report)
}

fn entry(
    name: &str,
    observed: Vec<(String, f64)>,
    pass: bool,
    tolerance_used: f64,
    cps: &[f64; 3],
) -> LemmaEntry {
    LemmaEntry {
        name: name.into(),
        observed,
        pass,
        tolerance_used,
        checkpoints: cps.to_vec(),
    }
}

fn label(prefix: &str, zeta: f64) -> String {
    format!("{prefix}@{zeta}")
}

/// Largest value of `f` over samples in `[0.9ζ, ζ]`; tracks the amplitude of
/// quantities that oscillate in the far field.
fn envelope<F: Fn(&crate::integrator::Sample) -> f64>(traj: &Trajectory, zeta: f64, f: F) -> f64 {
    let lo = 0.9 * zeta;
    traj.samples()
        .iter()
        .skip(traj.index_at_or_below(lo))
        .take_while(|s| s.zeta() <= zeta)
        .filter(|s| s.zeta() >= lo)
        .map(|s| f(s).abs())
        .fold(0.0, f64::max)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] / w[0]).collect()
}

fn bounds(traj: &Trajectory, tol: &LemmaTolerances, cps: &[f64; 3]) -> LemmaEntry {
    let (mut zr, mut zrp, mut zrt) = (0.0f64, 0.0f64, 0.0f64);
    let mut finite = true;
    for s in traj.samples() {
        let p = &s.polar;
        finite &= p.is_finite();
        zr = zr.max(p.p1);
        // ζρ' = (ζρ)' − ρ and ζρθ' = p3 / p1
        zrp = zrp.max((p.p2 - p.rho()).abs());
        zrt = zrt.max((p.p3 / p.p1).abs());
    }
    let pass = finite && zr < tol.bound && zrp < tol.bound && zrt < tol.bound;
    let observed = vec![
        ("max_zeta_rho".into(), zr),
        ("max_abs_zeta_rho_prime".into(), zrp),
        ("max_abs_zeta_rho_theta_prime".into(), zrt),
    ];
    entry("bounds", observed, pass, tol.bound, cps)
}

fn positivity(traj: &Trajectory, tol: &LemmaTolerances, cps: &[f64; 3]) -> LemmaEntry {
    let min_rho = traj
        .samples()
        .iter()
        .map(|s| s.polar.rho())
        .fold(f64::INFINITY, f64::min);
    let pass = traj.is_completed() && min_rho > tol.positivity_floor;
    entry(
        "positivity",
        vec![
            ("min_rho".into(), min_rho),
            ("zeta_reached".into(), traj.last().zeta()),
        ],
        pass,
        tol.positivity_floor,
        cps,
    )
}

fn divergence(traj: &Trajectory, tol: &LemmaTolerances, cps: &[f64; 3]) -> Result<LemmaEntry> {
    let vals = cps
        .iter()
        .map(|&c| mass_moment_integral(traj, c))
        .collect::<Result<Vec<_>>>()?;
    let r = ratios(&vals);
    let mut observed: Vec<(String, f64)> = cps
        .iter()
        .zip(&vals)
        .map(|(&c, &v)| (label("mass_moment", c), v))
        .collect();
    observed.extend(
        r.iter()
            .enumerate()
            .map(|(i, &x)| (format!("growth_ratio_{}", i + 1), x)),
    );
    let pass = r.iter().all(|&x| x >= tol.growth_factor);
    Ok(entry("divergence", observed, pass, tol.growth_factor, cps))
}

fn growth_limits(traj: &Trajectory, tol: &LemmaTolerances, cps: &[f64; 3]) -> Result<LemmaEntry> {
    let mut growth = Vec::new();
    for &c in cps {
        let (p, _) = traj.sample(c)?;
        growth.push(c * p.p1 * p.p1);
    }
    let r = ratios(&growth);
    let slope_over_rho: Vec<f64> = cps
        .iter()
        .map(|&c| envelope(traj, c, |s| s.polar.p2 / s.polar.rho()))
        .collect();
    let slope: Vec<f64> = cps
        .iter()
        .map(|&c| envelope(traj, c, |s| s.polar.p2))
        .collect();
    let mut observed = Vec::new();
    for (i, &c) in cps.iter().enumerate() {
        observed.push((label("zeta_zrho_sq", c), growth[i]));
        observed.push((label("abs_dzrho_over_rho", c), slope_over_rho[i]));
        observed.push((label("abs_dzrho", c), slope[i]));
    }
    observed.extend(
        r.iter()
            .enumerate()
            .map(|(i, &x)| (format!("growth_ratio_{}", i + 1), x)),
    );
    let pass = r.iter().all(|&x| x >= tol.growth_factor)
        && strictly_decreasing(&slope_over_rho)
        && strictly_decreasing(&slope)
        && slope_over_rho[2] < tol.decay
        && slope[2] < tol.decay;
    Ok(entry("growth_limits", observed, pass, tol.decay, cps))
}

fn energy_at(traj: &Trajectory, energy: &[f64], zeta: f64) -> f64 {
    energy[traj.index_at_or_below(zeta)]
}

fn energy_bounded(
    traj: &Trajectory,
    energy: &[f64],
    tol: &LemmaTolerances,
    cps: &[f64; 3],
) -> LemmaEntry {
    let violations = energy.windows(2).filter(|w| !(w[1] < w[0])).count();
    let e_final = *energy.last().expect("non-empty");
    let mut observed: Vec<(String, f64)> = cps
        .iter()
        .map(|&c| (label("E", c), energy_at(traj, energy, c)))
        .collect();
    observed.push(("monotonicity_violations".into(), violations as f64));
    let pass = e_final.is_finite()
        && e_final <= tol.energy_margin.abs()
        && violations as f64 <= tol.energy_margin;
    entry("energy_bounded", observed, pass, tol.energy_margin, cps)
}

fn energy_negative(energy: &[f64], tol: &LemmaTolerances, cps: &[f64; 3]) -> LemmaEntry {
    let sign_changes = energy
        .windows(2)
        .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
        .count();
    let e_final = *energy.last().expect("non-empty");
    let observed = vec![
        ("E_final".into(), e_final),
        ("sign_E_final".into(), e_final.signum()),
        ("sign_changes".into(), sign_changes as f64),
    ];
    let pass = e_final < -tol.energy_margin && sign_changes == 1;
    entry("energy_negative", observed, pass, tol.energy_margin, cps)
}

fn phase_limits(
    traj: &Trajectory,
    energy: &[f64],
    tol: &LemmaTolerances,
    cps: &[f64; 3],
) -> Result<LemmaEntry> {
    let theta_prime: Vec<f64> = cps
        .iter()
        .map(|&c| envelope(traj, c, |s| s.polar.theta_prime()))
        .collect();
    let last = traj.last();
    let e_final = *energy.last().expect("non-empty");
    let zr = last.polar.p1;
    let gap = if e_final < 0.0 {
        (zr - (-e_final).sqrt()).abs() / zr
    } else {
        f64::INFINITY
    };
    let mut observed: Vec<(String, f64)> = cps
        .iter()
        .zip(&theta_prime)
        .map(|(&c, &v)| (label("abs_theta_prime", c), v))
        .collect();
    observed.push(("plateau_gap".into(), gap));
    let pass =
        strictly_decreasing(&theta_prime) && theta_prime[2] < tol.decay && gap < tol.limit_ratio;
    Ok(entry("phase_limits", observed, pass, tol.limit_ratio, cps))
}

fn zero_energy(traj: &Trajectory, tol: &LemmaTolerances, cps: &[f64; 3]) -> Result<LemmaEntry> {
    let params = traj.params;
    let mut z = Vec::new();
    let mut defect = Vec::new();
    for &c in cps {
        let (_, car) = traj.sample(c)?;
        z.push(zero_energy_residual(&car, &params));
        let (h, tail) = hamiltonian_truncated_at(traj, &params, c)?;
        defect.push((h + tail).abs());
    }
    let mut observed = Vec::new();
    for (i, &c) in cps.iter().enumerate() {
        observed.push((label("Z", c), z[i]));
        observed.push((label("H_defect", c), defect[i]));
    }
    let pass = strictly_decreasing(&z) && strictly_decreasing(&defect) && z[2] < tol.zero_energy;
    Ok(entry("zero_energy", observed, pass, tol.zero_energy, cps))
}
