//! Read-only monitors over a stored trajectory: energy residuals, criterion
//! integrals, Gronwall tracking and the endpoint machinery, collected into a
//! [`MonitorReport`].

mod criterion;
mod endpoint;
mod residuals;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::littlewood_paley::CutoffPair;
use crate::systems::{EnergyConstants, SystemSpec};
use crate::timeseries::trapezoid;
use crate::trajectory::{GuardTrip, Trajectory};

pub use criterion::{
    criterion_integral, criterion_norms, cubic_term_constant, gronwall_tracker, CriterionIntegral,
    CriterionSpec, GronwallCalibration, GronwallReport,
};
pub use endpoint::{
    calibrate_ladyzhenskaya, endpoint_tracker, find_smallness_window, EndpointReport, EndpointState,
    SmallnessWindow,
};
pub use residuals::{
    energy_increase, energy_residual_h3, energy_residual_h4, energy_residual_h4prime,
    energy_residual_h5, Hypothesis, ResidualSeries, ENERGY_TOLERANCE, RESIDUAL_TOLERANCE,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CriterionFinite,
    CriterionDiverging,
    GuardTripped,
}

/// Monitor settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub criteria: Vec<CriterionSpec>,
    pub residual_tolerance: f64,
    pub energy_tolerance: f64,
    pub gronwall: GronwallCalibration,
    /// Smallness threshold for the endpoint window; `None` skips the endpoint tracker.
    pub epsilon: Option<f64>,
    /// Interpolation constant used by the endpoint check.
    pub ladyzhenskaya: f64,
    /// Final integrand over median integrand beyond which growth counts as divergence.
    pub growth_threshold: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            criteria: Vec::new(),
            residual_tolerance: RESIDUAL_TOLERANCE,
            energy_tolerance: ENERGY_TOLERANCE,
            gronwall: GronwallCalibration::FirstSample,
            epsilon: None,
            ladyzhenskaya: 1.0,
            growth_threshold: 1e3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub integral: CriterionIntegral,
    pub gronwall: Option<GronwallReport>,
    pub tail_growth: f64,
    pub verdict: Verdict,
}

/// The a priori quantity `sup‖u‖_{H¹}² + ∫‖u‖_{H²}²` over the trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct APrioriBound {
    pub sup_h1_sq: f64,
    pub int_h2_sq: f64,
    pub value: f64,
}

impl APrioriBound {
    pub fn of(traj: &Trajectory) -> Self {
        let sup_h1_sq = traj.series(|n| n.h1 * n.h1).into_iter().fold(0.0, f64::max);
        let int_h2_sq = trapezoid(&traj.times(), &traj.series(|n| n.h2 * n.h2));
        Self {
            sup_h1_sq,
            int_h2_sq,
            value: sup_h1_sq + int_h2_sq,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub schema_version: u32,
    pub system: SystemSpec,
    pub constants: EnergyConstants,
    pub samples: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub residuals: Vec<ResidualSeries>,
    pub criteria: Vec<CriterionReport>,
    pub endpoint: Option<EndpointReport>,
    pub a_priori: APrioriBound,
    pub guard: Option<GuardTrip>,
    pub verdict: Verdict,
}

impl MonitorReport {
    /// Whether every residual and every tracked inequality held.
    pub fn all_passed(&self) -> bool {
        self.residuals.iter().all(|r| r.passed)
            && self
                .criteria
                .iter()
                .all(|c| c.gronwall.as_ref().is_none_or(|g| g.respected))
            && self.endpoint.as_ref().is_none_or(|e| e.ladyzhenskaya_holds && e.bounded)
    }
}

/// Final integrand relative to the median integrand.
fn tail_growth(integral: &CriterionIntegral) -> f64 {
    let q = integral.criterion.q;
    let vals: Vec<f64> = integral
        .norm
        .iter()
        .map(|&x| if q.is_infinite() { x } else if x == 0.0 { 0.0 } else { x.powf(q) })
        .collect();
    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[sorted.len() / 2];
    let last = *vals.last().expect("nonempty");
    if last == 0.0 {
        0.0
    } else if median == 0.0 {
        f64::INFINITY
    } else {
        last / median
    }
}

fn criterion_verdict(guard: bool, integral: &CriterionIntegral, growth: f64, threshold: f64, gronwall_ok: bool) -> Verdict {
    if guard {
        Verdict::GuardTripped
    } else if !integral.value.is_finite() || growth > threshold || !gronwall_ok {
        Verdict::CriterionDiverging
    } else {
        Verdict::CriterionFinite
    }
}

/// Run every monitor over `traj` with the constants of `spec`.
pub fn run_monitors(
    traj: &Trajectory,
    spec: &SystemSpec,
    config: &MonitorConfig,
    cutoffs: &CutoffPair,
) -> Result<MonitorReport> {
    let first = traj.first()?;
    let last = traj.last()?;
    let mut residuals = vec![energy_residual_h3(traj, spec, config.energy_tolerance)?];
    if traj.samples.len() >= 3 {
        residuals.push(energy_residual_h4(traj, spec, config.residual_tolerance)?);
        residuals.push(energy_residual_h4prime(traj, spec, config.residual_tolerance)?);
        residuals.push(energy_residual_h5(traj, spec, config.residual_tolerance)?);
    }
    let guard = traj.guard.is_some();
    let mut criteria = Vec::new();
    for crit in &config.criteria {
        let integral = criterion_integral(traj, crit, cutoffs)?;
        let gronwall = if crit.q.is_finite() {
            Some(gronwall_tracker(traj, crit, spec, cutoffs, config.gronwall)?)
        } else {
            None
        };
        let growth = tail_growth(&integral);
        let ok = gronwall.as_ref().is_none_or(|g| g.respected);
        let verdict = criterion_verdict(guard, &integral, growth, config.growth_threshold, ok);
        criteria.push(CriterionReport {
            integral,
            gronwall,
            tail_growth: growth,
            verdict,
        });
    }
    let endpoint = match config.epsilon {
        Some(eps) => Some(endpoint_tracker(traj, spec, eps, cutoffs, config.ladyzhenskaya)?),
        None => None,
    };
    let verdict = if guard {
        Verdict::GuardTripped
    } else if criteria.iter().any(|c| c.verdict == Verdict::CriterionDiverging) {
        Verdict::CriterionDiverging
    } else {
        Verdict::CriterionFinite
    };
    Ok(MonitorReport {
        schema_version: REPORT_SCHEMA_VERSION,
        system: spec.clone(),
        constants: spec.energy,
        samples: traj.samples.len(),
        t_start: first.t,
        t_end: last.t,
        residuals,
        criteria,
        endpoint,
        a_priori: APrioriBound::of(traj),
        guard: traj.guard.clone(),
        verdict,
    })
}

/// CSV text: an optional `# ` comment line, a header row, then one row per index.
pub fn csv_table(comment: Option<&str>, columns: &[(&str, &[f64])]) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    let rows = columns.iter().map(|c| c.1.len()).max().unwrap_or(0);
    for i in 0..rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| c.1.get(i).map_or(String::new(), |v| format!("{v:e}")))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
