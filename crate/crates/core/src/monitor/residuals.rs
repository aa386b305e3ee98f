//! Energy hypotheses as residual inequalities along a trajectory.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::systems::SystemSpec;
use crate::timeseries::{derivative, running_max};
use crate::trajectory::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `sup_{s≤t}‖u(s)‖₂ ≤ 𝓜(t)`.
    BasicEnergy,
    /// `d/dt‖∇u‖² + c₁‖Δu‖² ≤ c₁'∫|u|²|∇u|²`.
    FirstEnergy,
    /// `d/dt‖∇u‖² + c₂‖Δu‖² ≤ c₂'‖∇u‖₃³`.
    FirstEnergyCubic,
    /// `d/dt‖Δu‖² + c₃‖∇Δu‖² ≤ c₃'∫(|∇u||∇²u|² + |∇u|⁴)`.
    SecondEnergy,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::BasicEnergy => "basic_energy",
            Hypothesis::FirstEnergy => "first_energy",
            Hypothesis::FirstEnergyCubic => "first_energy_cubic",
            Hypothesis::SecondEnergy => "second_energy",
        }
    }
}

/// `residual[i] ≤ 0` means the inequality holds at `t[i]`. `scale` is the
/// magnitude the residual is judged against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub hypothesis: Hypothesis,
    pub t: Vec<f64>,
    pub residual: Vec<f64>,
    pub scale: Vec<f64>,
    pub max: f64,
    pub tolerance: f64,
    /// `max ≤ tolerance · max(max scale, 1)`.
    pub passed: bool,
}

impl ResidualSeries {
    fn new(hypothesis: Hypothesis, t: Vec<f64>, residual: Vec<f64>, scale: Vec<f64>, tolerance: f64) -> Self {
        let max = residual.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let reference = scale.iter().cloned().fold(1.0f64, f64::max);
        let passed = residual.iter().all(|r| r.is_finite()) && max <= tolerance * reference;
        Self {
            hypothesis,
            t,
            residual,
            scale,
            max,
            tolerance,
            passed,
        }
    }
}

/// Default relative tolerance for the differential residuals.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Default relative tolerance for the basic energy bound.
pub const ENERGY_TOLERANCE: f64 = 1e-8;

/// `R(t) = sup_{s≤t}‖u(s)‖₂ − 𝓜(t)`, judged relative to `𝓜`.
pub fn energy_residual_h3(traj: &Trajectory, spec: &SystemSpec, tolerance: f64) -> Result<ResidualSeries> {
    let first = traj.first()?;
    let t = traj.times();
    let sup = running_max(&traj.series(|n| n.l2));
    let bound: Vec<f64> = t
        .iter()
        .map(|&ti| spec.basic_energy_bound(&first.state, ti - first.t))
        .collect();
    let residual = sup.iter().zip(&bound).map(|(s, m)| s - m).collect();
    Ok(ResidualSeries::new(Hypothesis::BasicEnergy, t, residual, bound, tolerance))
}

/// Largest relative increase of `‖u‖₂` between consecutive samples.
pub fn energy_increase(traj: &Trajectory) -> f64 {
    let l2 = traj.series(|n| n.l2);
    let reference = l2.first().cloned().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    l2.windows(2)
        .map(|w| (w[1] - w[0]) / reference)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn differential_residual(
    traj: &Trajectory,
    hypothesis: Hypothesis,
    quantity: impl Fn(&crate::trajectory::SampleNorms) -> f64,
    dissipation: impl Fn(&crate::trajectory::SampleNorms) -> f64,
    forcing: impl Fn(&crate::trajectory::SampleNorms) -> f64,
    tolerance: f64,
) -> Result<ResidualSeries> {
    let t = traj.times();
    let rate = derivative(&t, &traj.series(quantity))?;
    let diss = traj.series(dissipation);
    let force = traj.series(forcing);
    let residual = rate
        .iter()
        .zip(&diss)
        .zip(&force)
        .map(|((r, d), f)| r + d - f)
        .collect();
    Ok(ResidualSeries::new(hypothesis, t, residual, force, tolerance))
}

pub fn energy_residual_h4(traj: &Trajectory, spec: &SystemSpec, tolerance: f64) -> Result<ResidualSeries> {
    let e = spec.energy;
    differential_residual(
        traj,
        Hypothesis::FirstEnergy,
        |n| n.grad_l2 * n.grad_l2,
        |n| e.c1 * n.lap_l2 * n.lap_l2,
        |n| e.c1p * n.w2_grad2,
        tolerance,
    )
}

pub fn energy_residual_h4prime(
    traj: &Trajectory,
    spec: &SystemSpec,
    tolerance: f64,
) -> Result<ResidualSeries> {
    let e = spec.energy;
    differential_residual(
        traj,
        Hypothesis::FirstEnergyCubic,
        |n| n.grad_l2 * n.grad_l2,
        |n| e.c2 * n.lap_l2 * n.lap_l2,
        |n| e.c2p * n.grad_l3.powi(3),
        tolerance,
    )
}

pub fn energy_residual_h5(traj: &Trajectory, spec: &SystemSpec, tolerance: f64) -> Result<ResidualSeries> {
    let e = spec.energy;
    differential_residual(
        traj,
        Hypothesis::SecondEnergy,
        |n| n.lap_l2 * n.lap_l2,
        |n| e.c3 * n.grad_lap_l2 * n.grad_lap_l2,
        |n| e.c3p * n.second_energy_rhs,
        tolerance,
    )
}
