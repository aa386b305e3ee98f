//! Criterion integrals `∫‖u‖^q_{B^{∓s}_{p,∞}} dt` and the Gronwall bound they license.

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, BesovParams};
use crate::error::{Error, Result};
use crate::inequalities::{exponent_relation, Theorem};
use crate::littlewood_paley::CutoffPair;
use crate::systems::SystemSpec;
use crate::timeseries::{cumulative_trapezoid, running_max};
use crate::trajectory::Trajectory;

/// An exponent triple for one of the two criteria.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionSpec {
    pub theorem: Theorem,
    pub s: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub p: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub q: f64,
    /// Use the homogeneous norm (positive-index criterion with `s > 0` only).
    #[serde(default)]
    pub homogeneous: bool,
}

impl CriterionSpec {
    /// Build a triple, solving the scaling relation for `q`.
    pub fn new(theorem: Theorem, s: f64, p: f64, d: usize) -> Result<Self> {
        let q = exponent_relation(theorem, s, p, d)?;
        Ok(Self {
            theorem,
            s,
            p,
            q,
            homogeneous: false,
        })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let q = exponent_relation(self.theorem, self.s, self.p, d)?;
        let matches = if q.is_infinite() || self.q.is_infinite() {
            q == self.q
        } else {
            (q - self.q).abs() <= 1e-9 * q
        };
        if !matches {
            return Err(Error::Parameter(format!(
                "q = {} does not satisfy the scaling relation (expected {q})",
                self.q
            )));
        }
        if self.homogeneous && !(self.theorem == Theorem::Two && self.s > 0.0) {
            return Err(Error::Parameter(
                "the homogeneous norm is only admitted for the positive-index criterion with s > 0".into(),
            ));
        }
        Ok(())
    }

    /// Norm the criterion integrates: `B^{−s}_{p,∞}` or `B^{s}_{p,∞}`.
    pub fn besov_params(&self) -> BesovParams {
        BesovParams {
            s: self.theorem.besov_index(self.s),
            p: self.p,
            q: f64::INFINITY,
            homogeneous: self.homogeneous,
        }
    }

    pub fn label(&self) -> String {
        let fmt = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
        format!(
            "thm{}_s{}_p{}_q{}{}",
            u8::from(self.theorem),
            fmt(self.s),
            fmt(self.p),
            fmt(self.q),
            if self.homogeneous { "_hom" } else { "" }
        )
    }
}

/// Criterion norm per sample, with cached values reused when present.
pub fn criterion_norms(traj: &Trajectory, params: &BesovParams, cutoffs: &CutoffPair) -> Result<Vec<f64>> {
    traj.samples
        .iter()
        .map(|s| match s.norms.besov(params) {
            Some(v) => Ok(v),
            None => besov_norm(&s.state.monitored()?, *params, cutoffs),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionIntegral {
    pub criterion: CriterionSpec,
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
    /// `∫_{t₀}^{t} ‖u‖^q`, or the running sup of the norm when `q = ∞`.
    pub cumulative: Vec<f64>,
    pub value: f64,
}

/// Integrand `‖u‖^q` with `0^q = 0`.
fn powq(x: f64, q: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(q)
    }
}

pub fn criterion_integral(
    traj: &Trajectory,
    crit: &CriterionSpec,
    cutoffs: &CutoffPair,
) -> Result<CriterionIntegral> {
    crit.validate(traj.spec.d)?;
    let t = traj.times();
    if t.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let norm = criterion_norms(traj, &crit.besov_params(), cutoffs)?;
    let cumulative = if crit.q.is_infinite() {
        running_max(&norm)
    } else {
        let integrand: Vec<f64> = norm.iter().map(|&x| powq(x, crit.q)).collect();
        cumulative_trapezoid(&t, &integrand)
    };
    let value = *cumulative.last().expect("nonempty");
    Ok(CriterionIntegral {
        criterion: *crit,
        t,
        norm,
        cumulative,
        value,
    })
}

/// How the Gronwall constant is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GronwallCalibration {
    Fixed { constant: f64 },
    /// Smallest constant for which the bound holds at the first sample after
    /// the start; every later sample is then a genuine check.
    FirstSample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub criterion: CriterionSpec,
    pub constant: f64,
    pub calibration: GronwallCalibration,
    pub t: Vec<f64>,
    /// `I(t) = ∫_{t₀}^{t} (1 + ‖u‖^q) dτ`.
    pub integrand: Vec<f64>,
    pub bound: Vec<f64>,
    /// `sup_{τ≤t}‖∇u‖₂² + (c/2)∫‖Δu‖₂²`.
    pub observed: Vec<f64>,
    /// Sample indices where `observed > bound`.
    pub crossings: Vec<usize>,
    pub respected: bool,
}

/// Track the a priori bound
/// `sup‖∇u‖² + (c/2)∫‖Δu‖² ≤ e^{C·I(t)}(‖∇u₀‖² + 𝓜(t)²·I(t))` (negative index, `c = c₁`)
/// or `≤ e^{C·I(t)}‖∇u₀‖²` (positive index, `c = c₂`). The exponent `q`
/// of the criterion norm plays the role of `2/(1 ∓ s)` after the embedding
/// `B^{∓s}_{p,∞} ⊂ B^{∓s − d/p}_{∞,∞}`.
pub fn gronwall_tracker(
    traj: &Trajectory,
    crit: &CriterionSpec,
    spec: &SystemSpec,
    cutoffs: &CutoffPair,
    calibration: GronwallCalibration,
) -> Result<GronwallReport> {
    crit.validate(spec.d)?;
    if crit.q.is_infinite() {
        return Err(Error::Parameter("the Gronwall tracker needs a finite q".into()));
    }
    let t = traj.times();
    let first = traj.first()?;
    let norm = criterion_norms(traj, &crit.besov_params(), cutoffs)?;
    let ones: Vec<f64> = norm.iter().map(|&x| 1.0 + powq(x, crit.q)).collect();
    let integrand = cumulative_trapezoid(&t, &ones);
    let c = match crit.theorem {
        Theorem::One => spec.energy.c1,
        Theorem::Two => spec.energy.c2,
    };
    let grad2 = traj.series(|n| n.grad_l2 * n.grad_l2);
    let lap2 = traj.series(|n| n.lap_l2 * n.lap_l2);
    let diss = cumulative_trapezoid(&t, &lap2);
    let observed: Vec<f64> = running_max(&grad2)
        .iter()
        .zip(&diss)
        .map(|(g, l)| g + 0.5 * c * l)
        .collect();
    let g0 = grad2[0];
    let base = |i: usize| -> f64 {
        match crit.theorem {
            Theorem::Two => g0,
            Theorem::One => {
                let m = spec.basic_energy_bound(&first.state, t[i] - t[0]);
                g0 + m * m * integrand[i]
            }
        }
    };
    let constant = match calibration {
        GronwallCalibration::Fixed { constant } => constant,
        GronwallCalibration::FirstSample => {
            if t.len() < 2 {
                0.0
            } else {
                let b = base(1);
                let ratio = observed[1] / b;
                if b > 0.0 && ratio > 1.0 {
                    ratio.ln() / integrand[1]
                } else {
                    0.0
                }
            }
        }
    };
    let bound: Vec<f64> = (0..t.len())
        .map(|i| (constant * integrand[i]).exp() * base(i))
        .collect();
    let crossings: Vec<usize> = (0..t.len())
        .filter(|&i| observed[i] > bound[i] * (1.0 + 1e-12))
        .collect();
    Ok(GronwallReport {
        criterion: *crit,
        constant,
        calibration,
        t,
        integrand,
        bound,
        respected: crossings.is_empty(),
        observed,
        crossings,
    })
}

/// Smallest `C` for which
/// `‖∇u‖₃³ ≤ (c₂/2)‖Δu‖₂² + C(1 + ‖u‖^{2/(1+s)}_{B^s_{∞,∞}})‖∇u‖₂²`
/// holds at every sample.
pub fn cubic_term_constant(
    traj: &Trajectory,
    spec: &SystemSpec,
    s: f64,
    cutoffs: &CutoffPair,
) -> Result<f64> {
    if !(s > -1.0 && s < 1.0) {
        return Err(Error::Parameter(format!("index s = {s} outside (-1, 1)")));
    }
    let params = BesovParams::new(s, f64::INFINITY, f64::INFINITY);
    let besov = criterion_norms(traj, &params, cutoffs)?;
    let mut worst = 0.0f64;
    for (sample, b) in traj.samples.iter().zip(besov) {
        let n = &sample.norms;
        let excess = n.grad_l3.powi(3) - 0.5 * spec.energy.c2 * n.lap_l2 * n.lap_l2;
        let weight = (1.0 + powq(b, 2.0 / (1.0 + s))) * n.grad_l2 * n.grad_l2;
        if excess > 0.0 {
            worst = worst.max(if weight > 0.0 { excess / weight } else { f64::INFINITY });
        }
    }
    Ok(worst)
}
