//! The `(p, s) = (∞, 1)` endpoint: a smallness window for `∫‖u‖_{B¹_{∞,∞}}`
//! and the energy quantities `f₁, f₂, F₁, F₂` on it.

use serde::{Deserialize, Serialize};

use crate::besov::BesovParams;
use crate::error::{Error, Result};
use crate::field::{lp_norm_of_magnitude, Derivative, SpectralField};
use crate::inequalities::{lemma25_eval, LogInequalityReport};
use crate::littlewood_paley::CutoffPair;
use crate::systems::SystemSpec;
use crate::timeseries::{cumulative_trapezoid, running_max, trapezoid};
use crate::trajectory::Trajectory;

use super::criterion::criterion_norms;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessWindow {
    pub epsilon: f64,
    pub delta: f64,
    /// Index of the first sample in the window.
    pub start: usize,
    pub tail_integral: f64,
    pub total_integral: f64,
    pub warning: Option<String>,
}

fn b1_params() -> BesovParams {
    BesovParams::new(1.0, f64::INFINITY, f64::INFINITY)
}

/// Largest sample-aligned `δ` with `∫_{T−δ}^{T}‖u‖_{B¹_{∞,∞}} ≤ ε`.
pub fn find_smallness_window(
    traj: &Trajectory,
    epsilon: f64,
    cutoffs: &CutoffPair,
) -> Result<SmallnessWindow> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let t = traj.times();
    let n = t.len();
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let norm = criterion_norms(traj, &b1_params(), cutoffs)?;
    let cumulative = cumulative_trapezoid(&t, &norm);
    let total = cumulative[n - 1];
    if n == 1 {
        return Ok(SmallnessWindow {
            epsilon,
            delta: 0.0,
            start: 0,
            tail_integral: 0.0,
            total_integral: 0.0,
            warning: Some("single sample: empty window".into()),
        });
    }
    let start = (0..n)
        .find(|&k| total - cumulative[k] <= epsilon)
        .expect("the last sample has zero tail");
    let (start, warning) = if start == n - 1 {
        (
            n - 2,
            Some(format!(
                "a single sampling interval already exceeds epsilon = {epsilon}; window shrunk to one interval"
            )),
        )
    } else {
        (start, None)
    };
    Ok(SmallnessWindow {
        epsilon,
        delta: t[n - 1] - t[start],
        start,
        tail_integral: total - cumulative[start],
        total_integral: total,
        warning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointState {
    pub epsilon: f64,
    pub delta: f64,
    pub t: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub big_f1: Vec<f64>,
    pub big_f2: Vec<f64>,
}

/// Largest `‖∇u‖₄⁴ / (‖∇u‖₂^a ‖Δu‖₂^b)` over a field corpus, with
/// `(a, b) = (2, 2)` in 2D and `(1, 3)` in 3D.
pub fn calibrate_ladyzhenskaya(corpus: &[SpectralField]) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in corpus {
        let d = f.grid().dim();
        let grad = f.derivative(Derivative::Grad);
        let g4 = lp_norm_of_magnitude(&grad.magnitude(), 4.0, f.grid().cell_volume()).powi(4);
        let g2 = grad.l2_spectral();
        let lap = f.derivative(Derivative::Laplacian).l2_spectral();
        let denom = match d {
            2 => g2 * g2 * lap * lap,
            3 => g2 * lap.powi(3),
            _ => return Err(Error::Parameter(format!("dimension {d} not supported"))),
        };
        if denom > 0.0 {
            worst = worst.max(g4 / denom);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointReport {
    pub state: EndpointState,
    pub window: SmallnessWindow,
    /// `∫_{T−δ}^{T}‖∇u‖₄⁴`.
    pub grad_l4_integral: f64,
    pub ladyzhenskaya_constant: f64,
    /// `(C/c₂)·sup f₁²` (2D) or `(C/c₂)·f₁(T)·sup(f₁f₂)^{1/2}` (3D).
    pub ladyzhenskaya_bound: f64,
    pub ladyzhenskaya_holds: bool,
    /// `max F₁/F₂^{1/6}` over the window.
    pub f1_bootstrap: f64,
    /// `max F₂/F₂^{e}` with `e = 1/2` (2D) or `11/12` (3D).
    pub f2_bootstrap: f64,
    pub bounded: bool,
    pub log_inequality: Option<LogInequalityReport>,
}

/// Run the endpoint machinery over the final window `[T−δ, T]`.
pub fn endpoint_tracker(
    traj: &Trajectory,
    spec: &SystemSpec,
    epsilon: f64,
    cutoffs: &CutoffPair,
    ladyzhenskaya: f64,
) -> Result<EndpointReport> {
    let d = spec.d;
    if !(2..=3).contains(&d) {
        return Err(Error::Parameter(format!("endpoint tracker needs d = 2 or 3, got {d}")));
    }
    if traj.samples.iter().any(|s| s.norms.h3.is_none()) {
        return Err(Error::MissingData("H3 norms are required on every sample".into()));
    }
    let window = find_smallness_window(traj, epsilon, cutoffs)?;
    let samples = &traj.samples[window.start..];
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let e = spec.energy;
    let grad2: Vec<f64> = samples.iter().map(|s| s.norms.grad_l2.powi(2)).collect();
    let lap2: Vec<f64> = samples.iter().map(|s| s.norms.lap_l2.powi(2)).collect();
    let glap2: Vec<f64> = samples.iter().map(|s| s.norms.grad_lap_l2.powi(2)).collect();
    let int_lap = cumulative_trapezoid(&t, &lap2);
    let int_glap = cumulative_trapezoid(&t, &glap2);
    let f1: Vec<f64> = grad2.iter().zip(&int_lap).map(|(g, i)| g + e.c2 * i).collect();
    let f2: Vec<f64> = lap2.iter().zip(&int_glap).map(|(l, i)| l + e.c3 * i).collect();
    let big_f1: Vec<f64> = running_max(&f1).iter().map(|x| x + 1.0).collect();
    let big_f2: Vec<f64> = running_max(&f2).iter().map(|x| x + 1.0).collect();

    let g4: Vec<f64> = samples.iter().map(|s| s.norms.grad_l4.powi(4)).collect();
    let grad_l4_integral = trapezoid(&t, &g4);
    let last = f1.len() - 1;
    let ladyzhenskaya_bound = if d == 2 {
        let sup = f1.iter().cloned().fold(0.0, f64::max);
        ladyzhenskaya / e.c2 * sup * sup
    } else {
        let sup = f1
            .iter()
            .zip(&f2)
            .map(|(a, b)| (a * b).sqrt())
            .fold(0.0, f64::max);
        ladyzhenskaya / e.c2 * f1[last] * sup
    };
    let exponent = if d == 2 { 0.5 } else { 11.0 / 12.0 };
    let f1_bootstrap = big_f1
        .iter()
        .zip(&big_f2)
        .map(|(a, b)| a / b.powf(1.0 / 6.0))
        .fold(0.0, f64::max);
    let f2_bootstrap = big_f2.iter().map(|b| b / b.powf(exponent)).fold(0.0, f64::max);
    let bounded = big_f1.iter().chain(&big_f2).all(|x| x.is_finite() && *x <= spec.overflow_guard);
    let log_inequality = if t.len() >= 2 && t[last] > t[0] {
        Some(lemma25_eval(samples, t[0], t[last], cutoffs)?)
    } else {
        None
    };
    Ok(EndpointReport {
        state: EndpointState {
            epsilon,
            delta: window.delta,
            t,
            f1,
            f2,
            big_f1,
            big_f2,
        },
        window,
        grad_l4_integral,
        ladyzhenskaya_constant: ladyzhenskaya,
        ladyzhenskaya_holds: grad_l4_integral <= ladyzhenskaya_bound * (1.0 + 1e-12),
        ladyzhenskaya_bound,
        f1_bootstrap,
        f2_bootstrap,
        bounded,
        log_inequality,
    })
}
