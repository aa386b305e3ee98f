//! Sampled solutions and the norms cached alongside each sample.

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, BesovParams};
use crate::error::{Error, Result};
use crate::field::{lp_norm_of_magnitude, Derivative, SpectralField};
use crate::littlewood_paley::CutoffPair;
use crate::systems::{SystemSpec, SystemState};

/// Which optional norms to cache per sample.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    pub besov: Vec<BesovParams>,
    pub h3: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovValue {
    pub params: BesovParams,
    pub value: f64,
}

/// Norms of the monitored field `w` (all state fields stacked).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleNorms {
    /// `‖w‖₂`
    pub l2: f64,
    /// `‖∇w‖₂`
    pub grad_l2: f64,
    /// `‖Δw‖₂`
    pub lap_l2: f64,
    /// `‖∇Δw‖₂`
    pub grad_lap_l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: Option<f64>,
    /// `‖∇w‖₃`
    pub grad_l3: f64,
    /// `‖∇w‖₄`
    pub grad_l4: f64,
    /// `‖∇w‖_∞`
    pub grad_linf: f64,
    /// `∫|w|²|∇w|²`
    pub w2_grad2: f64,
    /// `∫(|∇w||∇²w|² + |∇w|⁴)`
    pub second_energy_rhs: f64,
    pub besov: Vec<BesovValue>,
}

impl SampleNorms {
    pub fn compute(
        state: &SystemState,
        request: &NormRequest,
        cutoffs: Option<&CutoffPair>,
    ) -> Result<Self> {
        let w = state.monitored()?;
        Self::of_field(&w, request, cutoffs)
    }

    pub fn of_field(
        w: &SpectralField,
        request: &NormRequest,
        cutoffs: Option<&CutoffPair>,
    ) -> Result<Self> {
        let grid = w.grid();
        let cell = grid.cell_volume();
        let norm2 = grid.norm2();
        let grad = w.derivative(Derivative::Grad);
        let hess = grad.derivative(Derivative::Grad);
        let gmag = grad.magnitude();
        let hmag = hess.magnitude();
        let wmag = w.magnitude();
        let energy = |pow: i32| w.weighted_energy(|i| (norm2[i] as f64).powi(pow)).sqrt();
        let mut w2_grad2 = 0.0;
        let mut second = 0.0;
        for i in 0..grid.len() {
            let g2 = gmag[i] * gmag[i];
            w2_grad2 += wmag[i] * wmag[i] * g2;
            second += gmag[i] * hmag[i] * hmag[i] + g2 * g2;
        }
        let besov = if request.besov.is_empty() {
            Vec::new()
        } else {
            let cutoffs = cutoffs
                .ok_or_else(|| Error::MissingData("Besov norms requested without cutoffs".into()))?;
            request
                .besov
                .iter()
                .map(|&params| {
                    Ok(BesovValue {
                        params,
                        value: besov_norm(w, params, cutoffs)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Self {
            l2: w.l2_spectral(),
            grad_l2: grad.l2_spectral(),
            lap_l2: energy(2),
            grad_lap_l2: energy(3),
            h1: w.sobolev_norm(1)?,
            h2: w.sobolev_norm(2)?,
            h3: if request.h3 { Some(w.sobolev_norm(3)?) } else { None },
            grad_l3: lp_norm_of_magnitude(&gmag, 3.0, cell),
            grad_l4: lp_norm_of_magnitude(&gmag, 4.0, cell),
            grad_linf: lp_norm_of_magnitude(&gmag, f64::INFINITY, cell),
            w2_grad2: w2_grad2 * cell,
            second_energy_rhs: second * cell,
            besov,
        })
    }

    pub fn besov(&self, params: &BesovParams) -> Option<f64> {
        self.besov.iter().find(|b| &b.params == params).map(|b| b.value)
    }

    /// Largest stored value, used by the overflow guard.
    pub fn largest(&self) -> f64 {
        let mut m = [
            self.l2,
            self.grad_l2,
            self.lap_l2,
            self.grad_lap_l2,
            self.h1,
            self.h2,
            self.grad_linf,
        ]
        .iter()
        .chain(self.h3.iter())
        .chain(self.besov.iter().map(|b| &b.value))
        .cloned()
        .fold(0.0f64, |acc, x| if x.is_nan() { f64::NAN } else { acc.max(x) });
        if m.is_nan() {
            m = f64::INFINITY;
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct TrajectorySample {
    pub t: f64,
    pub step: u64,
    pub state: SystemState,
    pub norms: SampleNorms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuardKind {
    Cfl,
    Overflow,
}

/// Why a simulation stopped early.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardTrip {
    pub kind: GuardKind,
    pub t: f64,
    pub step: u64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub spec: SystemSpec,
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
    pub guard: Option<GuardTrip>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Series of one cached quantity.
    pub fn series<F: Fn(&SampleNorms) -> f64>(&self, f: F) -> Vec<f64> {
        self.samples.iter().map(|s| f(&s.norms)).collect()
    }

    pub fn first(&self) -> Result<&TrajectorySample> {
        self.samples
            .first()
            .ok_or(Error::InsufficientSamples { needed: 1, got: 0 })
    }

    pub fn last(&self) -> Result<&TrajectorySample> {
        self.samples
            .last()
            .ok_or(Error::InsufficientSamples { needed: 1, got: 0 })
    }

    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// The sample whose time is within `tol` of `t`.
    pub fn sample_at(&self, t: f64, tol: f64) -> Option<&TrajectorySample> {
        self.samples.iter().find(|s| (s.t - t).abs() <= tol)
    }

    /// `𝓜(t)` measured from the first sample.
    pub fn basic_energy_bound(&self, t: f64) -> Result<f64> {
        let first = self.first()?;
        Ok(self.spec.basic_energy_bound(&first.state, t - first.t))
    }

    /// Samples restricted to `t ≤ t_max`.
    pub fn truncated(&self, t_max: f64) -> Trajectory {
        Trajectory {
            spec: self.spec.clone(),
            dt: self.dt,
            samples: self
                .samples
                .iter()
                .filter(|s| s.t <= t_max + 1e-12)
                .cloned()
                .collect(),
            guard: self.guard.clone().filter(|g| g.t <= t_max + 1e-12),
        }
    }
}
