//! Inhomogeneous and homogeneous Besov norms `B^s_{p,q}` built from the dyadic blocks.
//!
//! On the torus the homogeneous norm drops the zero mode and replaces the
//! low-frequency block `χ(D)` by the annular blocks `φ(2^{-j}D)` down to the
//! first index whose annulus meets a nonzero frequency.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::field::{lp_norm_of_magnitude, SpectralField};
use crate::littlewood_paley::{homogeneous_block, lp_block, CutoffPair};

/// Parameters of a Besov norm. Infinite exponents are `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub p: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Self {
        Self {
            s,
            p,
            q,
            homogeneous: false,
        }
    }

    pub fn homogeneous(s: f64, p: f64, q: f64) -> Self {
        Self {
            s,
            p,
            q,
            homogeneous: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return param(format!("Besov index s must be finite, got {}", self.s));
        }
        if self.p.is_nan() || self.p < 1.0 || self.q.is_nan() || self.q < 1.0 {
            return param(format!(
                "Besov exponents must satisfy p, q >= 1, got p={}, q={}",
                self.p, self.q
            ));
        }
        Ok(())
    }

    /// Column label such as `besov_0.5_inf_inf`.
    pub fn label(&self) -> String {
        let fmt = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
        format!(
            "{}besov_{}_{}_{}",
            if self.homogeneous { "hom_" } else { "" },
            fmt(self.s),
            fmt(self.p),
            fmt(self.q)
        )
    }
}

/// The sequence `(j, 2^{js} ‖Δ_j f‖_p)` a Besov norm is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSequence {
    pub params: BesovParams,
    pub entries: Vec<(i32, f64)>,
}

impl BesovSequence {
    /// `ℓ^q` norm of the entries; `q = ∞` takes the maximum.
    pub fn norm(&self) -> f64 {
        let q = self.params.q;
        if q.is_infinite() {
            return self.entries.iter().map(|e| e.1).fold(0.0, f64::max);
        }
        let max = self.entries.iter().map(|e| e.1).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        max * self
            .entries
            .iter()
            .map(|e| (e.1 / max).powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }

    pub fn entry(&self, j: i32) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == j).map(|e| e.1)
    }
}

pub fn besov_sequence(
    f: &SpectralField,
    params: BesovParams,
    cutoffs: &CutoffPair,
) -> Result<BesovSequence> {
    params.validate()?;
    let cell = f.grid().cell_volume();
    let j_max = cutoffs.j_max();
    let mut entries = Vec::new();
    if params.homogeneous {
        let centered = f.without_mean();
        for j in cutoffs.homogeneous_j_min()..=j_max {
            let block = homogeneous_block(&centered, j, cutoffs)?;
            let norm = lp_norm_of_magnitude(&block.magnitude(), params.p, cell);
            entries.push((j, 2f64.powf(j as f64 * params.s) * norm));
        }
    } else {
        for j in -1..=j_max {
            let block = lp_block(f, j, cutoffs)?;
            let norm = lp_norm_of_magnitude(&block.magnitude(), params.p, cell);
            entries.push((j, 2f64.powf(j as f64 * params.s) * norm));
        }
    }
    Ok(BesovSequence { params, entries })
}

pub fn besov_norm(f: &SpectralField, params: BesovParams, cutoffs: &CutoffPair) -> Result<f64> {
    Ok(besov_sequence(f, params, cutoffs)?.norm())
}
