//! Viscous incompressible systems on the torus and their energy hypotheses.
//!
//! A [`SystemSpec`] fixes the equations, the viscosities, the constants of the
//! three energy inequalities and the basic-energy bound `𝓜(t)`.

mod checkpoint;
mod initial;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use initial::{taylor_green, taylor_green_exact, InitialCondition};
pub use solver::{cfl_numbers, rhs, simulate, simulate_with, step, SimulateOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Nse,
    Mhd,
    Boussinesq,
}

impl SystemKind {
    pub fn code(self) -> u8 {
        match self {
            SystemKind::Nse => 0,
            SystemKind::Mhd => 1,
            SystemKind::Boussinesq => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(SystemKind::Nse),
            1 => Ok(SystemKind::Mhd),
            2 => Ok(SystemKind::Boussinesq),
            _ => param(format!("unknown system code {code}")),
        }
    }

    /// Number of named fields in a state.
    pub fn n_fields(self) -> usize {
        match self {
            SystemKind::Nse => 1,
            _ => 2,
        }
    }

    /// Total vector components of a state in dimension `d`.
    pub fn components(self, d: usize) -> usize {
        match self {
            SystemKind::Nse => d,
            SystemKind::Mhd => 2 * d,
            SystemKind::Boussinesq => d + 1,
        }
    }
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SystemKind::Nse => "nse",
            SystemKind::Mhd => "mhd",
            SystemKind::Boussinesq => "boussinesq",
        })
    }
}

/// Constants of the energy inequalities
/// `d/dt‖∇u‖² + c₁‖Δu‖² ≤ c₁'∫|u|²|∇u|²`,
/// `d/dt‖∇u‖² + c₂‖Δu‖² ≤ c₂'‖∇u‖₃³`,
/// `d/dt‖Δu‖² + c₃‖∇Δu‖² ≤ c₃'∫(|∇u||∇²u|² + |∇u|⁴)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstants {
    pub c1: f64,
    pub c1p: f64,
    pub c2: f64,
    pub c2p: f64,
    pub c3: f64,
    pub c3p: f64,
}

impl EnergyConstants {
    /// `c_i = ν` and `c_i' = 1/ν`.
    pub fn default_for(nu: f64) -> Self {
        Self {
            c1: nu,
            c1p: 1.0 / nu,
            c2: nu,
            c2p: 1.0 / nu,
            c3: nu,
            c3p: 1.0 / nu,
        }
    }
}

/// Form of `𝓜(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BasicEnergyBound {
    /// Energy bound of the equations themselves: `‖u₀‖₂` for NSE,
    /// `(‖u₀‖² + ‖b₀‖²)^{1/2}` for MHD, and
    /// `((‖u₀‖ + t‖θ₀‖)² + ‖θ₀‖²)^{1/2}` for Boussinesq.
    Standard,
    /// A fixed constant.
    Fixed { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub d: usize,
    pub nu: f64,
    /// Magnetic diffusivity (MHD) or thermal diffusivity (Boussinesq).
    pub diffusivity: Option<f64>,
    pub energy: EnergyConstants,
    pub energy_bound: BasicEnergyBound,
    /// Limit on the advective CFL number `dt·Σ_m max|u_m|/h`.
    pub cfl_limit: f64,
    /// Any sample norm above this (or non-finite) stops a simulation.
    pub overflow_guard: f64,
}

impl SystemSpec {
    fn base(kind: SystemKind, d: usize, nu: f64, diffusivity: Option<f64>) -> Self {
        let min = diffusivity.map_or(nu, |k| k.min(nu));
        Self {
            kind,
            d,
            nu,
            diffusivity,
            energy: EnergyConstants::default_for(min),
            energy_bound: BasicEnergyBound::Standard,
            cfl_limit: 1.0,
            overflow_guard: 1e12,
        }
    }

    pub fn nse(d: usize, nu: f64) -> Self {
        Self::base(SystemKind::Nse, d, nu, None)
    }

    pub fn mhd(d: usize, nu: f64, eta: f64) -> Self {
        Self::base(SystemKind::Mhd, d, nu, Some(eta))
    }

    /// Two-dimensional Boussinesq with buoyancy along the second axis.
    pub fn boussinesq(nu: f64, kappa: f64) -> Self {
        Self::base(SystemKind::Boussinesq, 2, nu, Some(kappa))
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.d) {
            return param(format!("dimension must be 2 or 3, got {}", self.d));
        }
        if self.kind == SystemKind::Boussinesq && self.d != 2 {
            return param("Boussinesq is implemented in two dimensions only");
        }
        let second = self.diffusivity;
        match (self.kind, second) {
            (SystemKind::Nse, _) => {}
            (_, None) => return param(format!("{} needs a second diffusivity", self.kind)),
            (_, Some(k)) if !(k > 0.0 && k.is_finite()) => {
                return param(format!("diffusivity must be positive, got {k}"))
            }
            _ => {}
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return param(format!("viscosity must be positive, got {}", self.nu));
        }
        let e = &self.energy;
        if [e.c1, e.c1p, e.c2, e.c2p, e.c3, e.c3p]
            .iter()
            .any(|c| !(*c > 0.0 && c.is_finite()))
        {
            return param("energy constants must be positive");
        }
        if !(self.cfl_limit > 0.0) || !(self.overflow_guard > 0.0) {
            return param("CFL limit and overflow guard must be positive");
        }
        if let BasicEnergyBound::Fixed { value } = self.energy_bound {
            if !(value >= 0.0 && value.is_finite()) {
                return param("fixed energy bound must be finite and nonnegative");
            }
        }
        Ok(())
    }

    pub fn second_diffusivity(&self) -> f64 {
        self.diffusivity.unwrap_or(self.nu)
    }

    pub fn max_diffusivity(&self) -> f64 {
        self.nu.max(self.second_diffusivity())
    }

    /// `𝓜(t)` for a trajectory started from `initial`.
    pub fn basic_energy_bound(&self, initial: &SystemState, t: f64) -> f64 {
        match self.energy_bound {
            BasicEnergyBound::Fixed { value } => value,
            BasicEnergyBound::Standard => {
                let u = initial.u.l2_spectral();
                match self.kind {
                    SystemKind::Nse => u,
                    SystemKind::Mhd => {
                        let b = initial.b.as_ref().map_or(0.0, |b| b.l2_spectral());
                        u.hypot(b)
                    }
                    SystemKind::Boussinesq => {
                        let th = initial.theta.as_ref().map_or(0.0, |t| t.l2_spectral());
                        (u + t.max(0.0) * th).hypot(th)
                    }
                }
            }
        }
    }
}

/// State at one time: velocity `u`, plus the magnetic field `b` (MHD) or the
/// temperature `theta` (Boussinesq).
#[derive(Clone, Debug)]
pub struct SystemState {
    pub t: f64,
    pub u: SpectralField,
    pub b: Option<SpectralField>,
    pub theta: Option<SpectralField>,
}

impl SystemState {
    /// Validate shapes against `spec` and flag the solenoidal fields.
    pub fn new(
        spec: &SystemSpec,
        t: f64,
        u: SpectralField,
        b: Option<SpectralField>,
        theta: Option<SpectralField>,
    ) -> Result<Self> {
        let d = spec.d;
        let grid = u.grid().clone();
        if grid.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "grid dimension {} differs from system dimension {d}",
                grid.dim()
            )));
        }
        let check = |f: &SpectralField, comps: usize, name: &str| -> Result<()> {
            if f.grid() != &grid || f.components() != comps {
                return Err(Error::DimensionMismatch(format!(
                    "{name} must have {comps} components on {grid:?}"
                )));
            }
            Ok(())
        };
        check(&u, d, "u")?;
        match spec.kind {
            SystemKind::Nse => {
                if b.is_some() || theta.is_some() {
                    return param("NSE state carries only u");
                }
            }
            SystemKind::Mhd => {
                let bb = b.as_ref().ok_or_else(|| Error::Parameter("MHD state needs b".into()))?;
                check(bb, d, "b")?;
                if theta.is_some() {
                    return param("MHD state carries no theta");
                }
            }
            SystemKind::Boussinesq => {
                let th = theta
                    .as_ref()
                    .ok_or_else(|| Error::Parameter("Boussinesq state needs theta".into()))?;
                check(th, 1, "theta")?;
                if b.is_some() {
                    return param("Boussinesq state carries no b");
                }
            }
        }
        let flag = |f: SpectralField| -> Result<SpectralField> {
            if f.divergence_defect()? > 1e-10 {
                return Err(Error::Parameter(
                    "velocity and magnetic fields must be divergence-free".into(),
                ));
            }
            Ok(f.with_divergence_free(true))
        };
        Ok(Self {
            t,
            u: flag(u)?,
            b: b.map(flag).transpose()?,
            theta,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// Named fields in storage order.
    pub fn fields(&self) -> Vec<(&'static str, &SpectralField)> {
        let mut out = vec![("u", &self.u)];
        if let Some(b) = &self.b {
            out.push(("b", b));
        }
        if let Some(th) = &self.theta {
            out.push(("theta", th));
        }
        out
    }

    /// All fields stacked into one vector field; this is what the monitors see.
    pub fn monitored(&self) -> Result<SpectralField> {
        let fields: Vec<&SpectralField> = self.fields().into_iter().map(|f| f.1).collect();
        if fields.len() == 1 {
            return Ok(self.u.clone());
        }
        SpectralField::stack(&fields)
    }

    /// Largest coefficient difference relative to this state's coefficient norm.
    pub fn relative_difference(&self, other: &SystemState) -> Result<f64> {
        let a = self.monitored()?;
        let b = other.monitored()?;
        let norm = a.l2_spectral();
        let diff = a.sub(&b)?.l2_spectral();
        Ok(if norm == 0.0 { diff } else { diff / norm })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn spec_validation() {
        assert!(SystemSpec::nse(2, 0.1).validate().is_ok());
        assert!(SystemSpec::nse(4, 0.1).validate().is_err());
        assert!(SystemSpec::nse(2, 0.0).validate().is_err());
        let mut b = SystemSpec::boussinesq(0.1, 0.2);
        assert!(b.validate().is_ok());
        b.d = 3;
        assert!(b.validate().is_err());
        let mut m = SystemSpec::mhd(3, 0.1, 0.05);
        assert_eq!(m.energy.c1, 0.05);
        m.diffusivity = None;
        assert!(m.validate().is_err());
    }

    #[test]
    fn state_shape_checks() {
        let g = make_grid(2, 8).unwrap();
        let spec = SystemSpec::nse(2, 0.1);
        let u = SpectralField::zeros(&g, 2);
        assert!(SystemState::new(&spec, 0.0, u.clone(), None, None).is_ok());
        assert!(SystemState::new(&spec, 0.0, SpectralField::zeros(&g, 1), None, None).is_err());
        let grad = SpectralField::from_fn(&g, 2, |x, o| {
            o[0] = x[0].cos();
            o[1] = 0.0;
        })
        .unwrap();
        assert!(SystemState::new(&spec, 0.0, grad, None, None).is_err());
        let bous = SystemSpec::boussinesq(0.1, 0.1);
        let st = SystemState::new(&bous, 0.0, u, None, Some(SpectralField::zeros(&g, 1))).unwrap();
        assert_eq!(st.monitored().unwrap().components(), 3);
    }

    #[test]
    fn energy_bounds() {
        let g = make_grid(2, 8).unwrap();
        let spec = SystemSpec::boussinesq(0.1, 0.1);
        let u = taylor_green(&g, 1.0).unwrap();
        let th = SpectralField::from_fn(&g, 1, |x, o| o[0] = x[0].sin()).unwrap();
        let st = SystemState::new(&spec, 0.0, u.clone(), None, Some(th.clone())).unwrap();
        let (nu, nt) = (u.l2_spectral(), th.l2_spectral());
        assert!((spec.basic_energy_bound(&st, 2.0) - ((nu + 2.0 * nt).powi(2) + nt * nt).sqrt()).abs() < 1e-12);
        let nse = SystemSpec::nse(2, 0.1);
        let st = SystemState::new(&nse, 0.0, u, None, None).unwrap();
        assert_eq!(nse.basic_energy_bound(&st, 5.0), nu);
    }
}
