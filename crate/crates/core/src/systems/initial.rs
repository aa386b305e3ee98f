use serde::{Deserialize, Serialize};

use crate::corpus::{band_limited_field, random_solenoidal, Spectrum};
use crate::error::{param, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

use super::{SystemKind, SystemSpec, SystemState};

/// Taylor–Green velocity `A(sin x cos y, −cos x sin y)` in 2D and
/// `A(sin x cos y cos z, −cos x sin y cos z, 0)` in 3D.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> Result<SpectralField> {
    let d = grid.dim();
    let u = SpectralField::from_fn(grid, d, |x, o| {
        let cz = if d == 3 { x[2].cos() } else { 1.0 };
        o[0] = amplitude * x[0].sin() * x[1].cos() * cz;
        o[1] = -amplitude * x[0].cos() * x[1].sin() * cz;
        if d == 3 {
            o[2] = 0.0;
        }
    })?;
    // Drop quadrature roundoff outside the four (or eight) active modes.
    let u = u.map_coeffs(|_, idx, c| {
        let xi = grid.wavevector(idx);
        if xi[..d].iter().all(|v| v.abs() == 1) {
            c
        } else {
            Default::default()
        }
    });
    u.leray_project()
}

/// Closed-form 2D Navier–Stokes solution: the Taylor–Green profile decaying as `e^{−2νt}`.
pub fn taylor_green_exact(grid: &Grid, amplitude: f64, nu: f64, t: f64) -> Result<SpectralField> {
    if grid.dim() != 2 {
        return param("the Taylor–Green profile is an exact solution in 2D only");
    }
    taylor_green(grid, amplitude * (-2.0 * nu * t).exp())
}

/// Named initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    /// Taylor–Green velocity; `b` and `theta` start at zero.
    TaylorGreen { amplitude: f64 },
    /// Seeded random solenoidal velocity with `‖u₀‖₂ = norm`; `b` (stream 1) and
    /// `theta` (stream 2) are drawn with the same spectrum and half the norm.
    Random { k_max: i32, norm: f64, decay: f64 },
}

impl InitialCondition {
    pub fn build(&self, spec: &SystemSpec, grid: &Grid, seed: u64) -> Result<SystemState> {
        spec.validate()?;
        let d = spec.d;
        let (u, b, theta) = match *self {
            InitialCondition::Zero => (
                SpectralField::zeros(grid, d),
                SpectralField::zeros(grid, d),
                SpectralField::zeros(grid, 1),
            ),
            InitialCondition::TaylorGreen { amplitude } => (
                taylor_green(grid, amplitude)?,
                SpectralField::zeros(grid, d),
                SpectralField::zeros(grid, 1),
            ),
            InitialCondition::Random { k_max, norm, decay } => {
                if 3 * k_max > grid.n() as i32 {
                    return param(format!(
                        "random data with k_max = {k_max} is not resolved after dealiasing on n = {}",
                        grid.n()
                    ));
                }
                let spectrum = Spectrum {
                    k_max,
                    decay,
                    with_mean: false,
                };
                let theta = band_limited_field(grid, 1, spectrum, seed, 2)?;
                let th_norm = theta.l2_spectral();
                let theta = if th_norm > 0.0 {
                    theta.scale(0.5 * norm / th_norm)
                } else {
                    theta
                };
                (
                    random_solenoidal(grid, spectrum, norm, seed, 0)?,
                    random_solenoidal(grid, spectrum, 0.5 * norm, seed, 1)?,
                    theta,
                )
            }
        };
        let (b, theta) = match spec.kind {
            SystemKind::Nse => (None, None),
            SystemKind::Mhd => (Some(b), None),
            SystemKind::Boussinesq => (None, Some(theta)),
        };
        SystemState::new(spec, 0.0, u, b, theta)
    }
}
