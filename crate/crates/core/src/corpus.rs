//! Seeded random band-limited fields.
//!
//! Coefficients are drawn per wavevector in a fixed order over the box
//! `|ξ|_∞ ≤ k_max`, so the same seed produces the same continuous field on
//! every grid that resolves the band.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{param, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

/// Spectral shape of a random field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum {
    /// Largest `|ξ_m|` carrying energy.
    pub k_max: i32,
    /// Amplitudes decay like `(1 + |ξ|²)^{-decay/2}`.
    pub decay: f64,
    /// Whether the zero mode is drawn as well.
    pub with_mean: bool,
}

impl Spectrum {
    pub fn new(k_max: i32) -> Self {
        Self {
            k_max,
            decay: 1.5,
            with_mean: false,
        }
    }
}

/// Wavevectors `ξ ≠ 0` in the box whose first nonzero component is positive,
/// in lexicographic order. Their negatives cover the rest of the box.
fn half_space(d: usize, k_max: i32) -> Vec<[i32; 3]> {
    let mut out = Vec::new();
    let range = -k_max..=k_max;
    for a in range.clone() {
        for b in range.clone() {
            let zs: Vec<i32> = if d == 3 { range.clone().collect() } else { vec![0] };
            for c in zs {
                let xi = [a, b, c];
                if let Some(first) = xi.iter().find(|&&v| v != 0) {
                    if *first > 0 {
                        out.push(xi);
                    }
                }
            }
        }
    }
    out
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A real random field with `components` components.
pub fn band_limited_field(
    grid: &Grid,
    components: usize,
    spectrum: Spectrum,
    seed: u64,
    stream: u64,
) -> Result<SpectralField> {
    let d = grid.dim();
    if spectrum.k_max < 1 || 2 * spectrum.k_max >= grid.n() as i32 {
        return param(format!(
            "k_max = {} must lie in [1, n/2) for n = {}",
            spectrum.k_max,
            grid.n()
        ));
    }
    let len = grid.len();
    let mut rng = rng_for(seed, stream);
    let mut coeffs = vec![Complex64::default(); len * components];
    let draw = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    if spectrum.with_mean {
        for c in 0..components {
            coeffs[c * len] = Complex64::new(draw(&mut rng), 0.0);
        }
    }
    for xi in half_space(d, spectrum.k_max) {
        let k2: f64 = xi.iter().map(|&v| (v * v) as f64).sum();
        let amp = (1.0 + k2).powf(-spectrum.decay / 2.0);
        let idx = grid.index_of(&xi[..d]);
        let conj = grid.conjugate_index(idx);
        for c in 0..components {
            let z = Complex64::new(draw(&mut rng), draw(&mut rng)) * (amp / std::f64::consts::SQRT_2);
            coeffs[c * len + idx] = z;
            coeffs[c * len + conj] = z.conj();
        }
    }
    SpectralField::from_coeffs(grid, components, coeffs)
}

/// A mean-free divergence-free vector field with `‖u‖₂ = norm` (unless the draw is zero).
pub fn random_solenoidal(
    grid: &Grid,
    spectrum: Spectrum,
    norm: f64,
    seed: u64,
    stream: u64,
) -> Result<SpectralField> {
    let spectrum = Spectrum {
        with_mean: false,
        ..spectrum
    };
    let raw = band_limited_field(grid, grid.dim(), spectrum, seed, stream)?;
    let projected = raw.leray_project()?;
    let current = projected.l2_spectral();
    if current == 0.0 {
        return Ok(projected);
    }
    Ok(projected.scale(norm / current))
}

/// `count` independent scalar fields; field `i` uses stream `i`.
pub fn scalar_corpus(grid: &Grid, spectrum: Spectrum, seed: u64, count: usize) -> Result<Vec<SpectralField>> {
    (0..count as u64)
        .map(|i| band_limited_field(grid, 1, spectrum, seed, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn fields_are_real_and_band_limited() {
        let g = make_grid(2, 16).unwrap();
        let f = band_limited_field(&g, 2, Spectrum::new(5), 7, 0).unwrap();
        assert!(f.conjugate_symmetry_defect() < 1e-15);
        let len = g.len();
        for (i, c) in f.coeffs().iter().enumerate() {
            let xi = g.wavevector(i % len);
            if xi.iter().any(|v| v.abs() > 5) {
                assert_eq!(c.norm(), 0.0);
            }
        }
        assert!(f.mean().iter().all(|m| *m == 0.0));
    }

    #[test]
    fn same_seed_same_field_on_finer_grid() {
        let g1 = make_grid(2, 16).unwrap();
        let g2 = make_grid(2, 32).unwrap();
        let a = band_limited_field(&g1, 1, Spectrum::new(6), 3, 4).unwrap();
        let b = band_limited_field(&g2, 1, Spectrum::new(6), 3, 4).unwrap();
        assert!((a.l2_spectral() - b.l2_spectral()).abs() < 1e-13 * a.l2_spectral());
        // Sample the coarse grid points on the fine grid.
        for idx in 0..g1.len() {
            let x = g1.point(idx);
            let j = (x[0] / g2.spacing()).round() as usize * 32 + (x[1] / g2.spacing()).round() as usize;
            assert!((a.values()[idx] - b.values()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn solenoidal_has_requested_norm() {
        let g = make_grid(3, 16).unwrap();
        let u = random_solenoidal(&g, Spectrum::new(4), 2.5, 11, 0).unwrap();
        assert!((u.l2_spectral() - 2.5).abs() < 1e-12);
        assert!(u.is_divergence_free());
        assert!(u.divergence_defect().unwrap() < 1e-12);
    }

    #[test]
    fn rejects_unresolved_band() {
        let g = make_grid(2, 8).unwrap();
        assert!(band_limited_field(&g, 1, Spectrum::new(4), 0, 0).is_err());
        assert!(band_limited_field(&g, 1, Spectrum::new(0), 0, 0).is_err());
    }
}
