//! Dyadic frequency decomposition.
//!
//! The cutoffs are radial: `χ` equals one on `[0, 1]`, vanishes beyond `4/3`
//! and falls off with a `C^∞` step in between; `φ(r) = χ(r/2) − χ(r)`. Then
//! `χ(r) + Σ_{j=0}^{J} φ(2^{-j} r) = χ(2^{-J-1} r)` telescopes, so the
//! partition of unity holds up to rounding on every finite grid.
//!
//! Blocks act as Fourier multipliers; the convolution kernels are never built.

use crate::error::{Error, Result};
use crate::field::{multi_indices_exact, Derivative, SpectralField};
use crate::grid::Grid;

const CHI_FLAT: f64 = 1.0;
const CHI_SUPPORT: f64 = 4.0 / 3.0;

fn exp_ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step from 1 at `t = 0` to 0 at `t = 1`, flat to all orders at both ends.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = exp_ramp(1.0 - t);
    let b = exp_ramp(t);
    a / (a + b)
}

/// Low-frequency radial profile `χ`.
pub fn chi(r: f64) -> f64 {
    smooth_step((r - CHI_FLAT) / (CHI_SUPPORT - CHI_FLAT))
}

/// Annular radial profile `φ(r) = χ(r/2) − χ(r)`, supported in `[1, 8/3]`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// The cutoff pair sampled on every frequency magnitude of a grid.
///
/// Samples are indexed by the integer `|ξ|²`, so each distinct magnitude is
/// evaluated once and lookups are exact.
#[derive(Clone, Debug)]
pub struct CutoffPair {
    grid: Grid,
    j_max: i32,
    /// `scaled[k + 2][m] = χ(2^{-k} √m)` for `k ∈ [-2, j_max + 2]`.
    scaled: Vec<Vec<f64>>,
}

/// Tabulate `χ` and `φ` on a grid. Deterministic: the same grid yields identical samples.
pub fn build_cutoffs(grid: &Grid) -> CutoffPair {
    CutoffPair::new(grid)
}

impl CutoffPair {
    pub fn new(grid: &Grid) -> Self {
        let j_max = j_max_for(grid.n());
        let m_max = grid.max_norm2() as usize;
        let scaled = (-2..=j_max + 2)
            .map(|k| {
                let s = 2f64.powi(-k);
                (0..=m_max).map(|m| chi(s * (m as f64).sqrt())).collect()
            })
            .collect();
        Self {
            grid: grid.clone(),
            j_max,
            scaled,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest block index kept in a decomposition.
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// `χ(2^{-k} √m)`.
    pub fn chi_scaled(&self, k: i32, m: u32) -> f64 {
        let row = k + 2;
        if row >= 0 && (row as usize) < self.scaled.len() {
            self.scaled[row as usize][m as usize]
        } else {
            chi(2f64.powi(-k) * (m as f64).sqrt())
        }
    }

    /// `χ` sampled at `|ξ|` for `|ξ|² = m`.
    pub fn chi_at(&self, m: u32) -> f64 {
        self.chi_scaled(0, m)
    }

    /// `φ` sampled at `|ξ|` for `|ξ|² = m`.
    pub fn phi_at(&self, m: u32) -> f64 {
        self.chi_scaled(1, m) - self.chi_scaled(0, m)
    }

    /// Multiplier of `Δ_j` per flat wavevector index.
    pub fn block_multiplier(&self, j: i32) -> Vec<f64> {
        let norm2 = self.grid.norm2();
        match j {
            j if j <= -2 => vec![0.0; norm2.len()],
            -1 => norm2.iter().map(|&m| self.chi_scaled(0, m)).collect(),
            j => norm2
                .iter()
                .map(|&m| self.chi_scaled(j + 1, m) - self.chi_scaled(j, m))
                .collect(),
        }
    }

    /// Multiplier of the homogeneous block `φ(2^{-j}D)`, any `j ∈ ℤ`; zero at `ξ = 0`.
    pub fn homogeneous_block_multiplier(&self, j: i32) -> Vec<f64> {
        self.grid
            .norm2()
            .iter()
            .map(|&m| {
                if m == 0 {
                    0.0
                } else {
                    self.chi_scaled(j + 1, m) - self.chi_scaled(j, m)
                }
            })
            .collect()
    }

    /// Multiplier of `S_j = χ(2^{-j}D)`.
    pub fn low_pass_multiplier(&self, j: i32) -> Vec<f64> {
        self.grid
            .norm2()
            .iter()
            .map(|&m| self.chi_scaled(j, m))
            .collect()
    }

    /// Smallest homogeneous block index that touches a nonzero grid frequency.
    pub fn homogeneous_j_min(&self) -> i32 {
        // Nonzero frequencies satisfy |ξ| ≥ 1; φ(2^{-j}·) is supported in [2^j, 2^j·8/3].
        let mut j = 0;
        while 2f64.powi(j - 1) * 8.0 / 3.0 > 1.0 {
            j -= 1;
        }
        j
    }

    /// Largest partition-of-unity defect `|χ + Σ_j φ(2^{-j}·) − 1|` over the grid.
    pub fn partition_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..=self.grid.max_norm2() {
            let mut s = self.chi_at(m);
            for j in 0..=self.j_max + 2 {
                s += self.chi_scaled(j + 1, m) - self.chi_scaled(j, m);
            }
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    fn check_grid(&self, f: &SpectralField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::DimensionMismatch(format!(
                "cutoffs built for {:?}, field lives on {:?}",
                self.grid,
                f.grid()
            )));
        }
        Ok(())
    }
}

/// `ceil(log₂(n/2)) + 1`; every block above this index vanishes on the grid.
pub fn j_max_for(n: usize) -> i32 {
    ((n as f64 / 2.0).log2().ceil() as i32) + 1
}

/// Dyadic block `Δ_j f`; zero for `j ≤ −2` and above the grid's top block.
pub fn lp_block(f: &SpectralField, j: i32, cutoffs: &CutoffPair) -> Result<SpectralField> {
    cutoffs.check_grid(f)?;
    if j <= -2 || j > cutoffs.j_max {
        return Ok(SpectralField::zeros(f.grid(), f.components()));
    }
    Ok(f.apply_multiplier(&cutoffs.block_multiplier(j)))
}

/// Homogeneous dyadic block `φ(2^{-j}D) f` for any integer `j`.
pub fn homogeneous_block(f: &SpectralField, j: i32, cutoffs: &CutoffPair) -> Result<SpectralField> {
    cutoffs.check_grid(f)?;
    Ok(f.apply_multiplier(&cutoffs.homogeneous_block_multiplier(j)))
}

/// Low-pass `S_j f = χ(2^{-j}D) f`, `j ≥ 0`.
pub fn low_pass(f: &SpectralField, j: i32, cutoffs: &CutoffPair) -> Result<SpectralField> {
    cutoffs.check_grid(f)?;
    if j < 0 {
        return Err(Error::Parameter(format!("low-pass index must be >= 0, got {j}")));
    }
    Ok(f.apply_multiplier(&cutoffs.low_pass_multiplier(j)))
}

/// The blocks `Δ_{-1} f, …, Δ_{j_max} f` of one field.
#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    blocks: Vec<SpectralField>,
    j_max: i32,
}

impl DyadicDecomposition {
    pub fn new(f: &SpectralField, cutoffs: &CutoffPair) -> Result<Self> {
        cutoffs.check_grid(f)?;
        let blocks = (-1..=cutoffs.j_max)
            .map(|j| lp_block(f, j, cutoffs))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            blocks,
            j_max: cutoffs.j_max,
        })
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Block `Δ_j`, or `None` outside `[-1, j_max]`.
    pub fn block(&self, j: i32) -> Option<&SpectralField> {
        if j < -1 || j > self.j_max {
            return None;
        }
        self.blocks.get((j + 1) as usize)
    }

    /// Pairs `(j, Δ_j f)`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &SpectralField)> {
        self.blocks.iter().enumerate().map(|(i, b)| (i as i32 - 1, b))
    }

    /// `Σ_j Δ_j f`.
    pub fn reconstruct(&self) -> SpectralField {
        let mut acc = self.blocks[0].clone();
        for b in &self.blocks[1..] {
            acc = acc.combine(1.0, b, 1.0).expect("blocks share a layout");
        }
        acc
    }
}

/// Spectral band assumed by a Bernstein estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Band {
    /// `|ξ| ≤ radius`.
    Low { radius: f64 },
    /// `inner ≤ |ξ| ≤ outer`.
    Annulus { inner: f64, outer: f64 },
}

impl Band {
    fn contains(&self, norm2: u32) -> bool {
        let r = (norm2 as f64).sqrt();
        let eps = 1e-12;
        match *self {
            Band::Low { radius } => r <= radius + eps,
            Band::Annulus { inner, outer } => r >= inner - eps && r <= outer + eps,
        }
    }

    fn radius(&self) -> f64 {
        match *self {
            Band::Low { radius } => radius,
            Band::Annulus { outer, .. } => outer,
        }
    }
}

/// Outcome of a Bernstein ratio evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinReport {
    pub band: Band,
    pub order: u32,
    pub p: f64,
    pub q: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// `None` when the input is degenerate (zero field or zero denominator).
    pub ratio: Option<f64>,
    pub degenerate: bool,
}

/// Empirical constant of the Bernstein inequalities for a band-limited field.
///
/// For [`Band::Low`] this is `‖∂^α f‖_q / (R^{|α|+d(1/p−1/q)} ‖f‖_p)`; for
/// [`Band::Annulus`] it is `‖f‖_p / (R^{−|α|} sup_{|β|=|α|} ‖∂^β f‖_p)` with `R`
/// the outer radius.
pub fn bernstein_ratio(
    f: &SpectralField,
    band: Band,
    alpha: [u8; 3],
    p: f64,
    q: f64,
) -> Result<BernsteinReport> {
    if p.is_nan() || q.is_nan() || p < 1.0 || q < 1.0 {
        return Err(Error::Parameter(format!("exponents must be >= 1, got p={p}, q={q}")));
    }
    if p > q {
        return Err(Error::Parameter(format!("need p <= q, got p={p}, q={q}")));
    }
    let grid = f.grid();
    let len = grid.len();
    let norm2 = grid.norm2();
    let max_coeff = f.coeffs().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let outside = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, _)| !band.contains(norm2[i % len]))
        .map(|(_, c)| c.norm())
        .fold(0.0f64, f64::max);
    if outside > 1e-12 * max_coeff {
        return Err(Error::BandViolation(format!(
            "coefficient of size {outside:.3e} outside {band:?} (max {max_coeff:.3e})"
        )));
    }
    let order: u32 = alpha[..grid.dim()].iter().map(|&a| a as u32).sum();
    let radius = band.radius();
    let d = grid.dim() as f64;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let (numerator, denominator) = match band {
        Band::Low { .. } => {
            let num = f.derivative(Derivative::Partial(alpha)).lebesgue_norm(q)?;
            let den = radius.powf(order as f64 + d * (inv(p) - inv(q))) * f.lebesgue_norm(p)?;
            (num, den)
        }
        Band::Annulus { .. } => {
            let num = f.lebesgue_norm(p)?;
            let mut sup = 0.0f64;
            for beta in multi_indices_exact(grid.dim(), order) {
                sup = sup.max(f.derivative(Derivative::Partial(beta)).lebesgue_norm(p)?);
            }
            (num, radius.powi(-(order as i32)) * sup)
        }
    };
    let degenerate = max_coeff == 0.0 || denominator == 0.0;
    Ok(BernsteinReport {
        band,
        order,
        p,
        q,
        numerator,
        denominator,
        ratio: if degenerate { None } else { Some(numerator / denominator) },
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn mode(grid: &Grid, k: [f64; 3]) -> SpectralField {
        SpectralField::from_fn(grid, 1, |x, o| {
            o[0] = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos()
        })
        .unwrap()
    }

    fn norm_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.sub(b).unwrap().l2_spectral()
    }

    #[test]
    fn profile_values() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(chi(1.0) + phi(1.0), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        for i in 0..=400 {
            let r = i as f64 * 0.01;
            assert!((0.0..=1.0).contains(&chi(r)));
            assert!((0.0..=1.0).contains(&phi(r)));
            if r > 4.0 / 3.0 {
                assert_eq!(chi(r), 0.0);
            }
            if !(0.75..=8.0 / 3.0).contains(&r) {
                assert_eq!(phi(r), 0.0);
            }
        }
    }

    #[test]
    fn cutoffs_are_deterministic() {
        let g = make_grid(2, 32).unwrap();
        let a = build_cutoffs(&g);
        let b = build_cutoffs(&g);
        for j in -1..=a.j_max() {
            assert_eq!(a.block_multiplier(j), b.block_multiplier(j));
        }
        assert!(a.partition_defect() < 1e-12);
    }

    #[test]
    fn constant_lives_in_low_block() {
        let g = make_grid(2, 16).unwrap();
        let c = build_cutoffs(&g);
        let f = SpectralField::from_fn(&g, 1, |_, o| o[0] = 2.0).unwrap();
        assert!(norm_diff(&lp_block(&f, -1, &c).unwrap(), &f) < 1e-13);
        for j in 0..=c.j_max() {
            assert!(lp_block(&f, j, &c).unwrap().l2_spectral() < 1e-14);
        }
        assert!(lp_block(&f, -2, &c).unwrap().is_zero());
        assert!(lp_block(&f, c.j_max() + 1, &c).unwrap().is_zero());
    }

    #[test]
    fn radius_four_mode_splits_between_blocks_one_and_two() {
        let g = make_grid(2, 16).unwrap();
        let c = build_cutoffs(&g);
        let f = mode(&g, [4.0, 0.0, 0.0]);
        let b1 = lp_block(&f, 1, &c).unwrap();
        let b2 = lp_block(&f, 2, &c).unwrap();
        assert!(norm_diff(&b1.combine(1.0, &b2, 1.0).unwrap(), &f) < 1e-12);
        for j in [-1, 0, 3, 4] {
            assert!(lp_block(&f, j, &c).unwrap().l2_spectral() < 1e-14);
        }
    }

    #[test]
    fn low_pass_matches_partial_block_sums() {
        let g = make_grid(2, 16).unwrap();
        let c = build_cutoffs(&g);
        let f = SpectralField::from_fn(&g, 1, |x, o| {
            o[0] = (x[0] + 2.0 * x[1]).sin() + (5.0 * x[0]).cos() + 0.3 * (3.0 * x[1]).sin() + 1.0
        })
        .unwrap();
        let s0 = low_pass(&f, 0, &c).unwrap();
        assert!(norm_diff(&s0, &lp_block(&f, -1, &c).unwrap()) < 1e-14);
        let dec = DyadicDecomposition::new(&f, &c).unwrap();
        for j in 0..=c.j_max() + 2 {
            let mut acc = SpectralField::zeros(&g, 1);
            for k in -1..j {
                acc = acc.combine(1.0, &lp_block(&f, k, &c).unwrap(), 1.0).unwrap();
            }
            let s = low_pass(&f, j, &c).unwrap();
            assert!(norm_diff(&s, &acc) <= 1e-10 * f.l2_spectral());
        }
        assert!(norm_diff(&low_pass(&f, c.j_max() + 2, &c).unwrap(), &f) < 1e-12);
        assert!(norm_diff(&dec.reconstruct(), &f) < 1e-12);
        assert!(low_pass(&f, -1, &c).is_err());
    }

    #[test]
    fn bernstein_pure_mode_ratio_is_one() {
        let g = make_grid(2, 32).unwrap();
        let f = mode(&g, [3.0, 4.0, 0.0]);
        let report = bernstein_ratio(
            &f,
            Band::Annulus { inner: 5.0, outer: 5.0 },
            [1, 0, 0],
            2.0,
            2.0,
        )
        .unwrap();
        // ‖f‖₂ / (5⁻¹ · max(‖∂₁f‖₂, ‖∂₂f‖₂)) = 5 / 4
        assert!((report.ratio.unwrap() - 1.25).abs() < 1e-12);

        let f = mode(&g, [5.0, 0.0, 0.0]);
        let low = bernstein_ratio(&f, Band::Low { radius: 5.0 }, [1, 0, 0], 2.0, 2.0).unwrap();
        assert!((low.ratio.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bernstein_flags_degenerate_and_band_errors() {
        let g = make_grid(2, 16).unwrap();
        let zero = SpectralField::zeros(&g, 1);
        let r = bernstein_ratio(&zero, Band::Low { radius: 2.0 }, [1, 0, 0], 2.0, 2.0).unwrap();
        assert!(r.degenerate && r.ratio.is_none());
        let f = mode(&g, [6.0, 0.0, 0.0]);
        assert!(matches!(
            bernstein_ratio(&f, Band::Low { radius: 4.0 }, [0, 0, 0], 2.0, 2.0),
            Err(Error::BandViolation(_))
        ));
        assert!(bernstein_ratio(&f, Band::Low { radius: 8.0 }, [0, 0, 0], 4.0, 2.0).is_err());
    }
}
