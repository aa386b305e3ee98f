//! Real periodic fields with cached Fourier coefficients.
//!
//! Coefficients are normalized so that `f(x) = Σ_ξ c(ξ) e^{iξ·x}`; with this
//! convention `‖f‖₂² = (2π)^d Σ_ξ |c(ξ)|²`.

use rustfft::num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::grid::{Direction, Grid};

/// Differential operator applied spectrally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// `∂^α` for a multi-index `α` (trailing entries ignored in 2D).
    Partial([u8; 3]),
    /// All first partials; component `i·d + m` of the result is `∂_m f_i`.
    Grad,
    /// Componentwise Laplacian.
    Laplacian,
    /// Gradient of the Laplacian, laid out like [`Derivative::Grad`].
    GradLaplacian,
}

/// A real field with `components` components sampled on a [`Grid`].
///
/// Values and coefficients are laid out component-major; both are always
/// present and kept consistent by every constructor.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
    divergence_free: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, components: usize) -> Self {
        let len = grid.len() * components;
        Self {
            grid: grid.clone(),
            components,
            values: vec![0.0; len],
            coeffs: vec![Complex64::default(); len],
            divergence_free: false,
        }
    }

    /// Build from grid samples; coefficients are computed by a forward transform.
    pub fn from_values(grid: &Grid, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 || values.len() != grid.len() * components {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {components} components, got {}",
                grid.len() * components,
                values.len()
            )));
        }
        let len = grid.len();
        let scale = 1.0 / len as f64;
        let mut coeffs = Vec::with_capacity(values.len());
        let mut buf = vec![Complex64::default(); len];
        for chunk in values.chunks(len) {
            for (b, &v) in buf.iter_mut().zip(chunk) {
                *b = Complex64::new(v, 0.0);
            }
            grid.transform(&mut buf, Direction::Forward);
            coeffs.extend(buf.iter().map(|c| c * scale));
        }
        Ok(Self {
            grid: grid.clone(),
            components,
            values,
            coeffs,
            divergence_free: false,
        })
    }

    /// Build from Fourier coefficients; values are the real part of the inverse transform.
    pub fn from_coeffs(grid: &Grid, components: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if components == 0 || coeffs.len() != grid.len() * components {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients for {components} components, got {}",
                grid.len() * components,
                coeffs.len()
            )));
        }
        let len = grid.len();
        let mut values = Vec::with_capacity(coeffs.len());
        let mut buf = vec![Complex64::default(); len];
        for chunk in coeffs.chunks(len) {
            buf.copy_from_slice(chunk);
            grid.transform(&mut buf, Direction::Inverse);
            values.extend(buf.iter().map(|c| c.re));
        }
        Ok(Self {
            grid: grid.clone(),
            components,
            values,
            coeffs,
            divergence_free: false,
        })
    }

    /// Sample a function of position. The closure writes one value per component.
    pub fn from_fn<F>(grid: &Grid, components: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64; 3], &mut [f64]),
    {
        let len = grid.len();
        let mut values = vec![0.0; len * components];
        let mut out = vec![0.0; components];
        for idx in 0..len {
            f(&grid.point(idx), &mut out);
            for (c, v) in out.iter().enumerate() {
                values[c * len + idx] = *v;
            }
        }
        Self::from_values(grid, components, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn component_values(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_coeffs(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub(crate) fn with_divergence_free(mut self, flag: bool) -> Self {
        self.divergence_free = flag;
        self
    }

    /// Apply a Fourier multiplier `m(component, index, coeff)`.
    pub fn map_coeffs<F>(&self, f: F) -> SpectralField
    where
        F: Fn(usize, usize, Complex64) -> Complex64,
    {
        let len = self.grid.len();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i / len, i % len, c))
            .collect();
        SpectralField::from_coeffs(&self.grid, self.components, coeffs)
            .expect("layout is preserved")
    }

    /// Apply a real radial multiplier given per flat wavevector index.
    pub fn apply_multiplier(&self, multiplier: &[f64]) -> SpectralField {
        debug_assert_eq!(multiplier.len(), self.grid.len());
        self.map_coeffs(|_, idx, c| c * multiplier[idx])
    }

    pub fn scale(&self, lambda: f64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            components: self.components,
            values: self.values.iter().map(|v| v * lambda).collect(),
            coeffs: self.coeffs.iter().map(|c| c * lambda).collect(),
            divergence_free: self.divergence_free,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<SpectralField> {
        self.check_compatible(other)?;
        Ok(SpectralField {
            grid: self.grid.clone(),
            components: self.components,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
            divergence_free: self.divergence_free && other.divergence_free,
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(1.0, other, -1.0)
    }

    fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::DimensionMismatch(format!(
                "fields on {:?}x{} and {:?}x{}",
                self.grid, self.components, other.grid, other.components
            )));
        }
        Ok(())
    }

    /// Concatenate the components of several fields on the same grid.
    pub fn stack(fields: &[&SpectralField]) -> Result<SpectralField> {
        let first = fields
            .first()
            .ok_or_else(|| Error::Parameter("cannot stack zero fields".into()))?;
        let mut values = Vec::new();
        let mut coeffs = Vec::new();
        let mut components = 0;
        for f in fields {
            if f.grid != first.grid {
                return Err(Error::DimensionMismatch("stacked fields on different grids".into()));
            }
            values.extend_from_slice(&f.values);
            coeffs.extend_from_slice(&f.coeffs);
            components += f.components;
        }
        Ok(SpectralField {
            grid: first.grid.clone(),
            components,
            values,
            coeffs,
            divergence_free: false,
        })
    }

    /// Components `start..start + count` as a new field.
    pub fn slice_components(&self, start: usize, count: usize) -> Result<SpectralField> {
        if count == 0 || start + count > self.components {
            return param(format!(
                "component range {start}..{} out of 0..{}",
                start + count,
                self.components
            ));
        }
        let len = self.grid.len();
        Ok(SpectralField {
            grid: self.grid.clone(),
            components: count,
            values: self.values[start * len..(start + count) * len].to_vec(),
            coeffs: self.coeffs[start * len..(start + count) * len].to_vec(),
            divergence_free: false,
        })
    }

    /// Pointwise Euclidean magnitude over components, one value per grid point.
    pub fn magnitude(&self) -> Vec<f64> {
        let len = self.grid.len();
        let mut out = vec![0.0; len];
        for c in 0..self.components {
            for (o, v) in out.iter_mut().zip(self.component_values(c)) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }

    /// Spatial mean of each component (the zero-mode coefficient).
    pub fn mean(&self) -> Vec<f64> {
        (0..self.components)
            .map(|c| self.component_coeffs(c)[0].re)
            .collect()
    }

    /// Copy with the zero Fourier mode removed.
    pub fn without_mean(&self) -> SpectralField {
        let mut out = self.map_coeffs(|_, idx, c| if idx == 0 { Complex64::default() } else { c });
        out.divergence_free = self.divergence_free;
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `‖c‖_{ℓ²}` over all components.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|c(-ξ) - conj(c(ξ))|` over all components and wavevectors.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let len = self.grid.len();
        let mut worst = 0.0f64;
        for c in 0..self.components {
            let cc = self.component_coeffs(c);
            for idx in 0..len {
                let j = self.grid.conjugate_index(idx);
                worst = worst.max((cc[j] - cc[idx].conj()).norm());
            }
        }
        worst
    }

    /// Largest `|Σ_m ξ_m c_m(ξ)|` relative to the coefficient norm; requires `components = d`.
    pub fn divergence_defect(&self) -> Result<f64> {
        let d = self.grid.dim();
        if self.components != d {
            return Err(Error::DimensionMismatch(format!(
                "divergence needs {d} components, field has {}",
                self.components
            )));
        }
        let norm = self.coeff_norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let len = self.grid.len();
        let mut worst = 0.0f64;
        for idx in 0..len {
            let k = self.grid.odd_wavevector(idx);
            let mut s = Complex64::default();
            for (m, km) in k.iter().enumerate().take(d) {
                s += self.coeffs[m * len + idx] * *km;
            }
            worst = worst.max(s.norm());
        }
        Ok(worst / norm)
    }

    /// Spectral derivative `(iξ)^α`. Odd powers of the Nyquist frequency are
    /// dropped so the result stays real.
    pub fn derivative(&self, op: Derivative) -> SpectralField {
        let d = self.grid.dim();
        let len = self.grid.len();
        match op {
            Derivative::Partial(alpha) => {
                let grid = &self.grid;
                self.map_coeffs(|_, idx, c| c * partial_symbol(grid, idx, &alpha))
            }
            Derivative::Laplacian => {
                let norm2 = self.grid.norm2();
                self.map_coeffs(|_, idx, c| c * -(norm2[idx] as f64))
            }
            Derivative::Grad | Derivative::GradLaplacian => {
                let lap = matches!(op, Derivative::GradLaplacian);
                let norm2 = self.grid.norm2();
                let mut coeffs = Vec::with_capacity(len * self.components * d);
                for c in 0..self.components {
                    let cc = self.component_coeffs(c);
                    for m in 0..d {
                        coeffs.extend(cc.iter().enumerate().map(|(idx, &v)| {
                            let k = self.grid.odd_wavevector(idx)[m];
                            let w = if lap { -(norm2[idx] as f64) } else { 1.0 };
                            v * Complex64::new(0.0, k * w)
                        }));
                    }
                }
                SpectralField::from_coeffs(&self.grid, self.components * d, coeffs)
                    .expect("layout matches")
            }
        }
    }

    /// Scalar divergence of a `d`-component field.
    pub fn divergence(&self) -> Result<SpectralField> {
        let d = self.grid.dim();
        if self.components != d {
            return Err(Error::DimensionMismatch(format!(
                "divergence needs {d} components, field has {}",
                self.components
            )));
        }
        let len = self.grid.len();
        let mut coeffs = vec![Complex64::default(); len];
        for (idx, out) in coeffs.iter_mut().enumerate() {
            let k = self.grid.odd_wavevector(idx);
            for (m, km) in k.iter().enumerate().take(d) {
                *out += self.coeffs[m * len + idx] * Complex64::new(0.0, *km);
            }
        }
        SpectralField::from_coeffs(&self.grid, 1, coeffs)
    }

    /// Leray projection onto divergence-free fields: `(I - ξξᵀ/|ξ|²)` per mode,
    /// zero mode untouched.
    pub fn leray_project(&self) -> Result<SpectralField> {
        let d = self.grid.dim();
        if self.components != d {
            return Err(Error::DimensionMismatch(format!(
                "Leray projection needs a vector field with {d} components, got {}",
                self.components
            )));
        }
        let len = self.grid.len();
        let mut coeffs = self.coeffs.clone();
        for idx in 0..len {
            let k = self.grid.odd_wavevector(idx);
            let k2: f64 = k[..d].iter().map(|x| x * x).sum();
            if k2 == 0.0 {
                continue;
            }
            let mut dot = Complex64::default();
            for m in 0..d {
                dot += self.coeffs[m * len + idx] * k[m];
            }
            let dot = dot / k2;
            for m in 0..d {
                coeffs[m * len + idx] -= dot * k[m];
            }
        }
        Ok(SpectralField::from_coeffs(&self.grid, d, coeffs)?.with_divergence_free(true))
    }

    /// 2/3-rule truncation: zero every mode with some `|ξ_m| > n/3`.
    pub fn dealias(&self) -> SpectralField {
        let mask = dealias_mask(&self.grid);
        let mut out = self.map_coeffs(|_, idx, c| if mask[idx] { c } else { Complex64::default() });
        out.divergence_free = self.divergence_free;
        out
    }

    /// Whether every coefficient outside the 2/3 band vanishes.
    pub fn is_dealiased(&self) -> bool {
        let mask = dealias_mask(&self.grid);
        let len = self.grid.len();
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| mask[i % len] || c.norm_sqr() == 0.0)
    }

    /// `L^p` norm by the uniform rectangle rule; `p = ∞` is the grid maximum of `|f|`.
    pub fn lebesgue_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return param(format!("Lebesgue exponent must be >= 1, got {p}"));
        }
        Ok(lp_norm_of_magnitude(&self.magnitude(), p, self.grid.cell_volume()))
    }

    /// `L²` norm through Parseval.
    pub fn l2_spectral(&self) -> f64 {
        (self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `(2π)^d Σ w(ξ)|c(ξ)|²` over all components for a weight given per flat index.
    pub fn weighted_energy<F>(&self, weight: F) -> f64
    where
        F: Fn(usize) -> f64,
    {
        let len = self.grid.len();
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| weight(i % len) * c.norm_sqr())
            .sum();
        self.grid.volume() * sum
    }

    /// `H^k` norm `(Σ_{|α|≤k} ‖∂^α f‖₂²)^{1/2}` computed spectrally, `k ≤ 3`.
    pub fn sobolev_norm(&self, k: u32) -> Result<f64> {
        if k > 3 {
            return param(format!("Sobolev order must be at most 3, got {k}"));
        }
        let alphas = multi_indices(self.grid.dim(), k);
        let grid = &self.grid;
        Ok(self
            .weighted_energy(|idx| {
                alphas
                    .iter()
                    .map(|a| partial_symbol(grid, idx, a).norm_sqr())
                    .sum()
            })
            .sqrt())
    }

    /// Discrete `L²` inner product summed over components.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        Ok(self.grid.volume() * s)
    }
}

/// `L^p` norm of a nonnegative pointwise magnitude; rescaled by its maximum to avoid overflow.
pub fn lp_norm_of_magnitude(mag: &[f64], p: f64, cell_volume: f64) -> f64 {
    let max = mag.iter().cloned().fold(0.0f64, f64::max);
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    let sum: f64 = mag.iter().map(|m| (m / max).powf(p)).sum();
    max * (cell_volume * sum).powf(1.0 / p)
}

/// Symbol of `∂^α` at a flat index, with odd Nyquist powers zeroed.
pub(crate) fn partial_symbol(grid: &Grid, idx: usize, alpha: &[u8; 3]) -> Complex64 {
    let xi = grid.wavevector(idx);
    let nyq = grid.nyquist();
    let mut mag = 1.0;
    let mut order = 0u32;
    for m in 0..grid.dim() {
        let a = alpha[m] as i32;
        if a == 0 {
            continue;
        }
        if xi[m] == nyq && a % 2 == 1 {
            return Complex64::default();
        }
        mag *= (xi[m] as f64).powi(a);
        order += a as u32;
    }
    // i^order
    let phase = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    phase * mag
}

/// All multi-indices in `d` variables with total order at most `k`.
pub(crate) fn multi_indices(d: usize, k: u32) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    let k = k as u8;
    for a in 0..=k {
        for b in 0..=k - a {
            if d == 2 {
                out.push([a, b, 0]);
            } else {
                for c in 0..=k - a - b {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Multi-indices with total order exactly `k`.
pub(crate) fn multi_indices_exact(d: usize, k: u32) -> Vec<[u8; 3]> {
    multi_indices(d, k)
        .into_iter()
        .filter(|a| a.iter().map(|&x| x as u32).sum::<u32>() == k)
        .collect()
}

pub(crate) fn dealias_mask(grid: &Grid) -> Vec<bool> {
    let n = grid.n() as i32;
    let d = grid.dim();
    grid.wavevectors()
        .iter()
        .map(|xi| xi[..d].iter().all(|&c| 3 * c.abs() <= n))
        .collect()
}
