//! Uniform grid on the periodic box `[0, 2π)^d` and its integer wavevector set.
//!
//! Coefficients are stored in FFT order: along each axis, index `k` carries the
//! frequency `k` for `k < n/2` and `k - n` otherwise, so frequencies span
//! `[-n/2, n/2)`. The last axis is contiguous.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Result};

/// Direction of a spectral transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

struct GridInner {
    dim: usize,
    n: usize,
    len: usize,
    wavevectors: Vec<[i32; 3]>,
    norm2: Vec<u32>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic grid with `n` points per dimension in `d ∈ {2, 3}` dimensions.
///
/// Cloning is cheap; the wavevector tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.dim == other.inner.dim && self.inner.n == other.inner.n
    }
}

impl Eq for Grid {}

/// Build a grid; `d` must be 2 or 3 and `n` a power of two no smaller than 8.
pub fn make_grid(d: usize, n: usize) -> Result<Grid> {
    Grid::new(d, n)
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return param(format!("dimension must be 2 or 3, got {dim}"));
        }
        if n < 8 || !n.is_power_of_two() {
            return param(format!("points per dimension must be a power of two >= 8, got {n}"));
        }
        let len = n.pow(dim as u32);
        let mut wavevectors = Vec::with_capacity(len);
        let mut norm2 = Vec::with_capacity(len);
        for idx in 0..len {
            let mut xi = [0i32; 3];
            let mut rem = idx;
            for m in (0..dim).rev() {
                let k = rem % n;
                rem /= n;
                xi[m] = if k < n / 2 { k as i32 } else { k as i32 - n as i32 };
            }
            norm2.push(xi.iter().map(|&c| (c * c) as u32).sum());
            wavevectors.push(xi);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                len,
                wavevectors,
                norm2,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Number of grid points, equal to the number of wavevectors.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.inner.n as f64
    }

    /// Volume of the torus, `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.inner.dim as i32)
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.inner.len as f64
    }

    /// Integer wavevector at a flat FFT-order index. Unused trailing entries are zero.
    pub fn wavevector(&self, idx: usize) -> [i32; 3] {
        self.inner.wavevectors[idx]
    }

    pub fn wavevectors(&self) -> &[[i32; 3]] {
        &self.inner.wavevectors
    }

    /// Squared magnitude `|ξ|²` for every wavevector, in FFT order.
    pub fn norm2(&self) -> &[u32] {
        &self.inner.norm2
    }

    /// Largest `|ξ|²` present on the grid.
    pub fn max_norm2(&self) -> u32 {
        let half = (self.inner.n / 2) as u32;
        self.inner.dim as u32 * half * half
    }

    /// The frequency `-n/2`, whose odd derivatives are dropped.
    pub fn nyquist(&self) -> i32 {
        -(self.inner.n as i32) / 2
    }

    /// Wavevector used for odd-order symbols: Nyquist components are zeroed so
    /// that odd multipliers keep conjugate symmetry.
    pub fn odd_wavevector(&self, idx: usize) -> [f64; 3] {
        let xi = self.inner.wavevectors[idx];
        let nyq = self.nyquist();
        let mut out = [0.0; 3];
        for m in 0..self.inner.dim {
            out[m] = if xi[m] == nyq { 0.0 } else { xi[m] as f64 };
        }
        out
    }

    /// Flat index of a wavevector given by its (possibly out of range) integer components.
    pub fn index_of(&self, xi: &[i32]) -> usize {
        let n = self.inner.n as i64;
        let mut idx = 0usize;
        for &c in xi.iter().take(self.inner.dim) {
            let k = (c as i64).rem_euclid(n) as usize;
            idx = idx * self.inner.n + k;
        }
        idx
    }

    /// Flat index of the conjugate wavevector `-ξ` (modulo the grid).
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let xi = self.inner.wavevectors[idx];
        let neg: Vec<i32> = xi[..self.inner.dim].iter().map(|c| -c).collect();
        self.index_of(&neg)
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.inner.n;
        let h = self.spacing();
        let mut x = [0.0; 3];
        let mut rem = idx;
        for m in (0..self.inner.dim).rev() {
            x[m] = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }

    /// FFT-order indices listed lexicographically by shifted wavevector
    /// `ξ + n/2`. This is the fixed order used for serialized coefficients.
    pub fn canonical_order(&self) -> Vec<usize> {
        let n = self.inner.n;
        let half = (n / 2) as i32;
        let mut out = Vec::with_capacity(self.inner.len);
        let mut shifted = vec![0usize; self.inner.dim];
        for _ in 0..self.inner.len {
            let xi: Vec<i32> = shifted.iter().map(|&s| s as i32 - half).collect();
            out.push(self.index_of(&xi));
            for m in (0..self.inner.dim).rev() {
                shifted[m] += 1;
                if shifted[m] < n {
                    break;
                }
                shifted[m] = 0;
            }
        }
        out
    }

    /// Unnormalized multi-dimensional FFT of one component, in place.
    pub fn transform(&self, data: &mut [Complex64], direction: Direction) {
        debug_assert_eq!(data.len(), self.inner.len);
        let fft = match direction {
            Direction::Forward => &self.inner.forward,
            Direction::Inverse => &self.inner.inverse,
        };
        let n = self.inner.n;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // Last axis is contiguous.
        fft.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::default(); n];
        for axis in 0..self.inner.dim - 1 {
            let stride = n.pow((self.inner.dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..self.inner.len).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + k * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g = make_grid(2, 8).unwrap();
        assert_eq!(g.len(), 64);
        let mut comps: Vec<i32> = g.wavevectors().iter().map(|w| w[0]).collect();
        comps.sort();
        comps.dedup();
        assert_eq!(comps, (-4..=3).collect::<Vec<_>>());
        assert_eq!(make_grid(3, 16).unwrap().len(), 4096);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_grid(2, 7).is_err());
        assert!(make_grid(2, 4).is_err());
        assert!(make_grid(1, 8).is_err());
        assert!(make_grid(4, 8).is_err());
        assert!(make_grid(2, 24).is_err());
    }

    #[test]
    fn canonical_order_is_lexicographic_and_complete() {
        let g = make_grid(3, 8).unwrap();
        let order = g.canonical_order();
        assert_eq!(order.len(), g.len());
        let mut seen = vec![false; g.len()];
        for &i in &order {
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert_eq!(g.wavevector(order[0]), [-4, -4, -4]);
        assert_eq!(g.wavevector(order[1]), [-4, -4, -3]);
        assert_eq!(g.wavevector(*order.last().unwrap()), [3, 3, 3]);
    }

    #[test]
    fn conjugate_index_negates() {
        let g = make_grid(2, 8).unwrap();
        for idx in 0..g.len() {
            let xi = g.wavevector(idx);
            let c = g.wavevector(g.conjugate_index(idx));
            for m in 0..2 {
                assert_eq!((xi[m] + c[m]).rem_euclid(8), 0);
            }
        }
    }

    #[test]
    fn transform_round_trip() {
        let g = make_grid(3, 8).unwrap();
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        g.transform(&mut data, Direction::Forward);
        g.transform(&mut data, Direction::Inverse);
        let scale = 1.0 / g.len() as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a * scale - b).norm() < 1e-13);
        }
    }
}
