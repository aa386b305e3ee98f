//! Interpolation inequalities between Besov, Lebesgue and Sobolev norms, the
//! time-integrated logarithmic inequality, and the exponent bookkeeping of the
//! two regularity criteria.
//!
//! Each evaluator reports both sides of its inequality together with the
//! explicit geometric constant and the splitting index `k₀`. The universal
//! dimensional factor is never assumed; it is what the reported `ratio`
//! estimates.

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, BesovParams};
use crate::error::{Error, Result};
use crate::field::{lp_norm_of_magnitude, Derivative, SpectralField};
use crate::littlewood_paley::{CutoffPair, DyadicDecomposition};
use crate::timeseries::trapezoid;
use crate::trajectory::TrajectorySample;

/// One factor `value^exponent` of an inequality's right-hand side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhsFactor {
    pub name: String,
    pub value: f64,
    pub exponent: f64,
}

/// Numerical evaluation of the dyadic proof chain.
///
/// The chain is `lhs ≤ triangle_sum ≤ holder_sum ≤ split_bound ≤ geometric_bound`,
/// where `holder_sum` bounds each block by `‖g‖₂^{2/p}‖g‖_∞^{1−2/p}` and
/// `block_constant` is the smallest constant making the per-block Bernstein
/// estimates hold for this field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockChain {
    /// `(k, ‖Δ_k g‖_p)`.
    pub block_norms: Vec<(i32, f64)>,
    /// Sum of block norms for `k ≤ k₀`.
    pub low_sum: f64,
    /// Sum of block norms for `k > k₀`.
    pub high_sum: f64,
    pub triangle_sum: f64,
    pub holder_sum: f64,
    pub block_constant: f64,
    pub split_bound: f64,
    pub geometric_bound: f64,
}

impl BlockChain {
    /// Largest violation of the chain relative to `lhs`; nonpositive when it holds.
    pub fn defect(&self, lhs: f64) -> f64 {
        let links = [
            lhs,
            self.low_sum + self.high_sum,
            self.holder_sum,
            self.split_bound,
            self.geometric_bound,
        ];
        let scale = lhs.max(f64::MIN_POSITIVE);
        links
            .windows(2)
            .map(|w| (w[0] - w[1]) / scale)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub lhs: f64,
    pub rhs_factors: Vec<RhsFactor>,
    /// The explicit `max{…}` factor; the dimensional constant is not included.
    pub constant: f64,
    pub k0: i32,
    /// `lhs / Π value^exponent`.
    pub ratio: f64,
    pub chain: BlockChain,
}

impl InterpolationReport {
    pub fn rhs_product(&self) -> f64 {
        self.rhs_factors
            .iter()
            .map(|f| f.value.powf(f.exponent))
            .product()
    }

    pub fn exponent_sum(&self) -> f64 {
        self.rhs_factors.iter().map(|f| f.exponent).sum()
    }
}

/// Unique `k ≥ 0` with `2^k ≤ x < 2^{k+1}` for `x ≥ 1`.
pub fn splitting_index(x: f64) -> i32 {
    debug_assert!(x >= 1.0);
    let mut k = x.log2().floor().max(0.0) as i32;
    // Correct for rounding in log2 near powers of two.
    while k > 0 && 2f64.powi(k) > x {
        k -= 1;
    }
    while 2f64.powi(k + 1) <= x {
        k += 1;
    }
    k
}

fn gap_constant(a: f64, b: f64) -> f64 {
    (1.0 / (2f64.powf(a) - 1.0)).max(1.0 / (1.0 - 2f64.powf(-b)))
}

fn laplacian_l2(f: &SpectralField) -> f64 {
    let norm2 = f.grid().norm2();
    f.weighted_energy(|i| {
        let m = norm2[i] as f64;
        m * m
    })
    .sqrt()
}

struct ChainInput<'a> {
    blocks: &'a [(i32, SpectralField)],
    exponent: f64,
    k0: i32,
    a: f64,
    b: f64,
    shape_low_minus1: f64,
    low_norm: f64,
    low_norm_minus1: f64,
    high_norm: f64,
    besov_factor: f64,
    h_low: f64,
}

/// Shared dyadic chain for both interpolation lemmas. `blocks` are the pieces
/// whose `L^p` norms are summed.
fn block_chain(input: ChainInput<'_>) -> BlockChain {
    let ChainInput {
        blocks,
        exponent: p,
        k0,
        a,
        b,
        shape_low_minus1,
        low_norm,
        low_norm_minus1,
        high_norm,
        besov_factor,
        h_low,
    } = input;
    let theta = 2.0 / p;
    let mut block_norms = Vec::with_capacity(blocks.len());
    let (mut low_sum, mut high_sum, mut holder_sum) = (0.0, 0.0, 0.0);
    let mut block_constant = 0.0f64;
    let shape = |k: i32| -> f64 {
        if k == -1 {
            shape_low_minus1 * low_norm_minus1.powf(theta) * besov_factor
        } else if k <= k0 {
            2f64.powf(k as f64 * a) * low_norm.powf(theta) * besov_factor
        } else {
            2f64.powf(-(k as f64) * b) * high_norm.powf(theta) * besov_factor
        }
    };
    for (k, g) in blocks {
        let k = *k;
        let cell = g.grid().cell_volume();
        let mag = g.magnitude();
        let norm_p = lp_norm_of_magnitude(&mag, p, cell);
        let norm_2 = lp_norm_of_magnitude(&mag, 2.0, cell);
        let norm_inf = lp_norm_of_magnitude(&mag, f64::INFINITY, cell);
        let holder = norm_2.powf(theta) * norm_inf.powf(1.0 - theta);
        block_norms.push((k, norm_p));
        if k <= k0 {
            low_sum += norm_p;
        } else {
            high_sum += norm_p;
        }
        holder_sum += holder;
        if holder > 0.0 {
            let s = shape(k);
            block_constant = block_constant.max(if s > 0.0 { holder / s } else { f64::INFINITY });
        }
    }
    // Same shapes with the H¹-type quantity in place of the block-specific norms.
    let mut split = 0.0;
    for (k, _) in blocks {
        let k = *k;
        split += if k == -1 {
            shape_low_minus1 * h_low.powf(theta) * besov_factor
        } else if k <= k0 {
            2f64.powf(k as f64 * a) * h_low.powf(theta) * besov_factor
        } else {
            shape(k)
        };
    }
    let split_bound = block_constant * split;
    let geometric_bound = block_constant
        * besov_factor
        * (h_low.powf(theta) * 2f64.powf(k0 as f64 * a) / (1.0 - 2f64.powf(-a))
            + high_norm.powf(theta) * 2f64.powf(-((k0 + 1) as f64) * b) / (1.0 - 2f64.powf(-b)));
    BlockChain {
        block_norms,
        low_sum,
        high_sum,
        triangle_sum: low_sum + high_sum,
        holder_sum,
        block_constant,
        split_bound,
        geometric_bound,
    }
}

fn window_error(name: &'static str, value: f64, lower: f64, upper: f64) -> Error {
    Error::InadmissibleExponent {
        name,
        value,
        lower,
        upper,
    }
}

/// `‖f‖_p ≤ C ‖f‖_{B^{−s}_{∞,∞}}^{1−2/p} ‖f‖_{H¹}^{4/p−s(1−2/p)} ‖f‖_{H²}^{s(1−2/p)−2/p}`
/// for `p ∈ (2 + 2/s, 2 + 4/s)`.
pub fn lemma22_eval(
    f: &SpectralField,
    s: f64,
    p: f64,
    cutoffs: &CutoffPair,
) -> Result<InterpolationReport> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(window_error("s", s, 0.0, f64::INFINITY));
    }
    let (lo, hi) = (2.0 + 2.0 / s, 2.0 + 4.0 / s);
    if !(p > lo && p < hi) {
        return Err(window_error("p", p, lo, hi));
    }
    let a = s * (1.0 - 2.0 / p) - 2.0 / p;
    let b = 4.0 / p - s * (1.0 - 2.0 / p);
    assert!(a > 0.0 && b > 0.0, "dyadic exponents must be positive: a={a}, b={b}");
    if f.is_zero() {
        return Err(Error::Degenerate("f = 0".into()));
    }

    let besov = besov_norm(f, BesovParams::new(-s, f64::INFINITY, f64::INFINITY), cutoffs)?;
    let h1 = f.sobolev_norm(1)?;
    let h2 = f.sobolev_norm(2)?;
    let lap = laplacian_l2(f);
    let l2 = f.l2_spectral();
    let grad_l2 = f.derivative(Derivative::Grad).l2_spectral();
    let lhs = f.lebesgue_norm(p)?;
    let k0 = splitting_index((lap + h1) / h1);

    let rhs_factors = vec![
        RhsFactor {
            name: "besov_-s_inf_inf".into(),
            value: besov,
            exponent: 1.0 - 2.0 / p,
        },
        RhsFactor {
            name: "H1".into(),
            value: h1,
            exponent: b,
        },
        RhsFactor {
            name: "H2".into(),
            value: h2,
            exponent: a,
        },
    ];
    let decomposition = DyadicDecomposition::new(f, cutoffs)?;
    let blocks: Vec<(i32, SpectralField)> =
        decomposition.iter().map(|(k, g)| (k, g.clone())).collect();
    let chain = block_chain(ChainInput {
        blocks: &blocks,
        exponent: p,
        k0,
        a,
        b,
        shape_low_minus1: 2f64.powf(-s * (1.0 - 2.0 / p)),
        low_norm: grad_l2,
        low_norm_minus1: l2,
        high_norm: lap,
        besov_factor: besov.powf(1.0 - 2.0 / p),
        h_low: h1,
    });
    let mut report = InterpolationReport {
        lhs,
        rhs_factors,
        constant: gap_constant(a, b),
        k0,
        ratio: 0.0,
        chain,
    };
    report.ratio = ratio(lhs, report.rhs_product());
    Ok(report)
}

/// `‖∇f‖_q ≤ C ‖f‖_{B^s_{∞,∞}}^{1−2/q} ‖∇f‖₂^{2/q−(1−s)(1−2/q)} ‖∇f‖_{H¹}^{(1−s)(1−2/q)}`
/// for `q ∈ (2, 2 + 2/(1−s))`.
pub fn lemma23_eval(
    f: &SpectralField,
    s: f64,
    q: f64,
    cutoffs: &CutoffPair,
) -> Result<InterpolationReport> {
    if !(s < 1.0 && s.is_finite()) {
        return Err(window_error("s", s, f64::NEG_INFINITY, 1.0));
    }
    let hi = 2.0 + 2.0 / (1.0 - s);
    if !(q > 2.0 && q < hi) {
        return Err(window_error("q", q, 2.0, hi));
    }
    let a = (1.0 - s) * (1.0 - 2.0 / q);
    let b = 2.0 / q - (1.0 - s) * (1.0 - 2.0 / q);
    assert!(a > 0.0 && b > 0.0, "dyadic exponents must be positive: a={a}, b={b}");
    let grad = f.derivative(Derivative::Grad);
    if grad.is_zero() {
        return Err(Error::Degenerate("∇f = 0".into()));
    }

    let besov = besov_norm(f, BesovParams::new(s, f64::INFINITY, f64::INFINITY), cutoffs)?;
    let grad_l2 = grad.l2_spectral();
    let grad_h1 = grad.sobolev_norm(1)?;
    let lap = laplacian_l2(f);
    let lhs = grad.lebesgue_norm(q)?;
    let k0 = splitting_index((lap + grad_l2) / grad_l2);

    let rhs_factors = vec![
        RhsFactor {
            name: "besov_s_inf_inf".into(),
            value: besov,
            exponent: 1.0 - 2.0 / q,
        },
        RhsFactor {
            name: "grad_L2".into(),
            value: grad_l2,
            exponent: b,
        },
        RhsFactor {
            name: "grad_H1".into(),
            value: grad_h1,
            exponent: a,
        },
    ];
    let decomposition = DyadicDecomposition::new(f, cutoffs)?;
    let blocks: Vec<(i32, SpectralField)> = decomposition
        .iter()
        .map(|(k, g)| (k, g.derivative(Derivative::Grad)))
        .collect();
    let chain = block_chain(ChainInput {
        blocks: &blocks,
        exponent: q,
        k0,
        a,
        b,
        shape_low_minus1: 2f64.powf(-a),
        low_norm: grad_l2,
        low_norm_minus1: grad_l2,
        high_norm: lap,
        besov_factor: besov.powf(1.0 - 2.0 / q),
        h_low: grad_l2,
    });
    let mut report = InterpolationReport {
        lhs,
        rhs_factors,
        constant: gap_constant(a, b),
        k0,
        ratio: 0.0,
        chain,
    };
    report.ratio = ratio(lhs, report.rhs_product());
    Ok(report)
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Outcome of the time-integrated logarithmic inequality on a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogInequalityReport {
    pub t1: f64,
    pub t2: f64,
    /// `∫ ‖∇f‖_∞ dt`.
    pub a: f64,
    /// `∫ ‖f‖_{B¹_{∞,∞}} dt`.
    pub b: f64,
    /// `∫ ‖∇Δf‖₂ dt`.
    pub d: f64,
    /// `a / (b·ln(d + e) + 1)`.
    pub ratio: f64,
    pub samples: usize,
}

/// Pointwise quantities entering the logarithmic inequality at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogInequalityTerms {
    pub grad_linf: f64,
    pub besov1: f64,
    pub grad_lap_l2: f64,
}

pub fn log_inequality_terms(f: &SpectralField, cutoffs: &CutoffPair) -> Result<LogInequalityTerms> {
    let grad = f.derivative(Derivative::Grad);
    Ok(LogInequalityTerms {
        grad_linf: grad.lebesgue_norm(f64::INFINITY)?,
        besov1: besov_norm(f, BesovParams::new(1.0, f64::INFINITY, f64::INFINITY), cutoffs)?,
        grad_lap_l2: f.derivative(Derivative::GradLaplacian).l2_spectral(),
    })
}

/// Combine integrated terms into the reported ratio.
pub fn log_inequality_ratio(a: f64, b: f64, d: f64) -> f64 {
    a / (b * (d + std::f64::consts::E).ln() + 1.0)
}

/// Evaluate the logarithmic inequality on the samples with `t1 ≤ t ≤ t2`,
/// using the monitored field of each sample.
pub fn lemma25_eval(
    trajectory: &[TrajectorySample],
    t1: f64,
    t2: f64,
    cutoffs: &CutoffPair,
) -> Result<LogInequalityReport> {
    if !(t1 < t2) {
        return Err(Error::Parameter(format!("empty window [{t1}, {t2}]")));
    }
    let window: Vec<&TrajectorySample> = trajectory
        .iter()
        .filter(|s| s.t >= t1 - 1e-12 && s.t <= t2 + 1e-12)
        .collect();
    if window.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: window.len(),
        });
    }
    let mut t = Vec::with_capacity(window.len());
    let (mut ga, mut gb, mut gd) = (Vec::new(), Vec::new(), Vec::new());
    for sample in window {
        let terms = log_inequality_terms(&sample.state.monitored()?, cutoffs)?;
        t.push(sample.t);
        ga.push(terms.grad_linf);
        gb.push(terms.besov1);
        gd.push(terms.grad_lap_l2);
    }
    let (a, b, d) = (trapezoid(&t, &ga), trapezoid(&t, &gb), trapezoid(&t, &gd));
    Ok(LogInequalityReport {
        t1,
        t2,
        a,
        b,
        d,
        ratio: log_inequality_ratio(a, b, d),
        samples: t.len(),
    })
}

/// Which regularity criterion an exponent triple belongs to: the negative-index
/// criterion in `B^{−s}_{p,∞}` or the positive-index one in `B^{s}_{p,∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Theorem {
    One,
    Two,
}

impl TryFrom<u8> for Theorem {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Theorem::One),
            2 => Ok(Theorem::Two),
            _ => Err(format!("theorem must be 1 or 2, got {v}")),
        }
    }
}

impl From<Theorem> for u8 {
    fn from(t: Theorem) -> u8 {
        match t {
            Theorem::One => 1,
            Theorem::Two => 2,
        }
    }
}

impl Theorem {
    /// Besov index of the criterion norm: `−s` or `s`.
    pub fn besov_index(self, s: f64) -> f64 {
        match self {
            Theorem::One => -s,
            Theorem::Two => s,
        }
    }
}

/// Solve the scaling relation for `q`: `2/q + d/p = 1 − s` (criterion one,
/// `s ∈ (0,1)`, `p > d/(1−s)`) or `2/q + d/p = 1 + s` (criterion two,
/// `s ∈ (−1,1]`, `p > d/(1+s)`). `p = ∞` is allowed.
///
/// The `B^{−1}_{∞,∞}` endpoint is rejected with [`Error::ExcludedEndpoint`].
pub fn exponent_relation(theorem: Theorem, s: f64, p: f64, d: usize) -> Result<f64> {
    if s.is_nan() || p.is_nan() {
        return Err(Error::Parameter("exponents must not be NaN".into()));
    }
    if d == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    let index = theorem.besov_index(s);
    if index == -1.0 && p.is_infinite() {
        return Err(Error::ExcludedEndpoint);
    }
    let d = d as f64;
    let gap = match theorem {
        Theorem::One => {
            if !(s > 0.0 && s < 1.0) {
                return Err(window_error("s", s, 0.0, 1.0));
            }
            1.0 - s
        }
        Theorem::Two => {
            if !(s > -1.0 && s <= 1.0) {
                return Err(window_error("s", s, -1.0, 1.0));
            }
            1.0 + s
        }
    };
    let p_min = d / gap;
    if !(p > p_min) {
        return Err(window_error("p", p, p_min, f64::INFINITY));
    }
    let rest = gap - if p.is_infinite() { 0.0 } else { d / p };
    Ok(2.0 / rest)
}

/// The pair `(p_s, q_s)` with `2/p_s + 2/q_s = 1` used to split the
/// nonlinear term in the negative-index criterion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub s: f64,
    pub p_s: f64,
    pub q_s: f64,
}

impl AdmissiblePair {
    /// Open interval for `p_s`.
    pub fn p_window(s: f64) -> (f64, f64) {
        (2.0 + 2.0 / s, 2.0 + 4.0 / s)
    }

    /// Open interval for `q_s`.
    pub fn q_window(s: f64) -> (f64, f64) {
        (2.0, 2.0 + 2.0 / (s + 1.0))
    }

    pub fn check(&self) -> Result<()> {
        let (plo, phi) = Self::p_window(self.s);
        let (qlo, qhi) = Self::q_window(self.s);
        if !(self.p_s > plo && self.p_s < phi) {
            return Err(window_error("p_s", self.p_s, plo, phi));
        }
        if !(self.q_s > qlo && self.q_s < qhi) {
            return Err(window_error("q_s", self.q_s, qlo, qhi));
        }
        let sum = 2.0 / self.p_s + 2.0 / self.q_s;
        if (sum - 1.0).abs() > 1e-14 {
            return Err(Error::Parameter(format!("2/p_s + 2/q_s = {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Midpoint of the feasible `p_s` interval, with `q_s = 2p_s/(p_s − 2)`.
///
/// The `q_s` window cuts the `p_s` window from below at `2s + 4`, so the
/// feasible set is `(max(2 + 2/s, 2s + 4), 2 + 4/s)`; for `s ≤ (√5−1)/2` the
/// lower end is `2 + 2/s` and the midpoint is `2 + 3/s`.
pub fn admissible_pair(s: f64) -> Result<AdmissiblePair> {
    if !(s > 0.0 && s < 1.0) {
        return Err(window_error("s", s, 0.0, 1.0));
    }
    let (plo, phi) = AdmissiblePair::p_window(s);
    let lower = plo.max(2.0 * s + 4.0);
    let p_s = 0.5 * (lower + phi);
    let q_s = 2.0 * p_s / (p_s - 2.0);
    let pair = AdmissiblePair { s, p_s, q_s };
    pair.check()?;
    Ok(pair)
}

/// Both sides of `‖f‖_{p_s}‖∇f‖_{q_s} ≤ C‖f‖_{B^{−s}_{∞,∞}}‖f‖_{H¹}^{1−s}‖f‖_{H²}^{s}`,
/// the product the two interpolation lemmas combine into.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    pub pair: AdmissiblePair,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn admissible_product_eval(
    f: &SpectralField,
    s: f64,
    cutoffs: &CutoffPair,
) -> Result<ProductReport> {
    let pair = admissible_pair(s)?;
    if f.is_zero() {
        return Err(Error::Degenerate("f = 0".into()));
    }
    let lhs = f.lebesgue_norm(pair.p_s)? * f.derivative(Derivative::Grad).lebesgue_norm(pair.q_s)?;
    let besov = besov_norm(f, BesovParams::new(-s, f64::INFINITY, f64::INFINITY), cutoffs)?;
    let rhs = besov * f.sobolev_norm(1)?.powf(1.0 - s) * f.sobolev_norm(2)?.powf(s);
    Ok(ProductReport {
        pair,
        lhs,
        rhs,
        ratio: ratio(lhs, rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::littlewood_paley::build_cutoffs;

    fn sample_field(n: usize) -> SpectralField {
        let g = make_grid(2, n).unwrap();
        SpectralField::from_fn(&g, 1, |x, o| {
            o[0] = (x[0]).sin() + 0.3 * (3.0 * x[1] + 1.0).cos() + 0.05 * (5.0 * x[0] - 2.0 * x[1]).sin()
        })
        .unwrap()
    }

    #[test]
    fn splitting_index_brackets() {
        for x in [1.0, 1.5, 2.0, 3.999, 4.0, 1000.0] {
            let k = splitting_index(x);
            assert!(2f64.powi(k) <= x && x < 2f64.powi(k + 1), "{x} -> {k}");
        }
    }

    #[test]
    fn lemma22_basic_properties() {
        let f = sample_field(32);
        let c = build_cutoffs(f.grid());
        let r = lemma22_eval(&f, 0.5, 8.0, &c).unwrap();
        assert!((r.exponent_sum() - 1.0).abs() < 1e-15);
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        assert!(r.chain.defect(r.lhs) <= 1e-8, "{:?}", r.chain);
        let x = (laplacian_l2(&f) + f.sobolev_norm(1).unwrap()) / f.sobolev_norm(1).unwrap();
        assert!(2f64.powi(r.k0) <= x && x < 2f64.powi(r.k0 + 1));
        let scaled = lemma22_eval(&f.scale(10.0), 0.5, 8.0, &c).unwrap();
        assert!((scaled.ratio - r.ratio).abs() < 1e-10 * r.ratio);
    }

    #[test]
    fn lemma22_rejects() {
        let f = sample_field(16);
        let c = build_cutoffs(f.grid());
        assert!(matches!(
            lemma22_eval(&f, 0.5, 6.0, &c),
            Err(Error::InadmissibleExponent { .. })
        ));
        assert!(lemma22_eval(&f, 0.5, 10.0, &c).is_err());
        let zero = SpectralField::zeros(f.grid(), 1);
        assert!(matches!(lemma22_eval(&zero, 0.5, 8.0, &c), Err(Error::Degenerate(_))));
    }

    #[test]
    fn lemma23_basic_properties() {
        let f = sample_field(32);
        let c = build_cutoffs(f.grid());
        let r = lemma23_eval(&f, 0.0, 3.0, &c).unwrap();
        assert!((r.exponent_sum() - 1.0).abs() < 1e-15);
        // s = 0, q = 3: exponents 1/3, 1/3, 1/3.
        for factor in &r.rhs_factors {
            assert!((factor.exponent - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(r.chain.defect(r.lhs) <= 1e-8, "{:?}", r.chain);
        let scaled = lemma23_eval(&f.scale(1e-3), 0.0, 3.0, &c).unwrap();
        assert!((scaled.ratio - r.ratio).abs() < 1e-10 * r.ratio);
        assert!(lemma23_eval(&f, 0.0, 4.0, &c).is_err());
        let constant = SpectralField::from_fn(f.grid(), 1, |_, o| o[0] = 2.0).unwrap();
        assert!(matches!(lemma23_eval(&constant, 0.0, 3.0, &c), Err(Error::Degenerate(_))));
    }

    #[test]
    fn gap_constant_values() {
        // a = b = 1: max{1/(2-1), 1/(1-1/2)} = 2.
        assert_eq!(gap_constant(1.0, 1.0), 2.0);
    }

    #[test]
    fn exponent_relation_cases() {
        assert!((exponent_relation(Theorem::Two, 0.0, 6.0, 3).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(exponent_relation(Theorem::Two, 1.0, f64::INFINITY, 3).unwrap(), 1.0);
        assert!(matches!(
            exponent_relation(Theorem::Two, -1.0, f64::INFINITY, 3),
            Err(Error::ExcludedEndpoint)
        ));
        assert!(matches!(
            exponent_relation(Theorem::One, 1.0, f64::INFINITY, 2),
            Err(Error::ExcludedEndpoint)
        ));
        assert!((exponent_relation(Theorem::One, 0.5, f64::INFINITY, 2).unwrap() - 4.0).abs() < 1e-14);
        assert!(exponent_relation(Theorem::One, 0.5, 4.0, 2).is_err());
        assert!(exponent_relation(Theorem::Two, 0.0, 3.0, 3).is_err());
        assert!(exponent_relation(Theorem::One, 0.0, 10.0, 3).is_err());
    }

    #[test]
    fn admissible_pair_half() {
        let pair = admissible_pair(0.5).unwrap();
        assert_eq!(pair.p_s, 8.0);
        assert!((pair.q_s - 8.0 / 3.0).abs() < 1e-15);
        assert!(admissible_pair(0.0).is_err());
        assert!(admissible_pair(1.0).is_err());
        for s in [1e-6, 0.3, 0.618, 0.7, 0.9, 0.999999] {
            admissible_pair(s).unwrap();
        }
    }

    #[test]
    fn theorem_serde_is_numeric() {
        assert_eq!(serde_json::to_string(&Theorem::Two).unwrap(), "2");
        let t: Theorem = serde_json::from_str("1").unwrap();
        assert_eq!(t, Theorem::One);
        assert!(serde_json::from_str::<Theorem>("3").is_err());
    }
}
