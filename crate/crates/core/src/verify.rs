//! Property suites over a seeded random corpus. Each suite produces a list of
//! named checks `value ≤ limit`; any failed check is a violation.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, besov_sequence, BesovParams};
use crate::corpus::{band_limited_field, Spectrum};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::inequalities::{lemma22_eval, lemma23_eval, InterpolationReport};
use crate::littlewood_paley::{bernstein_ratio, low_pass, lp_block, Band, CutoffPair, DyadicDecomposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lp,
    Besov,
    Lemmas,
    Bernstein,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Lp, Suite::Besov, Suite::Lemmas, Suite::Bernstein];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lp => "lp",
            Suite::Besov => "besov",
            Suite::Lemmas => "lemmas",
            Suite::Bernstein => "bernstein",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite {s:?} (expected lp, besov, lemmas or bernstein)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub d: usize,
    pub n: usize,
    pub corpus_size: usize,
    pub k_max: i32,
    pub seed: u64,
    pub lemma22_s: f64,
    pub lemma22_p: f64,
    pub lemma23_s: f64,
    pub lemma23_q: f64,
    pub bernstein_radii: Vec<f64>,
    /// Grid size for the Bernstein sweep; must exceed twice the largest radius.
    pub bernstein_n: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            d: 2,
            n: 32,
            corpus_size: 100,
            k_max: 6,
            seed: 42,
            lemma22_s: 0.5,
            lemma22_p: 8.0,
            lemma23_s: 0.0,
            lemma23_q: 3.0,
            bernstein_radii: vec![4.0, 8.0, 16.0],
            bernstein_n: 64,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.corpus_size == 0 {
            return Err(Error::Parameter("corpus size must be at least 1".into()));
        }
        Grid::new(self.d, self.n)?;
        if self.k_max < 1 || 2 * self.k_max >= self.n as i32 {
            return Err(Error::Parameter(format!(
                "k_max = {} must lie in [1, n/2) for n = {}",
                self.k_max, self.n
            )));
        }
        Ok(())
    }

    fn corpus(&self, grid: &Grid) -> Result<Vec<SpectralField>> {
        (0..self.corpus_size as u64)
            .into_par_iter()
            .map(|i| band_limited_field(grid, 1, Spectrum::new(self.k_max), self.seed, i))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Corpus index, when the check concerns a single field.
    pub field: Option<usize>,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, field: Option<usize>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            field,
            value,
            limit,
            passed: value <= limit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub corpus_size: usize,
    pub checks: Vec<Check>,
    /// Names of failed checks and gate rejections.
    pub violations: Vec<String>,
    pub passed: bool,
}

impl SuiteReport {
    fn finish(suite: Suite, config: &VerifyConfig, checks: Vec<Check>, mut violations: Vec<String>) -> Self {
        for c in checks.iter().filter(|c| !c.passed) {
            let tag = match c.field {
                Some(i) => format!("{} (field {i}): {:e} > {:e}", c.name, c.value, c.limit),
                None => format!("{}: {:e} > {:e}", c.name, c.value, c.limit),
            };
            violations.push(tag);
        }
        Self {
            suite,
            seed: config.seed,
            corpus_size: config.corpus_size,
            passed: violations.is_empty(),
            checks,
            violations,
        }
    }

    /// One row per check.
    pub fn csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("suite,check,field,value,limit,passed\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{}\n",
                self.suite,
                c.name,
                c.field.map_or(String::new(), |i| i.to_string()),
                c.value,
                c.limit,
                c.passed
            ));
        }
        out
    }

    /// Largest value among checks with the given name.
    pub fn worst(&self, name: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.name == name)
            .map(|c| c.value)
            .reduce(f64::max)
    }
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    config.validate()?;
    match suite {
        Suite::Lp => lp_suite(config),
        Suite::Besov => besov_suite(config),
        Suite::Lemmas => lemmas_suite(config),
        Suite::Bernstein => bernstein_suite(config),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn pointwise_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x * y).collect();
    SpectralField::from_values(a.grid(), 1, values)
}

fn lp_field_checks(f: &SpectralField, g: &SpectralField, wide_f: &SpectralField, wide_g: &SpectralField, cutoffs: &CutoffPair, wide: &CutoffPair, i: usize) -> Result<Vec<Check>> {
    let norm = f.l2_spectral();
    let dec = DyadicDecomposition::new(f, cutoffs)?;
    let mut checks = vec![Check::new(
        "reconstruction",
        Some(i),
        dec.reconstruct().sub(f)?.l2_spectral() / norm,
        1e-10,
    )];

    let mut ortho = 0.0f64;
    for (j, bj) in dec.iter() {
        for (k, _) in dec.iter() {
            if (j - k).abs() >= 2 {
                ortho = ortho.max(lp_block(bj, k, cutoffs)?.l2_spectral() / norm);
            }
        }
    }
    checks.push(Check::new("block_orthogonality", Some(i), ortho, 1e-12));

    let mut low = 0.0f64;
    let mut partial = dec.block(-1).expect("j = -1 exists").clone();
    for j in 0..=cutoffs.j_max() + 1 {
        let s = low_pass(f, j, cutoffs)?;
        low = low.max(s.sub(&partial)?.l2_spectral() / norm);
        if let Some(b) = dec.block(j) {
            partial = partial.combine(1.0, b, 1.0)?;
        }
    }
    checks.push(Check::new("low_pass_partial_sum", Some(i), low, 1e-10));

    let (a, b) = (0.7, -1.9);
    let mix = f.combine(a, g, b)?;
    let mut lin = 0.0f64;
    for j in -1..=cutoffs.j_max() {
        let lhs = lp_block(&mix, j, cutoffs)?;
        let rhs = lp_block(f, j, cutoffs)?.combine(a, &lp_block(g, j, cutoffs)?, b)?;
        lin = lin.max(lhs.sub(&rhs)?.l2_spectral() / mix.l2_spectral());
    }
    checks.push(Check::new("block_linearity", Some(i), lin, 1e-12));

    // Δ_j(S_{k−1}g · Δ_k f) vanishes for |j − k| ≥ 5; evaluated on a grid
    // twice as fine so the product is not aliased.
    let g_inf = wide_g.lebesgue_norm(f64::INFINITY)?;
    let f2 = wide_f.l2_spectral();
    let mut para = 0.0f64;
    let j_max = wide.j_max();
    for k in 0..=j_max {
        let sg = if k >= 1 { low_pass(wide_g, k - 1, wide)? } else { SpectralField::zeros(wide_g.grid(), 1) };
        let prod = pointwise_product(&sg, &lp_block(wide_f, k, wide)?)?;
        for j in -1..=j_max {
            if (j - k).abs() >= 5 {
                para = para.max(lp_block(&prod, j, wide)?.l2_spectral());
            }
        }
    }
    let scale = g_inf * f2;
    checks.push(Check::new("paraproduct_separation", Some(i), if scale > 0.0 { para / scale } else { 0.0 }, 1e-8));
    Ok(checks)
}

fn lp_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for d in [2, 3] {
        for n in [16, 32, 64] {
            let cutoffs = CutoffPair::new(&Grid::new(d, n)?);
            checks.push(Check::new(format!("partition_of_unity_d{d}_n{n}"), None, cutoffs.partition_defect(), 1e-12));
        }
    }
    let grid = Grid::new(config.d, config.n)?;
    let wide_grid = Grid::new(config.d, 2 * config.n)?;
    let cutoffs = CutoffPair::new(&grid);
    let wide = CutoffPair::new(&wide_grid);
    let spectrum = Spectrum::new(config.k_max);
    let count = config.corpus_size as u64;
    let per_field: Vec<Vec<Check>> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<Vec<Check>> {
            let f = band_limited_field(&grid, 1, spectrum, config.seed, i)?;
            let g = band_limited_field(&grid, 1, spectrum, config.seed, i + count)?;
            let wf = band_limited_field(&wide_grid, 1, spectrum, config.seed, i)?;
            let wg = band_limited_field(&wide_grid, 1, spectrum, config.seed, i + count)?;
            lp_field_checks(&f, &g, &wf, &wg, &cutoffs, &wide, i as usize)
        })
        .collect::<Result<_>>()?;
    checks.extend(per_field.into_iter().flatten());
    Ok(SuiteReport::finish(Suite::Lp, config, checks, Vec::new()))
}

/// `max_j 2^{−jd/2} √M_j (2π)^{−d/2}`, `M_j` the lattice points in the support
/// of block `j`: bounds `‖·‖_{B^{σ−d/2}_{∞,∞}} / ‖·‖_{B^{σ}_{2,∞}}` via
/// `‖g‖_∞ ≤ Σ|ĝ| ≤ √M ‖ĝ‖_{ℓ²}`.
pub fn embedding_oracle(cutoffs: &CutoffPair) -> f64 {
    let grid = cutoffs.grid();
    let d = grid.dim() as i32;
    let mut worst = 0.0f64;
    for j in -1..=cutoffs.j_max() {
        let m = cutoffs.block_multiplier(j).iter().filter(|&&w| w != 0.0).count() as f64;
        let c = 2f64.powf(-(j as f64) * d as f64 / 2.0) * m.sqrt() * (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
        worst = worst.max(c);
    }
    worst
}

fn besov_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let grid = Grid::new(config.d, config.n)?;
    let cutoffs = CutoffPair::new(&grid);
    let corpus = config.corpus(&grid)?;
    let d = config.d as f64;
    let mut checks = Vec::new();

    let zero = SpectralField::zeros(&grid, 1);
    checks.push(Check::new("zero_field", None, besov_norm(&zero, BesovParams::new(0.5, 4.0, 2.0), &cutoffs)?, 0.0));
    let c: f64 = -2.5;
    let constant = SpectralField::from_fn(&grid, 1, |_, out| out[0] = c)?;
    for (s, p) in [(0.5, 2.0), (-1.0, 4.0), (1.0, f64::INFINITY)] {
        let seq = besov_sequence(&constant, BesovParams::new(s, p, f64::INFINITY), &cutoffs)?;
        let expected = 2f64.powf(-s) * (2.0 * std::f64::consts::PI).powf(if p.is_infinite() { 0.0 } else { d / p }) * c.abs();
        let stray = seq.entries.iter().filter(|e| e.0 >= 0).map(|e| e.1).fold(0.0, f64::max);
        checks.push(Check::new(format!("constant_low_block_s{s}_p{p}"), None, rel(seq.entry(-1).unwrap_or(0.0), expected), 1e-12));
        checks.push(Check::new(format!("constant_high_blocks_s{s}_p{p}"), None, stray, 1e-12 * c.abs()));
    }

    let s = 0.5;
    let c_emb = embedding_oracle(&cutoffs);
    let per_field: Vec<Vec<Check>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, f)| -> Result<Vec<Check>> {
            let mut out = Vec::new();
            let params = BesovParams::new(0.3, 3.0, 2.0);
            let base = besov_norm(f, params, &cutoffs)?;
            let mut scaling = 0.0f64;
            for lambda in [-3.0, 1e-3, 1e3] {
                scaling = scaling.max(rel(besov_norm(&f.scale(lambda), params, &cutoffs)?, lambda.abs() * base));
            }
            out.push(Check::new("scaling", Some(i), scaling, 1e-12));

            let q1 = besov_norm(f, BesovParams::new(s, 4.0, 1.0), &cutoffs)?;
            let q2 = besov_norm(f, BesovParams::new(s, 4.0, 2.0), &cutoffs)?;
            let qi = besov_norm(f, BesovParams::new(s, 4.0, f64::INFINITY), &cutoffs)?;
            out.push(Check::new("q_monotone", Some(i), (q2 - q1).max(qi - q2) / q1, 1e-14));

            let inhom = besov_sequence(f, BesovParams::new(-s, 4.0, f64::INFINITY), &cutoffs)?;
            let hom = besov_sequence(f, BesovParams::homogeneous(-s, 4.0, f64::INFINITY), &cutoffs)?;
            let mut agree = 0.0f64;
            for &(j, v) in inhom.entries.iter().filter(|e| e.0 >= 0) {
                agree = agree.max(rel(v, hom.entry(j).unwrap_or(0.0)));
            }
            out.push(Check::new("homogeneous_agreement", Some(i), agree, 1e-12));

            let lo = besov_norm(f, BesovParams::new(-s - d / 2.0, f64::INFINITY, f64::INFINITY), &cutoffs)?;
            let hi = besov_norm(f, BesovParams::new(-s, 2.0, f64::INFINITY), &cutoffs)?;
            out.push(Check::new("embedding", Some(i), lo / hi, c_emb));
            Ok(out)
        })
        .collect::<Result<_>>()?;
    checks.extend(per_field.into_iter().flatten());
    Ok(SuiteReport::finish(Suite::Besov, config, checks, Vec::new()))
}

#[derive(Clone, Copy)]
enum Lemma {
    Interp22,
    Interp23,
}

impl Lemma {
    fn name(self) -> &'static str {
        match self {
            Lemma::Interp22 => "lemma22",
            Lemma::Interp23 => "lemma23",
        }
    }

    fn eval(self, f: &SpectralField, config: &VerifyConfig, cutoffs: &CutoffPair) -> Result<InterpolationReport> {
        match self {
            Lemma::Interp22 => lemma22_eval(f, config.lemma22_s, config.lemma22_p, cutoffs),
            Lemma::Interp23 => lemma23_eval(f, config.lemma23_s, config.lemma23_q, cutoffs),
        }
    }
}

fn lemmas_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let grid = Grid::new(config.d, config.n)?;
    let fine = Grid::new(config.d, 2 * config.n)?;
    let cutoffs = CutoffPair::new(&grid);
    let fine_cutoffs = CutoffPair::new(&fine);
    let corpus = config.corpus(&grid)?;
    let fine_corpus = config.corpus(&fine)?;
    let mut checks = Vec::new();
    let mut violations = Vec::new();

    for lemma in [Lemma::Interp22, Lemma::Interp23] {
        let name = lemma.name();
        match lemma.eval(&corpus[0], config, &cutoffs) {
            Err(e @ Error::InadmissibleExponent { .. }) => {
                violations.push(format!("{name}.admissibility: {e}"));
                continue;
            }
            Err(e) => return Err(e),
            Ok(_) => {}
        }
        let per_field: Vec<(Vec<Check>, f64, f64)> = corpus
            .par_iter()
            .zip(fine_corpus.par_iter())
            .enumerate()
            .map(|(i, (f, ff))| -> Result<(Vec<Check>, f64, f64)> {
                let r = lemma.eval(f, config, &cutoffs)?;
                let mut out = vec![
                    Check::new(format!("{name}.exponent_sum"), Some(i), (r.exponent_sum() - 1.0).abs(), 2.0 * f64::EPSILON),
                    Check::new(format!("{name}.chain"), Some(i), r.chain.defect(r.lhs), 1e-12),
                ];
                let mut homog = 0.0f64;
                for lambda in [1e-3, 1e3] {
                    homog = homog.max(rel(lemma.eval(&f.scale(lambda), config, &cutoffs)?.ratio, r.ratio));
                }
                out.push(Check::new(format!("{name}.homogeneity"), Some(i), homog, 1e-10));
                let fine_ratio = lemma.eval(ff, config, &fine_cutoffs)?.ratio;
                Ok((out, r.ratio, fine_ratio))
            })
            .collect::<Result<_>>()?;
        let mut sup = 0.0f64;
        let mut fine_sup = 0.0f64;
        for (c, r, fr) in per_field {
            checks.extend(c);
            sup = sup.max(r);
            fine_sup = fine_sup.max(fr);
        }
        checks.push(Check::new(format!("{name}.sup_ratio"), None, sup, f64::MAX));
        checks.push(Check::new(format!("{name}.refinement_drift"), None, rel(sup, fine_sup), 0.2));
    }
    Ok(SuiteReport::finish(Suite::Lemmas, config, checks, violations))
}

/// Random scalar field supported in `R/2 ≤ |ξ| ≤ R`.
pub fn annulus_field(grid: &Grid, radius: f64, seed: u64, stream: u64) -> Result<SpectralField> {
    let raw = band_limited_field(grid, 1, Spectrum::new(radius.floor() as i32), seed, stream)?;
    let norm2 = grid.norm2();
    let mask: Vec<f64> = norm2
        .iter()
        .map(|&m| {
            let r = (m as f64).sqrt();
            if r >= radius / 2.0 && r <= radius { 1.0 } else { 0.0 }
        })
        .collect();
    Ok(raw.apply_multiplier(&mask))
}

fn bernstein_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let grid = Grid::new(config.d, config.bernstein_n)?;
    let mut checks = Vec::new();
    let mut sups = Vec::new();
    for &radius in &config.bernstein_radii {
        let band = Band::Annulus {
            inner: radius / 2.0,
            outer: radius,
        };
        let ratios: Vec<f64> = (0..config.corpus_size as u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let f = annulus_field(&grid, radius, config.seed, i)?;
                Ok(bernstein_ratio(&f, band, [1, 0, 0], 2.0, 2.0)?.ratio.unwrap_or(0.0))
            })
            .collect::<Result<_>>()?;
        let sup = ratios.iter().cloned().fold(0.0, f64::max);
        // ‖f‖₂ ≤ (2/R)‖∇f‖₂ ≤ (2√d/R) max_i ‖∂_i f‖₂ on the annulus.
        checks.push(Check::new(format!("annulus_sup_R{radius}"), None, sup, 2.0 * (config.d as f64).sqrt()));
        sups.push(sup);
    }
    let max = sups.iter().cloned().fold(0.0, f64::max);
    let min = sups.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check::new("annulus_spread", None, max / min, 2.0 - f64::EPSILON));
    Ok(SuiteReport::finish(Suite::Bernstein, config, checks, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("spectral".parse::<Suite>().is_err());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let config = VerifyConfig {
            corpus_size: 0,
            ..VerifyConfig::default()
        };
        assert!(matches!(run_suite(Suite::Lp, &config), Err(Error::Parameter(_))));
    }

    #[test]
    fn inadmissible_lemma_exponent_is_a_violation() {
        let config = VerifyConfig {
            corpus_size: 2,
            lemma22_p: 20.0,
            ..VerifyConfig::default()
        };
        let report = run_suite(Suite::Lemmas, &config).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| v.starts_with("lemma22.admissibility")));
    }

    #[test]
    fn annulus_field_stays_in_band() {
        let grid = Grid::new(2, 32).unwrap();
        let f = annulus_field(&grid, 8.0, 3, 0).unwrap();
        let band = Band::Annulus { inner: 4.0, outer: 8.0 };
        assert!(bernstein_ratio(&f, band, [1, 0, 0], 2.0, 2.0).is_ok());
    }
}
