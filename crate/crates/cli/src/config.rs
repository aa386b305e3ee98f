//! Flat run configuration. Every key is optional; unknown keys are rejected.

use std::path::Path;

use anyhow::{Context, Result};
use besovflow::corpus::{random_solenoidal, Spectrum};
use besovflow::inequalities::Theorem;
use besovflow::monitor::{calibrate_ladyzhenskaya, CriterionSpec, GronwallCalibration, MonitorConfig};
use besovflow::serde_ext::parse_extended;
use besovflow::systems::{InitialCondition, SystemKind, SystemSpec};
use besovflow::trajectory::NormRequest;
use besovflow::verify::VerifyConfig;
use besovflow::Grid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bad input from the command line or the config file (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Zero,
    TaylorGreen,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemKind,
    pub d: usize,
    pub n: usize,
    pub nu: f64,
    /// Magnetic or thermal diffusivity; defaults to `nu`.
    pub diffusivity: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub cfl_limit: f64,
    pub overflow_guard: f64,

    pub initial: Preset,
    pub amplitude: f64,
    pub k_max: i32,
    pub norm: f64,
    pub decay: f64,

    /// Criterion triples written `"theorem,s,p"`, optionally followed by `,hom`.
    pub criteria: Vec<String>,
    pub h3: bool,
    pub residual_tolerance: f64,
    pub energy_tolerance: f64,
    pub gronwall_constant: Option<f64>,
    pub epsilon: Option<f64>,
    /// Interpolation constant for the endpoint check; calibrated on a corpus when absent.
    pub ladyzhenskaya: Option<f64>,
    pub calibration_fields: usize,
    pub growth_threshold: f64,

    pub corpus_size: usize,
    pub verify_d: usize,
    pub verify_n: usize,
    pub verify_k_max: i32,
    pub lemma22_s: f64,
    pub lemma22_p: f64,
    pub lemma23_s: f64,
    pub lemma23_q: f64,

    /// Horizon to extend past; defaults to the last stored time.
    pub t_star: Option<f64>,
    /// Overrides the tabulated local span.
    pub local_span: Option<f64>,

    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let verify = VerifyConfig::default();
        Self {
            system: SystemKind::Nse,
            d: 2,
            n: 32,
            nu: 0.05,
            diffusivity: None,
            dt: 0.01,
            t_end: 2.0,
            sample_every: 5,
            cfl_limit: 1.0,
            overflow_guard: 1e12,
            initial: Preset::Random,
            amplitude: 1.0,
            k_max: 8,
            norm: 3.0,
            decay: 1.5,
            criteria: vec!["2,0,inf".into()],
            h3: true,
            residual_tolerance: besovflow::monitor::RESIDUAL_TOLERANCE,
            energy_tolerance: besovflow::monitor::ENERGY_TOLERANCE,
            gronwall_constant: None,
            epsilon: Some(0.1),
            ladyzhenskaya: None,
            calibration_fields: 50,
            growth_threshold: 1e3,
            corpus_size: verify.corpus_size,
            verify_d: verify.d,
            verify_n: verify.n,
            verify_k_max: verify.k_max,
            lemma22_s: verify.lemma22_s,
            lemma22_p: verify.lemma22_p,
            lemma23_s: verify.lemma23_s,
            lemma23_q: verify.lemma23_q,
            t_star: None,
            local_span: None,
            seed: 42,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| UsageError(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| UsageError(format!("invalid config: {e}")).into())
    }

    /// Hex digest of the resolved configuration, excluding the thread count.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let kappa = self.diffusivity.unwrap_or(self.nu);
        let mut spec = match self.system {
            SystemKind::Nse => SystemSpec::nse(self.d, self.nu),
            SystemKind::Mhd => SystemSpec::mhd(self.d, self.nu, kappa),
            SystemKind::Boussinesq => {
                if self.d != 2 {
                    return usage(format!("the Boussinesq system is two-dimensional, got d = {}", self.d));
                }
                SystemSpec::boussinesq(self.nu, kappa)
            }
        };
        spec.cfl_limit = self.cfl_limit;
        spec.overflow_guard = self.overflow_guard;
        spec.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(spec)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.d, self.n).map_err(|e| UsageError(e.to_string()).into())
    }

    pub fn initial_condition(&self) -> InitialCondition {
        match self.initial {
            Preset::Zero => InitialCondition::Zero,
            Preset::TaylorGreen => InitialCondition::TaylorGreen {
                amplitude: self.amplitude,
            },
            Preset::Random => InitialCondition::Random {
                k_max: self.k_max,
                norm: self.norm,
                decay: self.decay,
            },
        }
    }

    pub fn criterion_specs(&self, d: usize) -> Result<Vec<CriterionSpec>> {
        self.criteria.iter().map(|c| parse_criterion(c, d)).collect()
    }

    pub fn norm_request(&self, d: usize) -> Result<NormRequest> {
        Ok(NormRequest {
            besov: self.criterion_specs(d)?.iter().map(|c| c.besov_params()).collect(),
            h3: self.h3,
        })
    }

    /// Monitor settings for a trajectory on `grid`.
    pub fn monitor_config(&self, grid: &Grid) -> Result<MonitorConfig> {
        let ladyzhenskaya = match self.ladyzhenskaya {
            Some(c) => c,
            None => {
                let k_max = (grid.n() as i32 / 4).clamp(1, self.k_max.max(1));
                let corpus = (0..self.calibration_fields as u64)
                    .map(|i| random_solenoidal(grid, Spectrum::new(k_max), 1.0, self.seed, i))
                    .collect::<besovflow::Result<Vec<_>>>()?;
                calibrate_ladyzhenskaya(&corpus)?
            }
        };
        Ok(MonitorConfig {
            criteria: self.criterion_specs(grid.dim())?,
            residual_tolerance: self.residual_tolerance,
            energy_tolerance: self.energy_tolerance,
            gronwall: match self.gronwall_constant {
                Some(constant) => GronwallCalibration::Fixed { constant },
                None => GronwallCalibration::FirstSample,
            },
            epsilon: self.epsilon,
            ladyzhenskaya,
            growth_threshold: self.growth_threshold,
        })
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            d: self.verify_d,
            n: self.verify_n,
            corpus_size: self.corpus_size,
            k_max: self.verify_k_max,
            seed: self.seed,
            lemma22_s: self.lemma22_s,
            lemma22_p: self.lemma22_p,
            lemma23_s: self.lemma23_s,
            lemma23_q: self.lemma23_q,
            ..VerifyConfig::default()
        }
    }

    /// Check everything that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        self.system_spec()?;
        self.grid()?;
        self.criterion_specs(self.d)?;
        if self.sample_every == 0 {
            return usage("sample_every must be at least 1");
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return usage(format!("need dt > 0 and t_end >= 0, got dt = {}, t_end = {}", self.dt, self.t_end));
        }
        Ok(())
    }
}

/// `"theorem,s,p"` or `"theorem,s,p,hom"`, with `q` solved from the scaling relation.
pub fn parse_criterion(text: &str, d: usize) -> Result<CriterionSpec> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return usage(format!("criterion {text:?} must read \"theorem,s,p\" or \"theorem,s,p,hom\""));
    }
    let theorem = match parts[0] {
        "1" => Theorem::One,
        "2" => Theorem::Two,
        other => return usage(format!("criterion {text:?}: theorem must be 1 or 2, got {other}")),
    };
    let s: f64 = parts[1]
        .parse()
        .map_err(|e| UsageError(format!("criterion {text:?}: bad s: {e}")))?;
    let p = parse_extended(parts[2]).map_err(|e| UsageError(format!("criterion {text:?}: {e}")))?;
    let mut spec = CriterionSpec::new(theorem, s, p, d)
        .map_err(|e| UsageError(format!("criterion {text:?}: {e}")))?;
    match parts.get(3) {
        None => {}
        Some(&"hom") => spec.homogeneous = true,
        Some(other) => return usage(format!("criterion {text:?}: unknown flag {other:?}")),
    }
    spec.validate(d)
        .map_err(|e| UsageError(format!("criterion {text:?}: {e}")))
        .context("criterion rejected")?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("viscosity = 0.1\n").unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn hash_ignores_threads_only() {
        let a = RunConfig::default();
        let b = RunConfig {
            threads: Some(3),
            ..a.clone()
        };
        let c = RunConfig { seed: 7, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn criteria_parse() {
        let c = parse_criterion("2,0,inf", 2).unwrap();
        assert_eq!(c.q, 2.0);
        let serrin = parse_criterion("2,0,6", 3).unwrap();
        assert!((serrin.q - 4.0).abs() < 1e-12);
        assert!(parse_criterion("1,1,inf", 3).is_err());
        assert!(parse_criterion("3,0,inf", 2).is_err());
        assert!(parse_criterion("2,0.5,inf,hom", 2).unwrap().homogeneous);
    }
}
