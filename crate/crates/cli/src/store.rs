//! Trajectory directories: `manifest.json` plus one checkpoint per sample.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use besovflow::monitor::csv_table;
use besovflow::systems::{read_checkpoint, write_checkpoint, SystemSpec};
use besovflow::trajectory::{GuardTrip, NormRequest, SampleNorms, Trajectory, TrajectorySample};
use besovflow::CutoffPair;
use serde::{Deserialize, Serialize};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestSample {
    pub index: usize,
    pub t: f64,
    pub step: u64,
    pub checkpoint: String,
    /// Informational; norms are recomputed from the checkpoint on load.
    #[serde(skip_deserializing, default)]
    pub norms: Option<SampleNorms>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub system: SystemSpec,
    pub n: usize,
    pub dt: f64,
    pub norm_request: NormRequest,
    pub guard: Option<GuardTrip>,
    pub samples: Vec<ManifestSample>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_trajectory(
    dir: &Path,
    traj: &Trajectory,
    request: &NormRequest,
    config_hash: &str,
    seed: u64,
) -> Result<Manifest> {
    let cp_dir = dir.join("checkpoints");
    fs::create_dir_all(&cp_dir).with_context(|| format!("creating {}", cp_dir.display()))?;
    let mut samples = Vec::with_capacity(traj.samples.len());
    for (index, s) in traj.samples.iter().enumerate() {
        let name = format!("checkpoints/sample_{index:06}.bsvk");
        let bytes = write_checkpoint(traj.spec.kind, &s.state, seed)?;
        fs::write(dir.join(&name), bytes).with_context(|| format!("writing {name}"))?;
        samples.push(ManifestSample {
            index,
            t: s.t,
            step: s.step,
            checkpoint: name,
            norms: Some(s.norms.clone()),
        });
    }
    let n = traj.samples.first().map_or(0, |s| s.state.grid().n());
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        config_hash: config_hash.to_string(),
        seed,
        system: traj.spec.clone(),
        n,
        dt: traj.dt,
        norm_request: request.clone(),
        guard: traj.guard.clone(),
        samples,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn load_trajectory(dir: &Path) -> Result<(Manifest, Trajectory)> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
        bail!("unsupported manifest schema version {}", manifest.schema_version);
    }
    let mut samples = Vec::with_capacity(manifest.samples.len());
    let mut cutoffs: Option<CutoffPair> = None;
    for entry in &manifest.samples {
        let bytes = fs::read(dir.join(&entry.checkpoint))
            .with_context(|| format!("reading {}", entry.checkpoint))?;
        let cp = read_checkpoint(&bytes).with_context(|| format!("decoding {}", entry.checkpoint))?;
        if cp.kind != manifest.system.kind {
            bail!("{} holds a {} state, manifest says {}", entry.checkpoint, cp.kind, manifest.system.kind);
        }
        if (cp.state.t - entry.t).abs() > 1e-12 * entry.t.abs().max(1.0) {
            bail!("{} is at t = {}, manifest says {}", entry.checkpoint, cp.state.t, entry.t);
        }
        if cutoffs.is_none() && !manifest.norm_request.besov.is_empty() {
            cutoffs = Some(CutoffPair::new(cp.state.grid()));
        }
        let norms = SampleNorms::compute(&cp.state, &manifest.norm_request, cutoffs.as_ref())?;
        samples.push(TrajectorySample {
            t: cp.state.t,
            step: entry.step,
            state: cp.state,
            norms,
        });
    }
    let traj = Trajectory {
        spec: manifest.system.clone(),
        dt: manifest.dt,
        samples,
        guard: manifest.guard.clone(),
    };
    Ok((manifest, traj))
}

/// Per-sample norms as CSV.
pub fn norms_csv(traj: &Trajectory, comment: &str) -> String {
    let t = traj.times();
    let sq = |f: fn(&SampleNorms) -> f64| traj.series(move |n| f(n).powi(2));
    let l2 = traj.series(|n| n.l2);
    let grad = sq(|n| n.grad_l2);
    let lap = sq(|n| n.lap_l2);
    let glap = sq(|n| n.grad_lap_l2);
    let h1 = traj.series(|n| n.h1);
    let h2 = traj.series(|n| n.h2);
    let h3 = traj.series(|n| n.h3.unwrap_or(f64::NAN));
    let l3 = traj.series(|n| n.grad_l3.powi(3));
    let l4 = traj.series(|n| n.grad_l4.powi(4));
    let linf = traj.series(|n| n.grad_linf);
    let mut columns: Vec<(String, Vec<f64>)> = vec![
        ("t".into(), t),
        ("u_L2".into(), l2),
        ("grad_u_L2_sq".into(), grad),
        ("lap_u_L2_sq".into(), lap),
        ("grad_lap_u_L2_sq".into(), glap),
        ("u_H1".into(), h1),
        ("u_H2".into(), h2),
        ("u_H3".into(), h3),
        ("grad_u_L3_cubed".into(), l3),
        ("grad_u_L4_fourth".into(), l4),
        ("grad_u_Linf".into(), linf),
    ];
    if let Some(first) = traj.samples.first() {
        for (i, b) in first.norms.besov.iter().enumerate() {
            columns.push((b.params.label(), traj.series(|n| n.besov[i].value)));
        }
    }
    let refs: Vec<(&str, &[f64])> = columns.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
    csv_table(Some(comment), &refs)
}
