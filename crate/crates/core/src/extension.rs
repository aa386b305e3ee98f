//! Checkpoint, restart and join: continuing a solution past a horizon `T_*`
//! from a restart time `T_** < T_*` with a local run of length `𝒯`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitor::{APrioriBound, MonitorReport, Verdict};
use crate::systems::{read_checkpoint, simulate_with, write_checkpoint, SimulateOptions, SystemKind, SystemSpec, SystemState};
use crate::trajectory::{NormRequest, Trajectory};

/// Local existence span `𝒯` as a function of an `H¹` bound, tabulated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSpanTable {
    pub system: SystemKind,
    /// `(H¹ bound, span)` with increasing bounds and nonincreasing spans.
    pub entries: Vec<(f64, f64)>,
}

impl LocalSpanTable {
    pub fn default_for(system: SystemKind) -> Self {
        let scale = match system {
            SystemKind::Nse => 1.0,
            SystemKind::Mhd => 0.7,
            SystemKind::Boussinesq => 0.8,
        };
        Self {
            system,
            entries: vec![
                (1.0, 2.0 * scale),
                (10.0, 1.0 * scale),
                (100.0, 0.25 * scale),
                (1000.0, 0.02 * scale),
            ],
        }
    }

    /// Span for the smallest tabulated bound at or above `h1`; beyond the table
    /// the last span shrinks like `(bound/h1)²`.
    pub fn lookup(&self, h1: f64) -> f64 {
        for &(bound, span) in &self.entries {
            if h1 <= bound {
                return span;
            }
        }
        let (bound, span) = *self.entries.last().expect("table is nonempty");
        span * (bound / h1).powi(2)
    }

    /// Measure spans empirically: for each bound, start from seeded random data
    /// with that `H¹` norm and record how long the `H¹` norm stays below twice
    /// the bound (capped at `max_span`).
    pub fn regenerate(
        spec: &SystemSpec,
        grid: &crate::grid::Grid,
        bounds: &[f64],
        dt: f64,
        max_span: f64,
        seed: u64,
    ) -> Result<Self> {
        use crate::systems::InitialCondition;
        let mut entries = Vec::with_capacity(bounds.len());
        let mut previous = f64::INFINITY;
        for &bound in bounds {
            let k_max = (grid.n() as i32 / 4).max(1);
            let base = InitialCondition::Random {
                k_max,
                norm: 1.0,
                decay: 1.5,
            }
            .build(spec, grid, seed)?;
            let h1 = base.monitored()?.sobolev_norm(1)?;
            let lambda = bound / h1;
            let state = SystemState {
                t: 0.0,
                u: base.u.scale(lambda),
                b: base.b.map(|b| b.scale(lambda)),
                theta: base.theta.map(|t| t.scale(lambda)),
            };
            let steps = (max_span / dt).round() as usize;
            let traj = simulate_with(
                spec,
                &state,
                &SimulateOptions {
                    t_end: steps as f64 * dt,
                    dt,
                    sample_every: 1,
                    norms: NormRequest::default(),
                },
            )?;
            let mut span = traj.span();
            for s in &traj.samples {
                if s.norms.h1 > 2.0 * bound || !s.norms.h1.is_finite() {
                    span = s.t;
                    break;
                }
            }
            if let Some(g) = &traj.guard {
                span = span.min(g.t);
            }
            let span = span.min(previous).max(dt);
            previous = span;
            entries.push((bound, span));
        }
        Ok(Self {
            system: spec.kind,
            entries,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionPlan {
    pub t_star: f64,
    pub t_star_star: f64,
    pub local_span: f64,
    pub sample_every: usize,
    /// Encoded state at `T_**`, filled once the restart point is reached.
    #[serde(skip)]
    pub checkpoint: Option<Vec<u8>>,
}

fn snap_up(x: f64, dt: f64) -> f64 {
    let k = (x / dt - 1e-9).ceil();
    k * dt
}

impl ExtensionPlan {
    pub fn new(t_star: f64, t_star_star: f64, local_span: f64, sample_every: usize) -> Result<Self> {
        let plan = Self {
            t_star,
            t_star_star,
            local_span,
            sample_every,
            checkpoint: None,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// `𝒯` from the table; see [`ExtensionPlan::with_span`].
    pub fn from_table(
        t_star: f64,
        h1_bound: f64,
        table: &LocalSpanTable,
        dt: f64,
        sample_every: usize,
    ) -> Result<Self> {
        Self::with_span(t_star, table.lookup(h1_bound), dt, sample_every)
    }

    /// `T_** = T_* − 2𝒯/3`, with `𝒯` and `T_**` snapped up to the step grid
    /// of `dt`. When `2𝒯/3 ≥ T_*` the restart is placed at `T_*/3`.
    pub fn with_span(t_star: f64, span: f64, dt: f64, sample_every: usize) -> Result<Self> {
        let span = snap_up(span, dt);
        let mut restart = t_star - 2.0 * span / 3.0;
        if restart <= 0.0 {
            restart = t_star / 3.0;
        }
        let restart = snap_up(restart, dt);
        Self::new(t_star, restart, span, sample_every)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.t_star_star && self.t_star_star < self.t_star && self.t_star < self.t_star_star + self.local_span) {
            return Err(Error::Parameter(format!(
                "need 0 < T** < T* < T** + span, got T** = {}, T* = {}, span = {}",
                self.t_star_star, self.t_star, self.local_span
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Parameter("sample_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Move `T_**` onto one of `times`: the latest not after the current value,
    /// or failing that the earliest that keeps `T_* < T_** + 𝒯`.
    pub fn snapped_to(&self, times: &[f64]) -> Result<Self> {
        let tol = 1e-9 * self.t_star.abs().max(1.0);
        let ok = |t: f64| t > 0.0 && t < self.t_star && self.t_star < t + self.local_span;
        let pick = times
            .iter()
            .rev()
            .find(|&&t| t <= self.t_star_star + tol && ok(t))
            .or_else(|| times.iter().find(|&&t| ok(t)))
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "no sample time in (max(0, T* - span), T*) with T* = {}, span = {}",
                    self.t_star, self.local_span
                ))
            })?;
        let mut plan = self.clone();
        plan.t_star_star = *pick;
        Ok(plan)
    }

    pub fn end(&self) -> f64 {
        self.t_star_star + self.local_span
    }
}

fn run(spec: &SystemSpec, state: &SystemState, length: f64, dt: f64, every: usize, norms: &NormRequest) -> Result<Trajectory> {
    simulate_with(
        spec,
        state,
        &SimulateOptions {
            t_end: length,
            dt,
            sample_every: every,
            norms: norms.clone(),
        },
    )
}

/// Restart from encoded bytes and integrate for `length`.
pub fn restart_from_checkpoint(
    spec: &SystemSpec,
    bytes: &[u8],
    length: f64,
    dt: f64,
    sample_every: usize,
    norms: &NormRequest,
) -> Result<Trajectory> {
    let cp = read_checkpoint(bytes)?;
    if cp.kind != spec.kind {
        return Err(Error::Checkpoint(format!(
            "checkpoint holds a {} state, system is {}",
            cp.kind, spec.kind
        )));
    }
    run(spec, &cp.state, length, dt, sample_every, norms)
}

fn join(first: &Trajectory, second: &Trajectory) -> Trajectory {
    let cut = second.samples.first().map_or(f64::INFINITY, |s| s.t);
    let mut samples: Vec<_> = first
        .samples
        .iter()
        .filter(|s| s.t < cut - 1e-12)
        .cloned()
        .collect();
    samples.extend(second.samples.iter().cloned());
    Trajectory {
        spec: first.spec.clone(),
        dt: first.dt,
        samples,
        guard: second.guard.clone().or_else(|| first.guard.clone()),
    }
}

/// Largest relative `L²` difference between samples of `a` and `b` at shared times.
pub fn max_deviation(a: &Trajectory, b: &Trajectory, tol: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in &a.samples {
        if let Some(o) = b.sample_at(s.t, tol) {
            worst = worst.max(s.state.relative_difference(&o.state)?);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct JointRun {
    pub joined: Trajectory,
    pub direct: Trajectory,
    pub max_deviation: f64,
    pub plan: ExtensionPlan,
}

/// Run `0 → T_**`, checkpoint, restart `T_** → T_** + 𝒯`, and compare with a
/// direct run over the whole span.
pub fn joint_run(
    spec: &SystemSpec,
    initial: &SystemState,
    plan: &ExtensionPlan,
    dt: f64,
    seed: u64,
    norms: &NormRequest,
) -> Result<JointRun> {
    plan.validate()?;
    let every = plan.sample_every;
    let first = run(spec, initial, plan.t_star_star - initial.t, dt, every, norms)?;
    let restart_state = &first.last()?.state;
    let bytes = write_checkpoint(spec.kind, restart_state, seed)?;
    let second = restart_from_checkpoint(spec, &bytes, plan.local_span, dt, every, norms)?;
    let direct = run(spec, initial, plan.end() - initial.t, dt, every, norms)?;
    let joined = join(&first, &second);
    let max_deviation = max_deviation(&joined, &direct, 0.5 * dt)?;
    let mut plan = plan.clone();
    plan.checkpoint = Some(bytes);
    Ok(JointRun {
        joined,
        direct,
        max_deviation,
        plan,
    })
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub trajectory: Trajectory,
    /// The a priori bound on `(0, T_*)` that licensed the restart.
    pub a_priori: APrioriBound,
    pub verdict: Verdict,
    /// Largest relative norm jump between the stored and restarted runs at `T_**`.
    pub join_jump: f64,
    /// Largest relative state difference on `[T_**, T_*]` between the two runs.
    pub overlap_deviation: f64,
    pub plan: ExtensionPlan,
}

/// Refuse unless the monitor verdict is criterion-finite.
pub fn check_extendable(report: &MonitorReport) -> Result<()> {
    match report.verdict {
        Verdict::CriterionFinite => Ok(()),
        Verdict::GuardTripped => {
            let reason = report
                .guard
                .as_ref()
                .map_or_else(|| "unknown guard".to_string(), |g| g.reason.clone());
            Err(Error::ExtensionRefused(format!(
                "the run tripped a guard ({reason}); no a priori bound is available"
            )))
        }
        Verdict::CriterionDiverging => Err(Error::ExtensionRefused(
            "the criterion integral diverges on (0, T*)".into(),
        )),
    }
}

/// Continue `traj` (which ends at `T_*`) past `T_*`, provided the monitor
/// verdict on it was criterion-finite.
pub fn extend_beyond(
    spec: &SystemSpec,
    traj: &Trajectory,
    report: &MonitorReport,
    plan: &ExtensionPlan,
    seed: u64,
) -> Result<Extension> {
    check_extendable(report)?;
    plan.validate()?;
    let dt = traj.dt;
    let restart = traj
        .sample_at(plan.t_star_star, 0.5 * dt)
        .ok_or_else(|| {
            Error::MissingData(format!("no stored sample at T** = {}", plan.t_star_star))
        })?;
    let bytes = write_checkpoint(spec.kind, &restart.state, seed)?;
    let norms = NormRequest {
        besov: restart.norms.besov.iter().map(|b| b.params).collect(),
        h3: restart.norms.h3.is_some(),
    };
    let second = restart_from_checkpoint(spec, &bytes, plan.local_span, dt, plan.sample_every, &norms)?;
    let head = second.first()?;
    let rel = |a: f64, b: f64| if a == 0.0 && b == 0.0 { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    let join_jump = [
        rel(head.norms.l2, restart.norms.l2),
        rel(head.norms.h1, restart.norms.h1),
        rel(head.norms.h2, restart.norms.h2),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let overlap_deviation = max_deviation(&second, traj, 0.5 * dt)?;
    let mut plan = plan.clone();
    plan.checkpoint = Some(bytes);
    Ok(Extension {
        trajectory: join(traj, &second),
        a_priori: report.a_priori,
        verdict: report.verdict,
        join_jump,
        overlap_deviation,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lookup_is_monotone() {
        let t = LocalSpanTable::default_for(SystemKind::Nse);
        let mut prev = f64::INFINITY;
        for h in [0.5, 1.0, 5.0, 50.0, 500.0, 5000.0, 1e5] {
            let s = t.lookup(h);
            assert!(s <= prev && s > 0.0);
            prev = s;
        }
    }

    #[test]
    fn plan_invariants() {
        assert!(ExtensionPlan::new(1.0, 0.5, 0.6, 1).is_ok());
        assert!(ExtensionPlan::new(1.0, 0.5, 0.5, 1).is_err());
        assert!(ExtensionPlan::new(1.0, 1.2, 0.5, 1).is_err());
        assert!(ExtensionPlan::new(1.0, 0.0, 2.0, 1).is_err());
        let table = LocalSpanTable::default_for(SystemKind::Nse);
        let p = ExtensionPlan::from_table(3.0, 5.0, &table, 0.01, 5).unwrap();
        assert!((p.local_span - 1.0).abs() < 1e-12);
        assert!((p.t_star_star - (3.0 - 2.0 / 3.0)).abs() < 0.01 + 1e-12);
        let short = ExtensionPlan::from_table(0.5, 5.0, &table, 0.01, 5).unwrap();
        assert!(short.t_star_star > 0.0 && short.end() > 0.5);
    }

    #[test]
    fn snapping_prefers_earlier_sample() {
        let plan = ExtensionPlan::new(1.0, 0.63, 0.6, 1).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let s = plan.snapped_to(&times).unwrap();
        assert!((s.t_star_star - 0.6).abs() < 1e-12);
        let tight = ExtensionPlan::new(1.0, 0.45, 0.56, 1).unwrap();
        assert!((tight.snapped_to(&times).unwrap().t_star_star - 0.5).abs() < 1e-12);
        assert!(ExtensionPlan::new(1.0, 0.95, 0.06, 1).unwrap().snapped_to(&times).is_err());
    }
}
