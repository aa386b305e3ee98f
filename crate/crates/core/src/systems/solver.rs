//! Pseudospectral right-hand sides and classical RK4 time stepping.
//!
//! The evolving state is the set of Fourier coefficients; physical values are
//! rebuilt only to form products and at sample times, so a run restarted from
//! a sample's coefficients repeats the same arithmetic.

use rustfft::num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::field::{dealias_mask, SpectralField};
use crate::grid::{Direction, Grid};
use crate::littlewood_paley::CutoffPair;
use crate::trajectory::{GuardKind, GuardTrip, NormRequest, SampleNorms, Trajectory, TrajectorySample};

use super::{SystemKind, SystemSpec, SystemState};

/// Largest stable `dt·ν·max|ξ|²` for RK4 on the dealiased band.
const DIFFUSIVE_LIMIT: f64 = 2.5;

type Raw = Vec<Vec<Complex64>>;

struct Operators {
    grid: Grid,
    d: usize,
    len: usize,
    odd: Vec<[f64; 3]>,
    k2: Vec<f64>,
    mask: Vec<bool>,
}

impl Operators {
    fn new(grid: &Grid) -> Self {
        let len = grid.len();
        Self {
            grid: grid.clone(),
            d: grid.dim(),
            len,
            odd: (0..len).map(|i| grid.odd_wavevector(i)).collect(),
            k2: grid.norm2().iter().map(|&m| m as f64).collect(),
            mask: dealias_mask(grid),
        }
    }

    fn max_k2(&self) -> f64 {
        self.k2
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(k, _)| *k)
            .fold(0.0, f64::max)
    }

    fn inverse(&self, c: &[Complex64]) -> Vec<f64> {
        let mut buf = c.to_vec();
        self.grid.transform(&mut buf, Direction::Inverse);
        buf.into_iter().map(|z| z.re).collect()
    }

    fn forward_dealiased(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.grid.transform(&mut buf, Direction::Forward);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().zip(&self.mask).for_each(|(z, &keep)| {
            *z = if keep { *z * scale } else { Complex64::default() }
        });
        buf
    }

    fn gradient(&self, c: &[Complex64]) -> Vec<Vec<f64>> {
        (0..self.d)
            .map(|m| {
                let dc: Vec<Complex64> = c
                    .iter()
                    .zip(&self.odd)
                    .map(|(z, k)| z * Complex64::new(0.0, k[m]))
                    .collect();
                self.inverse(&dc)
            })
            .collect()
    }

    fn leray(&self, comps: &mut [Vec<Complex64>]) {
        for idx in 0..self.len {
            let k = &self.odd[idx];
            let k2: f64 = k[..self.d].iter().map(|x| x * x).sum();
            if k2 == 0.0 {
                continue;
            }
            let mut dot = Complex64::default();
            for m in 0..self.d {
                dot += comps[m][idx] * k[m];
            }
            let dot = dot / k2;
            for m in 0..self.d {
                comps[m][idx] -= dot * k[m];
            }
        }
    }

    fn dealias(&self, comps: &mut [Vec<Complex64>]) {
        for c in comps.iter_mut() {
            c.iter_mut().zip(&self.mask).for_each(|(z, &keep)| {
                if !keep {
                    *z = Complex64::default();
                }
            });
        }
    }
}

/// `Σ_m a_m ∂_m q` pointwise.
fn advect(a: &[Vec<f64>], grad_q: &[Vec<f64>]) -> Vec<f64> {
    let len = a[0].len();
    let mut out = vec![0.0; len];
    for (am, gm) in a.iter().zip(grad_q) {
        for i in 0..len {
            out[i] += am[i] * gm[i];
        }
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Right-hand side on raw coefficients; also returns `Σ_m max|u_m|` (plus the
/// same for `b`), the advective speed entering the CFL number.
fn rhs_raw(spec: &SystemSpec, ops: &Operators, y: &[Vec<Complex64>]) -> (Raw, f64) {
    let d = ops.d;
    let u_phys: Vec<Vec<f64>> = y[..d].iter().map(|c| ops.inverse(c)).collect();
    let grad_u: Vec<Vec<Vec<f64>>> = y[..d].iter().map(|c| ops.gradient(c)).collect();
    let mut speed: f64 = u_phys.iter().map(|v| max_abs(v)).sum();
    let mut out: Raw = Vec::with_capacity(y.len());
    match spec.kind {
        SystemKind::Nse => {
            for i in 0..d {
                out.push(ops.forward_dealiased(&advect(&u_phys, &grad_u[i])));
            }
        }
        SystemKind::Mhd => {
            let b_phys: Vec<Vec<f64>> = y[d..2 * d].iter().map(|c| ops.inverse(c)).collect();
            let grad_b: Vec<Vec<Vec<f64>>> = y[d..2 * d].iter().map(|c| ops.gradient(c)).collect();
            speed += b_phys.iter().map(|v| max_abs(v)).sum::<f64>();
            for i in 0..d {
                let mut v = advect(&u_phys, &grad_u[i]);
                let w = advect(&b_phys, &grad_b[i]);
                v.iter_mut().zip(&w).for_each(|(a, b)| *a -= b);
                out.push(ops.forward_dealiased(&v));
            }
            for i in 0..d {
                let mut v = advect(&u_phys, &grad_b[i]);
                let w = advect(&b_phys, &grad_u[i]);
                v.iter_mut().zip(&w).for_each(|(a, b)| *a -= b);
                out.push(ops.forward_dealiased(&v));
            }
        }
        SystemKind::Boussinesq => {
            let theta = ops.inverse(&y[d]);
            for i in 0..d {
                let mut v = advect(&u_phys, &grad_u[i]);
                if i == 1 {
                    v.iter_mut().zip(&theta).for_each(|(a, t)| *a -= t);
                }
                out.push(ops.forward_dealiased(&v));
            }
            let grad_t = ops.gradient(&y[d]);
            out.push(ops.forward_dealiased(&advect(&u_phys, &grad_t)));
        }
    }
    // Negate the transport terms and project the solenoidal ones.
    for c in out.iter_mut() {
        c.iter_mut().for_each(|z| *z = -*z);
    }
    ops.leray(&mut out[..d]);
    if spec.kind == SystemKind::Mhd {
        ops.leray(&mut out[d..2 * d]);
    }
    let second = spec.second_diffusivity();
    for (ci, c) in out.iter_mut().enumerate() {
        let visc = if ci < d { spec.nu } else { second };
        for ((z, yv), k2) in c.iter_mut().zip(&y[ci]).zip(&ops.k2) {
            *z -= yv * (visc * k2);
        }
    }
    (out, speed)
}

fn raw_of(state: &SystemState) -> Raw {
    let mut out = Vec::new();
    for (_, f) in state.fields() {
        for c in 0..f.components() {
            out.push(f.component_coeffs(c).to_vec());
        }
    }
    out
}

fn state_of(spec: &SystemSpec, grid: &Grid, t: f64, y: &Raw) -> Result<SystemState> {
    let d = spec.d;
    let build = |range: std::ops::Range<usize>| -> Result<SpectralField> {
        let comps = range.len();
        let coeffs: Vec<Complex64> = y[range].iter().flatten().cloned().collect();
        SpectralField::from_coeffs(grid, comps, coeffs)
    };
    let u = build(0..d)?.with_divergence_free(true);
    let (b, theta) = match spec.kind {
        SystemKind::Nse => (None, None),
        SystemKind::Mhd => (Some(build(d..2 * d)?.with_divergence_free(true)), None),
        SystemKind::Boussinesq => (None, Some(build(d..d + 1)?)),
    };
    Ok(SystemState { t, u, b, theta })
}

fn check_state(spec: &SystemSpec, state: &SystemState) -> Result<()> {
    spec.validate()?;
    if state.grid().dim() != spec.d {
        return Err(Error::DimensionMismatch(format!(
            "state is {}-dimensional, system is {}-dimensional",
            state.grid().dim(),
            spec.d
        )));
    }
    let comps: usize = state.fields().iter().map(|f| f.1.components()).sum();
    if comps != spec.kind.components(spec.d)
        || state.fields().len() != spec.kind.n_fields()
    {
        return Err(Error::DimensionMismatch(format!(
            "state does not match a {} system",
            spec.kind
        )));
    }
    Ok(())
}

/// Time derivative of the state; the returned state carries the current time.
pub fn rhs(spec: &SystemSpec, state: &SystemState) -> Result<SystemState> {
    check_state(spec, state)?;
    let ops = Operators::new(state.grid());
    let (out, _) = rhs_raw(spec, &ops, &raw_of(state));
    state_of(spec, state.grid(), state.t, &out)
}

/// `(advective, diffusive)` CFL numbers of a step of size `dt` from `state`.
pub fn cfl_numbers(spec: &SystemSpec, state: &SystemState, dt: f64) -> Result<(f64, f64)> {
    check_state(spec, state)?;
    let ops = Operators::new(state.grid());
    let (_, speed) = rhs_raw(spec, &ops, &raw_of(state));
    Ok((
        dt * speed / state.grid().spacing(),
        dt * spec.max_diffusivity() * ops.max_k2(),
    ))
}

fn axpy(y: &Raw, a: f64, k: &Raw) -> Raw {
    y.iter()
        .zip(k)
        .map(|(yc, kc)| yc.iter().zip(kc).map(|(p, q)| p + q * a).collect())
        .collect()
}

fn rk4(spec: &SystemSpec, ops: &Operators, y: &Raw, dt: f64) -> Result<Raw> {
    let (k1, speed) = rhs_raw(spec, ops, y);
    let adv = dt * speed / ops.grid.spacing();
    if adv > spec.cfl_limit {
        return Err(Error::CflViolation {
            kind: "advective",
            number: adv,
            limit: spec.cfl_limit,
        });
    }
    let diff = dt * spec.max_diffusivity() * ops.max_k2();
    if diff > DIFFUSIVE_LIMIT {
        return Err(Error::CflViolation {
            kind: "diffusive",
            number: diff,
            limit: DIFFUSIVE_LIMIT,
        });
    }
    let (k2, _) = rhs_raw(spec, ops, &axpy(y, 0.5 * dt, &k1));
    let (k3, _) = rhs_raw(spec, ops, &axpy(y, 0.5 * dt, &k2));
    let (k4, _) = rhs_raw(spec, ops, &axpy(y, dt, &k3));
    let w = dt / 6.0;
    Ok(y.iter()
        .enumerate()
        .map(|(c, yc)| {
            yc.iter()
                .enumerate()
                .map(|(i, v)| v + (k1[c][i] + (k2[c][i] + k3[c][i]) * 2.0 + k4[c][i]) * w)
                .collect()
        })
        .collect())
}

/// One RK4 step with dealiasing; fails on a CFL violation.
pub fn step(spec: &SystemSpec, state: &SystemState, dt: f64) -> Result<SystemState> {
    check_state(spec, state)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return param(format!("time step must be positive, got {dt}"));
    }
    let ops = Operators::new(state.grid());
    let mut y = raw_of(state);
    ops.dealias(&mut y);
    let next = rk4(spec, &ops, &y, dt)?;
    state_of(spec, state.grid(), state.t + dt, &next)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Steps between stored samples; the final step is always stored.
    pub sample_every: usize,
    pub norms: NormRequest,
}

/// Integrate from `initial.t` to `initial.t + t_end` (`t_end` is the run length).
pub fn simulate(
    spec: &SystemSpec,
    initial: &SystemState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    simulate_with(
        spec,
        initial,
        &SimulateOptions {
            t_end,
            dt,
            sample_every,
            norms: NormRequest {
                besov: Vec::new(),
                h3: true,
            },
        },
    )
}

pub fn simulate_with(
    spec: &SystemSpec,
    initial: &SystemState,
    opts: &SimulateOptions,
) -> Result<Trajectory> {
    check_state(spec, initial)?;
    let SimulateOptions {
        t_end,
        dt,
        sample_every,
        ..
    } = *opts;
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return param(format!("need dt > 0 and t_end >= 0, got dt={dt}, t_end={t_end}"));
    }
    if sample_every == 0 {
        return param("sample_every must be at least 1");
    }
    let steps_f = (t_end / dt).round();
    if (steps_f * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return param(format!("dt = {dt} does not divide the run length {t_end}"));
    }
    let steps = steps_f as u64;
    let grid = initial.grid().clone();
    let ops = Operators::new(&grid);
    let cutoffs = (!opts.norms.besov.is_empty()).then(|| CutoffPair::new(&grid));
    let t0 = initial.t;

    let mut y = raw_of(initial);
    ops.dealias(&mut y);
    let mut samples = Vec::new();
    let mut guard = None;

    let record = |k: u64, y: &Raw, samples: &mut Vec<TrajectorySample>| -> Result<Option<GuardTrip>> {
        let t = t0 + k as f64 * dt;
        let state = state_of(spec, &grid, t, y)?;
        let norms = SampleNorms::compute(&state, &opts.norms, cutoffs.as_ref())?;
        let largest = norms.largest();
        samples.push(TrajectorySample {
            t,
            step: k,
            state,
            norms,
        });
        if !(largest <= spec.overflow_guard) {
            return Ok(Some(GuardTrip {
                kind: GuardKind::Overflow,
                t,
                step: k,
                reason: format!("sample norm {largest:e} exceeds guard {:e}", spec.overflow_guard),
            }));
        }
        Ok(None)
    };

    if let Some(g) = record(0, &y, &mut samples)? {
        guard = Some(g);
    }
    let mut k = 0;
    while guard.is_none() && k < steps {
        let t = t0 + k as f64 * dt;
        match rk4(spec, &ops, &y, dt) {
            Ok(next) => y = next,
            Err(Error::CflViolation { kind, number, limit }) => {
                guard = Some(GuardTrip {
                    kind: GuardKind::Cfl,
                    t,
                    step: k,
                    reason: format!("{kind} CFL number {number:.4} exceeds {limit:.4}"),
                });
                break;
            }
            Err(e) => return Err(e),
        }
        k += 1;
        let energy: f64 = y.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
        let l2 = (grid.volume() * energy).sqrt();
        if !(l2 <= spec.overflow_guard) {
            guard = Some(GuardTrip {
                kind: GuardKind::Overflow,
                t: t0 + k as f64 * dt,
                step: k,
                reason: format!("L2 norm {l2:e} exceeds guard {:e}", spec.overflow_guard),
            });
            break;
        }
        if k % sample_every as u64 == 0 || k == steps {
            guard = record(k, &y, &mut samples)?;
        }
    }
    Ok(Trajectory {
        spec: spec.clone(),
        dt,
        samples,
        guard,
    })
}
