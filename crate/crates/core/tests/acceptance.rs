//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! summary is always printed.

use std::time::Instant;

use besovflow::corpus::{band_limited_field, random_solenoidal, Spectrum};
use besovflow::extension::{extend_beyond, joint_run, ExtensionPlan};
use besovflow::inequalities::{exponent_relation, log_inequality_ratio, log_inequality_terms, Theorem};
use besovflow::monitor::{
    calibrate_ladyzhenskaya, energy_increase, find_smallness_window, run_monitors, CriterionSpec,
    MonitorConfig, MonitorReport, Verdict,
};
use besovflow::systems::{simulate, taylor_green, taylor_green_exact, InitialCondition, SystemSpec, SystemState};
use besovflow::trajectory::{NormRequest, Trajectory};
use besovflow::verify::{annulus_field, run_suite, Suite, VerifyConfig};
use besovflow::{
    bernstein_ratio, besov_norm, lp_block, Band, BesovParams, CutoffPair, DyadicDecomposition, Error, Grid,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn partition_of_unity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for d in [2, 3] {
        for n in [16, 32, 64] {
            worst = worst.max(CutoffPair::new(&Grid::new(d, n).unwrap()).partition_defect());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-12 && secs < 1.0,
        format!("max defect {worst:.2e} (< 1e-12), {secs:.3} s (< 1 s)"),
    )
}

fn reconstruction_and_orthogonality() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(2, 32).unwrap();
    let cutoffs = CutoffPair::new(&grid);
    let (mut recon, mut ortho) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let f = band_limited_field(&grid, 1, Spectrum::new(12), 2024, i).unwrap();
        let norm = f.l2_spectral();
        let dec = DyadicDecomposition::new(&f, &cutoffs).unwrap();
        recon = recon.max(dec.reconstruct().sub(&f).unwrap().l2_spectral() / norm);
        for (j, bj) in dec.iter() {
            for k in -1..=cutoffs.j_max() {
                if (j - k).abs() >= 2 {
                    ortho = ortho.max(lp_block(bj, k, &cutoffs).unwrap().l2_spectral() / norm);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        recon <= 1e-10 && ortho <= 1e-12 && secs < 10.0,
        format!("reconstruction {recon:.2e} (<= 1e-10), cross blocks {ortho:.2e} (<= 1e-12), {secs:.2} s (< 10 s)"),
    )
}

fn bernstein_stability() -> Outcome {
    let grid = Grid::new(2, 64).unwrap();
    let mut sups = Vec::new();
    for radius in [4.0, 8.0, 16.0] {
        let band = Band::Annulus {
            inner: radius / 2.0,
            outer: radius,
        };
        let sup = (0..100)
            .map(|i| {
                let f = annulus_field(&grid, radius, 11, i).unwrap();
                bernstein_ratio(&f, band, [1, 0, 0], 2.0, 2.0).unwrap().ratio.unwrap()
            })
            .fold(0.0, f64::max);
        sups.push(sup);
    }
    let spread = sups.iter().cloned().fold(0.0, f64::max) / sups.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        spread < 2.0,
        format!("sup ratios {:.3?} for R = 4, 8, 16, spread {spread:.3} (< 2)", sups),
    )
}

fn interpolation_lemmas() -> Outcome {
    let start = Instant::now();
    let report = run_suite(Suite::Lemmas, &VerifyConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let w = |name: &str| report.worst(name).unwrap_or(f64::NAN);
    outcome(
        report.passed && secs < 60.0,
        format!(
            "exponent sums off by {:.1e}/{:.1e}, homogeneity {:.1e}/{:.1e} (<= 1e-10), drift {:.2e}/{:.2e} (< 0.2), chain defect {:.2e}/{:.2e} (<= 0), sup ratio {:.3}/{:.3}, {secs:.1} s (< 60 s)",
            w("lemma22.exponent_sum"),
            w("lemma23.exponent_sum"),
            w("lemma22.homogeneity"),
            w("lemma23.homogeneity"),
            w("lemma22.refinement_drift"),
            w("lemma23.refinement_drift"),
            w("lemma22.chain"),
            w("lemma23.chain"),
            w("lemma22.sup_ratio"),
            w("lemma23.sup_ratio"),
        ),
    )
}

fn taylor_green_error(n: usize, nu: f64, dt: f64, t_end: f64) -> f64 {
    let grid = Grid::new(2, n).unwrap();
    let spec = SystemSpec::nse(2, nu);
    let u = taylor_green(&grid, 1.0).unwrap();
    let state = SystemState::new(&spec, 0.0, u, None, None).unwrap();
    let traj = simulate(&spec, &state, t_end, dt, usize::MAX).unwrap();
    let last = traj.last().unwrap();
    let exact = taylor_green_exact(&grid, 1.0, nu, last.t).unwrap();
    last.state.u.sub(&exact).unwrap().l2_spectral() / exact.l2_spectral()
}

fn taylor_green_regression() -> Outcome {
    let err = taylor_green_error(64, 0.1, 1e-3, 1.0);
    // At dt = 1e-3 the time error is at roundoff, so the order is measured
    // on larger steps where it dominates.
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| taylor_green_error(16, 0.1, dt, 1.0))
        .collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let ok = err < 1e-6 && ratios.iter().all(|r| (12.0..=20.0).contains(r));
    outcome(
        ok,
        format!(
            "error at t = 1 {err:.2e} (< 1e-6); halving ratios {:.2}, {:.2} (in [12, 20])",
            ratios[0], ratios[1]
        ),
    )
}

struct SeededRun {
    spec: SystemSpec,
    initial: SystemState,
    traj: Trajectory,
    cutoffs: CutoffPair,
    report: MonitorReport,
    criterion: CriterionSpec,
}

fn seeded_run() -> SeededRun {
    let grid = Grid::new(2, 32).unwrap();
    let spec = SystemSpec::nse(2, 0.05);
    let initial = InitialCondition::Random {
        k_max: 8,
        norm: 3.0,
        decay: 1.5,
    }
    .build(&spec, &grid, 42)
    .unwrap();
    let traj = simulate(&spec, &initial, 2.0, 0.01, 5).unwrap();
    let cutoffs = CutoffPair::new(&grid);
    let criterion = CriterionSpec::new(Theorem::Two, 0.0, f64::INFINITY, 2).unwrap();
    let calibration: Vec<_> = (0..50)
        .map(|i| random_solenoidal(&grid, Spectrum::new(8), 1.0, 7, i).unwrap())
        .collect();
    let config = MonitorConfig {
        criteria: vec![criterion],
        epsilon: Some(0.1),
        ladyzhenskaya: calibrate_ladyzhenskaya(&calibration).unwrap(),
        ..MonitorConfig::default()
    };
    let report = run_monitors(&traj, &spec, &config, &cutoffs).unwrap();
    SeededRun {
        spec,
        initial,
        traj,
        cutoffs,
        report,
        criterion,
    }
}

fn energy_residuals(run: &SeededRun) -> Outcome {
    let increase = energy_increase(&run.traj);
    let mut parts = vec![format!("largest relative energy increase {increase:.2e} (<= 1e-8)")];
    let mut ok = increase <= 1e-8;
    for r in &run.report.residuals {
        let scale = r.scale.iter().cloned().fold(1.0, f64::max);
        parts.push(format!("{} {:.2e} (<= {:.0e} x {:.2e})", r.hypothesis.label(), r.max, r.tolerance, scale));
        ok &= r.passed;
    }
    ok &= run.report.residuals.len() == 4;
    outcome(ok, parts.join(", "))
}

fn criterion_gronwall(run: &SeededRun) -> Outcome {
    let c = &run.report.criteria[0];
    let g = c.gronwall.as_ref().unwrap();
    let ok = c.integral.value.is_finite() && c.verdict == Verdict::CriterionFinite && g.respected;
    outcome(
        ok,
        format!(
            "{} integral {:.4}, verdict {:?}, Gronwall C = {:.3}, crossings {}",
            run.criterion.label(),
            c.integral.value,
            c.verdict,
            g.constant,
            g.crossings.len()
        ),
    )
}

fn endpoint_machinery(run: &SeededRun) -> Outcome {
    let epsilon = 0.1;
    let window = find_smallness_window(&run.traj, epsilon, &run.cutoffs).unwrap();

    // Oracle: recompute the B¹_{∞,∞} series and scan tails by explicit trapezoid sums.
    let t = run.traj.times();
    let norms: Vec<f64> = run
        .traj
        .samples
        .iter()
        .map(|s| besov_norm(&s.state.monitored().unwrap(), BesovParams::new(1.0, f64::INFINITY, f64::INFINITY), &run.cutoffs).unwrap())
        .collect();
    let tail = |k: usize| -> f64 { (k..t.len() - 1).map(|i| 0.5 * (t[i + 1] - t[i]) * (norms[i] + norms[i + 1])).sum() };
    let start = (0..t.len()).find(|&k| tail(k) <= epsilon).unwrap();
    let delta = t[t.len() - 1] - t[start];

    let e = run.report.endpoint.as_ref().unwrap();
    let grid = run.traj.first().unwrap().state.grid().clone();
    let c_log = (0..50)
        .map(|i| {
            let f = random_solenoidal(&grid, Spectrum::new(8), 1.0, 9, i).unwrap();
            let terms = log_inequality_terms(&f, &run.cutoffs).unwrap();
            log_inequality_ratio(terms.grad_linf, terms.besov1, terms.grad_lap_l2)
        })
        .fold(0.0, f64::max);
    let log_ratio = e.log_inequality.as_ref().map_or(f64::NAN, |l| l.ratio) / c_log;
    let ok = (window.delta - delta).abs() <= 1e-12
        && e.bounded
        && e.ladyzhenskaya_holds
        && log_ratio.is_finite()
        && log_ratio < 10.0;
    outcome(
        ok,
        format!(
            "delta {:.3} vs oracle {delta:.3}; F1, F2 bounded: {}; max F1 / F2^(1/6) = {:.3}, max F2 / F2^(1/2) = {:.3}; grad L4 integral {:.3} <= {:.3}; log-inequality ratio / C = {log_ratio:.3} (< 10, C = {c_log:.3})",
            window.delta, e.bounded, e.f1_bootstrap, e.f2_bootstrap, e.grad_l4_integral, e.ladyzhenskaya_bound
        ),
    )
}

fn extension_shadow(run: &SeededRun) -> Outcome {
    let plan = ExtensionPlan::new(1.0, 0.6, 0.6, 5).unwrap();
    let joint = joint_run(&run.spec, &run.initial, &plan, 0.01, 42, &NormRequest::default()).unwrap();

    let plan = ExtensionPlan::with_span(2.0, 0.6, 0.01, 5)
        .unwrap()
        .snapped_to(&run.traj.times())
        .unwrap();
    let ext = extend_beyond(&run.spec, &run.traj, &run.report, &plan, 42);
    let mut tripped = run.report.clone();
    tripped.verdict = Verdict::GuardTripped;
    let refused = matches!(
        extend_beyond(&run.spec, &run.traj, &tripped, &plan, 42),
        Err(Error::ExtensionRefused(_))
    );
    let (ext_ok, ext_detail) = match &ext {
        Ok(e) => (
            e.join_jump <= 1e-8 && e.overlap_deviation <= 1e-12,
            format!(
                "extended to t = {:.2} (join jump {:.1e}, overlap deviation {:.1e})",
                e.trajectory.last().unwrap().t,
                e.join_jump,
                e.overlap_deviation
            ),
        ),
        Err(err) => (false, format!("extension failed: {err}")),
    };
    outcome(
        joint.max_deviation <= 1e-12 && ext_ok && refused,
        format!(
            "joint-run deviation {:.1e} (<= 1e-12); {ext_detail}; guard-tripped verdict refused: {refused}",
            joint.max_deviation
        ),
    )
}

fn exponent_gate() -> Outcome {
    let serrin = exponent_relation(Theorem::Two, 0.0, 6.0, 3);
    let bkm = exponent_relation(Theorem::Two, 1.0, f64::INFINITY, 3);
    let excluded = exponent_relation(Theorem::One, 1.0, f64::INFINITY, 3);
    let ok = matches!(serrin, Ok(q) if (q - 4.0).abs() < 1e-12)
        && matches!(bkm, Ok(q) if (q - 1.0).abs() < 1e-12)
        && matches!(excluded, Err(Error::ExcludedEndpoint));
    outcome(
        ok,
        format!("(6, q, 0) -> {serrin:?}; (inf, q, 1) -> {bkm:?}; (inf, inf, -1) -> {:?}", excluded.err()),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "partition of unity", partition_of_unity()),
        (2, "reconstruction and block orthogonality", reconstruction_and_orthogonality()),
        (3, "Bernstein stability", bernstein_stability()),
        (4, "interpolation lemma suites", interpolation_lemmas()),
        (5, "Taylor-Green regression", taylor_green_regression()),
    ];
    let run = seeded_run();
    results.push((6, "energy hypothesis residuals", energy_residuals(&run)));
    results.push((7, "criterion and Gronwall bound", criterion_gronwall(&run)));
    results.push((8, "endpoint machinery", endpoint_machinery(&run)));
    results.push((9, "extension shadow", extension_shadow(&run)));
    results.push((10, "exponent gate", exponent_gate()));

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("criterion {id:>2} {}: {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
