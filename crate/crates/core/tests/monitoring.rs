use besovflow::extension::{extend_beyond, joint_run, restart_from_checkpoint, ExtensionPlan};
use besovflow::inequalities::Theorem;
use besovflow::monitor::{
    criterion_integral, gronwall_tracker, run_monitors, CriterionSpec, GronwallCalibration, MonitorConfig, Verdict,
};
use besovflow::systems::{simulate, write_checkpoint, InitialCondition, SystemSpec, SystemState};
use besovflow::trajectory::{NormRequest, Trajectory};
use besovflow::{besov_norm, CutoffPair, Error, Grid};

fn decaying_run() -> (SystemSpec, SystemState, Trajectory, CutoffPair) {
    let grid = Grid::new(2, 16).unwrap();
    let spec = SystemSpec::nse(2, 0.05);
    let initial = InitialCondition::Random {
        k_max: 4,
        norm: 2.0,
        decay: 1.5,
    }
    .build(&spec, &grid, 3)
    .unwrap();
    let traj = simulate(&spec, &initial, 1.0, 0.01, 5).unwrap();
    (spec, initial, traj, CutoffPair::new(&grid))
}

#[test]
fn criterion_integral_matches_direct_quadrature() {
    let (_, _, traj, cutoffs) = decaying_run();
    let crit = CriterionSpec::new(Theorem::One, 0.5, f64::INFINITY, 2).unwrap();
    assert!((crit.q - 4.0).abs() < 1e-12);
    let integral = criterion_integral(&traj, &crit, &cutoffs).unwrap();
    let t = traj.times();
    let v: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| besov_norm(&s.state.monitored().unwrap(), crit.besov_params(), &cutoffs).unwrap().powf(4.0))
        .collect();
    let direct: f64 = (0..t.len() - 1).map(|i| 0.5 * (t[i + 1] - t[i]) * (v[i] + v[i + 1])).sum();
    assert!((integral.value - direct).abs() <= 1e-12 * direct);
}

#[test]
fn gronwall_with_zero_constant_is_crossed() {
    // With C = 0 the positive-index bound is the initial value; dissipation alone exceeds it.
    let (spec, _, traj, cutoffs) = decaying_run();
    let crit = CriterionSpec::new(Theorem::Two, 0.0, f64::INFINITY, 2).unwrap();
    let fixed = gronwall_tracker(&traj, &crit, &spec, &cutoffs, GronwallCalibration::Fixed { constant: 0.0 }).unwrap();
    assert!(!fixed.respected);
    let calibrated = gronwall_tracker(&traj, &crit, &spec, &cutoffs, GronwallCalibration::FirstSample).unwrap();
    assert!(calibrated.respected);
    assert!(calibrated.constant > 0.0);
}

#[test]
fn infinite_q_criterion_tracks_running_sup() {
    let (_, _, traj, cutoffs) = decaying_run();
    let crit = CriterionSpec::new(Theorem::Two, 1.0, f64::INFINITY, 2).unwrap();
    assert_eq!(crit.q, 1.0);
    let hom = CriterionSpec {
        homogeneous: true,
        ..CriterionSpec::new(Theorem::Two, 0.5, 8.0, 2).unwrap()
    };
    assert!(criterion_integral(&traj, &hom, &cutoffs).unwrap().value.is_finite());
    let bad = CriterionSpec { q: 3.0, ..crit };
    assert!(criterion_integral(&traj, &bad, &cutoffs).is_err());
}

#[test]
fn monitor_report_serializes() {
    let (spec, _, traj, cutoffs) = decaying_run();
    let config = MonitorConfig {
        criteria: vec![CriterionSpec::new(Theorem::Two, 0.0, f64::INFINITY, 2).unwrap()],
        epsilon: Some(0.2),
        ladyzhenskaya: 1.0,
        ..MonitorConfig::default()
    };
    let report = run_monitors(&traj, &spec, &config, &cutoffs).unwrap();
    assert_eq!(report.verdict, Verdict::CriterionFinite);
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("\"criterion-finite\""));
    let back: besovflow::monitor::MonitorReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.samples, report.samples);
}

#[test]
fn joint_run_is_exact_for_every_system() {
    let grid = Grid::new(2, 16).unwrap();
    for spec in [SystemSpec::nse(2, 0.05), SystemSpec::mhd(2, 0.05, 0.07), SystemSpec::boussinesq(0.05, 0.07)] {
        let initial = InitialCondition::Random { k_max: 4, norm: 1.0, decay: 1.5 }.build(&spec, &grid, 12).unwrap();
        let plan = ExtensionPlan::new(0.3, 0.2, 0.2, 2).unwrap();
        let joint = joint_run(&spec, &initial, &plan, 0.01, 12, &NormRequest::default()).unwrap();
        assert_eq!(joint.max_deviation, 0.0, "{}", spec.kind);
        assert!(joint.plan.checkpoint.is_some());
        assert!((joint.joined.last().unwrap().t - 0.4).abs() < 1e-12);
    }
}

#[test]
fn corrupted_restart_is_rejected() {
    let (spec, initial, _, _) = decaying_run();
    let mut bytes = write_checkpoint(spec.kind, &initial, 3).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x80;
    let err = restart_from_checkpoint(&spec, &bytes, 0.1, 0.01, 1, &NormRequest::default()).unwrap_err();
    assert!(matches!(err, Error::ChecksumMismatch { .. }));

    let other = SystemSpec::mhd(2, 0.05, 0.05);
    let good = write_checkpoint(spec.kind, &initial, 3).unwrap();
    assert!(matches!(
        restart_from_checkpoint(&other, &good, 0.1, 0.01, 1, &NormRequest::default()),
        Err(Error::Checkpoint(_))
    ));
}

#[test]
fn extension_refuses_diverging_verdict() {
    let (spec, _, traj, cutoffs) = decaying_run();
    let config = MonitorConfig {
        criteria: vec![CriterionSpec::new(Theorem::Two, 0.0, f64::INFINITY, 2).unwrap()],
        ..MonitorConfig::default()
    };
    let mut report = run_monitors(&traj, &spec, &config, &cutoffs).unwrap();
    let plan = ExtensionPlan::with_span(1.0, 0.5, 0.01, 5).unwrap().snapped_to(&traj.times()).unwrap();
    let ext = extend_beyond(&spec, &traj, &report, &plan, 3).unwrap();
    assert_eq!(ext.join_jump, 0.0);
    assert_eq!(ext.a_priori, report.a_priori);
    report.verdict = Verdict::CriterionDiverging;
    assert!(matches!(extend_beyond(&spec, &traj, &report, &plan, 3), Err(Error::ExtensionRefused(_))));
}
