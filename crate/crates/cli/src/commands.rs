use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use besovflow::extension::{check_extendable, extend_beyond, ExtensionPlan, LocalSpanTable};
use besovflow::monitor::{csv_table, run_monitors, MonitorReport, Verdict, REPORT_SCHEMA_VERSION};
use besovflow::systems::simulate_with;
use besovflow::systems::SimulateOptions;
use besovflow::verify::{run_suite, Suite, SuiteReport};
use besovflow::{CutoffPair, Error};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::store::{load_trajectory, norms_csv, write_json, write_trajectory};

/// Result of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// An invariant failed; reports were still written.
    Violation,
}

pub struct RunContext<'a> {
    pub config: &'a RunConfig,
    pub hash: String,
    pub out: &'a Path,
}

impl RunContext<'_> {
    fn comment(&self) -> String {
        format!("config_hash={}, seed={}", self.hash, self.config.seed)
    }

    fn write_csv(&self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    fn write_report<T: Serialize>(&self, name: &str, command: &str, extra: serde_json::Value, report: &T) -> Result<()> {
        let mut value = json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": command,
            "config_hash": self.hash,
            "seed": self.config.seed,
        });
        if let (Some(obj), serde_json::Value::Object(more)) = (value.as_object_mut(), extra) {
            obj.extend(more);
        }
        value["report"] = serde_json::to_value(report)?;
        write_json(&self.out.join(name), &value)
    }
}

pub fn verify(ctx: &RunContext<'_>, suite: Suite) -> Result<Outcome> {
    let report: SuiteReport = run_suite(suite, &ctx.config.verify_config())?;
    let mut names: Vec<&str> = Vec::new();
    for c in &report.checks {
        if !names.contains(&c.name.as_str()) {
            names.push(&c.name);
        }
    }
    let summary: Vec<serde_json::Value> = names
        .iter()
        .map(|name| {
            let limit = report.checks.iter().find(|c| c.name == *name).map(|c| c.limit);
            json!({ "check": name, "worst": report.worst(name), "limit": limit })
        })
        .collect();
    let body = json!({
        "suite": suite,
        "passed": report.passed,
        "corpus_size": report.corpus_size,
        "checks": report.checks.len(),
        "violations": report.violations,
        "summary": summary,
    });
    ctx.write_report(&format!("verify_{suite}.json"), "verify", json!({}), &body)?;
    ctx.write_csv(&format!("verify_{suite}.csv"), &report.csv(Some(&ctx.comment())))?;
    println!("verify {suite}: {} checks, {} violations", report.checks.len(), report.violations.len());
    for v in &report.violations {
        println!("  violation: {v}");
    }
    Ok(if report.passed { Outcome::Ok } else { Outcome::Violation })
}

pub fn simulate(ctx: &RunContext<'_>) -> Result<Outcome> {
    let cfg = ctx.config;
    cfg.validate()?;
    let spec = cfg.system_spec()?;
    let grid = cfg.grid()?;
    let initial = cfg.initial_condition().build(&spec, &grid, cfg.seed)?;
    let request = cfg.norm_request(cfg.d)?;
    let traj = simulate_with(
        &spec,
        &initial,
        &SimulateOptions {
            t_end: cfg.t_end,
            dt: cfg.dt,
            sample_every: cfg.sample_every,
            norms: request.clone(),
        },
    )?;
    write_trajectory(ctx.out, &traj, &request, &ctx.hash, cfg.seed)?;
    ctx.write_csv("norms.csv", &norms_csv(&traj, &ctx.comment()))?;
    let resolved = format!("# {}\n{}", ctx.comment(), cfg.to_toml());
    fs::write(ctx.out.join("config.toml"), &resolved)?;
    print!("{resolved}");
    println!(
        "simulate: {} samples to t = {}{}",
        traj.samples.len(),
        traj.last()?.t,
        traj.guard.as_ref().map_or(String::new(), |g| format!(" (stopped: {})", g.reason))
    );
    Ok(Outcome::Ok)
}

fn monitor_csvs(ctx: &RunContext<'_>, report: &MonitorReport) -> Result<()> {
    let comment = ctx.comment();
    if let Some(first) = report.residuals.first() {
        let mut cols: Vec<(&str, &[f64])> = vec![("t", &first.t)];
        for r in &report.residuals {
            if r.t.len() == first.t.len() {
                cols.push((r.hypothesis.label(), &r.residual));
            }
        }
        ctx.write_csv("residuals.csv", &csv_table(Some(&comment), &cols))?;
    }
    for c in &report.criteria {
        let label = c.integral.criterion.label();
        let norm_name = c.integral.criterion.besov_params().label();
        let mut cols: Vec<(&str, &[f64])> = vec![
            ("t", &c.integral.t),
            (&norm_name, &c.integral.norm),
            ("criterion_integral", &c.integral.cumulative),
        ];
        if let Some(g) = &c.gronwall {
            cols.push(("gronwall_I", &g.integrand));
            cols.push(("gronwall_bound", &g.bound));
            cols.push(("grad_u_L2_sq_sup_plus_dissipation", &g.observed));
        }
        ctx.write_csv(&format!("criterion_{label}.csv"), &csv_table(Some(&comment), &cols))?;
    }
    if let Some(e) = &report.endpoint {
        let s = &e.state;
        let cols: Vec<(&str, &[f64])> = vec![("t", &s.t), ("f1", &s.f1), ("f2", &s.f2), ("F1", &s.big_f1), ("F2", &s.big_f2)];
        ctx.write_csv("endpoint.csv", &csv_table(Some(&comment), &cols))?;
    }
    Ok(())
}

pub fn monitor(ctx: &RunContext<'_>, trajectory: &Path) -> Result<Outcome> {
    let (manifest, traj) = load_trajectory(trajectory)?;
    let grid = traj.first()?.state.grid().clone();
    let mconfig = ctx.config.monitor_config(&grid)?;
    let report = run_monitors(&traj, &manifest.system, &mconfig, &CutoffPair::new(&grid))?;
    ctx.write_report(
        "monitor_report.json",
        "monitor",
        json!({ "source_config_hash": manifest.config_hash }),
        &report,
    )?;
    monitor_csvs(ctx, &report)?;
    for r in &report.residuals {
        println!("{}: max {:e} ({})", r.hypothesis.label(), r.max, if r.passed { "ok" } else { "VIOLATED" });
    }
    for c in &report.criteria {
        println!(
            "{}: integral {:e}, verdict {:?}{}",
            c.integral.criterion.label(),
            c.integral.value,
            c.verdict,
            c.gronwall.as_ref().map_or(String::new(), |g| format!(", gronwall C = {:e}, crossings {}", g.constant, g.crossings.len()))
        );
    }
    if let Some(e) = &report.endpoint {
        println!(
            "endpoint: delta {:e}, grad L4 integral {:e} <= {:e}: {}, bounded: {}",
            e.window.delta, e.grad_l4_integral, e.ladyzhenskaya_bound, e.ladyzhenskaya_holds, e.bounded
        );
    }
    println!("verdict: {:?}", report.verdict);
    Ok(if report.all_passed() { Outcome::Ok } else { Outcome::Violation })
}

/// Largest norm jump across the join accepted as continuous.
const JOIN_TOLERANCE: f64 = 1e-8;

pub fn extend(ctx: &RunContext<'_>, trajectory: &Path) -> Result<Outcome> {
    let cfg = ctx.config;
    let (manifest, full) = load_trajectory(trajectory)?;
    let t_star = cfg.t_star.unwrap_or(full.last()?.t);
    let traj = full.truncated(t_star);
    let grid = traj.first()?.state.grid().clone();
    let spec = &manifest.system;
    let report = run_monitors(&traj, spec, &cfg.monitor_config(&grid)?, &CutoffPair::new(&grid))?;

    let refuse = |reason: String| -> Result<Outcome> {
        let body = json!({
            "status": "refused",
            "reason": reason,
            "verdict": report.verdict,
            "guard": report.guard,
            "t_star": t_star,
        });
        ctx.write_report("extension.json", "extend", json!({ "source_config_hash": manifest.config_hash }), &body)?;
        println!("extend: refused: {reason}");
        Ok(Outcome::Violation)
    };
    if let Err(e) = check_extendable(&report) {
        return refuse(e.to_string());
    }

    let h1_bound = report.a_priori.sup_h1_sq.sqrt();
    let span = cfg
        .local_span
        .unwrap_or_else(|| LocalSpanTable::default_for(spec.kind).lookup(h1_bound));
    let plan = ExtensionPlan::with_span(t_star, span, traj.dt, cfg.sample_every)?.snapped_to(&traj.times())?;
    let ext = match extend_beyond(spec, &traj, &report, &plan, cfg.seed) {
        Ok(ext) => ext,
        Err(Error::ExtensionRefused(reason)) => return refuse(reason),
        Err(e) => return Err(e.into()),
    };
    let dir = ctx.out.join("extended");
    write_trajectory(&dir, &ext.trajectory, &manifest.norm_request, &ctx.hash, cfg.seed)?;
    ctx.write_csv("extended_norms.csv", &norms_csv(&ext.trajectory, &ctx.comment()))?;
    let continuous = ext.join_jump <= JOIN_TOLERANCE;
    let body = json!({
        "status": "extended",
        "verdict": ext.verdict,
        "t_star": plan.t_star,
        "t_star_star": plan.t_star_star,
        "local_span": plan.local_span,
        "t_end": ext.trajectory.last()?.t,
        "h1_bound": h1_bound,
        "a_priori": ext.a_priori,
        "join_jump": ext.join_jump,
        "overlap_deviation": ext.overlap_deviation,
        "continuous": continuous,
    });
    ctx.write_report("extension.json", "extend", json!({ "source_config_hash": manifest.config_hash }), &body)?;
    println!(
        "extend: restarted at T** = {} with span {}, now at t = {}; join jump {:e}",
        plan.t_star_star,
        plan.local_span,
        ext.trajectory.last()?.t,
        ext.join_jump
    );
    Ok(if continuous && ext.verdict == Verdict::CriterionFinite { Outcome::Ok } else { Outcome::Violation })
}
