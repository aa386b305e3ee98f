use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use besovflow::systems::{read_checkpoint, taylor_green_exact};
use serde_json::Value;

fn besovflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besovflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("BESOVFLOW_SEED")
        .env_remove("BESOVFLOW_CONFIG")
        .env_remove("BESOVFLOW_OUT")
        .env_remove("BESOVFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn verify_lp_default_passes_and_tags_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = besovflow(&["verify", "lp", "--out", "v"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&tmp.path().join("v/verify_lp.json"));
    assert_eq!(report["report"]["passed"], true);
    assert_eq!(report["seed"], 42);
    let hash = report["config_hash"].as_str().unwrap().to_string();
    let csv = fs::read_to_string(tmp.path().join("v/verify_lp.csv")).unwrap();
    assert!(csv.starts_with(&format!("# config_hash={hash}, seed=42\n")));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = besovflow(&["verify", "spectral"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn inadmissible_lemma_exponent_fails_with_named_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "lemma22_p = 20.0\ncorpus_size = 4\n");
    let out = besovflow(&["verify", "lemmas", "--config", &cfg, "--out", "v"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("lemma22.admissibility"));
    let report = json(&tmp.path().join("v/verify_lemmas.json"));
    assert_eq!(report["report"]["passed"], false);
}

#[test]
fn empty_corpus_is_a_parameter_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "empty.toml", "corpus_size = 0\n");
    let out = besovflow(&["verify", "besov", "--config", &cfg], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus size"));
}

#[test]
fn malformed_config_is_a_structured_error() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(tmp.path(), "unknown.toml", "viscosity = 0.1\n");
    let out = besovflow(&["simulate", "--config", &unknown], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `viscosity`"));

    let preset = write_config(tmp.path(), "preset.toml", "initial = \"vortex_ring\"\n");
    assert_eq!(code(&besovflow(&["simulate", "--config", &preset], tmp.path())), 2);

    let excluded = write_config(tmp.path(), "excluded.toml", "criteria = [\"1,1,inf\"]\n");
    assert_eq!(code(&besovflow(&["simulate", "--config", &excluded], tmp.path())), 2);

    let missing = besovflow(&["simulate", "--config", "absent.toml"], tmp.path());
    assert_eq!(code(&missing), 2);
}

#[test]
fn simulate_monitor_extend_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&besovflow(&["simulate", "--out", "run"], dir)), 0);
    let manifest = json(&dir.join("run/manifest.json"));
    assert_eq!(manifest["samples"].as_array().unwrap().len(), 41);

    let out = besovflow(&["monitor", "--trajectory", "run", "--out", "mon"], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&dir.join("mon/monitor_report.json"));
    assert_eq!(report["report"]["verdict"], "criterion-finite");
    assert_eq!(report["source_config_hash"], manifest["config_hash"]);
    for name in ["residuals.csv", "endpoint.csv", "criterion_thm2_s0_pinf_q2.csv"] {
        let text = fs::read_to_string(dir.join("mon").join(name)).unwrap();
        assert!(text.starts_with("# config_hash="), "{name}");
    }

    let out = besovflow(&["extend", "--trajectory", "run", "--out", "ext"], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let ext = json(&dir.join("ext/extension.json"));
    assert_eq!(ext["report"]["status"], "extended");
    assert!(ext["report"]["join_jump"].as_f64().unwrap() <= 1e-8);
    assert!(ext["report"]["t_end"].as_f64().unwrap() > 2.0);
    assert!(dir.join("ext/extended/manifest.json").exists());

    // The extended run can itself be monitored.
    let out = besovflow(&["monitor", "--trajectory", "ext/extended", "--out", "mon2"], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn reruns_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "short.toml", "t_end = 0.5\n");
    for out in ["a", "b"] {
        assert_eq!(code(&besovflow(&["simulate", "--config", &cfg, "--out", out], dir)), 0);
        assert_eq!(code(&besovflow(&["monitor", "--config", &cfg, "--trajectory", out, "--out", &format!("{out}/mon")], dir)), 0);
    }
    for name in [
        "manifest.json",
        "norms.csv",
        "config.toml",
        "checkpoints/sample_000010.bsvk",
        "mon/monitor_report.json",
        "mon/residuals.csv",
    ] {
        let a = fs::read(dir.join("a").join(name)).unwrap();
        let b = fs::read(dir.join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs between reruns");
    }
}

#[test]
fn seed_override_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "short.toml", "t_end = 0.1\n");
    let out = Command::new(env!("CARGO_BIN_EXE_besovflow"))
        .args(["simulate", "--config", &cfg, "--out", "run"])
        .current_dir(dir)
        .env("BESOVFLOW_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(json(&dir.join("run/manifest.json"))["seed"], 7);
    let cp = read_checkpoint(&fs::read(dir.join("run/checkpoints/sample_000000.bsvk")).unwrap()).unwrap();
    assert_eq!(cp.seed, 7);
}

#[test]
fn taylor_green_preset_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(
        dir,
        "tg.toml",
        "initial = \"taylor_green\"\nnu = 0.1\nn = 32\ndt = 0.005\nt_end = 1.0\nsample_every = 50\nepsilon = 0.5\n",
    );
    assert_eq!(code(&besovflow(&["simulate", "--config", &cfg, "--out", "tg"], dir)), 0);
    let manifest = json(&dir.join("tg/manifest.json"));
    let last = manifest["samples"].as_array().unwrap().last().unwrap()["checkpoint"].as_str().unwrap().to_string();
    let cp = read_checkpoint(&fs::read(dir.join("tg").join(last)).unwrap()).unwrap();
    let exact = taylor_green_exact(cp.state.grid(), 1.0, 0.1, cp.state.t).unwrap();
    let err = cp.state.u.sub(&exact).unwrap().l2_spectral() / exact.l2_spectral();
    assert!((cp.state.t - 1.0).abs() < 1e-12);
    assert!(err < 1e-6, "relative error {err:e}");
    let out = besovflow(&["monitor", "--config", &cfg, "--trajectory", "tg", "--out", "mon"], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn zero_data_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "zero.toml", "initial = \"zero\"\nt_end = 0.2\nsample_every = 4\n");
    assert_eq!(code(&besovflow(&["simulate", "--config", &cfg, "--out", "z"], dir)), 0);
    let out = besovflow(&["monitor", "--config", &cfg, "--trajectory", "z", "--out", "m"], dir);
    assert_eq!(code(&out), 0, "{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
}

#[test]
fn guard_tripped_run_is_refused_extension() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "tight.toml", "cfl_limit = 1e-3\nepsilon = 1.0\n");
    assert_eq!(code(&besovflow(&["simulate", "--config", &cfg, "--out", "run"], dir)), 0);
    assert_eq!(json(&dir.join("run/manifest.json"))["guard"]["kind"], "cfl");
    let out = besovflow(&["extend", "--config", &cfg, "--trajectory", "run", "--out", "ext"], dir);
    assert_eq!(code(&out), 1);
    let ext = json(&dir.join("ext/extension.json"));
    assert_eq!(ext["report"]["status"], "refused");
    assert_eq!(ext["report"]["verdict"], "guard-tripped");
}

#[test]
fn corrupted_checkpoint_is_detected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = write_config(dir, "short.toml", "t_end = 0.1\n");
    assert_eq!(code(&besovflow(&["simulate", "--config", &cfg, "--out", "run"], dir)), 0);
    let path = dir.join("run/checkpoints/sample_000001.bsvk");
    let mut bytes = fs::read(&path).unwrap();
    bytes[100] ^= 0x01;
    fs::write(&path, bytes).unwrap();
    let out = besovflow(&["monitor", "--trajectory", "run", "--out", "m"], dir);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}
