use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn lorentz(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorentz"))
        .args(args)
        .current_dir(dir)
        .env_remove("LORENTZ_SEED")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_minkowski_default_runs_to_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = lorentz(&["simulate", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["termination"]["verdict"], "BudgetExhausted");
    assert!(summary["zeta"].is_null());
    let csv = std::fs::read_to_string(dir.path().join("run/trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("s,chart,x0,x1,x2,x3,e00,e01") && header.ends_with(",e33,defect"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 1001);
}

#[test]
fn simulate_schwarzschild_interior_explodes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "in.toml",
        r#"
[spacetime]
id = "schwarzschild"
params = { M = 1.0 }

[frame]
coords = [0.0, 1.5, 1.5707963267948966, 0.0]
preset = "reference"

[diffusion]
sigma = 1.0
ds = 0.01
s_max = 10.0
seed = 3

[diffusion.explosion]
curvature_bound = 1e30
"#,
    );
    let out = lorentz(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s = json(&out);
    assert_eq!(s["termination"]["verdict"], "Exploded");
    assert_eq!(s["termination"]["reason"], "ChartExit");
    assert!(s["zeta"].as_f64().unwrap() <= std::f64::consts::PI);
}

#[test]
fn invalid_sigma_exits_2_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[spacetime]\nid = \"minkowski\"\n\n[diffusion]\nsigma = -1.0\n");
    let out = lorentz(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("diffusion.sigma") && err.contains("line 5"), "{err}");
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[spacetime]\nid = \"minkowski\"\n\n[diffusion]\nsgima = 1.0\n");
    let out = lorentz(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sgima"));
}

const ESTIMATE: &str = "[spacetime]\nid = \"minkowski\"\n[diffusion]\ns_max = 5.0\nds = 0.05\n[experiment]\nn_paths = 100\n";

#[test]
fn estimate_minkowski_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "est.toml", ESTIMATE);
    let a = lorentz(&["estimate", "--config", &cfg, "--seed", "9"], dir.path());
    let b = lorentz(&["estimate", "--config", &cfg, "--seed", "9", "--threads", "3"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(json(&a)["n_exploded"], 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stderr(&a).contains("estimate:"));
}

#[test]
fn seed_environment_variable_is_honoured_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "est.toml", ESTIMATE);
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_lorentz"));
        c.args(["estimate", "--config", &cfg]).current_dir(dir.path()).env_remove("LORENTZ_SEED");
        if let Some(e) = env {
            c.env("LORENTZ_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        json(&c.output().unwrap())["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 0);
    assert_eq!(run(Some("42"), None), 42);
    assert_eq!(run(Some("42"), Some("7")), 7);
}

#[test]
fn estimate_zero_paths_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.toml", "[spacetime]\nid = \"minkowski\"\n[experiment]\nn_paths = 0\n");
    let out = lorentz(&["estimate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("experiment.n_paths"));
}

#[test]
fn check_thm8_on_minkowski_is_violated_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = lorentz(&["check", "thm8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["verdict"], "violated");
    assert!(!r["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn check_thm12_window_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "w.toml",
        "[spacetime]\nid = \"einstein_de_sitter\"\n[diffusion]\nsigma = 0.8\n[experiment]\nalpha = 0.5\nc = 1.0\nc_prime = 0.75\n",
    );
    let out = lorentz(&["check", "thm12", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    let window = r["conditions"].as_array().unwrap().iter().find(|c| c["name"] == "sigma_window").unwrap();
    assert_eq!(window["verdict"], "satisfied");
    let low = r["constants"]["sigma_window_low"].as_f64().unwrap();
    let high = r["constants"]["sigma_window_high"].as_f64().unwrap();
    assert!((low - 0.5f64.sqrt()).abs() < 1e-15 && (high - 0.75f64.sqrt()).abs() < 1e-15);
}

#[test]
fn check_unknown_theorem_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lorentz(&["check", "thm99"], dir.path()).status.code(), Some(2));
    assert_eq!(lorentz(&["check"], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_schwarzschild_only_passes_tightly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", "[spacetime]\nid = \"minkowski\"\n[experiment]\nverify_spacetimes = [\"schwarzschild\"]\n");
    let out = lorentz(&["verify", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    for e in r["entries"].as_array().unwrap() {
        assert!(e["max_residual"].as_f64().unwrap() < 1e-8, "{e}");
    }
}

#[test]
fn verify_with_zero_tolerance_lists_every_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        "[spacetime]\nid = \"minkowski\"\n[experiment]\nverify_spacetimes = [\"schwarzschild\", \"de_sitter\"]\ntolerance = 0.0\n",
    );
    let out = lorentz(&["verify", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    let n = r["entries"].as_array().unwrap().len();
    assert_eq!(r["failures"].as_array().unwrap().len(), n);
    assert_eq!(stderr(&out).matches("FAIL ").count(), n);
}

#[test]
fn verify_full_catalog_fails_only_on_divergent_potentials() {
    // the U construction diverges on the expanding spacetimes, so this
    // sweep reports those entries as failures
    let dir = tempfile::tempdir().unwrap();
    let out = lorentz(&["verify"], dir.path());
    let r = json(&out);
    let failing: Vec<String> = r["failures"].as_array().unwrap().iter().map(|f| f.as_str().unwrap().to_string()).collect();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(failing.len(), 2, "{failing:?}");
    assert!(failing[0].starts_with("einstein_de_sitter/poisson: fiber integral diverges"));
    assert!(failing[1].starts_with("de_sitter/poisson: fiber integral diverges"));
}

#[test]
fn tube_and_moments_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "[spacetime]\nid = \"minkowski\"\n[diffusion]\nsigma = 0.3\ns_max = 2.0\n[experiment]\nn_paths = 50\ntimes = [0.0, 1.0, 2.0]\n",
    );
    let out = lorentz(&["tube", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let t: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/tube.json")).unwrap()).unwrap();
    assert!(t["n_far_cap"].as_u64().unwrap() > 0);

    let out = lorentz(&["moments", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("o/moments.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,mean,se,n_alive"));
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("o/moments.json").exists());
}

#[test]
fn tube_too_wide_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "[spacetime]\nid = \"schwarzschild\"\n[frame]\ncoords = [0.0, 3.0, 1.5707963267948966, 0.0]\npreset = \"static-observer\"\n[experiment]\nn_paths = 2\ntube_radius = 5.0\n",
    );
    let out = lorentz(&["tube", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn emitted_json_reparses_into_core_types() {
    use lorentz_core::fiber_analysis::CriterionReport;
    use lorentz_core::montecarlo::ExplosionReport;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "est.toml", ESTIMATE);
    let out = lorentz(&["estimate", "--config", &cfg], dir.path());
    let rep: ExplosionReport = serde_json::from_slice(&out.stdout).unwrap();
    let again = serde_json::to_string_pretty(&rep).unwrap() + "\n";
    assert_eq!(again.as_bytes(), &out.stdout[..]);
    let out = lorentz(&["check", "thm8"], dir.path());
    let rep: CriterionReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(serde_json::to_string_pretty(&rep).unwrap() + "\n", String::from_utf8(out.stdout).unwrap());
}
