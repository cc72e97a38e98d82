use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multirabi_cli::{ConfigFile, RunConfig};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multirabi"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_record(o: &Output) -> Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.lines().last().expect("error record")).expect("JSON error record")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn three_level(g: f64, t_max: f64, samples: usize, solver: &str) -> String {
    format!(
        r#"
[levels]
energies = [0.0, 1.0, 2.5]

[drive]
g = {g}
adjacent = "resonant"

[run]
solver = "{solver}"
t_max = {t_max:e}
samples = {samples}
"#
    )
}

/// Parses a trajectory CSV into rows of numbers.
fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn spectrum_three_levels() {
    let o = run(&["spectrum", "--n", "3", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let l: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((l[0] - 2f64.sqrt()).abs() < 1e-15);
    assert!(l[1].abs() < 1e-15);
    assert!((l[2] + 2f64.sqrt()).abs() < 1e-15);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn spectrum_text_output() {
    let o = run(&["spectrum", "--n", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lambda: Vec<f64> = text
        .lines()
        .skip_while(|l| *l != "j,lambda")
        .skip(1)
        .take(2)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!((lambda[0] - 1.0).abs() < 1e-15 && (lambda[1] + 1.0).abs() < 1e-15);
    let residual: f64 = text
        .lines()
        .find(|l| l.starts_with("# max residual"))
        .and_then(|l| l.rsplit(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-12);
}

#[test]
fn spectrum_rejects_small_n() {
    let o = run(&["spectrum", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"], "config");
}

#[test]
fn exact_returns_to_ground_and_agrees_with_integrator() {
    let dir = TempDir::new().unwrap();
    let g = 0.1;
    let period = 2.0 * PI / (3.0 * g);
    let cfg = write_config(&dir, "c.toml", &three_level(g, period, 41, "exact"));
    let exact = run(&["evolve", p(&cfg)]);
    assert!(exact.status.success());
    let rows = csv_rows(&stdout(&exact));
    let last = rows.last().unwrap();
    assert!((last[7] - 1.0).abs() < 1e-12 && last[8] < 1e-12 && last[9] < 1e-12);

    let numeric = run(&["evolve", p(&cfg), "--solver", "numeric-rwa"]);
    assert!(numeric.status.success());
    for (a, b) in rows.iter().zip(csv_rows(&stdout(&numeric))) {
        for k in 7..10 {
            assert!((a[k] - b[k]).abs() < 1e-6);
        }
    }
}

#[test]
fn zero_coupling_keeps_populations() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &three_level(0.0, 30.0, 11, "exact"));
    for solver in ["exact", "dyson1", "dyson2", "numeric-rwa", "numeric-full"] {
        let o = run(&["evolve", p(&cfg), "--solver", solver, "--initial", "1"]);
        assert!(o.status.success(), "{solver}");
        // the integrators are exact only up to their tolerance
        let tol = if solver.starts_with("numeric") { 1e-8 } else { 1e-12 };
        for row in csv_rows(&stdout(&o)) {
            assert!((row[8] - 1.0).abs() < tol, "{solver}");
        }
    }
}

#[test]
fn full_drive_completes_with_small_drift() {
    let dir = TempDir::new().unwrap();
    let body = three_level(0.05, 50.0, 11, "numeric-full").replace("adjacent = \"resonant\"", "adjacent = \"resonant\"\nmode = \"full\"");
    let cfg = write_config(&dir, "c.toml", &body);
    let o = run(&["evolve", p(&cfg), "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["provenance"]["max_norm_drift"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["times"].as_array().unwrap().len(), 11);
}

#[test]
fn inconsistent_drive_is_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &three_level(0.1, 10.0, 5, "exact"));
    let o = run(&["evolve", p(&cfg), "--epsilon", "0.25"]);
    assert_eq!(o.status.code(), Some(3));
    let rec = error_record(&o);
    assert_eq!(rec["error"], "precondition");
    let v = &rec["details"]["violations"][0];
    assert_eq!((v["i"].as_u64(), v["j"].as_u64()), (Some(0), Some(2)));
    assert!((v["epsilon"].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let check = run(&["exact-check", p(&cfg), "--epsilon", "0.25"]);
    assert_eq!(check.status.code(), Some(3));
    let report: Value = serde_json::from_str(&stdout(&check)).unwrap();
    assert_eq!(report["consistent"], false);

    let ok = run(&["exact-check", p(&cfg)]);
    assert!(ok.status.success());
}

#[test]
fn off_resonance_is_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let body = three_level(0.1, 10.0, 5, "exact").replace("adjacent = \"resonant\"", "adjacent = [1.0, 1.4]");
    let cfg = write_config(&dir, "c.toml", &body);
    assert_eq!(run(&["evolve", p(&cfg)]).status.code(), Some(3));
    // the flag restores resonance
    assert!(run(&["evolve", p(&cfg), "--resonant"]).status.success());
    // the integrator has no resonance requirement
    assert!(run(&["evolve", p(&cfg), "--solver", "numeric-rwa"]).status.success());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &three_level(0.1, 10.0, 5, "exact"));
    assert_eq!(run(&["evolve", p(&cfg), "--samples", "1"]).status.code(), Some(2));
    let junk = write_config(&dir, "junk.toml", "[levels]\nenergies = [0.0]\n");
    let o = run(&["evolve", p(&junk)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["code"], 2);
    assert_eq!(run(&["evolve", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn overflowing_system_is_a_numeric_failure() {
    let dir = TempDir::new().unwrap();
    let body = "[levels]\nenergies = [0.0, 1e300]\n[drive]\ng = 1e300\n[run]\nsolver = \"numeric-rwa\"\nt_max = 1.0\nsamples = 2\n";
    let cfg = write_config(&dir, "c.toml", body);
    let o = run(&["evolve", p(&cfg)]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_record(&o)["error"], "numeric");
}

#[test]
fn compare_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &three_level(0.1, 100.0, 101, "exact"));
    let o = run(&["compare", p(&cfg), "--a", "exact", "--b", "numeric-rwa", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_population"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["rows"].as_array().unwrap().len(), 101);

    let same = run(&["compare", p(&cfg), "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&same)).unwrap();
    assert_eq!(v["max_amplitude"].as_f64(), Some(0.0));
    assert_eq!(v["max_population"].as_f64(), Some(0.0));
}

#[test]
fn first_order_error_scales_quadratically() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &three_level(0.02, 10.0, 201, "dyson1"));
    let dev = |g: &str| {
        let o = run(&["compare", p(&cfg), "--a", "dyson1", "--b", "numeric-rwa", "--epsilon", "0.5", "--g", g, "--format", "json"]);
        assert!(o.status.success());
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["max_amplitude"].as_f64().unwrap()
    };
    let ratio = dev("0.02") / dev("0.01");
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn csv_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &three_level(0.1, 30.0, 31, "numeric-rwa"));
    let a = run(&["evolve", p(&cfg), "--epsilon", "0.3"]);
    let b = run(&["evolve", p(&cfg), "--epsilon", "0.3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = dir.path().join("t.csv");
    assert!(run(&["evolve", p(&cfg), "--epsilon", "0.3", "--output", p(&out)]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn json_provenance_round_trips() {
    let dir = TempDir::new().unwrap();
    let body = three_level(0.07, 5.0, 6, "dyson2").replace(
        "[run]",
        "epsilon = 0.4\n\n[run]\ninitial = [[1.0, 0.0], [0.0, 1.0], [0.25, -0.5]]\nquadrature_step = 5e-4",
    );
    let cfg_path = write_config(&dir, "c.toml", &body);
    let o = run(&["evolve", p(&cfg_path), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let echoed = write_config(&dir, "echo.json", &v["provenance"]["config"].to_string());

    let original = RunConfig::resolve(&ConfigFile::load(&cfg_path).unwrap()).unwrap();
    let original = multirabi_cli::Overrides { format: Some(multirabi_cli::Format::Json), ..Default::default() }
        .apply(original.to_file());
    let original = RunConfig::resolve(&original).unwrap();
    let back = RunConfig::resolve(&ConfigFile::load(&echoed).unwrap()).unwrap();
    assert_eq!(back, original);

    // the echo drives an identical run
    let again = run(&["evolve", p(&echoed)]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn sweep_writes_runs_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &three_level(0.1, 10.0, 11, "numeric-rwa"));
    let out = dir.path().join("sweep");
    let o = run(&["sweep", p(&cfg), "--param", "g", "--values", "0.05,0.1,0.2", "--out-dir", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let runs = manifest["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    for (k, r) in runs.iter().enumerate() {
        assert_eq!(r["status"], "ok");
        assert_eq!(r["index"].as_u64(), Some(k as u64));
        let file = out.join(r["file"].as_str().unwrap());
        assert_eq!(std::fs::read_to_string(file).unwrap().lines().count(), 12);
    }

    // a failing run is recorded and sets the exit code
    let exact = write_config(&dir, "e.toml", &three_level(0.1, 10.0, 11, "exact"));
    let out2 = dir.path().join("sweep2");
    let o = run(&["sweep", p(&exact), "--param", "epsilon", "--values", "0,0.3", "--out-dir", p(&out2)]);
    assert_eq!(o.status.code(), Some(3));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out2.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"][0]["status"], "ok");
    assert_eq!(manifest["runs"][1]["status"], "error");
}
