use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const ORACLE: &str = "[params]\nalpha = 1.0\nd = 1\n";

const OSCILLATOR: &str = r#"
[params]
alpha = 1.0
d = 1

[grid]
half_width = 20.0
n_points = 256

[potential]
name = "power"
delta = 2.0

[spectral]
n_modes = 48
"#;

fn fracphi(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_fracphi"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn ok(dir: &Path, config: &str, args: &[&str]) -> PathBuf {
    let out = fracphi(dir, config, args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("out")
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn json_result(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["result"].clone()
}

#[test]
fn density_matches_the_cauchy_law_and_its_envelope() {
    let dir = TempDir::new().unwrap();
    for t in [0.5, 1.0, 2.0] {
        let cfg = format!("{ORACLE}[density]\nt = {t:?}\nx_min = -6.0\nx_max = 6.0\nn = 97\n");
        let out = ok(dir.path(), &cfg, &["density"]);
        let (header, rows) = csv_rows(&out.join("density.csv"));
        assert_eq!(header, ["x", "p", "lower", "upper"]);
        assert_eq!(rows.len(), 97);
        for r in rows {
            let cauchy = t / (PI * (t * t + r[0] * r[0]));
            assert!((r[1] / cauchy - 1.0).abs() < 1e-6, "{r:?}");
            assert!(r[2] <= r[1] && r[1] <= r[3], "{r:?}");
        }
    }
}

#[test]
fn outputs_carry_version_command_and_config_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{ORACLE}[density]\nt = 1.0\nx_min = 0.0\nx_max = 1.0\nn = 3\n");
    let out = ok(dir.path(), &cfg, &["density"]);
    let text = std::fs::read_to_string(out.join("density.csv")).unwrap();
    let head: Vec<&str> = text.lines().take(3).collect();
    assert!(head[0].starts_with("# fracphi "));
    assert_eq!(head[1], "# command density");
    assert!(head[2].starts_with("# config-sha256 ") && head[2].len() == 16 + 64);
}

#[test]
fn spectrum_has_a_gap_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{OSCILLATOR}\n[spectrum]\nsave_model = true\n");
    let out = ok(dir.path(), &cfg, &["spectrum"]);
    let first_json = std::fs::read(out.join("spectrum.json")).unwrap();
    let first_csv = std::fs::read(out.join("ground_state.csv")).unwrap();
    let r = json_result(&out.join("spectrum.json"));
    assert!(r["gap"].as_f64().unwrap() > 0.0);
    assert_eq!(r["no_ground_state"], Value::Bool(false));
    let (_, rows) = csv_rows(&out.join("ground_state.csv"));
    assert_eq!(rows.len(), 256);
    assert!(out.join("model.fpsm").exists());

    ok(dir.path(), &cfg, &["spectrum"]);
    assert_eq!(std::fs::read(out.join("spectrum.json")).unwrap(), first_json);
    assert_eq!(std::fs::read(out.join("ground_state.csv")).unwrap(), first_csv);
}

#[test]
fn saved_model_is_reused() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{OSCILLATOR}\n[spectrum]\nsave_model = true\n");
    let out = ok(dir.path(), &cfg, &["spectrum"]);
    let solved = json_result(&out.join("spectrum.json"));
    let model = dir.path().join("model.fpsm");
    std::fs::rename(out.join("model.fpsm"), &model).unwrap();
    let reuse = format!("{ORACLE}[model]\nfile = {:?}\n", model.display().to_string());
    let out = ok(dir.path(), &reuse, &["spectrum"]);
    let loaded = json_result(&out.join("spectrum.json"));
    assert_eq!(solved["eigenvalues"], loaded["eigenvalues"]);
}

#[test]
fn zero_potential_reports_no_ground_state() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{ORACLE}[grid]\nhalf_width = 10.0\nn_points = 128\n[potential]\nname = \"zero\"\n[spectral]\nn_modes = 4\n"
    );
    let out = ok(dir.path(), &cfg, &["spectrum"]);
    let r = json_result(&out.join("spectrum.json"));
    assert_eq!(r["no_ground_state"], Value::Bool(true));
}

#[test]
fn iuc_classifies_the_oscillator() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), OSCILLATOR, &["iuc"]);
    let r = json_result(&out.join("iuc.json"));
    assert_eq!(r["verdict"]["class"], "IUC");
}

#[test]
fn gibbs_dlr_discrepancy_is_small() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{OSCILLATOR}\n[gibbs.dlr]\ninner = 1.0\nouter = 2.0\nn_pairs = 5\n");
    let out = ok(dir.path(), &cfg, &["gibbs", "--seed", "5"]);
    let r = json_result(&out.join("gibbs.json"));
    assert!(r["dlr"]["max_discrepancy"].as_f64().unwrap() < 1e-8, "{r}");
}

#[test]
fn paths_are_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let stable = format!("{ORACLE}[paths]\nkind = \"stable\"\nn_paths = 4\nn_steps = 50\n");
    let dump = |args: &[&str]| {
        let out = ok(dir.path(), &stable, args);
        std::fs::read(out.join("paths.csv")).unwrap()
    };
    let a = dump(&["paths", "--seed", "9"]);
    assert_eq!(a, dump(&["paths", "--seed", "9", "--threads", "2"]));
    assert_ne!(a, dump(&["paths", "--seed", "10"]));
    let (_, rows) = csv_rows(&dir.path().join("out/paths.csv"));
    assert_eq!(rows.len(), 4 * 51);

    let chain = format!("{OSCILLATOR}\n[paths]\nkind = \"chain\"\nn_paths = 3\nn_steps = 5\nback = 2\nt_unit = 1.0\n");
    let run = || {
        let out = ok(dir.path(), &chain, &["paths", "--seed", "1"]);
        std::fs::read(out.join("paths.csv")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn set_overrides_config_values() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{ORACLE}[density]\nt = 1.0\nx_min = 0.0\nx_max = 1.0\nn = 3\n");
    let out = ok(dir.path(), &cfg, &["density", "--set", "density.n=7"]);
    assert_eq!(csv_rows(&out.join("density.csv")).1.len(), 7);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = TempDir::new().unwrap();
    let code = |cfg: &str, args: &[&str]| fracphi(dir.path(), cfg, args).status.code();

    assert_eq!(code("[params]\nalpha = 1.0\nd = 1\nbogus = 3\n", &["density"]), Some(2));
    assert_eq!(code(ORACLE, &["density"]), Some(2));
    assert_eq!(code(&format!("{ORACLE}[paths]\nkind = \"stable\"\nn_paths = 1\n"), &["paths"]), Some(2));
    let early = format!("{OSCILLATOR}\n[iuc]\nuniform_times = [0.01, 0.02]\n");
    assert_eq!(code(&early, &["iuc"]), Some(4));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        fracphi_cli::load(&path, &fracphi_cli::Overrides::default()).unwrap();
        n += 1;
    }
    assert_eq!(n, 7);
}
