use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use choquard::io::{read_field, write_field, Manifest, RunConfig};
use choquard::{Field, Grid};

const CONFIG: &str = "# small 1D ground state\n\
dim = 1\ns = 0.4\nalpha = 0.5\np = 2\nomega = 1\nn = 256\nL = 20\nsolver = petviashvili\nseed = 3\n";

fn choquard(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_choquard"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_writes_field_certificate_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), CONFIG).unwrap();
    let out = choquard(&["solve", "--config", "run.cfg", "--out", "results"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dir = tmp.path().join("results");
    for f in ["field.chqf", "certificate.json", "report.json", "manifest.json", "history.csv", "summary.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let field = read_field(dir.join("field.chqf")).unwrap();
    assert_eq!(field.grid().points_per_dim(), 256);
    let cert: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("certificate.json")).unwrap()).unwrap();
    assert!(cert["functionals"]["nehari_res"].as_f64().unwrap().abs() < 1e-6);

    // the manifest reproduces the run byte for byte
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, Some(3));
    let text = manifest.config_text.unwrap();
    assert_eq!(RunConfig::from_text(&text).unwrap(), manifest.config.unwrap());
    fs::write(tmp.path().join("again.cfg"), text).unwrap();
    let out = choquard(&["solve", "--config", "again.cfg", "--out", "again"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let a = fs::read(dir.join("field.chqf")).unwrap();
    let b = fs::read(tmp.path().join("again/field.chqf")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn solve_outside_the_window_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), CONFIG.replace("p = 2", "p = 8")).unwrap();
    let out = choquard(&["solve", "--config", "run.cfg", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("NonexistenceHigh"), "{}", stderr(&out));
}

#[test]
fn bad_config_and_missing_files() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), format!("{CONFIG}bogus = 1\n")).unwrap();
    let out = choquard(&["solve", "--config", "run.cfg", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = choquard(&["solve", "--config", "nope.cfg", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    fs::write(tmp.path().join("junk.chqf"), b"not a field").unwrap();
    let out = choquard(
        &["certify", "--field", "junk.chqf", "--omega", "1", "--s", "0.4", "--alpha", "0.5", "--p", "2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn solver_nonconvergence_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), format!("{CONFIG}max_iter = 3\n")).unwrap();
    let out = choquard(&["solve", "--config", "run.cfg", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn certify_zero_field() {
    let tmp = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 32, 5.0).unwrap();
    write_field(tmp.path().join("zero.chqf"), &Field::<f64>::zeros(g)).unwrap();
    let out = choquard(
        &["certify", "--field", "zero.chqf", "--omega", "1", "--s", "0.4", "--alpha", "0.5", "--p", "2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("zero"));
}

#[test]
fn certify_and_spectrum_of_a_solution() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), CONFIG).unwrap();
    assert_eq!(choquard(&["solve", "--config", "run.cfg", "--out", "r"], tmp.path()).status.code(), Some(0));
    let model = ["--s", "0.4", "--alpha", "0.5", "--p", "2"];
    let mut args = vec!["certify", "--field", "r/field.chqf", "--omega", "1", "--decay", "--out", "c"];
    args.extend(model);
    let out = choquard(&args, tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(fs::read_to_string(tmp.path().join("c/shells.csv")).unwrap().starts_with("r,u_mean,u_min,u_max"));

    let mut args = vec!["spectrum", "--field", "r/field.chqf", "--lambda", "1", "--k", "3"];
    args.extend(model);
    let out = choquard(&args, tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let data: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(data["negative_count"], 1);
}

#[test]
fn sweep_rows_equal_single_runs() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), CONFIG).unwrap();
    let out = choquard(&["sweep", "--config", "run.cfg", "--param", "p", "--values", "1.8,2.2,8", "--out", "sw"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let aggregate = fs::read_to_string(tmp.path().join("sw/summary.csv")).unwrap();
    let rows: Vec<&str> = aggregate.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].contains("RegimeUnsupported"));

    for (i, p) in ["1.8", "2.2"].iter().enumerate() {
        let cfg = CONFIG.replace("p = 2", &format!("p = {p}"));
        fs::write(tmp.path().join(format!("single{i}.cfg")), cfg).unwrap();
        let dir = format!("single{i}");
        let out = choquard(&["solve", "--config", &format!("single{i}.cfg"), "--out", &dir], tmp.path());
        assert_eq!(out.status.code(), Some(0));
        let single = fs::read_to_string(tmp.path().join(dir).join("summary.csv")).unwrap();
        assert_eq!(single.lines().nth(1).unwrap(), rows[i + 1]);
        let a = fs::read(tmp.path().join(format!("sw/run_{i:03}/field.chqf"))).unwrap();
        let b = fs::read(tmp.path().join(format!("single{i}/field.chqf"))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn regime_bubble_and_scaling_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = choquard(&["regime", "--dim", "3", "--s", "0.5", "--alpha", "2", "--p", "1.5,2,3"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2.0,MassCritical") && text.contains("3.0,NonexistenceHigh"), "{text}");

    let out = choquard(&["bubble", "--dim", "1", "--s", "0.3", "--n", "256", "--L", "20"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = choquard(&["bubble", "--dim", "1", "--s", "0.2", "--n", "1024", "--L", "50", "--out", "b"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(tmp.path().join("b/field.chqf").exists());

    let out = choquard(
        &["scaling-test", "--dim", "1", "--s", "0.4", "--alpha", "0.5", "--p", "3", "--n", "256", "--L", "20", "--trial", "mixture", "--seed", "5"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["scaling"]["mass_supercritical_gap"].as_f64().unwrap() < 1e-7);
}
