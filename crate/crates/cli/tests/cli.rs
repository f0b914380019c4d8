use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn inerton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inerton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "models", name]
        .iter()
        .collect();
    path.to_str().unwrap().to_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn dispersion_row_count() {
    let out = inerton(&["dispersion", "--model", &model("chain.cfg"), "--grid", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(data_rows(&text).len(), 64);
    assert!(text.contains("\nk_index,k_value,branch,omega,gap_flag\n"));

    let cubic = inerton(&["dispersion", "--model", &model("cubic.cfg"), "--grid", "4"]);
    assert_eq!(cubic.status.code(), Some(0), "{}", stderr(&cubic));
    assert_eq!(data_rows(&stdout(&cubic)).len(), 64 * 3);
}

#[test]
fn header_echoes_parameters_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = inerton(&[
            "integrate",
            "--k-index",
            "6",
            "--force",
            "1",
            "--omega",
            "1e13",
            "--eta",
            "1e10",
            "--t-end",
            "1e-11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    for key in [
        "# command = integrate",
        "# model = built-in reference chain",
        "# lattice.g0 = 4e-10",
        "# coupling.1 = 1e12",
        "# k_index = 6",
        "# dt = ",
        "# eta = 1.0000000000000000e10",
        "# omega = 1.0000000000000000e13",
        "# cloud = coupled",
    ] {
        assert!(header.iter().any(|l| l.starts_with(key)), "missing {key}");
    }
    let t_end: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# t_end = "))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(t_end, 1e-11);
    let rows = data_rows(&text);
    assert!(rows.len() > 10);
    assert!(rows
        .iter()
        .all(|r| r.split(',').count() == 12 && r.split(',').nth(1) == Some("6")));
}

#[test]
fn resonance_peak_near_mode_frequency() {
    let out = inerton(&["resonance", "--k-index", "7", "--omega-steps", "401"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let omega_res: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# Omega = "))
        .unwrap()
        .parse()
        .unwrap();
    let points: Vec<(f64, f64)> = data_rows(&text)
        .iter()
        .map(|r| {
            let (w, a) = r.split_once(',').unwrap();
            (w.parse().unwrap(), a.parse().unwrap())
        })
        .collect();
    assert_eq!(points.len(), 401);
    let peak = points
        .iter()
        .cloned()
        .fold((0.0, 0.0), |m, p| if p.1 > m.1 { p } else { m });
    let step = omega_res / 400.0;
    assert!(
        (peak.0 - omega_res).abs() <= step,
        "{peak:?} vs {omega_res:e}"
    );
}

#[test]
fn kinematics_table() {
    let out = inerton(&["kinematics", "--mass-amu", "30", "--temperature", "293"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.starts_with("cloud amplitude"))
        .unwrap();
    let value: f64 = line
        .split_whitespace()
        .rev()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 2.4e-5).abs() / 2.4e-5 < 0.05, "{line}");

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let out = inerton(&["kinematics", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.contains("# mass_amu = 3.0000000000000000e1\n"));
    assert!(text.contains("\nname,symbol,value,unit\n"));
    assert!(text.contains("\ncloud amplitude,Lambda,2.455"));
}

#[test]
fn resonator_check() {
    let out = inerton(&["resonator", "--check", "0.20", "0.127"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("check: PASS"), "{text}");
    assert!(text.contains("deviation 0.255%"), "{text}");

    let fail = inerton(&["resonator", "--check", "1", "1"]);
    assert_eq!(fail.status.code(), Some(0));
    assert!(stdout(&fail).contains("check: FAIL"));
    assert!(stdout(&fail).contains("deviation 36.338%"));
}

#[test]
fn validate_reports_broken_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.cfg");
    let text = fs::read_to_string(model("chain.cfg"))
        .unwrap()
        .replace("0 = 20", "0 = 21");
    fs::write(&path, text).unwrap();

    let out = inerton(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stdout(&out).contains("FAIL  acoustic sum rule"),
        "{}",
        stdout(&out)
    );
    assert!(stderr(&out).starts_with("model error:"));

    let out = inerton(&["dispersion", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("model error:"));

    let ok = inerton(&["validate", "--model", &model("cubic.cfg")]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn error_classes_and_exit_codes() {
    let unknown = inerton(&["dispersion", "--frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(stderr(&unknown).starts_with("usage error:"));

    let missing = inerton(&["dispersion", "--model", "/nonexistent/model.cfg"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).starts_with("file error:"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[lattice]\ndimension = 1\nthis is not a pair\n").unwrap();
    let malformed = inerton(&["dispersion", "--model", bad.to_str().unwrap()]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(
        stderr(&malformed).starts_with("config error: line 3"),
        "{}",
        stderr(&malformed)
    );

    let no_omega = inerton(&["integrate", "--force", "1"]);
    assert_eq!(no_omega.status.code(), Some(1));
    assert!(stderr(&no_omega).contains("--omega"));

    let big_step = inerton(&["integrate", "--dt", "1e-12"]);
    assert_eq!(big_step.status.code(), Some(1));
    assert!(stderr(&big_step).starts_with("usage error: time step"));

    let help = inerton(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}
