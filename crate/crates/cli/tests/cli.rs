use std::process::{Command, Output};

fn minsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minsurf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn helicoid_mesh_has_one_vertex_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("h.obj");
    let o = minsurf(&["generate", "--preset", "helicoid", "--grid", "64x64", "--out", obj.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4096);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 63 * 63);
}

#[test]
fn generated_mesh_feeds_density() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("c.obj");
    let csv = dir.path().join("d.csv");
    assert!(minsurf(&["generate", "--preset", "catenoid", "--grid", "48x48", "--out", obj.to_str().unwrap()])
        .status
        .success());
    let o = minsurf(&[
        "density",
        "--mesh",
        obj.to_str().unwrap(),
        "--center",
        "0,0,0",
        "--radii",
        "0.1,0.2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,theta,clipped"));
    assert_eq!(lines.count(), 2);
    assert!(stdout(&o).contains("eps_quad"));
}

#[test]
fn zero_width_is_extinct_at_once() {
    let o = minsurf(&["width", "extinct", "--W0", "0", "--C", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn trajectory_ends_at_zero() {
    let o = minsurf(&["width", "--W0", "10", "--C", "2", "--samples", "11"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    let w: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(w.abs() < 1e-9, "{last}");
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn verify_is_deterministic_json() {
    let a = minsurf(&["verify", "--suite", "11"]);
    let b = minsurf(&["verify", "--suite", "11"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let entries = v.as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        assert!(e["id"].as_str().unwrap().starts_with("11."));
        assert_eq!(e["pass"], true);
    }
}

#[test]
fn verify_csv_has_header() {
    let o = minsurf(&["verify", "--suite", "12", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("id,paper_ref,measured,threshold,pass"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(minsurf(&["bogus"]).status.code(), Some(2));
    assert_eq!(minsurf(&["width", "extinct", "--C", "0"]).status.code(), Some(2));
    assert_eq!(minsurf(&["verify", "--suite", "99"]).status.code(), Some(2));
    assert_eq!(minsurf(&["solve", "--boundary", "b.csv", "--tol", "0"]).status.code(), Some(2));
    assert_eq!(minsurf(&["density", "--mesh", "/nonexistent.obj", "--radii", "1"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_minsurf"))
        .args(["width", "extinct"])
        .env("MINSURF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_minsurf"))
            .args(["verify", "--suite", "13"])
            .env("MINSURF_THREADS", n)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn config_values_yield_to_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.json");
    std::fs::write(&cfg, r#"{"command": "width", "action": "extinct", "W0": 0, "C": 1}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = minsurf(&["--config", c]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file).trim().parse::<f64>().unwrap(), 0.0);

    let overridden = minsurf(&["width", "extinct", "--W0", "4", "--config", c]);
    let direct = minsurf(&["width", "extinct", "--W0", "4", "--C", "1"]);
    assert_eq!(overridden.stdout, direct.stdout);

    std::fs::write(&cfg, r#"{"nonsense": 3}"#).unwrap();
    assert_eq!(minsurf(&["width", "--config", c]).status.code(), Some(2));
}

#[test]
fn annulus_exit_status_follows_the_check() {
    let ok = minsurf(&["annulus", "--check", "osc", "--fn", "constant", "--nr", "101", "--ntheta", "64"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["holds"], true);

    let bad = minsurf(&["annulus", "--check", "energy", "--fn", "power", "--k", "2", "--nr", "101", "--ntheta", "64"]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert!(v["energy"]["holds"] == false || v["peak_gradient"]["holds"] == false);
}
