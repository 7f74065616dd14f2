use std::path::Path;
use std::process::{Command, Output};

use spinflow::diagnostics::balance_audit;
use spinflow::io::read_csv;

fn spinflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinflow"))
        .args(args)
        .env_remove("SPINFLOW_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(report: &str, key: &str) -> f64 {
    report
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no {key} in {report}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn positive_wave_decomposes_into_one_spin() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path().join("w.spnf");
    let o = spinflow(&["gen", "--kind", "beltrami", "--n", "16", "--k", "1,0,0", "--sign", "+", "--out", p(&w)]);
    assert!(o.status.success(), "{o:?}");
    let o = spinflow(&["decompose", p(&w)]);
    assert!(o.status.success(), "{o:?}");
    let report = stdout(&o);
    assert!(field(&report, "minus_over_plus") <= 1e-20, "{report}");
    assert!(field(&report, "helicity") > 0.0);
    assert!(tmp.path().join("w_plus.spnf").exists());
    assert!(tmp.path().join("w_minus.spnf").exists());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x.spnf");
    // dealiased limit on 8³ is 2, so k = 3 is rejected as invalid input
    let o = spinflow(&["gen", "--kind", "beltrami", "--n", "8", "--k", "3,0,0", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(spinflow(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(spinflow(&["gen", "--kind", "nope", "--out", p(&out)]).status.code(), Some(1));
    // unreadable input is an internal (I/O) failure
    assert_eq!(spinflow(&["decompose", p(&tmp.path().join("missing.spnf"))]).status.code(), Some(2));

    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "n = 16\nnu = 0.05\nwibble = 3\n").unwrap();
    let o = spinflow(&["evolve", p(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:"));
}

#[test]
fn evolve_then_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "n = 16\nnu = 0.05\ndt = 1e-3\nt_end = 1\ninitial = u2\ndiag_stride = 5\ncheckpoint_stride = 250\n",
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let o = spinflow(&["evolve", p(&cfg), "--out", p(&dir)]);
    assert!(o.status.success(), "{o:?}");

    let records = read_csv(&dir.join("diagnostics.csv")).unwrap();
    assert_eq!(records.len(), 201);
    let audit = balance_audit(&records, 0.05, &[]).unwrap();
    assert!(audit.max_np_minus_nm_residual() <= 1e-6, "{}", audit.max_np_minus_nm_residual());

    let o = spinflow(&["analyze", p(&dir)]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("checkpoint rows matched")).expect("comparison line");
    assert!(line.contains("matched  5 "), "{line}");
    let worst: f64 = line.rsplit(' ').next().unwrap().trim_end_matches(')').parse().unwrap();
    assert!(worst <= 1e-12, "{line}");
}

#[test]
fn output_directory_follows_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "n = 8\ndt = 1e-2\nt_end = 0.05\ninitial = u1\ndiag_stride = 1\noutput = ignored\n").unwrap();
    let target = tmp.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_spinflow"))
        .args(["evolve", p(&cfg)])
        .current_dir(tmp.path())
        .env("SPINFLOW_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    assert!(target.join("diagnostics.csv").exists());
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn check_passes_every_identity() {
    let o = spinflow(&["check", "--samples", "20", "--n", "16"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.ends_with("pass")), "{text}");
}

#[test]
fn export_writes_requested_scalars() {
    let tmp = tempfile::tempdir().unwrap();
    let u = tmp.path().join("u1.spnf");
    let vtk = tmp.path().join("u1.vtk");
    assert!(spinflow(&["gen", "--kind", "u1", "--n", "8", "--layout", "physical", "--out", p(&u)]).status.success());
    let o = spinflow(&["export", p(&u), "--out", p(&vtk), "--scalars", "pressure,vorticity"]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&vtk).unwrap();
    assert!(text.contains("SCALARS pressure double 1"));
    assert!(text.contains("SCALARS vorticity double 1"));
    assert!(!text.contains("dissipation"));
}
