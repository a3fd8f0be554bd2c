use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nilsolve::cli::{BasisArtifact, EvalArtifact, FamiliesArtifact, VerifyArtifact};
use nilsolve::C64;
use serde_json::Value;

fn nilsolve(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilsolve"))
        .args(args)
        .current_dir(dir)
        .env_remove("NILSOLVE_SEED")
        .output()
        .expect("run nilsolve")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn laplace_seed_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = nilsolve(
        &["solve", "--preset", "laplace3d", "--n", "4", "--branch", "plus", "--seed", "7", "--out", "b.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let art: BasisArtifact = serde_json::from_str(&read(dir.path(), "b.json")).unwrap();
    let (k0, m0) = (art.free["k"][0], art.free["m"][0]);
    let [re, im] = art.basis.vectors[2].coeffs[0];
    let g0 = C64::new(re, im);
    let expect = C64::new(0.0, 1.0) * (k0 * k0 + m0 * m0).sqrt();
    assert!((g0 - expect).norm() < 1e-14);
    assert_eq!(art.basis.vectors[0].coeffs.len(), 4);
}

#[test]
fn helmholtz_with_zero_k0() {
    let dir = tempfile::tempdir().unwrap();
    for (branch, sign) in [("plus", 1.0), ("minus", -1.0)] {
        let o = nilsolve(
            &["solve", "--preset", "helmholtz", "--lambda", "1", "--free", "k0=0", "--branch", branch, "--out", "h.json"],
            dir.path(),
        );
        assert_eq!(code(&o), 0);
        let art: BasisArtifact = serde_json::from_str(&read(dir.path(), "h.json")).unwrap();
        let [re, im] = art.basis.vectors[1].coeffs[0];
        let m0 = C64::new(re, im);
        assert!((m0 - C64::new(0.0, sign)).norm() < 1e-14);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let zeros = "0,0,0,0";
    let o = nilsolve(
        &["solve", "--preset", "laplace3d", "--n", "4", "--free", &format!("k={zeros}"), "--free", &format!("m={zeros}")],
        p,
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));

    assert_eq!(code(&nilsolve(&["solve", "--preset", "nope"], p)), 2);
    assert_eq!(code(&nilsolve(&["solve", "--preset", "beam", "--n", "1"], p)), 2);
    assert_eq!(code(&nilsolve(&["frobnicate"], p)), 2);
    assert_eq!(code(&nilsolve(&["verify", "--families", "missing.json"], p)), 2);

    assert_eq!(code(&nilsolve(&["solve", "--preset", "beam", "--n", "4", "--out", "b.json"], p)), 0);
    let o = nilsolve(&["families", "--basis", "b.json", "--max", "9"], p);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("only 3 are available"));
    let o = nilsolve(&["families", "--basis", "b.json", "--kind", "analytic", "--F", "sin"], p);
    assert_eq!(code(&o), 2);

    fs::write(p.join("bad.json"), "{\"d\": 2,\n \"terms\": [{\"alpha\": [2]}]}").unwrap();
    let o = nilsolve(&["solve", "--pde", "bad.json"], p);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn generic_pde_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // u_xx + u_yy + u_zz written out by hand
    let pde = r#"{"d": 3, "terms": [
        {"alpha": [2, 0, 0], "re": 1.0, "im": 0.0},
        {"alpha": [0, 2, 0], "re": 1.0, "im": 0.0},
        {"alpha": [0, 0, 2], "re": 1.0, "im": 0.0}]}"#;
    fs::write(p.join("lap.json"), pde).unwrap();
    let o = nilsolve(&["pipeline", "--pde", "lap.json", "--n", "5", "--max", "4", "--branch", "pos-imag", "--out-dir", "run"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: VerifyArtifact = serde_json::from_str(&read(p, "run/report.json")).unwrap();
    assert!(report.passed);
    assert_eq!(report.residual.unwrap().members.len(), 5);
    let o = nilsolve(&["solve", "--pde", "lap.json", "--method", "oracle"], p);
    assert_eq!(code(&o), 2);
}

#[test]
fn families_latex_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&nilsolve(&["solve", "--preset", "beam", "--n", "4", "--out", "b.json"], p)), 0);
    let o = nilsolve(&["families", "--basis", "b.json", "--kind", "exp", "--max", "2", "--latex", "f.tex", "--out", "f.json"], p);
    assert_eq!(code(&o), 0);
    let tex = read(p, "f.tex");
    let lines: Vec<&str> = tex.lines().collect();
    assert!(lines[0].starts_with("% nilsolve "));
    assert!(lines.contains(&"\\[ V_{1}=\\xi_1e^{\\xi} \\]"));
    assert!(lines.contains(&"\\[ V_{2}=\\left(\\xi_2+\\frac{1}{2}\\xi_1^{2}\\right)e^{\\xi} \\]"));

    fs::write(p.join("pts.json"), "[[0.1, -0.2], [0.5, 0.25]]").unwrap();
    let o = nilsolve(&["eval", "--families", "f.json", "--points", "pts.json", "--out", "v.json"], p);
    assert_eq!(code(&o), 0);
    let ev: EvalArtifact = serde_json::from_str(&read(p, "v.json")).unwrap();
    assert_eq!(ev.members.len(), 3);
    let fam: FamiliesArtifact = serde_json::from_str(&read(p, "f.json")).unwrap();
    let (v1, xf) = nilsolve::solutions::FamilyMember::from_record(&fam.members[1]).unwrap();
    assert_eq!(ev.members[1].values[1], v1.eval(&xf, &[0.5, 0.25]).unwrap());
}

#[test]
fn analytic_family_and_cauchy_check() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&nilsolve(&["solve", "--preset", "laplace3d", "--n", "6", "--out", "b.json"], p)), 0);
    let o = nilsolve(
        &["families", "--basis", "b.json", "--kind", "analytic", "--F", "reciprocal:safe", "--max", "5", "--latex", "u.tex", "--out", "u.json"],
        p,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(p, "u.tex").contains("U_{3}=\\xi_3F_{3}'(\\xi)+\\xi_1\\xi_2F_{3}''(\\xi)+\\frac{1}{6}\\xi_1^{3}F_{3}'''(\\xi)"));
    assert_eq!(code(&nilsolve(&["verify", "--families", "u.json", "--jobs", "3", "--out", "r.json"], p)), 0);
    let r: VerifyArtifact = serde_json::from_str(&read(p, "r.json")).unwrap();
    assert!(r.residual.as_ref().unwrap().max_rel < 1e-8);
    assert!(r.cauchy_riemann.unwrap() < 1e-9);

    assert_eq!(code(&nilsolve(&["families", "--basis", "b.json", "--out", "v.json"], p)), 0);
    let o = nilsolve(&["verify", "--families", "v.json", "--check", "cauchy", "--n-index", "3", "--out", "c.json"], p);
    assert_eq!(code(&o), 0);
    let c: VerifyArtifact = serde_json::from_str(&read(p, "c.json")).unwrap();
    assert!(c.cauchy.unwrap().abs < 1e-7);
}

#[test]
fn corrupted_family_fails_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&nilsolve(&["solve", "--preset", "hydro", "--n", "5", "--out", "b.json"], p)), 0);
    assert_eq!(code(&nilsolve(&["families", "--basis", "b.json", "--max", "4", "--out", "f.json"], p)), 0);
    assert_eq!(code(&nilsolve(&["verify", "--families", "f.json", "--out", "ok.json"], p)), 0);

    let mut v: Value = serde_json::from_str(&read(p, "f.json")).unwrap();
    let re = &mut v["members"][3]["terms"][0]["poly"][0]["re"];
    let old = re.as_f64().unwrap();
    *re = Value::from(old + 0.5);
    fs::write(p.join("bad.json"), serde_json::to_string(&v).unwrap()).unwrap();
    let o = nilsolve(&["verify", "--families", "bad.json", "--out", "r.json"], p);
    assert_eq!(code(&o), 4);
    let r: VerifyArtifact = serde_json::from_str(&read(p, "r.json")).unwrap();
    assert!(!r.passed);
    let members = r.residual.unwrap().members;
    assert!(!members[3].passed);
    assert!(members.iter().enumerate().all(|(i, m)| m.passed == (i != 3)));
}

#[test]
fn seed_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = |seed: &str, env: Option<&str>, out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_nilsolve"));
        c.args(["solve", "--preset", "wave3d", "--n", "3", "--seed", seed, "--out", out])
            .current_dir(p)
            .env_remove("NILSOLVE_SEED");
        if let Some(e) = env {
            c.env("NILSOLVE_SEED", e);
        }
        assert!(c.status().unwrap().success());
        read(p, out)
    };
    let a = run("5", None, "a.json");
    let b = run("9", Some("5"), "b.json");
    let c = run("9", None, "c.json");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.contains("\"seed\": 5,"));
}

#[test]
fn artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = nilsolve(
        &["pipeline", "--preset", "helmholtz", "--lambda", "3i", "--n", "5", "--kind", "analytic", "--max", "4", "--out-dir", "run"],
        p,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b: BasisArtifact = serde_json::from_str(&read(p, "run/basis.json")).unwrap();
    let f: FamiliesArtifact = serde_json::from_str(&read(p, "run/families.json")).unwrap();
    let r: VerifyArtifact = serde_json::from_str(&read(p, "run/report.json")).unwrap();
    assert_eq!(serde_json::from_str::<BasisArtifact>(&serde_json::to_string(&b).unwrap()).unwrap(), b);
    assert_eq!(serde_json::from_str::<FamiliesArtifact>(&serde_json::to_string(&f).unwrap()).unwrap(), f);
    assert_eq!(serde_json::from_str::<VerifyArtifact>(&serde_json::to_string(&r).unwrap()).unwrap(), r);
    assert_eq!(b.problem.params["lambda"], C64::new(0.0, 3.0));
}
