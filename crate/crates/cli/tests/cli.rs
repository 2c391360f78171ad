use std::path::Path;
use std::process::{Command, Output};

use losr_core::compiler::{check_membership, MembershipOutcome};
use losr_core::resource::{self, parse_resource, resource_to_json, CertificateJson};
use losr_core::{auto_free_model, CMatrix, ChoiResource, ResourceSpec, SystemSpec};

fn losr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_losr")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn export(dir: &Path, name: &str) -> String {
    let file = format!("{name}.json");
    let o = losr(dir, &["export", name, "--out", &file]);
    assert!(o.status.success());
    file
}

/// Re-checks a certificate file with the library alone: the noise is a
/// valid resource and the mixture is free under the exact model.
fn certificate_revalidates(r: &ChoiResource, cert_path: &Path) {
    let doc: CertificateJson = serde_json::from_str(&std::fs::read_to_string(cert_path).unwrap()).unwrap();
    let noise = ChoiResource::new(*r.spec(), doc.noise_choi.to_matrix().unwrap()).unwrap();
    assert!(resource::validate_with_tol(&noise, 1e-7).unwrap().is_valid());
    let s = doc.scale;
    let mix = ChoiResource::new(*r.spec(), (r.choi() + &noise.choi().scale(s)).scale(1.0 / (1.0 + s))).unwrap();
    let model = auto_free_model(r.spec(), None).unwrap();
    assert!(matches!(check_membership(&mix, &model).unwrap(), MembershipOutcome::Member(_)));
}

#[test]
fn monotone_values_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let singlet = export(d, "singlet");
    let o = losr(d, &["monotone", &singlet, "abs"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}");
    assert!(out.contains("abs = 1.0000000") && out.contains("Exact(PPT)"), "{out}");
    certificate_revalidates(&resource::singlet_resource(), &d.join("singlet.abs.cert.json"));

    let uniform = export(d, "uniform-box");
    let out = stdout(&losr(d, &["monotone", &uniform, "abs", "--format", "csv"]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert!(row[1].parse::<f64>().unwrap().abs() < 1e-7);
    assert_eq!(row[2], "Exact(LP)");

    let pr = export(d, "pr-box");
    let out = stdout(&losr(d, &["monotone", &pr, "weight", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["exactness"], "Exact(LP)");

    let ts = export(d, "tsirelson-box");
    let o = losr(d, &["monotone", &ts, "abs", "--certificate", "t.json"]);
    assert!(o.status.success());
    certificate_revalidates(&resource::tsirelson_box(), &d.join("t.json"));
}

#[test]
fn membership_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let singlet = export(d, "singlet");
    let out = stdout(&losr(d, &["membership", &singlet, "--level", "2"]));
    assert!(out.starts_with("NotFree"), "{out}");
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("singlet.membership.json")).unwrap()).unwrap();
    assert!(cert["margin"].as_f64().unwrap() > 1e-8);

    let uniform = export(d, "uniform-box");
    let out = stdout(&losr(d, &["membership", &uniform, "--level", "1"]));
    assert!(out.starts_with("Free"), "{out}");

    let q = SystemSpec::quantum(2);
    let spec = ResourceSpec::new(q, q, q, q);
    let mixed = ChoiResource::new(spec, CMatrix::identity(16).scale(1.0 / 16.0)).unwrap();
    std::fs::write(d.join("qq.json"), resource_to_json(&mixed)).unwrap();
    let out = stdout(&losr(d, &["membership", "qq.json", "--level", "1"]));
    assert!(out.starts_with("UndecidedAtLevel(1)"), "{out}");
}

#[test]
fn invalid_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let signaling = r#"{"box": {"P": [[[[1,0],[0,1]],[[0,0],[0,0]]],[[[0,1],[1,0]],[[0,0],[0,0]]]]}}"#;
    std::fs::write(d.join("sig.json"), signaling).unwrap();
    let o = losr(d, &["monotone", "sig.json", "abs"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(d.join("bad.json"), "{").unwrap();
    assert_eq!(losr(d, &["membership", "bad.json"]).status.code(), Some(2));
    assert_eq!(losr(d, &["sweep", "--grid", "1"]).status.code(), Some(2));
    let singlet = export(d, "singlet");
    assert_eq!(losr(d, &["monotone", &singlet, "nonsense"]).status.code(), Some(2));
    // a box JSON parses into the same resource as the builder
    let box_json = r#"{"box": {"P": [[[[0.25,0.25],[0.25,0.25]],[[0.25,0.25],[0.25,0.25]]],[[[0.25,0.25],[0.25,0.25]],[[0.25,0.25],[0.25,0.25]]]]}}"#;
    assert!(parse_resource(box_json).unwrap().choi().dist_max(resource::uniform_box().choi()) < 1e-15);
}

#[test]
fn sweep_csv_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let o = losr(dir.path(), &["sweep", "--grid", "5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "alpha,m_state,m_asm3,m_asm2,m_box,theta0");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    let mut prev_alpha = -1.0;
    let mut prev_theta = -1.0;
    for r in &rows {
        let (alpha, m_state, m_asm3, m_asm2, m_box, theta0) = (r[0], r[1], r[2], r[3], r[4], r[5]);
        assert!(alpha > prev_alpha);
        assert!((m_state - (2.0 * alpha).sin()).abs() < 1e-4);
        assert!(m_state + 1e-6 >= m_asm3 && m_asm3 + 1e-6 >= m_asm2);
        assert!((m_asm2 - m_box).abs() < 1e-3);
        assert!(theta0 + 1e-3 >= prev_theta, "theta0 should grow with alpha");
        prev_alpha = alpha;
        prev_theta = theta0;
    }
    let last = rows.last().unwrap();
    assert!((last[5] - std::f64::consts::FRAC_PI_4).abs() < 1e-2);
    assert!(rows[0][1..5].iter().all(|v| v.abs() < 1e-7));
    assert_eq!(rows[0][5], 0.0);
}

#[test]
fn examples_table_with_cuts() {
    let dir = tempfile::tempdir().unwrap();
    let o = losr(dir.path(), &["examples", "--ppt-cuts", "--format", "csv"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}");
    let rows: Vec<Vec<String>> = out.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let value = |i: usize| rows[i][1].parse::<f64>().unwrap();
    assert!((value(0) - 1.0).abs() < 1e-3);
    assert!((value(1) - 1.0).abs() < 1e-3);
    assert!((value(2) - 0.366).abs() < 1e-3);
    assert!((value(3) - 0.207).abs() < 1e-3);
    assert!((value(4) - 0.2071).abs() < 1e-3);
    assert!((value(3) - value(4)).abs() < 1e-3);
}
