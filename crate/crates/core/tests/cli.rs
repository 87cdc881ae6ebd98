use std::path::Path;
use std::process::Command;

fn enclosure(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_enclosure"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn enclose_reports_the_s1_decay_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = enclosure(dir.path(), &["enclose", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("o/enclose.json"));
    assert_eq!(r["mode"], "semi_analytic");
    assert_eq!(r["decay_taus"].as_array().unwrap().len(), 10);
    let rate = r["result"]["rate"].as_f64().unwrap();
    assert!((rate - 5.73590).abs() < 1e-3, "{rate}");
    let semi_minor = r["result"]["spheroid"]["semi_minor"].as_f64().unwrap();
    assert!((semi_minor - 1.8284).abs() < 1e-2);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"obstacle": {"kind": "ellipsoid", "center": [0, 0, 0], "semi_axes": [1.2, 1, 0.9]},
            "source": {"center": [4, 0.5, 0], "radius": 0.5},
            "receiver": {"center": [0.3, 4, 0.2], "radius": 0.5},
            "tau": {"min": 40, "max": 200, "count": 10},
            "seed": 7}"#,
    )
    .unwrap();
    let runs = [
        (
            ["indicator", "--mode", "semi-analytic"],
            ["indicator.json", "indicator.csv"],
        ),
        (["scan", "--mode", "geometry"], ["scan.json", "scan.csv"]),
    ];
    for (args, files) in runs {
        let mut outputs = Vec::new();
        for out in ["a", "b"] {
            let mut full = args.to_vec();
            full.extend(["--config", "cfg.json", "--out", out]);
            let o = enclosure(dir.path(), &full);
            assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            outputs.push(files.map(|f| std::fs::read(dir.path().join(out).join(f)).unwrap()));
        }
        assert_eq!(outputs[0], outputs[1], "{args:?} outputs differ");
    }
    let r = json(&dir.path().join("a/indicator.json"));
    assert_eq!(r["seed"], 7);
    assert_eq!(r["result"]["curve"]["source"], "semianalytic_2J");
}

#[test]
fn overlapping_source_ball_names_the_hull_condition() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"obstacle": {"kind": "sphere", "center": [0, 0, 0], "radius": 1},
            "source": {"center": [1.2, 0, 0], "radius": 0.5},
            "receiver": {"center": [0, 4, 0], "radius": 0.5}}"#,
    )
    .unwrap();
    let out = enclosure(dir.path(), &["enclose", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("hull condition violated"), "{err}");
}

#[test]
fn short_observation_time_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("short.json"),
        r#"{"obstacle": {"kind": "sphere", "center": [0, 0, 0], "radius": 1},
            "source": {"center": [4, 0, 0], "radius": 0.5},
            "receiver": {"center": [0, 4, 0], "radius": 0.5},
            "mode": "fdtd", "fdtd": {"t_final": 4}}"#,
    )
    .unwrap();
    let out = enclosure(dir.path(), &["simulate", "--config", "short.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T=4 < 5.736"));
}

#[test]
fn geometry_ball_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let out = enclosure(dir.path(), &["reconstruct-ball", "--mode", "geometry", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("o/reconstruct_ball.json"));
    assert!((r["result"]["radius"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn verify_reports_the_determinant_variant() {
    let dir = tempfile::tempdir().unwrap();
    let out = enclosure(dir.path(), &["verify", "--criteria", "1,5", "--out", "o"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("criterion  5 PASS") && text.contains("variant=quarter"),
        "{text}"
    );
    let r = json(&dir.path().join("o/verify.json"));
    assert_eq!(r["results"].as_array().unwrap().len(), 2);
}
