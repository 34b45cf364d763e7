use std::path::Path;
use std::process::{Command, Output};

fn armcal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_armcal"))
        .args(args)
        .output()
        .expect("run armcal")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn synth_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = armcal(&[
            "synth",
            "--seed",
            "7",
            "--scale",
            "1",
            "--noise-px",
            "0.2",
            "--out",
            path(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("70 poses"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unperturbed_dataset_has_zero_classic_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.json");
    assert!(armcal(&[
        "synth",
        "--seed",
        "7",
        "--scale",
        "0",
        "--noise-px",
        "0",
        "--out",
        path(&data)
    ])
    .status
    .success());
    let o = armcal(&["evaluate", "--in", path(&data), "--variant", "classic"]);
    assert!(o.status.success());
    assert!(
        stdout(&o).contains("classic mean deviation 0.000 px"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn calibrate_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.json");
    let params = dir.path().join("p.json");
    let report = dir.path().join("r.json");
    let plot = dir.path().join("plot.json");
    assert!(armcal(&[
        "synth",
        "--seed",
        "3",
        "--noise-px",
        "0.2",
        "--out",
        path(&data)
    ])
    .status
    .success());
    let o = armcal(&[
        "calibrate",
        "--in",
        path(&data),
        "--out",
        path(&params),
        "--report",
        path(&report),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let mean_of = |variant: &str| {
        report["deviations"]
            .as_array()
            .unwrap()
            .iter()
            .find(|d| d["variant"] == variant)
            .unwrap()["mean"]
            .as_f64()
            .unwrap()
    };
    assert!(mean_of("compensated") <= 1.0);
    assert!(mean_of("classic") >= 5.0 * mean_of("compensated"));

    let o = armcal(&[
        "evaluate",
        "--in",
        path(&data),
        "--params",
        path(&params),
        "--plot",
        path(&plot),
    ]);
    assert!(o.status.success());
    let plot: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&plot).unwrap()).unwrap();
    assert_eq!(plot["series"].as_array().unwrap().len(), 70);
    assert!((plot["mean"].as_f64().unwrap() - mean_of("compensated")).abs() <= 1e-9);
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.json");
    let params = dir.path().join("p.json");
    assert!(armcal(&["synth", "--seed", "4", "--out", path(&data)])
        .status
        .success());

    // Not converged: result is still written.
    let o = armcal(&[
        "calibrate",
        "--in",
        path(&data),
        "--out",
        path(&params),
        "--max-iters",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(params.exists());

    // I/O.
    let missing = dir.path().join("missing.json");
    assert_eq!(
        armcal(&["evaluate", "--in", path(&missing), "--variant", "classic"])
            .status
            .code(),
        Some(1)
    );

    // Validation: bad header, and a variant absent from the params file.
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&data).unwrap()).unwrap();
    doc["schema_version"] = 2.into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, doc.to_string()).unwrap();
    assert_eq!(
        armcal(&["calibrate", "--in", path(&bad), "--out", path(&params)])
            .status
            .code(),
        Some(3)
    );

    let mut p: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&params).unwrap()).unwrap();
    p["variants"].as_object_mut().unwrap().remove("rough");
    let partial = dir.path().join("partial.json");
    std::fs::write(&partial, p.to_string()).unwrap();
    let o = armcal(&[
        "evaluate",
        "--in",
        path(&data),
        "--params",
        path(&partial),
        "--variant",
        "rough",
    ]);
    assert_eq!(o.status.code(), Some(3));

    // Degenerate: joint 2's tracked feature never moves.
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&data).unwrap()).unwrap();
    let poses = doc["records"][1]["measured_points3d"]
        .as_array_mut()
        .unwrap();
    let first = poses[0].clone();
    for pose in poses.iter_mut() {
        *pose = first.clone();
    }
    let degenerate = dir.path().join("degenerate.json");
    std::fs::write(&degenerate, doc.to_string()).unwrap();
    let o = armcal(&[
        "calibrate",
        "--in",
        path(&degenerate),
        "--out",
        path(&params),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("joint 2"));
}
