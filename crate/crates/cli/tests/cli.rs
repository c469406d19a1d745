use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wavemap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavemap")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn exit_code_contract() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.toml", "catalog = \"euclidean\"\n");
    let out = wavemap(&["check", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 checks"));

    let sphere = scenarios().join("sphere_constant_map.toml");
    assert_eq!(wavemap(&["check", sphere.to_str().unwrap()]).status.code(), Some(1));

    let broken = write(dir.path(), "broken.toml", "catalog = [\n");
    let out = wavemap(&["check", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.toml:"));
}

#[test]
fn undeclared_coordinate_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.toml",
        r#"
[chart]
coordinates = [{ name = "t", lo = -1, hi = 1 }, { name = "x", lo = -1, hi = 1 }]
[metric]
lower = ["1", "w", "-1"]
signature = [1, -1]
[[checks]]
name = "flat"
[[checks]]
name = "tension"
"#,
    );
    let out = wavemap(&["check", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2 error(s)"), "{err}");
    assert!(err.contains("unknown identifier `w`"), "{err}");
    assert!(err.contains("needs a [map]"), "{err}");
}

#[test]
fn tolerance_override_applies_to_every_check() {
    let sphere = scenarios().join("sphere_constant_map.toml");
    let out = wavemap(&["check", sphere.to_str().unwrap(), "--tolerance", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for c in v["checks"].as_array().unwrap() {
        assert_eq!(c["tolerance"], 3.0);
        assert_eq!(c["status"], "pass");
    }
}

#[test]
fn seed_changes_random_samples_only() {
    let sphere = scenarios().join("sphere_constant_map.toml");
    let run = |seed: &str| {
        let out = wavemap(&["check", sphere.to_str().unwrap(), "--seed", seed, "--format", "json"]);
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    assert_eq!(a["seed"], 1);
    assert_ne!(a["checks"][0]["worst_point"], b["checks"][0]["worst_point"]);
    // the residual is |kappa| everywhere
    assert_eq!(a["checks"][0]["max_residual"], b["checks"][0]["max_residual"]);
}

#[test]
fn curvature_at_a_point() {
    let sphere = scenarios().join("sphere_constant_map.toml");
    let out = wavemap(&["curvature", sphere.to_str().unwrap(), "--at", "1.2,0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("scalar curvature R: 2.000000000000e0"), "{text}");
    assert!(text.contains("energy density e: 0.000000000000e0"));

    let out = wavemap(&["curvature", sphere.to_str().unwrap(), "--at", "1.2"]);
    assert_eq!(out.status.code(), Some(1));
}
