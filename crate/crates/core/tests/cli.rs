use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tilescope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilescope"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn bundled(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("systems")
        .join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, config: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_bundled_systems() {
    for name in [
        "frank_robinson",
        "kenyon",
        "kenyon_modified",
        "fibonacci_1d",
        "square_lattice",
    ] {
        let out = tilescope(&["validate", name, "--no-write"]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let doc = json(&out);
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(doc["system"], name);
        assert!(
            doc["result"]["pf_relative_error"]["value"]
                .as_f64()
                .unwrap()
                < 1e-8
        );
        assert_eq!(doc["result"]["pf_relative_error"]["method"], "float");
    }
}

#[test]
fn path_with_examples_prefix_resolves_to_bundled_system() {
    let out = tilescope(&["pisot", "examples/frank_robinson.json", "--no-write"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["system"], "frank_robinson");
}

#[test]
fn undeclared_symbol_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = bundled("kenyon_modified");
    config["prototiles"][0]["children"][0]["at"][2][1] = Value::from("zz");
    let path = write_config(dir.path(), "bad.json", &config);
    let out = tilescope(&["validate", &path, "--no-write"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/prototiles/0/children/0/at/2"), "{err}");
}

#[test]
fn duplicate_digit_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = bundled("kenyon_modified");
    let first = config["prototiles"][0]["children"][0]["at"][0].clone();
    config["prototiles"][0]["children"][0]["at"]
        .as_array_mut()
        .unwrap()
        .push(first);
    let path = write_config(dir.path(), "dup.json", &config);
    let out = tilescope(&["validate", &path, "--no-write"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate digit"));
}

#[test]
fn missing_file_and_bad_usage_exit_codes() {
    assert_eq!(
        tilescope(&["validate", "/nonexistent/system.json"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(tilescope(&["frobnicate", "kenyon"]).status.code(), Some(2));
    assert_eq!(
        tilescope(&["generate", "kenyon", "--tile", "7", "--no-write"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tilescope(&["mixing", "frank_robinson", "--no-write"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn generate_level_zero_echoes_seed() {
    let out = tilescope(&["generate", "--level", "0", "kenyon", "--no-write"]);
    assert!(out.status.success());
    let r = &json(&out)["result"];
    assert_eq!(r["tiles"], 1);
    assert_eq!(r["listed"][0]["type"], 1);
    assert_eq!(r["listed"][0]["shift"], "[0; 0]");
}

#[test]
fn generate_counts_match_substitution_matrix() {
    let out = tilescope(&[
        "generate",
        "--level",
        "2",
        "--tile",
        "2",
        "frank_robinson",
        "--no-write",
    ]);
    let counts = &json(&out)["result"]["count_by_type"];
    assert_eq!(counts["method"], "exact");
    assert_eq!(
        counts["value"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .sum::<u64>(),
        16 + 3 * 4
    );
}

#[test]
fn modified_kenyon_eigentest_passes_exactly() {
    let out = tilescope(&[
        "eigentest",
        "--alpha",
        "tau-1,0",
        "examples/kenyon_modified.json",
        "--nmax",
        "30",
        "--no-write",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    let c = &doc["result"]["candidates"][0];
    assert_eq!(c["status"]["status"], "EXACT_PASS", "{c}");
    let residues = c["residues"].as_array().unwrap();
    assert_eq!(residues.len(), 30);
    assert!(residues
        .iter()
        .all(|r| r["exact"] == true && r["value"] == 0.0));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    let first = tilescope(&["report", "kenyon", "--out", &out_dir]);
    assert!(first.status.success());
    let written = std::fs::read(dir.path().join("kenyon_report.json")).unwrap();
    let second = tilescope(&["report", "kenyon", "--no-write"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(written, first.stdout);
}

#[test]
fn artifacts_follow_naming_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy().into_owned();
    assert!(tilescope(&["render", "square_lattice", "--out", &out_dir])
        .status
        .success());
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(
        names.iter().all(|n| n.starts_with("square_lattice_render")),
        "{names:?}"
    );
    assert!(names.iter().any(|n| n.ends_with(".svg")), "{names:?}");
    let svg = std::fs::read_to_string(
        dir.path()
            .join(names.iter().find(|n| n.ends_with(".svg")).unwrap()),
    )
    .unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn failed_block_keeps_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = bundled("square_lattice");
    config["analysis"]["cylinder_level"] = Value::from(1);
    let path = write_config(dir.path(), "square_lattice.json", &config);
    let out_dir = dir.path().join("out").to_string_lossy().into_owned();
    let out = tilescope(&["report", "--all", &path, "--out", &out_dir]);
    assert_eq!(out.status.code(), Some(4));
    let doc: Value = serde_json::from_slice(
        &std::fs::read(Path::new(&out_dir).join("square_lattice_report_all.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["status"], "failed");
    assert_eq!(
        doc["result"]["failed_blocks"],
        serde_json::json!(["cylinders"])
    );
    assert_eq!(doc["result"]["blocks"]["cylinders"]["status"], "failed");
    assert_eq!(doc["result"]["blocks"]["rigidity"]["status"], "ok");
    assert_eq!(doc["result"]["verdicts"]["rigid"], "yes");
}

#[test]
fn metric_between_point_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, "[[0,[0,0]],[0,[1,0]],[1,[0,1]]]").unwrap();
    std::fs::write(&b, r#"{"points": [[0,[0.01,0]],[0,[1,0]],[1,[0,1]]]}"#).unwrap();
    let out = tilescope(&[
        "metric",
        "--a",
        a.to_str().unwrap(),
        "--b",
        b.to_str().unwrap(),
        "--no-write",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let d = json(&out)["result"]["distance"]["value"].as_f64().unwrap();
    assert!((d - 0.01).abs() < 1e-9, "{d}");
}
