use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn new() -> Self {
        Work {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_orthospec"))
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    fn build(&self, name: &str, spec: &str) -> String {
        let spec_file = format!("{name}.spec.json");
        self.write(&spec_file, spec);
        let out = format!("{name}.surface.json");
        self.ok(&["build", &spec_file, "-o", &out]);
        out
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const PANTS_222: &str = r#"{"kind": "pants", "boundary_lengths": [2, 2, 2]}"#;

#[test]
fn build_pants_passes_validation() {
    let w = Work::new();
    let s = w.build("p", PANTS_222);
    let doc = json(&w.path(&s));
    assert_eq!(doc["schema"], "orthospec/surface/v1");
    assert_eq!(doc["data"]["validation"]["passed"], true);
    assert_eq!(doc["manifest"]["certificates"][0], "surface: certified");
}

#[test]
fn negative_length_is_an_input_error() {
    let w = Work::new();
    w.write(
        "bad.json",
        r#"{"kind": "pants", "boundary_lengths": [2, -1, 2]}"#,
    );
    let out = w.run(&["build", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("boundary_lengths[1]"));
}

#[test]
fn two_pants_graph_has_four_legs() {
    let w = Work::new();
    let s = w.build(
        "g",
        r#"{"kind": "pants_graph", "graph": {"pants": 2,
            "gluings": [{"pants_a": 0, "cuff_a": 2, "pants_b": 1, "cuff_b": 0, "length": 1.5, "twist": 0.2}],
            "legs": [{"pants": 0, "cuff": 0, "length": 1}, {"pants": 0, "cuff": 1, "length": 2},
                     {"pants": 1, "cuff": 1, "length": 1}, {"pants": 1, "cuff": 2, "length": 2}]}}"#,
    );
    assert_eq!(
        json(&w.path(&s))["data"]["surface"]["boundary"]
            .as_array()
            .unwrap()
            .len(),
        4
    );
}

#[test]
fn spectrum_csv_and_empty_spectrum() {
    let w = Work::new();
    let s = w.build("p", PANTS_222);
    w.ok(&[
        "spectrum", &s, "--cutoff", "8", "--format", "csv", "-o", "p.csv",
    ]);
    let csv = std::fs::read_to_string(w.path("p.csv")).unwrap();
    assert!(csv.lines().count() > 10);
    let side = json(&w.path("p.csv.manifest.json"));
    assert_eq!(side["manifest"]["certificates"][0], "spectrum: certified");

    let out = w.ok(&["spectrum", &s, "--cutoff", "0.01"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["data"]["entries"].as_array().unwrap().len(), 0);
    assert_eq!(doc["data"]["certificate"], "certified");

    assert_eq!(w.run(&["spectrum", &s]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_detects_tampering() {
    let w = Work::new();
    let s = w.build("p", PANTS_222);
    w.ok(&["spectrum", &s, "--cutoff", "10", "-o", "sp.json"]);
    let out = w.run(&[
        "verify",
        &s,
        "sp.json",
        "--identity",
        "basmajian",
        "--tol",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["data"]["verdict"], "pass");

    let mut doc = json(&w.path("sp.json"));
    let l = doc["data"]["entries"][0]["length"].as_f64().unwrap();
    doc["data"]["entries"][0]["length"] = (l + 0.25).into();
    w.write(
        "tampered.json",
        &serde_json::to_string_pretty(&doc).unwrap(),
    );
    let out = w.run(&[
        "verify",
        &s,
        "tampered.json",
        "--identity",
        "basmajian",
        "--tol",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["data"]["verdict"], "fail");
    assert_eq!(report["data"]["spectrum_intact"], false);
}

#[test]
fn wrong_schema_is_an_input_error() {
    let w = Work::new();
    let s = w.build("p", PANTS_222);
    assert_eq!(w.run(&["reconstruct", &s]).status.code(), Some(2));
}

#[test]
fn covers_k1_reports_isospectral_family() {
    let w = Work::new();
    let start = std::time::Instant::now();
    let out = w.ok(&["covers", "--k", "1", "--cutoff", "5"]);
    assert!(start.elapsed().as_secs() < 60);
    let d = &stdout_json(&out)["data"];
    assert_eq!(d["all_ok"], true);
    assert_eq!(d["covers"].as_array().unwrap().len(), 2);
    assert_eq!(
        d["covers"][0]["multiplicity_audit"]["verdict"],
        "isospectral"
    );
    assert_eq!(w.run(&["covers", "--k", "5"]).status.code(), Some(3));
}

#[test]
fn exponents_write_radii_and_reject_few_cutoffs() {
    let w = Work::new();
    let s = w.build("p", PANTS_222);
    let out = w.ok(&[
        "exponents",
        &s,
        "--cutoffs",
        "6,7,8,9,10",
        "--radii-csv",
        "radii.csv",
    ]);
    let d = &stdout_json(&out)["data"];
    assert_eq!(d["radius_bound_ok"], true);
    let csv = std::fs::read_to_string(w.path("radii.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[0] <= f[3] * (1.0 + 1e-12), "{row}");
    }
    assert_eq!(
        w.run(&["exponents", &s, "--cutoffs", "6,7"]).status.code(),
        Some(3)
    );
}

#[test]
fn reconstruct_torus_and_reject_pants() {
    let w = Work::new();
    let mut params = Vec::new();
    for t in ["0.3", "-0.3"] {
        let spec = format!(
            r#"{{"kind": "one_holed_torus", "boundary_lengths": [2.5], "interior_curves": [{{"length": 1.0, "twist": {t}}}]}}"#
        );
        let s = w.build(&format!("t{t}"), &spec);
        let sp = format!("t{t}.spectrum.json");
        w.ok(&["spectrum", &s, "--cutoff", "10", "-o", &sp]);
        let d = stdout_json(&w.ok(&["reconstruct", &sp]))["data"].clone();
        params.push([
            d["l_gamma"].as_f64().unwrap(),
            d["l_alpha"].as_f64().unwrap(),
            d["twist_abs"].as_f64().unwrap(),
        ]);
    }
    for (p, want) in params[0].iter().zip([2.5, 1.0, 0.3]) {
        assert!((p - want).abs() < 1e-6);
    }
    for (a, b) in params[0].iter().zip(&params[1]) {
        assert!((a - b).abs() < 1e-9);
    }

    let s = w.build("p", PANTS_222);
    w.ok(&["spectrum", &s, "--cutoff", "8", "-o", "p.json"]);
    let out = w.run(&["reconstruct", "p.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inconsistent"));
}

#[test]
fn compare_self_and_perturbed() {
    let w = Work::new();
    let a = w.build("a", PANTS_222);
    let b = w.build(
        "b",
        r#"{"kind": "pants", "boundary_lengths": [2, 2, 2.001]}"#,
    );
    w.ok(&["spectrum", &a, "--cutoff", "8", "-o", "a.json"]);
    w.ok(&["spectrum", &b, "--cutoff", "8", "-o", "b.json"]);
    let same = stdout_json(&w.ok(&["compare", "a.json", "a.json"]));
    assert_eq!(same["data"]["verdict"], "isospectral");
    let diff = stdout_json(&w.ok(&["compare", "a.json", "b.json"]));
    assert_eq!(diff["data"]["verdict"], "distinct");
}

#[test]
fn mckean_and_pinching_run() {
    let w = Work::new();
    let s = w.build("p", PANTS_222);
    w.ok(&["spectrum", &s, "--cutoff", "10", "-o", "p.json"]);
    let d = stdout_json(&w.ok(&["mckean", &s, "p.json"]))["data"].clone();
    assert_eq!(d["sound"], true);
    assert!(d["bound"].as_f64().unwrap() > 0.0);
    let d = stdout_json(&w.ok(&["pinching", "--eps", "0.4,0.2", "--n", "3"]))["data"].clone();
    assert_eq!(d["all_matched"], true);
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let w = Work::new();
    let s = w.build("t", r#"{"kind": "one_holed_torus", "boundary_lengths": [2], "interior_curves": [{"length": 0.8, "twist": 0.1}]}"#);
    let runs: Vec<Vec<u8>> = ["1", "3", "1"]
        .iter()
        .map(|n| {
            w.ok(&["--threads", n, "spectrum", &s, "--cutoff", "8"])
                .stdout
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}
