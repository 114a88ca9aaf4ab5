use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const ORIG: &str = "k,t\nA,x\nA,y\nB,y\nC,z\nD,x\n";
const SYN: &str = "k,t\nA,x\nB,y\nB,x\nE,z\nD,y\n";

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("orig.csv"), ORIG).unwrap();
        std::fs::write(dir.path().join("syn.csv"), SYN).unwrap();
        Fixture { dir }
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
        Command::new(env!("CARGO_BIN_EXE_disclosure-risk"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }
}

fn toy5_args<'a>(sub: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![sub, "--orig", "orig.csv", "--syn", "syn.csv", "--keys", "k"];
    v.extend_from_slice(extra);
    v
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn text_report_has_identity_line() {
    let f = Fixture::new();
    let text = f.ok(&toy5_args("multi", &[]));
    assert!(text.contains("For original  ( UiO )  60.00 %"), "{text}");
    assert!(text.contains("For synthetic ( repU ) 20.00 %"), "{text}");
}

#[test]
fn json_report_matches_toy5() {
    let f = Fixture::new();
    let v: Value =
        serde_json::from_str(&f.ok(&toy5_args("disclosure", &["--targets", "t", "--format", "json"]))).unwrap();
    assert_eq!(v["schema_version"], 1);
    let rep = &v["targets"][0]["replicates"][0];
    assert_eq!(rep["attrib"]["DiSCO"], 20.0);
    assert_eq!(rep["allCAPs"]["DCAP_b"], 37.5);
    assert_eq!(v["ident"][0]["repU"], 20.0);
}

#[test]
fn csv_and_svg_formats() {
    let f = Fixture::new();
    let csv = f.ok(&toy5_args("multi", &["--format", "csv"]));
    assert!(csv.starts_with("target,replicate,measure,value\n"));
    assert!(csv.lines().any(|l| l == "t,1,DiSCO,20"), "{csv}");
    let svg = f.ok(&toy5_args("multi", &["--format", "svg"]));
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn out_flag_writes_file() {
    let f = Fixture::new();
    let stdout = f.ok(&toy5_args("multi", &["--format", "json", "--out", "r.json"]));
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(f.path("r.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "multi");
}

#[test]
fn config_errors_exit_2() {
    let f = Fixture::new();
    let out = f.run(&toy5_args("disclosure", &["--targets", "k"]));
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let out = f.run(&["multi", "--orig", "orig.csv", "--syn", "syn.csv"]);
    assert_eq!(code(&out), 2);
    let out = f.run(&toy5_args("multi", &["--targets", "nope"]));
    assert_eq!(code(&out), 2);
    let out = f.run(&toy5_args("multi", &["--format", "pdf"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn data_errors_exit_1() {
    let f = Fixture::new();
    f.write("ragged.csv", "k,t\nA,x\nB\n");
    let out = f.run(&["multi", "--orig", "ragged.csv", "--syn", "syn.csv", "--keys", "k"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let out = f.run(&["multi", "--orig", "missing.csv", "--syn", "syn.csv", "--keys", "k"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn flags_override_config_file() {
    let f = Fixture::new();
    f.write(
        "run.json",
        r#"{"orig": "orig.csv", "syn": ["syn.csv"], "keys": ["k"], "format": "csv"}"#,
    );
    let csv = f.ok(&["multi", "--config", "run.json"]);
    assert!(csv.starts_with("target,replicate"));
    let json = f.ok(&["multi", "--config", "run.json", "--format", "json"]);
    assert!(serde_json::from_str::<Value>(&json).is_ok());
}

#[test]
fn several_replicates() {
    let f = Fixture::new();
    let args = |format| {
        let mut v = vec!["multi", "--orig", "orig.csv", "--keys", "k", "--format", format];
        for _ in 0..5 {
            v.extend_from_slice(&["--syn", "syn.csv"]);
        }
        v
    };
    let v: Value = serde_json::from_str(&f.ok(&args("json"))).unwrap();
    assert_eq!(v["targets"][0]["replicates"].as_array().unwrap().len(), 5);
    assert_eq!(v["ident"].as_array().unwrap().len(), 5);
    assert!(f.ok(&args("text")).contains("Disclosure risk for 5 records"));
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn synth_is_seeded() {
    let f = Fixture::new();
    f.ok(&[
        "synth", "--orig", "orig.csv", "--out", "a.csv", "--n", "50", "--seed", "9",
    ]);
    f.ok(&[
        "synth", "--orig", "orig.csv", "--out", "b.csv", "--n", "50", "--seed", "9",
    ]);
    let a = read(&f.path("a.csv"));
    assert_eq!(a, read(&f.path("b.csv")));
    assert_eq!(a.lines().count(), 51);
    let rows: Vec<&str> = ORIG.lines().skip(1).collect();
    assert!(a.lines().skip(1).all(|l| rows.contains(&l)));

    f.ok(&[
        "synth",
        "--orig",
        "orig.csv",
        "--out",
        "m.csv",
        "--m",
        "3",
        "--mode",
        "independent_marginals",
    ]);
    for i in 1..=3 {
        assert_eq!(read(&f.path(&format!("m_{i}.csv"))).lines().count(), 6);
    }
}

#[test]
fn strip_uniques_removes_replicated_unique() {
    let f = Fixture::new();
    let out = f.ok(&["strip-uniques", "--orig", "orig.csv", "--syn", "syn.csv", "--keys", "k"]);
    assert_eq!(out, "k,t\nA,x\nB,y\nB,x\nE,z\n");
    f.write("stripped.csv", &out);
    let v: Value = serde_json::from_str(&f.ok(&[
        "multi",
        "--orig",
        "orig.csv",
        "--syn",
        "stripped.csv",
        "--keys",
        "k",
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(v["ident"][0]["repU"], 0.0);
}

#[test]
fn sweep_command() {
    let f = Fixture::new();
    let csv = f.ok(&toy5_args("sweep", &["--fractions", "0.4,1", "--format", "csv"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 7, "{csv}");
    let out = f.run(&toy5_args("sweep", &["--fractions", "0.01"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn repeated_runs_are_identical() {
    let f = Fixture::new();
    for format in ["text", "json", "csv", "svg"] {
        let a = f.ok(&toy5_args("multi", &["--format", format]));
        let b = f.ok(&toy5_args("multi", &["--format", format]));
        assert_eq!(a, b, "{format}");
    }
}
