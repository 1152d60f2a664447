//! Shared helpers for the CLI integration tests and the acceptance suite.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const ENGINEERING: &str = r#"{"schema_version":1,"kind":"engineering","young":1,"poisson":0.3,"thickness":0.1}"#;
pub const CLAMPED: &str = r#"{"schema_version":1,"dirichlet_edges":["left","right","bottom","top"],"mode":"clamped"}"#;
pub const BENDING: &str = r#"{"schema_version":1,"f":{"constant":[0,0,0.001]}}"#;
pub const COSSERAT: &str = r#"{"schema_version":1,"kind":"cosserat","mu":1,"lambda":1,"mu_c":0.5,"l_c":0.1,
    "a4":0,"a5":1,"a6":1,"a7":1,"h":0.1}"#;

pub fn plate6(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plate6"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub struct Case {
    pub dir: tempfile::TempDir,
}

impl Case {
    pub fn new() -> Self {
        let c = Case {
            dir: tempfile::tempdir().unwrap(),
        };
        c.write("material.json", ENGINEERING);
        c.write("boundary.json", CLAMPED);
        c.write("loads.json", BENDING);
        c.write("cosserat.json", COSSERAT);
        c
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    pub fn write(&self, name: &str, text: &str) {
        std::fs::write(self.path(name), text).unwrap();
    }

    /// Run configuration on a 9×9 grid; `extra` is spliced into the top-level object.
    pub fn config(&self, name: &str, extra: &str) {
        let sep = if extra.is_empty() { "" } else { "," };
        self.write(
            name,
            &format!(
                r#"{{"schema_version":1,"grid":{{"lengths":[1,1],"nodes":[9,9],"thickness":0.1}},
                    "material":"material.json","boundary":"boundary.json"{sep}{extra}}}"#
            ),
        );
    }
}

/// Writes the inputs of the exit-code table into `c` and returns `(args, expected code)` rows.
pub fn exit_code_table(c: &Case) -> Vec<(Vec<String>, i32)> {
    c.write("malformed.json", r#"{"schema_version":1,"kind":"engineering","young":"#);
    c.write(
        "weak_couple.json",
        r#"{"schema_version":1,"kind":"isotropic_coefficients","alpha":[1,2,1,1],"beta":[1,0,2,1]}"#,
    );
    c.write("p2.json", &COSSERAT.replace(r#""h":0.1"#, r#""h":0.1,"p":2"#));
    c.write("a4.json", &COSSERAT.replace(r#""a4":0"#, r#""a4":0.5"#));
    c.write("mu_c0.json", &COSSERAT.replace(r#""mu_c":0.5"#, r#""mu_c":0"#));
    c.config("zero.json", r#""output":{"directory":"out_zero"}"#);
    c.config("missing.json", "");
    let text = std::fs::read_to_string(c.path("missing.json")).unwrap();
    c.write("missing.json", &text.replace("boundary.json", "no_such_boundary.json"));
    c.config("short.json", r#""loads":"loads.json","solver":{"max_iterations":1},"output":{"directory":"out_short"}"#);
    c.config("ident.json", r#""verify":{"source":"reference"},"output":{"directory":"out_ident"}"#);
    c.config(
        "random.json",
        r#""loads":"loads.json","verify":{"source":{"random":{"amplitude":0.05}}},"output":{"directory":"out_random"}"#,
    );
    c.config(
        "strict.json",
        r#""loads":"loads.json","verify":{"source":{"random":{"amplitude":0.05}},"residual_tolerance":1e-30},
           "output":{"directory":"out_strict"}"#,
    );
    c.write("fields.csv", "i,j,x1\n0,0,0\n");
    c.config(
        "corrupt.json",
        r#""verify":{"source":{"fields":{"path":"fields.csv"}}},"output":{"directory":"out_corrupt"}"#,
    );

    vec![
        (vec!["check-material".into(), "--config".into(), c.arg("material.json")], 0),
        (vec!["check-material".into(), "--config".into(), c.arg("weak_couple.json")], 1),
        (vec!["check-material".into(), "--config".into(), c.arg("malformed.json")], 2),
        (vec!["check-material".into(), "--config".into(), c.arg("absent.json")], 2),
        (vec!["solve".into(), "--config".into(), c.arg("zero.json")], 0),
        (vec!["solve".into(), "--config".into(), c.arg("missing.json")], 2),
        (vec!["solve".into(), "--config".into(), c.arg("short.json")], 1),
        (vec!["verify".into(), "--config".into(), c.arg("ident.json")], 0),
        (vec!["verify".into(), "--config".into(), c.arg("random.json"), "--tolerance".into(), "1e-6".into()], 0),
        (vec!["verify".into(), "--config".into(), c.arg("strict.json")], 1),
        (vec!["verify".into(), "--config".into(), c.arg("corrupt.json")], 2),
        (vec!["verify".into(), "--config".into(), c.arg("ident.json"), "--tolerance".into(), "-1".into()], 2),
        (vec!["equivalence".into(), "--config".into(), c.arg("cosserat.json"), "--samples".into(), "2000".into()], 0),
        (vec!["equivalence".into(), "--config".into(), c.arg("p2.json")], 2),
        (vec!["equivalence".into(), "--config".into(), c.arg("a4.json")], 2),
        (vec!["equivalence".into(), "--config".into(), c.arg("material.json")], 2),
        (vec!["--jobs".into(), "0".into(), "check-material".into(), "--config".into(), c.arg("material.json")], 2),
        (vec!["no-such-command".into()], 2),
    ]
}

pub fn schema_version(path: &Path) -> u64 {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["schema_version"].as_u64().unwrap()
}

pub fn digest(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    files.sort();
    files
}

