use plate6::io::{read_fields, read_history, read_strains, read_versioned, read_vtk, RunConfig};
use plate6::solver::{ResidualReport, SolveReport};
use std::process::Output;

mod common;
use common::*;

#[test]
fn exit_code_table() {
    let c = Case::new();
    let table = common::exit_code_table(&c);
    for (args, expected) in &table {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = plate6(&refs);
        assert_eq!(code(&o), *expected, "{args:?}\nstdout:\n{}\nstderr:\n{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn check_material_names_the_violated_inequality() {
    let c = Case::new();
    c.write(
        "weak_couple.json",
        r#"{"schema_version":1,"kind":"isotropic_coefficients","alpha":[1,2,1,1],"beta":[1,0,2,1]}"#,
    );
    let o = plate6(&["check-material", "--config", &c.arg("weak_couple.json")]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("FAIL alpha3-alpha2 > 0"), "{out}");
    assert!(out.contains("violated: alpha3-alpha2 > 0"), "{out}");

    let o = plate6(&["check-material", "--config", &c.arg("material.json")]);
    let out = stdout(&o);
    assert!(out.contains("membrane coercivity constant"), "{out}");
    assert!(out.contains("result: pass"));

    c.write("nu.json", &ENGINEERING.replace("0.3", "0.7"));
    let o = plate6(&["check-material", "--config", &c.arg("nu.json")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL 2mu+3lambda > 0"));
}

#[test]
fn malformed_and_missing_inputs_report_their_paths() {
    let c = Case::new();
    c.config("run.json", "");
    std::fs::remove_file(c.path("boundary.json")).unwrap();
    let o = plate6(&["solve", "--config", &c.arg("run.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(&c.arg("boundary.json")), "{}", stderr(&o));

    c.write("bad.json", "{ not json");
    let o = plate6(&["check-material", "--config", &c.arg("bad.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("malformed JSON"));
}

#[test]
fn zero_load_solve_reports_zero_energy() {
    let c = Case::new();
    c.config("run.json", "");
    let o = plate6(&["solve", "--config", &c.arg("run.json"), "--output", &c.arg("out")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: SolveReport = read_versioned(&c.path("out/report.json")).unwrap();
    assert!(report.converged);
    assert_eq!(report.iterations, 0);
    assert_eq!(report.final_breakdown.total, 0.0);
    assert_eq!(report.final_breakdown.membrane, 0.0);
}

#[test]
fn couple_modulus_zero_warns_but_audits() {
    let c = Case::new();
    c.write("mu_c0.json", &COSSERAT.replace(r#""mu_c":0.5"#, r#""mu_c":0"#));
    let o = plate6(&["equivalence", "--config", &c.arg("mu_c0.json"), "--samples", "500"]);
    assert!(stderr(&o).contains("mu_c = 0"), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("fitted kappa"), "{out}");
    assert!(out.contains("result: "));
    assert!(code(&o) == 0 || code(&o) == 1);
}

fn solve_case(c: &Case, out: &str, jobs: &str) -> Output {
    plate6(&["--jobs", jobs, "solve", "--config", &c.arg("run.json"), "--output", &c.arg(out), "--seed", "5"])
}

#[test]
fn reruns_are_byte_identical() {
    let c = Case::new();
    c.config("run.json", r#""loads":"loads.json","solver":{"restarts":1},"output":{"vtk":true}"#);
    let a = solve_case(&c, "a", "1");
    let b = solve_case(&c, "b", "3");
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0);
    for f in ["fields.csv", "strains.csv", "history.csv", "residual.json", "fields.vtk"] {
        let x = std::fs::read(c.path("a").join(f)).unwrap();
        let y = std::fs::read(c.path("b").join(f)).unwrap();
        assert!(x == y, "{f} differs between reruns");
    }
    let ra: SolveReport = read_versioned(&c.path("a/report.json")).unwrap();
    let rb: SolveReport = read_versioned(&c.path("b/report.json")).unwrap();
    assert!(ra.deterministic_eq(&rb));
}

#[test]
fn every_emitted_file_parses_back() {
    let c = Case::new();
    c.config(
        "run.json",
        r#""loads":"loads.json","output":{"directory":"out","vtk":true},
           "verify":{"source":{"fields":{"path":"out/fields.csv"}}}"#,
    );
    let inputs = digest(c.dir.path());
    let o = plate6(&["solve", "--config", &c.arg("run.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = c.path("out");
    let problem = RunConfig::load(&c.path("run.json")).unwrap();
    let grid = &problem.grid;

    let fields = read_fields(&out.join("fields.csv"), grid).unwrap();
    let report: SolveReport = read_versioned(&out.join("report.json")).unwrap();
    assert_eq!(read_history(&out.join("history.csv")).unwrap(), report.history);
    assert_eq!(report.energy_history.len(), report.history.len());
    let strains = read_strains(&out.join("strains.csv")).unwrap();
    assert_eq!(strains.len(), grid.cell_count());
    let residual: ResidualReport = read_versioned(&out.join("residual.json")).unwrap();
    assert_eq!(residual.force_residual.len(), grid.node_count());
    let vtk = read_vtk(&out.join("fields.vtk")).unwrap();
    assert_eq!(vtk.points, fields.y);
    assert_eq!(schema_version(&out.join("report.json")), 1);

    // Verify the stored minimizer, then check and audit into the same directory.
    let o = plate6(&["verify", "--config", &c.arg("run.json")]);
    assert_eq!(code(&o), 0, "{}\n{}", stdout(&o), stderr(&o));
    let o = plate6(&["check-material", "--config", &c.arg("material.json"), "--output", &out.to_string_lossy()]);
    assert_eq!(code(&o), 0);
    let o = plate6(&["equivalence", "--config", &c.arg("cosserat.json"), "--samples", "100", "--output", &out.to_string_lossy()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for f in ["verify.json", "check.json", "equivalence.json", "residual.json"] {
        assert_eq!(schema_version(&out.join(f)), 1, "{f}");
    }
    let v: serde_json::Value = read_versioned(&out.join("verify.json")).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    let e: plate6::solver::EquivalenceReport = read_versioned(&out.join("equivalence.json")).unwrap();
    assert_eq!(e.samples, 100);

    // No subcommand touched its inputs.
    assert_eq!(digest(c.dir.path()), inputs);
}

#[test]
fn non_convergence_still_writes_artifacts() {
    let c = Case::new();
    c.config("run.json", r#""loads":"loads.json","solver":{"max_iterations":2}"#);
    let o = plate6(&["solve", "--config", &c.arg("run.json"), "--output", &c.arg("out")]);
    assert_eq!(code(&o), 1);
    let report: SolveReport = read_versioned(&c.path("out/report.json")).unwrap();
    assert!(!report.converged);
    assert_eq!(read_history(&c.path("out/history.csv")).unwrap().len(), 3);
}
