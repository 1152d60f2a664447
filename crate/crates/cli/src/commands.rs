use plate6::constitutive::{InequalityCheck, MaterialAssessment};
use plate6::io::{
    read_fields, read_versioned, write_fields, write_history, write_strains, write_versioned, write_vtk, IoError,
    MaterialSpec, Problem, RunConfig, VerifySource,
};
use plate6::solver::{
    equilibrium_residual, equivalence_audit, gradient_check, initial_guess, invariance_check, minimize,
    random_configuration, GradientCheckReport, InvarianceReport, NodeResidualNorms, SolveReport, SolverError,
};
use plate6::Configuration;
use serde::Serialize;
use std::fmt;
use std::path::{Path, PathBuf};

/// Directional derivatives this close in absolute terms count as agreeing,
/// whatever their ratio; relevant at stationary points.
const ZERO_GRADIENT_ABS: f64 = 1e-10;

/// Largest discrepancy accepted by the equivalence audit.
const EQUIVALENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input.
    Input(String),
    /// The computation itself broke down (for example a non-finite energy).
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn output_dir(flag: Option<&Path>, configured: Option<&Path>) -> Result<Option<PathBuf>, CliError> {
    let Some(dir) = flag.or(configured) else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(Some(dir.to_path_buf()))
}

fn mark(holds: bool) -> &'static str {
    if holds {
        "ok  "
    } else {
        "FAIL"
    }
}

fn print_checks(title: &str, checks: &[InequalityCheck]) {
    println!("{title}:");
    for c in checks {
        println!("  {} {}  ({:e})", mark(c.holds), c.label, c.value);
    }
}

fn print_assessment(a: &MaterialAssessment) {
    println!("material: {}", a.kind);
    if let Some(p) = &a.parameters {
        print_checks("parameters", p);
    }
    if let Some(r) = &a.cosserat_regime {
        print_checks("cosserat regime", r);
    }
    if let Some(m) = &a.coefficients {
        println!("coefficients: alpha = {:?}, beta = {:?}", m.alpha, m.beta);
    }
    if let Some(d) = &a.definiteness {
        print_checks("definiteness", &d.inequalities);
        println!("membrane coercivity constant: {:e}", d.membrane_constant);
        println!("bending coercivity constant: {:e}", d.bending_constant);
    }
    if let Some((lhs, rhs)) = a.couple_modulus_identity {
        println!("alpha3 - alpha2 = {lhs:e}, 2 h mu_c = {rhs:e}");
    }
    if let Some(c) = &a.coercivity {
        println!("smallest eigenvalue: {:e}", c.min_eigenvalue);
        println!("coercivity constant: {:e}", c.constant);
    }
    for w in &a.warnings {
        println!("warning: {w}");
    }
    let violated: Vec<&str> = a
        .parameters
        .iter()
        .chain(a.cosserat_regime.iter())
        .flatten()
        .chain(a.definiteness.iter().flat_map(|d| d.violated()))
        .filter(|c| !c.holds)
        .map(|c| c.label.as_str())
        .collect();
    if !violated.is_empty() {
        println!("violated: {}", violated.join("; "));
    }
    println!("result: {}", if a.pass { "pass" } else { "fail" });
}

pub fn check_material(path: &Path, output: Option<&Path>) -> Result<bool, CliError> {
    let spec: MaterialSpec = read_versioned(path)?;
    let a = spec
        .assess()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for w in &a.warnings {
        log::warn!("{w}");
    }
    print_assessment(&a);
    if let Some(dir) = output_dir(output, None)? {
        write_versioned(&dir.join("check.json"), &a)?;
    }
    Ok(a.pass)
}

fn require_admissible(pr: &Problem) -> Result<(), CliError> {
    let a = pr
        .material_spec
        .assess()
        .map_err(|e| CliError::Input(e.to_string()))?;
    for w in &a.warnings {
        log::warn!("{w}");
    }
    if a.pass {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "material fails its definiteness check; run check-material on {}",
            pr.config_path.display()
        )))
    }
}

fn run_solver(pr: &Problem) -> Result<(Configuration, SolveReport), CliError> {
    require_admissible(pr)?;
    let init = initial_guess(&pr.grid, &pr.boundary);
    minimize(&pr.grid, &pr.material, &pr.loads, &pr.boundary, &pr.settings, &init).map_err(|e| match e {
        SolverError::Functional(_) => CliError::Failure(e.to_string()),
        _ => CliError::Input(e.to_string()),
    })
}

pub fn solve(config: &Path, output: Option<&Path>, seed: Option<u64>) -> Result<bool, CliError> {
    let mut pr = RunConfig::load(config)?;
    if let Some(s) = seed {
        pr.settings.seed = s;
    }
    let dir = output_dir(output, Some(&pr.output_dir))?.expect("configured output directory");
    let (state, report) = run_solver(&pr)?;
    let residual = equilibrium_residual(&pr.grid, &state, &pr.material, &pr.loads, None)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    write_fields(&dir.join("fields.csv"), &pr.grid, &state)?;
    write_strains(&dir.join("strains.csv"), &pr.grid, &state, &pr.material)?;
    write_history(&dir.join("history.csv"), &report.history)?;
    write_versioned(&dir.join("report.json"), &report)?;
    write_versioned(&dir.join("residual.json"), &residual)?;
    if pr.vtk {
        write_vtk(&dir.join("fields.vtk"), &pr.grid, &state)?;
    }
    let b = &report.final_breakdown;
    println!("converged: {}", report.converged);
    println!("iterations: {}", report.iterations);
    println!("termination: {:?}", report.termination);
    println!("final gradient norm: {:e}", report.final_grad_norm);
    println!(
        "energy: total {:e}, membrane {:e}, bending {:e}, load potential {:e}",
        b.total, b.membrane, b.bending, b.load_potential
    );
    println!("residual max: force {:e}, moment {:e}", residual.force.max, residual.moment.max);
    println!("output: {}", dir.display());
    Ok(report.converged)
}

#[derive(Debug, Serialize)]
struct ResidualSummary {
    force: NodeResidualNorms,
    moment: NodeResidualNorms,
    interior_nodes: usize,
    tolerance: Option<f64>,
    pass: Option<bool>,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    source: VerifySource,
    seed: u64,
    gradient: GradientCheckReport,
    gradient_tolerance: f64,
    gradient_pass: bool,
    invariance: InvarianceReport,
    invariance_tolerance: f64,
    invariance_pass: bool,
    residual: ResidualSummary,
    pass: bool,
}

pub fn verify(config: &Path, output: Option<&Path>, seed: Option<u64>, tolerance: Option<f64>) -> Result<bool, CliError> {
    let mut pr = RunConfig::load(config)?;
    if let Some(s) = seed {
        pr.settings.seed = s;
    }
    if let Some(t) = tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Input(format!("--tolerance must be a positive number, got {t}")));
        }
        pr.verify.gradient_tolerance = t;
    }
    let dir = output_dir(output, Some(&pr.output_dir))?.expect("configured output directory");
    let seed = pr.settings.seed;
    let v = pr.verify.clone();
    let state = match &v.source {
        VerifySource::Solve => run_solver(&pr)?.0,
        VerifySource::Reference => Configuration::reference(&pr.grid),
        VerifySource::Random { amplitude } => random_configuration(&pr.grid, *amplitude, seed),
        VerifySource::Fields { path } => read_fields(path, &pr.grid)?,
    };
    let failure = |e: plate6::functional::FunctionalError| CliError::Failure(e.to_string());
    let mask = pr.boundary.mask(pr.grid.node_count());
    let gradient = gradient_check(&pr.grid, &state, &pr.material, &pr.loads, Some(&mask), v.fd_step, v.directions, seed)
        .map_err(failure)?;
    let gradient_pass =
        gradient.max_relative_error <= v.gradient_tolerance || gradient.max_absolute_error <= ZERO_GRADIENT_ABS;
    let invariance = invariance_check(&pr.grid, &state, &pr.material, v.motions, seed).map_err(failure)?;
    let invariance_pass = invariance.passes(v.invariance_tolerance);
    let r = equilibrium_residual(&pr.grid, &state, &pr.material, &pr.loads, None).map_err(failure)?;
    let residual_pass = v.residual_tolerance.map(|t| r.force.max <= t && r.moment.max <= t);
    let pass = gradient_pass && invariance_pass && residual_pass.unwrap_or(true);
    let report = VerifyReport {
        source: v.source.clone(),
        seed,
        gradient,
        gradient_tolerance: v.gradient_tolerance,
        gradient_pass,
        invariance,
        invariance_tolerance: v.invariance_tolerance,
        invariance_pass,
        residual: ResidualSummary {
            force: r.force,
            moment: r.moment,
            interior_nodes: r.interior_nodes,
            tolerance: v.residual_tolerance,
            pass: residual_pass,
        },
        pass,
    };
    write_versioned(&dir.join("verify.json"), &report)?;
    println!(
        "{} gradient check: max relative error {:e}, max absolute error {:e} over {} directions (tolerance {:e})",
        mark(gradient_pass),
        gradient.max_relative_error,
        gradient.max_absolute_error,
        gradient.directions,
        v.gradient_tolerance
    );
    println!(
        "{} invariance: energy change {:e}, strain change {:e} over {} motions (tolerance {:e})",
        mark(invariance_pass),
        report.invariance.max_relative_energy_change,
        report.invariance.max_strain_change,
        report.invariance.motions,
        v.invariance_tolerance
    );
    let residual_mark = residual_pass.map_or("info", mark);
    println!(
        "{residual_mark} residual: force max {:e}, moment max {:e} on {} interior nodes",
        r.force.max, r.moment.max, r.interior_nodes
    );
    println!("result: {}", if pass { "pass" } else { "fail" });
    Ok(pass)
}

pub fn equivalence(path: &Path, output: Option<&Path>, seed: u64, samples: usize) -> Result<bool, CliError> {
    let spec: MaterialSpec = read_versioned(path)?;
    let MaterialSpec::Cosserat(cp) = spec else {
        return Err(CliError::Input(format!("{}: equivalence needs a cosserat material", path.display())));
    };
    if cp.p != 1.0 || cp.a4 != 0.0 {
        return Err(CliError::Input(format!(
            "{}: the identification requires p = 1 and a4 = 0 (got p = {}, a4 = {})",
            path.display(),
            cp.p,
            cp.a4
        )));
    }
    if samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let report = equivalence_audit(&cp, samples, seed).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let pass = report.max_relative_discrepancy <= EQUIVALENCE_TOLERANCE;
    println!("samples: {}", report.samples);
    println!("fitted kappa: {}", report.fitted_kappa);
    println!("max relative discrepancy at fitted kappa: {:e}", report.max_relative_discrepancy);
    println!(
        "max relative discrepancy at input kappa {}: {:e}",
        cp.kappa, report.max_relative_discrepancy_input_kappa
    );
    println!("membrane-only discrepancy over kappa: {:e}", report.membrane_only_max_discrepancy);
    println!("alpha3 - alpha2 - 2 h mu_c: {:e}", report.couple_modulus_residual);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("result: {}", if pass { "pass" } else { "fail" });
    if let Some(dir) = output_dir(output, None)? {
        write_versioned(&dir.join("equivalence.json"), &report)?;
    }
    Ok(pass)
}
