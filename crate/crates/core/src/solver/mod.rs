//! Riemannian first-order minimization of the total potential and the
//! verification suite built around it.
//!
//! Iterates move along tangent directions with the exact retraction
//! `y ← y + t d_y`, `Q ← exp(t d_Q) Q`; step lengths come from Armijo
//! backtracking on the total energy. The result is a stationary point, not
//! a certified global minimizer, since `I` is non-convex in `(y, Q)`.

mod precondition;
mod verify;

pub use precondition::ReferenceHessian;
pub use verify::{
    equilibrium_residual, equivalence_audit, gradient_check, invariance_check, random_configuration, EquivalenceReport,
    GradientCheckReport, InvarianceReport, NodeResidualNorms, ResidualReport,
};

use crate::constitutive::Material;
use crate::functional::{
    apply_boundary, energy_and_gradient, retract, BoundaryData, BoundaryMode, DofMask, EnergyBreakdown,
    FunctionalError, Gradient, LoadSpec,
};
use crate::grid::{Configuration, Edge, EdgeKind, PlateGrid};
use crate::so3::{exp_so3, log_so3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

/// Smallest trial step before the line search gives up.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradientDescent,
    NonlinearCg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    /// Reference-configuration Hessian, factored once.
    ReferenceHessian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Threshold on the masked RMS gradient per free DOF.
    pub grad_tolerance: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
    pub method: Method,
    pub preconditioner: Preconditioner,
    pub seed: u64,
    /// Extra starts from randomly perturbed initial guesses; the lowest energy wins.
    pub restarts: usize,
    pub restart_amplitude: f64,
    /// Rotations drifting further than this from SO(3) are re-projected.
    pub reproject_threshold: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iterations: 10_000,
            grad_tolerance: 1e-8,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            initial_step: 1.0,
            method: Method::GradientDescent,
            preconditioner: Preconditioner::ReferenceHessian,
            seed: 0,
            restarts: 0,
            restart_amplitude: 1e-3,
            reproject_threshold: 1e-13,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        let mut bad = Vec::new();
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            bad.push("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            bad.push("backtrack_factor must lie in (0, 1)");
        }
        if !(self.grad_tolerance > 0.0) {
            bad.push("grad_tolerance must be > 0");
        }
        if !(self.initial_step > 0.0) {
            bad.push("initial_step must be > 0");
        }
        if !(self.reproject_threshold > 0.0) {
            bad.push("reproject_threshold must be > 0");
        }
        if !(self.restart_amplitude >= 0.0) {
            bad.push("restart_amplitude must be >= 0");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SolverError::Settings(bad.join("; ")))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("material is not admissible: {0}")]
    Material(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub total: f64,
    pub membrane: f64,
    pub bending: f64,
    pub load_potential: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailure { iteration: usize, last_step: f64, slope: f64 },
    /// Accepted steps stopped lowering the energy: the roundoff floor.
    Stagnated { iteration: usize },
}

/// Consecutive non-decreasing accepted steps that count as stagnation.
const STAGNATION_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub final_grad_norm: f64,
    pub final_breakdown: EnergyBreakdown,
    pub initial_breakdown: EnergyBreakdown,
    pub termination: Termination,
    pub history: Vec<HistoryEntry>,
    pub restarts_tried: usize,
    /// Excluded from reproducibility comparisons.
    pub wall_time: f64,
}

impl SolveReport {
    /// `history` without wall-clock time, for determinism checks.
    pub fn deterministic_eq(&self, other: &SolveReport) -> bool {
        SolveReport {
            wall_time: 0.0,
            ..self.clone()
        } == SolveReport {
            wall_time: 0.0,
            ..other.clone()
        }
    }
}

/// Masked RMS gradient per free degree of freedom.
pub fn masked_rms(g: &Gradient, mask: &DofMask) -> f64 {
    let free = mask.free_dof_count();
    if free == 0 {
        0.0
    } else {
        (g.norm_squared() / free as f64).sqrt()
    }
}

/// Boundary-data extension used as the default starting point.
///
/// Displacements are blended from the Dirichlet edges with inverse-square
/// distance weights; rotations are the identity except on Dirichlet nodes
/// (clamped mode) and a half-way geodesic blend one cell away from them.
pub fn initial_guess(grid: &PlateGrid, bd: &BoundaryData) -> Configuration {
    let mut config = Configuration::reference(grid);
    let [n1, n2] = grid.nodes();
    let mut u_star = vec![None; grid.node_count()];
    let mut q_star = vec![None; grid.node_count()];
    for (k, &n) in bd.nodes.iter().enumerate() {
        u_star[n] = Some(bd.y_star[k] - grid.reference_position(n));
        if let Some(q) = &bd.q_star {
            q_star[n] = Some(q[k]);
        }
    }
    let dirichlet: Vec<Edge> = Edge::ALL
        .into_iter()
        .filter(|e| grid.edge_kind(*e) == EdgeKind::Dirichlet)
        .collect();
    for n in 0..grid.node_count() {
        if u_star[n].is_some() {
            continue;
        }
        let (i, j) = grid.node_ij(n);
        let (mut acc, mut wsum) = (Vec3::zeros(), 0.0);
        let mut nearest: Option<(usize, usize)> = None;
        for e in &dirichlet {
            let (foot, steps) = match e {
                Edge::Left => (grid.node(0, j), i),
                Edge::Right => (grid.node(n1 - 1, j), n1 - 1 - i),
                Edge::Bottom => (grid.node(i, 0), j),
                Edge::Top => (grid.node(i, n2 - 1), n2 - 1 - j),
            };
            let x = grid.reference_position(n) - grid.reference_position(foot);
            let w = 1.0 / x.norm_squared();
            acc += w * u_star[foot].unwrap_or_else(Vec3::zeros);
            wsum += w;
            if nearest.is_none_or(|(_, s)| steps < s) {
                nearest = Some((foot, steps));
            }
        }
        config.y[n] += acc / wsum;
        if let Some((foot, 1)) = nearest {
            if let Some(q) = q_star[foot] {
                if let Ok(phi) = log_so3(&q) {
                    config.q[n] = exp_so3(&(0.5 * phi));
                }
            }
        }
    }
    apply_boundary(&config, bd)
}

struct Run {
    config: Configuration,
    report: SolveReport,
}

/// Minimizes the total potential over the admissible set defined by `bd`.
pub fn minimize(
    grid: &PlateGrid,
    material: &Material,
    loads: &LoadSpec,
    bd: &BoundaryData,
    settings: &SolverSettings,
    initial: &Configuration,
) -> Result<(Configuration, SolveReport), SolverError> {
    settings.validate()?;
    loads.validate(grid)?;
    bd.validate(grid)?;
    let assessment = material.assess();
    if !assessment.pass {
        log::warn!("material fails its admissibility checks; the minimization may be ill-posed");
    }
    let start = Instant::now();
    let mask = bd.mask(grid.node_count());
    let precond = match settings.preconditioner {
        Preconditioner::None => None,
        Preconditioner::ReferenceHessian => Some(ReferenceHessian::assemble(grid, material, &mask)?),
    };
    let base = apply_boundary(initial, bd);
    let mut best = run(grid, material, loads, &mask, settings, precond.as_ref(), base.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for r in 0..settings.restarts {
        let mut perturbed = base.clone();
        for n in 0..grid.node_count() {
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let w = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if !mask.y_fixed[n] {
                perturbed.y[n] += settings.restart_amplitude * v;
            }
            if !mask.q_fixed[n] {
                perturbed.q[n] = exp_so3(&(settings.restart_amplitude * w)).compose(&perturbed.q[n]);
            }
        }
        let candidate = run(grid, material, loads, &mask, settings, precond.as_ref(), perturbed)?;
        log::info!(
            "restart {}: energy {:e} (best {:e})",
            r + 1,
            candidate.report.final_breakdown.total,
            best.report.final_breakdown.total
        );
        let better = candidate.report.final_breakdown.total < best.report.final_breakdown.total
            && candidate.report.final_breakdown.total <= best.report.initial_breakdown.total;
        if better && (candidate.report.converged || !best.report.converged) {
            best = candidate;
        }
    }
    best.report.restarts_tried = settings.restarts;
    best.report.wall_time = start.elapsed().as_secs_f64();
    Ok((best.config, best.report))
}

fn entry(iteration: usize, e: &EnergyBreakdown, grad_norm: f64, step: f64) -> HistoryEntry {
    HistoryEntry {
        iteration,
        total: e.total,
        membrane: e.membrane,
        bending: e.bending,
        load_potential: e.load_potential,
        grad_norm,
        step,
    }
}

fn run(
    grid: &PlateGrid,
    material: &Material,
    loads: &LoadSpec,
    mask: &DofMask,
    settings: &SolverSettings,
    precond: Option<&ReferenceHessian>,
    mut x: Configuration,
) -> Result<Run, SolverError> {
    let (mut e, mut g) = energy_and_gradient(grid, &x, material, loads)?;
    mask.apply(&mut g);
    let initial_breakdown = e;
    let mut gn = masked_rms(&g, mask);
    let mut history = vec![entry(0, &e, gn, 0.0)];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let mut prev: Option<(Gradient, Gradient, Gradient)> = None; // (g, P g, d)
    let mut prev_step = settings.initial_step;
    let mut prev_slope = 0.0;
    let mut flat_steps = 0;

    if gn < settings.grad_tolerance {
        termination = Termination::Converged;
    }
    while termination == Termination::MaxIterations && iterations < settings.max_iterations {
        let pg = match precond {
            Some(h) => {
                let mut z = h.apply(&g);
                mask.apply(&mut z);
                z
            }
            None => g.clone(),
        };
        let mut d = pg.clone();
        d.scale(-1.0);
        if let (Method::NonlinearCg, Some((g0, pg0, d0))) = (settings.method, &prev) {
            // Polak–Ribière+ in the preconditioned metric.
            let denom = g0.dot(pg0);
            let beta = if denom > 0.0 { ((g.dot(&pg) - g0.dot(&pg)) / denom).max(0.0) } else { 0.0 };
            d.scaled_add(beta, d0);
            if g.dot(&d) >= 0.0 {
                d = pg.clone();
                d.scale(-1.0);
            }
        }
        let slope = g.dot(&d);
        if !(slope < 0.0) {
            termination = Termination::LineSearchFailure {
                iteration: iterations + 1,
                last_step: 0.0,
                slope,
            };
            break;
        }
        let mut t = if precond.is_some() || prev.is_none() || settings.method == Method::GradientDescent && prev_slope == 0.0 {
            settings.initial_step
        } else {
            (prev_step * prev_slope / slope).clamp(MIN_STEP, 1e12 * settings.initial_step)
        };
        let accepted = loop {
            let trial = retract(&x, &d, t);
            match energy_and_gradient(grid, &trial, material, loads) {
                Ok((et, gt)) if et.total <= e.total + settings.armijo_c * t * slope => break Some((trial, et, gt)),
                Ok(_) => {}
                Err(FunctionalError::Kinematics(err)) => {
                    log::debug!("trial step {t:e} left the log domain: {err}");
                }
                Err(other) => return Err(other.into()),
            }
            t *= settings.backtrack_factor;
            if t < MIN_STEP {
                break None;
            }
        };
        iterations += 1;
        let Some((mut trial, et, mut gt)) = accepted else {
            termination = Termination::LineSearchFailure {
                iteration: iterations,
                last_step: t,
                slope,
            };
            break;
        };
        let mut reprojected = false;
        for (n, q) in trial.q.iter_mut().enumerate() {
            if !mask.q_fixed[n] && q.drift() > settings.reproject_threshold {
                *q = q.renormalized(0.0);
                reprojected = true;
            }
        }
        let et = if reprojected {
            let (er, gr) = energy_and_gradient(grid, &trial, material, loads)?;
            gt = gr;
            // Projection moves Q by roundoff only; keep the history monotone.
            if er.total > e.total {
                log::debug!("re-projection raised the energy by {:e}", er.total - e.total);
            }
            er
        } else {
            et
        };
        mask.apply(&mut gt);
        flat_steps = if et.total < e.total { 0 } else { flat_steps + 1 };
        prev = Some((g, pg, d));
        prev_step = t;
        prev_slope = slope;
        x = trial;
        e = et;
        g = gt;
        gn = masked_rms(&g, mask);
        history.push(entry(iterations, &e, gn, t));
        if gn < settings.grad_tolerance {
            termination = Termination::Converged;
        } else if flat_steps >= STAGNATION_STEPS {
            termination = Termination::Stagnated { iteration: iterations };
        }
    }
    let report = SolveReport {
        converged: termination == Termination::Converged,
        iterations,
        energy_history: history.iter().map(|h| h.total).collect(),
        final_grad_norm: gn,
        final_breakdown: e,
        initial_breakdown,
        termination,
        history,
        restarts_tried: 0,
        wall_time: 0.0,
    };
    Ok(Run { config: x, report })
}

/// Convenience wrapper: clamped or relaxed reference boundary data and the default initial guess.
pub fn solve_from_boundary(
    grid: &PlateGrid,
    material: &Material,
    loads: &LoadSpec,
    mode: BoundaryMode,
    settings: &SolverSettings,
) -> Result<(Configuration, SolveReport), SolverError> {
    let bd = BoundaryData::reference(grid, mode);
    minimize(grid, material, loads, &bd, settings, &initial_guess(grid, &bd))
}
