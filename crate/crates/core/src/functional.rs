//! Total potential `I(y, Q) = ∫ W(E, K) dω − Λ(u, Q)` and its gradient.
//!
//! The strain energy uses the midpoint rule over cells; the load potential
//! uses trapezoid weights over nodes and free boundary edges. Couple loads
//! enter through linear functionals `⟨C, Q⟩`.

use crate::constitutive::{EnergySplit, Material};
use crate::grid::{Configuration, GridError, PlateGrid};
use crate::kinematics::{cell_kinematics_with_logs, CellKinematics, EdgeLogs, KinematicsError};
use crate::so3::{axl_of_skew_part, hat, left_jacobian_inverse, Mat3, Rotation, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("non-finite energy density in cell ({}, {})", .cell.0, .cell.1)]
    NonFinite { cell: (usize, usize) },
    #[error("{field} has {got} entries, expected {expected}")]
    LoadShape {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("boundary data: {0}")]
    Boundary(String),
}

/// External loads. `f` and `c_omega` are indexed by node; `n_star` and
/// `c_boundary` follow [`PlateGrid::free_boundary_nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec {
    pub f: Vec<Vec3>,
    pub n_star: Vec<Vec3>,
    pub c_omega: Vec<Mat3>,
    pub c_boundary: Vec<Mat3>,
}

impl LoadSpec {
    pub fn zero(grid: &PlateGrid) -> Self {
        let nb = grid.free_boundary_nodes().len();
        LoadSpec {
            f: vec![Vec3::zeros(); grid.node_count()],
            n_star: vec![Vec3::zeros(); nb],
            c_omega: vec![Mat3::zeros(); grid.node_count()],
            c_boundary: vec![Mat3::zeros(); nb],
        }
    }

    pub fn uniform_force(grid: &PlateGrid, f: Vec3) -> Self {
        LoadSpec {
            f: vec![f; grid.node_count()],
            ..Self::zero(grid)
        }
    }

    pub fn validate(&self, grid: &PlateGrid) -> Result<(), FunctionalError> {
        let nn = grid.node_count();
        let nb = grid.free_boundary_nodes().len();
        for (field, expected, got) in [
            ("f", nn, self.f.len()),
            ("c_omega", nn, self.c_omega.len()),
            ("n_star", nb, self.n_star.len()),
            ("c_boundary", nb, self.c_boundary.len()),
        ] {
            if expected != got {
                return Err(FunctionalError::LoadShape { field, expected, got });
            }
        }
        Ok(())
    }

    /// Spatial couple density induced by `C_ω`: `c = 2 axl(skew(C Qᵀ))`.
    pub fn induced_couple(&self, config: &Configuration) -> Vec<Vec3> {
        self.c_omega
            .iter()
            .zip(&config.q)
            .map(|(c, q)| 2.0 * axl_of_skew_part(&(c * q.matrix().transpose())))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// `y = y*` and `Q = Q*` on the Dirichlet part.
    Clamped,
    /// Only `y = y*`.
    Relaxed,
}

/// Prescribed values on the Dirichlet nodes, aligned with `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub mode: BoundaryMode,
    pub nodes: Vec<usize>,
    pub y_star: Vec<Vec3>,
    pub q_star: Option<Vec<Rotation>>,
}

impl BoundaryData {
    /// Takes the prescribed values from `config` on the grid's Dirichlet nodes.
    pub fn from_configuration(grid: &PlateGrid, config: &Configuration, mode: BoundaryMode) -> Self {
        let nodes = grid.dirichlet_nodes();
        let y_star = nodes.iter().map(|&n| config.y[n]).collect();
        let q_star = match mode {
            BoundaryMode::Clamped => Some(nodes.iter().map(|&n| config.q[n]).collect()),
            BoundaryMode::Relaxed => None,
        };
        BoundaryData {
            mode,
            nodes,
            y_star,
            q_star,
        }
    }

    /// `y* = x`, `Q* = 1`.
    pub fn reference(grid: &PlateGrid, mode: BoundaryMode) -> Self {
        Self::from_configuration(grid, &Configuration::reference(grid), mode)
    }

    pub fn validate(&self, grid: &PlateGrid) -> Result<(), FunctionalError> {
        if self.nodes != grid.dirichlet_nodes() {
            return Err(FunctionalError::Boundary(
                "prescribed nodes differ from the grid's Dirichlet edges".into(),
            ));
        }
        if self.y_star.len() != self.nodes.len() {
            return Err(FunctionalError::Boundary(format!(
                "y_star has {} entries for {} nodes",
                self.y_star.len(),
                self.nodes.len()
            )));
        }
        match (self.mode, &self.q_star) {
            (BoundaryMode::Clamped, Some(q)) if q.len() == self.nodes.len() => Ok(()),
            (BoundaryMode::Clamped, _) => Err(FunctionalError::Boundary(
                "clamped mode needs q_star on every Dirichlet node".into(),
            )),
            (BoundaryMode::Relaxed, None) => Ok(()),
            (BoundaryMode::Relaxed, Some(_)) => {
                Err(FunctionalError::Boundary("relaxed mode must not prescribe q_star".into()))
            }
        }
    }

    pub fn mask(&self, node_count: usize) -> DofMask {
        let mut y_fixed = vec![false; node_count];
        let mut q_fixed = vec![false; node_count];
        for &n in &self.nodes {
            y_fixed[n] = true;
            q_fixed[n] = self.mode == BoundaryMode::Clamped;
        }
        DofMask { y_fixed, q_fixed }
    }
}

/// Which nodal degrees of freedom are held fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMask {
    pub y_fixed: Vec<bool>,
    pub q_fixed: Vec<bool>,
}

impl DofMask {
    pub fn free_dof_count(&self) -> usize {
        3 * (self.y_fixed.iter().filter(|f| !**f).count() + self.q_fixed.iter().filter(|f| !**f).count())
    }

    pub fn apply(&self, g: &mut Gradient) {
        for (v, &fixed) in g.y.iter_mut().zip(&self.y_fixed) {
            if fixed {
                *v = Vec3::zeros();
            }
        }
        for (v, &fixed) in g.q.iter_mut().zip(&self.q_fixed) {
            if fixed {
                *v = Vec3::zeros();
            }
        }
    }
}

/// Overwrites the Dirichlet nodes with the prescribed values.
pub fn apply_boundary(config: &Configuration, bd: &BoundaryData) -> Configuration {
    let mut out = config.clone();
    for (k, &n) in bd.nodes.iter().enumerate() {
        out.y[n] = bd.y_star[k];
        if let (BoundaryMode::Clamped, Some(q)) = (bd.mode, &bd.q_star) {
            out.q[n] = q[k];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub membrane: f64,
    pub bending: f64,
    pub load_potential: f64,
    pub total: f64,
}

/// Nodal gradient: `y` part and left-trivialized rotation part.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub y: Vec<Vec3>,
    pub q: Vec<Vec3>,
}

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Gradient {
            y: vec![Vec3::zeros(); n],
            q: vec![Vec3::zeros(); n],
        }
    }

    pub fn dot(&self, other: &Gradient) -> f64 {
        let a: f64 = self.y.iter().zip(&other.y).map(|(a, b)| a.dot(b)).sum();
        let b: f64 = self.q.iter().zip(&other.q).map(|(a, b)| a.dot(b)).sum();
        a + b
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn scaled_add(&mut self, s: f64, other: &Gradient) {
        for (a, b) in self.y.iter_mut().zip(&other.y) {
            *a += s * b;
        }
        for (a, b) in self.q.iter_mut().zip(&other.q) {
            *a += s * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.y.iter_mut().chain(self.q.iter_mut()).for_each(|v| *v *= s);
    }
}

/// Moves a configuration along a tangent direction:
/// `y ← y + t d_y`, `Q ← exp(t d_Q) Q`.
pub fn retract(config: &Configuration, direction: &Gradient, t: f64) -> Configuration {
    Configuration {
        y: config.y.iter().zip(&direction.y).map(|(y, d)| y + t * d).collect(),
        q: config
            .q
            .iter()
            .zip(&direction.q)
            .map(|(q, d)| {
                if *d == Vec3::zeros() {
                    *q
                } else {
                    crate::so3::exp_so3(&(t * d)).compose(q)
                }
            })
            .collect(),
    }
}

/// Cell kinematics and constitutive response over the whole lattice.
#[derive(Debug, Clone)]
pub struct CellState {
    pub logs: EdgeLogs,
    pub cells: Vec<CellKinematics>,
    pub energy: Vec<EnergySplit>,
    /// `(∂W/∂E, ∂W/∂K)` per cell, when requested.
    pub stress: Option<Vec<(crate::kinematics::SurfaceTensor, crate::kinematics::SurfaceTensor)>>,
}

impl CellState {
    pub fn evaluate(
        grid: &PlateGrid,
        config: &Configuration,
        material: &Material,
        with_stress: bool,
    ) -> Result<Self, FunctionalError> {
        config.check_shape(grid)?;
        let logs = EdgeLogs::compute(grid, config)?;
        let results: Vec<_> = (0..grid.cell_count())
            .into_par_iter()
            .map(|c| {
                let ij = grid.cell_ij(c);
                let ck = cell_kinematics_with_logs(grid, config, &logs, ij)?;
                let w = material.energy(&ck.strain, &ck.bending);
                if !w.membrane.is_finite() || !w.bending.is_finite() {
                    return Err(FunctionalError::NonFinite { cell: ij });
                }
                let s = with_stress.then(|| material.gradient(&ck.strain, &ck.bending));
                Ok((ck, w, s))
            })
            .collect::<Result<_, FunctionalError>>()?;
        let mut cells = Vec::with_capacity(results.len());
        let mut energy = Vec::with_capacity(results.len());
        let mut stress = with_stress.then(|| Vec::with_capacity(results.len()));
        for (ck, w, s) in results {
            cells.push(ck);
            energy.push(w);
            if let (Some(out), Some(s)) = (stress.as_mut(), s) {
                out.push(s);
            }
        }
        Ok(CellState {
            logs,
            cells,
            energy,
            stress,
        })
    }

    /// Midpoint-rule integral of the strain energy.
    pub fn integrated(&self, grid: &PlateGrid) -> EnergySplit {
        let sum = self.energy.iter().fold(EnergySplit::default(), |acc, w| acc + *w);
        sum * grid.cell_area()
    }
}

fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
    a.component_mul(b).sum()
}

/// `Λ = ∫ f·u + ⟨C_ω, Q⟩ dω + ∫ n*·u + ⟨C_∂, Q⟩ ds` by trapezoid quadrature.
pub fn load_potential(grid: &PlateGrid, config: &Configuration, loads: &LoadSpec) -> f64 {
    let w = grid.area_weights();
    let mut total = 0.0;
    for n in 0..grid.node_count() {
        let u = config.displacement(grid, n);
        total += w[n] * (loads.f[n].dot(&u) + frobenius(&loads.c_omega[n], config.q[n].matrix()));
    }
    let wb = grid.free_boundary_weights();
    for (k, &n) in grid.free_boundary_nodes().iter().enumerate() {
        let u = config.displacement(grid, n);
        total += wb[k] * (loads.n_star[k].dot(&u) + frobenius(&loads.c_boundary[k], config.q[n].matrix()));
    }
    total
}

pub fn total_energy(
    grid: &PlateGrid,
    config: &Configuration,
    material: &Material,
    loads: &LoadSpec,
) -> Result<EnergyBreakdown, FunctionalError> {
    let state = CellState::evaluate(grid, config, material, false)?;
    Ok(breakdown(grid, config, &state, loads))
}

fn breakdown(grid: &PlateGrid, config: &Configuration, state: &CellState, loads: &LoadSpec) -> EnergyBreakdown {
    let w = state.integrated(grid);
    let load = load_potential(grid, config, loads);
    EnergyBreakdown {
        membrane: w.membrane,
        bending: w.bending,
        load_potential: load,
        total: w.membrane + w.bending - load,
    }
}

struct CellGradient {
    y: [Vec3; 4],
    q: [Vec3; 4],
}

fn cell_gradient(
    grid: &PlateGrid,
    config: &Configuration,
    state: &CellState,
    cell: usize,
    stress: &(crate::kinematics::SurfaceTensor, crate::kinematics::SurfaceTensor),
) -> CellGradient {
    let (i, j) = grid.cell_ij(cell);
    let [h1, h2] = grid.spacing();
    let area = grid.cell_area();
    let corners = grid.cell_corners(i, j);
    let [a, b, c, _] = corners;
    let ck = &state.cells[cell];
    let p = ck.rotation.matrix();
    let (ge, gk) = stress;
    let n = [p * ge.column(0), p * ge.column(1)];
    let m = [p * gk.column(0), p * gk.column(1)];

    let (u1, u2) = (n[0] / (2.0 * h1), n[1] / (2.0 * h2));
    let y = [-u1 - u2, u1 - u2, -u1 + u2, u1 + u2].map(|v| v * area);

    // Variation of P = polar(mean Q) under Q_k → exp(δ_k) Q_k.
    let g_eta: Vec3 = (0..2).map(|al| n[al].cross(&ck.dy[al]) + m[al].cross(&ck.kappa[al])).sum();
    let s = ck.stretch;
    let lhs = Mat3::identity() * s.trace() - s;
    let z = lhs
        .try_inverse()
        .map(|inv| inv * (p.transpose() * g_eta))
        .unwrap_or_else(|| p.transpose() * g_eta * 0.5);
    let pz = p * hat(&z);
    let mut q = corners.map(|k| 0.5 * axl_of_skew_part(&(pz * config.q[k].matrix().transpose())));

    // Geodesic edge differences: direction 1 uses a→b and c→d, direction 2 uses a→c and b→d.
    let edges = [[(0usize, 1usize, a), (2, 3, c)], [(0, 2, a), (1, 3, b)]];
    for (al, pair) in edges.iter().enumerate() {
        let h = if al == 0 { h1 } else { h2 };
        let mm = m[al] / (2.0 * h);
        for &(from, to, base) in pair {
            let phi = state.logs.along[al][base];
            let jl = left_jacobian_inverse(&phi);
            q[to] += jl.transpose() * mm;
            q[from] -= jl * mm;
        }
    }
    CellGradient {
        y,
        q: q.map(|v| v * area),
    }
}

/// Energy and gradient from a single pass over the cells.
pub fn energy_and_gradient(
    grid: &PlateGrid,
    config: &Configuration,
    material: &Material,
    loads: &LoadSpec,
) -> Result<(EnergyBreakdown, Gradient), FunctionalError> {
    let state = CellState::evaluate(grid, config, material, true)?;
    let stress = state.stress.as_ref().expect("stress requested");
    let parts: Vec<CellGradient> = (0..grid.cell_count())
        .into_par_iter()
        .map(|c| cell_gradient(grid, config, &state, c, &stress[c]))
        .collect();
    let mut g = Gradient::zeros(grid.node_count());
    for (c, part) in parts.iter().enumerate() {
        let (i, j) = grid.cell_ij(c);
        for (k, &node) in grid.cell_corners(i, j).iter().enumerate() {
            g.y[node] += part.y[k];
            g.q[node] += part.q[k];
        }
    }
    let w = grid.area_weights();
    for n in 0..grid.node_count() {
        g.y[n] -= w[n] * loads.f[n];
        g.q[n] -= w[n] * 2.0 * axl_of_skew_part(&(loads.c_omega[n] * config.q[n].matrix().transpose()));
    }
    let wb = grid.free_boundary_weights();
    for (k, &n) in grid.free_boundary_nodes().iter().enumerate() {
        g.y[n] -= wb[k] * loads.n_star[k];
        g.q[n] -= wb[k] * 2.0 * axl_of_skew_part(&(loads.c_boundary[k] * config.q[n].matrix().transpose()));
    }
    Ok((breakdown(grid, config, &state, loads), g))
}

/// `(g_y, g_Q)` with `d/dt I(y + t v, exp(t w) Q) = Σ v·g_y + w·g_Q`.
pub fn energy_gradient(
    grid: &PlateGrid,
    config: &Configuration,
    material: &Material,
    loads: &LoadSpec,
) -> Result<Gradient, FunctionalError> {
    energy_and_gradient(grid, config, material, loads).map(|(_, g)| g)
}
