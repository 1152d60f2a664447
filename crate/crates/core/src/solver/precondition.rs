//! Fixed-metric preconditioner: the Hessian of the internal energy at the
//! reference configuration, restricted to the free degrees of freedom.
//!
//! Entries are recovered from central differences of the gradient along
//! 9-colored probe directions (nodes sharing a cell never share a color),
//! so the cost is 108 gradient evaluations regardless of grid size.

use crate::constitutive::Material;
use crate::functional::{energy_gradient, retract, DofMask, FunctionalError, Gradient, LoadSpec};
use crate::grid::{Configuration, PlateGrid};
use crate::so3::Vec3;
use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

const PROBE_STEP: f64 = 1e-5;

pub struct ReferenceHessian {
    /// Compact index per `(node, component)`, `None` for fixed DOFs.
    index: Vec<Option<usize>>,
    factor: CscCholesky<f64>,
    pub dimension: usize,
    pub nonzeros: usize,
    /// Relative diagonal shift `σ` in `H + σ diag(H)`, zero when none was needed.
    pub regularization: f64,
}

/// Pivots this small relative to the diagonal mark a numerically singular factor.
const PIVOT_RATIO: f64 = 1e-3;

fn diagonal_of(m: &CscMatrix<f64>, n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for (r, c, v) in m.triplet_iter() {
        if r == c {
            d[r] += *v;
        }
    }
    d
}

/// Cholesky of `H + σ diag(H)` for the smallest `σ ∈ {0, 1e-10, 1e-8, …}`
/// whose pivots are all well separated from zero.
///
/// Exactly singular directions exist: with free boundary rotations the
/// alternating field `Q = exp(±δ)` leaves every cell mean and edge-averaged
/// curvature unchanged.
fn regularized_factor(coo: &CooMatrix<f64>, diagonal: &[f64]) -> Result<(CscCholesky<f64>, f64), FunctionalError> {
    for sigma in [0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2] {
        let mut shifted = coo.clone();
        if sigma > 0.0 {
            for (k, &d) in diagonal.iter().enumerate() {
                shifted.push(k, k, sigma * d.abs().max(f64::MIN_POSITIVE));
            }
        }
        let Ok(factor) = CscCholesky::factor(&CscMatrix::from(&shifted)) else {
            continue;
        };
        let l_diag = diagonal_of(factor.l(), diagonal.len());
        let well_posed = l_diag
            .iter()
            .zip(diagonal)
            .all(|(l, d)| l * l > PIVOT_RATIO * d.abs().max(f64::MIN_POSITIVE));
        if well_posed {
            return Ok((factor, sigma));
        }
    }
    Err(FunctionalError::Boundary(
        "reference Hessian is not positive definite on the free DOFs".into(),
    ))
}

fn set_dof(g: &mut Gradient, node: usize, comp: usize, value: f64) {
    if comp < 3 {
        g.y[node][comp] = value;
    } else {
        g.q[node][comp - 3] = value;
    }
}

fn get_dof(g: &Gradient, node: usize, comp: usize) -> f64 {
    if comp < 3 {
        g.y[node][comp]
    } else {
        g.q[node][comp - 3]
    }
}

impl ReferenceHessian {
    pub fn assemble(grid: &PlateGrid, material: &Material, mask: &DofMask) -> Result<Self, FunctionalError> {
        let nn = grid.node_count();
        let [n1, n2] = grid.nodes();
        let mut index = vec![None; 6 * nn];
        let mut dimension = 0;
        for n in 0..nn {
            for comp in 0..6 {
                let fixed = if comp < 3 { mask.y_fixed[n] } else { mask.q_fixed[n] };
                if !fixed {
                    index[6 * n + comp] = Some(dimension);
                    dimension += 1;
                }
            }
        }
        let reference = Configuration::reference(grid);
        let loads = LoadSpec::zero(grid);
        let mut coo = CooMatrix::new(dimension, dimension);
        for color in 0..9 {
            let (ci, cj) = (color % 3, color / 3);
            for comp in 0..6 {
                let mut probe = Gradient::zeros(nn);
                for n in 0..nn {
                    let (i, j) = grid.node_ij(n);
                    if i % 3 == ci && j % 3 == cj {
                        set_dof(&mut probe, n, comp, 1.0);
                    }
                }
                let gp = energy_gradient(grid, &retract(&reference, &probe, PROBE_STEP), material, &loads)?;
                let gm = energy_gradient(grid, &retract(&reference, &probe, -PROBE_STEP), material, &loads)?;
                for p in 0..nn {
                    let (i, j) = grid.node_ij(p);
                    // The unique probed node whose cells touch p.
                    for dj in -1i64..=1 {
                        for di in -1i64..=1 {
                            let (qi, qj) = (i as i64 + di, j as i64 + dj);
                            if qi < 0 || qj < 0 || qi >= n1 as i64 || qj >= n2 as i64 {
                                continue;
                            }
                            let (qi, qj) = (qi as usize, qj as usize);
                            if qi % 3 != ci || qj % 3 != cj {
                                continue;
                            }
                            let q = grid.node(qi, qj);
                            let Some(col) = index[6 * q + comp] else { continue };
                            for r in 0..6 {
                                if let Some(row) = index[6 * p + r] {
                                    let v = (get_dof(&gp, p, r) - get_dof(&gm, p, r)) / (2.0 * PROBE_STEP);
                                    // Symmetrize by averaging the two mirrored samples.
                                    coo.push(row, col, 0.5 * v);
                                    coo.push(col, row, 0.5 * v);
                                }
                            }
                        }
                    }
                }
            }
        }
        let csc = CscMatrix::from(&coo);
        let nonzeros = csc.nnz();
        let diagonal = diagonal_of(&csc, dimension);
        let (factor, regularization) = regularized_factor(&coo, &diagonal)?;
        if regularization > 0.0 {
            log::info!("reference Hessian regularized with relative diagonal shift {regularization:e}");
        }
        Ok(ReferenceHessian {
            index,
            factor,
            dimension,
            nonzeros,
            regularization,
        })
    }

    /// Solves `H z = g` on the free DOFs; fixed DOFs of the result are zero.
    pub fn apply(&self, g: &Gradient) -> Gradient {
        let nn = g.y.len();
        let mut rhs = DMatrix::zeros(self.dimension, 1);
        for n in 0..nn {
            for comp in 0..6 {
                if let Some(k) = self.index[6 * n + comp] {
                    rhs[(k, 0)] = get_dof(g, n, comp);
                }
            }
        }
        self.factor.solve_mut(&mut rhs);
        let mut out = Gradient {
            y: vec![Vec3::zeros(); nn],
            q: vec![Vec3::zeros(); nn],
        };
        for n in 0..nn {
            for comp in 0..6 {
                if let Some(k) = self.index[6 * n + comp] {
                    set_dof(&mut out, n, comp, rhs[(k, 0)]);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::tests::plate;
    use crate::functional::{BoundaryData, BoundaryMode};

    #[test]
    fn hessian_reproduces_gradient_of_small_perturbation() {
        let grid = PlateGrid::clamped_square(1.0, 7, 0.1).unwrap();
        let mask = BoundaryData::reference(&grid, BoundaryMode::Clamped).mask(grid.node_count());
        let h = ReferenceHessian::assemble(&grid, &plate(), &mask).unwrap();
        assert_eq!(h.dimension, 6 * 25);
        // For a tiny displacement δ, g(δ) ≈ H δ, so H⁻¹ g(δ) ≈ δ.
        let mut d = Gradient::zeros(grid.node_count());
        for n in grid.interior_nodes() {
            let s = n as f64;
            d.y[n] = 1e-7 * Vec3::new(s.sin(), s.cos(), (2.0 * s).sin());
            d.q[n] = 1e-7 * Vec3::new((3.0 * s).cos(), (0.5 * s).sin(), s.cos());
        }
        let reference = Configuration::reference(&grid);
        let g = energy_gradient(&grid, &retract(&reference, &d, 1.0), &plate(), &LoadSpec::zero(&grid)).unwrap();
        let back = h.apply(&g);
        let mut e = back.clone();
        e.scaled_add(-1.0, &d);
        assert!(e.norm_squared().sqrt() < 1e-4 * d.norm_squared().sqrt());
    }
}
