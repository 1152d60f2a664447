//! Discrete strain measures on the cell lattice.
//!
//! All measures live at cell centers. For cell `(i, j)` with corners
//! `a = (i,j)`, `b = (i+1,j)`, `c = (i,j+1)`, `d = (i+1,j+1)`:
//!
//! * `y,1 = ((y_b − y_a) + (y_d − y_c)) / 2h1`, `y,2 = ((y_c − y_a) + (y_d − y_b)) / 2h2`;
//! * `ϰ_1 = (log(Q_b Q_aᵀ) + log(Q_d Q_cᵀ)) / 2h1`, and likewise for `ϰ_2`
//!   from the two edges in direction 2 (geodesic differences);
//! * the cell rotation `P` is the orthogonal polar factor of the mean of the
//!   four corner rotations.
//!
//! With these, `E_{iα} = d_i · y,α − δ_{iα}` and `K_{iα} = d_i · ϰ_α`, where
//! `d_i = P e_i`. Both are left-invariant: `(R y + c, R Q)` yields the same
//! fields as `(y, Q)`.
//!
//! The third-order curvature slices satisfy
//! `(𝕶ⁱ)_{jα} = d_j · d_{i,α} = ε_{ijk} K_{kα}`; the discrete director
//! derivative is `d_{i,α} = ϰ_α × d_i`, the same one used for `K`.

use crate::grid::{Configuration, PlateGrid};
use crate::so3::{log_so3, project_so3, Mat3, Rotation, So3Error, Vec3};
use nalgebra::Matrix3x2;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("cell ({}, {}): {source}", cell.0, cell.1)]
pub struct KinematicsError {
    pub cell: (usize, usize),
    #[source]
    pub source: So3Error,
}

/// Tensor `T = T_{iα} e_i ⊗ e_α` with `i ∈ {1,2,3}`, `α ∈ {1,2}`.
///
/// Indices are zero-based. The stacked form is column-major,
/// `(T11, T21, T31, T12, T22, T32)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfaceTensor(pub Matrix3x2<f64>);

impl SurfaceTensor {
    pub fn zeros() -> Self {
        SurfaceTensor(Matrix3x2::zeros())
    }

    pub fn from_columns(c1: &Vec3, c2: &Vec3) -> Self {
        SurfaceTensor(Matrix3x2::from_columns(&[*c1, *c2]))
    }

    pub fn from_stacked(s: &[f64]) -> Self {
        SurfaceTensor(Matrix3x2::from_column_slice(&s[..6]))
    }

    pub fn stacked(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        out.copy_from_slice(self.0.as_slice());
        out
    }

    #[inline]
    pub fn get(&self, i: usize, alpha: usize) -> f64 {
        self.0[(i, alpha)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, alpha: usize, value: f64) {
        self.0[(i, alpha)] = value;
    }

    #[inline]
    pub fn column(&self, alpha: usize) -> Vec3 {
        self.0.column(alpha).into_owned()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// The 3×3 matrix `T_{iα} e_i ⊗ e_α` (third column zero).
    pub fn embed(&self) -> Mat3 {
        let mut m = Mat3::zeros();
        m.fixed_view_mut::<3, 2>(0, 0).copy_from(&self.0);
        m
    }

    /// Left multiplication by a 3×3 matrix.
    pub fn left_mul(&self, m: &Mat3) -> SurfaceTensor {
        SurfaceTensor(m * self.0)
    }
}

impl std::ops::Add for SurfaceTensor {
    type Output = SurfaceTensor;
    fn add(self, rhs: Self) -> Self {
        SurfaceTensor(self.0 + rhs.0)
    }
}

impl std::ops::Sub for SurfaceTensor {
    type Output = SurfaceTensor;
    fn sub(self, rhs: Self) -> Self {
        SurfaceTensor(self.0 - rhs.0)
    }
}

impl std::ops::Mul<f64> for SurfaceTensor {
    type Output = SurfaceTensor;
    fn mul(self, rhs: f64) -> Self {
        SurfaceTensor(self.0 * rhs)
    }
}

/// Three slices `𝕶ⁱ = 𝕶 e_i`, each a surface tensor with components `(j, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureThirdOrder {
    pub slices: [SurfaceTensor; 3],
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

impl CurvatureThirdOrder {
    /// `(𝕶ⁱ)_{jα} = ε_{ijk} K_{kα}`.
    pub fn from_bending(k: &SurfaceTensor) -> Self {
        let mut slices = [SurfaceTensor::zeros(); 3];
        for (i, slice) in slices.iter_mut().enumerate() {
            for j in 0..3 {
                for alpha in 0..2 {
                    let v: f64 = (0..3).map(|m| levi_civita(i, j, m) * k.get(m, alpha)).sum();
                    slice.set(j, alpha, v);
                }
            }
        }
        CurvatureThirdOrder { slices }
    }

    /// Inverse of [`from_bending`](Self::from_bending): `K_{kα} = ½ ε_{ijk} (𝕶ⁱ)_{jα}`.
    pub fn bending(&self) -> SurfaceTensor {
        let mut k = SurfaceTensor::zeros();
        for m in 0..3 {
            for alpha in 0..2 {
                let mut v = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        v += levi_civita(i, j, m) * self.slices[i].get(j, alpha);
                    }
                }
                k.set(m, alpha, 0.5 * v);
            }
        }
        k
    }

    /// Root of the sum of squares of all 18 components.
    pub fn norm(&self) -> f64 {
        self.slices.iter().map(|s| s.norm_squared()).sum::<f64>().sqrt()
    }
}

/// Everything the energy and its gradient need from one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellKinematics {
    /// Centered difference quotients `y,α`.
    pub dy: [Vec3; 2],
    /// Spatial axial curvature vectors `ϰ_α`.
    pub kappa: [Vec3; 2],
    /// Projected average rotation.
    pub rotation: Rotation,
    /// `S = Pᵀ M` where `M` is the mean of the corner rotations.
    pub stretch: Mat3,
    pub strain: SurfaceTensor,
    pub bending: SurfaceTensor,
}

impl CellKinematics {
    pub fn deformation_gradient(&self) -> SurfaceTensor {
        SurfaceTensor::from_columns(&self.dy[0], &self.dy[1])
    }

    pub fn curvature_third_order(&self) -> CurvatureThirdOrder {
        let d = [
            self.rotation.director(0),
            self.rotation.director(1),
            self.rotation.director(2),
        ];
        let mut slices = [SurfaceTensor::zeros(); 3];
        for (i, slice) in slices.iter_mut().enumerate() {
            for alpha in 0..2 {
                let d_i_alpha = self.kappa[alpha].cross(&d[i]);
                for (j, dj) in d.iter().enumerate() {
                    slice.set(j, alpha, dj.dot(&d_i_alpha));
                }
            }
        }
        CurvatureThirdOrder { slices }
    }
}

/// Geodesic differences along every lattice edge.
///
/// `along[0][n]` is `log(Q_{n+1} Q_nᵀ)` for the edge from node `n` in
/// direction 1, `along[1][n]` is `log(Q_{n+n1} Q_nᵀ)` in direction 2.
/// Entries for edges that leave the lattice are zero.
#[derive(Debug, Clone)]
pub struct EdgeLogs {
    pub along: [Vec<Vec3>; 2],
}

impl EdgeLogs {
    pub fn compute(grid: &PlateGrid, config: &Configuration) -> Result<Self, KinematicsError> {
        let [n1, n2] = grid.nodes();
        let dir = |alpha: usize| -> Result<Vec<Vec3>, KinematicsError> {
            (0..grid.node_count())
                .into_par_iter()
                .map(|n| {
                    let (i, j) = grid.node_ij(n);
                    let next = match alpha {
                        0 if i + 1 < n1 => n + 1,
                        1 if j + 1 < n2 => n + n1,
                        _ => return Ok(Vec3::zeros()),
                    };
                    let rel = config.q[next].compose(&config.q[n].transpose());
                    log_so3(&rel).map_err(|source| KinematicsError {
                        cell: (i.min(n1 - 2), j.min(n2 - 2)),
                        source,
                    })
                })
                .collect()
        };
        Ok(EdgeLogs {
            along: [dir(0)?, dir(1)?],
        })
    }
}

/// Evaluates one cell given precomputed edge logarithms.
pub fn cell_kinematics_with_logs(
    grid: &PlateGrid,
    config: &Configuration,
    logs: &EdgeLogs,
    (i, j): (usize, usize),
) -> Result<CellKinematics, KinematicsError> {
    let [h1, h2] = grid.spacing();
    let [a, b, c, d] = grid.cell_corners(i, j);
    let y = &config.y;
    let dy = [
        ((y[b] - y[a]) + (y[d] - y[c])) / (2.0 * h1),
        ((y[c] - y[a]) + (y[d] - y[b])) / (2.0 * h2),
    ];
    let kappa = [
        (logs.along[0][a] + logs.along[0][c]) / (2.0 * h1),
        (logs.along[1][a] + logs.along[1][b]) / (2.0 * h2),
    ];
    let q = &config.q;
    let mean = 0.25 * (q[a].matrix() + q[b].matrix() + q[c].matrix() + q[d].matrix());
    let rotation = project_so3(&mean).map_err(|source| KinematicsError {
        cell: (i, j),
        source,
    })?;
    let pt = rotation.matrix().transpose();
    let s = pt * mean;
    let stretch = 0.5 * (s + s.transpose());
    let strain = SurfaceTensor::from_columns(&(pt * dy[0] - Vec3::x()), &(pt * dy[1] - Vec3::y()));
    let bending = SurfaceTensor::from_columns(&(pt * kappa[0]), &(pt * kappa[1]));
    Ok(CellKinematics {
        dy,
        kappa,
        rotation,
        stretch,
        strain,
        bending,
    })
}

fn check_cell(grid: &PlateGrid, (i, j): (usize, usize)) {
    let [c1, c2] = grid.cell_counts();
    assert!(i < c1 && j < c2, "cell ({i}, {j}) outside {c1}x{c2} lattice");
}

/// Evaluates one cell, computing only the four edge logarithms it needs.
pub fn cell_kinematics(
    grid: &PlateGrid,
    config: &Configuration,
    cell: (usize, usize),
) -> Result<CellKinematics, KinematicsError> {
    check_cell(grid, cell);
    let [a, b, c, d] = grid.cell_corners(cell.0, cell.1);
    let rel_log = |from: usize, to: usize| {
        log_so3(&config.q[to].compose(&config.q[from].transpose()))
            .map_err(|source| KinematicsError { cell, source })
    };
    let mut logs = EdgeLogs {
        along: [
            vec![Vec3::zeros(); grid.node_count()],
            vec![Vec3::zeros(); grid.node_count()],
        ],
    };
    logs.along[0][a] = rel_log(a, b)?;
    logs.along[0][c] = rel_log(c, d)?;
    logs.along[1][a] = rel_log(a, c)?;
    logs.along[1][b] = rel_log(b, d)?;
    cell_kinematics_with_logs(grid, config, &logs, cell)
}

/// Surface deformation gradient `F = y,α ⊗ e_α` at the cell center.
pub fn deformation_gradient(
    grid: &PlateGrid,
    config: &Configuration,
    (i, j): (usize, usize),
) -> SurfaceTensor {
    check_cell(grid, (i, j));
    let [h1, h2] = grid.spacing();
    let [a, b, c, d] = grid.cell_corners(i, j);
    let y = &config.y;
    SurfaceTensor::from_columns(
        &(((y[b] - y[a]) + (y[d] - y[c])) / (2.0 * h1)),
        &(((y[c] - y[a]) + (y[d] - y[b])) / (2.0 * h2)),
    )
}

pub fn strain_tensor(
    grid: &PlateGrid,
    config: &Configuration,
    cell: (usize, usize),
) -> Result<SurfaceTensor, KinematicsError> {
    Ok(cell_kinematics(grid, config, cell)?.strain)
}

pub fn bending_tensor(
    grid: &PlateGrid,
    config: &Configuration,
    cell: (usize, usize),
) -> Result<SurfaceTensor, KinematicsError> {
    Ok(cell_kinematics(grid, config, cell)?.bending)
}

pub fn curvature_third_order(
    grid: &PlateGrid,
    config: &Configuration,
    cell: (usize, usize),
) -> Result<CurvatureThirdOrder, KinematicsError> {
    Ok(cell_kinematics(grid, config, cell)?.curvature_third_order())
}

/// Kinematics of every cell, plus the edge logarithms they were built from.
#[derive(Debug, Clone)]
pub struct FieldKinematics {
    pub logs: EdgeLogs,
    pub cells: Vec<CellKinematics>,
}

impl FieldKinematics {
    pub fn evaluate(grid: &PlateGrid, config: &Configuration) -> Result<Self, KinematicsError> {
        let logs = EdgeLogs::compute(grid, config)?;
        let cells = (0..grid.cell_count())
            .into_par_iter()
            .map(|c| cell_kinematics_with_logs(grid, config, &logs, grid.cell_ij(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FieldKinematics { logs, cells })
    }
}

/// Cell-indexed `E` and `K`, indexed like [`PlateGrid::cell`].
#[derive(Debug, Clone, PartialEq)]
pub struct StrainField {
    pub cell_counts: [usize; 2],
    pub strain: Vec<SurfaceTensor>,
    pub bending: Vec<SurfaceTensor>,
}

pub fn strain_field(grid: &PlateGrid, config: &Configuration) -> Result<StrainField, KinematicsError> {
    let fk = FieldKinematics::evaluate(grid, config)?;
    Ok(StrainField {
        cell_counts: grid.cell_counts(),
        strain: fk.cells.iter().map(|c| c.strain).collect(),
        bending: fk.cells.iter().map(|c| c.bending).collect(),
    })
}
