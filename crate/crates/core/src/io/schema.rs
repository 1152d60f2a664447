//! Input documents: material, loads and boundary data.

use crate::constitutive::{
    from_engineering, AnisotropicQuadratic, ConstitutiveError, CosseratParams, EngineeringParams,
    IsotropicCoefficients, Material, MaterialAssessment,
};
use crate::functional::{BoundaryData, BoundaryMode, LoadSpec};
use crate::grid::{Edge, EdgeKind, PlateGrid};
use crate::so3::{Mat3, Rotation, Vec3};
use serde::{Deserialize, Serialize};

/// Material document, discriminated by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialSpec {
    IsotropicCoefficients(IsotropicCoefficients),
    Engineering(EngineeringParams),
    Cosserat(CosseratParams),
    Anisotropic(AnisotropicRows),
}

/// Row-major 12×12 matrix acting on the stacked `(E, K)` vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnisotropicRows {
    pub matrix: [[f64; 12]; 12],
}

impl MaterialSpec {
    pub fn to_material(&self) -> Result<Material, ConstitutiveError> {
        match self {
            MaterialSpec::IsotropicCoefficients(m) => {
                if m.alpha.iter().chain(&m.beta).all(|v| v.is_finite()) {
                    Ok(Material::Isotropic(*m))
                } else {
                    Err(ConstitutiveError::InvalidEngineering("coefficients must be finite".into()))
                }
            }
            MaterialSpec::Engineering(ep) => from_engineering(ep).map(Material::Isotropic),
            MaterialSpec::Cosserat(cp) => {
                cp.validate()?;
                Ok(Material::Cosserat(*cp))
            }
            MaterialSpec::Anisotropic(rows) => AnisotropicQuadratic::from_rows(&rows.matrix).map(Material::Anisotropic),
        }
    }

    /// Assessment of the document. Engineering inputs additionally report
    /// `μ > 0` and `2μ + 3λ > 0`; when either fails, no coefficients exist
    /// and the assessment fails on those inequalities alone.
    pub fn assess(&self) -> Result<MaterialAssessment, ConstitutiveError> {
        let MaterialSpec::Engineering(ep) = self else {
            return Ok(self.to_material()?.assess());
        };
        let structural = [ep.young, ep.poisson, ep.thickness, ep.alpha_s, ep.alpha_t].iter().all(|v| v.is_finite())
            && ep.thickness > 0.0
            && ep.alpha_s > 0.0
            && ep.alpha_t > 0.0
            && ep.poisson != -1.0
            && ep.poisson != 0.5;
        if !structural {
            return Err(ep.validate().unwrap_err());
        }
        let checks = ep.lame_checks();
        let mut out = if checks.iter().all(|c| c.holds) {
            Material::Isotropic(from_engineering(ep)?).assess()
        } else {
            MaterialAssessment::default()
        };
        out.kind = "engineering".to_string();
        out.pass = out.pass && checks.iter().all(|c| c.holds);
        out.parameters = Some(checks);
        Ok(out)
    }

    /// Thickness stated by the document, if its kind has one.
    pub fn thickness(&self) -> Option<f64> {
        match self {
            MaterialSpec::Engineering(ep) => Some(ep.thickness),
            MaterialSpec::Cosserat(cp) => Some(cp.h),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorField {
    Constant([f64; 3]),
    PerNode(Vec<[f64; 3]>),
}

/// 3×3 matrices as row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixField {
    Constant([[f64; 3]; 3]),
    PerNode(Vec<[[f64; 3]; 3]>),
}

/// Prescribed positions: a constant displacement of the reference nodes or
/// absolute positions per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PositionField {
    Displacement([f64; 3]),
    PerNode(Vec<[f64; 3]>),
}

fn finite(values: impl IntoIterator<Item = f64>, name: &str) -> Result<(), String> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(format!("{name}: non-finite entry"))
    }
}

fn per_node_len<T>(v: &[T], n: usize, name: &str) -> Result<(), String> {
    if v.len() == n {
        Ok(())
    } else {
        Err(format!("{name}: {} entries, expected {n}", v.len()))
    }
}

impl VectorField {
    pub fn expand(&self, n: usize, name: &str) -> Result<Vec<Vec3>, String> {
        let out: Vec<Vec3> = match self {
            VectorField::Constant(v) => vec![Vec3::from(*v); n],
            VectorField::PerNode(vs) => {
                per_node_len(vs, n, name)?;
                vs.iter().map(|v| Vec3::from(*v)).collect()
            }
        };
        finite(out.iter().flat_map(|v| v.iter().copied()), name)?;
        Ok(out)
    }
}

fn mat(rows: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| rows[i][j])
}

impl MatrixField {
    pub fn expand(&self, n: usize, name: &str) -> Result<Vec<Mat3>, String> {
        let out: Vec<Mat3> = match self {
            MatrixField::Constant(m) => vec![mat(m); n],
            MatrixField::PerNode(ms) => {
                per_node_len(ms, n, name)?;
                ms.iter().map(mat).collect()
            }
        };
        finite(out.iter().flat_map(|m| m.iter().copied()), name)?;
        Ok(out)
    }

    pub fn rotations(&self, n: usize, name: &str) -> Result<Vec<Rotation>, String> {
        self.expand(n, name)?
            .into_iter()
            .enumerate()
            .map(|(k, m)| Rotation::new(m).map_err(|e| format!("{name}[{k}]: {e}")))
            .collect()
    }
}

/// Load document. Absent fields are zero. `f` and `c_omega` run over all
/// nodes, `n_star` and `c_boundary` over the free-boundary nodes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<VectorField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_star: Option<VectorField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_omega: Option<MatrixField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_boundary: Option<MatrixField>,
}

impl LoadFile {
    pub fn to_spec(&self, grid: &PlateGrid) -> Result<LoadSpec, String> {
        let nn = grid.node_count();
        let nb = grid.free_boundary_nodes().len();
        let mut spec = LoadSpec::zero(grid);
        if let Some(f) = &self.f {
            spec.f = f.expand(nn, "f")?;
        }
        if let Some(c) = &self.c_omega {
            spec.c_omega = c.expand(nn, "c_omega")?;
        }
        if nb == 0 && (self.n_star.is_some() || self.c_boundary.is_some()) {
            return Err("boundary loads given but the grid has no free edge".into());
        }
        if let Some(n) = &self.n_star {
            spec.n_star = n.expand(nb, "n_star")?;
        }
        if let Some(c) = &self.c_boundary {
            spec.c_boundary = c.expand(nb, "c_boundary")?;
        }
        Ok(spec)
    }
}

/// Boundary document: which edges are Dirichlet, the admissible-set mode
/// and the prescribed values on the Dirichlet nodes. Defaults are `y* = x`
/// and, when clamped, `Q* = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryFile {
    pub dirichlet_edges: Vec<Edge>,
    pub mode: BoundaryMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_star: Option<PositionField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_star: Option<MatrixField>,
}

impl BoundaryFile {
    pub fn edge_kinds(&self) -> Result<[(Edge, EdgeKind); 4], String> {
        if self.dirichlet_edges.is_empty() {
            return Err("dirichlet_edges must name at least one edge".into());
        }
        let mut seen = self.dirichlet_edges.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.dirichlet_edges.len() {
            return Err("dirichlet_edges lists an edge twice".into());
        }
        Ok(Edge::ALL.map(|e| {
            let kind = if self.dirichlet_edges.contains(&e) {
                EdgeKind::Dirichlet
            } else {
                EdgeKind::Free
            };
            (e, kind)
        }))
    }

    pub fn to_boundary(&self, grid: &PlateGrid) -> Result<BoundaryData, String> {
        let nodes = grid.dirichlet_nodes();
        let y_star = match &self.y_star {
            None => nodes.iter().map(|&n| grid.reference_position(n)).collect(),
            Some(PositionField::Displacement(u)) => {
                finite(u.iter().copied(), "y_star")?;
                nodes.iter().map(|&n| grid.reference_position(n) + Vec3::from(*u)).collect()
            }
            Some(PositionField::PerNode(ps)) => VectorField::PerNode(ps.clone()).expand(nodes.len(), "y_star")?,
        };
        let q_star = match (self.mode, &self.q_star) {
            (BoundaryMode::Relaxed, Some(_)) => return Err("relaxed mode must not prescribe q_star".into()),
            (BoundaryMode::Relaxed, None) => None,
            (BoundaryMode::Clamped, None) => Some(vec![Rotation::identity(); nodes.len()]),
            (BoundaryMode::Clamped, Some(q)) => Some(q.rotations(nodes.len(), "q_star")?),
        };
        let bd = BoundaryData {
            mode: self.mode,
            nodes,
            y_star,
            q_star,
        };
        bd.validate(grid).map_err(|e| e.to_string())?;
        Ok(bd)
    }
}
