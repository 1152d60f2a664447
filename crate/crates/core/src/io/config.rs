//! Run configuration: one document referencing the material, boundary and
//! load documents. Relative paths resolve against the configuration's own
//! directory.

use super::schema::{BoundaryFile, LoadFile, MaterialSpec};
use super::{read_versioned, IoError};
use crate::constitutive::Material;
use crate::functional::{BoundaryData, LoadSpec};
use crate::grid::PlateGrid;
use crate::solver::SolverSettings;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lengths: [f64; 2],
    pub nodes: [usize; 2],
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: PathBuf,
    /// Also write `fields.vtk`.
    pub vtk: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            directory: PathBuf::from("output"),
            vtk: false,
        }
    }
}

/// Configuration examined by `verify`.
///
/// Written as `"solve"`, `"reference"`, `{"random": {"amplitude": a}}` or
/// `{"fields": {"path": p}}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifySource {
    /// Solve first, then verify the result.
    #[default]
    Solve,
    Reference,
    /// Reference configuration perturbed by seeded noise of this amplitude.
    Random { amplitude: f64 },
    /// A previously written `fields.csv`.
    Fields { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub source: VerifySource,
    pub gradient_tolerance: f64,
    pub fd_step: f64,
    pub directions: usize,
    pub invariance_tolerance: f64,
    pub motions: usize,
    /// Bound on the max interior force and moment residual; reported only when absent.
    pub residual_tolerance: Option<f64>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            source: VerifySource::Solve,
            gradient_tolerance: 1e-6,
            fd_step: 1e-6,
            directions: 20,
            invariance_tolerance: 1e-12,
            motions: 20,
            residual_tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub material: PathBuf,
    pub boundary: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loads: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

/// A fully parsed and validated run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config_path: PathBuf,
    pub grid: PlateGrid,
    pub material_spec: MaterialSpec,
    pub material: Material,
    pub loads: LoadSpec,
    pub boundary: BoundaryData,
    pub settings: SolverSettings,
    /// Resolved output directory.
    pub output_dir: PathBuf,
    pub vtk: bool,
    /// Verification settings with any field path resolved.
    pub verify: VerifySpec,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        read_versioned(path)
    }

    pub fn load(path: &Path) -> Result<Problem, IoError> {
        let rc = Self::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));

        let boundary_path = resolve(base, &rc.boundary);
        let bf: BoundaryFile = read_versioned(&boundary_path)?;
        let kinds = bf.edge_kinds().map_err(|m| IoError::invalid(&boundary_path, m))?;
        let g = &rc.grid;
        let grid = PlateGrid::new(g.lengths, g.nodes, g.thickness, kinds).map_err(|e| IoError::invalid(path, e.to_string()))?;
        let boundary = bf.to_boundary(&grid).map_err(|m| IoError::invalid(&boundary_path, m))?;

        let material_path = resolve(base, &rc.material);
        let material_spec: MaterialSpec = read_versioned(&material_path)?;
        let material = material_spec
            .to_material()
            .map_err(|e| IoError::invalid(&material_path, e.to_string()))?;
        if let Some(t) = material_spec.thickness() {
            if (t - g.thickness).abs() > 1e-12 * t.abs().max(g.thickness.abs()) {
                return Err(IoError::invalid(
                    &material_path,
                    format!("material thickness {t} differs from grid thickness {}", g.thickness),
                ));
            }
        }

        let loads = match &rc.loads {
            None => LoadSpec::zero(&grid),
            Some(p) => {
                let loads_path = resolve(base, p);
                let lf: LoadFile = read_versioned(&loads_path)?;
                lf.to_spec(&grid).map_err(|m| IoError::invalid(&loads_path, m))?
            }
        };

        rc.solver.validate().map_err(|e| IoError::invalid(path, e.to_string()))?;
        let mut verify = rc.verify.clone();
        if let VerifySource::Fields { path: p } = &mut verify.source {
            *p = resolve(base, p);
        }
        if let VerifySource::Random { amplitude } = verify.source {
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(IoError::invalid(path, "verify amplitude must be finite and >= 0"));
            }
        }
        if !(verify.fd_step > 0.0 && verify.gradient_tolerance > 0.0 && verify.invariance_tolerance > 0.0) {
            return Err(IoError::invalid(path, "verify step and tolerances must be > 0"));
        }
        Ok(Problem {
            config_path: path.to_path_buf(),
            grid,
            material_spec,
            material,
            loads,
            boundary,
            settings: rc.solver.clone(),
            output_dir: resolve(base, &rc.output.directory),
            vtk: rc.output.vtk,
            verify,
        })
    }
}
