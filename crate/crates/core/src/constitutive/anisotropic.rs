//! General quadratic energy `W = ½ sᵀ H s` on the stacked vector
//! `s = (E11, E21, E31, E12, E22, E32, K11, K21, K31, K12, K22, K32)`.

use super::{symmetric_min_eigenvalue, ConstitutiveError, EnergySplit, IsotropicCoefficients};
use crate::kinematics::SurfaceTensor;
use nalgebra::{SMatrix, SVector};
use serde::Serialize;

pub type Matrix12 = SMatrix<f64, 12, 12>;
pub type Vector12 = SVector<f64, 12>;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicQuadratic {
    h: Matrix12,
}

pub fn stack(e: &SurfaceTensor, k: &SurfaceTensor) -> Vector12 {
    let (se, sk) = (e.stacked(), k.stacked());
    Vector12::from_fn(|r, _| if r < 6 { se[r] } else { sk[r - 6] })
}

impl AnisotropicQuadratic {
    pub fn new(h: Matrix12) -> Result<Self, ConstitutiveError> {
        if h.iter().any(|v| !v.is_finite()) {
            return Err(ConstitutiveError::NotSymmetric(f64::NAN));
        }
        let asym = (h - h.transpose()).amax();
        let scale = h.amax().max(f64::MIN_POSITIVE);
        if asym > SYMMETRY_TOLERANCE * scale {
            return Err(ConstitutiveError::NotSymmetric(asym));
        }
        Ok(AnisotropicQuadratic {
            h: 0.5 * (h + h.transpose()),
        })
    }

    pub fn from_rows(rows: &[[f64; 12]; 12]) -> Result<Self, ConstitutiveError> {
        Self::new(Matrix12::from_fn(|r, c| rows[r][c]))
    }

    pub fn to_rows(&self) -> [[f64; 12]; 12] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.h[(r, c)]))
    }

    /// Block-diagonal assembly of the isotropic membrane and bending Hessians.
    pub fn from_isotropic(m: &IsotropicCoefficients) -> Self {
        let mut h = Matrix12::zeros();
        h.fixed_view_mut::<6, 6>(0, 0).copy_from(&m.membrane_hessian());
        h.fixed_view_mut::<6, 6>(6, 6).copy_from(&m.bending_hessian());
        AnisotropicQuadratic { h }
    }

    pub fn matrix(&self) -> &Matrix12 {
        &self.h
    }

    /// The `E–E` block counts as membrane; `K–K` and the coupling blocks as bending.
    pub fn energy(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> EnergySplit {
        let s = stack(e, k);
        let total = 0.5 * s.dot(&(self.h * s));
        let se = s.fixed_rows::<6>(0);
        let membrane = 0.5 * se.dot(&(self.h.fixed_view::<6, 6>(0, 0) * se));
        EnergySplit {
            membrane,
            bending: total - membrane,
        }
    }

    pub fn gradient(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> (SurfaceTensor, SurfaceTensor) {
        let g = self.h * stack(e, k);
        (
            SurfaceTensor::from_stacked(g.fixed_rows::<6>(0).as_slice()),
            SurfaceTensor::from_stacked(g.fixed_rows::<6>(6).as_slice()),
        )
    }
}

pub fn energy_anisotropic(e: &SurfaceTensor, k: &SurfaceTensor, aq: &AnisotropicQuadratic) -> f64 {
    aq.energy(e, k).total()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub min_eigenvalue: f64,
    /// `k` in `W ≥ k(‖E‖² + ‖K‖²)`.
    pub constant: f64,
    pub pass: bool,
}

pub fn check_coercivity(aq: &AnisotropicQuadratic) -> CoercivityReport {
    let min_eigenvalue = symmetric_min_eigenvalue(&aq.h);
    let constant = 0.5 * min_eigenvalue;
    CoercivityReport {
        min_eigenvalue,
        constant,
        pass: constant > 0.0,
    }
}
