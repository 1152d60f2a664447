//! Strain-energy densities, coefficient conversions, validity checks and stress resultants.

mod anisotropic;
mod cosserat;
mod isotropic;

pub use anisotropic::{check_coercivity, energy_anisotropic, stack, AnisotropicQuadratic, CoercivityReport, Matrix12, Vector12};
pub use cosserat::{energy_cosserat, identify_coefficients, CosseratParams};
pub use isotropic::{
    bending_quadratic_form, check_definiteness, energy_isotropic, from_engineering, membrane_quadratic_form,
    DefinitenessReport, EngineeringParams, InequalityCheck, IsotropicCoefficients,
};

use crate::kinematics::SurfaceTensor;
use crate::so3::Rotation;
use nalgebra::{DimMin, DimName, OMatrix};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstitutiveError {
    #[error("invalid engineering parameters: {0}")]
    InvalidEngineering(String),
    #[error("invalid Cosserat parameters: {0}")]
    InvalidCosserat(String),
    #[error("coefficient identification needs p = 1 and a4 = 0, got p = {p}, a4 = {a4}")]
    IdentificationRegime { p: f64, a4: f64 },
    #[error("coefficient matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
}

/// Energy per unit reference area.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergySplit {
    pub membrane: f64,
    pub bending: f64,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.membrane + self.bending
    }
}

impl std::ops::Add for EnergySplit {
    type Output = EnergySplit;
    fn add(self, o: EnergySplit) -> EnergySplit {
        EnergySplit {
            membrane: self.membrane + o.membrane,
            bending: self.bending + o.bending,
        }
    }
}

impl std::ops::Mul<f64> for EnergySplit {
    type Output = EnergySplit;
    fn mul(self, s: f64) -> EnergySplit {
        EnergySplit {
            membrane: self.membrane * s,
            bending: self.bending * s,
        }
    }
}

pub(crate) fn symmetric_min_eigenvalue<D>(m: &OMatrix<f64, D, D>) -> f64
where
    D: DimName + DimMin<D, Output = D> + nalgebra::DimSub<nalgebra::U1>,
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<D, D>
        + nalgebra::allocator::Allocator<D>
        + nalgebra::allocator::Allocator<<D as nalgebra::DimSub<nalgebra::U1>>::Output>,
{
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// One of the supported energy densities.
#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Isotropic(IsotropicCoefficients),
    Cosserat(CosseratParams),
    Anisotropic(AnisotropicQuadratic),
}

impl Material {
    pub fn energy(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> EnergySplit {
        match self {
            Material::Isotropic(m) => m.energy(e, k),
            Material::Cosserat(cp) => cp.energy_ek(e, k),
            Material::Anisotropic(aq) => aq.energy(e, k),
        }
    }

    /// `(∂W/∂E, ∂W/∂K)`.
    pub fn gradient(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> (SurfaceTensor, SurfaceTensor) {
        match self {
            Material::Isotropic(m) => m.gradient(e, k),
            Material::Cosserat(cp) => cp.gradient_ek(e, k),
            Material::Anisotropic(aq) => aq.gradient(e, k),
        }
    }

    pub fn is_quadratic(&self) -> bool {
        match self {
            Material::Cosserat(cp) => cp.p == 1.0 && cp.a4 == 0.0,
            _ => true,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Material::Isotropic(_) => "isotropic_coefficients",
            Material::Cosserat(_) => "cosserat",
            Material::Anisotropic(_) => "anisotropic",
        }
    }

    pub fn assess(&self) -> MaterialAssessment {
        let mut out = MaterialAssessment {
            kind: self.kind().to_string(),
            ..Default::default()
        };
        match self {
            Material::Isotropic(m) => {
                let d = check_definiteness(m);
                out.pass = d.pass;
                out.coefficients = Some(*m);
                out.definiteness = Some(d);
            }
            Material::Anisotropic(aq) => {
                let c = check_coercivity(aq);
                out.pass = c.pass;
                out.coercivity = Some(c);
            }
            Material::Cosserat(cp) => {
                let regime = cp.check();
                out.pass = regime.iter().all(|c| c.holds);
                if cp.mu_c == 0.0 {
                    out.warnings.push("mu_c = 0: the energy is only positive semi-definite".to_string());
                }
                if let Ok(m) = identify_coefficients(cp) {
                    let d = check_definiteness(&m);
                    out.couple_modulus_identity = Some((m.alpha[2] - m.alpha[1], 2.0 * cp.h * cp.mu_c));
                    out.coefficients = Some(m);
                    out.definiteness = Some(d);
                }
                out.cosserat_regime = Some(regime);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MaterialAssessment {
    pub kind: String,
    pub pass: bool,
    /// Conditions on the input parameters themselves (engineering inputs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<InequalityCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<IsotropicCoefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub definiteness: Option<DefinitenessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coercivity: Option<CoercivityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cosserat_regime: Option<Vec<InequalityCheck>>,
    /// `(α3 − α2, 2hμ_c)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couple_modulus_identity: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// `N = Q ∂W/∂E`, `M = Q ∂W/∂K`.
pub fn stress_resultants(
    e: &SurfaceTensor,
    k: &SurfaceTensor,
    q: &Rotation,
    material: &Material,
) -> (SurfaceTensor, SurfaceTensor) {
    let (ge, gk) = material.gradient(e, k);
    (ge.left_mul(q.matrix()), gk.left_mul(q.matrix()))
}
