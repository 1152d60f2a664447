//! Isotropic quadratic plate energy `W = W_mb(E) + W_bend(K)`.
//!
//! With `n = e3` and `T_∥ = T − (n ⊗ n) T`,
//!
//! ```text
//! 2 W_mb(E)   = α1 tr²E_∥ + α2 tr(E_∥²) + α3 tr(E_∥ᵀE_∥) + α4 |Eᵀn|²
//! 2 W_bend(K) = β1 tr²K_∥ + β2 tr(K_∥²) + β3 tr(K_∥ᵀK_∥) + β4 |Kᵀn|²
//! ```
//!
//! In components the membrane part is
//! `½(α1+α2+α3)(E11²+E22²) + ½α3(E12²+E21²) + ½α4(E31²+E32²) + α1 E11 E22 + α2 E12 E21`.

use super::{symmetric_min_eigenvalue, ConstitutiveError, EnergySplit};
use crate::kinematics::SurfaceTensor;
use crate::so3::Mat3;
use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

/// `α1..α4` (force/length) and `β1..β4` (force·length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicCoefficients {
    pub alpha: [f64; 4],
    pub beta: [f64; 4],
}

/// Young modulus, Poisson ratio, thickness and the two shear correction factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineeringParams {
    pub young: f64,
    pub poisson: f64,
    pub thickness: f64,
    #[serde(default = "default_alpha_s")]
    pub alpha_s: f64,
    #[serde(default = "default_alpha_t")]
    pub alpha_t: f64,
}

pub(crate) fn default_alpha_s() -> f64 {
    5.0 / 6.0
}

pub(crate) fn default_alpha_t() -> f64 {
    7.0 / 10.0
}

impl EngineeringParams {
    pub fn new(young: f64, poisson: f64, thickness: f64) -> Self {
        EngineeringParams {
            young,
            poisson,
            thickness,
            alpha_s: default_alpha_s(),
            alpha_t: default_alpha_t(),
        }
    }

    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        let ok = self.young > 0.0
            && self.poisson > -1.0
            && self.poisson < 0.5
            && self.thickness > 0.0
            && self.alpha_s > 0.0
            && self.alpha_t > 0.0;
        if ok {
            Ok(())
        } else {
            Err(ConstitutiveError::InvalidEngineering(format!(
                "need E > 0, -1 < nu < 1/2, h > 0, alpha_s > 0, alpha_t > 0; got E={}, nu={}, h={}, alpha_s={}, alpha_t={}",
                self.young, self.poisson, self.thickness, self.alpha_s, self.alpha_t
            )))
        }
    }

    /// Stretching stiffness `C = E h / (1 − ν²)`.
    pub fn stretching_stiffness(&self) -> f64 {
        self.young * self.thickness / (1.0 - self.poisson * self.poisson)
    }

    /// Bending stiffness `D = E h³ / 12(1 − ν²)`.
    pub fn bending_stiffness(&self) -> f64 {
        self.stretching_stiffness() * self.thickness * self.thickness / 12.0
    }

    /// `μ > 0` and `2μ + 3λ > 0` for the parent 3D material, written as
    /// `E / 2(1 + ν)` and `E / (1 − 2ν)` so that they stay finite near the
    /// singular Poisson ratios.
    pub fn lame_checks(&self) -> Vec<InequalityCheck> {
        let (e, nu) = (self.young, self.poisson);
        [("mu > 0", e / (2.0 * (1.0 + nu))), ("2mu+3lambda > 0", e / (1.0 - 2.0 * nu))]
            .into_iter()
            .map(|(label, value)| InequalityCheck {
                label: label.to_string(),
                value,
                holds: value > 0.0,
            })
            .collect()
    }

    /// Lamé moduli `(μ, λ)` of the parent 3D material.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.young, self.poisson);
        (e / (2.0 * (1.0 + nu)), e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)))
    }
}

pub fn from_engineering(ep: &EngineeringParams) -> Result<IsotropicCoefficients, ConstitutiveError> {
    ep.validate()?;
    let nu = ep.poisson;
    let c = ep.stretching_stiffness();
    let d = ep.bending_stiffness();
    Ok(IsotropicCoefficients {
        alpha: [c * nu, 0.0, c * (1.0 - nu), ep.alpha_s * c * (1.0 - nu)],
        beta: [d * nu, 0.0, d * (1.0 - nu), ep.alpha_t * d * (1.0 - nu)],
    })
}

impl IsotropicCoefficients {
    /// Coefficients written through the Lamé moduli, without validating them.
    ///
    /// Agrees with [`from_engineering`] whenever both are defined.
    pub fn from_lame(mu: f64, lambda: f64, h: f64, alpha_s: f64, alpha_t: f64) -> Self {
        let r = lambda * mu / (lambda + 2.0 * mu);
        let h3 = h * h * h;
        IsotropicCoefficients {
            alpha: [2.0 * r * h, 0.0, 2.0 * mu * h, 2.0 * mu * alpha_s * h],
            beta: [r * h3 / 6.0, 0.0, mu * h3 / 6.0, mu * alpha_t * h3 / 6.0],
        }
    }

    pub fn energy(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> EnergySplit {
        energy_isotropic(e, k, self)
    }

    /// `(∂W/∂E, ∂W/∂K)`.
    pub fn gradient(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> (SurfaceTensor, SurfaceTensor) {
        (quadratic_form_gradient(e, &self.alpha), quadratic_form_gradient(k, &self.beta))
    }

    /// Hessian of the membrane form in stacked `(11, 21, 31, 12, 22, 32)` order.
    pub fn membrane_hessian(&self) -> SMatrix<f64, 6, 6> {
        quadratic_form_hessian(&self.alpha)
    }

    pub fn bending_hessian(&self) -> SMatrix<f64, 6, 6> {
        quadratic_form_hessian(&self.beta)
    }
}

fn parallel_part(t: &SurfaceTensor) -> Mat3 {
    let mut m = t.embed();
    m.row_mut(2).fill(0.0);
    m
}

fn tensor_form(t: &SurfaceTensor, c: &[f64; 4]) -> f64 {
    let par = parallel_part(t);
    let tr = par.trace();
    let normal_row = t.0.row(2);
    0.5 * (c[0] * tr * tr
        + c[1] * (par * par).trace()
        + c[2] * (par.transpose() * par).trace()
        + c[3] * normal_row.norm_squared())
}

/// Evaluates the energy through the tensor expressions (traces of `E_∥`).
pub fn energy_isotropic(e: &SurfaceTensor, k: &SurfaceTensor, m: &IsotropicCoefficients) -> EnergySplit {
    EnergySplit {
        membrane: tensor_form(e, &m.alpha),
        bending: tensor_form(k, &m.beta),
    }
}

fn component_form(t: &[f64; 6], c: &[f64; 4]) -> f64 {
    let [t11, t21, t31, t12, t22, t32] = *t;
    0.5 * (c[0] + c[1] + c[2]) * (t11 * t11 + t22 * t22)
        + 0.5 * c[2] * (t12 * t12 + t21 * t21)
        + 0.5 * c[3] * (t31 * t31 + t32 * t32)
        + c[0] * t11 * t22
        + c[1] * t12 * t21
}

/// Membrane energy from the expanded component polynomial; `e` in stacked order.
pub fn membrane_quadratic_form(e: &[f64; 6], m: &IsotropicCoefficients) -> f64 {
    component_form(e, &m.alpha)
}

/// Bending analogue of [`membrane_quadratic_form`].
pub fn bending_quadratic_form(k: &[f64; 6], m: &IsotropicCoefficients) -> f64 {
    component_form(k, &m.beta)
}

fn quadratic_form_gradient(t: &SurfaceTensor, c: &[f64; 4]) -> SurfaceTensor {
    let [t11, t21, t31, t12, t22, t32] = t.stacked();
    let diag = c[0] + c[1] + c[2];
    SurfaceTensor::from_stacked(&[
        diag * t11 + c[0] * t22,
        c[2] * t21 + c[1] * t12,
        c[3] * t31,
        c[2] * t12 + c[1] * t21,
        diag * t22 + c[0] * t11,
        c[3] * t32,
    ])
}

fn quadratic_form_hessian(c: &[f64; 4]) -> SMatrix<f64, 6, 6> {
    let mut h = SMatrix::<f64, 6, 6>::zeros();
    let diag = c[0] + c[1] + c[2];
    h[(0, 0)] = diag;
    h[(4, 4)] = diag;
    h[(0, 4)] = c[0];
    h[(4, 0)] = c[0];
    h[(1, 1)] = c[2];
    h[(3, 3)] = c[2];
    h[(1, 3)] = c[1];
    h[(3, 1)] = c[1];
    h[(2, 2)] = c[3];
    h[(5, 5)] = c[3];
    h
}

/// One strict inequality of the definiteness conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub label: String,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefinitenessReport {
    pub inequalities: Vec<InequalityCheck>,
    /// Largest `c1` with `W_mb(E) ≥ c1 ‖E‖²`.
    pub membrane_constant: f64,
    /// Largest `c̄1` with `W_bend(K) ≥ c̄1 ‖K‖²`.
    pub bending_constant: f64,
    pub pass: bool,
}

impl DefinitenessReport {
    pub fn violated(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.inequalities.iter().filter(|c| !c.holds)
    }
}

fn inequalities(symbol: &str, c: &[f64; 4]) -> Vec<InequalityCheck> {
    let s = symbol;
    [
        (format!("2{s}1+{s}2+{s}3 > 0"), 2.0 * c[0] + c[1] + c[2]),
        (format!("{s}2+{s}3 > 0"), c[1] + c[2]),
        (format!("{s}3-{s}2 > 0"), c[2] - c[1]),
        (format!("{s}4 > 0"), c[3]),
    ]
    .into_iter()
    .map(|(label, value)| InequalityCheck {
        label,
        value,
        holds: value > 0.0,
    })
    .collect()
}

/// Checks the eight strict inequalities and computes the coercivity constants
/// as half the smallest Hessian eigenvalue of each quadratic form.
pub fn check_definiteness(m: &IsotropicCoefficients) -> DefinitenessReport {
    let mut checks = inequalities("alpha", &m.alpha);
    checks.extend(inequalities("beta", &m.beta));
    let membrane_constant = 0.5 * symmetric_min_eigenvalue(&m.membrane_hessian());
    let bending_constant = 0.5 * symmetric_min_eigenvalue(&m.bending_hessian());
    let pass = checks.iter().all(|c| c.holds);
    DefinitenessReport {
        inequalities: checks,
        membrane_constant,
        bending_constant,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(i: usize, alpha: usize) -> SurfaceTensor {
        let mut t = SurfaceTensor::zeros();
        t.set(i, alpha, 1.0);
        t
    }

    fn sample() -> IsotropicCoefficients {
        IsotropicCoefficients {
            alpha: [0.3, 0.2, 1.1, 0.7],
            beta: [0.05, -0.01, 0.2, 0.09],
        }
    }

    #[test]
    fn energy_examples() {
        let m = sample();
        let z = SurfaceTensor::zeros();
        assert_eq!(energy_isotropic(&z, &z, &m).total(), 0.0);
        let w = energy_isotropic(&unit(0, 0), &z, &m);
        assert!((w.total() - 0.5 * (0.3 + 0.2 + 1.1)).abs() < 1e-15);
        let w = energy_isotropic(&unit(2, 0), &z, &m);
        assert!((w.total() - 0.5 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn component_form_examples() {
        let m = sample();
        let [a1, a2, a3, _] = m.alpha;
        let mut e = [0.0; 6];
        e[0] = 1.0;
        e[4] = 1.0;
        assert!((membrane_quadratic_form(&e, &m) - ((a1 + a2 + a3) + a1)).abs() < 1e-15);
        let mut e = [0.0; 6];
        e[1] = 1.0;
        e[3] = 1.0;
        assert!((membrane_quadratic_form(&e, &m) - (a3 + a2)).abs() < 1e-15);
        assert_eq!(membrane_quadratic_form(&[0.0; 6], &m), 0.0);
    }

    #[test]
    fn tensor_and_component_forms_agree() {
        let m = sample();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let e: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let k: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let w = energy_isotropic(&SurfaceTensor::from_stacked(&e), &SurfaceTensor::from_stacked(&k), &m);
            let mb = membrane_quadratic_form(&e, &m);
            let bd = bending_quadratic_form(&k, &m);
            assert!((w.membrane - mb).abs() <= 1e-14 * mb.abs().max(1.0));
            assert!((w.bending - bd).abs() <= 1e-14 * bd.abs().max(1.0));
        }
    }

    #[test]
    fn engineering_coefficients() {
        let ep = EngineeringParams::new(1.0, 0.3, 0.1);
        let m = from_engineering(&ep).unwrap();
        let c = 0.1 / 0.91;
        let d = c * 0.01 / 12.0;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-15 * b.abs().max(1e-300);
        assert!(close(m.alpha[0], 0.3 * c));
        assert_eq!(m.alpha[1], 0.0);
        assert!(close(m.alpha[2], 0.7 * c));
        assert!(close(m.alpha[3], 5.0 / 6.0 * 0.7 * c));
        assert!(close(m.beta[0], 0.3 * d));
        assert!(close(m.beta[2], 0.7 * d));
        assert!(close(m.beta[3], 0.7 * 0.7 * d));
        assert!(check_definiteness(&m).pass);

        let m0 = from_engineering(&EngineeringParams::new(2.0, 0.0, 0.2)).unwrap();
        assert_eq!(m0.alpha[0], 0.0);
        assert_eq!(m0.beta[0], 0.0);

        assert!(from_engineering(&EngineeringParams::new(1.0, 0.5, 0.1)).is_err());
        assert!(from_engineering(&EngineeringParams::new(-1.0, 0.3, 0.1)).is_err());
        assert!(from_engineering(&EngineeringParams::new(1.0, 0.3, 0.0)).is_err());
    }

    #[test]
    fn lame_route_matches_engineering_route() {
        let ep = EngineeringParams::new(3.0, 0.27, 0.05);
        let (mu, lambda) = ep.lame();
        let a = from_engineering(&ep).unwrap();
        let b = IsotropicCoefficients::from_lame(mu, lambda, ep.thickness, ep.alpha_s, ep.alpha_t);
        for k in 0..4 {
            assert!((a.alpha[k] - b.alpha[k]).abs() < 1e-14);
            assert!((a.beta[k] - b.beta[k]).abs() < 1e-16);
        }
    }

    #[test]
    fn definiteness_failure_names_inequality() {
        let m = IsotropicCoefficients {
            alpha: [1.0, 2.0, 1.0, 1.0],
            beta: [1.0, 0.0, 1.0, 1.0],
        };
        let report = check_definiteness(&m);
        assert!(!report.pass);
        let violated: Vec<_> = report.violated().map(|c| c.label.as_str()).collect();
        assert_eq!(violated, vec!["alpha3-alpha2 > 0"]);
        assert!(report.membrane_constant < 0.0);
    }

    #[test]
    fn coercivity_constant_from_block_eigenvalues() {
        let m = IsotropicCoefficients {
            alpha: [0.0, 0.0, 2.0, 1.0],
            beta: [0.0, 0.0, 2.0, 1.0],
        };
        let report = check_definiteness(&m);
        assert!(report.pass);
        assert!((report.membrane_constant - 0.5).abs() < 1e-12);

        // Blocks: (E11,E22) -> {2a1+a2+a3, a2+a3}; (E12,E21) -> {a3±a2}; (E31,E32) -> a4.
        let m = sample();
        let [a1, a2, a3, a4] = m.alpha;
        let oracle = [2.0 * a1 + a2 + a3, a2 + a3, a3 + a2, a3 - a2, a4]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!((check_definiteness(&m).membrane_constant - 0.5 * oracle).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = sample();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let e: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let k: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let (ge, gk) = m.gradient(&SurfaceTensor::from_stacked(&e), &SurfaceTensor::from_stacked(&k));
        let f = |e: &[f64; 6], k: &[f64; 6]| {
            energy_isotropic(&SurfaceTensor::from_stacked(e), &SurfaceTensor::from_stacked(k), &m).total()
        };
        let step = 1e-5;
        for c in 0..6 {
            let (mut ep, mut em) = (e, e);
            ep[c] += step;
            em[c] -= step;
            let fd = (f(&ep, &k) - f(&em, &k)) / (2.0 * step);
            assert!((fd - ge.stacked()[c]).abs() < 1e-9);
            let (mut kp, mut km) = (k, k);
            kp[c] += step;
            km[c] -= step;
            let fd = (f(&e, &kp) - f(&e, &km)) / (2.0 * step);
            assert!((fd - gk.stacked()[c]).abs() < 1e-9);
        }
    }
}
