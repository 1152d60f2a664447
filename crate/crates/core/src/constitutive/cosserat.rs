//! Cosserat plate energy in terms of the stretch `Ū − 1` and the third-order
//! curvature `𝕶_s`, and the coefficient identification with the isotropic form.

use super::{ConstitutiveError, EnergySplit, InequalityCheck, IsotropicCoefficients};
use crate::kinematics::{CurvatureThirdOrder, SurfaceTensor};
use crate::so3::Mat3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosseratParams {
    pub mu: f64,
    pub lambda: f64,
    pub mu_c: f64,
    pub l_c: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub a7: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    pub h: f64,
}

fn one() -> f64 {
    1.0
}

impl CosseratParams {
    /// Hard requirements for the energy to be defined. The existence regime
    /// (`μ_c > 0` and friends) is reported by [`check`](Self::check) instead,
    /// so that degenerate parameter sets can still be evaluated.
    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        let all = [
            self.mu, self.lambda, self.mu_c, self.l_c, self.a4, self.a5, self.a6, self.a7, self.p, self.q,
            self.kappa, self.h,
        ];
        let mut problems = Vec::new();
        if all.iter().any(|v| !v.is_finite()) {
            problems.push("all parameters must be finite".to_string());
        }
        if !(self.p >= 1.0) {
            problems.push(format!("p = {} must be >= 1", self.p));
        }
        if !(self.q >= 0.0) {
            problems.push(format!("q = {} must be >= 0", self.q));
        }
        if !(self.h > 0.0) {
            problems.push(format!("h = {} must be > 0", self.h));
        }
        if !(self.l_c >= 0.0) {
            problems.push(format!("L_c = {} must be >= 0", self.l_c));
        }
        if !(self.lambda + 2.0 * self.mu != 0.0) {
            problems.push("lambda + 2 mu must be nonzero".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConstitutiveError::InvalidCosserat(problems.join("; ")))
        }
    }

    /// The existence regime: `μ_c > 0, μ > 0, λ > 0, a5 > 0, a6 > 0, a7 ≥ 0, a4 ≥ 0`.
    pub fn check(&self) -> Vec<InequalityCheck> {
        let strict = [("mu_c > 0", self.mu_c), ("mu > 0", self.mu), ("lambda > 0", self.lambda), ("a5 > 0", self.a5), ("a6 > 0", self.a6)];
        let loose = [("a7 >= 0", self.a7), ("a4 >= 0", self.a4)];
        strict
            .into_iter()
            .map(|(l, v)| InequalityCheck {
                label: l.to_string(),
                value: v,
                holds: v > 0.0,
            })
            .chain(loose.into_iter().map(|(l, v)| InequalityCheck {
                label: l.to_string(),
                value: v,
                holds: v >= 0.0,
            }))
            .collect()
    }

    fn lame_ratio(&self) -> f64 {
        self.lambda * self.mu / (self.lambda + 2.0 * self.mu)
    }

    /// `μ‖sym X‖² + μ_c‖skew X‖² + λμ/(λ+2μ) tr²X`.
    fn group(&self, x: &Mat3) -> f64 {
        let sym = 0.5 * (x + x.transpose());
        let skew = 0.5 * (x - x.transpose());
        let tr = x.trace();
        self.mu * sym.norm_squared() + self.mu_c * skew.norm_squared() + self.lame_ratio() * tr * tr
    }

    fn group_gradient(&self, x: &Mat3) -> Mat3 {
        let sym = 0.5 * (x + x.transpose());
        let skew = 0.5 * (x - x.transpose());
        2.0 * self.mu * sym + 2.0 * self.mu_c * skew + Mat3::identity() * (2.0 * self.lame_ratio() * x.trace())
    }

    fn slice_term(&self, x: &Mat3) -> f64 {
        let sym = 0.5 * (x + x.transpose());
        let skew = 0.5 * (x - x.transpose());
        let tr = x.trace();
        self.a5 * sym.norm_squared() + self.a6 * skew.norm_squared() + self.a7 * tr * tr
    }

    fn slice_term_gradient(&self, x: &Mat3) -> Mat3 {
        let sym = 0.5 * (x + x.transpose());
        let skew = 0.5 * (x - x.transpose());
        2.0 * self.a5 * sym + 2.0 * self.a6 * skew + Mat3::identity() * (2.0 * self.a7 * x.trace())
    }

    fn length_scale_prefactor(&self) -> f64 {
        self.h * self.l_c.powf(1.0 + self.p) * self.mu / 12.0
    }

    /// Energy split into the stretch group (membrane) and the two curvature groups (bending).
    pub fn energy_split(&self, ubar_minus_1: &Mat3, ks: &CurvatureThirdOrder) -> EnergySplit {
        let membrane = self.h * self.group(ubar_minus_1);
        let h3 = self.h * self.h * self.h;
        let slices = ks.slices.map(|s| s.embed());
        let mut bending = h3 / 12.0 * self.group(&slices[2]);
        let r = 0.5 * (1.0 + self.p);
        let sum: f64 = slices.iter().map(|s| power(self.slice_term(s), r)).sum();
        let amplification = 1.0 + self.a4 * power(self.l_c * ks.norm(), self.q);
        bending += self.length_scale_prefactor() * amplification * sum;
        EnergySplit { membrane, bending }
    }

    /// `(∂W/∂(Ū−1), ∂W/∂𝕶ⁱ)` with the gradients restricted to the first two columns.
    pub fn energy_gradient(&self, ubar_minus_1: &Mat3, ks: &CurvatureThirdOrder) -> (SurfaceTensor, CurvatureThirdOrder) {
        let g_u = restrict(&(self.h * self.group_gradient(ubar_minus_1)));
        let h3 = self.h * self.h * self.h;
        let slices = ks.slices.map(|s| s.embed());
        let r = 0.5 * (1.0 + self.p);
        let terms = slices.map(|s| self.slice_term(&s));
        let sum: f64 = terms.iter().map(|&t| power(t, r)).sum();
        let norm = ks.norm();
        let amplification = 1.0 + self.a4 * power(self.l_c * norm, self.q);
        // d/d𝕶 of a4 (L_c ‖𝕶‖)^q = a4 q L_c^q ‖𝕶‖^(q−2) 𝕶
        let amp_factor = if self.a4 == 0.0 || self.q == 0.0 || norm == 0.0 {
            0.0
        } else {
            self.a4 * self.q * self.l_c.powf(self.q) * norm.powf(self.q - 2.0)
        };
        let pre = self.length_scale_prefactor();
        let mut out = [SurfaceTensor::zeros(); 3];
        for i in 0..3 {
            let mut g = pre * amplification * r * power(terms[i], r - 1.0) * self.slice_term_gradient(&slices[i]);
            g += pre * amp_factor * sum * slices[i];
            if i == 2 {
                g += h3 / 12.0 * self.group_gradient(&slices[2]);
            }
            out[i] = restrict(&g);
        }
        (g_u, CurvatureThirdOrder { slices: out })
    }

    /// Energy as a function of `(E, K)` through `Ū − 1 = [E | 0]` and `𝕶_s(K)`.
    pub fn energy_ek(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> EnergySplit {
        self.energy_split(&e.embed(), &CurvatureThirdOrder::from_bending(k))
    }

    /// `(∂W/∂E, ∂W/∂K)` by the chain rule through the ε map.
    pub fn gradient_ek(&self, e: &SurfaceTensor, k: &SurfaceTensor) -> (SurfaceTensor, SurfaceTensor) {
        let (g_e, g_ks) = self.energy_gradient(&e.embed(), &CurvatureThirdOrder::from_bending(k));
        // ∂W/∂K_{kα} = ε_{ijk} G^i_{jα}, which is twice the inverse map.
        (g_e, g_ks.bending() * 2.0)
    }
}

/// `x^r` for `x ≥ 0`, with `0^0 = 1`.
fn power(x: f64, r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else if r == 1.0 {
        x
    } else if x == 0.0 {
        0.0
    } else {
        x.powf(r)
    }
}

fn restrict(m: &Mat3) -> SurfaceTensor {
    SurfaceTensor::from_columns(&m.column(0).into_owned(), &m.column(1).into_owned())
}

/// Evaluates all three groups of the Cosserat plate energy.
pub fn energy_cosserat(ubar_minus_1: &Mat3, ks: &CurvatureThirdOrder, cp: &CosseratParams) -> f64 {
    cp.energy_split(ubar_minus_1, ks).total()
}

/// Isotropic coefficients reproducing the Cosserat energy for `p = 1`, `a4 = 0`.
pub fn identify_coefficients(cp: &CosseratParams) -> Result<IsotropicCoefficients, ConstitutiveError> {
    if cp.p != 1.0 || cp.a4 != 0.0 {
        return Err(ConstitutiveError::IdentificationRegime { p: cp.p, a4: cp.a4 });
    }
    let CosseratParams {
        mu,
        lambda,
        mu_c,
        l_c,
        a5,
        a6,
        a7,
        kappa,
        h,
        ..
    } = *cp;
    let l2 = l_c * l_c;
    let h2 = h * h;
    let s = 1.5 * a5 + 0.5 * a6 + a7;
    // Shared products keep α3 − α2 within one ulp of 2hμ_c.
    let (h_mu, h_mu_c) = (h * mu, h * mu_c);
    Ok(IsotropicCoefficients {
        alpha: [
            h * 2.0 * lambda * mu / (lambda + 2.0 * mu),
            h_mu - h_mu_c,
            h_mu + h_mu_c,
            kappa * (h_mu + h_mu_c),
        ],
        beta: [
            -h / 12.0 * (h2 * (mu - mu_c) + mu * l2 * (a5 - a6)),
            -h * mu / 6.0 * (h2 * lambda / (lambda + 2.0 * mu) + l2 * a7),
            h * mu / 6.0 * (h2 * 2.0 * (lambda + mu) / (lambda + 2.0 * mu) + l2 * s),
            h * mu / 6.0 * l2 * s,
        ],
    })
}
