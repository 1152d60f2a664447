//! Small-matrix algebra for the rotation group SO(3) and its Lie algebra of
//! skew-symmetric matrices.
//!
//! Axial vectors follow the convention `axl(A) = (A32, A13, A21)`, so that
//! `A v = axl(A) × v` for every skew `A`. The exponential is the closed-form
//! axis-angle map with a Taylor fallback for small angles; the logarithm is
//! restricted to angles strictly below π.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use std::f64::consts::PI;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance used when a matrix is accepted as a rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-12;

/// Below this angle `exp_so3` switches to its Taylor expansion.
const EXP_SERIES_ANGLE: f64 = 1e-4;
/// Below this angle the inverse Jacobian coefficient uses its Taylor expansion.
const JACOBIAN_SERIES_ANGLE: f64 = 5e-2;
/// `log_so3` rejects rotations with `tr R <= -1 + LOG_TRACE_MARGIN`.
const LOG_TRACE_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum So3Error {
    #[error("matrix is not skew-symmetric (|A + A^T| = {0:e})")]
    NotSkew(f64),
    #[error("matrix is not a rotation: orthogonality defect {orthogonality:e}, det {det}")]
    NotRotation { orthogonality: f64, det: f64 },
    #[error("rotation angle at or beyond pi (trace {0}); the rotation field is under-resolved")]
    AngleAtPi(f64),
    #[error("cannot project onto SO(3): determinant {0:e} is not positive")]
    Degenerate(f64),
    #[error("non-finite entries")]
    NonFinite,
}

/// A proper orthogonal 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validates `m` against the rotation invariants at [`ROTATION_TOLERANCE`].
    pub fn new(m: Mat3) -> Result<Self, So3Error> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(So3Error::NonFinite);
        }
        let orthogonality = orthogonality_defect(&m);
        let det = m.determinant();
        if orthogonality > ROTATION_TOLERANCE
            || (det - 1.0).abs() > ROTATION_TOLERANCE
            || (m.norm_squared() - 3.0).abs() > ROTATION_TOLERANCE
        {
            return Err(So3Error::NotRotation { orthogonality, det });
        }
        Ok(Rotation(m))
    }

    pub fn from_row_major(rows: &[[f64; 3]; 3]) -> Result<Self, So3Error> {
        let m = Mat3::from_fn(|i, j| rows[i][j]);
        Rotation::new(m)
    }

    pub fn to_row_major(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Director `d_i = Q e_i` (zero-based `i`).
    #[inline]
    pub fn director(&self, i: usize) -> Vec3 {
        self.0.column(i).into_owned()
    }

    #[inline]
    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    #[inline]
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    /// `‖QᵀQ − 1‖_F`.
    pub fn drift(&self) -> f64 {
        orthogonality_defect(&self.0)
    }

    /// Re-projects onto SO(3) when the orthogonality defect exceeds `threshold`.
    pub fn renormalized(&self, threshold: f64) -> Rotation {
        if self.drift() > threshold {
            project_so3(&self.0).unwrap_or(*self)
        } else {
            *self
        }
    }

    /// Uniformly distributed rotation (Shoemake's unit-quaternion construction).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen::<f64>() * 2.0 * PI;
        let u3: f64 = rng.gen::<f64>() * 2.0 * PI;
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        let (w, x, y, z) = (a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos());
        let m = Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        );
        Rotation(m)
    }
}

impl std::ops::Mul<Vec3> for Rotation {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.0 * v
    }
}

fn orthogonality_defect(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// Axial vector of a skew-symmetric matrix.
pub fn axl(a: &Mat3) -> Result<Vec3, So3Error> {
    let defect = (a + a.transpose()).norm();
    if defect > 1e-10 * a.norm().max(1.0) {
        return Err(So3Error::NotSkew(defect));
    }
    Ok(axl_unchecked(a))
}

/// Reads `(A32, A13, A21)` without checking skewness.
#[inline]
pub fn axl_unchecked(a: &Mat3) -> Vec3 {
    Vec3::new(a[(2, 1)], a[(0, 2)], a[(1, 0)])
}

/// Axial vector of the skew part, `axl((A − Aᵀ)/2)`.
#[inline]
pub fn axl_of_skew_part(a: &Mat3) -> Vec3 {
    0.5 * Vec3::new(
        a[(2, 1)] - a[(1, 2)],
        a[(0, 2)] - a[(2, 0)],
        a[(1, 0)] - a[(0, 1)],
    )
}

#[rustfmt::skip]
#[inline]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(
         0.0, -v.z,  v.y,
         v.z,  0.0, -v.x,
        -v.y,  v.x,  0.0,
    )
}

/// Rotation by angle `‖v‖` about `v / ‖v‖`.
pub fn exp_so3(v: &Vec3) -> Rotation {
    let theta2 = v.norm_squared();
    let (a, b) = if theta2 < EXP_SERIES_ANGLE * EXP_SERIES_ANGLE {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        let theta = theta2.sqrt();
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let w = hat(v);
    Rotation(Mat3::identity() + a * w + b * (w * w))
}

/// Principal logarithm, returned as an axial vector with norm below π.
pub fn log_so3(r: &Rotation) -> Result<Vec3, So3Error> {
    let m = r.matrix();
    let trace = m.trace();
    if trace <= -1.0 + LOG_TRACE_MARGIN {
        return Err(So3Error::AngleAtPi(trace));
    }
    let cos = 0.5 * (trace - 1.0);
    let w = axl_of_skew_part(m);
    let sin = w.norm();
    if cos > -0.5 {
        let theta = sin.atan2(cos);
        let factor = if theta < EXP_SERIES_ANGLE {
            // θ / sin θ
            let s2 = sin * sin;
            1.0 + s2 / 6.0 + 3.0 * s2 * s2 / 40.0
        } else {
            theta / sin
        };
        return Ok(factor * w);
    }
    // Near π the skew part is small; recover the axis from (R + Rᵀ)/2 − cos·1 = (1 − cos) a aᵀ.
    let theta = sin.atan2(cos);
    let sym = 0.5 * (m + m.transpose()) - cos * Mat3::identity();
    let k = (0..3)
        .max_by(|&i, &j| sym[(i, i)].partial_cmp(&sym[(j, j)]).unwrap())
        .unwrap();
    let mut axis: Vec3 = sym.column(k).into_owned();
    axis /= axis.norm();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    Ok(theta * axis)
}

/// Closest rotation in the Frobenius norm (orthogonal polar factor of `m`).
///
/// Uses the scaled Newton iteration `X ← ½(γX + X⁻ᵀ/γ)`, which converges
/// quadratically once the singular values are near one.
pub fn project_so3(m: &Mat3) -> Result<Rotation, So3Error> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(So3Error::NonFinite);
    }
    let det = m.determinant();
    let scale = m.norm().powi(3).max(f64::MIN_POSITIVE);
    if det <= 1e-14 * scale {
        return Err(So3Error::Degenerate(det));
    }
    let mut x = *m;
    for iter in 0..100 {
        let inv_t = match x.try_inverse() {
            Some(inv) => inv.transpose(),
            None => return Err(So3Error::Degenerate(x.determinant())),
        };
        let gamma = if iter < 6 {
            (inv_t.norm() / x.norm()).sqrt()
        } else {
            1.0
        };
        let next = 0.5 * (gamma * x + inv_t / gamma);
        let change = (next - x).norm();
        x = next;
        if change < 1e-15 {
            break;
        }
    }
    Ok(Rotation(x))
}

/// The matrix `J_l⁻¹(φ)` with `log(exp(δ) exp(φ)) = φ + J_l⁻¹(φ) δ + O(δ²)`.
///
/// The right inverse Jacobian is `J_l⁻¹(−φ) = J_l⁻¹(φ)ᵀ`.
pub fn left_jacobian_inverse(phi: &Vec3) -> Mat3 {
    let theta2 = phi.norm_squared();
    let c = if theta2 < JACOBIAN_SERIES_ANGLE * JACOBIAN_SERIES_ANGLE {
        1.0 / 12.0 + theta2 / 720.0 + theta2 * theta2 / 30240.0
    } else {
        let theta = theta2.sqrt();
        1.0 / theta2 - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    let w = hat(phi);
    Mat3::identity() - 0.5 * w + c * (w * w)
}
