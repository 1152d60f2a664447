//! Equilibrium residuals, the gradient contract, frame indifference and the
//! Cosserat/isotropic equivalence audit.

use crate::constitutive::{energy_isotropic, identify_coefficients, ConstitutiveError, CosseratParams, Material};
use crate::functional::{retract, total_energy, CellState, DofMask, FunctionalError, Gradient, LoadSpec};
use crate::grid::{Configuration, PlateGrid};
use crate::kinematics::{strain_field, SurfaceTensor};
use crate::so3::{exp_so3, Rotation, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeResidualNorms {
    pub max: f64,
    /// `(Σ w |r|²)^½` over interior nodes.
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `Div_s N + f` per node; zero off the interior.
    pub force_residual: Vec<Vec3>,
    /// `Div_s M + axl(N Fᵀ − F Nᵀ) + c` per node; zero off the interior.
    pub moment_residual: Vec<Vec3>,
    pub force: NodeResidualNorms,
    pub moment: NodeResidualNorms,
    pub interior_nodes: usize,
}

/// Evaluates both balance equations at interior nodes.
///
/// `Div_s` is the discrete adjoint of the cell-centered difference stencil,
/// scaled by the dual-cell area. The couple field `c` defaults to the one
/// induced by the couple load `C_ω`.
pub fn equilibrium_residual(
    grid: &PlateGrid,
    config: &Configuration,
    material: &Material,
    loads: &LoadSpec,
    couple: Option<&[Vec3]>,
) -> Result<ResidualReport, FunctionalError> {
    loads.validate(grid)?;
    let state = CellState::evaluate(grid, config, material, true)?;
    let stress = state.stress.as_ref().expect("stress requested");
    let [h1, h2] = grid.spacing();
    let area = grid.cell_area();
    let nn = grid.node_count();
    let mut adj_n = vec![Vec3::zeros(); nn];
    let mut adj_m = vec![Vec3::zeros(); nn];
    let mut spin = vec![Vec3::zeros(); nn];
    for (c, ck) in state.cells.iter().enumerate() {
        let (i, j) = grid.cell_ij(c);
        let p = ck.rotation.matrix();
        let (ge, gk) = &stress[c];
        let n = [p * ge.column(0), p * ge.column(1)];
        let m = [p * gk.column(0), p * gk.column(1)];
        // axl(N Fᵀ − F Nᵀ) = Σ_α y,α × n_α
        let s = ck.dy[0].cross(&n[0]) + ck.dy[1].cross(&n[1]);
        let signs = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];
        for (k, &node) in grid.cell_corners(i, j).iter().enumerate() {
            let (s1, s2) = signs[k];
            adj_n[node] += area * (s1 * n[0] / (2.0 * h1) + s2 * n[1] / (2.0 * h2));
            adj_m[node] += area * (s1 * m[0] / (2.0 * h1) + s2 * m[1] / (2.0 * h2));
            spin[node] += 0.25 * area * s;
        }
    }
    let induced;
    let c = match couple {
        Some(c) => c,
        None => {
            induced = loads.induced_couple(config);
            &induced[..]
        }
    };
    let w = grid.area_weights();
    let mut force_residual = vec![Vec3::zeros(); nn];
    let mut moment_residual = vec![Vec3::zeros(); nn];
    let interior = grid.interior_nodes();
    let (mut force, mut moment) = (NodeResidualNorms::default(), NodeResidualNorms::default());
    for &n in &interior {
        let rf = -adj_n[n] / w[n] + loads.f[n];
        let rm = -adj_m[n] / w[n] + spin[n] / w[n] + c[n];
        force.max = force.max.max(rf.norm());
        moment.max = moment.max.max(rm.norm());
        force.l2 += w[n] * rf.norm_squared();
        moment.l2 += w[n] * rm.norm_squared();
        force_residual[n] = rf;
        moment_residual[n] = rm;
    }
    force.l2 = force.l2.sqrt();
    moment.l2 = moment.l2.sqrt();
    Ok(ResidualReport {
        force_residual,
        moment_residual,
        force,
        moment,
        interior_nodes: interior.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub directions: usize,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Smooth random field of the given amplitude with one percent of
/// node-wise noise on top, reproducible from `seed`.
pub fn random_configuration(grid: &PlateGrid, amplitude: f64, seed: u64) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: [f64; 6] = std::array::from_fn(|_| rng.gen_range(0.0..std::f64::consts::TAU));
    let mut c = Configuration::reference(grid);
    for n in 0..grid.node_count() {
        let x = grid.reference_position(n);
        let s = |k: usize| (2.0 * x.x + 1.5 * x.y + phase[k]).sin();
        c.y[n] += amplitude * Vec3::new(s(0), s(1), s(2)) + 0.01 * amplitude * random_unit(&mut rng);
        c.q[n] = exp_so3(&(amplitude * Vec3::new(s(3), s(4), s(5)) + 0.01 * amplitude * random_unit(&mut rng)));
    }
    c
}

/// Central differences of the total energy along random masked directions
/// against the assembled gradient.
///
/// The relative error of a direction is measured against the larger of the
/// two directional derivatives; directions where both vanish contribute only
/// to the absolute error.
#[allow(clippy::too_many_arguments)]
pub fn gradient_check(
    grid: &PlateGrid,
    config: &Configuration,
    material: &Material,
    loads: &LoadSpec,
    mask: Option<&DofMask>,
    step: f64,
    directions: usize,
    seed: u64,
) -> Result<GradientCheckReport, FunctionalError> {
    let g = crate::functional::energy_gradient(grid, config, material, loads)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rel, mut abs) = (0.0f64, 0.0f64);
    for _ in 0..directions {
        let mut d = Gradient {
            y: (0..grid.node_count()).map(|_| random_unit(&mut rng)).collect(),
            q: (0..grid.node_count()).map(|_| random_unit(&mut rng)).collect(),
        };
        if let Some(m) = mask {
            m.apply(&mut d);
        }
        let exact = g.dot(&d);
        let f = |t: f64| total_energy(grid, &retract(config, &d, t), material, loads).map(|e| e.total);
        let fd = (f(step)? - f(-step)?) / (2.0 * step);
        let err = (fd - exact).abs();
        abs = abs.max(err);
        let scale = fd.abs().max(exact.abs());
        if scale > 1e-300 {
            rel = rel.max(err / scale);
        }
    }
    Ok(GradientCheckReport {
        max_relative_error: rel,
        max_absolute_error: abs,
        directions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub motions: usize,
    pub max_relative_energy_change: f64,
    /// Largest component change of `E` or `K` over all cells and motions.
    pub max_strain_change: f64,
    /// Pure translation leaves `K` bitwise unchanged.
    pub translation_bending_bitwise: bool,
    pub translation_strain_change: f64,
}

impl InvarianceReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_energy_change <= tolerance
            && self.max_strain_change <= tolerance
            && self.translation_bending_bitwise
            && self.translation_strain_change <= tolerance
    }
}

fn max_field_change(a: &[SurfaceTensor], b: &[SurfaceTensor]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.0 - y.0).amax()).fold(0.0, f64::max)
}

/// Applies random superposed rigid motions `(y, Q) → (R y + c, R Q)`.
pub fn invariance_check(
    grid: &PlateGrid,
    config: &Configuration,
    material: &Material,
    motions: usize,
    seed: u64,
) -> Result<InvarianceReport, FunctionalError> {
    let zero = LoadSpec::zero(grid);
    let base = total_energy(grid, config, material, &zero)?;
    let base_w = base.membrane + base.bending;
    let base_s = strain_field(grid, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut de, mut ds) = (0.0f64, 0.0f64);
    for _ in 0..motions {
        let r = Rotation::random(&mut rng);
        let c = 10.0 * random_unit(&mut rng);
        let moved = config.rigidly_moved(&r, &c);
        let e = total_energy(grid, &moved, material, &zero)?;
        let w = e.membrane + e.bending;
        // Relative change, or the absolute one when the base energy vanishes.
        de = de.max(if base_w == 0.0 {
            w.abs()
        } else {
            (w - base_w).abs() / base_w.abs()
        });
        let s = strain_field(grid, &moved)?;
        ds = ds.max(max_field_change(&s.strain, &base_s.strain));
        ds = ds.max(max_field_change(&s.bending, &base_s.bending));
    }
    let shifted = config.rigidly_moved(&Rotation::identity(), &Vec3::new(3.0, -2.0, 1.0));
    let st = strain_field(grid, &shifted)?;
    Ok(InvarianceReport {
        motions,
        max_relative_energy_change: de,
        max_strain_change: ds,
        translation_bending_bitwise: st.bending == base_s.bending,
        translation_strain_change: max_field_change(&st.strain, &base_s.strain),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub samples: usize,
    /// Least-squares `κ` for the relative discrepancy.
    pub fitted_kappa: f64,
    pub max_relative_discrepancy: f64,
    /// Discrepancy with the `κ` supplied in the parameters.
    pub max_relative_discrepancy_input_kappa: f64,
    /// Largest discrepancy over membrane-only samples and several `κ` values.
    pub membrane_only_max_discrepancy: f64,
    /// `α3 − α2 − 2hμ_c`.
    pub couple_modulus_residual: f64,
    pub warnings: Vec<String>,
}

fn random_tensor(rng: &mut ChaCha8Rng, scale: f64) -> SurfaceTensor {
    SurfaceTensor::from_stacked(&std::array::from_fn::<f64, 6, _>(|_| scale * rng.gen_range(-1.0..1.0)))
}

/// Compares the Cosserat energy with the isotropic energy of the identified
/// coefficients and fits the transverse-shear factor `κ`.
///
/// Only `α4 = κ h (μ + μ_c)` depends on `κ`, so the isotropic energy is
/// `a + κ b` with `b = ½ h (μ + μ_c)(E31² + E32²)` and the fit is linear.
pub fn equivalence_audit(cp: &CosseratParams, samples: usize, seed: u64) -> Result<EquivalenceReport, ConstitutiveError> {
    cp.validate()?;
    let base = identify_coefficients(&CosseratParams { kappa: 0.0, ..*cp })?;
    let with_input = identify_coefficients(cp)?;
    let mut warnings = Vec::new();
    if cp.mu_c == 0.0 {
        warnings.push("mu_c = 0 is the degenerate, only positive semi-definite case".to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shear = 0.5 * cp.h * (cp.mu + cp.mu_c);
    let mut data = Vec::with_capacity(samples);
    for _ in 0..samples {
        let e = random_tensor(&mut rng, 1.0);
        let k = random_tensor(&mut rng, 1.0 / cp.h);
        let w_cos = cp.energy_ek(&e, &k).total();
        let a = energy_isotropic(&e, &k, &base).total();
        let b = shear * (e.get(2, 0).powi(2) + e.get(2, 1).powi(2));
        let w_in = energy_isotropic(&e, &k, &with_input).total();
        data.push((w_cos, a, b, w_in));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(w, a, b, _) in &data {
        let s = 1.0 / (w * w);
        num += s * (w - a) * b;
        den += s * b * b;
    }
    let fitted_kappa = if den > 0.0 { num / den } else { cp.kappa };
    let fitted = identify_coefficients(&CosseratParams {
        kappa: fitted_kappa,
        ..*cp
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_fit, mut max_in) = (0.0f64, 0.0f64);
    for &(w, _, _, w_in) in &data {
        let e = random_tensor(&mut rng, 1.0);
        let k = random_tensor(&mut rng, 1.0 / cp.h);
        let w_fit = energy_isotropic(&e, &k, &fitted).total();
        max_fit = max_fit.max((w_fit - w).abs() / w.abs());
        max_in = max_in.max((w_in - w).abs() / w.abs());
    }
    let mut membrane_only = 0.0f64;
    let z = SurfaceTensor::zeros();
    for kappa in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let coeffs = identify_coefficients(&CosseratParams { kappa, ..*cp })?;
        for _ in 0..samples.min(1000) {
            let mut e = random_tensor(&mut rng, 1.0);
            e.set(2, 0, 0.0);
            e.set(2, 1, 0.0);
            let w = cp.energy_ek(&e, &z).total();
            let wi = energy_isotropic(&e, &z, &coeffs).total();
            membrane_only = membrane_only.max((wi - w).abs() / w.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(EquivalenceReport {
        samples,
        fitted_kappa,
        max_relative_discrepancy: max_fit,
        max_relative_discrepancy_input_kappa: max_in,
        membrane_only_max_discrepancy: membrane_only,
        couple_modulus_residual: with_input.alpha[2] - with_input.alpha[1] - 2.0 * cp.h * cp.mu_c,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::tests::{plate, random_configuration};
    use crate::functional::BoundaryData;
    use crate::functional::BoundaryMode;

    fn cosserat() -> CosseratParams {
        CosseratParams {
            mu: 1.0,
            lambda: 1.0,
            mu_c: 0.5,
            l_c: 0.01,
            a4: 0.0,
            a5: 1.0,
            a6: 1.0,
            a7: 0.0,
            p: 1.0,
            q: 0.0,
            kappa: 1.0,
            h: 0.1,
        }
    }

    #[test]
    fn reference_has_zero_residual() {
        let grid = PlateGrid::clamped_square(1.0, 6, 0.1).unwrap();
        let r = equilibrium_residual(&grid, &Configuration::reference(&grid), &plate(), &LoadSpec::zero(&grid), None).unwrap();
        assert!(r.force.max + r.moment.max < 1e-14);
        assert_eq!(r.interior_nodes, 16);
    }

    #[test]
    fn force_residual_sees_the_gradient() {
        // At interior nodes, Div_s N + f = −g_y / w by construction.
        let grid = PlateGrid::clamped_square(1.0, 6, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let config = random_configuration(&grid, &mut rng, 0.1);
        let loads = LoadSpec::uniform_force(&grid, Vec3::new(0.1, 0.0, 0.2));
        let g = crate::functional::energy_gradient(&grid, &config, &plate(), &loads).unwrap();
        let r = equilibrium_residual(&grid, &config, &plate(), &loads, None).unwrap();
        let w = grid.area_weights();
        for n in grid.interior_nodes() {
            assert!((r.force_residual[n] + g.y[n] / w[n]).norm() < 1e-12 * (1.0 + r.force_residual[n].norm()));
        }
    }

    #[test]
    fn gradient_check_passes() {
        let grid = PlateGrid::clamped_square(1.0, 6, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let config = random_configuration(&grid, &mut rng, 0.2);
        let mask = BoundaryData::reference(&grid, BoundaryMode::Clamped).mask(grid.node_count());
        let loads = LoadSpec::uniform_force(&grid, Vec3::z());
        let r = gradient_check(&grid, &config, &plate(), &loads, Some(&mask), 1e-6, 5, 1).unwrap();
        assert!(r.max_relative_error < 1e-6, "{r:?}");
        let zero = gradient_check(&grid, &Configuration::reference(&grid), &plate(), &LoadSpec::zero(&grid), None, 1e-6, 3, 2).unwrap();
        assert!(zero.max_absolute_error <= 1e-10);
    }

    #[test]
    fn quadratic_membrane_case_is_tight() {
        // With Q fixed at the identity, the energy is quadratic in y and central
        // differences are exact up to roundoff.
        let grid = PlateGrid::clamped_square(1.0, 6, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let mut config = random_configuration(&grid, &mut rng, 0.2);
        config.q.iter_mut().for_each(|q| *q = Rotation::identity());
        let mut mask = BoundaryData::reference(&grid, BoundaryMode::Clamped).mask(grid.node_count());
        mask.q_fixed.iter_mut().for_each(|f| *f = true);
        let r = gradient_check(&grid, &config, &plate(), &LoadSpec::zero(&grid), Some(&mask), 1e-3, 5, 3).unwrap();
        assert!(r.max_relative_error < 1e-8, "{r:?}");
    }

    #[test]
    fn invariance_of_random_field() {
        let grid = PlateGrid::clamped_square(1.0, 6, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let config = random_configuration(&grid, &mut rng, 0.2);
        let r = invariance_check(&grid, &config, &plate(), 20, 5).unwrap();
        assert!(r.passes(1e-12), "{r:?}");
    }

    #[test]
    fn audit_fits_unit_kappa() {
        let r = equivalence_audit(&cosserat(), 2000, 7).unwrap();
        assert!((r.fitted_kappa - 1.0).abs() < 1e-12, "{r:?}");
        assert!(r.max_relative_discrepancy <= 1e-12);
        assert!(r.max_relative_discrepancy_input_kappa <= 1e-12);
        assert!(r.membrane_only_max_discrepancy <= 1e-14);
        assert!(r.couple_modulus_residual.abs() <= f64::EPSILON * 0.15);

        let off = equivalence_audit(&CosseratParams { kappa: 0.5, ..cosserat() }, 200, 8).unwrap();
        assert!((off.fitted_kappa - 1.0).abs() < 1e-12);
        assert!(off.max_relative_discrepancy_input_kappa > 1e-3);

        let degenerate = equivalence_audit(&CosseratParams { mu_c: 0.0, ..cosserat() }, 200, 9).unwrap();
        assert_eq!(degenerate.warnings.len(), 1);
        assert!(equivalence_audit(&CosseratParams { p: 2.0, ..cosserat() }, 10, 1).is_err());
    }
}
