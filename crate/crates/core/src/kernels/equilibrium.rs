//! Equilibrium distributions, moments and the τ = 1 collide-stream kernel.

use serde::{Deserialize, Serialize};

use super::field::{DistributionSet, MacroState, ScalarField, TensorField, VectorField};
use super::stencil::{gradient_scalar, gradient_vector};
use crate::error::{Error, Result};
use crate::lattice::LatticeModel;

/// Which distribution is being built: density (`f`) or temperature (`h`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Flow,
    Thermal,
}

/// Equilibrium family used by the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdfKind {
    Standard,
    /// Lattice kinetic scheme with viscosity constant `a` and diffusivity constant `b`.
    Lks {
        a: f64,
        b: f64,
    },
}

#[inline]
fn dot(e: [i32; 3], u: [f64; 3]) -> f64 {
    e[0] as f64 * u[0] + e[1] as f64 * u[1] + e[2] as f64 * u[2]
}

/// Second-order polynomial in `u` shared by both equilibria.
#[inline]
pub(crate) fn velocity_bracket(e: [i32; 3], u: [f64; 3], cs2: f64) -> f64 {
    let eu = dot(e, u);
    let uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    1.0 + eu / cs2 + eu * eu / (2.0 * cs2 * cs2) - uu / (2.0 * cs2)
}

fn scale_field(macro_state: &MacroState, field: FieldKind) -> Result<&ScalarField> {
    match field {
        FieldKind::Flow => Ok(&macro_state.rho),
        FieldKind::Thermal => macro_state.temperature.as_ref().ok_or_else(|| {
            Error::InvalidParameter("thermal equilibrium requested without temperature".into())
        }),
    }
}

fn check_finite(macro_state: &MacroState) -> Result<()> {
    if !macro_state.is_finite() {
        return Err(Error::NonFinite("macroscopic state"));
    }
    Ok(())
}

/// Standard second-order equilibrium; the thermal variant scales by `T` instead of `rho`.
pub fn equilibrium(
    macro_state: &MacroState,
    model: &LatticeModel,
    field: FieldKind,
) -> Result<DistributionSet> {
    check_finite(macro_state)?;
    let grid = *macro_state.grid();
    let scale = scale_field(macro_state, field)?.values();
    let n = grid.node_count();
    let cs2 = model.cs2();
    let mut out = DistributionSet::zeros(grid, model.q());
    for (alpha, (&e, &w)) in model.velocities().iter().zip(model.weights()).enumerate() {
        let dst = out.direction_mut(alpha);
        for k in 0..n {
            dst[k] = w * scale[k] * velocity_bracket(e, macro_state.u.at(k), cs2);
        }
    }
    Ok(out)
}

/// Gradient-corrected equilibria of the lattice kinetic scheme.
///
/// Flow adds `A dt eᵀ(∇u + ∇uᵀ)e` inside the bracket; thermal adds
/// `w B dt (e · ∇T)` outside it. `grad_t` is required for the thermal field.
pub fn lks_equilibrium(
    macro_state: &MacroState,
    grad_u: &TensorField,
    grad_t: Option<&VectorField>,
    a: f64,
    b: f64,
    model: &LatticeModel,
    field: FieldKind,
) -> Result<DistributionSet> {
    check_finite(macro_state)?;
    if !grad_u.is_finite() || grad_t.is_some_and(|g| !g.is_finite()) {
        return Err(Error::NonFinite("LKS gradient"));
    }
    let grid = *macro_state.grid();
    grid.check_same(grad_u.grid())?;
    let dims = grid.dims();
    let dt = grid.dt();
    let cs2 = model.cs2();
    let n = grid.node_count();
    let scale = scale_field(macro_state, field)?.values();
    let mut out = DistributionSet::zeros(grid, model.q());
    match field {
        FieldKind::Flow => {
            for (alpha, (&e, &w)) in model.velocities().iter().zip(model.weights()).enumerate() {
                let dst = out.direction_mut(alpha);
                for k in 0..n {
                    let mut quad = 0.0;
                    for i in 0..dims {
                        for j in 0..dims {
                            quad += (e[i] * e[j]) as f64 * grad_u.component(i, j)[k];
                        }
                    }
                    let bracket =
                        velocity_bracket(e, macro_state.u.at(k), cs2) + a * dt * 2.0 * quad;
                    dst[k] = w * scale[k] * bracket;
                }
            }
        }
        FieldKind::Thermal => {
            let grad_t = grad_t.ok_or_else(|| {
                Error::InvalidParameter(
                    "thermal LKS equilibrium needs a temperature gradient".into(),
                )
            })?;
            grid.check_same(grad_t.grid())?;
            for (alpha, (&e, &w)) in model.velocities().iter().zip(model.weights()).enumerate() {
                let dst = out.direction_mut(alpha);
                for k in 0..n {
                    let e_grad: f64 = (0..dims)
                        .map(|d| e[d] as f64 * grad_t.component(d)[k])
                        .sum();
                    dst[k] = w * scale[k] * velocity_bracket(e, macro_state.u.at(k), cs2)
                        + w * b * dt * e_grad;
                }
            }
        }
    }
    Ok(out)
}

/// LKS constants `(A, B)` giving viscosity `nu` and diffusivity `kappa`.
pub fn lks_constants(nu: f64, kappa: f64, dt: f64, cs2: f64) -> Result<(f64, f64)> {
    if !(nu > 0.0 && kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "LKS needs positive nu and kappa, got {nu}, {kappa}"
        )));
    }
    let a = (0.5 - nu / (cs2 * dt)) / (2.0 * cs2);
    let b = 0.5 - kappa / (cs2 * dt);
    Ok((a, b))
}

/// Forward map of [`lks_constants`]: the viscosity and diffusivity an `(A, B)` pair produces.
pub fn lks_transport(a: f64, b: f64, dt: f64, cs2: f64) -> (f64, f64) {
    ((0.5 - 2.0 * a * cs2) * cs2 * dt, (0.5 - b) * cs2 * dt)
}

/// Density and momentum `(sum f, sum e f)`, node-wise.
pub fn moments(f: &DistributionSet, model: &LatticeModel) -> (ScalarField, VectorField) {
    let grid = *f.grid();
    let n = grid.node_count();
    let dims = grid.dims();
    let mut rho = vec![0.0; n];
    let mut mom = VectorField::zeros(grid);
    for (alpha, e) in model.velocities().iter().enumerate() {
        let fa = f.direction(alpha);
        for (r, v) in rho.iter_mut().zip(fa) {
            *r += v;
        }
        for d in 0..dims {
            if e[d] == 0 {
                continue;
            }
            let s = e[d] as f64;
            for (m, v) in mom.component_mut(d).iter_mut().zip(fa) {
                *m += s * v;
            }
        }
    }
    (ScalarField::new(grid, rho).expect("sized from grid"), mom)
}

/// Periodic streaming: `out_alpha(x) = in_alpha(x - e_alpha)`.
pub fn stream(f: &DistributionSet, model: &LatticeModel) -> DistributionSet {
    let grid = *f.grid();
    let [mx, my, mz] = grid.shape();
    let mut out = DistributionSet::zeros(grid, f.q());
    for (alpha, e) in model.velocities().iter().enumerate() {
        let src = f.direction(alpha);
        let dst = out.direction_mut(alpha);
        let wrap = |c: usize, d: i32, m: usize| (c as i64 - d as i64).rem_euclid(m as i64) as usize;
        for z in 0..mz {
            let sz = wrap(z, e[2], mz);
            for y in 0..my {
                let sy = wrap(y, e[1], my);
                let row = mx * (y + my * z);
                let srow = mx * (sy + my * sz);
                for x in 0..mx {
                    dst[row + x] = src[srow + wrap(x, e[0], mx)];
                }
            }
        }
    }
    out
}

/// τ = 1 collision (projection onto equilibrium) followed by streaming.
///
/// Streaming always wraps periodically; walled cases overwrite wall nodes
/// afterwards at the macroscopic level.
pub fn collide_stream(
    macro_state: &MacroState,
    model: &LatticeModel,
    field: FieldKind,
    edf: EdfKind,
) -> Result<DistributionSet> {
    let eq = match edf {
        EdfKind::Standard => equilibrium(macro_state, model, field)?,
        EdfKind::Lks { a, b } => {
            let grad_u = gradient_vector(&macro_state.u);
            let grad_t = match (field, &macro_state.temperature) {
                (FieldKind::Thermal, Some(t)) => Some(gradient_scalar(t)),
                _ => None,
            };
            lks_equilibrium(macro_state, &grad_u, grad_t.as_ref(), a, b, model, field)?
        }
    };
    Ok(stream(&eq, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::field::Grid;

    fn random_state(grid: Grid, seed: u64, thermal: bool) -> MacroState {
        // Small deterministic LCG so the unit tests stay dependency-free.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = grid.node_count();
        let rho = (0..n).map(|_| 0.9 + 0.2 * next()).collect();
        let comps = (0..grid.dims())
            .map(|_| (0..n).map(|_| 0.1 * (2.0 * next() - 1.0)).collect())
            .collect();
        let t = thermal
            .then(|| ScalarField::new(grid, (0..n).map(|_| 1.0 + next()).collect()).unwrap());
        MacroState::new(
            ScalarField::new(grid, rho).unwrap(),
            VectorField::new(grid, comps).unwrap(),
            t,
        )
        .unwrap()
    }

    #[test]
    fn rest_state_gives_weights() {
        let m = LatticeModel::d2q9();
        let g = Grid::periodic(&[4, 4]).unwrap();
        let f = equilibrium(&MacroState::at_rest(g, None), &m, FieldKind::Flow).unwrap();
        for a in 0..9 {
            assert!(f.direction(a).iter().all(|&v| v == m.weight(a)));
        }
    }

    #[test]
    fn rest_weight_at_small_velocity() {
        // f0 = (4/9)(1 - u^2/(2 cs2)) with u = 0.1 -> (4/9)(1 - 0.015)
        let m = LatticeModel::d2q9();
        let g = Grid::periodic(&[4, 4]).unwrap();
        let mut s = MacroState::at_rest(g, None);
        s.u.component_mut(0).iter_mut().for_each(|v| *v = 0.1);
        let f = equilibrium(&s, &m, FieldKind::Flow).unwrap();
        let expected = 4.0 / 9.0 * (1.0 - 0.01 / (2.0 / 3.0));
        assert!((f.get(0, 5) - expected).abs() < 1e-16);
        assert!((expected - 0.437_777_777_777_777_8).abs() < 1e-15);
    }

    #[test]
    fn moments_recover_macro_state() {
        for (model, shape) in [
            (LatticeModel::d2q9(), vec![8, 8]),
            (LatticeModel::d3q27(), vec![4, 4, 4]),
        ] {
            let g = Grid::periodic(&shape).unwrap();
            let s = random_state(g, 7, true);
            let f = equilibrium(&s, &model, FieldKind::Flow).unwrap();
            let (rho, mom) = moments(&f, &model);
            for k in 0..g.node_count() {
                assert!((rho.values()[k] - s.rho.values()[k]).abs() < 1e-13);
                for d in 0..g.dims() {
                    let expect = s.rho.values()[k] * s.u.component(d)[k];
                    assert!((mom.component(d)[k] - expect).abs() < 1e-13);
                }
            }
            let h = equilibrium(&s, &model, FieldKind::Thermal).unwrap();
            let (t, _) = moments(&h, &model);
            let t_in = s.temperature.as_ref().unwrap().values();
            assert!(t
                .values()
                .iter()
                .zip(t_in)
                .all(|(a, b)| (a - b).abs() < 1e-13));
        }
    }

    #[test]
    fn moments_match_naive_summation() {
        let m = LatticeModel::d2q9();
        let g = Grid::periodic(&[4, 4]).unwrap();
        let vals: Vec<f64> = (0..9 * 16)
            .map(|i| 0.01 + ((i * 37) % 101) as f64 / 101.0)
            .collect();
        let f = DistributionSet::new(g, 9, vals.clone()).unwrap();
        let (rho, mom) = moments(&f, &m);
        for y in 0..4 {
            for x in 0..4 {
                let k = x + 4 * y;
                let mut r = 0.0;
                let mut mx = 0.0;
                let mut my = 0.0;
                for a in 0..9 {
                    let v = vals[a * 16 + k];
                    r += v;
                    mx += m.velocity(a)[0] as f64 * v;
                    my += m.velocity(a)[1] as f64 * v;
                }
                assert!((rho.values()[k] - r).abs() < 1e-15);
                assert!((mom.component(0)[k] - mx).abs() < 1e-15);
                assert!((mom.component(1)[k] - my).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn uniform_state_is_fixed_by_collide_stream() {
        let m = LatticeModel::d2q9();
        let g = Grid::periodic(&[8, 8]).unwrap();
        let mut s = MacroState::at_rest(g, None);
        s.u.component_mut(0).iter_mut().for_each(|v| *v = 0.05);
        let eq = equilibrium(&s, &m, FieldKind::Flow).unwrap();
        let out = collide_stream(&s, &m, FieldKind::Flow, EdfKind::Standard).unwrap();
        assert_eq!(eq, out);
    }

    #[test]
    fn perturbation_moves_along_each_velocity() {
        let m = LatticeModel::d2q9();
        let g = Grid::periodic(&[8, 8]).unwrap();
        let mut s = MacroState::at_rest(g, None);
        let src = g.index(3, 4, 0);
        s.rho.values_mut()[src] = 2.0;
        let out = collide_stream(&s, &m, FieldKind::Flow, EdfKind::Standard).unwrap();
        for a in 0..9 {
            let dst = g.shift_periodic(src, m.velocity(a));
            assert_eq!(out.get(a, dst), 2.0 * m.weight(a));
        }
    }

    #[test]
    fn periodic_collide_stream_conserves_mass() {
        let m = LatticeModel::d3q27();
        let g = Grid::periodic(&[4, 8, 4]).unwrap();
        let mut s = random_state(g, 3, false);
        let total: f64 = s.rho.values().iter().sum();
        for _ in 0..5 {
            let f = collide_stream(&s, &m, FieldKind::Flow, EdfKind::Standard).unwrap();
            let (rho, mom) = moments(&f, &m);
            let mut u = mom;
            for d in 0..3 {
                for (v, r) in u.component_mut(d).iter_mut().zip(rho.values()) {
                    *v /= r;
                }
            }
            s = MacroState::new(rho, u, None).unwrap();
            let now: f64 = s.rho.values().iter().sum();
            assert!(((now - total) / total).abs() < 1e-12);
        }
    }

    #[test]
    fn lks_reduces_to_standard() {
        let m = LatticeModel::d2q9();
        let g = Grid::periodic(&[8, 8]).unwrap();
        let s = random_state(g, 11, true);
        let gu = gradient_vector(&s.u);
        let gt = gradient_scalar(s.temperature.as_ref().unwrap());
        for field in [FieldKind::Flow, FieldKind::Thermal] {
            let std = equilibrium(&s, &m, field).unwrap();
            let lks = lks_equilibrium(&s, &gu, Some(&gt), 0.0, 0.0, &m, field).unwrap();
            assert_eq!(std, lks);
        }
        // uniform fields have zero gradients, so any A, B leave the EDF untouched
        let mut uni = MacroState::at_rest(g, Some(1.5));
        uni.u.component_mut(1).iter_mut().for_each(|v| *v = 0.02);
        let gu = gradient_vector(&uni.u);
        let gt = gradient_scalar(uni.temperature.as_ref().unwrap());
        for field in [FieldKind::Flow, FieldKind::Thermal] {
            let std = equilibrium(&uni, &m, field).unwrap();
            let lks = lks_equilibrium(&uni, &gu, Some(&gt), 0.7, -0.3, &m, field).unwrap();
            assert_eq!(std, lks);
        }
    }

    #[test]
    fn lks_shear_correction() {
        // u = (gamma y, 0): e^T (grad u + grad u^T) e = 2 gamma ex ey
        let gamma = 1e-3;
        let m = LatticeModel::d2q9();
        let g = Grid::new(
            &[8, 8],
            &[
                super::super::Topology::Periodic,
                super::super::Topology::Walled,
            ],
        )
        .unwrap();
        let u = VectorField::from_fn(g, |c| [gamma * c[1] as f64, 0.0, 0.0]);
        let s = MacroState::new(ScalarField::constant(g, 1.0), u, None).unwrap();
        let gu = gradient_vector(&s.u);
        // finite-difference oracle on the linear field: du/dy = gamma everywhere
        assert!(gu.component(0, 1).iter().all(|v| (v - gamma).abs() < 1e-15));
        let a = 0.4;
        let std = equilibrium(&s, &m, FieldKind::Flow).unwrap();
        let lks = lks_equilibrium(&s, &gu, None, a, 0.0, &m, FieldKind::Flow).unwrap();
        let k = g.index(2, 3, 0);
        assert_eq!(lks.get(0, k), std.get(0, k));
        assert!((lks.get(1, k) - std.get(1, k)).abs() < 1e-18);
        let expect = m.weight(5) * a * 2.0 * gamma;
        assert!((lks.get(5, k) - std.get(5, k) - expect).abs() < 1e-17);
    }

    #[test]
    fn lks_constants_values_and_roundtrip() {
        let cs2 = 1.0 / 3.0;
        let (a, b) = lks_constants(cs2 / 2.0, cs2 / 2.0, 1.0, cs2).unwrap();
        assert!(a.abs() < 1e-16 && b.abs() < 1e-16);
        let (a, _) = lks_constants(0.0064, 0.01, 1.0, cs2).unwrap();
        assert!((a - 0.7212).abs() < 1e-14);
        for &(nu, kappa) in &[(0.0064, 0.009), (0.3, 0.02), (1e-4, 0.5)] {
            let (a, b) = lks_constants(nu, kappa, 1.0, cs2).unwrap();
            let (n2, k2) = lks_transport(a, b, 1.0, cs2);
            assert!((n2 - nu).abs() < 1e-14 && (k2 - kappa).abs() < 1e-14);
        }
        assert!(lks_constants(0.0, 0.1, 1.0, cs2).is_err());
    }

    #[test]
    fn rejects_non_finite_input() {
        let m = LatticeModel::d2q9();
        let g = Grid::periodic(&[4, 4]).unwrap();
        let mut s = MacroState::at_rest(g, None);
        s.rho.values_mut()[0] = f64::INFINITY;
        assert!(equilibrium(&s, &m, FieldKind::Flow).is_err());
        let s = MacroState::at_rest(g, None);
        assert!(equilibrium(&s, &m, FieldKind::Thermal).is_err());
    }
}
