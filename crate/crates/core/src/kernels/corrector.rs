use serde::{Deserialize, Serialize};

use super::field::{Grid, MacroState, ScalarField, VectorField, LATTICE_CS2};
use super::stencil::{laplacian_into, Stencil};
use crate::error::{Error, Result};

/// Vertical axis for buoyancy (y).
pub const VERTICAL_AXIS: usize = 1;

/// Viscosity (and diffusivity) built into a τ = 1 predictor: `cs2 dx² / (2 dt)`.
pub fn intrinsic_viscosity(grid: &Grid) -> f64 {
    0.5 * LATTICE_CS2 * grid.dx() * grid.dx() / grid.dt()
}

/// Boussinesq buoyancy `rho g_beta (T - T_m)` along +y: fluid hotter than `t_mean` rises.
pub fn buoyancy(
    t: &ScalarField,
    rho: &ScalarField,
    g_beta: f64,
    t_mean: f64,
) -> Result<VectorField> {
    t.grid().check_same(rho.grid())?;
    let mut f = VectorField::zeros(*t.grid());
    for ((out, &tv), &r) in f
        .component_mut(VERTICAL_AXIS)
        .iter_mut()
        .zip(t.values())
        .zip(rho.values())
    {
        *out = r * g_beta * (tv - t_mean);
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorParams {
    pub nu: f64,
    pub kappa: f64,
    pub stencil: Stencil,
}

/// Forward-Euler corrector:
///
/// ```text
/// rho'     = rho_bar
/// rho' u'  = rho_bar u_bar + dt (nu - nu*) ∇²u^n + dt F^n
/// T'       = T_bar + dt (kappa - kappa*) ∇²T^n
/// ```
///
/// The Laplacians act on the previous-step state `prev`.
pub fn corrector_update(
    predicted: &MacroState,
    prev: &MacroState,
    params: &CorrectorParams,
    force: Option<&VectorField>,
) -> Result<MacroState> {
    let grid = *predicted.grid();
    grid.check_same(prev.grid())?;
    if let Some((node, &value)) = predicted
        .rho
        .values()
        .iter()
        .enumerate()
        .find(|(_, &r)| !(r > 0.0))
    {
        return Err(Error::NonPositiveDensity { node, value });
    }
    let dt = grid.dt();
    let star = intrinsic_viscosity(&grid);
    let visc = dt * (params.nu - star);
    let diff = dt * (params.kappa - star);
    let rho = predicted.rho.values();
    let n = grid.node_count();
    let mut out = predicted.clone();
    let mut lap = vec![0.0; n];
    for d in 0..grid.dims() {
        if visc != 0.0 {
            laplacian_into(&grid, prev.u.component(d), params.stencil, &mut lap);
        } else {
            lap.iter_mut().for_each(|v| *v = 0.0);
        }
        let force_d = force.map(|f| f.component(d));
        let ubar = predicted.u.component(d);
        let dst = out.u.component_mut(d);
        for k in 0..n {
            let mut m = rho[k] * ubar[k] + visc * lap[k];
            if let Some(fd) = force_d {
                m += dt * fd[k];
            }
            dst[k] = m / rho[k];
        }
    }
    if let (Some(t_out), Some(t_prev)) = (out.temperature.as_mut(), prev.temperature.as_ref()) {
        if diff != 0.0 {
            laplacian_into(&grid, t_prev.values(), params.stencil, &mut lap);
            for (t, l) in t_out.values_mut().iter_mut().zip(&lap) {
                *t += diff * l;
            }
        }
    }
    Ok(out)
}

/// Explicit body-force update `rho u += dt F` without any diffusion correction.
pub fn apply_force(state: &mut MacroState, force: &VectorField) -> Result<()> {
    let grid = *state.grid();
    grid.check_same(force.grid())?;
    let dt = grid.dt();
    for d in 0..grid.dims() {
        let rho = state.rho.values().to_vec();
        for ((u, f), r) in state
            .u
            .component_mut(d)
            .iter_mut()
            .zip(force.component(d))
            .zip(&rho)
        {
            *u += dt * f / r;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Topology;

    fn sample(grid: Grid) -> MacroState {
        let rho = ScalarField::from_fn(grid, |c| 1.0 + 0.01 * ((c[0] * 7 + c[1] * 3) % 5) as f64);
        let u = VectorField::from_fn(grid, |c| {
            [0.01 * (c[1] as f64).sin(), 0.02 * (c[0] as f64).cos(), 0.0]
        });
        let t = ScalarField::from_fn(grid, |c| 1.0 + 0.1 * (c[0] as f64 * 0.3).sin());
        MacroState::new(rho, u, Some(t)).unwrap()
    }

    #[test]
    fn identity_when_transport_matches_predictor() {
        let g = Grid::periodic(&[8, 8]).unwrap();
        let bar = sample(g);
        let prev = {
            let mut p = sample(g);
            p.u.component_mut(0).iter_mut().for_each(|v| *v *= -3.0);
            p
        };
        assert_eq!(intrinsic_viscosity(&g), 1.0 / 6.0);
        let params = CorrectorParams {
            nu: 1.0 / 6.0,
            kappa: 1.0 / 6.0,
            stencil: Stencil::Cd,
        };
        let out = corrector_update(&bar, &prev, &params, None).unwrap();
        assert_eq!(out.rho, bar.rho);
        assert_eq!(out.temperature, bar.temperature);
        for d in 0..2 {
            for (a, b) in out.u.component(d).iter().zip(bar.u.component(d)) {
                assert!((a - b).abs() <= 1e-17);
            }
        }
    }

    #[test]
    fn uniform_previous_state_leaves_only_force() {
        let g = Grid::periodic(&[8, 8]).unwrap();
        let bar = sample(g);
        let prev = MacroState::at_rest(g, Some(1.5));
        let t = bar.temperature.clone().unwrap();
        let force = buoyancy(&t, &bar.rho, 1e-3, 1.5).unwrap();
        let params = CorrectorParams {
            nu: 0.01,
            kappa: 0.02,
            stencil: Stencil::Ss,
        };
        let out = corrector_update(&bar, &prev, &params, Some(&force)).unwrap();
        for k in 0..g.node_count() {
            let r = bar.rho.values()[k];
            let expect = (r * bar.u.component(1)[k] + force.component(1)[k]) / r;
            assert!((out.u.component(1)[k] - expect).abs() < 1e-16);
        }
        assert_eq!(out.temperature, bar.temperature);
    }

    #[test]
    fn anti_diffusion_on_quadratic_profile() {
        // u^n = x² has Laplacian 2, so (nu - nu*) = -0.1 removes 0.2 of momentum
        let g = Grid::new(&[8, 8], &[Topology::Walled, Topology::Periodic]).unwrap();
        let prev = MacroState::new(
            ScalarField::constant(g, 1.0),
            VectorField::from_fn(g, |c| [(c[0] * c[0]) as f64, 0.0, 0.0]),
            None,
        )
        .unwrap();
        let bar = MacroState::new(
            ScalarField::constant(g, 1.3),
            VectorField::from_fn(g, |_| [0.05, 0.0, 0.0]),
            None,
        )
        .unwrap();
        let params = CorrectorParams {
            nu: 1.0 / 6.0 - 0.1,
            kappa: 1.0 / 6.0,
            stencil: Stencil::Cd,
        };
        let out = corrector_update(&bar, &prev, &params, None).unwrap();
        for k in 0..g.node_count() {
            let momentum = 1.3 * out.u.component(0)[k];
            assert!((momentum - (1.3 * 0.05 - 0.2)).abs() < 1e-13);
        }
    }

    #[test]
    fn buoyancy_points_up_for_hot_fluid() {
        let g = Grid::periodic(&[4, 4]).unwrap();
        let t = ScalarField::constant(g, 2.0);
        let rho = ScalarField::constant(g, 1.0);
        let f = buoyancy(&t, &rho, 1e-5, 1.5).unwrap();
        assert!(f.component(1).iter().all(|&v| (v - 5e-6).abs() < 1e-20));
        assert!(f.component(0).iter().all(|&v| v == 0.0));
        let f2 = buoyancy(&t, &ScalarField::constant(g, 2.0), 1e-5, 1.5).unwrap();
        assert!(f2
            .component(1)
            .iter()
            .zip(f.component(1))
            .all(|(a, b)| *a == 2.0 * b));
        let f0 = buoyancy(&ScalarField::constant(g, 1.5), &rho, 1e-5, 1.5).unwrap();
        assert!(f0.component(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_non_positive_density() {
        let g = Grid::periodic(&[4, 4]).unwrap();
        let mut bar = MacroState::at_rest(g, None);
        bar.rho.values_mut()[2] = 0.0;
        let prev = MacroState::at_rest(g, None);
        let params = CorrectorParams {
            nu: 0.1,
            kappa: 0.1,
            stencil: Stencil::Cd,
        };
        assert!(matches!(
            corrector_update(&bar, &prev, &params, None),
            Err(Error::NonPositiveDensity { node: 2, .. })
        ));
    }
}
