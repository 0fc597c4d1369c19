#![allow(dead_code)]

use qfslbm::{Grid, MacroState, ScalarField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth-ish random state with rho in [0.9, 1.1], |u| <= u_max, T in [1, 2].
pub fn random_state(grid: Grid, u_max: f64, thermal: bool, rng: &mut impl Rng) -> MacroState {
    let n = grid.node_count();
    let dims = grid.dims();
    let rho: Vec<f64> = (0..n).map(|_| rng.gen_range(0.9..1.1)).collect();
    let mut comps = vec![vec![0.0; n]; dims];
    for k in 0..n {
        loop {
            let v: Vec<f64> = (0..dims).map(|_| rng.gen_range(-u_max..u_max)).collect();
            if v.iter().map(|x| x * x).sum::<f64>() <= u_max * u_max {
                for d in 0..dims {
                    comps[d][k] = v[d];
                }
                break;
            }
        }
    }
    let t = thermal.then(|| {
        ScalarField::new(grid, (0..n).map(|_| rng.gen_range(1.0..2.0)).collect()).unwrap()
    });
    MacroState::new(
        ScalarField::new(grid, rho).unwrap(),
        VectorField::new(grid, comps).unwrap(),
        t,
    )
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
