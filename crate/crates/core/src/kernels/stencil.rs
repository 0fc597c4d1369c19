//! Finite-difference gradients and Laplacians.
//!
//! Periodic axes wrap. On walled axes the first and last node use one-sided
//! second-order differences; the stable stencil falls back to central
//! differences on any node that touches a wall.

use serde::{Deserialize, Serialize};

use super::field::{Grid, ScalarField, TensorField, Topology, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stencil {
    /// Central differences, (1, -2, 1)/h² per axis.
    Cd,
    /// Least-squares quadratic-fit stable stencil.
    Ss,
}

struct Walker {
    shape: [usize; 3],
    stride: [usize; 3],
    walled: [bool; 3],
    dims: usize,
}

impl Walker {
    fn new(grid: &Grid) -> Self {
        let s = grid.shape();
        Walker {
            shape: s,
            stride: [1, s[0], s[0] * s[1]],
            walled: [0, 1, 2].map(|a| grid.topology(a) == Topology::Walled),
            dims: grid.dims(),
        }
    }

    #[inline]
    fn at(&self, k: usize, c: &[usize; 3], axis: usize, delta: i64) -> usize {
        let m = self.shape[axis] as i64;
        let p = (c[axis] as i64 + delta).rem_euclid(m) as usize;
        k - c[axis] * self.stride[axis] + p * self.stride[axis]
    }

    #[inline]
    fn at2(&self, k: usize, c: &[usize; 3], a: usize, da: i64, b: usize, db: i64) -> usize {
        let k1 = self.at(k, c, a, da);
        let mut c1 = *c;
        c1[a] = (c[a] as i64 + da).rem_euclid(self.shape[a] as i64) as usize;
        self.at(k1, &c1, b, db)
    }

    #[inline]
    fn boundary_side(&self, c: &[usize; 3], axis: usize) -> Option<i64> {
        if !self.walled[axis] {
            None
        } else if c[axis] == 0 {
            Some(1)
        } else if c[axis] + 1 == self.shape[axis] {
            Some(-1)
        } else {
            None
        }
    }

    fn on_wall(&self, c: &[usize; 3]) -> bool {
        (0..self.dims).any(|a| self.boundary_side(c, a).is_some())
    }

    /// ∂f/∂x_axis · h.
    #[inline]
    fn first(&self, f: &[f64], k: usize, c: &[usize; 3], axis: usize) -> f64 {
        match self.boundary_side(c, axis) {
            // inward direction s: (-3 f0 + 4 f1 - f2) / 2, sign flipped at the far wall
            Some(s) => {
                let f1 = f[self.at(k, c, axis, s)];
                let f2 = f[self.at(k, c, axis, 2 * s)];
                s as f64 * (-3.0 * f[k] + 4.0 * f1 - f2) / 2.0
            }
            None => (f[self.at(k, c, axis, 1)] - f[self.at(k, c, axis, -1)]) / 2.0,
        }
    }

    /// ∂²f/∂x_axis² · h².
    #[inline]
    fn second(&self, f: &[f64], k: usize, c: &[usize; 3], axis: usize) -> f64 {
        match self.boundary_side(c, axis) {
            Some(s) => {
                let f1 = f[self.at(k, c, axis, s)];
                let f2 = f[self.at(k, c, axis, 2 * s)];
                let f3 = f[self.at(k, c, axis, 3 * s)];
                2.0 * f[k] - 5.0 * f1 + 4.0 * f2 - f3
            }
            None => f[self.at(k, c, axis, 1)] - 2.0 * f[k] + f[self.at(k, c, axis, -1)],
        }
    }

    /// Stable-stencil Laplacian in the (a, b) plane, times h².
    #[inline]
    fn ss_plane(&self, f: &[f64], k: usize, c: &[usize; 3], a: usize, b: usize) -> f64 {
        let corners = f[self.at2(k, c, a, 1, b, 1)]
            + f[self.at2(k, c, a, 1, b, -1)]
            + f[self.at2(k, c, a, -1, b, 1)]
            + f[self.at2(k, c, a, -1, b, -1)];
        let edges = f[self.at(k, c, a, 1)]
            + f[self.at(k, c, a, -1)]
            + f[self.at(k, c, b, 1)]
            + f[self.at(k, c, b, -1)];
        (2.0 * corners - (edges + 4.0 * f[k])) / 3.0
    }

    fn for_each(&self, mut body: impl FnMut(usize, &[usize; 3])) {
        let mut k = 0;
        for z in 0..self.shape[2] {
            for y in 0..self.shape[1] {
                for x in 0..self.shape[0] {
                    body(k, &[x, y, z]);
                    k += 1;
                }
            }
        }
    }
}

pub fn gradient_scalar(field: &ScalarField) -> VectorField {
    let grid = *field.grid();
    let w = Walker::new(&grid);
    let f = field.values();
    let h = grid.dx();
    let mut out = VectorField::zeros(grid);
    for axis in 0..grid.dims() {
        let dst = out.component_mut(axis);
        w.for_each(|k, c| dst[k] = w.first(f, k, c, axis) / h);
    }
    out
}

/// Gradient tensor `∂u_i/∂x_j`.
pub fn gradient_vector(field: &VectorField) -> TensorField {
    let grid = *field.grid();
    let rows = (0..grid.dims())
        .map(|i| {
            let comp = ScalarField::new(grid, field.component(i).to_vec()).expect("same grid");
            gradient_scalar(&comp)
        })
        .collect();
    TensorField::from_rows(grid, rows)
}

pub fn laplacian_scalar(field: &ScalarField, stencil: Stencil) -> ScalarField {
    let grid = *field.grid();
    let mut out = ScalarField::constant(grid, 0.0);
    laplacian_into(&grid, field.values(), stencil, out.values_mut());
    out
}

pub fn laplacian_vector(field: &VectorField, stencil: Stencil) -> VectorField {
    let grid = *field.grid();
    let mut out = VectorField::zeros(grid);
    for d in 0..grid.dims() {
        laplacian_into(&grid, field.component(d), stencil, out.component_mut(d));
    }
    out
}

pub(crate) fn laplacian_into(grid: &Grid, f: &[f64], stencil: Stencil, out: &mut [f64]) {
    let w = Walker::new(grid);
    let inv_h2 = 1.0 / (grid.dx() * grid.dx());
    let dims = grid.dims();
    w.for_each(|k, c| {
        let v = if stencil == Stencil::Ss && !w.on_wall(c) {
            if dims == 2 {
                w.ss_plane(f, k, c, 0, 1)
            } else {
                // each second derivative appears in two of the three planes
                0.5 * (w.ss_plane(f, k, c, 0, 1)
                    + w.ss_plane(f, k, c, 1, 2)
                    + w.ss_plane(f, k, c, 0, 2))
            }
        } else {
            (0..dims).map(|a| w.second(f, k, c, a)).sum()
        };
        out[k] = v * inv_h2;
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn interior(grid: &Grid, c: [usize; 3]) -> bool {
        (0..grid.dims()).all(|a| c[a] > 0 && c[a] + 1 < grid.extent(a))
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        for shape in [vec![6, 5], vec![4, 5, 6]] {
            let g = Grid::walled(&shape).unwrap();
            let f = ScalarField::constant(g, 3.25);
            for st in [Stencil::Cd, Stencil::Ss] {
                assert!(laplacian_scalar(&f, st)
                    .values()
                    .iter()
                    .all(|v| v.abs() < 1e-13));
            }
            let gr = gradient_scalar(&f);
            assert!(gr.components().iter().flatten().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn gradient_exact_on_linear_fields() {
        let g = Grid::walled(&[7, 6]).unwrap();
        let f = ScalarField::from_fn(g, |c| 0.5 * c[0] as f64 - 2.0 * c[1] as f64 + 1.0);
        let gr = gradient_scalar(&f);
        assert!(gr.component(0).iter().all(|v| (v - 0.5).abs() < 1e-13));
        assert!(gr.component(1).iter().all(|v| (v + 2.0).abs() < 1e-13));
    }

    #[test]
    fn gradient_of_sine_is_second_order() {
        let mut errs = vec![];
        for m in [16usize, 32, 64] {
            let g = Grid::periodic(&[m, 4]).unwrap();
            let f = ScalarField::from_fn(g, |c| (2.0 * PI * c[0] as f64 / m as f64).sin());
            let gr = gradient_scalar(&f);
            let err = (0..g.node_count())
                .map(|k| {
                    let x = g.coords(k)[0] as f64;
                    let exact = 2.0 * PI / m as f64 * (2.0 * PI * x / m as f64).cos();
                    (gr.component(0)[k] - exact).abs() / (2.0 * PI / m as f64)
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        // relative error against the analytic amplitude 2π/M
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9, "observed order {order}");
        }
    }

    #[test]
    fn ss_exact_on_quadratics_2d() {
        let g = Grid::walled(&[8, 8]).unwrap();
        let x2 = ScalarField::from_fn(g, |c| (c[0] * c[0]) as f64);
        let r2 = ScalarField::from_fn(g, |c| (c[0] * c[0] + c[1] * c[1]) as f64);
        let lx = laplacian_scalar(&x2, Stencil::Ss);
        let lr = laplacian_scalar(&r2, Stencil::Ss);
        for k in 0..g.node_count() {
            if interior(&g, g.coords(k)) {
                assert_eq!(lx.values()[k], 2.0);
                assert_eq!(lr.values()[k], 4.0);
            }
        }
    }

    #[test]
    fn ss_exact_on_quadratics_3d() {
        let g = Grid::walled(&[6, 6, 6]).unwrap();
        let r2 = ScalarField::from_fn(g, |c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) as f64);
        let ss = laplacian_scalar(&r2, Stencil::Ss);
        let cd = laplacian_scalar(&r2, Stencil::Cd);
        for k in 0..g.node_count() {
            // CD with one-sided walls is exact everywhere on quadratics
            assert!((cd.values()[k] - 6.0).abs() < 1e-12);
            if interior(&g, g.coords(k)) {
                assert_eq!(ss.values()[k], 6.0);
            }
        }
    }

    #[test]
    fn both_stencils_second_order_on_sines() {
        for st in [Stencil::Cd, Stencil::Ss] {
            let mut errs = vec![];
            for m in [16usize, 32, 64] {
                let g = Grid::periodic(&[m, m]).unwrap();
                let kx = 2.0 * PI / m as f64;
                let f = ScalarField::from_fn(g, |c| {
                    (kx * c[0] as f64).sin() * (kx * c[1] as f64).cos()
                });
                let lap = laplacian_scalar(&f, st);
                let err = (0..g.node_count())
                    .map(|k| (lap.values()[k] / (kx * kx) + 2.0 * f.values()[k]).abs())
                    .fold(0.0, f64::max);
                errs.push(err);
            }
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.9, "{st:?} order {order}");
            }
        }
    }

    #[test]
    fn spacing_scales_laplacian() {
        let g = Grid::periodic(&[8, 8])
            .unwrap()
            .with_spacing(0.5, 1.0)
            .unwrap();
        let f = ScalarField::from_fn(g, |c| (c[0] % 2) as f64);
        let a = laplacian_scalar(&f, Stencil::Cd);
        let g1 = Grid::periodic(&[8, 8]).unwrap();
        let b = laplacian_scalar(
            &ScalarField::new(g1, f.values().to_vec()).unwrap(),
            Stencil::Cd,
        );
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(*x, 4.0 * y);
        }
    }
}
