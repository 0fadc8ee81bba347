#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotbec::grid::{BoxDomain, ComplexField, GridSpec};
use rotbec::state::CoupledState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn square_grid(n: usize, lo: f64, hi: f64) -> GridSpec {
    GridSpec::new(BoxDomain::square(lo, hi).unwrap(), &[n, n]).unwrap()
}

/// Independent random values at interior nodes, zero on the boundary.
pub fn random_field(grid: &GridSpec, rng: &mut ChaCha8Rng) -> ComplexField {
    let mut f = ComplexField::zeros(grid);
    let shape = grid.node_shape();
    for i in 0..shape[0] {
        for j in 0..shape[1] {
            for k in 0..shape[2] {
                if !grid.is_boundary([i, j, k]) {
                    f.values_mut()[[i, j, k]] =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
    }
    f
}

pub fn random_state(grid: &GridSpec, components: usize, rng: &mut ChaCha8Rng) -> CoupledState {
    let fields = (0..components).map(|_| random_field(grid, rng)).collect();
    CoupledState::new(fields, 0.0).unwrap()
}

/// Interior values of all components stacked into one vector, row-major
/// within each component.
pub fn interior_vector(state: &CoupledState) -> DVector<Complex64> {
    let grid = state.grid();
    let mut out = Vec::new();
    for c in state.components() {
        for ((i, j, k), v) in c.values().indexed_iter() {
            if !grid.is_boundary([i, j, k]) {
                out.push(*v);
            }
        }
    }
    DVector::from_vec(out)
}

/// Type-I sine coefficients by direct double summation.
pub fn brute_force_dst(f: &ComplexField) -> ndarray::Array3<Complex64> {
    let grid = f.grid();
    let (nj, nk) = (grid.cells(0), grid.cells(1));
    let mut out = ndarray::Array3::zeros(grid.node_shape());
    for p in 1..nj {
        for q in 1..nk {
            let mut sum = Complex64::new(0.0, 0.0);
            for s in 1..nj {
                for r in 1..nk {
                    let w = (p as f64 * s as f64 * PI / nj as f64).sin()
                        * (q as f64 * r as f64 * PI / nk as f64).sin();
                    sum += f.values()[[s, r, 0]] * w;
                }
            }
            out[[p, q, 0]] = sum * (4.0 / (nj * nk) as f64);
        }
    }
    out
}

/// Composite 5-point Gauss-Legendre rule.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            X.iter()
                .zip(W.iter())
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

pub fn max_abs_complex(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

pub fn max_diff(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}
