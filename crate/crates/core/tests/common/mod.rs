//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's solvers; the oracles are plain
//! loops, dense linear algebra and derivative-free 1-D searches.

#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_array(rng: &mut ChaCha8Rng, shape: (usize, usize), scale: f64) -> Array2<f64> {
    Array2::from_shape_fn(shape, |_| rng.random_range(-scale..scale))
}

/// Solves `m·x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, pivot);
        b.swap(k, pivot);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (b[k] - tail) / m[k][k];
    }
    x
}

/// Dense cyclic first difference along a column of length `v`:
/// `(D s)_j = s_{j+1} − s_j`, with `s_v ≡ s_0`.
pub fn difference_matrix(v: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; v]; v];
    if v == 1 {
        return d;
    }
    for j in 0..v {
        d[j][j] -= 1.0;
        d[j][(j + 1) % v] += 1.0;
    }
    d
}

pub fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn transpose_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let n = m[0].len();
    (0..n).map(|i| m.iter().zip(x).map(|(row, xj)| row[i] * xj).sum()).collect()
}

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Per-entry H objective: `λ2|h| + g·(h − d) + μ1/2·(h − d)²`.
pub fn h_entry_objective(h: f64, d: f64, g: f64, lambda2: f64, mu1: f64) -> f64 {
    lambda2 * h.abs() + g * (h - d) + 0.5 * mu1 * (h - d) * (h - d)
}

/// Per-column W objective: `λ3‖w‖ + ⟨g, w − s⟩ + μ2/2‖w − s‖²`.
pub fn w_column_objective(w: &[f64], s: &[f64], g: &[f64], lambda3: f64, mu2: f64) -> f64 {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut acc = lambda3 * norm;
    for i in 0..w.len() {
        let e = w[i] - s[i];
        acc += g[i] * e + 0.5 * mu2 * e * e;
    }
    acc
}

/// Cyclic coordinate descent with golden-section line searches on the
/// W column objective, started from `s`; the zero column is also tried.
pub fn w_column_numeric(s: &[f64], g: &[f64], lambda3: f64, mu2: f64) -> Vec<f64> {
    let f = |w: &[f64]| w_column_objective(w, s, g, lambda3, mu2);
    let bound = s.iter().chain(g).map(|v| v.abs()).fold(1.0, f64::max) * (2.0 + 1.0 / mu2);
    let mut w = s.to_vec();
    for _ in 0..400 {
        let before = w.clone();
        for i in 0..w.len() {
            let mut trial = w.clone();
            w[i] = golden_section(
                |t| {
                    trial[i] = t;
                    f(&trial)
                },
                -bound,
                bound,
                1e-12,
            );
        }
        let moved = w.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if moved < 1e-13 {
            break;
        }
    }
    let zero = vec![0.0; s.len()];
    if f(&zero) <= f(&w) {
        zero
    } else {
        w
    }
}

/// Augmented Lagrangian of the offset sub-problem restricted to S, evaluated entry by entry.
pub struct OffsetProblem {
    pub residual: Array2<f64>,
    pub h: Array2<f64>,
    pub w: Array2<f64>,
    pub gamma1: Array2<f64>,
    pub gamma2: Array2<f64>,
    pub mu1: f64,
    pub mu2: f64,
}

impl OffsetProblem {
    pub fn random(rng: &mut ChaCha8Rng, v: usize, u: usize) -> Self {
        Self {
            residual: random_array(rng, (v, u), 1.0),
            h: random_array(rng, (v, u), 1.0),
            w: random_array(rng, (v, u), 1.0),
            gamma1: random_array(rng, (v, u), 1.0),
            gamma2: random_array(rng, (v, u), 1.0),
            mu1: rng.random_range(0.1..5.0),
            mu2: rng.random_range(0.1..5.0),
        }
    }

    pub fn value(&self, s: &Array2<f64>) -> f64 {
        let (v, u) = s.dim();
        let mut acc = 0.0;
        for i in 0..u {
            for j in 0..v {
                let next = if v == 1 { s[[j, i]] } else { s[[(j + 1) % v, i]] };
                let grad = next - s[[j, i]];
                let e = s[[j, i]] + self.residual[[j, i]];
                let dh = self.h[[j, i]] - grad;
                let dw = self.w[[j, i]] - s[[j, i]];
                acc += 0.5 * e * e
                    + self.gamma1[[j, i]] * dh
                    + 0.5 * self.mu1 * dh * dh
                    + self.gamma2[[j, i]] * dw
                    + 0.5 * self.mu2 * dw * dw;
            }
        }
        acc
    }

    /// Minimizer from the dense normal equations, one column at a time.
    pub fn dense_minimizer(&self) -> Array2<f64> {
        let (v, u) = self.residual.dim();
        let d = difference_matrix(v);
        let mut m = vec![vec![0.0; v]; v];
        for a in 0..v {
            for b in 0..v {
                let dtd: f64 = (0..v).map(|k| d[k][a] * d[k][b]).sum();
                m[a][b] = self.mu1 * dtd + if a == b { 1.0 + self.mu2 } else { 0.0 };
            }
        }
        let mut out = Array2::zeros((v, u));
        for i in 0..u {
            let inner: Vec<f64> = (0..v).map(|j| self.gamma1[[j, i]] + self.mu1 * self.h[[j, i]]).collect();
            let dt = transpose_vec(&d, &inner);
            let b: Vec<f64> = (0..v)
                .map(|j| dt[j] - self.residual[[j, i]] + self.gamma2[[j, i]] + self.mu2 * self.w[[j, i]])
                .collect();
            for (j, val) in dense_solve(m.clone(), b).into_iter().enumerate() {
                out[[j, i]] = val;
            }
        }
        out
    }
}

/// Joseph weight of pixel `(row, col)` on the ray from `src` to `det`,
/// computed from the tent kernel along the minor axis.
pub fn tent_weight(src: (f64, f64), det: (f64, f64), row: usize, col: usize, n: usize, pitch: f64) -> f64 {
    let c = (n as f64 - 1.0) / 2.0;
    let px = (col as f64 - c) * pitch;
    let py = (c - row as f64) * pitch;
    let (dx, dy) = (det.0 - src.0, det.1 - src.1);
    let len = (dx * dx + dy * dy).sqrt();
    if dx.abs() >= dy.abs() {
        let y = src.1 + (px - src.0) * dy / dx;
        let dist = (y - py).abs() / pitch;
        (1.0 - dist).max(0.0) * pitch * len / dx.abs()
    } else {
        let x = src.0 + (py - src.1) * dx / dy;
        let dist = (x - px).abs() / pitch;
        (1.0 - dist).max(0.0) * pitch * len / dy.abs()
    }
}
