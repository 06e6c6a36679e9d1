//! Shared test support: an independent dense oracle for the split scheme.
#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use rand::Rng;
use sobolev_split::grid::{Field, Grid2D};
use sobolev_split::problems::{Coefficients, ProblemSpec};
use sobolev_split::stencil::Axis;

pub type Mat = Vec<Vec<f64>>;

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Mat, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

fn zeros(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

/// Linear split problem `f_m = c_m u + d_m u_z + q_m(x, y, t)` with boundary
/// and reference data `b`.
#[derive(Clone)]
pub struct LinearCase {
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: [f64; 2],
    pub d: [f64; 2],
    pub q: [[f64; 4]; 2],
    pub b: [f64; 4],
}

impl LinearCase {
    pub fn random(rng: &mut impl Rng, m: usize) -> Self {
        let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
        LinearCase {
            m,
            alpha: 1.0 - r(0.0, 1.0),
            beta: r(0.0, 1.0),
            gamma: r(0.0, 1.0),
            c: [r(-1.0, 1.0), r(-1.0, 1.0)],
            d: [r(-0.5, 0.5), r(-0.5, 0.5)],
            q: [
                [r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0)],
                [r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0)],
            ],
            b: [r(0.5, 1.5), r(0.5, 2.0), r(0.5, 2.0), r(0.5, 2.0)],
        }
    }

    pub fn q(&self, m: usize, x: f64, y: f64, t: f64) -> f64 {
        let q = self.q[m];
        q[0] + q[1] * x * y + q[2] * (x - y).sin() * t + q[3] * t * t
    }

    pub fn boundary(&self, x: f64, y: f64, t: f64) -> f64 {
        let b = self.b;
        b[0] * (b[1] * x + b[2] * y + b[3] * t).sin() + x * y * t
    }

    pub fn grid(&self) -> Grid2D<f64> {
        Grid2D::unit_square(self.m).unwrap()
    }

    pub fn problem(&self) -> ProblemSpec<f64> {
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        let (d, e) = (self.clone(), self.clone());
        ProblemSpec {
            name: "linear".into(),
            coeffs: Coefficients {
                alpha: self.alpha,
                beta: self.beta,
                gamma: self.gamma,
            },
            f1: Arc::new(move |x, y, t, u, ux| a.c[0] * u + a.d[0] * ux + a.q(0, x, y, t)),
            f2: Arc::new(move |x, y, t, u, uy| b.c[1] * u + b.d[1] * uy + b.q(1, x, y, t)),
            u0: Arc::new(move |x, y| c.boundary(x, y, 0.0)),
            g: Arc::new(move |x, y, t| d.boundary(x, y, t)),
            exact: Some(Arc::new(move |x, y, t| e.boundary(x, y, t))),
            bounds: [0.0, 1.0, 0.0, 1.0],
            t_final: 1.0,
        }
    }

    fn n(&self) -> usize {
        (self.m + 1) * (self.m + 1)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.m + 1) + j
    }

    fn interior(&self, i: usize, j: usize) -> bool {
        (2..=self.m - 2).contains(&i) && (2..=self.m - 2).contains(&j)
    }

    fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Dense wide first and second difference matrices; rows of non-interior nodes are zero.
    fn stencils(&self, axis: Axis) -> (Mat, Mat) {
        let h = self.h();
        let w1 = [1.0, -8.0, 0.0, 8.0, -1.0].map(|v| v / (12.0 * h));
        let w2 = [-1.0, 16.0, -30.0, 16.0, -1.0].map(|v| v / (12.0 * h * h));
        let (mut d1, mut d2) = (zeros(self.n()), zeros(self.n()));
        for i in 0..=self.m {
            for j in 0..=self.m {
                if !self.interior(i, j) {
                    continue;
                }
                let row = self.idx(i, j);
                for o in 0..5 {
                    let (ii, jj) = match axis {
                        Axis::X => (i + o - 2, j),
                        Axis::Y => (i, j + o - 2),
                    };
                    d1[row][self.idx(ii, jj)] += w1[o];
                    d2[row][self.idx(ii, jj)] += w2[o];
                }
            }
        }
        (d1, d2)
    }

    pub fn to_vec(&self, f: &Field<f64>) -> Vec<f64> {
        f.values().to_vec()
    }

    pub fn to_field(&self, v: &[f64]) -> Field<f64> {
        Field::from_index_fn(self.grid(), |i, j| v[self.idx(i, j)])
    }

    fn source_vec(&self, axis: Axis, t: f64) -> Vec<f64> {
        let mi = match axis {
            Axis::X => 0,
            Axis::Y => 1,
        };
        let mut v = vec![0.0; self.n()];
        for i in 0..=self.m {
            for j in 0..=self.m {
                if self.interior(i, j) {
                    v[self.idx(i, j)] = self.q(mi, i as f64 * self.h(), j as f64 * self.h(), t);
                }
            }
        }
        v
    }

    /// Solves `A x = rhs` on the interior with layer rows pinned to the boundary data at `t`.
    fn constrained_solve(&self, interior_op: &Mat, rhs: &[f64], t: f64) -> Vec<f64> {
        let mut a = zeros(self.n());
        let mut b = vec![0.0; self.n()];
        let h = self.h();
        for i in 0..=self.m {
            for j in 0..=self.m {
                let r = self.idx(i, j);
                if self.interior(i, j) {
                    a[r] = interior_op[r].clone();
                    b[r] = rhs[r];
                } else {
                    a[r][r] = 1.0;
                    b[r] = self.boundary(i as f64 * h, j as f64 * h, t);
                }
            }
        }
        dense_solve(a, b)
    }

    /// Crank-Nicolson half step along `axis` from `t_from` with sign `s` on the explicit part.
    pub fn cn_step(&self, u: &[f64], axis: Axis, t_from: f64, k: f64, s: f64) -> Vec<f64> {
        let n = self.n();
        let th = k / 4.0;
        let mi = if axis == Axis::X { 0 } else { 1 };
        let (c, d) = (self.c[mi], self.d[mi]);
        let (d1, d2) = self.stencils(axis);
        let mut lhs = zeros(n);
        let mut rop = zeros(n);
        for r in 0..n {
            for col in 0..n {
                let id = if r == col { 1.0 } else { 0.0 };
                let b = self.gamma * d2[r][col] - self.beta * d1[r][col];
                let f = c * id + d * d1[r][col];
                lhs[r][col] = id - self.alpha * d2[r][col] - th * b - th * f;
                rop[r][col] = id - self.alpha * d2[r][col] + s * th * b + th * f;
            }
        }
        let t_next = t_from + k / 2.0;
        let q0 = self.source_vec(axis, t_from);
        let q1 = self.source_vec(axis, t_next);
        let mut rhs = matvec(&rop, u);
        for r in 0..n {
            rhs[r] += th * (q0[r] + q1[r]);
        }
        self.constrained_solve(&lhs, &rhs, t_next)
    }

    /// Leapfrog x step from levels `n - 1/2` and `n`, with operator `I - a D2x`.
    pub fn leapfrog(&self, prev: &[f64], cur: &[f64], t_n: f64, k: f64, a: f64) -> Vec<f64> {
        let n = self.n();
        let (d1, d2) = self.stencils(Axis::X);
        let mut op = zeros(n);
        let mut expl = zeros(n);
        for r in 0..n {
            for col in 0..n {
                let id = if r == col { 1.0 } else { 0.0 };
                op[r][col] = id - a * d2[r][col];
                expl[r][col] = k * (self.gamma * d2[r][col] - self.beta * d1[r][col])
                    + k * (self.c[0] * id + self.d[0] * d1[r][col]);
            }
        }
        let q = self.source_vec(Axis::X, t_n);
        let p = matvec(&op, prev);
        let e = matvec(&expl, cur);
        let rhs: Vec<f64> = (0..n).map(|r| p[r] + e[r] + k * q[r]).collect();
        self.constrained_solve(&op, &rhs, t_n + k / 2.0)
    }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
