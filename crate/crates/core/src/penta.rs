//! Constant-coefficient pentadiagonal line systems.
//!
//! Each implicit sweep solves, for every grid line, a system in the interior
//! unknowns `i = 2..=M-2` whose matrix has the same five bands on every row.
//! The matrix is factored once (banded LU, no pivoting) and reused for all
//! lines and all steps with the same time step.

use log::warn;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::scalar::Scalar;
use crate::stencil::{wide_first_coeffs, wide_second_coeffs, Axis};

/// Five constant diagonals at offsets `-2, -1, 0, +1, +2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PentaBands<T> {
    pub c_mm: T,
    pub c_m: T,
    pub c_0: T,
    pub c_p: T,
    pub c_pp: T,
    pub n: usize,
}

impl<T: Scalar> PentaBands<T> {
    pub fn new(coeffs: [T; 5], n: usize) -> Self {
        let [c_mm, c_m, c_0, c_p, c_pp] = coeffs;
        Self {
            c_mm,
            c_m,
            c_0,
            c_p,
            c_pp,
            n,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new([T::zero(), T::zero(), T::one(), T::zero(), T::zero()], n)
    }

    pub fn coeffs(&self) -> [T; 5] {
        [self.c_mm, self.c_m, self.c_0, self.c_p, self.c_pp]
    }

    /// `(|c_mm| + |c_m| + |c_p| + |c_pp|) / |c_0|`; below one means strictly diagonally dominant.
    pub fn dominance_ratio(&self) -> T {
        (self.c_mm.abs() + self.c_m.abs() + self.c_p.abs() + self.c_pp.abs()) / self.c_0.abs()
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        self.dominance_ratio() < T::one()
    }

    /// Banded matrix-vector product `A x`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let c = self.coeffs();
        let n = self.n as isize;
        Ok((0..n)
            .map(|r| {
                let mut acc = T::zero();
                for (o, &coef) in c.iter().enumerate() {
                    let col = r + o as isize - 2;
                    if (0..n).contains(&col) {
                        acc += coef * x[col as usize];
                    }
                }
                acc
            })
            .collect())
    }
}

/// Bands of `I - alpha D2 - theta (gamma D2 - beta D1)` along `axis`,
/// with `D1`, `D2` the wide first and second derivative stencils.
///
/// `theta = k/4` for the Crank-Nicolson sub-steps and `0` for the Leapfrog
/// solve. Unknowns are the `M - 3` interior nodes of a line.
///
/// The wide second-derivative stencil is not diagonally dominant once
/// `alpha / (12 h^2) > 1/4`; the dominance ratio is logged in that case and
/// the factorization proceeds (the symmetric part stays positive definite).
pub fn assemble_line_operator<T: Scalar>(
    grid: &Grid2D<T>,
    axis: Axis,
    alpha: T,
    beta: T,
    gamma: T,
    theta: T,
) -> Result<PentaBands<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    if theta < T::zero() {
        return Err(Error::Config(format!("theta must be non-negative, got {theta}")));
    }
    let h = axis.step(grid);
    let d1 = wide_first_coeffs(h);
    let d2 = wide_second_coeffs(h);
    let mut c = [T::zero(); 5];
    for o in 0..5 {
        c[o] = -alpha * d2[o] - theta * (gamma * d2[o] - beta * d1[o]);
    }
    c[2] += T::one();
    let bands = PentaBands::new(c, grid.interior_len());
    if !bands.is_diagonally_dominant() {
        warn!(
            "line operator along {axis:?} is not strictly diagonally dominant (ratio {:.4})",
            bands.dominance_ratio().to_f64_lossy()
        );
    }
    Ok(bands)
}

/// Banded LU factors `A = L U`; `L` unit lower with two sub-diagonals,
/// `U` upper with two super-diagonals (the outer one equals `c_pp`).
#[derive(Debug, Clone, PartialEq)]
pub struct PentaFactorization<T> {
    bands: PentaBands<T>,
    /// multipliers at `(r, r-1)`
    l1: Vec<T>,
    /// multipliers at `(r, r-2)`
    l2: Vec<T>,
    /// pivots
    diag: Vec<T>,
    /// `U` entries at `(r, r+1)`
    up1: Vec<T>,
}

/// Factors the banded matrix. O(n).
pub fn factor<T: Scalar>(bands: &PentaBands<T>) -> Result<PentaFactorization<T>> {
    let n = bands.n;
    if n == 0 {
        return Err(Error::Config("pentadiagonal system needs n >= 1".into()));
    }
    let PentaBands {
        c_mm,
        c_m,
        c_0,
        c_p,
        c_pp,
        ..
    } = *bands;
    let mut l1 = vec![T::zero(); n];
    let mut l2 = vec![T::zero(); n];
    let mut diag = vec![T::zero(); n];
    let mut up1 = vec![T::zero(); n];
    let tiny = T::epsilon() * (c_0.abs() + c_m.abs() + c_p.abs() + c_mm.abs() + c_pp.abs());
    for r in 0..n {
        let m2 = if r >= 2 { c_mm / diag[r - 2] } else { T::zero() };
        let m1 = if r >= 1 {
            let g = if r >= 2 { up1[r - 2] } else { T::zero() };
            (c_m - m2 * g) / diag[r - 1]
        } else {
            T::zero()
        };
        let mut d = c_0;
        if r >= 2 {
            d -= m2 * c_pp;
        }
        if r >= 1 {
            d -= m1 * up1[r - 1];
        }
        if !(d.abs() > tiny) || !d.is_finite() {
            return Err(Error::Singular { row: r });
        }
        l2[r] = m2;
        l1[r] = m1;
        diag[r] = d;
        up1[r] = c_p - m1 * c_pp;
    }
    Ok(PentaFactorization {
        bands: *bands,
        l1,
        l2,
        diag,
        up1,
    })
}

impl<T: Scalar> PentaFactorization<T> {
    pub fn bands(&self) -> &PentaBands<T> {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.n
    }

    pub fn is_empty(&self) -> bool {
        self.bands.n == 0
    }

    /// Solves in place; `x` holds the right-hand side on entry.
    pub fn solve_in_place(&self, x: &mut [T]) -> Result<()> {
        let n = self.bands.n;
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x.len(),
            });
        }
        for r in 1..n {
            let mut v = x[r] - self.l1[r] * x[r - 1];
            if r >= 2 {
                v -= self.l2[r] * x[r - 2];
            }
            x[r] = v;
        }
        let c_pp = self.bands.c_pp;
        for r in (0..n).rev() {
            let mut v = x[r];
            if r + 1 < n {
                v -= self.up1[r] * x[r + 1];
            }
            if r + 2 < n {
                v -= c_pp * x[r + 2];
            }
            x[r] = v / self.diag[r];
        }
        Ok(())
    }
}

/// Solves `A x = rhs` with a precomputed factorization.
pub fn solve_line<T: Scalar>(fact: &PentaFactorization<T>, rhs: &[T]) -> Result<Vec<T>> {
    let mut x = rhs.to_vec();
    fact.solve_in_place(&mut x)?;
    Ok(x)
}

/// Right-hand side correction moving the known layer values of a line onto
/// the interior rows.
///
/// `left = [U_0, U_1]`, `right = [U_{M-1}, U_M]`. Interior row `r` is node
/// `r + 2`; every band entry that lands on a layer node contributes
/// `-coef * U_layer`.
pub fn boundary_moveout<T: Scalar>(bands: &PentaBands<T>, left: [T; 2], right: [T; 2]) -> Vec<T> {
    let n = bands.n;
    let m = n + 3;
    let c = bands.coeffs();
    let layer = |node: usize| -> Option<T> {
        match node {
            0 => Some(left[0]),
            1 => Some(left[1]),
            _ if node == m - 1 => Some(right[0]),
            _ if node == m => Some(right[1]),
            _ => None,
        }
    };
    (0..n)
        .map(|r| {
            let node = r + 2;
            let mut acc = T::zero();
            for (o, &coef) in c.iter().enumerate() {
                if let Some(v) = layer(node + o - 2) {
                    acc -= coef * v;
                }
            }
            acc
        })
        .collect()
}
