//! Uniform tensor grid, nodal fields and the time grid.
//!
//! Nodes are indexed `0..=M` along each axis. The wide stencils are only ever
//! applied on the interior set `2..=M-2`; the two outermost layers on each
//! side (`0, 1, M-1, M`) are owned by the boundary treatment.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest admissible number of subdivisions: `M = 4` leaves the single
/// interior node `(2, 2)`. Convergence studies need `M >= 8` to be meaningful.
pub const MIN_SUBDIVISIONS: usize = 4;

/// Uniform grid over `(L1, L2) x (L3, L4)` with `M` subdivisions per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D<T> {
    x_min: T,
    x_max: T,
    y_min: T,
    y_max: T,
    m: usize,
    hx: T,
    hy: T,
}

impl<T: Scalar> Grid2D<T> {
    /// Builds the grid, rejecting degenerate bounds and `M < 4`.
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T, m: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::Config("grid bounds must be finite".into()));
        }
        if !(x_min < x_max) || !(y_min < y_max) {
            return Err(Error::Config(format!(
                "degenerate domain ({x_min}, {x_max}) x ({y_min}, {y_max})"
            )));
        }
        if m < MIN_SUBDIVISIONS {
            return Err(Error::Config(format!(
                "M = {m} leaves no interior node for the five-point stencils (need M >= {MIN_SUBDIVISIONS})"
            )));
        }
        let mf = T::from_usize_lossy(m);
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            m,
            hx: (x_max - x_min) / mf,
            hy: (y_max - y_min) / mf,
        })
    }

    /// Unit square `(0,1)^2`.
    pub fn unit_square(m: usize) -> Result<Self> {
        Self::new(T::zero(), T::one(), T::zero(), T::one(), m)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of nodes per axis, `M + 1`.
    #[inline]
    pub fn nodes(&self) -> usize {
        self.m + 1
    }

    #[inline]
    pub fn hx(&self) -> T {
        self.hx
    }

    #[inline]
    pub fn hy(&self) -> T {
        self.hy
    }

    pub fn bounds(&self) -> [T; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x_min + T::from_usize_lossy(i) * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y_min + T::from_usize_lossy(j) * self.hy
    }

    /// Interior index range `2..=M-2` used by the scheme and the `L2` norm.
    #[inline]
    pub fn interior(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.m - 2
    }

    /// Number of interior unknowns per line, `M - 3`.
    #[inline]
    pub fn interior_len(&self) -> usize {
        self.m - 3
    }

    /// True when index `l` belongs to one of the boundary-owned layers `{0, 1, M-1, M}`.
    #[inline]
    pub fn is_layer(&self, l: usize) -> bool {
        l <= 1 || l + 1 >= self.m
    }
}

/// Nodal values on the `(M+1) x (M+1)` grid, stored row-major in `i` (x index).
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid2D<T>,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid2D<T>, c: T) -> Self {
        let n = grid.nodes();
        Self {
            grid,
            values: vec![c; n * n],
        }
    }

    /// Builds a field from a node-index closure.
    pub fn from_index_fn(grid: Grid2D<T>, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let n = grid.nodes();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i, j));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.grid.nodes() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let n = self.grid.nodes();
        self.values[i * n + j] = v;
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest absolute value over the interior nodes `2..=M-2`.
    pub fn interior_max_abs(&self) -> T {
        let mut m = T::zero();
        for i in self.grid.interior() {
            for j in self.grid.interior() {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    /// `a * self + b * other`, node-wise.
    pub fn lin_comb(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &v)| a * u + b * v)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, -T::one())
    }

    /// True when every node of the layers `{0, 1, M-1, M}` is exactly zero.
    pub fn frame_vanishes(&self) -> bool {
        let n = self.grid.nodes();
        (0..n).all(|i| {
            (0..n).all(|j| {
                !(self.grid.is_layer(i) || self.grid.is_layer(j)) || self.get(i, j) == T::zero()
            })
        })
    }
}

impl<T: Scalar> Index<(usize, usize)> for Field<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.values[i * self.grid.nodes() + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Field<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        let n = self.grid.nodes();
        &mut self.values[i * n + j]
    }
}

/// Evaluates `phi(x_i, y_j, t)` at every node.
pub fn sample<T: Scalar>(grid: &Grid2D<T>, phi: impl Fn(T, T, T) -> T, t: T) -> Result<Field<T>> {
    let n = grid.nodes();
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = grid.x(i);
        for j in 0..n {
            let v = phi(x, grid.y(j), t);
            if !v.is_finite() {
                return Err(Error::Sampling { i, j });
            }
            values.push(v);
        }
    }
    Ok(Field {
        grid: *grid,
        values,
    })
}

/// Uniform time levels `t_n = n k`, `k = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t_final: T,
    steps: usize,
    k: T,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(t_final: T, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Config("time grid needs N >= 1".into()));
        }
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(Error::Config(format!("final time must be positive, got {t_final}")));
        }
        Ok(Self {
            t_final,
            steps,
            k: t_final / T::from_usize_lossy(steps),
        })
    }

    /// Rounds a requested step to `N = round(T / k)` and sets `k = T / N`.
    pub fn from_step(t_final: T, k_requested: T) -> Result<Self> {
        if !(k_requested > T::zero()) || !k_requested.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {k_requested}")));
        }
        let n = (t_final / k_requested).round().to_usize().unwrap_or(0).max(1);
        Self::new(t_final, n)
    }

    #[inline]
    pub fn k(&self) -> T {
        self.k
    }

    #[inline]
    pub fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    pub fn t_final(&self) -> T {
        self.t_final
    }

    /// Integer level `t_n = n k`.
    #[inline]
    pub fn t(&self, n: usize) -> T {
        T::from_usize_lossy(n) * self.k
    }

    /// Half level `t_{n+1/2} = (n + 1/2) k`.
    #[inline]
    pub fn t_half(&self, n: usize) -> T {
        (T::from_usize_lossy(n) + T::lit(0.5)) * self.k
    }
}
