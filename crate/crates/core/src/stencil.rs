//! Axis-wise finite difference operators.
//!
//! | operator        | formula                                                   | valid range |
//! |-----------------|-----------------------------------------------------------|-------------|
//! | [`half_diff`]   | `(u[i+1] - u[i]) / h` at `i + 1/2`                        | `0..=M-1`   |
//! | [`second_diff`] | `(u[i+1] - 2u[i] + u[i-1]) / h^2`                         | `1..=M-1`   |
//! | [`wide_first`]  | `(u[i-2] - 8u[i-1] + 8u[i+1] - u[i+2]) / (12h)`           | `2..=M-2`   |
//! | [`wide_second`] | `(-u[i-2] + 16u[i-1] - 30u[i] + 16u[i+1] - u[i+2]) / (12h^2)` | `2..=M-2` |
//!
//! Entries outside the valid range are zero and never read by the scheme.

use crate::grid::{Field, Grid2D};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn step<T: Scalar>(self, grid: &Grid2D<T>) -> T {
        match self {
            Axis::X => grid.hx(),
            Axis::Y => grid.hy(),
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    /// Flat offset between neighbours along this axis.
    #[inline]
    fn stride(self, nodes: usize) -> usize {
        match self {
            Axis::X => nodes,
            Axis::Y => 1,
        }
    }

    /// Node `(i, j)` addressed as `(along, across)` for this axis.
    #[inline]
    pub fn node(self, along: usize, across: usize) -> (usize, usize) {
        match self {
            Axis::X => (along, across),
            Axis::Y => (across, along),
        }
    }
}

/// Orientation of the wide first-derivative stencil.
///
/// `Consistent` approximates `+d/dz`. `AsPrinted` keeps the opposite sign
/// (`(-u[i-2] + 8u[i-1] - 8u[i+1] + u[i+2]) / (12h)`), which is still
/// antisymmetric but approximates `-d/dz`; it exists to show that the
/// consistency checks catch it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstDerivSign {
    #[default]
    Consistent,
    AsPrinted,
}

pub(crate) const WIDE_FIRST: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
pub(crate) const WIDE_SECOND: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

/// Coefficients of the wide first-derivative stencil at offsets `-2..=2`, scaled by `1/(12h)`.
pub fn wide_first_coeffs<T: Scalar>(h: T) -> [T; 5] {
    let s = T::one() / (T::lit(12.0) * h);
    WIDE_FIRST.map(|c| T::lit(c) * s)
}

/// Coefficients of the wide second-derivative stencil at offsets `-2..=2`, scaled by `1/(12h^2)`.
pub fn wide_second_coeffs<T: Scalar>(h: T) -> [T; 5] {
    let s = T::one() / (T::lit(12.0) * h * h);
    WIDE_SECOND.map(|c| T::lit(c) * s)
}

/// Values of a first difference at the half points `i + 1/2` along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredField<T> {
    grid: Grid2D<T>,
    axis: Axis,
    /// `M` half points along `axis` times `M + 1` nodes across.
    values: Vec<T>,
}

impl<T: Scalar> StaggeredField<T> {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    /// Value at half point `half + 1/2` along the axis, node `across` on the other axis.
    #[inline]
    pub fn at(&self, half: usize, across: usize) -> T {
        self.values[half * self.grid.nodes() + across]
    }

    /// Value at grid position `(i + 1/2, j)` for `X` or `(i, j + 1/2)` for `Y`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        match self.axis {
            Axis::X => self.at(i, j),
            Axis::Y => self.at(j, i),
        }
    }
}

/// `delta_z u` at every half point `i + 1/2`, `i = 0..=M-1`.
pub fn half_diff<T: Scalar>(field: &Field<T>, axis: Axis) -> StaggeredField<T> {
    let grid = *field.grid();
    let n = grid.nodes();
    let h = axis.step(&grid);
    let mut values = Vec::with_capacity((n - 1) * n);
    for half in 0..n - 1 {
        for across in 0..n {
            let (i0, j0) = axis.node(half, across);
            let (i1, j1) = axis.node(half + 1, across);
            values.push((field.get(i1, j1) - field.get(i0, j0)) / h);
        }
    }
    StaggeredField { grid, axis, values }
}

fn apply_stencil<T: Scalar>(
    field: &Field<T>,
    axis: Axis,
    coeffs: &[T],
    reach: usize,
) -> Field<T> {
    let grid = *field.grid();
    let n = grid.nodes();
    let stride = axis.stride(n);
    let src = field.values();
    let mut out = Field::zeros(grid);
    let dst = out.values_mut();
    for along in reach..n - reach {
        for across in 0..n {
            let (i, j) = axis.node(along, across);
            let centre = i * n + j;
            let base = centre - reach * stride;
            // Differences against the centre value make constants vanish exactly.
            let mut acc = T::zero();
            for (o, &c) in coeffs.iter().enumerate() {
                if o != reach {
                    acc += c * (src[base + o * stride] - src[centre]);
                }
            }
            dst[centre] = acc;
        }
    }
    out
}

/// Three-point second difference `delta_z^2 u` on `1..=M-1`.
pub fn second_diff<T: Scalar>(field: &Field<T>, axis: Axis) -> Field<T> {
    let h = axis.step(field.grid());
    let s = T::one() / (h * h);
    apply_stencil(field, axis, &[s, T::lit(-2.0) * s, s], 1)
}

/// Fourth-order first derivative `delta_z^4 u` on `2..=M-2`.
pub fn wide_first<T: Scalar>(field: &Field<T>, axis: Axis) -> Field<T> {
    wide_first_signed(field, axis, FirstDerivSign::Consistent)
}

/// [`wide_first`] with a selectable orientation.
pub fn wide_first_signed<T: Scalar>(field: &Field<T>, axis: Axis, sign: FirstDerivSign) -> Field<T> {
    let mut c = wide_first_coeffs(axis.step(field.grid()));
    if sign == FirstDerivSign::AsPrinted {
        c = c.map(|v| -v);
    }
    apply_stencil(field, axis, &c, 2)
}

/// Fourth-order second derivative `delta_{2z}^4 u` on `2..=M-2`.
pub fn wide_second<T: Scalar>(field: &Field<T>, axis: Axis) -> Field<T> {
    apply_stencil(field, axis, &wide_second_coeffs(axis.step(field.grid())), 2)
}
