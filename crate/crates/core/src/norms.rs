//! Discrete norms, scalar products and the summation-by-parts identities.
//!
//! Every sum carries the factor `hx * hy`. Index ranges (`i` along x, `j` along y):
//!
//! | quantity                    | `i` range      | `j` range      |
//! |-----------------------------|----------------|----------------|
//! | `(u, v)`                    | `2..=M-2`      | `2..=M-2`      |
//! | `(dx u, dx v)` at `i + 1/2` | `1..=M-2`      | `2..=M-2`      |
//! | `(dy u, dy v)` at `j + 1/2` | `2..=M-2`      | `1..=M-2`      |
//! | `(dx^2 u, dx^2 v)`          | `1..=M-1`      | `2..=M-2`      |
//! | `(dy^2 u, dy^2 v)`          | `2..=M-2`      | `1..=M-1`      |
//!
//! The identities checked by [`summation_residuals`], [`antisymmetry_residual`] and
//! [`sbp_residual`] only hold with exactly these ranges and for fields that
//! vanish on the layers `{0, 1, M-1, M}`.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::scalar::{pairwise_sum, Scalar};
use crate::stencil::{half_diff, second_diff, wide_first, wide_second, Axis};

/// Which scalar product to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerVariant {
    /// `(u, v)`
    Plain,
    /// `(delta_z u, delta_z v)` over half points.
    HalfDiff(Axis),
    /// `(delta_z^2 u, delta_z^2 v)`
    SecondDiff(Axis),
    /// `(delta_z^4 u, v)`
    WideFirst(Axis),
    /// `(delta_{2z}^4 u, v)`
    WideSecond(Axis),
}

fn ranges_for(m: usize, axis: Axis, along: RangeInclusive<usize>) -> (RangeInclusive<usize>, RangeInclusive<usize>) {
    match axis {
        Axis::X => (along, 2..=m - 2),
        Axis::Y => (2..=m - 2, along),
    }
}

fn weighted_sum<T: Scalar>(
    field_grid: &crate::grid::Grid2D<T>,
    ri: RangeInclusive<usize>,
    rj: RangeInclusive<usize>,
    mut term: impl FnMut(usize, usize) -> T,
) -> T {
    let mut terms = Vec::with_capacity(ri.clone().count() * rj.clone().count());
    for i in ri {
        for j in rj.clone() {
            terms.push(term(i, j));
        }
    }
    field_grid.hx() * field_grid.hy() * pairwise_sum(&terms)
}

/// Discrete scalar product with the index ranges listed in the module docs.
pub fn inner<T: Scalar>(u: &Field<T>, v: &Field<T>, variant: InnerVariant) -> Result<T> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    let g = *u.grid();
    let m = g.m();
    let interior = || 2..=m - 2;
    Ok(match variant {
        InnerVariant::Plain => weighted_sum(&g, interior(), interior(), |i, j| u[(i, j)] * v[(i, j)]),
        InnerVariant::HalfDiff(axis) => {
            let du = half_diff(u, axis);
            let dv = half_diff(v, axis);
            let (ri, rj) = ranges_for(m, axis, 1..=m - 2);
            weighted_sum(&g, ri, rj, |i, j| du.get(i, j) * dv.get(i, j))
        }
        InnerVariant::SecondDiff(axis) => {
            let du = second_diff(u, axis);
            let dv = second_diff(v, axis);
            let (ri, rj) = ranges_for(m, axis, 1..=m - 1);
            weighted_sum(&g, ri, rj, |i, j| du[(i, j)] * dv[(i, j)])
        }
        InnerVariant::WideFirst(axis) => {
            let du = wide_first(u, axis);
            weighted_sum(&g, interior(), interior(), |i, j| du[(i, j)] * v[(i, j)])
        }
        InnerVariant::WideSecond(axis) => {
            let du = wide_second(u, axis);
            weighted_sum(&g, interior(), interior(), |i, j| du[(i, j)] * v[(i, j)])
        }
    })
}

/// `||u||_2` over the interior nodes `2..=M-2`.
pub fn l2_norm<T: Scalar>(u: &Field<T>) -> T {
    // same grid by construction
    inner(u, u, InnerVariant::Plain).unwrap_or_else(|_| T::nan()).sqrt()
}

/// `||delta_z u||_2`
pub fn half_diff_norm<T: Scalar>(u: &Field<T>, axis: Axis) -> T {
    inner(u, u, InnerVariant::HalfDiff(axis)).unwrap_or_else(|_| T::nan()).sqrt()
}

/// `||delta_z^2 u||_2`
pub fn second_diff_norm<T: Scalar>(u: &Field<T>, axis: Axis) -> T {
    inner(u, u, InnerVariant::SecondDiff(axis)).unwrap_or_else(|_| T::nan()).sqrt()
}

/// The pieces of the discrete `H^2` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport<T> {
    pub l2: T,
    pub h2: T,
    /// `[||u||^2, ||dx u||^2, ||dy u||^2, ||dx^2 u||^2, ||dy^2 u||^2]`
    pub components: [T; 5],
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

/// `||u||_{H^2}^2 = ||u||^2 + alpha (||dx u||^2 + ||dy u||^2 + h^2/12 (||dx^2 u||^2 + ||dy^2 u||^2))`.
///
/// With unequal steps the curvature terms are weighted by `hx^2/12` and `hy^2/12`.
pub fn h2_norm<T: Scalar>(u: &Field<T>, alpha: T) -> Result<NormReport<T>> {
    check_alpha(alpha)?;
    let g = u.grid();
    let twelve = T::lit(12.0);
    let c = [
        inner(u, u, InnerVariant::Plain)?,
        inner(u, u, InnerVariant::HalfDiff(Axis::X))?,
        inner(u, u, InnerVariant::HalfDiff(Axis::Y))?,
        inner(u, u, InnerVariant::SecondDiff(Axis::X))?,
        inner(u, u, InnerVariant::SecondDiff(Axis::Y))?,
    ];
    let curv = g.hx() * g.hx() / twelve * c[3] + g.hy() * g.hy() / twelve * c[4];
    let h2sq = c[0] + alpha * (c[1] + c[2] + curv);
    Ok(NormReport {
        l2: c[0].sqrt(),
        h2: h2sq.sqrt(),
        components: c,
    })
}

/// `E_z = ||e||^2 + alpha (||delta_z e||^2 + h_z^2/12 ||delta_z^2 e||^2)`.
pub fn directional_energy<T: Scalar>(e: &Field<T>, axis: Axis, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    let h = axis.step(e.grid());
    let l2 = inner(e, e, InnerVariant::Plain)?;
    let d1 = inner(e, e, InnerVariant::HalfDiff(axis))?;
    let d2 = inner(e, e, InnerVariant::SecondDiff(axis))?;
    Ok(l2 + alpha * (d1 + h * h / T::lit(12.0) * d2))
}

/// Running maximum of a norm over visited time levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningMax<T> {
    max: T,
    count: usize,
}

impl<T: Scalar> Default for RunningMax<T> {
    fn default() -> Self {
        Self {
            max: T::zero(),
            count: 0,
        }
    }
}

impl<T: Scalar> RunningMax<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: T) {
        if self.count == 0 || value > self.max {
            self.max = value;
        }
        self.count += 1;
    }

    pub fn max(&self) -> T {
        self.max
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Absolute residual of an identity together with the magnitude of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual<T> {
    pub residual: T,
    /// Cauchy-Schwarz size of the terms entering the identity.
    pub scale: T,
}

impl<T: Scalar> IdentityResidual<T> {
    /// `residual / (1 + scale)`.
    pub fn relative(&self) -> T {
        self.residual / (T::one() + self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummationResiduals<T> {
    /// `|(delta_x^4 w, w)|`
    pub skew_x: IdentityResidual<T>,
    pub skew_y: IdentityResidual<T>,
    /// `|(-delta_{2x}^4 w, w) - ||dx w||^2 - h^2/12 ||dx^2 w||^2|`
    pub energy_x: IdentityResidual<T>,
    pub energy_y: IdentityResidual<T>,
}

impl<T: Scalar> SummationResiduals<T> {
    pub fn max_relative(&self) -> T {
        [self.skew_x, self.skew_y, self.energy_x, self.energy_y]
            .iter()
            .fold(T::zero(), |m, r| m.max(r.relative()))
    }
}

fn require_frame_vanishing<T: Scalar>(w: &Field<T>, name: &str) -> Result<()> {
    if w.frame_vanishes() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{name} must vanish on the layers {{0, 1, M-1, M}}"
        )))
    }
}

fn energy_residual<T: Scalar>(w: &Field<T>, axis: Axis) -> Result<IdentityResidual<T>> {
    let h = axis.step(w.grid());
    let lhs = -inner(w, w, InnerVariant::WideSecond(axis))?;
    let d1 = inner(w, w, InnerVariant::HalfDiff(axis))?;
    let d2 = inner(w, w, InnerVariant::SecondDiff(axis))?;
    let rhs = d1 + h * h / T::lit(12.0) * d2;
    let op_norm = l2_norm(&wide_second(w, axis));
    Ok(IdentityResidual {
        residual: (lhs - rhs).abs(),
        scale: op_norm * l2_norm(w) + rhs.abs(),
    })
}

/// Residuals of `(delta_z^4 w, w) = 0` and
/// `(-delta_{2z}^4 w, w) = ||delta_z w||^2 + h^2/12 ||delta_z^2 w||^2`.
pub fn summation_residuals<T: Scalar>(w: &Field<T>) -> Result<SummationResiduals<T>> {
    require_frame_vanishing(w, "w")?;
    let skew = |axis| -> Result<IdentityResidual<T>> {
        Ok(IdentityResidual {
            residual: inner(w, w, InnerVariant::WideFirst(axis))?.abs(),
            scale: l2_norm(&wide_first(w, axis)) * l2_norm(w),
        })
    };
    Ok(SummationResiduals {
        skew_x: skew(Axis::X)?,
        skew_y: skew(Axis::Y)?,
        energy_x: energy_residual(w, Axis::X)?,
        energy_y: energy_residual(w, Axis::Y)?,
    })
}

/// Residual of `(delta_z^4 w, v) = -(delta_z^4 v, w)`.
pub fn antisymmetry_residual<T: Scalar>(w: &Field<T>, v: &Field<T>, axis: Axis) -> Result<IdentityResidual<T>> {
    require_frame_vanishing(w, "w")?;
    require_frame_vanishing(v, "v")?;
    let a = inner(w, v, InnerVariant::WideFirst(axis))?;
    let b = inner(v, w, InnerVariant::WideFirst(axis))?;
    Ok(IdentityResidual {
        residual: (a + b).abs(),
        scale: l2_norm(&wide_first(w, axis)) * l2_norm(v) + l2_norm(&wide_first(v, axis)) * l2_norm(w),
    })
}

/// Residual of `(delta_{2z}^4 w, v) = -(delta_z w, delta_z v) - h^2/12 (delta_z^2 w, delta_z^2 v)`.
pub fn sbp_residual<T: Scalar>(w: &Field<T>, v: &Field<T>, axis: Axis) -> Result<IdentityResidual<T>> {
    require_frame_vanishing(w, "w")?;
    require_frame_vanishing(v, "v")?;
    let h = axis.step(w.grid());
    let lhs = inner(w, v, InnerVariant::WideSecond(axis))?;
    let d1 = inner(w, v, InnerVariant::HalfDiff(axis))?;
    let d2 = inner(w, v, InnerVariant::SecondDiff(axis))?;
    let c = h * h / T::lit(12.0);
    let rhs = -d1 - c * d2;
    let scale = l2_norm(&wide_second(w, axis)) * l2_norm(v)
        + half_diff_norm(w, axis) * half_diff_norm(v, axis)
        + c * second_diff_norm(w, axis) * second_diff_norm(v, axis);
    Ok(IdentityResidual {
        residual: (lhs - rhs).abs(),
        scale,
    })
}
