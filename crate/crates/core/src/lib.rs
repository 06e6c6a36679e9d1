//! Time-split Leapfrog / Crank-Nicolson solver for the two-dimensional
//! Sobolev and regularized long wave equation
//!
//! ```text
//! u_t - alpha Lap u_t - gamma Lap u + beta (u_x + u_y) = f(x, y, t, u, u_x, u_y)
//! ```
//!
//! on a rectangle with Dirichlet data. The library is generic over the
//! floating point type ([`Scalar`], implemented for `f32` and `f64`); the
//! aliases at the crate root fix it to `f64`.
//!
//! ```
//! use sobolev_split::{problems, run, Grid, RunOptions, SchemeConfig};
//!
//! let problem = problems::example1::<f64>();
//! let grid = Grid::unit_square(8).unwrap();
//! let record = run(&problem, grid, &SchemeConfig::default(), &RunOptions::default()).unwrap();
//! assert!(record.maxima.error < 1e-4);
//! ```

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod error;
pub mod grid;
pub mod harness;
pub mod norms;
pub mod penta;
pub mod problems;
pub mod scalar;
pub mod scheme;
pub mod stencil;

pub use error::{Error, Result};
pub use harness::{convergence_study, rate, verify_suite, ConvergenceRow, RunManifest, VerifyReport};
pub use norms::{h2_norm, l2_norm, NormReport, RunningMax};
pub use problems::{Coefficients, ManufacturedPreset, ProblemSpec};
pub use scalar::Scalar;
pub use scheme::{
    run, BoundaryMode, KRule, LeapfrogAlpha, RhsSign, RunOptions, SchemeConfig, SchemeState, SolutionRecord,
    StepDiagnostics, Stepper,
};
pub use stencil::{Axis, FirstDerivSign};

pub type Grid = grid::Grid2D<f64>;
pub type Field = grid::Field<f64>;
pub type TimeGrid = grid::TimeGrid<f64>;
pub type Problem = problems::ProblemSpec<f64>;
pub type Record = scheme::SolutionRecord<f64>;
pub type Snapshot = scheme::Snapshot<f64>;
pub type Bands = penta::PentaBands<f64>;
pub type Factorization = penta::PentaFactorization<f64>;
