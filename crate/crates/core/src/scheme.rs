//! Three-level time-split Leapfrog / Crank-Nicolson stepper.
//!
//! One full step advances `U^{n-1/2}, U^n` to `U^{n+1/2}, U^{n+1}`:
//!
//! ```text
//! A_x U^{n+1/2} = A_x U^{n-1/2} + k (gamma D2x - beta D1x) U^n + k f1(t_n, U^n)
//! (I - alpha D2y - k/4 B_y) U^{n+1}
//!     = (I - alpha D2y + s k/4 B_y) U^{n+1/2} + k/4 [f2(t_{n+1}, U^{n+1}) + f2(t_{n+1/2}, U^{n+1/2})]
//! ```
//!
//! with `B_z = gamma D2z - beta D1z`, `A_x = I - alpha D2x` and `s = +1`
//! (`s = -1` in [`RhsSign::Paper`] mode). The start-up uses a Crank-Nicolson
//! half step in x followed by one in y. Only nodes `2..=M-2` are updated;
//! the four outer layers on each side come from [`fill_boundary_layers`].

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample, Field, Grid2D, TimeGrid};
use crate::norms::{h2_norm, l2_norm, RunningMax};
use crate::penta::{assemble_line_operator, boundary_moveout, factor, PentaFactorization};
use crate::problems::{ProblemSpec, SourceFn};
use crate::scalar::Scalar;
use crate::stencil::{wide_first, wide_second, Axis};

/// Sign of the explicit `k/4 (gamma D2 - beta D1)` term in the Crank-Nicolson sub-steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsSign {
    /// Trapezoidal rule: `+`.
    #[default]
    Derived,
    /// Literal printed form: `-`.
    Paper,
}

/// Whether the Leapfrog operator is `I - alpha D2x` (`On`) or `I - D2x` (`Off`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeapfrogAlpha {
    #[default]
    On,
    Off,
}

/// Source of the boundary layers `{0, 1, M-1, M}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// All four layers from the exact solution.
    #[default]
    Exact,
    /// Layers `0, M` from `g`, layer `1` copied from `0` and `M-1` from `M`.
    PaperCopy,
}

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `k = min(hx, hy)^{4/3}`.
    #[default]
    Auto,
    Explicit(f64),
}

fn parse_err(what: &str, s: &str, expected: &str) -> Error {
    Error::Config(format!("invalid {what} '{s}' (expected {expected})"))
}

impl FromStr for RhsSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(Self::Derived),
            "paper" => Ok(Self::Paper),
            _ => Err(parse_err("rhs sign", s, "derived|paper")),
        }
    }
}

impl FromStr for LeapfrogAlpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(Self::On),
            "off" => Ok(Self::Off),
            _ => Err(parse_err("leapfrog alpha", s, "on|off")),
        }
    }
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "paper-copy" | "paper_copy" => Ok(Self::PaperCopy),
            _ => Err(parse_err("boundary mode", s, "exact|paper-copy")),
        }
    }
}

impl FromStr for KRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        match s.parse::<f64>() {
            Ok(k) if k.is_finite() && k > 0.0 => Ok(Self::Explicit(k)),
            _ => Err(parse_err("time step", s, "auto or a positive number")),
        }
    }
}

impl fmt::Display for KRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Explicit(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeConfig {
    pub rhs_sign: RhsSign,
    pub leapfrog_alpha: LeapfrogAlpha,
    pub boundary_mode: BoundaryMode,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub k_rule: KRule,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            rhs_sign: RhsSign::Derived,
            leapfrog_alpha: LeapfrogAlpha::On,
            boundary_mode: BoundaryMode::Exact,
            picard_tol: 1e-12,
            picard_max_iters: 50,
            k_rule: KRule::Auto,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0 && self.picard_tol.is_finite()) {
            return Err(Error::Config(format!("picard_tol must be positive, got {}", self.picard_tol)));
        }
        if self.picard_max_iters == 0 {
            return Err(Error::Config("picard_max_iters must be at least 1".into()));
        }
        if let KRule::Explicit(k) = self.k_rule {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Config(format!("time step must be positive, got {k}")));
            }
        }
        Ok(())
    }
}

/// `k = min(hx, hy)^{4/3}`, then rounded so that an integer number of steps lands on `t_final`.
pub fn time_step_rule<T: Scalar>(hx: T, hy: T, t_final: T) -> Result<TimeGrid<T>> {
    if !(hx > T::zero() && hy > T::zero()) {
        return Err(Error::Config("mesh sizes must be positive".into()));
    }
    let k = hx.min(hy).powf(T::lit(4.0 / 3.0));
    TimeGrid::from_step(t_final, k)
}

/// Time grid for a run under the configured rule.
pub fn time_grid<T: Scalar>(grid: &Grid2D<T>, cfg: &SchemeConfig, t_final: T) -> Result<TimeGrid<T>> {
    match cfg.k_rule {
        KRule::Auto => time_step_rule(grid.hx(), grid.hy(), t_final),
        KRule::Explicit(k) => TimeGrid::from_step(t_final, T::lit(k)),
    }
}

/// Sets the layers `{0, 1, M-1, M}` of `field` at time `t`.
pub fn fill_boundary_layers<T: Scalar>(
    field: &mut Field<T>,
    t: T,
    problem: &ProblemSpec<T>,
    mode: BoundaryMode,
) -> Result<()> {
    let grid = *field.grid();
    let m = grid.m();
    let put = |field: &mut Field<T>, i: usize, j: usize, v: T| -> Result<()> {
        if !v.is_finite() {
            return Err(Error::Sampling { i, j });
        }
        field.set(i, j, v);
        Ok(())
    };
    match mode {
        BoundaryMode::Exact => {
            let exact = problem.exact.as_ref().ok_or_else(|| {
                Error::Config(format!(
                    "boundary mode 'exact' needs an exact solution, which problem '{}' lacks",
                    problem.name
                ))
            })?;
            for i in 0..=m {
                for j in 0..=m {
                    if grid.is_layer(i) || grid.is_layer(j) {
                        put(field, i, j, exact(grid.x(i), grid.y(j), t))?;
                    }
                }
            }
        }
        BoundaryMode::PaperCopy => {
            let g = problem.g.as_ref();
            for s in 0..=m {
                put(field, 0, s, g(grid.x(0), grid.y(s), t))?;
                put(field, m, s, g(grid.x(m), grid.y(s), t))?;
                put(field, s, 0, g(grid.x(s), grid.y(0), t))?;
                put(field, s, m, g(grid.x(s), grid.y(m), t))?;
            }
            for j in 0..=m {
                let (a, b) = (field.get(0, j), field.get(m, j));
                field.set(1, j, a);
                field.set(m - 1, j, b);
            }
            for i in 0..=m {
                let (a, b) = (field.get(i, 0), field.get(i, m));
                field.set(i, 1, a);
                field.set(i, m - 1, b);
            }
        }
    }
    Ok(())
}

/// The scheme's state between full steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState<T> {
    /// Integer level `n`.
    pub n: usize,
    /// `U^{n-1/2}`
    pub half: Field<T>,
    /// `U^n`
    pub int: Field<T>,
}

/// Per-step bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// Integer level reached by the step.
    pub step: usize,
    /// Picard iterations of each implicit solve in the step.
    pub picard_iterations: Vec<usize>,
    /// Largest final relative Picard update `|dU| / (1 + |U|)`.
    pub max_residual: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy)]
struct SolveStats {
    iterations: usize,
    residual: f64,
}

/// Stepper for one problem on one grid with a fixed time step.
///
/// Line operators are factored once at construction.
pub struct Stepper<'a, T> {
    problem: &'a ProblemSpec<T>,
    grid: Grid2D<T>,
    cfg: SchemeConfig,
    k: T,
    cn_x: PentaFactorization<T>,
    cn_y: PentaFactorization<T>,
    leap_x: PentaFactorization<T>,
}

impl<'a, T: Scalar> Stepper<'a, T> {
    pub fn new(problem: &'a ProblemSpec<T>, grid: Grid2D<T>, k: T, cfg: SchemeConfig) -> Result<Self> {
        problem.validate()?;
        cfg.validate()?;
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {k}")));
        }
        let (alpha, beta, gamma) = (problem.alpha(), problem.beta(), problem.gamma());
        let theta = k / T::lit(4.0);
        let a_leap = match cfg.leapfrog_alpha {
            LeapfrogAlpha::On => alpha,
            LeapfrogAlpha::Off => T::one(),
        };
        Ok(Stepper {
            problem,
            grid,
            cfg,
            k,
            cn_x: factor(&assemble_line_operator(&grid, Axis::X, alpha, beta, gamma, theta)?)?,
            cn_y: factor(&assemble_line_operator(&grid, Axis::Y, alpha, beta, gamma, theta)?)?,
            leap_x: factor(&assemble_line_operator(&grid, Axis::X, a_leap, beta, gamma, T::zero())?)?,
        })
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    fn source(&self, axis: Axis) -> &SourceFn<T> {
        match axis {
            Axis::X => &self.problem.f1,
            Axis::Y => &self.problem.f2,
        }
    }

    /// `f_axis(x, y, t, U, D1 U)` on the interior, zero elsewhere.
    fn eval_source(&self, u: &Field<T>, t: T, axis: Axis) -> Field<T> {
        let f = self.source(axis);
        let du = wide_first(u, axis);
        let mut out = Field::zeros(self.grid);
        for i in self.grid.interior() {
            for j in self.grid.interior() {
                let v = f(self.grid.x(i), self.grid.y(j), t, u.get(i, j), du.get(i, j));
                out.set(i, j, v);
            }
        }
        out
    }

    /// `scale (gamma D2 - beta D1) u` on the interior.
    fn apply_b(&self, u: &Field<T>, axis: Axis, scale: T) -> Field<T> {
        let d2 = wide_second(u, axis);
        let d1 = wide_first(u, axis);
        let (g, b) = (scale * self.problem.gamma(), scale * self.problem.beta());
        let mut out = Field::zeros(self.grid);
        for i in self.grid.interior() {
            for j in self.grid.interior() {
                out.set(i, j, g * d2.get(i, j) - b * d1.get(i, j));
            }
        }
        out
    }

    /// Solves `op W = rhs` for the increment `W = U_next - base`, where
    /// `next` already carries the layers of `U_next`. Returns `U_next`.
    fn solve_increment(&self, fact: &PentaFactorization<T>, axis: Axis, rhs: &Field<T>, base: &Field<T>, next: &Field<T>) -> Result<Field<T>> {
        let mut w = next.sub(base)?;
        self.line_solves(fact, axis, rhs, &mut w)?;
        let mut out = next.clone();
        for i in self.grid.interior() {
            for j in self.grid.interior() {
                out.set(i, j, base.get(i, j) + w.get(i, j));
            }
        }
        Ok(out)
    }

    /// Solves `fact` along every interior line of `axis` with interior
    /// right-hand side `rhs`, using the layers of `target`; writes into `target`.
    fn line_solves(&self, fact: &PentaFactorization<T>, axis: Axis, rhs: &Field<T>, target: &mut Field<T>) -> Result<()> {
        let m = self.grid.m();
        let n = self.grid.interior_len();
        let mut line = vec![T::zero(); n];
        for across in self.grid.interior() {
            let at = |along: usize| axis.node(along, across);
            let val = |f: &Field<T>, along: usize| {
                let (i, j) = at(along);
                f.get(i, j)
            };
            let moveout = boundary_moveout(
                fact.bands(),
                [val(target, 0), val(target, 1)],
                [val(target, m - 1), val(target, m)],
            );
            for r in 0..n {
                line[r] = val(rhs, r + 2) + moveout[r];
            }
            fact.solve_in_place(&mut line)?;
            for (r, &v) in line.iter().enumerate() {
                let (i, j) = at(r + 2);
                target.set(i, j, v);
            }
        }
        Ok(())
    }

    /// Crank-Nicolson half step along `axis` from `t_from` to `t_from + k/2`.
    fn cn_step(&self, u_from: &Field<T>, t_from: T, axis: Axis) -> Result<(Field<T>, SolveStats)> {
        let p = self.problem;
        let theta = self.k / T::lit(4.0);
        let t_next = t_from + self.k / T::lit(2.0);
        let s = match self.cfg.rhs_sign {
            RhsSign::Derived => T::one(),
            RhsSign::Paper => -T::one(),
        };
        let fact = match axis {
            Axis::X => &self.cn_x,
            Axis::Y => &self.cn_y,
        };
        // Increment form: L (U_next - U_from) = (1 + s) theta B U_from + theta [f(t_from) + f(t_next)].
        let f_from = self.eval_source(u_from, t_from, axis);
        let explicit = self
            .apply_b(u_from, axis, (T::one() + s) * theta)
            .lin_comb(T::one(), &f_from, theta)?;

        let mut u_next = u_from.clone();
        fill_boundary_layers(&mut u_next, t_next, p, self.cfg.boundary_mode)?;
        let tol = T::lit(self.cfg.picard_tol);
        let mut trace = Vec::new();
        for iteration in 1..=self.cfg.picard_max_iters {
            let f_next = self.eval_source(&u_next, t_next, axis);
            let rhs = explicit.lin_comb(T::one(), &f_next, theta)?;
            let candidate = self.solve_increment(fact, axis, &rhs, u_from, &u_next)?;
            if !candidate.is_finite() {
                return Err(Error::Instability {
                    step: 0,
                    time: t_next.to_f64_lossy(),
                });
            }
            let update = l2_norm(&candidate.sub(&u_next)?);
            let scale = T::one() + l2_norm(&candidate);
            u_next = candidate;
            let rel = (update / scale).to_f64_lossy();
            trace.push(rel);
            if update <= tol * scale {
                return Ok((
                    u_next,
                    SolveStats {
                        iterations: iteration,
                        residual: rel,
                    },
                ));
            }
        }
        Err(Error::PicardDivergence {
            time: t_next.to_f64_lossy(),
            iterations: self.cfg.picard_max_iters,
            last_update: trace.last().copied().unwrap_or(f64::NAN),
            trace,
        })
    }

    /// Start-up x half step from `U^0` at `t = 0` to `U^{1/2}`.
    pub fn init_half_step(&self, u0: &Field<T>) -> Result<Field<T>> {
        self.cn_step(u0, T::zero(), Axis::X).map(|(u, _)| u)
    }

    /// Crank-Nicolson y half step from `t_from` to `t_from + k/2`.
    pub fn cn_y_step(&self, u_from: &Field<T>, t_from: T) -> Result<Field<T>> {
        self.cn_step(u_from, t_from, Axis::Y).map(|(u, _)| u)
    }

    /// Leapfrog x step from `U^{n-1/2}`, `U^n` to `U^{n+1/2}`.
    pub fn leapfrog_x_step(&self, u_half_prev: &Field<T>, u_int: &Field<T>, n: usize) -> Result<Field<T>> {
        let p = self.problem;
        let k = self.k;
        let t_n = T::from_usize_lossy(n) * k;
        // Increment form: A_x (U^{n+1/2} - U^{n-1/2}) = k B U^n + k f1(t_n, U^n).
        let f = self.eval_source(u_int, t_n, Axis::X);
        let rhs = self.apply_b(u_int, Axis::X, k).lin_comb(T::one(), &f, k)?;
        if !rhs.is_finite() {
            return Err(Error::Instability {
                step: n + 1,
                time: t_n.to_f64_lossy(),
            });
        }
        let mut next = u_half_prev.clone();
        fill_boundary_layers(&mut next, t_n + k / T::lit(2.0), p, self.cfg.boundary_mode)?;
        let next = self.solve_increment(&self.leap_x, Axis::X, &rhs, u_half_prev, &next)?;
        Ok(next)
    }

    /// Initial state `(U^{1/2}, U^1)` from `U^0`.
    pub fn start(&self, u0: &Field<T>) -> Result<(SchemeState<T>, StepDiagnostics)> {
        let clock = Instant::now();
        let (half, sx) = self.cn_step(u0, T::zero(), Axis::X)?;
        let (int, sy) = self.cn_step(&half, self.k / T::lit(2.0), Axis::Y)?;
        let diag = StepDiagnostics {
            step: 1,
            picard_iterations: vec![sx.iterations, sy.iterations],
            max_residual: sx.residual.max(sy.residual),
            wall_time: clock.elapsed().as_secs_f64(),
        };
        Ok((SchemeState { n: 1, half, int }, diag))
    }

    /// One full step: Leapfrog in x, then Crank-Nicolson in y.
    pub fn advance(&self, state: &SchemeState<T>) -> Result<(SchemeState<T>, StepDiagnostics)> {
        let clock = Instant::now();
        let n = state.n;
        let half = self.leapfrog_x_step(&state.half, &state.int, n)?;
        let t_half = (T::from_usize_lossy(n) + T::lit(0.5)) * self.k;
        let (int, sy) = self.cn_step(&half, t_half, Axis::Y).map_err(|e| with_step(e, n + 1))?;
        let diag = StepDiagnostics {
            step: n + 1,
            picard_iterations: vec![sy.iterations],
            max_residual: sy.residual,
            wall_time: clock.elapsed().as_secs_f64(),
        };
        Ok((SchemeState { n: n + 1, half, int }, diag))
    }
}

fn with_step(e: Error, step: usize) -> Error {
    match e {
        Error::Instability { time, .. } => Error::Instability { step, time },
        other => other,
    }
}

/// Norms of one integer level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelNorms {
    pub n: usize,
    pub t: f64,
    pub norm_u: Option<f64>,
    #[serde(rename = "norm_U")]
    pub norm_big_u: f64,
    pub error: Option<f64>,
    pub h2_u: Option<f64>,
    #[serde(rename = "h2_U")]
    pub h2_big_u: f64,
    pub h2_error: Option<f64>,
}

/// A stored snapshot of the numerical (and exact) solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub requested_t: T,
    pub n: usize,
    pub t: T,
    pub numerical: Field<T>,
    pub exact: Option<Field<T>>,
}

/// Maxima over integer levels of `|u|`, `|U|`, `|e|` in the discrete
/// `L2` and `H2` norms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RunMaxima {
    pub norm_u: f64,
    #[serde(rename = "norm_U")]
    pub norm_big_u: f64,
    pub error: f64,
    pub h2_u: f64,
    #[serde(rename = "h2_U")]
    pub h2_big_u: f64,
    pub h2_error: f64,
}

/// Outcome of [`run`]; `failure` is set when stepping stopped early.
#[derive(Debug)]
pub struct SolutionRecord<T> {
    pub problem: String,
    pub grid: Grid2D<T>,
    pub time: TimeGrid<T>,
    pub config: SchemeConfig,
    pub levels: Vec<LevelNorms>,
    pub maxima: RunMaxima,
    pub snapshots: Vec<Snapshot<T>>,
    /// Last integer level reached.
    pub last: Field<T>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub failure: Option<Error>,
}

impl<T: Scalar> SolutionRecord<T> {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn max_picard_iterations(&self) -> usize {
        self.diagnostics
            .iter()
            .flat_map(|d| d.picard_iterations.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// What [`run`] keeps besides the norms.
#[derive(Debug, Clone, Default)]
pub struct RunOptions<T> {
    /// Times at which to store snapshots (rounded to the nearest integer level).
    pub snapshot_times: Vec<T>,
}

struct Accumulator<'p, T> {
    problem: &'p ProblemSpec<T>,
    maxima: [RunningMax<T>; 6],
    levels: Vec<LevelNorms>,
}

impl<'p, T: Scalar> Accumulator<'p, T> {
    fn record(&mut self, n: usize, t: T, u: &Field<T>) -> Result<Option<Field<T>>> {
        let alpha = self.problem.alpha();
        let h2 = |f: &Field<T>| -> Result<T> { Ok(h2_norm(f, alpha)?.h2) };
        let nu = l2_norm(u);
        let hu = h2(u)?;
        self.maxima[1].push(nu);
        self.maxima[4].push(hu);
        let mut level = LevelNorms {
            n,
            t: t.to_f64_lossy(),
            norm_u: None,
            norm_big_u: nu.to_f64_lossy(),
            error: None,
            h2_u: None,
            h2_big_u: hu.to_f64_lossy(),
            h2_error: None,
        };
        let exact_field = match &self.problem.exact {
            Some(exact) => {
                let ex = sample(u.grid(), |x, y, t| exact(x, y, t), t)?;
                let err = ex.sub(u)?;
                let (ne, he) = (l2_norm(&ex), h2(&ex)?);
                let (nerr, herr) = (l2_norm(&err), h2(&err)?);
                self.maxima[0].push(ne);
                self.maxima[3].push(he);
                self.maxima[2].push(nerr);
                self.maxima[5].push(herr);
                level.norm_u = Some(ne.to_f64_lossy());
                level.h2_u = Some(he.to_f64_lossy());
                level.error = Some(nerr.to_f64_lossy());
                level.h2_error = Some(herr.to_f64_lossy());
                Some(ex)
            }
            None => None,
        };
        self.levels.push(level);
        Ok(exact_field)
    }

    fn maxima(&self) -> RunMaxima {
        let m = |i: usize| self.maxima[i].max().to_f64_lossy();
        RunMaxima {
            norm_u: m(0),
            norm_big_u: m(1),
            error: m(2),
            h2_u: m(3),
            h2_big_u: m(4),
            h2_error: m(5),
        }
    }
}

/// Runs the scheme from `t = 0` to the problem's final time.
///
/// Configuration errors are returned as `Err`; a numerical failure while
/// stepping yields a partial record with `failure` set.
pub fn run<T: Scalar>(
    problem: &ProblemSpec<T>,
    grid: Grid2D<T>,
    cfg: &SchemeConfig,
    options: &RunOptions<T>,
) -> Result<SolutionRecord<T>> {
    let time = time_grid(&grid, cfg, problem.t_final)?;
    let stepper = Stepper::new(problem, grid, time.k(), *cfg)?;
    let k = time.k();
    let steps = time.steps();
    let mut wanted: Vec<(T, usize)> = options
        .snapshot_times
        .iter()
        .map(|&t| {
            let n = (t / k).round().to_f64_lossy().clamp(0.0, steps as f64) as usize;
            (t, n)
        })
        .collect();
    wanted.sort_by_key(|&(_, n)| n);

    let mut acc = Accumulator {
        problem,
        maxima: Default::default(),
        levels: Vec::with_capacity(steps + 1),
    };
    let mut snapshots = Vec::new();
    let mut take = |n: usize, u: &Field<T>, exact: Option<Field<T>>| {
        for &(requested_t, _) in wanted.iter().filter(|&&(_, wn)| wn == n) {
            snapshots.push(Snapshot {
                requested_t,
                n,
                t: time.t(n),
                numerical: u.clone(),
                exact: exact.clone(),
            });
        }
    };

    let mut u0 = sample(&grid, |x, y, _| problem.u0.as_ref()(x, y), T::zero())?;
    fill_boundary_layers(&mut u0, T::zero(), problem, cfg.boundary_mode)?;
    let ex = acc.record(0, T::zero(), &u0)?;
    take(0, &u0, ex);

    let mut diagnostics = Vec::with_capacity(steps);
    let mut last = u0.clone();
    let mut failure = None;
    let mut state: Option<SchemeState<T>> = None;
    for n in 1..=steps {
        let result = match &state {
            None => stepper.start(&u0),
            Some(s) => stepper.advance(s),
        };
        match result {
            Ok((next, diag)) => {
                if !next.int.is_finite() || !next.half.is_finite() {
                    failure = Some(Error::Instability {
                        step: n,
                        time: time.t(n).to_f64_lossy(),
                    });
                    break;
                }
                debug!(
                    "step {n}/{steps}: picard {:?}, update {:.2e}",
                    diag.picard_iterations, diag.max_residual
                );
                diagnostics.push(diag);
                let ex = acc.record(n, time.t(n), &next.int)?;
                take(n, &next.int, ex);
                last = next.int.clone();
                state = Some(next);
            }
            Err(e) if e.is_numerical() => {
                warn!("run of '{}' stopped at step {n}: {e}", problem.name);
                failure = Some(with_step(e, n));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SolutionRecord {
        problem: problem.name.clone(),
        grid,
        time,
        config: *cfg,
        levels: acc.levels.clone(),
        maxima: acc.maxima(),
        snapshots,
        last,
        diagnostics,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{constant_problem, example1, zero_problem, Coefficients};
    use std::sync::Arc;

    fn coeffs(alpha: f64, beta: f64, gamma: f64) -> Coefficients<f64> {
        Coefficients { alpha, beta, gamma }
    }

    #[test]
    fn time_step_rule_examples() {
        let tg = time_step_rule(0.125f64, 0.125, 1.0).unwrap();
        assert_eq!(tg.steps(), 16);
        assert!((tg.k() - 0.0625).abs() < 1e-15);
        let tg = time_step_rule(0.5f64, 0.5, 1.0).unwrap();
        assert_eq!(tg.steps(), 3);
        assert!((tg.k() - 1.0 / 3.0).abs() < 1e-15);
        let tg = time_step_rule(0.25f64, 0.125, 1.0).unwrap();
        assert!((tg.k() - 0.0625).abs() < 1e-15);
        assert!(time_step_rule(0.0f64, 0.1, 1.0).is_err());
    }

    #[test]
    fn config_parsing_and_validation() {
        assert_eq!("paper".parse::<RhsSign>().unwrap(), RhsSign::Paper);
        assert_eq!("off".parse::<LeapfrogAlpha>().unwrap(), LeapfrogAlpha::Off);
        assert_eq!("paper-copy".parse::<BoundaryMode>().unwrap(), BoundaryMode::PaperCopy);
        assert_eq!("auto".parse::<KRule>().unwrap(), KRule::Auto);
        assert_eq!("0.01".parse::<KRule>().unwrap(), KRule::Explicit(0.01));
        assert!("-1".parse::<KRule>().is_err());
        assert!("sideways".parse::<BoundaryMode>().is_err());
        let bad = SchemeConfig {
            picard_max_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SchemeConfig {
            picard_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let json = serde_json::to_string(&SchemeConfig::default()).unwrap();
        let back: SchemeConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, SchemeConfig::default());
    }

    #[test]
    fn boundary_layers_example1() {
        let p = example1::<f64>();
        let grid = Grid2D::unit_square(8).unwrap();
        let mut f = Field::constant(grid, 7.0);
        fill_boundary_layers(&mut f, 0.0, &p, BoundaryMode::PaperCopy).unwrap();
        for i in 0..=8 {
            for j in 0..=8 {
                let expected = if grid.is_layer(i) || grid.is_layer(j) { 0.0 } else { 7.0 };
                assert_eq!(f.get(i, j), expected);
            }
        }
        let mut f = Field::zeros(grid);
        fill_boundary_layers(&mut f, 0.0, &p, BoundaryMode::Exact).unwrap();
        let pi = std::f64::consts::PI;
        for j in 0..=8 {
            let e = (pi * 0.125).sin() * (pi * grid.y(j)).sin();
            assert!((f.get(1, j) - e).abs() < 1e-15);
        }
        assert_eq!(f.get(4, 4), 0.0);
    }

    #[test]
    fn copy_rule_duplicates_outer_layers() {
        let mut p = zero_problem(coeffs(1.0, 0.0, 1.0));
        p.g = Arc::new(|x, y, t| 1.0 + x + 2.0 * y + t);
        let grid = Grid2D::unit_square(6).unwrap();
        let mut f = Field::zeros(grid);
        fill_boundary_layers(&mut f, 0.5, &p, BoundaryMode::PaperCopy).unwrap();
        for s in 2..=4 {
            assert_eq!(f.get(1, s), f.get(0, s));
            assert_eq!(f.get(5, s), f.get(6, s));
            assert_eq!(f.get(s, 1), f.get(s, 0));
            assert_eq!(f.get(s, 5), f.get(s, 6));
        }
        assert_eq!(f.get(1, 1), f.get(1, 0));
    }

    #[test]
    fn exact_mode_requires_exact_solution() {
        let mut p = zero_problem(coeffs(1.0, 0.0, 1.0));
        p.exact = None;
        let grid = Grid2D::unit_square(6).unwrap();
        let mut f = Field::zeros(grid);
        let err = fill_boundary_layers(&mut f, 0.0, &p, BoundaryMode::Exact).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = run(&p, grid, &SchemeConfig::default(), &RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn zero_data_stays_zero() {
        for sign in [RhsSign::Derived, RhsSign::Paper] {
            for mode in [BoundaryMode::Exact, BoundaryMode::PaperCopy] {
                let p = zero_problem(coeffs(0.7, 0.4, 0.9));
                let cfg = SchemeConfig {
                    rhs_sign: sign,
                    boundary_mode: mode,
                    ..Default::default()
                };
                let r = run(&p, Grid2D::unit_square(8).unwrap(), &cfg, &RunOptions::default()).unwrap();
                assert!(r.completed());
                assert_eq!(r.maxima, RunMaxima::default());
                assert!(r.last.values().iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn constants_are_preserved() {
        let p = constant_problem(coeffs(0.6, 0.0, 0.0), 2.5);
        for mode in [BoundaryMode::Exact, BoundaryMode::PaperCopy] {
            let cfg = SchemeConfig {
                boundary_mode: mode,
                ..Default::default()
            };
            let r = run(&p, Grid2D::unit_square(8).unwrap(), &cfg, &RunOptions::default()).unwrap();
            assert!(r.last.values().iter().all(|&v| v == 2.5));
            assert_eq!(r.maxima.error, 0.0);
        }
    }

    #[test]
    fn sub_steps_of_zero_problem() {
        let p = zero_problem(coeffs(1.0, 0.5, 0.5));
        let grid = Grid2D::unit_square(6).unwrap();
        let st = Stepper::new(&p, grid, 0.1, SchemeConfig::default()).unwrap();
        let z = Field::zeros(grid);
        assert_eq!(st.init_half_step(&z).unwrap(), z);
        assert_eq!(st.cn_y_step(&z, 0.05).unwrap(), z);
        assert_eq!(st.leapfrog_x_step(&z, &z, 1).unwrap(), z);
    }

    #[test]
    fn example1_first_half_step_is_accurate() {
        let p = example1::<f64>();
        let grid = Grid2D::unit_square(8).unwrap();
        let k = time_step_rule(grid.hx(), grid.hy(), 1.0).unwrap().k();
        let st = Stepper::new(&p, grid, k, SchemeConfig::default()).unwrap();
        let mut u0 = sample(&grid, |x, y, _| p.u0.as_ref()(x, y), 0.0).unwrap();
        fill_boundary_layers(&mut u0, 0.0, &p, BoundaryMode::Exact).unwrap();
        let half = st.init_half_step(&u0).unwrap();
        let exact = sample(&grid, |x, y, t| p.exact.as_ref().unwrap()(x, y, t), k / 2.0).unwrap();
        assert!(l2_norm(&half.sub(&exact).unwrap()) < 0.05);
    }

    #[test]
    fn example1_stays_bounded() {
        let p = example1::<f64>();
        let r = run(&p, Grid2D::unit_square(8).unwrap(), &SchemeConfig::default(), &RunOptions::default()).unwrap();
        assert!(r.completed());
        assert!(r.levels.iter().all(|l| l.norm_big_u <= 0.55));
        assert_eq!(r.levels.len(), r.time.steps() + 1);
    }

    #[test]
    fn picard_failure_is_reported() {
        let mut p = example1::<f64>();
        p.f1 = Arc::new(|_, _, _, u, _| u * u * 40.0);
        let cfg = SchemeConfig {
            picard_max_iters: 2,
            ..Default::default()
        };
        let r = run(&p, Grid2D::unit_square(8).unwrap(), &cfg, &RunOptions::default()).unwrap();
        match r.failure {
            Some(Error::PicardDivergence { iterations, ref trace, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(trace.len(), 2);
            }
            ref other => panic!("unexpected outcome {other:?}"),
        }
        assert_eq!(r.levels.len(), 1);
    }

    #[test]
    fn blow_up_is_reported_with_level() {
        let mut p = example1::<f64>();
        p.f1 = Arc::new(|_, _, _, u, _| if u.abs() > 0.0 { f64::NAN } else { 0.0 });
        let r = run(&p, Grid2D::unit_square(8).unwrap(), &SchemeConfig::default(), &RunOptions::default()).unwrap();
        assert!(matches!(r.failure, Some(Error::Instability { step: 1, .. })));
    }

    #[test]
    fn snapshots_at_requested_times() {
        let p = example1::<f64>();
        let opts = RunOptions {
            snapshot_times: vec![0.0, 0.5, 1.0],
        };
        let r = run(&p, Grid2D::unit_square(8).unwrap(), &SchemeConfig::default(), &opts).unwrap();
        assert_eq!(r.snapshots.len(), 3);
        assert_eq!(r.snapshots[0].n, 0);
        assert_eq!(r.snapshots[2].n, r.time.steps());
        assert_eq!(r.snapshots[2].numerical, r.last);
        assert!(r.snapshots[1].exact.is_some());
    }

    #[test]
    fn single_precision_run() {
        let p = example1::<f32>();
        let cfg = SchemeConfig {
            picard_tol: 1e-6,
            ..Default::default()
        };
        let r = run(&p, Grid2D::unit_square(8).unwrap(), &cfg, &RunOptions::default()).unwrap();
        assert!(r.completed());
        assert!(r.maxima.error < 1e-3);
    }
}
