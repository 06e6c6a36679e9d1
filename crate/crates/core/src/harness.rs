//! Convergence studies, the identity verification suite, and CSV / SVG / JSON output.

use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample, Field, Grid2D};
use crate::norms::{inner, summation_residuals, sbp_residual, l2_norm, InnerVariant};
use crate::problems::{Coefficients, ProblemSpec};
use crate::scalar::Scalar;
use crate::scheme::{run, KRule, RunOptions, SchemeConfig, Snapshot, SolutionRecord};
use crate::stencil::{wide_first_signed, wide_second, Axis, FirstDerivSign};

/// Deepest refinement level a study accepts.
pub const MAX_LEVEL: u32 = 6;

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub m: usize,
    pub h: f64,
    /// Time step actually used (0 when the level could not be set up).
    pub k: f64,
    pub steps: usize,
    pub norm_u: Option<f64>,
    #[serde(rename = "norm_U")]
    pub norm_big_u: Option<f64>,
    pub error: Option<f64>,
    pub rate: Option<f64>,
    pub h2_u: Option<f64>,
    #[serde(rename = "h2_U")]
    pub h2_big_u: Option<f64>,
    pub h2_error: Option<f64>,
    pub max_picard_iterations: usize,
    pub failure: Option<String>,
    /// The failure came from the method (blow-up, Picard divergence) rather than setup.
    pub numerical_failure: bool,
}

impl ConvergenceRow {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    fn failed(level: u32, m: usize, h: f64, message: String) -> Self {
        ConvergenceRow {
            level,
            m,
            h,
            k: 0.0,
            steps: 0,
            norm_u: None,
            norm_big_u: None,
            error: None,
            rate: None,
            h2_u: None,
            h2_big_u: None,
            h2_error: None,
            max_picard_iterations: 0,
            failure: Some(message),
            numerical_failure: false,
        }
    }

    /// Row describing a single run.
    pub fn from_single<T: Scalar>(record: &SolutionRecord<T>) -> Self {
        let level = (record.grid.m() as f64).log2().round() as u32;
        Self::from_record(level, record)
    }

    fn from_record<T: Scalar>(level: u32, record: &SolutionRecord<T>) -> Self {
        let has_exact = record.levels.first().is_some_and(|l| l.error.is_some());
        let opt = |v: f64| has_exact.then_some(v);
        let mx = record.maxima;
        ConvergenceRow {
            level,
            m: record.grid.m(),
            h: record.grid.hx().min(record.grid.hy()).to_f64_lossy(),
            k: record.time.k().to_f64_lossy(),
            steps: record.time.steps(),
            norm_u: opt(mx.norm_u),
            norm_big_u: Some(mx.norm_big_u),
            error: opt(mx.error),
            rate: None,
            h2_u: opt(mx.h2_u),
            h2_big_u: Some(mx.h2_big_u),
            h2_error: opt(mx.h2_error),
            max_picard_iterations: record.max_picard_iterations(),
            failure: record.failure.as_ref().map(|e| e.to_string()),
            numerical_failure: record.failure.as_ref().is_some_and(Error::is_numerical),
        }
    }
}

/// `log2(err_coarse / err_fine)`, or `None` unless both errors are positive.
pub fn rate(err_coarse: f64, err_fine: f64) -> Option<f64> {
    (err_coarse > 0.0 && err_fine > 0.0 && err_coarse.is_finite() && err_fine.is_finite())
        .then(|| (err_coarse / err_fine).log2())
}

/// Fills `rate` of every row from its predecessor; failed rows break the chain.
pub fn chain_rates(rows: &mut [ConvergenceRow]) {
    for r in 0..rows.len() {
        rows[r].rate = None;
        if r == 0 || !rows[r].completed() || !rows[r - 1].completed() {
            continue;
        }
        if let (Some(c), Some(f)) = (rows[r - 1].error, rows[r].error) {
            rows[r].rate = rate(c, f);
        }
    }
}

/// Runs `problem` on `M = 2^l` for every level `l` in `levels`.
///
/// Levels run concurrently; a level that cannot be set up or fails while
/// stepping yields a marked row instead of aborting the study.
pub fn convergence_study<T: Scalar>(
    problem: &ProblemSpec<T>,
    levels: RangeInclusive<u32>,
    cfg: &SchemeConfig,
) -> Result<Vec<ConvergenceRow>> {
    if levels.is_empty() || *levels.start() == 0 || *levels.end() > MAX_LEVEL {
        return Err(Error::Config(format!(
            "levels must satisfy 1 <= a <= b <= {MAX_LEVEL}, got {}..{}",
            levels.start(),
            levels.end()
        )));
    }
    problem.validate()?;
    cfg.validate()?;
    let mut rows: Vec<ConvergenceRow> = std::thread::scope(|s| {
        let handles: Vec<_> = levels
            .clone()
            .map(|l| s.spawn(move || study_level(problem, l, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence level panicked"))
            .collect()
    });
    chain_rates(&mut rows);
    Ok(rows)
}

fn study_level<T: Scalar>(problem: &ProblemSpec<T>, level: u32, cfg: &SchemeConfig) -> ConvergenceRow {
    let m = 1usize << level;
    let h = (problem.bounds[1] - problem.bounds[0]).to_f64_lossy() / m as f64;
    let outcome = problem
        .grid(m)
        .and_then(|grid| run(problem, grid, cfg, &RunOptions::default()));
    match outcome {
        Ok(record) => ConvergenceRow::from_record(level, &record),
        Err(e) => ConvergenceRow::failed(level, m, h, e.to_string()),
    }
}

/// Fixed grid, several explicit time steps; rates measure temporal order.
pub fn temporal_study<T: Scalar>(
    problem: &ProblemSpec<T>,
    m: usize,
    steps: &[f64],
    cfg: &SchemeConfig,
) -> Result<Vec<ConvergenceRow>> {
    let grid = problem.grid(m)?;
    let mut rows = Vec::with_capacity(steps.len());
    for (idx, &k) in steps.iter().enumerate() {
        let cfg = SchemeConfig {
            k_rule: KRule::Explicit(k),
            ..*cfg
        };
        let record = run(problem, grid, &cfg, &RunOptions::default())?;
        rows.push(ConvergenceRow::from_record(idx as u32, &record));
    }
    chain_rates(&mut rows);
    Ok(rows)
}

/// Outcome of one identity or consistency check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub m: usize,
    pub seed: u64,
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn render(&self) -> String {
        let mut s = format!("identity suite, M = {}, seed = {}\n", self.m, self.seed);
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{:<4} {:<32} {:>12.3e}  (threshold {:.1e})",
                if e.passed { "ok" } else { "FAIL" },
                e.name,
                e.value,
                e.threshold
            );
        }
        s
    }
}

/// Relative tolerance of the discrete identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Smallest acceptable observed order of the wide stencils.
pub const STENCIL_ORDER_MIN: f64 = 3.9;
const FIELDS_PER_SEED: usize = 4;

/// Random field vanishing on the layers `{0, 1, M-1, M}`.
pub fn random_frame_vanishing(grid: Grid2D<f64>, rng: &mut impl Rng) -> Field<f64> {
    let m = grid.m();
    Field::from_index_fn(grid, |i, j| {
        if (2..=m - 2).contains(&i) && (2..=m - 2).contains(&j) {
            rng.gen_range(-1.0..1.0)
        } else {
            0.0
        }
    })
}

/// Observed order of a stencil applied to `sin(pi x) sin(pi y)` between `M`
/// and `2M`: maximum pointwise error over the interior nodes of the coarse
/// grid, which are interior nodes of the fine grid too.
pub fn stencil_order(m: usize, axis: Axis, second: bool, sign: FirstDerivSign) -> Result<f64> {
    let pi = std::f64::consts::PI;
    let err = |refine: usize| -> Result<f64> {
        let grid = Grid2D::unit_square(m * refine)?;
        let u = sample(&grid, |x, y, _| (pi * x).sin() * (pi * y).sin(), 0.0)?;
        let d = if second { wide_second(&u, axis) } else { wide_first_signed(&u, axis, sign) };
        let mut worst = 0.0f64;
        for i in (2..=m - 2).map(|c| c * refine) {
            for j in (2..=m - 2).map(|c| c * refine) {
                let (x, y) = (grid.x(i), grid.y(j));
                let exact = match (second, axis) {
                    (true, _) => -pi * pi * (pi * x).sin() * (pi * y).sin(),
                    (false, Axis::X) => pi * (pi * x).cos() * (pi * y).sin(),
                    (false, Axis::Y) => pi * (pi * x).sin() * (pi * y).cos(),
                };
                worst = worst.max((d.get(i, j) - exact).abs());
            }
        }
        Ok(worst)
    };
    Ok(rate(err(1)?, err(2)?).unwrap_or(f64::NAN))
}

/// Checks the discrete summation identities on random frame-vanishing fields
/// and the consistency order of the wide stencils.
///
/// `sign` selects the orientation of the first-derivative stencil under test;
/// the printed orientation keeps the skew identities but is not consistent.
pub fn verify_suite(m: usize, seed: u64, sign: FirstDerivSign) -> Result<VerifyReport> {
    if m < 8 {
        return Err(Error::Config(format!("verify needs M >= 8, got {m}")));
    }
    let grid = Grid2D::unit_square(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 8];
    for _ in 0..FIELDS_PER_SEED {
        let w = random_frame_vanishing(grid, &mut rng);
        let v = random_frame_vanishing(grid, &mut rng);
        let sums = summation_residuals(&w)?;
        let (skew_x, skew_y) = (skew_self(&w, Axis::X, sign)?, skew_self(&w, Axis::Y, sign)?);
        let vals = [
            skew_x,
            skew_y,
            sums.energy_x.relative(),
            sums.energy_y.relative(),
            antisymmetry(&w, &v, Axis::X, sign)?,
            antisymmetry(&w, &v, Axis::Y, sign)?,
            sbp_residual(&w, &v, Axis::X)?.relative(),
            sbp_residual(&w, &v, Axis::Y)?.relative(),
        ];
        for (acc, v) in worst.iter_mut().zip(vals) {
            *acc = acc.max(v);
        }
    }
    let names = [
        "skew (D1x w, w) = 0",
        "skew (D1y w, w) = 0",
        "energy -(D2x w, w)",
        "energy -(D2y w, w)",
        "antisymmetry x",
        "antisymmetry y",
        "summation by parts x",
        "summation by parts y",
    ];
    let mut entries: Vec<VerifyEntry> = names
        .iter()
        .zip(worst)
        .map(|(n, v)| VerifyEntry {
            name: (*n).to_string(),
            value: v,
            threshold: IDENTITY_TOL,
            passed: v <= IDENTITY_TOL,
        })
        .collect();
    for (name, axis, second) in [
        ("order D1x", Axis::X, false),
        ("order D1y", Axis::Y, false),
        ("order D2x", Axis::X, true),
        ("order D2y", Axis::Y, true),
    ] {
        let order = stencil_order(m, axis, second, sign)?;
        entries.push(VerifyEntry {
            name: name.to_string(),
            value: order,
            threshold: STENCIL_ORDER_MIN,
            passed: order >= STENCIL_ORDER_MIN,
        });
    }
    Ok(VerifyReport { m, seed, entries })
}

fn skew_self(w: &Field<f64>, axis: Axis, sign: FirstDerivSign) -> Result<f64> {
    let d = wide_first_signed(w, axis, sign);
    let r = inner(&d, w, InnerVariant::Plain)?.abs();
    Ok(r / (1.0 + l2_norm(&d) * l2_norm(w)))
}

fn antisymmetry(w: &Field<f64>, v: &Field<f64>, axis: Axis, sign: FirstDerivSign) -> Result<f64> {
    let (dw, dv) = (wide_first_signed(w, axis, sign), wide_first_signed(v, axis, sign));
    let r = (inner(&dw, v, InnerVariant::Plain)? + inner(&dv, w, InnerVariant::Plain)?).abs();
    Ok(r / (1.0 + l2_norm(&dw) * l2_norm(v) + l2_norm(&dv) * l2_norm(w)))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Serialize)]
struct TableRecord {
    h: f64,
    k: f64,
    norm_u: Option<f64>,
    #[serde(rename = "norm_U")]
    norm_big_u: Option<f64>,
    error: Option<f64>,
    rate: Option<f64>,
}

/// Column names of a convergence table.
pub const TABLE_HEADER: [&str; 6] = ["h", "k", "norm_u", "norm_U", "error", "rate"];
/// Column names of a solution slice.
pub const SOLUTION_HEADER: [&str; 5] = ["x", "y", "u", "U", "e"];

fn write_csv<R: Serialize>(path: &Path, header: &[&str], records: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `h,k,norm_u,norm_U,error,rate`; absent values are blank.
pub fn emit_csv(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    write_csv(
        path,
        &TABLE_HEADER,
        rows.iter().map(|r| TableRecord {
            h: r.h,
            k: r.k,
            norm_u: r.norm_u,
            norm_big_u: r.norm_big_u,
            error: r.error,
            rate: r.rate,
        }),
    )
}

/// Writes `x,y,u,U,e` for every node of a snapshot.
pub fn emit_solution_csv<T: Scalar>(snapshot: &Snapshot<T>, path: &Path) -> Result<()> {
    let grid = *snapshot.numerical.grid();
    let mut records = Vec::with_capacity(grid.nodes() * grid.nodes());
    for i in 0..=grid.m() {
        for j in 0..=grid.m() {
            let big_u = snapshot.numerical.get(i, j).to_f64_lossy();
            let u = snapshot.exact.as_ref().map(|e| e.get(i, j).to_f64_lossy());
            records.push((
                grid.x(i).to_f64_lossy(),
                grid.y(j).to_f64_lossy(),
                u,
                big_u,
                u.map(|u| u - big_u),
            ));
        }
    }
    write_csv(path, &SOLUTION_HEADER, records)
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const PAD: f64 = 60.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        SVG_W / 2.0,
        xml_escape(title)
    )
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log chart of `log2(1/h)` against `log2(error)` with a slope `-8/3` guide.
pub fn emit_svg(rows: &[ConvergenceRow], title: &str, path: &Path) -> Result<()> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| match r.error {
            Some(e) if e > 0.0 && r.completed() => Some(((1.0 / r.h).log2(), e.log2())),
            _ => None,
        })
        .collect();
    let mut s = svg_open(title);
    if pts.is_empty() {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\">no positive errors</text>",
            SVG_W / 2.0,
            SVG_H / 2.0
        );
    } else {
        let (x0, y_anchor) = pts[0];
        let guide: Vec<(f64, f64)> = pts.iter().map(|&(x, _)| (x, y_anchor - 8.0 / 3.0 * (x - x0))).collect();
        let all = pts.iter().chain(&guide);
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in all {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        if xmax - xmin < 1e-9 {
            xmin -= 0.5;
            xmax += 0.5;
        }
        if ymax - ymin < 1e-9 {
            ymin -= 0.5;
            ymax += 0.5;
        }
        let sx = |x: f64| PAD + (x - xmin) / (xmax - xmin) * (SVG_W - 2.0 * PAD);
        let sy = |y: f64| SVG_H - PAD - (y - ymin) / (ymax - ymin) * (SVG_H - 2.0 * PAD);
        let poly = |p: &[(f64, f64)]| {
            p.iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            s,
            "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            SVG_W - 2.0 * PAD,
            SVG_H - 2.0 * PAD
        );
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>",
            poly(&guide)
        );
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"blue\" stroke-width=\"2\"/>", poly(&pts));
        for &(x, y) in &pts {
            let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"blue\"/>", sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log2(1/h)</text>",
            SVG_W / 2.0,
            SVG_H - 20.0
        );
        let _ = writeln!(
            s,
            "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 20 {})\">log2(error)</text>",
            SVG_H / 2.0,
            SVG_H / 2.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"gray\">slope -8/3</text>",
            SVG_W - PAD - 80.0,
            PAD + 16.0
        );
        for &(x, y) in pts.iter() {
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\">{:.2}</text>",
                sx(x) + 6.0,
                sy(y) - 6.0,
                y
            );
        }
    }
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(io_err(path))
}

/// Heatmap of a snapshot: numerical solution, or the error when `error` is set
/// and the exact solution is known.
pub fn emit_svg_heatmap<T: Scalar>(snapshot: &Snapshot<T>, error: bool, title: &str, path: &Path) -> Result<()> {
    let grid = *snapshot.numerical.grid();
    let m = grid.m();
    let value = |i: usize, j: usize| -> f64 {
        let big_u = snapshot.numerical.get(i, j).to_f64_lossy();
        match (&snapshot.exact, error) {
            (Some(e), true) => e.get(i, j).to_f64_lossy() - big_u,
            _ => big_u,
        }
    };
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for i in 0..=m {
        for j in 0..=m {
            lo = lo.min(value(i, j));
            hi = hi.max(value(i, j));
        }
    }
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let side = (SVG_H - 2.0 * PAD).min(SVG_W - 2.0 * PAD);
    let cell = side / (m + 1) as f64;
    let mut s = svg_open(title);
    for i in 0..=m {
        for j in 0..=m {
            let a = (value(i, j) - lo) / span;
            let (r, b) = ((255.0 * a).round() as u8, (255.0 * (1.0 - a)).round() as u8);
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},0,{b})\"/>",
                PAD + i as f64 * cell,
                PAD + (m - j) as f64 * cell,
                cell,
                cell
            );
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">min {lo:.4e}  max {hi:.4e}  t = {:.4}</text>",
        PAD,
        SVG_H - 20.0,
        snapshot.t.to_f64_lossy()
    );
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(io_err(path))
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub problem: String,
    pub coefficients: [f64; 3],
    pub t_final: f64,
    /// Subdivisions per level (one entry for a single solve).
    pub grid_sizes: Vec<usize>,
    pub k: Vec<f64>,
    pub config: SchemeConfig,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new<T: Scalar>(command: &str, problem: &ProblemSpec<T>, config: SchemeConfig) -> Self {
        let Coefficients { alpha, beta, gamma } = problem.coeffs;
        RunManifest {
            command: command.to_string(),
            problem: problem.name.clone(),
            coefficients: [alpha, beta, gamma].map(|v| v.to_f64_lossy()),
            t_final: problem.t_final.to_f64_lossy(),
            grid_sizes: Vec::new(),
            k: Vec::new(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(path, text + "\n").map_err(io_err(path))
    }
}

/// `<stem>.manifest.json` next to an output file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    output.with_file_name(format!("{stem}.manifest.json"))
}

/// Plain-text rendering of a convergence table.
pub fn render_table(rows: &[ConvergenceRow]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
    let mut s = format!(
        "{:>5} {:>10} {:>10} {:>11} {:>11} {:>11} {:>7} {:>6}\n",
        "level", "h", "k", "|||u|||", "|||U|||", "|||e|||", "rate", "picard"
    );
    for r in rows {
        let _ = write!(
            s,
            "{:>5} {:>10.4e} {:>10.4e} {:>11} {:>11} {:>11} {:>7} {:>6}",
            r.level,
            r.h,
            r.k,
            fmt(r.norm_u),
            fmt(r.norm_big_u),
            fmt(r.error),
            r.rate.map_or_else(|| "-".to_string(), |v| format!("{v:.4}")),
            r.max_picard_iterations
        );
        if let Some(f) = &r.failure {
            let _ = write!(s, "  [failed: {f}]");
        }
        s.push('\n');
    }
    s
}
