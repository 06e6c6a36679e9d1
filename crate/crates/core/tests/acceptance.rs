//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL` line with the measured quantities.
//!
//! Benchmark studies are computed once per test binary and shared between
//! the criteria that read them.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{max_abs, max_diff, LinearCase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobolev_split::grid::{Field, Grid2D};
use sobolev_split::harness::{
    convergence_study, emit_csv, random_frame_vanishing, render_table, stencil_order, temporal_study,
    ConvergenceRow,
};
use sobolev_split::norms::{antisymmetry_residual, summation_residuals, sbp_residual};
use sobolev_split::problems::{constant_problem, example1, example2, example3, zero_problem, Coefficients};
use sobolev_split::scheme::{fill_boundary_layers, run, BoundaryMode, LeapfrogAlpha, RhsSign, RunOptions, SchemeConfig, Stepper};
use sobolev_split::stencil::{Axis, FirstDerivSign};

fn report(n: u32, title: &str, passed: bool, details: &[String]) {
    println!("criterion {n}: {} ({title})", if passed { "PASS" } else { "FAIL" });
    for d in details {
        println!("    {d}");
    }
}

fn check(details: &mut Vec<String>, ok: bool, what: String) -> bool {
    details.push(format!("[{}] {what}", if ok { "ok" } else { "x" }));
    ok
}

fn derived() -> SchemeConfig {
    SchemeConfig {
        rhs_sign: RhsSign::Derived,
        leapfrog_alpha: LeapfrogAlpha::On,
        boundary_mode: BoundaryMode::Exact,
        ..Default::default()
    }
}

struct Study {
    rows: Vec<ConvergenceRow>,
    elapsed: Duration,
}

fn study(which: usize) -> &'static Study {
    static CELLS: [OnceLock<Study>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CELLS[which].get_or_init(|| {
        let problem = match which {
            0 => example1::<f64>(),
            1 => example2(),
            _ => example3(),
        };
        let clock = Instant::now();
        let rows = convergence_study(&problem, 1..=4, &derived()).expect("study setup");
        Study {
            rows,
            elapsed: clock.elapsed(),
        }
    })
}

fn row(rows: &[ConvergenceRow], level: u32) -> &ConvergenceRow {
    rows.iter().find(|r| r.level == level).expect("level present")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4e}"))
}

/// Every level completed and each error is below the previous one.
fn monotone(rows: &[ConvergenceRow], details: &mut Vec<String>) -> bool {
    let errors: Vec<Option<f64>> = rows.iter().map(|r| if r.completed() { r.error } else { None }).collect();
    let ok = errors.iter().all(Option::is_some)
        && errors.windows(2).all(|w| w[1].unwrap() < w[0].unwrap());
    let listed: Vec<String> = rows.iter().map(|r| format!("l={}: {}", r.level, fmt_opt(r.error))).collect();
    check(details, ok, format!("errors decrease monotonically over levels 1..4: {}", listed.join(", ")))
}

fn rates_in(rows: &[ConvergenceRow], levels: std::ops::RangeInclusive<u32>, lo: f64, hi: f64, details: &mut Vec<String>) -> bool {
    let mut all = true;
    for l in levels {
        let r = row(rows, l).rate;
        let ok = r.is_some_and(|r| (lo..=hi).contains(&r));
        all &= check(details, ok, format!("rate at level {l} = {} in [{lo}, {hi}]", r.map_or("undefined".into(), |r| format!("{r:.4}"))));
    }
    all
}

fn within_factor(value: Option<f64>, reference: f64, factor: f64) -> bool {
    value.is_some_and(|v| v > 0.0 && v <= reference * factor && v >= reference / factor)
}

/// Summation identities on random frame-vanishing fields.
#[test]
fn criterion_01_discrete_identities() {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    for m in [8usize, 12, 16] {
        let grid = Grid2D::unit_square(m).unwrap();
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_frame_vanishing(grid, &mut rng);
            let v = random_frame_vanishing(grid, &mut rng);
            worst = worst.max(summation_residuals(&w).unwrap().max_relative());
            for axis in Axis::BOTH {
                worst = worst.max(antisymmetry_residual(&w, &v, axis).unwrap().relative());
                worst = worst.max(sbp_residual(&w, &v, axis).unwrap().relative());
            }
        }
    }
    let elapsed = clock.elapsed();
    let mut d = Vec::new();
    let a = check(&mut d, worst <= 1e-12, format!("max relative residual {worst:.3e} <= 1e-12"));
    let b = check(&mut d, elapsed < Duration::from_secs(1), format!("runtime {elapsed:.2?} < 1 s"));
    report(1, "discrete identities", a && b, &d);
    assert!(a && b);
}

/// Truncation order of the wide stencils.
#[test]
fn criterion_02_stencil_consistency() {
    let clock = Instant::now();
    let mut d = Vec::new();
    let mut all = true;
    for m in [8usize, 16] {
        for (name, axis, second) in [("D1x", Axis::X, false), ("D1y", Axis::Y, false), ("D2x", Axis::X, true), ("D2y", Axis::Y, true)] {
            let order = stencil_order(m, axis, second, FirstDerivSign::Consistent).unwrap();
            all &= check(&mut d, order >= 3.9, format!("{name} order M={m}->{}: {order:.4} >= 3.9", 2 * m));
        }
    }
    let elapsed = clock.elapsed();
    all &= check(&mut d, elapsed < Duration::from_secs(1), format!("runtime {elapsed:.2?} < 1 s"));
    report(2, "stencil consistency", all, &d);
    assert!(all);
}

/// Every sub-step against the dense constrained-system oracle.
#[test]
fn criterion_03_dense_oracle_equivalence() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    let mut worst = [0.0f64; 4];
    for _ in 0..20 {
        let case = LinearCase::random(&mut rng, 6);
        let sign = if rng.gen_bool(0.5) { RhsSign::Derived } else { RhsSign::Paper };
        let lf = if rng.gen_bool(0.5) { LeapfrogAlpha::On } else { LeapfrogAlpha::Off };
        let cfg = SchemeConfig {
            rhs_sign: sign,
            leapfrog_alpha: lf,
            ..Default::default()
        };
        let s = if sign == RhsSign::Derived { 1.0 } else { -1.0 };
        let a = if lf == LeapfrogAlpha::On { case.alpha } else { 1.0 };
        let k = rng.gen_range(0.02..0.2);
        let p = case.problem();
        let grid = case.grid();
        let st = Stepper::new(&p, grid, k, cfg).unwrap();
        let mut field = |t: f64| {
            let mut f = Field::from_index_fn(grid, |_, _| rng.gen_range(-1.0..1.0));
            fill_boundary_layers(&mut f, t, &p, BoundaryMode::Exact).unwrap();
            f
        };
        let rel = |got: &Field<f64>, want: &[f64]| max_diff(got.values(), want) / (1.0 + max_abs(want));

        let u0 = field(0.0);
        let s1 = st.init_half_step(&u0).unwrap();
        worst[0] = worst[0].max(rel(&s1, &case.cn_step(u0.values(), Axis::X, 0.0, k, s)));
        let s2 = st.cn_y_step(&s1, 0.5 * k).unwrap();
        worst[1] = worst[1].max(rel(&s2, &case.cn_step(s1.values(), Axis::Y, 0.5 * k, k, s)));
        let s3 = st.leapfrog_x_step(&s1, &s2, 1).unwrap();
        worst[2] = worst[2].max(rel(&s3, &case.leapfrog(s1.values(), s2.values(), k, k, a)));
        let s4 = st.cn_y_step(&s3, 1.5 * k).unwrap();
        worst[3] = worst[3].max(rel(&s4, &case.cn_step(s3.values(), Axis::Y, 1.5 * k, k, s)));
    }
    let elapsed = clock.elapsed();
    let mut d = Vec::new();
    let mut all = true;
    for (name, w) in ["x half step", "y half step", "leapfrog x step", "y step"].iter().zip(worst) {
        all &= check(&mut d, w <= 1e-11, format!("{name}: max relative deviation {w:.3e} <= 1e-11"));
    }
    all &= check(&mut d, elapsed < Duration::from_secs(5), format!("runtime {elapsed:.2?} < 5 s"));
    report(3, "dense oracle equivalence", all, &d);
    assert!(all);
}

/// Example 1 convergence table.
#[test]
fn criterion_04_example1_convergence() {
    let s = study(0);
    let rows = &s.rows;
    let mut d = vec![format!("table:\n{}", render_table(rows))];
    let mut all = monotone(rows, &mut d);
    all &= rates_in(rows, 2..=4, 2.3, 3.0, &mut d);
    let e3 = row(rows, 3).error;
    all &= check(&mut d, within_factor(e3, 2.7873e-4, 5.0), format!("error at h=1/8 = {} within factor 5 of 2.7873e-4", fmt_opt(e3)));
    for r in rows {
        let ok = r.norm_big_u.is_some_and(|u| (u - 0.5).abs() <= 0.02);
        all &= check(&mut d, ok, format!("level {}: |||U||| = {} within 0.02 of 0.5", r.level, fmt_opt(r.norm_big_u)));
    }
    all &= check(&mut d, s.elapsed < Duration::from_secs(30), format!("runtime {:.2?} < 30 s", s.elapsed));
    report(4, "example 1 convergence", all, &d);
    assert!(all);
}

/// Example 2 convergence table.
#[test]
fn criterion_05_example2_convergence() {
    let s = study(1);
    let rows = &s.rows;
    let mut d = vec![format!("table:\n{}", render_table(rows))];
    let mut all = rates_in(rows, 2..=4, 2.3, 3.0, &mut d);
    for (l, reference) in [(2, 1.2343e-2), (3, 2.0011e-3), (4, 3.1674e-4)] {
        let e = row(rows, l).error;
        all &= check(&mut d, within_factor(e, reference, 5.0), format!("level {l}: error {} within factor 5 of {reference:.4e}", fmt_opt(e)));
    }
    all &= check(&mut d, s.elapsed < Duration::from_secs(30), format!("runtime {:.2?} < 30 s", s.elapsed));
    report(5, "example 2 convergence", all, &d);
    assert!(all);
}

/// Example 3 convergence table.
#[test]
fn criterion_06_example3_convergence() {
    let s = study(2);
    let rows = &s.rows;
    let mut d = vec![format!("table:\n{}", render_table(rows))];
    let mut all = monotone(rows, &mut d);
    all &= rates_in(rows, 2..=4, 2.0, 3.0, &mut d);
    let reference = [(2, 2.5739), (3, 2.6097), (4, 2.6324)];
    for (l, r) in reference {
        d.push(format!("reference rate at level {l}: {r}; observed {}", fmt_opt(row(rows, l).rate)));
    }
    let blow_up: Vec<String> = rows
        .iter()
        .filter(|r| r.numerical_failure)
        .map(|r| format!("level {}: {}", r.level, r.failure.as_deref().unwrap_or("")))
        .collect();
    all &= check(&mut d, blow_up.is_empty(), format!("no blow-up at any level {blow_up:?}"));
    report(6, "example 3 convergence", all, &d);
    assert!(all);
}

/// Second order in time at fixed h.
#[test]
fn criterion_07_temporal_order() {
    let rows = temporal_study(&example1::<f64>(), 32, &[0.125, 0.0625, 0.03125], &derived()).unwrap();
    let mut d = vec![format!("table:\n{}", render_table(&rows))];
    let mut all = true;
    for r in rows.iter().skip(1) {
        all &= check(
            &mut d,
            r.rate.is_some_and(|v| (1.7..=2.3).contains(&v)),
            format!("k = {}: temporal rate {} in [1.7, 2.3]", r.k, fmt_opt(r.rate)),
        );
    }
    report(7, "temporal order", all, &d);
    assert!(all);
}

/// H2 boundedness on the benchmark runs, zero data and constant preservation.
#[test]
fn criterion_08_stability() {
    let mut d = Vec::new();
    let mut all = true;
    for (which, name) in ["example 1", "example 2", "example 3"].iter().enumerate() {
        for r in study(which).rows.iter().filter(|r| r.completed()) {
            let (hu, hbig) = (r.h2_u.unwrap(), r.h2_big_u.unwrap());
            all &= check(&mut d, hbig <= hu + 1.0, format!("{name} level {}: |||U|||_H2 = {hbig:.4} <= |||u|||_H2 + 1 = {:.4}", r.level, hu + 1.0));
        }
    }
    let coeffs = Coefficients {
        alpha: 0.8,
        beta: 0.6,
        gamma: 0.4,
    };
    for sign in [RhsSign::Derived, RhsSign::Paper] {
        for mode in [BoundaryMode::Exact, BoundaryMode::PaperCopy] {
            let cfg = SchemeConfig {
                rhs_sign: sign,
                boundary_mode: mode,
                ..Default::default()
            };
            let r = run(&zero_problem(coeffs), Grid2D::unit_square(16).unwrap(), &cfg, &RunOptions::default()).unwrap();
            let zero = r.completed() && r.maxima.norm_big_u == 0.0 && r.last.values().iter().all(|&v| v == 0.0);
            all &= check(&mut d, zero, format!("zero data stays exactly zero ({sign:?}, {mode:?})"));
        }
    }
    let steady = Coefficients {
        alpha: 0.8,
        beta: 0.0,
        gamma: 0.0,
    };
    let r = run(&constant_problem(steady, 1.75), Grid2D::unit_square(16).unwrap(), &derived(), &RunOptions::default()).unwrap();
    let dev = r.last.values().iter().map(|v: &f64| (v - 1.75).abs()).fold(0.0, f64::max).max(r.maxima.error);
    all &= check(&mut d, r.completed() && dev == 0.0, format!("constant preserved exactly: max deviation {dev:.3e}"));
    report(8, "stability", all, &d);
    assert!(all);
}

/// The printed sign of the explicit term degrades the observed rate.
#[test]
fn criterion_09_sign_discrimination() {
    let printed = SchemeConfig {
        rhs_sign: RhsSign::Paper,
        ..derived()
    };
    let rows = convergence_study(&example1::<f64>(), 2..=3, &printed).unwrap();
    let printed_rate = row(&rows, 3).rate;
    let derived_rate = row(&study(0).rows, 3).rate;
    let mut d = vec![format!("table (printed sign):\n{}", render_table(&rows))];
    let ok = matches!((printed_rate, derived_rate), (Some(p), Some(q)) if p < q);
    check(&mut d, ok, format!("rate at level 3: printed sign {} < derived sign {}", fmt_opt(printed_rate), fmt_opt(derived_rate)));
    report(9, "sign discrimination", ok, &d);
    assert!(ok);
}

/// Repeated studies write byte-identical tables.
#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for rep in 0..2 {
        let rows = convergence_study(&example1::<f64>(), 1..=4, &derived()).unwrap();
        let path = dir.path().join(format!("rep{rep}.csv"));
        emit_csv(&rows, &path).unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    let same = bytes[0] == bytes[1];
    let d = vec![format!("[{}] two studies, {} bytes each, identical", if same { "ok" } else { "x" }, bytes[0].len())];
    report(10, "determinism", same, &d);
    assert!(same);
}
