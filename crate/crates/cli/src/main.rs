mod args;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use log::{info, warn};
use sobolev_split::harness::{
    convergence_study, emit_csv, emit_solution_csv, emit_svg, emit_svg_heatmap, manifest_path, render_table,
    verify_suite, ConvergenceRow, RunManifest,
};
use sobolev_split::scheme::{run, RunOptions};
use sobolev_split::{Error, FirstDerivSign, Result};

use args::{Cli, Command, ConvergenceArgs, SolveArgs, VerifyArgs};
use config::{parse_levels, problem, scheme_config, FileConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        EXIT_IO
    } else if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::PicardDivergence { trace, .. } = &e {
                eprintln!("picard updates: {trace:?}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Solve(a) => solve(a, &file),
        Command::Convergence(a) => convergence(a, &file),
        Command::Verify(a) => verify(a, &file),
    }
}

fn write_manifest(mut manifest: RunManifest, primary: &Path, outputs: Vec<PathBuf>) -> Result<()> {
    manifest.outputs = outputs;
    let path = manifest_path(primary);
    manifest.write(&path)?;
    info!("manifest written to {}", path.display());
    Ok(())
}

fn solve(a: &SolveArgs, file: &FileConfig) -> Result<u8> {
    let p = problem(&a.scheme, file)?;
    let cfg = scheme_config(&a.scheme, file)?;
    let m = a
        .m
        .or(file.m)
        .ok_or_else(|| Error::Config("grid size missing (use --M)".into()))?;
    let grid = p.grid(m)?;
    let dump = match &a.dump_at {
        Some(v) => {
            let t: f64 = v[0]
                .parse()
                .map_err(|_| Error::Config(format!("invalid dump time '{}'", v[0])))?;
            Some((t, PathBuf::from(&v[1])))
        }
        None => None,
    };
    let opts = RunOptions {
        snapshot_times: vec![dump.as_ref().map_or(p.t_final, |d| d.0)],
    };
    let record = run(&p, grid, &cfg, &opts)?;
    let mx = record.maxima;
    println!("problem {}  M = {}  k = {:.6e}  N = {}", p.name, m, record.time.k(), record.time.steps());
    if record.levels.first().is_some_and(|l| l.error.is_some()) {
        println!("|||u|||_2 = {:.6e}  |||U|||_2 = {:.6e}  |||e|||_2 = {:.6e}", mx.norm_u, mx.norm_big_u, mx.error);
        println!("|||u|||_H2 = {:.6e}  |||U|||_H2 = {:.6e}  |||e|||_H2 = {:.6e}", mx.h2_u, mx.h2_big_u, mx.h2_error);
    } else {
        println!("|||U|||_2 = {:.6e}  |||U|||_H2 = {:.6e}", mx.norm_big_u, mx.h2_big_u);
    }
    println!("max picard iterations {}", record.max_picard_iterations());

    let mut outputs = Vec::new();
    if let Some(out) = a.out.clone().or_else(|| file.out.clone()) {
        let mut row = vec![ConvergenceRow::from_single(&record)];
        row[0].rate = None;
        emit_csv(&row, &out)?;
        outputs.push(out);
    }
    let snapshot = record.snapshots.first();
    if let (Some((_, path)), Some(s)) = (&dump, snapshot) {
        emit_solution_csv(s, path)?;
        outputs.push(path.clone());
    }
    if let (Some(svg), Some(s)) = (a.svg.clone().or_else(|| file.svg.clone()), snapshot) {
        emit_svg_heatmap(s, false, &format!("{} U at t = {:.4}", p.name, s.t), &svg)?;
        outputs.push(svg);
    }
    if let Some(primary) = outputs.first().cloned() {
        let mut manifest = RunManifest::new("solve", &p, cfg);
        manifest.grid_sizes.push(m);
        manifest.k.push(record.time.k());
        write_manifest(manifest, &primary, outputs)?;
    }
    match record.failure {
        Some(e) => {
            eprintln!("run stopped early: {e}");
            Ok(exit_code(&e))
        }
        None => Ok(0),
    }
}

fn convergence(a: &ConvergenceArgs, file: &FileConfig) -> Result<u8> {
    let p = problem(&a.scheme, file)?;
    let cfg = scheme_config(&a.scheme, file)?;
    let spec = a
        .levels
        .clone()
        .or_else(|| file.levels.clone())
        .ok_or_else(|| Error::Config("level range missing (use --levels a..b)".into()))?;
    let (lo, hi) = parse_levels(&spec)?;
    let rows = convergence_study(&p, lo..=hi, &cfg)?;
    print!("{}", render_table(&rows));

    let mut outputs = Vec::new();
    if let Some(out) = a.out.clone().or_else(|| file.out.clone()) {
        emit_csv(&rows, &out)?;
        outputs.push(out);
    }
    if let Some(svg) = a.svg.clone().or_else(|| file.svg.clone()) {
        emit_svg(&rows, &format!("{} convergence", p.name), &svg)?;
        outputs.push(svg);
    }
    if let Some(primary) = outputs.first().cloned() {
        let mut manifest = RunManifest::new("convergence", &p, cfg);
        manifest.grid_sizes = rows.iter().map(|r| r.m).collect();
        manifest.k = rows.iter().map(|r| r.k).collect();
        write_manifest(manifest, &primary, outputs)?;
    }
    for r in rows.iter().filter(|r| !r.completed()) {
        warn!("level {} failed: {}", r.level, r.failure.as_deref().unwrap_or(""));
    }
    Ok(if rows.iter().any(|r| r.numerical_failure) { EXIT_NUMERICAL } else { 0 })
}

fn verify(a: &VerifyArgs, file: &FileConfig) -> Result<u8> {
    let m = a.m.or(file.m).unwrap_or(12);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let sign = if a.printed_sign { FirstDerivSign::AsPrinted } else { FirstDerivSign::Consistent };
    let report = verify_suite(m, seed, sign)?;
    print!("{}", report.render());
    Ok(if report.passed() { 0 } else { EXIT_NUMERICAL })
}
