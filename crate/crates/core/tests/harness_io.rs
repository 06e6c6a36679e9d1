use std::fs;

use sobolev_split::harness::{convergence_study, emit_csv, emit_solution_csv, emit_svg_heatmap, rate, TABLE_HEADER};
use sobolev_split::problems::{example1, example3};
use sobolev_split::scheme::{run, RunOptions, SchemeConfig};
use sobolev_split::Grid;

#[test]
fn tables_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let p = example1::<f64>();
    let mut files = Vec::new();
    for rep in 0..2 {
        let rows = convergence_study(&p, 1..=5, &SchemeConfig::default()).unwrap();
        let path = dir.path().join(format!("{rep}.csv"));
        emit_csv(&rows, &path).unwrap();
        files.push(fs::read(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn rates_recomputed_from_csv_match() {
    let dir = tempfile::tempdir().unwrap();
    let rows = convergence_study(&example1::<f64>(), 2..=5, &SchemeConfig::default()).unwrap();
    let path = dir.path().join("t.csv");
    emit_csv(&rows, &path).unwrap();
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap(), TABLE_HEADER.as_slice());
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 4);
    assert_eq!(&records[0][5], "");
    for w in records.windows(2) {
        let coarse: f64 = w[0][4].parse().unwrap();
        let fine: f64 = w[1][4].parse().unwrap();
        let emitted: f64 = w[1][5].parse().unwrap();
        assert!((rate(coarse, fine).unwrap() - emitted).abs() <= 1e-12);
    }
}

#[test]
fn solution_slices() {
    let dir = tempfile::tempdir().unwrap();
    let p = example3::<f64>();
    let opts = RunOptions {
        snapshot_times: vec![0.5],
    };
    let r = run(&p, Grid::unit_square(8).unwrap(), &SchemeConfig::default(), &opts).unwrap();
    let snap = &r.snapshots[0];
    let path = dir.path().join("s.csv");
    emit_solution_csv(snap, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,u,U,e"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 81);
    for row in &rows {
        assert!((row[2] - row[3] - row[4]).abs() <= 1e-15);
    }
    let svg = dir.path().join("s.svg");
    emit_svg_heatmap(snap, true, "error", &svg).unwrap();
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<rect").count(), 82);
}
