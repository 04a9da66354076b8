//! CSV emission and parsing for benchmark records, plus grouped plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::gen::ProblemKind;
use crate::suite::{summarize, BenchRecord};

pub const CSV_HEADER: &str =
    "d,ell,solver,accelerated,trial,seed,wall_time,outer_iters,inner_iters,result_value";

/// Renders records in the fixed column layout. Failed runs carry NaN in
/// `result_value`.
pub fn render_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.d,
            r.ell,
            r.solver,
            r.accelerated,
            r.trial,
            r.seed,
            r.wall_time,
            r.outer_iters,
            r.inner_iters,
            r.result_value,
        );
    }
    out
}

pub fn emit_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), render_csv(records))
        .with_context(|| format!("writing {}", path.as_ref().display()))
}

/// Parses records back from the CSV layout (the `kind` column is not part
/// of the format; parsed records default to the nearest kind).
pub fn parse_csv(content: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = content.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => bail!("unexpected CSV header: {other:?}"),
    }
    let mut records = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            bail!("line {}: expected 10 fields, found {}", no + 2, f.len());
        }
        records.push(BenchRecord {
            kind: ProblemKind::Nearest,
            d: f[0].parse()?,
            ell: f[1].parse()?,
            solver: f[2].to_string(),
            accelerated: f[3].parse()?,
            trial: f[4].parse()?,
            seed: f[5].parse()?,
            wall_time: f[6].parse()?,
            outer_iters: f[7].parse()?,
            inner_iters: f[8].parse()?,
            final_criterion_value: f64::NAN,
            result_value: f[9].parse()?,
            error: None,
        });
    }
    Ok(records)
}

/// Emits per-`(d, solver, mode)` mean-time series over `ell`, one row per
/// point of the series.
pub fn render_plotdata(records: &[BenchRecord]) -> String {
    let mut out = String::from("d,solver,accelerated,ell,mean_wall_time,mean_outer_iters,runs\n");
    for c in summarize(records) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.d, c.solver, c.accelerated, c.ell, c.mean_wall_time, c.mean_outer_iters, c.runs,
        );
    }
    out
}

pub fn emit_plotdata(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path.as_ref(), render_plotdata(records))
        .with_context(|| format!("writing {}", path.as_ref().display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(trial: usize, value: f64) -> BenchRecord {
        BenchRecord {
            kind: ProblemKind::Nearest,
            d: 3,
            ell: 100,
            solver: "qp".into(),
            accelerated: true,
            trial,
            seed: 42 + trial as u64,
            wall_time: 0.125,
            outer_iters: 6,
            inner_iters: 31,
            final_criterion_value: -1e-6,
            result_value: value,
            error: None,
        }
    }

    #[test]
    fn single_record_gives_two_lines() {
        let csv = render_csv(&[record(0, 0.99)]);
        assert_eq!(csv.trim().lines().count(), 2);
        assert!(csv.starts_with(CSV_HEADER));
    }

    #[test]
    fn round_trip_preserves_fields() {
        let records = vec![record(0, 0.99), record(1, f64::NAN)];
        let parsed = parse_csv(&render_csv(&records)).unwrap();
        assert_eq!(parsed.len(), 2);
        for (a, b) in records.iter().zip(parsed.iter()) {
            assert_eq!(a.d, b.d);
            assert_eq!(a.ell, b.ell);
            assert_eq!(a.solver, b.solver);
            assert_eq!(a.accelerated, b.accelerated);
            assert_eq!(a.trial, b.trial);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.wall_time, b.wall_time);
            assert_eq!(a.outer_iters, b.outer_iters);
            assert_eq!(a.inner_iters, b.inner_iters);
            assert!(a.result_value == b.result_value || b.result_value.is_nan());
        }
    }

    #[test]
    fn plotdata_groups_by_ell() {
        let mut records = Vec::new();
        for (ell, trial) in [(100, 0), (100, 1), (200, 0), (300, 0)] {
            let mut r = record(trial, 1.0);
            r.ell = ell;
            records.push(r);
        }
        let text = render_plotdata(&records);
        // Header plus one series point per distinct ell.
        assert_eq!(text.trim().lines().count(), 1 + 3);
    }
}
