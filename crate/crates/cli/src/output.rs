//! Benchmark output formatting: a byte-stable CSV and a human-readable table
//! grouped by separation distance.

use crate::runner::BenchmarkRecord;
use probcol::bvh::BvType;
use std::fmt::Write as _;

/// Fixed CSV column order; matches the field order of [`BenchmarkRecord`].
pub fn csv_header() -> String {
    "pair,bv,distance,sigma,seed,bve,cp,mc,mc_se,build_s,query_s,mc_s,nodes_visited,error"
        .to_string()
}

/// One CSV row. Floats use scientific notation with six significant digits so
/// re-emission of the same records is byte-identical.
pub fn csv_row(r: &BenchmarkRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        csv_field(&r.pair_id),
        r.bv_type,
        fmt_float(r.distance),
        fmt_float(r.sigma),
        r.seed,
        fmt_float(r.bve),
        fmt_float(r.cp),
        fmt_float(r.mc_estimate),
        fmt_float(r.mc_std_error),
        fmt_float(r.build_seconds),
        fmt_float(r.query_seconds),
        fmt_float(r.mc_seconds),
        fmt_float(r.nodes_visited),
        csv_field(r.error.as_deref().unwrap_or("")),
    )
}

/// Full CSV document (header plus one row per record, trailing newline).
pub fn write_csv(records: &[BenchmarkRecord]) -> String {
    let mut out = csv_header();
    out.push('\n');
    for r in records {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

fn fmt_float(x: f64) -> String {
    format!("{x:.5e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Human-readable summary: one block per mesh pair, one row per bounding
/// volume type, one column group per separation distance. Each cell averages
/// tightness ratio (BVE), probability bound, and query time over every sigma
/// and seed; cells containing flagged rows are marked with `*`.
pub fn pretty_table(records: &[BenchmarkRecord]) -> String {
    let mut out = String::new();
    let mut pairs: Vec<&str> = Vec::new();
    for r in records {
        if !pairs.contains(&r.pair_id.as_str()) {
            pairs.push(&r.pair_id);
        }
    }
    let mut any_flagged = false;
    for pair in pairs {
        let rows: Vec<&BenchmarkRecord> =
            records.iter().filter(|r| r.pair_id == pair).collect();
        let mut distances: Vec<f64> = Vec::new();
        for r in &rows {
            if !distances.contains(&r.distance) {
                distances.push(r.distance);
            }
        }
        distances.sort_by(f64::total_cmp);
        let bvs: Vec<BvType> = BvType::ALL
            .iter()
            .copied()
            .filter(|b| rows.iter().any(|r| r.bv_type == *b))
            .collect();

        let _ = writeln!(out, "pair {pair}");
        let _ = write!(out, "{:<10}", "bv");
        for d in &distances {
            let _ = write!(out, " | {:^34}", format!("d = {d:.4} m"));
        }
        out.push('\n');
        let _ = write!(out, "{:<10}", "");
        for _ in &distances {
            let _ = write!(out, " | {:>9} {:>12} {:>11}", "BVE", "CP", "query(s)");
        }
        out.push('\n');
        let _ = write!(out, "{:-<10}", "");
        for _ in &distances {
            let _ = write!(out, "-+-{:-<34}", "");
        }
        out.push('\n');
        for bv in &bvs {
            let _ = write!(out, "{:<10}", bv.to_string());
            for d in &distances {
                let cell: Vec<&&BenchmarkRecord> = rows
                    .iter()
                    .filter(|r| r.bv_type == *bv && r.distance == *d)
                    .collect();
                if cell.is_empty() {
                    let _ = write!(out, " | {:>34}", "-");
                    continue;
                }
                let n = cell.len() as f64;
                let bve = cell.iter().map(|r| r.bve).sum::<f64>() / n;
                let cp = cell.iter().map(|r| r.cp).sum::<f64>() / n;
                let qs = cell.iter().map(|r| r.query_seconds).sum::<f64>() / n;
                let flagged = cell.iter().any(|r| r.error.is_some());
                any_flagged |= flagged;
                let mark = if flagged { "*" } else { " " };
                let _ = write!(out, " | {bve:>9.3} {cp:>12.4e} {qs:>10.4}{mark}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    if any_flagged {
        let _ = writeln!(out, "* cell contains flagged rows (see CSV error column)");
    }
    out
}
