//! Runtime benchmark over matching-pennies stars of growing degree, with a
//! CSV emitter and a fitted log-log slope for the polynomial-scaling check.

use crate::discretize::plan_simple;
use crate::dp::{collect_polymatrix_messages, solve_polymatrix_tree, SolveOptions};
use crate::gen::{gen_star_matching_pennies, MpOrientation, RewardPair};
use crate::model::{normalize_polymatrix, validate_game, ChildOrder, RootedTree};
use num::rational::BigRational;
use std::io::{self, Write};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct BenchRow {
    /// Center degree (the star has `k + 1` players).
    pub k: usize,
    pub median_seconds: f64,
    pub s_leaf: u64,
    pub s_center: u64,
    pub table_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln median` against `ln k`; absent for a
    /// single size.
    pub loglog_slope: Option<f64>,
}

/// Solve (and internally verify) the `k`-leaf matching-pennies star for each
/// requested degree, `repeats` times each, reporting median wall time and
/// grid/message sizes. Sizes must be sorted ascending.
pub fn bench_star(
    sizes: &[usize],
    epsilon: &BigRational,
    repeats: usize,
    orientation: MpOrientation,
) -> Result<BenchReport, String> {
    if sizes.is_empty() || repeats == 0 {
        return Err("need at least one size and one repeat".into());
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err("sizes must be strictly ascending".into());
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &k in sizes {
        let game = gen_star_matching_pennies(k + 1, orientation, &RewardPair::default());
        let stats = validate_game(&game).map_err(|e| e.to_string())?;
        let norm = normalize_polymatrix(&game, &stats).map_err(|e| e.to_string())?;
        let nstats = validate_game(&norm.game).map_err(|e| e.to_string())?;
        let tree = RootedTree::for_game(&norm.game, 0, ChildOrder::Ascending)
            .map_err(|e| e.to_string())?;
        let plan = plan_simple(&norm.game, &nstats, epsilon).map_err(|e| e.to_string())?;
        let mut times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let start = Instant::now();
            let profile =
                solve_polymatrix_tree(&norm.game, &nstats, &tree, &plan, SolveOptions::default())
                    .map_err(|e| e.to_string())?;
            times.push(start.elapsed().as_secs_f64());
            debug_assert!(profile.regret.overall);
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = times[times.len() / 2];
        let messages = collect_polymatrix_messages(
            &norm.game,
            &nstats,
            &tree,
            &plan,
            SolveOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        rows.push(BenchRow {
            k,
            median_seconds: median,
            s_leaf: plan.players[1].grid.s,
            s_center: plan.players[0].grid.s,
            table_bytes: messages.approx_bytes(),
        });
    }
    let loglog_slope = fit_slope(&rows);
    Ok(BenchReport { rows, loglog_slope })
}

fn fit_slope(rows: &[BenchRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.median_seconds > 0.0)
        .map(|r| ((r.k as f64).ln(), r.median_seconds.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Fixed-header CSV: `k,median_seconds,s_leaf,s_center,table_bytes`.
pub fn write_csv<W: Write>(report: &BenchReport, mut out: W) -> io::Result<()> {
    writeln!(out, "k,median_seconds,s_leaf,s_center,table_bytes")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{:.6},{},{},{}",
            r.k, r.median_seconds, r.s_leaf, r.s_center, r.table_bytes
        )?;
    }
    Ok(())
}
