//! Tabular output: experiment summaries, trajectories and stability sweeps.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::metrics::ExperimentRow;
use crate::sim::RunRecord;
use crate::stability::{jury_check, Condition};

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "algorithm",
    "topology",
    "area_side",
    "n",
    "source_speed",
    "noise",
    "N",
    "n_failures",
    "mu_I",
    "mu_Ts",
    "mu_SD",
    "sd_I",
    "sd_Ts",
    "sd_SD",
];

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["run", "iter", "agent", "x", "y", "measured"];

pub const STABILITY_COLUMNS: [&str; 10] = [
    "w1",
    "w2",
    "c1",
    "c2",
    "T",
    "stable",
    "failed",
    "max_root",
    "oracle_stable",
    "boundary_distance",
];

fn num(x: f64) -> String {
    format!("{x}")
}

/// One CSV row per experiment cell. Cells without a successful run (or that
/// were rejected) leave the metric columns empty.
pub fn write_summary_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for row in rows {
        let l = &row.label;
        let mut rec = vec![
            l.algorithm.to_string(),
            l.topology.to_string(),
            num(l.area_side),
            l.n.to_string(),
            num(l.source_speed),
            num(l.noise),
        ];
        match &row.summary {
            Some(s) => {
                rec.push(s.n_runs.to_string());
                rec.push(s.n_failures.to_string());
                match s.stats {
                    Some(st) => rec.extend(
                        [
                            st.mean_iterations,
                            st.mean_seeking_time,
                            st.mean_swarm_distance,
                            st.sd_iterations,
                            st.sd_seeking_time,
                            st.sd_swarm_distance,
                        ]
                        .map(num),
                    ),
                    None => rec.extend(std::iter::repeat_n(String::new(), 6)),
                }
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 8)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON array of the rows.
pub fn write_summary_json<W: Write>(rows: &[ExperimentRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

/// Long-format waypoints of every record that carries trajectories. `run`
/// is the record's position in `records`.
pub fn write_trajectories_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_COLUMNS)?;
    for (run, rec) in records.iter().enumerate() {
        let Some(traj) = &rec.trajectories else {
            continue;
        };
        for (agent, points) in traj.iter().enumerate() {
            for p in points {
                w.write_record([
                    run.to_string(),
                    p.iter.to_string(),
                    agent.to_string(),
                    num(p.position.x),
                    num(p.position.y),
                    p.measured.map(num).unwrap_or_default(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub w1: f64,
    pub w2: f64,
    pub c1: f64,
    pub c2: f64,
    pub t: f64,
    pub stable: bool,
    pub failed: Vec<Condition>,
    pub max_root: f64,
    pub oracle_stable: bool,
    pub boundary_distance: f64,
}

/// Verdicts on a `steps × steps` lattice of (w1, w2) over `[lo, hi]²`.
/// `t` is the loop gain handed to the conditions.
pub fn stability_grid(
    c1: f64,
    c2: f64,
    t: f64,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Vec<StabilityRow> {
    let at = |i: usize| {
        if steps < 2 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (steps - 1) as f64
        }
    };
    let mut rows = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        for j in 0..steps {
            let (w1, w2) = (at(i), at(j));
            let v = jury_check(w1, w2, c1, c2, t);
            // the lower extreme factors as (z - 1)(z - w1)(z - w2); its unit
            // root is structural and left out
            let max_root = v
                .upper_roots
                .iter()
                .copied()
                .fold(w1.abs().max(w2.abs()), f64::max);
            rows.push(StabilityRow {
                w1,
                w2,
                c1,
                c2,
                t,
                stable: v.stable,
                failed: v.failed_conditions,
                max_root,
                oracle_stable: v.oracle_stable,
                boundary_distance: v.boundary_distance,
            });
        }
    }
    rows
}

pub fn write_stability_csv<W: Write>(rows: &[StabilityRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STABILITY_COLUMNS)?;
    for r in rows {
        let failed: Vec<String> = r.failed.iter().map(|c| format!("{c:?}")).collect();
        w.write_record([
            num(r.w1),
            num(r.w2),
            num(r.c1),
            num(r.c2),
            num(r.t),
            r.stable.to_string(),
            failed.join(";"),
            num(r.max_root),
            r.oracle_stable.to_string(),
            num(r.boundary_distance),
        ])?;
    }
    w.flush()?;
    Ok(())
}
