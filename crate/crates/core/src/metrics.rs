//! Monte Carlo metrics and experiment grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{AlgorithmParams, Variant};
use crate::seed::derive_seed;
use crate::sim::{run_episode, RunRecord, ScenarioConfig};
use crate::source::{SourceModel, SourceMotion};
use crate::topology::TopologyKind;

/// Radius of the disc a moving source wanders in, meters.
pub const DEFAULT_MOTION_RADIUS: f64 = 4.0;

/// Means and sample standard deviations over the successful runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean_iterations: f64,
    pub mean_seeking_time: f64,
    pub mean_swarm_distance: f64,
    pub sd_iterations: f64,
    pub sd_seeking_time: f64,
    pub sd_swarm_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub n_runs: usize,
    pub n_failures: usize,
    /// `None` when no run succeeded.
    pub stats: Option<MetricStats>,
}

impl MetricSummary {
    pub fn n_successes(&self) -> usize {
        self.n_runs - self.n_failures
    }

    /// Standard error of a mean given its standard deviation.
    pub fn std_error(&self, sd: f64) -> f64 {
        sd / (self.n_successes() as f64).sqrt()
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Averages seeking time, iterations and swarm distance over the successful
/// runs in `records`, in record order.
pub fn summarize(records: &[RunRecord]) -> Result<MetricSummary> {
    if records.is_empty() {
        return Err(Error::invalid("records", "cannot summarize zero runs"));
    }
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.success).collect();
    let stats = (!ok.is_empty()).then(|| {
        let iters: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
        let times: Vec<f64> = ok.iter().map(|r| r.seeking_time).collect();
        let dists: Vec<f64> = ok.iter().map(|r| r.swarm_distance()).collect();
        let (mean_iterations, sd_iterations) = mean_sd(&iters);
        let (mean_seeking_time, sd_seeking_time) = mean_sd(&times);
        let (mean_swarm_distance, sd_swarm_distance) = mean_sd(&dists);
        MetricStats {
            mean_iterations,
            mean_seeking_time,
            mean_swarm_distance,
            sd_iterations,
            sd_seeking_time,
            sd_swarm_distance,
        }
    });
    Ok(MetricSummary {
        n_runs: records.len(),
        n_failures: records.len() - ok.len(),
        stats,
    })
}

/// Coordinates of one grid cell, as reported in output tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellLabel {
    pub algorithm: Variant,
    pub topology: TopologyKind,
    pub area_side: f64,
    pub n: usize,
    pub source_speed: f64,
    pub noise: f64,
}

impl CellLabel {
    pub fn of(cfg: &ScenarioConfig) -> Self {
        let source_speed = match cfg.source.motion {
            SourceMotion::Static => 0.0,
            SourceMotion::RestrictedRandom { speed, .. } => speed,
        };
        Self {
            algorithm: cfg.algorithm.variant,
            topology: cfg.topology,
            area_side: cfg.space.side_length,
            n: cfg.n,
            source_speed,
            noise: cfg.sensor.noise_fraction,
        }
    }
}

/// Axes of an experiment grid. An empty axis keeps the base scenario's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub algorithms: Vec<Variant>,
    pub topologies: Vec<TopologyKind>,
    pub sides: Vec<f64>,
    pub sizes: Vec<usize>,
    pub source_speeds: Vec<f64>,
    pub noise: Vec<f64>,
}

impl Grid {
    /// Cartesian product in the order algorithm, topology, side, n, speed,
    /// noise (noise varies fastest).
    ///
    /// Setting an algorithm applies that variant to the base parameters.
    /// Setting a side re-centers a source that sat at the old center.
    /// Setting a source speed makes the source wander around the center.
    pub fn cells(&self, base: &ScenarioConfig) -> Vec<ScenarioConfig> {
        fn axis<T: Copy>(values: &[T], fallback: T) -> Vec<T> {
            if values.is_empty() {
                vec![fallback]
            } else {
                values.to_vec()
            }
        }
        let base_label = CellLabel::of(base);
        let mut out = Vec::new();
        for &alg in &axis(&self.algorithms, base_label.algorithm) {
            for &topo in &axis(&self.topologies, base.topology) {
                for &side in &axis(&self.sides, base.space.side_length) {
                    for &n in &axis(&self.sizes, base.n) {
                        for &speed in &axis(&self.source_speeds, base_label.source_speed) {
                            for &noise in &axis(&self.noise, base.sensor.noise_fraction) {
                                out.push(self.cell(base, alg, topo, side, n, speed, noise));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn cell(
        &self,
        base: &ScenarioConfig,
        alg: Variant,
        topology: TopologyKind,
        side: f64,
        n: usize,
        speed: f64,
        noise: f64,
    ) -> ScenarioConfig {
        let mut cfg = base.clone();
        cfg.algorithm = AlgorithmParams {
            variant: alg,
            ..base.algorithm
        };
        cfg.topology = topology;
        cfg.n = n;
        if let TopologyKind::Adaptive { k } = topology {
            // keep the degree valid for small swarms
            cfg.topology = TopologyKind::Adaptive {
                k: k.min(n.saturating_sub(1)).max(1),
            };
        }
        let centered = base.source.position == base.space.center();
        cfg.space.side_length = side;
        let center = cfg.space.center();
        if centered {
            cfg.source.position = center;
        }
        if !self.source_speeds.is_empty() {
            let radius = match base.source.motion {
                SourceMotion::RestrictedRandom { radius, .. } => radius,
                SourceMotion::Static => DEFAULT_MOTION_RADIUS,
            };
            cfg.source = SourceModel {
                position: center,
                motion: SourceMotion::RestrictedRandom {
                    radius,
                    speed,
                    center,
                    heading: 0.0,
                    until_redraw: 0.0,
                },
                ..cfg.source
            };
        } else if let SourceMotion::RestrictedRandom {
            radius,
            speed,
            heading,
            until_redraw,
            ..
        } = cfg.source.motion
        {
            if centered {
                cfg.source.motion = SourceMotion::RestrictedRandom {
                    radius,
                    speed,
                    center,
                    heading,
                    until_redraw,
                };
            }
        }
        cfg.sensor.noise_fraction = noise;
        cfg
    }
}

/// One output row of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub label: CellLabel,
    pub summary: Option<MetricSummary>,
    /// Set when the cell could not run (invalid or rejected configuration).
    pub error: Option<String>,
}

/// Runs `runs` seeded episodes per cell. The seed of run `r` in cell `c` is
/// `derive_seed(master_seed, c, r)`. Results are independent of thread count.
pub fn run_experiment(
    cells: &[ScenarioConfig],
    runs: usize,
    master_seed: u64,
) -> Vec<ExperimentRow> {
    run_experiment_with(cells, runs, master_seed, |_, _| {})
}

/// Like [`run_experiment`], handing each cell's records to `inspect` (cell
/// index, records in run order) before they are summarized.
pub fn run_experiment_with<F>(
    cells: &[ScenarioConfig],
    runs: usize,
    master_seed: u64,
    mut inspect: F,
) -> Vec<ExperimentRow>
where
    F: FnMut(usize, &[RunRecord]),
{
    cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| {
            let label = CellLabel::of(cell);
            let records = run_cell(cell, ci as u64, runs, master_seed);
            if let Ok(r) = &records {
                inspect(ci, r);
            }
            match records.and_then(|r| summarize(&r)) {
                Ok(summary) => ExperimentRow {
                    label,
                    summary: Some(summary),
                    error: None,
                },
                Err(e) => ExperimentRow {
                    label,
                    summary: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// All run records of one cell, in run order.
pub fn run_cell(
    cell: &ScenarioConfig,
    cell_index: u64,
    runs: usize,
    master_seed: u64,
) -> Result<Vec<RunRecord>> {
    cell.check()?;
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let cfg = ScenarioConfig {
                seed: derive_seed(master_seed, cell_index, r),
                ..cell.clone()
            };
            run_episode(&cfg)
        })
        .collect()
}
