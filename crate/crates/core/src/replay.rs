//! Archived runs and deterministic re-execution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{config_digest, parse_config, scenario_echo};
use crate::error::{Error, Result};
use crate::sim::{run_episode, RunRecord, ScenarioConfig, Waypoint};

/// A run record together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArchive {
    /// Flat config text, loadable with [`parse_config`].
    pub config: String,
    /// Digest of `config` without its seed.
    pub config_digest: String,
    pub record: RunRecord,
}

impl RunArchive {
    pub fn new(cfg: &ScenarioConfig, record: RunRecord) -> Self {
        Self {
            config: scenario_echo(cfg, true),
            config_digest: config_digest(cfg),
            record,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }
}

/// Re-runs an archived episode and checks that it reproduces exactly.
///
/// The episode is re-executed under `current` when given, otherwise under
/// the archived config text. Either way its digest must equal the recorded
/// one. Returns the fresh record on success.
pub fn replay(archive: &RunArchive, current: Option<&ScenarioConfig>) -> Result<RunRecord> {
    let cfg = match current {
        Some(c) => c.clone(),
        None => parse_config(&archive.config, &[])?.scenario,
    };
    let actual = config_digest(&cfg);
    if actual != archive.config_digest {
        return Err(Error::DigestMismatch {
            recorded: archive.config_digest.clone(),
            actual,
        });
    }
    let cfg = ScenarioConfig {
        seed: archive.record.seed,
        record_trajectories: archive.record.trajectories.is_some(),
        ..cfg
    };
    let fresh = run_episode(&cfg)?;
    if let Some(iteration) = first_difference(&archive.record, &fresh) {
        return Err(Error::TrajectoryMismatch { iteration });
    }
    Ok(fresh)
}

/// First iteration at which two records disagree, if any.
pub fn first_difference(recorded: &RunRecord, fresh: &RunRecord) -> Option<usize> {
    if let (Some(a), Some(b)) = (&recorded.trajectories, &fresh.trajectories) {
        if let Some(i) = first_waypoint_difference(a, b) {
            return Some(i);
        }
    }
    let same = recorded.success == fresh.success
        && recorded.iterations == fresh.iterations
        && recorded.seeking_time == fresh.seeking_time
        && recorded.per_agent_distance == fresh.per_agent_distance
        && recorded.diverged == fresh.diverged;
    (!same).then(|| recorded.iterations.min(fresh.iterations))
}

fn first_waypoint_difference(a: &[Vec<Waypoint>], b: &[Vec<Waypoint>]) -> Option<usize> {
    if a.len() != b.len() {
        return Some(0);
    }
    let mut first: Option<usize> = None;
    for (pa, pb) in a.iter().zip(b) {
        let common = pa.len().min(pb.len());
        let at = (0..common)
            .find(|&i| pa[i] != pb[i])
            .map(|i| pa[i].iter.min(pb[i].iter))
            .or_else(|| {
                (pa.len() != pb.len()).then(|| {
                    if common == 0 {
                        0
                    } else {
                        pa[common - 1].iter + 1
                    }
                })
            });
        if let Some(at) = at {
            first = Some(first.map_or(at, |f| f.min(at)));
        }
    }
    first
}
