//! Episode simulation.
//!
//! Time model: every iteration all agents leave their waypoints together and
//! fly straight to the next one at `uav_speed`; whoever arrives first hovers
//! until the slowest agent lands, so one iteration lasts
//! `longest segment / uav_speed` seconds. The episode ends the moment any
//! agent's flight path passes within `termination_radius` of the source.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    step_apso, step_arpso, step_pso, step_spso, update_personal_best, ArpsoInertiaState, UavState,
};
use crate::error::{Error, Result};
use crate::geometry::{clamp_to_space, perimeter_point, SearchSpace, Vec2};
use crate::params::{AlgorithmParams, Variant};
use crate::seed::{stream, Stream, DEFAULT_MASTER_SEED};
use crate::sensor::{measure, SensorConfig};
use crate::source::{move_source, SourceModel};
use crate::topology::{local_best_index, TopologyGraph, TopologyKind};

/// Sampling interval of a moving source's trajectory, seconds.
pub const SOURCE_SAMPLE_DT: f64 = 0.1;

/// Episodes abort once any state coordinate exceeds this multiple of the
/// search-space side.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

pub const DEFAULT_SOURCE_POWER: f64 = 100.0;
pub const DEFAULT_SOURCE_ALPHA: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub space: SearchSpace,
    pub n: usize,
    pub algorithm: AlgorithmParams,
    pub topology: TopologyKind,
    pub source: SourceModel,
    pub sensor: SensorConfig,
    pub uav_speed: f64,
    pub termination_radius: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub allow_unstable: bool,
    pub record_trajectories: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let space = SearchSpace {
            side_length: 100.0,
            origin: Vec2::ZERO,
        };
        Self {
            space,
            n: 5,
            algorithm: AlgorithmParams::default(),
            topology: TopologyKind::FullyConnected,
            source: SourceModel {
                position: space.center(),
                power: DEFAULT_SOURCE_POWER,
                alpha: DEFAULT_SOURCE_ALPHA,
                motion: crate::source::SourceMotion::Static,
            },
            sensor: SensorConfig::default(),
            uav_speed: 10.0,
            termination_radius: 0.1,
            max_iterations: 500,
            seed: DEFAULT_MASTER_SEED,
            allow_unstable: false,
            record_trajectories: false,
        }
    }
}

impl ScenarioConfig {
    pub fn graph(&self) -> Result<TopologyGraph> {
        TopologyGraph::new(self.topology, self.n)
    }

    /// Structural validation; does not run the stability gate.
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        self.graph()?;
        self.algorithm.validate()?;
        self.source.validate()?;
        self.sensor.validate()?;
        if !(self.uav_speed.is_finite() && self.uav_speed > 0.0) {
            return Err(Error::invalid("uav_speed", "must be finite and > 0"));
        }
        if !(self.termination_radius.is_finite() && self.termination_radius > 0.0) {
            return Err(Error::invalid(
                "termination_radius",
                "must be finite and > 0",
            ));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations", "must be >= 1"));
        }
        Ok(())
    }

    /// Validation plus the APSO stability gate.
    pub fn check(&self) -> Result<()> {
        self.validate()?;
        self.algorithm.check_stability(self.allow_unstable)
    }
}

/// One recorded waypoint. `measured` is absent for the final waypoint of a
/// successful run, which is never reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub iter: usize,
    pub position: Vec2,
    pub measured: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub success: bool,
    /// Waypoints generated before the source was reached (or the cap).
    pub iterations: usize,
    /// Seconds from start to first contact (or to the end of the last
    /// iteration on failure).
    pub seeking_time: f64,
    pub per_agent_distance: Vec<f64>,
    pub diverged: bool,
    pub trajectories: Option<Vec<Vec<Waypoint>>>,
    pub seed: u64,
}

impl RunRecord {
    /// Total distance flown by the swarm.
    pub fn swarm_distance(&self) -> f64 {
        self.per_agent_distance.iter().sum()
    }
}

/// Source positions over one iteration, starting at time 0. A sampled path
/// is piecewise linear between its samples and constant after the last one.
#[derive(Debug, Clone, PartialEq)]
pub enum SourcePath {
    Static(Vec2),
    Sampled { times: Vec<f64>, points: Vec<Vec2> },
}

impl SourcePath {
    fn at(&self, t: f64) -> Vec2 {
        match self {
            SourcePath::Static(p) => *p,
            SourcePath::Sampled { times, points } => {
                let i = times.partition_point(|&s| s <= t);
                if i == 0 {
                    points[0]
                } else if i == times.len() {
                    points[i - 1]
                } else {
                    let f = (t - times[i - 1]) / (times[i] - times[i - 1]);
                    points[i - 1].lerp(points[i], f)
                }
            }
        }
    }

    fn end_time(&self) -> f64 {
        match self {
            SourcePath::Static(_) => 0.0,
            SourcePath::Sampled { times, .. } => times.last().copied().unwrap_or(0.0),
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            SourcePath::Static(_) => &[],
            SourcePath::Sampled { times, .. } => times,
        }
    }
}

/// Agent-minus-source displacement as straight pieces `(t0, t1, r0, r1)`.
fn relative_pieces(
    start: Vec2,
    end: Vec2,
    speed: f64,
    path: &SourcePath,
) -> Vec<(f64, f64, Vec2, Vec2)> {
    let arrival = start.distance(end) / speed;
    let horizon = arrival.max(path.end_time());
    let agent_at = |t: f64| {
        if arrival > 0.0 {
            start.lerp(end, (t / arrival).min(1.0))
        } else {
            end
        }
    };
    let mut times: Vec<f64> = path
        .breakpoints()
        .iter()
        .copied()
        .filter(|&t| t < horizon)
        .collect();
    times.extend([0.0, arrival, horizon]);
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.len() == 1 {
        times.push(times[0]);
    }
    times
        .windows(2)
        .map(|w| {
            (
                w[0],
                w[1],
                agent_at(w[0]) - path.at(w[0]),
                agent_at(w[1]) - path.at(w[1]),
            )
        })
        .collect()
}

/// Minimal distance between an agent flying `start → end` at `speed` (then
/// hovering) and a source following `path`.
pub fn segment_source_distance(start: Vec2, end: Vec2, speed: f64, path: &SourcePath) -> f64 {
    relative_pieces(start, end, speed, path)
        .into_iter()
        .map(|(_, _, r0, r1)| {
            let d = r1 - r0;
            let dd = d.norm_squared();
            let tau = if dd > 0.0 {
                (-r0.dot(d) / dd).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (r0 + d * tau).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Earliest time at which the agent comes within `radius` of the source.
pub fn first_contact(
    start: Vec2,
    end: Vec2,
    speed: f64,
    path: &SourcePath,
    radius: f64,
) -> Option<f64> {
    for (t0, t1, r0, r1) in relative_pieces(start, end, speed, path) {
        let c = r0.norm_squared() - radius * radius;
        if c <= 0.0 {
            return Some(t0);
        }
        let d = r1 - r0;
        let a = d.norm_squared();
        if a == 0.0 {
            continue;
        }
        let b = r0.dot(d);
        let disc = b * b - a * c;
        if disc < 0.0 {
            continue;
        }
        let tau = (-b - disc.sqrt()) / a;
        if (0.0..=1.0).contains(&tau) {
            return Some(t0 + tau * (t1 - t0));
        }
    }
    None
}

/// Samples a moving source every [`SOURCE_SAMPLE_DT`] over `duration`
/// seconds. Returns the path and the source state at the end of the interval.
fn sample_source<R: Rng + ?Sized>(
    src: &SourceModel,
    duration: f64,
    rng: &mut R,
) -> (SourcePath, SourceModel) {
    if src.is_static() || duration <= 0.0 {
        return (SourcePath::Static(src.position), *src);
    }
    let mut times = vec![0.0];
    let mut points = vec![src.position];
    let mut cur = *src;
    let mut elapsed = 0.0;
    while duration - elapsed > 1e-12 {
        let dt = SOURCE_SAMPLE_DT.min(duration - elapsed);
        cur = move_source(&cur, dt, rng);
        elapsed += dt;
        times.push(elapsed);
        points.push(cur.position);
    }
    (SourcePath::Sampled { times, points }, cur)
}

/// Runs one source-seeking episode.
pub fn run_episode(cfg: &ScenarioConfig) -> Result<RunRecord> {
    cfg.check()?;
    let graph = cfg.graph()?;
    let n = cfg.n;
    let params = &cfg.algorithm;
    let space = &cfg.space;
    let guard = DIVERGENCE_FACTOR * space.side_length;

    let mut placement = stream(cfg.seed, Stream::Placement);
    let mut sensing = stream(cfg.seed, Stream::Sensing);
    let mut topo_rng = stream(cfg.seed, Stream::Topology);
    let mut gains = stream(cfg.seed, Stream::Gains);
    let mut source_rng = stream(cfg.seed, Stream::Source);

    let mut source = cfg.source;
    let mut states: Vec<UavState> = Vec::with_capacity(n);
    for _ in 0..n {
        let p = perimeter_point(space, placement.random::<f64>())?;
        let m = measure(&source, p, &cfg.sensor, &mut sensing);
        states.push(UavState::at_rest(p, m));
    }
    let mut trajectories: Option<Vec<Vec<Waypoint>>> = cfg.record_trajectories.then(|| {
        states
            .iter()
            .map(|s| {
                vec![Waypoint {
                    iter: 0,
                    position: s.position,
                    measured: Some(s.personal_best_value),
                }]
            })
            .collect()
    });
    let mut inertia = vec![ArpsoInertiaState::new(params); n];

    let mut record = RunRecord {
        success: false,
        iterations: 0,
        seeking_time: 0.0,
        per_agent_distance: vec![0.0; n],
        diverged: false,
        trajectories: None,
        seed: cfg.seed,
    };

    if states
        .iter()
        .any(|s| s.position.distance(source.position) <= cfg.termination_radius)
    {
        record.success = true;
        record.trajectories = trajectories;
        return Ok(record);
    }

    let mut clock = 0.0;
    let mut iter = 0;
    while iter < cfg.max_iterations {
        iter += 1;
        let bests: Vec<(Vec2, f64)> = states
            .iter()
            .map(|s| (s.personal_best_position, s.personal_best_value))
            .collect();
        if params.variant == Variant::Arpso {
            let f_best = bests.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
            let f_worst = bests.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
            for (w, b) in inertia.iter_mut().zip(&bests) {
                w.adapt(b.1, f_best, f_worst);
            }
        }

        let mut next = Vec::with_capacity(n);
        let mut diverged = false;
        for (i, s) in states.iter().enumerate() {
            let lb = bests[local_best_index(&graph, i, &bests, &mut topo_rng)?].0;
            let x_ib = s.personal_best_position;
            let mut stepped = match params.variant {
                Variant::Pso => step_pso(s, x_ib, lb, params, &mut gains),
                Variant::Spso => step_spso(s, x_ib, lb, params, &mut gains),
                Variant::Arpso => step_arpso(s, x_ib, lb, &inertia[i], None, params, &mut gains),
                Variant::Apso => step_apso(s, x_ib, lb, params, &mut gains),
            };
            if !stepped.is_finite()
                || stepped.position.max_abs() > guard
                || stepped.velocity.max_abs() > guard
                || stepped.acceleration.max_abs() > guard
            {
                diverged = true;
            }
            stepped.position = clamp_to_space(stepped.position, space);
            next.push(stepped);
        }
        if diverged {
            record.diverged = true;
            record.iterations = iter;
            record.seeking_time = clock;
            break;
        }

        let lengths: Vec<f64> = states
            .iter()
            .zip(&next)
            .map(|(a, b)| a.position.distance(b.position))
            .collect();
        let duration = lengths.iter().copied().fold(0.0, f64::max) / cfg.uav_speed;
        let (path, source_after) = sample_source(&source, duration, &mut source_rng);

        let contact = states
            .iter()
            .zip(&next)
            .filter_map(|(a, b)| {
                first_contact(
                    a.position,
                    b.position,
                    cfg.uav_speed,
                    &path,
                    cfg.termination_radius,
                )
            })
            .filter(|&t| t <= duration)
            .fold(None, |acc: Option<f64>, t| {
                Some(acc.map_or(t, |m| m.min(t)))
            });

        if let Some(hit) = contact {
            for (d, len) in record.per_agent_distance.iter_mut().zip(&lengths) {
                *d += (cfg.uav_speed * hit).min(*len);
            }
            if let Some(tr) = trajectories.as_mut() {
                for (t, s) in tr.iter_mut().zip(&next) {
                    t.push(Waypoint {
                        iter,
                        position: s.position,
                        measured: None,
                    });
                }
            }
            record.success = true;
            record.iterations = iter;
            record.seeking_time = clock + hit;
            break;
        }

        clock += duration;
        source = source_after;
        for (i, s) in next.iter_mut().enumerate() {
            record.per_agent_distance[i] += lengths[i];
            s.cumulative_distance += lengths[i];
            let m = measure(&source, s.position, &cfg.sensor, &mut sensing);
            *s = update_personal_best(s, m);
            if let Some(tr) = trajectories.as_mut() {
                tr[i].push(Waypoint {
                    iter,
                    position: s.position,
                    measured: Some(m),
                });
            }
        }
        states = next;
        record.iterations = iter;
        record.seeking_time = clock;
    }

    record.trajectories = trajectories;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::SourceMotion;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn segment_distance_examples() {
        let src = SourcePath::Static(Vec2::new(1.0, 1.0));
        assert_eq!(
            segment_source_distance(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), 10.0, &src),
            1.0
        );
        let on = SourcePath::Static(Vec2::new(1.0, 0.0));
        assert_eq!(
            segment_source_distance(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), 10.0, &on),
            0.0
        );
        let far = SourcePath::Static(Vec2::new(3.0, 4.0));
        assert_eq!(
            segment_source_distance(Vec2::ZERO, Vec2::ZERO, 10.0, &far),
            5.0
        );
    }

    #[test]
    fn contact_time_on_straight_pass() {
        let src = SourcePath::Static(Vec2::new(5.0, 0.0));
        let t = first_contact(Vec2::ZERO, Vec2::new(10.0, 0.0), 10.0, &src, 0.1).unwrap();
        assert!((t - 0.49).abs() < 1e-12);
        assert_eq!(
            first_contact(
                Vec2::ZERO,
                Vec2::new(10.0, 0.0),
                10.0,
                &SourcePath::Static(Vec2::new(5.0, 1.0)),
                0.1
            ),
            None
        );
    }

    #[test]
    fn moving_source_runs_into_hovering_agent() {
        // agent sits still; source passes through it during the interval
        let path = SourcePath::Sampled {
            times: vec![0.0, 1.0],
            points: vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)],
        };
        let t = first_contact(Vec2::ZERO, Vec2::ZERO, 10.0, &path, 0.1).unwrap();
        assert!((t - 0.45).abs() < 1e-12);
    }

    #[test]
    fn contact_at_placement_needs_no_iterations() {
        let c = ScenarioConfig {
            space: SearchSpace {
                side_length: 0.1,
                origin: Vec2::ZERO,
            },
            source: SourceModel {
                position: Vec2::new(0.05, 0.05),
                ..cfg().source
            },
            ..cfg()
        };
        let r = run_episode(&c).unwrap();
        assert!(r.success);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.seeking_time, 0.0);
        assert_eq!(r.swarm_distance(), 0.0);
    }

    #[test]
    fn iteration_cap() {
        assert!(run_episode(&ScenarioConfig {
            max_iterations: 0,
            ..cfg()
        })
        .is_err());
        let r = run_episode(&ScenarioConfig {
            max_iterations: 1,
            seed: 3,
            ..cfg()
        })
        .unwrap();
        assert!(!r.success);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn deterministic_per_seed() {
        for v in Variant::ALL {
            let c = ScenarioConfig {
                algorithm: AlgorithmParams::defaults(v),
                record_trajectories: true,
                seed: 77,
                ..cfg()
            };
            assert_eq!(run_episode(&c).unwrap(), run_episode(&c).unwrap());
        }
        let a = run_episode(&ScenarioConfig { seed: 1, ..cfg() }).unwrap();
        let b = run_episode(&ScenarioConfig { seed: 2, ..cfg() }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn time_matches_distance_and_waypoints_stay_inside() {
        for seed in 0..20 {
            let c = ScenarioConfig {
                seed,
                record_trajectories: true,
                ..cfg()
            };
            let r = run_episode(&c).unwrap();
            let traj = r.trajectories.as_ref().unwrap();
            let mut elapsed = 0.0;
            for k in 1..traj[0].len() {
                let longest = traj
                    .iter()
                    .map(|t| t[k - 1].position.distance(t[k].position))
                    .fold(0.0, f64::max);
                let dt = longest / c.uav_speed;
                if r.success && k == traj[0].len() - 1 {
                    assert!(r.seeking_time - elapsed <= dt + 1e-9);
                } else {
                    elapsed += dt;
                }
            }
            if !r.success {
                assert!((r.seeking_time - elapsed).abs() < 1e-9 * (1.0 + elapsed));
            }
            let longest_flight = r.per_agent_distance.iter().copied().fold(0.0, f64::max);
            assert!(longest_flight <= c.uav_speed * r.seeking_time + 1e-6);
            for t in traj {
                assert!(t.iter().all(|w| c.space.contains(w.position)));
            }
        }
    }

    #[test]
    fn fully_connected_and_ring_agree_for_three_agents() {
        for seed in 0..5 {
            let fc = ScenarioConfig {
                n: 3,
                algorithm: AlgorithmParams::defaults(Variant::Spso),
                seed,
                record_trajectories: true,
                ..cfg()
            };
            let ring = ScenarioConfig {
                topology: TopologyKind::Ring,
                ..fc.clone()
            };
            assert_eq!(run_episode(&fc).unwrap(), run_episode(&ring).unwrap());
        }
    }

    #[test]
    fn static_wandering_source_equals_fixed() {
        let fixed = ScenarioConfig { seed: 9, ..cfg() };
        let mut still = fixed.clone();
        still.source.motion = SourceMotion::RestrictedRandom {
            radius: 4.0,
            speed: 0.0,
            center: still.source.position,
            heading: 0.0,
            until_redraw: 0.0,
        };
        assert_eq!(run_episode(&fixed).unwrap(), run_episode(&still).unwrap());
    }

    #[test]
    fn unstable_apso_gated_unless_allowed() {
        let mut c = cfg();
        c.algorithm.w1 = 1.5;
        c.algorithm.w2 = 1.5;
        assert!(matches!(run_episode(&c), Err(Error::Unstable { .. })));
        c.allow_unstable = true;
        c.max_iterations = 50;
        let r = run_episode(&c).unwrap();
        assert!(r.diverged || !r.success || r.iterations <= 50);
    }
}
