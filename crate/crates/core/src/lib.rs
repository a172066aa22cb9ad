//! Source seeking with particle-swarm variants for UAV swarms.
//!
//! The crate simulates `n` point agents searching a square area for a signal
//! source using regular PSO, SPSO, ARPSO or the acceleration-based APSO
//! update, analyses the stability of the APSO recurrence, and runs Monte
//! Carlo experiment grids over topologies, area sizes, swarm sizes, source
//! speeds and sensor noise.

pub mod algorithms;
pub mod config;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod output;
pub mod params;
pub mod replay;
pub mod seed;
pub mod sensor;
pub mod sim;
pub mod source;
pub mod stability;
pub mod topology;

pub use algorithms::{ArpsoInertiaState, FixedGains, GainSource, RandomGains, UavState};
pub use config::{config_digest, load_config, parse_config, LoadedConfig};
pub use error::{Error, Result};
pub use geometry::{clamp_to_space, perimeter_point, SearchSpace, Vec2};
pub use metrics::{run_experiment, summarize, ExperimentRow, Grid, MetricSummary};
pub use params::{AlgorithmParams, Variant};
pub use replay::{replay, RunArchive};
pub use sensor::SensorConfig;
pub use sim::{run_episode, RunRecord, ScenarioConfig};
pub use source::{SourceModel, SourceMotion};
pub use stability::{jury_check, StabilityVerdict, ThirdOrderCoeffs};
pub use topology::{TopologyGraph, TopologyKind};
