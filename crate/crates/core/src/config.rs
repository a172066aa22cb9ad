//! Declarative configuration: flat dotted keys in TOML syntax.
//!
//! ```toml
//! algorithm = "apso"
//! topology = "ring"
//! space.side = 50
//! params.w1 = 0.6
//! grid.algorithm = ["spso", "arpso", "apso"]
//! runs = 200
//! ```
//!
//! Tables (`[params]`) and dotted keys are interchangeable. Unknown keys are
//! rejected. Missing keys take the default scenario: five agents in a
//! 100 m square, 10 m/s, 0.1 m termination radius, fully connected, APSO.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use toml::Value;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::metrics::{Grid, DEFAULT_MOTION_RADIUS};
use crate::params::{AlgorithmParams, Variant};
use crate::sim::ScenarioConfig;
use crate::source::SourceMotion;
use crate::topology::TopologyKind;

/// Monte Carlo runs per cell when `runs` is not given.
pub const DEFAULT_RUNS: usize = 1000;

/// Every accepted key.
pub const KNOWN_KEYS: &[&str] = &[
    "algorithm",
    "topology",
    "topology_k",
    "n",
    "space.side",
    "space.origin_x",
    "space.origin_y",
    "source.x",
    "source.y",
    "source.power",
    "source.alpha",
    "source.motion",
    "source.speed",
    "source.motion_radius",
    "sensor.noise_fraction",
    "uav_speed",
    "termination_radius",
    "max_iterations",
    "seed",
    "allow_unstable",
    "record_trajectories",
    "params.w1",
    "params.w2",
    "params.omega",
    "params.omega_min",
    "params.omega_max",
    "params.c1",
    "params.c2",
    "params.c3",
    "params.t",
    "params.v_max",
    "runs",
    "grid.algorithm",
    "grid.topology",
    "grid.side",
    "grid.n",
    "grid.source_speed",
    "grid.noise_fraction",
];

/// A fully resolved configuration: one base scenario plus experiment axes.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub scenario: ScenarioConfig,
    pub runs: usize,
    pub grid: Grid,
}

impl LoadedConfig {
    /// Validates every grid cell, including the stability gate.
    pub fn check(&self) -> Result<()> {
        self.scenario.validate()?;
        for cell in self.grid.cells(&self.scenario) {
            cell.check()?;
        }
        Ok(())
    }

    /// Flat `key = value` text that loads back to an equal configuration.
    pub fn echo(&self) -> String {
        let mut out = scenario_echo(&self.scenario, true);
        let scenario_adaptive = matches!(self.scenario.topology, TopologyKind::Adaptive { .. });
        let grid_k = self.grid.topologies.iter().find_map(|t| match t {
            TopologyKind::Adaptive { k } => Some(*k),
            _ => None,
        });
        let adaptive = grid_k.filter(|_| !scenario_adaptive);
        if let Some(k) = adaptive {
            let _ = writeln!(out, "topology_k = {k}");
        }
        let _ = writeln!(out, "runs = {}", self.runs);
        let g = &self.grid;
        if !g.algorithms.is_empty() {
            let v: Vec<String> = g.algorithms.iter().map(|a| format!("\"{a}\"")).collect();
            let _ = writeln!(out, "grid.algorithm = [{}]", v.join(", "));
        }
        if !g.topologies.is_empty() {
            let v: Vec<String> = g.topologies.iter().map(|t| format!("\"{t}\"")).collect();
            let _ = writeln!(out, "grid.topology = [{}]", v.join(", "));
        }
        let floats = |name: &str, xs: &[f64], out: &mut String| {
            if !xs.is_empty() {
                let v: Vec<String> = xs.iter().map(|x| fmt_f64(*x)).collect();
                let _ = writeln!(out, "{name} = [{}]", v.join(", "));
            }
        };
        floats("grid.side", &g.sides, &mut out);
        if !g.sizes.is_empty() {
            let v: Vec<String> = g.sizes.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "grid.n = [{}]", v.join(", "));
        }
        floats("grid.source_speed", &g.source_speeds, &mut out);
        floats("grid.noise_fraction", &g.noise, &mut out);
        out
    }
}

fn fmt_f64(x: f64) -> String {
    // always emit a float literal so integers round-trip as floats
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E', 'N', 'i']) {
        s
    } else {
        format!("{s}.0")
    }
}

/// Flat text form of one scenario. With `with_runtime` unset the seed and
/// output flags are left out, which is the form that gets digested.
pub fn scenario_echo(cfg: &ScenarioConfig, with_runtime: bool) -> String {
    let mut out = String::new();
    let p = &cfg.algorithm;
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("algorithm", format!("\"{}\"", p.variant));
    line("topology", format!("\"{}\"", cfg.topology));
    if let TopologyKind::Adaptive { k } = cfg.topology {
        line("topology_k", k.to_string());
    }
    line("n", cfg.n.to_string());
    line("space.side", fmt_f64(cfg.space.side_length));
    line("space.origin_x", fmt_f64(cfg.space.origin.x));
    line("space.origin_y", fmt_f64(cfg.space.origin.y));
    line("source.x", fmt_f64(cfg.source.position.x));
    line("source.y", fmt_f64(cfg.source.position.y));
    line("source.power", fmt_f64(cfg.source.power));
    line("source.alpha", fmt_f64(cfg.source.alpha));
    match cfg.source.motion {
        SourceMotion::Static => line("source.motion", "\"static\"".into()),
        SourceMotion::RestrictedRandom { radius, speed, .. } => {
            line("source.motion", "\"random\"".into());
            line("source.speed", fmt_f64(speed));
            line("source.motion_radius", fmt_f64(radius));
        }
    }
    line("sensor.noise_fraction", fmt_f64(cfg.sensor.noise_fraction));
    line("uav_speed", fmt_f64(cfg.uav_speed));
    line("termination_radius", fmt_f64(cfg.termination_radius));
    line("max_iterations", cfg.max_iterations.to_string());
    line("allow_unstable", cfg.allow_unstable.to_string());
    if with_runtime {
        // TOML integers are signed 64-bit; larger seeds go out as strings
        if i64::try_from(cfg.seed).is_ok() {
            line("seed", cfg.seed.to_string());
        } else {
            line("seed", format!("\"{}\"", cfg.seed));
        }
        line("record_trajectories", cfg.record_trajectories.to_string());
    }
    line("params.w1", fmt_f64(p.w1));
    line("params.w2", fmt_f64(p.w2));
    line("params.omega", fmt_f64(p.omega));
    line("params.omega_min", fmt_f64(p.omega_min));
    line("params.omega_max", fmt_f64(p.omega_max));
    line("params.c1", fmt_f64(p.c1));
    line("params.c2", fmt_f64(p.c2));
    line("params.c3", fmt_f64(p.c3));
    line("params.t", fmt_f64(p.t));
    if let Some(v) = p.v_max {
        line("params.v_max", fmt_f64(v));
    }
    out
}

/// SHA-256 (hex) of the scenario without its seed and output flags.
pub fn config_digest(cfg: &ScenarioConfig) -> String {
    let digest = Sha256::digest(scenario_echo(cfg, false).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads `path` (or nothing) and applies `key=value` overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<LoadedConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    parse_config(&text, overrides)
}

/// Parses config text, applies overrides, resolves defaults and validates,
/// including the stability gate.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<LoadedConfig> {
    let mut flat = BTreeMap::new();
    let table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    flatten("", &table, &mut flat);
    for ov in overrides {
        let (k, v) = parse_override(ov)?;
        flat.insert(k, v);
    }
    for key in flat.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey(key.clone()));
        }
    }
    let loaded = resolve(&flat)?;
    loaded.check()?;
    Ok(loaded)
}

fn parse_error(text: &str, e: &toml::de::Error) -> Error {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// `key=value`; the value is read as a TOML literal, falling back to a bare
/// string (`algorithm=spso`).
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Parse {
        line: 0,
        column: 0,
        message: format!("override `{s}` is not of the form key=value"),
    })?;
    let (k, v) = (k.trim(), v.trim());
    let value = match toml::from_str::<toml::Table>(&format!("v = {v}")) {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| Value::String(v.to_string())),
        Err(_) => Value::String(v.to_string()),
    };
    Ok((k.to_string(), value))
}

struct Reader<'a> {
    flat: &'a BTreeMap<String, Value>,
}

impl Reader<'_> {
    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.flat.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(Error::invalid(key, "expected a number")),
        }
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        match self.flat.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(Error::invalid(key, "expected a non-negative integer")),
        }
    }

    /// A non-negative integer or a decimal string (for seeds beyond `i64`).
    fn seed(&self) -> Result<Option<u64>> {
        match self.flat.get("seed") {
            Some(Value::String(s)) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::invalid("seed", "expected an unsigned 64-bit integer")),
            _ => self.uint("seed"),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.flat.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Error::invalid(key, "expected true or false")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.flat.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(Error::invalid(key, "expected a string")),
        }
    }

    fn array(&self, key: &str) -> Result<Vec<&Value>> {
        match self.flat.get(key) {
            None => Ok(Vec::new()),
            Some(Value::Array(a)) if !a.is_empty() => Ok(a.iter().collect()),
            Some(_) => Err(Error::invalid(key, "expected a non-empty array")),
        }
    }

    fn float_array(&self, key: &str) -> Result<Vec<f64>> {
        self.array(key)?
            .into_iter()
            .map(|v| match v {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => Err(Error::invalid(key, "expected numbers")),
            })
            .collect()
    }
}

fn topology_with_degree(name: &str, k: Option<u64>) -> Result<TopologyKind> {
    let kind: TopologyKind = name.parse()?;
    Ok(match (kind, k) {
        (TopologyKind::Adaptive { .. }, Some(k)) => TopologyKind::Adaptive { k: k as usize },
        (kind, _) => kind,
    })
}

fn resolve(flat: &BTreeMap<String, Value>) -> Result<LoadedConfig> {
    let r = Reader { flat };
    let mut cfg = ScenarioConfig::default();

    if let Some(a) = r.string("algorithm")? {
        cfg.algorithm = AlgorithmParams::defaults(a.parse::<Variant>()?);
    }
    let k = r.uint("topology_k")?;
    if let Some(t) = r.string("topology")? {
        cfg.topology = topology_with_degree(t, k)?;
    }
    if let Some(n) = r.uint("n")? {
        cfg.n = n as usize;
    }

    if let Some(v) = r.float("space.side")? {
        cfg.space.side_length = v;
    }
    if let Some(v) = r.float("space.origin_x")? {
        cfg.space.origin.x = v;
    }
    if let Some(v) = r.float("space.origin_y")? {
        cfg.space.origin.y = v;
    }
    cfg.space.validate()?;

    let center = cfg.space.center();
    cfg.source.position = Vec2::new(
        r.float("source.x")?.unwrap_or(center.x),
        r.float("source.y")?.unwrap_or(center.y),
    );
    if let Some(v) = r.float("source.power")? {
        cfg.source.power = v;
    }
    if let Some(v) = r.float("source.alpha")? {
        cfg.source.alpha = v;
    }
    let speed = r.float("source.speed")?;
    let radius = r.float("source.motion_radius")?;
    let motion =
        r.string("source.motion")?
            .unwrap_or(if speed.is_some() { "random" } else { "static" });
    cfg.source.motion = match motion {
        "static" => {
            if speed.is_some() || radius.is_some() {
                return Err(Error::invalid(
                    "source.speed",
                    "requires source.motion = \"random\"",
                ));
            }
            SourceMotion::Static
        }
        "random" => SourceMotion::RestrictedRandom {
            radius: radius.unwrap_or(DEFAULT_MOTION_RADIUS),
            speed: speed.unwrap_or(0.0),
            center: cfg.source.position,
            heading: 0.0,
            until_redraw: 0.0,
        },
        other => {
            return Err(Error::invalid(
                "source.motion",
                format!("unknown motion `{other}`"),
            ))
        }
    };

    if let Some(v) = r.float("sensor.noise_fraction")? {
        cfg.sensor.noise_fraction = v;
    }
    if let Some(v) = r.float("uav_speed")? {
        cfg.uav_speed = v;
    }
    if let Some(v) = r.float("termination_radius")? {
        cfg.termination_radius = v;
    }
    if let Some(v) = r.uint("max_iterations")? {
        cfg.max_iterations = v as usize;
    }
    if let Some(v) = r.seed()? {
        cfg.seed = v;
    }
    if let Some(v) = r.boolean("allow_unstable")? {
        cfg.allow_unstable = v;
    }
    if let Some(v) = r.boolean("record_trajectories")? {
        cfg.record_trajectories = v;
    }

    let p = &mut cfg.algorithm;
    for (key, slot) in [
        ("params.w1", &mut p.w1),
        ("params.w2", &mut p.w2),
        ("params.omega", &mut p.omega),
        ("params.omega_min", &mut p.omega_min),
        ("params.omega_max", &mut p.omega_max),
        ("params.c1", &mut p.c1),
        ("params.c2", &mut p.c2),
        ("params.c3", &mut p.c3),
        ("params.t", &mut p.t),
    ] {
        if let Some(v) = r.float(key)? {
            *slot = v;
        }
    }
    if let Some(v) = r.float("params.v_max")? {
        p.v_max = Some(v);
    }

    let runs = r.uint("runs")?.map_or(DEFAULT_RUNS, |v| v as usize);
    if runs == 0 {
        return Err(Error::invalid("runs", "must be >= 1"));
    }

    let grid = Grid {
        algorithms: r
            .array("grid.algorithm")?
            .into_iter()
            .map(|v| match v {
                Value::String(s) => s.parse::<Variant>(),
                _ => Err(Error::invalid("grid.algorithm", "expected strings")),
            })
            .collect::<Result<_>>()?,
        topologies: r
            .array("grid.topology")?
            .into_iter()
            .map(|v| match v {
                Value::String(s) => topology_with_degree(s, k),
                _ => Err(Error::invalid("grid.topology", "expected strings")),
            })
            .collect::<Result<_>>()?,
        sides: r.float_array("grid.side")?,
        sizes: r
            .array("grid.n")?
            .into_iter()
            .map(|v| match v {
                Value::Integer(i) if *i >= 2 => Ok(*i as usize),
                _ => Err(Error::invalid("grid.n", "expected integers >= 2")),
            })
            .collect::<Result<_>>()?,
        source_speeds: r.float_array("grid.source_speed")?,
        noise: r.float_array("grid.noise_fraction")?,
    };

    Ok(LoadedConfig {
        scenario: cfg,
        runs,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::Condition;

    fn set(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empty_config_is_default_scenario() {
        let c = parse_config("", &[]).unwrap();
        assert_eq!(c.scenario, ScenarioConfig::default());
        assert_eq!(c.scenario.n, 5);
        assert_eq!(c.scenario.space.side_length, 100.0);
        assert_eq!(c.scenario.uav_speed, 10.0);
        assert_eq!(c.scenario.termination_radius, 0.1);
        assert_eq!(c.scenario.topology, TopologyKind::FullyConnected);
        assert_eq!(
            c.scenario.algorithm,
            AlgorithmParams::defaults(Variant::Apso)
        );
        assert_eq!(c.runs, DEFAULT_RUNS);
    }

    #[test]
    fn noisy_pairing_accepted() {
        let c = parse_config(
            "",
            &set(&["termination_radius=0.5", "sensor.noise_fraction=0.05"]),
        )
        .unwrap();
        assert_eq!(c.scenario.termination_radius, 0.5);
        assert_eq!(c.scenario.sensor.noise_fraction, 0.05);
    }

    #[test]
    fn unstable_override_rejected() {
        match parse_config("", &set(&["params.w1=1.5", "params.w2=1.5"])) {
            Err(Error::Unstable { failed }) => assert!(failed.contains(&Condition::C14)),
            other => panic!("expected rejection, got {other:?}"),
        }
        parse_config(
            "",
            &set(&["params.w1=1.5", "params.w2=1.5", "allow_unstable=true"]),
        )
        .unwrap();
    }

    #[test]
    fn unknown_key_is_an_error() {
        assert!(
            matches!(parse_config("speed = 3", &[]), Err(Error::UnknownKey(k)) if k == "speed")
        );
        assert!(matches!(
            parse_config("", &set(&["params.w3=1"])),
            Err(Error::UnknownKey(_))
        ));
    }

    #[test]
    fn parse_error_reports_line() {
        match parse_config("n = 5\nspace.side = = 3\n", &[]) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_key() {
        match parse_config("uav_speed = -1", &[]) {
            Err(Error::Invalid { key, .. }) => assert_eq!(key, "uav_speed"),
            other => panic!("{other:?}"),
        }
        match parse_config("n = \"five\"", &[]) {
            Err(Error::Invalid { key, .. }) => assert_eq!(key, "n"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tables_and_dotted_keys_agree() {
        let a = parse_config("[params]\nw1 = 0.6\nc1 = 1.0\n", &[]).unwrap();
        let b = parse_config("params.w1 = 0.6\nparams.c1 = 1.0\n", &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_and_motion() {
        let text = r#"
algorithm = "spso"
grid.algorithm = ["spso", "arpso", "apso"]
grid.side = [200]
grid.source_speed = [0, 0.1, 0.2, 0.3]
runs = 50
"#;
        let c = parse_config(text, &[]).unwrap();
        assert_eq!(c.grid.algorithms.len(), 3);
        assert_eq!(c.grid.cells(&c.scenario).len(), 12);
        assert_eq!(c.runs, 50);
        let c = parse_config("source.speed = 0.2", &[]).unwrap();
        assert!(
            matches!(c.scenario.source.motion, SourceMotion::RestrictedRandom { speed, .. } if speed == 0.2)
        );
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"
algorithm = "arpso"
topology = "adaptive"
topology_k = 3
n = 7
space.side = 40
source.speed = 0.1
sensor.noise_fraction = 0.05
params.v_max = 12.5
seed = 99
grid.n = [5, 10]
grid.topology = ["fc", "ring"]
grid.noise_fraction = [0, 0.1]
runs = 3
"#;
        let c = parse_config(text, &[]).unwrap();
        let again = parse_config(&c.echo(), &[]).unwrap();
        assert_eq!(c, again);
        let d = parse_config("", &[]).unwrap();
        assert_eq!(parse_config(&d.echo(), &[]).unwrap(), d);
    }

    #[test]
    fn large_seed_round_trips() {
        let mut c = parse_config("", &[]).unwrap();
        c.scenario.seed = u64::MAX - 7;
        assert_eq!(parse_config(&c.echo(), &[]).unwrap(), c);
        assert_eq!(
            parse_config("seed = \"42\"", &[]).unwrap().scenario.seed,
            42
        );
        assert!(parse_config("seed = -1", &[]).is_err());
    }

    #[test]
    fn digest_ignores_seed_but_not_algorithm() {
        let a = ScenarioConfig::default();
        let b = ScenarioConfig {
            seed: 1234,
            record_trajectories: true,
            ..a.clone()
        };
        assert_eq!(config_digest(&a), config_digest(&b));
        let c = ScenarioConfig {
            algorithm: AlgorithmParams::defaults(Variant::Spso),
            ..a.clone()
        };
        assert_ne!(config_digest(&a), config_digest(&c));
    }

    #[test]
    fn override_values() {
        assert_eq!(
            parse_override("algorithm=spso").unwrap().1,
            Value::String("spso".into())
        );
        assert_eq!(parse_override("n=7").unwrap().1, Value::Integer(7));
        assert_eq!(
            parse_override("params.t = 0.5").unwrap().1,
            Value::Float(0.5)
        );
        assert!(parse_override("novalue").is_err());
    }
}
