use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use swarmseek::metrics::{run_experiment_with, summarize, CellLabel, ExperimentRow};
use swarmseek::output::{
    stability_grid, write_stability_csv, write_summary_csv, write_summary_json,
    write_trajectories_csv,
};
use swarmseek::replay::{replay, RunArchive};
use swarmseek::stability::jury_check;
use swarmseek::{load_config, run_episode, Error, LoadedConfig, RunRecord, ScenarioConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_NO_SUCCESS: u8 = 4;
const EXIT_TRAJECTORY_MISMATCH: u8 = 5;
const EXIT_DIGEST_MISMATCH: u8 = 6;

#[derive(Parser)]
#[command(
    name = "swarmseek",
    version,
    about = "Particle-swarm source seeking for UAV swarms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single episode and archive it.
    Run(Common),
    /// Run a Monte Carlo grid and write the summary table.
    Experiment(Common),
    /// Check APSO parameters against the stability conditions.
    Stability(StabilityArgs),
    /// Re-execute an archived run and verify it reproduces exactly.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Config file (flat dotted keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set params.w1=0.6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Episode seed for `run`, master seed for `experiment`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long, default_value_t = 0.675, allow_hyphen_values = true)]
    w1: f64,
    #[arg(long, default_value_t = -0.285, allow_hyphen_values = true)]
    w2: f64,
    #[arg(long, default_value_t = 1.193)]
    c1: f64,
    #[arg(long, default_value_t = 1.193)]
    c2: f64,
    /// Step scale; the conditions see the loop gain T².
    #[arg(long = "T", default_value_t = 1.0)]
    t: f64,
    /// Sweep (w1, w2) over a lattice instead and write stability_grid.csv.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long, default_value_t = 61)]
    steps: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ReplayArgs {
    /// Archived run (run.json written by `run`).
    record: PathBuf,
    /// Replay under this config instead of the archived one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Experiment(c) => cmd_experiment(c),
        Command::Stability(s) => cmd_stability(s),
        Command::Replay(r) => cmd_replay(r),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unstable { .. } => EXIT_UNSTABLE,
        Error::Invalid { .. }
        | Error::Parse { .. }
        | Error::UnknownKey(_)
        | Error::OutOfRange { .. } => EXIT_CONFIG,
        Error::DigestMismatch { .. } => EXIT_DIGEST_MISMATCH,
        Error::TrajectoryMismatch { .. } => EXIT_TRAJECTORY_MISMATCH,
        _ => EXIT_FAILURE,
    }
}

fn setup(c: &Common) -> Result<LoadedConfig, Error> {
    if let Some(jobs) = c.jobs {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    let mut loaded = load_config(c.config.as_deref(), &c.overrides)?;
    if let Some(seed) = c.seed {
        loaded.scenario.seed = seed;
    }
    std::fs::create_dir_all(&c.out)?;
    std::fs::write(c.out.join("config.cfg"), loaded.echo())?;
    Ok(loaded)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_summary(rows: &[ExperimentRow], out: &Path, format: Format) -> Result<(), Error> {
    match format {
        Format::Csv => write_summary_csv(rows, create(out, "summary.csv")?),
        Format::Json => write_summary_json(rows, create(out, "summary.json")?),
    }
}

fn print_rows(rows: &[ExperimentRow]) {
    for row in rows {
        let l = &row.label;
        let head = format!(
            "{:<6} {:<9} side={:<5} n={:<3} v={:<4} noise={:<5}",
            l.algorithm, l.topology, l.area_side, l.n, l.source_speed, l.noise
        );
        match (&row.summary, &row.error) {
            (Some(s), _) => match s.stats {
                Some(st) => println!(
                    "{head} I={:.2} Ts={:.2} SD={:.2} failures={}/{}",
                    st.mean_iterations,
                    st.mean_seeking_time,
                    st.mean_swarm_distance,
                    s.n_failures,
                    s.n_runs
                ),
                None => println!("{head} no successful run ({} runs)", s.n_runs),
            },
            (None, Some(e)) => println!("{head} error: {e}"),
            (None, None) => println!("{head} no result"),
        }
    }
}

fn no_success(rows: &[ExperimentRow]) -> bool {
    rows.iter()
        .any(|r| r.summary.is_none_or(|s| s.stats.is_none()))
}

fn cmd_run(c: Common) -> Result<u8, Error> {
    let loaded = setup(&c)?;
    let cfg = ScenarioConfig {
        record_trajectories: true,
        ..loaded.scenario
    };
    let record = run_episode(&cfg)?;
    let row = ExperimentRow {
        label: CellLabel::of(&cfg),
        summary: Some(summarize(std::slice::from_ref(&record))?),
        error: None,
    };
    write_summary(std::slice::from_ref(&row), &c.out, c.format)?;
    write_trajectories_csv(
        std::slice::from_ref(&record),
        create(&c.out, "trajectories.csv")?,
    )?;
    let archive = RunArchive::new(&cfg, record);
    archive.save(&c.out.join("run.json"))?;
    let r = &archive.record;
    println!(
        "seed={} success={} iterations={} seeking_time={:.3} swarm_distance={:.3}",
        r.seed,
        r.success,
        r.iterations,
        r.seeking_time,
        r.swarm_distance()
    );
    Ok(if r.success { 0 } else { EXIT_NO_SUCCESS })
}

fn cmd_experiment(c: Common) -> Result<u8, Error> {
    let loaded = setup(&c)?;
    let cells = loaded.grid.cells(&loaded.scenario);
    let keep = loaded.scenario.record_trajectories;
    let mut kept: Vec<RunRecord> = Vec::new();
    let rows = run_experiment_with(&cells, loaded.runs, loaded.scenario.seed, |_, records| {
        if keep {
            kept.extend_from_slice(records);
        }
    });
    write_summary(&rows, &c.out, c.format)?;
    if keep {
        write_trajectories_csv(&kept, create(&c.out, "trajectories.csv")?)?;
    }
    print_rows(&rows);
    Ok(if no_success(&rows) {
        EXIT_NO_SUCCESS
    } else {
        0
    })
}

fn cmd_stability(s: StabilityArgs) -> Result<u8, Error> {
    let gain = s.t * s.t;
    if s.grid {
        let rows = stability_grid(s.c1, s.c2, gain, s.lo, s.hi, s.steps);
        std::fs::create_dir_all(&s.out)?;
        write_stability_csv(&rows, create(&s.out, "stability_grid.csv")?)?;
        let stable = rows.iter().filter(|r| r.stable).count();
        println!(
            "{stable}/{} lattice points stable; wrote {}",
            rows.len(),
            s.out.join("stability_grid.csv").display()
        );
        return Ok(0);
    }
    let v = jury_check(s.w1, s.w2, s.c1, s.c2, gain);
    match s.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&v)?),
        Format::Csv => {
            println!(
                "w1={} w2={} c1={} c2={} T={} (loop gain {})",
                s.w1, s.w2, s.c1, s.c2, s.t, gain
            );
            for c in &v.conditions {
                println!(
                    "{:?}: lhs={:.9} rhs={:.9} {}",
                    c.condition,
                    c.lhs,
                    c.rhs,
                    if c.satisfied { "ok" } else { "FAILED" }
                );
            }
            println!("lower extreme |roots| = {:?}", v.lower_roots);
            println!("upper extreme |roots| = {:?}", v.upper_roots);
            println!("verdict: {}", if v.stable { "stable" } else { "unstable" });
            if !v.failed_conditions.is_empty() {
                println!("failed: {:?}", v.failed_conditions);
            }
        }
    }
    Ok(0)
}

fn cmd_replay(r: ReplayArgs) -> Result<u8, Error> {
    let archive = RunArchive::load(&r.record)?;
    let current = if r.config.is_some() || !r.overrides.is_empty() {
        Some(load_config(r.config.as_deref(), &r.overrides)?.scenario)
    } else {
        None
    };
    let fresh = replay(&archive, current.as_ref())?;
    println!(
        "match: seed={} iterations={} success={}",
        fresh.seed, fresh.iterations, fresh.success
    );
    Ok(0)
}
