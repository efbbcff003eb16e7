//! Command-line entry point: scenario generation, planning sessions, the
//! benchmark harness, scene rendering and path validation.
//!
//! Exit codes: 0 on success, 1 when planning/validation finds no
//! collision-free path, 2 on usage or file errors.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iosmp::budget::Budget;
use iosmp::environment::{
    generate_random_env, scenario_load, scenario_save, RandomEnvParams, Scenario,
};
use iosmp::orchestrator::{run_method, Method, PlanOptions, PlanResult};
use iosmp::path::Path as PlanPath;
use iosmp::roadmap::RoadmapDump;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "iosmp", version, about = "Anytime motion planning: interleaved PRM* exploration and augmented Lagrangian path optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random point-robot scenario file.
    GenEnv(GenEnvArgs),
    /// Plan on a scenario with one method under a time or sample budget.
    Plan(PlanArgs),
    /// Run a benchmark suite from a suite spec file.
    Bench(BenchArgs),
    /// Render a 2D scenario (optionally with a roadmap dump and paths) to SVG.
    Render(RenderArgs),
    /// Re-check a path against a scenario and report its minimum clearance.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenEnvArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    obstacles: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    radius_min: f64,
    #[arg(long, default_value_t = 0.2)]
    radius_max: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Iosmp,
    PrmStar,
    OptOnly,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "iosmp")]
    method: MethodArg,
    /// Wall-clock budget in seconds.
    #[arg(long, conflicts_with = "samples")]
    time: Option<f64>,
    /// Sample-draw budget (deterministic mode).
    #[arg(long)]
    samples: Option<u64>,
    /// Write the best-cost trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Disable feeding optimized paths back into the roadmap.
    #[arg(long)]
    no_share: bool,
    /// Write the best path as JSON.
    #[arg(long)]
    out_path: Option<PathBuf>,
    /// Write the final roadmap dump as JSON.
    #[arg(long)]
    roadmap: Option<PathBuf>,
    /// Render the scene with the best path to SVG (2D scenarios).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Number of optimizer waypoints (default 20).
    #[arg(long)]
    waypoints: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Roadmap dump JSON to draw under the paths.
    #[arg(long)]
    roadmap: Option<PathBuf>,
    /// Path JSON file(s) to overlay; repeatable.
    #[arg(long = "path")]
    paths: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    path: PathBuf,
}

/// Errors that should exit with code 1 (no path / infeasible) instead of 2.
struct NoPath;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenEnv(args) => gen_env(args).map(|_| true),
        Command::Plan(args) => plan(args),
        Command::Bench(args) => bench(args).map(|_| true),
        Command::Render(args) => render(args).map(|_| true),
        Command::Validate(args) => validate(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(path: &PathBuf) -> anyhow::Result<Scenario> {
    let mut scenario = scenario_load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Ok(seed) = std::env::var("IOSMP_SEED") {
        scenario.seed = seed
            .parse()
            .map_err(|_| anyhow!("IOSMP_SEED must be an unsigned integer, got {seed:?}"))?;
    }
    Ok(scenario)
}

fn gen_env(args: GenEnvArgs) -> anyhow::Result<()> {
    let params = RandomEnvParams {
        dim: args.dim,
        obstacle_count: args.obstacles,
        radius_range: [args.radius_min, args.radius_max],
        seed: args.seed,
    };
    let scenario = generate_random_env(&params)?;
    scenario_save(&scenario, &args.out)?;
    println!(
        "wrote {} ({}D, {} obstacles, seed {})",
        args.out.display(),
        args.dim,
        args.obstacles,
        args.seed
    );
    Ok(())
}

fn plan(args: PlanArgs) -> anyhow::Result<bool> {
    let scenario = load_scenario(&args.scenario)?;
    let budget = match (args.time, args.samples) {
        (Some(t), None) => Budget::TimeS(t),
        (None, Some(n)) => Budget::Samples(n),
        (None, None) => Budget::TimeS(5.0),
        (Some(_), Some(_)) => unreachable!("clap forbids both"),
    };
    let mut opts = PlanOptions::new(budget);
    if args.no_share {
        opts.planner.share_optimized_paths = false;
    }
    if let Some(n) = args.waypoints {
        opts.optimizer.waypoints = n;
    }
    let method = match args.method {
        MethodArg::Iosmp if args.no_share => Method::IosmpNoshare,
        MethodArg::Iosmp => Method::Iosmp,
        MethodArg::PrmStar => Method::PrmStar,
        MethodArg::OptOnly => Method::OptOnly,
    };

    let result = run_method(method, &scenario, &opts)?;
    report_plan(&scenario, &args, &opts, method, &result)?;

    match &result.best_path {
        Some(p) => {
            println!(
                "{}: best cost {} ({} waypoints, {} iterations)",
                method.name(),
                p.length(),
                p.waypoints.len(),
                result.iterations
            );
            Ok(true)
        }
        None => {
            println!("{}: no path found within budget", method.name());
            Ok(false)
        }
    }
}

/// Write whatever outputs were requested, plus a replay manifest next to the
/// first of them.
fn report_plan(
    scenario: &Scenario,
    args: &PlanArgs,
    opts: &PlanOptions,
    method: Method,
    result: &PlanResult,
) -> anyhow::Result<()> {
    if let Some(trace) = &args.trace {
        std::fs::write(trace, result.trace.to_csv())?;
    }
    if let Some(out) = &args.out_path {
        if let Some(p) = &result.best_path {
            std::fs::write(out, format!("{}\n", serde_json::to_string_pretty(p)?))?;
        }
    }
    if let Some(out) = &args.roadmap {
        if let Some(rm) = &result.roadmap {
            std::fs::write(out, rm.dump_json())?;
        }
    }
    if let Some(out) = &args.svg {
        let dump = result.roadmap.as_ref().map(|rm| rm.dump());
        let paths: Vec<&PlanPath> = result.best_path.iter().collect();
        let svg = iosmp::render::render_scene_2d(scenario, dump.as_ref(), &paths)?;
        std::fs::write(out, svg)?;
    }

    let manifest_target = args
        .trace
        .as_ref()
        .or(args.out_path.as_ref())
        .or(args.roadmap.as_ref())
        .or(args.svg.as_ref());
    if let Some(target) = manifest_target {
        let manifest = serde_json::json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "scenario_file": args.scenario.display().to_string(),
            "scenario_seed": scenario.seed,
            "method": method.name(),
            "budget": opts.budget,
            "optimizer": opts.optimizer,
            "planner": opts.planner,
        });
        let mut path = target.clone();
        path.set_extension("manifest.json");
        std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&manifest)?))?;
    }
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.suite)
        .with_context(|| format!("reading {}", args.suite.display()))?;
    let spec: iosmp::bench::SuiteSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.suite.display()))?;
    let workers = args.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4)
    });
    let result = iosmp::bench::run_suite(&spec, workers)?;
    let run_dir = iosmp::bench::write_outputs(&spec, &result, &args.out)?;
    let failures = result.runs.iter().filter(|r| r.error.is_some()).count();
    println!(
        "suite complete: {} runs ({} failed), outputs in {}",
        result.runs.len(),
        failures,
        run_dir.display()
    );
    Ok(())
}

fn render(args: RenderArgs) -> anyhow::Result<()> {
    let scenario = load_scenario(&args.scenario)?;
    let dump: Option<RoadmapDump> = match &args.roadmap {
        Some(p) => Some(serde_json::from_str(&std::fs::read_to_string(p)?)
            .with_context(|| format!("parsing {}", p.display()))?),
        None => None,
    };
    let mut paths = Vec::new();
    for p in &args.paths {
        let path: PlanPath = serde_json::from_str(&std::fs::read_to_string(p)?)
            .with_context(|| format!("parsing {}", p.display()))?;
        paths.push(path);
    }
    let refs: Vec<&PlanPath> = paths.iter().collect();
    let svg = iosmp::render::render_scene_2d(&scenario, dump.as_ref(), &refs)?;
    std::fs::write(&args.out, svg)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn validate(args: ValidateArgs) -> anyhow::Result<bool> {
    let scenario = load_scenario(&args.scenario)?;
    let path: PlanPath = serde_json::from_str(&std::fs::read_to_string(&args.path)?)
        .with_context(|| format!("parsing {}", args.path.display()))?;
    let validation = scenario.validate_path(&path, 10)?;
    println!("min clearance: {}", validation.min_value);
    if !validation.endpoints_ok {
        println!("endpoints do not match the scenario start/goal");
    }
    if validation.min_value < 0.0 {
        if let Some((edge, kind)) = validation.worst {
            println!("violated at edge {edge}: {}", describe_kind(kind));
        }
        return Ok(false);
    }
    Ok(validation.endpoints_ok)
}

fn describe_kind(kind: iosmp::robot::ConstraintKind) -> String {
    match kind {
        iosmp::robot::ConstraintKind::Obstacle { obstacle } => format!("obstacle {obstacle}"),
        iosmp::robot::ConstraintKind::BodyObstacle { body, obstacle } => {
            format!("body {body} vs obstacle {obstacle}")
        }
        iosmp::robot::ConstraintKind::SelfCollision { body_a, body_b } => {
            format!("self-collision bodies {body_a}/{body_b}")
        }
    }
}
