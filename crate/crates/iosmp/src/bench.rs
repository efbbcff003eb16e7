//! Benchmark harness: seeded environment suites, method comparison,
//! best-ratio aggregation over a fixed time grid, CSV/SVG outputs.

use crate::budget::Budget;
use crate::environment::{generate_random_env, GoalSpec, RandomEnvParams, Scenario};
use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;
use crate::orchestrator::{run_method, Method, PlanOptions, PlanTrace, PlannerConfig};
use crate::rng::{splitmix64, stream_rng, STREAM_HARNESS};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path as FsPath, PathBuf};

pub use crate::render::render_scene_2d;

/// Points on the aggregation time grid (log spaced over the budget).
pub const GRID_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SuiteKind {
    /// Randomized point-robot environments: one cell per (dim, obstacles).
    RandomPoint {
        dims: Vec<usize>,
        obstacle_counts: Vec<usize>,
    },
    /// A bundled or on-disk arm scenario; each environment perturbs the
    /// workspace goal region by a uniform +-0.1 m cube offset.
    ArmTask { scenario: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub kind: SuiteKind,
    pub envs_per_cell: usize,
    pub budget: Budget,
    pub methods: Vec<Method>,
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellId {
    Point { dim: usize, obstacles: usize },
    Arm,
}

impl CellId {
    pub fn label(&self) -> String {
        match self {
            CellId::Point { dim, obstacles } => format!("d{dim}_obs{obstacles}"),
            CellId::Arm => "arm".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub cell: CellId,
    pub env: usize,
    pub env_seed: u64,
    pub method: Method,
    pub trace: PlanTrace,
    pub final_cost: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodCurve {
    pub method: Method,
    /// Mean best-ratio per grid point over environments with a solution.
    pub mean_ratio: Vec<Option<f64>>,
    pub n_success: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellAggregate {
    pub cell: CellId,
    pub grid: Vec<f64>,
    pub curves: Vec<MethodCurve>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellAggregate>,
}

impl SuiteResult {
    /// Final best-ratio of one method across a cell's environments (one entry
    /// per environment where the method found a path).
    pub fn final_ratios(&self, cell: CellId, method: Method) -> Vec<f64> {
        let mut out = Vec::new();
        for env in self.envs_of(cell) {
            let best = self.env_best(cell, env);
            let Some(best) = best else { continue };
            if let Some(cost) = self
                .runs
                .iter()
                .find(|r| r.cell == cell && r.env == env && r.method == method)
                .and_then(|r| r.final_cost)
            {
                out.push(cost / best);
            }
        }
        out
    }

    pub fn final_costs(&self, cell: CellId, method: Method) -> Vec<Option<f64>> {
        self.envs_of(cell)
            .into_iter()
            .map(|env| {
                self.runs
                    .iter()
                    .find(|r| r.cell == cell && r.env == env && r.method == method)
                    .and_then(|r| r.final_cost)
            })
            .collect()
    }

    fn envs_of(&self, cell: CellId) -> Vec<usize> {
        let mut envs: Vec<usize> = self
            .runs
            .iter()
            .filter(|r| r.cell == cell)
            .map(|r| r.env)
            .collect();
        envs.sort_unstable();
        envs.dedup();
        envs
    }

    /// Shortest path found by any method at any time in this environment.
    fn env_best(&self, cell: CellId, env: usize) -> Option<f64> {
        self.runs
            .iter()
            .filter(|r| r.cell == cell && r.env == env)
            .filter_map(|r| r.final_cost)
            .fold(None, |acc, c| Some(acc.map_or(c, |a: f64| a.min(c))))
    }
}

fn env_seed(spec_seed: u64, cell_idx: usize, env: usize) -> u64 {
    splitmix64(spec_seed ^ ((cell_idx as u64) << 32) ^ env as u64)
}

/// Perturb a region goal center by a uniform +-0.1 m cube offset drawn from
/// the environment's harness stream.
fn perturb_region(scenario: &mut Scenario, seed: u64) {
    if let GoalSpec::WorkspaceRegion { center, .. } = &mut scenario.goal {
        let mut rng = stream_rng(seed, STREAM_HARNESS);
        for c in center.iter_mut() {
            *c += rng.gen_range(-0.1..0.1);
        }
    }
}

fn build_scenario(kind: &SuiteKind, cell: CellId, spec_seed: u64, cell_idx: usize, env: usize) -> Result<Scenario> {
    let seed = env_seed(spec_seed, cell_idx, env);
    match (kind, cell) {
        (SuiteKind::RandomPoint { .. }, CellId::Point { dim, obstacles }) => {
            generate_random_env(&RandomEnvParams::new(dim, obstacles, seed))
        }
        (SuiteKind::ArmTask { scenario }, CellId::Arm) => {
            let mut s = load_arm_scenario(scenario)?;
            s.seed = seed;
            perturb_region(&mut s, seed);
            Ok(s)
        }
        _ => Err(Error::InvalidInput("suite kind and cell mismatch".into())),
    }
}

/// Resolve an arm-task scenario string: `builtin:goal_config` /
/// `builtin:goal_region`, or a scenario file path.
pub fn load_arm_scenario(name: &str) -> Result<Scenario> {
    match name {
        "builtin:goal_config" => crate::scenarios::arm_task_goal_config(),
        "builtin:goal_region" => crate::scenarios::arm_task_goal_region(),
        path => crate::environment::scenario_load(FsPath::new(path)),
    }
}

/// Render helper for run directories: draw one 2D environment with the best
/// paths of each method overlaid.
pub fn render_cell_env(
    scenario: &Scenario,
    paths: &[&crate::path::Path],
) -> Result<String> {
    render_scene_2d(scenario, None, paths)
}

fn cells_of(spec: &SuiteSpec) -> Vec<CellId> {
    match &spec.kind {
        SuiteKind::RandomPoint {
            dims,
            obstacle_counts,
        } => {
            let mut cells = Vec::new();
            for &dim in dims {
                for &obstacles in obstacle_counts {
                    cells.push(CellId::Point { dim, obstacles });
                }
            }
            cells
        }
        SuiteKind::ArmTask { .. } => vec![CellId::Arm],
    }
}

/// Run every (cell, environment, method) combination, up to `workers`
/// concurrently. Per-run failures are recorded in the result table; they
/// never abort the suite.
pub fn run_suite(spec: &SuiteSpec, workers: usize) -> Result<SuiteResult> {
    if spec.envs_per_cell == 0 {
        return Err(Error::InvalidInput("envs_per_cell must be >= 1".into()));
    }
    let cells = cells_of(spec);
    let mut jobs = Vec::new();
    for (cell_idx, &cell) in cells.iter().enumerate() {
        for env in 0..spec.envs_per_cell {
            for &method in &spec.methods {
                jobs.push((cell_idx, cell, env, method));
            }
        }
    }

    let opts = PlanOptions {
        budget: spec.budget,
        optimizer: spec.optimizer,
        planner: spec.planner,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let mut runs: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell_idx, cell, env, method)| {
                let seed = env_seed(spec.seed, cell_idx, env);
                let outcome = build_scenario(&spec.kind, cell, spec.seed, cell_idx, env)
                    .and_then(|scenario| run_method(method, &scenario, &opts));
                match outcome {
                    Ok(r) => RunRecord {
                        cell,
                        env,
                        env_seed: seed,
                        method,
                        final_cost: r.best_path.as_ref().map(|p| p.length()),
                        trace: r.trace,
                        error: None,
                    },
                    Err(e) => RunRecord {
                        cell,
                        env,
                        env_seed: seed,
                        method,
                        trace: PlanTrace::default(),
                        final_cost: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    // deterministic result order regardless of completion order
    runs.sort_by_key(|r| (r.cell.label(), r.env, r.method.name()));

    let horizon = match spec.budget {
        Budget::TimeS(t) => t,
        Budget::Samples(n) => n as f64,
    };
    let grid = log_grid(horizon);
    let result_cells = cells
        .iter()
        .map(|&cell| aggregate_cell(&runs, cell, &grid, &spec.methods))
        .collect();
    Ok(SuiteResult {
        runs,
        cells: result_cells,
    })
}

/// 100 log-spaced grid points from horizon/1000 to the full horizon.
fn log_grid(horizon: f64) -> Vec<f64> {
    let lo = (horizon / 1000.0).max(1e-9);
    (0..GRID_POINTS)
        .map(|i| lo * (horizon / lo).powf(i as f64 / (GRID_POINTS - 1) as f64))
        .collect()
}

fn aggregate_cell(runs: &[RunRecord], cell: CellId, grid: &[f64], methods: &[Method]) -> CellAggregate {
    let cell_runs: Vec<&RunRecord> = runs.iter().filter(|r| r.cell == cell).collect();
    let mut envs: Vec<usize> = cell_runs.iter().map(|r| r.env).collect();
    envs.sort_unstable();
    envs.dedup();

    let mut env_best = std::collections::HashMap::new();
    for &env in &envs {
        let best = cell_runs
            .iter()
            .filter(|r| r.env == env)
            .filter_map(|r| r.final_cost)
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            env_best.insert(env, best);
        }
    }

    let curves = methods
        .iter()
        .map(|&method| {
            let mut mean_ratio = Vec::with_capacity(grid.len());
            let mut n_success = Vec::with_capacity(grid.len());
            for &t in grid {
                let mut sum = 0.0;
                let mut n = 0usize;
                for r in cell_runs.iter().filter(|r| r.method == method) {
                    let Some(&best) = env_best.get(&r.env) else { continue };
                    if let Some(cost) = r.trace.cost_at(t) {
                        sum += cost / best;
                        n += 1;
                    }
                }
                mean_ratio.push(if n > 0 { Some(sum / n as f64) } else { None });
                n_success.push(n);
            }
            MethodCurve {
                method,
                mean_ratio,
                n_success,
            }
        })
        .collect();
    CellAggregate {
        cell,
        grid: grid.to_vec(),
        curves,
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Hash of the canonical suite-spec JSON; names the run directory.
pub fn spec_hash(spec: &SuiteSpec) -> String {
    let json = serde_json::to_string(spec).expect("spec serializes");
    format!("{:016x}", fnv1a(json.as_bytes()))
}

/// Write traces, aggregates and the manifest under
/// `<out_dir>/suite_<spec-hash>/`. Returns the run directory.
pub fn write_outputs(spec: &SuiteSpec, result: &SuiteResult, out_dir: &FsPath) -> Result<PathBuf> {
    let run_dir = out_dir.join(format!("suite_{}", spec_hash(spec)));
    std::fs::create_dir_all(&run_dir)?;

    let manifest = serde_json::json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "spec": spec,
    });
    std::fs::write(
        run_dir.join("manifest.json"),
        format!("{}\n", serde_json::to_string_pretty(&manifest).expect("manifest")),
    )?;

    for r in &result.runs {
        let dir = run_dir.join(r.cell.label()).join(format!("env_{:03}", r.env));
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join(format!("{}.csv", r.method.name())), r.trace.to_csv())?;
    }

    for cell in &result.cells {
        let dir = run_dir.join(cell.cell.label());
        std::fs::create_dir_all(&dir)?;
        let mut csv = String::from("time_s,method,mean_ratio,n_success\n");
        for curve in &cell.curves {
            for (i, &t) in cell.grid.iter().enumerate() {
                let ratio = curve.mean_ratio[i]
                    .map(|r| r.to_string())
                    .unwrap_or_else(|| "nan".into());
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    t,
                    curve.method.name(),
                    ratio,
                    curve.n_success[i]
                ));
            }
        }
        std::fs::write(dir.join("aggregate.csv"), csv)?;
    }
    Ok(run_dir)
}
