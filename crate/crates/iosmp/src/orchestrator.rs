//! The anytime planning loop: alternate roadmap expansion and local
//! optimization, sharing information in both directions, tracking the best
//! path over time.
//!
//! Each iteration asks the roadmap for a path strictly better than the
//! current best, then locally optimizes it. A feasible, shorter optimized
//! path becomes the new best and is injected back into the roadmap so later
//! samples can connect through it. If optimization fails to improve, the
//! planner path (which already beat the old best) stands. Stopping at any
//! point returns the best path found so far.

use crate::budget::{Budget, Clock};
use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::path::{Config, Path};
use crate::roadmap::{Roadmap, EPS_IMPROVE};
use crate::rng::{stream_rng, STREAM_SAMPLING};
use serde::{Deserialize, Serialize};

/// Planning method selector, as exposed by the CLI and benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Iosmp,
    PrmStar,
    OptOnly,
    IosmpNoshare,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Iosmp => "iosmp",
            Method::PrmStar => "prm_star",
            Method::OptOnly => "opt_only",
            Method::IosmpNoshare => "iosmp_noshare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Feed optimized paths back into the roadmap (disable for the
    /// path-sharing ablation).
    pub share_optimized_paths: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            share_optimized_paths: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub budget: Budget,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
}

impl PlanOptions {
    pub fn new(budget: Budget) -> Self {
        PlanOptions {
            budget,
            optimizer: OptimizerConfig::default(),
            planner: PlannerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    PlannerPath,
    OptimizedPath,
}

/// One best-path update. `t` is wall seconds, or consumed sample draws in
/// budget mode; `samples` counts accepted samples so far, which makes the
/// at-least-one-sample-between-optimizations rule checkable from the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: f64,
    pub kind: EventKind,
    pub cost: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanTrace {
    pub events: Vec<TraceEvent>,
}

impl PlanTrace {
    fn push(&mut self, clock: &Clock, kind: EventKind, cost: f64) {
        self.events.push(TraceEvent {
            t: clock.now(),
            kind,
            cost,
            samples: clock.accepted(),
        });
    }

    /// CSV export: `wall_time_s,event,cost` with events `planner_path` /
    /// `optimized_path`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wall_time_s,event,cost\n");
        for e in &self.events {
            let kind = match e.kind {
                EventKind::PlannerPath => "planner_path",
                EventKind::OptimizedPath => "optimized_path",
            };
            out.push_str(&format!("{},{},{}\n", e.t, kind, e.cost));
        }
        out
    }

    /// Best cost achieved at or before time `t`, if any.
    pub fn cost_at(&self, t: f64) -> Option<f64> {
        self.events
            .iter()
            .take_while(|e| e.t <= t)
            .map(|e| e.cost)
            .fold(None, |acc, c| Some(acc.map_or(c, |a: f64| a.min(c))))
    }

    pub fn final_cost(&self) -> Option<f64> {
        self.events.last().map(|e| e.cost)
    }
}

#[derive(Debug)]
pub struct PlanResult {
    pub best_path: Option<Path>,
    /// Summed path length of `best_path`; infinity when no path was found.
    pub best_cost: f64,
    pub trace: PlanTrace,
    /// Completed expansion+optimization iterations.
    pub iterations: usize,
    /// Optimized paths that failed roadmap re-validation (surfaced, not
    /// silently dropped).
    pub injection_rejections: usize,
    /// The roadmap, for dumps, rendering and the supergraph test. None for
    /// the optimizer-only method.
    pub roadmap: Option<Roadmap>,
}

fn run_loop(scenario: &Scenario, opts: &PlanOptions, with_optimization: bool) -> Result<PlanResult> {
    scenario.validate()?;
    let mut roadmap = Roadmap::new(scenario, opts.optimizer.eps_feas)?;
    let mut clock = Clock::new(opts.budget);
    let mut rng = stream_rng(scenario.seed, STREAM_SAMPLING);

    let mut trace = PlanTrace::default();
    let mut best: Option<Path> = None;
    let mut best_cost = f64::INFINITY;
    // planner paths that failed 10x re-validation still raise the bar, so the
    // expansion step keeps making progress instead of returning them again
    let mut bar = f64::INFINITY;
    let mut iterations = 0;
    let mut injection_rejections = 0;

    while !clock.expired() {
        let Some(planner_path) = roadmap.expand_until_improved(scenario, bar, &mut clock, &mut rng)?
        else {
            break;
        };
        iterations += 1;
        let planner_cost = planner_path.length();
        bar = planner_cost;

        // every best-path update re-validates against the dense checker
        let validation = scenario.validate_path(&planner_path, 10)?;
        if validation.collision_free(opts.optimizer.eps_feas) {
            best_cost = planner_cost;
            best = Some(planner_path.clone());
            trace.push(&clock, EventKind::PlannerPath, planner_cost);
        }

        if !with_optimization {
            continue;
        }

        let optimized = optimize(&planner_path, scenario, &opts.optimizer)?;
        if optimized.feasible && optimized.final_cost < best_cost * (1.0 - EPS_IMPROVE) {
            if opts.planner.share_optimized_paths {
                match roadmap.inject_path(scenario, &optimized.path) {
                    Ok(()) => {}
                    Err(Error::PathRejected(_)) => {
                        injection_rejections += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            best_cost = optimized.final_cost;
            bar = bar.min(best_cost);
            best = Some(optimized.path);
            trace.push(&clock, EventKind::OptimizedPath, best_cost);
        }
    }

    Ok(PlanResult {
        best_cost: best.as_ref().map_or(f64::INFINITY, Path::length),
        best_path: best,
        trace,
        iterations,
        injection_rejections,
        roadmap: Some(roadmap),
    })
}

/// Full interleaved planning: roadmap expansion alternating with local
/// optimization and bidirectional information sharing.
pub fn plan(scenario: &Scenario, opts: &PlanOptions) -> Result<PlanResult> {
    run_loop(scenario, opts, true)
}

/// Baseline: the identical anytime loop with the optimization step disabled
/// (plain PRM*).
pub fn plan_sampling_only(scenario: &Scenario, opts: &PlanOptions) -> Result<PlanResult> {
    run_loop(scenario, opts, false)
}

/// Baseline: one local optimization of a straight-line initialization, no
/// roadmap. For region goals there is no goal configuration to aim at, so
/// the initialization holds the start configuration and the goal-region
/// constraint pulls the tail into the region during optimization.
pub fn plan_optimizer_only(scenario: &Scenario, opts: &PlanOptions) -> Result<PlanResult> {
    scenario.validate()?;
    let clock = Clock::new(opts.budget);
    let init = match &scenario.goal {
        crate::environment::GoalSpec::SingleConfig(goal) => {
            Path::new(vec![scenario.start.clone(), goal.clone()])
        }
        crate::environment::GoalSpec::WorkspaceRegion { .. } => Path::new(vec![
            scenario.start.clone(),
            Config(scenario.start.0.clone()),
        ]),
    };
    let result = optimize(&init, scenario, &opts.optimizer)?;
    let mut trace = PlanTrace::default();
    if result.feasible {
        trace.push(&clock, EventKind::OptimizedPath, result.final_cost);
    }
    Ok(PlanResult {
        best_cost: if result.feasible {
            result.final_cost
        } else {
            f64::INFINITY
        },
        best_path: result.feasible.then_some(result.path),
        trace,
        iterations: 1,
        injection_rejections: 0,
        roadmap: None,
    })
}

/// Dispatch by method name.
pub fn run_method(method: Method, scenario: &Scenario, opts: &PlanOptions) -> Result<PlanResult> {
    match method {
        Method::Iosmp => plan(scenario, opts),
        Method::PrmStar => plan_sampling_only(scenario, opts),
        Method::OptOnly => plan_optimizer_only(scenario, opts),
        Method::IosmpNoshare => {
            let mut opts = *opts;
            opts.planner.share_optimized_paths = false;
            plan(scenario, &opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{generate_random_env, RandomEnvParams};
    use approx::assert_relative_eq;

    fn budget(n: u64) -> PlanOptions {
        PlanOptions::new(Budget::Samples(n))
    }

    #[test]
    fn empty_box_plan_reaches_the_straight_line() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 1)).unwrap();
        let r = plan(&s, &budget(50)).unwrap();
        assert!(r.best_path.is_some());
        assert_relative_eq!(r.best_cost, 1.0, epsilon = 1e-6);
        assert!(r.iterations >= 1);
    }

    #[test]
    fn trace_costs_strictly_decrease_and_final_beats_first() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 42)).unwrap();
        let r = plan(&s, &budget(2000)).unwrap();
        let costs: Vec<f64> = r.trace.events.iter().map(|e| e.cost).collect();
        assert!(costs.len() >= 2, "trace too short: {costs:?}");
        for w in costs.windows(2) {
            assert!(w[1] < w[0], "trace not strictly decreasing: {costs:?}");
        }
        let first_planner = r
            .trace
            .events
            .iter()
            .find(|e| e.kind == EventKind::PlannerPath)
            .unwrap()
            .cost;
        assert!(r.best_cost <= first_planner);
    }

    #[test]
    fn at_least_one_sample_between_optimizations() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 7)).unwrap();
        let r = plan(&s, &budget(2000)).unwrap();
        let opt_events: Vec<&TraceEvent> = r
            .trace
            .events
            .iter()
            .filter(|e| e.kind == EventKind::OptimizedPath)
            .collect();
        for pair in opt_events.windows(2) {
            assert!(
                pair[1].samples > pair[0].samples,
                "no new samples between consecutive optimizations"
            );
        }
    }

    #[test]
    fn equal_seeds_and_budgets_give_identical_traces() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 11)).unwrap();
        let a = plan(&s, &budget(1500)).unwrap();
        let b = plan(&s, &budget(1500)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(
            a.roadmap.unwrap().dump_json(),
            b.roadmap.unwrap().dump_json()
        );
    }

    #[test]
    fn sampling_only_matches_plans_sampled_subgraph() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 5)).unwrap();
        let with_opt = plan(&s, &budget(800)).unwrap();
        let without = plan_sampling_only(&s, &budget(800)).unwrap();
        assert_eq!(
            with_opt.roadmap.unwrap().sampled_subgraph(),
            without.roadmap.unwrap().sampled_subgraph()
        );
    }

    #[test]
    fn optimizer_only_solves_the_empty_box() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 1)).unwrap();
        let r = plan_optimizer_only(&s, &budget(1)).unwrap();
        assert!(r.best_path.is_some());
        assert_relative_eq!(r.best_cost, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn optimizer_only_reports_blocked_scenarios_as_failures() {
        let mut s = generate_random_env(&RandomEnvParams::new(2, 0, 13)).unwrap();
        for i in 0..13 {
            s.obstacles.push(crate::geometry::ObstaclePrimitive::Hypersphere {
                center: vec![i as f64 / 12.0, 0.5],
                radius: 0.12,
            });
        }
        // keep the scenario valid: endpoints stay clear of the wall
        s.validate().unwrap();
        let r = plan_optimizer_only(&s, &budget(1)).unwrap();
        assert!(r.best_path.is_none());
        assert!(r.best_cost.is_infinite());
        assert!(r.trace.events.is_empty());
    }

    #[test]
    fn best_cost_is_non_increasing_over_the_trace() {
        for seed in [3u64, 17, 29] {
            let s = generate_random_env(&RandomEnvParams::new(2, 25, seed)).unwrap();
            let r = plan(&s, &budget(1200)).unwrap();
            let mut last = f64::INFINITY;
            for t in (0..50).map(|i| i as f64 * 24.0) {
                if let Some(c) = r.trace.cost_at(t) {
                    assert!(c <= last + 1e-12);
                    last = c;
                }
            }
        }
    }

    #[test]
    fn csv_shape_is_pinned() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 1)).unwrap();
        let r = plan(&s, &budget(40)).unwrap();
        let csv = r.trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "wall_time_s,event,cost");
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 3);
            assert!(fields[1] == "planner_path" || fields[1] == "optimized_path");
            fields[0].parse::<f64>().unwrap();
            fields[2].parse::<f64>().unwrap();
        }
    }
}
