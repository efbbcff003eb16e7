//! Augmented Lagrangian local optimization of a fixed-topology waypoint path.
//!
//! The objective is summed Euclidean path length; inequality constraints are
//! the per-edge obstacle clearances, joint limits, self-collision terms and
//! (for region goals) the end-effector's goal-region membership. Each outer
//! iteration minimizes the augmented Lagrangian with gradient descent plus
//! backtracking line search, then refreshes the multiplier estimates and
//! shrinks the penalty parameter, which strengthens the quadratic term
//! 1/(2 mu) gamma^2.
//!
//! Start and goal waypoints are pinned for single-configuration goals; for
//! region goals the final waypoint is free and the region constraint keeps it
//! inside the goal sphere at convergence.

use crate::environment::{GoalSpec, Scenario};
use crate::error::{Error, Result};
use crate::path::Path;
use crate::robot::RobotModel;
use serde::{Deserialize, Serialize};

/// Tunables for [`optimize`]. Defaults are library defaults, overridable via
/// config files and CLI flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Initial penalty parameter mu > 0.
    pub mu0: f64,
    /// Multiplicative mu update in (0, 1); smaller mu = stronger penalty.
    pub mu_up: f64,
    /// Outer-loop gradient-norm tolerance.
    pub tau: f64,
    /// Inner gradient-descent gradient-norm tolerance.
    pub tau_inner: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Paths are arclength-resampled to this many waypoints before
    /// optimization.
    pub waypoints: usize,
    /// Feasibility slack: a result is feasible when every constraint value
    /// is >= -eps_feas at 10x checking resolution.
    pub eps_feas: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            mu0: 1.0,
            mu_up: 0.5,
            tau: 1e-4,
            tau_inner: 1e-5,
            max_outer: 20,
            max_inner: 200,
            waypoints: 20,
            eps_feas: 1e-8,
        }
    }
}

/// Multiplier estimates and penalty parameter for one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlState {
    pub lambda: Vec<f64>,
    pub mu: f64,
}

impl AlState {
    pub fn new(count: usize, mu0: f64) -> Self {
        AlState {
            lambda: vec![0.0; count],
            mu: mu0,
        }
    }

    /// lambda_i <- max(lambda_i - g_i / mu, 0) for every constraint, then
    /// mu <- mu * mu_up. The clamp keeps multipliers non-negative.
    pub fn update_multipliers(&mut self, values: &[f64], mu_up: f64) {
        debug_assert_eq!(values.len(), self.lambda.len());
        for (l, g) in self.lambda.iter_mut().zip(values) {
            *l = (*l - g / self.mu).max(0.0);
        }
        self.mu *= mu_up;
    }
}

/// Per-constraint penalty term of the augmented Lagrangian.
#[inline]
pub fn psi(gamma: f64, sigma: f64, mu: f64) -> f64 {
    if gamma - mu * sigma <= 0.0 {
        -sigma * gamma + gamma * gamma / (2.0 * mu)
    } else {
        -(mu / 2.0) * sigma * sigma
    }
}

/// d psi / d gamma. The two branches meet with matching value and slope at
/// gamma = mu * sigma, so psi is C^1.
#[inline]
pub fn psi_dgamma(gamma: f64, sigma: f64, mu: f64) -> f64 {
    if gamma - mu * sigma <= 0.0 {
        -sigma + gamma / mu
    } else {
        0.0
    }
}

/// Constraint layout for one optimization problem. Edge collision terms come
/// first (edge-major, robot-defined term order within an edge), then joint
/// limits per free waypoint, then the goal-region term. Per-edge checking
/// resolutions are frozen from the initial path so the objective stays fixed
/// throughout the run.
pub struct ConstraintSet<'a> {
    scenario: &'a Scenario,
    waypoint_count: usize,
    free_lo: usize,
    free_hi: usize, // exclusive
    edge_resolutions: Vec<usize>,
    terms_per_edge: usize,
    limit_terms_per_waypoint: usize,
    has_region: bool,
    count: usize,
}

/// Gradient information handed to constraint visitors.
pub enum TermGrad<'g> {
    None,
    /// Term attached to edge (edge, edge+1); gradients per endpoint config.
    Edge {
        edge: usize,
        grad_a: &'g [f64],
        grad_b: &'g [f64],
    },
    /// Term attached to a single waypoint.
    Waypoint { waypoint: usize, grad: &'g [f64] },
}

impl<'a> ConstraintSet<'a> {
    pub fn new(scenario: &'a Scenario, initial: &Path) -> Self {
        let n = initial.waypoints.len();
        assert!(n >= 2, "constraint set needs at least two waypoints");
        let free_hi = match scenario.goal {
            GoalSpec::SingleConfig(_) => n - 1,
            GoalSpec::WorkspaceRegion { .. } => n,
        };
        let edge_resolutions: Vec<usize> = initial
            .waypoints
            .windows(2)
            .map(|w| scenario.robot.checking_resolution(w[0].distance(&w[1])))
            .collect();
        let terms_per_edge = match &scenario.robot {
            RobotModel::Point(_) => scenario.obstacles.len(),
            RobotModel::Arm(m) => {
                m.bodies.len() * scenario.obstacles.len() + m.self_collision_pairs().len()
            }
        };
        let limit_terms_per_waypoint = match &scenario.robot {
            RobotModel::Point(_) => 0,
            RobotModel::Arm(m) => 2 * m.dof(),
        };
        let has_region = matches!(scenario.goal, GoalSpec::WorkspaceRegion { .. });
        let count = (n - 1) * terms_per_edge
            + (free_hi - 1) * limit_terms_per_waypoint
            + usize::from(has_region);
        ConstraintSet {
            scenario,
            waypoint_count: n,
            free_lo: 1,
            free_hi,
            edge_resolutions,
            terms_per_edge,
            limit_terms_per_waypoint,
            has_region,
            count,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn free_range(&self) -> std::ops::Range<usize> {
        self.free_lo..self.free_hi
    }

    fn visit<F>(&self, path: &Path, with_grad: bool, mut visit: F) -> Result<()>
    where
        F: FnMut(usize, f64, TermGrad<'_>),
    {
        debug_assert_eq!(path.waypoints.len(), self.waypoint_count);
        let mut ci = 0;
        for (e, w) in path.waypoints.windows(2).enumerate() {
            // signed-distance metric: same feasible set as the clearance
            // values, but the gradient keeps unit magnitude at the surface,
            // which the multiplier iteration needs to converge
            let terms = self.scenario.robot.edge_constraints_metric(
                &w[0],
                &w[1],
                &self.scenario.obstacles,
                self.edge_resolutions[e],
                crate::geometry::ClearanceMetric::SignedDistance,
                with_grad,
            )?;
            debug_assert_eq!(terms.len(), self.terms_per_edge);
            for t in &terms {
                let grad = if with_grad {
                    TermGrad::Edge {
                        edge: e,
                        grad_a: &t.grad_a,
                        grad_b: &t.grad_b,
                    }
                } else {
                    TermGrad::None
                };
                visit(ci, t.value, grad);
                ci += 1;
            }
        }
        if self.limit_terms_per_waypoint > 0 {
            if let RobotModel::Arm(m) = &self.scenario.robot {
                for w in self.free_lo..self.free_hi {
                    for (value, grad) in m.joint_limit_values(&path.waypoints[w]) {
                        let g = if with_grad {
                            TermGrad::Waypoint {
                                waypoint: w,
                                grad: &grad,
                            }
                        } else {
                            TermGrad::None
                        };
                        visit(ci, value, g);
                        ci += 1;
                    }
                }
            }
        }
        if self.has_region {
            let (value, grad) = self
                .scenario
                .goal_region_constraint(path.last())?;
            let g = if with_grad {
                TermGrad::Waypoint {
                    waypoint: self.waypoint_count - 1,
                    grad: &grad,
                }
            } else {
                TermGrad::None
            };
            visit(ci, value, g);
            ci += 1;
        }
        debug_assert_eq!(ci, self.count);
        Ok(())
    }

    /// Raw constraint values in canonical order (for multiplier updates).
    pub fn constraint_values(&self, path: &Path) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.count);
        self.visit(path, false, |_, v, _| out.push(v))?;
        Ok(out)
    }
}

/// Gradient of summed path length with respect to the free waypoints.
fn length_gradient(path: &Path, cset: &ConstraintSet<'_>, grad: &mut [f64]) {
    let d = path.first().dim();
    for w in cset.free_range() {
        let base = (w - cset.free_lo) * d;
        let q = &path.waypoints[w];
        let prev = &path.waypoints[w - 1];
        let dp = q.distance(prev);
        if dp > 0.0 {
            for c in 0..d {
                grad[base + c] += (q[c] - prev[c]) / dp;
            }
        }
        if w + 1 < path.waypoints.len() {
            let next = &path.waypoints[w + 1];
            let dn = q.distance(next);
            if dn > 0.0 {
                for c in 0..d {
                    grad[base + c] += (q[c] - next[c]) / dn;
                }
            }
        }
    }
}

/// Augmented Lagrangian value and (optionally) its gradient over the free
/// waypoints: L_A = length(p) + sum_i psi(g_i(p), lambda_i, mu).
pub fn augmented_lagrangian(
    path: &Path,
    state: &AlState,
    cset: &ConstraintSet<'_>,
) -> Result<(f64, Vec<f64>)> {
    let d = path.first().dim();
    let free = cset.free_range().len();
    let mut grad = vec![0.0; free * d];
    let mut value = path.length();
    length_gradient(path, cset, &mut grad);

    let (free_lo, free_hi) = (cset.free_lo, cset.free_hi);
    cset.visit(path, true, |ci, g, term| {
        value += psi(g, state.lambda[ci], state.mu);
        let dpsi = psi_dgamma(g, state.lambda[ci], state.mu);
        if dpsi == 0.0 {
            return;
        }
        match term {
            TermGrad::Edge { edge, grad_a, grad_b } => {
                let (wa, wb) = (edge, edge + 1);
                if wa >= free_lo && wa < free_hi {
                    let base = (wa - free_lo) * d;
                    for (c, ga) in grad_a.iter().enumerate() {
                        grad[base + c] += dpsi * ga;
                    }
                }
                if wb >= free_lo && wb < free_hi {
                    let base = (wb - free_lo) * d;
                    for (c, gb) in grad_b.iter().enumerate() {
                        grad[base + c] += dpsi * gb;
                    }
                }
            }
            TermGrad::Waypoint { waypoint, grad: gw } => {
                if waypoint >= free_lo && waypoint < free_hi {
                    let base = (waypoint - free_lo) * d;
                    for (c, g) in gw.iter().enumerate() {
                        grad[base + c] += dpsi * g;
                    }
                }
            }
            TermGrad::None => {}
        }
    })?;
    Ok((value, grad))
}

/// Value-only evaluation for line search probes.
fn al_value(path: &Path, state: &AlState, cset: &ConstraintSet<'_>) -> Result<f64> {
    let mut value = path.length();
    cset.visit(path, false, |ci, g, _| {
        value += psi(g, state.lambda[ci], state.mu);
    })?;
    Ok(value)
}

fn apply_step(path: &Path, cset: &ConstraintSet<'_>, grad: &[f64], alpha: f64) -> Path {
    let d = path.first().dim();
    let mut out = path.clone();
    for w in cset.free_range() {
        let base = (w - cset.free_lo) * d;
        for c in 0..d {
            out.waypoints[w].0[c] -= alpha * grad[base + c];
        }
    }
    out
}

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-12;

struct InnerOutcome {
    path: Path,
    stalled: bool,
    steps: usize,
}

/// Gradient descent with backtracking (Armijo) line search until the
/// gradient norm drops below `tau_inner` or the step cap. The accepted
/// iterates never increase L_A.
fn inner_minimize(
    path: &Path,
    state: &AlState,
    cset: &ConstraintSet<'_>,
    cfg: &OptimizerConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<InnerOutcome> {
    let mut p = path.clone();
    let (mut f, mut grad) = augmented_lagrangian(&p, state, cset)?;
    if let Some(t) = trace.as_deref_mut() {
        t.push(f);
    }
    let mut steps = 0;
    while steps < cfg.max_inner {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() <= cfg.tau_inner {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= MIN_STEP {
            let trial = apply_step(&p, cset, &grad, alpha);
            let ft = al_value(&trial, state, cset)?;
            if ft <= f - ARMIJO_C * alpha * gnorm2 {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= BACKTRACK;
        }
        steps += 1;
        match accepted {
            Some((trial, ft)) => {
                p = trial;
                f = ft;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(f);
                }
                let refreshed = augmented_lagrangian(&p, state, cset)?;
                grad = refreshed.1;
            }
            None => {
                return Ok(InnerOutcome {
                    path: p,
                    stalled: true,
                    steps,
                });
            }
        }
    }
    Ok(InnerOutcome {
        path: p,
        stalled: false,
        steps,
    })
}

/// Outcome of one optimization run. `feasible` means every constraint value
/// re-validated at 10x checking resolution is >= -eps_feas; infeasible
/// results are reported, never thrown.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub path: Path,
    pub converged: bool,
    pub feasible: bool,
    pub final_cost: f64,
    pub outer_iterations: usize,
    pub inner_steps: usize,
    /// Worst constraint value found during re-validation.
    pub min_constraint: f64,
}

/// Locally optimize `p0` for the scenario. The input is arclength-resampled
/// to `cfg.waypoints` first; endpoints are pinned (single-config goals keep
/// both ends bit-identical, region goals keep only the start).
pub fn optimize(p0: &Path, scenario: &Scenario, cfg: &OptimizerConfig) -> Result<OptimizeResult> {
    if p0.waypoints.len() < 2 {
        return Err(Error::InvalidInput("optimize needs a path with >= 2 waypoints".into()));
    }
    if p0.first().0 != scenario.start.0 {
        return Err(Error::InvalidInput("path does not begin at the scenario start".into()));
    }
    if let GoalSpec::SingleConfig(goal) = &scenario.goal {
        if p0.last().0 != goal.0 {
            return Err(Error::InvalidInput("path does not end at the goal configuration".into()));
        }
    }

    let mut path = p0.resample(cfg.waypoints.max(2));
    let cset = ConstraintSet::new(scenario, &path);
    let mut state = AlState::new(cset.len(), cfg.mu0);

    let mut inner_steps = 0;
    let mut outer_iterations = 0;
    let mut converged = false;
    for _ in 0..cfg.max_outer {
        let outcome = inner_minimize(&path, &state, &cset, cfg, None)?;
        path = outcome.path;
        inner_steps += outcome.steps;
        outer_iterations += 1;

        let values = cset.constraint_values(&path)?;
        state.update_multipliers(&values, cfg.mu_up);

        // convergence is judged against the refreshed multipliers: if they
        // no longer perturb the stationary point, the KKT residual is small
        let (_, grad) = augmented_lagrangian(&path, &state, &cset)?;
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= cfg.tau {
            converged = true;
            break;
        }
        if outcome.stalled {
            break;
        }
    }

    let validation = scenario.validate_path(&path, 10)?;
    let feasible = validation.collision_free(cfg.eps_feas) && validation.endpoints_ok;
    Ok(OptimizeResult {
        final_cost: path.length(),
        path,
        converged,
        feasible,
        outer_iterations,
        inner_steps,
        min_constraint: validation.min_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{generate_random_env, RandomEnvParams};
    use crate::path::Config;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn psi_hand_values() {
        // gamma - mu*sigma = 1 > 0: inactive branch
        assert_eq!(psi(1.0, 0.0, 1.0), 0.0);
        // gamma - mu*sigma = -2 <= 0: active branch = 2 + 1/1 = 3
        assert_eq!(psi(-1.0, 2.0, 0.5), 3.0);
        // psi(gamma > 0, 0, large mu) stays on the inactive branch -> 0
        assert_eq!(psi(1.0, 0.0, 1e9), 0.0);
    }

    #[test]
    fn psi_is_continuous_at_the_branch_boundary() {
        for &(sigma, mu) in &[(0.5, 1.0), (2.0, 0.25), (1.3, 0.7)] {
            let gamma = mu * sigma;
            let active = -sigma * gamma + gamma * gamma / (2.0 * mu);
            let inactive = -(mu / 2.0) * sigma * sigma;
            assert_relative_eq!(active, inactive, epsilon = 1e-15);
            // slopes match too (C^1)
            assert_relative_eq!(psi_dgamma(gamma, sigma, mu), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn multiplier_update_hand_values() {
        let mut s = AlState {
            lambda: vec![1.0],
            mu: 0.25,
        };
        s.update_multipliers(&[0.5], 0.5);
        assert_eq!(s.lambda[0], 0.0); // max(1 - 2, 0)
        assert_eq!(s.mu, 0.125);

        let mut s = AlState {
            lambda: vec![1.0],
            mu: 0.5,
        };
        s.update_multipliers(&[-0.5], 0.5);
        assert_eq!(s.lambda[0], 2.0); // max(1 + 1, 0)

        let mut s = AlState {
            lambda: vec![0.75],
            mu: 0.5,
        };
        s.update_multipliers(&[0.0], 0.5);
        assert_eq!(s.lambda[0], 0.75); // g = 0 leaves lambda unchanged
        assert_eq!(s.mu, 0.25);
    }

    #[test]
    fn lambda_stays_nonnegative_and_mu_strictly_decreases() {
        let mut rng = crate::rng::stream_rng(13, 9);
        let mut s = AlState::new(8, 1.0);
        for _ in 0..50 {
            let vals: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mu_before = s.mu;
            s.update_multipliers(&vals, 0.5);
            assert!(s.lambda.iter().all(|l| *l >= 0.0));
            assert!(s.mu < mu_before);
        }
    }

    fn straight_path(start: &[f64], goal: &[f64], n: usize) -> Path {
        Path::new(vec![Config(start.to_vec()), Config(goal.to_vec())]).resample(n)
    }

    #[test]
    fn unconstrained_al_is_path_length() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 3)).unwrap();
        let p = straight_path(&s.start, &[0.5, 1.0], 10);
        let cset = ConstraintSet::new(&s, &p);
        assert_eq!(cset.len(), 0);
        let state = AlState::new(0, 1.0);
        let (v, grad) = augmented_lagrangian(&p, &state, &cset).unwrap();
        assert_relative_eq!(v, p.length(), epsilon = 1e-12);
        // straight line: interior length gradients cancel
        assert!(grad.iter().all(|g| g.abs() < 1e-9));
    }

    /// FD check of the full L_A gradient on random point-robot instances.
    /// Cases whose active clearance terms sit at a clamp boundary are
    /// redrawn (the documented subgradient kink).
    #[test]
    fn al_gradient_matches_finite_differences() {
        let mut rng = crate::rng::stream_rng(14, 9);
        let mut checked = 0;
        'outer: while checked < 100 {
            let seed = rng.gen_range(0..10_000);
            let s = generate_random_env(&RandomEnvParams::new(2, 8, seed)).unwrap();
            let mut p = straight_path(&s.start, &[0.5, 1.0], 8);
            for w in 1..7 {
                p.waypoints[w].0[0] += rng.gen_range(-0.2..0.2);
                p.waypoints[w].0[1] += rng.gen_range(-0.2..0.2);
            }
            let cset = ConstraintSet::new(&s, &p);
            let mut state = AlState::new(cset.len(), rng.gen_range(0.2..1.0));
            for l in state.lambda.iter_mut() {
                *l = rng.gen_range(0.0..1.0);
            }

            // clearance is C^1 away from zero core distance; reject only the
            // genuinely non-smooth or vanishing-gradient configurations
            for w in p.waypoints.windows(2) {
                for ob in &s.obstacles {
                    let crate::geometry::ObstaclePrimitive::Hypersphere { center, radius } = ob
                    else {
                        unreachable!()
                    };
                    let (_, dist) = crate::geometry::seg_point_closest(&w[0], &w[1], center);
                    if dist < 1e-3 || (dist - radius).abs() < 1e-3 {
                        continue 'outer;
                    }
                }
            }

            let (_, grad) = augmented_lagrangian(&p, &state, &cset).unwrap();
            let h = 1e-6;
            let mut fd = vec![0.0; grad.len()];
            for w in 1..7 {
                for c in 0..2 {
                    let idx = (w - 1) * 2 + c;
                    let mut hi = p.clone();
                    let mut lo = p.clone();
                    hi.waypoints[w].0[c] += h;
                    lo.waypoints[w].0[c] -= h;
                    let fh = al_value(&hi, &state, &cset).unwrap();
                    let fl = al_value(&lo, &state, &cset).unwrap();
                    fd[idx] = (fh - fl) / (2.0 * h);
                }
            }
            let diff: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let scale = fd.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-6);
            assert!(diff / scale <= 1e-4, "grad {grad:?} vs fd {fd:?}");
            checked += 1;
        }
    }

    #[test]
    fn inner_minimize_straightens_a_zigzag() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 5)).unwrap();
        let mut p = straight_path(&s.start, &[0.5, 1.0], 20);
        let mut rng = crate::rng::stream_rng(15, 9);
        for w in 1..19 {
            p.waypoints[w].0[0] += rng.gen_range(-0.15..0.15);
        }
        let cset = ConstraintSet::new(&s, &p);
        let state = AlState::new(0, 1.0);
        let cfg = OptimizerConfig {
            max_inner: 4000,
            ..OptimizerConfig::default()
        };
        let out = inner_minimize(&p, &state, &cset, &cfg, None).unwrap();
        assert!(!out.stalled);
        assert_relative_eq!(out.path.length(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn inner_minimize_exits_immediately_at_the_optimum() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 5)).unwrap();
        let p = straight_path(&s.start, &[0.5, 1.0], 20);
        let cset = ConstraintSet::new(&s, &p);
        let state = AlState::new(0, 1.0);
        let out = inner_minimize(&p, &state, &cset, &OptimizerConfig::default(), None).unwrap();
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn inner_minimize_is_monotone_in_al_value() {
        let mut rng = crate::rng::stream_rng(16, 9);
        for seed in 0..5 {
            let s = generate_random_env(&RandomEnvParams::new(2, 10, seed)).unwrap();
            let mut p = straight_path(&s.start, &[0.5, 1.0], 12);
            for w in 1..11 {
                p.waypoints[w].0[0] += rng.gen_range(-0.2..0.2);
            }
            let cset = ConstraintSet::new(&s, &p);
            let mut state = AlState::new(cset.len(), 1.0);
            for l in state.lambda.iter_mut() {
                *l = rng.gen_range(0.0..0.5);
            }
            let mut values = Vec::new();
            let cfg = OptimizerConfig {
                max_inner: 50,
                ..OptimizerConfig::default()
            };
            inner_minimize(&p, &state, &cset, &cfg, Some(&mut values)).unwrap();
            for w in values.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "L_A increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn optimize_empty_box_reaches_the_straight_line() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 7)).unwrap();
        let p0 = straight_path(&s.start, &[0.5, 1.0], 2);
        let r = optimize(&p0, &s, &OptimizerConfig::default()).unwrap();
        assert!(r.feasible);
        assert_relative_eq!(r.final_cost, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn optimize_pins_endpoints_bit_identically() {
        let s = generate_random_env(&RandomEnvParams::new(3, 10, 11)).unwrap();
        let goal = match &s.goal {
            crate::environment::GoalSpec::SingleConfig(g) => g.clone(),
            _ => unreachable!(),
        };
        let p0 = Path::new(vec![s.start.clone(), goal.clone()]);
        let r = optimize(&p0, &s, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.path.first().0, s.start.0);
        assert_eq!(r.path.last().0, goal.0);
    }

    #[test]
    fn optimize_reports_infeasible_results_honestly() {
        // a wall of overlapping spheres across the whole box leaves the
        // straight-line homotopy class with no collision-free local optimum
        let mut s = generate_random_env(&RandomEnvParams::new(2, 0, 13)).unwrap();
        for i in 0..13 {
            let x = i as f64 / 12.0;
            s.obstacles.push(crate::geometry::ObstaclePrimitive::Hypersphere {
                center: vec![x, 0.5],
                radius: 0.12,
            });
        }
        let p0 = straight_path(&s.start, &[0.5, 1.0], 2);
        let r = optimize(&p0, &s, &OptimizerConfig::default()).unwrap();
        assert!(!r.feasible, "blocked wall should defeat local optimization");
        assert!(r.min_constraint < 0.0);
    }

    #[test]
    fn optimize_terminates_within_iteration_caps() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 17)).unwrap();
        let p0 = straight_path(&s.start, &[0.5, 1.0], 2);
        let cfg = OptimizerConfig::default();
        let r = optimize(&p0, &s, &cfg).unwrap();
        assert!(r.outer_iterations <= cfg.max_outer);
        assert!(r.inner_steps <= cfg.max_outer * cfg.max_inner);
    }
}
