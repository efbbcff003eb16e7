//! Anytime kinematic motion planning that interleaves global roadmap
//! exploration (k-nearest PRM*) with local augmented Lagrangian path
//! optimization, sharing vertices and paths between the two phases.
//!
//! The planner alternates two steps under a time or sample budget:
//!
//! 1. expand the roadmap until it yields a path shorter than the current
//!    best, and
//! 2. locally optimize that path under collision, joint-limit and goal
//!    constraints, feeding the optimized waypoints back into the roadmap.
//!
//! Optimizer-added vertices are tagged and never counted toward the
//! k-nearest neighbor rule, so the sampling subgraph is exactly what plain
//! PRM* would have built with the same seed: interleaving keeps the
//! asymptotic-optimality machinery intact while the optimizer supplies
//! locally refined solutions at every iteration.

pub mod bench;
pub mod budget;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod optimizer;
pub mod orchestrator;
pub mod path;
pub mod render;
pub mod rng;
pub mod roadmap;
pub mod robot;
pub mod scenarios;

pub use budget::Budget;
pub use environment::{generate_random_env, GoalSpec, RandomEnvParams, Scenario};
pub use error::{Error, Result};
pub use geometry::ObstaclePrimitive;
pub use orchestrator::{plan, plan_optimizer_only, plan_sampling_only, Method, PlanOptions, PlanResult};
pub use path::{Config, Path};
pub use robot::{PointRobotModel, RobotModel, SerialArmModel};
