//! Bundled arm scenarios: a generic 7-DOF serial arm and two ladder tasks,
//! one planning to a goal configuration and one to a workspace goal region.
//! The same scenarios ship as JSON files under `assets/` for CLI use; a test
//! keeps files and constructors in sync.

use crate::environment::{GoalSpec, Scenario};
use crate::error::Result;
use crate::geometry::ObstaclePrimitive;
use crate::path::Config;
use crate::robot::{BodySpec, JointSpec, RobotModel, SerialArmModel};

pub const ARM_FILE_NAME: &str = "arm7.json";

/// Generic 7-DOF arm: alternating z/y joint axes, 0.2 m link offsets,
/// one 0.05 m-radius capsule body per link, joint limits +-2.8 rad.
pub fn default_arm() -> SerialArmModel {
    let joints = (0..7)
        .map(|i| JointSpec {
            axis: if i % 2 == 0 { [0.0, 0.0, 1.0] } else { [0.0, 1.0, 0.0] },
            offset: if i == 0 { [0.0, 0.0, 0.0] } else { [0.2, 0.0, 0.0] },
            limits: [-2.8, 2.8],
        })
        .collect();
    let bodies = (0..7)
        .map(|link| BodySpec {
            link,
            a: [0.0, 0.0, 0.0],
            b: [0.2, 0.0, 0.0],
            radius: 0.05,
        })
        .collect();
    SerialArmModel { joints, bodies }
}

fn capsule(a: [f64; 3], b: [f64; 3], radius: f64) -> ObstaclePrimitive {
    ObstaclePrimitive::Capsule { axis: [a, b], radius }
}

/// Two vertical rails plus rungs, standing in front of the arm.
fn ladder(x: f64, half_width: f64, z_lo: f64, z_hi: f64, rung_z: &[f64]) -> Vec<ObstaclePrimitive> {
    let mut out = vec![
        capsule([x, -half_width, z_lo], [x, -half_width, z_hi], 0.04),
        capsule([x, half_width, z_lo], [x, half_width, z_hi], 0.04),
    ];
    for &z in rung_z {
        out.push(capsule([x, -half_width, z], [x, half_width, z], 0.03));
    }
    out
}

/// Task 1: move the arm from below the ladder's middle rung to above it,
/// both ends given as explicit configurations.
pub fn arm_task_goal_config() -> Result<Scenario> {
    let arm = default_arm();
    let start = Config(vec![0.0, 1.1, 0.0, 0.5, 0.0, 0.3, 0.0]);
    let goal = Config(vec![0.0, -0.7, 0.0, -0.4, 0.0, -0.2, 0.0]);
    let scenario = Scenario {
        robot: RobotModel::Arm(arm),
        obstacles: ladder(0.8, 0.45, -0.8, 1.0, &[0.1]),
        start,
        goal: GoalSpec::SingleConfig(goal),
        seed: 0,
        arm_source: Some(ARM_FILE_NAME.into()),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Task 2: start reaching up, end with the end-effector inside a workspace
/// sphere below the ladder's middle rung, in a more cluttered scene.
pub fn arm_task_goal_region() -> Result<Scenario> {
    let arm = default_arm();
    let start = Config(vec![0.0, -0.7, 0.0, -0.4, 0.0, -0.2, 0.0]);
    let mut obstacles = ladder(0.8, 0.45, -0.8, 1.0, &[0.1, 0.55]);
    obstacles.push(capsule([0.3, -0.6, -0.4], [0.3, -0.6, 0.6], 0.05));
    obstacles.push(capsule([0.3, 0.6, -0.4], [0.3, 0.6, 0.6], 0.05));
    let scenario = Scenario {
        robot: RobotModel::Arm(arm),
        obstacles,
        start,
        goal: GoalSpec::WorkspaceRegion {
            center: [0.62, 0.0, -0.25],
            radius: 0.22,
        },
        seed: 0,
        arm_source: Some(ARM_FILE_NAME.into()),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// JSON text of the bundled arm model, as shipped in `assets/`.
pub fn default_arm_json() -> String {
    let doc = crate::environment::ArmModelDoc {
        joints: default_arm().joints,
        bodies: default_arm().bodies,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("arm serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_are_valid() {
        let t1 = arm_task_goal_config().unwrap();
        assert_eq!(t1.dim(), 7);
        let t2 = arm_task_goal_region().unwrap();
        assert!(matches!(t2.goal, GoalSpec::WorkspaceRegion { .. }));
    }

    #[test]
    fn asset_files_match_the_constructors() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
        assert_eq!(
            std::fs::read_to_string(dir.join(ARM_FILE_NAME)).unwrap(),
            default_arm_json()
        );
        let t1 = crate::environment::scenario_load(&dir.join("arm_task_goal_config.json")).unwrap();
        assert_eq!(t1, arm_task_goal_config().unwrap());
        let t2 = crate::environment::scenario_load(&dir.join("arm_task_goal_region.json")).unwrap();
        assert_eq!(t2, arm_task_goal_region().unwrap());
    }
}
