//! Robot models: mapping configurations to workspace bodies.
//!
//! Two models are supported. The point robot lives directly in its
//! configuration space, so a path edge is a segment there and clearance is
//! exact. The serial-link manipulator maps joint angles to posed body
//! capsules via a rigid-transform chain; edge clearance is then the minimum
//! over a discretized set of intermediate poses, with the gradient taken
//! through the minimizing sample.

use crate::error::{Error, Result};
use crate::geometry::{
    capsule_clearance, capsule_clearance_metric, capsule_pair_clearance, clearance_parts,
    clearance_parts_metric, Capsule, ClearanceMetric, ObstaclePrimitive,
};
use crate::path::Config;
use serde::{Deserialize, Serialize};

/// Point robot in an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRobotModel {
    /// Per-axis [lo, hi].
    pub bounds: Vec<[f64; 2]>,
}

impl PointRobotModel {
    pub fn unit_box(dim: usize) -> Self {
        PointRobotModel {
            bounds: vec![[0.0, 1.0]; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.len() < 2 {
            return Err(Error::InvalidInput("point robot needs dimension >= 2".into()));
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if !(b[0] < b[1]) || !b[0].is_finite() || !b[1].is_finite() {
                return Err(Error::InvalidInput(format!("bounds[{i}] = {b:?} must satisfy lo < hi")));
            }
        }
        Ok(())
    }
}

/// One revolute joint: rotation by q_i about `axis` after translating by
/// `offset` in the parent frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub axis: [f64; 3],
    pub offset: [f64; 3],
    pub limits: [f64; 2],
}

/// A collision body attached to a link frame, as a local-frame capsule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    pub link: usize,
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub radius: f64,
}

/// Generic serial-link manipulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialArmModel {
    pub joints: Vec<JointSpec>,
    pub bodies: Vec<BodySpec>,
}

/// World-frame kinematic state for one configuration: joint axes/origins for
/// Jacobians plus the posed body capsules.
#[derive(Debug, Clone)]
pub struct ArmFrames {
    pub axes: Vec<[f64; 3]>,
    pub origins: Vec<[f64; 3]>,
    pub rotations: Vec<[[f64; 3]; 3]>,
    pub bodies: Vec<Capsule>,
}

mod v3 {
    pub type V = [f64; 3];
    pub type M = [[f64; 3]; 3];

    pub const IDENTITY: M = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    #[inline]
    pub fn add(a: V, b: V) -> V {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }
    #[inline]
    pub fn sub(a: V, b: V) -> V {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
    #[inline]
    pub fn dot(a: V, b: V) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }
    #[inline]
    pub fn cross(a: V, b: V) -> V {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }
    #[inline]
    pub fn apply(m: &M, v: V) -> V {
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
    pub fn mul(a: &M, b: &M) -> M {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        out
    }
    /// Rodrigues rotation about a unit axis.
    pub fn axis_angle(axis: V, angle: f64) -> M {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let [x, y, z] = axis;
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    }
}

impl SerialArmModel {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::InvalidInput("arm model has no joints".into()));
        }
        for (i, j) in self.joints.iter().enumerate() {
            let n = v3::dot(j.axis, j.axis).sqrt();
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("joint {i} axis is not unit length ({n})")));
            }
            if !(j.limits[0] < j.limits[1]) {
                return Err(Error::InvalidInput(format!("joint {i} limits {:?} must satisfy lo < hi", j.limits)));
            }
        }
        for (i, b) in self.bodies.iter().enumerate() {
            if b.link >= self.joints.len() {
                return Err(Error::InvalidInput(format!("body {i} references link {} of {}-joint arm", b.link, self.joints.len())));
            }
            if !(b.radius > 0.0) {
                return Err(Error::InvalidInput(format!("body {i} radius must be > 0")));
            }
        }
        Ok(())
    }

    /// Full rigid-transform chain for configuration `q`.
    pub fn frames(&self, q: &[f64]) -> ArmFrames {
        debug_assert_eq!(q.len(), self.joints.len());
        let mut rot = v3::IDENTITY;
        let mut origin = [0.0f64; 3];
        let n = self.joints.len();
        let mut axes = Vec::with_capacity(n);
        let mut origins = Vec::with_capacity(n);
        let mut rotations = Vec::with_capacity(n);
        for (i, joint) in self.joints.iter().enumerate() {
            origin = v3::add(origin, v3::apply(&rot, joint.offset));
            axes.push(v3::apply(&rot, joint.axis));
            origins.push(origin);
            rot = v3::mul(&rot, &v3::axis_angle(joint.axis, q[i]));
            rotations.push(rot);
        }
        let bodies = self
            .bodies
            .iter()
            .map(|b| Capsule {
                a: v3::add(origins[b.link], v3::apply(&rotations[b.link], b.a)),
                b: v3::add(origins[b.link], v3::apply(&rotations[b.link], b.b)),
                radius: b.radius,
            })
            .collect();
        ArmFrames {
            axes,
            origins,
            rotations,
            bodies,
        }
    }

    /// Posed body capsules in the world frame.
    pub fn forward_kinematics(&self, q: &Config) -> Result<Vec<Capsule>> {
        if q.dim() != self.dof() {
            return Err(Error::DimensionMismatch(format!(
                "config has {} joints, model has {}",
                q.dim(),
                self.dof()
            )));
        }
        Ok(self.frames(q).bodies)
    }

    /// End-effector reference point: the tip (`b` endpoint) of the last body.
    pub fn ee_position(&self, q: &[f64]) -> [f64; 3] {
        let frames = self.frames(q);
        frames.bodies.last().expect("arm has at least one body").b
    }

    /// dot(u, d p/d q_i) for a point p attached to `link`, for every joint.
    /// A revolute joint i <= link moves p by axis_i x (p - origin_i).
    pub fn point_jacobian_dot(frames: &ArmFrames, link: usize, p: [f64; 3], u: [f64; 3], out: &mut [f64]) {
        for (i, g) in out.iter_mut().enumerate() {
            if i <= link {
                *g += v3::dot(u, v3::cross(frames.axes[i], v3::sub(p, frames.origins[i])));
            }
        }
    }

    /// Two inequality values per joint, (q_i - lo_i) and (hi_i - q_i), each
    /// with its dense gradient (+-unit basis vector).
    pub fn joint_limit_values(&self, q: &[f64]) -> Vec<(f64, Vec<f64>)> {
        let n = self.dof();
        let mut out = Vec::with_capacity(2 * n);
        for (i, joint) in self.joints.iter().enumerate() {
            let mut glo = vec![0.0; n];
            glo[i] = 1.0;
            out.push((q[i] - joint.limits[0], glo));
            let mut ghi = vec![0.0; n];
            ghi[i] = -1.0;
            out.push((joint.limits[1] - q[i], ghi));
        }
        out
    }

    /// Body index pairs checked for self-collision: all pairs with index gap
    /// >= 2 (adjacent links always touch at their shared joint).
    pub fn self_collision_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.bodies.len() {
            for j in i + 2..self.bodies.len() {
                pairs.push((i, j));
            }
        }
        pairs
    }
}

/// Pose indices 0..=segments reordered so that the midpoint comes first and
/// the grid refines outward; collisions near the middle of an edge are the
/// common case and get rejected after one pose.
fn bisection_order(segments: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(segments + 1);
    out.push(0);
    if segments > 0 {
        out.push(segments);
    }
    let mut queue = std::collections::VecDeque::new();
    queue.push_back((0usize, segments));
    while let Some((lo, hi)) = queue.pop_front() {
        if hi - lo < 2 {
            continue;
        }
        let mid = (lo + hi) / 2;
        out.push(mid);
        queue.push_back((lo, mid));
        queue.push_back((mid, hi));
    }
    debug_assert_eq!(out.len(), segments + 1);
    out
}

/// Identifies one inequality-constraint term produced for an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Point-robot edge vs obstacle primitive.
    Obstacle { obstacle: usize },
    /// Arm body vs obstacle primitive, minimized over intermediate poses.
    BodyObstacle { body: usize, obstacle: usize },
    /// Arm body pair, minimized over intermediate poses.
    SelfCollision { body_a: usize, body_b: usize },
}

/// One evaluated edge constraint. Gradients are with respect to the two edge
/// endpoint configurations and are empty unless requested.
#[derive(Debug, Clone)]
pub struct EdgeConstraint {
    pub kind: ConstraintKind,
    pub value: f64,
    pub grad_a: Vec<f64>,
    pub grad_b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RobotModel {
    Point(PointRobotModel),
    Arm(SerialArmModel),
}

impl RobotModel {
    pub fn dim(&self) -> usize {
        match self {
            RobotModel::Point(m) => m.bounds.len(),
            RobotModel::Arm(m) => m.dof(),
        }
    }

    /// Box to sample configurations from: workspace bounds or joint limits.
    pub fn sampling_bounds(&self) -> Vec<[f64; 2]> {
        match self {
            RobotModel::Point(m) => m.bounds.clone(),
            RobotModel::Arm(m) => m.joints.iter().map(|j| j.limits).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RobotModel::Point(m) => m.validate(),
            RobotModel::Arm(m) => m.validate(),
        }
    }

    /// Number of interpolation segments used to check an edge of the given
    /// configuration-space length. Point-robot clearance is exact, so a
    /// single segment suffices there.
    pub fn checking_resolution(&self, edge_len: f64) -> usize {
        match self {
            RobotModel::Point(_) => 1,
            RobotModel::Arm(_) => ((edge_len / 0.05).ceil() as usize).max(5),
        }
    }

    /// End-effector position, when the model has one. For the point robot the
    /// configuration itself is the workspace point (3D only).
    pub fn ee_position(&self, q: &[f64]) -> Option<[f64; 3]> {
        match self {
            RobotModel::Point(_) => {
                if q.len() == 3 {
                    Some([q[0], q[1], q[2]])
                } else {
                    None
                }
            }
            RobotModel::Arm(m) => Some(m.ee_position(q)),
        }
    }

    pub fn in_bounds(&self, q: &[f64]) -> bool {
        self.sampling_bounds()
            .iter()
            .zip(q)
            .all(|(b, x)| *x >= b[0] && *x <= b[1])
    }

    /// All collision constraint terms for the edge (qa, qb).
    ///
    /// Point robot: one exact clearance term per primitive; `resolution` is
    /// ignored. Arm: the edge is discretized into `resolution` segments and
    /// each body-obstacle and self-collision term is the minimum clearance
    /// over the interpolated poses, with the gradient taken through the
    /// minimizing pose and split onto the endpoints by its interpolation
    /// parameter.
    pub fn edge_constraints(
        &self,
        qa: &[f64],
        qb: &[f64],
        obstacles: &[ObstaclePrimitive],
        resolution: usize,
        with_grad: bool,
    ) -> Result<Vec<EdgeConstraint>> {
        self.edge_constraints_metric(qa, qb, obstacles, resolution, ClearanceMetric::SignedSquared, with_grad)
    }

    /// [`RobotModel::edge_constraints`] under an explicit clearance metric.
    /// The optimizer uses the signed-distance form, whose gradient does not
    /// vanish at the obstacle surface; both metrics share sign, zero set and
    /// minimizing pose.
    pub fn edge_constraints_metric(
        &self,
        qa: &[f64],
        qb: &[f64],
        obstacles: &[ObstaclePrimitive],
        resolution: usize,
        metric: ClearanceMetric,
        with_grad: bool,
    ) -> Result<Vec<EdgeConstraint>> {
        if qa.len() != self.dim() || qb.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "edge endpoints ({}, {}) vs model dim {}",
                qa.len(),
                qb.len(),
                self.dim()
            )));
        }
        match self {
            RobotModel::Point(_) => {
                let mut out = Vec::with_capacity(obstacles.len());
                for (oi, ob) in obstacles.iter().enumerate() {
                    let cl = clearance_parts_metric(qa, qb, ob, metric, with_grad)?;
                    out.push(EdgeConstraint {
                        kind: ConstraintKind::Obstacle { obstacle: oi },
                        value: cl.value,
                        grad_a: cl.grad_a.unwrap_or_default(),
                        grad_b: cl.grad_b.unwrap_or_default(),
                    });
                }
                Ok(out)
            }
            RobotModel::Arm(m) => m.edge_constraints_arm(qa, qb, obstacles, resolution, metric, with_grad),
        }
    }

    /// Fast validity check: are all edge constraint values >= -tolerance?
    /// Bails out at the first violation; interior poses are visited in
    /// bisection order so mid-edge collisions are caught early. Equivalent to
    /// `edge_min_clearance(..).0 >= -tolerance`.
    pub fn edge_valid(
        &self,
        qa: &[f64],
        qb: &[f64],
        obstacles: &[ObstaclePrimitive],
        resolution: usize,
        tolerance: f64,
    ) -> Result<bool> {
        match self {
            RobotModel::Point(_) => {
                for ob in obstacles {
                    if clearance_parts(qa, qb, ob, false)?.value < -tolerance {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            RobotModel::Arm(m) => {
                let segments = resolution.max(1);
                let pairs = m.self_collision_pairs();
                for j in bisection_order(segments) {
                    let t = j as f64 / segments as f64;
                    let q: Vec<f64> = qa.iter().zip(qb).map(|(a, b)| a + t * (b - a)).collect();
                    let frames = m.frames(&q);
                    for body in &frames.bodies {
                        for ob in obstacles {
                            if capsule_clearance(body, ob, false)?.value < -tolerance {
                                return Ok(false);
                            }
                        }
                    }
                    for &(i, k) in &pairs {
                        let (v, ..) = capsule_pair_clearance(&frames.bodies[i], &frames.bodies[k]);
                        if v < -tolerance {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }

    /// Minimum over every edge constraint value; cheap form used by edge
    /// validation. Returns the worst term for diagnostics.
    pub fn edge_min_clearance(
        &self,
        qa: &[f64],
        qb: &[f64],
        obstacles: &[ObstaclePrimitive],
        resolution: usize,
    ) -> Result<(f64, Option<ConstraintKind>)> {
        let terms = self.edge_constraints(qa, qb, obstacles, resolution, false)?;
        let mut min = f64::INFINITY;
        let mut worst = None;
        for t in terms {
            if t.value < min {
                min = t.value;
                worst = Some(t.kind);
            }
        }
        Ok((min, worst))
    }

    /// Minimum static constraint value at a single configuration: obstacle
    /// clearance (and, for the arm, joint limits and self-collision). The
    /// point robot's box bounds are enforced by sampling, not listed here;
    /// out-of-bounds configurations report -inf.
    pub fn static_min_value(&self, q: &[f64], obstacles: &[ObstaclePrimitive]) -> f64 {
        match self {
            RobotModel::Point(_) => {
                if !self.in_bounds(q) {
                    return f64::NEG_INFINITY;
                }
                let mut min = f64::INFINITY;
                for ob in obstacles {
                    if let Ok(cl) = clearance_parts(q, q, ob, false) {
                        min = min.min(cl.value);
                    } else {
                        return f64::NEG_INFINITY;
                    }
                }
                min
            }
            RobotModel::Arm(m) => {
                let mut min = f64::INFINITY;
                for (v, _) in m.joint_limit_values(q) {
                    min = min.min(v);
                }
                let frames = m.frames(q);
                for body in &frames.bodies {
                    for ob in obstacles {
                        match capsule_clearance(body, ob, false) {
                            Ok(cl) => min = min.min(cl.value),
                            Err(_) => return f64::NEG_INFINITY,
                        }
                    }
                }
                for (i, j) in m.self_collision_pairs() {
                    let (v, ..) = capsule_pair_clearance(&frames.bodies[i], &frames.bodies[j]);
                    min = min.min(v);
                }
                min
            }
        }
    }

    pub fn static_feasible(&self, q: &[f64], obstacles: &[ObstaclePrimitive]) -> bool {
        self.static_min_value(q, obstacles) >= 0.0
    }
}

impl SerialArmModel {
    fn edge_constraints_arm(
        &self,
        qa: &[f64],
        qb: &[f64],
        obstacles: &[ObstaclePrimitive],
        resolution: usize,
        metric: ClearanceMetric,
        with_grad: bool,
    ) -> Result<Vec<EdgeConstraint>> {
        let segments = resolution.max(1);
        let n = self.dof();
        let mut poses: Vec<(f64, ArmFrames)> = Vec::with_capacity(segments + 1);
        for j in 0..=segments {
            let t = j as f64 / segments as f64;
            let q: Vec<f64> = qa.iter().zip(qb).map(|(a, b)| a + t * (b - a)).collect();
            poses.push((t, self.frames(&q)));
        }

        let pairs = self.self_collision_pairs();
        let mut out = Vec::with_capacity(self.bodies.len() * obstacles.len() + pairs.len());

        for (bi, spec) in self.bodies.iter().enumerate() {
            for (oi, ob) in obstacles.iter().enumerate() {
                let mut min_v = f64::INFINITY;
                let mut arg = 0usize;
                for (j, (_, frames)) in poses.iter().enumerate() {
                    let v = capsule_clearance_metric(&frames.bodies[bi], ob, metric, false)?.value;
                    if v < min_v {
                        min_v = v;
                        arg = j;
                    }
                }
                let (mut grad_a, mut grad_b) = (Vec::new(), Vec::new());
                if with_grad {
                    let (t, frames) = &poses[arg];
                    let body = &frames.bodies[bi];
                    let cl = capsule_clearance_metric(body, ob, metric, true)?;
                    let mut gq = vec![0.0; n];
                    let ga = cl.grad_a.unwrap();
                    let gb = cl.grad_b.unwrap();
                    Self::point_jacobian_dot(frames, spec.link, body.a, [ga[0], ga[1], ga[2]], &mut gq);
                    Self::point_jacobian_dot(frames, spec.link, body.b, [gb[0], gb[1], gb[2]], &mut gq);
                    grad_a = gq.iter().map(|g| g * (1.0 - t)).collect();
                    grad_b = gq.iter().map(|g| g * t).collect();
                }
                out.push(EdgeConstraint {
                    kind: ConstraintKind::BodyObstacle { body: bi, obstacle: oi },
                    value: min_v,
                    grad_a,
                    grad_b,
                });
            }
        }

        for &(i, j) in &pairs {
            let mut min_v = f64::INFINITY;
            let mut arg = 0usize;
            for (p, (_, frames)) in poses.iter().enumerate() {
                let (_, _, _, delta, _) = capsule_pair_clearance(&frames.bodies[i], &frames.bodies[j]);
                let v = metric.compose(delta);
                if v < min_v {
                    min_v = v;
                    arg = p;
                }
            }
            let (mut grad_a, mut grad_b) = (Vec::new(), Vec::new());
            if with_grad {
                let (t, frames) = &poses[arg];
                let (b1, b2) = (&frames.bodies[i], &frames.bodies[j]);
                let (_, s, t2, delta, dir) = capsule_pair_clearance(b1, b2);
                let dv = metric.slope(delta);
                let u = [dir[0], dir[1], dir[2]];
                let neg_u = [-u[0], -u[1], -u[2]];
                let mut gq = vec![0.0; n];
                let scale = |v: [f64; 3], k: f64| [v[0] * k, v[1] * k, v[2] * k];
                Self::point_jacobian_dot(frames, self.bodies[i].link, b1.a, scale(u, dv * (1.0 - s)), &mut gq);
                Self::point_jacobian_dot(frames, self.bodies[i].link, b1.b, scale(u, dv * s), &mut gq);
                Self::point_jacobian_dot(frames, self.bodies[j].link, b2.a, scale(neg_u, dv * (1.0 - t2)), &mut gq);
                Self::point_jacobian_dot(frames, self.bodies[j].link, b2.b, scale(neg_u, dv * t2), &mut gq);
                grad_a = gq.iter().map(|g| g * (1.0 - t)).collect();
                grad_b = gq.iter().map(|g| g * t).collect();
            }
            out.push(EdgeConstraint {
                kind: ConstraintKind::SelfCollision { body_a: i, body_b: j },
                value: min_v,
                grad_a,
                grad_b,
            });
        }
        Ok(out)
    }
}
