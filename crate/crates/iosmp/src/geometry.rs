//! Obstacle primitives and signed clearance between path edges and primitives.
//!
//! Clearance is a signed squared distance. With `dist` the distance between a
//! segment and a primitive's core (center point or axis segment) and `r` the
//! combined radius, the clearance value is `sign(dist - r) * (dist - r)^2`;
//! negative values measure penetration. Gradients are taken with respect to
//! the segment endpoints by differentiating through the closest-point
//! parameters, which is exact away from parameter ties (Danskin's theorem).
//! At a tie or at zero core distance the clamped-branch expression is used,
//! with the direction vector zeroed when it is undefined.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point in d-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A straight segment between two points of equal dimension. Degenerate
/// segments (a == b) are permitted and reduce to point queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "segment endpoints have dimensions {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(Segment {
            a: Point(a),
            b: Point(b),
        })
    }
}

/// A capsule: the volume swept by a sphere of `radius` along the segment
/// `a`-`b`. Used both for robot bodies and (as an obstacle) ladder rails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub radius: f64,
}

/// An obstacle primitive supporting signed clearance and its gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObstaclePrimitive {
    /// A d-dimensional ball.
    Hypersphere { center: Vec<f64>, radius: f64 },
    /// A 3D capsule given by its axis segment endpoints.
    Capsule { axis: [[f64; 3]; 2], radius: f64 },
}

impl ObstaclePrimitive {
    pub fn radius(&self) -> f64 {
        match self {
            ObstaclePrimitive::Hypersphere { radius, .. } => *radius,
            ObstaclePrimitive::Capsule { radius, .. } => *radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.radius();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidInput(format!("primitive radius {r} must be > 0")));
        }
        let coords: Vec<f64> = match self {
            ObstaclePrimitive::Hypersphere { center, .. } => center.clone(),
            ObstaclePrimitive::Capsule { axis, .. } => {
                axis.iter().flat_map(|p| p.iter().copied()).collect()
            }
        };
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("primitive has non-finite coordinates".into()));
        }
        Ok(())
    }
}

/// Signed squared clearance, optionally with its gradient with respect to the
/// two query-segment endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Clearance {
    pub value: f64,
    pub grad_a: Option<Vec<f64>>,
    pub grad_b: Option<Vec<f64>>,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

const DEGENERATE_EPS: f64 = 1e-300;

/// Closest point on segment a-b to point p: parameter t in [0,1] and the
/// distance. Degenerate segments collapse to t = 0. Allocation free.
pub(crate) fn seg_point_closest(a: &[f64], b: &[f64], p: &[f64]) -> (f64, f64) {
    let mut len2 = 0.0;
    let mut proj = 0.0;
    for i in 0..a.len() {
        let ab = b[i] - a[i];
        len2 += ab * ab;
        proj += (p[i] - a[i]) * ab;
    }
    let t = if len2 <= DEGENERATE_EPS {
        0.0
    } else {
        (proj / len2).clamp(0.0, 1.0)
    };
    let mut d2 = 0.0;
    for i in 0..a.len() {
        let diff = a[i] + t * (b[i] - a[i]) - p[i];
        d2 += diff * diff;
    }
    (t, d2.sqrt())
}

/// Closest points between segments p1-q1 and p2-q2 (Ericson's clamped
/// closed form): parameters (s, t) and the distance. Parallel and degenerate
/// cases resolve to a deterministic minimizer. Allocation free.
pub(crate) fn seg_seg_closest(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> (f64, f64, f64) {
    let n = p1.len();
    let (mut a, mut e, mut b, mut c, mut f) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let d1 = q1[i] - p1[i];
        let d2 = q2[i] - p2[i];
        let r = p1[i] - p2[i];
        a += d1 * d1;
        e += d2 * d2;
        b += d1 * d2;
        c += d1 * r;
        f += d2 * r;
    }

    let (s, t);
    if a <= DEGENERATE_EPS && e <= DEGENERATE_EPS {
        s = 0.0;
        t = 0.0;
    } else if a <= DEGENERATE_EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else if e <= DEGENERATE_EPS {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else {
        let denom = a * e - b * b;
        let mut s_ = if denom.abs() > DEGENERATE_EPS {
            ((b * f - c * e) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let mut t_ = (b * s_ + f) / e;
        if t_ < 0.0 {
            t_ = 0.0;
            s_ = (-c / a).clamp(0.0, 1.0);
        } else if t_ > 1.0 {
            t_ = 1.0;
            s_ = ((b - c) / a).clamp(0.0, 1.0);
        }
        s = s_;
        t = t_;
    }
    let mut d2sum = 0.0;
    for i in 0..n {
        let diff = (p1[i] + s * (q1[i] - p1[i])) - (p2[i] + t * (q2[i] - p2[i]));
        d2sum += diff * diff;
    }
    (s, t, d2sum.sqrt())
}

/// Minimum distance from segment `s` to point `p`.
pub fn segment_point_distance(s: &Segment, p: &Point) -> Result<f64> {
    check_dims(&[s.a.dim(), s.b.dim(), p.dim()])?;
    Ok(seg_point_closest(&s.a.0, &s.b.0, &p.0).1)
}

/// Minimum distance between two segments.
pub fn segment_segment_distance(s1: &Segment, s2: &Segment) -> Result<f64> {
    check_dims(&[s1.a.dim(), s1.b.dim(), s2.a.dim(), s2.b.dim()])?;
    Ok(seg_seg_closest(&s1.a.0, &s1.b.0, &s2.a.0, &s2.b.0).2)
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::DimensionMismatch(format!("dimensions {dims:?} differ")));
    }
    Ok(())
}

/// Signed squared clearance of value from signed core-surface distance.
#[inline]
fn signed_square(delta: f64) -> f64 {
    delta.signum() * delta * delta
}

/// How clearance terms are reported.
///
/// `SignedSquared` is the canonical clearance value. Its gradient vanishes
/// at the obstacle surface, which starves constrained optimization of
/// restoring force exactly where it matters, so the optimizer consumes the
/// equivalent `SignedDistance` form instead: same sign, same zero set, same
/// feasible set, but a unit-magnitude gradient at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClearanceMetric {
    SignedSquared,
    SignedDistance,
}

impl ClearanceMetric {
    #[inline]
    pub(crate) fn compose(self, delta: f64) -> f64 {
        match self {
            ClearanceMetric::SignedSquared => signed_square(delta),
            ClearanceMetric::SignedDistance => delta,
        }
    }

    /// d(value)/d(core distance).
    #[inline]
    pub(crate) fn slope(self, delta: f64) -> f64 {
        match self {
            ClearanceMetric::SignedSquared => 2.0 * delta.abs(),
            ClearanceMetric::SignedDistance => 1.0,
        }
    }
}

/// Core of the clearance computation, shared by the public entry points.
///
/// `extra_radius` inflates the primitive (used for capsule robot bodies: the
/// combined radius is body radius + obstacle radius). Gradients, when
/// requested, are with respect to the endpoints `ea`/`eb` of the query
/// segment.
fn clearance_inner(
    ea: &[f64],
    eb: &[f64],
    obstacle: &ObstaclePrimitive,
    extra_radius: f64,
    metric: ClearanceMetric,
    with_gradient: bool,
) -> Result<Clearance> {
    let (t, core_dist) = match obstacle {
        ObstaclePrimitive::Hypersphere { center, .. } => {
            check_dims(&[ea.len(), eb.len(), center.len()])?;
            seg_point_closest(ea, eb, center)
        }
        ObstaclePrimitive::Capsule { axis, .. } => {
            check_dims(&[ea.len(), eb.len(), 3])?;
            let (s, _, d) = seg_seg_closest(ea, eb, &axis[0], &axis[1]);
            (s, d)
        }
    };

    let delta = core_dist - (obstacle.radius() + extra_radius);
    let value = metric.compose(delta);
    if !with_gradient {
        return Ok(Clearance {
            value,
            grad_a: None,
            grad_b: None,
        });
    }

    // direction from the closest core point to the closest edge point;
    // undefined (zeroed) when the edge passes through the core
    let dim = ea.len();
    let mut dir = vec![0.0; dim];
    if core_dist > 0.0 {
        match obstacle {
            ObstaclePrimitive::Hypersphere { center, .. } => {
                for i in 0..dim {
                    dir[i] = (ea[i] + t * (eb[i] - ea[i]) - center[i]) / core_dist;
                }
            }
            ObstaclePrimitive::Capsule { axis, .. } => {
                let (s, t2, _) = seg_seg_closest(ea, eb, &axis[0], &axis[1]);
                for i in 0..dim {
                    let on_edge = ea[i] + s * (eb[i] - ea[i]);
                    let on_axis = axis[0][i] + t2 * (axis[1][i] - axis[0][i]);
                    dir[i] = (on_edge - on_axis) / core_dist;
                }
            }
        }
    }

    // d(value)/d(dist) through the metric; d(dist)/d(endpoint) splits by
    // the closest-point parameter.
    let dv = metric.slope(delta);
    let grad_a: Vec<f64> = dir.iter().map(|u| dv * (1.0 - t) * u).collect();
    let grad_b: Vec<f64> = dir.iter().map(|u| dv * t * u).collect();
    Ok(Clearance {
        value,
        grad_a: Some(grad_a),
        grad_b: Some(grad_b),
    })
}


/// Signed squared clearance between a path edge and an obstacle primitive.
pub fn clearance(edge: &Segment, obstacle: &ObstaclePrimitive, with_gradient: bool) -> Result<Clearance> {
    clearance_inner(&edge.a.0, &edge.b.0, obstacle, 0.0, ClearanceMetric::SignedSquared, with_gradient)
}

/// Slice-based variant of [`clearance`] for hot paths that already hold raw
/// coordinate buffers.
pub fn clearance_parts(
    edge_a: &[f64],
    edge_b: &[f64],
    obstacle: &ObstaclePrimitive,
    with_gradient: bool,
) -> Result<Clearance> {
    clearance_inner(edge_a, edge_b, obstacle, 0.0, ClearanceMetric::SignedSquared, with_gradient)
}

/// [`clearance_parts`] under an explicit metric.
pub fn clearance_parts_metric(
    edge_a: &[f64],
    edge_b: &[f64],
    obstacle: &ObstaclePrimitive,
    metric: ClearanceMetric,
    with_gradient: bool,
) -> Result<Clearance> {
    clearance_inner(edge_a, edge_b, obstacle, 0.0, metric, with_gradient)
}

/// Clearance between a robot body capsule and an obstacle primitive; the
/// combined radius is the sum of both radii and the gradient is taken with
/// respect to the body's axis endpoints.
pub fn capsule_clearance(
    body: &Capsule,
    obstacle: &ObstaclePrimitive,
    with_gradient: bool,
) -> Result<Clearance> {
    clearance_inner(&body.a, &body.b, obstacle, body.radius, ClearanceMetric::SignedSquared, with_gradient)
}

/// [`capsule_clearance`] under an explicit metric.
pub fn capsule_clearance_metric(
    body: &Capsule,
    obstacle: &ObstaclePrimitive,
    metric: ClearanceMetric,
    with_gradient: bool,
) -> Result<Clearance> {
    clearance_inner(&body.a, &body.b, obstacle, body.radius, metric, with_gradient)
}

/// Clearance between two capsules (self-collision term): value, the two
/// closest-point parameters, the signed core distance and the unit direction
/// from capsule 2's core toward capsule 1's. The caller assembles gradients
/// for both capsules from these.
pub fn capsule_pair_clearance(b1: &Capsule, b2: &Capsule) -> (f64, f64, f64, f64, [f64; 3]) {
    let (s, t, d) = seg_seg_closest(&b1.a, &b1.b, &b2.a, &b2.b);
    let mut dir = [0.0; 3];
    if d > 0.0 {
        for i in 0..3 {
            let c1 = b1.a[i] + s * (b1.b[i] - b1.a[i]);
            let c2 = b2.a[i] + t * (b2.b[i] - b2.a[i]);
            dir[i] = (c1 - c2) / d;
        }
    }
    let delta = d - (b1.radius + b2.radius);
    (signed_square(delta), s, t, delta, dir)
}
