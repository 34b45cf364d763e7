use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::dataset::{SweepRecord, DESIGNATED_FEATURE};
use crate::fitting::SpaceCircle;
use crate::{Error, Result};

/// Circles smaller than this do not give a usable axis direction.
pub const MIN_AXIS_RADIUS_MM: f64 = 5.0;

/// Axes with `|dᵢ × dⱼ|` below this are treated as parallel.
pub const PARALLEL_TOLERANCE: f64 = 1e-9;

/// A joint axis in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisLine {
    /// Reference point on the axis (the fitted circle centre).
    pub point: Vector3<f64>,
    /// Unit direction, right-handed with respect to positive joint rotation.
    pub direction: Vector3<f64>,
}

impl AxisLine {
    pub fn new(point: Vector3<f64>, direction: Vector3<f64>) -> Result<Self> {
        let norm = direction.norm();
        if !(norm.is_finite() && norm > 0.0) || !point.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument(
                "axis needs a finite point and non-zero direction".into(),
            ));
        }
        Ok(Self {
            point,
            direction: direction / norm,
        })
    }
}

/// Axis of the joint swept in `sweep`, taken from the circle fitted to the
/// designated feature's trajectory.
pub fn extract_joint_axis(circle: &SpaceCircle, sweep: &SweepRecord) -> Result<AxisLine> {
    if circle.radius < MIN_AXIS_RADIUS_MM {
        return Err(Error::AxisIndeterminate {
            radius: circle.radius,
            min: MIN_AXIS_RADIUS_MM,
        });
    }
    let mut order: Vec<usize> = (0..sweep.pose_count()).collect();
    order.sort_by(|&a, &b| sweep.commanded_angles[a].total_cmp(&sweep.commanded_angles[b]));
    let normal = circle.plane.normal;
    let turning: f64 = order
        .windows(2)
        .map(|w| {
            let p = sweep.measured_points3d[w[0]][DESIGNATED_FEATURE] - circle.center;
            let q = sweep.measured_points3d[w[1]][DESIGNATED_FEATURE] - circle.center;
            p.cross(&q).dot(&normal)
        })
        .sum();
    let direction = if turning < 0.0 { -normal } else { normal };
    AxisLine::new(circle.center, direction)
}

/// Common perpendicular between two axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonNormal {
    /// Length along `direction` from `foot_i` to `foot_j`.
    pub a: f64,
    /// Angle from `axis_i.direction` to `axis_j.direction` about `direction`.
    pub alpha: f64,
    /// Offset of `foot_i` from `axis_i.point` along `axis_i.direction`.
    pub d: f64,
    pub foot_i: Vector3<f64>,
    pub foot_j: Vector3<f64>,
    /// Unit direction of the normal.
    pub direction: Vector3<f64>,
}

fn feet(
    axis_i: &AxisLine,
    axis_j: &AxisLine,
) -> (Vector3<f64>, Vector3<f64>, Option<Vector3<f64>>) {
    let (di, dj) = (axis_i.direction, axis_j.direction);
    let cross = di.cross(&dj);
    let cross_norm = cross.norm();
    if cross_norm < PARALLEL_TOLERANCE {
        // Parallel: anchor the foot on axis i at its reference point.
        let foot_i = axis_i.point;
        let foot_j = axis_j.point + dj * dj.dot(&(foot_i - axis_j.point));
        return (foot_i, foot_j, None);
    }
    let w0 = axis_i.point - axis_j.point;
    let b = di.dot(&dj);
    let d = di.dot(&w0);
    let e = dj.dot(&w0);
    let denom = cross_norm * cross_norm;
    let s = (b * e - d) / denom;
    let t = (e - b * d) / denom;
    (
        axis_i.point + s * di,
        axis_j.point + t * dj,
        Some(cross / cross_norm),
    )
}

fn any_perpendicular(v: &Vector3<f64>) -> Vector3<f64> {
    let helper = if v.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    (helper - v * v.dot(&helper)).normalize()
}

fn assemble(
    axis_i: &AxisLine,
    foot_i: Vector3<f64>,
    foot_j: Vector3<f64>,
    direction: Vector3<f64>,
    dj: &Vector3<f64>,
) -> CommonNormal {
    let di = axis_i.direction;
    CommonNormal {
        a: (foot_j - foot_i).dot(&direction),
        alpha: di.cross(dj).dot(&direction).atan2(di.dot(dj)),
        d: (foot_i - axis_i.point).dot(&di),
        foot_i,
        foot_j,
        direction,
    }
}

/// Common normal with `direction = dᵢ × dⱼ` (so `alpha ∈ [0, π]` and `a ≥ 0`).
///
/// For parallel axes the direction points from axis i to axis j; if they
/// coincide an arbitrary perpendicular is used.
pub fn common_normal(axis_i: &AxisLine, axis_j: &AxisLine) -> CommonNormal {
    let (foot_i, foot_j, skew_dir) = feet(axis_i, axis_j);
    let direction = skew_dir.unwrap_or_else(|| {
        let w = foot_j - foot_i;
        if w.norm() > 0.0 {
            w.normalize()
        } else {
            any_perpendicular(&axis_i.direction)
        }
    });
    let mut cn = assemble(axis_i, foot_i, foot_j, direction, &axis_j.direction);
    cn.a = cn.a.abs();
    cn
}

/// Common normal oriented to agree with `reference` (typically the previous
/// link's x-axis). `a` and `alpha` are signed accordingly, which is what the
/// D-H convention needs when the joint offsets are zero in the home pose.
pub fn common_normal_along(
    axis_i: &AxisLine,
    axis_j: &AxisLine,
    reference: &Vector3<f64>,
) -> CommonNormal {
    let (foot_i, foot_j, skew_dir) = feet(axis_i, axis_j);
    let di = axis_i.direction;
    let mut direction = match skew_dir {
        Some(n) => n,
        None => {
            let w = foot_j - foot_i;
            if w.norm() > 0.0 {
                w.normalize()
            } else {
                let r = reference - di * di.dot(reference);
                if r.norm() > 0.0 {
                    r.normalize()
                } else {
                    any_perpendicular(&di)
                }
            }
        }
    };
    if direction.dot(reference) < 0.0 {
        direction = -direction;
    }
    assemble(axis_i, foot_i, foot_j, direction, &axis_j.direction)
}
