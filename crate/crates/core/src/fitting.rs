//! Space-circle fitting by reduction to a plane.
//!
//! The points are fitted with a total-least-squares plane, expressed in an
//! orthonormal frame attached to that plane, fitted with an algebraic (Kåsa)
//! circle, and the centre is lifted back to 3-D.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative gap between the two smallest singular values below which the
/// plane normal is considered undetermined.
pub const PLANE_GAP_TOLERANCE: f64 = 1e-12;

/// Condition number of the circle normal equations above which the 2-D fit
/// is rejected.
pub const CIRCLE_CONDITION_LIMIT: f64 = 1e12;

/// Plane `A·x + B·y + C·z + D = 0` with unit normal `(A, B, C)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Plane {
    pub fn coefficients(&self) -> [f64; 4] {
        [self.normal.x, self.normal.y, self.normal.z, self.offset]
    }

    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        (self.normal.dot(p) + self.offset) / self.normal.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceCircle {
    pub plane: Plane,
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl SpaceCircle {
    /// Point on the circle at `angle` measured from `reference`, which must be
    /// a unit vector in the circle plane.
    pub fn point_at(&self, reference: &Vector3<f64>, angle: f64) -> Vector3<f64> {
        let n = self.plane.normal;
        let v = n.cross(reference);
        self.center + self.radius * (angle.cos() * reference + angle.sin() * v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitQuality {
    /// Distance from the fitted centre to the fitted plane.
    pub d_cp: f64,
    /// RMS point-to-plane distance (flatness).
    pub m_p: f64,
    /// RMS radial residual (roundness).
    pub m_c: f64,
}

struct PlaneFrame {
    centroid: Vector3<f64>,
    normal: Vector3<f64>,
    u: Vector3<f64>,
    v: Vector3<f64>,
}

fn plane_frame(points: &[Vector3<f64>]) -> Result<PlaneFrame> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::InvalidArgument("non-finite point".into()));
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vector3<f64>>() / n;
    let centered = DMatrix::from_fn(points.len(), 3, |r, c| points[r][c] - centroid[c]);
    let svd = centered.svd(false, true);
    let s = &svd.singular_values;
    if s[0] == 0.0 || s[1] - s[2] <= PLANE_GAP_TOLERANCE * s[0] {
        return Err(Error::DegenerateInput(format!(
            "points do not span a unique plane (singular values {:.3e}, {:.3e}, {:.3e})",
            s[0], s[1], s[2]
        )));
    }
    let vt = svd.v_t.expect("v_t requested");
    let mut normal = Vector3::new(vt[(2, 0)], vt[(2, 1)], vt[(2, 2)]).normalize();
    let largest = normal.iamax();
    if normal[largest] < 0.0 {
        normal = -normal;
    }
    let principal = Vector3::new(vt[(0, 0)], vt[(0, 1)], vt[(0, 2)]);
    let u = (principal - normal * normal.dot(&principal)).normalize();
    let v = normal.cross(&u);
    Ok(PlaneFrame {
        centroid,
        normal,
        u,
        v,
    })
}

/// Total-least-squares plane through `points`.
///
/// The normal is the direction of least variance about the centroid, signed
/// so that its largest-magnitude component is positive.
pub fn fit_plane(points: &[Vector3<f64>]) -> Result<Plane> {
    let frame = plane_frame(points)?;
    Ok(Plane {
        normal: frame.normal,
        offset: -frame.normal.dot(&frame.centroid),
    })
}

/// Least-squares space circle through `points`.
pub fn fit_space_circle(points: &[Vector3<f64>]) -> Result<SpaceCircle> {
    let frame = plane_frame(points)?;

    let local: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let d = p - frame.centroid;
            (d.dot(&frame.u), d.dot(&frame.v))
        })
        .collect();
    let scale = (local.iter().map(|(x, y)| x * x + y * y).sum::<f64>() / local.len() as f64).sqrt();

    // x² + y² + D·x + E·y + F = 0, solved in coordinates scaled to unit RMS.
    let a = DMatrix::from_fn(local.len(), 3, |r, c| match c {
        0 => local[r].0 / scale,
        1 => local[r].1 / scale,
        _ => 1.0,
    });
    let b = DVector::from_iterator(
        local.len(),
        local
            .iter()
            .map(|(x, y)| -((x / scale).powi(2) + (y / scale).powi(2))),
    );
    let svd = a.svd(true, true);
    let (s_max, s_min) = (svd.singular_values[0], svd.singular_values[2]);
    if s_min == 0.0 || (s_max / s_min).powi(2) > CIRCLE_CONDITION_LIMIT {
        return Err(Error::DegenerateCircle(format!(
            "circle normal equations are ill-conditioned (singular values {s_max:.3e}, {s_min:.3e})"
        )));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::DegenerateCircle(e.to_string()))?;
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cx * cx + cy * cy - sol[2];
    if !(r2 > 0.0) {
        return Err(Error::DegenerateCircle(format!(
            "non-positive squared radius {r2}"
        )));
    }

    let center = frame.centroid + scale * (cx * frame.u + cy * frame.v);
    Ok(SpaceCircle {
        plane: Plane {
            normal: frame.normal,
            offset: -frame.normal.dot(&frame.centroid),
        },
        center,
        radius: scale * r2.sqrt(),
    })
}

pub fn fit_quality(circle: &SpaceCircle, points: &[Vector3<f64>]) -> FitQuality {
    let n = points.len().max(1) as f64;
    let d_cp = circle.plane.signed_distance(&circle.center).abs();
    let m_p = (points
        .iter()
        .map(|p| circle.plane.signed_distance(p).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let m_c = (points
        .iter()
        .map(|p| ((p - circle.center).norm() - circle.radius).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    FitQuality { d_cp, m_p, m_c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

    fn sample_circle(
        center: Vector3<f64>,
        normal: Vector3<f64>,
        radius: f64,
        angles: impl Iterator<Item = f64>,
    ) -> Vec<Vector3<f64>> {
        let n = normal.normalize();
        let helper = if n.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        let u = (helper - n * n.dot(&helper)).normalize();
        let v = n.cross(&u);
        angles
            .map(|t| center + radius * (t.cos() * u + t.sin() * v))
            .collect()
    }

    #[test]
    fn plane_through_horizontal_points() {
        let pts = [
            Vector3::new(0.0, 0.0, 5.0),
            Vector3::new(1.0, 0.0, 5.0),
            Vector3::new(0.0, 1.0, 5.0),
            Vector3::new(3.0, -2.0, 5.0),
        ];
        let p = fit_plane(&pts).unwrap();
        assert!((p.normal - Vector3::z()).norm() < 1e-15);
        assert!((p.offset + 5.0).abs() < 1e-12);
    }

    #[test]
    fn plane_through_three_points() {
        let pts = [Vector3::x(), Vector3::y(), Vector3::z()];
        let p = fit_plane(&pts).unwrap();
        let expected = Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        assert!((p.normal - expected).norm() < 1e-14);
        assert!((p.offset + 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn collinear_and_coincident_points_are_degenerate() {
        let line: Vec<_> = (0..5)
            .map(|i| Vector3::new(i as f64, 2.0 * i as f64, 0.0))
            .collect();
        assert!(matches!(fit_plane(&line), Err(Error::DegenerateInput(_))));
        let same = vec![Vector3::new(1.0, 1.0, 1.0); 4];
        assert!(matches!(
            fit_space_circle(&same),
            Err(Error::DegenerateInput(_))
        ));
        assert!(fit_plane(&line[..2]).is_err());
    }

    #[test]
    fn circumcircle_of_three_points() {
        let pts = [Vector3::x(), Vector3::y(), -Vector3::x()];
        let c = fit_space_circle(&pts).unwrap();
        assert!(c.center.norm() < 1e-14);
        assert!((c.radius - 1.0).abs() < 1e-14);
        assert!((c.plane.normal - Vector3::z()).norm() < 1e-15);
        assert!(c.plane.offset.abs() < 1e-15);
    }

    #[test]
    fn quarter_arc_determines_the_circle() {
        let pts = sample_circle(
            Vector3::zeros(),
            Vector3::z(),
            1.0,
            (0..10).map(|i| -FRAC_PI_4 + FRAC_PI_2 * i as f64 / 9.0),
        );
        let c = fit_space_circle(&pts).unwrap();
        assert!(c.center.norm() < 1e-9);
        assert!((c.radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quality_of_exact_points_is_zero() {
        let pts = sample_circle(
            Vector3::new(3.0, -4.0, 12.0),
            Vector3::new(0.2, -0.3, 1.0),
            7.5,
            (0..12).map(|i| TAU * i as f64 / 12.0),
        );
        let c = fit_space_circle(&pts).unwrap();
        let q = fit_quality(&c, &pts);
        assert!(q.d_cp <= 1e-12 && q.m_p <= 1e-12 && q.m_c <= 1e-12, "{q:?}");
    }

    #[test]
    fn single_normal_displacement_gives_closed_form_flatness() {
        let circle = SpaceCircle {
            plane: Plane {
                normal: Vector3::z(),
                offset: 0.0,
            },
            center: Vector3::zeros(),
            radius: 10.0,
        };
        let mut pts = sample_circle(
            Vector3::zeros(),
            Vector3::z(),
            10.0,
            (0..8).map(|i| TAU * i as f64 / 8.0),
        );
        let delta = 0.3;
        pts[3].z += delta;
        let q = fit_quality(&circle, &pts);
        assert!((q.m_p - delta / 8f64.sqrt()).abs() < 1e-12);

        let mut pts = sample_circle(
            Vector3::zeros(),
            Vector3::z(),
            10.0,
            (0..8).map(|i| TAU * i as f64 / 8.0),
        );
        pts[5] *= 1.0 + delta / 10.0;
        let q = fit_quality(&circle, &pts);
        assert!((q.m_c - delta / 8f64.sqrt()).abs() < 1e-12);
        assert!(q.m_p < 1e-15);
    }

    #[test]
    fn point_at_stays_on_circle() {
        let c = SpaceCircle {
            plane: Plane {
                normal: Vector3::z(),
                offset: -2.0,
            },
            center: Vector3::new(1.0, 1.0, 2.0),
            radius: 3.0,
        };
        let p = c.point_at(&Vector3::x(), FRAC_PI_2);
        assert!((p - Vector3::new(1.0, 4.0, 2.0)).norm() < 1e-15);
    }
}
