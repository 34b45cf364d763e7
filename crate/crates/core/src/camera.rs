//! Distortion-free pinhole projection and the calibration plate model.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Points closer than this to the image plane are rejected as near-singular.
pub const MIN_DEPTH_MM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntrinsicsRepr", into = "IntrinsicsRepr")]
pub struct CameraIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

#[derive(Serialize, Deserialize)]
struct IntrinsicsRepr {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    image_width: u32,
    image_height: u32,
}

impl TryFrom<IntrinsicsRepr> for CameraIntrinsics {
    type Error = Error;

    fn try_from(r: IntrinsicsRepr) -> Result<Self> {
        CameraIntrinsics::new(r.fx, r.fy, r.cx, r.cy, r.image_width, r.image_height)
    }
}

impl From<CameraIntrinsics> for IntrinsicsRepr {
    fn from(k: CameraIntrinsics) -> Self {
        IntrinsicsRepr {
            fx: k.fx,
            fy: k.fy,
            cx: k.cx,
            cy: k.cy,
            image_width: k.width,
            image_height: k.height,
        }
    }
}

impl Default for CameraIntrinsics {
    /// 1920×1080 RGB sensor, fx = fy = 1050 px, principal point at the centre.
    fn default() -> Self {
        Self {
            fx: 1050.0,
            fy: 1050.0,
            cx: 960.0,
            cy: 540.0,
            width: 1920,
            height: 1080,
        }
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        if !(fx.is_finite() && fx > 0.0 && fy.is_finite() && fy > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        if !(cx >= 0.0 && cx <= f64::from(width) && cy >= 0.0 && cy <= f64::from(height)) {
            return Err(Error::InvalidArgument(format!(
                "principal point ({cx}, {cy}) outside the {width}x{height} image"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }

    pub fn fy(&self) -> f64 {
        self.fy
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn contains(&self, p: &PixelPoint) -> bool {
        p.u >= 0.0 && p.u <= f64::from(self.width) && p.v >= 0.0 && p.v <= f64::from(self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn distance(&self, other: &PixelPoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// Projects a camera-frame point (mm) to pixel coordinates.
pub fn project(k: &CameraIntrinsics, p: &Vector3<f64>) -> Result<PixelPoint> {
    if p.z.is_nan() || p.z <= 0.0 {
        return Err(Error::BehindCamera { z: p.z });
    }
    if p.z < MIN_DEPTH_MM {
        return Err(Error::NearSingular { z: p.z });
    }
    Ok(PixelPoint {
        u: k.fx * p.x / p.z + k.cx,
        v: k.fy * p.y / p.z + k.cy,
    })
}

/// Chessboard-style grid of inner corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlateRepr", into = "PlateRepr")]
pub struct PlateSpec {
    rows: usize,
    cols: usize,
    square_size: f64,
}

#[derive(Serialize, Deserialize)]
struct PlateRepr {
    rows: usize,
    cols: usize,
    square_size: f64,
}

impl TryFrom<PlateRepr> for PlateSpec {
    type Error = Error;

    fn try_from(r: PlateRepr) -> Result<Self> {
        PlateSpec::new(r.rows, r.cols, r.square_size)
    }
}

impl From<PlateSpec> for PlateRepr {
    fn from(p: PlateSpec) -> Self {
        PlateRepr {
            rows: p.rows,
            cols: p.cols,
            square_size: p.square_size,
        }
    }
}

impl Default for PlateSpec {
    /// 7 × 10 inner corners at 25 mm.
    fn default() -> Self {
        Self {
            rows: 7,
            cols: 10,
            square_size: 25.0,
        }
    }
}

impl PlateSpec {
    pub fn new(rows: usize, cols: usize, square_size: f64) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidArgument(format!(
                "plate needs at least 2x2 corners, got {rows}x{cols}"
            )));
        }
        if !(square_size.is_finite() && square_size > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "square size must be positive, got {square_size}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            square_size,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn square_size(&self) -> f64 {
        self.square_size
    }

    pub fn feature_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Width (along x) and height (along y) of the corner grid in mm.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.cols - 1) as f64 * self.square_size,
            (self.rows - 1) as f64 * self.square_size,
        )
    }
}

/// Corner positions in the tool frame, row-major: x runs along columns,
/// y along rows, all on z = 0 with the first corner at the origin.
pub fn plate_feature_points(spec: &PlateSpec) -> Vec<Vector3<f64>> {
    (0..spec.rows)
        .flat_map(|r| {
            (0..spec.cols).map(move |c| {
                Vector3::new(
                    c as f64 * spec.square_size,
                    r as f64 * spec.square_size,
                    0.0,
                )
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k1000() -> CameraIntrinsics {
        CameraIntrinsics::new(1000.0, 1000.0, 960.0, 540.0, 1920, 1080).unwrap()
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let p = project(&k1000(), &Vector3::new(0.0, 0.0, 1000.0)).unwrap();
        assert_eq!(p, PixelPoint::new(960.0, 540.0));
    }

    #[test]
    fn similar_triangles() {
        let p = project(&k1000(), &Vector3::new(100.0, 0.0, 1000.0)).unwrap();
        assert_eq!(p, PixelPoint::new(1060.0, 540.0));
    }

    #[test]
    fn depth_errors() {
        let k = k1000();
        assert!(matches!(
            project(&k, &Vector3::new(0.0, 0.0, 0.0)),
            Err(Error::BehindCamera { .. })
        ));
        assert!(matches!(
            project(&k, &Vector3::new(1.0, 0.0, -5.0)),
            Err(Error::BehindCamera { .. })
        ));
        assert!(matches!(
            project(&k, &Vector3::new(1.0, 0.0, 1e-9)),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 10, 10).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 11.0, 1.0, 10, 10).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 10.0, 10.0, 10, 10).is_ok());
    }

    #[test]
    fn plate_grids() {
        let pts = plate_feature_points(&PlateSpec::new(2, 2, 25.0).unwrap());
        assert_eq!(
            pts,
            vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(25.0, 0.0, 0.0),
                Vector3::new(0.0, 25.0, 0.0),
                Vector3::new(25.0, 25.0, 0.0),
            ]
        );

        let spec = PlateSpec::default();
        let pts = plate_feature_points(&spec);
        assert_eq!(pts.len(), 70);
        let max = pts
            .iter()
            .fold(Vector3::zeros(), |m: Vector3<f64>, p| m.sup(p));
        assert_eq!(max, Vector3::new(225.0, 150.0, 0.0));

        let pts = plate_feature_points(&PlateSpec::new(2, 2, 30.0).unwrap());
        assert_eq!((pts[1] - pts[0]).norm(), 30.0);
        assert_eq!((pts[2] - pts[0]).norm(), 30.0);
    }

    #[test]
    fn plate_validation() {
        assert!(PlateSpec::new(1, 5, 10.0).is_err());
        assert!(PlateSpec::new(3, 3, 0.0).is_err());
        assert!(PlateSpec::new(3, 3, f64::NAN).is_err());
    }
}
