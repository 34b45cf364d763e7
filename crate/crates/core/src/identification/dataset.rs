use std::f64::consts::FRAC_PI_4;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, PixelPoint, PlateSpec};
use crate::kinematics::{DhTable, JointConfig, ToolFrameParams, JOINT_COUNT};
use crate::{Error, Result};

/// Plate feature tracked for circle fitting: the grid origin corner.
pub const DESIGNATED_FEATURE: usize = 0;

/// Largest commanded sweep angle accepted in a record.
pub const MAX_SWEEP_ANGLE: f64 = FRAC_PI_4;

/// Observations collected while sweeping a single joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// 1-based index of the swept joint.
    pub joint_index: usize,
    pub commanded_angles: Vec<f64>,
    /// Joint readings per pose.
    pub joint_configs: Vec<JointConfig>,
    /// Observed feature pixels per pose, in plate order.
    pub observed_pixels: Vec<Vec<PixelPoint>>,
    /// Camera-frame feature positions per pose (mm).
    pub measured_points3d: Vec<Vec<Vector3<f64>>>,
}

impl SweepRecord {
    pub fn pose_count(&self) -> usize {
        self.commanded_angles.len()
    }

    pub fn validate(&self, features: usize) -> Result<()> {
        let fail = |msg: String| {
            Err(Error::Validation(format!(
                "joint {}: {msg}",
                self.joint_index
            )))
        };
        if !(1..=JOINT_COUNT).contains(&self.joint_index) {
            return fail("joint index out of range".into());
        }
        let n = self.commanded_angles.len();
        if n < 3 {
            return fail(format!("needs at least 3 poses, got {n}"));
        }
        if self.joint_configs.len() != n
            || self.observed_pixels.len() != n
            || self.measured_points3d.len() != n
        {
            return fail("per-pose list lengths differ".into());
        }
        for (k, &angle) in self.commanded_angles.iter().enumerate() {
            if !(angle.abs() <= MAX_SWEEP_ANGLE + 1e-12) {
                return fail(format!("pose {k}: commanded angle {angle} outside ±45°"));
            }
        }
        for k in 0..n {
            if self.observed_pixels[k].len() != features
                || self.measured_points3d[k].len() != features
            {
                return fail(format!("pose {k}: expected {features} features per pose"));
            }
            let finite = self.observed_pixels[k]
                .iter()
                .all(|p| p.u.is_finite() && p.v.is_finite())
                && self.measured_points3d[k]
                    .iter()
                    .all(|p| p.iter().all(|c| c.is_finite()));
            if !finite {
                return fail(format!("pose {k}: non-finite observation"));
            }
        }
        Ok(())
    }
}

/// One sweep per joint plus the camera and plate they were captured with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDataset {
    pub records: Vec<SweepRecord>,
    pub intrinsics: CameraIntrinsics,
    pub plate: PlateSpec,
}

impl SweepDataset {
    pub fn validate(&self) -> Result<()> {
        if self.records.len() != JOINT_COUNT {
            return Err(Error::Validation(format!(
                "expected {JOINT_COUNT} sweep records, got {}",
                self.records.len()
            )));
        }
        for (i, record) in self.records.iter().enumerate() {
            if record.joint_index != i + 1 {
                return Err(Error::Validation(format!(
                    "record {i} is for joint {}, expected joint {}",
                    record.joint_index,
                    i + 1
                )));
            }
            record.validate(self.plate.feature_count())?;
        }
        Ok(())
    }

    pub fn pose_count(&self) -> usize {
        self.records.iter().map(SweepRecord::pose_count).sum()
    }

    /// `(joint configuration, observed pixels)` for every pose, record-major.
    pub fn poses(&self) -> Vec<(&JointConfig, &[PixelPoint])> {
        self.records
            .iter()
            .flat_map(|r| {
                r.joint_configs
                    .iter()
                    .zip(r.observed_pixels.iter().map(Vec::as_slice))
            })
            .collect()
    }
}

/// Nominal knowledge available before calibration: the design D-H table,
/// the nominal camera-to-base rotation and a hand-measured tool offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPrior {
    pub ideal: DhTable,
    /// (δx, δy, δz) in radians.
    pub base_rotation: [f64; 3],
    pub tool: ToolFrameParams,
}

impl Default for CalibrationPrior {
    /// Design table, base rotated 90° about x then 90° about z, plate centred
    /// on the last joint axis.
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        Self {
            ideal: DhTable::ideal(),
            base_rotation: [FRAC_PI_2, 0.0, FRAC_PI_2],
            tool: ToolFrameParams {
                d_tx: -112.5,
                d_ty: -75.0,
            },
        }
    }
}
