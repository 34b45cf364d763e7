use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::axes::{common_normal_along, extract_joint_axis, AxisLine, CommonNormal};
use super::dataset::{CalibrationPrior, SweepDataset, DESIGNATED_FEATURE};
use super::delta::ModelParams;
use crate::fitting::{fit_quality, fit_space_circle, FitQuality, SpaceCircle};
use crate::kinematics::{base_to_camera_transform, BaseFrameParams, DhRow, DhTable, JOINT_COUNT};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointFit {
    pub joint: usize,
    pub circle: SpaceCircle,
    pub quality: FitQuality,
    pub axis: AxisLine,
}

/// Output of the axis-measurement stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughIdentification {
    /// Measured entries where available, design values elsewhere.
    pub table: DhTable,
    /// Per joint: whether `[alpha, a, d, theta_offset]` was measured (`false`
    /// means copied from the design table).
    pub measured: [[bool; 4]; JOINT_COUNT],
    pub joints: Vec<JointFit>,
    /// Common normals between consecutive axes (joints 1-2 .. 6-7).
    pub normals: Vec<CommonNormal>,
    /// Estimated base origin in the camera frame: the foot of the first
    /// common normal on axis 1, moved back along the axis by the design d₁.
    pub base_origin: Vector3<f64>,
}

/// Recovers D-H twist, length and offset parameters from per-joint circle
/// axes.
///
/// Produces α and a for joints 1-6 and d for joints 2-6. Link normals are
/// oriented to follow the previous link's x-axis, starting from the x-axis
/// of the nominal base rotation, so that the home-pose joint offsets stay
/// near zero and α, a carry their D-H signs.
pub fn rough_identify(
    dataset: &SweepDataset,
    prior: &CalibrationPrior,
) -> Result<RoughIdentification> {
    dataset.validate()?;

    let joints = dataset
        .records
        .iter()
        .map(|record| {
            let points: Vec<Vector3<f64>> = record
                .measured_points3d
                .iter()
                .map(|pose| pose[DESIGNATED_FEATURE])
                .collect();
            let fit = || -> Result<JointFit> {
                let circle = fit_space_circle(&points)?;
                Ok(JointFit {
                    joint: record.joint_index,
                    quality: fit_quality(&circle, &points),
                    axis: extract_joint_axis(&circle, record)?,
                    circle,
                })
            };
            fit().map_err(|e| e.at_joint(record.joint_index))
        })
        .collect::<Result<Vec<_>>>()?;

    let nominal_base = BaseFrameParams::new([0.0; 3], prior.base_rotation)?;
    let mut reference: Vector3<f64> = base_to_camera_transform(&nominal_base)
        .rotation()
        .column(0)
        .into_owned();

    let mut normals = Vec::with_capacity(JOINT_COUNT - 1);
    for pair in joints.windows(2) {
        let cn = common_normal_along(&pair[0].axis, &pair[1].axis, &reference);
        reference = cn.direction;
        normals.push(cn);
    }

    let ideal = prior.ideal.rows();
    let mut rows = *ideal;
    let mut measured = [[false; 4]; JOINT_COUNT];
    for j in 0..JOINT_COUNT - 1 {
        let d = if (1..JOINT_COUNT - 1).contains(&j) {
            measured[j][2] = true;
            (normals[j].foot_i - normals[j - 1].foot_j).dot(&joints[j].axis.direction)
        } else {
            ideal[j].d()
        };
        rows[j] = DhRow::new(normals[j].alpha, normals[j].a, d, ideal[j].theta_offset())?;
        measured[j][0] = true;
        measured[j][1] = true;
    }

    let base_origin = normals[0].foot_i - ideal[0].d() * joints[0].axis.direction;

    Ok(RoughIdentification {
        table: DhTable::new(rows),
        measured,
        joints,
        normals,
        base_origin,
    })
}

/// Starting point for fine identification: rough D-H table, base translation
/// from the axis estimate with the nominal rotation, and the prior tool offset.
pub fn seed_from_rough(
    rough: &RoughIdentification,
    prior: &CalibrationPrior,
) -> Result<ModelParams> {
    Ok(ModelParams {
        dh: rough.table,
        base: BaseFrameParams::new(rough.base_origin.into(), prior.base_rotation)?,
        tool: prior.tool,
    })
}
