//! Synthetic arm + pinhole camera with known ground truth.
//!
//! [`make_ground_truth`] perturbs the nominal model within the envelope of
//! offsets typically identified on a real arm, and [`simulate_sweeps`]
//! replays the single-joint sweep protocol against it, producing observed
//! pixels and camera-frame feature positions with optional Gaussian noise.

use std::f64::consts::FRAC_PI_4;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::camera::{plate_feature_points, project, CameraIntrinsics, PixelPoint, PlateSpec};
use crate::identification::{
    CalibrationPrior, DeltaVector, ModelParams, SweepDataset, SweepRecord, DELTA_LEN,
};
use crate::kinematics::{full_chain, BaseFrameParams, JointConfig, ToolFrameParams, JOINT_COUNT};
use crate::parallel::{map_indexed, Execution};
use crate::{Error, Result};

/// Largest |Δα| (rad) drawn at scale 1.
pub const MAX_DALPHA: f64 = 0.2355;
/// Largest |Δa| (mm).
pub const MAX_DA: f64 = 0.0303;
/// Largest |Δd| (mm).
pub const MAX_DD: f64 = 0.1014;
/// Largest |Δθ| (deg).
pub const MAX_DTHETA_DEG: f64 = 0.2285;
/// Largest base translation offset (mm).
pub const MAX_BASE_TRANSLATION: f64 = 0.0576;
/// Largest base rotation offset (deg).
pub const MAX_BASE_ROTATION_DEG: f64 = 2.9305;
/// Largest tool offset (mm).
pub const MAX_TOOL: f64 = 0.0164;

/// Largest magnitude of delta entry `index` at perturbation scale 1.
pub fn perturbation_bound(index: usize) -> f64 {
    let theta = DeltaVector::theta_index(1)..DeltaVector::theta_index(JOINT_COUNT) + 1;
    match index {
        i if i < DeltaVector::a_index(1) => MAX_DALPHA,
        i if i < DeltaVector::d_index(1) => MAX_DA,
        i if i < DeltaVector::theta_index(1) => MAX_DD,
        i if theta.contains(&i) => MAX_DTHETA_DEG.to_radians(),
        i if i < DeltaVector::base_rotation_index(0) => MAX_BASE_TRANSLATION,
        i if i < DeltaVector::tool_index(0) => MAX_BASE_ROTATION_DEG.to_radians(),
        _ => MAX_TOOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub perturbation_scale: f64,
    pub pixel_noise_sigma: f64,
    pub angles_per_joint: usize,
    /// Commanded sweep range (rad), inclusive at both ends.
    pub sweep_range: (f64, f64),
    /// Nominal base origin in the camera frame (mm).
    pub base_translation: [f64; 3],
    pub prior: CalibrationPrior,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            perturbation_scale: 1.0,
            pixel_noise_sigma: 0.0,
            angles_per_joint: 10,
            sweep_range: (-FRAC_PI_4, FRAC_PI_4),
            base_translation: [121.0, -357.0, 900.0],
            prior: CalibrationPrior::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.angles_per_joint < 3 {
            return Err(Error::InvalidArgument(format!(
                "angles_per_joint must be at least 3, got {}",
                self.angles_per_joint
            )));
        }
        let (lo, hi) = self.sweep_range;
        if !(lo < hi && lo >= -FRAC_PI_4 && hi <= FRAC_PI_4) {
            return Err(Error::InvalidArgument(format!(
                "sweep range ({lo}, {hi}) must be increasing and within ±45°"
            )));
        }
        if !(self.perturbation_scale.is_finite() && self.perturbation_scale >= 0.0) {
            return Err(Error::InvalidArgument(
                "perturbation scale must be non-negative".into(),
            ));
        }
        if !(self.pixel_noise_sigma.is_finite() && self.pixel_noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument(
                "pixel noise sigma must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Nominal model: design D-H table, nominal base pose, prior tool offset.
    pub fn nominal(&self) -> Result<ModelParams> {
        Ok(ModelParams {
            dh: self.prior.ideal,
            base: BaseFrameParams::new(self.base_translation, self.prior.base_rotation)?,
            tool: self.prior.tool,
        })
    }

    pub fn sweep_angles(&self) -> Vec<f64> {
        let (lo, hi) = self.sweep_range;
        let n = self.angles_per_joint;
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Prior whose tool offset centres `plate` on the last joint axis.
pub fn centered_prior(plate: &PlateSpec) -> CalibrationPrior {
    let (w, h) = plate.extent();
    CalibrationPrior {
        tool: ToolFrameParams {
            d_tx: -w / 2.0,
            d_ty: -h / 2.0,
        },
        ..CalibrationPrior::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub nominal: ModelParams,
    pub truth: ModelParams,
    /// `truth - nominal`, entry-wise.
    pub delta_true: DeltaVector,
}

const TRUTH_STREAM: u64 = 0;

fn pose_stream(joint: usize, pose: usize) -> u64 {
    1 + ((joint as u64) << 32) + pose as u64
}

/// Draws every delta entry uniformly from `±bound · perturbation_scale`.
pub fn make_ground_truth(config: &BenchConfig) -> Result<GroundTruth> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(TRUTH_STREAM);
    let mut delta = DeltaVector::zero();
    for i in 0..DELTA_LEN {
        let u: f64 = rng.random_range(-1.0..=1.0);
        delta.set(i, u * perturbation_bound(i) * config.perturbation_scale);
    }
    ground_truth_from_delta(config, delta)
}

/// Ground truth with a caller-chosen offset from the nominal model.
pub fn ground_truth_from_delta(config: &BenchConfig, delta: DeltaVector) -> Result<GroundTruth> {
    let nominal = config.nominal()?;
    let truth = delta.apply(&nominal)?;
    Ok(GroundTruth {
        nominal,
        truth,
        delta_true: DeltaVector::between(&nominal, &truth),
    })
}

/// Replays the sweep protocol on the true model: each joint alone through
/// `angles_per_joint` equispaced angles, every other joint at zero.
///
/// Every pose uses its own RNG stream derived from `(seed, joint, pose)`, so
/// the output does not depend on `execution`.
pub fn simulate_sweeps(
    truth: &GroundTruth,
    intrinsics: &CameraIntrinsics,
    plate: &PlateSpec,
    config: &BenchConfig,
    execution: Execution,
) -> Result<SweepDataset> {
    config.validate()?;
    let angles = config.sweep_angles();
    let plate_points = plate_feature_points(plate);
    let n = angles.len();
    let sigma = config.pixel_noise_sigma;

    let poses = map_indexed(JOINT_COUNT * n, execution, |index| {
        let (joint, k) = (index / n + 1, index % n);
        let angle = angles[k];
        let q = JointConfig::single(joint, angle)?;
        let chain = full_chain(&truth.truth.base, &truth.truth.dh, &truth.truth.tool, &q);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(pose_stream(joint, k));

        let mut pixels = Vec::with_capacity(plate_points.len());
        let mut points = Vec::with_capacity(plate_points.len());
        for (feature, p) in plate_points.iter().enumerate() {
            let camera_point = chain.transform_point(p);
            let not_visible = |u: f64, v: f64| Error::NotVisible {
                joint,
                angle_deg: angle.to_degrees(),
                feature,
                u,
                v,
            };
            let px =
                project(intrinsics, &camera_point).map_err(|_| not_visible(f64::NAN, f64::NAN))?;
            if !intrinsics.contains(&px) {
                return Err(not_visible(px.u, px.v));
            }
            let nu: f64 = rng.sample(StandardNormal);
            let nv: f64 = rng.sample(StandardNormal);
            pixels.push(PixelPoint::new(px.u + sigma * nu, px.v + sigma * nv));

            let depth_sigma = sigma * camera_point.z / intrinsics.fx();
            let noise = Vector3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            points.push(camera_point + depth_sigma * noise);
        }
        Ok((q, pixels, points))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut poses = poses.into_iter();
    let records = (1..=JOINT_COUNT)
        .map(|joint| {
            let mut record = SweepRecord {
                joint_index: joint,
                commanded_angles: angles.clone(),
                joint_configs: Vec::with_capacity(n),
                observed_pixels: Vec::with_capacity(n),
                measured_points3d: Vec::with_capacity(n),
            };
            for (q, pixels, points) in poses.by_ref().take(n) {
                record.joint_configs.push(q);
                record.observed_pixels.push(pixels);
                record.measured_points3d.push(points);
            }
            record
        })
        .collect();

    Ok(SweepDataset {
        records,
        intrinsics: *intrinsics,
        plate: *plate,
    })
}

/// Ground truth plus simulated dataset for `config` with the default camera
/// and plate.
pub fn generate(config: &BenchConfig) -> Result<(GroundTruth, SweepDataset)> {
    let truth = make_ground_truth(config)?;
    let dataset = simulate_sweeps(
        &truth,
        &CameraIntrinsics::default(),
        &PlateSpec::default(),
        config,
        Execution::default(),
    )?;
    Ok((truth, dataset))
}
