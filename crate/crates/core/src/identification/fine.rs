use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::dataset::SweepDataset;
use super::delta::{DeltaVector, ModelParams, DELTA_LEN};
use crate::camera::{plate_feature_points, project, CameraIntrinsics, PixelPoint};
use crate::kinematics::{full_chain, BaseFrameParams, DhTable, JointConfig, ToolFrameParams};
use crate::optimizer::{bfgs_minimize, IterationRecord, MinimizeOptions, Termination};
use crate::parallel::{map_indexed, Execution};
use crate::Result;

/// Pixels of every plate feature for one arm configuration.
pub(crate) fn pose_pixels(
    params: &ModelParams,
    q: &JointConfig,
    plate_points: &[Vector3<f64>],
    intrinsics: &CameraIntrinsics,
) -> Result<Vec<PixelPoint>> {
    let chain = full_chain(&params.base, &params.dh, &params.tool, q);
    plate_points
        .iter()
        .map(|p| project(intrinsics, &chain.transform_point(p)))
        .collect()
}

/// Sum of pixel distances per pose, record-major. The per-pose terms may be
/// computed concurrently; callers reduce them in pose order.
fn pose_distance_sums(
    params: &ModelParams,
    dataset: &SweepDataset,
    execution: Execution,
) -> Result<Vec<f64>> {
    let plate = plate_feature_points(&dataset.plate);
    let poses = dataset.poses();
    map_indexed(poses.len(), execution, |i| {
        let (q, observed) = poses[i];
        let predicted =
            pose_pixels(params, q, &plate, &dataset.intrinsics).map_err(|e| e.at_pose(i))?;
        Ok(predicted
            .iter()
            .zip(observed)
            .map(|(p, o)| p.distance(o))
            .sum::<f64>())
    })
    .into_iter()
    .collect()
}

/// Predicted feature pixels for every pose after compensating `seed` by
/// `delta`.
pub fn predicted_pixels(
    delta: &DeltaVector,
    seed: &ModelParams,
    dataset: &SweepDataset,
) -> Result<Vec<Vec<PixelPoint>>> {
    let params = delta.apply(seed)?;
    let plate = plate_feature_points(&dataset.plate);
    dataset
        .poses()
        .iter()
        .enumerate()
        .map(|(i, (q, _))| {
            pose_pixels(&params, q, &plate, &dataset.intrinsics).map_err(|e| e.at_pose(i))
        })
        .collect()
}

/// Mean Euclidean distance (px) between observed and predicted features over
/// all poses and features.
pub fn objective(
    delta: &DeltaVector,
    seed: &ModelParams,
    dataset: &SweepDataset,
    execution: Execution,
) -> Result<f64> {
    let params = delta.apply(seed)?;
    let sums = pose_distance_sums(&params, dataset, execution)?;
    let count = dataset.pose_count() * dataset.plate.feature_count();
    Ok(sums.iter().sum::<f64>() / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Mean feature deviation (px) per pose, record-major.
    pub per_pose: Vec<f64>,
    /// Mean deviation over all features of all poses.
    pub mean: f64,
}

/// Pixel deviations of `params` against the dataset observations.
pub fn evaluate(
    params: &ModelParams,
    dataset: &SweepDataset,
    execution: Execution,
) -> Result<Evaluation> {
    let sums = pose_distance_sums(params, dataset, execution)?;
    let features = dataset.plate.feature_count() as f64;
    let mean = sums.iter().sum::<f64>() / (features * sums.len() as f64);
    Ok(Evaluation {
        per_pose: sums.iter().map(|s| s / features).collect(),
        mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineOptions {
    pub minimize: MinimizeOptions,
    /// Internal-unit factor for angular entries of the delta.
    pub angle_scale: f64,
    /// Internal-unit factor for length entries of the delta.
    pub length_scale: f64,
}

impl Default for FineOptions {
    fn default() -> Self {
        Self {
            // The objective is a sum of norms; near a noiseless optimum the
            // kinks are only resolved by a very short difference step.
            minimize: MinimizeOptions {
                fd_step_relative: 1e-10,
                ..MinimizeOptions::default()
            },
            angle_scale: 1.0,
            length_scale: 0.01,
        }
    }
}

impl FineOptions {
    fn scale(&self, index: usize) -> f64 {
        if DeltaVector::is_angle(index) {
            self.angle_scale
        } else {
            self.length_scale
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub dh_rough: DhTable,
    /// Starting point of the optimization.
    pub seed: ModelParams,
    pub delta: DeltaVector,
    pub dh_compensated: DhTable,
    pub base: BaseFrameParams,
    pub tool: ToolFrameParams,
    pub initial_objective: f64,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub trace: Vec<IterationRecord>,
}

impl CalibrationResult {
    pub fn compensated(&self) -> ModelParams {
        ModelParams {
            dh: self.dh_compensated,
            base: self.base,
            tool: self.tool,
        }
    }
}

/// Minimizes the pixel objective over the 36 offsets, starting from a zero
/// delta around `seed`.
///
/// The minimizer works on `delta ∘ scale` (angles × `angle_scale`, lengths ×
/// `length_scale`). A run that stops without meeting a tolerance is returned
/// with `converged == false` and the best delta found.
pub fn fine_identify(
    dataset: &SweepDataset,
    seed: &ModelParams,
    options: &FineOptions,
) -> Result<CalibrationResult> {
    dataset.validate()?;
    let execution = options.minimize.execution;
    let scales: Vec<f64> = (0..DELTA_LEN).map(|i| options.scale(i)).collect();
    let unscale = |z: &[f64]| -> Result<DeltaVector> {
        let raw: Vec<f64> = z.iter().zip(&scales).map(|(v, s)| v / s).collect();
        DeltaVector::from_slice(&raw)
    };
    let f = |z: &[f64]| -> Result<f64> { objective(&unscale(z)?, seed, dataset, execution) };

    let minimized = bfgs_minimize(f, &[0.0; DELTA_LEN], &options.minimize)?;
    let delta = unscale(&minimized.x_star)?;
    let compensated = delta.apply(seed)?;

    Ok(CalibrationResult {
        dh_rough: seed.dh,
        seed: *seed,
        delta,
        dh_compensated: compensated.dh,
        base: compensated.base,
        tool: compensated.tool,
        initial_objective: minimized.trace[0].f,
        objective_value: minimized.f_star,
        iterations: minimized.iterations,
        converged: minimized.converged,
        termination: minimized.termination,
        trace: minimized.trace,
    })
}
