//! Rough (axis-measurement) and fine (pixel-objective) identification of the
//! 36 calibration parameters.

mod axes;
mod dataset;
mod delta;
mod fine;
mod rough;

pub use axes::{common_normal, common_normal_along, extract_joint_axis, AxisLine, CommonNormal};
pub use dataset::{CalibrationPrior, SweepDataset, SweepRecord, DESIGNATED_FEATURE};
pub use delta::{DeltaVector, ModelParams, DELTA_LEN};
pub use fine::{
    evaluate, fine_identify, objective, predicted_pixels, CalibrationResult, Evaluation,
    FineOptions,
};
pub use rough::{rough_identify, seed_from_rough, JointFit, RoughIdentification};
