use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point behind the camera (z = {z} mm)")]
    BehindCamera { z: f64 },

    #[error("point too close to the image plane (z = {z} mm)")]
    NearSingular { z: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate circle: {0}")]
    DegenerateCircle(String),

    #[error("joint axis indeterminate: circle radius {radius:.4} mm is below {min} mm")]
    AxisIndeterminate { radius: f64, min: f64 },

    #[error("joint {joint}: {source}")]
    Joint {
        joint: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pose {pose}: {source}")]
    Pose {
        pose: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("feature {feature} outside the image at joint {joint}, angle {angle_deg:.3} deg ({u:.1}, {v:.1}) px")]
    NotVisible {
        joint: usize,
        angle_deg: f64,
        feature: usize,
        u: f64,
        v: f64,
    },

    #[error("non-finite objective value while probing gradient coordinate {index}")]
    NonFiniteGradient { index: usize },

    #[error("objective is not finite at the starting point")]
    NonFiniteStart,

    #[error("objective increased from {before} to {after} on an accepted step")]
    ObjectiveIncrease { before: f64, after: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_joint(self, joint: usize) -> Self {
        Error::Joint {
            joint,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_pose(self, pose: usize) -> Self {
        Error::Pose {
            pose,
            source: Box::new(self),
        }
    }

    /// Innermost error, with joint/pose context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Joint { source, .. } | Error::Pose { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(
            self.root(),
            Error::DegenerateInput(_)
                | Error::DegenerateCircle(_)
                | Error::AxisIndeterminate { .. }
        )
    }
}
