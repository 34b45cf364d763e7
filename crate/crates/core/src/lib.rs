//! Kinematic calibration of a seven-joint serial manipulator from monocular
//! camera observations of an end-mounted calibration plate.
//!
//! The pipeline has two stages:
//!
//! 1. **Rough identification**: each joint is swept alone, the trajectory of
//!    one plate feature is fitted with a space circle, and the D-H twist,
//!    length and offset parameters are read off the common normals of
//!    consecutive joint axes ([`identification::rough_identify`]).
//! 2. **Fine identification**: 36 parameter offsets (28 D-H, 6 camera-to-base,
//!    2 wrist-to-tool) are found by BFGS minimization of the mean pixel
//!    distance between observed and predicted plate features
//!    ([`identification::fine_identify`]).
//!
//! [`bench`] provides a synthetic arm + pinhole camera with known ground truth,
//! and [`io`] the versioned JSON file formats used by the `armcal` binary.
//!
//! # Units
//!
//! Lengths are millimetres, angles radians, image coordinates pixels.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod camera;
pub mod error;
pub mod fitting;
pub mod identification;
pub mod io;
pub mod kinematics;
pub mod optimizer;
pub mod parallel;

pub use error::{Error, Result};
