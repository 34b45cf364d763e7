//! Denavit-Hartenberg link transforms and the camera → base → wrist → tool
//! chain.
//!
//! Link `i` uses the classic convention
//! `Rot(z, θ) · Trans(z, d) · Trans(x, a) · Rot(x, α)`, where the effective
//! `θ` is the joint reading plus the row's `theta_offset`. Joint `i` therefore
//! rotates about the z-axis of frame `i - 1`.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const JOINT_COUNT: usize = 7;

/// Tolerance used by [`RigidTransform::from_matrix`] for orthonormality and
/// determinant checks.
pub const RIGID_TOLERANCE: f64 = 1e-9;

/// Wraps an angle into `(-π, π]`. Angles already in range are returned
/// bit-for-bit unchanged.
pub fn wrap_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite, got {value}"
        )))
    }
}

/// One row of a D-H table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DhRowRepr", into = "DhRowRepr")]
pub struct DhRow {
    alpha: f64,
    a: f64,
    d: f64,
    theta_offset: f64,
}

#[derive(Serialize, Deserialize)]
struct DhRowRepr {
    alpha: f64,
    a: f64,
    d: f64,
    theta_offset: f64,
}

impl TryFrom<DhRowRepr> for DhRow {
    type Error = Error;

    fn try_from(r: DhRowRepr) -> Result<Self> {
        DhRow::new(r.alpha, r.a, r.d, r.theta_offset)
    }
}

impl From<DhRow> for DhRowRepr {
    fn from(r: DhRow) -> Self {
        DhRowRepr {
            alpha: r.alpha,
            a: r.a,
            d: r.d,
            theta_offset: r.theta_offset,
        }
    }
}

impl DhRow {
    /// Builds a row, wrapping `alpha` and `theta_offset` into `(-π, π]`.
    pub fn new(alpha: f64, a: f64, d: f64, theta_offset: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        ensure_finite("a", a)?;
        ensure_finite("d", d)?;
        ensure_finite("theta_offset", theta_offset)?;
        Ok(Self {
            alpha: wrap_angle(alpha),
            a,
            d,
            theta_offset: wrap_angle(theta_offset),
        })
    }

    pub const fn zero() -> Self {
        Self {
            alpha: 0.0,
            a: 0.0,
            d: 0.0,
            theta_offset: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn theta_offset(&self) -> f64 {
        self.theta_offset
    }
}

/// The seven-row geometric parameter set of the arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DhRow>", into = "Vec<DhRow>")]
pub struct DhTable {
    rows: [DhRow; JOINT_COUNT],
}

impl TryFrom<Vec<DhRow>> for DhTable {
    type Error = Error;

    fn try_from(rows: Vec<DhRow>) -> Result<Self> {
        let rows: [DhRow; JOINT_COUNT] = rows.try_into().map_err(|v: Vec<DhRow>| {
            Error::InvalidArgument(format!(
                "a D-H table needs exactly {JOINT_COUNT} rows, got {}",
                v.len()
            ))
        })?;
        Ok(Self { rows })
    }
}

impl From<DhTable> for Vec<DhRow> {
    fn from(t: DhTable) -> Self {
        t.rows.to_vec()
    }
}

impl DhTable {
    pub fn new(rows: [DhRow; JOINT_COUNT]) -> Self {
        Self { rows }
    }

    pub fn zeros() -> Self {
        Self {
            rows: [DhRow::zero(); JOINT_COUNT],
        }
    }

    /// Nominal parameters of the offset seven-joint arm: twist column
    /// `(-π/2, -π/2, π/2, -π/2, -π/2, π/2, 0)`, link offsets
    /// `(85, 85, 350, 100, 300, 64, 42)` mm, zero link lengths and zero
    /// joint offsets.
    pub fn ideal() -> Self {
        const H: f64 = std::f64::consts::FRAC_PI_2;
        let alpha = [-H, -H, H, -H, -H, H, 0.0];
        let d = [85.0, 85.0, 350.0, 100.0, 300.0, 64.0, 42.0];
        let mut rows = [DhRow::zero(); JOINT_COUNT];
        for (i, row) in rows.iter_mut().enumerate() {
            *row = DhRow {
                alpha: alpha[i],
                a: 0.0,
                d: d[i],
                theta_offset: 0.0,
            };
        }
        Self { rows }
    }

    pub fn rows(&self) -> &[DhRow; JOINT_COUNT] {
        &self.rows
    }

    /// Row for joint `joint` (1-based).
    pub fn row(&self, joint: usize) -> &DhRow {
        &self.rows[joint - 1]
    }
}

/// 4×4 homogeneous transform with an orthonormal, right-handed rotation block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    matrix: Matrix4<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix4::identity(),
        }
    }

    /// Validates the bottom row, orthonormality and determinant.
    pub fn from_matrix(matrix: Matrix4<f64>) -> Result<Self> {
        let t = Self { matrix };
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "transform has non-finite entries".into(),
            ));
        }
        if matrix.row(3) != Matrix4::<f64>::identity().row(3) {
            return Err(Error::InvalidArgument(
                "bottom row must be [0, 0, 0, 1]".into(),
            ));
        }
        if t.orthonormality_error() > RIGID_TOLERANCE {
            return Err(Error::InvalidArgument(
                "rotation block is not orthonormal".into(),
            ));
        }
        if (t.rotation().determinant() - 1.0).abs() > RIGID_TOLERANCE {
            return Err(Error::InvalidArgument(
                "rotation block must have determinant +1".into(),
            ));
        }
        Ok(t)
    }

    pub(crate) fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        let mut matrix = Matrix4::identity();
        matrix.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotation);
        matrix.fixed_view_mut::<3, 1>(0, 3).copy_from(&translation);
        Self { matrix }
    }

    pub fn translation_only(t: Vector3<f64>) -> Self {
        Self::from_parts(Matrix3::identity(), t)
    }

    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_parts(
            Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
            Vector3::zeros(),
        )
    }

    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_parts(
            Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
            Vector3::zeros(),
        )
    }

    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_parts(
            Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            Vector3::zeros(),
        )
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.matrix.fixed_view::<3, 1>(0, 3).into_owned()
    }

    /// `max |RᵀR - I|` of the rotation block.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.rotation();
        (r.transpose() * r - Matrix3::identity()).abs().max()
    }

    pub fn is_rigid(&self) -> bool {
        self.matrix.row(3) == Matrix4::<f64>::identity().row(3)
            && self.orthonormality_error() <= RIGID_TOLERANCE
            && (self.rotation().determinant() - 1.0).abs() <= RIGID_TOLERANCE
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let h = self.matrix * Vector4::new(p.x, p.y, p.z, 1.0);
        Vector3::new(h.x, h.y, h.z)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        Self::from_parts(rt, -(rt * self.translation()))
    }
}

impl Mul for RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: RigidTransform) -> RigidTransform {
        RigidTransform {
            matrix: self.matrix * rhs.matrix,
        }
    }
}

impl Mul<&RigidTransform> for &RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: &RigidTransform) -> RigidTransform {
        RigidTransform {
            matrix: self.matrix * rhs.matrix,
        }
    }
}

/// Pose of the robot base expressed in the camera frame.
///
/// Composed as `Trans(x) · Trans(y) · Trans(z) · Rot(x) · Rot(y) · Rot(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BaseFrameRepr", into = "BaseFrameRepr")]
pub struct BaseFrameParams {
    d_bx: f64,
    d_by: f64,
    d_bz: f64,
    delta_bx: f64,
    delta_by: f64,
    delta_bz: f64,
}

#[derive(Serialize, Deserialize)]
struct BaseFrameRepr {
    d_bx: f64,
    d_by: f64,
    d_bz: f64,
    delta_bx: f64,
    delta_by: f64,
    delta_bz: f64,
}

impl TryFrom<BaseFrameRepr> for BaseFrameParams {
    type Error = Error;

    fn try_from(r: BaseFrameRepr) -> Result<Self> {
        BaseFrameParams::new(
            [r.d_bx, r.d_by, r.d_bz],
            [r.delta_bx, r.delta_by, r.delta_bz],
        )
    }
}

impl From<BaseFrameParams> for BaseFrameRepr {
    fn from(p: BaseFrameParams) -> Self {
        BaseFrameRepr {
            d_bx: p.d_bx,
            d_by: p.d_by,
            d_bz: p.d_bz,
            delta_bx: p.delta_bx,
            delta_by: p.delta_by,
            delta_bz: p.delta_bz,
        }
    }
}

impl BaseFrameParams {
    /// `translation` in mm, `rotation` as (δx, δy, δz) in radians.
    pub fn new(translation: [f64; 3], rotation: [f64; 3]) -> Result<Self> {
        for (name, v) in ["d_bx", "d_by", "d_bz"].iter().zip(translation) {
            ensure_finite(name, v)?;
        }
        for (name, v) in ["delta_bx", "delta_by", "delta_bz"].iter().zip(rotation) {
            ensure_finite(name, v)?;
        }
        Ok(Self {
            d_bx: translation[0],
            d_by: translation[1],
            d_bz: translation[2],
            delta_bx: wrap_angle(rotation[0]),
            delta_by: wrap_angle(rotation[1]),
            delta_bz: wrap_angle(rotation[2]),
        })
    }

    pub fn identity() -> Self {
        Self {
            d_bx: 0.0,
            d_by: 0.0,
            d_bz: 0.0,
            delta_bx: 0.0,
            delta_by: 0.0,
            delta_bz: 0.0,
        }
    }

    pub fn translation(&self) -> [f64; 3] {
        [self.d_bx, self.d_by, self.d_bz]
    }

    pub fn rotation(&self) -> [f64; 3] {
        [self.delta_bx, self.delta_by, self.delta_bz]
    }
}

/// Wrist-to-tool offset. Only the in-plane translation is modelled: the
/// z-offset is carried by the last link's `d` and rotation is neglected.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ToolFrameParams {
    pub d_tx: f64,
    pub d_ty: f64,
}

impl ToolFrameParams {
    pub fn new(d_tx: f64, d_ty: f64) -> Result<Self> {
        ensure_finite("d_tx", d_tx)?;
        ensure_finite("d_ty", d_ty)?;
        Ok(Self { d_tx, d_ty })
    }
}

/// Seven joint readings in radians, each within ±π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct JointConfig {
    angles: [f64; JOINT_COUNT],
}

impl TryFrom<Vec<f64>> for JointConfig {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        let angles: [f64; JOINT_COUNT] = v.try_into().map_err(|v: Vec<f64>| {
            Error::InvalidArgument(format!(
                "expected {JOINT_COUNT} joint angles, got {}",
                v.len()
            ))
        })?;
        JointConfig::new(angles)
    }
}

impl From<JointConfig> for Vec<f64> {
    fn from(q: JointConfig) -> Self {
        q.angles.to_vec()
    }
}

impl JointConfig {
    pub fn new(angles: [f64; JOINT_COUNT]) -> Result<Self> {
        for (i, &a) in angles.iter().enumerate() {
            if !a.is_finite() || a.abs() > PI {
                return Err(Error::InvalidArgument(format!(
                    "joint {} angle {a} is outside ±π",
                    i + 1
                )));
            }
        }
        Ok(Self { angles })
    }

    pub fn zero() -> Self {
        Self {
            angles: [0.0; JOINT_COUNT],
        }
    }

    /// All joints at zero except `joint` (1-based).
    pub fn single(joint: usize, angle: f64) -> Result<Self> {
        if !(1..=JOINT_COUNT).contains(&joint) {
            return Err(Error::InvalidArgument(format!(
                "joint index {joint} out of range"
            )));
        }
        let mut angles = [0.0; JOINT_COUNT];
        angles[joint - 1] = angle;
        Self::new(angles)
    }

    pub fn angles(&self) -> &[f64; JOINT_COUNT] {
        &self.angles
    }
}

/// Homogeneous transform of one link for the given joint reading.
pub fn dh_link_transform(row: &DhRow, joint_angle: f64) -> Result<RigidTransform> {
    ensure_finite("joint_angle", joint_angle)?;
    Ok(link_matrix(row, joint_angle))
}

fn link_matrix(row: &DhRow, joint_angle: f64) -> RigidTransform {
    let (st, ct) = (joint_angle + row.theta_offset).sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        ct, -st * ca,  st * sa, row.a * ct,
        st,  ct * ca, -ct * sa, row.a * st,
        0.0,      sa,       ca,      row.d,
        0.0,     0.0,      0.0,        1.0,
    );
    RigidTransform { matrix }
}

/// Base-to-wrist transform `⁰T₁ · ¹T₂ ⋯ ⁶T₇`.
pub fn forward_kinematics(table: &DhTable, q: &JointConfig) -> RigidTransform {
    table
        .rows
        .iter()
        .zip(q.angles.iter())
        .fold(RigidTransform::identity(), |acc, (row, &angle)| {
            acc * link_matrix(row, angle)
        })
}

/// Origins and z-axes of frames `0..=7` in the base frame.
pub fn frame_chain(table: &DhTable, q: &JointConfig) -> Vec<RigidTransform> {
    let mut frames = Vec::with_capacity(JOINT_COUNT + 1);
    let mut acc = RigidTransform::identity();
    frames.push(acc);
    for (row, &angle) in table.rows.iter().zip(q.angles.iter()) {
        acc = acc * link_matrix(row, angle);
        frames.push(acc);
    }
    frames
}

pub fn base_to_camera_transform(p: &BaseFrameParams) -> RigidTransform {
    let [dx, dy, dz] = p.translation();
    let [rx, ry, rz] = p.rotation();
    RigidTransform::translation_only(Vector3::new(dx, dy, dz))
        * RigidTransform::rot_x(rx)
        * RigidTransform::rot_y(ry)
        * RigidTransform::rot_z(rz)
}

pub fn wrist_to_tool_transform(p: &ToolFrameParams) -> RigidTransform {
    RigidTransform::translation_only(Vector3::new(p.d_tx, p.d_ty, 0.0))
}

/// Camera-to-tool transform: base pose · arm chain · tool offset.
pub fn full_chain(
    base: &BaseFrameParams,
    table: &DhTable,
    tool: &ToolFrameParams,
    q: &JointConfig,
) -> RigidTransform {
    base_to_camera_transform(base) * forward_kinematics(table, q) * wrist_to_tool_transform(tool)
}
