use serde::{Deserialize, Serialize};

use crate::kinematics::{BaseFrameParams, DhRow, DhTable, ToolFrameParams, JOINT_COUNT};
use crate::{Error, Result};

pub const DELTA_LEN: usize = 4 * JOINT_COUNT + 6 + 2;

const ALPHA: usize = 0;
const A: usize = JOINT_COUNT;
const D: usize = 2 * JOINT_COUNT;
const THETA: usize = 3 * JOINT_COUNT;
const BASE_T: usize = 4 * JOINT_COUNT;
const BASE_R: usize = BASE_T + 3;
const TOOL: usize = BASE_R + 3;

/// Complete parameter set of the camera → tool chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dh: DhTable,
    pub base: BaseFrameParams,
    pub tool: ToolFrameParams,
}

/// The 36 calibration offsets, packed as
/// `Δα₁..₇, Δa₁..₇, Δd₁..₇, Δθ₁..₇, Δd_b(x,y,z), Δδ_b(x,y,z), Δd_t(x,y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DeltaVector([f64; DELTA_LEN]);

impl TryFrom<Vec<f64>> for DeltaVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DeltaVector::from_slice(&v)
    }
}

impl From<DeltaVector> for Vec<f64> {
    fn from(d: DeltaVector) -> Self {
        d.0.to_vec()
    }
}

impl Default for DeltaVector {
    fn default() -> Self {
        Self::zero()
    }
}

impl DeltaVector {
    pub fn zero() -> Self {
        Self([0.0; DELTA_LEN])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; DELTA_LEN] = values.try_into().map_err(|_| {
            Error::InvalidArgument(format!(
                "delta vector needs {DELTA_LEN} entries, got {}",
                values.len()
            ))
        })?;
        if let Some(i) = arr.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delta entry {i} is not finite"
            )));
        }
        Ok(Self(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        self.0[index] = value;
    }

    /// Whether entry `index` is an angle (otherwise a length).
    pub fn is_angle(index: usize) -> bool {
        (ALPHA..A).contains(&index)
            || (THETA..BASE_T).contains(&index)
            || (BASE_R..TOOL).contains(&index)
    }

    pub fn alpha_index(joint: usize) -> usize {
        ALPHA + joint - 1
    }

    pub fn a_index(joint: usize) -> usize {
        A + joint - 1
    }

    pub fn d_index(joint: usize) -> usize {
        D + joint - 1
    }

    pub fn theta_index(joint: usize) -> usize {
        THETA + joint - 1
    }

    /// 0 = x, 1 = y, 2 = z.
    pub fn base_translation_index(axis: usize) -> usize {
        BASE_T + axis
    }

    pub fn base_rotation_index(axis: usize) -> usize {
        BASE_R + axis
    }

    pub fn tool_index(axis: usize) -> usize {
        TOOL + axis
    }

    /// Short name of entry `index`, e.g. `dalpha3`, `dd_bz`, `dd_ty`.
    pub fn label(index: usize) -> String {
        const AXES: [&str; 3] = ["x", "y", "z"];
        match index {
            i if i < A => format!("dalpha{}", i - ALPHA + 1),
            i if i < D => format!("da{}", i - A + 1),
            i if i < THETA => format!("dd{}", i - D + 1),
            i if i < BASE_T => format!("dtheta{}", i - THETA + 1),
            i if i < BASE_R => format!("dd_b{}", AXES[i - BASE_T]),
            i if i < TOOL => format!("ddelta_b{}", AXES[i - BASE_R]),
            i => format!("dd_t{}", AXES[i - TOOL]),
        }
    }

    /// Entry-wise `target - reference`.
    pub fn between(reference: &ModelParams, target: &ModelParams) -> Self {
        let mut out = [0.0; DELTA_LEN];
        for j in 0..JOINT_COUNT {
            let (r, t) = (reference.dh.rows()[j], target.dh.rows()[j]);
            out[ALPHA + j] = t.alpha() - r.alpha();
            out[A + j] = t.a() - r.a();
            out[D + j] = t.d() - r.d();
            out[THETA + j] = t.theta_offset() - r.theta_offset();
        }
        let (rt, tt) = (reference.base.translation(), target.base.translation());
        let (rr, tr) = (reference.base.rotation(), target.base.rotation());
        for k in 0..3 {
            out[BASE_T + k] = tt[k] - rt[k];
            out[BASE_R + k] = tr[k] - rr[k];
        }
        out[TOOL] = target.tool.d_tx - reference.tool.d_tx;
        out[TOOL + 1] = target.tool.d_ty - reference.tool.d_ty;
        Self(out)
    }

    /// Compensates `params` entry-wise by this delta.
    pub fn apply(&self, params: &ModelParams) -> Result<ModelParams> {
        let v = &self.0;
        let mut rows = [DhRow::zero(); JOINT_COUNT];
        for (j, row) in rows.iter_mut().enumerate() {
            let r = params.dh.rows()[j];
            *row = DhRow::new(
                r.alpha() + v[ALPHA + j],
                r.a() + v[A + j],
                r.d() + v[D + j],
                r.theta_offset() + v[THETA + j],
            )?;
        }
        let t = params.base.translation();
        let r = params.base.rotation();
        let base = BaseFrameParams::new(
            [t[0] + v[BASE_T], t[1] + v[BASE_T + 1], t[2] + v[BASE_T + 2]],
            [r[0] + v[BASE_R], r[1] + v[BASE_R + 1], r[2] + v[BASE_R + 2]],
        )?;
        let tool =
            ToolFrameParams::new(params.tool.d_tx + v[TOOL], params.tool.d_ty + v[TOOL + 1])?;
        Ok(ModelParams {
            dh: DhTable::new(rows),
            base,
            tool,
        })
    }
}
