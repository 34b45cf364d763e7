//! Versioned JSON file formats: datasets, calibration results, reports and
//! plot series.
//!
//! Every file carries `schema_version` and a `units` header. Floats are
//! written in shortest round-trip form, so `load(save(x)) == x` bit for bit.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bench::{BenchConfig, GroundTruth};
use crate::camera::{CameraIntrinsics, PlateSpec};
use crate::fitting::FitQuality;
use crate::identification::{
    CalibrationPrior, CalibrationResult, DeltaVector, Evaluation, ModelParams, RoughIdentification,
    SweepDataset, SweepRecord, DELTA_LEN,
};
use crate::kinematics::{BaseFrameParams, DhTable, ToolFrameParams};
use crate::optimizer::{IterationRecord, Termination};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    pub length: String,
    pub angle: String,
    pub image: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            length: "mm".into(),
            angle: "rad".into(),
            image: "px".into(),
        }
    }
}

fn check_header(kind: &str, version: u32, units: &Units) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "{kind}: unsupported schema version {version} (expected {SCHEMA_VERSION})"
        )));
    }
    if *units != Units::default() {
        return Err(Error::Validation(format!(
            "{kind}: units must be mm / rad / px, got {} / {} / {}",
            units.length, units.angle, units.image
        )));
    }
    Ok(())
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Bench settings and true parameters of a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBlock {
    pub config: BenchConfig,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub schema_version: u32,
    pub units: Units,
    pub intrinsics: CameraIntrinsics,
    pub plate: PlateSpec,
    pub prior: CalibrationPrior,
    pub records: Vec<SweepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruthBlock>,
}

impl DatasetFile {
    pub fn new(
        dataset: SweepDataset,
        prior: CalibrationPrior,
        ground_truth: Option<GroundTruthBlock>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            units: Units::default(),
            intrinsics: dataset.intrinsics,
            plate: dataset.plate,
            prior,
            records: dataset.records,
            ground_truth,
        }
    }

    pub fn dataset(&self) -> SweepDataset {
        SweepDataset {
            records: self.records.clone(),
            intrinsics: self.intrinsics,
            plate: self.plate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_header("dataset", self.schema_version, &self.units)?;
        self.dataset().validate()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(path, self)
    }

    /// Loads and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: Self = load_json(path)?;
        file.validate()?;
        Ok(file)
    }
}

/// Which parameter set to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Design D-H table.
    Classic,
    /// Axis-measurement table, before fine identification.
    Rough,
    /// Rough table plus the identified offsets.
    Compensated,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Classic, Variant::Rough, Variant::Compensated];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Classic => "classic",
            Variant::Rough => "rough",
            Variant::Compensated => "compensated",
        })
    }
}

/// Parameter sets by variant. Any of them may be absent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VariantParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classic: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rough: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensated: Option<ModelParams>,
}

impl VariantParams {
    pub fn get(&self, variant: Variant) -> Option<&ModelParams> {
        match variant {
            Variant::Classic => self.classic.as_ref(),
            Variant::Rough => self.rough.as_ref(),
            Variant::Compensated => self.compensated.as_ref(),
        }
    }
}

/// Output of `calibrate`.
///
/// The classic and rough variants share the compensated base and tool frames
/// so that they differ from it only in the D-H table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema_version: u32,
    pub units: Units,
    pub converged: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub initial_objective: f64,
    pub objective_value: f64,
    /// Starting point of fine identification.
    pub seed: ModelParams,
    pub delta: DeltaVector,
    pub variants: VariantParams,
}

impl ResultFile {
    pub fn new(result: &CalibrationResult, ideal: &DhTable) -> Self {
        let compensated = result.compensated();
        Self {
            schema_version: SCHEMA_VERSION,
            units: Units::default(),
            converged: result.converged,
            termination: result.termination,
            iterations: result.iterations,
            initial_objective: result.initial_objective,
            objective_value: result.objective_value,
            seed: result.seed,
            delta: result.delta,
            variants: VariantParams {
                classic: Some(ModelParams {
                    dh: *ideal,
                    ..compensated
                }),
                rough: Some(ModelParams {
                    dh: result.dh_rough,
                    ..compensated
                }),
                compensated: Some(compensated),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_header("result", self.schema_version, &self.units)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: Self = load_json(path)?;
        file.validate()?;
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub per_pose: Vec<f64>,
    pub mean: f64,
}

impl VariantReport {
    pub fn new(variant: Variant, evaluation: Evaluation) -> Self {
        Self {
            variant,
            per_pose: evaluation.per_pose,
            mean: evaluation.mean,
        }
    }
}

/// One row of the circle-fit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFitRow {
    pub joint: usize,
    /// Plane `normal · p + offset = 0`.
    pub normal: [f64; 3],
    pub offset: f64,
    pub center: [f64; 3],
    pub radius: f64,
    pub quality: FitQuality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTables {
    pub ideal: DhTable,
    pub rough: DhTable,
    /// Which rough entries (`[alpha, a, d, theta_offset]` per joint) were
    /// measured rather than copied from the design table.
    pub measured: [[bool; 4]; 7],
    pub compensated: DhTable,
    pub delta: Vec<DeltaEntry>,
    pub base: BaseFrameParams,
    pub tool: ToolFrameParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub units: Units,
    pub converged: bool,
    pub termination: Termination,
    pub deviations: Vec<VariantReport>,
    pub circle_fits: Vec<CircleFitRow>,
    pub trace: Vec<IterationRecord>,
    pub parameters: ParameterTables,
}

impl ReportFile {
    pub fn new(
        rough: &RoughIdentification,
        result: &CalibrationResult,
        ideal: &DhTable,
        deviations: Vec<VariantReport>,
    ) -> Self {
        let circle_fits = rough
            .joints
            .iter()
            .map(|fit| CircleFitRow {
                joint: fit.joint,
                normal: fit.circle.plane.normal.into(),
                offset: fit.circle.plane.offset,
                center: fit.circle.center.into(),
                radius: fit.circle.radius,
                quality: fit.quality,
            })
            .collect();
        let delta = (0..DELTA_LEN)
            .map(|i| DeltaEntry {
                name: DeltaVector::label(i),
                value: result.delta.get(i),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            units: Units::default(),
            converged: result.converged,
            termination: result.termination,
            deviations,
            circle_fits,
            trace: result.trace.clone(),
            parameters: ParameterTables {
                ideal: *ideal,
                rough: rough.table,
                measured: rough.measured,
                compensated: result.dh_compensated,
                delta,
                base: result.base,
                tool: result.tool,
            },
        }
    }

    pub fn deviation(&self, variant: Variant) -> Option<&VariantReport> {
        self.deviations.iter().find(|d| d.variant == variant)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: Self = load_json(path)?;
        check_header("report", file.schema_version, &file.units)?;
        Ok(file)
    }
}

/// Per-pose deviation series for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    /// Running pose number, record-major.
    pub pose: usize,
    pub joint: usize,
    pub angle: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotFile {
    pub schema_version: u32,
    pub units: Units,
    pub variant: Variant,
    pub mean: f64,
    pub series: Vec<PlotPoint>,
}

impl PlotFile {
    pub fn new(variant: Variant, dataset: &SweepDataset, evaluation: &Evaluation) -> Self {
        let series = dataset
            .records
            .iter()
            .flat_map(|r| r.commanded_angles.iter().map(move |&a| (r.joint_index, a)))
            .zip(&evaluation.per_pose)
            .enumerate()
            .map(|(pose, ((joint, angle), &deviation))| PlotPoint {
                pose,
                joint,
                angle,
                deviation,
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            units: Units::default(),
            variant,
            mean: evaluation.mean,
            series,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(path, self)
    }
}
