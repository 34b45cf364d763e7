#![allow(dead_code)]

use armcal::bench::{generate, BenchConfig, GroundTruth};
use armcal::identification::{
    fine_identify, rough_identify, seed_from_rough, CalibrationResult, FineOptions,
    RoughIdentification, SweepDataset,
};

pub struct Run {
    pub truth: GroundTruth,
    pub dataset: SweepDataset,
    pub rough: RoughIdentification,
    pub result: CalibrationResult,
}

pub fn bench(seed: u64, sigma: f64) -> BenchConfig {
    BenchConfig {
        seed,
        pixel_noise_sigma: sigma,
        ..BenchConfig::default()
    }
}

/// Rough + fine identification on an already generated dataset.
pub fn calibrate(
    truth: GroundTruth,
    dataset: SweepDataset,
    config: &BenchConfig,
    options: &FineOptions,
) -> Run {
    let rough = rough_identify(&dataset, &config.prior).expect("rough identification");
    let seed = seed_from_rough(&rough, &config.prior).expect("seed");
    let result = fine_identify(&dataset, &seed, options).expect("fine identification");
    Run {
        truth,
        dataset,
        rough,
        result,
    }
}

pub fn generate_and_calibrate(config: &BenchConfig) -> Run {
    let (truth, dataset) = generate(config).expect("bench dataset");
    calibrate(truth, dataset, config, &FineOptions::default())
}
