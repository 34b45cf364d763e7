mod common;

use armcal::bench::{generate, ground_truth_from_delta, simulate_sweeps};
use armcal::identification::{
    evaluate, fine_identify, objective, predicted_pixels, rough_identify, seed_from_rough,
    DeltaVector, FineOptions,
};
use armcal::io::{DatasetFile, GroundTruthBlock, ReportFile, ResultFile, Variant, VariantReport};
use armcal::optimizer::Termination;
use armcal::parallel::Execution;
use armcal::Error;

#[test]
fn truth_reproduces_noiseless_observations() {
    let (truth, dataset) = generate(&common::bench(11, 0.0)).unwrap();
    let e = evaluate(&truth.truth, &dataset, Execution::Sequential).unwrap();
    assert_eq!(e.mean, 0.0);
    assert!(e.per_pose.iter().all(|&d| d == 0.0));
    let predicted = predicted_pixels(&truth.delta_true, &truth.nominal, &dataset).unwrap();
    let observed = dataset.poses();
    for (p, (_, o)) in predicted.iter().zip(&observed) {
        for (a, b) in p.iter().zip(o.iter()) {
            assert!(a.distance(b) < 1e-9);
        }
    }
}

#[test]
fn objective_is_zero_on_data_generated_from_the_seed() {
    let config = common::bench(12, 0.0);
    let (_, dataset) = generate(&config).unwrap();
    let rough = rough_identify(&dataset, &config.prior).unwrap();
    let seed = seed_from_rough(&rough, &config.prior).unwrap();
    let from_seed = ground_truth_from_delta(
        &config,
        DeltaVector::between(&config.nominal().unwrap(), &seed),
    )
    .unwrap();
    let dataset = simulate_sweeps(
        &from_seed,
        &dataset.intrinsics,
        &dataset.plate,
        &config,
        Execution::default(),
    )
    .unwrap();
    assert_eq!(
        objective(
            &DeltaVector::zero(),
            &from_seed.truth,
            &dataset,
            Execution::default()
        )
        .unwrap(),
        0.0
    );
    let result = fine_identify(&dataset, &from_seed.truth, &FineOptions::default()).unwrap();
    assert!(result.objective_value <= 1e-6);
}

#[test]
fn noiseless_round_trip_reaches_zero_deviation() {
    let config = common::bench(1, 0.0);
    let run = common::generate_and_calibrate(&config);
    assert!(run.result.converged, "{:?}", run.result.termination);
    let e = evaluate(
        &run.result.compensated(),
        &run.dataset,
        Execution::default(),
    )
    .unwrap();
    assert!(e.mean <= 1e-6, "compensated mean {}", e.mean);
    // Both code paths give the same number.
    let direct = objective(
        &run.result.delta,
        &run.result.seed,
        &run.dataset,
        Execution::default(),
    )
    .unwrap();
    assert!((direct - e.mean).abs() <= 1e-9);
    assert!((direct - run.result.objective_value).abs() <= 1e-9);
}

#[test]
fn trace_descends_and_keeps_the_inverse_hessian_symmetric() {
    let run = common::generate_and_calibrate(&common::bench(3, 0.2));
    let trace = &run.result.trace;
    assert_eq!(trace.len(), run.result.iterations + 1);
    for w in trace.windows(2) {
        assert!(w[1].f <= w[0].f);
    }
    for r in trace {
        assert!(r.hessian_asymmetry <= 1e-12);
    }
    assert!(run.result.objective_value <= 1.0);
}

#[test]
fn zero_iterations_returns_the_rough_seed_unconverged() {
    let config = common::bench(2, 0.0);
    let (_, dataset) = generate(&config).unwrap();
    let rough = rough_identify(&dataset, &config.prior).unwrap();
    let seed = seed_from_rough(&rough, &config.prior).unwrap();
    let mut options = FineOptions::default();
    options.minimize.max_iterations = 0;
    let result = fine_identify(&dataset, &seed, &options).unwrap();
    assert!(!result.converged);
    assert_eq!(result.termination, Termination::MaxIterations);
    assert_eq!(result.compensated(), seed);
    assert_eq!(result.delta, DeltaVector::zero());
}

#[test]
fn degenerate_sweep_is_reported_with_its_joint() {
    let config = common::bench(2, 0.0);
    let (_, mut dataset) = generate(&config).unwrap();
    let still = dataset.records[2].measured_points3d[0].clone();
    for pose in &mut dataset.records[2].measured_points3d {
        *pose = still.clone();
    }
    let err = rough_identify(&dataset, &config.prior).unwrap_err();
    assert!(err.is_degenerate());
    assert!(matches!(err, Error::Joint { joint: 3, .. }), "{err}");
}

#[test]
fn files_round_trip_bit_exactly() {
    let config = common::bench(9, 0.2);
    let (truth, dataset) = generate(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let file = DatasetFile::new(
        dataset.clone(),
        config.prior,
        Some(GroundTruthBlock { config, truth }),
    );
    let path = dir.path().join("dataset.json");
    file.save(&path).unwrap();
    let loaded = DatasetFile::load(&path).unwrap();
    assert_eq!(loaded, file);
    assert_eq!(loaded.dataset(), dataset);

    let mut options = FineOptions::default();
    options.minimize.max_iterations = 5;
    let run = common::calibrate(truth, dataset, &config, &options);
    let result = ResultFile::new(&run.result, &config.prior.ideal);
    let path = dir.path().join("result.json");
    result.save(&path).unwrap();
    assert_eq!(ResultFile::load(&path).unwrap(), result);

    let deviations = Variant::ALL
        .iter()
        .map(|&v| {
            VariantReport::new(
                v,
                evaluate(
                    result.variants.get(v).unwrap(),
                    &run.dataset,
                    Execution::default(),
                )
                .unwrap(),
            )
        })
        .collect();
    let report = ReportFile::new(&run.rough, &run.result, &config.prior.ideal, deviations);
    let path = dir.path().join("report.json");
    report.save(&path).unwrap();
    let loaded = ReportFile::load(&path).unwrap();
    assert_eq!(loaded, report);
    for d in &loaded.deviations {
        let mean = d.per_pose.iter().sum::<f64>() / d.per_pose.len() as f64;
        assert!((mean - d.mean).abs() <= 1e-9);
    }
    assert_eq!(loaded.circle_fits.len(), 7);
    assert_eq!(loaded.parameters.delta.len(), 36);
}

#[test]
fn wrong_schema_version_is_a_validation_error() {
    let config = common::bench(9, 0.0);
    let (_, dataset) = generate(&config).unwrap();
    let mut file = DatasetFile::new(dataset, config.prior, None);
    file.schema_version = 99;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    file.save(&path).unwrap();
    assert!(matches!(
        DatasetFile::load(&path),
        Err(Error::Validation(_))
    ));
}
