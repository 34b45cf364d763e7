use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use armcal::bench::{make_ground_truth, simulate_sweeps, BenchConfig};
use armcal::identification::{
    evaluate, fine_identify, rough_identify, seed_from_rough, FineOptions, ModelParams,
};
use armcal::io::{
    DatasetFile, GroundTruthBlock, PlotFile, ReportFile, ResultFile, Variant, VariantReport,
};
use armcal::parallel::Execution;
use armcal::Error;

const EXIT_IO: u8 = 1;
const EXIT_OTHER: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_NOT_CONVERGED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "armcal",
    version,
    about = "Camera-based kinematic calibration of a 7-joint arm"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sweep dataset with known ground truth.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fraction of the maximum parameter perturbation to inject.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Standard deviation of pixel noise.
        #[arg(long, default_value_t = 0.0)]
        noise_px: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rough + fine identification on a dataset.
    Calibrate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Result (parameter) file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        /// Optional report with deviations, circle fits and the trace.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Execution::Parallel)]
        execution: Execution,
    },
    /// Per-pose pixel deviations of one parameter variant.
    Evaluate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Result file from `calibrate`. Without it only `classic` is
        /// available, taken from the dataset's nominal model.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Variant::Compensated)]
        variant: Variant,
        /// Write the deviation series as JSON for plotting.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    if err.is_degenerate() {
        return EXIT_DEGENERATE;
    }
    match err.root() {
        Error::Io(_) => EXIT_IO,
        Error::Validation(_) | Error::InvalidArgument(_) | Error::Json(_) => EXIT_VALIDATION,
        _ => EXIT_OTHER,
    }
}

fn synth(seed: u64, scale: f64, noise_px: f64, out: PathBuf) -> armcal::Result<u8> {
    let config = BenchConfig {
        seed,
        perturbation_scale: scale,
        pixel_noise_sigma: noise_px,
        ..BenchConfig::default()
    };
    let truth = make_ground_truth(&config)?;
    let dataset = simulate_sweeps(
        &truth,
        &Default::default(),
        &Default::default(),
        &config,
        Execution::default(),
    )?;
    let poses = dataset.pose_count();
    DatasetFile::new(
        dataset,
        config.prior,
        Some(GroundTruthBlock { config, truth }),
    )
    .save(&out)?;
    println!("wrote {} ({poses} poses)", out.display());
    Ok(0)
}

fn calibrate(
    input: PathBuf,
    out: PathBuf,
    max_iters: usize,
    report: Option<PathBuf>,
    execution: Execution,
) -> armcal::Result<u8> {
    let file = DatasetFile::load(&input)?;
    let dataset = file.dataset();
    let rough = rough_identify(&dataset, &file.prior)?;
    let seed = seed_from_rough(&rough, &file.prior)?;
    let mut options = FineOptions::default();
    options.minimize.max_iterations = max_iters;
    options.minimize.execution = execution;
    let result = fine_identify(&dataset, &seed, &options)?;

    let result_file = ResultFile::new(&result, &file.prior.ideal);
    result_file.save(&out)?;

    let mut deviations = Vec::new();
    for variant in Variant::ALL {
        let params = result_file
            .variants
            .get(variant)
            .expect("calibrate fills every variant");
        deviations.push(VariantReport::new(
            variant,
            evaluate(params, &dataset, execution)?,
        ));
    }
    for d in &deviations {
        println!("{:<12} mean deviation {:.6} px", d.variant, d.mean);
    }
    println!(
        "objective {:.6} -> {:.6e} px in {} iterations ({:?})",
        result.initial_objective, result.objective_value, result.iterations, result.termination
    );
    if let Some(path) = report {
        ReportFile::new(&rough, &result, &file.prior.ideal, deviations).save(&path)?;
    }

    if result.converged {
        Ok(0)
    } else {
        eprintln!("warning: fine identification did not converge; best iterate written");
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn classic_from_dataset(file: &DatasetFile) -> armcal::Result<ModelParams> {
    file.ground_truth.map(|g| g.truth.nominal).ok_or_else(|| {
        Error::Validation("dataset has no nominal model; pass --params to evaluate".into())
    })
}

fn evaluate_cmd(
    input: PathBuf,
    params: Option<PathBuf>,
    variant: Variant,
    plot: Option<PathBuf>,
) -> armcal::Result<u8> {
    let file = DatasetFile::load(&input)?;
    let dataset = file.dataset();
    let model = match (&params, variant) {
        (Some(path), _) => *ResultFile::load(path)?
            .variants
            .get(variant)
            .ok_or_else(|| Error::Validation(format!("params file has no `{variant}` variant")))?,
        (None, Variant::Classic) => classic_from_dataset(&file)?,
        (None, _) => {
            return Err(Error::Validation(format!(
                "variant `{variant}` needs --params"
            )));
        }
    };
    let evaluation = evaluate(&model, &dataset, Execution::default())?;

    println!(
        "{:>5} {:>5} {:>10} {:>12}",
        "pose", "joint", "angle_deg", "dev_px"
    );
    let plot_file = PlotFile::new(variant, &dataset, &evaluation);
    for p in &plot_file.series {
        println!(
            "{:>5} {:>5} {:>10.3} {:>12.6}",
            p.pose,
            p.joint,
            p.angle.to_degrees(),
            p.deviation
        );
    }
    println!("{variant} mean deviation {:.3} px", evaluation.mean);
    if let Some(path) = plot {
        plot_file.save(&path)?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth {
            seed,
            scale,
            noise_px,
            out,
        } => synth(seed, scale, noise_px, out),
        Command::Calibrate {
            input,
            out,
            max_iters,
            report,
            execution,
        } => calibrate(input, out, max_iters, report, execution),
        Command::Evaluate {
            input,
            params,
            variant,
            plot,
        } => evaluate_cmd(input, params, variant, plot),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
