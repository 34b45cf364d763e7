//! Unconstrained BFGS with central-difference gradients and Armijo
//! backtracking.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::parallel::{map_indexed, Execution};
use crate::{Error, Result};

/// Curvature guard: the update is skipped when `yᵀs ≤ CURVATURE_GUARD·‖y‖‖s‖`.
pub const CURVATURE_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub initial_step: f64,
    pub shrink: f64,
    /// Armijo constant `c` in `f(x + t·d) ≤ f(x) + c·t·∇fᵀd`.
    pub sufficient_decrease: f64,
    pub max_halvings: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub fd_step_relative: f64,
    pub line_search: LineSearch,
    pub execution: Execution,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            step_tolerance: 1e-12,
            fd_step_relative: 1e-6,
            line_search: LineSearch::default(),
            execution: Execution::default(),
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        let positive = [
            ("gradient_tolerance", self.gradient_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("fd_step_relative", self.fd_step_relative),
            ("initial_step", ls.initial_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(ls.shrink > 0.0 && ls.shrink < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "shrink factor must be in (0, 1), got {}",
                ls.shrink
            )));
        }
        if !(ls.sufficient_decrease > 0.0 && ls.sufficient_decrease <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "sufficient-decrease constant must be in (0, 0.5], got {}",
                ls.sufficient_decrease
            )));
        }
        if ls.max_halvings == 0 {
            return Err(Error::InvalidArgument(
                "max_halvings must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// No decrease found along the search direction.
    Stagnation,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            Termination::GradientTolerance | Termination::StepTolerance
        )
    }
}

/// State after one accepted iterate (or the starting point for entry 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub f: f64,
    pub gradient_norm: f64,
    pub step_norm: f64,
    pub step_size: f64,
    /// `max |H - Hᵀ|` of the inverse-Hessian estimate after the update.
    pub hessian_asymmetry: f64,
    /// `sᵀ H s` for the step just taken.
    pub curvature: f64,
    pub update_skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Starting point followed by every accepted iterate.
    pub trace: Vec<IterationRecord>,
}

/// Central-difference gradient with per-coordinate step
/// `h_rel · max(1, |xᵢ|)`.
pub fn numeric_gradient<F>(f: &F, x: &[f64], h_rel: f64, execution: Execution) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    map_indexed(x.len(), execution, |i| {
        let h = h_rel * x[i].abs().max(1.0);
        let mut probe = x.to_vec();
        probe[i] = x[i] + h;
        let plus = f(&probe)?;
        probe[i] = x[i] - h;
        let minus = f(&probe)?;
        if !(plus.is_finite() && minus.is_finite()) {
            return Err(Error::NonFiniteGradient { index: i });
        }
        Ok((plus - minus) / (2.0 * h))
    })
    .into_iter()
    .collect()
}

fn max_asymmetry(h: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    worst
}

/// Inverse BFGS update written so that every entry pair `(i, j)`, `(j, i)`
/// is computed from the same floating-point operations.
fn bfgs_update(h: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>, sy: f64) {
    let hy = &*h * y;
    let yhy = y.dot(&hy);
    let rho = 1.0 / sy;
    let coeff = rho * rho * yhy + rho;
    let n = h.nrows();
    for i in 0..n {
        for j in 0..n {
            let cross = hy[i] * s[j] + s[i] * hy[j];
            h[(i, j)] += coeff * (s[i] * s[j]) - rho * cross;
        }
    }
}

/// Minimizes `f` from `x0` with BFGS.
///
/// Trial points where `f` fails or is non-finite are treated like
/// insufficient decrease and the step is shrunk.
pub fn bfgs_minimize<F>(f: F, x0: &[f64], opts: &MinimizeOptions) -> Result<MinimizeResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    opts.validate()?;
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice())?;
    if !fx.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let gradient = |x: &DVector<f64>| -> Result<DVector<f64>> {
        numeric_gradient(&f, x.as_slice(), opts.fd_step_relative, opts.execution)
            .map(DVector::from_vec)
    };
    let mut g = gradient(&x)?;
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut scaled = false;
    let ls = &opts.line_search;

    let mut trace = vec![IterationRecord {
        f: fx,
        gradient_norm: g.norm(),
        step_norm: 0.0,
        step_size: 0.0,
        hessian_asymmetry: 0.0,
        curvature: 0.0,
        update_skipped: false,
    }];
    let mut iterations = 0;

    let termination = loop {
        if g.norm() <= opts.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }

        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            // Lost positive definiteness numerically: restart from steepest descent.
            h = DMatrix::identity(n, n);
            scaled = false;
            d = -g.clone();
            slope = g.dot(&d);
        }

        let d_norm = d.norm();
        let mut t = ls.initial_step;
        let mut accepted = None;
        let mut too_small = false;
        for _ in 0..=ls.max_halvings {
            if t * d_norm <= opts.step_tolerance {
                too_small = true;
                break;
            }
            let trial = &x + t * &d;
            if let Ok(f_trial) = f(trial.as_slice()) {
                if f_trial.is_finite()
                    && f_trial < fx
                    && f_trial <= fx + ls.sufficient_decrease * t * slope
                {
                    accepted = Some((trial, f_trial));
                    break;
                }
            }
            t *= ls.shrink;
        }
        let Some((x_new, f_new)) = accepted else {
            break if too_small {
                Termination::StepTolerance
            } else {
                Termination::Stagnation
            };
        };
        if f_new > fx {
            return Err(Error::ObjectiveIncrease {
                before: fx,
                after: f_new,
            });
        }

        let g_new = gradient(&x_new)?;
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        let skipped = !(sy > CURVATURE_GUARD * s.norm() * y.norm());
        if !skipped {
            if !scaled {
                h = DMatrix::identity(n, n) * (sy / y.dot(&y));
                scaled = true;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }

        let step_norm = s.norm();
        iterations += 1;
        trace.push(IterationRecord {
            f: f_new,
            gradient_norm: g_new.norm(),
            step_norm,
            step_size: t,
            hessian_asymmetry: max_asymmetry(&h),
            curvature: s.dot(&(&h * &s)),
            update_skipped: skipped,
        });
        x = x_new;
        fx = f_new;
        g = g_new;

        if step_norm <= opts.step_tolerance {
            break Termination::StepTolerance;
        }
    };

    Ok(MinimizeResult {
        x_star: x.as_slice().to_vec(),
        f_star: fx,
        gradient_norm: g.norm(),
        iterations,
        converged: termination.is_converged(),
        termination,
        trace,
    })
}
