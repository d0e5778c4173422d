//! Box-constrained BFGS and the two-phase training strategy.
//!
//! Phase 1 minimizes the penalty objective to get a network that roughly
//! matches both the PDE and the boundary values. Phase 2 switches to the
//! exactly-constrained model, starting from the phase-1 parameters, and
//! polishes the interior residual while the boundary layer keeps the
//! boundary values pinned at every iterate.
//!
//! Box constraints (applied to the sigmoid input weights and biases so
//! the exponentials keep precision) are handled by gradient projection:
//! iterates are clamped onto the box after each quasi-Newton step and
//! stationarity is measured on the projected gradient.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::MlpParams;
use crate::pde::{PenaltyObjective, ProblemSpec, SynergyObjective, TrialSolution};

/// Armijo sufficient-decrease constant.
const ARMIJO_C1: f64 = 1e-4;
/// Backtracking shrink factor.
const BACKTRACK_SHRINK: f64 = 0.5;
/// Maximum number of step halvings per line search.
const MAX_BACKTRACKS: usize = 40;
/// Curvature threshold below which the inverse-Hessian update is skipped
/// and the approximation reset to the identity.
const CURVATURE_EPS: f64 = 1e-12;

/// Knobs for a single [`bfgs_minimize`] run.
#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stationarity tolerance on the projected-gradient max-norm.
    pub grad_tol: f64,
}

/// Why a minimization run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    Budget,
    LineSearchFailure,
}

/// Outcome of one optimization phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseReport {
    pub iterations: usize,
    pub initial_error: f64,
    pub final_error: f64,
    pub final_projected_gradient_norm: f64,
    pub termination: Termination,
    /// Objective value at the start and after every accepted step.
    pub trajectory: Vec<f64>,
}

/// Combined record of a two-phase training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub penalty: PhaseReport,
    pub synergy: PhaseReport,
    /// Unweighted interior residual sum of the bare network at the
    /// phase-1 optimum (the penalty objective conflates it with the
    /// boundary term).
    pub penalty_interior_error: f64,
    /// Unweighted boundary mismatch sum at the phase-1 optimum.
    pub penalty_boundary_error: f64,
    pub wall_time_secs: f64,
}

/// Training configuration for [`two_phase_train`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Penalty factor η on the boundary term in phase 1.
    pub eta: f64,
    /// Box applied to the input weights and biases (output weights stay
    /// unbounded).
    pub box_lo: f64,
    pub box_hi: f64,
    pub max_iters_penalty: usize,
    pub max_iters_synergy: usize,
    /// Stationarity tolerance on the projected-gradient max-norm.
    pub grad_tol: f64,
    /// Seed for the parameter initialization.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 100.0,
            box_lo: -20.0,
            box_hi: 20.0,
            max_iters_penalty: 2000,
            max_iters_synergy: 200,
            grad_tol: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.box_lo < self.box_hi) {
            return Err(Error::InvalidArgument(format!(
                "box_lo must be below box_hi, got [{}, {}]",
                self.box_lo, self.box_hi
            )));
        }
        if self.max_iters_penalty == 0 || self.max_iters_synergy == 0 {
            return Err(Error::InvalidArgument("iteration budgets must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

fn project(x: &DVector<f64>, bounds: Option<&[(f64, f64)]>) -> DVector<f64> {
    match bounds {
        None => x.clone(),
        Some(b) => DVector::from_fn(x.len(), |i, _| x[i].clamp(b[i].0, b[i].1)),
    }
}

/// Max-norm of `x - P(x - g)`, zero exactly at a box-stationary point.
fn projected_gradient_norm(x: &DVector<f64>, g: &DVector<f64>, bounds: Option<&[(f64, f64)]>) -> f64 {
    let stepped = project(&(x - g), bounds);
    (x - stepped).amax()
}

/// Minimizes `objective` with BFGS (dense inverse-Hessian approximation),
/// backtracking Armijo line search, and optional per-coordinate box
/// constraints handled by projection.
///
/// Returns the final iterate (never worse than the start) together with a
/// [`PhaseReport`]. Non-finite objective values at the starting point are
/// an error; during line search they trigger step shrinkage and only
/// become an error when the shrinkage budget runs out.
pub fn bfgs_minimize<F>(
    objective: &mut F,
    x0: DVector<f64>,
    bounds: Option<&[(f64, f64)]>,
    options: &BfgsOptions,
) -> Result<(DVector<f64>, PhaseReport)>
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let n = x0.len();
    if let Some(b) = bounds {
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: b.len() });
        }
        for (i, &(lo, hi)) in b.iter().enumerate() {
            if lo > hi || lo.is_nan() || hi.is_nan() {
                return Err(Error::InvalidArgument(format!(
                    "bad bounds [{lo}, {hi}] for coordinate {i}"
                )));
            }
        }
    }

    let mut x = project(&x0, bounds);
    let (mut value, mut grad) = objective(&x);
    if !value.is_finite() || !grad.iter().all(|g| g.is_finite()) {
        return Err(Error::NonFiniteStart);
    }

    let initial_error = value;
    let mut trajectory = vec![value];
    let mut inv_hessian = DMatrix::identity(n, n);
    let mut rescale_pending = true;
    let mut termination = Termination::Budget;
    let mut iterations = 0;

    for _ in 0..options.max_iters {
        if projected_gradient_norm(&x, &grad, bounds) <= options.grad_tol {
            termination = Termination::Converged;
            break;
        }

        let mut direction = -(&inv_hessian * &grad);
        if direction.dot(&grad) >= 0.0 {
            // Not a descent direction; fall back to steepest descent.
            inv_hessian = DMatrix::identity(n, n);
            rescale_pending = true;
            direction = -&grad;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        let mut saw_nonfinite = false;
        for _ in 0..MAX_BACKTRACKS {
            let x_trial = project(&(&x + alpha * &direction), bounds);
            let step = &x_trial - &x;
            if step.amax() == 0.0 {
                break; // projection swallowed the whole step
            }
            let (f_trial, g_trial) = objective(&x_trial);
            if f_trial.is_finite() {
                let slope = grad.dot(&step);
                if f_trial <= value + ARMIJO_C1 * slope && f_trial < value {
                    accepted = Some((x_trial, f_trial, g_trial));
                    break;
                }
            } else {
                saw_nonfinite = true;
            }
            alpha *= BACKTRACK_SHRINK;
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if saw_nonfinite {
                return Err(Error::NonFiniteObjective);
            }
            termination = Termination::LineSearchFailure;
            break;
        };

        let s = &x_new - &x;
        let y = &g_new - &grad;
        let sy = s.dot(&y);
        if sy > CURVATURE_EPS * s.norm() * y.norm() {
            if rescale_pending {
                // Scale the initial approximation to the first curvature
                // pair before applying any update.
                inv_hessian = DMatrix::identity(n, n) * (sy / y.dot(&y));
                rescale_pending = false;
            }
            let rho = 1.0 / sy;
            let hy = &inv_hessian * &y;
            let yhy = y.dot(&hy);
            inv_hessian.ger(-rho, &s, &hy, 1.0);
            inv_hessian.ger(-rho, &hy, &s, 1.0);
            inv_hessian.ger(rho * rho * yhy + rho, &s, &s, 1.0);
        } else {
            inv_hessian = DMatrix::identity(n, n);
            rescale_pending = true;
        }

        x = x_new;
        value = f_new;
        grad = g_new;
        trajectory.push(value);
        iterations += 1;
    }

    let report = PhaseReport {
        iterations,
        initial_error,
        final_error: value,
        final_projected_gradient_norm: projected_gradient_norm(&x, &grad, bounds),
        termination,
        trajectory,
    };
    Ok((x, report))
}

/// Per-parameter box for an `H x n` network: output weights free, input
/// weights and biases clamped to `[lo, hi]`.
fn parameter_bounds(hidden: usize, dim: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let total = hidden * (dim + 2);
    (0..total)
        .map(|i| if i < hidden { (f64::NEG_INFINITY, f64::INFINITY) } else { (lo, hi) })
        .collect()
}

/// Runs the full strategy: seeded uniform initialization in `[-1, 1]`,
/// penalty phase, then synergy refinement from the penalty optimum.
/// Returns the final synergy-mode solution with freshly solved layer
/// coefficients and the report covering both phases.
pub fn two_phase_train(
    problem: &ProblemSpec,
    hidden_count: usize,
    config: &TrainConfig,
) -> Result<(TrialSolution, TrainReport)> {
    config.validate()?;
    if hidden_count == 0 {
        return Err(Error::InvalidArgument("hidden_count must be positive".into()));
    }
    let start = Instant::now();
    let dim = problem.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = MlpParams::random(hidden_count, dim, &mut rng);
    let bounds = parameter_bounds(hidden_count, dim, config.box_lo, config.box_hi);

    let penalty = PenaltyObjective::new(problem, config.eta)?;
    let mut penalty_fn = |p: &DVector<f64>| {
        let params = MlpParams::from_vector(hidden_count, dim, p)
            .expect("optimizer preserves the parameter layout");
        penalty
            .value_and_gradient(&params)
            .expect("dimensions validated at objective construction")
    };
    let (phase1_params, penalty_report) = bfgs_minimize(
        &mut penalty_fn,
        initial.to_vector(),
        Some(&bounds),
        &BfgsOptions { max_iters: config.max_iters_penalty, grad_tol: config.grad_tol },
    )?;

    let (penalty_interior_error, penalty_boundary_error) =
        penalty.value_parts(&MlpParams::from_vector(hidden_count, dim, &phase1_params)?)?;

    let synergy = SynergyObjective::new(problem)?;
    let mut synergy_fn = |p: &DVector<f64>| {
        let params = MlpParams::from_vector(hidden_count, dim, p)
            .expect("optimizer preserves the parameter layout");
        synergy
            .value_and_gradient(&params)
            .expect("dimensions validated at objective construction")
    };
    let (phase2_params, synergy_report) = bfgs_minimize(
        &mut synergy_fn,
        phase1_params,
        Some(&bounds),
        &BfgsOptions { max_iters: config.max_iters_synergy, grad_tol: config.grad_tol },
    )?;

    let final_params = MlpParams::from_vector(hidden_count, dim, &phase2_params)?;
    let solution = TrialSolution::synergy(final_params, problem.boundary().clone())?;
    let report = TrainReport {
        penalty: penalty_report,
        synergy: synergy_report,
        penalty_interior_error,
        penalty_boundary_error,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((solution, report))
}
