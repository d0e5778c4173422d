//! Trial solutions, collocation residuals, and the two error functionals.
//!
//! A trial solution is the perceptron plus the Gaussian boundary layer.
//! In *penalty* mode the layer is switched off (`q = 0`) and boundary
//! mismatch is charged to the objective through a quadratic penalty. In
//! *synergy* mode the layer coefficients are re-solved from `A q = c`
//! with `c_i = b_i - N(R_i)` before every evaluation, so the model
//! matches the boundary values exactly at the boundary points and the
//! objective reduces to the interior residual sum alone.
//!
//! Both objectives come with exact analytic gradients; the synergy
//! gradient includes the chain term through `∂q/∂p`, one triangular
//! solve pair per parameter against the single Cholesky factorization.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mlp::MlpParams;
use crate::rbf::{
    coefficient_param_jacobian, factorize_boundary, rbf_eval, rbf_laplacian, BoundarySet,
    CholeskyFactor,
};

/// A scalar function of a point, shareable across threads.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Differential operator on the left-hand side of the problem.
///
/// Only the Laplacian is implemented; the enum keeps the dispatch point
/// explicit so further operators slot into the residual assembly without
/// touching the objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferentialOperator {
    Laplacian,
}

/// Interior collocation points with their cached source values.
#[derive(Debug, Clone)]
pub struct CollocationGrid {
    points: Vec<DVector<f64>>,
    source_values: DVector<f64>,
}

impl CollocationGrid {
    /// Caches `f(r_i)` for every interior point.
    pub fn new(points: Vec<DVector<f64>>, source: &ScalarField) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("collocation grid needs at least one point".into()));
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: p.len() });
            }
        }
        let source_values = DVector::from_fn(points.len(), |i, _| source(points[i].as_slice()));
        Ok(Self { points, source_values })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn source_values(&self) -> &DVector<f64> {
        &self.source_values
    }
}

/// A complete Dirichlet problem: operator, source, boundary data,
/// collocation grid, and (when known) the analytic solution.
#[derive(Clone)]
pub struct ProblemSpec {
    dimension: usize,
    operator: DifferentialOperator,
    source: ScalarField,
    boundary: BoundarySet,
    interior: CollocationGrid,
    analytic: Option<ScalarField>,
}

impl ProblemSpec {
    pub fn new(
        operator: DifferentialOperator,
        source: ScalarField,
        boundary: BoundarySet,
        interior: CollocationGrid,
        analytic: Option<ScalarField>,
    ) -> Result<Self> {
        let dimension = boundary.dim();
        if interior.dim() != dimension {
            return Err(Error::DimensionMismatch { expected: dimension, actual: interior.dim() });
        }
        Ok(Self { dimension, operator, source, boundary, interior, analytic })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn operator(&self) -> DifferentialOperator {
        self.operator
    }

    pub fn source(&self) -> &ScalarField {
        &self.source
    }

    pub fn boundary(&self) -> &BoundarySet {
        &self.boundary
    }

    pub fn interior(&self) -> &CollocationGrid {
        &self.interior
    }

    pub fn analytic(&self) -> Option<&ScalarField> {
        self.analytic.as_ref()
    }
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dimension", &self.dimension)
            .field("operator", &self.operator)
            .field("boundary_points", &self.boundary.len())
            .field("interior_points", &self.interior.len())
            .field("has_analytic", &self.analytic.is_some())
            .finish()
    }
}

/// How the boundary layer of a [`TrialSolution`] is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionMode {
    /// Layer off (`q = 0`); the model is the bare perceptron.
    Penalty,
    /// Layer coefficients solved from `A q = c`; boundary values hold
    /// exactly at the boundary points.
    Synergy,
}

/// Perceptron parameters plus the boundary layer bound to its
/// [`BoundarySet`]. Immutable; coefficient refreshes return a new value.
#[derive(Debug, Clone)]
pub struct TrialSolution {
    params: MlpParams,
    boundary: BoundarySet,
    coefficients: DVector<f64>,
    mode: SolutionMode,
    factor: Option<CholeskyFactor>,
}

impl TrialSolution {
    /// Penalty-mode solution: the boundary layer is identically zero.
    pub fn penalty(params: MlpParams, boundary: BoundarySet) -> Result<Self> {
        Self::check_dims(&params, &boundary)?;
        let m = boundary.len();
        Ok(Self {
            params,
            boundary,
            coefficients: DVector::zeros(m),
            mode: SolutionMode::Penalty,
            factor: None,
        })
    }

    /// Synergy-mode solution with freshly solved coefficients.
    pub fn synergy(params: MlpParams, boundary: BoundarySet) -> Result<Self> {
        Self::check_dims(&params, &boundary)?;
        let factor = factorize_boundary(&boundary)?;
        let shell = Self {
            params,
            boundary,
            coefficients: DVector::zeros(0),
            mode: SolutionMode::Synergy,
            factor: Some(factor),
        };
        shell.refresh_coefficients()
    }

    /// Rebuilds a solution from stored parts (deserialization); the
    /// coefficients are taken as-is, no refresh happens.
    pub fn from_parts(
        params: MlpParams,
        boundary: BoundarySet,
        coefficients: DVector<f64>,
        mode: SolutionMode,
    ) -> Result<Self> {
        Self::check_dims(&params, &boundary)?;
        if coefficients.len() != boundary.len() {
            return Err(Error::DimensionMismatch {
                expected: boundary.len(),
                actual: coefficients.len(),
            });
        }
        if mode == SolutionMode::Penalty && coefficients.amax() != 0.0 {
            return Err(Error::InvalidArgument(
                "penalty-mode solutions carry zero layer coefficients".into(),
            ));
        }
        Ok(Self { params, boundary, coefficients, mode, factor: None })
    }

    fn check_dims(params: &MlpParams, boundary: &BoundarySet) -> Result<()> {
        if params.input_dim() != boundary.dim() {
            return Err(Error::DimensionMismatch {
                expected: boundary.dim(),
                actual: params.input_dim(),
            });
        }
        Ok(())
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub fn boundary(&self) -> &BoundarySet {
        &self.boundary
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn mode(&self) -> SolutionMode {
        self.mode
    }

    /// Model value `Ψ(x)`: perceptron plus (in synergy mode) the layer.
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        match self.mode {
            SolutionMode::Penalty => self.params.eval(x),
            SolutionMode::Synergy => {
                Ok(self.params.eval(x)? + rbf_eval(&self.coefficients, &self.boundary, x)?)
            }
        }
    }

    /// Laplacian of the model at `x`.
    pub fn laplacian(&self, x: &DVector<f64>) -> Result<f64> {
        match self.mode {
            SolutionMode::Penalty => self.params.laplacian(x),
            SolutionMode::Synergy => Ok(self.params.laplacian(x)?
                + rbf_laplacian(&self.coefficients, &self.boundary, x)?),
        }
    }

    /// Collocation residual `L Ψ(r) - f(r)` for the problem's operator.
    pub fn residual(&self, problem: &ProblemSpec, r: &DVector<f64>) -> Result<f64> {
        if r.len() != problem.dimension() {
            return Err(Error::DimensionMismatch {
                expected: problem.dimension(),
                actual: r.len(),
            });
        }
        let lhs = match problem.operator() {
            DifferentialOperator::Laplacian => self.laplacian(r)?,
        };
        Ok(lhs - (problem.source())(r.as_slice()))
    }

    /// Re-solves `A q = c` with `c_i = b_i - N(R_i)` for the current
    /// parameters. Requires synergy mode.
    pub fn refresh_coefficients(&self) -> Result<TrialSolution> {
        if self.mode != SolutionMode::Synergy {
            return Err(Error::InvalidArgument(
                "coefficient refresh requires a synergy-mode solution".into(),
            ));
        }
        let factor = match &self.factor {
            Some(f) => f.clone(),
            None => factorize_boundary(&self.boundary)?,
        };
        let m = self.boundary.len();
        let mut rhs = DVector::zeros(m);
        for i in 0..m {
            rhs[i] = self.boundary.values()[i] - self.params.eval_unchecked(&self.boundary.points()[i]);
        }
        let coefficients = factor.solve(&rhs)?;
        Ok(TrialSolution {
            params: self.params.clone(),
            boundary: self.boundary.clone(),
            coefficients,
            mode: SolutionMode::Synergy,
            factor: Some(factor),
        })
    }

    /// Largest boundary mismatch `max_i |Ψ(R_i) - b_i|`.
    pub fn max_boundary_mismatch(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, point) in self.boundary.points().iter().enumerate() {
            let err = (self.eval(point)? - self.boundary.values()[i]).abs();
            worst = worst.max(err);
        }
        Ok(worst)
    }
}

/// Penalty-formulation objective
/// `E(p) = Σ_i (L N(r_i) - f(r_i))² + η Σ_i (N(R_i) - b_i)²`.
pub struct PenaltyObjective<'a> {
    problem: &'a ProblemSpec,
    eta: f64,
}

impl<'a> PenaltyObjective<'a> {
    pub fn new(problem: &'a ProblemSpec, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "penalty factor must be positive and finite, got {eta}"
            )));
        }
        Ok(Self { problem, eta })
    }

    fn check_params(&self, params: &MlpParams) -> Result<()> {
        if params.input_dim() != self.problem.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.problem.dimension(),
                actual: params.input_dim(),
            });
        }
        Ok(())
    }

    /// Interior and boundary contributions, before the η weighting of
    /// the boundary term.
    pub fn value_parts(&self, params: &MlpParams) -> Result<(f64, f64)> {
        self.check_params(params)?;
        let interior = self.problem.interior();
        let mut interior_term = 0.0;
        for (i, r) in interior.points().iter().enumerate() {
            let res = params.laplacian(r)? - interior.source_values()[i];
            interior_term += res * res;
        }
        let boundary = self.problem.boundary();
        let mut boundary_term = 0.0;
        for (i, r) in boundary.points().iter().enumerate() {
            let res = params.eval(r)? - boundary.values()[i];
            boundary_term += res * res;
        }
        Ok((interior_term, boundary_term))
    }

    pub fn value(&self, params: &MlpParams) -> Result<f64> {
        let (interior, boundary) = self.value_parts(params)?;
        Ok(interior + self.eta * boundary)
    }

    /// Objective value and its exact gradient over the flattened
    /// parameters, accumulated in point-index order.
    pub fn value_and_gradient(&self, params: &MlpParams) -> Result<(f64, DVector<f64>)> {
        self.check_params(params)?;
        let mut value = 0.0;
        let mut grad = DVector::zeros(params.param_count());
        let interior = self.problem.interior();
        for (i, r) in interior.points().iter().enumerate() {
            let (lap, dlap) = params.laplacian_and_param_gradient(r);
            let res = lap - interior.source_values()[i];
            value += res * res;
            grad.axpy(2.0 * res, &dlap, 1.0);
        }
        let boundary = self.problem.boundary();
        for (i, r) in boundary.points().iter().enumerate() {
            let (val, dval) = params.eval_and_param_gradient(r);
            let res = val - boundary.values()[i];
            value += self.eta * res * res;
            grad.axpy(2.0 * self.eta * res, &dval, 1.0);
        }
        Ok((value, grad))
    }
}

/// Exactly-constrained objective `E(p) = Σ_i (L Ψ(r_i) - f(r_i))²` with
/// the layer coefficients re-solved for every parameter vector.
///
/// Construction factorizes the interpolation matrix once and caches the
/// Laplacian of every boundary Gaussian at every interior point; both
/// are parameter-independent.
pub struct SynergyObjective<'a> {
    problem: &'a ProblemSpec,
    factor: CholeskyFactor,
    /// `∇²g_l(r_i)` stored as column `i` of an M×K matrix.
    gaussian_laplacians: DMatrix<f64>,
}

impl<'a> SynergyObjective<'a> {
    pub fn new(problem: &'a ProblemSpec) -> Result<Self> {
        let factor = factorize_boundary(problem.boundary())?;
        let boundary = problem.boundary();
        let interior = problem.interior();
        let mut gaussian_laplacians = DMatrix::zeros(boundary.len(), interior.len());
        for (i, r) in interior.points().iter().enumerate() {
            gaussian_laplacians.set_column(i, &boundary.gaussian_laplacians(r)?);
        }
        Ok(Self { problem, factor, gaussian_laplacians })
    }

    fn check_params(&self, params: &MlpParams) -> Result<()> {
        if params.input_dim() != self.problem.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.problem.dimension(),
                actual: params.input_dim(),
            });
        }
        Ok(())
    }

    /// Solves the layer coefficients for the given parameters.
    pub fn solve_coefficients(&self, params: &MlpParams) -> Result<DVector<f64>> {
        self.check_params(params)?;
        let boundary = self.problem.boundary();
        let m = boundary.len();
        let mut rhs = DVector::zeros(m);
        for i in 0..m {
            rhs[i] = boundary.values()[i] - params.eval_unchecked(&boundary.points()[i]);
        }
        self.factor.solve(&rhs)
    }

    pub fn value(&self, params: &MlpParams) -> Result<f64> {
        let q = self.solve_coefficients(params)?;
        let interior = self.problem.interior();
        let mut value = 0.0;
        for (i, r) in interior.points().iter().enumerate() {
            let res = params.laplacian(r)? + self.gaussian_laplacians.column(i).dot(&q)
                - interior.source_values()[i];
            value += res * res;
        }
        Ok(value)
    }

    /// Objective value and exact gradient, including the chain term
    /// through `∂q/∂p`.
    pub fn value_and_gradient(&self, params: &MlpParams) -> Result<(f64, DVector<f64>)> {
        self.check_params(params)?;
        let boundary = self.problem.boundary();
        let interior = self.problem.interior();
        let m = boundary.len();
        let p_len = params.param_count();

        // Boundary pass: right-hand side c and value gradients G.
        let mut rhs = DVector::zeros(m);
        let mut boundary_grads = DMatrix::zeros(m, p_len);
        for (i, r) in boundary.points().iter().enumerate() {
            let (val, dval) = params.eval_and_param_gradient(r);
            rhs[i] = boundary.values()[i] - val;
            for k in 0..p_len {
                boundary_grads[(i, k)] = dval[k];
            }
        }
        let q = self.factor.solve(&rhs)?;
        let jacobian = coefficient_param_jacobian(&self.factor, &boundary_grads)?;

        // Interior pass: residuals, direct gradient term, and the
        // residual-weighted Gaussian Laplacians feeding the chain term.
        let mut value = 0.0;
        let mut grad = DVector::zeros(p_len);
        let mut weighted = DVector::zeros(m);
        for (i, r) in interior.points().iter().enumerate() {
            let (lap, dlap) = params.laplacian_and_param_gradient(r);
            let column = self.gaussian_laplacians.column(i);
            let res = lap + column.dot(&q) - interior.source_values()[i];
            value += res * res;
            grad.axpy(2.0 * res, &dlap, 1.0);
            weighted.axpy(2.0 * res, &column, 1.0);
        }
        grad += jacobian.tr_mul(&weighted);
        Ok((value, grad))
    }
}

/// One-shot penalty error and gradient (Eq.-style convenience around
/// [`PenaltyObjective`]).
pub fn penalty_error(
    params: &MlpParams,
    problem: &ProblemSpec,
    eta: f64,
) -> Result<(f64, DVector<f64>)> {
    PenaltyObjective::new(problem, eta)?.value_and_gradient(params)
}

/// One-shot synergy error and gradient; factorizes the boundary system
/// internally. Training loops should hold a [`SynergyObjective`]
/// instead and reuse its factorization.
pub fn synergy_error(params: &MlpParams, problem: &ProblemSpec) -> Result<(f64, DVector<f64>)> {
    SynergyObjective::new(problem)?.value_and_gradient(params)
}
