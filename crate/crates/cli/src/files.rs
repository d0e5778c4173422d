//! On-disk formats: problem files, solution files, and run reports.

use std::path::Path;

use collonet_core::geometry::{select_lambda, PointCloud, PointTag};
use collonet_core::mlp::MlpParams;
use collonet_core::optim::TrainReport;
use collonet_core::pde::{
    CollocationGrid, DifferentialOperator, ProblemSpec, SolutionMode, TrialSolution,
};
use collonet_core::problems::AccuracySummary;
use collonet_core::rbf::BoundarySet;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::expr::{self, Term};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// User-defined problem description (JSON, `"schema": 1`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema: u32,
    pub dimension: usize,
    #[serde(default = "default_operator")]
    pub operator: String,
    /// Right-hand side `f` as a term table.
    pub source: Vec<Term>,
    /// Known analytic solution, when available.
    #[serde(default)]
    pub analytic_solution: Option<Vec<Term>>,
    pub boundary_points: Vec<Vec<f64>>,
    /// Dirichlet values; defaults to the analytic solution at the
    /// boundary points.
    #[serde(default)]
    pub boundary_values: Option<Vec<f64>>,
    pub interior_points: Vec<Vec<f64>>,
    /// RBF width factor; defaults to the `1/a²` heuristic.
    #[serde(default)]
    pub lambda: Option<f64>,
}

fn default_operator() -> String {
    "laplacian".into()
}


fn to_points(raw: &[Vec<f64>], dimension: usize, what: &str) -> Result<Vec<DVector<f64>>, CliError> {
    raw.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != dimension {
                return Err(CliError::Usage(format!(
                    "{what} point {i} has {} coordinates, expected {dimension}",
                    row.len()
                )));
            }
            Ok(DVector::from_row_slice(row))
        })
        .collect()
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read problem file {}: {e}", path.display()))
        })?;
        let file: ProblemFile = serde_json::from_str(&text).map_err(|e| {
            CliError::Usage(format!("cannot parse problem file {}: {e}", path.display()))
        })?;
        if file.schema != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema {} in {} (expected {SCHEMA_VERSION})",
                file.schema,
                path.display()
            )));
        }
        Ok(file)
    }

    pub fn into_problem(self) -> Result<ProblemSpec, CliError> {
        if self.operator != "laplacian" {
            return Err(CliError::Usage(format!(
                "unsupported operator {:?} (only \"laplacian\")",
                self.operator
            )));
        }
        let dimension = self.dimension;
        if dimension == 0 || dimension > 3 {
            return Err(CliError::Usage(format!("dimension must be 1..3, got {dimension}")));
        }
        expr::validate(&self.source, dimension).map_err(|e| CliError::Usage(format!("source: {e}")))?;
        if let Some(terms) = &self.analytic_solution {
            expr::validate(terms, dimension)
                .map_err(|e| CliError::Usage(format!("analytic_solution: {e}")))?;
        }

        let boundary_points = to_points(&self.boundary_points, dimension, "boundary")?;
        let interior_points = to_points(&self.interior_points, dimension, "interior")?;
        let source = expr::to_field(self.source);
        let analytic = self.analytic_solution.map(expr::to_field);

        let values = match (self.boundary_values, &analytic) {
            (Some(values), _) => {
                if values.len() != boundary_points.len() {
                    return Err(CliError::Usage(format!(
                        "{} boundary values for {} boundary points",
                        values.len(),
                        boundary_points.len()
                    )));
                }
                DVector::from_vec(values)
            }
            (None, Some(psi)) => {
                DVector::from_fn(boundary_points.len(), |i, _| psi(boundary_points[i].as_slice()))
            }
            (None, None) => {
                return Err(CliError::Usage(
                    "problem file needs boundary_values or an analytic_solution".into(),
                ))
            }
        };

        let cloud = PointCloud::new(dimension, boundary_points, Some(PointTag::Boundary))?;
        let lambda = match self.lambda {
            Some(l) => l,
            None => select_lambda(&cloud)?,
        };
        let boundary = BoundarySet::from_cloud(&cloud, values, lambda)?;
        let interior = CollocationGrid::new(interior_points, &source)?;
        Ok(ProblemSpec::new(
            DifferentialOperator::Laplacian,
            source,
            boundary,
            interior,
            analytic,
        )?)
    }
}

/// Serialized trained solution (JSON, full round-trip precision).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema: u32,
    pub dimension: usize,
    pub hidden_count: usize,
    pub mode: String,
    pub lambda: f64,
    /// Flattened parameters: output weights, input weights row-major,
    /// biases.
    pub params: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub boundary_points: Vec<Vec<f64>>,
    pub boundary_values: Vec<f64>,
}

impl SolutionFile {
    pub fn from_solution(solution: &TrialSolution) -> SolutionFile {
        let boundary = solution.boundary();
        SolutionFile {
            schema: SCHEMA_VERSION,
            dimension: boundary.dim(),
            hidden_count: solution.params().hidden_count(),
            mode: match solution.mode() {
                SolutionMode::Penalty => "penalty".into(),
                SolutionMode::Synergy => "synergy".into(),
            },
            lambda: boundary.lambda(),
            params: solution.params().to_vector().iter().copied().collect(),
            coefficients: solution.coefficients().iter().copied().collect(),
            boundary_points: boundary.points().iter().map(|p| p.iter().copied().collect()).collect(),
            boundary_values: boundary.values().iter().copied().collect(),
        }
    }

    pub fn load(path: &Path) -> Result<SolutionFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read solution file {}: {e}", path.display()))
        })?;
        let file: SolutionFile = serde_json::from_str(&text).map_err(|e| {
            CliError::Usage(format!("cannot parse solution file {}: {e}", path.display()))
        })?;
        if file.schema != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema {} in {} (expected {SCHEMA_VERSION})",
                file.schema,
                path.display()
            )));
        }
        Ok(file)
    }

    pub fn into_solution(self) -> Result<TrialSolution, CliError> {
        let mode = match self.mode.as_str() {
            "penalty" => SolutionMode::Penalty,
            "synergy" => SolutionMode::Synergy,
            other => return Err(CliError::Usage(format!("unknown solution mode {other:?}"))),
        };
        let expected = self.hidden_count * (self.dimension + 2);
        if self.params.len() != expected {
            return Err(CliError::Usage(format!(
                "solution has {} parameters, expected {expected} for {} hidden units in {} dimensions",
                self.params.len(),
                self.hidden_count,
                self.dimension
            )));
        }
        let params = MlpParams::from_vector(
            self.hidden_count,
            self.dimension,
            &DVector::from_vec(self.params),
        )?;
        let points = to_points(&self.boundary_points, self.dimension, "boundary")?;
        let boundary =
            BoundarySet::new(points, DVector::from_vec(self.boundary_values), self.lambda)?;
        Ok(TrialSolution::from_parts(
            params,
            boundary,
            DVector::from_vec(self.coefficients),
            mode,
        )?)
    }
}

/// Everything `solve` records about a run (written as report.json).
#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub problem: &'a str,
    pub dimension: usize,
    pub hidden_count: usize,
    pub boundary_count: usize,
    pub interior_count: usize,
    pub lambda: f64,
    pub seed: u64,
    pub eta: f64,
    pub train: &'a TrainReport,
    /// Present when the problem has an analytic solution.
    pub accuracy: Option<AccuracySummary>,
    pub max_boundary_mismatch: f64,
}
