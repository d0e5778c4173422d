//! Implementations of the `solve`, `eval`, and `check` subcommands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use collonet_core::geometry::PointCloud;
use collonet_core::optim::{two_phase_train, TrainConfig};
use collonet_core::pde::ProblemSpec;
use collonet_core::problems::{accuracy_report_of, by_id, AccuracySummary, BenchmarkCase, CaseId};
use collonet_core::rbf::{build_interpolation_matrix, cholesky_factorize, CholeskyFactor};
use collonet_core::Error;
use nalgebra::{DMatrix, DVector};

use crate::files::{ProblemFile, RunReport, SolutionFile};
use crate::{CliError, CheckArgs, EvalArgs, SolveArgs};

/// A problem resolved from either a built-in id or a file path.
struct ResolvedProblem {
    name: String,
    spec: ProblemSpec,
    /// Set for built-ins; drives the default network width and the
    /// figure-slice evaluation grid.
    case: Option<BenchmarkCase>,
}

fn resolve_problem(selector: &str) -> Result<ResolvedProblem, CliError> {
    if let Ok(id) = CaseId::from_str(selector) {
        let case = by_id(id);
        return Ok(ResolvedProblem {
            name: format!("{id} ({})", case.name()),
            spec: case.spec().clone(),
            case: Some(case),
        });
    }
    let path = Path::new(selector);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "problem {selector:?} is neither a built-in id (p1..p5) nor an existing file"
        )));
    }
    let spec = ProblemFile::load(path)?.into_problem()?;
    Ok(ResolvedProblem { name: selector.to_string(), spec, case: None })
}

/// Uniform tensor grid over the bounding box of a user problem's points.
fn bounding_box_grid(spec: &ProblemSpec, resolution: usize) -> PointCloud {
    let dim = spec.dimension();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let all = spec.boundary().points().iter().chain(spec.interior().points());
    for p in all {
        for j in 0..dim {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let steps = resolution.max(2) - 1;
    let total = (steps + 1).pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut coords = vec![0.0; dim];
        for axis in (0..dim).rev() {
            let i = rem % (steps + 1);
            rem /= steps + 1;
            coords[axis] = lo[axis] + (hi[axis] - lo[axis]) * i as f64 / steps as f64;
        }
        points.push(DVector::from_vec(coords));
    }
    PointCloud::new(dim, points, None).expect("grid points are finite")
}

fn create_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Usage(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    let file = File::create(path)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create_writer(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::Usage(format!("cannot serialize {}: {e}", path.display())))?;
    out.write_all(b"\n").map_err(Error::from)?;
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let resolved = resolve_problem(&args.problem)?;
    let spec = &resolved.spec;
    let hidden = args.hidden.unwrap_or_else(|| match &resolved.case {
        Some(case) => case.hidden_count(),
        None => {
            if spec.dimension() >= 3 {
                40
            } else {
                20
            }
        }
    });
    let config = TrainConfig {
        eta: args.eta,
        box_lo: -args.box_halfwidth,
        box_hi: args.box_halfwidth,
        max_iters_penalty: args.iters_penalty,
        max_iters_synergy: args.iters_synergy,
        seed: args.seed,
        ..TrainConfig::default()
    };
    config.validate()?;

    let lambda = spec.boundary().lambda();
    let (solution, report) = two_phase_train(spec, hidden, &config).map_err(|e| match e {
        Error::SingularMatrix { pivot } => CliError::Numerical(format!(
            "interpolation matrix singular at pivot {pivot} with lambda = {lambda}; \
             the width factor is too small for the boundary spacing"
        )),
        other => CliError::from(other),
    })?;

    let grid = match &resolved.case {
        Some(case) => case.evaluation_grid(args.grid_res),
        None => bounding_box_grid(spec, args.grid_res),
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    write_json(&args.out.join("solution.json"), &SolutionFile::from_solution(&solution))?;

    let accuracy = write_accuracy_csv(&args.out.join("accuracy.csv"), &solution, spec, &grid)?;

    let max_boundary_mismatch = solution.max_boundary_mismatch()?;
    let run_report = RunReport {
        problem: &resolved.name,
        dimension: spec.dimension(),
        hidden_count: hidden,
        boundary_count: spec.boundary().len(),
        interior_count: spec.interior().len(),
        lambda,
        seed: args.seed,
        eta: args.eta,
        train: &report,
        accuracy,
        max_boundary_mismatch,
    };
    write_json(&args.out.join("report.json"), &run_report)?;

    println!(
        "{}: phase-1 error {:.3e} -> phase-2 error {:.3e}, boundary mismatch {:.3e}, {:.2}s",
        resolved.name,
        report.penalty.final_error,
        report.synergy.final_error,
        max_boundary_mismatch,
        report.wall_time_secs,
    );
    if let Some(acc) = &run_report.accuracy {
        println!(
            "accuracy vs analytic: max {:.3e}, mean {:.3e}, rms {:.3e} over {} grid points",
            acc.max,
            acc.mean,
            acc.rms,
            grid.len()
        );
    }
    Ok(())
}

/// Writes the per-point accuracy table; columns `psi_a` and `abs_err`
/// are NaN when no analytic solution is known.
fn write_accuracy_csv(
    path: &Path,
    solution: &collonet_core::TrialSolution,
    spec: &ProblemSpec,
    grid: &PointCloud,
) -> Result<Option<AccuracySummary>, CliError> {
    let mut out = create_writer(path)?;
    match spec.analytic() {
        Some(analytic) => {
            let model = |p: &DVector<f64>| solution.eval(p).expect("grid matches solution dim");
            let report = accuracy_report_of(&model, analytic, grid);
            report.write_csv(&mut out).map_err(CliError::from)?;
            Ok(Some(report.summary()))
        }
        None => {
            let dim = grid.dim();
            let coords: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
            writeln!(out, "{},psi_m,psi_a,abs_err", coords.join(",")).map_err(Error::from)?;
            for p in grid.points() {
                let value = solution.eval(p)?;
                let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                writeln!(out, "{},{value},NaN,NaN", coords.join(",")).map_err(Error::from)?;
            }
            Ok(None)
        }
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let solution = SolutionFile::load(&args.solution)?.into_solution()?;
    let dim = solution.boundary().dim();

    let file = File::open(&args.points).map_err(|e| {
        CliError::Usage(format!("cannot read points file {}: {e}", args.points.display()))
    })?;
    let text_is_empty = file.metadata().map(|m| m.len() == 0).unwrap_or(false);
    let cloud = if text_is_empty {
        PointCloud::new(dim, Vec::new(), None)?
    } else {
        PointCloud::read_csv(BufReader::new(file))?
    };
    if !cloud.is_empty() && cloud.dim() != dim {
        return Err(CliError::Usage(format!(
            "points are {}-dimensional but the solution expects {dim}",
            cloud.dim()
        )));
    }

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create_writer(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let coords: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},psi_m", coords.join(",")).map_err(Error::from)?;
    for p in cloud.points() {
        let value = solution.eval(p)?;
        let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{},{value}", coords.join(",")).map_err(Error::from)?;
    }
    Ok(())
}

/// Largest/smallest eigenvalue ratio of `A`, estimated with 50 rounds of
/// power iteration and factor-based inverse iteration.
fn condition_estimate(a: &DMatrix<f64>, factor: &CholeskyFactor) -> f64 {
    let n = a.nrows();
    let start = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut v = start.clone();
    let mut largest = 1.0;
    for _ in 0..50 {
        v = a * v;
        largest = v.norm();
        if largest == 0.0 {
            return f64::INFINITY;
        }
        v /= largest;
    }
    let mut w = start;
    let mut inverse_norm = 1.0;
    for _ in 0..50 {
        w = factor.solve(&w).expect("dimensions match");
        inverse_norm = w.norm();
        if !inverse_norm.is_finite() {
            return f64::INFINITY;
        }
        w /= inverse_norm;
    }
    largest * inverse_norm
}

pub fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    let resolved = resolve_problem(&args.problem)?;
    let spec = &resolved.spec;
    let boundary = spec.boundary();
    let cloud = PointCloud::new(boundary.dim(), boundary.points().to_vec(), None)?;
    let (i, j, a) = cloud
        .min_pairwise()
        .ok_or_else(|| CliError::Usage("boundary needs at least two points".into()))?;
    if a <= 1e-9 {
        return Err(CliError::Usage(format!(
            "boundary points {i} and {j} coincide (distance {a:.3e})"
        )));
    }
    let lambda = boundary.lambda();

    println!("problem = {}", resolved.name);
    println!("dimension = {}", spec.dimension());
    println!("M = {}", boundary.len());
    println!("K = {}", spec.interior().len());
    println!("a = {a}");
    println!("lambda = {lambda}");

    let matrix = build_interpolation_matrix(boundary);
    let factor_at_lambda = cholesky_factorize(&matrix);
    match &factor_at_lambda {
        Ok(factor) => {
            println!("cholesky at lambda = ok");
            println!("cond(A) estimate = {:.3e}", condition_estimate(&matrix, factor));
        }
        Err(Error::SingularMatrix { pivot }) => {
            println!("cholesky at lambda = SINGULAR at pivot {pivot}");
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    }

    // Probe neighboring width regimes so a bad heuristic is visible.
    let mut sweep = Vec::new();
    for factor in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let probe_lambda = lambda * factor;
        let status = match probe_width(boundary, probe_lambda) {
            Ok(()) => "ok".to_string(),
            Err(pivot) => format!("singular@{pivot}"),
        };
        sweep.push(format!("{probe_lambda:.4e} -> {status}"));
    }
    println!("lambda sweep: {}", sweep.join(", "));

    if factor_at_lambda.is_err() {
        return Err(CliError::Numerical(format!(
            "interpolation matrix singular at lambda = {lambda}; increase the width factor \
             or thin out near-coincident boundary points"
        )));
    }
    Ok(())
}

/// Rebuilds the interpolation matrix at a probe width; on failure
/// returns the failing pivot index.
fn probe_width(boundary: &collonet_core::BoundarySet, lambda: f64) -> Result<(), usize> {
    let probe =
        collonet_core::BoundarySet::new(boundary.points().to_vec(), boundary.values().clone(), lambda)
            .map_err(|_| 0usize)?;
    match cholesky_factorize(&build_interpolation_matrix(&probe)) {
        Ok(_) => Ok(()),
        Err(Error::SingularMatrix { pivot }) => Err(pivot),
        Err(_) => Err(0),
    }
}
