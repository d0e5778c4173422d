//! Built-in benchmark problems with analytic solutions.
//!
//! All five are Poisson problems manufactured from a known solution, so
//! the source term is the exact Laplacian of the analytic solution and
//! the boundary values are its restriction to the boundary points.
//!
//! The 2-D cases share `Ψ(x,y) = e^{-x}(x + y³)` on three domains: the
//! unit square, the quarter disk, and the unit disk. The 3-D cases share
//! `Ψ(x,y,z) = eˣ y² + (z² - 2) sin y` on the unit cube and on a
//! spherical sector.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    box_boundary_3d, circle_boundary, interior_grid_rectangle, polar_to_cartesian,
    rect_lattice_boundary, rectangle_boundary, select_lambda, spherical_sector_boundary,
    spherical_to_cartesian, PointCloud, PointTag, EXACT_DUP_TOL,
};
use crate::pde::{CollocationGrid, DifferentialOperator, ProblemSpec, ScalarField, TrialSolution};
use crate::rbf::BoundarySet;

/// Identifier of a built-in benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    P1,
    P2,
    P3,
    P4,
    P5,
}

impl CaseId {
    pub fn all() -> [CaseId; 5] {
        [CaseId::P1, CaseId::P2, CaseId::P3, CaseId::P4, CaseId::P5]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::P1 => "p1",
            CaseId::P2 => "p2",
            CaseId::P3 => "p3",
            CaseId::P4 => "p4",
            CaseId::P5 => "p5",
        }
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p1" => Ok(CaseId::P1),
            "p2" => Ok(CaseId::P2),
            "p3" => Ok(CaseId::P3),
            "p4" => Ok(CaseId::P4),
            "p5" => Ok(CaseId::P5),
            other => Err(Error::InvalidArgument(format!(
                "unknown benchmark id {other:?} (expected p1..p5)"
            ))),
        }
    }
}

/// Mapping from generation parameters to Cartesian coordinates.
#[derive(Debug, Clone, Copy)]
enum CoordinateMap {
    Identity,
    Polar,
    Spherical,
}

impl CoordinateMap {
    fn apply(self, p: &[f64]) -> DVector<f64> {
        match self {
            CoordinateMap::Identity => DVector::from_row_slice(p),
            CoordinateMap::Polar => {
                let [x, y] = polar_to_cartesian(p[0], p[1]);
                DVector::from_vec(vec![x, y])
            }
            CoordinateMap::Spherical => {
                let [x, y, z] = spherical_to_cartesian(p[0], p[1], p[2]);
                DVector::from_vec(vec![x, y, z])
            }
        }
    }
}

/// Parameter box plus coordinate map covering a case's domain.
#[derive(Debug, Clone)]
struct DomainChart {
    param_box: Vec<(f64, f64)>,
    map: CoordinateMap,
}

/// One benchmark: the problem plus its reference training configuration.
#[derive(Clone)]
pub struct BenchmarkCase {
    id: CaseId,
    name: &'static str,
    spec: ProblemSpec,
    hidden_count: usize,
    expected_boundary_count: usize,
    expected_interior_count: usize,
    chart: DomainChart,
}

impl BenchmarkCase {
    pub fn id(&self) -> CaseId {
        self.id
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// Reference network width: 20 in 2-D, 40 in 3-D.
    pub fn hidden_count(&self) -> usize {
        self.hidden_count
    }

    pub fn expected_boundary_count(&self) -> usize {
        self.expected_boundary_count
    }

    pub fn expected_interior_count(&self) -> usize {
        self.expected_interior_count
    }

    /// Uniform random points covering the domain, drawn in parameter
    /// space and mapped to Cartesian coordinates.
    pub fn sample_domain(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let p: Vec<f64> = self
                    .chart
                    .param_box
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..=hi))
                    .collect();
                self.chart.map.apply(&p)
            })
            .collect()
    }

    /// The accuracy-map grid: `resolution²` points over the case's figure
    /// rectangle. 2-D cases cover the whole domain; the 3-D cases use a
    /// fixed-coordinate slice (x = 0.5 for the cube, r = 0.75 for the
    /// sector).
    pub fn evaluation_grid(&self, resolution: usize) -> PointCloud {
        let (rect, to_cartesian): ([(f64, f64); 2], Box<dyn Fn(f64, f64) -> DVector<f64>>) =
            match self.id {
                CaseId::P1 => (
                    [(0.0, 1.0), (0.0, 1.0)],
                    Box::new(|a, b| DVector::from_vec(vec![a, b])),
                ),
                CaseId::P2 => (
                    [(0.0, 1.0), (0.0, PI / 2.0)],
                    Box::new(|r, phi| {
                        let [x, y] = polar_to_cartesian(r, phi);
                        DVector::from_vec(vec![x, y])
                    }),
                ),
                CaseId::P3 => (
                    [(0.0, 1.0), (0.0, 2.0 * PI)],
                    Box::new(|r, phi| {
                        let [x, y] = polar_to_cartesian(r, phi);
                        DVector::from_vec(vec![x, y])
                    }),
                ),
                CaseId::P4 => (
                    [(0.0, 1.0), (0.0, 1.0)],
                    Box::new(|y, z| DVector::from_vec(vec![0.5, y, z])),
                ),
                CaseId::P5 => (
                    [(0.0, PI / 2.0), (0.0, PI / 2.0)],
                    Box::new(|phi, theta| {
                        let [x, y, z] = spherical_to_cartesian(0.75, phi, theta);
                        DVector::from_vec(vec![x, y, z])
                    }),
                ),
            };
        let steps = resolution.max(2) - 1;
        let mut points = Vec::with_capacity(resolution * resolution);
        for i in 0..=steps {
            let a = rect[0].0 + (rect[0].1 - rect[0].0) * i as f64 / steps as f64;
            for j in 0..=steps {
                let b = rect[1].0 + (rect[1].1 - rect[1].0) * j as f64 / steps as f64;
                points.push(to_cartesian(a, b));
            }
        }
        PointCloud::new(self.spec.dimension(), points, None)
            .expect("generated grid points are well-formed")
    }
}

fn psi_2d(x: &[f64]) -> f64 {
    (-x[0]).exp() * (x[0] + x[1].powi(3))
}

fn source_2d(x: &[f64]) -> f64 {
    (-x[0]).exp() * (x[0] - 2.0 + x[1].powi(3) + 6.0 * x[1])
}

fn psi_3d(x: &[f64]) -> f64 {
    x[0].exp() * x[1] * x[1] + (x[2] * x[2] - 2.0) * x[1].sin()
}

/// Exact Laplacian of [`psi_3d`]; the problems are manufactured, so the
/// source is derived from the solution rather than stated independently.
fn source_3d(x: &[f64]) -> f64 {
    x[0].exp() * x[1] * x[1] + 2.0 * x[0].exp() + (4.0 - x[2] * x[2]) * x[1].sin()
}

fn assemble(
    id: CaseId,
    name: &'static str,
    hidden_count: usize,
    source: ScalarField,
    analytic: ScalarField,
    boundary_cloud: PointCloud,
    interior_points: Vec<DVector<f64>>,
    chart: DomainChart,
    expected_boundary_count: usize,
    expected_interior_count: usize,
) -> BenchmarkCase {
    let lambda = select_lambda(&boundary_cloud).expect("boundary clouds are non-degenerate");
    let values = DVector::from_fn(boundary_cloud.len(), |i, _| {
        analytic(boundary_cloud.points()[i].as_slice())
    });
    let boundary = BoundarySet::from_cloud(&boundary_cloud, values, lambda)
        .expect("boundary clouds pass the distinctness checks");
    let interior =
        CollocationGrid::new(interior_points, &source).expect("interior grids are non-empty");
    let spec = ProblemSpec::new(
        DifferentialOperator::Laplacian,
        source,
        boundary,
        interior,
        Some(analytic),
    )
    .expect("case dimensions are consistent");
    BenchmarkCase {
        id,
        name,
        spec,
        hidden_count,
        expected_boundary_count,
        expected_interior_count,
        chart,
    }
}

fn case_p1() -> BenchmarkCase {
    let boundary = rectangle_boundary(10, 10).expect("valid lattice size");
    let interior = interior_grid_rectangle(10, &[(0.0, 1.0), (0.0, 1.0)])
        .expect("valid grid size")
        .into_points();
    assemble(
        CaseId::P1,
        "unit square",
        20,
        Arc::new(source_2d),
        Arc::new(psi_2d),
        boundary,
        interior,
        DomainChart { param_box: vec![(0.0, 1.0), (0.0, 1.0)], map: CoordinateMap::Identity },
        36,
        81,
    )
}

fn case_p2() -> BenchmarkCase {
    // Lattice over the (r, φ) rectangle; the whole r = 0 side collapses
    // onto the origin under the polar map.
    let param_lattice = rect_lattice_boundary(10, 20, [(0.0, 1.0), (0.0, PI / 2.0)])
        .expect("valid lattice size");
    let mapped: Vec<DVector<f64>> = param_lattice
        .points()
        .iter()
        .map(|p| {
            let [x, y] = polar_to_cartesian(p[0], p[1]);
            DVector::from_vec(vec![x, y])
        })
        .collect();
    let boundary = PointCloud::new(2, mapped, Some(PointTag::Boundary))
        .expect("mapped points are finite")
        .deduplicate(EXACT_DUP_TOL);
    let interior = interior_grid_rectangle(10, &[(0.0, 1.0), (0.0, PI / 2.0)])
        .expect("valid grid size")
        .into_points()
        .into_iter()
        .map(|p| {
            let [x, y] = polar_to_cartesian(p[0], p[1]);
            DVector::from_vec(vec![x, y])
        })
        .collect();
    assemble(
        CaseId::P2,
        "quarter disk",
        20,
        Arc::new(source_2d),
        Arc::new(psi_2d),
        boundary,
        interior,
        DomainChart { param_box: vec![(0.0, 1.0), (0.0, PI / 2.0)], map: CoordinateMap::Polar },
        37,
        81,
    )
}

fn case_p3() -> BenchmarkCase {
    let boundary = circle_boundary(20, 1.0).expect("valid circle size");
    // 9 radii x 17 angles = 153 interior points.
    let mut interior = Vec::with_capacity(153);
    for j in 1..=9 {
        let r = j as f64 / 10.0;
        for k in 0..17 {
            let [x, y] = polar_to_cartesian(r, 2.0 * PI * k as f64 / 17.0);
            interior.push(DVector::from_vec(vec![x, y]));
        }
    }
    assemble(
        CaseId::P3,
        "unit disk",
        20,
        Arc::new(source_2d),
        Arc::new(psi_2d),
        boundary,
        interior,
        DomainChart { param_box: vec![(0.0, 1.0), (0.0, 2.0 * PI)], map: CoordinateMap::Polar },
        20,
        153,
    )
}

fn case_p4() -> BenchmarkCase {
    let boundary = box_boundary_3d(7).expect("valid lattice size");
    let interior = interior_grid_rectangle(10, &[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)])
        .expect("valid grid size")
        .into_points();
    assemble(
        CaseId::P4,
        "unit cube",
        40,
        Arc::new(source_3d),
        Arc::new(psi_3d),
        boundary,
        interior,
        DomainChart {
            param_box: vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
            map: CoordinateMap::Identity,
        },
        216,
        729,
    )
}

fn case_p5() -> BenchmarkCase {
    let boundary = spherical_sector_boundary(7).expect("valid lattice size");
    let interior = interior_grid_rectangle(10, &[(0.5, 1.0), (0.0, PI / 2.0), (0.0, PI / 2.0)])
        .expect("valid grid size")
        .into_points()
        .into_iter()
        .map(|p| {
            let [x, y, z] = spherical_to_cartesian(p[0], p[1], p[2]);
            DVector::from_vec(vec![x, y, z])
        })
        .collect();
    assemble(
        CaseId::P5,
        "spherical sector",
        40,
        Arc::new(source_3d),
        Arc::new(psi_3d),
        boundary,
        interior,
        DomainChart {
            param_box: vec![(0.5, 1.0), (0.0, PI / 2.0), (0.0, PI / 2.0)],
            map: CoordinateMap::Spherical,
        },
        175,
        729,
    )
}

/// Builds one benchmark case.
pub fn by_id(id: CaseId) -> BenchmarkCase {
    match id {
        CaseId::P1 => case_p1(),
        CaseId::P2 => case_p2(),
        CaseId::P3 => case_p3(),
        CaseId::P4 => case_p4(),
        CaseId::P5 => case_p5(),
    }
}

/// All five benchmark cases.
pub fn catalog() -> Vec<BenchmarkCase> {
    CaseId::all().into_iter().map(by_id).collect()
}

/// Fourth-order central-difference Laplacian, accurate enough to expose
/// any transcription slip between a source term and its analytic
/// solution.
fn fd_laplacian(f: &ScalarField, x: &DVector<f64>, h: f64) -> f64 {
    let mut acc = 0.0;
    let center = f(x.as_slice());
    for axis in 0..x.len() {
        let probe = |offset: f64| {
            let mut p = x.clone();
            p[axis] += offset;
            f(p.as_slice())
        };
        acc += (-probe(2.0 * h) + 16.0 * probe(h) - 30.0 * center + 16.0 * probe(-h)
            - probe(-2.0 * h))
            / (12.0 * h * h);
    }
    acc
}

/// Max over `samples` of `|∇²Ψ_a(x) - f(x)|` with the Laplacian taken by
/// finite differences. The oracle lives entirely outside the model code
/// paths.
pub fn manufactured_residual(
    analytic: &ScalarField,
    source: &ScalarField,
    samples: &[DVector<f64>],
) -> f64 {
    let deviations: Vec<f64> = samples
        .par_iter()
        .map(|x| (fd_laplacian(analytic, x, 1e-2) - source(x.as_slice())).abs())
        .collect();
    deviations.into_iter().fold(0.0, f64::max)
}

/// Checks that a case's source really is the Laplacian of its analytic
/// solution, over 200 random domain points.
pub fn verify_manufactured(case: &BenchmarkCase) -> Result<f64> {
    let analytic = case
        .spec()
        .analytic()
        .ok_or_else(|| Error::InvalidArgument("case has no analytic solution".into()))?;
    let samples = case.sample_domain(200, 0xC0FFEE);
    Ok(manufactured_residual(analytic, case.spec().source(), &samples))
}

/// One evaluation-grid row of an accuracy report.
#[derive(Debug, Clone)]
pub struct AccuracyRow {
    pub point: DVector<f64>,
    pub model: f64,
    pub analytic: f64,
    pub abs_err: f64,
}

/// Aggregate statistics of an accuracy report.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct AccuracySummary {
    pub max: f64,
    pub mean: f64,
    pub rms: f64,
}

/// Pointwise `|Ψ_model - Ψ_a|` over a grid, with max / mean / RMS.
#[derive(Debug, Clone)]
pub struct AccuracyReport {
    pub rows: Vec<AccuracyRow>,
    pub max: f64,
    pub mean: f64,
    pub rms: f64,
}

impl AccuracyReport {
    pub fn summary(&self) -> AccuracySummary {
        AccuracySummary { max: self.max, mean: self.mean, rms: self.rms }
    }

    /// CSV with header `x1,..,xn,psi_m,psi_a,abs_err`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.rows.first().map_or(0, |r| r.point.len());
        let coords: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        writeln!(out, "{},psi_m,psi_a,abs_err", coords.join(","))?;
        for row in &self.rows {
            let coords: Vec<String> = row.point.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{},{},{},{}", coords.join(","), row.model, row.analytic, row.abs_err)?;
        }
        Ok(())
    }
}

/// Accuracy of an arbitrary evaluator against an analytic solution.
pub fn accuracy_report_of(
    model: &(dyn Fn(&DVector<f64>) -> f64 + Sync),
    analytic: &ScalarField,
    grid: &PointCloud,
) -> AccuracyReport {
    let rows: Vec<AccuracyRow> = grid
        .points()
        .par_iter()
        .map(|p| {
            let m = model(p);
            let a = analytic(p.as_slice());
            AccuracyRow { point: p.clone(), model: m, analytic: a, abs_err: (m - a).abs() }
        })
        .collect();
    let n = rows.len();
    let (mut max, mut sum, mut sum_sq) = (0.0f64, 0.0, 0.0);
    for row in &rows {
        max = max.max(row.abs_err);
        sum += row.abs_err;
        sum_sq += row.abs_err * row.abs_err;
    }
    let (mean, rms) =
        if n == 0 { (0.0, 0.0) } else { (sum / n as f64, (sum_sq / n as f64).sqrt()) };
    AccuracyReport { rows, max, mean, rms }
}

/// Accuracy of a trial solution over `grid` for a case with an analytic
/// solution.
pub fn accuracy_report(
    solution: &TrialSolution,
    case: &BenchmarkCase,
    grid: &PointCloud,
) -> Result<AccuracyReport> {
    if grid.dim() != case.spec().dimension() {
        return Err(Error::DimensionMismatch {
            expected: case.spec().dimension(),
            actual: grid.dim(),
        });
    }
    if solution.params().input_dim() != case.spec().dimension() {
        return Err(Error::DimensionMismatch {
            expected: case.spec().dimension(),
            actual: solution.params().input_dim(),
        });
    }
    let analytic = case
        .spec()
        .analytic()
        .ok_or_else(|| Error::InvalidArgument("case has no analytic solution".into()))?;
    let model =
        |p: &DVector<f64>| solution.eval(p).expect("grid dimension checked against solution");
    Ok(accuracy_report_of(&model, analytic, grid))
}
