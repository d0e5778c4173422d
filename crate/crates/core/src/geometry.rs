//! Point-cloud generation for boundaries and interior collocation grids.
//!
//! Domains are never meshed; a boundary is whatever finite point set the
//! caller supplies. This module provides the constructions used by the
//! built-in benchmark problems (rectangle and box lattices, circles,
//! spherical sectors), duplicate removal, and the width-factor heuristic
//! `λ = 1/a²` with `a` the minimum pairwise distance.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Role of a cloud's points in a problem setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointTag {
    Boundary,
    Interior,
}

impl PointTag {
    fn as_str(self) -> &'static str {
        match self {
            PointTag::Boundary => "boundary",
            PointTag::Interior => "interior",
        }
    }
}

/// A finite set of points in `R^n`, optionally tagged with its role.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<DVector<f64>>,
    tag: Option<PointTag>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<DVector<f64>>, tag: Option<PointTag>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: p.len() });
            }
            if !p.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidArgument(format!("point {i} has non-finite entries")));
            }
        }
        Ok(Self { dim, points, tag })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<DVector<f64>> {
        self.points
    }

    pub fn tag(&self) -> Option<PointTag> {
        self.tag
    }

    /// Closest pair of points as `(i, j, distance)` with `i < j`.
    pub fn min_pairwise(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for j in 1..self.points.len() {
            for i in 0..j {
                let d = (&self.points[i] - &self.points[j]).norm();
                if best.map_or(true, |(_, _, b)| d < b) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }

    /// Greedy duplicate removal in input order: a point survives iff its
    /// distance to every already-kept point exceeds `tol`.
    pub fn deduplicate(&self, tol: f64) -> PointCloud {
        let mut kept: Vec<DVector<f64>> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            if kept.iter().all(|k| (p - k).norm() > tol) {
                kept.push(p.clone());
            }
        }
        PointCloud { dim: self.dim, points: kept, tag: self.tag }
    }

    /// Writes the CSV form: a `# dim=.. tag=..` header line, then one
    /// comma-separated point per line at full round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match self.tag {
            Some(tag) => writeln!(out, "# dim={} tag={}", self.dim, tag.as_str())?,
            None => writeln!(out, "# dim={}", self.dim)?,
        }
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads the CSV form. The header is optional; without it the
    /// dimension is inferred from the first row.
    pub fn read_csv<R: BufRead>(input: R) -> Result<PointCloud> {
        let mut dim: Option<usize> = None;
        let mut tag = None;
        let mut points = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for field in rest.split_whitespace() {
                    if let Some(v) = field.strip_prefix("dim=") {
                        dim = Some(v.parse().map_err(|_| {
                            Error::Parse(format!("bad dim value {v:?} in header"))
                        })?);
                    } else if let Some(v) = field.strip_prefix("tag=") {
                        tag = match v {
                            "boundary" => Some(PointTag::Boundary),
                            "interior" => Some(PointTag::Interior),
                            other => {
                                return Err(Error::Parse(format!("unknown tag {other:?}")));
                            }
                        };
                    }
                }
                continue;
            }
            let coords: Vec<f64> = line
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("line {}: bad coordinate {s:?}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            let d = *dim.get_or_insert(coords.len());
            if coords.len() != d {
                return Err(Error::Parse(format!(
                    "line {}: expected {d} coordinates, got {}",
                    lineno + 1,
                    coords.len()
                )));
            }
            points.push(DVector::from_vec(coords));
        }
        let dim = dim.ok_or_else(|| Error::Parse("no points and no dim header".into()))?;
        PointCloud::new(dim, points, tag)
    }
}

/// Width-factor heuristic `λ = 1/a²`, `a` the minimum pairwise distance.
pub fn select_lambda(points: &PointCloud) -> Result<f64> {
    let (i, j, a) = points
        .min_pairwise()
        .ok_or_else(|| Error::InvalidArgument("need at least 2 points to select λ".into()))?;
    if a <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "points {i} and {j} coincide; width heuristic undefined"
        )));
    }
    Ok(1.0 / (a * a))
}

/// Free-function form of [`PointCloud::deduplicate`].
pub fn deduplicate(points: &PointCloud, tol: f64) -> PointCloud {
    points.deduplicate(tol)
}

fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// Closed lattice on the perimeter of an axis-aligned rectangle, with
/// `m_x` and `m_y` points along each closed side (corners included, then
/// removed as duplicates).
pub(crate) fn rect_lattice_boundary(
    m_x: usize,
    m_y: usize,
    bounds: [(f64, f64); 2],
) -> Result<PointCloud> {
    if m_x < 2 || m_y < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points per side, got {m_x} x {m_y}"
        )));
    }
    let xs = ticks(bounds[0].0, bounds[0].1, m_x);
    let ys = ticks(bounds[1].0, bounds[1].1, m_y);
    let mut points = Vec::with_capacity(2 * (m_x + m_y));
    for &x in &xs {
        points.push(DVector::from_vec(vec![x, bounds[1].0]));
    }
    for &x in &xs {
        points.push(DVector::from_vec(vec![x, bounds[1].1]));
    }
    for &y in &ys {
        points.push(DVector::from_vec(vec![bounds[0].0, y]));
    }
    for &y in &ys {
        points.push(DVector::from_vec(vec![bounds[0].1, y]));
    }
    Ok(PointCloud::new(2, points, Some(PointTag::Boundary))?.deduplicate(EXACT_DUP_TOL))
}

/// Tolerance treating points as exact duplicates.
pub const EXACT_DUP_TOL: f64 = 1e-9;

/// Perimeter lattice of the unit square with `m_x` (resp. `m_y`) points
/// per horizontal (vertical) side; shared corners deduplicated, so
/// `m_x = m_y = m` yields `4(m-1)` points.
pub fn rectangle_boundary(m_x: usize, m_y: usize) -> Result<PointCloud> {
    rect_lattice_boundary(m_x, m_y, [(0.0, 1.0), (0.0, 1.0)])
}

/// Strictly interior tensor grid: per axis the coordinates
/// `lo + (hi-lo) i/subdivisions`, `i = 1..subdivisions-1`.
pub fn interior_grid_rectangle(subdivisions: usize, bounds: &[(f64, f64)]) -> Result<PointCloud> {
    if subdivisions < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 subdivisions, got {subdivisions}"
        )));
    }
    if bounds.is_empty() {
        return Err(Error::InvalidArgument("need at least one axis".into()));
    }
    let dim = bounds.len();
    let per_axis = subdivisions - 1;
    let axis_coords: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            (1..subdivisions)
                .map(|i| lo + (hi - lo) * i as f64 / subdivisions as f64)
                .collect()
        })
        .collect();
    let total = per_axis.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut coords = vec![0.0; dim];
        // Row-major: the last axis varies fastest.
        for axis in (0..dim).rev() {
            coords[axis] = axis_coords[axis][rem % per_axis];
            rem /= per_axis;
        }
        points.push(DVector::from_vec(coords));
    }
    PointCloud::new(dim, points, Some(PointTag::Interior))
}

/// `(r cos φ, r sin φ)`.
pub fn polar_to_cartesian(r: f64, phi: f64) -> [f64; 2] {
    [r * phi.cos(), r * phi.sin()]
}

/// Physics convention with θ the polar angle:
/// `(r sin θ cos φ, r sin θ sin φ, r cos θ)`.
pub fn spherical_to_cartesian(r: f64, phi: f64, theta: f64) -> [f64; 3] {
    let st = theta.sin();
    [r * st * phi.cos(), r * st * phi.sin(), r * theta.cos()]
}

/// `m` points on the circle of the given radius, at angles `2πi/m`,
/// `i = 1..m`.
pub fn circle_boundary(m: usize, radius: f64) -> Result<PointCloud> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {m}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let points = (1..=m)
        .map(|i| {
            let [x, y] = polar_to_cartesian(radius, 2.0 * PI * i as f64 / m as f64);
            DVector::from_vec(vec![x, y])
        })
        .collect();
    PointCloud::new(2, points, Some(PointTag::Boundary))
}

/// Half-open face grids of a 3-axis box, oriented so adjacent faces never
/// overlap: each face contributes a full `(m-1) x (m-1)` lattice and the
/// union covers the whole surface lattice except two opposite corners,
/// for `6 (m-1)²` points total.
fn pinwheel_box_faces(m: usize, bounds: [(f64, f64); 3]) -> Vec<DVector<f64>> {
    let axis_ticks: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| ticks(lo, hi, m)).collect();
    // Low range keeps the minimum tick, high range keeps the maximum.
    let low = |axis: usize| axis_ticks[axis][..m - 1].to_vec();
    let high = |axis: usize| axis_ticks[axis][1..].to_vec();

    let mut points = Vec::with_capacity(6 * (m - 1) * (m - 1));
    let mut face = |fixed_axis: usize, fixed_value: f64, a_axis: usize, a: Vec<f64>, b_axis: usize, b: Vec<f64>| {
        for &va in &a {
            for &vb in &b {
                let mut coords = [0.0; 3];
                coords[fixed_axis] = fixed_value;
                coords[a_axis] = va;
                coords[b_axis] = vb;
                points.push(DVector::from_vec(coords.to_vec()));
            }
        }
    };
    let (x_lo, x_hi) = bounds[0];
    let (y_lo, y_hi) = bounds[1];
    let (z_lo, z_hi) = bounds[2];
    face(0, x_lo, 1, low(1), 2, low(2));
    face(0, x_hi, 1, high(1), 2, high(2));
    face(1, y_lo, 0, high(0), 2, high(2));
    face(1, y_hi, 0, low(0), 2, low(2));
    face(2, z_lo, 0, high(0), 1, low(1));
    face(2, z_hi, 0, low(0), 1, high(1));
    points
}

/// Face lattices of the unit cube `[0,1]³` with `m` ticks per axis,
/// deduplicated at a quarter of the lattice spacing. Yields
/// `6 (m-1)²` points.
pub fn box_boundary_3d(m: usize) -> Result<PointCloud> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 ticks per axis, got {m}")));
    }
    let bounds = [(0.0, 1.0); 3];
    let points = pinwheel_box_faces(m, bounds);
    let spacing = 1.0 / (m - 1) as f64;
    Ok(PointCloud::new(3, points, Some(PointTag::Boundary))?.deduplicate(0.25 * spacing))
}

/// Boundary of the spherical sector `r ∈ [0.5, 1]`, `φ, θ ∈ [0, π/2]`:
/// face lattices of the parameter box mapped through
/// [`spherical_to_cartesian`], then deduplicated at a quarter of the
/// radial spacing (the θ = 0 faces collapse onto the polar axis).
pub fn spherical_sector_boundary(m: usize) -> Result<PointCloud> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 ticks per axis, got {m}")));
    }
    let bounds = [(0.5, 1.0), (0.0, PI / 2.0), (0.0, PI / 2.0)];
    let mapped: Vec<DVector<f64>> = pinwheel_box_faces(m, bounds)
        .into_iter()
        .map(|p| {
            let [x, y, z] = spherical_to_cartesian(p[0], p[1], p[2]);
            DVector::from_vec(vec![x, y, z])
        })
        .collect();
    let radial_spacing = 0.5 / (m - 1) as f64;
    Ok(PointCloud::new(3, mapped, Some(PointTag::Boundary))?.deduplicate(0.25 * radial_spacing))
}
