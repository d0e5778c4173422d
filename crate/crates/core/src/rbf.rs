//! Gaussian radial-basis layer anchored at the boundary points.
//!
//! The layer is the correction term `Σ_l q_l e^{-λ|x-R_l|²}` added to the
//! perceptron so the combined model matches the prescribed values at the
//! boundary points exactly. The coefficients `q` solve the symmetric
//! positive-definite system `A q = c` with `A_ij = e^{-λ|R_i-R_j|²}`,
//! factorized once per boundary set by dense Cholesky and reused for
//! every right-hand side (there is one per model parameter when
//! assembling gradients).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Boundary points with their Dirichlet values and the shared Gaussian
/// width factor λ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    points: Vec<DVector<f64>>,
    values: DVector<f64>,
    lambda: f64,
}

/// Points closer than this are considered coincident and rejected.
pub const DISTINCT_POINT_TOL: f64 = 1e-9;

impl BoundarySet {
    pub fn new(points: Vec<DVector<f64>>, values: DVector<f64>, lambda: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("boundary set needs at least one point".into()));
        }
        if values.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                actual: values.len(),
            });
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "width factor must be positive and finite, got {lambda}"
            )));
        }
        let dim = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: p.len() });
            }
            if !p.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidArgument(format!("point {i} has non-finite entries")));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if (&points[i] - &points[j]).norm() <= DISTINCT_POINT_TOL {
                    return Err(Error::DegenerateGeometry(format!(
                        "boundary points {j} and {i} coincide within {DISTINCT_POINT_TOL}"
                    )));
                }
            }
        }
        Ok(Self { points, values, lambda })
    }

    /// Builds from a point cloud plus per-point values.
    pub fn from_cloud(cloud: &PointCloud, values: DVector<f64>, lambda: f64) -> Result<Self> {
        Self::new(cloud.points().to_vec(), values, lambda)
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

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn check_query(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        Ok(())
    }

    /// `e^{-λ|x-R_l|²}` for every center, as a length-M vector.
    pub fn gaussian_values(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_query(x)?;
        Ok(DVector::from_fn(self.len(), |l, _| {
            (-self.lambda * (x - &self.points[l]).norm_squared()).exp()
        }))
    }

    /// Laplacian of each Gaussian at `x`: `(4λ²|x-R_l|² - 2nλ) e^{-λ|x-R_l|²}`.
    pub fn gaussian_laplacians(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_query(x)?;
        let n = self.dim() as f64;
        let lam = self.lambda;
        Ok(DVector::from_fn(self.len(), |l, _| {
            let d2 = (x - &self.points[l]).norm_squared();
            (4.0 * lam * lam * d2 - 2.0 * n * lam) * (-lam * d2).exp()
        }))
    }
}

/// Interpolation matrix `A_ij = e^{-λ|R_i-R_j|²}`.
///
/// Each off-diagonal pair is computed once and mirrored, so the result
/// is exactly symmetric with a unit diagonal.
pub fn build_interpolation_matrix(boundary: &BoundarySet) -> DMatrix<f64> {
    let m = boundary.len();
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = 1.0;
        for j in 0..i {
            let d2 = (&boundary.points[i] - &boundary.points[j]).norm_squared();
            let v = (-boundary.lambda * d2).exp();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    lower: DMatrix<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// Solves `A x = rhs` by the two triangular sweeps.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: rhs.len() });
        }
        let y = self
            .lower
            .solve_lower_triangular(rhs)
            .expect("factor diagonal is strictly positive");
        Ok(self
            .lower
            .tr_solve_lower_triangular(&y)
            .expect("factor diagonal is strictly positive"))
    }

    /// Column-wise [`CholeskyFactor::solve`] for a matrix of right-hand
    /// sides, reusing the single factorization.
    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rhs.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: rhs.nrows() });
        }
        let y = self
            .lower
            .solve_lower_triangular(rhs)
            .expect("factor diagonal is strictly positive");
        Ok(self
            .lower
            .tr_solve_lower_triangular(&y)
            .expect("factor diagonal is strictly positive"))
    }
}

/// Dense Cholesky factorization of a symmetric matrix (only the lower
/// triangle is read).
///
/// A non-positive pivot means the matrix is numerically not positive
/// definite; the error carries the failing pivot index so callers can
/// report the width factor as too small for the point spacing.
pub fn cholesky_factorize(a: &DMatrix<f64>) -> Result<CholeskyFactor> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut lower = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= lower[(i, k)] * lower[(j, k)];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return Err(Error::SingularMatrix { pivot: i });
                }
                lower[(i, i)] = sum.sqrt();
            } else {
                lower[(i, j)] = sum / lower[(j, j)];
            }
        }
    }
    Ok(CholeskyFactor { lower })
}

/// Convenience: interpolation matrix of `boundary`, factorized.
pub fn factorize_boundary(boundary: &BoundarySet) -> Result<CholeskyFactor> {
    cholesky_factorize(&build_interpolation_matrix(boundary))
}

/// Solves `A q = c` for the layer coefficients.
pub fn solve_coefficients(factor: &CholeskyFactor, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    factor.solve(rhs)
}

/// Evaluates the layer `Σ_l q_l e^{-λ|x-R_l|²}`.
pub fn rbf_eval(q: &DVector<f64>, boundary: &BoundarySet, x: &DVector<f64>) -> Result<f64> {
    if q.len() != boundary.len() {
        return Err(Error::DimensionMismatch { expected: boundary.len(), actual: q.len() });
    }
    Ok(q.dot(&boundary.gaussian_values(x)?))
}

/// Exact Laplacian of the layer in `n` dimensions:
/// `Σ_l q_l (4λ²|x-R_l|² - 2nλ) e^{-λ|x-R_l|²}`.
pub fn rbf_laplacian(q: &DVector<f64>, boundary: &BoundarySet, x: &DVector<f64>) -> Result<f64> {
    if q.len() != boundary.len() {
        return Err(Error::DimensionMismatch { expected: boundary.len(), actual: q.len() });
    }
    Ok(q.dot(&boundary.gaussian_laplacians(x)?))
}

/// Jacobian `∂q/∂p` of the coefficients with respect to the perceptron
/// parameters.
///
/// Given the M×P matrix of boundary value gradients `G_ik = ∂N(R_i)/∂p_k`,
/// every column of the result solves `A col = -G_·k`, all against the
/// same factorization.
pub fn coefficient_param_jacobian(
    factor: &CholeskyFactor,
    boundary_mlp_grads: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    factor.solve_matrix(&(-boundary_mlp_grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_boundary(m: usize, dim: usize, lambda: f64, seed: u64) -> BoundarySet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Grid-offset points so nothing collides.
        let points = (0..m)
            .map(|i| {
                DVector::from_fn(dim, |j, _| {
                    (i as f64) * 0.37 + rng.random_range(-0.1..0.1) + 0.05 * j as f64
                })
            })
            .collect();
        let values = DVector::from_fn(m, |i, _| rng.random_range(-1.0..1.0f64) + i as f64 * 0.01);
        BoundarySet::new(points, values, lambda).unwrap()
    }

    #[test]
    fn boundary_rejects_coincident_points() {
        let p = DVector::from_vec(vec![0.5, 0.5]);
        let err = BoundarySet::new(
            vec![p.clone(), p],
            DVector::from_vec(vec![1.0, 2.0]),
            1.0,
        );
        assert!(matches!(err, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn boundary_rejects_bad_lambda() {
        let pts = vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![1.0])];
        let vals = DVector::from_vec(vec![0.0, 0.0]);
        assert!(BoundarySet::new(pts.clone(), vals.clone(), 0.0).is_err());
        assert!(BoundarySet::new(pts, vals, f64::NAN).is_err());
    }

    #[test]
    fn interpolation_matrix_single_point() {
        let boundary = BoundarySet::new(
            vec![DVector::from_vec(vec![0.3, 0.4])],
            DVector::from_vec(vec![1.0]),
            2.0,
        )
        .unwrap();
        let a = build_interpolation_matrix(&boundary);
        assert_eq!(a, DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn interpolation_matrix_two_points_unit_exponent() {
        // Distance a with λ = 1/a² puts e⁻¹ off the diagonal.
        let a_dist = 0.7;
        let boundary = BoundarySet::new(
            vec![DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![a_dist, 0.0])],
            DVector::from_vec(vec![0.0, 0.0]),
            1.0 / (a_dist * a_dist),
        )
        .unwrap();
        let a = build_interpolation_matrix(&boundary);
        assert_relative_eq!(a[(0, 1)], (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(a[(0, 1)], 0.367879, max_relative = 1e-5);
    }

    #[test]
    fn interpolation_matrix_symmetric_unit_diagonal() {
        let boundary = random_boundary(12, 2, 3.0, 7);
        let a = build_interpolation_matrix(&boundary);
        assert_eq!(a, a.transpose());
        for i in 0..12 {
            assert_eq!(a[(i, i)], 1.0);
        }
    }

    #[test]
    fn cholesky_of_identity() {
        let factor = cholesky_factorize(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(*factor.lower(), DMatrix::identity(4, 4));
    }

    #[test]
    fn cholesky_two_by_two_hand_factor() {
        let e1 = (-1.0f64).exp();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, e1, e1, 1.0]);
        let factor = cholesky_factorize(&a).unwrap();
        let l = factor.lower();
        assert_relative_eq!(l[(0, 0)], 1.0, max_relative = 1e-15);
        assert_relative_eq!(l[(1, 0)], e1, max_relative = 1e-15);
        assert_relative_eq!(l[(1, 1)], (1.0 - e1 * e1).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn cholesky_reconstructs_interpolation_matrix() {
        let boundary = random_boundary(20, 3, 2.5, 9);
        let a = build_interpolation_matrix(&boundary);
        let factor = cholesky_factorize(&a).unwrap();
        let rebuilt = factor.lower() * factor.lower().transpose();
        let err = (&rebuilt - &a).amax();
        assert!(err <= 1e-10 * a.amax(), "reconstruction error {err}");
        for i in 0..boundary.len() {
            assert!(factor.lower()[(i, i)] > 0.0);
        }
    }

    #[test]
    fn cholesky_near_coincident_points_singular() {
        // 50 almost-identical points with a width factor near zero: the
        // matrix is numerically all-ones and loses rank immediately.
        let points = (0..50)
            .map(|i| DVector::from_vec(vec![1e-7 * i as f64, 0.0]))
            .collect::<Vec<_>>();
        let values = DVector::zeros(50);
        let boundary = BoundarySet::new(points, values, 1e-6).unwrap();
        let res = cholesky_factorize(&build_interpolation_matrix(&boundary));
        match res {
            Err(Error::SingularMatrix { pivot }) => assert!(pivot > 0),
            other => panic!("expected singular matrix, got {other:?}"),
        }
    }

    #[test]
    fn solve_zero_rhs() {
        let boundary = random_boundary(8, 2, 2.0, 13);
        let factor = factorize_boundary(&boundary).unwrap();
        let q = solve_coefficients(&factor, &DVector::zeros(8)).unwrap();
        assert_eq!(q.amax(), 0.0);
    }

    #[test]
    fn solve_scalar_system() {
        let boundary = BoundarySet::new(
            vec![DVector::from_vec(vec![0.0])],
            DVector::from_vec(vec![0.0]),
            1.0,
        )
        .unwrap();
        let factor = factorize_boundary(&boundary).unwrap();
        let q = solve_coefficients(&factor, &DVector::from_vec(vec![0.7])).unwrap();
        assert_eq!(q[0], 0.7);
    }

    #[test]
    fn solve_residual_below_tolerance() {
        let boundary = random_boundary(20, 2, 4.0, 17);
        let a = build_interpolation_matrix(&boundary);
        let factor = cholesky_factorize(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let c = DVector::from_fn(20, |_, _| rng.random_range(-2.0..2.0));
        let q = solve_coefficients(&factor, &c).unwrap();
        let residual = (&a * &q - &c).amax();
        assert!(residual <= 1e-10 * (1.0 + c.amax()), "residual {residual}");
    }

    #[test]
    fn solve_length_mismatch() {
        let boundary = random_boundary(5, 2, 2.0, 19);
        let factor = factorize_boundary(&boundary).unwrap();
        assert!(matches!(
            solve_coefficients(&factor, &DVector::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eval_at_center_with_unit_coefficient() {
        let boundary = random_boundary(6, 2, 3.0, 23);
        let mut q = DVector::zeros(6);
        q[2] = 1.0;
        let got = rbf_eval(&q, &boundary, &boundary.points()[2].clone()).unwrap();
        // The k-th Gaussian is 1 at its own center; cross terms carry
        // zero coefficients.
        assert_relative_eq!(got, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn eval_zero_coefficients() {
        let boundary = random_boundary(6, 2, 3.0, 29);
        let x = DVector::from_vec(vec![0.1, 0.2]);
        assert_eq!(rbf_eval(&DVector::zeros(6), &boundary, &x).unwrap(), 0.0);
    }

    #[test]
    fn eval_matches_summation_oracle() {
        let boundary = random_boundary(7, 3, 1.7, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let q = DVector::from_fn(7, |_, _| rng.random_range(-1.0..1.0));
        let x = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let mut expected = 0.0;
        for l in 0..7 {
            let mut d2 = 0.0;
            for j in 0..3 {
                let d = x[j] - boundary.points()[l][j];
                d2 += d * d;
            }
            expected += q[l] * (-boundary.lambda() * d2).exp();
        }
        assert_relative_eq!(rbf_eval(&q, &boundary, &x).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn laplacian_at_center() {
        let boundary = random_boundary(5, 2, 2.2, 37);
        let mut q = DVector::zeros(5);
        q[1] = 1.0;
        let got = rbf_laplacian(&q, &boundary, &boundary.points()[1].clone()).unwrap();
        assert_relative_eq!(got, -4.0 * boundary.lambda(), max_relative = 1e-12);
    }

    #[test]
    fn laplacian_zero_coefficients() {
        let boundary = random_boundary(5, 2, 2.2, 41);
        let x = DVector::from_vec(vec![0.4, -0.3]);
        assert_eq!(rbf_laplacian(&DVector::zeros(5), &boundary, &x).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_matches_stencil_oracle() {
        let boundary = random_boundary(6, 2, 1.3, 43);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let q = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let x = DVector::from_vec(vec![0.8, 0.3]);
        let h = 1e-4;
        let f = |dx: f64, dy: f64| {
            let xt = DVector::from_vec(vec![x[0] + dx, x[1] + dy]);
            rbf_eval(&q, &boundary, &xt).unwrap()
        };
        let stencil =
            (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
        let analytic = rbf_laplacian(&q, &boundary, &x).unwrap();
        assert_relative_eq!(analytic, stencil, epsilon = 1e-7, max_relative = 1e-4);
    }

    #[test]
    fn jacobian_zero_gradients() {
        let boundary = random_boundary(6, 2, 2.0, 47);
        let factor = factorize_boundary(&boundary).unwrap();
        let jac = coefficient_param_jacobian(&factor, &DMatrix::zeros(6, 10)).unwrap();
        assert_eq!(jac.amax(), 0.0);
    }

    #[test]
    fn jacobian_scalar_case_negates_gradient() {
        let boundary = BoundarySet::new(
            vec![DVector::from_vec(vec![0.0])],
            DVector::from_vec(vec![0.0]),
            1.0,
        )
        .unwrap();
        let factor = factorize_boundary(&boundary).unwrap();
        let g = DMatrix::from_row_slice(1, 3, &[0.5, -1.5, 2.0]);
        let jac = coefficient_param_jacobian(&factor, &g).unwrap();
        assert_eq!(jac, -g);
    }

    #[test]
    fn jacobian_columns_satisfy_linear_system() {
        let boundary = random_boundary(10, 2, 3.1, 53);
        let a = build_interpolation_matrix(&boundary);
        let factor = cholesky_factorize(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let g = DMatrix::from_fn(10, 7, |_, _| rng.random_range(-1.0..1.0));
        let jac = coefficient_param_jacobian(&factor, &g).unwrap();
        let residual = (&a * &jac + &g).amax();
        assert!(residual <= 1e-10, "residual {residual}");
    }

    #[test]
    fn end_to_end_interpolation_residuals() {
        // With q solved against c, the layer reproduces c at every center.
        let boundary = random_boundary(15, 2, 5.0, 59);
        let factor = factorize_boundary(&boundary).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let c = DVector::from_fn(15, |_, _| rng.random_range(-1.0..1.0));
        let q = solve_coefficients(&factor, &c).unwrap();
        for i in 0..15 {
            let got = rbf_eval(&q, &boundary, &boundary.points()[i].clone()).unwrap();
            assert_abs_diff_eq!(got, c[i], epsilon = 1e-8);
        }
    }
}
