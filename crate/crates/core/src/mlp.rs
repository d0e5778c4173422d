//! One-hidden-layer sigmoidal perceptron with closed-form derivatives.
//!
//! The network computes `N(x) = Σ_i v_i σ(Σ_j w_ij x_j + u_i)` with the
//! logistic sigmoid `σ(z) = 1/(1 + e^{-z})`. Everything the solver needs
//! is available in closed form: derivatives with respect to the inputs
//! (orders 1 and 2), the Laplacian, and gradients of both the value and
//! the Laplacian with respect to the parameters.
//!
//! Parameters flatten into a single vector in the canonical order
//! `v` (length `H`), then `w` row-major (`H x n`), then `u` (length `H`).
//! Optimizer state, gradients, and serialized solutions all use this
//! order.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Logistic sigmoid, evaluated on the numerically stable branch so large
/// `|z|` cannot overflow.
#[inline]
fn sigma(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// First three sigmoid derivatives expressed through the value `s = σ(z)`:
/// σ' = s(1−s), σ'' = σ'(1−2s), σ''' = σ''(1−2s) − 2σ'².
#[inline]
fn sigma_derivatives(s: f64) -> (f64, f64, f64) {
    let d1 = s * (1.0 - s);
    let d2 = d1 * (1.0 - 2.0 * s);
    let d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1;
    (d1, d2, d3)
}

/// σ and its derivatives up to order 3.
///
/// `order` 0 returns the sigmoid itself; orders 1..3 the successive
/// derivatives. Anything above 3 is rejected.
pub fn sigmoid_k(z: f64, order: u32) -> Result<f64> {
    let s = sigma(z);
    let (d1, d2, d3) = sigma_derivatives(s);
    match order {
        0 => Ok(s),
        1 => Ok(d1),
        2 => Ok(d2),
        3 => Ok(d3),
        _ => Err(Error::InvalidArgument(format!(
            "sigmoid derivative order {order} not supported (max 3)"
        ))),
    }
}

/// Weights and biases of a one-hidden-layer sigmoidal perceptron.
///
/// Immutable once constructed; training produces new values through the
/// flattened-vector round trip ([`MlpParams::to_vector`] /
/// [`MlpParams::from_vector`]).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    hidden_count: usize,
    input_dim: usize,
    output_weights: DVector<f64>,
    input_weights: DMatrix<f64>,
    biases: DVector<f64>,
}

impl MlpParams {
    /// Builds parameters from explicit weight arrays.
    pub fn new(
        output_weights: DVector<f64>,
        input_weights: DMatrix<f64>,
        biases: DVector<f64>,
    ) -> Result<Self> {
        let hidden_count = output_weights.len();
        if hidden_count == 0 {
            return Err(Error::InvalidArgument("hidden_count must be positive".into()));
        }
        let input_dim = input_weights.ncols();
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input_dim must be positive".into()));
        }
        if input_weights.nrows() != hidden_count || biases.len() != hidden_count {
            return Err(Error::InvalidArgument(format!(
                "inconsistent shapes: v has {hidden_count} entries, w is {}x{}, u has {}",
                input_weights.nrows(),
                input_weights.ncols(),
                biases.len()
            )));
        }
        let finite = output_weights.iter().all(|x| x.is_finite())
            && input_weights.iter().all(|x| x.is_finite())
            && biases.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Self { hidden_count, input_dim, output_weights, input_weights, biases })
    }

    /// All weights and biases drawn uniformly from `[-1, 1]`.
    pub fn random<R: Rng>(hidden_count: usize, input_dim: usize, rng: &mut R) -> Self {
        let mut draw = |n: usize| DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        let v = draw(hidden_count);
        let u = draw(hidden_count);
        let w = DMatrix::from_fn(hidden_count, input_dim, |_, _| rng.random_range(-1.0..=1.0));
        Self { hidden_count, input_dim, output_weights: v, input_weights: w, biases: u }
    }

    /// All-zero parameters (the network that is identically zero).
    pub fn zeros(hidden_count: usize, input_dim: usize) -> Self {
        Self {
            hidden_count,
            input_dim,
            output_weights: DVector::zeros(hidden_count),
            input_weights: DMatrix::zeros(hidden_count, input_dim),
            biases: DVector::zeros(hidden_count),
        }
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_count
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_weights(&self) -> &DVector<f64> {
        &self.output_weights
    }

    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.input_weights
    }

    pub fn biases(&self) -> &DVector<f64> {
        &self.biases
    }

    /// Total number of parameters, `H (n + 2)`.
    pub fn param_count(&self) -> usize {
        self.hidden_count * (self.input_dim + 2)
    }

    /// Index of `v_i` in the flattened vector.
    pub fn v_index(&self, i: usize) -> usize {
        i
    }

    /// Index of `w_ij` in the flattened vector.
    pub fn w_index(&self, i: usize, j: usize) -> usize {
        self.hidden_count + i * self.input_dim + j
    }

    /// Index of `u_i` in the flattened vector.
    pub fn u_index(&self, i: usize) -> usize {
        self.hidden_count + self.hidden_count * self.input_dim + i
    }

    /// Flattens to the canonical order `v`, `w` row-major, `u`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.param_count());
        for i in 0..self.hidden_count {
            out[self.v_index(i)] = self.output_weights[i];
            out[self.u_index(i)] = self.biases[i];
            for j in 0..self.input_dim {
                out[self.w_index(i, j)] = self.input_weights[(i, j)];
            }
        }
        out
    }

    /// Inverse of [`MlpParams::to_vector`].
    pub fn from_vector(hidden_count: usize, input_dim: usize, flat: &DVector<f64>) -> Result<Self> {
        let expected = hidden_count * (input_dim + 2);
        if flat.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: flat.len() });
        }
        let v = DVector::from_fn(hidden_count, |i, _| flat[i]);
        let w = DMatrix::from_fn(hidden_count, input_dim, |i, j| {
            flat[hidden_count + i * input_dim + j]
        });
        let u = DVector::from_fn(hidden_count, |i, _| flat[hidden_count * (input_dim + 1) + i]);
        Self::new(v, w, u)
    }

    fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: x.len() });
        }
        Ok(())
    }

    #[inline]
    fn pre_activation(&self, i: usize, x: &DVector<f64>) -> f64 {
        let mut z = self.biases[i];
        for j in 0..self.input_dim {
            z += self.input_weights[(i, j)] * x[j];
        }
        z
    }

    /// Network output `N(x) = Σ_i v_i σ(z_i)`.
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.hidden_count {
            acc += self.output_weights[i] * sigma(self.pre_activation(i, x));
        }
        acc
    }

    /// Pure input derivative `∂^k N / ∂x_axis^k = Σ_i v_i w_i,axis^k σ^(k)(z_i)`
    /// for `k` in `{1, 2}`.
    pub fn pure_derivative(&self, x: &DVector<f64>, axis: usize, order: u32) -> Result<f64> {
        self.check_input(x)?;
        if axis >= self.input_dim {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for input_dim {}",
                self.input_dim
            )));
        }
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidArgument(format!(
                "input derivative order {order} not supported (1 or 2)"
            )));
        }
        let mut acc = 0.0;
        for i in 0..self.hidden_count {
            let s = sigma(self.pre_activation(i, x));
            let (d1, d2, _) = sigma_derivatives(s);
            let wij = self.input_weights[(i, axis)];
            let term = match order {
                1 => wij * d1,
                _ => wij * wij * d2,
            };
            acc += self.output_weights[i] * term;
        }
        Ok(acc)
    }

    /// Laplacian `∇²N(x)`, the sum of the pure second derivatives over
    /// all axes.
    pub fn laplacian(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_input(x)?;
        let mut acc = 0.0;
        for axis in 0..self.input_dim {
            acc += self.pure_derivative(x, axis, 2)?;
        }
        Ok(acc)
    }

    /// Gradient of `N(x)` with respect to the flattened parameters:
    /// `∂N/∂v_i = σ(z_i)`, `∂N/∂w_ij = v_i σ'(z_i) x_j`,
    /// `∂N/∂u_i = v_i σ'(z_i)`.
    pub fn param_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        Ok(self.eval_and_param_gradient(x).1)
    }

    /// Value and parameter gradient in one pass over the hidden units.
    pub(crate) fn eval_and_param_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut grad = DVector::zeros(self.param_count());
        let mut value = 0.0;
        for i in 0..self.hidden_count {
            let s = sigma(self.pre_activation(i, x));
            let d1 = s * (1.0 - s);
            let vi = self.output_weights[i];
            value += vi * s;
            grad[self.v_index(i)] = s;
            grad[self.u_index(i)] = vi * d1;
            for j in 0..self.input_dim {
                grad[self.w_index(i, j)] = vi * d1 * x[j];
            }
        }
        (value, grad)
    }

    /// Gradient of the Laplacian `∇²N(x)` with respect to the flattened
    /// parameters. With `S_i = Σ_a w_ia²`:
    /// `∂/∂v_i = S_i σ''(z_i)`,
    /// `∂/∂w_ij = v_i (2 w_ij σ''(z_i) + S_i σ'''(z_i) x_j)`,
    /// `∂/∂u_i = v_i S_i σ'''(z_i)`.
    pub fn laplacian_param_gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_input(x)?;
        Ok(self.laplacian_and_param_gradient(x).1)
    }

    /// Laplacian value and its parameter gradient in one pass.
    pub(crate) fn laplacian_and_param_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut grad = DVector::zeros(self.param_count());
        let mut value = 0.0;
        for i in 0..self.hidden_count {
            let s = sigma(self.pre_activation(i, x));
            let (_, d2, d3) = sigma_derivatives(s);
            let vi = self.output_weights[i];
            let mut sq_sum = 0.0;
            for j in 0..self.input_dim {
                let wij = self.input_weights[(i, j)];
                sq_sum += wij * wij;
            }
            value += vi * sq_sum * d2;
            grad[self.v_index(i)] = sq_sum * d2;
            grad[self.u_index(i)] = vi * sq_sum * d3;
            for j in 0..self.input_dim {
                let wij = self.input_weights[(i, j)];
                grad[self.w_index(i, j)] = vi * (2.0 * wij * d2 + sq_sum * d3 * x[j]);
            }
        }
        (value, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(hidden: usize, dim: usize, seed: u64) -> MlpParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpParams::random(hidden, dim, &mut rng)
    }

    fn random_point(dim: usize, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DVector::from_fn(dim, |_, _| rng.random_range(-2.0..=2.0))
    }

    /// Central finite difference of a scalar function.
    fn central_diff(f: impl Fn(f64) -> f64, at: f64, step: f64) -> f64 {
        (f(at + step) - f(at - step)) / (2.0 * step)
    }

    /// Second-order central finite difference.
    fn central_diff2(f: impl Fn(f64) -> f64, at: f64, step: f64) -> f64 {
        (f(at + step) - 2.0 * f(at) + f(at - step)) / (step * step)
    }

    #[test]
    fn sigmoid_at_zero() {
        assert_eq!(sigmoid_k(0.0, 0).unwrap(), 0.5);
        assert_eq!(sigmoid_k(0.0, 1).unwrap(), 0.25);
    }

    #[test]
    fn sigmoid_order_out_of_range() {
        assert!(matches!(sigmoid_k(0.0, 4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sigmoid_second_derivative_matches_finite_difference() {
        let fd = central_diff(|z| sigmoid_k(z, 1).unwrap(), 1.0, 1e-5);
        let analytic = sigmoid_k(1.0, 2).unwrap();
        assert_relative_eq!(analytic, fd, max_relative = 1e-6);
    }

    #[test]
    fn sigmoid_third_derivative_matches_finite_difference() {
        for &z in &[-1.5, -0.3, 0.0, 0.7, 2.0] {
            let fd = central_diff(|z| sigmoid_k(z, 2).unwrap(), z, 1e-5);
            assert_relative_eq!(sigmoid_k(z, 3).unwrap(), fd, epsilon = 1e-9, max_relative = 1e-6);
        }
    }

    #[test]
    fn sigmoid_extreme_arguments_stay_finite() {
        for &z in &[-1e4, -600.0, 600.0, 1e4] {
            for order in 0..=3 {
                assert!(sigmoid_k(z, order).unwrap().is_finite());
            }
        }
        assert_abs_diff_eq!(sigmoid_k(600.0, 0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sigmoid_k(-600.0, 0).unwrap(), 0.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn sigmoid_first_derivative_identity(z in -30.0..30.0f64) {
            let s = sigmoid_k(z, 0).unwrap();
            let d1 = sigmoid_k(z, 1).unwrap();
            prop_assert!((d1 - s * (1.0 - s)).abs() <= 1e-14);
        }

        #[test]
        fn sigmoid_symmetry(z in -30.0..30.0f64) {
            let plus = sigmoid_k(z, 0).unwrap();
            let minus = sigmoid_k(-z, 0).unwrap();
            prop_assert!((minus - (1.0 - plus)).abs() <= 1e-14);
        }
    }

    #[test]
    fn eval_zero_output_weights() {
        let params = MlpParams::new(
            DVector::zeros(3),
            DMatrix::from_fn(3, 2, |i, j| (i + j) as f64),
            DVector::from_vec(vec![1.0, -1.0, 0.5]),
        )
        .unwrap();
        let x = DVector::from_vec(vec![0.3, -0.7]);
        assert_eq!(params.eval(&x).unwrap(), 0.0);
    }

    #[test]
    fn eval_single_unit_at_zero_pre_activation() {
        let params = MlpParams::new(
            DVector::from_vec(vec![2.0]),
            DMatrix::zeros(1, 2),
            DVector::zeros(1),
        )
        .unwrap();
        let x = DVector::from_vec(vec![3.0, 7.0]);
        assert_eq!(params.eval(&x).unwrap(), 1.0);
    }

    #[test]
    fn eval_matches_direct_summation_oracle() {
        let params = random_params(4, 2, 11);
        let x = random_point(2, 12);
        // Independent summation straight from the defining formula.
        let mut expected = 0.0;
        for i in 0..4 {
            let mut z = params.biases()[i];
            for j in 0..2 {
                z += params.input_weights()[(i, j)] * x[j];
            }
            expected += params.output_weights()[i] / (1.0 + (-z).exp());
        }
        assert_relative_eq!(params.eval(&x).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let params = random_params(2, 3, 1);
        let x = DVector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(params.eval(&x), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eval_linear_in_output_weights() {
        let params = random_params(5, 2, 21);
        let doubled = MlpParams::new(
            params.output_weights() * 2.0,
            params.input_weights().clone(),
            params.biases().clone(),
        )
        .unwrap();
        let x = random_point(2, 22);
        assert_eq!(doubled.eval(&x).unwrap(), 2.0 * params.eval(&x).unwrap());
    }

    #[test]
    fn pure_derivative_zero_column() {
        let mut w = DMatrix::from_fn(3, 2, |i, j| 0.3 * (i as f64) - 0.1 * (j as f64) + 0.2);
        for i in 0..3 {
            w[(i, 1)] = 0.0;
        }
        let params = MlpParams::new(
            DVector::from_vec(vec![1.0, -2.0, 0.5]),
            w,
            DVector::from_vec(vec![0.1, 0.2, 0.3]),
        )
        .unwrap();
        let x = random_point(2, 31);
        assert_eq!(params.pure_derivative(&x, 1, 1).unwrap(), 0.0);
        assert_eq!(params.pure_derivative(&x, 1, 2).unwrap(), 0.0);
    }

    #[test]
    fn pure_derivative_argument_checks() {
        let params = random_params(2, 2, 3);
        let x = random_point(2, 4);
        assert!(params.pure_derivative(&x, 2, 1).is_err());
        assert!(params.pure_derivative(&x, 0, 0).is_err());
        assert!(params.pure_derivative(&x, 0, 3).is_err());
    }

    #[test]
    fn first_derivative_matches_finite_difference() {
        for seed in 0..20 {
            let params = random_params(4, 3, 100 + seed);
            let x = random_point(3, 200 + seed);
            for axis in 0..3 {
                let fd = central_diff(
                    |t| {
                        let mut xt = x.clone();
                        xt[axis] = t;
                        params.eval(&xt).unwrap()
                    },
                    x[axis],
                    1e-6,
                );
                let analytic = params.pure_derivative(&x, axis, 1).unwrap();
                assert_relative_eq!(analytic, fd, epsilon = 1e-9, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        for seed in 0..20 {
            let params = random_params(4, 2, 300 + seed);
            let x = random_point(2, 400 + seed);
            for axis in 0..2 {
                let fd = central_diff2(
                    |t| {
                        let mut xt = x.clone();
                        xt[axis] = t;
                        params.eval(&xt).unwrap()
                    },
                    x[axis],
                    1e-4,
                );
                let analytic = params.pure_derivative(&x, axis, 2).unwrap();
                assert_relative_eq!(analytic, fd, epsilon = 1e-8, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn laplacian_zero_output_weights() {
        let params = MlpParams::new(
            DVector::zeros(3),
            DMatrix::from_fn(3, 2, |i, j| 0.5 + i as f64 - j as f64),
            DVector::zeros(3),
        )
        .unwrap();
        assert_eq!(params.laplacian(&random_point(2, 5)).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_is_sum_of_axis_second_derivatives() {
        let params = random_params(6, 2, 51);
        let x = random_point(2, 52);
        let by_axis =
            params.pure_derivative(&x, 0, 2).unwrap() + params.pure_derivative(&x, 1, 2).unwrap();
        assert_relative_eq!(params.laplacian(&x).unwrap(), by_axis, max_relative = 1e-14);
    }

    #[test]
    fn laplacian_matches_stencil_oracle() {
        let params = random_params(5, 2, 61);
        let x = random_point(2, 62);
        let h = 1e-4;
        let f = |dx: f64, dy: f64| {
            let xt = DVector::from_vec(vec![x[0] + dx, x[1] + dy]);
            params.eval(&xt).unwrap()
        };
        // 5-point stencil.
        let stencil =
            (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
        assert_relative_eq!(params.laplacian(&x).unwrap(), stencil, epsilon = 1e-8, max_relative = 1e-4);
    }

    #[test]
    fn param_gradient_v_component_at_zero_pre_activation() {
        let params = MlpParams::new(
            DVector::from_vec(vec![1.3]),
            DMatrix::from_row_slice(1, 2, &[2.0, -1.0]),
            DVector::from_vec(vec![0.0]),
        )
        .unwrap();
        // x chosen so z = 2*0.5 - 1*1 = 0.
        let x = DVector::from_vec(vec![0.5, 1.0]);
        let grad = params.param_gradient(&x).unwrap();
        assert_eq!(grad[params.v_index(0)], 0.5);
    }

    #[test]
    fn param_gradient_w_components_vanish_at_origin() {
        let params = random_params(4, 3, 71);
        let grad = params.param_gradient(&DVector::zeros(3)).unwrap();
        for i in 0..4 {
            for j in 0..3 {
                assert_eq!(grad[params.w_index(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn param_gradient_matches_finite_difference() {
        for seed in 0..10 {
            let params = random_params(3, 2, 500 + seed);
            let x = random_point(2, 600 + seed);
            let grad = params.param_gradient(&x).unwrap();
            let flat = params.to_vector();
            for k in 0..flat.len() {
                let fd = central_diff(
                    |t| {
                        let mut p = flat.clone();
                        p[k] = t;
                        MlpParams::from_vector(3, 2, &p).unwrap().eval(&x).unwrap()
                    },
                    flat[k],
                    1e-6,
                );
                assert_relative_eq!(grad[k], fd, epsilon = 1e-9, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn laplacian_param_gradient_zero_weights() {
        let params = MlpParams::new(
            DVector::from_vec(vec![1.0, -1.0]),
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![0.3, 0.4]),
        )
        .unwrap();
        let grad = params.laplacian_param_gradient(&random_point(2, 81)).unwrap();
        assert_eq!(grad.amax(), 0.0);
    }

    #[test]
    fn laplacian_param_gradient_matches_finite_difference() {
        for seed in 0..10 {
            let params = random_params(3, 2, 700 + seed);
            let x = random_point(2, 800 + seed);
            let grad = params.laplacian_param_gradient(&x).unwrap();
            let flat = params.to_vector();
            for k in 0..flat.len() {
                let fd = central_diff(
                    |t| {
                        let mut p = flat.clone();
                        p[k] = t;
                        MlpParams::from_vector(3, 2, &p).unwrap().laplacian(&x).unwrap()
                    },
                    flat[k],
                    1e-5,
                );
                assert_relative_eq!(grad[k], fd, epsilon = 1e-7, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn laplacian_param_gradient_single_unit_hand_expansion() {
        // H = 1, n = 2: ∇²N = v (w0² + w1²) σ''(z), z = w0 x0 + w1 x1 + u.
        let (v, w0, w1, u) = (1.7, 0.4, -0.9, 0.25);
        let params = MlpParams::new(
            DVector::from_vec(vec![v]),
            DMatrix::from_row_slice(1, 2, &[w0, w1]),
            DVector::from_vec(vec![u]),
        )
        .unwrap();
        let x = DVector::from_vec(vec![0.6, -0.2]);
        let z = w0 * x[0] + w1 * x[1] + u;
        let s = 1.0 / (1.0 + (-z).exp());
        let d1 = s * (1.0 - s);
        let d2 = d1 * (1.0 - 2.0 * s);
        let d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1;
        let sq = w0 * w0 + w1 * w1;

        let grad = params.laplacian_param_gradient(&x).unwrap();
        assert_relative_eq!(grad[params.v_index(0)], sq * d2, max_relative = 1e-13);
        assert_relative_eq!(
            grad[params.w_index(0, 0)],
            v * (2.0 * w0 * d2 + sq * d3 * x[0]),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            grad[params.w_index(0, 1)],
            v * (2.0 * w1 * d2 + sq * d3 * x[1]),
            max_relative = 1e-13
        );
        assert_relative_eq!(grad[params.u_index(0)], v * sq * d3, max_relative = 1e-13);
    }

    #[test]
    fn flatten_round_trip() {
        let params = random_params(4, 3, 91);
        let rebuilt = MlpParams::from_vector(4, 3, &params.to_vector()).unwrap();
        assert_eq!(params, rebuilt);
    }

    proptest! {
        #[test]
        fn eval_linearity_in_v(seed in 0u64..1000, scale in 0.1..4.0f64) {
            let params = random_params(3, 2, seed);
            let scaled = MlpParams::new(
                params.output_weights() * scale,
                params.input_weights().clone(),
                params.biases().clone(),
            ).unwrap();
            let x = random_point(2, seed.wrapping_add(1));
            let a = params.eval(&x).unwrap();
            let b = scaled.eval(&x).unwrap();
            prop_assert!((b - scale * a).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}
