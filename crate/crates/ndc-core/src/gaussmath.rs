//! Complex Gaussian integral identities, multivariate quadratic-form
//! integration, and a finite-range tensor quadrature used as the brute-force
//! oracle throughout the test suite.
//!
//! Every quadratic form follows one sign convention: the integrand is
//! `exp(-(x^T M x + b^T x + c))`. Oscillatory phases enter as imaginary parts
//! of `M` and `b`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

/// Closed form of `∫ exp(-(a x² + b x + c)) dx` over the real line:
/// `√(π/a) · exp((b² - 4ac) / 4a)` with the principal square root.
///
/// Requires `Re(a) > 0` for convergence.
pub fn gaussian_integral_1d(a: Complex64, b: Complex64, c: Complex64) -> Result<Complex64> {
    if !(a.re > 0.0) {
        return Err(Error::NonPositiveRealPart { re: a.re });
    }
    let pi = Complex64::new(std::f64::consts::PI, 0.0);
    Ok((pi / a).sqrt() * ((b * b - 4.0 * a * c) / (4.0 * a)).exp())
}

/// Exponent data of a multivariate complex Gaussian `exp(-(x^T M x + b^T x + c))`.
///
/// `M` is complex symmetric (bit-for-bit, checked) and its real part must be
/// positive definite, which is exactly the condition for the integral over
/// all of `R^dim` to converge.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexQuadraticForm {
    dim: usize,
    matrix: Vec<Complex64>,
    linear: Vec<Complex64>,
    constant: Complex64,
}

impl ComplexQuadraticForm {
    pub fn new(
        matrix: Vec<Vec<Complex64>>,
        linear: Vec<Complex64>,
        constant: Complex64,
    ) -> Result<Self> {
        let dim = matrix.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        for row in &matrix {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
        }
        if linear.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: linear.len(),
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if !same_bits(matrix[i][j], matrix[j][i]) {
                    return Err(Error::AsymmetricMatrix { row: i, col: j });
                }
            }
        }
        let flat: Vec<Complex64> = matrix.into_iter().flatten().collect();
        let re: Vec<f64> = flat.iter().map(|z| z.re).collect();
        if let Err(index) = real_cholesky(&re, dim) {
            return Err(Error::NotPositiveDefinite { index });
        }
        Ok(Self {
            dim,
            matrix: flat,
            linear,
            constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    pub fn linear(&self) -> &[Complex64] {
        &self.linear
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    /// Solves `M x = rhs` through the symmetric factorization.
    pub(crate) fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.ldl()?.solve(rhs))
    }

    /// LDL^T factorization of the complex symmetric matrix, without pivoting.
    ///
    /// Because the Hermitian part of `M` (its real part) is positive definite,
    /// every Schur complement inherits that property and all pivots keep a
    /// positive real part; their principal logs sum to the branch-tracked
    /// log-determinant.
    fn ldl(&self) -> Result<Ldl> {
        let dim = self.dim;
        let mut a = self.matrix.clone();
        let scale = (0..dim)
            .map(|k| a[k * dim + k].re.abs())
            .fold(1.0_f64, f64::max);
        let tol = PIVOT_TOL * scale;
        let mut log_det = Complex64::new(0.0, 0.0);
        for k in 0..dim {
            let d = a[k * dim + k];
            if !(d.re > tol) {
                return Err(Error::NotPositiveDefinite { index: k });
            }
            log_det += d.ln();
            let col: Vec<Complex64> = (k + 1..dim).map(|i| a[i * dim + k]).collect();
            for i in (k + 1)..dim {
                let lik = col[i - k - 1] / d;
                for j in (k + 1)..=i {
                    a[i * dim + j] -= lik * col[j - k - 1];
                }
                a[i * dim + k] = lik;
            }
        }
        Ok(Ldl {
            dim,
            factors: a,
            log_det,
        })
    }
}

fn same_bits(x: Complex64, y: Complex64) -> bool {
    x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
}

struct Ldl {
    dim: usize,
    /// Strict lower triangle holds L, diagonal holds D.
    factors: Vec<Complex64>,
    log_det: Complex64,
}

impl Ldl {
    fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let a = &self.factors;
        let mut x = rhs.to_vec();
        for i in 0..n {
            for j in 0..i {
                let lij = a[i * n + j];
                x[i] = x[i] - lij * x[j];
            }
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi /= a[i * n + i];
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let lji = a[j * n + i];
                x[i] = x[i] - lji * x[j];
            }
        }
        x
    }
}

/// Closed form of the multivariate Gaussian integral
/// `∫ exp(-(x^T M x + b^T x + c)) d^n x = π^(n/2) / √(det M) · exp(b^T M⁻¹ b / 4 - c)`.
///
/// The square root of the determinant is taken on the branch reached
/// continuously from the real positive definite part, by accumulating the
/// principal logs of the factorization pivots.
pub fn integrate_quadratic_form(form: &ComplexQuadraticForm) -> Result<Complex64> {
    let ldl = form.ldl()?;
    let x = ldl.solve(form.linear());
    let quad: Complex64 = form
        .linear()
        .iter()
        .zip(&x)
        .map(|(bi, xi)| bi * xi)
        .sum();
    let half_dim = form.dim() as f64 / 2.0;
    let exponent = Complex64::new(half_dim * std::f64::consts::PI.ln(), 0.0) + quad / 4.0
        - form.constant()
        - ldl.log_det / 2.0;
    Ok(exponent.exp())
}

/// Axis-aligned integration box with a common number of points per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points_per_dim: usize,
}

impl QuadratureSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points_per_dim: usize) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: lower.len().max(1),
                actual: upper.len(),
            });
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "quadrature bounds must be finite with lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        if points_per_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "points_per_dim must be at least 2, got {points_per_dim}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            points_per_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    fn with_points(&self, points_per_dim: usize) -> Self {
        Self {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            points_per_dim,
        }
    }
}

/// Fixed-rule tensor-product Gauss-Legendre approximation of
/// `∫ integrand(x) d^n x` over the box.
///
/// Summation is sequential in lexicographic index order, so the result is
/// bit-identical run to run.
pub fn tensor_quadrature<F>(integrand: F, spec: &QuadratureSpec) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    let dim = spec.dim();
    let n = spec.points_per_dim;
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
        .map(|d| gauss_legendre_mapped(n, spec.lower[d], spec.upper[d]))
        .collect();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut sum = Complex64::new(0.0, 0.0);
    loop {
        let mut weight = 1.0;
        for d in 0..dim {
            point[d] = rules[d].0[idx[d]];
            weight *= rules[d].1[idx[d]];
        }
        sum += integrand(&point) * weight;
        let mut d = dim;
        loop {
            if d == 0 {
                return sum;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Dyadic refinement driver for [`tensor_quadrature`]: doubles the points per
/// dimension until two successive estimates agree to
/// `rel_tol * |estimate| + abs_floor`.
///
/// `abs_floor` guards tail evaluations whose true value is far below the
/// integrand's scale; pass 0.0 for a purely relative test.
pub fn tensor_quadrature_converged<F>(
    integrand: F,
    spec: &QuadratureSpec,
    rel_tol: f64,
    abs_floor: f64,
    max_refinements: usize,
) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64,
{
    let mut prev = tensor_quadrature(&integrand, spec);
    let mut n = spec.points_per_dim;
    for _ in 0..max_refinements {
        n *= 2;
        let cur = tensor_quadrature(&integrand, &spec.with_points(n));
        if (cur - prev).norm() <= rel_tol * cur.norm() + abs_floor {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        last: prev,
        previous: prev,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, z);
            dp = n as f64 * (z * p - p_prev) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-15 {
                let (p, p_prev) = legendre_pair(n, z);
                dp = n as f64 * (z * p - p_prev) / (z * z - 1.0);
                z -= p / dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to `[lo, hi]`.
pub fn gauss_legendre_mapped(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut p_prev = 0.0;
    for j in 0..n {
        let p2 = p_prev;
        p_prev = p;
        p = ((2 * j + 1) as f64 * z * p_prev - j as f64 * p2) / (j + 1) as f64;
    }
    (p, p_prev)
}

/// Cholesky factor of a real symmetric matrix (row-major), or the index of
/// the first pivot at or below the tolerance.
pub(crate) fn real_cholesky(a: &[f64], dim: usize) -> std::result::Result<Vec<f64>, usize> {
    let scale = (0..dim)
        .map(|k| a[k * dim + k].abs())
        .fold(1.0_f64, f64::max);
    let tol = PIVOT_TOL * scale;
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(s > tol) {
                    return Err(i);
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

/// Inverse of a small real matrix by Gauss-Jordan elimination with partial
/// pivoting; `None` when singular.
pub(crate) fn invert_real(a: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; dim * dim];
    for i in 0..dim {
        inv[i * dim + i] = 1.0;
    }
    for col in 0..dim {
        let mut pivot_row = col;
        let mut best = work[col * dim + col].abs();
        for r in (col + 1)..dim {
            let v = work[r * dim + col].abs();
            if v > best {
                best = v;
                pivot_row = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if pivot_row != col {
            for c in 0..dim {
                work.swap(col * dim + c, pivot_row * dim + c);
                inv.swap(col * dim + c, pivot_row * dim + c);
            }
        }
        let pivot = work[col * dim + col];
        for c in 0..dim {
            work[col * dim + c] /= pivot;
            inv[col * dim + c] /= pivot;
        }
        for r in 0..dim {
            if r == col {
                continue;
            }
            let factor = work[r * dim + col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..dim {
                work[r * dim + c] -= factor * work[col * dim + c];
                inv[r * dim + c] -= factor * inv[col * dim + c];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        // n = 5 is exact through degree 9
        let (x, w) = gauss_legendre(5);
        let int_x8: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(8)).sum();
        assert_relative_eq!(int_x8, 2.0 / 9.0, max_relative = 1e-14);
        let int_x9: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(9)).sum();
        assert!(int_x9.abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_identity_known_values() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let v = gaussian_integral_1d(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, sqrt_pi, max_relative = 1e-15);
        assert!(v.im.abs() < 1e-15);

        let v = gaussian_integral_1d(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn one_dimensional_identity_complex_case_matches_quadrature() {
        let a = c(1.0, -0.5);
        let b = c(0.3, 0.0);
        let cc = c(0.1, 0.0);
        let closed = gaussian_integral_1d(a, b, cc).unwrap();
        // frozen from an independent high-precision evaluation
        assert_relative_eq!(closed.re, 1.49974680062220266, max_relative = 1e-14);
        assert_relative_eq!(closed.im, 0.368322843829179009, max_relative = 1e-14);

        let spec = QuadratureSpec::new(vec![-30.0], vec![30.0], 64).unwrap();
        let numeric = tensor_quadrature_converged(
            |x| (-(a * x[0] * x[0] + b * x[0] + cc)).exp(),
            &spec,
            1e-12,
            0.0,
            8,
        )
        .unwrap();
        assert!((closed - numeric).norm() / closed.norm() < 1e-8);
    }

    #[test]
    fn identity_rejects_non_decaying_integrand() {
        let err = gaussian_integral_1d(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap_err();
        assert_eq!(err, Error::NonPositiveRealPart { re: 0.0 });
    }

    #[test]
    fn quadratic_form_one_dimensional_reduction() {
        for (a, b, cc) in [
            (c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)),
            (c(2.0, -0.7), c(-0.3, 0.4), c(0.2, -0.1)),
            (c(0.5, 3.0), c(0.0, -1.0), c(0.0, 0.0)),
        ] {
            let form = ComplexQuadraticForm::new(vec![vec![a]], vec![b], cc).unwrap();
            let multi = integrate_quadratic_form(&form).unwrap();
            let single = gaussian_integral_1d(a, b, cc).unwrap();
            assert!((multi - single).norm() <= 1e-14 * single.norm());
        }
    }

    #[test]
    fn quadratic_form_identity_matrix_is_pi() {
        let zero = c(0.0, 0.0);
        let form = ComplexQuadraticForm::new(
            vec![vec![c(1.0, 0.0), zero], vec![zero, c(1.0, 0.0)]],
            vec![zero, zero],
            zero,
        )
        .unwrap();
        let v = integrate_quadratic_form(&form).unwrap();
        assert_relative_eq!(v.re, std::f64::consts::PI, max_relative = 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn quadratic_form_dim_two_matches_quadrature() {
        let m01 = c(0.2, 0.1);
        let form = ComplexQuadraticForm::new(
            vec![vec![c(1.0, 0.0), m01], vec![m01, c(1.5, 0.0)]],
            vec![c(0.1, 0.0), c(0.0, -0.3)],
            c(0.0, 0.0),
        )
        .unwrap();
        let closed = integrate_quadratic_form(&form).unwrap();
        // frozen from an independent high-precision evaluation
        assert_relative_eq!(closed.re, 2.55480600744187791, max_relative = 1e-13);
        assert_relative_eq!(closed.im, 0.039006808277577777, max_relative = 1e-11);

        let spec = QuadratureSpec::new(vec![-12.0, -12.0], vec![12.0, 12.0], 32).unwrap();
        let numeric = tensor_quadrature_converged(
            |x| {
                let quad = form.matrix_entry(0, 0) * x[0] * x[0]
                    + 2.0 * form.matrix_entry(0, 1) * x[0] * x[1]
                    + form.matrix_entry(1, 1) * x[1] * x[1];
                let lin = form.linear()[0] * x[0] + form.linear()[1] * x[1];
                (-(quad + lin)).exp()
            },
            &spec,
            1e-10,
            0.0,
            6,
        )
        .unwrap();
        assert!((closed - numeric).norm() / closed.norm() < 1e-7);
    }

    #[test]
    fn quadratic_form_permutation_invariance() {
        let m = [
            [c(2.0, -0.8), c(0.3, 0.2), c(-0.1, 0.4)],
            [c(0.3, 0.2), c(1.7, 1.1), c(0.25, -0.3)],
            [c(-0.1, 0.4), c(0.25, -0.3), c(2.4, 0.6)],
        ];
        let b = [c(0.4, -0.2), c(-0.6, 0.1), c(0.2, 0.5)];
        let perm = [2usize, 0, 1];
        let base = ComplexQuadraticForm::new(
            m.iter().map(|r| r.to_vec()).collect(),
            b.to_vec(),
            c(0.1, -0.2),
        )
        .unwrap();
        let permuted = ComplexQuadraticForm::new(
            perm.iter()
                .map(|&i| perm.iter().map(|&j| m[i][j]).collect())
                .collect(),
            perm.iter().map(|&i| b[i]).collect(),
            c(0.1, -0.2),
        )
        .unwrap();
        let v0 = integrate_quadratic_form(&base).unwrap();
        let v1 = integrate_quadratic_form(&permuted).unwrap();
        assert!((v0 - v1).norm() <= 1e-13 * v0.norm());
    }

    #[test]
    fn quadratic_form_scaling_law() {
        let m01 = c(0.4, 0.3);
        let matrix = vec![vec![c(1.2, -0.5), m01], vec![m01, c(0.9, 0.7)]];
        let linear = vec![c(0.3, -0.1), c(-0.2, 0.6)];
        let base =
            ComplexQuadraticForm::new(matrix.clone(), linear.clone(), c(0.0, 0.0)).unwrap();
        let s = 3.25;
        let scaled = ComplexQuadraticForm::new(
            matrix
                .iter()
                .map(|r| r.iter().map(|&z| z * s).collect())
                .collect(),
            linear.iter().map(|&z| z * s.sqrt()).collect(),
            c(0.0, 0.0),
        )
        .unwrap();
        let v0 = integrate_quadratic_form(&base).unwrap();
        let v1 = integrate_quadratic_form(&scaled).unwrap();
        let expected = v0 * s.powf(-1.0);
        assert!((v1 - expected).norm() <= 1e-13 * expected.norm());
    }

    #[test]
    fn quadratic_form_real_input_has_real_output() {
        let m01 = c(0.3, 0.0);
        let form = ComplexQuadraticForm::new(
            vec![vec![c(1.0, 0.0), m01], vec![m01, c(2.0, 0.0)]],
            vec![c(0.7, 0.0), c(-0.4, 0.0)],
            c(0.2, 0.0),
        )
        .unwrap();
        let v = integrate_quadratic_form(&form).unwrap();
        assert!(v.im.abs() <= 1e-12 * v.re.abs());
    }

    #[test]
    fn determinant_branch_follows_pivots_not_principal_root() {
        // Three strongly rotated pivots: the accumulated argument exceeds pi,
        // so a principal square root of det(M) would land on the wrong sheet.
        let zero = c(0.0, 0.0);
        let d = c(1.0, -5.0);
        let form = ComplexQuadraticForm::new(
            vec![
                vec![d, zero, zero],
                vec![zero, d, zero],
                vec![zero, zero, d],
            ],
            vec![zero, zero, zero],
            zero,
        )
        .unwrap();
        let multi = integrate_quadratic_form(&form).unwrap();
        let single = gaussian_integral_1d(d, zero, zero).unwrap();
        let expected = single * single * single;
        assert!((multi - expected).norm() <= 1e-13 * expected.norm());

        let principal = {
            let det = d * d * d;
            Complex64::new(std::f64::consts::PI, 0.0).powf(1.5) / det.sqrt()
        };
        assert!((principal - expected).norm() > 0.1 * expected.norm());
    }

    #[test]
    fn quadratic_form_construction_errors() {
        let zero = c(0.0, 0.0);
        let err = ComplexQuadraticForm::new(vec![vec![c(-1.0, 0.0)]], vec![zero], zero)
            .unwrap_err();
        assert_eq!(err, Error::NotPositiveDefinite { index: 0 });

        let err = ComplexQuadraticForm::new(
            vec![
                vec![c(1.0, 0.0), c(0.2, 0.0)],
                vec![c(0.2, 1e-18), c(1.0, 0.0)],
            ],
            vec![zero, zero],
            zero,
        )
        .unwrap_err();
        assert_eq!(err, Error::AsymmetricMatrix { row: 0, col: 1 });

        let err =
            ComplexQuadraticForm::new(vec![vec![c(1.0, 0.0)]], vec![zero, zero], zero).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                actual: 2
            }
        );
    }

    #[test]
    fn tensor_quadrature_standard_gaussian() {
        // the fixed rule needs 64 points on this window; the refinement
        // driver reaches the same accuracy from any starting order
        let spec = QuadratureSpec::new(vec![-10.0], vec![10.0], 64).unwrap();
        let v = tensor_quadrature(|x| c((-x[0] * x[0]).exp(), 0.0), &spec);
        assert_relative_eq!(v.re, std::f64::consts::PI.sqrt(), max_relative = 1e-12);

        let spec = QuadratureSpec::new(vec![-10.0], vec![10.0], 32).unwrap();
        let v = tensor_quadrature_converged(
            |x| c((-x[0] * x[0]).exp(), 0.0),
            &spec,
            1e-12,
            0.0,
            6,
        )
        .unwrap();
        assert_relative_eq!(v.re, std::f64::consts::PI.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn tensor_quadrature_constant_over_box() {
        let spec = QuadratureSpec::new(vec![0.0, 0.0], vec![1.0, 2.0], 8).unwrap();
        let v = tensor_quadrature(|_| c(1.0, 0.0), &spec);
        assert_relative_eq!(v.re, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn convergence_driver_reports_failure_with_estimates() {
        let spec = QuadratureSpec::new(vec![-1.0], vec![1.0], 2).unwrap();
        let err = tensor_quadrature_converged(
            |x| c((4000.0 * x[0] * x[0]).cos(), 0.0),
            &spec,
            1e-12,
            0.0,
            1,
        )
        .unwrap_err();
        match err {
            Error::QuadratureNotConverged { .. } => {}
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn identity_agrees_with_quadrature_across_parameters() {
        let cases = [
            (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            (c(0.5, 0.2), c(1.0, -0.5), c(0.3, 0.0)),
            (c(3.0, -2.0), c(-0.4, 0.9), c(0.0, 0.7)),
            (c(0.08, 0.03), c(0.1, 0.1), c(-0.2, 0.0)),
            (c(2.5, 8.0), c(0.0, 2.0), c(0.5, -0.5)),
        ];
        for (a, b, cc) in cases {
            let closed = gaussian_integral_1d(a, b, cc).unwrap();
            let half_width = 20.0 / a.re.sqrt();
            let spec = QuadratureSpec::new(vec![-half_width], vec![half_width], 64).unwrap();
            let numeric = tensor_quadrature_converged(
                |x| (-(a * x[0] * x[0] + b * x[0] + cc)).exp(),
                &spec,
                1e-11,
                0.0,
                8,
            )
            .unwrap();
            assert!(
                (closed - numeric).norm() <= 1e-7 * closed.norm(),
                "mismatch for a={a}, b={b}, c={cc}"
            );
        }
    }

    #[test]
    fn quadrature_spec_validates_bounds_and_order() {
        assert!(QuadratureSpec::new(vec![0.0], vec![1.0], 2).is_ok());
        assert!(QuadratureSpec::new(vec![1.0], vec![0.0], 8).is_err());
        assert!(QuadratureSpec::new(vec![0.0], vec![1.0], 1).is_err());
        assert!(QuadratureSpec::new(vec![0.0, 0.0], vec![1.0], 8).is_err());
        assert!(QuadratureSpec::new(vec![f64::NEG_INFINITY], vec![0.0], 8).is_err());
    }

    #[test]
    fn small_real_matrix_inverse() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let inv = invert_real(&a, 2).unwrap();
        let det = 11.0;
        assert_relative_eq!(inv[0], 3.0 / det, max_relative = 1e-14);
        assert_relative_eq!(inv[1], -1.0 / det, max_relative = 1e-14);
        assert_relative_eq!(inv[3], 4.0 / det, max_relative = 1e-14);
        assert!(invert_real(&[0.0, 0.0, 0.0, 0.0], 2).is_none());
    }
}
