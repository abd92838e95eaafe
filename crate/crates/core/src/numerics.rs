//! Dense complex linear algebra used throughout the crate.
//!
//! Everything operates on `nalgebra` dynamic matrices of `Complex<f64>`.
//! Spatial covariance matrices are carried as [`HermitianMatrix`], which is
//! symmetrized on construction so that downstream Cholesky and eigen
//! routines see an exactly Hermitian input.

use nalgebra::{Cholesky, DMatrix, DVector, Dim, Dyn, Matrix, RawStorage, SymmetricEigen, SVD};
use num_complex::Complex;

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative diagonal loading applied before factorizations by default.
pub const DEFAULT_LOADING: f64 = 1e-10;

/// Relative singular-value floor used for rank decisions on subspace bases.
pub const RANK_TOLERANCE: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 4;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Square complex matrix equal to its own conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Wraps `m` after replacing it by `(m + mᴴ) / 2`.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        check_dim(m.nrows(), m.ncols(), "hermitian matrix must be square")?;
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(mut m: CMatrix) -> Self {
        let n = m.nrows();
        for i in 0..n {
            m[(i, i)] = c64(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self(CMatrix::identity(dim, dim) * c64(scale, 0.0))
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = c64(*d, 0.0);
        }
        Self(m)
    }

    /// `x · xᴴ`.
    pub fn outer(x: &CVector) -> Self {
        Self::symmetrized(x * x.adjoint())
    }

    /// `B · A · Bᴴ`, the congruence of `A` by an arbitrary `B`.
    pub fn congruence(&self, b: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), b.ncols(), "congruence transform columns")?;
        Ok(Self::symmetrized(b * &self.0 * b.adjoint()))
    }

    /// `Bᴴ · A · B`.
    pub fn project(&self, b: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), b.nrows(), "projection rows")?;
        Ok(Self::symmetrized(b.adjoint() * &self.0 * b))
    }

    /// Principal submatrix on rows/columns `start..start + len`.
    pub fn block(&self, start: usize, len: usize) -> Self {
        Self(self.0.view((start, start), (len, len)).into_owned())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim(), "hermitian sum")?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim(), "hermitian difference")?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * c64(s, 0.0))
    }

    /// `β · self + (1 − β) · x xᴴ`, re-symmetrized.
    pub fn exponential_update(&self, beta: f64, x: &CVector) -> Self {
        let mut m = &self.0 * c64(beta, 0.0);
        m.ger(c64(1.0 - beta, 0.0), x, &x.conjugate(), c64(1.0, 0.0));
        Self::symmetrized(m)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.0)
    }
}

/// Diagonal loading policy for Hermitian factorizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loading {
    Disabled,
    /// Adds `ε · trace(A) / dim · I` before factorizing.
    Relative(f64),
}

impl Default for Loading {
    fn default() -> Self {
        Loading::Relative(DEFAULT_LOADING)
    }
}

impl Loading {
    fn apply(&self, a: &HermitianMatrix) -> CMatrix {
        match *self {
            Loading::Disabled => a.0.clone(),
            Loading::Relative(eps) => {
                let n = a.dim();
                let mut m = a.0.clone();
                if n > 0 {
                    let floor = eps * a.trace().abs() / n as f64;
                    for i in 0..n {
                        m[(i, i)] += c64(floor, 0.0);
                    }
                }
                m
            }
        }
    }
}

fn cholesky(a: &HermitianMatrix, loading: Loading) -> Result<Cholesky<C64, Dyn>> {
    let m = loading.apply(a);
    Cholesky::new(m).ok_or_else(|| {
        Error::SingularMatrix(format!(
            "cholesky failed on {0}x{0} matrix (loading {loading:?})",
            a.dim()
        ))
    })
}

/// Solves `A X = B` for Hermitian positive definite `A` with default loading.
pub fn hermitian_solve(a: &HermitianMatrix, b: &CMatrix) -> Result<CMatrix> {
    hermitian_solve_with(a, b, Loading::default())
}

pub fn hermitian_solve_with(a: &HermitianMatrix, b: &CMatrix, loading: Loading) -> Result<CMatrix> {
    check_dim(a.dim(), b.nrows(), "hermitian_solve right-hand side rows")?;
    if a.dim() == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    let chol = cholesky(a, loading)?;
    let mut x = chol.solve(b);
    if matches!(loading, Loading::Relative(_)) {
        // Refinement against the unloaded matrix shrinks the loading bias by
        // a factor of about loading/λ_min per step; stop once it stalls.
        let mut last = f64::INFINITY;
        for _ in 0..REFINEMENT_STEPS {
            let residual = b - a.as_matrix() * &x;
            let step = chol.solve(&residual);
            let size = step.norm();
            if !(size < last) || !size.is_finite() {
                break;
            }
            x += step;
            last = size;
            if size <= f64::EPSILON * x.norm() {
                break;
            }
        }
    }
    Ok(x)
}

/// Eigenvalues (descending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &HermitianMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.dim();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(a.0.clone());
    sort_eigenpairs(eig.eigenvalues.as_slice(), &eig.eigenvectors)
}

// Descending by value; exact ties keep the lowest original index first.
fn sort_eigenpairs(values: &[f64], vectors: &CMatrix) -> (Vec<f64>, CMatrix) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}

/// Ratio of smallest to largest eigenvalue magnitude (0 for an empty or zero matrix).
pub fn reciprocal_condition(a: &HermitianMatrix) -> f64 {
    let (values, _) = hermitian_eigen(a);
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let min = values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    min / max
}

/// Generalized Hermitian-definite eigendecomposition `A X = B X Λ`.
#[derive(Debug, Clone)]
pub struct Gevd {
    /// Generalized eigenvalues, descending.
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors, one per column: `Xᴴ B X = I`.
    pub vectors: CMatrix,
}

/// Unloaded factorization of `B`, retried with default loading if `B` is
/// numerically singular.
pub fn gevd(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<Gevd> {
    gevd_with(a, b, Loading::Disabled).or_else(|_| gevd_with(a, b, Loading::default()))
}

pub fn gevd_with(a: &HermitianMatrix, b: &HermitianMatrix, loading: Loading) -> Result<Gevd> {
    check_dim(b.dim(), a.dim(), "gevd matrix pair")?;
    let n = a.dim();
    if n == 0 {
        return Ok(Gevd {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let chol = cholesky(b, loading)?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᴴ, built as L⁻¹ (L⁻¹ A)ᴴ since A is Hermitian.
    let left = l
        .solve_lower_triangular(&a.0)
        .ok_or_else(|| Error::SingularMatrix("gevd triangular solve".into()))?;
    let c = l
        .solve_lower_triangular(&left.adjoint())
        .ok_or_else(|| Error::SingularMatrix("gevd triangular solve".into()))?;
    let c = HermitianMatrix::symmetrized(c);
    let (values, v) = hermitian_eigen(&c);
    let vectors = l
        .adjoint()
        .solve_upper_triangular(&v)
        .ok_or_else(|| Error::SingularMatrix("gevd back-substitution".into()))?;
    Ok(Gevd { values, vectors })
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// `σ_min / σ_max` over the `min(rows, cols)` singular values.
pub fn relative_min_singular_value(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

// Orthonormal basis for the column space of a full-column-rank matrix.
fn orthonormal_basis(m: &CMatrix, label: &str) -> Result<CMatrix> {
    let cols = m.ncols();
    if cols > m.nrows() {
        return Err(Error::RankDeficient(format!(
            "{label} has {cols} columns but only {} rows",
            m.nrows()
        )));
    }
    let svd = SVD::new(m.clone(), true, false);
    let max = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let min = svd.singular_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if max == 0.0 || min / max <= RANK_TOLERANCE {
        return Err(Error::RankDeficient(format!(
            "{label} has dependent columns (relative smallest singular value {:.3e})",
            if max == 0.0 { 0.0 } else { min / max }
        )));
    }
    let u = svd.u.expect("left singular vectors requested");
    Ok(u.columns(0, cols).into_owned())
}

/// Cosines of the principal angles between `span(U)` and `span(V)`, descending.
pub fn principal_angles(u: &CMatrix, v: &CMatrix) -> Result<Vec<f64>> {
    check_dim(u.nrows(), v.nrows(), "principal_angles row count")?;
    let qu = orthonormal_basis(u, "U")?;
    let qv = orthonormal_basis(v, "V")?;
    let cross = qu.adjoint() * qv;
    Ok(singular_values(&cross).into_iter().map(|c| c.clamp(0.0, 1.0)).collect())
}

/// Largest principal angle in radians; assumes equal subspace dimensions.
pub fn max_principal_angle(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    let cosines = principal_angles(u, v)?;
    let smallest = cosines.iter().fold(1.0_f64, |a, &b| a.min(b));
    if u.ncols() != v.ncols() {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    Ok(smallest.acos())
}

pub fn frobenius<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> f64 {
    frobenius_sqr(m).sqrt()
}

pub fn frobenius_sqr<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `‖A − B‖_F / ‖B‖_F`, or the absolute difference when `B = 0`.
pub fn relative_error<R: Dim, C: Dim, S1, S2>(a: &Matrix<C64, R, C, S1>, b: &Matrix<C64, R, C, S2>) -> f64
where
    S1: RawStorage<C64, R, C>,
    S2: RawStorage<C64, R, C>,
{
    let diff = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale = frobenius(b);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Inverse through a loaded Cholesky factorization.
pub fn hermitian_inverse(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let x = hermitian_solve(a, &CMatrix::identity(a.dim(), a.dim()))?;
    HermitianMatrix::from_matrix(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
        let g = random_matrix(rng, n, n);
        let m = &g * g.adjoint() + CMatrix::identity(n, n) * c64(0.1, 0.0);
        HermitianMatrix::from_matrix(m).unwrap()
    }

    // Gaussian elimination with partial pivoting, independent of the Cholesky path.
    fn elimination_solve(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let n = a.nrows();
        let mut aug = CMatrix::zeros(n, n + b.ncols());
        aug.view_mut((0, 0), (n, n)).copy_from(a);
        aug.view_mut((0, n), (n, b.ncols())).copy_from(b);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| aug[(i, col)].norm().partial_cmp(&aug[(j, col)].norm()).unwrap())
                .unwrap();
            aug.swap_rows(col, pivot);
            let p = aug[(col, col)];
            for r in 0..n {
                if r != col {
                    let f = aug[(r, col)] / p;
                    for c in col..aug.ncols() {
                        let v = aug[(col, c)];
                        aug[(r, c)] -= f * v;
                    }
                }
            }
        }
        CMatrix::from_fn(n, b.ncols(), |r, c| aug[(r, n + c)] / aug[(r, r)])
    }

    #[test]
    fn elimination_oracle_matches_2x2_closed_form() {
        let a = CMatrix::from_row_slice(2, 2, &[c64(4.0, 0.0), c64(1.0, 2.0), c64(1.0, -2.0), c64(3.0, 0.0)]);
        let b = CMatrix::from_row_slice(2, 1, &[c64(1.0, 1.0), c64(-2.0, 0.5)]);
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let x0 = (a[(1, 1)] * b[0] - a[(0, 1)] * b[1]) / det;
        let x1 = (a[(0, 0)] * b[1] - a[(1, 0)] * b[0]) / det;
        let x = elimination_solve(&a, &b);
        assert!((x[0] - x0).norm() < 1e-14);
        assert!((x[1] - x1).norm() < 1e-14);
    }

    #[test]
    fn solve_identity_and_scaled_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_matrix(&mut rng, 3, 2);
        let x = hermitian_solve(&HermitianMatrix::identity(3), &b).unwrap();
        assert!(relative_error(&x, &b) < 1e-9);

        let x = hermitian_solve(&HermitianMatrix::scaled_identity(2, 2.0), &CMatrix::identity(2, 2)).unwrap();
        assert!(relative_error(&x, &(CMatrix::identity(2, 2) * c64(0.5, 0.0))) < 1e-9);
    }

    #[test]
    fn solve_matches_elimination_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_pd(&mut rng, 6);
        let b = random_matrix(&mut rng, 6, 3);
        let x = hermitian_solve_with(&a, &b, Loading::Disabled).unwrap();
        let oracle = elimination_solve(a.as_matrix(), &b);
        assert!(relative_error(&x, &oracle) < 1e-9);
    }

    #[test]
    fn solve_residual_up_to_dim_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 7, 16, 33, 64] {
            let a = random_pd(&mut rng, n);
            let b = random_matrix(&mut rng, n, 2);
            let x = hermitian_solve(&a, &b).unwrap();
            let res = frobenius(&(a.as_matrix() * &x - &b));
            assert!(res <= 1e-9 * frobenius(&b).max(1.0), "n={n} residual {res}");
        }
    }

    #[test]
    fn singular_without_loading_errors() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c64(1.0, 0.0);
        let a = HermitianMatrix::from_matrix(a).unwrap();
        let err = hermitian_solve_with(&a, &CMatrix::identity(2, 2), Loading::Disabled).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix(_)));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = hermitian_solve(&HermitianMatrix::identity(3), &CMatrix::zeros(2, 1)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn gevd_identity_metric_is_plain_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_pd(&mut rng, 4);
        let g = gevd(&a, &HermitianMatrix::identity(4)).unwrap();
        let (plain, _) = hermitian_eigen(&a);
        for (x, y) in g.values.iter().zip(&plain) {
            assert!((x - y).abs() < 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn gevd_equal_pair_has_unit_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_pd(&mut rng, 5);
        let g = gevd_with(&a, &a, Loading::Disabled).unwrap();
        assert!(g.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn gevd_residual_and_b_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_pd(&mut rng, 5);
        let b = random_pd(&mut rng, 5);
        let g = gevd_with(&a, &b, Loading::Disabled).unwrap();
        assert!(g.values.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..5 {
            let x = g.vectors.column(i).into_owned();
            let r = a.as_matrix() * &x - b.as_matrix() * &x * c64(g.values[i], 0.0);
            assert!(r.norm() <= 1e-8 * g.values[i].abs().max(1.0), "column {i}");
        }
        let gram = g.vectors.adjoint() * b.as_matrix() * &g.vectors;
        assert!(relative_error(&gram, &CMatrix::identity(5, 5)) < 1e-8);
    }

    #[test]
    fn gevd_scaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_pd(&mut rng, 5);
        let b = random_pd(&mut rng, 5);
        let g1 = gevd(&a, &b).unwrap();
        let g2 = gevd(&a.scale(3.5), &b).unwrap();
        for (x, y) in g1.values.iter().zip(&g2.values) {
            assert!((3.5 * x - y).abs() < 1e-8 * y.abs().max(1.0));
        }
        for i in 0..5 {
            let u = g1.vectors.columns(i, 1).into_owned();
            let v = g2.vectors.columns(i, 1).into_owned();
            assert!(max_principal_angle(&u, &v).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn eigen_ties_keep_index_order() {
        let (values, vectors) = hermitian_eigen(&HermitianMatrix::identity(3));
        assert_eq!(values, vec![1.0, 1.0, 1.0]);
        assert_eq!(vectors.nrows(), 3);
    }

    #[test]
    fn principal_angles_same_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_matrix(&mut rng, 8, 3);
        let t = random_matrix(&mut rng, 3, 3);
        let cos = principal_angles(&u, &(&u * t)).unwrap();
        assert!(cos.iter().all(|c| (c - 1.0).abs() < 1e-10));
    }

    #[test]
    fn principal_angles_orthogonal_columns() {
        let mut u = CMatrix::zeros(3, 1);
        u[0] = c64(1.0, 0.0);
        let mut v = CMatrix::zeros(3, 1);
        v[1] = c64(0.0, 2.0);
        assert!((max_principal_angle(&u, &v).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn principal_angles_small_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_matrix(&mut rng, 8, 3);
        let v = &u + random_matrix(&mut rng, 8, 3) * c64(1e-12, 0.0);
        assert!(max_principal_angle(&u, &v).unwrap() <= 1e-6);
    }

    #[test]
    fn principal_angles_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let col = random_matrix(&mut rng, 5, 1);
        let u = CMatrix::from_fn(5, 2, |r, _| col[r]);
        let err = principal_angles(&u, &u).unwrap_err();
        assert!(matches!(err, Error::RankDeficient(_)));
    }

    #[test]
    fn hermitian_symmetrization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 4, 4);
        let h = HermitianMatrix::from_matrix(m).unwrap();
        let a = h.as_matrix();
        for i in 0..4 {
            assert_eq!(a[(i, i)].im, 0.0);
            for j in 0..4 {
                assert!((a[(i, j)] - a[(j, i)].conj()).norm() <= 1e-12);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn solve_residual_is_small(seed in any::<u64>(), n in 1usize..24) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_pd(&mut rng, n);
                let b = random_matrix(&mut rng, n, 3);
                let x = hermitian_solve(&a, &b).unwrap();
                let res = frobenius(&(a.as_matrix() * &x - &b));
                prop_assert!(res <= 1e-9 * frobenius(&b).max(1.0));
            }
        }
    }
}
