//! Dense complex linear algebra kernel.
//!
//! [`CMatrix`] is the single carrier type for algebra elements, module
//! elements, endomorphisms and form components. Construction rejects
//! non-finite entries, so every value downstream is finite by type.
//!
//! The matrix exponential is a fixed degree-13 Padé approximant with
//! scaling and squaring. Hermitian eigendecomposition, singular values and
//! QR are delegated to `nalgebra`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default relative tolerance for classification and validation checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
#[cfg(test)]
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    inner: DMatrix<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries for {rows}x{cols}", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        if let Some(k) = data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &data),
        })
    }

    /// Builds a matrix from a list of rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != cols) {
            return Err(Error::ShapeMismatch {
                expected: format!("{cols} columns"),
                found: format!("{} columns in row {r}", row.len()),
            });
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    /// Real-valued convenience constructor (row-major).
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![ZERO; n * n];
        for (k, &z) in diag.iter().enumerate() {
            data[k * n + k] = z;
        }
        Self::from_row_major(n, n, data)
    }

    /// Matrix unit `E_{ij}` (zero-based indices).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.inner[(i, j)] = ONE;
        m
    }

    /// Wraps an nalgebra matrix, rejecting non-finite entries.
    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        if let Some(k) = inner
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            // nalgebra storage is column-major
            let rows = inner.nrows().max(1);
            return Err(Error::NonFinite {
                row: k % rows,
                col: k / rows,
            });
        }
        Ok(Self { inner })
    }

    fn wrap(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { inner }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn row_major(&self) -> Vec<C64> {
        self.inner.transpose().iter().copied().collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.inner.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.inner.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        self.inner
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.inner.iter().all(|z| *z == ZERO)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::wrap(&self.inner * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Frobenius distance `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(
            self.shape(),
            other.shape(),
            "distance of differently shaped matrices"
        );
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Checked product, for call sites where the shapes come from user input.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows on the right factor", self.cols()),
                found: format!("{}x{}", other.rows(), other.cols()),
            });
        }
        Ok(self * other)
    }

    /// Vectorization (column-stacked) as an nalgebra column.
    pub(crate) fn vectorize(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_iterator(self.rows() * self.cols(), self.inner.iter().copied())
    }

    /// Block-diagonal direct sum of square or rectangular blocks.
    pub fn block_diagonal(blocks: &[CMatrix]) -> Self {
        let rows = blocks.iter().map(CMatrix::rows).sum();
        let cols = blocks.iter().map(CMatrix::cols).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.view_mut((r0, c0), b.shape()).copy_from(&b.inner);
            r0 += b.rows();
            c0 += b.cols();
        }
        Self::wrap(out)
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix::wrap(&self.inner + &rhs.inner)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix::wrap(&self.inner - &rhs.inner)
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix::wrap(&self.inner * &rhs.inner)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix::wrap(-&self.inner)
    }
}

/// Defect flags of a square matrix, each judged against `tol·max(1, ‖a‖_F)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixClass {
    pub hermitian: bool,
    pub antihermitian: bool,
    pub unitary: bool,
    pub traceless: bool,
    pub idempotent: bool,
}

pub fn classify_matrix(a: &CMatrix, tol: f64) -> Result<MatrixClass> {
    let n = a.require_square()?;
    let scale = tol * a.frobenius_norm().max(1.0);
    let adj = a.adjoint();
    let aa = a * a;
    Ok(MatrixClass {
        hermitian: a.distance(&adj) <= scale,
        antihermitian: (a + &adj).frobenius_norm() <= scale,
        unitary: (&adj * a).distance(&CMatrix::identity(n)) <= scale,
        traceless: a.trace().norm() <= scale,
        idempotent: aa.distance(a) <= scale,
    })
}

// Padé [13/13] numerator coefficients for exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// Largest 1-norm for which the degree-13 approximant is accurate to unit roundoff.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential `exp(scale·a)`.
pub fn mat_exp(a: &CMatrix, scale: f64) -> Result<CMatrix> {
    let n = a.require_square()?;
    if !scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite exponent scale {scale}"
        )));
    }
    if scale == 0.0 || a.is_zero() {
        return Ok(CMatrix::identity(n));
    }
    let mut x = &a.inner * C64::new(scale, 0.0);
    let norm = x
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    if squarings > 0 {
        x *= C64::new(0.5f64.powi(squarings as i32), 0.0);
    }

    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;

    let u_hi = &x6 * b(13) + &x4 * b(11) + &x2 * b(9);
    let u_inner = &x6 * &u_hi + &x6 * b(7) + &x4 * b(5) + &x2 * b(3) + &id * b(1);
    let u = &x * u_inner;
    let v_hi = &x6 * b(12) + &x4 * b(10) + &x2 * b(8);
    let v = &x6 * v_hi + &x6 * b(6) + &x4 * b(4) + &x2 * b(2) + &id * b(0);

    let numer = &v + &u;
    let denom = v - u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numerical("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    CMatrix::from_dmatrix(r).map_err(|_| Error::Numerical("matrix exponential overflowed".into()))
}

/// Eigendecomposition of a hermitian matrix. Eigenvalues are returned in
/// ascending order with the matching eigenvectors as columns of a unitary.
pub fn eig_hermitian(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.require_square()?;
    let adj = a.adjoint();
    let defect = a.distance(&adj);
    if defect > DEFAULT_TOL * a.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let sym = (&a.inner + &adj.inner) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, CMatrix::from_dmatrix(vecs)?))
}

/// Number of singular values above `tol` times the largest one.
pub fn numeric_rank(a: &CMatrix, tol: f64) -> Result<usize> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rank tolerance must be positive, got {tol}"
        )));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0);
    }
    let sv = a.inner.clone().singular_values_unordered();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * max).count())
}

/// Orthonormal basis of the column space, one column per singular value
/// above `tol` times the largest.
pub fn column_space_basis(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(CMatrix::zeros(a.rows(), 0));
    }
    let svd = a.inner.clone().svd_unordered(true, false);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD without U factor".into()))?;
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = if max == 0.0 {
        Vec::new()
    } else {
        (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > tol * max)
            .collect()
    };
    let mut basis = DMatrix::zeros(a.rows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    CMatrix::from_dmatrix(basis)
}

/// Seeded generator used by every randomized routine in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian sample with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    CMatrix::from_row_major(rows, cols, data).expect("gaussian samples are finite")
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, n, rng);
    (&g + &g.adjoint()).scale_real(0.5)
}

pub fn random_antihermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, n, rng);
    (&g - &g.adjoint()).scale_real(0.5)
}

/// Haar-distributed unitary drawn from the given generator.
pub fn haar_unitary_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "unitary dimension must be at least 1".into(),
        ));
    }
    let z = random_matrix(dim, dim, rng);
    let qr = z.inner.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    CMatrix::from_dmatrix(q)
}

/// Haar-distributed unitary, deterministic in `(dim, seed)`.
pub fn haar_unitary(dim: usize, seed: u64) -> Result<CMatrix> {
    haar_unitary_from(dim, &mut seeded_rng(seed))
}
