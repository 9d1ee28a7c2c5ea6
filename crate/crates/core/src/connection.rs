//! Connections on the right module `E = M_{m,n}(ℂ)`.
//!
//! A connection is stored as its gauge potential `B_i = B(e_i)` relative to
//! the canonical connection `∇^θ s = −s θ`, so `∇_X s = −s θ(X) + B(X) s`.

use std::sync::Arc;

use crate::calculus::{apply_derivation, theta_eval, DerivationVector, LieBasis};
use crate::error::{Error, Result};
use crate::linalg::{
    classify_matrix, column_space_basis, numeric_rank, CMatrix, DEFAULT_TOL, ZERO,
};

const IDEMPOTENT_TOL: f64 = 1e-8;

/// Right module `M_{m,n}(ℂ)` over `M_n(ℂ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleSpace {
    m: usize,
    n: usize,
}

impl ModuleSpace {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "module size must be positive, got {m}x{n}"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_element(&self, s: &CMatrix) -> Result<()> {
        if s.shape() != (self.m, self.n) {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{} module element", self.m, self.n),
                found: format!("{}x{}", s.rows(), s.cols()),
            });
        }
        Ok(())
    }
}

/// Reduces the projective module `p A^N` to `M_{m,n}(ℂ)`.
///
/// `p` is read as an `nN × nN` complex matrix. Returns `m = dim p ℂ^{nN}`
/// together with an orthonormal basis of the image as columns.
pub fn module_from_projector(n: usize, copies: usize, p: &CMatrix) -> Result<(usize, CMatrix)> {
    let size = n * copies;
    if p.shape() != (size, size) {
        return Err(Error::ShapeMismatch {
            expected: format!("{size}x{size} projector"),
            found: format!("{}x{}", p.rows(), p.cols()),
        });
    }
    let defect = (p * p).distance(p);
    if defect > IDEMPOTENT_TOL * p.frobenius_norm().max(1.0) {
        return Err(Error::NotIdempotent { defect });
    }
    let m = numeric_rank(p, DEFAULT_TOL)?;
    let image = column_space_basis(p, DEFAULT_TOL)?;
    debug_assert_eq!(image.cols(), m);
    Ok((m, image))
}

/// Standard hermitian structure `⟨s, t⟩ = s† t`.
pub fn hermitian_pairing(s: &CMatrix, t: &CMatrix) -> Result<CMatrix> {
    if s.shape() != t.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", s.rows(), s.cols()),
            found: format!("{}x{}", t.rows(), t.cols()),
        });
    }
    Ok(&s.adjoint() * t)
}

/// Connection on `M_{m,n}(ℂ)` given by its gauge potential.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeConnection {
    basis: Arc<LieBasis>,
    module: ModuleSpace,
    potentials: Vec<CMatrix>,
}

impl GaugeConnection {
    pub fn new(basis: Arc<LieBasis>, m: usize, potentials: Vec<CMatrix>) -> Result<Self> {
        let module = ModuleSpace::new(m, basis.n())?;
        if potentials.len() != basis.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} gauge potential components", basis.dim()),
                found: format!("{}", potentials.len()),
            });
        }
        if let Some((i, b)) = potentials
            .iter()
            .enumerate()
            .find(|(_, b)| b.shape() != (m, m))
        {
            return Err(Error::ShapeMismatch {
                expected: format!("{m}x{m} gauge potential"),
                found: format!("{}x{} at index {i}", b.rows(), b.cols()),
            });
        }
        Ok(Self {
            basis,
            module,
            potentials,
        })
    }

    /// Canonical connection `∇^θ` (vanishing gauge potential).
    pub fn canonical(basis: Arc<LieBasis>, m: usize) -> Result<Self> {
        let d = basis.dim();
        Self::new(basis, m, vec![CMatrix::zeros(m, m); d])
    }

    pub fn basis(&self) -> &LieBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> &Arc<LieBasis> {
        &self.basis
    }

    pub fn module(&self) -> ModuleSpace {
        self.module
    }

    pub fn m(&self) -> usize {
        self.module.m
    }

    pub fn n(&self) -> usize {
        self.module.n
    }

    pub fn potentials(&self) -> &[CMatrix] {
        &self.potentials
    }

    pub fn potential_component(&self, i: usize) -> &CMatrix {
        &self.potentials[i]
    }

    /// `B(X) = Σ_i x_i B_i`.
    pub fn potential(&self, x: &DerivationVector) -> Result<CMatrix> {
        self.basis.check_vector(x)?;
        let m = self.m();
        let mut acc = CMatrix::zeros(m, m);
        for (b, &c) in self.potentials.iter().zip(x.coeffs()) {
            if c != ZERO {
                acc = &acc + &b.scale(c);
            }
        }
        Ok(acc)
    }

    pub(crate) fn check_element(&self, s: &CMatrix) -> Result<()> {
        self.module.check_element(s)
    }

    /// Largest Frobenius norm of any `F(e_i, e_j)`.
    pub fn max_curvature_norm(&self) -> f64 {
        let d = self.basis.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                let f = curvature(self, i, j).expect("indices in range");
                worst = worst.max(f.frobenius_norm());
            }
        }
        worst
    }

    pub fn is_flat(&self, tol: f64) -> bool {
        self.max_curvature_norm() <= tol
    }

    /// Frobenius distance between two gauge potentials of the same shape.
    pub fn potential_distance(&self, other: &GaugeConnection) -> f64 {
        self.potentials
            .iter()
            .zip(&other.potentials)
            .map(|(a, b)| a.distance(b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// `∇_X s = −s θ(X) + B(X) s`.
pub fn covariant_derivative(
    conn: &GaugeConnection,
    x: &DerivationVector,
    s: &CMatrix,
) -> Result<CMatrix> {
    conn.check_element(s)?;
    let theta = theta_eval(conn.basis(), x)?;
    let b = conn.potential(x)?;
    Ok(&(&b * s) - &(s * &theta))
}

/// `F(e_i, e_j) = [B_i, B_j] − Σ_k c_ij^k B_k`.
pub fn curvature(conn: &GaugeConnection, i: usize, j: usize) -> Result<CMatrix> {
    let d = conn.basis.dim();
    for idx in [i, j] {
        if idx >= d {
            return Err(Error::IndexOutOfRange { index: idx, len: d });
        }
    }
    let b = &conn.potentials;
    let mut f = b[i].commutator(&b[j]);
    for (k, bk) in b.iter().enumerate() {
        let c = conn.basis.structure_constant(i, j, k);
        if c != ZERO {
            f = &f - &bk.scale(c);
        }
    }
    Ok(f)
}

/// True iff every real-flagged component `B_i` is antihermitian within
/// `tol·max(1, ‖B_i‖)`.
pub fn hermiticity_check(conn: &GaugeConnection, tol: f64) -> bool {
    first_non_antihermitian(conn, tol).is_none()
}

pub(crate) fn first_non_antihermitian(conn: &GaugeConnection, tol: f64) -> Option<usize> {
    conn.basis.real_indices().into_iter().find(|&i| {
        let b = &conn.potentials[i];
        (b + &b.adjoint()).frobenius_norm() > tol * b.frobenius_norm().max(1.0)
    })
}

/// `‖X⟨s,t⟩ − ⟨∇_{X*} s, t⟩ − ⟨s, ∇_X t⟩‖_F`.
pub fn compatibility_defect(
    conn: &GaugeConnection,
    x: &DerivationVector,
    s: &CMatrix,
    t: &CMatrix,
) -> Result<f64> {
    conn.check_element(s)?;
    conn.check_element(t)?;
    let xs = x.star(conn.basis())?;
    let lhs = apply_derivation(conn.basis(), x, &hermitian_pairing(s, t)?)?;
    let a = hermitian_pairing(&covariant_derivative(conn, &xs, s)?, t)?;
    let b = hermitian_pairing(s, &covariant_derivative(conn, x, t)?)?;
    Ok((&(&lhs - &a) - &b).frobenius_norm())
}

/// Gauge action `B_i ↦ u B_i u†` of a unitary `u`.
pub fn gauge_transform(conn: &GaugeConnection, u: &CMatrix) -> Result<GaugeConnection> {
    let m = conn.m();
    if u.shape() != (m, m) {
        return Err(Error::ShapeMismatch {
            expected: format!("{m}x{m} unitary"),
            found: format!("{}x{}", u.rows(), u.cols()),
        });
    }
    if !classify_matrix(u, DEFAULT_TOL)?.unitary {
        let defect = (&u.adjoint() * u).distance(&CMatrix::identity(m));
        return Err(Error::NotUnitary { defect });
    }
    let ud = u.adjoint();
    let potentials = conn.potentials.iter().map(|b| &(u * b) * &ud).collect();
    GaugeConnection::new(conn.basis.clone(), m, potentials)
}
