//! Restricted derivation-based differential calculus on `A = M_n(ℂ)`.
//!
//! Every derivation of a matrix algebra is inner, so a Lie subalgebra
//! `g ⊆ Der(A)` is fixed by a basis of traceless generators `θ_i` with
//! `e_i(a) = [θ_i, a]`. Forms of degree `p` are stored by their values on
//! strictly increasing basis tuples; the center of `A` is the scalars, so
//! this component description is complete.

use std::collections::BTreeMap;
use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{numeric_rank, CMatrix, C64, ONE, ZERO};

const TRACE_TOL: f64 = 1e-8;
const SPAN_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

/// The algebra `M_n(ℂ)`. Its center is `ℂ·1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgebraContext {
    n: usize,
}

impl AlgebraContext {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "algebra size n must be at least 1".into(),
            ));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Least-squares coordinates relative to a fixed list of matrices.
struct SpanSolver {
    q: DMatrix<C64>,
    r: DMatrix<C64>,
}

impl SpanSolver {
    fn new(columns: &DMatrix<C64>) -> Self {
        let (q, r) = columns.clone().qr().unpack();
        Self { q, r }
    }

    /// Returns coordinates and the Frobenius residual of the fit.
    fn solve(&self, target: &CMatrix, basis: &[CMatrix]) -> (Vec<C64>, f64) {
        let d = basis.len();
        if d == 0 {
            return (Vec::new(), target.frobenius_norm());
        }
        let v: DVector<C64> = target.vectorize();
        let rhs = self.q.adjoint() * v;
        let coeffs = self
            .r
            .solve_upper_triangular(&rhs)
            .map(|c| c.iter().copied().collect::<Vec<_>>())
            .unwrap_or_else(|| vec![ZERO; d]);
        let fit = combine(basis, &coeffs, target.rows());
        (coeffs, fit.distance(target))
    }
}

fn combine(mats: &[CMatrix], coeffs: &[C64], n: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(n, n);
    for (m, &c) in mats.iter().zip(coeffs) {
        if c != ZERO {
            acc = &acc + &m.scale(c);
        }
    }
    acc
}

/// Basis of `g` as traceless generators, with structure constants,
/// involution matrix and real-form flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBasis {
    n: usize,
    theta: Vec<CMatrix>,
    /// `c[(i*d + j)*d + k]` with `[e_i, e_j] = Σ_k c_ij^k e_k`.
    structure: Vec<C64>,
    /// Row `i` holds the coordinates of `θ(e_i*) = −θ_i†`.
    involution: Vec<C64>,
    real_flags: Vec<bool>,
}

/// Validates the generators and solves for the Lie algebra data.
pub fn build_lie_basis(ctx: AlgebraContext, mats: &[CMatrix]) -> Result<LieBasis> {
    let n = ctx.n();
    let d = mats.len();
    let mut theta = Vec::with_capacity(d);
    for (index, m) in mats.iter().enumerate() {
        if m.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n} basis matrix"),
                found: format!("{}x{} at index {index}", m.rows(), m.cols()),
            });
        }
        let tr = m.trace();
        if tr.norm() > TRACE_TOL * m.frobenius_norm().max(1.0) {
            return Err(Error::NotTraceless {
                index,
                trace: tr.norm(),
            });
        }
        let shift = CMatrix::identity(n).scale(tr / n as f64);
        theta.push(m - &shift);
    }

    let mut columns = DMatrix::<C64>::zeros(n * n, d);
    for (k, t) in theta.iter().enumerate() {
        columns.set_column(k, &t.vectorize());
    }
    if d > 0 {
        let stacked = CMatrix::from_dmatrix(columns.clone())?;
        let rank = numeric_rank(&stacked, RANK_TOL)?;
        if rank != d {
            return Err(Error::LinearlyDependent { rank, expected: d });
        }
    }
    let solver = SpanSolver::new(&columns);

    let mut structure = vec![ZERO; d * d * d];
    for i in 0..d {
        for j in (i + 1)..d {
            let bracket = theta[i].commutator(&theta[j]);
            let (coeffs, residual) = solver.solve(&bracket, &theta);
            if residual > SPAN_TOL * bracket.frobenius_norm().max(1.0) {
                return Err(Error::NotClosed { i, j, residual });
            }
            for (k, &c) in coeffs.iter().enumerate() {
                structure[(i * d + j) * d + k] = c;
                structure[(j * d + i) * d + k] = -c;
            }
        }
    }

    let mut involution = vec![ZERO; d * d];
    let mut real_flags = Vec::with_capacity(d);
    for (index, t) in theta.iter().enumerate() {
        let target = -&t.adjoint();
        let (coeffs, residual) = solver.solve(&target, &theta);
        if residual > SPAN_TOL * t.frobenius_norm().max(1.0) {
            return Err(Error::NotStarClosed { index, residual });
        }
        involution[index * d..(index + 1) * d].copy_from_slice(&coeffs);
        real_flags
            .push((t + &t.adjoint()).frobenius_norm() <= RANK_TOL * t.frobenius_norm().max(1.0));
    }

    Ok(LieBasis {
        n,
        theta,
        structure,
        involution,
        real_flags,
    })
}

impl LieBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self, i: usize) -> &CMatrix {
        &self.theta[i]
    }

    pub fn theta_mats(&self) -> &[CMatrix] {
        &self.theta
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> C64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    /// `S_ij` with `θ(e_i*) = Σ_j S_ij θ_j`.
    pub fn involution_entry(&self, i: usize, j: usize) -> C64 {
        self.involution[i * self.dim() + j]
    }

    pub fn real_flags(&self) -> &[bool] {
        &self.real_flags
    }

    pub fn is_real(&self, i: usize) -> bool {
        self.real_flags[i]
    }

    pub fn real_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.real_flags[i]).collect()
    }

    /// Largest `‖[θ_i,θ_j] − Σ_k c_ij^k θ_k‖_F`.
    pub fn closure_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let coeffs: Vec<C64> = (0..d).map(|k| self.structure_constant(i, j, k)).collect();
                let fit = combine(&self.theta, &coeffs, self.n);
                worst = worst.max(self.theta[i].commutator(&self.theta[j]).distance(&fit));
            }
        }
        worst
    }

    /// Largest coefficient of the Jacobi identity evaluated on basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let d = self.dim();
        let c = |i, j, k| self.structure_constant(i, j, k);
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let mut s = ZERO;
                        for l in 0..d {
                            s += c(i, j, l) * c(l, k, m)
                                + c(j, k, l) * c(l, i, m)
                                + c(k, i, l) * c(l, j, m);
                        }
                        worst = worst.max(s.norm());
                    }
                }
            }
        }
        worst
    }

    /// Largest entry of `S̄ S − 1`; the involution squares to the identity.
    pub fn involution_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for k in 0..d {
                let mut s = ZERO;
                for j in 0..d {
                    s += self.involution_entry(i, j).conj() * self.involution_entry(j, k);
                }
                let target = if i == k { ONE } else { ZERO };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub(crate) fn check_matrix(&self, a: &CMatrix) -> Result<()> {
        if a.shape() != (self.n, self.n) {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} algebra element", self.n),
                found: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        Ok(())
    }

    pub(crate) fn check_vector(&self, x: &DerivationVector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} coefficients", self.dim()),
                found: format!("{}", x.len()),
            });
        }
        Ok(())
    }
}

/// Element `X = Σ_i x_i e_i` of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationVector(Vec<C64>);

impl DerivationVector {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self(coeffs)
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![ZERO; d])
    }

    /// Unit vector `e_i` (zero-based).
    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = vec![ZERO; d];
        v[i] = ONE;
        Self(v)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    /// Coordinates of `X*`.
    pub fn star(&self, basis: &LieBasis) -> Result<Self> {
        basis.check_vector(self)?;
        let d = basis.dim();
        let out = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| self.0[i].conj() * basis.involution_entry(i, j))
                    .sum()
            })
            .collect();
        Ok(Self(out))
    }

    /// True when `X` is a real combination of real-flagged basis elements.
    pub fn is_real_in(&self, basis: &LieBasis) -> bool {
        self.len() == basis.dim()
            && self.0.iter().enumerate().all(|(i, z)| {
                if basis.is_real(i) {
                    z.im.abs() <= 1e-12 * z.re.abs().max(1.0)
                } else {
                    *z == ZERO
                }
            })
    }
}

/// `X(a) = [θ(X), a]`.
pub fn apply_derivation(basis: &LieBasis, x: &DerivationVector, a: &CMatrix) -> Result<CMatrix> {
    basis.check_matrix(a)?;
    Ok(theta_eval(basis, x)?.commutator(a))
}

/// Canonical one-form evaluated on `X`: `θ(X) = Σ_i x_i θ_i`.
pub fn theta_eval(basis: &LieBasis, x: &DerivationVector) -> Result<CMatrix> {
    basis.check_vector(x)?;
    Ok(combine(&basis.theta, x.coeffs(), basis.n))
}

/// All strictly increasing `k`-tuples drawn from `0..d`, in lexicographic order.
pub fn increasing_tuples(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= d {
        rec(0, d, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Sorts an index tuple, returning the permutation sign, or `None` when an
/// index repeats.
fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = indices.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// Degree-`p` element of the restricted calculus.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialForm {
    degree: usize,
    dim: usize,
    n: usize,
    components: BTreeMap<Vec<usize>, CMatrix>,
}

impl DifferentialForm {
    pub fn zero(basis: &LieBasis, degree: usize) -> Self {
        Self {
            degree,
            dim: basis.dim(),
            n: basis.n(),
            components: BTreeMap::new(),
        }
    }

    /// Degree-0 form.
    pub fn function(basis: &LieBasis, a: CMatrix) -> Result<Self> {
        basis.check_matrix(&a)?;
        let mut f = Self::zero(basis, 0);
        f.components.insert(Vec::new(), a);
        Ok(f)
    }

    /// One-form with `ω(e_i) = values[i]`.
    pub fn one_form(basis: &LieBasis, values: Vec<CMatrix>) -> Result<Self> {
        if values.len() != basis.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} one-form components", basis.dim()),
                found: format!("{}", values.len()),
            });
        }
        let mut f = Self::zero(basis, 1);
        for (i, v) in values.into_iter().enumerate() {
            basis.check_matrix(&v)?;
            f.components.insert(vec![i], v);
        }
        Ok(f)
    }

    pub fn canonical_one_form(basis: &LieBasis) -> Self {
        Self::one_form(basis, basis.theta.clone()).expect("basis generators have the right shape")
    }

    pub fn from_components(
        basis: &LieBasis,
        degree: usize,
        components: BTreeMap<Vec<usize>, CMatrix>,
    ) -> Result<Self> {
        for (key, v) in &components {
            let ok = key.len() == degree
                && key.windows(2).all(|w| w[0] < w[1])
                && key.iter().all(|&i| i < basis.dim());
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "component key {key:?} is not a strictly increasing {degree}-tuple below {}",
                    basis.dim()
                )));
            }
            basis.check_matrix(v)?;
        }
        Ok(Self {
            degree,
            dim: basis.dim(),
            n: basis.n(),
            components,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, CMatrix> {
        &self.components
    }

    /// Component on a strictly increasing tuple; absent keys are zero.
    pub fn component(&self, key: &[usize]) -> CMatrix {
        self.components
            .get(key)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.n, self.n))
    }

    /// `ω(e_{i₁}, …, e_{i_p})` for arbitrary indices, using antisymmetry.
    pub fn evaluate(&self, indices: &[usize]) -> CMatrix {
        assert_eq!(indices.len(), self.degree, "wrong number of arguments");
        match sort_with_sign(indices) {
            None => CMatrix::zeros(self.n, self.n),
            Some((key, sign)) => match self.components.get(&key) {
                Some(v) if sign < 0.0 => -v,
                Some(v) => v.clone(),
                None => CMatrix::zeros(self.n, self.n),
            },
        }
    }

    /// Square root of the summed squared Frobenius norms of all components.
    pub fn norm(&self) -> f64 {
        self.components
            .values()
            .map(|v| v.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest component Frobenius norm.
    pub fn max_component_norm(&self) -> f64 {
        self.components
            .values()
            .map(CMatrix::frobenius_norm)
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for v in out.components.values_mut() {
            *v = v.scale(c);
        }
        out
    }

    fn compatible(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }

    fn belongs_to(&self, basis: &LieBasis) -> bool {
        self.dim == basis.dim() && self.n == basis.n()
    }

    fn combine_with(&self, other: &Self, sign: f64) -> Self {
        assert!(
            self.compatible(other) && self.degree == other.degree,
            "forms of different type cannot be added"
        );
        let mut out = self.clone();
        for (k, v) in &other.components {
            let v = v.scale_real(sign);
            let entry = out
                .components
                .entry(k.clone())
                .or_insert_with(|| CMatrix::zeros(self.n, self.n));
            *entry = &*entry + &v;
        }
        out
    }
}

impl Add for &DifferentialForm {
    type Output = DifferentialForm;
    fn add(self, rhs: &DifferentialForm) -> DifferentialForm {
        self.combine_with(rhs, 1.0)
    }
}

impl Sub for &DifferentialForm {
    type Output = DifferentialForm;
    fn sub(self, rhs: &DifferentialForm) -> DifferentialForm {
        self.combine_with(rhs, -1.0)
    }
}

fn basis_mismatch() -> Error {
    Error::InvalidArgument("forms are defined over different Lie bases".into())
}

/// Wedge product, summed over `(p,q)`-shuffles.
pub fn wedge(
    basis: &LieBasis,
    omega: &DifferentialForm,
    eta: &DifferentialForm,
) -> Result<DifferentialForm> {
    if !omega.belongs_to(basis) || !eta.belongs_to(basis) {
        return Err(basis_mismatch());
    }
    let (p, q) = (omega.degree, eta.degree);
    let mut out = DifferentialForm::zero(basis, p + q);
    for key in increasing_tuples(basis.dim(), p + q) {
        let mut acc = CMatrix::zeros(basis.n, basis.n);
        for positions in increasing_tuples(p + q, p) {
            // inversions of the shuffle that lists `positions` first
            let inversions: usize = positions.iter().enumerate().map(|(k, &s)| s - k).sum();
            let left: Vec<usize> = positions.iter().map(|&s| key[s]).collect();
            let right: Vec<usize> = (0..p + q)
                .filter(|s| !positions.contains(s))
                .map(|s| key[s])
                .collect();
            let term = &omega.component(&left) * &eta.component(&right);
            acc = if inversions.is_multiple_of(2) {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        out.components.insert(key, acc);
    }
    Ok(out)
}

/// Exterior differential.
pub fn differential(basis: &LieBasis, omega: &DifferentialForm) -> Result<DifferentialForm> {
    if !omega.belongs_to(basis) {
        return Err(basis_mismatch());
    }
    let p = omega.degree;
    let d = basis.dim();
    let mut out = DifferentialForm::zero(basis, p + 1);
    for key in increasing_tuples(d, p + 1) {
        let mut acc = CMatrix::zeros(basis.n, basis.n);
        for i in 0..=p {
            let rest: Vec<usize> = key
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &v)| v)
                .collect();
            let term = basis.theta[key[i]].commutator(&omega.component(&rest));
            acc = if i % 2 == 0 {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        for i in 0..=p {
            for j in (i + 1)..=p {
                let rest: Vec<usize> = key
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i && k != j)
                    .map(|(_, &v)| v)
                    .collect();
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                for l in 0..d {
                    let c = basis.structure_constant(key[i], key[j], l);
                    if c == ZERO {
                        continue;
                    }
                    let mut args = Vec::with_capacity(p);
                    args.push(l);
                    args.extend_from_slice(&rest);
                    let term = omega.evaluate(&args).scale(c * sign);
                    acc = &acc + &term;
                }
            }
        }
        out.components.insert(key, acc);
    }
    Ok(out)
}

/// Graded involution `ω*(X₁,…,X_p) = ω(X₁*,…,X_p*)*`.
pub fn form_involution(basis: &LieBasis, omega: &DifferentialForm) -> Result<DifferentialForm> {
    if !omega.belongs_to(basis) {
        return Err(basis_mismatch());
    }
    let p = omega.degree;
    let d = basis.dim();
    let mut out = DifferentialForm::zero(basis, p);
    for key in increasing_tuples(d, p) {
        // expand each starred argument e_k* = Σ_j S_kj e_j
        let mut acc = CMatrix::zeros(basis.n, basis.n);
        let mut stack: Vec<(Vec<usize>, C64)> = vec![(Vec::new(), ONE)];
        for &k in &key {
            let mut next = Vec::new();
            for (args, w) in &stack {
                for j in 0..d {
                    let s = basis.involution_entry(k, j);
                    if s == ZERO || args.contains(&j) {
                        continue;
                    }
                    let mut a = args.clone();
                    a.push(j);
                    next.push((a, w * s));
                }
            }
            stack = next;
        }
        for (args, w) in stack {
            acc = &acc + &omega.evaluate(&args).scale(w);
        }
        out.components.insert(key, acc.adjoint());
    }
    Ok(out)
}

/// `max_{i<j} ‖(dθ − θ²)(e_i, e_j)‖_F`; zero when `d < 2`.
pub fn maurer_cartan_defect(basis: &LieBasis) -> f64 {
    let theta = DifferentialForm::canonical_one_form(basis);
    let dtheta = differential(basis, &theta).expect("canonical form belongs to its basis");
    let sq = wedge(basis, &theta, &theta).expect("canonical form belongs to its basis");
    (&dtheta - &sq).max_component_norm()
}
