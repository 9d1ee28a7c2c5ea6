//! Module parallel transports, Wilson-type observables and the gauge
//! equivalence decision procedure.
//!
//! For `X ∈ g` the automorphism flow is `φ_τ(a) = e^{τθ(X)} a e^{−τθ(X)}` and
//! the transport along it is `Φ_τ(s) = e^{τB(X)} s e^{−τθ(X)}`. Composing with
//! right multiplication by `e^{τθ(X)}` leaves the endomorphism `e^{τB(X)}`,
//! whose ordered products are traced to give gauge invariant observables.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::calculus::{theta_eval, DerivationVector, LieBasis};
use crate::connection::{covariant_derivative, first_non_antihermitian, GaugeConnection};
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, mat_exp, seeded_rng, CMatrix, C64};

/// Bound on `‖τ M‖_F` for every exponential taken by this module.
pub const EXP_GUARD: f64 = 50.0;

/// Relative singular value below which an intertwiner direction is kept.
const NULL_TOL: f64 = 1e-7;

/// Relative residual below which a candidate word counts as dependent.
const SPAN_TOL: f64 = 1e-8;

/// Hard cap on the number of tuples `trace_monomials` will enumerate.
const MONOMIAL_BUDGET: usize = 4_000_000;

fn guarded_exp(a: &CMatrix, tau: f64) -> Result<CMatrix> {
    let norm = tau.abs() * a.frobenius_norm();
    if norm.is_nan() || norm > EXP_GUARD {
        return Err(Error::GuardExceeded {
            norm,
            limit: EXP_GUARD,
        });
    }
    mat_exp(a, tau)
}

/// `φ_τ^X(a) = e^{τθ(X)} a e^{−τθ(X)}`.
pub fn automorphism_flow(
    basis: &LieBasis,
    x: &DerivationVector,
    tau: f64,
    a: &CMatrix,
) -> Result<CMatrix> {
    basis.check_matrix(a)?;
    let theta = theta_eval(basis, x)?;
    let fwd = guarded_exp(&theta, tau)?;
    let back = guarded_exp(&theta, -tau)?;
    Ok(&(&fwd * a) * &back)
}

/// `Φ_τ(s) = e^{τB(X)} s e^{−τθ(X)}`.
pub fn module_transport(
    conn: &GaugeConnection,
    x: &DerivationVector,
    tau: f64,
    s: &CMatrix,
) -> Result<CMatrix> {
    conn.check_element(s)?;
    let left = transport_endomorphism(conn, x, tau)?;
    let right = guarded_exp(&theta_eval(conn.basis(), x)?, -tau)?;
    Ok(&(&left * s) * &right)
}

/// `Φ̃_τ = e^{τB(X)} ∈ End_A(E) ≅ M_m(ℂ)`.
pub fn transport_endomorphism(
    conn: &GaugeConnection,
    x: &DerivationVector,
    tau: f64,
) -> Result<CMatrix> {
    guarded_exp(&conn.potential(x)?, tau)
}

/// Central-difference residual of `d/dτ Φ_τ = ∇_X ∘ Φ_τ` at `τ`.
pub fn ode_defect(
    conn: &GaugeConnection,
    x: &DerivationVector,
    tau: f64,
    h: f64,
    s: &CMatrix,
) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step h must be positive, got {h}"
        )));
    }
    let plus = module_transport(conn, x, tau + h, s)?;
    let minus = module_transport(conn, x, tau - h, s)?;
    let slope = (&plus - &minus).scale_real(0.5 / h);
    let rhs = covariant_derivative(conn, x, &module_transport(conn, x, tau, s)?)?;
    Ok(slope.distance(&rhs))
}

/// Ordered list of derivations labelling an observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    letters: Vec<DerivationVector>,
    restricted_to_real: bool,
}

impl Word {
    pub fn new(letters: Vec<DerivationVector>, basis: &LieBasis) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument(
                "a word needs at least one letter".into(),
            ));
        }
        for x in &letters {
            basis.check_vector(x)?;
        }
        let restricted_to_real = letters.iter().all(|x| x.is_real_in(basis));
        Ok(Self {
            letters,
            restricted_to_real,
        })
    }

    /// Word of basis elements `(e_{i₁}, …, e_{i_N})`, zero-based.
    pub fn from_indices(indices: &[usize], basis: &LieBasis) -> Result<Self> {
        let d = basis.dim();
        let letters = indices
            .iter()
            .map(|&i| {
                if i < d {
                    Ok(DerivationVector::unit(d, i))
                } else {
                    Err(Error::IndexOutOfRange { index: i, len: d })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters, basis)
    }

    pub fn letters(&self) -> &[DerivationVector] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn restricted_to_real(&self) -> bool {
        self.restricted_to_real
    }

    /// Cyclic rotation by `k` letters to the left.
    pub fn rotated(&self, k: usize) -> Self {
        let mut letters = self.letters.clone();
        letters.rotate_left(k % self.letters.len());
        Self {
            letters,
            restricted_to_real: self.restricted_to_real,
        }
    }
}

/// `W = Tr(e^{τB(X₁)} ⋯ e^{τB(X_N)})`.
pub fn observable(conn: &GaugeConnection, word: &Word, tau: f64) -> Result<C64> {
    let mut prod = CMatrix::identity(conn.m());
    for x in word.letters() {
        prod = &prod * &transport_endomorphism(conn, x, tau)?;
    }
    Ok(prod.trace())
}

fn min_rotation(t: &[usize]) -> Vec<usize> {
    (0..t.len())
        .map(|k| {
            let mut r = t.to_vec();
            r.rotate_left(k);
            r
        })
        .min()
        .unwrap_or_default()
}

/// `Tr(B_{i₁} ⋯ B_{i_k})` over real-flagged indices for `1 ≤ k ≤ max_degree`,
/// keyed by the lexicographically smallest cyclic rotation.
pub fn trace_monomials(
    conn: &GaugeConnection,
    max_degree: usize,
) -> Result<BTreeMap<Vec<usize>, C64>> {
    if max_degree == 0 {
        return Err(Error::InvalidArgument(
            "max_degree must be at least 1".into(),
        ));
    }
    let letters = conn.basis().real_indices();
    let r = letters.len();
    let total: usize = (1..=max_degree)
        .try_fold(0usize, |acc, k| {
            r.checked_pow(k as u32).and_then(|p| acc.checked_add(p))
        })
        .unwrap_or(usize::MAX);
    if total > MONOMIAL_BUDGET {
        return Err(Error::InvalidArgument(format!(
            "{total} tuples up to degree {max_degree} exceed the enumeration budget of {MONOMIAL_BUDGET}"
        )));
    }
    let mut out = BTreeMap::new();
    // depth-first over tuples, reusing prefix products
    fn rec(
        conn: &GaugeConnection,
        letters: &[usize],
        max_degree: usize,
        prefix: &mut Vec<usize>,
        prod: &CMatrix,
        out: &mut BTreeMap<Vec<usize>, C64>,
    ) {
        for &l in letters {
            prefix.push(l);
            let next = prod * conn.potential_component(l);
            if min_rotation(prefix) == *prefix {
                out.insert(prefix.clone(), next.trace());
            }
            if prefix.len() < max_degree {
                rec(conn, letters, max_degree, prefix, &next, out);
            }
            prefix.pop();
        }
    }
    rec(
        conn,
        &letters,
        max_degree,
        &mut Vec::new(),
        &CMatrix::identity(conn.m()),
        &mut out,
    );
    Ok(out)
}

/// Outcome of [`decide_gauge_equivalence`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// Unitary `u` with `u A_i u† = B_i`, when one was constructed.
    pub witness: Option<CMatrix>,
    pub witness_residual: Option<f64>,
    /// Set when all traces agree but no witness was constructed.
    pub trace_agreement_only: bool,
    pub max_trace_gap: f64,
    /// Shortest word (zero-based basis indices) whose traces differ.
    pub separating_word: Option<Vec<usize>>,
    pub words_compared: usize,
    pub trials_used: usize,
}

/// Default word-length cap for the trace comparison, `m²`.
pub fn default_max_degree(m: usize) -> usize {
    (m * m).max(1)
}

struct TraceComparison {
    max_gap: f64,
    separating: Option<Vec<usize>>,
    compared: usize,
}

/// Compares `Tr w(A)` with `Tr w(B)` over words in the real-flagged letters.
///
/// Words are generated breadth first. A word whose pair `(w(A), w(B))` lies
/// in the span of earlier pairs is not extended: its trace difference and
/// those of all its extensions are linear combinations of ones already
/// compared. The surviving words span the algebra generated by the pairs, so
/// the comparison is exhaustive once the search stops growing.
fn compare_traces(
    a: &GaugeConnection,
    b: &GaugeConnection,
    max_degree: usize,
    tol: f64,
) -> TraceComparison {
    let letters = a.basis().real_indices();
    let m = a.m();
    let mut ortho: Vec<DVector<C64>> = Vec::new();
    let mut absorb = |wa: &CMatrix, wb: &CMatrix| -> bool {
        let mut v = DVector::from_iterator(
            2 * m * m,
            wa.as_dmatrix()
                .iter()
                .chain(wb.as_dmatrix().iter())
                .copied(),
        );
        let norm = v.norm();
        if norm == 0.0 {
            return false;
        }
        v /= C64::new(norm, 0.0);
        for _ in 0..2 {
            for q in &ortho {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let rest = v.norm();
        if rest > SPAN_TOL {
            v /= C64::new(rest, 0.0);
            ortho.push(v);
            true
        } else {
            false
        }
    };

    let id = CMatrix::identity(m);
    absorb(&id, &id);
    let mut frontier: Vec<(Vec<usize>, CMatrix, CMatrix)> = vec![(Vec::new(), id.clone(), id)];
    let mut result = TraceComparison {
        max_gap: 0.0,
        separating: None,
        compared: 0,
    };
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for (word, wa, wb) in &frontier {
            for &l in &letters {
                let ca = wa * a.potential_component(l);
                let cb = wb * b.potential_component(l);
                let gap = (ca.trace() - cb.trace()).norm();
                let scale = ca.frobenius_norm().max(cb.frobenius_norm()).max(1.0);
                result.compared += 1;
                result.max_gap = result.max_gap.max(gap);
                let mut w = word.clone();
                w.push(l);
                if gap > tol * scale && result.separating.is_none() {
                    result.separating = Some(w.clone());
                }
                if absorb(&ca, &cb) {
                    next.push((w, ca, cb));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    result
}

fn conjugation_residual(u: &CMatrix, a: &GaugeConnection, b: &GaugeConnection) -> f64 {
    let ud = u.adjoint();
    a.potentials()
        .iter()
        .zip(b.potentials())
        .map(|(x, y)| (&(u * x) * &ud).distance(y))
        .fold(0.0, f64::max)
}

/// Basis of the intertwiner space `{X : B_i X = X A_i}` over the real-flagged
/// indices, as column-stacked vectors.
fn intertwiner_basis(a: &GaugeConnection, b: &GaugeConnection) -> Option<Vec<DVector<C64>>> {
    let m = a.m();
    let real = a.basis().real_indices();
    if real.is_empty() {
        return None;
    }
    let id = DMatrix::<C64>::identity(m, m);
    let mut k = DMatrix::<C64>::zeros(real.len() * m * m, m * m);
    let mut scale: f64 = 1.0;
    for (r, &i) in real.iter().enumerate() {
        let ai = a.potential_component(i).as_dmatrix();
        let bi = b.potential_component(i).as_dmatrix();
        scale = scale.max(ai.norm()).max(bi.norm());
        // vec(B X − X A) = (I ⊗ B − Aᵀ ⊗ I) vec(X)
        let block = id.kronecker(bi) - ai.transpose().kronecker(&id);
        k.view_mut((r * m * m, 0), (m * m, m * m)).copy_from(&block);
    }
    let svd = k.svd(false, true);
    let v_t = svd.v_t?;
    let null: Vec<DVector<C64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= NULL_TOL * scale)
        .map(|(row, _)| v_t.row(row).adjoint())
        .collect();
    (!null.is_empty()).then_some(null)
}

/// Unitary factor of a random element of the intertwiner space.
fn polar_witness<R: Rng + ?Sized>(null: &[DVector<C64>], m: usize, rng: &mut R) -> Option<CMatrix> {
    let mut x = DVector::<C64>::zeros(m * m);
    for v in null {
        x += v * complex_gaussian(rng);
    }
    let x = DMatrix::from_column_slice(m, m, x.as_slice());
    let svd = x.svd(true, true);
    let (w, v_t) = (svd.u?, svd.v_t?);
    CMatrix::from_dmatrix(w * v_t).ok()
}

/// Decides whether two hermitian connections are gauge equivalent.
///
/// Traces of words in the real-flagged letters are compared first; any
/// difference beyond `tol` settles inequivalence. When every trace agrees, a
/// unitary witness is searched for: the identity first, then the polar
/// factors of up to `trials − 1` random solutions of `B_i X = X A_i`. If none
/// succeeds the pair is reported equivalent on trace agreement alone.
pub fn decide_gauge_equivalence(
    a: &GaugeConnection,
    b: &GaugeConnection,
    max_degree: usize,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<EquivalenceVerdict> {
    if a.m() != b.m() || a.n() != b.n() || a.basis().dim() != b.basis().dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("m={}, n={}, d={}", a.m(), a.n(), a.basis().dim()),
            found: format!("m={}, n={}, d={}", b.m(), b.n(), b.basis().dim()),
        });
    }
    let same_basis = a
        .basis()
        .theta_mats()
        .iter()
        .zip(b.basis().theta_mats())
        .all(|(x, y)| x.distance(y) <= 1e-10 * x.frobenius_norm().max(1.0));
    if !same_basis {
        return Err(Error::InvalidArgument(
            "connections are defined over different Lie bases".into(),
        ));
    }
    for conn in [a, b] {
        if let Some(index) = first_non_antihermitian(conn, crate::linalg::DEFAULT_TOL) {
            return Err(Error::NotHermitianConnection { index });
        }
    }
    if max_degree == 0 {
        return Err(Error::InvalidArgument(
            "max_degree must be at least 1".into(),
        ));
    }

    let cmp = compare_traces(a, b, max_degree, tol);
    if cmp.separating.is_some() {
        return Ok(EquivalenceVerdict {
            equivalent: false,
            witness: None,
            witness_residual: None,
            trace_agreement_only: false,
            max_trace_gap: cmp.max_gap,
            separating_word: cmp.separating,
            words_compared: cmp.compared,
            trials_used: 0,
        });
    }

    let scale = a
        .potentials()
        .iter()
        .map(CMatrix::frobenius_norm)
        .fold(1.0, f64::max);
    let accept = |u: CMatrix, trials_used: usize| {
        let residual = conjugation_residual(&u, a, b);
        (residual <= tol * scale).then_some(EquivalenceVerdict {
            equivalent: true,
            witness: Some(u),
            witness_residual: Some(residual),
            trace_agreement_only: false,
            max_trace_gap: cmp.max_gap,
            separating_word: None,
            words_compared: cmp.compared,
            trials_used,
        })
    };

    if trials > 0 {
        if let Some(v) = accept(CMatrix::identity(a.m()), 1) {
            return Ok(v);
        }
    }
    if trials > 1 {
        if let Some(null) = intertwiner_basis(a, b) {
            let mut rng = seeded_rng(seed);
            for trial in 1..trials {
                if let Some(v) =
                    polar_witness(&null, a.m(), &mut rng).and_then(|u| accept(u, trial + 1))
                {
                    return Ok(v);
                }
            }
        }
    }
    Ok(EquivalenceVerdict {
        equivalent: true,
        witness: None,
        witness_residual: None,
        trace_agreement_only: true,
        max_trace_gap: cmp.max_gap,
        separating_word: None,
        words_compared: cmp.compared,
        trials_used: trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::calculus::{apply_derivation, build_lie_basis, AlgebraContext};
    use crate::connection::gauge_transform;
    use crate::linalg::{haar_unitary, random_antihermitian, random_matrix, ZERO};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli() -> [CMatrix; 3] {
        [
            CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
            CMatrix::from_row_major(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap(),
            CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap(),
        ]
    }

    fn su2_half() -> Arc<LieBasis> {
        let mats: Vec<CMatrix> = pauli().iter().map(|s| s.scale(c(0.0, -0.5))).collect();
        Arc::new(build_lie_basis(AlgebraContext::new(2).unwrap(), &mats).unwrap())
    }

    fn flat_half() -> GaugeConnection {
        let b = su2_half();
        let pots = b.theta_mats().to_vec();
        GaugeConnection::new(b, 2, pots).unwrap()
    }

    fn random_hermitian_conn(basis: &Arc<LieBasis>, m: usize, seed: u64) -> GaugeConnection {
        let mut rng = seeded_rng(seed);
        let pots = (0..basis.dim())
            .map(|_| random_antihermitian(m, &mut rng))
            .collect();
        GaugeConnection::new(basis.clone(), m, pots).unwrap()
    }

    /// Power series of `e^{τθ} a e^{−τθ}` in τ: Σ_k τ^k/k! ad_θ^k(a).
    fn flow_series(theta: &CMatrix, a: &CMatrix, tau: f64, order: usize) -> CMatrix {
        let mut term = a.clone();
        let mut sum = a.clone();
        for k in 1..=order {
            term = theta.commutator(&term).scale_real(tau / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn flow_examples() {
        let b = su2_half();
        let s1 = pauli()[0].clone();
        let x = DerivationVector::unit(3, 2);
        assert_eq!(automorphism_flow(&b, &x, 0.0, &s1).unwrap(), s1);
        for tau in [0.1, 0.4, 0.8] {
            let oracle = flow_series(b.theta(2), &s1, tau, 12);
            let want = &s1.scale_real(tau.cos()) + &pauli()[1].scale_real(tau.sin());
            assert!(oracle.distance(&want) < 1e-9);
            assert!(
                automorphism_flow(&b, &x, tau, &s1)
                    .unwrap()
                    .distance(&oracle)
                    < 1e-9
            );
        }
        let mut rng = seeded_rng(1);
        let a = random_matrix(2, 2, &mut rng);
        let bb = random_matrix(2, 2, &mut rng);
        let xr = DerivationVector::real(&[0.3, 0.9, -0.4]);
        let lhs = automorphism_flow(&b, &xr, 1.3, &(&a * &bb)).unwrap();
        let rhs = &automorphism_flow(&b, &xr, 1.3, &a).unwrap()
            * &automorphism_flow(&b, &xr, 1.3, &bb).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn guard_is_enforced() {
        let b = su2_half();
        let x = DerivationVector::unit(3, 2);
        let a = CMatrix::identity(2);
        // ‖θ₃‖_F = 1/√2, so τ = 100 gives ≈ 70.7
        assert!(matches!(
            automorphism_flow(&b, &x, 100.0, &a),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(automorphism_flow(&b, &x, f64::NAN, &a).is_err());
    }

    #[test]
    fn transport_examples() {
        let flat = flat_half();
        let mut rng = seeded_rng(2);
        let s = random_matrix(2, 2, &mut rng);
        let x = DerivationVector::real(&[0.5, -0.25, 1.0]);
        assert_eq!(module_transport(&flat, &x, 0.0, &s).unwrap(), s);
        let id = module_transport(&flat, &x, 0.77, &CMatrix::identity(2)).unwrap();
        assert!(id.distance(&CMatrix::identity(2)) < 1e-14);

        let conn = random_hermitian_conn(flat.basis_arc(), 3, 9);
        let s = random_matrix(3, 2, &mut rng);
        let a = random_matrix(2, 2, &mut rng);
        let lhs = module_transport(&conn, &x, 0.6, &(&s * &a)).unwrap();
        let rhs = &module_transport(&conn, &x, 0.6, &s).unwrap()
            * &automorphism_flow(conn.basis(), &x, 0.6, &a).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);

        let endo = transport_endomorphism(&conn, &x, 0.6).unwrap();
        let back = mat_exp(&theta_eval(conn.basis(), &x).unwrap(), -0.6).unwrap();
        assert!(
            (&(&endo * &s) * &back).distance(&module_transport(&conn, &x, 0.6, &s).unwrap())
                < 1e-14
        );
    }

    #[test]
    fn endomorphism_examples() {
        let basis = su2_half();
        let canon = GaugeConnection::canonical(basis.clone(), 3).unwrap();
        let x = DerivationVector::real(&[1.0, 2.0, 3.0]);
        assert_eq!(
            transport_endomorphism(&canon, &x, 1.7).unwrap(),
            CMatrix::identity(3)
        );
        let flat = flat_half();
        let e = transport_endomorphism(&flat, &DerivationVector::unit(3, 2), 1.0).unwrap();
        let want = CMatrix::from_diagonal(&[C64::from_polar(1.0, -0.5), C64::from_polar(1.0, 0.5)])
            .unwrap();
        assert!(e.distance(&want) < 1e-14);
    }

    #[test]
    fn ode_examples() {
        let basis = su2_half();
        let conn = random_hermitian_conn(&basis, 3, 4);
        let s = random_matrix(3, 2, &mut seeded_rng(0));
        let x = DerivationVector::real(&[0.4, 0.2, -0.7]);
        let d = ode_defect(&conn, &x, 0.3, 1e-5, &s).unwrap();
        assert!(d <= 1e-8 * s.frobenius_norm(), "{d}");
        let canon = GaugeConnection::canonical(basis, 3).unwrap();
        assert_eq!(
            ode_defect(&canon, &DerivationVector::zero(3), 0.3, 1e-5, &s).unwrap(),
            0.0
        );
        let ratio = ode_defect(&conn, &x, 0.3, 1e-2, &s).unwrap()
            / ode_defect(&conn, &x, 0.3, 5e-3, &s).unwrap();
        assert!((ratio - 4.0).abs() < 0.8, "{ratio}");
        assert!(ode_defect(&conn, &x, 0.3, 0.0, &s).is_err());
    }

    #[test]
    fn transport_derivative_recovers_covariant_derivative() {
        let basis = su2_half();
        let conn = random_hermitian_conn(&basis, 2, 14);
        let s = random_matrix(2, 2, &mut seeded_rng(3));
        let x = DerivationVector::real(&[1.0, -0.5, 0.25]);
        let h = 1e-5;
        let slope = (&module_transport(&conn, &x, h, &s).unwrap()
            - &module_transport(&conn, &x, -h, &s).unwrap())
            .scale_real(0.5 / h);
        let nabla = covariant_derivative(&conn, &x, &s).unwrap();
        assert!(slope.distance(&nabla) <= 1e-7 * s.frobenius_norm());
        // canonical part alone is the derivation on the unit
        let _ = apply_derivation(&basis, &x, &CMatrix::identity(2)).unwrap();
    }

    #[test]
    fn observable_examples() {
        let basis = su2_half();
        let canon = GaugeConnection::canonical(basis.clone(), 3).unwrap();
        let w = Word::new(
            vec![
                DerivationVector::real(&[0.3, 1.0, 0.0]),
                DerivationVector::unit(3, 1),
            ],
            &basis,
        )
        .unwrap();
        assert!((observable(&canon, &w, 1.0).unwrap() - c(3.0, 0.0)).norm() < 1e-14);
        let flat = flat_half();
        let w3 = Word::from_indices(&[2], &basis).unwrap();
        let v = observable(&flat, &w3, 1.0).unwrap();
        assert!((v.re - 2.0 * 0.5f64.cos()).abs() < 1e-14 && v.im.abs() < 1e-14);
        assert!((v.re - 1.7551651).abs() < 1e-7);
        let w33 = Word::from_indices(&[2, 2], &basis).unwrap();
        let v = observable(&flat, &w33, 1.0).unwrap();
        assert!((v.re - 2.0 * 1f64.cos()).abs() < 1e-14);
        assert!((v.re - 1.0806046).abs() < 1e-7);
    }

    #[test]
    fn word_validation() {
        let basis = su2_half();
        assert!(Word::new(vec![], &basis).is_err());
        assert!(Word::from_indices(&[3], &basis).is_err());
        let complex = Word::new(
            vec![DerivationVector::new(vec![c(0.0, 1.0), ZERO, ZERO])],
            &basis,
        )
        .unwrap();
        assert!(!complex.restricted_to_real());
        assert!(Word::from_indices(&[0, 1], &basis)
            .unwrap()
            .restricted_to_real());
    }

    #[test]
    fn observable_derivative_is_trace_of_potential() {
        let basis = su2_half();
        let conn = random_hermitian_conn(&basis, 3, 8);
        let x = DerivationVector::real(&[0.2, -0.6, 0.9]);
        let w = Word::new(vec![x.clone()], &basis).unwrap();
        let h = 1e-5;
        let slope =
            (observable(&conn, &w, h).unwrap() - observable(&conn, &w, -h).unwrap()) / (2.0 * h);
        assert!((slope - conn.potential(&x).unwrap().trace()).norm() < 1e-6);
    }

    #[test]
    fn monomial_examples() {
        let flat = flat_half();
        let t = trace_monomials(&flat, 3).unwrap();
        assert!((t[&vec![2, 2]] - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((t[&vec![0, 1, 2]] - c(-0.25, 0.0)).norm() < 1e-14);
        // (1,2,0) is a rotation of (0,1,2) and is not stored separately
        assert!(!t.contains_key(&vec![1, 2, 0]));
        // 3 + 6 + 11 necklaces of length 1..3 over 3 letters
        assert_eq!(t.len(), 3 + 6 + 11);
        let zero = GaugeConnection::canonical(flat.basis_arc().clone(), 2).unwrap();
        assert!(trace_monomials(&zero, 4)
            .unwrap()
            .values()
            .all(|v| v.norm() == 0.0));
        assert!(trace_monomials(&zero, 0).is_err());
        assert!(trace_monomials(&zero, 30).is_err());
    }

    #[test]
    fn decide_on_gauge_orbit() {
        let basis = su2_half();
        let a = random_hermitian_conn(&basis, 4, 77);
        let b = gauge_transform(&a, &haar_unitary(4, 78).unwrap()).unwrap();
        let v = decide_gauge_equivalence(&a, &b, default_max_degree(4), 16, 1e-8, 5).unwrap();
        assert!(v.equivalent && !v.trace_agreement_only);
        assert!(v.witness_residual.unwrap() <= 1e-8);
        let back = decide_gauge_equivalence(&b, &a, default_max_degree(4), 16, 1e-8, 5).unwrap();
        assert!(back.equivalent);
    }

    #[test]
    fn decide_flips_sign_of_one_generator() {
        let flat = flat_half();
        let mut pots = flat.potentials().to_vec();
        pots[2] = -&pots[2];
        let b = GaugeConnection::new(flat.basis_arc().clone(), 2, pots).unwrap();
        let v = decide_gauge_equivalence(&flat, &b, 4, 8, 1e-8, 0).unwrap();
        assert!(!v.equivalent);
        let w = v.separating_word.clone().unwrap();
        assert_eq!(w.len(), 3);
        assert!((v.max_trace_gap - 0.5).abs() < 1e-12);
        assert!(
            !decide_gauge_equivalence(&b, &flat, 4, 8, 1e-8, 0)
                .unwrap()
                .equivalent
        );
    }

    #[test]
    fn decide_reflexive() {
        let flat = flat_half();
        let v = decide_gauge_equivalence(&flat, &flat, 4, 8, 1e-8, 0).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.witness.unwrap(), CMatrix::identity(2));
        assert_eq!(v.trials_used, 1);
    }

    #[test]
    fn decide_rejects_bad_input() {
        let basis = su2_half();
        let a = random_hermitian_conn(&basis, 2, 1);
        let b = random_hermitian_conn(&basis, 3, 2);
        assert!(decide_gauge_equivalence(&a, &b, 4, 4, 1e-8, 0).is_err());
        let herm = GaugeConnection::new(basis.clone(), 2, pauli().to_vec()).unwrap();
        assert!(matches!(
            decide_gauge_equivalence(&a, &herm, 4, 4, 1e-8, 0),
            Err(Error::NotHermitianConnection { index: 0 })
        ));
    }

    #[test]
    fn min_rotation_is_canonical() {
        assert_eq!(min_rotation(&[2, 0, 1]), vec![0, 1, 2]);
        assert_eq!(min_rotation(&[1, 0, 1, 0]), vec![0, 1, 0, 1]);
    }
}
