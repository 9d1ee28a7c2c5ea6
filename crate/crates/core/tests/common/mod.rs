#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use fuzzy_holonomy::calculus::{
    build_lie_basis, increasing_tuples, AlgebraContext, DifferentialForm, LieBasis,
};
use fuzzy_holonomy::connection::GaugeConnection;
use fuzzy_holonomy::fuzzy::{spin_basis, spin_matrices, SpinLabel};
use fuzzy_holonomy::linalg::{
    haar_unitary_from, random_antihermitian, random_matrix, CMatrix, C64,
};
use rand::Rng;

pub fn spin(s: &str) -> SpinLabel {
    s.parse().unwrap()
}

pub fn basis(j: &str) -> Arc<LieBasis> {
    Arc::new(spin_basis(spin(j)).unwrap())
}

/// Spin-j generators conjugated by a Haar unitary and rescaled so that the
/// largest has Frobenius norm `norm`.
pub fn rotated_basis<R: Rng>(j: &str, norm: f64, rng: &mut R) -> Arc<LieBasis> {
    let mats = spin_matrices(spin(j));
    let n = mats[0].rows();
    let u = haar_unitary_from(n, rng).unwrap();
    let big = mats.iter().map(CMatrix::frobenius_norm).fold(0.0, f64::max);
    let rot: Vec<CMatrix> = mats
        .iter()
        .map(|t| (&(&u * t) * &u.adjoint()).scale_real(norm / big))
        .collect();
    Arc::new(build_lie_basis(AlgebraContext::new(n).unwrap(), &rot).unwrap())
}

/// Complex basis `θ₁ ± iθ₂, θ₃` of the spin-j algebra, with a nontrivial
/// involution matrix.
pub fn ladder_basis(j: &str) -> Arc<LieBasis> {
    let [t1, t2, t3] = spin_matrices(spin(j));
    let it2 = t2.scale(C64::new(0.0, 1.0));
    let mats = [&t1 + &it2, &t1 - &it2, t3];
    Arc::new(build_lie_basis(AlgebraContext::new(mats[0].rows()).unwrap(), &mats).unwrap())
}

/// Random (generally curved) hermitian connection with `‖B_i‖_F = norm`.
pub fn random_connection<R: Rng>(
    basis: &Arc<LieBasis>,
    m: usize,
    norm: f64,
    rng: &mut R,
) -> GaugeConnection {
    let pots = (0..basis.dim())
        .map(|_| {
            let b = random_antihermitian(m, rng);
            let f = b.frobenius_norm();
            b.scale_real(norm / f)
        })
        .collect();
    GaugeConnection::new(basis.clone(), m, pots).unwrap()
}

pub fn random_form<R: Rng>(basis: &LieBasis, degree: usize, rng: &mut R) -> DifferentialForm {
    let n = basis.n();
    let comps: BTreeMap<Vec<usize>, CMatrix> = increasing_tuples(basis.dim(), degree)
        .into_iter()
        .map(|k| (k, random_matrix(n, n, rng)))
        .collect();
    DifferentialForm::from_components(basis, degree, comps).unwrap()
}
