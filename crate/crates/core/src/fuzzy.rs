//! Fuzzy sphere presets: `A = M_{2j+1}(ℂ)` with `g = su(2)^ℂ` acting through
//! the spin-j representation, and flat connections built from direct sums
//! of spin representations.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::calculus::{build_lie_basis, AlgebraContext, LieBasis};
use crate::connection::{hermiticity_check, GaugeConnection};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, DEFAULT_TOL};
use crate::scenario::{Coefficient, Scenario};
use crate::transport::{
    decide_gauge_equivalence, default_max_degree, observable, EquivalenceVerdict, Word,
};

/// Largest accepted `2j`.
pub const MAX_TWO_J: u32 = 40;

/// Half-integer spin `j = two_j / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinLabel {
    two_j: u32,
}

impl SpinLabel {
    pub fn from_two_j(two_j: u32) -> Result<Self> {
        if two_j > MAX_TWO_J {
            return Err(Error::InvalidArgument(format!(
                "spin {} exceeds the supported maximum {}",
                two_j as f64 / 2.0,
                MAX_TWO_J as f64 / 2.0
            )));
        }
        Ok(Self { two_j })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Representation dimension `2j + 1`.
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_j.is_multiple_of(2) {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}.5", self.two_j / 2)
        }
    }
}

impl FromStr for SpinLabel {
    type Err = Error;

    /// Parses decimals such as `"0"`, `"0.5"`, `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let v: f64 = t
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("`{t}` is not a spin value")))?;
        let twice = 2.0 * v;
        if v.is_nan() || v < 0.0 || twice.fract() != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "spin `{t}` is not a nonnegative multiple of 0.5"
            )));
        }
        if twice > MAX_TWO_J as f64 {
            return Self::from_two_j(u32::MAX);
        }
        Self::from_two_j(twice as u32)
    }
}

/// Parses a comma-separated list of spins, e.g. `"0,0.5,1"`.
pub fn parse_spin_list(s: &str) -> Result<Vec<SpinLabel>> {
    let spins = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(SpinLabel::from_str)
        .collect::<Result<Vec<_>>>()?;
    if spins.is_empty() {
        return Err(Error::InvalidArgument("empty spin list".into()));
    }
    Ok(spins)
}

/// Antihermitian generators `θ_a = −i J_a` of the spin-j representation,
/// satisfying `[θ_a, θ_b] = ε_abc θ_c`.
pub fn spin_matrices(j: SpinLabel) -> [CMatrix; 3] {
    let n = j.dim();
    let jj = j.j();
    // basis |j, q⟩ with q = j − k for k = 0..n
    let q = |k: usize| jj - k as f64;
    let mut jp = vec![C64::new(0.0, 0.0); n * n];
    for k in 1..n {
        // J₊|q⟩ = √(j(j+1) − q(q+1)) |q+1⟩, and |q+1⟩ has index k−1
        let qk = q(k);
        jp[(k - 1) * n + k] = C64::new((jj * (jj + 1.0) - qk * (qk + 1.0)).sqrt(), 0.0);
    }
    let jplus = CMatrix::from_row_major(n, n, jp).expect("finite ladder entries");
    let jminus = jplus.adjoint();
    let neg_i = C64::new(0.0, -1.0);
    let j1 = (&jplus + &jminus).scale_real(0.5);
    let j2 = (&jplus - &jminus).scale(C64::new(0.0, -0.5));
    let j3 = CMatrix::from_diagonal(&(0..n).map(|k| C64::new(q(k), 0.0)).collect::<Vec<_>>())
        .expect("finite diagonal");
    [j1.scale(neg_i), j2.scale(neg_i), j3.scale(neg_i)]
}

/// Validated Lie basis of `su(2)^ℂ` acting on `M_{2j+1}(ℂ)`.
///
/// For `j = 0` the generators vanish and do not form a basis, so an error is
/// returned.
pub fn spin_basis(j: SpinLabel) -> Result<LieBasis> {
    build_lie_basis(AlgebraContext::new(j.dim())?, &spin_matrices(j))
}

/// Block-diagonal direct sum of the spin representations in `spins`.
pub fn block_representation(spins: &[SpinLabel]) -> Result<[CMatrix; 3]> {
    if spins.is_empty() {
        return Err(Error::InvalidArgument("empty spin list".into()));
    }
    let blocks: Vec<[CMatrix; 3]> = spins.iter().map(|&s| spin_matrices(s)).collect();
    let pick = |a: usize| {
        CMatrix::block_diagonal(&blocks.iter().map(|b| b[a].clone()).collect::<Vec<_>>())
    };
    Ok([pick(0), pick(1), pick(2)])
}

/// Flat hermitian connection whose potential is the given representation.
pub fn flat_connection(basis: Arc<LieBasis>, spins: &[SpinLabel]) -> Result<GaugeConnection> {
    let rep = block_representation(spins)?;
    let m = rep[0].rows();
    GaugeConnection::new(basis, m, rep.to_vec())
}

/// Default observable words `(e₃)`, `(e₃,e₃)`, `(e₁,e₂,e₃)` (zero-based).
pub fn default_words() -> Vec<Vec<usize>> {
    vec![vec![2], vec![2, 2], vec![0, 1, 2]]
}

/// Scenario for the fuzzy sphere at spin `j` with a flat connection given by
/// the direct sum of `module_spins`.
pub fn build_scenario(j: SpinLabel, module_spins: &[SpinLabel]) -> Result<Scenario> {
    let basis = spin_matrices(j);
    let rep = block_representation(module_spins)?;
    let spins: Vec<String> = module_spins.iter().map(ToString::to_string).collect();
    let mut scenario = Scenario::from_parts(j.dim(), &basis, rep[0].rows(), &rep, &[]);
    scenario
        .metadata
        .insert("preset".into(), "fuzzy-sphere".into());
    scenario
        .metadata
        .insert("algebra_spin".into(), j.to_string());
    scenario
        .metadata
        .insert("module_spins".into(), spins.join(","));
    scenario.words = default_words()
        .into_iter()
        .map(|w| {
            w.into_iter()
                .map(|i| {
                    (0..3)
                        .map(|k| Coefficient::Real(if k == i { 1.0 } else { 0.0 }))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(scenario)
}

/// Settings for [`gauge_copy_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCopyOptions {
    pub words: Vec<Vec<usize>>,
    pub tau: f64,
    pub max_degree: Option<usize>,
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for GaugeCopyOptions {
    fn default() -> Self {
        Self {
            words: default_words(),
            tau: 1.0,
            max_degree: None,
            trials: 32,
            tol: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSetSummary {
    pub spins: Vec<SpinLabel>,
    pub m: usize,
    pub max_curvature: f64,
    pub hermitian: bool,
    /// One value per entry of the report's word list.
    pub observables: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairVerdict {
    pub first: usize,
    pub second: usize,
    pub verdict: EquivalenceVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCopyReport {
    pub j: SpinLabel,
    pub words: Vec<Vec<usize>>,
    pub sets: Vec<SpinSetSummary>,
    pub verdicts: Vec<PairVerdict>,
}

impl GaugeCopyReport {
    pub fn all_flat(&self, tol: f64) -> bool {
        self.sets.iter().all(|s| s.max_curvature <= tol)
    }

    pub fn any_inequivalent(&self) -> bool {
        self.verdicts.iter().any(|p| !p.verdict.equivalent)
    }
}

/// Flat connections from several spin multisets: curvature, hermiticity,
/// observables and pairwise gauge equivalence verdicts.
pub fn gauge_copy_report(
    j: SpinLabel,
    spin_sets: &[Vec<SpinLabel>],
    options: &GaugeCopyOptions,
) -> Result<GaugeCopyReport> {
    if spin_sets.is_empty() {
        return Err(Error::InvalidArgument("no spin sets given".into()));
    }
    let basis = Arc::new(spin_basis(j)?);
    let conns = spin_sets
        .iter()
        .map(|spins| flat_connection(basis.clone(), spins))
        .collect::<Result<Vec<_>>>()?;
    let m = conns[0].m();
    if let Some((k, c)) = conns.iter().enumerate().find(|(_, c)| c.m() != m) {
        return Err(Error::ShapeMismatch {
            expected: format!("module size m = {m} for every spin set"),
            found: format!("m = {} for set {k}", c.m()),
        });
    }
    let words = options
        .words
        .iter()
        .map(|w| Word::from_indices(w, &basis))
        .collect::<Result<Vec<_>>>()?;

    let mut sets = Vec::with_capacity(conns.len());
    for (spins, conn) in spin_sets.iter().zip(&conns) {
        let observables = words
            .iter()
            .map(|w| observable(conn, w, options.tau))
            .collect::<Result<Vec<_>>>()?;
        sets.push(SpinSetSummary {
            spins: spins.clone(),
            m,
            max_curvature: conn.max_curvature_norm(),
            hermitian: hermiticity_check(conn, DEFAULT_TOL),
            observables,
        });
    }

    let degree = options.max_degree.unwrap_or_else(|| default_max_degree(m));
    let mut verdicts = Vec::new();
    for first in 0..conns.len() {
        for second in (first + 1)..conns.len() {
            let verdict = decide_gauge_equivalence(
                &conns[first],
                &conns[second],
                degree,
                options.trials,
                options.tol,
                options.seed,
            )?;
            verdicts.push(PairVerdict {
                first,
                second,
                verdict,
            });
        }
    }
    Ok(GaugeCopyReport {
        j,
        words: options.words.clone(),
        sets,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::maurer_cartan_defect;
    use crate::connection::{curvature, gauge_transform};
    use crate::linalg::haar_unitary;

    fn spin(s: &str) -> SpinLabel {
        s.parse().unwrap()
    }

    fn spins(s: &str) -> Vec<SpinLabel> {
        parse_spin_list(s).unwrap()
    }

    #[test]
    fn parses_half_integers() {
        assert_eq!(spin("0.5").two_j(), 1);
        assert_eq!(spin("3").two_j(), 6);
        assert_eq!(spin("1.5").to_string(), "1.5");
        assert_eq!(spin("2").to_string(), "2");
        assert!("0.25".parse::<SpinLabel>().is_err());
        assert!("-1".parse::<SpinLabel>().is_err());
        assert!("x".parse::<SpinLabel>().is_err());
        assert!("20.5".parse::<SpinLabel>().is_err());
        assert!(parse_spin_list(" ,").is_err());
    }

    #[test]
    fn spin_half_matches_pauli() {
        let [t1, t2, t3] = spin_matrices(spin("0.5"));
        let h = C64::new(0.0, -0.5);
        let s1 = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
            .unwrap()
            .scale(h);
        let s2 = CMatrix::from_row_major(
            2,
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap()
        .scale(h);
        let s3 = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
            .unwrap()
            .scale(h);
        assert!(t1.distance(&s1) < 1e-15 && t2.distance(&s2) < 1e-15 && t3.distance(&s3) < 1e-15);
    }

    #[test]
    fn spin_one_cartan() {
        let [_, _, t3] = spin_matrices(spin("1"));
        let want =
            CMatrix::from_diagonal(&[C64::new(0.0, -1.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0)])
                .unwrap();
        assert!(t3.distance(&want) < 1e-15);
    }

    #[test]
    fn spin_zero_is_trivial() {
        for t in spin_matrices(spin("0")) {
            assert_eq!(t.shape(), (1, 1));
            assert!(t.is_zero());
        }
        assert!(spin_basis(spin("0")).is_err());
    }

    #[test]
    fn casimir_and_validation() {
        for two_j in 1..=10 {
            let j = SpinLabel::from_two_j(two_j).unwrap();
            let t = spin_matrices(j);
            let cas = &(&(&t[0] * &t[0]) + &(&t[1] * &t[1])) + &(&t[2] * &t[2]);
            let want = CMatrix::identity(j.dim()).scale_real(-j.j() * (j.j() + 1.0));
            assert!(cas.distance(&want) <= 1e-10, "two_j {two_j}");
            let b = spin_basis(j).unwrap();
            assert!(b.real_flags().iter().all(|&f| f));
            assert!(maurer_cartan_defect(&b) <= 1e-10);
        }
    }

    #[test]
    fn scenario_examples() {
        let s = build_scenario(spin("0.5"), &spins("0.5")).unwrap();
        assert_eq!((s.algebra_n, s.module_m), (2, 2));
        let loaded = s.validate().unwrap();
        assert!(
            loaded.connection.potential_distance(
                &GaugeConnection::new(loaded.basis.clone(), 2, loaded.basis.theta_mats().to_vec())
                    .unwrap()
            ) < 1e-15
        );

        let s = build_scenario(spin("0.5"), &spins("0,0")).unwrap();
        let loaded = s.validate().unwrap();
        assert_eq!(loaded.connection.m(), 2);
        assert!(loaded.connection.potentials().iter().all(CMatrix::is_zero));

        let s = build_scenario(spin("1"), &spins("0,1")).unwrap();
        let loaded = s.validate().unwrap();
        assert_eq!(loaded.connection.m(), 4);
        assert!(loaded.connection.max_curvature_norm() < 1e-10);
        assert!(hermiticity_check(&loaded.connection, DEFAULT_TOL));
        assert!(build_scenario(spin("1"), &[]).is_err());
    }

    #[test]
    fn block_connections_are_flat() {
        let basis = Arc::new(spin_basis(spin("1")).unwrap());
        for set in ["0", "0.5", "1,0.5", "2,0,1.5", "3"] {
            let conn = flat_connection(basis.clone(), &spins(set)).unwrap();
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                assert!(
                    curvature(&conn, i, j).unwrap().frobenius_norm() <= 1e-10,
                    "{set}"
                );
            }
            assert!(hermiticity_check(&conn, DEFAULT_TOL));
        }
    }

    #[test]
    fn gauge_copy_spin_half() {
        let r = gauge_copy_report(
            spin("0.5"),
            &[spins("0,0"), spins("0.5")],
            &GaugeCopyOptions::default(),
        )
        .unwrap();
        assert!(r.all_flat(1e-12));
        // diagonal exponential oracle: Tr diag(e^{−i/2}, e^{i/2}) = 2cos(1/2)
        assert!((r.sets[0].observables[0].re - 2.0).abs() < 1e-14);
        assert!((r.sets[1].observables[0].re - 2.0 * 0.5f64.cos()).abs() < 1e-14);
        assert!(r.any_inequivalent());
        assert!(
            r.verdicts[0]
                .verdict
                .separating_word
                .as_ref()
                .unwrap()
                .len()
                <= 3
        );
    }

    #[test]
    fn gauge_copy_spin_one() {
        let r = gauge_copy_report(
            spin("1"),
            &[spins("0,1"), spins("0.5,0.5")],
            &GaugeCopyOptions::default(),
        )
        .unwrap();
        let w0 = 1.0 + (1.0 + 2.0 * 1f64.cos());
        let w1 = 2.0 * 2.0 * 0.5f64.cos();
        assert!((r.sets[0].observables[0].re - w0).abs() < 1e-12);
        assert!((r.sets[1].observables[0].re - w1).abs() < 1e-12);
        assert!(!r.verdicts[0].verdict.equivalent);
    }

    #[test]
    fn equal_multisets_are_equivalent() {
        let r = gauge_copy_report(
            spin("1"),
            &[spins("0,1"), spins("1,0")],
            &GaugeCopyOptions::default(),
        )
        .unwrap();
        let v = &r.verdicts[0].verdict;
        assert!(v.equivalent && v.witness.is_some());

        let basis = Arc::new(spin_basis(spin("0.5")).unwrap());
        let a = flat_connection(basis.clone(), &spins("0.5")).unwrap();
        let b = gauge_transform(&a, &haar_unitary(2, 99).unwrap()).unwrap();
        let v = decide_gauge_equivalence(&a, &b, 4, 16, 1e-8, 3).unwrap();
        assert!(v.equivalent);
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let err = gauge_copy_report(
            spin("0.5"),
            &[spins("0"), spins("0.5")],
            &GaugeCopyOptions::default(),
        );
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
        assert!(gauge_copy_report(spin("0.5"), &[], &GaugeCopyOptions::default()).is_err());
    }
}
