//! JSON scenario files: algebra size, Lie basis, module size, gauge
//! potential and observable words.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major arrays of
//! rows. Word letters are coefficient arrays over the basis; each coefficient
//! is either a bare real number or an `[re, im]` pair.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{build_lie_basis, AlgebraContext, DerivationVector, LieBasis};
use crate::connection::{first_non_antihermitian, GaugeConnection};
use crate::error::Error;
use crate::linalg::{CMatrix, C64, DEFAULT_TOL};
use crate::transport::Word;

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixRecord = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisRecord {
    pub matrix: MatrixRecord,
    /// Hint that the element is antihermitian (lies in the real form).
    pub real: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    pub fn value(&self) -> C64 {
        match *self {
            Coefficient::Real(re) => C64::new(re, 0.0),
            Coefficient::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub algebra_n: usize,
    pub lie_basis: Vec<BasisRecord>,
    pub module_m: usize,
    pub gauge_potential: Vec<MatrixRecord>,
    #[serde(default)]
    pub words: Vec<Vec<Vec<Coefficient>>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },

    #[error("malformed scenario JSON: {0}")]
    Parse(String),

    #[error("invalid scenario at `{path}`: {source}")]
    Validation {
        path: String,
        #[source]
        source: Error,
    },
}

fn invalid(path: impl Into<String>, source: Error) -> ScenarioError {
    ScenarioError::Validation {
        path: path.into(),
        source,
    }
}

/// Converts a record to a matrix, checking that it is `rows × cols`.
pub fn matrix_from_record(rec: &MatrixRecord, rows: usize, cols: usize) -> Result<CMatrix, Error> {
    if rec.len() != rows || rec.iter().any(|r| r.len() != cols) {
        let found_cols = rec.first().map_or(0, Vec::len);
        return Err(Error::ShapeMismatch {
            expected: format!("{rows}x{cols} matrix"),
            found: if rec.iter().all(|r| r.len() == found_cols) {
                format!("{}x{found_cols}", rec.len())
            } else {
                "ragged rows".into()
            },
        });
    }
    let data = rec
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    CMatrix::from_row_major(rows, cols, data)
}

pub fn matrix_to_record(a: &CMatrix) -> MatrixRecord {
    a.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// A scenario that passed validation, with the objects it describes.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub basis: Arc<LieBasis>,
    pub connection: GaugeConnection,
    pub words: Vec<Word>,
    pub warnings: Vec<String>,
}

impl Scenario {
    /// Assembles a scenario from matrices. Real hints are set from the
    /// matrices themselves.
    pub fn from_parts(
        algebra_n: usize,
        basis: &[CMatrix],
        module_m: usize,
        potential: &[CMatrix],
        words: &[Vec<DerivationVector>],
    ) -> Self {
        let lie_basis = basis
            .iter()
            .map(|t| BasisRecord {
                matrix: matrix_to_record(t),
                real: (t + &t.adjoint()).frobenius_norm()
                    <= DEFAULT_TOL * t.frobenius_norm().max(1.0),
            })
            .collect();
        let words = words
            .iter()
            .map(|w| {
                w.iter()
                    .map(|x| {
                        x.coeffs()
                            .iter()
                            .map(|z| Coefficient::Complex([z.re, z.im]))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            algebra_n,
            lie_basis,
            module_m,
            gauge_potential: potential.iter().map(matrix_to_record).collect(),
            words,
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    /// Builds and checks the Lie basis, connection and words.
    ///
    /// Hermiticity and real-hint mismatches are recorded as warnings, not
    /// errors.
    pub fn validate(&self) -> Result<LoadedScenario, ScenarioError> {
        let n = self.algebra_n;
        let ctx = AlgebraContext::new(n).map_err(|e| invalid("algebra_n", e))?;
        if self.lie_basis.is_empty() {
            return Err(invalid(
                "lie_basis",
                Error::InvalidArgument("at least one basis element is required".into()),
            ));
        }
        let mats = self
            .lie_basis
            .iter()
            .enumerate()
            .map(|(k, r)| {
                matrix_from_record(&r.matrix, n, n)
                    .map_err(|e| invalid(format!("lie_basis[{k}].matrix"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let basis = build_lie_basis(ctx, &mats).map_err(|e| {
            let path = match &e {
                Error::NotTraceless { index, .. } | Error::NotStarClosed { index, .. } => {
                    format!("lie_basis[{index}]")
                }
                Error::NotClosed { i, j, .. } => format!("lie_basis[{i}], lie_basis[{j}]"),
                _ => "lie_basis".into(),
            };
            invalid(path, e)
        })?;
        let basis = Arc::new(basis);
        let d = basis.dim();

        let mut warnings = Vec::new();
        for (k, r) in self.lie_basis.iter().enumerate() {
            if r.real != basis.is_real(k) {
                warnings.push(format!(
                    "lie_basis[{k}].real is {} but the matrix is {}antihermitian",
                    r.real,
                    if basis.is_real(k) { "" } else { "not " }
                ));
            }
        }

        let m = self.module_m;
        if self.gauge_potential.len() != d {
            return Err(invalid(
                "gauge_potential",
                Error::ShapeMismatch {
                    expected: format!("{d} components (one per basis element)"),
                    found: self.gauge_potential.len().to_string(),
                },
            ));
        }
        if m == 0 {
            return Err(invalid(
                "module_m",
                Error::InvalidArgument("module size must be positive".into()),
            ));
        }
        let potentials = self
            .gauge_potential
            .iter()
            .enumerate()
            .map(|(k, r)| {
                matrix_from_record(r, m, m).map_err(|e| invalid(format!("gauge_potential[{k}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let connection = GaugeConnection::new(basis.clone(), m, potentials)
            .map_err(|e| invalid("gauge_potential", e))?;
        if let Some(k) = first_non_antihermitian(&connection, DEFAULT_TOL) {
            warnings.push(format!(
                "connection is not hermitian: gauge_potential[{k}] is not antihermitian on a real basis element"
            ));
        }

        let mut words = Vec::with_capacity(self.words.len());
        for (w, letters) in self.words.iter().enumerate() {
            let mut xs = Vec::with_capacity(letters.len());
            for (l, coeffs) in letters.iter().enumerate() {
                if coeffs.len() != d {
                    return Err(invalid(
                        format!("words[{w}][{l}]"),
                        Error::ShapeMismatch {
                            expected: format!("{d} coefficients"),
                            found: coeffs.len().to_string(),
                        },
                    ));
                }
                let vals: Vec<C64> = coeffs.iter().map(Coefficient::value).collect();
                if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(invalid(
                        format!("words[{w}][{l}]"),
                        Error::InvalidArgument("non-finite coefficient".into()),
                    ));
                }
                xs.push(DerivationVector::new(vals));
            }
            words.push(Word::new(xs, &basis).map_err(|e| invalid(format!("words[{w}]"), e))?);
        }

        Ok(LoadedScenario {
            scenario: self.clone(),
            basis,
            connection,
            words,
            warnings,
        })
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Scenario::from_json(&text)?.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{build_scenario, parse_spin_list};
    use proptest::prelude::*;

    fn spin_half_json() -> String {
        let s = build_scenario("0.5".parse().unwrap(), &parse_spin_list("0.5").unwrap()).unwrap();
        s.to_json()
    }

    #[test]
    fn fuzzy_file_reloads() {
        let loaded = Scenario::from_json(&spin_half_json())
            .unwrap()
            .validate()
            .unwrap();
        assert_eq!((loaded.basis.dim(), loaded.basis.n()), (3, 2));
        assert!(loaded.warnings.is_empty());
        assert_eq!(loaded.words.len(), 3);
    }

    #[test]
    fn traced_basis_names_field() {
        let mut s = Scenario::from_json(&spin_half_json()).unwrap();
        s.lie_basis[0].matrix[0][0][0] += 0.25;
        s.lie_basis[0].matrix[1][1][0] += 0.25;
        match s.validate() {
            Err(ScenarioError::Validation { path, source }) => {
                assert_eq!(path, "lie_basis[0]");
                assert!(matches!(source, Error::NotTraceless { index: 0, .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_words_are_valid() {
        let mut s = Scenario::from_json(&spin_half_json()).unwrap();
        s.words.clear();
        assert!(s.validate().unwrap().words.is_empty());
        let text = s.to_json().replace(",\n  \"words\": []", "");
        assert!(Scenario::from_json(&text).unwrap().words.is_empty());
    }

    #[test]
    fn shape_errors_carry_paths() {
        let base = Scenario::from_json(&spin_half_json()).unwrap();
        let mut s = base.clone();
        s.gauge_potential.pop();
        assert!(
            matches!(s.validate(), Err(ScenarioError::Validation { path, .. }) if path == "gauge_potential")
        );
        let mut s = base.clone();
        s.gauge_potential[1][0].pop();
        assert!(
            matches!(s.validate(), Err(ScenarioError::Validation { path, .. }) if path == "gauge_potential[1]")
        );
        let mut s = base.clone();
        s.words[2][1].pop();
        assert!(
            matches!(s.validate(), Err(ScenarioError::Validation { path, .. }) if path == "words[2][1]")
        );
        let mut s = base.clone();
        s.lie_basis[2].matrix.pop();
        assert!(
            matches!(s.validate(), Err(ScenarioError::Validation { path, .. }) if path == "lie_basis[2].matrix")
        );
        let mut s = base;
        s.lie_basis[2] = s.lie_basis[0].clone();
        assert!(
            matches!(s.validate(), Err(ScenarioError::Validation { path, .. }) if path == "lie_basis")
        );
    }

    #[test]
    fn hints_and_hermiticity_warn() {
        let mut s = Scenario::from_json(&spin_half_json()).unwrap();
        s.lie_basis[1].real = false;
        s.gauge_potential[0][0][0] = [1.0, 0.0];
        s.gauge_potential[0][1][1] = [-1.0, 0.0];
        let loaded = s.validate().unwrap();
        assert_eq!(loaded.warnings.len(), 2);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            Scenario::from_json("{"),
            Err(ScenarioError::Parse(_))
        ));
        assert!(matches!(
            Scenario::from_json("{\"algebra_n\": 2}"),
            Err(ScenarioError::Parse(_))
        ));
        assert!(matches!(
            load_scenario("/nonexistent/scenario.json"),
            Err(ScenarioError::Io { .. })
        ));
    }

    #[test]
    fn mixed_coefficients_parse() {
        let mut s = Scenario::from_json(&spin_half_json()).unwrap();
        s.words = vec![vec![vec![
            Coefficient::Real(0.5),
            Coefficient::Complex([1.0, 0.0]),
            Coefficient::Real(0.0),
        ]]];
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(back.validate().unwrap().words[0].restricted_to_real());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
            Just(0.0),
            Just(-0.0),
            Just(f64::MIN_POSITIVE),
            Just(5e-324),
        ]
    }

    fn record(rows: usize, cols: usize) -> impl Strategy<Value = MatrixRecord> {
        prop::collection::vec(prop::collection::vec([finite(), finite()], cols), rows)
    }

    prop_compose! {
        fn scenario()(n in 1usize..4, m in 1usize..4, d in 1usize..4)(
            lie in prop::collection::vec((record(n, n), any::<bool>()), d),
            pot in prop::collection::vec(record(m, m), d),
            words in prop::collection::vec(prop::collection::vec(prop::collection::vec(
                prop_oneof![finite().prop_map(Coefficient::Real), [finite(), finite()].prop_map(Coefficient::Complex)], d), 1..3), 0..3),
            meta in prop::collection::btree_map("[a-z]{1,6}", ".{0,12}", 0..3),
            n in Just(n), m in Just(m),
        ) -> Scenario {
            Scenario {
                algebra_n: n,
                lie_basis: lie.into_iter().map(|(matrix, real)| BasisRecord { matrix, real }).collect(),
                module_m: m,
                gauge_potential: pot,
                words,
                metadata: meta,
            }
        }
    }

    fn bits(s: &Scenario) -> Vec<u64> {
        let mut out = Vec::new();
        for r in &s.lie_basis {
            out.extend(r.matrix.iter().flatten().flatten().map(|x| x.to_bits()));
        }
        for r in &s.gauge_potential {
            out.extend(r.iter().flatten().flatten().map(|x| x.to_bits()));
        }
        for c in s.words.iter().flatten().flatten() {
            match c {
                Coefficient::Real(x) => out.push(x.to_bits()),
                Coefficient::Complex([a, b]) => out.extend([a.to_bits(), b.to_bits()]),
            }
        }
        out
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(s in scenario()) {
            let back = Scenario::from_json(&s.to_json()).unwrap();
            prop_assert_eq!(bits(&back), bits(&s));
            prop_assert_eq!(&back.metadata, &s.metadata);
            prop_assert_eq!(back.to_json(), s.to_json());
        }
    }
}
