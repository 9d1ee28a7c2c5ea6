//! Gauge theory on matrix algebras: derivation-based differential calculus
//! on `M_n(ℂ)`, connections on free modules, parallel transport along
//! derivation flows and trace observables, with fuzzy sphere presets.

pub mod calculus;
pub mod connection;
pub mod error;
pub mod fuzzy;
pub mod linalg;
pub mod scenario;
pub mod transport;

pub use calculus::{build_lie_basis, AlgebraContext, DerivationVector, DifferentialForm, LieBasis};
pub use connection::{GaugeConnection, ModuleSpace};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use scenario::{load_scenario, LoadedScenario, Scenario, ScenarioError};
pub use transport::{EquivalenceVerdict, Word};
