pub mod danse;
pub mod dmwf;
pub mod error;
pub mod filters;
pub mod metrics;
pub mod netsim;
pub mod numerics;
pub mod report;
pub mod scenario;
pub mod scm;
pub mod wola;

pub use error::{Error, Result};
pub use filters::{centralized_mwf, gevd_mwf, Filter, SelectionMatrix};
pub use numerics::{CMatrix, CVector, HermitianMatrix, C64};
pub use scenario::{Duty, ObservabilityPattern, Scenario, ScenarioMode, ScenarioParams, ScmSet};
pub use scm::ScmTracker;
