//! Multi-objective bee-swarm search for feature selection in software
//! product lines.
//!
//! A DIMACS feature model is loaded with [`model_io`], shrunk by constant
//! propagation in [`preprocess`], and searched by [`mobafs`] for products
//! that trade off five objectives (see [`objectives`]). Candidate products
//! are restored to validity by the DPLL-based repair in [`sat`]. Fronts are
//! scored with the indicators in [`metrics`], and [`harness`] runs repeated
//! experiments and the exhaustive oracle for small models.

pub mod configuration;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod mobafs;
pub mod model_io;
pub mod objectives;
pub mod preprocess;
pub mod sat;

pub use configuration::Configuration;
pub use error::{Error, Result};
pub use mobafs::{run, ArchiveEntry, MoveSemantics, RunParams, RunResult};
pub use model_io::{AttributeTable, FeatureAttributes, FeatureModel};
pub use objectives::ObjectiveVector;
pub use preprocess::{preprocess, ReducedModel};
pub use sat::{RepairMode, Solver};
