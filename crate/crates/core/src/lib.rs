//! Character placement for row/column scanning switch keyboards.
//!
//! The cursor steps through rows, then through the keys of the selected row,
//! every `D` seconds. Given a text corpus and a model of how often the user
//! mistimes the switch, [`solver::solve_exact`] finds the placement with the
//! lowest expected entry time per character whose expected error rate stays
//! within a budget `epsilon`.
//!
//! The numeric modules are generic over [`Real`]; the aliases below fix the
//! scalar to `f64`.

// `!(x > 0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error_model;
pub mod format;
pub mod layout;
pub mod scalar;
pub mod solver;
pub mod synth;

pub use corpus::{CharacterFrequencies, CharacterInventory, Glyph, KeyIndex, UnknownPolicy};
pub use format::FormatError;
pub use layout::{Assignment, FixedAssignment, KeyboardSpec, Position};
pub use scalar::Real;
pub use solver::SolveStatus;

pub type GammaParams = error_model::GammaParams<f64>;
pub type ErrorTable = error_model::ErrorTable<f64>;
pub type CategoryProbs = error_model::CategoryProbs<f64>;
pub type TimingObservations = error_model::TimingObservations<f64>;
pub type RawTimingSamples = error_model::RawTimingSamples<f64>;
pub type FitReport = error_model::FitReport<f64>;
pub type CursorConfig = layout::CursorConfig<f64>;
pub type LayoutMetrics = layout::LayoutMetrics<f64>;
pub type Instance = solver::Instance<f64>;
pub type OptResult = solver::OptResult<f64>;
