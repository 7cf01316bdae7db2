//! Random model generation and the verification suites.

pub mod gen;
pub mod suites;

pub use gen::{gen_model, ModelGenParams};
pub use suites::{run_suite, run_suites, Case, Disagreement, ModelOutcome, SuiteId, TheoremReport};
