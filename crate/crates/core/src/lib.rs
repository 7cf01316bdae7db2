//! Exact-rational engine for No-Unbounded-Profit-with-Bounded-Risk under
//! progressive enlargement of a filtration, on finite probability spaces
//! with discrete time.
//!
//! On a finite space with a finite horizon NUPBR, NA and NFLVR coincide: a
//! strictly positive local martingale deflator is a true martingale and
//! induces an equivalent martingale measure. The engine decides this common
//! condition exactly, with one small linear program per time step and atom.

pub mod deflator;
pub mod error;
pub mod format;
pub mod harness;
pub mod lp;
pub mod measures;
pub mod model;
pub mod nupbr;
pub mod process;
pub mod random_time;
pub mod rational;
pub mod space;

pub use error::{Error, Result};
pub use process::Process;
pub use random_time::{azema, enlarge, AzemaData, RandomTime};
pub use rational::Rational;
pub use space::{Filtration, FiniteProbSpace, Measure, Partition};
pub use nupbr::{nupbr_check, NupbrVerdict, Strategy};
pub use format::ModelFile;
pub use harness::{gen_model, run_suite, ModelGenParams, SuiteId, TheoremReport};
pub use model::Model;
