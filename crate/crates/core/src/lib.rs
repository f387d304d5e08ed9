//! Body-mass-index estimation from face embeddings.
//!
//! Loads subject metadata and embedding files, plans person-aware train/test
//! splits, fits an epsilon-SVR, and evaluates it by correlation, by pairwise
//! "who is heavier" comparisons, and by a matched-pair bias audit.

pub mod audit;
pub mod cli;
pub mod domain;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod predictor;
pub mod rng;
pub mod split;
pub mod svr;
pub mod synthetic;

pub use domain::{categorize, compute_bmi, BmiCategory, FaceRecord, Gender, Role};
pub use error::{Error, Result};
pub use ingest::{load_dataset, Dataset};
pub use predictor::Predictor;
pub use rng::SplitMix64;
pub use split::{Protocol, SplitPlan};
pub use svr::{KernelSpec, SvrHyperParams, SvrModel};
