//! Epsilon support vector regression.
//!
//! The dual is solved in the standard doubled form: for `n` training points
//! there are `2n` variables `a`, with `a[i]` and `a[i + n]` the upper and
//! lower tube multipliers of point `i`. The regression coefficient of point
//! `i` is `a[i] - a[i + n]`, boxed to `[-C, C]` and summing to zero.

mod cache;
mod kernel;
mod model;
mod smo;

pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use model::{load_model, save_model, SupportVector, SvrModel, MODEL_VERSION};
pub use smo::{dual_objective, fit, train, train_detailed, SvrHyperParams, TrainSummary};
