//! Heisenberg-limit diagnostics for Markovian quantum probes: the Lindblad
//! span test, code synthesis and optimization, and error-corrected dynamics.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod code;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod operators;
pub mod optimize;
pub mod presets;
pub mod span;

pub use code::CodePair;
pub use error::{Error, Result};
pub use model::LindbladModel;
