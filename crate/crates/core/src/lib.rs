pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod methods;
pub mod segmentation;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
