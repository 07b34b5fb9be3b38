pub mod error;
pub mod fields;
pub mod geomodels;
pub mod kahlerlab;
pub mod monitor;
pub mod spherelab;
pub mod symfun;
pub mod toruslab;

pub use error::{Error, Result};
