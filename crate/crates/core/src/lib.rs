pub mod config;
pub mod error;
pub mod mc;
pub mod optics;
pub mod pipeline;
pub mod quantum;
pub mod tdc;
pub mod tomography;

pub use error::{Error, Result};
