pub mod cli;
pub mod contour;
pub mod scattering;
pub mod error;
pub mod modulation;
pub mod oracle;
pub mod phase;
pub mod specfun;
pub mod wavefield;

pub use error::{Error, Result};
