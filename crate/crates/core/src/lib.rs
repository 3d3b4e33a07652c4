pub mod cli;
pub mod error;
pub mod gammaratios;
pub mod numkernel;
pub mod premium;
pub mod quadrature;
pub mod symfunc;
pub mod tpcheck;
pub mod weights;

pub use error::{Error, Result};
