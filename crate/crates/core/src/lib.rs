pub mod atmosphere;
pub mod beam;
pub mod channel;
pub mod error;
pub mod keyrate;
pub mod optimize;
mod quadrature;
pub mod run;
pub mod rng;
pub mod specfun;
pub mod states;

pub use error::{Error, Result};
