pub mod accept;
pub mod cone;
pub mod constants;
pub mod error;
pub mod green;
pub mod interaction;
pub mod ode;
pub mod path;
pub mod quadrature;
pub mod real;
pub mod reports;

pub use error::{Error, Result};
