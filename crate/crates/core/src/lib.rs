//! Curvature algebra, Gauss-Bonnet integrands, reduced Ricci and Yamabe
//! flows, and conformal scalar-curvature functionals.

pub mod conformal;
pub mod curvature;
pub mod error;
pub mod experiment;
pub mod flows;
pub mod gauss_bonnet;
pub mod models;
pub mod pinching;

pub use error::{Error, Result};
