//! Scalar wave field coupled to a confined particle: retarded-integral
//! evolution, far-field analysis and damping diagnostics.

pub mod charge_analysis;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod history;
pub mod model;
pub mod quadrature;
pub mod radial;
pub mod scalar;
pub mod vec3;

pub use error::{Error, Result};
pub use scalar::{real, to_f64, Real};
pub use vec3::{Mat3, Vec3};
