//! Numerical laboratory for weighted fractional Sobolev spaces: exponent
//! algebra, singular-weight quadrature, Gagliardo seminorms, decreasing
//! rearrangements and Lorentz quasi-norms, mollifier approximation pipelines,
//! and an executable harness for the inequalities connecting them.

pub mod error;
pub mod functions;
pub mod mollify;
pub mod norms;
pub mod params;
pub mod quadrature;
pub mod rearrange;
pub mod verify;

pub use error::{Error, Result};
pub use functions::{catalog, scale, CatalogEntry, Smoothness, TestFunction};
pub use params::{ckn_admissible, critical_exponent, lorentz_target, unit_ball_volume, CknParams, Params};
pub use quadrature::{Estimate, McConfig, Method};
