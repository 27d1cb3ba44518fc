//! Numerical building blocks shared by the quasi-classical path.

pub mod quadrature;
pub mod roots;

pub use quadrature::{integrate, integrate_sine_substituted, Integral, QuadratureConfig};
pub use roots::{bisect_then_brent, brent, golden_minimize, Root};
