//! Levi-flat minimal hypersurfaces in the complex space forms of curvature 4R:
//! explicit constructions and independent numerical verification.
//!
//! The numerical kernels in [`numeric`] and the group/metric layer in
//! [`space`] are generic over the scalar; everything above them works in
//! `f64` through the aliases below.

pub mod error;
pub mod export;
pub mod families;
pub mod numeric;
pub mod numgeom;
pub mod report;
pub mod space;
pub mod typeiii;
pub mod weierstrass;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub type CMat3 = numeric::linalg::Mat3<f64>;
pub type Params64 = space::SpaceFormParams<f64>;
pub type AlgebraElement64 = space::AlgebraElement<f64>;
pub type GroupElement64 = space::GroupElement<f64>;
pub type AmbientPoint64 = space::AmbientPoint<f64>;
pub type ChartPoint64 = space::ChartPoint<f64>;
