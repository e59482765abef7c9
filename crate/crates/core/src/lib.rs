//! Quasilocal energy at null infinity from Bondi–Sachs asymptotic data.
//!
//! The spectral and series layers are generic over [`Real`]; the geometric pipeline
//! runs in `f64` through the aliases below.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bondigeom;
pub mod embed3;
pub mod error;
pub mod lorentz;
pub mod optembed;
pub mod qle;
pub mod rseries;
pub mod s2spectral;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = s2spectral::SphereGrid<f64>;
pub type Field = s2spectral::SphereField<f64>;
pub type Spectrum = s2spectral::HarmonicSpectrum<f64>;
pub type Tangent = s2spectral::TangentField<f64>;
pub type Series = rseries::RadialSeries<f64>;
pub type VecSeries = rseries::VectorSeries<f64>;
pub type TenSeries = rseries::TensorSeries<f64>;
