//! Focusing NLS with a delta potential at the origin, solved by Bäcklund
//! extension to the whole line and inverse scattering.

// `!(a > b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod backlund;
pub mod darboux;
pub mod data;
pub mod error;
pub mod grid;
pub mod initial;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod parabolic;
pub mod pde_oracle;
pub mod quadrature;
pub mod special;
pub mod spectral_data;
pub mod zs_scattering;

pub use data::ScatteringData;
pub use error::{Error, Result};
pub use grid::{SampledField, SpatialGrid, SpectralGrid};
pub use linalg::{Mat2, Vec2, C64};
