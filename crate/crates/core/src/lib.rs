//! Resurgent residua of simple parabolic germs.
//!
//! The crate computes the Écalle–Voronin invariants of a parabolic germ
//! f(z) = z + 1 - ρ/z + … at infinity in two independent ways: by summing
//! iterated Borel-plane integrals (the residua S_{ω,k}) and by sampling the
//! horn maps built from the Fatou coordinates.

pub mod alien;
pub mod borel;
pub mod error;
pub mod horn;
pub mod numeric;
pub mod series;

pub use error::{Error, Result};
pub use numeric::{Cx, Dd, Qd, Real, Tier};
