//! Matrix factorizations, Weyl-indexed charts on the real flag manifold,
//! the Toda and symmetrization flows, and numerical checks of how the
//! charts linearize the Toda flow.

pub mod analysis;
pub mod atlas;
pub mod error;
pub mod factorizations;
pub mod flows;
pub mod linalg;
pub mod sampling;
pub mod weyl;

pub use error::{Error, Result};
pub use linalg::{Spectrum, SquareMatrix};
pub use weyl::{Permutation, Profile};
