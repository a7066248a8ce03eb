//! Closed unitary orbits of normal operators in von Neumann factors.
//!
//! Normal operators are presented by finite spectral data (atoms and
//! uniform blocks in the plane, each carrying a Murray-von Neumann class).
//! Norm-, strong*- and strong-closures of unitary orbits are then decided
//! through the crude multiplicity function `O ↦ [χ_O(h)]`, and a small
//! matrix laboratory computes spectral distances and explicit unitaries.

pub mod corpus;
pub mod dimlat;
pub mod distance;
pub mod dyadic;
pub mod format;
pub mod oracle;
pub mod orbits;
pub mod region;
pub mod selftest;
pub mod specmeas;

pub use dimlat::{Cardinal, DimError, DimValue, FactorType, Flag, ProjClassPair, Trace};
pub use dyadic::{Dyadic, DyadicError, Q};
pub use region::{DyadicPoint, OpenRegion, Rect, RegionError, Segment, SupportSet};
