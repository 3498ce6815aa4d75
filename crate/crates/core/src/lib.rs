//! Exactly computable models for sets of finite perimeter.
//!
//! A [`model::SpaceModel`] is a finite complex of measured cells glued along
//! weighted interface atoms. Each atom carries a length weight `h` and a
//! table `theta(k)` giving the boundary density it contributes when exactly
//! `k` of its incident cells belong to a set. The perimeter of a cell set is
//! then a finite sum, exact in rational arithmetic, and every classical
//! statement about perimeters, essential boundaries, indecomposable
//! components, holes, saturations, and BV extreme points becomes a finite
//! computation that can be checked against brute-force oracles.
//!
//! The crate is organised around that pipeline:
//!
//! * [`model`] — cells, atoms, builders (grids, metric graphs, pre-fractal
//!   carpets, strips) and structural audits;
//! * [`set`] / [`function`] — cell sets, perimeters, essential boundaries,
//!   total variation and the coarea machinery;
//! * [`decomp`] — additive splits, decomposition into indecomposable
//!   components, the split sigma-algebra, holes, saturation and simple sets;
//! * [`extreme`] — exact vertex enumeration for the unit total-variation
//!   ball on a finite support, with indicator predictions to compare against;
//! * [`io`] — a canonical on-disk model format plus set/function literals;
//! * [`study`] — the measured trend study on the pre-fractal carpets;
//! * [`verify`] — packaged invariant suites used by the CLI.
//!
//! All public arithmetic is double precision, but every quantity is derived
//! from exact rationals carried by the model, so tests can cross-check any
//! result without tolerance.

pub mod bits;
pub mod config;
pub mod decomp;
pub mod error;
pub mod exact;
pub mod extreme;
pub mod function;
pub mod io;
pub mod model;
pub mod set;
pub mod study;
pub mod verify;

pub use config::Caps;
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
