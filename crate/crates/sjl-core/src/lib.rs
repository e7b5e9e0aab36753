//! Dynamics of 2-generator polynomial semigroups ⟨h₁,h₂⟩ on the Riemann
//! sphere and of the associated i.i.d. random dynamics.
//!
//! The crate is organized around a small set of value types (polynomials,
//! grids, masks, point clouds, scalar fields) and pure operations on them:
//!
//! * [`poly`] — complex polynomial arithmetic and simultaneous root finding;
//! * [`potential`] — Green's functions, Robin constants, escape radii;
//! * [`grid`] — grids, pixel masks, point clouds, scalar fields;
//! * [`julia`] — Julia sets of single maps, semigroup Julia sets via the
//!   backward chaos game, fiber Julia sets;
//! * [`loci`] — classification of a generator pair against the parameter
//!   loci (postcritically bounded, connected/disconnected, hyperbolic,
//!   intersecting, common-quasicircle), the open set condition, kernel Julia
//!   set estimates, boundary-partner construction, parameter scans;
//! * [`randdyn`] — the transition operator, the escape-probability field T,
//!   Takagi-type derivative fields ∂ⁿT/∂pⁿ, minimal sets, stationary-measure
//!   checks, Hölder bounds and estimators;
//! * [`dimension`] — truncated pressure sums, Bowen dimension by bisection,
//!   box-counting dimension;
//! * [`render`] — deterministic PGM/PPM/CSV/JSON writers.
//!
//! All operations are pure functions over immutable values; grid-scale
//! kernels parallelize internally with deterministic, worker-count
//! independent reductions.

pub mod dimension;
pub mod error;
pub mod grid;
pub mod julia;
pub mod loci;
pub mod poly;
pub mod potential;
pub mod presets;
pub mod randdyn;
pub mod render;

pub use error::{Error, Result};
pub use grid::{GridSpec, PixelMask, PointCloud, ScalarField};
pub use poly::{GeneratorPair, Polynomial, Word};
