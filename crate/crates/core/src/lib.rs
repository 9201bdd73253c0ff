//! Compile pointwise density estimators into piecewise polynomial
//! surrogates whose query time does not depend on the sample count.
//!
//! A kernel density estimate over `n` points costs `Θ(n·d)` per
//! evaluation. For densities with Hölder smoothness `beta` this is waste:
//! one pass of `m^d · M` estimator evaluations at structured mesh points
//! (with `m ≈ n^{1/(2beta+d)}` cells per axis and `M = C(ell+d, d)` lattice
//! nodes per cell, `ell` the largest integer below `beta`) pins down a
//! piecewise polynomial that is statistically as accurate as the estimator
//! itself, evaluable in time depending only on `(ell, d)`, and storable in
//! a compact sequence of fixed-point values.
//!
//! The pieces:
//!
//! - [`lattice`]: principal interpolation lattices on the unit simplex,
//!   explicit Lagrange bases, and conditioning diagnostics.
//! - [`holder`]: smoothness classes, their derived constants, and
//!   synthetic densities with certified smoothness for ground-truth work.
//! - [`kde`]: the baseline kernel density estimator (deliberately the
//!   honest linear-scan version), higher-order kernels, and an empirical
//!   check of its sub-Gaussian error tails.
//! - [`interp`]: the compiled surrogate: grid geometry, build, query, and
//!   a checksummed binary file format.
//! - [`entropy`]: covering nets for the same smoothness balls, built by
//!   quantizing mesh values; gives constructive capacity bounds.
//! - [`seed`]: counter-derived RNG streams so every experiment is
//!   reproducible from one master seed.

pub mod entropy;
pub mod holder;
pub mod interp;
pub mod kde;
pub mod lattice;
pub mod seed;

pub use entropy::{EntropyError, NetSpec};
pub use holder::{DensityError, DensityKind, HolderSpec, SmoothFn, SyntheticDensity};
pub use interp::{
    choose_bandwidth, default_precision, BuildConfig, GridGeometry, InterpError,
    PiecewiseInterpolant, Provenance,
};
pub use kde::{KdeError, KdeModel, Kernel, TailCheckConfig, TailReport};
pub use lattice::{LatticeError, MultiIndex, PrincipalLattice, Vandermonde};
pub use seed::stream_seed;
