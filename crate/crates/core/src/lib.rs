//! Exact machinery for counting the linear regions of ReLU convolutional
//! networks.
//!
//! A one-layer ReLU CNN cuts its input space into affinely-linear pieces; the
//! number of such pieces is a closed-form sum of binomial products over a
//! coverage-constrained set of integer tuples. This crate computes that count
//! exactly, together with multi-layer lower/upper bounds, the polynomial the
//! count traces as the number of filters grows, and an independent oracle
//! that counts the regions of the induced hyperplane arrangement directly
//! over exact rational arithmetic.
//!
//! Module map:
//!
//! * [`arch`] — architecture shapes, validation, parameter counts, and
//!   composition of consecutive linear convolutional layers.
//! * [`coverage`] — receptive-field families, their coverage rank function,
//!   and enumeration of the feasible tuple set that drives the closed form.
//! * [`counting`] — exact region counts, count polynomials, asymptotic
//!   degree, and the classic fully-connected one-layer count.
//! * [`bounds`] — naive, multi-layer, and fully-connected region bounds plus
//!   expressivity (regions-per-parameter) comparisons.
//! * [`tensor`] — exact rational tensors, convolution forward passes, and
//!   weight folding for layer composition.
//! * [`linalg`] — incremental exact Gaussian elimination (rank and
//!   consistency of rational linear systems).
//! * [`oracle`] — hyperplane arrangements with rational data and an exact
//!   region counter used to cross-validate the closed form.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! only forwards to the arithmetic dependencies. All arithmetic that affects
//! results is arbitrary-precision integer or rational — no floating point.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod arch;
pub mod bounds;
pub mod counting;
pub mod coverage;
pub mod linalg;
pub mod oracle;
pub mod tensor;

pub use arch::{Architecture, Dims, LayerSpec};
pub use bounds::arch_bounds;
pub use counting::{exact_region_count, fc_region_count, region_polynomial, CountValue};
pub use oracle::count_regions;
