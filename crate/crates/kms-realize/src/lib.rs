//! Finite-block constructions of group actions and cocycles whose KMS spectrum
//! (the set of inverse temperatures admitting a conformal measure) is a
//! prescribed closed set, together with the numerical certificates that back
//! every identity the constructions use.
//!
//! The crate is `no_std` with `alloc`; floating point transcendental functions
//! come from `libm` so results do not depend on the platform math library.
//! The `std` feature only adds `std::error::Error` integration and threaded
//! word enumeration in [`padic`].

#![no_std]
#![forbid(unsafe_code)]
// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod conformal;
pub mod error;
pub mod exprat;
pub mod growth;
pub mod math;
pub mod padic;
pub mod realizable;
pub mod spectra;
pub mod textfmt;

pub use error::{Error, Result};
