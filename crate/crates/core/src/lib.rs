//! Transductive conformal prediction read as imprecise probability.
//!
//! A conformal transducer over a finite or gridded prediction space gives a
//! plausibility contour `π`. When `sup π = 1` the contour induces a
//! consonant upper probability `Π̄(A) = max_{y ∈ A} π(y)`, its credal set, and
//! imprecise highest density regions, which coincide with the conformal
//! prediction regions `{y : π(y) > α}`.

pub mod bsa;
pub mod credal;
pub mod error;
pub mod harness;
pub mod io;
pub mod outcome;
pub mod possibility;
pub mod region;
pub mod table1;
pub mod transducer;
pub mod value;

pub use error::{Error, Result};
pub use outcome::{Event, FiniteOutcomeSpace, GridOutcomeSpace, OutcomeSpace};
pub use transducer::{Contour, Provenance};
pub use value::{Rational, Value};
