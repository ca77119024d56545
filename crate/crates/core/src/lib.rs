//! Stochastic simulation of a two-probe optomechanical ringdown and the
//! spectral pipeline that estimates the amplitude-dependent frequency shift
//! of the oscillator.
//!
//! The crate is organised bottom-up: [`model`] holds scenario parameters and
//! unit conversions, [`dynamics`] integrates the Langevin equations,
//! [`spectra`] turns records into periodograms (and provides closed-form
//! spectra), and [`estimation`] fits the frequency–amplitude law.

// negated comparisons are deliberate: they reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod estimation;
pub mod model;
pub mod spectra;
