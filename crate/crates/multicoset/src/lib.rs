//! Design toolkit for periodic nonuniform (multi-coset) sampling of sparse
//! multiband signals.
//!
//! A complex signal bandlimited to `[0, f_max]` whose spectrum lives on a
//! union of known bands `F = ∪ [a_i, b_i]` can be captured below the Nyquist
//! rate by keeping only the base-rate samples `x[n]` with `n ≡ c_i (mod L)`
//! for a small set of coset offsets `C = {c_1 .. c_p} ⊂ {0 .. L−1}`. Slicing
//! `[0, f_max]` into `L` slots, only the `q` slots that intersect `F` carry
//! energy, and for each baseband frequency bin the observed coset spectra are
//! a `p×q` linear mix of the unknown slot spectra. Reconstruction is a
//! pseudo-inverse solve per bin; its noise sensitivity is governed by the
//! condition number of the mixing matrix, which depends only on `(C, k, L)` —
//! so pattern design is a discrete optimization problem over `C`.
//!
//! The crate is organized along that pipeline:
//!
//! - [`spectrum`]: band sets, active-slot index sets, and sampling-rate plans.
//! - [`modulation`]: the mixing (modulation) matrix and its conditioning.
//! - [`search`]: exhaustive, random, and sequential-forward-selection pattern
//!   search, plus histogram statistics over random trials.
//! - [`signal`]: synthetic multiband signals on a finite grid, coset
//!   sampling, and measurement noise.
//! - [`reconstruction`]: observation stacking, per-bin pseudo-inverse solves,
//!   and error/bound reporting.
//! - [`cli`]: the `multicoset` command-line front end.
//!
//! All randomized operations take explicit seeds and are bit-reproducible;
//! no operation reads ambient state.

pub mod cli;
pub mod error;
mod linalg;
pub mod modulation;
pub mod reconstruction;
mod rng;
pub mod search;
pub mod signal;
pub mod spectrum;

pub use error::{Error, Result};
