//! Symbolic dynamics toolkit for β-shifts and subshifts of finite type with
//! the specification property.
//!
//! The crate covers five areas:
//!
//! * [`shiftspace`]: alphabets, words, languages and padded concatenation;
//! * [`beta`]: β-expansions and Parry admissibility;
//! * [`freqstats`]: block frequencies and iterated Cesàro averages;
//! * [`spectrum`]: the polytope of shift-invariant block-frequency vectors,
//!   rational targets, and the Parry measure;
//! * [`constructor`]: explicit digit streams whose frequency vectors
//!   approach, and oscillate among, prescribed targets.
//!
//! [`format`] holds the plain-text file formats and [`suites`] the named
//! verification suites shared by the command-line front end and the tests.

mod error;

pub mod beta;
pub mod constructor;
pub mod format;
pub mod freqstats;
pub mod shiftspace;
pub mod spectrum;
pub mod suites;

pub use beta::{BetaSystem, CylinderInterval, QuadraticNumber};
pub use error::{Error, ErrorClass, Result};
pub use freqstats::{DenominatorMode, FrequencyVector};
pub use shiftspace::{LanguageSlice, ShiftKind, ShiftSpec, Symbol, Word};
