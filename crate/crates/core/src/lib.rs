//! Exact differential and Walsh analysis of power mappings over GF(2^n),
//! with step-by-step replays of the differential-uniformity and
//! nonlinearity arguments for `x^(2^(2k) + 2^k + 1)` on GF(2^(4k)).

pub mod catalog;
pub mod field;
pub mod linearized;
pub mod report;
pub mod spectra;
pub mod theorem_lab;

pub use field::{Elem, FieldError, FieldSpec, SubfieldTower};
pub use linearized::{solve_linearized, LinearizedPoly};
pub use spectra::{build_lut, classify, FunctionTable, SpectrumSummary, SweepConfig};
