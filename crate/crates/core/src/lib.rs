//! Power analysis of single-port linear RLC networks under multi-tone
//! excitation in the time-scale domain `t + js`.
//!
//! Signals are exact line spectra ([`spectrum`]), the load is solved per line
//! by modified nodal analysis ([`network`]), and [`power`] builds the
//! instantaneous, classical and scaled quantities together with the active
//! and reactive power balances. [`oracle`] holds independent brute-force
//! checks.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
mod linalg;
pub mod network;
pub mod oracle;
pub mod power;
pub mod spectrum;

pub use error::{Error, Result};
pub use network::{
    driving_point_admittance, solve, solve_frequency, Branch, BranchKind, BranchPhasors, Netlist,
    NetlistSpec, NetworkSolution, Port,
};
pub use power::{
    active_balance, budeanu, classical_summary, instantaneous, instantaneous_balance,
    q_from_stored_energy, reactive_balance, real_imaginary_power, scaled, BalanceReport,
    BalanceResidual, BudeanuReactive, ClassicalSummary, InstantaneousSet, LoadCharacter,
    ScaledQuantities, TimeScaleModel,
};
pub use spectrum::{ComplexTimePoint, LineRecord, LineSpectrum, SampledSignal, SpectralLine, Unit};

pub use num_complex::Complex64;
