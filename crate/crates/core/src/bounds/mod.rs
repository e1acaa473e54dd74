//! Stand-alone checks of the inequalities behind the solvers' estimates.

mod gronwall;
mod interp;
mod sequences;

pub use gronwall::{blow_up_time, gronwall_closed_form, GronwallValue};
pub use interp::{
    chain_exponents, estimate_constants, interp_inequality_check, random_band_limited_field,
    DomainConstants, InequalityCheck, PLANAR_CRITICAL_EXPONENT, SAFETY_FACTOR,
};
pub use sequences::{
    interp_sequences, small_sequence_bound, InterpMode, InterpSequences, SmallSequence,
};
