//! The shared-noise ε-ladder and the checks performed on it.
//!
//! Every level of an [`EpsilonFamily`] is driven by the same noise path on
//! the same grid, so pathwise statements about the regularised family
//! (ordering, bounds, nested nonpositive sets) can be checked node by node.

mod bound;
mod compensator;
mod continuity;
mod export;
mod family;
mod measure;
mod nonneg;


pub use bound::{verify_upper_bound, BoundCertificate};
pub use compensator::{
    compute_compensator, singular_integral, singular_integral_window, CompensatorEstimate,
    SingularIntegral, FLOOR_FRACTION,
};
pub use continuity::{verify_eps_continuity, ContinuityTable};
pub use export::write_family_csv;
pub use family::{
    build_family, build_family_with, check_nesting, EpsilonFamily, EpsilonLadder,
    MonotonicityReport, NestingReport, TOL_MONO,
};
pub use measure::{nonpositive_measure, verify_measure_decay, MeasureDecay};
pub use nonneg::{verify_limit_nonnegativity, NonnegativityCheck};
