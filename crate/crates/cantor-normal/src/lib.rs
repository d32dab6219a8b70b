//! Exact machinery for Cantor-series digit constructions.
//!
//! A *base sequence* `Q = (q_1, q_2, ...)` with every `q_n >= 2` expands each
//! real `x` in `[0, 1)` as
//!
//! ```text
//! x = E_1/q_1 + E_2/(q_1 q_2) + E_3/(q_1 q_2 q_3) + ...,   0 <= E_n < q_n.
//! ```
//!
//! When the bases grow without bound, one can build explicit points whose
//! digit statistics are extremely lopsided (for instance, the digit `1` never
//! appears) yet whose orbit under the base maps `x -> q_1...q_n * x mod 1`
//! equidistributes. This crate implements that construction end to end, with
//! exact rational arithmetic everywhere a float would be a leap of faith:
//!
//! - [`sequences`] — base-sequence families (`ref2`, `poly`, `slow`, `geom`,
//!   `tower`, `qalpha`, `table`), growth thresholds, and partial sums;
//! - [`ladder`] — the block ladder: how many boxes of each length to lay
//!   down so that box lengths grow in step with the bases, plus the
//!   position/box-index bijection;
//! - [`construction`] — admissible digit windows, selection policies, exact
//!   convergents, perturbation, and the forbidden gap intervals;
//! - [`discrepancy`] — exact star discrepancy, almost-arithmetic
//!   progressions, and the shrinking region envelopes;
//! - [`dimension`] — box-counting and Hausdorff lower-bound estimators
//!   along the construction's natural covering scales.
//!
//! Everything observable is deterministic: the `random` digit policy is a
//! keyed counter-based generator, so runs are reproducible byte for byte.
//!
//! ```
//! use cantor_normal::{BasicSequence, DigitStream, Ladder, SelectionPolicy};
//!
//! let seq = BasicSequence::parse("ref2").unwrap();
//! let mut stream = DigitStream::new(Ladder::new(seq), SelectionPolicy::Min);
//! assert_eq!(stream.prefix(5).unwrap()[2].to_string(), "7");
//! assert_eq!(stream.value(5).unwrap().to_string(), "623/25600");
//! ```

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod cli;
pub mod construction;
pub mod dimension;
pub mod discrepancy;
pub mod ladder;
mod numeric;
pub mod sequences;

pub use construction::{
    digit_window, gap_interval, log_window_width, metric_distance, tail_map, validate_prefix,
    ConstructionError, DigitStream, DigitWindow, GapInterval, PerturbCase, PerturbReport,
    Proximity, SelectionPolicy, ValidationReport,
};
pub use dimension::{
    box_ratio, growth_diagnostics, hausdorff_lower_closed_form, hausdorff_lower_general,
    level_table, DimensionError, GrowthRow, LevelRow, LevelTable,
};
pub use discrepancy::{
    aap_disc_bound, aap_feasible, box_check, checkpoints, concat_bound_check, envelope_rows,
    eps_bar, star_discrepancy, AapWitness, DiscrepancyError, EnvelopeRow, PointSet,
};
pub use ladder::{BoxIndex, Ladder, LadderError, PositionSplit};
pub use numeric::LogMag;
pub use sequences::{BasicSequence, SequenceError};

/// Exact rational number: always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Unsigned big integer (digit values, base products).
pub type Natural = num_bigint::BigUint;
