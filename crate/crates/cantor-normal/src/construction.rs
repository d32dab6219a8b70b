//! Digit selection: admissible windows, policies, streams, and the exact
//! values they converge to.
//!
//! At position `n` in box slot `(a, b, c)`, a digit `E` is *admissible* when
//! its unit fraction lands in a `1/(2a^2)`-neighborhood of the slot target:
//!
//! ```text
//! E / q_n  in  [ (c-1)/a - 1/(2a^2),  (c-1)/a + 1/(2a^2) ],
//! ```
//!
//! except slot `c = 1`, which forces `E = 0` (that zero is what pins each
//! box to a common phase, and it is why the digit `1` never appears: slot 1
//! demands `E = 0`, and every later slot aims at a target at least `1/a`
//! away from zero, whose window floor works out above 1). Clearing
//! denominators gives the integer window
//!
//! ```text
//! lo = ceil( q*(2a(c-1) - 1) / (2a^2) ),   hi = floor( q*(2a(c-1) + 1) / (2a^2) ),
//! ```
//!
//! nonempty whenever `q >= 2a^2` — which the ladder guarantees at every
//! position. The window width `omega_n = hi - lo + 1` tracks the interval
//! length `q/a^2`: whenever `c != 1`, the exact sandwich
//! `q - a^2 < a^2 * omega <= q + a^2` holds. (Only that one-sided form is
//! exact — a closed interval of length `L` can hold as few as `floor(L)`
//! integers, so `omega` may fall a fencepost short of `q/a^2` itself;
//! position 437 of the `2n^2` family is a concrete case.)
//!
//! A [`DigitStream`] walks positions in order, picking one admissible digit
//! per position according to a [`SelectionPolicy`]; any such stream, under
//! any policy, yields a point whose base-map orbit equidistributes.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ladder::{BoxIndex, Ladder, LadderError};
use crate::numeric::uniform_below;
use crate::sequences::{BasicSequence, SequenceError};
use crate::{LogMag, Natural, Rational};

/// Errors from digit construction.
#[derive(Debug, Error)]
pub enum ConstructionError {
    /// Ladder failure (thresholds, invalid coordinates).
    #[error(transparent)]
    Ladder(#[from] LadderError),
    /// Base-sequence failure (exact cap, table exhaustion).
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    /// A digit outside `0..q_n` was supplied to a validator or map.
    #[error("digit {digit} at position {n} is outside 0..{q}")]
    DigitOutOfRange {
        /// Position of the offending digit.
        n: u64,
        /// The digit.
        digit: Natural,
        /// The base at that position.
        q: Natural,
    },
    /// An admissible window came out empty: impossible for ladder-consistent
    /// positions, kept as a defense against inconsistent table data.
    #[error("empty digit window at position {n} (base {q} below 2a^2 = {needed})")]
    EmptyWindow {
        /// Position with no admissible digit.
        n: u64,
        /// Base there.
        q: Natural,
        /// The growth the ladder should have guaranteed.
        needed: Natural,
    },
}

/// The admissible digit set at one position: the integers `lo..=hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitWindow {
    /// Position (1-indexed).
    pub n: u64,
    /// Box coordinates of the position.
    pub index: BoxIndex,
    /// Base `q_n`.
    pub q: Natural,
    /// Smallest admissible digit.
    pub lo: Natural,
    /// Largest admissible digit.
    pub hi: Natural,
}

impl DigitWindow {
    /// Number of admissible digits (`omega_n`).
    #[must_use]
    pub fn width(&self) -> Natural {
        &self.hi - &self.lo + 1u32
    }

    /// Whether the window pins the digit to zero (slot `c = 1`).
    #[must_use]
    pub fn forced_zero(&self) -> bool {
        self.index.c == 1
    }

    /// Whether `digit` is admissible here.
    #[must_use]
    pub fn contains(&self, digit: &Natural) -> bool {
        self.lo <= *digit && *digit <= self.hi
    }
}

/// The admissible window at position `n`.
///
/// # Errors
///
/// Propagates ladder/sequence failures; [`ConstructionError::EmptyWindow`]
/// only for ladder-inconsistent table data.
pub fn digit_window(ladder: &Ladder, n: u64) -> Result<DigitWindow, ConstructionError> {
    let index = ladder.box_index(n)?;
    let q = ladder.seq().term(n)?;
    if index.c == 1 {
        return Ok(DigitWindow { n, index, q, lo: BigUint::zero(), hi: BigUint::zero() });
    }
    let BoxIndex { a, c, .. } = index;
    let two_a2 = BigUint::from(2u32) * a * a;
    // lo = ceil(q * (2a(c-1) - 1) / 2a^2); the numerator factor is >= 3
    // whenever c >= 2, so everything stays nonnegative.
    let lo = (&q * (2 * a * (c - 1) - 1)).div_ceil(&two_a2);
    let hi = (&q * (2 * a * (c - 1) + 1)).div_floor(&two_a2);
    if hi < lo {
        return Err(ConstructionError::EmptyWindow { n, q, needed: two_a2 });
    }
    Ok(DigitWindow { n, index, q, lo, hi })
}

/// `ln omega_n` as a magnitude, usable even where the base itself cannot be
/// materialized (then `omega` is estimated by `q/a^2`, exact to far beyond
/// float resolution at such sizes).
///
/// # Errors
///
/// Propagates ladder/sequence failures.
pub fn log_window_width(ladder: &Ladder, n: u64) -> Result<LogMag, ConstructionError> {
    match digit_window(ladder, n) {
        Ok(w) => {
            if w.forced_zero() {
                Ok(LogMag::plain(0.0))
            } else {
                Ok(LogMag::plain(crate::numeric::ln_natural(&w.width())))
            }
        }
        Err(ConstructionError::Sequence(SequenceError::TermTooLarge { .. })) => {
            let index = ladder.box_index(n)?;
            if index.c == 1 {
                return Ok(LogMag::plain(0.0));
            }
            let ln_q = ladder.seq().log_term_mag(n)?;
            let correction = 2.0 * (index.a as f64).ln();
            Ok(if ln_q.depth() == 0 {
                LogMag::plain(ln_q.value() - correction)
            } else {
                ln_q // the a^2 divisor is invisible at nested-exp scale
            })
        }
        Err(e) => Err(e),
    }
}

/// How a stream picks one digit from each admissible window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// Always the smallest admissible digit.
    Min,
    /// Always the largest.
    Max,
    /// The admissible digit nearest the slot target `q(c-1)/a`, ties broken
    /// downward.
    Mid,
    /// Uniform draw from the window, keyed by `(seed, position)` — the same
    /// seed always yields the same stream.
    Random {
        /// Stream key.
        seed: u64,
    },
    /// The digit `lo + (offset mod width)`: a deterministic probe of the
    /// window interior.
    Index {
        /// Offset into the window.
        offset: u64,
    },
}

impl SelectionPolicy {
    /// Parse `"min"`, `"max"`, `"mid"`, `"random:SEED"`, or `"index:K"`.
    ///
    /// # Errors
    ///
    /// A human-readable message for anything else.
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None => match s {
                "min" => Ok(SelectionPolicy::Min),
                "max" => Ok(SelectionPolicy::Max),
                "mid" => Ok(SelectionPolicy::Mid),
                _ => Err(format!("unknown policy {s:?}")),
            },
            Some(("random", seed)) => seed
                .parse()
                .map(|seed| SelectionPolicy::Random { seed })
                .map_err(|_| format!("bad seed in {s:?}")),
            Some(("index", off)) => off
                .parse()
                .map(|offset| SelectionPolicy::Index { offset })
                .map_err(|_| format!("bad offset in {s:?}")),
            Some(_) => Err(format!("unknown policy {s:?}")),
        }
    }

    /// Apply the policy to one window.
    #[must_use]
    pub fn select(&self, window: &DigitWindow) -> Natural {
        if window.forced_zero() {
            return BigUint::zero();
        }
        match self {
            SelectionPolicy::Min => window.lo.clone(),
            SelectionPolicy::Max => window.hi.clone(),
            SelectionPolicy::Mid => {
                let BoxIndex { a, c, .. } = window.index;
                // Nearest integer to q(c-1)/a with ties downward is
                // ceil((2q(c-1) - a) / 2a).
                let num = &window.q * (2 * (c - 1));
                let a2 = BigUint::from(2u32) * a;
                let target = if num >= BigUint::from(a) {
                    (num - a).div_ceil(&a2)
                } else {
                    BigUint::zero()
                };
                target.clamp(window.lo.clone(), window.hi.clone())
            }
            SelectionPolicy::Random { seed } => {
                &window.lo + uniform_below(*seed, window.n, &window.width())
            }
            SelectionPolicy::Index { offset } => {
                &window.lo + BigUint::from(*offset) % window.width()
            }
        }
    }
}

impl std::fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SelectionPolicy::Min => write!(f, "min"),
            SelectionPolicy::Max => write!(f, "max"),
            SelectionPolicy::Mid => write!(f, "mid"),
            SelectionPolicy::Random { seed } => write!(f, "random:{seed}"),
            SelectionPolicy::Index { offset } => write!(f, "index:{offset}"),
        }
    }
}

/// A digit stream: one admissible digit per position, chosen by a fixed
/// policy, with exact convergents.
#[derive(Debug)]
pub struct DigitStream {
    ladder: Ladder,
    policy: SelectionPolicy,
    digits: Vec<Natural>,
}

impl DigitStream {
    /// A stream over `ladder` driven by `policy`.
    #[must_use]
    pub fn new(ladder: Ladder, policy: SelectionPolicy) -> Self {
        DigitStream { ladder, policy, digits: Vec::new() }
    }

    /// The ladder this stream walks.
    #[must_use]
    pub fn ladder(&self) -> &Ladder {
        &self.ladder
    }

    /// The policy in force.
    #[must_use]
    pub fn policy(&self) -> SelectionPolicy {
        self.policy
    }

    fn ensure(&mut self, n: u64) -> Result<(), ConstructionError> {
        while (self.digits.len() as u64) < n {
            let m = self.digits.len() as u64 + 1;
            let window = digit_window(&self.ladder, m)?;
            self.digits.push(self.policy.select(&window));
        }
        Ok(())
    }

    /// The digit `E_n`.
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn digit(&mut self, n: u64) -> Result<Natural, ConstructionError> {
        assert!(n >= 1, "digits are 1-indexed");
        self.ensure(n)?;
        Ok(self.digits[(n - 1) as usize].clone())
    }

    /// The digits `E_1 ..= E_n` as a slice.
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn prefix(&mut self, n: u64) -> Result<&[Natural], ConstructionError> {
        self.ensure(n)?;
        Ok(&self.digits[..n as usize])
    }

    /// The exact `n`-th convergent `sum_{j<=n} E_j / (q_1 ... q_j)`,
    /// assembled by pairwise combination (one final reduction).
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn value(&mut self, n: u64) -> Result<Rational, ConstructionError> {
        if n == 0 {
            return Ok(Rational::zero());
        }
        self.ensure(n)?;
        let (num, den) = self.value_tree(1, n + 1)?;
        Ok(Rational::new(num.into(), den.into()))
    }

    /// Unreduced convergent over positions `lo..hi` (half-open): returns
    /// `(N, D)` with `D = prod q_j` and the segment value `N/D`.
    fn value_tree(&self, lo: u64, hi: u64) -> Result<(Natural, Natural), ConstructionError> {
        if hi - lo == 1 {
            return Ok((
                self.digits[(lo - 1) as usize].clone(),
                self.ladder.seq().term(lo)?,
            ));
        }
        let mid = lo + (hi - lo) / 2;
        let (n1, d1) = self.value_tree(lo, mid)?;
        let (n2, d2) = self.value_tree(mid, hi)?;
        Ok((n1 * &d2 + n2, d1 * d2))
    }

    /// The unit point `E_n / q_n` in `[0, 1)`.
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn unit_point(&mut self, n: u64) -> Result<Rational, ConstructionError> {
        let e = self.digit(n)?;
        let q = self.ladder.seq().term(n)?;
        Ok(Rational::new(e.into(), q.into()))
    }

    /// The unit points `E_1/q_1 ..= E_n/q_n` (the sequence whose
    /// equidistribution is the whole point of the construction).
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn unit_points(&mut self, n: u64) -> Result<Vec<Rational>, ConstructionError> {
        self.ensure(n)?;
        (1..=n).map(|m| self.unit_point(m)).collect()
    }

    /// The `a` unit points of box `(a, b)`, slots `1..=a`.
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn box_points(&mut self, a: u64, b: u64) -> Result<Vec<Rational>, ConstructionError> {
        (1..=a)
            .map(|c| {
                let n = self.ladder.position(BoxIndex { a, b, c })?;
                self.unit_point(n)
            })
            .collect()
    }

    /// Count occurrences of a digit block at consecutive positions within
    /// the first `n` digits.
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn block_census(&mut self, block: &[Natural], n: u64) -> Result<u64, ConstructionError> {
        assert!(!block.is_empty(), "census needs a nonempty block");
        self.ensure(n)?;
        let digits = &self.digits[..n as usize];
        Ok(digits.windows(block.len()).filter(|w| *w == block).count() as u64)
    }

    /// Simple-normality diagnostic for one digit value `b`: the count of
    /// `b` among `E_1..E_n`, the expected mass `sum_{j<=n, q_j > b} 1/q_j`,
    /// and their exact ratio (which tends to 1 for almost every point, and
    /// visibly does not for these streams when `b = 1`).
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn simple_normal_ratio(
        &mut self,
        b: &Natural,
        n: u64,
    ) -> Result<(u64, Rational, Rational), ConstructionError> {
        self.ensure(n)?;
        let count = self.digits[..n as usize].iter().filter(|d| *d == b).count() as u64;
        let mut mass = Rational::zero();
        // For digit values below every base (b < 2) this is the full partial
        // sum; larger b must skip positions with q_j <= b.
        if b < &BigUint::from(2u32) {
            mass = self.ladder.seq().partial_sum(n, 1)?;
        } else {
            for j in 1..=n {
                let q = self.ladder.seq().term(j)?;
                if &q > b {
                    mass += Rational::new(BigInt::one(), q.into());
                }
            }
        }
        let ratio = Rational::from_integer(count.into()) / &mass;
        Ok((count, mass, ratio))
    }

    /// Replace one digit so the resulting point is still admissible but
    /// provably different, staying within `1/(q_1...q_{site-1})` of the
    /// original. The replacement site is the first position at or after `n`
    /// whose window offers a second digit:
    ///
    /// - interior slots (`c != 1`) perturb in place;
    /// - a forced slot inside a longer box (`c = 1 < a`) perturbs the next
    ///   slot;
    /// - a length-1 box (`a = c = 1`) jumps to slot 2 of the first
    ///   length-2 box.
    ///
    /// # Errors
    ///
    /// Propagates window failures.
    pub fn perturb(&mut self, n: u64) -> Result<PerturbReport, ConstructionError> {
        let idx = self.ladder.box_index(n)?;
        let (site, case) = if idx.c != 1 {
            (n, PerturbCase::InteriorSlot)
        } else if idx.a > 1 {
            (n + 1, PerturbCase::NextSlot)
        } else {
            (
                self.ladder.position(BoxIndex { a: 2, b: 1, c: 2 })?,
                PerturbCase::FirstWideBox,
            )
        };
        let window = digit_window(&self.ladder, site)?;
        let original = self.digit(site)?;
        let replacement = if original != window.lo { window.lo.clone() } else { window.hi.clone() };
        debug_assert!(window.contains(&replacement) && replacement != original);
        // All other digits agree, so the difference is exactly
        // |E' - E| / (q_1 ... q_site).
        let product = self.ladder.seq().product(site)?;
        let diff = if replacement > original {
            &replacement - &original
        } else {
            &original - &replacement
        };
        let delta = Rational::new(diff.into(), product.into());
        let bound = Rational::new(
            BigInt::one(),
            if site == 1 { BigInt::one() } else { self.ladder.seq().product(site - 1)?.into() },
        );
        Ok(PerturbReport { n, site, case, original, replacement, delta, bound })
    }
}

/// Which rule [`DigitStream::perturb`] applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PerturbCase {
    /// Changed the digit in place (`c != 1`).
    InteriorSlot,
    /// Changed the next slot of the same box (`c = 1 < a`).
    NextSlot,
    /// Jumped to slot 2 of the first length-2 box (`a = c = 1`).
    FirstWideBox,
}

/// Outcome of [`DigitStream::perturb`].
#[derive(Debug, Clone)]
pub struct PerturbReport {
    /// Position the caller asked to perturb near.
    pub n: u64,
    /// Position actually changed.
    pub site: u64,
    /// Which rule fired.
    pub case: PerturbCase,
    /// Digit before.
    pub original: Natural,
    /// Digit after (admissible, different).
    pub replacement: Natural,
    /// Exact change of the point's value.
    pub delta: Rational,
    /// The promised ceiling `1/(q_1...q_{site-1})`.
    pub bound: Rational,
}

/// Report from [`validate_prefix`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Number of digits checked.
    pub checked: u64,
    /// Violations found (empty means the prefix is admissible).
    pub violations: Vec<DigitViolation>,
}

impl ValidationReport {
    /// Whether every digit sat in its window.
    #[must_use]
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One inadmissible digit.
#[derive(Debug, Clone)]
pub struct DigitViolation {
    /// Position of the violation.
    pub n: u64,
    /// The digit found there.
    pub digit: Natural,
    /// The window it missed.
    pub lo: Natural,
    /// Upper end of the window.
    pub hi: Natural,
}

/// Check a digit prefix for admissibility against a ladder.
///
/// # Errors
///
/// Propagates window failures; [`ConstructionError::DigitOutOfRange`] if a
/// digit is not even a base-`q_n` digit.
pub fn validate_prefix(
    ladder: &Ladder,
    digits: &[Natural],
) -> Result<ValidationReport, ConstructionError> {
    let mut violations = Vec::new();
    for (i, digit) in digits.iter().enumerate() {
        let n = i as u64 + 1;
        let q = ladder.seq().term(n)?;
        if *digit >= q {
            return Err(ConstructionError::DigitOutOfRange { n, digit: digit.clone(), q });
        }
        let w = digit_window(ladder, n)?;
        if !w.contains(digit) {
            violations.push(DigitViolation { n, digit: digit.clone(), lo: w.lo, hi: w.hi });
        }
    }
    Ok(ValidationReport { checked: digits.len() as u64, violations })
}

/// The base-product shift `T_n(x) = q_1 q_2 ... q_n * x  mod 1`, exactly.
///
/// Shifts the expansion left by `n` digits: if `x` has digits
/// `E_1, E_2, ...` then `T_n(x)` has digits `E_{n+1}, E_{n+2}, ...`, so
/// `floor(T_n(x) * q_{n+1}) = E_{n+1}`.
///
/// # Errors
///
/// Propagates term failures; rejects `x` outside `[0, 1)`.
pub fn tail_map(seq: &BasicSequence, x: &Rational, n: u64) -> Result<Rational, ConstructionError> {
    if x.is_negative() || *x >= Rational::one() {
        return Err(ConstructionError::DigitOutOfRange {
            n: 0,
            digit: BigUint::zero(),
            q: BigUint::zero(),
        });
    }
    if n == 0 {
        return Ok(x.clone());
    }
    let scaled = x * Rational::from_integer(seq.product(n)?.into());
    Ok(&scaled - scaled.floor())
}

/// How close two digit prefixes are in the expansion metric.
#[derive(Debug, Clone, PartialEq)]
pub enum Proximity {
    /// The prefixes agree on every compared position.
    AgreesThrough {
        /// Number of positions compared.
        horizon: u64,
    },
    /// First disagreement and the metric value `1/(q_1...q_{zeta-1})`.
    DiffersAt {
        /// First differing position.
        zeta: u64,
        /// The metric value.
        distance: Rational,
    },
}

/// Expansion metric on digit prefixes: `1/(q_1...q_{zeta-1})` where `zeta`
/// is the first disagreement (distance 1 if they differ immediately).
///
/// # Errors
///
/// Propagates term failures.
pub fn metric_distance(
    seq: &BasicSequence,
    a: &[Natural],
    b: &[Natural],
) -> Result<Proximity, ConstructionError> {
    let horizon = a.len().min(b.len()) as u64;
    for i in 0..horizon {
        if a[i as usize] != b[i as usize] {
            let zeta = i + 1;
            let den = if zeta == 1 { BigUint::one() } else { seq.product(zeta - 1)? };
            return Ok(Proximity::DiffersAt { zeta, distance: Rational::new(1.into(), den.into()) });
        }
    }
    Ok(Proximity::AgreesThrough { horizon })
}

/// A subinterval of a digit cylinder that no admissible stream can enter.
#[derive(Debug, Clone, PartialEq)]
pub struct GapInterval {
    /// Number of digits fixed by the cylinder.
    pub n: u64,
    /// Inclusive left end.
    pub lo: Rational,
    /// Exclusive right end (the cylinder's own right end).
    pub hi: Rational,
}

/// Inside the cylinder of any base-digit prefix (each `0 <= E_j < q_j`,
/// admissible or not), the right-hand subinterval
///
/// ```text
/// [ prefix + ((a-1)/a + 3/(4a^2)) / (q_1...q_n),  prefix + 1/(q_1...q_n) )
/// ```
///
/// contains no admissible point, where `a` is the box length at position
/// `n + 1`: the next digit's window tops out well short of the cylinder's
/// right edge, whatever the slot.
///
/// # Errors
///
/// Propagates term failures; rejects non-digits.
pub fn gap_interval(ladder: &Ladder, prefix: &[Natural]) -> Result<GapInterval, ConstructionError> {
    let n = prefix.len() as u64;
    assert!(n >= 1, "gap intervals need at least one fixed digit");
    let mut value = Rational::zero();
    let mut product = BigUint::one();
    for (i, digit) in prefix.iter().enumerate() {
        let q = ladder.seq().term(i as u64 + 1)?;
        if *digit >= q {
            return Err(ConstructionError::DigitOutOfRange {
                n: i as u64 + 1,
                digit: digit.clone(),
                q,
            });
        }
        product *= &q;
        value += Rational::new(digit.clone().into(), product.clone().into());
    }
    let a = ladder.box_index(n + 1)?.a;
    // (a-1)/a + 3/(4a^2) = (4a^2 - 4a + 3) / (4a^2).
    let cut = Rational::new(
        BigInt::from(4 * a * a - 4 * a + 3),
        BigInt::from(4 * a * a),
    );
    let cell = Rational::new(BigInt::one(), BigInt::from(product));
    Ok(GapInterval { n, lo: &value + cut * &cell, hi: value + cell })
}
