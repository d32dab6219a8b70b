//! Base-sequence families.
//!
//! A *base sequence* is an integer sequence `q_1, q_2, ...` with every
//! `q_n >= 2`; it plays the role that a single base `b` plays in ordinary
//! positional notation. The crate ships several built-in families:
//!
//! | family        | definition                                               |
//! |---------------|----------------------------------------------------------|
//! | `ref2`        | `q_n = 2n^2` (the reference quadratic family)            |
//! | `poly:L,T`    | `q_n = max(2, ceil(L * n^T))`, rational `L > 0`, `T >= 1`|
//! | `slow:S`      | `q_n = 2 * ceil(n/S)^2` (quadratic with an `S`-fold delay)|
//! | `geom:T`      | `q_n = T^n`, integer `T >= 2`                            |
//! | `tower`       | `q_1 = 2`, `q_{n+1} = 2^(q_n)`                           |
//! | `qalpha:A/B`  | see below; dimension dial `alpha = A/B` in `(0, 1)`      |
//! | `table:PATH`  | explicit terms from a whitespace-separated file          |
//!
//! The `qalpha` family interleaves the quadratic floor `2n^2` with
//! occasional huge terms: at positions `n = tau(k)` for even `k` (where
//! `tau(k) = k(k+1)/2`),
//!
//! ```text
//! q_n = max( floor( (q_1 q_2 ... q_{n-1})^((1-alpha)/alpha) ), 2n^2 ).
//! ```
//!
//! Those spikes make the family non-monotone (`q_10` has fourteen digits,
//! `q_11 = 242` for `alpha = 1/2`) and eventually non-materializable, so the
//! API exposes exact terms *and* always-available logarithmic magnitudes.
//!
//! Everything here is exact except the explicit `log_*` accessors: terms are
//! big integers, thresholds are certified minimal, and partial sums are
//! rationals.

use std::fmt;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::numeric::{ln_natural, KahanSum};
use crate::{LogMag, Natural, Rational};

/// Exact terms (and exact products feeding them) are refused once they would
/// exceed this many decimal digits; logarithmic magnitudes remain available.
pub const MAX_EXACT_DIGITS: u64 = 1_000_000;

/// `tau(k) = k(k+1)/2`: the `k`-th triangular number.
///
/// # Panics
///
/// Panics on overflow (`k` beyond ~6.07e9).
#[must_use]
pub fn tau(k: u64) -> u64 {
    let prod = k.checked_mul(k + 1).expect("triangular number overflows u64");
    prod / 2
}

/// If `m = tau(k)` for some `k >= 1`, return that `k`.
fn triangular_index(m: u64) -> Option<u64> {
    // k = (sqrt(8m + 1) - 1) / 2, verified exactly.
    let disc = 8u64.checked_mul(m)?.checked_add(1)?;
    let root = disc.isqrt();
    if root * root != disc {
        return None;
    }
    let k = (root - 1) / 2;
    (k >= 1 && tau(k) == m).then_some(k)
}

/// Errors from base-sequence construction and evaluation.
#[derive(Debug, Error)]
pub enum SequenceError {
    /// The family descriptor string could not be parsed.
    #[error("cannot parse family {input:?}: {reason}")]
    FamilyParse {
        /// The offending descriptor.
        input: String,
        /// What went wrong.
        reason: String,
    },
    /// An exact term was requested beyond the materialization cap.
    #[error(
        "term {index} of {family} needs about {approx_digits} decimal digits, \
         beyond the exact cap of {MAX_EXACT_DIGITS}; use its logarithmic magnitude instead"
    )]
    TermTooLarge {
        /// Family descriptor.
        family: String,
        /// 1-based index of the requested term.
        index: u64,
        /// Estimated decimal digits of the exact value.
        approx_digits: u64,
    },
    /// A `table` family was asked something its finite data cannot answer.
    #[error("table family with {len} entries cannot answer: {request}")]
    TableExhausted {
        /// Number of entries the table holds.
        len: u64,
        /// Description of the unanswerable request.
        request: String,
    },
    /// The max branch of a `qalpha` spike could not be decided from
    /// logarithms alone (never happens for parameters in supported ranges).
    #[error("cannot decide the dominant branch of term {index} without materializing it")]
    BranchAmbiguous {
        /// 1-based index of the undecidable term.
        index: u64,
    },
    /// An operation specific to one family was called on another.
    #[error("operation {operation} requires a {required} family, got {family}")]
    WrongFamily {
        /// Name of the operation.
        operation: &'static str,
        /// Family kind the operation needs.
        required: &'static str,
        /// Family it was called on.
        family: String,
    },
}

/// Lazily grown state for the `qalpha` family.
#[derive(Debug, Default)]
struct QalphaMemo {
    /// `ln q_n` at index `n - 1`.
    logs: Vec<f64>,
    /// `ln (q_1 ... q_n)` at index `n - 1` (compensated summation).
    log_products: Vec<f64>,
    log_sum: KahanSum,
    /// Exact terms where materializable.
    exact: Vec<Option<BigUint>>,
    /// Exact running product while it stays within the cap.
    product: Option<BigUint>,
    /// For spike positions: `Some(true)` if the power-floor branch won the
    /// max, `Some(false)` if the `2n^2` clamp did. `None` elsewhere.
    branches: Vec<Option<bool>>,
}

#[derive(Debug)]
enum FamilyKind {
    Ref2,
    Poly {
        lam_num: BigUint,
        lam_den: BigUint,
        t_num: u64,
        t_den: u64,
    },
    Slow {
        s: u64,
    },
    Geom {
        t: u64,
    },
    Tower,
    QAlpha {
        /// `alpha = a / b` in lowest terms, `0 < a < b`.
        a: u64,
        b: u64,
        memo: Mutex<QalphaMemo>,
    },
    Table {
        values: Vec<BigUint>,
        /// Indices `> monotone_after` (1-based) are certified nondecreasing,
        /// and the unwritten tail is certified to stay `>=` the last entry.
        monotone_after: Option<u64>,
    },
}

/// A base sequence `q_1, q_2, ...` with every term at least 2.
///
/// Construct via [`BasicSequence::parse`] from a descriptor such as `"ref2"`,
/// `"poly:3/2,3"`, `"slow:3"`, `"geom:8"`, `"tower"`, `"qalpha:1/2"`, or
/// `"table:values.txt,monotone-after=4"`.
#[derive(Debug)]
pub struct BasicSequence {
    kind: FamilyKind,
    descriptor: String,
}

impl fmt::Display for BasicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor)
    }
}

impl BasicSequence {
    /// Parse a family descriptor.
    ///
    /// # Errors
    ///
    /// Returns [`SequenceError::FamilyParse`] for unknown families or
    /// out-of-range parameters (`geom` needs `T >= 2`, `poly` needs `T >= 1`
    /// and `L > 0`, `slow` needs `S >= 1`, `qalpha` needs `0 < alpha < 1`,
    /// table files must hold integers `>= 2`).
    pub fn parse(input: &str) -> Result<Self, SequenceError> {
        let fail = |reason: &str| SequenceError::FamilyParse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let descriptor = input.trim().to_string();
        let kind = match descriptor.split_once(':') {
            None => match descriptor.as_str() {
                "ref2" => FamilyKind::Ref2,
                "tower" => FamilyKind::Tower,
                _ => return Err(fail("unknown family (no parameters expected)")),
            },
            Some(("poly", rest)) => {
                let (lam_s, t_s) = rest
                    .split_once(',')
                    .ok_or_else(|| fail("poly needs two parameters: poly:L,T"))?;
                let lam = crate::numeric::parse_rational(lam_s).map_err(|e| fail(&e))?;
                if lam <= Rational::zero() {
                    return Err(fail("poly coefficient L must be positive"));
                }
                let t = crate::numeric::parse_rational(t_s).map_err(|e| fail(&e))?;
                if t < Rational::one() {
                    return Err(fail("poly exponent T must be at least 1"));
                }
                let t_num = t.numer().to_u64().ok_or_else(|| fail("poly exponent too large"))?;
                let t_den = t.denom().to_u64().ok_or_else(|| fail("poly exponent too large"))?;
                FamilyKind::Poly {
                    lam_num: lam.numer().to_biguint().expect("positive"),
                    lam_den: lam.denom().to_biguint().expect("positive"),
                    t_num,
                    t_den,
                }
            }
            Some(("slow", rest)) => {
                let s: u64 = rest.parse().map_err(|_| fail("slow delay S must be an integer"))?;
                if s == 0 {
                    return Err(fail("slow delay S must be at least 1"));
                }
                FamilyKind::Slow { s }
            }
            Some(("geom", rest)) => {
                let t: u64 = rest.parse().map_err(|_| fail("geom ratio T must be an integer"))?;
                if t < 2 {
                    return Err(fail("geom ratio T must be at least 2"));
                }
                FamilyKind::Geom { t }
            }
            Some(("qalpha", rest)) => {
                let alpha = crate::numeric::parse_rational(rest).map_err(|e| fail(&e))?;
                if alpha <= Rational::zero() || alpha >= Rational::one() {
                    return Err(fail("qalpha dial must satisfy 0 < alpha < 1"));
                }
                let a = alpha
                    .numer()
                    .to_u64()
                    .filter(|&a| a <= 1_000_000)
                    .ok_or_else(|| fail("qalpha numerator out of range"))?;
                let b = alpha
                    .denom()
                    .to_u64()
                    .filter(|&b| b <= 1_000_000)
                    .ok_or_else(|| fail("qalpha denominator out of range"))?;
                FamilyKind::QAlpha {
                    a,
                    b,
                    memo: Mutex::new(QalphaMemo::default()),
                }
            }
            Some(("table", rest)) => {
                let (path, monotone_after) = match rest.rsplit_once(",monotone-after=") {
                    Some((p, n)) => {
                        let n: u64 =
                            n.parse().map_err(|_| fail("monotone-after must be an integer"))?;
                        (p, Some(n))
                    }
                    None => (rest, None),
                };
                let data = std::fs::read_to_string(path)
                    .map_err(|e| fail(&format!("cannot read {path}: {e}")))?;
                let mut values = Vec::new();
                for token in data.split_whitespace() {
                    let v: BigUint =
                        token.parse().map_err(|_| fail(&format!("bad table entry {token:?}")))?;
                    if v < BigUint::from(2u32) {
                        return Err(fail(&format!("table entry {v} is below 2")));
                    }
                    values.push(v);
                }
                if values.is_empty() {
                    return Err(fail("table file holds no entries"));
                }
                if let Some(n0) = monotone_after {
                    let start = n0.max(1) as usize;
                    for w in values[start.saturating_sub(1)..].windows(2) {
                        if w[0] > w[1] {
                            return Err(fail(&format!(
                                "table is not nondecreasing after index {n0}: {} > {}",
                                w[0], w[1]
                            )));
                        }
                    }
                }
                FamilyKind::Table { values, monotone_after }
            }
            Some((other, _)) => {
                return Err(fail(&format!("unknown family {other:?}")));
            }
        };
        Ok(BasicSequence { kind, descriptor })
    }

    /// The descriptor this sequence was parsed from.
    #[must_use]
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Short family name (`"ref2"`, `"poly"`, ...).
    #[must_use]
    pub fn family_name(&self) -> &'static str {
        match &self.kind {
            FamilyKind::Ref2 => "ref2",
            FamilyKind::Poly { .. } => "poly",
            FamilyKind::Slow { .. } => "slow",
            FamilyKind::Geom { .. } => "geom",
            FamilyKind::Tower => "tower",
            FamilyKind::QAlpha { .. } => "qalpha",
            FamilyKind::Table { .. } => "table",
        }
    }

    /// Whether `q_n -> infinity` is certified for this family.
    ///
    /// Built-in analytic families all grow without bound. A `table` family is
    /// finite evidence only, so this reports `false` even with a
    /// `monotone-after` certificate (a nondecreasing tail may plateau).
    #[must_use]
    pub fn is_infinite_in_limit(&self) -> bool {
        !matches!(self.kind, FamilyKind::Table { .. })
    }

    fn too_large(&self, index: u64, approx_digits: u64) -> SequenceError {
        SequenceError::TermTooLarge {
            family: self.descriptor.clone(),
            index,
            approx_digits,
        }
    }

    /// The exact term `q_n` (1-indexed).
    ///
    /// # Errors
    ///
    /// [`SequenceError::TermTooLarge`] when the exact value would exceed
    /// [`MAX_EXACT_DIGITS`]; [`SequenceError::TableExhausted`] past the end
    /// of a table family.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn term(&self, n: u64) -> Result<Natural, SequenceError> {
        assert!(n >= 1, "terms are 1-indexed");
        match &self.kind {
            FamilyKind::Ref2 => Ok(BigUint::from(2u32) * n * n),
            FamilyKind::Slow { s } => {
                let block = n.div_ceil(*s);
                Ok(BigUint::from(2u32) * block * block)
            }
            FamilyKind::Poly { lam_num, lam_den, t_num, t_den } => {
                Ok(poly_term(lam_num, lam_den, *t_num, *t_den, n))
            }
            FamilyKind::Geom { t } => {
                let digits = n as f64 * (*t as f64).log10();
                if digits > MAX_EXACT_DIGITS as f64 {
                    return Err(self.too_large(n, digits as u64));
                }
                Ok(BigUint::from(*t).pow(u32::try_from(n).expect("exponent fits u32")))
            }
            FamilyKind::Tower => match n {
                1 => Ok(BigUint::from(2u32)),
                2 => Ok(BigUint::from(4u32)),
                3 => Ok(BigUint::from(16u32)),
                4 => Ok(BigUint::from(65_536u32)),
                5 => Ok(BigUint::one() << 65_536u32),
                _ => Err(self.too_large(n, u64::MAX)),
            },
            FamilyKind::QAlpha { a, b, memo } => {
                let mut memo = memo.lock().expect("memo lock");
                extend_qalpha(&mut memo, *a, *b, n)?;
                memo.exact[(n - 1) as usize].clone().ok_or_else(|| {
                    let digits = memo.logs[(n - 1) as usize] / std::f64::consts::LN_10;
                    self.too_large(n, digits as u64)
                })
            }
            FamilyKind::Table { values, .. } => {
                values.get((n - 1) as usize).cloned().ok_or_else(|| {
                    SequenceError::TableExhausted {
                        len: values.len() as u64,
                        request: format!("term at index {n}"),
                    }
                })
            }
        }
    }

    /// `ln q_n` as a float; always available, even far past the exact cap
    /// for `qalpha` (saturates to `inf` only for `tower` beyond `n = 5`,
    /// where even the logarithm overflows `f64` — see
    /// [`BasicSequence::log_term_mag`]).
    ///
    /// # Errors
    ///
    /// Only table exhaustion and (theoretical) branch ambiguity.
    pub fn log_term(&self, n: u64) -> Result<f64, SequenceError> {
        Ok(self.log_term_mag(n)?.to_f64())
    }

    /// `ln q_n` as a nested-exponential magnitude, exact enough to compare
    /// and form ratios even for the `tower` family where `ln q_n` itself
    /// dwarfs `f64` range.
    ///
    /// # Errors
    ///
    /// Same conditions as [`BasicSequence::log_term`].
    pub fn log_term_mag(&self, n: u64) -> Result<LogMag, SequenceError> {
        assert!(n >= 1, "terms are 1-indexed");
        match &self.kind {
            FamilyKind::Tower => {
                // ln q_5 = 65536 ln 2; each later ln q is an exp of (almost
                // exactly) the previous one, the additive ln ln 2 being far
                // below f64 resolution at that scale.
                let base = 65_536.0 * std::f64::consts::LN_2;
                Ok(match n {
                    1..=4 => {
                        LogMag::plain(ln_natural(&self.term(n).expect("small tower term")))
                    }
                    5 => LogMag::plain(base),
                    _ => LogMag::nested(
                        u8::try_from(n - 5).expect("tower depth fits u8"),
                        base + std::f64::consts::LN_2.ln(),
                    ),
                })
            }
            FamilyKind::Geom { t } => Ok(LogMag::plain(n as f64 * (*t as f64).ln())),
            FamilyKind::QAlpha { a, b, memo } => {
                let mut memo = memo.lock().expect("memo lock");
                extend_qalpha(&mut memo, *a, *b, n)?;
                Ok(LogMag::plain(memo.logs[(n - 1) as usize]))
            }
            FamilyKind::Poly { lam_num, lam_den, t_num, t_den } => {
                // Exact terms stay materializable for any sane parameters;
                // fall back to the analytic form if one ever is not.
                match self.term(n) {
                    Ok(q) => Ok(LogMag::plain(ln_natural(&q))),
                    Err(_) => Ok(LogMag::plain(
                        ln_natural(lam_num) - ln_natural(lam_den)
                            + (*t_num as f64 / *t_den as f64) * (n as f64).ln(),
                    )),
                }
            }
            _ => Ok(LogMag::plain(ln_natural(&self.term(n)?))),
        }
    }

    /// Certified minimal threshold: the least `N` such that `q_m >= bound`
    /// for **every** `m >= N`.
    ///
    /// # Errors
    ///
    /// [`SequenceError::TableExhausted`] when a table family cannot certify
    /// the tail (no `monotone-after`, or its last entry is below `bound`).
    pub fn threshold(&self, bound: &Natural) -> Result<u64, SequenceError> {
        if *bound <= BigUint::from(2u32) {
            return Ok(1);
        }
        match &self.kind {
            FamilyKind::Ref2 => Ok(quadratic_threshold(bound, 1)),
            FamilyKind::Slow { s } => {
                let m0 = quadratic_threshold(bound, 1);
                Ok(s * (m0 - 1) + 1)
            }
            FamilyKind::Poly { lam_num, lam_den, t_num, t_den } => {
                // The term map is nondecreasing in n, so binary-search the
                // first n with q_n >= bound.
                let mut hi = 1u64;
                while &poly_term(lam_num, lam_den, *t_num, *t_den, hi) < bound {
                    hi = hi.checked_mul(2).expect("threshold search overflow");
                }
                let mut lo = hi / 2; // q_lo < bound (or lo == 0)
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if &poly_term(lam_num, lam_den, *t_num, *t_den, mid) >= bound {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
            FamilyKind::Geom { t } => {
                let mut n = 1u64;
                let mut power = BigUint::from(*t);
                while &power < bound {
                    power *= *t;
                    n += 1;
                }
                Ok(n)
            }
            FamilyKind::Tower => {
                for n in 1..=5u64 {
                    if &self.term(n).expect("small tower term") >= bound {
                        return Ok(n);
                    }
                }
                // q_6 = 2^(2^65536) exceeds anything expressible here: a
                // bound's ln fits in f64 (depth 0), while ln q_6 has depth 1.
                Ok(6)
            }
            FamilyKind::QAlpha { a, b, memo } => {
                // Envelope: q_n >= 2n^2 always, so the quadratic threshold
                // m0 certifies the tail; scan downward for spikes that
                // already clear the bound (the family is not monotone).
                let m0 = quadratic_threshold(bound, 1);
                let mut memo = memo.lock().expect("memo lock");
                extend_qalpha(&mut memo, *a, *b, m0)?;
                let ln_bound = ln_natural(bound);
                let mut n = m0;
                while n > 1 {
                    let idx = (n - 2) as usize;
                    let ge = match &memo.exact[idx] {
                        Some(q) => q >= bound,
                        None => {
                            let diff = memo.logs[idx] - ln_bound;
                            if diff.abs() < 0.5 {
                                return Err(SequenceError::BranchAmbiguous { index: n - 1 });
                            }
                            diff > 0.0
                        }
                    };
                    if ge {
                        n -= 1;
                    } else {
                        break;
                    }
                }
                Ok(n)
            }
            FamilyKind::Table { values, monotone_after } => {
                let len = values.len() as u64;
                let exhausted = |request: String| SequenceError::TableExhausted { len, request };
                if monotone_after.is_none() {
                    return Err(exhausted(format!(
                        "certifying the unwritten tail >= {bound} (no monotone-after)"
                    )));
                }
                if values.last().expect("nonempty") < bound {
                    return Err(exhausted(format!(
                        "certifying the unwritten tail >= {bound} (last entry is smaller)"
                    )));
                }
                // Tail beyond the table is certified >= last entry >= bound.
                let mut n = len + 1;
                while n > 1 && values[(n - 2) as usize] >= *bound {
                    n -= 1;
                }
                Ok(n)
            }
        }
    }

    /// Exact partial sum `sum_{j=1}^{n} q_j^{-k}`, combined pairwise so the
    /// single final reduction touches big numbers only once.
    ///
    /// # Errors
    ///
    /// Propagates term errors (exact cap, table exhaustion).
    ///
    /// # Panics
    ///
    /// Panics if `n == 0` or `k == 0`.
    pub fn partial_sum(&self, n: u64, k: u32) -> Result<Rational, SequenceError> {
        assert!(n >= 1 && k >= 1, "partial sums need n >= 1 and k >= 1");
        let (num, den) = self.partial_sum_tree(1, n + 1, k)?;
        Ok(Rational::new(num.into(), den.into()))
    }

    /// Unreduced tree sum of `1/q_j^k` over `lo..hi` (half-open).
    fn partial_sum_tree(&self, lo: u64, hi: u64, k: u32) -> Result<(Natural, Natural), SequenceError> {
        if hi - lo == 1 {
            return Ok((BigUint::one(), self.term(lo)?.pow(k)));
        }
        let mid = lo + (hi - lo) / 2;
        let (n1, d1) = self.partial_sum_tree(lo, mid, k)?;
        let (n2, d2) = self.partial_sum_tree(mid, hi, k)?;
        Ok((&n1 * &d2 + &n2 * &d1, d1 * d2))
    }

    /// Exact product `q_1 q_2 ... q_n`, combined pairwise.
    ///
    /// # Errors
    ///
    /// Propagates term errors, and refuses products beyond the exact cap.
    pub fn product(&self, n: u64) -> Result<Natural, SequenceError> {
        assert!(n >= 1, "products need n >= 1");
        let p = self.product_tree(1, n + 1)?;
        if p.bits() > MAX_EXACT_DIGITS * 4 {
            return Err(self.too_large(n, (p.bits() as f64 * 2f64.log10()) as u64));
        }
        Ok(p)
    }

    fn product_tree(&self, lo: u64, hi: u64) -> Result<Natural, SequenceError> {
        if hi - lo == 1 {
            return self.term(lo);
        }
        let mid = lo + (hi - lo) / 2;
        Ok(self.product_tree(lo, mid)? * self.product_tree(mid, hi)?)
    }

    /// Sandwich check for the `qalpha` spike sizes: at even level `k`, with
    /// `P` the product of all terms before position `tau(k)` **excluding**
    /// the level-`(k-1)` region (that is, `P = q_1 ... q_{tau(k-1)-1}`),
    ///
    /// ```text
    /// (1-alpha)/alpha * ln P  <  ln q_tau(k)  <  same + (4-4alpha)/alpha * k ln k.
    /// ```
    ///
    /// The strict upper inequality is a consequence of the spike being on
    /// the power-floor branch of its defining max; the report carries
    /// [`QidentReport::floor_branch`] so callers can tell when the `2n^2`
    /// clamp won instead (then the upper bound may genuinely fail, as it
    /// does for `alpha = 3/4`, `k = 2`).
    ///
    /// # Errors
    ///
    /// [`SequenceError::WrongFamily`] unless this is a `qalpha` family.
    ///
    /// # Panics
    ///
    /// Panics if `k` is odd or zero.
    pub fn qident_check(&self, k: u64) -> Result<QidentReport, SequenceError> {
        assert!(k >= 2 && k % 2 == 0, "identity check needs even k >= 2");
        let FamilyKind::QAlpha { a, b, memo } = &self.kind else {
            return Err(SequenceError::WrongFamily {
                operation: "qident_check",
                required: "qalpha",
                family: self.descriptor.clone(),
            });
        };
        let m = tau(k);
        let mut memo = memo.lock().expect("memo lock");
        extend_qalpha(&mut memo, *a, *b, m)?;
        let exponent = (*b - *a) as f64 / *a as f64;
        let prev = tau(k - 1);
        let ln_p = if prev >= 2 { memo.log_products[(prev - 2) as usize] } else { 0.0 };
        let lower = exponent * ln_p;
        let upper = lower + 4.0 * exponent * k as f64 * (k as f64).ln();
        let ln_v = memo.logs[(m - 1) as usize];
        let floor_branch = memo.branches[(m - 1) as usize].expect("spike position");
        Ok(QidentReport {
            k,
            position: m,
            lower,
            ln_v,
            upper,
            floor_branch,
            holds: lower < ln_v && ln_v < upper,
        })
    }
}

/// Result of [`BasicSequence::qident_check`] at one even level.
#[derive(Debug, Clone, serde::Serialize)]
pub struct QidentReport {
    /// Even level `k`.
    pub k: u64,
    /// Spike position `tau(k)`.
    pub position: u64,
    /// Lower sandwich bound on `ln q_tau(k)`.
    pub lower: f64,
    /// `ln q_tau(k)` itself.
    pub ln_v: f64,
    /// Upper sandwich bound.
    pub upper: f64,
    /// Whether the spike took the power-floor branch of its defining max
    /// (the upper bound is only promised on this branch).
    pub floor_branch: bool,
    /// Whether the sandwich holds strictly.
    pub holds: bool,
}

/// Smallest `m >= min` with `2 m^2 >= bound` (so every later index clears
/// the bound too, the map being increasing).
fn quadratic_threshold(bound: &BigUint, min: u64) -> u64 {
    // 2 m^2 >= bound  <=>  m^2 >= ceil(bound / 2)  <=>  m >= ceil(sqrt(...)).
    let half = bound.div_ceil(&BigUint::from(2u32));
    let root = half.sqrt();
    let m = if &root * &root == half {
        root
    } else {
        root + 1u32
    };
    m.to_u64().expect("threshold fits u64").max(min)
}

/// `max(2, ceil(L * n^(tn/td)))` computed exactly: the ceiling is the least
/// `k` with `k^td * Lden^td >= Lnum^td * n^tn`.
fn poly_term(lam_num: &BigUint, lam_den: &BigUint, t_num: u64, t_den: u64, n: u64) -> BigUint {
    let td = u32::try_from(t_den).expect("exponent denominator fits u32");
    let tn = u32::try_from(t_num).expect("exponent numerator fits u32");
    let rhs = lam_num.pow(td) * BigUint::from(n).pow(tn);
    let den_pow = lam_den.pow(td);
    let clears = |k: &BigUint| k.pow(td) * &den_pow >= rhs;
    let mut hi = BigUint::from(2u32);
    while !clears(&hi) {
        hi <<= 1u32;
    }
    let mut lo: BigUint = &hi >> 1u32; // fails the test (or equals 1)
    while &hi - &lo > BigUint::one() {
        let mid = (&lo + &hi) >> 1u32;
        if clears(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.max(BigUint::from(2u32))
}

/// Grow the `qalpha` memo so terms `1..=n` are described.
fn extend_qalpha(memo: &mut QalphaMemo, a: u64, b: u64, n: u64) -> Result<(), SequenceError> {
    if memo.exact.is_empty() {
        memo.product = Some(BigUint::one());
    }
    while (memo.exact.len() as u64) < n {
        let m = memo.exact.len() as u64 + 1;
        let clamp = BigUint::from(2u32) * m * m;
        let spike = triangular_index(m).is_some_and(|k| k % 2 == 0);
        let (exact, ln_q, branch) = if spike {
            spike_term(memo, a, b, m, &clamp)?
        } else {
            (Some(clamp.clone()), ln_natural(&clamp), None)
        };
        memo.log_sum.add(ln_q);
        memo.logs.push(ln_q);
        memo.log_products.push(memo.log_sum.total());
        memo.branches.push(branch);
        memo.product = match (memo.product.take(), &exact) {
            (Some(p), Some(q)) => {
                let np = p * q;
                // Keep the running product slightly past the term cap so a
                // spike right at the edge can still be materialized.
                (np.bits() <= MAX_EXACT_DIGITS * 4).then_some(np)
            }
            _ => None,
        };
        memo.exact.push(exact);
    }
    Ok(())
}

/// Compute the spike `q_m = max(floor(P^((b-a)/a)), 2m^2)` where `P` is the
/// product of all earlier terms. Returns `(exact value if materializable,
/// ln q_m, Some(floor branch won))`.
fn spike_term(
    memo: &QalphaMemo,
    a: u64,
    b: u64,
    m: u64,
    clamp: &BigUint,
) -> Result<(Option<BigUint>, f64, Option<bool>), SequenceError> {
    let e_num = b - a;
    let e_den = a;
    let ln_p = memo.log_products.last().copied().unwrap_or(0.0);
    let ln_pow = ln_p * e_num as f64 / e_den as f64;
    let est_digits = ln_pow / std::f64::consts::LN_10;
    if let Some(p) = &memo.product {
        if est_digits <= MAX_EXACT_DIGITS as f64 {
            let powed = p.pow(u32::try_from(e_num).expect("exponent fits u32"));
            let v = powed.nth_root(u32::try_from(e_den).expect("root fits u32"));
            let floor_won = v >= *clamp;
            let q = if floor_won { v } else { clamp.clone() };
            return Ok((Some(q.clone()), ln_natural(&q), Some(floor_won)));
        }
    }
    // Logs only. floor(P^e) differs from P^e by far less than the decision
    // margins at this size, so compare in log space with a safety band.
    let ln_clamp = ln_natural(clamp);
    if (ln_pow - ln_clamp).abs() < 0.5 {
        return Err(SequenceError::BranchAmbiguous { index: m });
    }
    let floor_won = ln_pow > ln_clamp;
    Ok((None, ln_pow.max(ln_clamp), Some(floor_won)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(d: &str) -> BasicSequence {
        BasicSequence::parse(d).unwrap()
    }

    fn terms(d: &str, n: u64) -> Vec<u64> {
        let s = seq(d);
        (1..=n).map(|i| s.term(i).unwrap().to_u64().unwrap()).collect()
    }

    #[test]
    fn tau_and_triangular_index_invert() {
        assert_eq!(tau(1), 1);
        assert_eq!(tau(4), 10);
        assert_eq!(tau(130), 8515);
        for k in 1..200 {
            assert_eq!(triangular_index(tau(k)), Some(k));
        }
        assert_eq!(triangular_index(2), None);
        assert_eq!(triangular_index(9), None);
    }

    #[test]
    fn ref2_terms() {
        assert_eq!(terms("ref2", 6), vec![2, 8, 18, 32, 50, 72]);
        assert_eq!(
            seq("ref2").term(1_000_000).unwrap(),
            BigUint::from(2_000_000_000_000u64)
        );
    }

    #[test]
    fn poly_terms_match_exact_ceilings() {
        // 3/2 * n^3: 1.5 -> 2 (after the floor-at-2 clamp), 12, 40.5 -> 41.
        assert_eq!(terms("poly:3/2,3", 3), vec![2, 12, 41]);
        // Identity-ish family: max(2, n).
        assert_eq!(terms("poly:1,1", 4), vec![2, 2, 3, 4]);
        // Fractional exponent: ceil(n^(3/2)).
        let got = terms("poly:1,3/2", 5);
        assert_eq!(got, vec![2, 3, 6, 8, 12]); // ceil(1, 2.83, 5.20, 8, 11.18)
    }

    #[test]
    fn slow_terms_repeat_each_block() {
        assert_eq!(terms("slow:3", 7), vec![2, 2, 2, 8, 8, 8, 18]);
        assert_eq!(terms("slow:1", 4), terms("ref2", 4));
    }

    #[test]
    fn geom_and_tower_terms() {
        assert_eq!(terms("geom:8", 3), vec![8, 64, 512]);
        let t = seq("tower");
        assert_eq!(t.term(4).unwrap(), BigUint::from(65_536u32));
        assert_eq!(t.term(5).unwrap(), BigUint::one() << 65_536u32);
        match t.term(6) {
            Err(SequenceError::TermTooLarge { index: 6, .. }) => {}
            other => panic!("expected exact-cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn tower_log_magnitudes_nest() {
        let t = seq("tower");
        let ln5 = t.log_term_mag(5).unwrap();
        assert_eq!(ln5.depth(), 0);
        assert!((ln5.value() - 65_536.0 * std::f64::consts::LN_2).abs() < 1e-6);
        let ln6 = t.log_term_mag(6).unwrap();
        assert_eq!(ln6.depth(), 1);
        let expected = 65_536.0 * std::f64::consts::LN_2 + std::f64::consts::LN_2.ln();
        assert!((ln6.value() - expected).abs() < 1e-6);
        assert_eq!(t.log_term_mag(8).unwrap().depth(), 3);
        assert_eq!(t.log_term(6).unwrap(), f64::INFINITY);
    }

    #[test]
    fn qalpha_half_matches_hand_computation() {
        let q = seq("qalpha:1/2");
        // Positions 1, 2 are quadratic; position 3 = tau(2) spikes to
        // max(floor((2*8)^1), 18) = 18 (the clamp wins at this level).
        assert_eq!(
            (1..=3).map(|n| q.term(n).unwrap().to_u64().unwrap()).collect::<Vec<_>>(),
            vec![2, 8, 18]
        );
        // Position 10 = tau(4): the full product 2*8*18*32*50*72*98*128*162
        // to the power 1, i.e. 67421129932800; position 11 falls back to 242.
        assert_eq!(q.term(10).unwrap(), BigUint::from(67_421_129_932_800u64));
        assert_eq!(q.term(11).unwrap(), BigUint::from(242u32));
        assert!(q.term(10).unwrap() > q.term(11).unwrap(), "family is not monotone");
    }

    #[test]
    fn qalpha_quarter_and_three_quarters_spikes() {
        // alpha = 1/4: exponent 3, so q_3 = max(16^3, 18) = 4096.
        assert_eq!(seq("qalpha:1/4").term(3).unwrap(), BigUint::from(4096u32));
        // alpha = 3/4: exponent 1/3, so q_3 = max(floor(16^(1/3)) = 2, 18) = 18.
        assert_eq!(seq("qalpha:3/4").term(3).unwrap(), BigUint::from(18u32));
    }

    #[test]
    fn qident_sandwich_frozen_values() {
        let q = seq("qalpha:1/2");
        let r2 = q.qident_check(2).unwrap();
        assert!((r2.lower - 0.0).abs() < 1e-12);
        assert!((r2.ln_v - 18f64.ln()).abs() < 1e-12);
        assert!((r2.upper - 8.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!(r2.holds);
        assert!(!r2.floor_branch, "alpha=1/2, k=2 rides the clamp");

        let r4 = q.qident_check(4).unwrap();
        assert!((r4.lower - 460_800f64.ln()).abs() < 1e-9, "lower = ln(2*8*18*32*50)");
        assert!((r4.ln_v - 67_421_129_932_800f64.ln()).abs() < 1e-9);
        assert!((r4.upper - (r4.lower + 16.0 * 4f64.ln())).abs() < 1e-9);
        assert!(r4.holds);
        assert!(r4.floor_branch);

        // The documented counterexample: clamp branch can break the upper
        // inequality.
        let r = seq("qalpha:3/4").qident_check(2).unwrap();
        assert!(!r.floor_branch);
        assert!(!r.holds, "ln 18 = 2.89 exceeds (4/3)*2*ln 2 = 1.85");

        // ref2 is the wrong family for this check.
        assert!(matches!(
            seq("ref2").qident_check(2),
            Err(SequenceError::WrongFamily { .. })
        ));
    }

    #[test]
    fn thresholds_are_minimal_and_match_hand_values() {
        // ref2: 2m^2 >= 8 from m = 2 (non-strict comparison).
        assert_eq!(seq("ref2").threshold(&8u32.into()).unwrap(), 2);
        assert_eq!(seq("ref2").threshold(&32u32.into()).unwrap(), 4);
        assert_eq!(seq("geom:8").threshold(&8u32.into()).unwrap(), 1);
        assert_eq!(seq("slow:3").threshold(&8u32.into()).unwrap(), 4);
        assert_eq!(seq("slow:3").threshold(&18u32.into()).unwrap(), 7);
        let t = seq("tower");
        assert_eq!(t.threshold(&8u32.into()).unwrap(), 3);
        assert_eq!(t.threshold(&(BigUint::one() << 65_536u32)).unwrap(), 5);
        assert_eq!(
            t.threshold(&((BigUint::one() << 65_536u32) + 1u32)).unwrap(),
            6,
            "just past q_5 the answer jumps to the unmaterializable q_6"
        );
        // qalpha: the spike at position 3 already clears small bounds, but
        // position 11 = 242 forces the quadratic envelope for larger ones.
        let q = seq("qalpha:1/2");
        assert_eq!(q.threshold(&18u32.into()).unwrap(), 3);
        // The spike q_10 clears 240 but q_9 = 162 does not, so N = 10; one
        // past the spike's reach (q_11 = 242 < 243) the envelope takes over.
        assert_eq!(q.threshold(&240u32.into()).unwrap(), 10);
        assert_eq!(q.threshold(&243u32.into()).unwrap(), 12);
    }

    #[test]
    fn table_family_reads_certifies_and_refuses() {
        let dir = std::env::temp_dir().join("cantor-normal-seq-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("basic.txt");
        std::fs::write(&path, "2 3 5 8").unwrap();

        let plain = seq(&format!("table:{}", path.display()));
        assert_eq!(plain.term(3).unwrap(), BigUint::from(5u32));
        assert!(matches!(
            plain.term(5),
            Err(SequenceError::TableExhausted { len: 4, .. })
        ));
        assert!(!plain.is_infinite_in_limit());
        // Without a monotone-after certificate the tail is unknowable.
        assert!(plain.threshold(&3u32.into()).is_err());

        let certified = seq(&format!("table:{},monotone-after=1", path.display()));
        assert_eq!(certified.threshold(&4u32.into()).unwrap(), 3);
        assert_eq!(certified.threshold(&8u32.into()).unwrap(), 4);
        assert!(certified.threshold(&9u32.into()).is_err(), "last entry is below 9");

        let decreasing = dir.join("dip.txt");
        std::fs::write(&decreasing, "4 2 8").unwrap();
        assert!(BasicSequence::parse(&format!(
            "table:{},monotone-after=1",
            decreasing.display()
        ))
        .is_err());
        // ... but a dip before the certified suffix is fine.
        assert!(BasicSequence::parse(&format!(
            "table:{},monotone-after=2",
            decreasing.display()
        ))
        .is_ok());
    }

    #[test]
    fn partial_sums_are_exact() {
        // ref2, n = 5: 1/2 + 1/8 + 1/18 + 1/32 + 1/50 = 5269/7200.
        let s = seq("ref2").partial_sum(5, 1).unwrap();
        assert_eq!(s.to_string(), "5269/7200");
        // Constant table: six halves.
        let dir = std::env::temp_dir().join("cantor-normal-seq-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("twos.txt");
        std::fs::write(&path, "2 2 2 2 2 2").unwrap();
        let twos = seq(&format!("table:{}", path.display()));
        assert_eq!(twos.partial_sum(6, 1).unwrap().to_string(), "3");
        // Second powers: 1/4 + 1/64 = 17/64.
        assert_eq!(seq("ref2").partial_sum(2, 2).unwrap().to_string(), "17/64");
    }

    #[test]
    fn products_are_exact() {
        assert_eq!(seq("ref2").product(3).unwrap(), BigUint::from(288u32));
        assert_eq!(seq("ref2").product(5).unwrap(), BigUint::from(460_800u32));
    }

    #[test]
    fn parse_rejects_bad_descriptors() {
        for bad in [
            "geom:1",
            "geom:x",
            "slow:0",
            "qalpha:5/4",
            "qalpha:1",
            "qalpha:0",
            "poly:1/2,0",
            "poly:0,2",
            "poly:1",
            "nonsense",
            "nonsense:3",
            "table:/no/such/file/anywhere",
        ] {
            assert!(BasicSequence::parse(bad).is_err(), "{bad} should not parse");
        }
        for good in ["ref2", "tower", "poly:3/2,3", "slow:3", "geom:8", "qalpha:1/2"] {
            assert!(BasicSequence::parse(good).is_ok(), "{good} should parse");
        }
    }

    #[test]
    fn infinite_in_limit_flags() {
        for d in ["ref2", "poly:1,1", "slow:5", "geom:2", "tower", "qalpha:1/2"] {
            assert!(seq(d).is_infinite_in_limit(), "{d}");
        }
    }

    proptest! {
        #[test]
        fn monotone_families_really_are_monotone(n in 1u64..500) {
            for d in ["ref2", "slow:4", "geom:3", "poly:2/3,3/2"] {
                let s = seq(d);
                prop_assert!(s.term(n).unwrap() <= s.term(n + 1).unwrap());
            }
        }

        #[test]
        fn thresholds_are_minimal(bound in 2u64..100_000) {
            let bound = BigUint::from(bound);
            for d in ["ref2", "slow:3", "geom:8", "qalpha:1/2", "poly:3/2,2"] {
                let s = seq(d);
                let t = s.threshold(&bound).unwrap();
                // Everything from t onward clears the bound...
                for m in t..t + 40 {
                    prop_assert!(s.term(m).unwrap() >= bound, "{d}: term {m} below {bound}");
                }
                // ...and t is minimal.
                if t > 1 {
                    prop_assert!(s.term(t - 1).unwrap() < bound, "{d}: threshold not minimal");
                }
            }
        }

        #[test]
        fn log_terms_track_exact_terms(n in 1u64..300) {
            for d in ["ref2", "slow:3", "geom:5", "qalpha:1/2", "poly:3/2,3"] {
                let s = seq(d);
                let exact = ln_natural(&s.term(n).unwrap());
                let logged = s.log_term(n).unwrap();
                prop_assert!((exact - logged).abs() < 1e-9 * exact.max(1.0));
            }
        }
    }
}
