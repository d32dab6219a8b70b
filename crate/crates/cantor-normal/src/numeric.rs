//! Small numeric utilities shared across the crate: natural logs of big
//! integers, compensated float summation, a nested-exponential magnitude type
//! for bases too large to materialize, and a keyed deterministic generator
//! for the `random` digit policy.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::Rational;

/// Natural logarithm of a positive big integer, accurate to within a few ulp.
///
/// Uses the top 64 bits as a mantissa plus the bit length, so precision does
/// not degrade as the integer grows.
///
/// # Panics
///
/// Panics if `n` is zero.
pub(crate) fn ln_natural(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "ln of zero");
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().expect("fits in u64") as f64).ln();
    }
    let shift = bits - 64;
    let top: BigUint = n >> shift;
    let mantissa = top.to_u64().expect("top 64 bits") as f64;
    mantissa.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Convert an exact rational to the nearest `f64`, robust to numerators and
/// denominators far beyond `f64` range (the parts are rescaled by a power of
/// two before the division).
pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().abs().to_biguint().expect("abs is nonnegative");
    let den = r.denom().to_biguint().expect("denominator is positive");
    // Scale so the integer quotient carries ~80 significant bits.
    let shift: i64 = 80 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        (num >> (-shift) as u64) / den
    };
    // q carries ~80 significant bits; scaling back by 2^-shift is exact.
    if shift.unsigned_abs() <= 1_000 {
        let qf = q.to_f64().unwrap_or(f64::INFINITY);
        return sign * qf * 2f64.powi(-(shift as i32));
    }
    // |shift| this large means the value itself over/underflows f64.
    let ln = ln_natural(&q) - shift as f64 * std::f64::consts::LN_2;
    sign * ln.exp()
}

/// Parse `"p/q"`, `"n"`, or a plain decimal like `"0.25"` into an exact
/// rational.
pub(crate) fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s:?}"))?;
        let den: BigInt = q
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int = if int.is_empty() { "0" } else { int };
        let digits = frac.len() as u32;
        let whole: BigInt = int.parse().map_err(|_| format!("bad number {s:?}"))?;
        let frac_num: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| format!("bad number {s:?}"))?
        };
        let den = BigInt::from(10u32).pow(digits);
        let num = &whole * &den + if whole.is_negative() { -frac_num } else { frac_num };
        return Ok(Rational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    Ok(Rational::from_integer(n))
}

/// Kahan–Babuška compensated accumulator for long float sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Magnitude of a positive quantity stored as a nested exponential:
/// the represented value is `exp(exp(...exp(value)))` with `depth` nested
/// `exp`s (`depth = 0` means just `value`).
///
/// This keeps doubly- and triply-exponential bases (the `tower` family)
/// comparable long after `f64` overflows. The form is canonical: `depth > 0`
/// implies `value > 700`, so any positive-depth magnitude exceeds every
/// finite `f64` and magnitudes compare lexicographically by
/// `(depth, value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMag {
    depth: u8,
    value: f64,
}

/// Collapse threshold: `exp(700)` is near the top of `f64` range, so any
/// nesting whose inner value is below this can be evaluated one level down
/// without overflow.
const COLLAPSE: f64 = 700.0;

impl LogMag {
    /// A plain (depth zero) magnitude.
    #[must_use]
    pub fn plain(value: f64) -> Self {
        LogMag { depth: 0, value }
    }

    /// Build from an explicit nesting depth, normalizing to canonical form.
    #[must_use]
    pub fn nested(depth: u8, value: f64) -> Self {
        let mut m = LogMag { depth, value };
        while m.depth > 0 && m.value <= COLLAPSE {
            m = LogMag {
                depth: m.depth - 1,
                value: m.value.exp(),
            };
        }
        m
    }

    /// Nesting depth in canonical form (0 unless the value overflows `f64`).
    #[must_use]
    pub fn depth(&self) -> u8 {
        self.depth
    }

    /// Innermost value of the nesting.
    #[must_use]
    pub fn value(&self) -> f64 {
        self.value
    }

    /// The represented value as an `f64` (`inf` whenever `depth > 0`).
    #[must_use]
    pub fn to_f64(&self) -> f64 {
        if self.depth == 0 {
            self.value
        } else {
            f64::INFINITY
        }
    }

    /// One more `exp`: returns the magnitude of `exp(self)`.
    #[must_use]
    pub fn exp(&self) -> Self {
        if self.depth == 0 {
            LogMag::nested(1, self.value)
        } else {
            LogMag {
                depth: self.depth + 1,
                value: self.value,
            }
        }
    }

    /// Ratio `self / other` as an `f64`, saturating to `0` or `inf` when the
    /// two magnitudes live at different nesting depths.
    #[must_use]
    pub fn ratio(&self, other: &Self) -> f64 {
        match self.depth.cmp(&other.depth) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Greater => f64::INFINITY,
            std::cmp::Ordering::Equal => {
                if self.depth == 0 {
                    self.value / other.value
                } else {
                    // Both exceed f64 range; exp(v1 - v2) if representable.
                    (self.value - other.value).exp()
                }
            }
        }
    }
}

impl PartialOrd for LogMag {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match self.depth.cmp(&other.depth) {
            std::cmp::Ordering::Equal => self.value.partial_cmp(&other.value),
            ord => Some(ord),
        }
    }
}

/// Accumulator for sums of [`LogMag`] terms. Depth-zero contributions are
/// summed with compensation; any deeper term dominates the whole sum beyond
/// `f64` resolution, so only the largest such term is kept.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MagSum {
    plain: KahanSum,
    deep: Option<LogMag>,
}

impl MagSum {
    pub(crate) fn add(&mut self, m: LogMag) {
        if m.depth() == 0 {
            self.plain.add(m.value());
        } else if self.deep.is_none_or(|d| d < m) {
            self.deep = Some(m);
        }
    }

    pub(crate) fn total(&self) -> LogMag {
        match self.deep {
            Some(d) => d,
            None => LogMag::plain(self.plain.total()),
        }
    }
}

/// One round of the splitmix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed word stream: a pure function of `(seed, position, attempt, word)`,
/// so digit draws are reproducible and independent of evaluation order.
fn stream_word(seed: u64, position: u64, attempt: u64, word: u64) -> u64 {
    let mut z = seed ^ 0x6A09_E667_F3BC_C909;
    z = splitmix64(z ^ splitmix64(position));
    z = splitmix64(z ^ splitmix64(attempt.wrapping_mul(0xD1B5_4A32_D192_ED03)));
    splitmix64(z ^ splitmix64(word.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Deterministic uniform draw from `{0, 1, ..., bound - 1}`, keyed by
/// `(seed, position)`. Uses rejection sampling on the top-bit-masked word
/// stream, so the result is exactly uniform.
///
/// # Panics
///
/// Panics if `bound` is zero.
pub(crate) fn uniform_below(seed: u64, position: u64, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "uniform draw from empty range");
    let bits = bound.bits();
    let words = bits.div_ceil(64);
    let top_mask: u64 = if bits % 64 == 0 {
        u64::MAX
    } else {
        (1u64 << (bits % 64)) - 1
    };
    for attempt in 0.. {
        let mut raw: Vec<u64> = (0..words)
            .map(|w| stream_word(seed, position, attempt, w))
            .collect();
        if let Some(last) = raw.last_mut() {
            *last &= top_mask;
        }
        let candidate = BigUint::from_slice(
            &raw.iter()
                .flat_map(|w| [(w & 0xFFFF_FFFF) as u32, (w >> 32) as u32])
                .collect::<Vec<u32>>(),
        );
        if candidate < *bound {
            return candidate;
        }
    }
    unreachable!("rejection sampling terminates with probability one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn ln_natural_matches_known_values() {
        let big = BigUint::one() << 100u32;
        let expected = 100.0 * std::f64::consts::LN_2;
        assert!((ln_natural(&big) - expected).abs() < 1e-9);
        assert!((ln_natural(&BigUint::from(1u32))).abs() < 1e-15);
        assert!((ln_natural(&BigUint::from(720u32)) - 720f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rational_to_f64_handles_huge_parts() {
        let third = Rational::new(BigInt::from(1), BigInt::from(3));
        assert!((rational_to_f64(&third) - 1.0 / 3.0).abs() < 1e-16);

        // (2^300 + 1) / 2^300 is just above 1 even though both parts
        // overflow f64.
        let num = (BigInt::one() << 300) + BigInt::one();
        let den = BigInt::one() << 300;
        let r = Rational::new(num, den);
        let f = rational_to_f64(&r);
        assert!((f - 1.0).abs() < 1e-15, "got {f}");

        let neg = Rational::new(BigInt::from(-7), BigInt::from(2));
        assert!((rational_to_f64(&neg) + 3.5).abs() < 1e-15);
    }

    #[test]
    fn parse_rational_accepts_fraction_integer_decimal() {
        assert_eq!(
            parse_rational("1/2").unwrap(),
            Rational::new(BigInt::from(1), BigInt::from(2))
        );
        assert_eq!(parse_rational("7").unwrap(), Rational::from_integer(7.into()));
        assert_eq!(
            parse_rational("0.25").unwrap(),
            Rational::new(BigInt::from(1), BigInt::from(4))
        );
        assert_eq!(
            parse_rational("-1.5").unwrap(),
            Rational::new(BigInt::from(-3), BigInt::from(2))
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn kahan_sum_is_exacter_than_naive() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..10_000_000 {
            k.add(1e-16);
        }
        let expected = 1.0 + 1e-9;
        assert!((k.total() - expected).abs() < 1e-12);
    }

    #[test]
    fn logmag_normalizes_and_compares() {
        // exp nesting with a small inner value collapses to depth 0.
        let m = LogMag::nested(1, 2.0);
        assert_eq!(m.depth(), 0);
        assert!((m.value() - 2.0f64.exp()).abs() < 1e-12);

        let deep = LogMag::nested(1, 45_000.0);
        assert_eq!(deep.depth(), 1);
        assert!(deep > LogMag::plain(1e300));
        assert_eq!(deep.to_f64(), f64::INFINITY);

        // Ratios across depths saturate.
        assert_eq!(LogMag::plain(10.0).ratio(&deep), 0.0);
        assert_eq!(deep.ratio(&LogMag::plain(10.0)), f64::INFINITY);
        let close = LogMag::nested(1, 45_000.5);
        assert!((close.ratio(&deep) - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn magsum_keeps_dominant_deep_term() {
        let mut s = MagSum::default();
        s.add(LogMag::plain(3.0));
        s.add(LogMag::plain(4.0));
        assert!((s.total().to_f64() - 7.0).abs() < 1e-12);

        s.add(LogMag::nested(1, 50_000.0));
        s.add(LogMag::nested(1, 45_000.0));
        assert_eq!(s.total().depth(), 1);
        assert!((s.total().value() - 50_000.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_draws_are_deterministic_and_in_range() {
        let bound = BigUint::from(1_000_000_007u64);
        let a = uniform_below(42, 17, &bound);
        let b = uniform_below(42, 17, &bound);
        assert_eq!(a, b, "same key must give the same draw");
        assert!(a < bound);

        let c = uniform_below(43, 17, &bound);
        let d = uniform_below(42, 18, &bound);
        // Astronomically unlikely to collide if the stream mixes properly.
        assert!(a != c || a != d);

        // Tiny bound exercises the mask path.
        for n in 0..50 {
            let x = uniform_below(7, n, &BigUint::from(3u32));
            assert!(x < BigUint::from(3u32));
        }

        // Wide bound exercises multi-word assembly.
        let wide = BigUint::one() << 200u32;
        let w = uniform_below(1, 1, &wide);
        assert!(w < wide);
        assert!(w.bits() > 100, "draws from a wide range should be wide");
    }
}
