//! Shared helpers for the integration suites: an independent star-discrepancy
//! oracle and a tiny deterministic generator for random test data.

use cantor_normal::{DigitStream, Ladder, Rational, SelectionPolicy};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Star discrepancy by direct supremum over the empirical step function,
/// written independently of the library's order-statistics formula.
///
/// Sort the points; between consecutive points the empirical count of
/// `x_i < gamma` is constant, so the supremum of `|count/N - gamma|` over
/// each segment is attained at a segment endpoint. Taking both endpoint
/// deviations for every count value `k` (with the sentinels `x_0 = 0` and
/// `x_{N+1} = 1`) covers the whole unit interval, duplicates included.
pub fn dstar_sup_oracle(points: &[Rational]) -> Rational {
    let n = points.len();
    assert!(n > 0, "oracle needs at least one point");
    let mut sorted = points.to_vec();
    sorted.sort();
    let big_n = BigInt::from(n);
    let at = |k: usize| -> Rational {
        if k == 0 {
            Rational::zero()
        } else if k > n {
            Rational::one()
        } else {
            sorted[k - 1].clone()
        }
    };
    let mut best = Rational::zero();
    for k in 0..=n {
        let level = Rational::new(BigInt::from(k), big_n.clone());
        for endpoint in [at(k), at(k + 1)] {
            let dev = (&level - endpoint).abs();
            if dev > best {
                best = dev;
            }
        }
    }
    best
}

/// Deterministic 64-bit generator (splitmix64) for reproducible random data.
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` (`bound > 0`).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

/// Fresh ladder for a family descriptor.
pub fn ladder(descriptor: &str) -> Ladder {
    Ladder::new(cantor_normal::BasicSequence::parse(descriptor).unwrap())
}

/// Fresh digit stream for a family descriptor and policy.
pub fn stream(descriptor: &str, policy: SelectionPolicy) -> DigitStream {
    DigitStream::new(ladder(descriptor), policy)
}
