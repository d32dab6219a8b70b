//! The box ladder: partitioning digit positions into boxes whose lengths
//! grow in step with the bases.
//!
//! Positions `1, 2, 3, ...` are laid out in consecutive *boxes*: first `l_1`
//! boxes of length 1, then `l_2` boxes of length 2, and so on. Within a box
//! of length `a`, the `c`-th slot will eventually hold a digit steering
//! `E_n/q_n` close to `(c-1)/a` — so a box sweeps out an almost arithmetic
//! progression, and longer boxes sweep finer ones.
//!
//! The counts `l_i` are chosen as small as possible subject to a growth
//! constraint: boxes of length `a` must not start before the bases are big
//! enough to aim at a grid of step `1/a`. Writing `nu_j` for the certified
//! minimal index from which `q_m >= 2j^2` holds forever, and
//! `L_i = sum_{j<=i} j*l_j` for the last position covered by length-`i`
//! boxes, the rules are
//!
//! ```text
//! l_1 = max(nu_2 - 1, 1),
//! l_i = max(min{ k >= 0 : L_{i-1} + i*k >= nu_{i+1} - 1 }, 1)   for i >= 2,
//! ```
//!
//! which guarantee the *defining property* `L_i >= nu_{i+1} - 1`: by the
//! time a box of length `i+1` starts, every base in it satisfies
//! `q >= 2(i+1)^2`.
//!
//! [`Ladder`] memoizes `nu`, `l`, and `L`, and exposes the bijection between
//! positions and box coordinates `(a, b, c)` (length, box number, slot):
//!
//! ```text
//! position(a, b, c) = L_{a-1} + (b-1)*a + c.
//! ```

use std::sync::Mutex;

use num_bigint::BigUint;
use thiserror::Error;

use crate::sequences::{BasicSequence, SequenceError};

/// Errors from ladder construction and the position/box bijection.
#[derive(Debug, Error)]
pub enum LadderError {
    /// The underlying base sequence could not answer (threshold or term).
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    /// Box coordinates outside the ladder.
    #[error("no box ({a},{b},{c}): length-{a} boxes number {count} and slots run 1..={a}")]
    InvalidBoxIndex {
        /// Claimed box length.
        a: u64,
        /// Claimed box number.
        b: u64,
        /// Claimed slot.
        c: u64,
        /// How many length-`a` boxes the ladder actually has.
        count: u64,
    },
}

/// Box coordinates: slot `c` of the `b`-th box of length `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BoxIndex {
    /// Box length (`>= 1`).
    pub a: u64,
    /// Box number among length-`a` boxes (`1..=l_a`).
    pub b: u64,
    /// Slot within the box (`1..=a`).
    pub c: u64,
}

/// A position `n` resolved against the ladder: the unique region index `i`
/// with `L_i < n <= L_{i+1}`, the offset `m = n - L_i` into that region, and
/// its split `m = alpha*(i+1) + beta` into full boxes plus remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct PositionSplit {
    /// Region index: positions here sit in boxes of length `i + 1`.
    pub i: u64,
    /// Offset into the region, `1 <= m <= (i+1) * l_{i+1}`.
    pub m: u64,
    /// Completed boxes of length `i + 1` before this position.
    pub alpha: u64,
    /// Leftover slots into the current box (`0` means the position closes
    /// a box).
    pub beta: u64,
}

#[derive(Debug, Default)]
struct LadderMemo {
    /// `nu_{j}` for `j >= 2`, at index `j - 2`.
    nu: Vec<u64>,
    /// `l_i` at index `i - 1`.
    l: Vec<u64>,
    /// `L_i = sum_{j<=i} j*l_j` at index `i - 1`.
    big_l: Vec<u64>,
    /// `sum_{j<=i} l_j` at index `i - 1` (total number of boxes through
    /// region `i`).
    boxes: Vec<u64>,
}

/// Memoizing view of the box ladder over one base sequence.
#[derive(Debug)]
pub struct Ladder {
    seq: BasicSequence,
    memo: Mutex<LadderMemo>,
}

impl Ladder {
    /// Build a (lazy) ladder over the given base sequence.
    #[must_use]
    pub fn new(seq: BasicSequence) -> Self {
        Ladder { seq, memo: Mutex::new(LadderMemo::default()) }
    }

    /// The underlying base sequence.
    #[must_use]
    pub fn seq(&self) -> &BasicSequence {
        &self.seq
    }

    /// `nu_j`: the certified minimal index from which `q_m >= 2j^2` holds
    /// for every `m >= nu_j`.
    ///
    /// # Errors
    ///
    /// Propagates threshold failures (table families without a tail
    /// certificate).
    pub fn nu(&self, j: u64) -> Result<u64, LadderError> {
        assert!(j >= 1, "nu is 1-indexed");
        if j == 1 {
            return Ok(1); // every base is >= 2 by definition
        }
        let mut memo = self.memo.lock().expect("ladder memo");
        self.extend_nu(&mut memo, j)?;
        Ok(memo.nu[(j - 2) as usize])
    }

    fn extend_nu(&self, memo: &mut LadderMemo, j: u64) -> Result<(), LadderError> {
        while (memo.nu.len() as u64) < j - 1 {
            let next = memo.nu.len() as u64 + 2;
            let bound = BigUint::from(2u32) * next * next;
            memo.nu.push(self.seq.threshold(&bound)?);
        }
        Ok(())
    }

    fn extend_regions(&self, memo: &mut LadderMemo, i: u64) -> Result<(), LadderError> {
        while (memo.l.len() as u64) < i {
            let a = memo.l.len() as u64 + 1;
            self.extend_nu(memo, a + 1)?;
            let nu_next = memo.nu[(a - 1) as usize];
            let l = if a == 1 {
                nu_next.saturating_sub(1).max(1)
            } else {
                let prev = memo.big_l[(a - 2) as usize];
                let deficit = (nu_next.saturating_sub(1)).saturating_sub(prev);
                deficit.div_ceil(a).max(1)
            };
            let prev_big = memo.big_l.last().copied().unwrap_or(0);
            let prev_boxes = memo.boxes.last().copied().unwrap_or(0);
            memo.l.push(l);
            memo.big_l.push(prev_big + a * l);
            memo.boxes.push(prev_boxes + l);
        }
        Ok(())
    }

    /// `l_a`: how many boxes of length `a` the ladder lays down.
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn box_count(&self, a: u64) -> Result<u64, LadderError> {
        assert!(a >= 1, "box lengths start at 1");
        let mut memo = self.memo.lock().expect("ladder memo");
        self.extend_regions(&mut memo, a)?;
        Ok(memo.l[(a - 1) as usize])
    }

    /// `L_a = sum_{j<=a} j*l_j`: the last position covered by boxes of
    /// length `<= a` (`L_0 = 0`).
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn region_end(&self, a: u64) -> Result<u64, LadderError> {
        if a == 0 {
            return Ok(0);
        }
        let mut memo = self.memo.lock().expect("ladder memo");
        self.extend_regions(&mut memo, a)?;
        Ok(memo.big_l[(a - 1) as usize])
    }

    /// Total number of boxes of length `<= a`.
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn boxes_through(&self, a: u64) -> Result<u64, LadderError> {
        if a == 0 {
            return Ok(0);
        }
        let mut memo = self.memo.lock().expect("ladder memo");
        self.extend_regions(&mut memo, a)?;
        Ok(memo.boxes[(a - 1) as usize])
    }

    /// The position of box slot `(a, b, c)`:
    /// `L_{a-1} + (b-1)*a + c`.
    ///
    /// # Errors
    ///
    /// [`LadderError::InvalidBoxIndex`] if `b` exceeds `l_a` or `c` exceeds
    /// `a`.
    pub fn position(&self, idx: BoxIndex) -> Result<u64, LadderError> {
        let BoxIndex { a, b, c } = idx;
        let count = if a >= 1 { self.box_count(a)? } else { 0 };
        if a < 1 || b < 1 || b > count || c < 1 || c > a {
            return Err(LadderError::InvalidBoxIndex { a, b, c, count });
        }
        Ok(self.region_end(a - 1)? + (b - 1) * a + c)
    }

    /// Resolve a position against the ladder (see [`PositionSplit`]).
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn split(&self, n: u64) -> Result<PositionSplit, LadderError> {
        assert!(n >= 1, "positions are 1-indexed");
        let mut memo = self.memo.lock().expect("ladder memo");
        while memo.big_l.last().copied().unwrap_or(0) < n {
            let next = memo.l.len() as u64 + 1;
            self.extend_regions(&mut memo, next)?;
        }
        // First region whose end reaches n: L_i < n <= L_{i+1}.
        let pos = memo.big_l.partition_point(|&end| end < n);
        let i = pos as u64; // L_i is big_l[i-1]; here big_l[pos] is L_{i+1}
        let l_i = if i == 0 { 0 } else { memo.big_l[(i - 1) as usize] };
        let m = n - l_i;
        Ok(PositionSplit { i, m, alpha: m / (i + 1), beta: m % (i + 1) })
    }

    /// The box coordinates holding position `n` (inverse of
    /// [`Ladder::position`]).
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn box_index(&self, n: u64) -> Result<BoxIndex, LadderError> {
        let split = self.split(n)?;
        let a = split.i + 1;
        let b = split.m.div_ceil(a);
        let c = split.m - (b - 1) * a;
        Ok(BoxIndex { a, b, c })
    }

    /// `A(k)`: the length of the `k`-th box (boxes numbered across the whole
    /// ladder in position order).
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn level_box_length(&self, k: u64) -> Result<u64, LadderError> {
        assert!(k >= 1, "boxes are 1-indexed");
        let mut memo = self.memo.lock().expect("ladder memo");
        while memo.boxes.last().copied().unwrap_or(0) < k {
            let next = memo.l.len() as u64 + 1;
            self.extend_regions(&mut memo, next)?;
        }
        let pos = memo.boxes.partition_point(|&count| count < k);
        Ok(pos as u64 + 1)
    }

    /// `gamma(k)`: the position at which the `k`-th box ends
    /// (`gamma(0) = 0`). With all-ones ladders this is `tau(k)`.
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn level_end(&self, k: u64) -> Result<u64, LadderError> {
        if k == 0 {
            return Ok(0);
        }
        let p = self.level_box_length(k)?;
        let boxes_before = self.boxes_through(p - 1)?;
        Ok(self.region_end(p - 1)? + (k - boxes_before) * p)
    }

    /// Whether every `l_i` for `i <= through` equals 1 (the common case for
    /// fast-growing families; several closed-form estimates require it).
    ///
    /// # Errors
    ///
    /// Propagates threshold failures.
    pub fn all_ones(&self, through: u64) -> Result<bool, LadderError> {
        for a in 1..=through {
            if self.box_count(a)? != 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
