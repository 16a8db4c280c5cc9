//! Order-independent summation.
//!
//! Every statistic in this crate is a sum over pairs or rows. Summing with a
//! fixed-point superaccumulator makes the result independent of the order in
//! which terms arrive, so permuting observations or changing the number of
//! worker threads cannot change a single bit of the output.

const CHUNK_BITS: u32 = 32;
const CHUNK_MASK: u128 = (1u128 << CHUNK_BITS) - 1;
// f64 values are m * 2^e with e in [-1074, 971] and m < 2^53; shifting by
// 1074 maps the exponent range onto bit positions [0, 2045]. 67 chunks of 32
// bits cover that range plus carry headroom.
const N_CHUNKS: usize = 67;
const EXP_BIAS: i32 = 1074;
// Each add moves a chunk by less than 2^32, so i64 chunks are safe for 2^31
// additions between normalisations.
const NORMALIZE_EVERY: u32 = 1 << 30;

/// Exact accumulator for `f64` sums.
///
/// The running state is an exact integer multiple of 2^-1074, so any two
/// sequences of additions with the same multiset of terms reach the same
/// state. Conversion back to `f64` is deterministic and accurate to a few ulps.
#[derive(Clone, Debug)]
pub struct ExactSum {
    chunks: [i64; N_CHUNKS],
    pending: u32,
    nonfinite: f64,
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum {
            chunks: [0; N_CHUNKS],
            pending: 0,
            nonfinite: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        if !value.is_finite() {
            self.nonfinite += value;
            return;
        }
        let bits = value.to_bits();
        let biased_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, shift) = if biased_exp == 0 {
            (frac, 0)
        } else {
            (frac | (1u64 << 52), biased_exp - 1)
        };
        if mantissa == 0 {
            return;
        }
        let idx = (shift as u32 / CHUNK_BITS) as usize;
        let offset = shift as u32 % CHUNK_BITS;
        let wide = (mantissa as u128) << offset;
        let lo = (wide & CHUNK_MASK) as i64;
        let mid = ((wide >> CHUNK_BITS) & CHUNK_MASK) as i64;
        let hi = (wide >> (2 * CHUNK_BITS)) as i64;
        if bits >> 63 == 0 {
            self.chunks[idx] += lo;
            self.chunks[idx + 1] += mid;
            self.chunks[idx + 2] += hi;
        } else {
            self.chunks[idx] -= lo;
            self.chunks[idx + 1] -= mid;
            self.chunks[idx + 2] -= hi;
        }
        self.pending += 1;
        if self.pending >= NORMALIZE_EVERY {
            self.normalize();
        }
    }

    /// Adds another accumulator's exact state into this one.
    pub fn merge(&mut self, other: &ExactSum) {
        let mut other = other.clone();
        other.normalize();
        self.normalize();
        for (a, b) in self.chunks.iter_mut().zip(other.chunks.iter()) {
            *a += *b;
        }
        self.pending = 2;
        self.nonfinite += other.nonfinite;
    }

    fn normalize(&mut self) {
        for i in 0..N_CHUNKS - 1 {
            let carry = self.chunks[i] >> CHUNK_BITS;
            self.chunks[i] -= carry << CHUNK_BITS;
            self.chunks[i + 1] += carry;
        }
        self.pending = 0;
    }

    pub fn value(&self) -> f64 {
        if self.nonfinite != 0.0 {
            return self.nonfinite;
        }
        let mut state = self.clone();
        state.normalize();
        // Normalised digits are nonnegative below a signed top chunk; flip
        // negative totals so every digit is a nonnegative magnitude.
        let negative = state.chunks[N_CHUNKS - 1] < 0;
        if negative {
            for c in state.chunks.iter_mut() {
                *c = -*c;
            }
            state.normalize();
        }
        let mut total = 0.0f64;
        for i in (0..N_CHUNKS).rev() {
            let chunk = state.chunks[i];
            if chunk != 0 {
                let exp = (i as i32) * CHUNK_BITS as i32 - EXP_BIAS;
                total += chunk as f64 * pow2(exp);
            }
        }
        if negative {
            -total
        } else {
            total
        }
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = ExactSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Exact, order-independent sum of an iterator of `f64`.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<ExactSum>().value()
}

fn pow2(exp: i32) -> f64 {
    if exp > 1023 {
        f64::INFINITY
    } else if exp >= -1022 {
        f64::from_bits(((exp + 1023) as u64) << 52)
    } else if exp >= -1074 {
        f64::from_bits(1u64 << (exp + 1074))
    } else {
        // Chunk 0 sits at 2^-1074; lower exponents never occur.
        0.0
    }
}
