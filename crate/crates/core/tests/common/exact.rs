//! Exactly rounded float summation through big integers: every f64 is an
//! integer multiple of 2^-1074, so sums are exact once scaled.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

const SCALE_BITS: i64 = 1074;

fn scaled(x: f64) -> BigInt {
    assert!(x.is_finite(), "cannot sum {x}");
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, power) = if exponent == 0 {
        (fraction, 1 - 1075)
    } else {
        (fraction | (1u64 << 52), exponent - 1075)
    };
    let magnitude = BigInt::from(mantissa) << (power + SCALE_BITS) as usize;
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Rounds `n * 2^-1074` to the nearest f64, ties to even.
fn to_f64(n: &BigInt) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let negative = n.sign() == Sign::Minus;
    let magnitude = n.abs();
    let len = magnitude.bits() as i64;
    let bits = if len <= 53 {
        magnitude.to_u64().expect("fits in 53 bits")
    } else {
        let mut shift = len - 53;
        let mut q = &magnitude >> shift as usize;
        let remainder = &magnitude - (&q << shift as usize);
        let half = BigInt::one() << (shift - 1) as usize;
        let odd = (&q & BigInt::one()) == BigInt::one();
        if remainder > half || (remainder == half && odd) {
            q += 1;
        }
        if q.bits() > 53 {
            q >>= 1;
            shift += 1;
        }
        let biased = (shift + 1) as u64;
        assert!(biased < 0x7ff, "sum overflows f64");
        (biased << 52) | (q.to_u64().expect("53-bit quotient") - (1u64 << 52))
    };
    let v = f64::from_bits(bits);
    if negative {
        -v
    } else {
        v
    }
}

pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let total: BigInt = values.into_iter().map(scaled).sum();
    to_f64(&total)
}
