#![allow(dead_code)]

//! Arbitrary-precision reference for the temperature softmax.

use num_bigint::BigInt;

const SCALE: u32 = 320;

/// `x` as a fixed-point integer `x · 2^SCALE`, exactly.
fn fixed(x: f64) -> BigInt {
    if x == 0.0 {
        return BigInt::from(0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1 << 52) - 1);
    let (mantissa, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    let m = BigInt::from(mantissa) * sign;
    let shift = e + SCALE as i32;
    assert!(shift >= 0, "value too small for the fixed-point scale");
    m << shift as usize
}

fn one() -> BigInt {
    BigInt::from(1) << SCALE as usize
}

/// exp(z) for fixed-point z <= 0: halve until |z| < 1/2, sum the Taylor
/// series, then square back up.
fn exp_fixed(z: &BigInt) -> BigInt {
    let f = one();
    let half = &f >> 1usize;
    let mut z = z.clone();
    let mut halvings = 0;
    while z.magnitude() > half.magnitude() {
        z >>= 1usize;
        halvings += 1;
    }
    let mut sum = f.clone();
    let mut term = f.clone();
    for n in 1u32.. {
        term = term * &z / (&f * n);
        if term == BigInt::from(0) {
            break;
        }
        sum += &term;
    }
    for _ in 0..halvings {
        sum = &sum * &sum / &f;
    }
    sum
}

fn to_f64(p: &BigInt) -> f64 {
    let top: BigInt = p >> (SCALE - 60) as usize;
    u64::try_from(&top).unwrap() as f64 / (1u64 << 60) as f64
}

pub fn oracle(logits: &[f64], tau: f64) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f = one();
    let t = fixed(tau);
    let weights: Vec<BigInt> = logits.iter().map(|&l| exp_fixed(&((fixed(l) - fixed(max)) * &f / &t))).collect();
    let total: BigInt = weights.iter().sum();
    weights.iter().map(|w| to_f64(&(w * &f / &total))).collect()
}
