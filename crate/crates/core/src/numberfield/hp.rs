//! Dyadic high-precision helpers built on exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{MinimalPolynomial, Rational};

/// Default working precision in bits for residue computations.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Working precision, overridable through `TILESCOPE_PRECISION_BITS`.
pub fn precision_bits() -> u32 {
    std::env::var("TILESCOPE_PRECISION_BITS")
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|&b| (32..=4096).contains(&b))
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Rounds `r` to the nearest multiple of `2^-bits`.
pub fn to_dyadic(r: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits;
    let scaled = r * Rational::from_integer(scale.clone());
    let n = scaled.numer();
    let d = scaled.denom();
    let (q, rem) = n.div_mod_floor(d);
    let twice: BigInt = rem * 2;
    let q = if &twice >= d { q + 1 } else { q };
    Rational::new(q, scale)
}

fn eval_exact(poly: &MinimalPolynomial, x: &Rational) -> Rational {
    poly.coeffs()
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, &c| {
            acc * x + Rational::from_integer(BigInt::from(c))
        })
}

/// Refines a simple real root near `approx` to an interval of width `2^-bits`
/// by exact rational bisection and returns its midpoint.
pub fn refine_real_root(poly: &MinimalPolynomial, approx: f64, radius: f64, bits: u32) -> Rational {
    if poly.degree() == 1 {
        return Rational::from_integer(BigInt::from(-poly.coeffs()[0]));
    }
    let mut delta = (1e-9 * approx.abs().max(1.0)).min(radius * 0.5);
    let center = from_f64(approx);
    let (mut lo, mut hi) = loop {
        let d = from_f64(delta);
        let lo = &center - &d;
        let hi = &center + &d;
        let slo = eval_exact(poly, &lo);
        let shi = eval_exact(poly, &hi);
        if slo.is_zero() {
            return lo;
        }
        if shi.is_zero() {
            return hi;
        }
        if slo.is_negative() != shi.is_negative() || delta >= radius {
            break (lo, hi);
        }
        delta = (delta * 4.0).min(radius);
    };
    let lo_negative = eval_exact(poly, &lo).is_negative();
    let eps = Rational::new(BigInt::one(), BigInt::one() << bits);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    while &hi - &lo > eps {
        let mid = to_dyadic(&((&lo + &hi) * &half), bits + 8);
        let v = eval_exact(poly, &mid);
        if v.is_zero() {
            return mid;
        }
        if v.is_negative() == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    to_dyadic(&((lo + hi) * half), bits)
}
