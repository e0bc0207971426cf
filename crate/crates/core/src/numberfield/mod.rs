//! Exact arithmetic over declared real-number bases, plus algebraic-integer
//! classification (Pisot numbers, Pisot families, totally non-Pisot sets).

mod algebraic;
mod basis;
pub mod hp;
mod matrix;
mod poly;
mod vector;

pub use algebraic::{
    is_pisot, is_pisot_family, is_totally_non_pisot, AlgebraicScalar, PisotReport, PisotStatus,
};
pub use basis::{
    BasisScalar, BasisSymbol, CoordinateBasis, CoordinateBasisBuilder, FreeWitness, SymbolKind,
};
pub use matrix::{q_action_matrix, RatMatrix};
pub use poly::{conjugates, MinimalPolynomial, MAX_FACTOR_DEGREE};
pub use vector::SymbolicVector;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used for every coefficient in the crate.
pub type Rational = BigRational;

/// Conjugates whose modulus lies this close to 1 are never classified.
pub const UNIT_CIRCLE_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumberFieldError {
    #[error("polynomial {0:?} is not monic")]
    NotMonic(Vec<i64>),
    #[error("polynomial must have degree at least 1")]
    DegreeTooLow,
    #[error("degree {0} exceeds the factorization limit of {MAX_FACTOR_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("polynomial {poly:?} is reducible: factor {factor:?}")]
    Reducible { poly: Vec<i64>, factor: Vec<i64> },
    #[error("roots of {0:?} cannot be isolated at working precision")]
    AmbiguousIsolation(Vec<i64>),
    #[error("root finding did not converge for {0:?}")]
    NoConvergence(Vec<i64>),
    #[error("scalar is not real")]
    NonReal,
    #[error("precondition violated: |theta| = {0} must exceed 1")]
    ModulusTooSmall(f64),
    #[error(
        "conjugate of modulus {0} lies within the unit-circle guard band; classification undecided"
    )]
    UndecidedModulus(f64),
    #[error("empty set of algebraic integers")]
    EmptySet,
    #[error("product table has no entry for {lhs}*{rhs}")]
    MissingProduct { lhs: String, rhs: String },
    #[error("undeclared symbol '{0}'")]
    UnknownSymbol(String),
    #[error("symbol '{0}' declared twice")]
    DuplicateSymbol(String),
    #[error("invalid symbol name '{0}'")]
    InvalidSymbolName(String),
    #[error("cannot parse '{input}': {msg}")]
    Parse { input: String, msg: String },
    #[error("product table identity {lhs}*{rhs} fails numerically (residual {residual:e})")]
    ProductMismatch {
        lhs: String,
        rhs: String,
        residual: f64,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rational coefficient exceeds the {0}-bit budget")]
    BitBudget(u64),
}

pub type Result<T, E = NumberFieldError> = std::result::Result<T, E>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    // BigRational::to_f64 handles huge numerators/denominators without overflow
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `12`, `-3/4` or a decimal literal such as `0.37` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = |msg: &str| NumberFieldError::Parse {
        input: s.to_string(),
        msg: msg.to_string(),
    };
    if t.is_empty() {
        return Err(err("empty number"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part, exp) = split_decimal(body).ok_or_else(|| err("bad decimal"))?;
    let digits = format!("{int_part}{frac_part}");
    let mut value =
        Rational::from_integer(digits.parse::<BigInt>().map_err(|_| err("bad digits"))?);
    let scale = exp - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if neg { -value } else { value })
}

fn split_decimal(body: &str) -> Option<(&str, &str, i64)> {
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !ok(int_part) || !ok(frac_part) || (int_part.is_empty() && frac_part.is_empty()) {
        return None;
    }
    Some((
        if int_part.is_empty() { "0" } else { int_part },
        frac_part,
        exp,
    ))
}

/// Canonical text form of a rational: `n` or `n/d`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Number of bits in the larger of numerator and denominator.
pub fn rational_bits(r: &Rational) -> u64 {
    r.numer().abs().bits().max(r.denom().bits())
}
