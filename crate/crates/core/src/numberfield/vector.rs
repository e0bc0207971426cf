use std::fmt;

use num_traits::Zero;

use super::{
    rat_to_f64, rational_bits, BasisScalar, CoordinateBasis, NumberFieldError, RatMatrix, Rational,
    Result,
};

/// Point of ℝ^d whose coordinates are exact combinations of basis symbols.
///
/// Coefficients are stored row-major: entry `i * s + k` is the coefficient
/// of basis symbol `k` in coordinate `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicVector {
    dim: usize,
    s: usize,
    coeffs: Vec<Rational>,
}

impl SymbolicVector {
    pub fn zero(dim: usize, s: usize) -> Self {
        SymbolicVector {
            dim,
            s,
            coeffs: vec![Rational::zero(); dim * s],
        }
    }

    pub fn from_flat(dim: usize, s: usize, coeffs: Vec<Rational>) -> Self {
        assert_eq!(coeffs.len(), dim * s, "coefficient count must be dim * s");
        SymbolicVector { dim, s, coeffs }
    }

    pub fn from_scalars(coords: &[BasisScalar]) -> Self {
        let s = coords.first().map_or(1, |c| c.len());
        let coeffs = coords.iter().flat_map(|c| c.0.iter().cloned()).collect();
        SymbolicVector {
            dim: coords.len(),
            s,
            coeffs,
        }
    }

    pub fn from_ints(coords: &[i64], s: usize) -> Self {
        let scalars: Vec<BasisScalar> = coords
            .iter()
            .map(|&c| BasisScalar::from_int(c, s))
            .collect();
        if scalars.is_empty() {
            return Self::zero(0, s);
        }
        Self::from_scalars(&scalars)
    }

    /// Parses one expression per coordinate.
    pub fn parse(basis: &CoordinateBasis, coords: &[&str]) -> Result<Self> {
        let scalars = coords
            .iter()
            .map(|c| basis.parse(c))
            .collect::<Result<Vec<_>>>()?;
        if scalars.is_empty() {
            return Ok(Self::zero(0, basis.len()));
        }
        Ok(Self::from_scalars(&scalars))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_len(&self) -> usize {
        self.s
    }

    pub fn flat(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coord(&self, i: usize) -> BasisScalar {
        BasisScalar(self.coeffs[i * self.s..(i + 1) * self.s].to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        SymbolicVector {
            dim: self.dim,
            s: self.s,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn eval_f64(&self, values: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.coeffs[i * self.s..(i + 1) * self.s]
                    .iter()
                    .zip(values)
                    .map(|(c, v)| rat_to_f64(c) * v)
                    .sum()
            })
            .collect()
    }

    pub fn eval_exact(&self, values: &[Rational]) -> Vec<Rational> {
        (0..self.dim)
            .map(|i| self.coord(i).eval_exact(values))
            .collect()
    }

    /// Applies a (d·s)×(d·s) action matrix to the coefficient vector.
    pub fn apply(&self, m: &RatMatrix) -> Self {
        SymbolicVector {
            dim: self.dim,
            s: self.s,
            coeffs: m.mul_vec(&self.coeffs),
        }
    }

    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(rational_bits).max().unwrap_or(0)
    }

    /// Fails once any coefficient outgrows `budget` bits.
    pub fn check_budget(&self, budget: u64) -> Result<()> {
        if self.max_bits() > budget {
            Err(NumberFieldError::BitBudget(budget))
        } else {
            Ok(())
        }
    }

    pub fn display<'a>(&'a self, basis: &'a CoordinateBasis) -> impl fmt::Display + 'a {
        DisplayVector { v: self, basis }
    }
}

impl std::ops::Add for &SymbolicVector {
    type Output = SymbolicVector;
    fn add(self, rhs: &SymbolicVector) -> SymbolicVector {
        debug_assert_eq!((self.dim, self.s), (rhs.dim, rhs.s));
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        SymbolicVector {
            dim: self.dim,
            s: self.s,
            coeffs,
        }
    }
}

impl std::ops::Sub for &SymbolicVector {
    type Output = SymbolicVector;
    fn sub(self, rhs: &SymbolicVector) -> SymbolicVector {
        debug_assert_eq!((self.dim, self.s), (rhs.dim, rhs.s));
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        SymbolicVector {
            dim: self.dim,
            s: self.s,
            coeffs,
        }
    }
}

impl std::ops::Neg for &SymbolicVector {
    type Output = SymbolicVector;
    fn neg(self) -> SymbolicVector {
        SymbolicVector {
            dim: self.dim,
            s: self.s,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

struct DisplayVector<'a> {
    v: &'a SymbolicVector,
    basis: &'a CoordinateBasis,
}

impl fmt::Display for DisplayVector<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.v.dim)
            .map(|i| self.basis.format(&self.v.coord(i)))
            .collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::basis::tests::tau_a_basis;

    #[test]
    fn add_then_subtract_is_identity() {
        let b = tau_a_basis();
        let u = SymbolicVector::parse(&b, &["tau", "a - 1/2"]).unwrap();
        let v = SymbolicVector::parse(&b, &["3*atau", "2"]).unwrap();
        assert_eq!(&(&u + &v) - &v, u);
        let e = u.eval_f64(b.values());
        assert!((e[0] - 1.618_033_988_749_895).abs() < 1e-14);
    }

    #[test]
    fn display_uses_symbol_names() {
        let b = tau_a_basis();
        let u = SymbolicVector::parse(&b, &["tau-1", "0"]).unwrap();
        assert_eq!(u.display(&b).to_string(), "[-1 + tau; 0]");
    }
}
