use num_complex::Complex64;
use serde::Serialize;

use super::poly::conjugates;
use super::{hp, MinimalPolynomial, NumberFieldError, Rational, Result, UNIT_CIRCLE_GUARD};

/// One specific root of a minimal polynomial, identified by an isolation disk.
#[derive(Debug, Clone)]
pub struct AlgebraicScalar {
    minpoly: MinimalPolynomial,
    approx: Complex64,
    isolation_radius: f64,
    conjugates: Vec<Complex64>,
}

impl PartialEq for AlgebraicScalar {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly && self.contains(other.approx)
    }
}

impl AlgebraicScalar {
    /// Selects the root of `minpoly` closest to `hint`.
    pub fn new(minpoly: MinimalPolynomial, hint: Complex64) -> Result<Self> {
        let roots = conjugates(&minpoly)?;
        let sep = min_separation(&roots);
        if sep < 1e-9 {
            return Err(NumberFieldError::AmbiguousIsolation(
                minpoly.coeffs().to_vec(),
            ));
        }
        let mut order: Vec<usize> = (0..roots.len()).collect();
        order.sort_by(|&a, &b| {
            (roots[a] - hint)
                .norm()
                .total_cmp(&(roots[b] - hint).norm())
        });
        if order.len() > 1 {
            let d0 = (roots[order[0]] - hint).norm();
            let d1 = (roots[order[1]] - hint).norm();
            if d1 - d0 < 1e-9 * d1.max(1.0) {
                return Err(NumberFieldError::AmbiguousIsolation(
                    minpoly.coeffs().to_vec(),
                ));
            }
        }
        let approx = roots[order[0]];
        let isolation_radius = if roots.len() == 1 { 1.0 } else { sep / 2.0 };
        Ok(AlgebraicScalar {
            minpoly,
            approx,
            isolation_radius,
            conjugates: roots,
        })
    }

    pub fn real(minpoly: MinimalPolynomial, hint: f64) -> Result<Self> {
        Self::new(minpoly, Complex64::new(hint, 0.0))
    }

    pub fn integer(n: i64) -> Self {
        let minpoly = MinimalPolynomial::linear(n);
        let approx = Complex64::new(n as f64, 0.0);
        AlgebraicScalar {
            minpoly,
            approx,
            isolation_radius: 1.0,
            conjugates: vec![approx],
        }
    }

    pub fn minpoly(&self) -> &MinimalPolynomial {
        &self.minpoly
    }

    pub fn approx(&self) -> Complex64 {
        self.approx
    }

    pub fn isolation_radius(&self) -> f64 {
        self.isolation_radius
    }

    /// Every root of the minimal polynomial, including this one.
    pub fn all_conjugates(&self) -> &[Complex64] {
        &self.conjugates
    }

    /// Conjugates other than the scalar itself.
    pub fn other_conjugates(&self) -> impl Iterator<Item = Complex64> + '_ {
        let me = self.approx;
        self.conjugates
            .iter()
            .copied()
            .filter(move |g| (*g - me).norm() >= self.isolation_radius)
    }

    pub fn is_real(&self) -> bool {
        self.approx.im == 0.0
    }

    pub fn real_value(&self) -> Option<f64> {
        self.is_real().then_some(self.approx.re)
    }

    /// Dyadic approximation with error below `2^-bits`, real scalars only.
    pub fn hp_value(&self, bits: u32) -> Option<Rational> {
        self.is_real().then(|| {
            hp::refine_real_root(&self.minpoly, self.approx.re, self.isolation_radius, bits)
        })
    }

    /// True when `z` lies in this scalar's isolation disk.
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.approx).norm() < self.isolation_radius
    }

    pub fn is_conjugate_of(&self, other: &AlgebraicScalar) -> bool {
        self.minpoly == other.minpoly
    }
}

fn min_separation(roots: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            best = best.min((roots[i] - roots[j]).norm());
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PisotStatus {
    Pisot,
    NotPisot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PisotReport {
    pub status: PisotStatus,
    /// `1 - max |gamma|` over the other conjugates; 1 when there are none.
    pub margin: f64,
}

fn guard(modulus: f64) -> Result<()> {
    if (modulus - 1.0).abs() < UNIT_CIRCLE_GUARD {
        Err(NumberFieldError::UndecidedModulus(modulus))
    } else {
        Ok(())
    }
}

/// Classifies a real algebraic integer of modulus above 1.
pub fn is_pisot(theta: &AlgebraicScalar) -> Result<PisotReport> {
    if !theta.is_real() {
        return Err(NumberFieldError::NonReal);
    }
    let m = theta.approx.norm();
    if m <= 1.0 {
        return Err(NumberFieldError::ModulusTooSmall(m));
    }
    let mut max_other: f64 = 0.0;
    let mut any = false;
    for g in theta.other_conjugates() {
        guard(g.norm())?;
        max_other = max_other.max(g.norm());
        any = true;
    }
    let margin = if any { 1.0 - max_other } else { 1.0 };
    let status = if margin > 0.0 {
        PisotStatus::Pisot
    } else {
        PisotStatus::NotPisot
    };
    Ok(PisotReport { status, margin })
}

fn large_conjugates(theta: &AlgebraicScalar) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for g in theta.all_conjugates() {
        guard(g.norm())?;
        if g.norm() >= 1.0 {
            out.push(*g);
        }
    }
    Ok(out)
}

fn in_set(set: &[AlgebraicScalar], minpoly: &MinimalPolynomial, z: Complex64) -> bool {
    set.iter().any(|t| t.minpoly == *minpoly && t.contains(z))
}

/// True iff every conjugate of modulus at least 1 of every member lies in the set.
pub fn is_pisot_family(set: &[AlgebraicScalar]) -> Result<bool> {
    if set.is_empty() {
        return Err(NumberFieldError::EmptySet);
    }
    for theta in set {
        for g in large_conjugates(theta)? {
            if !in_set(set, &theta.minpoly, g) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff no member has all of its large conjugates inside the set.
pub fn is_totally_non_pisot(set: &[AlgebraicScalar]) -> Result<bool> {
    if set.is_empty() {
        return Err(NumberFieldError::EmptySet);
    }
    for theta in set {
        let large = large_conjugates(theta)?;
        if large.iter().all(|g| in_set(set, &theta.minpoly, *g)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> AlgebraicScalar {
        AlgebraicScalar::real(MinimalPolynomial::new(vec![-1, -1, 1]).unwrap(), 1.6).unwrap()
    }

    fn b_root(hint: f64) -> AlgebraicScalar {
        AlgebraicScalar::real(MinimalPolynomial::new(vec![-3, -1, 1]).unwrap(), hint).unwrap()
    }

    #[test]
    fn pisot_classification() {
        let r = is_pisot(&golden()).unwrap();
        assert_eq!(r.status, PisotStatus::Pisot);
        assert!((r.margin - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(
            is_pisot(&b_root(2.3)).unwrap().status,
            PisotStatus::NotPisot
        );
        let three = is_pisot(&AlgebraicScalar::integer(3)).unwrap();
        assert_eq!(three.status, PisotStatus::Pisot);
        assert_eq!(three.margin, 1.0);
        assert!(matches!(
            is_pisot(&AlgebraicScalar::integer(1)),
            Err(NumberFieldError::ModulusTooSmall(_))
        ));
    }

    #[test]
    fn families() {
        assert!(is_pisot_family(&[golden()]).unwrap());
        assert!(!is_pisot_family(&[b_root(2.3)]).unwrap());
        assert!(is_pisot_family(&[b_root(2.3), b_root(-1.3)]).unwrap());
        assert!(is_pisot_family(&[]).is_err());
    }

    #[test]
    fn totally_non_pisot() {
        assert!(is_totally_non_pisot(&[b_root(2.3)]).unwrap());
        assert!(!is_totally_non_pisot(&[golden()]).unwrap());
        assert!(!is_totally_non_pisot(&[AlgebraicScalar::integer(3), golden()]).unwrap());
    }

    #[test]
    fn unit_circle_is_undecided() {
        // x^2 - x + 1 has both roots on the unit circle
        let p = MinimalPolynomial::new(vec![1, -1, 1]).unwrap();
        let z = AlgebraicScalar::new(p, Complex64::new(0.5, 0.86)).unwrap();
        assert!(matches!(
            is_pisot_family(&[z]),
            Err(NumberFieldError::UndecidedModulus(_))
        ));
    }

    #[test]
    fn equality_uses_isolation_disk() {
        assert_eq!(b_root(2.3), b_root(2.31));
        assert_ne!(b_root(2.3), b_root(-1.3));
    }

    #[test]
    fn hp_value_of_golden_ratio() {
        let v = golden().hp_value(128).unwrap();
        let residual = &v * &v - &v - Rational::from_integer(1.into());
        assert!(crate::numberfield::rat_to_f64(&residual).abs() < 1e-35);
    }
}
