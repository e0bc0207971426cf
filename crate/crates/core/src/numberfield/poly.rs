use num_complex::Complex64;

use super::{NumberFieldError, Result};

/// Largest degree for which irreducibility is checked by root-subset search.
pub const MAX_FACTOR_DEGREE: usize = 8;

/// Monic irreducible polynomial over the integers, coefficients stored
/// lowest degree first (`x^2 - x - 1` is `[-1, -1, 1]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinimalPolynomial {
    coeffs: Vec<i64>,
}

impl MinimalPolynomial {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(NumberFieldError::DegreeTooLow);
        }
        if *coeffs.last().unwrap() != 1 {
            return Err(NumberFieldError::NotMonic(coeffs));
        }
        let degree = coeffs.len() - 1;
        if degree > MAX_FACTOR_DEGREE {
            return Err(NumberFieldError::DegreeTooLarge(degree));
        }
        if let Some(factor) = find_factor(&coeffs)? {
            return Err(NumberFieldError::Reducible {
                poly: coeffs,
                factor,
            });
        }
        Ok(MinimalPolynomial { coeffs })
    }

    /// `x - n`.
    pub fn linear(n: i64) -> Self {
        MinimalPolynomial {
            coeffs: vec![-n, 1],
        }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        horner(&self.coeffs, z).0
    }

    /// Human-readable form such as `x^2 - x - 3`.
    pub fn to_display(&self) -> String {
        let mut out = String::new();
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            let mag = c.unsigned_abs();
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let mono = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag == 1 {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}{mono}"));
            }
        }
        out
    }
}

/// All complex roots of a monic integer polynomial, closed under complex
/// conjugation, sorted by decreasing modulus then argument.
pub fn conjugates(poly: &MinimalPolynomial) -> Result<Vec<Complex64>> {
    polynomial_roots(poly.coeffs())
}

fn horner(coeffs: &[i64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex64::new(c as f64, 0.0);
    }
    (p, dp)
}

pub(crate) fn polynomial_roots(coeffs: &[i64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    if n == 1 {
        return Ok(vec![Complex64::new(-coeffs[0] as f64, 0.0)]);
    }
    let bound = 1.0
        + coeffs[..n]
            .iter()
            .map(|&c| (c as f64).abs())
            .fold(0.0, f64::max);
    let radius = (coeffs[0] as f64)
        .abs()
        .powf(1.0 / n as f64)
        .clamp(0.5, bound);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();

    let mut converged = false;
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = horner(coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged
        && z.iter()
            .any(|r| horner(coeffs, *r).0.norm() > 1e-6 * scale_at(coeffs, *r))
    {
        return Err(NumberFieldError::NoConvergence(coeffs.to_vec()));
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(coeffs, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.is_finite() {
                *r -= step;
            }
        }
    }
    Ok(symmetrize(z))
}

fn scale_at(coeffs: &[i64], z: Complex64) -> f64 {
    let m = z.norm().max(1.0);
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| (c as f64).abs() * m.powi(k as i32))
        .sum()
}

fn symmetrize(mut z: Vec<Complex64>) -> Vec<Complex64> {
    for r in z.iter_mut() {
        if r.im.abs() < 1e-10 * (1.0 + r.re.abs()) {
            r.im = 0.0;
        }
    }
    let mut used = vec![false; z.len()];
    for i in 0..z.len() {
        if used[i] || z[i].im <= 0.0 {
            continue;
        }
        let target = z[i].conj();
        let partner = (0..z.len())
            .filter(|&j| !used[j] && j != i && z[j].im < 0.0)
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()));
        if let Some(j) = partner {
            let avg = (z[i] + z[j].conj()) * 0.5;
            z[i] = avg;
            z[j] = avg.conj();
            used[i] = true;
            used[j] = true;
        }
    }
    z.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.arg().total_cmp(&a.arg()))
    });
    z
}

/// Searches for a monic integer factor of degree between 1 and deg/2.
fn find_factor(coeffs: &[i64]) -> Result<Option<Vec<i64>>> {
    let n = coeffs.len() - 1;
    if n == 1 {
        return Ok(None);
    }
    if coeffs[0] == 0 {
        return Ok(Some(vec![0, 1]));
    }
    for r in divisors(coeffs[0].unsigned_abs()) {
        for cand in [r as i128, -(r as i128)] {
            if eval_i128(coeffs, cand) == Some(0) {
                return Ok(Some(vec![-(cand as i64), 1]));
            }
        }
    }
    let roots = polynomial_roots(coeffs)?;
    for k in 2..=n / 2 {
        let mut found = None;
        for_each_subset(n, k, &mut |subset| {
            if found.is_some() {
                return;
            }
            if let Some(g) = integer_product_poly(subset.iter().map(|&i| roots[i])) {
                if divides_exactly(coeffs, &g) {
                    found = Some(g);
                }
            }
        });
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out
}

fn eval_i128(coeffs: &[i64], x: i128) -> Option<i128> {
    let mut acc: i128 = 0;
    for &c in coeffs.iter().rev() {
        acc = acc.checked_mul(x)?.checked_add(c as i128)?;
    }
    Some(acc)
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn integer_product_poly(roots: impl Iterator<Item = Complex64>) -> Option<Vec<i64>> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += *c;
            next[i] -= *c * r;
        }
        poly = next;
    }
    poly.iter()
        .map(|c| {
            let rounded = c.re.round();
            let tol = 1e-6 * (1.0 + c.re.abs());
            if c.im.abs() < tol && (c.re - rounded).abs() < tol && rounded.abs() < 9.0e15 {
                Some(rounded as i64)
            } else {
                None
            }
        })
        .collect()
}

fn divides_exactly(num: &[i64], den: &[i64]) -> bool {
    let mut rem: Vec<i128> = num.iter().map(|&c| c as i128).collect();
    let dn = den.len() - 1;
    for shift in (0..=rem.len() - 1 - dn).rev() {
        let q = rem[shift + dn];
        if q == 0 {
            continue;
        }
        for (i, &c) in den.iter().enumerate() {
            match rem[shift + i].checked_sub(q * c as i128) {
                Some(v) => rem[shift + i] = v,
                None => return false,
            }
        }
    }
    rem.iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_roots() {
        let p = MinimalPolynomial::new(vec![-1, -1, 1]).unwrap();
        let r = conjugates(&p).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((r[0].re - phi).abs() < 1e-14);
        assert!((r[1].re - (1.0 - phi)).abs() < 1e-14);
        assert_eq!(r[0].im, 0.0);
    }

    #[test]
    fn complex_roots_are_conjugate_pairs() {
        // x^3 - x - 1: plastic number plus a complex pair
        let p = MinimalPolynomial::new(vec![-1, -1, 0, 1]).unwrap();
        let r = conjugates(&p).unwrap();
        assert!((r[0].re - 1.324_717_957_244_746).abs() < 1e-13);
        assert_eq!(r[1], r[2].conj());
        for z in &r {
            assert!(p.eval_complex(*z).norm() < 1e-12);
        }
    }

    #[test]
    fn reducible_inputs_are_rejected() {
        // (x^2 + 1)(x^2 - 2)
        let err = MinimalPolynomial::new(vec![-2, 0, -1, 0, 1]).unwrap_err();
        assert!(matches!(err, NumberFieldError::Reducible { .. }));
        // (x - 2)(x + 3)
        assert!(MinimalPolynomial::new(vec![-6, 1, 1]).is_err());
        assert!(MinimalPolynomial::new(vec![0, 0, 1]).is_err());
        assert!(MinimalPolynomial::new(vec![1, 2]).is_err());
    }

    #[test]
    fn irreducible_quartic_accepted() {
        // x^4 - 10x^2 + 1 has no rational roots and no quadratic factor over Z
        assert!(MinimalPolynomial::new(vec![1, 0, -10, 0, 1]).is_ok());
    }

    #[test]
    fn display_form() {
        let p = MinimalPolynomial::new(vec![-3, -1, 1]).unwrap();
        assert_eq!(p.to_display(), "x^2 - x - 3");
    }

    #[test]
    fn subsets_enumerated() {
        let mut count = 0;
        for_each_subset(6, 3, &mut |_| count += 1);
        assert_eq!(count, 20);
    }
}
