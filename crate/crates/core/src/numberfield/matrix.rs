use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{rat_to_f64, BasisScalar, CoordinateBasis, NumberFieldError, Rational, Result};

/// Dense matrix over ℚ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| Rational::from_integer(BigInt::from(x)))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn pow(&self, n: u32) -> RatMatrix {
        let mut result = RatMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    pub fn sub(&self, rhs: &RatMatrix) -> RatMatrix {
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Row echelon form by Gauss-Jordan elimination; returns pivot columns.
    fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                self.data.swap(r * self.cols + j, p * self.cols + j);
            }
            let inv = self.get(r, c).recip();
            for j in 0..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in 0..self.cols {
                    let v = self.get(i, j) - &f * self.get(r, j);
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().reduce().len()
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = RatMatrix::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n, b[i].clone());
        }
        let pivots = aug.reduce();
        if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
            return None;
        }
        Some((0..n).map(|i| aug.get(i, n).clone()).collect())
    }

    /// Some solution of `self * x = b` for any shape (free variables set to
    /// zero), or `None` when the system is inconsistent.
    pub fn solve_consistent(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        let (n, m) = (self.rows, self.cols);
        let mut aug = RatMatrix::zeros(n, m + 1);
        for i in 0..n {
            for j in 0..m {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, m, b[i].clone());
        }
        let pivots = aug.reduce();
        if pivots.contains(&m) {
            return None;
        }
        let mut x = vec![Rational::zero(); m];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, m).clone();
        }
        Some(x)
    }

    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(c * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det *= &pivot;
            for i in c + 1..n {
                let f = m.get(i, c) / &pivot;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| rat_to_f64(self.get(i, j)))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }
}

/// Matrix of `v ↦ Q v` on the flattened coefficient space of d-vectors over
/// the basis (index `i * s + k` is coefficient `k` of coordinate `i`).
pub fn q_action_matrix(
    basis: &CoordinateBasis,
    q: &[BasisScalar],
    dim: usize,
) -> Result<RatMatrix> {
    if q.len() != dim * dim {
        return Err(NumberFieldError::Dimension(format!(
            "expected {} entries, got {}",
            dim * dim,
            q.len()
        )));
    }
    let s = basis.len();
    let mut m = RatMatrix::zeros(dim * s, dim * s);
    for i in 0..dim {
        for j in 0..dim {
            let entry = &q[i * dim + j];
            if entry.is_zero() {
                continue;
            }
            for k in 0..s {
                let image = basis.mul(entry, &BasisScalar::unit(k, s))?;
                for (l, c) in image.0.into_iter().enumerate() {
                    if !c.is_zero() {
                        m.set(i * s + l, j * s + k, c);
                    }
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::basis::tests::{golden_basis, tau_a_basis};
    use crate::numberfield::{rat, SymbolicVector};

    #[test]
    fn consistent_solve_handles_rectangular_systems() {
        let a = RatMatrix::from_ints(&[vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(
            a.solve_consistent(&[rat(2), rat(3), rat(5)]),
            Some(vec![rat(2), rat(3)])
        );
        assert_eq!(a.solve_consistent(&[rat(2), rat(3), rat(6)]), None);
    }

    #[test]
    fn scalar_expansion_is_scaled_identity() {
        let b = CoordinateBasis::rational();
        let q = vec![
            BasisScalar::from_int(3, 1),
            BasisScalar::zero(1),
            BasisScalar::zero(1),
            BasisScalar::from_int(3, 1),
        ];
        let m = q_action_matrix(&b, &q, 2).unwrap();
        let mut expect = RatMatrix::identity(2);
        for i in 0..2 {
            expect.set(i, i, rat(3));
        }
        assert_eq!(m, expect);
    }

    #[test]
    fn golden_companion_block() {
        let b = golden_basis();
        let q = vec![
            b.parse("3").unwrap(),
            b.parse("0").unwrap(),
            b.parse("0").unwrap(),
            b.parse("tau").unwrap(),
        ];
        let m = q_action_matrix(&b, &q, 2).unwrap();
        // tau * (p + q tau) = q + (p + q) tau
        let v = SymbolicVector::parse(&b, &["1", "2 + 5tau"]).unwrap();
        let w = v.apply(&m);
        assert_eq!(w, SymbolicVector::parse(&b, &["3", "5 + 7tau"]).unwrap());
        let ev = v.eval_f64(b.values());
        let ew = w.eval_f64(b.values());
        assert!((ew[1] - b.values()[1] * ev[1]).abs() < 1e-10);
    }

    #[test]
    fn missing_product_is_named() {
        let b = tau_a_basis();
        let q = vec![
            b.parse("a").unwrap(),
            b.parse("0").unwrap(),
            b.parse("0").unwrap(),
            b.parse("1").unwrap(),
        ];
        let err = q_action_matrix(&b, &q, 2).unwrap_err();
        assert!(err.to_string().contains("a*a"));
    }

    #[test]
    fn solve_rank_and_determinant() {
        let m = RatMatrix::from_ints(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(m.determinant(), rat(1));
        assert_eq!(m.solve(&[rat(3), rat(2)]).unwrap(), vec![rat(1), rat(1)]);
        let singular = RatMatrix::from_ints(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(singular.rank(), 1);
        assert!(singular.solve(&[rat(1), rat(1)]).is_none());
        assert_eq!(m.pow(3), m.mul(&m).mul(&m));
    }
}
