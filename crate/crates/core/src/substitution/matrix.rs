use nalgebra::DMatrix;

/// Perron-Frobenius data of a nonnegative integer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronFrobenius {
    pub value: f64,
    /// Right eigenvector `S r = λ r`, normalized to sum 1.
    pub right: Vec<f64>,
    /// Left eigenvector `l S = λ l`, normalized to sum 1.
    pub left: Vec<f64>,
}

fn power_iterate(apply: impl Fn(&[f64]) -> Vec<f64>, n: usize) -> (f64, Vec<f64>) {
    let mut x = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..200_000 {
        // shift by the identity so periodic (imprimitive) matrices still converge
        let sx = apply(&x);
        let y: Vec<f64> = sx.iter().zip(&x).map(|(a, b)| a + b).collect();
        let sum: f64 = y.iter().sum();
        let next: Vec<f64> = y.iter().map(|v| v / sum).collect();
        let delta = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        lambda = sum - 1.0;
        if delta < 1e-16 {
            break;
        }
    }
    (lambda, x)
}

pub fn perron_frobenius(s: &[Vec<u64>]) -> PerronFrobenius {
    let n = s.len();
    let (value, right) = power_iterate(
        |x| {
            (0..n)
                .map(|i| (0..n).map(|j| s[i][j] as f64 * x[j]).sum())
                .collect()
        },
        n,
    );
    let (_, left) = power_iterate(
        |x| {
            (0..n)
                .map(|j| (0..n).map(|i| x[i] * s[i][j] as f64).sum())
                .collect()
        },
        n,
    );
    PerronFrobenius { value, right, left }
}

/// Modulus of the second-largest eigenvalue, used for extrapolation error bars.
pub fn second_eigenvalue_modulus(s: &[Vec<u64>]) -> f64 {
    let n = s.len();
    if n < 2 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| s[i][j] as f64);
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli[1]
}

/// Smallest ℓ ≤ κ² with S^ℓ entrywise positive.
pub fn primitivity_exponent(s: &[Vec<u64>]) -> Option<usize> {
    let n = s.len();
    let base: Vec<Vec<bool>> = s
        .iter()
        .map(|r| r.iter().map(|&x| x > 0).collect())
        .collect();
    let mut p = base.clone();
    for ell in 1..=n * n {
        if p.iter().all(|r| r.iter().all(|&b| b)) {
            return Some(ell);
        }
        p = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).any(|k| p[i][k] && base[k][j]))
                    .collect()
            })
            .collect();
    }
    None
}

/// Exact power S^k.
pub fn s_power(s: &[Vec<u64>], k: u32) -> Vec<Vec<u128>> {
    let n = s.len();
    let mut p: Vec<Vec<u128>> = (0..n)
        .map(|i| (0..n).map(|j| u128::from(i == j)).collect())
        .collect();
    for _ in 0..k {
        p = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|m| p[i][m] * s[m][j] as u128).sum())
                    .collect()
            })
            .collect();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frank_robinson_pf() {
        let s = vec![
            vec![1, 1, 1, 1],
            vec![3, 0, 3, 0],
            vec![3, 3, 0, 0],
            vec![9, 0, 0, 0],
        ];
        let pf = perron_frobenius(&s);
        let b = (1.0 + 13f64.sqrt()) / 2.0;
        assert!((pf.value - (b + 3.0)).abs() < 1e-12);
        // left eigenvector is proportional to the volumes (b^2, b, b, 1)
        let l = &pf.left;
        assert!((l[0] / l[3] - b * b).abs() < 1e-10);
        assert!((l[1] / l[3] - b).abs() < 1e-10);
        assert_eq!(primitivity_exponent(&s), Some(2));
    }

    #[test]
    fn imprimitive_matrix() {
        let s = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(primitivity_exponent(&s), None);
        assert!((perron_frobenius(&s).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn powers_are_exact() {
        let s = vec![vec![1, 1], vec![1, 0]];
        assert_eq!(s_power(&s, 5), vec![vec![8, 5], vec![5, 3]]);
        assert!((second_eigenvalue_modulus(&s) - 0.618_033_988_749_895).abs() < 1e-12);
    }
}
