use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{AnalysisError, Result, ReturnVectorSet};
use crate::numberfield::{RatMatrix, Rational, SymbolicVector};
use crate::substitution::SubstitutionSystem;

#[derive(Debug, Clone, PartialEq)]
pub enum RigidityStatus {
    /// `Ξ ⊂ ℤ[Q]x_1 + ⋯ + ℤ[Q]x_d` for the witness family.
    Rigid {
        witness: Vec<SymbolicVector>,
    },
    /// The rational span of the `Q`-orbits of Ξ exceeds the bound by `excess`.
    NotRigid {
        excess: usize,
    },
    Inapplicable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityVerdict {
    pub status: RigidityStatus,
    pub qdim: usize,
    pub bound: usize,
    /// Q is not a pure dilation, so the witness search is outside tested ground.
    pub experimental: bool,
    pub generators: usize,
}

/// Row-style Hermite normal form: nonzero rows in echelon order, positive
/// pivots, entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    for c in 0..cols {
        let mut active: Vec<Vec<BigInt>> = Vec::new();
        let mut rest = Vec::new();
        for r in rows.drain(..) {
            if r[c].is_zero() {
                rest.push(r);
            } else {
                active.push(r);
            }
        }
        while active.len() > 1 {
            active.sort_by(|a, b| a[c].abs().cmp(&b[c].abs()));
            let (head, tail) = active.split_first_mut().expect("nonempty");
            for r in tail.iter_mut() {
                let q = r[c].div_floor(&head[c]);
                for k in 0..cols {
                    let t = &q * &head[k];
                    r[k] -= t;
                }
            }
            let (zero, nonzero): (Vec<_>, Vec<_>) =
                active.into_iter().partition(|r| r[c].is_zero());
            rest.extend(zero);
            active = nonzero;
        }
        if let Some(mut pivot) = active.pop() {
            if pivot[c].is_negative() {
                pivot.iter_mut().for_each(|x| *x = -&*x);
            }
            for prev in out.iter_mut() {
                let q = prev[c].div_floor(&pivot[c]);
                if !q.is_zero() {
                    for k in 0..cols {
                        let t = &q * &pivot[k];
                        prev[k] -= t;
                    }
                }
            }
            out.push(pivot);
        }
        rows = rest;
    }
    out
}

fn pivot_col(row: &[BigInt]) -> usize {
    row.iter().position(|x| !x.is_zero()).expect("nonzero row")
}

/// `v` lies in the ℤ-span of the rows of an HNF basis.
fn in_lattice(hnf: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut v = v.to_vec();
    for row in hnf {
        let p = pivot_col(row);
        let (q, r) = v[p].div_mod_floor(&row[p]);
        if !r.is_zero() {
            return false;
        }
        for k in 0..v.len() {
            let t = &q * &row[k];
            v[k] -= t;
        }
    }
    v.iter().all(Zero::is_zero)
}

fn common_denominator<'a>(vs: impl Iterator<Item = &'a [Rational]>) -> BigInt {
    vs.flatten()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

fn scaled(v: &[Rational], den: &BigInt) -> Vec<BigInt> {
    v.iter()
        .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
        .collect()
}

fn orbit(sys: &SubstitutionSystem, v: &SymbolicVector, n: usize) -> Vec<SymbolicVector> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = v.clone();
    for _ in 0..=n {
        let next = sys.q().apply(&cur);
        out.push(std::mem::replace(&mut cur, next));
    }
    out
}

fn unit_vector(sys: &SubstitutionSystem, i: usize) -> SymbolicVector {
    let ints: Vec<i64> = (0..sys.dim()).map(|k| i64::from(k == i)).collect();
    SymbolicVector::from_ints(&ints, sys.basis().len())
}

/// Checks `Ξ ⊂ Σ ℤ[Q] x_i` using generators `Q^n x_i`, `n < powers`.
fn witness_holds(
    sys: &SubstitutionSystem,
    xi: &[&SymbolicVector],
    witness: &[SymbolicVector],
    powers: usize,
) -> Result<bool> {
    let gens: Vec<SymbolicVector> = witness
        .iter()
        .flat_map(|x| orbit(sys, x, powers - 1))
        .collect();
    let span = RatMatrix::from_rows(gens.iter().map(|g| g.flat().to_vec()).collect()).transpose();
    if xi.iter().any(|v| span.solve_consistent(v.flat()).is_none()) {
        return Ok(false);
    }
    let den = common_denominator(
        gens.iter()
            .map(|g| g.flat())
            .chain(xi.iter().map(|v| v.flat())),
    );
    let hnf = hermite_normal_form(gens.iter().map(|g| scaled(g.flat(), &den)).collect());
    let bits = hnf.iter().flatten().map(BigInt::bits).max().unwrap_or(0);
    if bits > sys.bit_budget() {
        return Err(AnalysisError::BitBudget(sys.bit_budget()));
    }
    Ok(xi.iter().all(|v| in_lattice(&hnf, &scaled(v.flat(), &den))))
}

/// Rigidity verdict from the return vectors: the ℚ-dimension of their
/// Q-orbits against `d·deg`, then an explicit ℤ[Q]-witness search.
pub fn rigidity_check(sys: &SubstitutionSystem, xi: &ReturnVectorSet) -> Result<RigidityVerdict> {
    let decl = sys.q().eigen_decl();
    let d = sys.dim();
    let (first, mult) = decl.first().ok_or(AnalysisError::InvalidArgument(
        "no declared eigenvalues".into(),
    ))?;
    let conjugate = decl
        .iter()
        .all(|(e, m)| e.is_conjugate_of(first) && m == mult);
    let deg = decl
        .iter()
        .map(|(e, _)| e.minpoly().degree())
        .max()
        .unwrap_or(1);
    let bound = d * deg;
    let vs: Vec<&SymbolicVector> = xi.iter().collect();
    let rows: Vec<Vec<Rational>> = vs
        .iter()
        .flat_map(|v| orbit(sys, v, 2 * deg))
        .map(|v| v.flat().to_vec())
        .collect();
    let qdim = if rows.is_empty() {
        0
    } else {
        RatMatrix::from_rows(rows).rank()
    };
    let experimental = !(sys.q().is_diagonal() && conjugate && decl.len() == 1);
    let verdict = |status| RigidityVerdict {
        status,
        qdim,
        bound,
        experimental,
        generators: vs.len(),
    };

    if conjugate && qdim > bound {
        return Ok(verdict(RigidityStatus::NotRigid {
            excess: qdim - bound,
        }));
    }
    let powers = if conjugate { deg } else { d * deg };
    let standard: Vec<SymbolicVector> = (0..d).map(|i| unit_vector(sys, i)).collect();
    let mut candidates = vec![standard.clone()];
    let den = common_denominator(vs.iter().map(|v| v.flat()));
    if !den.is_one() {
        let inv = Rational::new(BigInt::one(), den);
        candidates.push(standard.iter().map(|e| e.scale(&inv)).collect());
    }
    for witness in candidates {
        if witness_holds(sys, &vs, &witness, powers)? {
            return Ok(verdict(RigidityStatus::Rigid { witness }));
        }
    }
    let reason = if conjugate {
        format!("no ℤ[Q] witness found; module dimension {qdim} does not exceed {bound}")
    } else {
        format!(
            "eigenvalues of Q are not conjugates of equal multiplicity; heuristic: {} return-vector generators span a ℚ-module of dimension {qdim}, so they cannot be linearly independent over ℝ^{d}",
            vs.len()
        )
    };
    Ok(verdict(RigidityStatus::Inapplicable { reason }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::return_vectors;
    use crate::catalog;
    use proptest::prelude::*;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn hnf_of_small_lattice() {
        let h = hermite_normal_form(ints(&[&[2, 4], &[3, 5]]));
        assert_eq!(h, ints(&[&[1, 1], &[0, 2]]));
        assert!(in_lattice(&h, &ints(&[&[5, 9]])[0]));
        assert!(!in_lattice(&h, &ints(&[&[0, 1]])[0]));
    }

    proptest! {
        #[test]
        fn hnf_preserves_lattice(rows in prop::collection::vec(prop::collection::vec(-20i64..20, 3), 1..5)) {
            let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let h = hermite_normal_form(big.clone());
            for r in &big {
                prop_assert!(in_lattice(&h, r));
            }
            for r in &h {
                let p = pivot_col(r);
                prop_assert!(r[p].is_positive());
            }
            let pivots: Vec<usize> = h.iter().map(|r| pivot_col(r)).collect();
            prop_assert!(pivots.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn frank_robinson_is_rigid() {
        let sys = catalog::frank_robinson().unwrap();
        let xi = return_vectors(&sys, 2, 4.0).unwrap();
        let v = rigidity_check(&sys, &xi).unwrap();
        match &v.status {
            RigidityStatus::Rigid { witness } => {
                assert_eq!(witness, &vec![unit_vector(&sys, 0), unit_vector(&sys, 1)]);
            }
            other => panic!("{other:?}"),
        }
        assert!(!v.experimental);
    }

    #[test]
    fn kenyon_is_not_rigid() {
        let sys = catalog::kenyon().unwrap();
        let xi = return_vectors(&sys, 1, 3.0).unwrap();
        let v = rigidity_check(&sys, &xi).unwrap();
        assert_eq!((v.qdim, v.bound), (3, 2));
        assert_eq!(v.status, RigidityStatus::NotRigid { excess: 1 });
    }

    #[test]
    fn modified_kenyon_is_inapplicable() {
        let sys = catalog::kenyon_modified().unwrap();
        let xi = return_vectors(&sys, 1, 4.0).unwrap();
        let v = rigidity_check(&sys, &xi).unwrap();
        assert!(
            matches!(v.status, RigidityStatus::Inapplicable { .. }),
            "{:?}",
            v.status
        );
        assert!(v.qdim > sys.dim());
    }

    #[test]
    fn integer_system_is_rigid_with_standard_basis() {
        let sys = catalog::square_lattice().unwrap();
        let xi = return_vectors(&sys, 2, 3.0).unwrap();
        let v = rigidity_check(&sys, &xi).unwrap();
        assert_eq!(
            v.status,
            RigidityStatus::Rigid {
                witness: vec![unit_vector(&sys, 0), unit_vector(&sys, 1)]
            }
        );
    }
}
