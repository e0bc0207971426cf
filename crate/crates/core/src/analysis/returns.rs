use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{neighbour_pairs, AnalysisError, Result};
use crate::numberfield::{CoordinateBasis, SymbolicVector};
use crate::substitution::{substitute, Patch, SubstitutionSystem};

/// Where a return vector was first seen: inside `ω^level(T_host)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub host_type: usize,
    pub level: usize,
}

/// Exact displacements between same-type tiles of legal patches.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnVectorSet {
    pub vectors: BTreeMap<SymbolicVector, Witness>,
    pub legal_only: bool,
    pub level: usize,
    pub radius: f64,
}

impl ReturnVectorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, v: &SymbolicVector) -> bool {
        self.vectors.contains_key(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SymbolicVector> {
        self.vectors.keys()
    }

    pub fn float_vectors(&self, basis: &CoordinateBasis) -> Vec<Vec<f64>> {
        self.iter().map(|v| v.eval_f64(basis.values())).collect()
    }
}

fn same_type_differences(
    patch: &Patch,
    basis: &CoordinateBasis,
    radius: f64,
) -> BTreeSet<SymbolicVector> {
    let tiles = patch.tiles();
    let pts = patch.float_shifts(basis);
    neighbour_pairs(&pts, radius)
        .into_iter()
        .filter(|&(i, j)| tiles[i].ty == tiles[j].ty)
        .map(|(i, j)| &tiles[j].shift - &tiles[i].shift)
        .filter(|v| !v.is_zero())
        .collect()
}

/// Same-type displacements of length at most `radius` inside `ω^level(T_j)`
/// over all types j. The set is closed under negation and excludes 0.
pub fn return_vectors(
    sys: &SubstitutionSystem,
    level: usize,
    radius: f64,
) -> Result<ReturnVectorSet> {
    if level == 0 {
        return Err(AnalysisError::InvalidArgument(
            "level must be at least 1".into(),
        ));
    }
    let mut vectors = BTreeMap::new();
    for j in 0..sys.kappa() {
        for n in 1..=level {
            let patch = substitute(sys, &Patch::single(j, sys.zero_vector()), n, None)?;
            for v in same_type_differences(&patch, sys.basis(), radius) {
                vectors.entry(v).or_insert(Witness {
                    host_type: j,
                    level: n,
                });
            }
        }
    }
    Ok(ReturnVectorSet {
        vectors,
        legal_only: true,
        level,
        radius,
    })
}

/// Minimal distance between distinct vectors of `(Ξ − Ξ) ∩ B(0, radius)`.
pub fn meyer_scan(
    xi: &ReturnVectorSet,
    basis: &CoordinateBasis,
    radius: f64,
) -> Result<Option<f64>> {
    if xi.is_empty() {
        return Err(AnalysisError::InvalidArgument(
            "return vector set is empty".into(),
        ));
    }
    let vs: Vec<&SymbolicVector> = xi.iter().collect();
    let fl = xi.float_vectors(basis);
    let mut diffs = BTreeSet::new();
    for (i, j) in neighbour_pairs(&fl, radius) {
        diffs.insert(vs[i] - vs[j]);
    }
    for (v, p) in vs.iter().zip(&fl) {
        if p.iter().map(|x| x * x).sum::<f64>().sqrt() <= radius {
            diffs.insert((*v).clone());
            diffs.insert(-*v);
        }
    }
    let pts: Vec<Vec<f64>> = diffs.iter().map(|v| v.eval_f64(basis.values())).collect();
    Ok(min_gap(&pts))
}

fn min_gap(pts: &[Vec<f64>]) -> Option<f64> {
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut r = 1.0;
    loop {
        let pairs = neighbour_pairs(pts, r);
        if let Some(g) = pairs
            .iter()
            .map(|&(i, j)| dist(&pts[i], &pts[j]))
            .reduce(f64::min)
        {
            return Some(g);
        }
        if pts.len() < 2 || r > 1e6 {
            return None;
        }
        r *= 4.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MeyerVerdict {
    /// Minimal gap stays bounded away from zero.
    EvidenceFor,
    /// Minimal gap decays with the level.
    EvidenceAgainst,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeyerEvidence {
    pub levels: Vec<usize>,
    pub gaps: Vec<Option<f64>>,
    pub sizes: Vec<usize>,
    pub verdict: MeyerVerdict,
}

/// Tracks the minimal gap of `Ξ − Ξ` over increasing levels.
pub fn meyer_evidence(
    sys: &SubstitutionSystem,
    levels: &[usize],
    radius: f64,
) -> Result<MeyerEvidence> {
    let mut gaps = Vec::new();
    let mut sizes = Vec::new();
    for &l in levels {
        let xi = return_vectors(sys, l, radius)?;
        sizes.push(xi.len());
        gaps.push(if xi.is_empty() {
            None
        } else {
            meyer_scan(&xi, sys.basis(), radius)?
        });
    }
    let known: Vec<f64> = gaps.iter().flatten().copied().collect();
    let verdict = match (known.first(), known.last()) {
        (Some(&first), Some(&last)) if known.len() >= 2 => {
            if last < 0.5 * first || last < 1e-9 {
                MeyerVerdict::EvidenceAgainst
            } else if (last - first).abs() <= 1e-9 * first.max(1.0) {
                MeyerVerdict::EvidenceFor
            } else {
                MeyerVerdict::Inconclusive
            }
        }
        _ => MeyerVerdict::Inconclusive,
    };
    Ok(MeyerEvidence {
        levels: levels.to_vec(),
        gaps,
        sizes,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn vec2(sys: &SubstitutionSystem, x: &str, y: &str) -> SymbolicVector {
        SymbolicVector::parse(sys.basis(), &[x, y]).unwrap()
    }

    #[test]
    fn kenyon_level_one_differences() {
        let sys = catalog::kenyon().unwrap();
        let xi = return_vectors(&sys, 1, 3.0).unwrap();
        for (x, y) in [("0", "1"), ("1", "a"), ("-1", "0")] {
            assert!(xi.contains(&vec2(&sys, x, y)), "({x},{y})");
        }
        assert!(!xi.contains(&sys.zero_vector()));
        assert!(xi.iter().all(|v| xi.contains(&-v)));
    }

    #[test]
    fn modified_kenyon_return_vectors() {
        let sys = catalog::kenyon_modified().unwrap();
        let xi = return_vectors(&sys, 1, 4.0).unwrap();
        for (x, y) in [("tau", "0"), ("2tau", "a")] {
            assert!(xi.contains(&vec2(&sys, x, y)), "({x},{y})");
        }
        assert!(!xi.contains(&vec2(&sys, "0", "tau")));
        let xi = return_vectors(&sys, 3, 4.0).unwrap();
        for (x, y) in [("tau", "0"), ("0", "tau"), ("2tau", "a")] {
            assert!(xi.contains(&vec2(&sys, x, y)), "({x},{y})");
        }
    }

    #[test]
    fn zero_radius_is_empty() {
        for sys in catalog::all().unwrap() {
            assert!(return_vectors(&sys, 2, 0.0).unwrap().is_empty());
        }
    }

    #[test]
    fn return_sets_grow_with_level() {
        let sys = catalog::frank_robinson().unwrap();
        let a = return_vectors(&sys, 1, 3.0).unwrap();
        let b = return_vectors(&sys, 2, 3.0).unwrap();
        assert!(a.iter().all(|v| b.contains(v)));
    }

    #[test]
    fn square_lattice_gap_is_one() {
        let sys = catalog::square_lattice().unwrap();
        let ev = meyer_evidence(&sys, &[1, 2, 3], 3.0).unwrap();
        assert!(ev.gaps.iter().all(|g| (g.unwrap() - 1.0).abs() < 1e-12));
        assert_eq!(ev.verdict, MeyerVerdict::EvidenceFor);
    }

    #[test]
    fn kenyon_gap_decays() {
        let sys = catalog::kenyon().unwrap();
        let ev = meyer_evidence(&sys, &[1, 2, 3], 2.0).unwrap();
        assert_eq!(ev.verdict, MeyerVerdict::EvidenceAgainst, "{:?}", ev.gaps);
    }

    #[test]
    fn frank_robinson_gap_decays() {
        let sys = catalog::frank_robinson().unwrap();
        let ev = meyer_evidence(&sys, &[1, 2, 3], 2.0).unwrap();
        assert_eq!(ev.verdict, MeyerVerdict::EvidenceAgainst, "{:?}", ev.gaps);
    }
}
