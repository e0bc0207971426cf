use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{neighbour_pairs, AnalysisError, Result};
use crate::numberfield::{CoordinateBasis, SymbolicVector};
use crate::substitution::{substitute, Patch, SubstitutionSystem};

/// Distinct displacements closer than this count as accumulating.
pub const DEFAULT_FLC_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlcVerdict {
    FlcEvidence,
    IlcEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlcLevel {
    pub level: usize,
    /// Distinct `(type, type, displacement)` configurations within the radius.
    pub configurations: usize,
    /// Smallest distance between distinct displacements of one type pair.
    pub min_gap: Option<f64>,
    /// The closest pair differs exactly in a free-symbol coordinate.
    pub gap_certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlcScan {
    pub radius: f64,
    pub eps: f64,
    pub levels: Vec<FlcLevel>,
    pub verdict: FlcVerdict,
}

type Configs = BTreeMap<(usize, usize), BTreeSet<SymbolicVector>>;

fn collect(patch: &Patch, basis: &CoordinateBasis, radius: f64, into: &mut Configs) {
    let tiles = patch.tiles();
    let pts = patch.float_shifts(basis);
    for (i, j) in neighbour_pairs(&pts, radius) {
        let d = &tiles[j].shift - &tiles[i].shift;
        into.entry((tiles[i].ty, tiles[j].ty))
            .or_default()
            .insert(d);
    }
}

fn has_free_part(v: &SymbolicVector, basis: &CoordinateBasis) -> bool {
    let s = v.basis_len();
    v.flat()
        .iter()
        .enumerate()
        .any(|(idx, c)| basis.is_free(idx % s) && *c != num_traits::Zero::zero())
}

fn closest(configs: &Configs, basis: &CoordinateBasis, radius: f64) -> (Option<f64>, bool) {
    let mut best: Option<(f64, bool)> = None;
    for set in configs.values() {
        let vs: Vec<&SymbolicVector> = set.iter().collect();
        let pts: Vec<Vec<f64>> = vs.iter().map(|v| v.eval_f64(basis.values())).collect();
        for (i, j) in neighbour_pairs(&pts, radius) {
            let d: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if best.is_none_or(|(g, _)| d < g) {
                best = Some((d, has_free_part(&(vs[i] - vs[j]), basis)));
            }
        }
    }
    match best {
        Some((g, c)) => (Some(g), c),
        None => (None, false),
    }
}

/// Counts two-tile configurations within `radius` in `ω^n(T_j)` (all j,
/// cumulative over n) for n = 1..=levels and labels the growth pattern.
pub fn flc_scan(sys: &SubstitutionSystem, levels: usize, radius: f64, eps: f64) -> Result<FlcScan> {
    if levels < 3 {
        return Err(AnalysisError::InvalidArgument(
            "FLC scan needs at least 3 levels".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(AnalysisError::InvalidArgument(
            "radius must be positive".into(),
        ));
    }
    let basis = sys.basis();
    let mut configs = Configs::new();
    let mut out = Vec::with_capacity(levels);
    for n in 1..=levels {
        for j in 0..sys.kappa() {
            let patch = substitute(sys, &Patch::single(j, sys.zero_vector()), n, None)?;
            collect(&patch, basis, radius, &mut configs);
        }
        let (min_gap, gap_certified) = closest(&configs, basis, radius);
        out.push(FlcLevel {
            level: n,
            configurations: configs.values().map(BTreeSet::len).sum(),
            min_gap,
            gap_certified,
        });
    }
    let counts: Vec<usize> = out.iter().map(|l| l.configurations).collect();
    let strictly_growing = counts.windows(2).all(|w| w[1] > w[0]);
    let gaps: Vec<f64> = out.iter().filter_map(|l| l.min_gap).collect();
    let accumulating = gaps.last().is_some_and(|g| *g < eps)
        || (gaps.len() == out.len()
            && gaps.windows(2).all(|w| w[1] <= w[0])
            && gaps.windows(2).any(|w| w[1] < w[0]));
    let stabilized = counts.windows(2).any(|w| w[1] == w[0]);
    let verdict = if strictly_growing && accumulating {
        FlcVerdict::IlcEvidence
    } else if stabilized {
        FlcVerdict::FlcEvidence
    } else {
        FlcVerdict::Inconclusive
    };
    Ok(FlcScan {
        radius,
        eps,
        levels: out,
        verdict,
    })
}
