use std::collections::{BTreeSet, HashSet};

use super::{AnalysisError, Result};
use crate::geometry::Window;
use crate::numberfield::{CoordinateBasis, SymbolicVector};
use crate::substitution::{fixed_point_seed, substitute, Patch, SubstitutionSystem, Tile};

/// Central box of a patch's anchor hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub window: Window,
    /// Side of the anchor hull along its shortest axis.
    pub extent: f64,
}

/// Box of side `min(s)/4` (or `max_side` if smaller) centred in the anchor hull.
pub fn central_sample(
    patch: &Patch,
    basis: &CoordinateBasis,
    max_side: Option<f64>,
) -> Option<Sample> {
    let pts = patch.float_shifts(basis);
    let first = pts.first()?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in &pts {
        for k in 0..p.len() {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    let side = max_side.map_or(extent / 4.0, |m| m.min(extent / 4.0));
    let lo_w: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| 0.5 * (a + b) - side / 2.0)
        .collect();
    let hi_w: Vec<f64> = lo_w.iter().map(|x| x + side).collect();
    Some(Sample {
        window: Window { lo: lo_w, hi: hi_w },
        extent,
    })
}

#[derive(Debug, Clone)]
pub struct PeriodScan {
    pub level: usize,
    pub window: Window,
    pub candidates_tested: usize,
    /// Tiles of the patch inside the matched window.
    pub matched_tiles: usize,
    /// Exact translations t with `(P ∩ W) + t = P ∩ (W + t)`, sorted by length.
    pub periods: Vec<SymbolicVector>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Searches same-type tile differences of length at most `side/2` that map the
/// central window of the fixed-point patch `ω^level(seed)` onto itself.
pub fn detect_periods(
    sys: &SubstitutionSystem,
    level: usize,
    max_side: Option<f64>,
) -> Result<PeriodScan> {
    let seed = fixed_point_seed(sys)?;
    let patch = substitute(sys, &seed.patch(), level, None)?;
    let basis = sys.basis();
    let sample = central_sample(&patch, basis, max_side).ok_or(AnalysisError::EmptyPatch)?;
    let window = sample.window;
    let reach = window.sides().into_iter().fold(f64::INFINITY, f64::min) / 2.0;
    let pts = patch.float_shifts(basis);
    let members: HashSet<&Tile> = patch.tiles().iter().collect();
    let inside: Vec<usize> = (0..pts.len())
        .filter(|&i| window.contains(&pts[i]))
        .collect();

    let mut candidates = BTreeSet::new();
    let probe: Vec<&Tile> = inside.iter().map(|&i| &patch.tiles()[i]).take(1).collect();
    if let Some(anchor) = probe.first() {
        for t in patch.tiles().iter().filter(|t| t.ty == anchor.ty) {
            let d = &t.shift - &anchor.shift;
            if !d.is_zero() && norm(&d.eval_f64(basis.values())) <= reach {
                candidates.insert(d);
            }
        }
    }
    let values = basis.values();
    let maps_into = |from: &Window, t: &SymbolicVector| {
        pts.iter()
            .zip(patch.tiles())
            .filter(|(p, _)| from.contains(p))
            .all(|(_, tile)| members.contains(&Tile::new(tile.ty, &tile.shift + t)))
    };
    let mut periods: Vec<SymbolicVector> = candidates
        .iter()
        .filter(|t| {
            let shifted = window.translate(&t.eval_f64(values));
            maps_into(&window, t) && maps_into(&shifted, &-*t)
        })
        .cloned()
        .collect();
    periods.sort_by(|a, b| {
        norm(&a.eval_f64(values))
            .total_cmp(&norm(&b.eval_f64(values)))
            .then(a.cmp(b))
    });
    Ok(PeriodScan {
        level,
        window,
        candidates_tested: candidates.len(),
        matched_tiles: inside.len(),
        periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn kenyon_is_vertically_periodic() {
        let sys = catalog::kenyon().unwrap();
        let scan = detect_periods(&sys, 3, None).unwrap();
        let up = SymbolicVector::parse(sys.basis(), &["0", "1"]).unwrap();
        assert!(
            scan.periods.contains(&up),
            "{} candidates",
            scan.candidates_tested
        );
        assert!(scan.periods.iter().all(|p| p.coord(0).is_zero()));
    }

    #[test]
    fn frank_robinson_has_no_period() {
        let sys = catalog::frank_robinson().unwrap();
        let scan = detect_periods(&sys, 4, None).unwrap();
        assert!(scan.candidates_tested > 0);
        assert!(scan.periods.is_empty());
    }

    #[test]
    fn modified_kenyon_has_no_period() {
        let sys = catalog::kenyon_modified().unwrap();
        let scan = detect_periods(&sys, 6, None).unwrap();
        assert!(scan.candidates_tested > 0);
        assert!(scan.periods.is_empty());
    }

    #[test]
    fn square_lattice_periods_include_unit_steps() {
        let sys = catalog::square_lattice().unwrap();
        let scan = detect_periods(&sys, 4, None).unwrap();
        let e1 = SymbolicVector::parse(sys.basis(), &["1", "0"]).unwrap();
        assert!(scan.periods.contains(&e1));
    }
}
