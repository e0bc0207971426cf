//! Patch counting and frequencies, return vectors, FLC/ILC scanning, period
//! detection, the Meyer heuristic and the rigidity verdict.

mod counting;
mod flc;
mod frequency;
mod periods;
mod returns;
mod rigidity;

pub use counting::{lemma_bound_stats, patch_count, LemmaBoundStats, TileGeometry};
pub use flc::{flc_scan, FlcLevel, FlcScan, FlcVerdict, DEFAULT_FLC_EPS};
pub use frequency::{
    curve_csv, patch_frequency, tile_frequencies, CurvePoint, FrequencyEntry, FrequencyEstimate,
    FrequencyTable, TileFrequencies,
};
pub use periods::{central_sample, detect_periods, PeriodScan, Sample};
pub use returns::{
    meyer_evidence, meyer_scan, return_vectors, MeyerEvidence, MeyerVerdict, ReturnVectorSet,
};
pub use rigidity::{hermite_normal_form, rigidity_check, RigidityStatus, RigidityVerdict};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::numberfield::NumberFieldError;
use crate::substitution::SubstitutionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    NumberField(#[from] NumberFieldError),
    #[error("patch is not complete over the counting window; inflate it by at least {inflation}")]
    Incomplete { inflation: f64 },
    #[error("empty patch")]
    EmptyPatch,
    #[error("lattice reduction exceeds the {0}-bit budget; raise the bit budget or use fewer return vectors")]
    BitBudget(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = AnalysisError> = std::result::Result<T, E>;

/// Index pairs `(i, j)`, `i != j`, with `|p_i - p_j| <= radius`, via a bucket grid.
pub(crate) fn neighbour_pairs(points: &[Vec<f64>], radius: f64) -> Vec<(usize, usize)> {
    use std::collections::HashMap;
    if points.is_empty() || radius <= 0.0 {
        return Vec::new();
    }
    let dim = points[0].len();
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / radius).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut c| {
            (0..dim)
                .map(|_| {
                    let o = (c % 3) as i64 - 1;
                    c /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let k = key(p);
        for off in &offsets {
            let cell: Vec<i64> = k.iter().zip(off).map(|(a, b)| a + b).collect();
            if let Some(list) = grid.get(&cell) {
                for &j in list {
                    if j != i {
                        let d2: f64 = p
                            .iter()
                            .zip(&points[j])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        if d2 <= r2 {
                            out.push((i, j));
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbour_pairs_match_brute_force() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.37).sin() * 3.0, (i as f64 * 0.11).cos() * 3.0])
            .collect();
        let mut fast = neighbour_pairs(&pts, 0.8);
        fast.sort_unstable();
        let mut slow = Vec::new();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                let d = ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt();
                if i != j && d <= 0.8 {
                    slow.push((i, j));
                }
            }
        }
        assert_eq!(fast, slow);
    }
}
