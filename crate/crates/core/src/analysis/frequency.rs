use std::fmt::Write as _;

use serde::Serialize;

use super::{patch_count, AnalysisError, Result, TileGeometry};
use crate::substitution::{
    perron_frobenius, second_eigenvalue_modulus, substitute, Patch, SubstitutionSystem,
};

/// Tile-type frequencies per unit volume.
#[derive(Debug, Clone, Serialize)]
pub struct TileFrequencies {
    pub frequencies: Vec<f64>,
    pub volumes: Vec<f64>,
    /// `Σ r_i Vol(A_i)`, equal to 1 up to rounding.
    pub normalization: f64,
}

/// Right Perron-Frobenius eigenvector of S scaled so that `Σ r_i Vol(A_i) = 1`.
pub fn tile_frequencies(sys: &SubstitutionSystem, geom: &TileGeometry) -> Result<TileFrequencies> {
    sys.require_primitive("tile frequencies")?;
    if geom.volumes.len() != sys.kappa() || geom.volumes.iter().any(|v| !(*v > 0.0)) {
        return Err(AnalysisError::InvalidArgument(
            "prototile volumes unavailable".into(),
        ));
    }
    let pf = perron_frobenius(sys.s_matrix());
    let dot: f64 = pf.right.iter().zip(&geom.volumes).map(|(r, v)| r * v).sum();
    let frequencies: Vec<f64> = pf.right.iter().map(|r| r / dot).collect();
    let normalization = frequencies
        .iter()
        .zip(&geom.volumes)
        .map(|(r, v)| r * v)
        .sum();
    Ok(TileFrequencies {
        frequencies,
        volumes: geom.volumes.clone(),
        normalization,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub level: usize,
    pub count: usize,
    /// `|det Q|^n · Vol(A_i)`.
    pub volume: f64,
    pub ratio: f64,
}

/// Frequency estimate extrapolated from the counting curve of one host type.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencyEstimate {
    pub host_type: usize,
    pub curve: Vec<CurvePoint>,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyEntry {
    pub label: String,
    pub estimates: Vec<FrequencyEstimate>,
    /// Estimate from the first host type.
    pub value: f64,
    pub error: f64,
    /// Estimates from different host types agree within their combined error bars.
    pub type_independent: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FrequencyTable {
    pub entries: Vec<FrequencyEntry>,
}

impl FrequencyTable {
    /// One CSV block per entry and host type, columns `level,count,volume,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            for est in &e.estimates {
                let _ = writeln!(out, "# {} host={}", e.label, est.host_type + 1);
                out.push_str(&curve_csv(&est.curve));
            }
        }
        out
    }
}

pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("level,count,volume,ratio\n");
    for p in curve {
        let _ = writeln!(
            out,
            "{},{},{:.12e},{:.12e}",
            p.level, p.count, p.volume, p.ratio
        );
    }
    out
}

fn estimate_from(
    sys: &SubstitutionSystem,
    geom: &TileGeometry,
    p: &Patch,
    host_type: usize,
    levels: usize,
    gap_factor: f64,
) -> Result<FrequencyEstimate> {
    let det = sys.q().det_abs();
    let mut curve = Vec::with_capacity(levels);
    for n in 1..=levels {
        let host = substitute(sys, &Patch::single(host_type, sys.zero_vector()), n, None)?;
        let f = geom
            .patch_support(sys, &host)
            .ok_or(AnalysisError::EmptyPatch)?;
        let count = patch_count(sys, geom, p, &f, &host, None)?;
        let volume = det.powi(n as i32) * geom.volumes[host_type];
        curve.push(CurvePoint {
            level: n,
            count,
            volume,
            ratio: count as f64 / volume,
        });
    }
    let value = curve.last().map_or(0.0, |c| c.ratio);
    let error = match curve.len() {
        0 | 1 => value.abs(),
        n => (curve[n - 1].ratio - curve[n - 2].ratio).abs() * gap_factor,
    };
    Ok(FrequencyEstimate {
        host_type,
        curve,
        value,
        error,
    })
}

/// Frequency of `p` per unit volume from `L_P(ω^n(T_i))/(|det Q|^n Vol(A_i))`,
/// n = 1..=levels, checked for independence across two host types.
pub fn patch_frequency(
    sys: &SubstitutionSystem,
    geom: &TileGeometry,
    p: &Patch,
    levels: usize,
    label: &str,
) -> Result<FrequencyEntry> {
    sys.require_primitive("patch frequencies")?;
    if p.is_empty() {
        return Err(AnalysisError::EmptyPatch);
    }
    if levels == 0 {
        return Err(AnalysisError::InvalidArgument(
            "at least one level is required".into(),
        ));
    }
    let lambda = perron_frobenius(sys.s_matrix()).value;
    let second = second_eigenvalue_modulus(sys.s_matrix());
    let gap_factor = if second < lambda {
        lambda / (lambda - second)
    } else {
        1.0
    };
    let hosts: Vec<usize> = (0..sys.kappa().min(2)).collect();
    let estimates = hosts
        .iter()
        .map(|&i| estimate_from(sys, geom, p, i, levels, gap_factor))
        .collect::<Result<Vec<_>>>()?;
    let first = &estimates[0];
    let type_independent = estimates.iter().all(|e| {
        (e.value - first.value).abs() <= e.error + first.error + 1e-12 * first.value.abs().max(1.0)
    });
    Ok(FrequencyEntry {
        label: label.to_string(),
        value: first.value,
        error: first.error,
        estimates,
        type_independent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::numberfield::SymbolicVector;
    use crate::substitution::Tile;

    #[test]
    fn fibonacci_tile_frequencies() {
        let sys = catalog::fibonacci_1d().unwrap();
        let geom = TileGeometry::compute(&sys).unwrap();
        let r = tile_frequencies(&sys, &geom).unwrap();
        assert!((r.normalization - 1.0).abs() < 1e-9);
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        let long = if geom.volumes[0] > geom.volumes[1] {
            0
        } else {
            1
        };
        assert!((r.frequencies[long] - tau / (tau + 2.0)).abs() < 1e-3);
        assert!((r.frequencies[1 - long] - 1.0 / (tau + 2.0)).abs() < 1e-3);
    }

    #[test]
    fn kenyon_single_tile_frequency_is_one() {
        let sys = catalog::kenyon().unwrap();
        let geom = TileGeometry::compute(&sys).unwrap();
        let r = tile_frequencies(&sys, &geom).unwrap();
        assert!((r.frequencies[0] - 1.0).abs() < 1e-2);
        let e =
            patch_frequency(&sys, &geom, &Patch::single(0, sys.zero_vector()), 3, "T1").unwrap();
        assert!((e.value - 1.0).abs() < 0.05, "{}", e.value);
        assert!(e.error < 1e-9);
    }

    #[test]
    fn single_tile_curves_match_pf_frequencies() {
        let sys = catalog::fibonacci_1d().unwrap();
        let geom = TileGeometry::compute(&sys).unwrap();
        let r = tile_frequencies(&sys, &geom).unwrap();
        for i in 0..2 {
            let e = patch_frequency(&sys, &geom, &Patch::single(i, sys.zero_vector()), 12, "t")
                .unwrap();
            assert!(e.type_independent);
            assert!(
                (e.value - r.frequencies[i]).abs() <= e.error + 1e-6,
                "{} vs {}",
                e.value,
                r.frequencies[i]
            );
            let diffs: Vec<f64> = e.estimates[0]
                .curve
                .windows(2)
                .map(|w| (w[1].ratio - w[0].ratio).abs())
                .collect();
            assert!(diffs.windows(2).all(|d| d[1] <= d[0] + 1e-12));
        }
    }

    #[test]
    fn non_legal_patch_has_zero_frequency() {
        let sys = catalog::kenyon().unwrap();
        let geom = TileGeometry::compute(&sys).unwrap();
        let overlap = Patch::new(vec![
            Tile::new(0, sys.zero_vector()),
            Tile::new(
                0,
                SymbolicVector::parse(sys.basis(), &["1/2", "0"]).unwrap(),
            ),
        ]);
        let e = patch_frequency(&sys, &geom, &overlap, 3, "overlap").unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn curve_csv_has_header() {
        let csv = curve_csv(&[CurvePoint {
            level: 1,
            count: 9,
            volume: 9.0,
            ratio: 1.0,
        }]);
        assert!(csv.starts_with("level,count,volume,ratio\n1,9,"));
    }
}
