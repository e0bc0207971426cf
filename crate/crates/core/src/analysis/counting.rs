use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use super::{AnalysisError, Result};
use crate::geometry::{
    default_resolution, prototile_volumes, solve_adjoint_ifs, RegionMask, Window,
};
use crate::substitution::{Patch, SubstitutionSystem, Tile};

/// Prototile volumes and anchor-relative support boxes used for counting.
#[derive(Debug, Clone, Serialize)]
pub struct TileGeometry {
    /// Left Perron-Frobenius eigenvector scaled to the raster volume of A_1.
    pub volumes: Vec<f64>,
    /// Raster error bar per prototile (boundary-cell volume).
    pub volume_error: Vec<f64>,
    /// Boxes containing each support, relative to the anchor.
    pub support: Vec<Window>,
    pub resolution: f64,
}

impl TileGeometry {
    pub fn new(
        volumes: Vec<f64>,
        volume_error: Vec<f64>,
        support: Vec<Window>,
        resolution: f64,
    ) -> Self {
        TileGeometry {
            volumes,
            volume_error,
            support,
            resolution,
        }
    }

    pub fn from_masks(sys: &SubstitutionSystem, masks: &[RegionMask]) -> Result<Self> {
        let vols = prototile_volumes(sys, Some(masks))?;
        let h = masks.first().map_or(0.0, RegionMask::resolution);
        let support = masks
            .iter()
            .map(|m| {
                let ext = m.occupied_extent().ok_or(AnalysisError::InvalidArgument(
                    "empty prototile mask".into(),
                ))?;
                Ok(ext.dilate(h)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let volume_error = masks.iter().map(RegionMask::boundary_volume).collect();
        Ok(TileGeometry {
            volumes: vols.volumes,
            volume_error,
            support,
            resolution: h,
        })
    }

    /// Supports from the rasterized adjoint IFS at the default resolution.
    pub fn compute(sys: &SubstitutionSystem) -> Result<Self> {
        let h = default_resolution(sys)?;
        let sol = solve_adjoint_ifs(sys, h, None)?;
        Self::from_masks(sys, &sol.masks)
    }

    /// Certified lower bound on the smallest prototile volume.
    pub fn v_min_lower(&self) -> f64 {
        self.volumes
            .iter()
            .zip(&self.volume_error)
            .map(|(v, e)| (v - e).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Box containing supp(P), in absolute coordinates.
    pub fn patch_support(&self, sys: &SubstitutionSystem, p: &Patch) -> Option<Window> {
        let values = sys.basis().values();
        p.tiles()
            .iter()
            .map(|t| self.support[t.ty].translate(&t.shift.eval_f64(values)))
            .reduce(|a, b| a.hull(&b))
    }
}

static CHECKS: AtomicU64 = AtomicU64::new(0);
static VIOLATIONS: AtomicU64 = AtomicU64::new(0);
static WORST: AtomicU64 = AtomicU64::new(0);

/// Process-wide record of the counting bound `L_P(F)·V_min ≤ Vol(F)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaBoundStats {
    pub checks: u64,
    pub violations: u64,
    /// Largest observed `L_P(F)·V_min / Vol(F)`.
    pub worst_ratio: f64,
}

pub fn lemma_bound_stats() -> LemmaBoundStats {
    LemmaBoundStats {
        checks: CHECKS.load(Ordering::SeqCst),
        violations: VIOLATIONS.load(Ordering::SeqCst),
        worst_ratio: f64::from_bits(WORST.load(Ordering::SeqCst)),
    }
}

fn record_bound(count: usize, v_min: f64, vol: f64) {
    let ratio = count as f64 * v_min / vol;
    CHECKS.fetch_add(1, Ordering::SeqCst);
    if ratio > 1.0 + 1e-9 {
        VIOLATIONS.fetch_add(1, Ordering::SeqCst);
    }
    WORST.fetch_max(ratio.max(0.0).to_bits(), Ordering::SeqCst);
}

/// `L_P(F, T)`: translates `g` with `g + P ⊂ T` and `g + supp(P) ⊂ F`. When
/// `complete` is given, T must be complete over `F^{+diam(P)}` inside it.
pub fn patch_count(
    sys: &SubstitutionSystem,
    geom: &TileGeometry,
    p: &Patch,
    f: &Window,
    t: &Patch,
    complete: Option<&Window>,
) -> Result<usize> {
    let first = p.tiles().first().ok_or(AnalysisError::EmptyPatch)?;
    if f.is_degenerate() {
        return Err(AnalysisError::InvalidArgument(
            "counting window is empty".into(),
        ));
    }
    let supp = geom.patch_support(sys, p).expect("nonempty patch");
    let diam = supp.diameter();
    if let Some(c) = complete {
        if !f.dilate(diam)?.within(c, 1e-9) {
            return Err(AnalysisError::Incomplete { inflation: diam });
        }
    }
    let values = sys.basis().values();
    let members: HashSet<&Tile> = t.tiles().iter().collect();
    let mut count = 0usize;
    for host in t.tiles().iter().filter(|x| x.ty == first.ty) {
        let g = &host.shift - &first.shift;
        let gf = g.eval_f64(values);
        if !supp.translate(&gf).within(f, 1e-9) {
            continue;
        }
        if p.tiles()
            .iter()
            .all(|x| members.contains(&Tile::new(x.ty, &x.shift + &g)))
        {
            count += 1;
        }
    }
    record_bound(count, geom.v_min_lower(), f.volume());
    Ok(count)
}
