use std::collections::HashSet;

use serde::Serialize;

use super::{Result, SpectralError};
use crate::analysis::{patch_count, tile_frequencies, TileGeometry};
use crate::numberfield::SymbolicVector;
use crate::substitution::{s_power, substitute, Patch, SubstitutionSystem, Tile};

/// Largest supertile level searched for a witness of z.
pub const K0_SEARCH_MAX: usize = 8;
const TILE_BUDGET: u128 = 250_000;

#[derive(Debug, Clone, Serialize)]
pub struct OverlapPoint {
    pub n: usize,
    /// `L_{P ∪ (P + Qⁿz)}` in the host.
    pub joint: usize,
    /// `L_P` in the host.
    pub single: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingBound {
    pub z: String,
    /// Smallest k with tiles t and t + z of one type inside some `ω^k(T_i)`.
    pub k0: usize,
    pub host_type: usize,
    pub tile_type: usize,
    /// `¼ r_i Vol(A_i) |det Q|^{-k0}`.
    pub delta: f64,
    pub host_level: usize,
    pub curve: Vec<OverlapPoint>,
    /// The last overlap ratio exceeds `2δ`.
    pub pass: bool,
}

fn find_witness(
    sys: &SubstitutionSystem,
    z: &SymbolicVector,
) -> Result<Option<(usize, usize, usize)>> {
    for k in 1..=K0_SEARCH_MAX {
        let sk = s_power(sys.s_matrix(), k as u32);
        for i in 0..sys.kappa() {
            let size: u128 = (0..sys.kappa()).map(|j| sk[j][i]).sum();
            if size > TILE_BUDGET {
                continue;
            }
            let patch = substitute(sys, &Patch::single(i, sys.zero_vector()), k, None)?;
            let members: HashSet<&Tile> = patch.tiles().iter().collect();
            if let Some(t) = patch
                .tiles()
                .iter()
                .find(|t| members.contains(&Tile::new(t.ty, &t.shift + z)))
            {
                return Ok(Some((k, i, t.ty)));
            }
        }
    }
    Ok(None)
}

/// Lower bound `δ` on `μ(X_P ∩ T_{Qⁿz} X_P)` for the two-tile patch
/// `P = {t, t + z}`, with the overlap ratios `L_{P ∪ (P+Qⁿz)} / L_P`
/// measured inside `ω^{host_level}(T_i)` for `n = 1..=n_max`.
pub fn mixing_overlap_bound(
    sys: &SubstitutionSystem,
    geom: &TileGeometry,
    z: &SymbolicVector,
    host_level: usize,
    n_max: usize,
) -> Result<MixingBound> {
    if z.is_zero() {
        return Err(SpectralError::InvalidArgument("z must be nonzero".into()));
    }
    let basis = sys.basis();
    let label = format!("{}", z.display(basis));
    let (k0, host_type, tile_type) = find_witness(sys, z)?
        .ok_or_else(|| SpectralError::NotWitnessed(label.clone(), K0_SEARCH_MAX))?;
    let freqs = tile_frequencies(sys, geom)?;
    let delta = 0.25 * freqs.frequencies[host_type] * geom.volumes[host_type]
        / sys.q().det_abs().powi(k0 as i32);

    let host = substitute(
        sys,
        &Patch::single(host_type, sys.zero_vector()),
        host_level,
        None,
    )?;
    let f = geom
        .patch_support(sys, &host)
        .ok_or(SpectralError::EmptySample)?;
    let p = Patch::new(vec![
        Tile::new(tile_type, sys.zero_vector()),
        Tile::new(tile_type, z.clone()),
    ]);
    let single = patch_count(sys, geom, &p, &f, &host, None)?;
    let mut curve = Vec::with_capacity(n_max);
    let mut shift = z.clone();
    for n in 1..=n_max {
        shift = sys.q().apply(&shift);
        let mut tiles = p.tiles().to_vec();
        tiles.extend(p.tiles().iter().map(|t| Tile::new(t.ty, &t.shift + &shift)));
        let joint = patch_count(sys, geom, &Patch::new(tiles), &f, &host, None)?;
        let ratio = if single == 0 {
            0.0
        } else {
            joint as f64 / single as f64
        };
        curve.push(OverlapPoint {
            n,
            joint,
            single,
            ratio,
        });
    }
    let pass = curve.last().is_some_and(|c| c.ratio > 2.0 * delta);
    Ok(MixingBound {
        z: label,
        k0,
        host_type,
        tile_type,
        delta,
        host_level,
        curve,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn kenyon_vertical_overlap() {
        let sys = catalog::kenyon().unwrap();
        let geom = TileGeometry::compute(&sys).unwrap();
        let z = SymbolicVector::parse(sys.basis(), &["0", "1"]).unwrap();
        let b = mixing_overlap_bound(&sys, &geom, &z, 4, 3).unwrap();
        assert_eq!(b.k0, 1);
        assert!((b.delta - 1.0 / 36.0).abs() < 1e-3, "{}", b.delta);
        assert!(b.pass);
        assert!(b
            .curve
            .iter()
            .all(|c| c.ratio > 2.0 * b.delta && c.joint <= c.single));
    }

    #[test]
    fn unreachable_vector_is_reported() {
        let sys = catalog::kenyon().unwrap();
        let geom = TileGeometry::compute(&sys).unwrap();
        let z = SymbolicVector::parse(sys.basis(), &["0", "1/2"]).unwrap();
        assert!(matches!(
            mixing_overlap_bound(&sys, &geom, &z, 2, 1),
            Err(SpectralError::NotWitnessed(_, K0_SEARCH_MAX))
        ));
    }
}
