use std::collections::HashSet;

use serde::Serialize;

use super::{fixed_point_seed, substitute, Patch, Result, SubstitutionSystem, Tile};
use crate::numberfield::SymbolicVector;

/// Coloured finite point set (colour = prototile type).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KSetCluster {
    pub colours: Vec<Vec<SymbolicVector>>,
}

impl KSetCluster {
    pub fn empty(kappa: usize) -> Self {
        KSetCluster {
            colours: vec![Vec::new(); kappa],
        }
    }

    pub fn singleton(kappa: usize, colour: usize, point: SymbolicVector) -> Self {
        let mut c = Self::empty(kappa);
        c.colours[colour].push(point);
        c
    }

    pub fn from_patch(patch: &Patch, kappa: usize) -> Self {
        let mut c = Self::empty(kappa);
        for t in patch.tiles() {
            c.colours[t.ty].push(t.shift.clone());
        }
        c
    }

    pub fn to_patch(&self) -> Patch {
        Patch::new(
            self.colours
                .iter()
                .enumerate()
                .flat_map(|(ty, pts)| pts.iter().map(move |p| Tile::new(ty, p.clone())))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.colours.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points regardless of colour, as `(colour, point)`.
    pub fn points(&self) -> impl Iterator<Item = (usize, &SymbolicVector)> {
        self.colours
            .iter()
            .enumerate()
            .flat_map(|(c, pts)| pts.iter().map(move |p| (c, p)))
    }
}

/// Φ^k(C): colour i collects Q·(colour j) + D_ij.
pub fn kset_substitute(
    sys: &SubstitutionSystem,
    cluster: &KSetCluster,
    k: usize,
) -> Result<KSetCluster> {
    let p = substitute(sys, &cluster.to_patch(), k, None)?;
    Ok(KSetCluster::from_patch(&p, sys.kappa()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Legality {
    /// Found inside Φ^k({x_colour}); colour is 0-based.
    Legal {
        k: usize,
        colour: usize,
    },
    NotProvedLegal {
        k_max: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpecialRank {
    Finite(usize),
    Infinity(usize),
}

fn contains_translate(host: &Patch, members: &HashSet<&Tile>, target: &Patch) -> bool {
    let Some(first) = target.tiles().first() else {
        return true;
    };
    host.tiles().iter().filter(|h| h.ty == first.ty).any(|h| {
        let t = &h.shift - &first.shift;
        target
            .tiles()
            .iter()
            .all(|p| members.contains(&Tile::new(p.ty, &p.shift + &t)))
    })
}

/// Smallest (k, j) such that `target` is a translate of a sub-patch of ω^k(T_j).
fn first_container(
    sys: &SubstitutionSystem,
    target: &Patch,
    k_max: usize,
) -> Result<Option<(usize, usize)>> {
    if target.is_empty() {
        return Ok(Some((0, 0)));
    }
    let mut levels: Vec<Patch> = (0..sys.kappa())
        .map(|j| Patch::single(j, sys.zero_vector()))
        .collect();
    for k in 0..=k_max {
        if k > 0 {
            for lvl in levels.iter_mut() {
                *lvl = substitute(sys, lvl, 1, None)?;
            }
        }
        for (j, host) in levels.iter().enumerate() {
            if host.len() < target.len() {
                continue;
            }
            let members: HashSet<&Tile> = host.tiles().iter().collect();
            if contains_translate(host, &members, target) {
                return Ok(Some((k, j)));
            }
        }
    }
    Ok(None)
}

/// Semi-decision for legality of a coloured cluster.
pub fn is_legal(sys: &SubstitutionSystem, cluster: &KSetCluster, k_max: usize) -> Result<Legality> {
    Ok(match first_container(sys, &cluster.to_patch(), k_max)? {
        Some((k, colour)) => Legality::Legal { k, colour },
        None => Legality::NotProvedLegal { k_max },
    })
}

/// Minimal k with `patch` a translate of a sub-patch of some ω^k(T_j).
pub fn special_rank(sys: &SubstitutionSystem, patch: &Patch, k_max: usize) -> Result<SpecialRank> {
    Ok(match first_container(sys, patch, k_max)? {
        Some((k, _)) => SpecialRank::Finite(k),
        None => SpecialRank::Infinity(k_max),
    })
}

/// Singleton κ-set at the fixed-point seed; Φ^{n-1}(G) ⊂ Φ^n(G) along ω^N.
pub fn generating_set(sys: &SubstitutionSystem) -> Result<KSetCluster> {
    let seed = fixed_point_seed(sys)?;
    Ok(KSetCluster::singleton(
        sys.kappa(),
        seed.tile.ty,
        seed.tile.shift,
    ))
}
