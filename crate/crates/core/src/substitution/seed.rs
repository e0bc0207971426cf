use super::{substitute, Patch, Result, SubstitutionError, SubstitutionSystem, Tile};
use crate::numberfield::{RatMatrix, SymbolicVector};

/// Largest power N tried when looking for a self-containing tile.
pub const SEED_SEARCH_MAX: usize = 6;

/// Tile T with T ∈ ω^N(T); iterating ω^N from it gives nested patches.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSeed {
    pub tile: Tile,
    pub n: usize,
    /// Offset d with T_j + d ∈ ω^N(T_j) that produced the seed.
    pub digit: SymbolicVector,
}

impl FixedPointSeed {
    pub fn patch(&self) -> Patch {
        Patch::single(self.tile.ty, self.tile.shift.clone())
    }

    /// ω^{mN}(seed), the m-th patch of the nested sequence.
    pub fn level(&self, sys: &SubstitutionSystem, m: usize) -> Result<Patch> {
        substitute(sys, &self.patch(), m * self.n, None)
    }
}

/// Searches N = 1..=6 and types in order for T_j + d ∈ ω^N(T_j), preferring
/// d = 0, and solves s = Q^N s + d so that T_j + s is fixed by ω^N.
pub fn fixed_point_seed(sys: &SubstitutionSystem) -> Result<FixedPointSeed> {
    sys.require_primitive("fixed-point seed")?;
    let action = sys.q().action();
    let id = RatMatrix::identity(action.rows());
    for n in 1..=SEED_SEARCH_MAX {
        let lhs = id.sub(&action.pow(n as u32));
        for j in 0..sys.kappa() {
            let image = substitute(sys, &Patch::single(j, sys.zero_vector()), n, None)?;
            let mut offsets = image.tiles().iter().filter(|t| t.ty == j).map(|t| &t.shift);
            let zero = sys.zero_vector();
            let chosen = if image.tiles().iter().any(|t| t.ty == j && t.shift == zero) {
                Some(zero)
            } else {
                offsets.next().cloned()
            };
            let Some(d) = chosen else { continue };
            let Some(s) = lhs.solve(d.flat()) else {
                continue;
            };
            let shift = SymbolicVector::from_flat(sys.dim(), sys.basis().len(), s);
            return Ok(FixedPointSeed {
                tile: Tile::new(j, shift),
                n,
                digit: d,
            });
        }
    }
    Err(SubstitutionError::NoSeed(SEED_SEARCH_MAX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn kenyon_seed_is_origin() {
        let sys = catalog::kenyon().unwrap();
        let seed = fixed_point_seed(&sys).unwrap();
        assert_eq!(seed.tile, Tile::new(0, sys.zero_vector()));
        assert_eq!(seed.n, 1);
    }

    #[test]
    fn frank_robinson_seed_solves_fixed_point() {
        let sys = catalog::frank_robinson().unwrap();
        let seed = fixed_point_seed(&sys).unwrap();
        assert_eq!(seed.n, 1);
        assert_eq!(seed.tile.ty, 0);
        // s = b s + (2,2)  =>  s = -(2,2)/(b-1) = -(2b/3)(1,1)
        let expect = SymbolicVector::parse(sys.basis(), &["-2/3*b", "-2/3*b"]).unwrap();
        assert_eq!(seed.tile.shift, expect);
        let img = substitute(&sys, &seed.patch(), 1, None).unwrap();
        assert!(img.tiles().contains(&seed.tile));
    }

    #[test]
    fn seeds_give_nested_patches() {
        for sys in catalog::all().unwrap() {
            let seed = fixed_point_seed(&sys).unwrap();
            let mut prev = seed.patch();
            for m in 1..=3 {
                let cur = seed.level(&sys, m).unwrap();
                let idx = cur.index();
                assert!(
                    prev.tiles().iter().all(|t| idx.contains_key(t)),
                    "{} level {m}",
                    sys.name()
                );
                prev = cur;
            }
        }
    }
}
