use std::collections::HashMap;

use super::{
    fixed_point_seed, perron_frobenius, substitute_traced, Patch, Result, SubstitutionError,
    SubstitutionSystem, TracedLevel,
};

/// Order-k supertile labels for the tiles of a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct SupertileAssignment {
    /// `groups[i]` is the supertile of the i-th input tile, numbered by first appearance.
    pub groups: Vec<usize>,
    pub group_count: usize,
    /// Depth of the canonical fixed-point patch the input was located in.
    pub level: usize,
}

impl SupertileAssignment {
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_count];
        for &g in &self.groups {
            sizes[g] += 1;
        }
        sizes
    }
}

const MAX_TRACE_TILES: f64 = 250_000.0;

/// Labels each tile by the level-k supertile containing it, following the
/// parent links of the canonical fixed point ω^{mN}(seed).
pub fn supertile_assign(
    sys: &SubstitutionSystem,
    patch: &Patch,
    k: usize,
) -> Result<SupertileAssignment> {
    if k == 0 {
        let n = patch.len();
        return Ok(SupertileAssignment {
            groups: (0..n).collect(),
            group_count: n,
            level: 0,
        });
    }
    let seed = fixed_point_seed(sys)?;
    let growth = perron_frobenius(sys.s_matrix()).value;
    let mut levels: Vec<TracedLevel> = vec![TracedLevel {
        patch: seed.patch(),
        parent: Vec::new(),
    }];
    loop {
        let depth = levels.len() - 1;
        if depth >= k && depth % seed.n == 0 {
            let index = levels[depth].patch.index();
            let located: Option<Vec<usize>> = patch
                .tiles()
                .iter()
                .map(|t| index.get(t).copied())
                .collect();
            if let Some(located) = located {
                let mut ids: HashMap<usize, usize> = HashMap::new();
                let groups = located
                    .into_iter()
                    .map(|mut idx| {
                        for step in 0..k {
                            idx = levels[depth - step].parent[idx];
                        }
                        let next = ids.len();
                        *ids.entry(idx).or_insert(next)
                    })
                    .collect();
                return Ok(SupertileAssignment {
                    groups,
                    group_count: ids.len(),
                    level: depth,
                });
            }
        }
        let last = &levels[depth].patch;
        if last.len() as f64 * growth > MAX_TRACE_TILES || depth > 64 {
            return Err(SubstitutionError::NotTraceable(format!(
                "not found within {depth} levels of the fixed point"
            )));
        }
        let mut next = substitute_traced(sys, last, 1)?;
        levels.push(next.pop().expect("one level"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::substitution::{fixed_point_seed, Tile};

    #[test]
    fn kenyon_groups_of_nine() {
        let sys = catalog::kenyon().unwrap();
        let p = fixed_point_seed(&sys).unwrap().level(&sys, 2).unwrap();
        assert_eq!(p.len(), 81);
        let a = supertile_assign(&sys, &p, 1).unwrap();
        assert_eq!(a.group_count, 9);
        assert!(a.group_sizes().iter().all(|&s| s == 9));
        let id = supertile_assign(&sys, &p, 0).unwrap();
        assert_eq!(id.group_count, 81);
    }

    #[test]
    fn frank_robinson_group_sizes_follow_column_sums() {
        let sys = catalog::frank_robinson().unwrap();
        let p = fixed_point_seed(&sys).unwrap().level(&sys, 2).unwrap();
        let a = supertile_assign(&sys, &p, 1).unwrap();
        assert_eq!(a.group_count, 16);
        let mut sizes = a.group_sizes();
        sizes.sort_unstable();
        // children of T1 by type: one T1, three T2, three T3, nine T4
        let col_sum = |j: usize| (0..4).map(|i| sys.s_matrix()[i][j] as usize).sum::<usize>();
        let mut expect = Vec::new();
        for (ty, count) in [(0, 1), (1, 3), (2, 3), (3, 9)] {
            expect.extend(std::iter::repeat(col_sum(ty)).take(count));
        }
        expect.sort_unstable();
        assert_eq!(sizes, expect);
    }

    #[test]
    fn refinement_is_consistent() {
        let sys = catalog::fibonacci_1d().unwrap();
        let p = fixed_point_seed(&sys).unwrap().level(&sys, 5).unwrap();
        let a1 = supertile_assign(&sys, &p, 1).unwrap();
        let a2 = supertile_assign(&sys, &p, 2).unwrap();
        let mut map = HashMap::new();
        for (g1, g2) in a1.groups.iter().zip(&a2.groups) {
            assert_eq!(*map.entry(*g1).or_insert(*g2), *g2);
        }
    }

    #[test]
    fn foreign_patch_is_rejected() {
        let sys = catalog::kenyon().unwrap();
        let shift = crate::numberfield::SymbolicVector::parse(sys.basis(), &["1/2", "0"]).unwrap();
        let p = Patch::new(vec![Tile::new(0, shift)]);
        assert!(matches!(
            supertile_assign(&sys, &p, 1),
            Err(SubstitutionError::NotTraceable(_))
        ));
    }
}
