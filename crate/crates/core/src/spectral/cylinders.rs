use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Result, SpectralError};
use crate::analysis::neighbour_pairs;
use crate::geometry::{vanhove_ratio, Window};
use crate::substitution::{fixed_point_seed, substitute, SubstitutionSystem};

/// Allowed partition deficit at desk scale.
pub const DEFAULT_PARTITION_TOLERANCE: f64 = 0.03;
/// Probe offsets per frame in the uniformity scan.
pub const BIRKHOFF_PROBES: usize = 32;
const BIRKHOFF_SEED: u64 = 0x5eed_cafe;
const SHAPE_QUANTUM: f64 = 1e-9;

/// Coloured point sample with the region over which it is trusted to be complete.
#[derive(Debug, Clone)]
pub struct PointSample {
    pub points: Vec<Vec<f64>>,
    pub types: Vec<usize>,
    pub complete: Window,
}

impl PointSample {
    pub fn new(points: Vec<Vec<f64>>, types: Vec<usize>, complete: Window) -> Self {
        PointSample {
            points,
            types,
            complete,
        }
    }

    pub fn dim(&self) -> usize {
        self.complete.dim()
    }
}

/// Anchors of `ω^level(seed)`, trusted on the central half of their hull.
pub fn fixed_point_sample(sys: &SubstitutionSystem, level: usize) -> Result<PointSample> {
    let seed = fixed_point_seed(sys)?;
    let patch = substitute(sys, &seed.patch(), level, None)?;
    let points = patch.float_shifts(sys.basis());
    let types = patch.tiles().iter().map(|t| t.ty).collect();
    let d = sys.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in &points {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let complete = Window::new(
        (0..d).map(|k| lo[k] + (hi[k] - lo[k]) / 4.0).collect(),
        (0..d).map(|k| hi[k] - (hi[k] - lo[k]) / 4.0).collect(),
    );
    Ok(PointSample {
        points,
        types,
        complete,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Separation {
    /// Minimal distance between distinct sample points.
    pub eta: f64,
    /// Smallest m with `2^-m < eta/2`.
    pub m0: u32,
}

/// Separation constant of a point sample.
pub fn separation_constant(points: &[Vec<f64>]) -> Result<Separation> {
    if points.len() < 2 {
        return Err(SpectralError::EmptySample);
    }
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut r = 1.0;
    let eta = loop {
        let best = neighbour_pairs(points, r)
            .iter()
            .map(|&(i, j)| dist(&points[i], &points[j]))
            .reduce(f64::min);
        if let Some(g) = best {
            break g;
        }
        r *= 4.0;
    };
    if eta == 0.0 {
        return Err(SpectralError::DuplicatePoints);
    }
    let mut m0 = 0;
    while 2f64.powi(-(m0 as i32)) >= eta / 2.0 {
        m0 += 1;
    }
    Ok(Separation { eta, m0 })
}

/// Dyadic grid of cubes of side `2^-m` on `[-2^m, 2^m)^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub m: u32,
    pub eta: f64,
    pub m0: u32,
    pub window: Window,
}

impl GridSpec {
    pub fn new(dim: usize, m: u32, sep: Separation) -> Result<Self> {
        if m < sep.m0 {
            return Err(SpectralError::GridTooCoarse {
                m,
                m0: sep.m0,
                eta: sep.eta,
            });
        }
        let half = 2f64.powi(m as i32);
        Ok(GridSpec {
            m,
            eta: sep.eta,
            m0: sep.m0,
            window: Window::centered(dim, half),
        })
    }

    pub fn cube_side(&self) -> f64 {
        2f64.powi(-(self.m as i32))
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }
}

/// One class `G_j^{(m,α)}` with its wiggle box `V_j^{(m,α)}`.
#[derive(Debug, Clone, Serialize)]
pub struct CylinderClass {
    pub alpha_index: usize,
    /// Occupied coloured cubes `(type, cube index)`.
    pub alpha: Vec<(usize, Vec<i64>)>,
    /// Representative cluster in window coordinates.
    pub rep: Vec<(usize, Vec<f64>)>,
    /// Translations t keeping `rep + t` in its cubes.
    pub wiggle: Window,
    /// Occurrences whose translation box lies inside the frame.
    pub occurrences: usize,
    /// Occurrences per unit volume, each weighted by the fraction of its
    /// translation box on which the window pattern is exactly this class.
    pub frequency: f64,
    /// Unweighted occurrences per unit volume of the frame.
    pub raw_frequency: f64,
    /// Frame fraction whose window pattern is this class.
    pub covered: f64,
    /// Lower corners of the translation boxes of counted occurrences.
    #[serde(skip)]
    pub positions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderSet {
    pub grid: GridSpec,
    /// Translations x over which `(Λ - x) ∩ [-2^m, 2^m)^d` was enumerated.
    pub frame: Window,
    pub classes: Vec<CylinderClass>,
    pub alpha_count: usize,
    pub cells: usize,
    /// Occurrences cut by the frame boundary, excluded from frequencies.
    pub boundary_occurrences: usize,
}

/// `μ(X(G, V)) = Vol(V)·freq(G)`.
pub fn cylinder_measure(class: &CylinderClass, freq: f64) -> f64 {
    class.wiggle.volume() * freq
}

struct Occurrence {
    x0: Vec<f64>,
    volume: f64,
}

fn breakpoints(residues: &[f64], c: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let start = (lo / c).floor() as i64 - 1;
    let end = (hi / c).ceil() as i64 + 1;
    for j in start..=end {
        for r in residues {
            let v = j as f64 * c + r;
            if v > lo && v < hi {
                out.push(v);
            }
        }
    }
    out.push(hi);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

/// Enumerates every window pattern `(Λ - x) ∩ [-2^m, 2^m)^d` for x in a frame,
/// cell by cell on the arrangement of cube-crossing hyperplanes, and groups the
/// occurrences into translation classes per occupancy pattern α.
pub fn build_cylinders(
    sample: &PointSample,
    grid: &GridSpec,
    frame_side: Option<f64>,
) -> Result<CylinderSet> {
    let d = grid.dim();
    if sample.points.is_empty() {
        return Err(SpectralError::EmptySample);
    }
    if sample.dim() != d {
        return Err(SpectralError::InvalidArgument(
            "sample and grid dimensions differ".into(),
        ));
    }
    let c = grid.cube_side();
    let half = 2f64.powi(grid.m as i32);
    let available = sample
        .complete
        .sides()
        .iter()
        .fold(f64::INFINITY, |a, s| a.min(*s))
        - 2.0 * half
        - 2.0 * c;
    let side = frame_side.unwrap_or(available);
    if !(side > 0.0) || side > available {
        return Err(SpectralError::SampleTooSmall {
            needed: side.max(0.0) + 2.0 * half + 2.0 * c,
            available: available + 2.0 * half + 2.0 * c,
        });
    }
    let centre: Vec<f64> = (0..d)
        .map(|k| 0.5 * (sample.complete.lo[k] + sample.complete.hi[k]))
        .collect();
    let frame = Window::new(
        centre.iter().map(|x| x - side / 2.0).collect(),
        centre.iter().map(|x| x + side / 2.0).collect(),
    );

    let reach = frame.dilate(half + c)?;
    let idx: Vec<usize> = (0..sample.points.len())
        .filter(|&i| reach.contains(&sample.points[i]))
        .collect();
    let wside = 2.0 * half;
    let bucket = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / wside).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for &i in &idx {
        buckets
            .entry(bucket(&sample.points[i]))
            .or_default()
            .push(i);
    }
    let cuts: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut res: Vec<f64> = idx
                .iter()
                .map(|&i| sample.points[i][k].rem_euclid(c))
                .collect();
            res.sort_by(f64::total_cmp);
            res.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            breakpoints(&res, c, frame.lo[k], frame.hi[k])
        })
        .collect();

    let offsets: Vec<Vec<i64>> = (0..2usize.pow(d as u32))
        .map(|mask| (0..d).map(|k| ((mask >> k) & 1) as i64).collect())
        .collect();
    let mut occurrences: HashMap<Vec<i64>, Occurrence> = HashMap::new();
    let mut counter = vec![0usize; d];
    let mut cells = 0usize;
    'cells: loop {
        let x: Vec<f64> = (0..d)
            .map(|k| 0.5 * (cuts[k][counter[k]] + cuts[k][counter[k] + 1]))
            .collect();
        let vol: f64 = (0..d)
            .map(|k| cuts[k][counter[k] + 1] - cuts[k][counter[k]])
            .product();
        cells += 1;
        let base: Vec<i64> = x
            .iter()
            .map(|v| ((v - half) / wside).floor() as i64)
            .collect();
        let mut members: Vec<(usize, Vec<i64>)> = Vec::new();
        for off in &offsets {
            let key: Vec<i64> = base.iter().zip(off).map(|(a, b)| a + b).collect();
            for &i in buckets.get(&key).into_iter().flatten() {
                let rel: Vec<f64> = sample.points[i]
                    .iter()
                    .zip(&x)
                    .map(|(q, xv)| q - xv)
                    .collect();
                if rel.iter().all(|r| *r >= -half && *r < half) {
                    members.push((i, rel.iter().map(|r| (r / c).floor() as i64).collect()));
                }
            }
        }
        members.sort_unstable();
        let mut key = Vec::with_capacity(members.len() * (d + 1));
        for (i, cube) in &members {
            key.push(*i as i64);
            key.extend(cube);
        }
        occurrences
            .entry(key)
            .or_insert_with(|| Occurrence {
                x0: x.clone(),
                volume: 0.0,
            })
            .volume += vol;

        for k in 0..d {
            counter[k] += 1;
            if counter[k] + 1 < cuts[k].len() {
                continue 'cells;
            }
            counter[k] = 0;
        }
        break;
    }

    struct Acc {
        alpha: Vec<(usize, Vec<i64>)>,
        rep: Vec<(usize, Vec<f64>)>,
        wiggle: Window,
        occurrences: usize,
        covered: f64,
        positions: Vec<Vec<f64>>,
    }
    let fvol = frame.volume();
    let mut classes: BTreeMap<Vec<i64>, Acc> = BTreeMap::new();
    let mut boundary_occurrences = 0;
    let mut keys: Vec<&Vec<i64>> = occurrences.keys().collect();
    keys.sort();
    for key in keys {
        let occ = &occurrences[key];
        let mut pts: Vec<(Vec<i64>, usize, Vec<f64>)> = key
            .chunks(d + 1)
            .map(|ch| {
                let i = ch[0] as usize;
                let rel: Vec<f64> = sample.points[i]
                    .iter()
                    .zip(&occ.x0)
                    .map(|(q, x)| q - x)
                    .collect();
                (ch[1..].to_vec(), sample.types[i], rel)
            })
            .collect();
        pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let wiggle = if pts.is_empty() {
            Window::cube(d, 0.0, c)
        } else {
            let mut lo = vec![f64::NEG_INFINITY; d];
            let mut hi = vec![f64::INFINITY; d];
            for (cube, _, rel) in &pts {
                for k in 0..d {
                    let o = rel[k] - cube[k] as f64 * c;
                    lo[k] = lo[k].max(-o);
                    hi[k] = hi[k].min(c - o);
                }
            }
            Window::new(lo, hi)
        };
        let xbox = Window::new(
            (0..d).map(|k| occ.x0[k] - wiggle.hi[k]).collect(),
            (0..d).map(|k| occ.x0[k] - wiggle.lo[k]).collect(),
        );
        let complete = pts.is_empty() || xbox.within(&frame, 1e-12);
        let mut ckey = Vec::new();
        for (cube, ty, rel) in &pts {
            ckey.push(*ty as i64);
            ckey.extend(cube);
            ckey.extend(
                rel.iter()
                    .zip(&pts[0].2)
                    .map(|(a, b)| ((a - b) / SHAPE_QUANTUM).round() as i64),
            );
        }
        let acc = classes.entry(ckey).or_insert_with(|| Acc {
            alpha: pts
                .iter()
                .map(|(cube, ty, _)| (*ty, cube.clone()))
                .collect(),
            rep: pts.iter().map(|(_, ty, rel)| (*ty, rel.clone())).collect(),
            wiggle: wiggle.clone(),
            occurrences: 0,
            covered: 0.0,
            positions: Vec::new(),
        });
        if complete {
            acc.occurrences += 1;
            acc.covered += occ.volume;
            acc.positions.push(xbox.lo.clone());
        } else {
            boundary_occurrences += 1;
        }
    }

    let mut alpha_ids: BTreeMap<Vec<(usize, Vec<i64>)>, usize> = BTreeMap::new();
    for acc in classes.values() {
        let n = alpha_ids.len();
        alpha_ids.entry(acc.alpha.clone()).or_insert(n);
    }
    for (i, v) in alpha_ids.values_mut().enumerate() {
        *v = i;
    }
    let cube_vol = c.powi(d as i32);
    let mut out: Vec<CylinderClass> = classes
        .into_values()
        .filter(|a| a.occurrences > 0)
        .map(|a| {
            let vol = if a.alpha.is_empty() {
                cube_vol
            } else {
                a.wiggle.volume()
            };
            let frequency = a.covered / (fvol * vol);
            let raw_frequency = if a.alpha.is_empty() {
                frequency
            } else {
                a.occurrences as f64 / fvol
            };
            CylinderClass {
                alpha_index: alpha_ids[&a.alpha],
                alpha: a.alpha,
                rep: a.rep,
                wiggle: a.wiggle,
                occurrences: a.occurrences,
                frequency,
                raw_frequency,
                covered: a.covered / fvol,
                positions: a.positions,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.alpha_index
            .cmp(&b.alpha_index)
            .then(b.frequency.total_cmp(&a.frequency))
            .then(a.rep.len().cmp(&b.rep.len()))
    });
    Ok(CylinderSet {
        grid: grid.clone(),
        frame,
        alpha_count: alpha_ids.len(),
        classes: out,
        cells,
        boundary_occurrences,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaMeasure {
    pub alpha_index: usize,
    pub classes: usize,
    pub measure: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    /// `Σ_α Σ_j Vol(V_j)·freq(G_j)`.
    pub total: f64,
    /// The same sum with unweighted occurrence counts.
    pub raw_total: f64,
    /// `raw_total - total`: translations counted by a wiggle box although a
    /// point outside the cluster has entered an empty cube.
    pub entry_excess: f64,
    /// Frame fraction covered by counted occurrences.
    pub covered: f64,
    /// `1 - total`, the part attributed to limit-admitted patterns and boundary loss.
    pub deficit: f64,
    pub per_alpha: Vec<AlphaMeasure>,
    /// Every wiggle box satisfies `Vol(V) <= 2^{-md}`.
    pub wiggle_bound_holds: bool,
    pub max_wiggle_volume: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn partition_check(set: &CylinderSet, tolerance: f64) -> PartitionReport {
    let bound = set.grid.cube_side().powi(set.grid.dim() as i32);
    let mut per_alpha: Vec<AlphaMeasure> = (0..set.alpha_count)
        .map(|alpha_index| AlphaMeasure {
            alpha_index,
            classes: 0,
            measure: 0.0,
        })
        .collect();
    let mut total = 0.0;
    let mut raw_total = 0.0;
    let mut covered = 0.0;
    let mut max_wiggle_volume: f64 = 0.0;
    for class in &set.classes {
        let m = cylinder_measure(class, class.frequency);
        per_alpha[class.alpha_index].classes += 1;
        per_alpha[class.alpha_index].measure += m;
        total += m;
        raw_total += cylinder_measure(class, class.raw_frequency);
        covered += class.covered;
        max_wiggle_volume = max_wiggle_volume.max(class.wiggle.volume());
    }
    let wiggle_bound_holds = max_wiggle_volume <= bound;
    let pass = wiggle_bound_holds && total <= 1.0 + 1e-9 && total >= 1.0 - tolerance;
    PartitionReport {
        total,
        raw_total,
        entry_excess: raw_total - total,
        covered,
        deficit: 1.0 - total,
        per_alpha,
        wiggle_bound_holds,
        max_wiggle_volume,
        tolerance,
        pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffCurve {
    pub sides: Vec<f64>,
    /// `|∂^{+1} F_n| / |F_n|` for each frame.
    pub vanhove: Vec<f64>,
    /// `values[n][h]`: `Σ_j Vol(V_j) L_{G_j}(h + F_n) / Vol(F_n)`.
    pub values: Vec<Vec<f64>>,
    /// Max minus min over probes, per frame.
    pub spread: Vec<f64>,
    /// `(k0, sup_h Σ_{j>=k0} ...)` on the largest frame.
    pub tail: Vec<(usize, f64)>,
}

/// Ergodic averages of the cylinder indicator over boxes `h + F_n`, for the
/// classes of one pattern (or all patterns) and a fixed set of probe offsets.
pub fn birkhoff_cylinder_estimate(
    set: &CylinderSet,
    alpha: Option<usize>,
    sides: &[f64],
) -> Result<BirkhoffCurve> {
    let d = set.grid.dim();
    let c = set.grid.cube_side();
    let frame_side = set
        .frame
        .sides()
        .iter()
        .fold(f64::INFINITY, |a, s| a.min(*s));
    if let Some(&big) = sides.iter().max_by(|a, b| a.total_cmp(b)) {
        if big + c > frame_side {
            return Err(SpectralError::SampleTooSmall {
                needed: big + c,
                available: frame_side,
            });
        }
    }
    let classes: Vec<&CylinderClass> = set
        .classes
        .iter()
        .filter(|cl| alpha.is_none_or(|a| cl.alpha_index == a) && !cl.alpha.is_empty())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(BIRKHOFF_SEED);
    let probes: Vec<Vec<f64>> = (0..BIRKHOFF_PROBES)
        .map(|_| (0..d).map(|_| rng.gen_range(0.0..c)).collect())
        .collect();
    let lo = set.frame.lo.clone();
    let mut values = Vec::with_capacity(sides.len());
    let mut vanhove = Vec::with_capacity(sides.len());
    let mut last_terms: Vec<Vec<f64>> = Vec::new();
    for &s in sides {
        let f = Window::cube(d, 0.0, s).translate(&lo);
        vanhove.push(vanhove_ratio(&f, 1.0)?);
        let mut row = Vec::with_capacity(probes.len());
        last_terms.clear();
        for h in &probes {
            let box_ = f.translate(h);
            let terms: Vec<f64> = classes
                .iter()
                .map(|cl| {
                    let sidev = cl.wiggle.sides();
                    let count = cl
                        .positions
                        .iter()
                        .filter(|p| {
                            (0..d).all(|k| p[k] >= box_.lo[k] && p[k] + sidev[k] <= box_.hi[k])
                        })
                        .count();
                    cl.wiggle.volume() * count as f64 / f.volume()
                })
                .collect();
            row.push(terms.iter().sum());
            last_terms.push(terms);
        }
        values.push(row);
    }
    let spread = values
        .iter()
        .map(|r| {
            r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - r.iter().copied().fold(f64::INFINITY, f64::min)
        })
        .collect();
    let j = classes.len();
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2))
        .take_while(|k| *k <= j)
        .collect();
    grid.push(j + 1);
    grid.dedup();
    let tail = grid
        .into_iter()
        .map(|k0| {
            let sup = last_terms
                .iter()
                .map(|t| t.iter().skip(k0 - 1).sum::<f64>())
                .fold(0.0, f64::max);
            (k0, sup)
        })
        .collect();
    Ok(BirkhoffCurve {
        sides: sides.to_vec(),
        vanhove,
        values,
        spread,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn lattice_sample(n: i64) -> PointSample {
        let mut points = Vec::new();
        for x in -n..n {
            for y in -n..n {
                points.push(vec![x as f64, y as f64]);
            }
        }
        let types = vec![0; points.len()];
        PointSample::new(points, types, Window::centered(2, n as f64 - 1.0))
    }

    #[test]
    fn lattice_separation() {
        let s = separation_constant(&lattice_sample(4).points).unwrap();
        assert_eq!((s.eta, s.m0), (1.0, 2));
        assert!(separation_constant(&[vec![0.0], vec![0.0]]).is_err());
    }

    #[test]
    fn fibonacci_separation_is_short_tile() {
        let sys = catalog::fibonacci_1d().unwrap();
        let s = fixed_point_sample(&sys, 8).unwrap();
        let sep = separation_constant(&s.points).unwrap();
        assert!((sep.eta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_coarse_levels() {
        let sep = Separation { eta: 1.0, m0: 2 };
        assert!(GridSpec::new(2, 1, sep).is_err());
        assert_eq!(
            GridSpec::new(2, 2, sep).unwrap().window,
            Window::centered(2, 4.0)
        );
    }

    #[test]
    fn lattice_partition_is_exact() {
        let sample = lattice_sample(12);
        let grid = GridSpec::new(2, 2, separation_constant(&sample.points).unwrap()).unwrap();
        let set = build_cylinders(&sample, &grid, Some(4.0)).unwrap();
        let report = partition_check(&set, DEFAULT_PARTITION_TOLERANCE);
        assert!(report.wiggle_bound_holds);
        assert!((report.total - 1.0).abs() < 1e-9, "{}", report.total);
        for class in &set.classes {
            assert_eq!(class.wiggle.volume(), 1.0 / 16.0);
        }
    }

    #[test]
    fn single_point_wiggle_saturates_bound() {
        let sample = PointSample::new(
            (-40..40).map(|i| vec![i as f64 * 3.0 + 0.1]).collect(),
            vec![0; 80],
            Window::centered(1, 100.0),
        );
        let grid = GridSpec::new(1, 1, Separation { eta: 3.0, m0: 0 }).unwrap();
        let set = build_cylinders(&sample, &grid, Some(20.0)).unwrap();
        let single = set.classes.iter().find(|c| c.rep.len() == 1).unwrap();
        assert_eq!(single.wiggle.volume(), 0.5);
        let z = single.rep[0].1[0] - single.alpha[0].1[0] as f64 * 0.5;
        assert!((single.wiggle.lo[0] + z).abs() < 1e-12);
    }

    #[test]
    fn two_point_wiggle_is_smaller() {
        let sample = PointSample::new(
            (-40..40)
                .flat_map(|i| [vec![i as f64 * 4.0], vec![i as f64 * 4.0 + 1.3]])
                .collect(),
            vec![0; 160],
            Window::centered(1, 150.0),
        );
        let grid = GridSpec::new(1, 1, Separation { eta: 1.3, m0: 1 }).unwrap();
        let set = build_cylinders(&sample, &grid, Some(20.0)).unwrap();
        assert!(set
            .classes
            .iter()
            .filter(|c| c.rep.len() >= 2)
            .all(|c| c.wiggle.volume() < 0.5));
        let report = partition_check(&set, DEFAULT_PARTITION_TOLERANCE);
        assert!(report.pass, "{}", report.total);
    }

    #[test]
    fn fibonacci_partition() {
        let sys = catalog::fibonacci_1d().unwrap();
        let sample = fixed_point_sample(&sys, 8).unwrap();
        let grid = GridSpec::new(1, 2, separation_constant(&sample.points).unwrap()).unwrap();
        let set = build_cylinders(&sample, &grid, None).unwrap();
        let report = partition_check(&set, 0.05);
        assert!(
            report.pass,
            "total {} covered {}",
            report.total, report.covered
        );
    }

    #[test]
    fn kenyon_partition() {
        let sys = catalog::kenyon().unwrap();
        let sample = fixed_point_sample(&sys, 4).unwrap();
        let sep = separation_constant(&sample.points).unwrap();
        let grid = GridSpec::new(2, 2.max(sep.m0), sep).unwrap();
        let set = build_cylinders(&sample, &grid, Some(8.0)).unwrap();
        let report = partition_check(&set, 0.05);
        assert!(
            report.pass,
            "total {} raw {}",
            report.total, report.raw_total
        );
        assert!(report.wiggle_bound_holds);
    }

    #[test]
    fn birkhoff_tail_vanishes_beyond_all_classes() {
        let sample = lattice_sample(12);
        let grid = GridSpec::new(2, 2, separation_constant(&sample.points).unwrap()).unwrap();
        let set = build_cylinders(&sample, &grid, Some(6.0)).unwrap();
        let curve = birkhoff_cylinder_estimate(&set, None, &[2.0, 4.0, 5.0]).unwrap();
        assert_eq!(curve.tail.last().unwrap().1, 0.0);
        assert!(curve.values.iter().flatten().all(|v| *v <= 1.0 + 1e-9));
        assert!(birkhoff_cylinder_estimate(&set, None, &[7.0]).is_err());
    }
}
