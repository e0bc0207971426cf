use nalgebra::DMatrix;
use serde::Serialize;

use super::{GeometryError, RegionMask, Result, Window};
use crate::substitution::{fixed_point_seed, perron_frobenius, substitute, SubstitutionSystem};

/// Iteration cap in automatic mode; float pull-back chains lose accuracy beyond it.
const MAX_AUTO_ITERS: usize = 30;

/// Default pass tolerance for overlap and gap fractions.
pub const REPRESENTABILITY_TOLERANCE: f64 = 0.02;

/// Rasterized solution of `Q A_j = ⋃_i (D_ij + A_i)`.
#[derive(Debug, Clone)]
pub struct IfsSolution {
    pub masks: Vec<RegionMask>,
    pub resolution: f64,
    pub iterations: usize,
    /// Hausdorff distance between consecutive iterates (max over types).
    pub steps: Vec<f64>,
    /// diam(seed)·c^{-iters} + h√d with c the smallest singular value of Q.
    pub claimed_accuracy: f64,
}

struct PullBack {
    q: DMatrix<f64>,
    /// `digits[j]` lists `(i, d)` for `d ∈ D_ij`.
    digits: Vec<Vec<(usize, Vec<f64>)>>,
}

impl PullBack {
    fn new(sys: &SubstitutionSystem) -> Self {
        let values = sys.basis().values();
        let kappa = sys.kappa();
        let digits = (0..kappa)
            .map(|j| {
                (0..kappa)
                    .flat_map(|i| {
                        sys.digits()
                            .get(i, j)
                            .iter()
                            .map(move |d| (i, d.eval_f64(values)))
                    })
                    .collect()
            })
            .collect();
        PullBack {
            q: sys.q().numeric().clone(),
            digits,
        }
    }

    /// Per-type bounding boxes: the fixed point of `B_j = hull ⋃_i Q^{-1}(D_ij + B_i)` from `start`.
    fn type_bounds(&self, qinv: &DMatrix<f64>, start: &Window) -> Vec<Window> {
        let dim = self.q.nrows();
        let mut boxes = vec![start.clone(); self.digits.len()];
        for _ in 0..200 {
            let next: Vec<Window> = self
                .digits
                .iter()
                .map(|list| {
                    let mut lo = vec![f64::INFINITY; dim];
                    let mut hi = vec![f64::NEG_INFINITY; dim];
                    for (i, d) in list {
                        for corner in 0..1usize << dim {
                            let p: Vec<f64> = (0..dim)
                                .map(|k| {
                                    d[k] + if corner >> k & 1 == 1 {
                                        boxes[*i].hi[k]
                                    } else {
                                        boxes[*i].lo[k]
                                    }
                                })
                                .collect();
                            for r in 0..dim {
                                let v: f64 = (0..dim).map(|c| qinv[(r, c)] * p[c]).sum();
                                lo[r] = lo[r].min(v);
                                hi[r] = hi[r].max(v);
                            }
                        }
                    }
                    Window::new(lo, hi)
                })
                .collect();
            let moved = next
                .iter()
                .zip(&boxes)
                .flat_map(|(a, b)| a.lo.iter().zip(&b.lo).chain(a.hi.iter().zip(&b.hi)))
                .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
            boxes = next;
            if moved < 1e-13 {
                break;
            }
        }
        boxes
    }

    /// Longest pull-back chain `x ↦ Qx - d` from `x ∈ A_j` staying in the type boxes, capped.
    /// `scratch` needs `2·dim·cap` entries.
    fn depth(
        &self,
        domain: &[Window],
        j: usize,
        x: &[f64],
        cap: usize,
        scratch: &mut [f64],
    ) -> usize {
        if cap == 0 {
            return 0;
        }
        let dim = x.len();
        let (image, rest) = scratch.split_at_mut(dim);
        let (y, rest) = rest.split_at_mut(dim);
        for (r, slot) in image.iter_mut().enumerate() {
            *slot = (0..dim).map(|c| self.q[(r, c)] * x[c]).sum();
        }
        let mut best = 0;
        for (i, d) in &self.digits[j] {
            for k in 0..dim {
                y[k] = image[k] - d[k];
            }
            if domain[*i].contains(y) {
                best = best.max(1 + self.depth(domain, *i, y, cap - 1, rest));
                if best == cap {
                    break;
                }
            }
        }
        best
    }

    fn step(&self, masks: &[RegionMask]) -> Vec<RegionMask> {
        let dim = self.q.nrows();
        let mut image = vec![0.0; dim];
        let mut probe = vec![0.0; dim];
        self.digits
            .iter()
            .enumerate()
            .map(|(j, list)| {
                let mut out = masks[j].clone();
                for idx in 0..out.len() {
                    let x = masks[j].centre(idx);
                    for (r, slot) in image.iter_mut().enumerate() {
                        *slot = (0..dim).map(|c| self.q[(r, c)] * x[c]).sum();
                    }
                    let hit = list.iter().any(|(i, d)| {
                        for k in 0..dim {
                            probe[k] = image[k] - d[k];
                        }
                        masks[*i].contains(&probe)
                    });
                    out.set(idx, hit);
                }
                out
            })
            .collect()
    }
}

/// Per-axis bounds of `Σ_{m≥1} Q^{-m} d_m` over all digits.
fn attractor_bounds(sys: &SubstitutionSystem, qinv: &DMatrix<f64>) -> Window {
    let dim = sys.dim();
    let values = sys.basis().values();
    let digits: Vec<nalgebra::DVector<f64>> = sys
        .digits()
        .all()
        .map(|d| nalgebra::DVector::from_vec(d.eval_f64(values)))
        .collect();
    let maxd = digits.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    let mut power = qinv.clone();
    for _ in 0..2000 {
        let imgs: Vec<_> = digits.iter().map(|d| &power * d).collect();
        for k in 0..dim {
            lo[k] += imgs.iter().map(|v| v[k]).fold(0.0, f64::min);
            hi[k] += imgs.iter().map(|v| v[k]).fold(0.0, f64::max);
        }
        power = &power * qinv;
        if power.norm() * maxd < 1e-13 {
            break;
        }
    }
    Window::new(lo, hi)
}

/// Diameter of the attractor bounding box divided by 256 (2D and up) or
/// 65536 (1D, where rasters are cheap and volumes feed frequencies).
pub fn default_resolution(sys: &SubstitutionSystem) -> Result<f64> {
    let q = sys.q().numeric();
    let qinv = q
        .clone()
        .try_inverse()
        .ok_or(GeometryError::NonInvertible)?;
    let b = attractor_bounds(sys, &qinv);
    let diam = b.sides().iter().map(|s| s * s).sum::<f64>().sqrt();
    let cells = if sys.dim() == 1 { 65536.0 } else { 256.0 };
    Ok(diam / cells)
}

/// Rasterized adjoint IFS at resolution `h`. With `iters = None` the
/// iteration runs until two consecutive Hausdorff steps drop below `h`.
pub fn solve_adjoint_ifs(
    sys: &SubstitutionSystem,
    h: f64,
    iters: Option<usize>,
) -> Result<IfsSolution> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeometryError::Resolution(h));
    }
    if iters == Some(0) {
        return Err(GeometryError::NoIterations);
    }
    let q = sys.q().numeric();
    let c = q.clone().singular_values().min();
    if !(c > 1e-12) {
        return Err(GeometryError::NonInvertible);
    }
    let qinv = q
        .clone()
        .try_inverse()
        .ok_or(GeometryError::NonInvertible)?;
    let domain = attractor_bounds(sys, &qinv).dilate(2.0 * h)?;
    let seed = RegionMask::from_window(h, &domain)?;
    let diam = domain.sides().iter().map(|s| s * s).sum::<f64>().sqrt();
    let pull = PullBack::new(sys);
    let boxes: Vec<Window> = pull
        .type_bounds(&qinv, &domain)
        .iter()
        .map(|b| b.dilate(2.0 * h))
        .collect::<Result<_>>()?;
    let cap = iters.unwrap_or(MAX_AUTO_ITERS);
    let estimate = ((diam / h).ln() / c.ln()).ceil().max(1.0) as usize + 2;
    let mut depth_cap = if iters.is_none() {
        estimate.min(cap)
    } else {
        cap
    };
    loop {
        let (masks, steps) = iterate(sys, &pull, &boxes, &seed, depth_cap, iters.is_none(), h)?;
        let converged = settled(&steps, h);
        if iters.is_some() || converged || depth_cap == cap {
            let iterations = steps.len();
            let claimed_accuracy =
                diam * c.powi(-(iterations as i32)) + h * (sys.dim() as f64).sqrt();
            return Ok(IfsSolution {
                masks,
                resolution: h,
                iterations,
                steps,
                claimed_accuracy,
            });
        }
        depth_cap = cap;
    }
}

/// Two consecutive sub-resolution steps; a single zero step can precede further change.
fn settled(steps: &[f64], h: f64) -> bool {
    steps.len() >= 2 && steps[steps.len() - 2..].iter().all(|&s| s < h)
}

fn iterate(
    sys: &SubstitutionSystem,
    pull: &PullBack,
    domain: &[Window],
    seed: &RegionMask,
    cap: usize,
    auto: bool,
    h: f64,
) -> Result<(Vec<RegionMask>, Vec<f64>)> {
    let mut scratch = vec![0.0; 2 * sys.dim() * cap];
    let depths: Vec<Vec<usize>> = (0..sys.kappa())
        .map(|j| {
            (0..seed.len())
                .map(|idx| {
                    let x = seed.centre(idx);
                    if domain[j].contains(&x) {
                        pull.depth(domain, j, &x, cap, &mut scratch)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let level = |m: usize| -> Vec<RegionMask> {
        depths
            .iter()
            .map(|d| {
                let mut mask = seed.clone();
                for (idx, &dj) in d.iter().enumerate() {
                    mask.set(idx, dj >= m);
                }
                mask
            })
            .collect()
    };
    let mut prev = level(0);
    let mut steps = Vec::new();
    for m in 1..=cap {
        let next = level(m);
        let step = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| a.hausdorff(b))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        prev = next;
        steps.push(step);
        if auto && settled(&steps, h) {
            break;
        }
    }
    Ok((prev, steps))
}

/// `|det Q| · Σ_j Vol(A_j Δ Q^{-1}⋃_i(D_ij + A_i))`, the raster set-equation residual.
pub fn set_equation_residual(sys: &SubstitutionSystem, masks: &[RegionMask]) -> Result<f64> {
    let next = PullBack::new(sys).step(masks);
    let mut total = 0.0;
    for (a, b) in masks.iter().zip(&next) {
        total += a.symmetric_difference(b)?.volume();
    }
    Ok(total * sys.q().det_abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct PrototileVolumes {
    /// Left Perron-Frobenius eigenvector, min-normalized or scaled to the mask of A_1.
    pub volumes: Vec<f64>,
    pub eigenvalue: f64,
    pub mask_volumes: Option<Vec<f64>>,
    /// Largest relative gap between eigenvector ratios and mask ratios.
    pub relative_disagreement: Option<f64>,
}

/// Prototile volumes from `|det Q|·Vol(A_j) = Σ_i S(i,j)·Vol(A_i)`.
pub fn prototile_volumes(
    sys: &SubstitutionSystem,
    masks: Option<&[RegionMask]>,
) -> Result<PrototileVolumes> {
    sys.require_primitive("prototile volumes")?;
    let pf = perron_frobenius(sys.s_matrix());
    let det = sys.q().det_abs();
    if (pf.value - det).abs() > 1e-6 * det {
        return Err(GeometryError::VolumeMismatch { pf: pf.value, det });
    }
    let min = pf.left.iter().copied().fold(f64::INFINITY, f64::min);
    let mut volumes: Vec<f64> = pf.left.iter().map(|v| v / min).collect();
    let (mask_volumes, relative_disagreement) = match masks {
        Some(masks) => {
            let mv: Vec<f64> = masks.iter().map(RegionMask::volume).collect();
            let scale = mv[0] / volumes[0];
            let disagreement = volumes
                .iter()
                .zip(&mv)
                .map(|(v, m)| ((m / mv[0]) - (v / volumes[0])).abs() / (v / volumes[0]))
                .fold(0.0, f64::max);
            volumes.iter_mut().for_each(|v| *v *= scale);
            (Some(mv), Some(disagreement))
        }
        None => (None, None),
    };
    Ok(PrototileVolumes {
        volumes,
        eigenvalue: pf.value,
        mask_volumes,
        relative_disagreement,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryScan {
    pub resolutions: Vec<f64>,
    /// `volumes[t][r]`: boundary-cell volume of prototile t at resolution r.
    pub volumes: Vec<Vec<f64>>,
    /// Consecutive ratios per prototile.
    pub ratios: Vec<Vec<f64>>,
    pub decreasing: bool,
}

/// Boundary-cell volumes across refinements; `levels[r][t]` is the mask of
/// prototile t at the r-th resolution.
pub fn boundary_scan(levels: &[Vec<RegionMask>]) -> BoundaryScan {
    let resolutions = levels
        .iter()
        .map(|l| l.first().map_or(0.0, RegionMask::resolution))
        .collect();
    let kappa = levels.first().map_or(0, Vec::len);
    let volumes: Vec<Vec<f64>> = (0..kappa)
        .map(|t| levels.iter().map(|l| l[t].boundary_volume()).collect())
        .collect();
    let ratios: Vec<Vec<f64>> = volumes
        .iter()
        .map(|v| v.windows(2).map(|w| w[1] / w[0]).collect())
        .collect();
    let decreasing = volumes.iter().all(|v| v.windows(2).all(|w| w[1] < w[0]));
    BoundaryScan {
        resolutions,
        volumes,
        ratios,
        decreasing,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Representability {
    pub overlap_fraction: f64,
    pub gap_fraction: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub tiles: usize,
    pub resolution: f64,
}

/// Raster coverage of `window` by translated prototile masks; duplicates allowed.
pub fn raster_coverage(
    masks: &[RegionMask],
    tiles: &[(usize, Vec<f64>)],
    window: &Window,
    h: f64,
    tolerance: f64,
) -> Result<Representability> {
    if window.is_degenerate() {
        return Err(GeometryError::Degenerate(
            "empty representability window".into(),
        ));
    }
    let grid = RegionMask::from_window(h, window)?;
    let mut count = vec![0u32; grid.len()];
    let extents: Vec<Option<Window>> = masks.iter().map(RegionMask::occupied_extent).collect();
    let dim = window.dim();
    let mut probe = vec![0.0; dim];
    for (ty, pos) in tiles {
        let Some(ext) = &extents[*ty] else { continue };
        let bbox = ext.translate(pos);
        let lo: Vec<i64> = (0..dim)
            .map(|k| (bbox.lo[k].max(window.lo[k]) / h).floor() as i64)
            .collect();
        let hi: Vec<i64> = (0..dim)
            .map(|k| (bbox.hi[k].min(window.hi[k]) / h).ceil() as i64)
            .collect();
        if lo.iter().zip(&hi).any(|(l, u)| l >= u) {
            continue;
        }
        let mut cell = lo.clone();
        loop {
            if let Some(idx) = grid.index_of(&cell) {
                if grid.get(idx) {
                    for k in 0..dim {
                        probe[k] = (cell[k] as f64 + 0.5) * h - pos[k];
                    }
                    if masks[*ty].contains(&probe) {
                        count[idx] += 1;
                    }
                }
            }
            let mut k = 0;
            while k < dim {
                cell[k] += 1;
                if cell[k] < hi[k] {
                    break;
                }
                cell[k] = lo[k];
                k += 1;
            }
            if k == dim {
                break;
            }
        }
    }
    let inside: Vec<usize> = grid.occupied().collect();
    let n = inside.len().max(1) as f64;
    let overlap_fraction = inside.iter().filter(|&&i| count[i] >= 2).count() as f64 / n;
    let gap_fraction = inside.iter().filter(|&&i| count[i] == 0).count() as f64 / n;
    Ok(Representability {
        overlap_fraction,
        gap_fraction,
        tolerance,
        pass: overlap_fraction <= tolerance && gap_fraction <= tolerance,
        tiles: tiles.len(),
        resolution: h,
    })
}

/// Coverage of `window` by ω^k of the fixed-point seed tile.
pub fn representability_check(
    sys: &SubstitutionSystem,
    masks: &[RegionMask],
    k: usize,
    window: &Window,
    h: f64,
) -> Result<Representability> {
    let seed = fixed_point_seed(sys)?;
    let reach = masks
        .iter()
        .filter_map(RegionMask::occupied_extent)
        .flat_map(|w| {
            w.lo.iter()
                .zip(&w.hi)
                .map(|(l, u)| l.abs().max(u.abs()).powi(2))
                .collect::<Vec<_>>()
                .into_iter()
        })
        .sum::<f64>()
        .sqrt();
    let clip = window.dilate(reach)?;
    let patch = substitute(sys, &seed.patch(), k, Some(&clip))?;
    let tiles: Vec<(usize, Vec<f64>)> = patch
        .tiles()
        .iter()
        .map(|t| (t.ty, t.shift.eval_f64(sys.basis().values())))
        .collect();
    raster_coverage(masks, &tiles, window, h, REPRESENTABILITY_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn square_system_gives_unit_square() {
        let sys = catalog::square_lattice().unwrap();
        let sol = solve_adjoint_ifs(&sys, 1.0 / 32.0, None).unwrap();
        let expect = RegionMask::from_window(1.0 / 32.0, &Window::cube(2, 0.0, 1.0)).unwrap();
        assert_eq!(
            sol.masks[0].symmetric_difference(&expect).unwrap().count(),
            0
        );
        assert_eq!(*sol.steps.last().unwrap(), 0.0);
    }

    #[test]
    fn kenyon_attractor_has_unit_area() {
        let sys = catalog::kenyon().unwrap();
        let sol = solve_adjoint_ifs(&sys, 1.0 / 64.0, Some(20)).unwrap();
        assert!(
            (sol.masks[0].volume() - 1.0).abs() < 0.05,
            "{}",
            sol.masks[0].volume()
        );
    }

    #[test]
    fn frank_robinson_volume_ratios() {
        let sys = catalog::frank_robinson().unwrap();
        let b = sys.basis().values()[sys.basis().lookup("b").unwrap()];
        let sol = solve_adjoint_ifs(&sys, b * b / 256.0, Some(25)).unwrap();
        let vols = prototile_volumes(&sys, Some(&sol.masks)).unwrap();
        let expect = [b * b, b, b, 1.0];
        let exact = prototile_volumes(&sys, None).unwrap();
        for (v, e) in exact.volumes.iter().zip(expect) {
            assert!((v - e).abs() < 1e-9, "{v} vs {e}");
        }
        assert!(vols.relative_disagreement.unwrap() < 0.03, "{vols:?}");
    }

    #[test]
    fn volume_eigenvector_identity() {
        for sys in catalog::all().unwrap() {
            let v = prototile_volumes(&sys, None).unwrap().volumes;
            let s = sys.s_matrix();
            let det = sys.q().det_abs();
            for j in 0..sys.kappa() {
                let rhs: f64 = (0..sys.kappa()).map(|i| s[i][j] as f64 * v[i]).sum();
                assert!(
                    (det * v[j] - rhs).abs() < 1e-9 * rhs.max(1.0),
                    "{}",
                    sys.name()
                );
            }
        }
    }

    #[test]
    fn set_equation_residual_shrinks_with_resolution() {
        let sys = catalog::kenyon().unwrap();
        let r: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
            .iter()
            .map(|&h| {
                let sol = solve_adjoint_ifs(&sys, h, None).unwrap();
                set_equation_residual(&sys, &sol.masks).unwrap()
            })
            .collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0]), "{r:?}");
    }

    #[test]
    fn boundary_scan_halves_for_square() {
        let levels: Vec<Vec<RegionMask>> = [0.25, 0.125, 0.0625]
            .iter()
            .map(|&h| vec![RegionMask::from_window(h, &Window::cube(2, 0.0, 1.0)).unwrap()])
            .collect();
        let scan = boundary_scan(&levels);
        assert!(scan.decreasing);
        assert!(scan.ratios[0].iter().all(|r| (r - 0.5).abs() < 0.1));
    }

    #[test]
    fn boundary_scan_decreases_for_bundled_tiles() {
        for sys in [
            catalog::kenyon().unwrap(),
            catalog::frank_robinson().unwrap(),
        ] {
            let levels: Vec<Vec<RegionMask>> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
                .iter()
                .map(|&h| solve_adjoint_ifs(&sys, h, None).unwrap().masks)
                .collect();
            assert!(boundary_scan(&levels).decreasing, "{}", sys.name());
        }
    }

    #[test]
    fn square_coverage_is_exact() {
        let sys = catalog::square_lattice().unwrap();
        let masks = solve_adjoint_ifs(&sys, 1.0 / 32.0, None).unwrap().masks;
        let rep = representability_check(&sys, &masks, 3, &Window::cube(2, 0.0, 8.0), 8.0 / 256.0)
            .unwrap();
        assert_eq!(rep.overlap_fraction, 0.0);
        assert_eq!(rep.gap_fraction, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn kenyon_level_three_tiles_the_window() {
        let sys = catalog::kenyon().unwrap();
        let masks = solve_adjoint_ifs(&sys, 1.0 / 64.0, None).unwrap().masks;
        let rep = representability_check(&sys, &masks, 3, &Window::cube(2, 0.0, 9.0), 9.0 / 256.0)
            .unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn duplicated_tile_is_detected() {
        let sys = catalog::square_lattice().unwrap();
        let masks = solve_adjoint_ifs(&sys, 1.0 / 32.0, None).unwrap().masks;
        let mut tiles: Vec<(usize, Vec<f64>)> = (0..4)
            .flat_map(|x| (0..4).map(move |y| (0, vec![x as f64, y as f64])))
            .collect();
        tiles.push((0, vec![1.0, 1.0]));
        let rep = raster_coverage(
            &masks,
            &tiles,
            &Window::cube(2, 0.0, 4.0),
            4.0 / 256.0,
            0.02,
        )
        .unwrap();
        assert!((rep.overlap_fraction - 1.0 / 16.0).abs() < 1e-9);
        assert!(!rep.pass);
    }
}
