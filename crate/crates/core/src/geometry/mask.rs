use std::collections::VecDeque;

use super::{GeometryError, Result, Window};

/// Set of occupied cells `h·(c + [0,1)^d)` on the global lattice `h·ℤ^d`,
/// stored densely over a bounding box of cells starting at `offset`.
/// Axis 0 varies fastest in `cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    h: f64,
    offset: Vec<i64>,
    shape: Vec<usize>,
    cells: Vec<bool>,
}

/// Cap on dense raster size.
pub(crate) const MAX_CELLS: usize = 64_000_000;

impl RegionMask {
    pub fn empty(h: f64, offset: Vec<i64>, shape: Vec<usize>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeometryError::Resolution(h));
        }
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .unwrap_or(usize::MAX);
        if n > MAX_CELLS {
            return Err(GeometryError::TooManyCells(n));
        }
        Ok(RegionMask {
            h,
            offset,
            shape,
            cells: vec![false; n],
        })
    }

    /// Empty mask whose cells cover `window`.
    pub fn covering(h: f64, window: &Window) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeometryError::Resolution(h));
        }
        let offset: Vec<i64> = window.lo.iter().map(|l| (l / h).floor() as i64).collect();
        let shape = window
            .hi
            .iter()
            .zip(&offset)
            .map(|(hi, o)| ((hi / h).ceil() as i64 - o).max(1) as usize)
            .collect();
        Self::empty(h, offset, shape)
    }

    /// Cells of `window`'s covering grid whose centres lie in the window.
    pub fn from_window(h: f64, window: &Window) -> Result<Self> {
        let mut m = Self::covering(h, window)?;
        m.fill(|p| window.contains(p));
        Ok(m)
    }

    /// Marks every cell whose centre satisfies `pred`.
    pub fn fill(&mut self, mut pred: impl FnMut(&[f64]) -> bool) {
        let mut centre = vec![0.0; self.dim()];
        for idx in 0..self.cells.len() {
            self.centre_into(idx, &mut centre);
            self.cells[idx] = pred(&centre);
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn resolution(&self) -> f64 {
        self.h
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> Vec<f64> {
        self.offset.iter().map(|&o| o as f64 * self.h).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.cell_volume()
    }

    pub fn get(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn set(&mut self, idx: usize, v: bool) {
        self.cells[idx] = v;
    }

    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| i)
    }

    /// Global lattice coordinates of a cell.
    pub fn cell_coords(&self, mut idx: usize) -> Vec<i64> {
        self.shape
            .iter()
            .zip(&self.offset)
            .map(|(&s, &o)| {
                let c = (idx % s) as i64;
                idx /= s;
                c + o
            })
            .collect()
    }

    /// Local index of the global lattice cell `c`, if inside the box.
    pub fn index_of(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for k in 0..self.dim() {
            let local = c[k] - self.offset[k];
            if local < 0 || local >= self.shape[k] as i64 {
                return None;
            }
            idx += local as usize * stride;
            stride *= self.shape[k];
        }
        Some(idx)
    }

    pub fn centre(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.centre_into(idx, &mut out);
        out
    }

    fn centre_into(&self, mut idx: usize, out: &mut [f64]) {
        for k in 0..self.shape.len() {
            let c = (idx % self.shape[k]) as i64 + self.offset[k];
            idx /= self.shape[k];
            out[k] = (c as f64 + 0.5) * self.h;
        }
    }

    /// Membership of the cell containing `p`.
    pub fn contains(&self, p: &[f64]) -> bool {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for k in 0..self.dim() {
            let local = (p[k] / self.h).floor() as i64 - self.offset[k];
            if local < 0 || local >= self.shape[k] as i64 {
                return false;
            }
            idx += local as usize * stride;
            stride *= self.shape[k];
        }
        self.cells[idx]
    }

    /// Bounding box of the stored cell block.
    pub fn extent(&self) -> Window {
        Window::new(
            self.offset.iter().map(|&o| o as f64 * self.h).collect(),
            self.offset
                .iter()
                .zip(&self.shape)
                .map(|(&o, &s)| (o + s as i64) as f64 * self.h)
                .collect(),
        )
    }

    /// Bounding box of the occupied cells, `None` when empty.
    pub fn occupied_extent(&self) -> Option<Window> {
        let d = self.dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for idx in self.occupied() {
            for (k, c) in self.cell_coords(idx).into_iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c + 1);
            }
        }
        (lo[0] != i64::MAX).then(|| {
            Window::new(
                lo.iter().map(|&c| c as f64 * self.h).collect(),
                hi.iter().map(|&c| c as f64 * self.h).collect(),
            )
        })
    }

    fn neighbours(&self, idx: usize, diagonal: bool) -> Vec<Option<usize>> {
        let c = self.cell_coords(idx);
        let d = self.dim();
        let mut out = Vec::new();
        if diagonal {
            let total = 3usize.pow(d as u32);
            for code in 0..total {
                let mut rest = code;
                let mut n = c.clone();
                let mut zero = true;
                for x in n.iter_mut() {
                    let off = (rest % 3) as i64 - 1;
                    rest /= 3;
                    zero &= off == 0;
                    *x += off;
                }
                if !zero {
                    out.push(self.index_of(&n));
                }
            }
        } else {
            for k in 0..d {
                for off in [-1, 1] {
                    let mut n = c.clone();
                    n[k] += off;
                    out.push(self.index_of(&n));
                }
            }
        }
        out
    }

    /// Occupied cells with an unoccupied face neighbour.
    pub fn boundary_count(&self) -> usize {
        self.occupied()
            .filter(|&idx| {
                self.neighbours(idx, false)
                    .into_iter()
                    .any(|n| !n.is_some_and(|j| self.cells[j]))
            })
            .count()
    }

    pub fn boundary_volume(&self) -> f64 {
        self.boundary_count() as f64 * self.cell_volume()
    }

    fn compatible(&self, other: &RegionMask) -> Result<()> {
        if self.dim() != other.dim() || (self.h - other.h).abs() > 1e-15 * self.h {
            return Err(GeometryError::Incompatible);
        }
        Ok(())
    }

    /// Copy onto another cell block; cells outside the old block are empty.
    pub fn reframe(&self, offset: Vec<i64>, shape: Vec<usize>) -> Result<RegionMask> {
        let mut out = RegionMask::empty(self.h, offset, shape)?;
        for idx in self.occupied() {
            if let Some(j) = out.index_of(&self.cell_coords(idx)) {
                out.cells[j] = true;
            }
        }
        Ok(out)
    }

    fn union_frame(&self, other: &RegionMask) -> (Vec<i64>, Vec<usize>) {
        let offset: Vec<i64> = self
            .offset
            .iter()
            .zip(&other.offset)
            .map(|(a, b)| *a.min(b))
            .collect();
        let shape = (0..self.dim())
            .map(|k| {
                let end = (self.offset[k] + self.shape[k] as i64)
                    .max(other.offset[k] + other.shape[k] as i64);
                (end - offset[k]) as usize
            })
            .collect();
        (offset, shape)
    }

    fn combine(&self, other: &RegionMask, op: impl Fn(bool, bool) -> bool) -> Result<RegionMask> {
        self.compatible(other)?;
        let (offset, shape) = self.union_frame(other);
        let a = self.reframe(offset.clone(), shape.clone())?;
        let b = other.reframe(offset, shape)?;
        let cells = a
            .cells
            .iter()
            .zip(&b.cells)
            .map(|(&x, &y)| op(x, y))
            .collect();
        Ok(RegionMask { cells, ..a })
    }

    pub fn union(&self, other: &RegionMask) -> Result<RegionMask> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &RegionMask) -> Result<RegionMask> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &RegionMask) -> Result<RegionMask> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &RegionMask) -> Result<RegionMask> {
        self.combine(other, |a, b| a != b)
    }

    /// True when every occupied cell of `self` is occupied in `other`.
    pub fn is_subset_of(&self, other: &RegionMask) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    fn disc_offsets(&self, r: f64) -> Vec<Vec<i64>> {
        let d = self.dim();
        let rc = (r / self.h).floor() as i64;
        let span = (2 * rc + 1) as usize;
        let total = span.pow(d as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut rest = code;
            let off: Vec<i64> = (0..d)
                .map(|_| {
                    let o = (rest % span) as i64 - rc;
                    rest /= span;
                    o
                })
                .collect();
            let dist2: f64 = off.iter().map(|&o| (o as f64 * self.h).powi(2)).sum();
            if dist2 <= r * r * (1.0 + 1e-12) {
                out.push(off);
            }
        }
        out
    }

    /// Raster `F^{+r}`: cells whose centre is within `r` of an occupied centre.
    pub fn dilate(&self, r: f64) -> Result<RegionMask> {
        if r < 0.0 {
            return Err(GeometryError::NegativeRadius(r));
        }
        let pad = (r / self.h).floor() as i64;
        let offset: Vec<i64> = self.offset.iter().map(|o| o - pad).collect();
        let shape: Vec<usize> = self.shape.iter().map(|s| s + 2 * pad as usize).collect();
        let mut out = RegionMask::empty(self.h, offset, shape)?;
        let disc = self.disc_offsets(r);
        for idx in self.occupied() {
            let c = self.cell_coords(idx);
            for off in &disc {
                let n: Vec<i64> = c.iter().zip(off).map(|(a, b)| a + b).collect();
                if let Some(j) = out.index_of(&n) {
                    out.cells[j] = true;
                }
            }
        }
        Ok(out)
    }

    /// Raster `F^{-r}`: occupied cells whose whole `r`-disc of centres is occupied.
    pub fn erode(&self, r: f64) -> Result<RegionMask> {
        if r < 0.0 {
            return Err(GeometryError::NegativeRadius(r));
        }
        let disc = self.disc_offsets(r);
        let mut out = RegionMask {
            cells: vec![false; self.cells.len()],
            ..self.clone()
        };
        for idx in self.occupied() {
            let c = self.cell_coords(idx);
            let inside = disc.iter().all(|off| {
                let n: Vec<i64> = c.iter().zip(off).map(|(a, b)| a + b).collect();
                self.index_of(&n).is_some_and(|j| self.cells[j])
            });
            out.cells[idx] = inside;
        }
        Ok(out)
    }

    /// Chebyshev raster distance (in cells) from every cell to the occupied set.
    fn distance_field(&self) -> Vec<u32> {
        let d = self.dim();
        let strides: Vec<usize> = (0..d).map(|k| self.shape[..k].iter().product()).collect();
        let offsets: Vec<(Vec<i64>, isize)> = (0..3usize.pow(d as u32))
            .map(|code| {
                let step: Vec<i64> = (0..d)
                    .map(|k| (code / 3usize.pow(k as u32) % 3) as i64 - 1)
                    .collect();
                let linear = step
                    .iter()
                    .zip(&strides)
                    .map(|(&o, &st)| o as isize * st as isize)
                    .sum();
                (step, linear)
            })
            .filter(|(step, _)| step.iter().any(|&o| o != 0))
            .collect();
        let mut dist = vec![u32::MAX; self.cells.len()];
        let mut queue = VecDeque::new();
        for idx in self.occupied() {
            dist[idx] = 0;
            queue.push_back(idx);
        }
        let mut local = vec![0i64; d];
        while let Some(idx) = queue.pop_front() {
            let mut rest = idx;
            for k in 0..d {
                local[k] = (rest % self.shape[k]) as i64;
                rest /= self.shape[k];
            }
            let next = dist[idx] + 1;
            for (step, linear) in &offsets {
                let inside = (0..d).all(|k| {
                    let c = local[k] + step[k];
                    c >= 0 && c < self.shape[k] as i64
                });
                if inside {
                    let j = (idx as isize + linear) as usize;
                    if dist[j] == u32::MAX {
                        dist[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        dist
    }

    /// Sup-norm Hausdorff distance between occupied sets, in length units.
    pub fn hausdorff(&self, other: &RegionMask) -> Result<f64> {
        self.compatible(other)?;
        if self.is_empty() || other.is_empty() {
            return Ok(if self.is_empty() && other.is_empty() {
                0.0
            } else {
                f64::INFINITY
            });
        }
        let (offset, shape) = self.union_frame(other);
        let a = self.reframe(offset.clone(), shape.clone())?;
        let b = other.reframe(offset, shape)?;
        let da = a.distance_field();
        let db = b.distance_field();
        let ab = b.occupied().map(|i| da[i]).max().unwrap_or(0);
        let ba = a.occupied().map(|i| db[i]).max().unwrap_or(0);
        Ok(ab.max(ba) as f64 * self.h)
    }
}
