use serde::Serialize;

use super::{GeometryError, Result};

/// Axis-aligned box `[lo, hi)` in length units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        Window { lo, hi }
    }

    /// Cube `[-r, r)^d`.
    pub fn centered(dim: usize, r: f64) -> Self {
        Window {
            lo: vec![-r; dim],
            hi: vec![r; dim],
        }
    }

    /// Cube `[lo, lo + side)^d`.
    pub fn cube(dim: usize, lo: f64, side: f64) -> Self {
        Window {
            lo: vec![lo; dim],
            hi: vec![lo + side; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sides(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.sides().iter().any(|&s| s.is_nan() || s <= 0.0)
    }

    pub fn volume(&self) -> f64 {
        self.sides().iter().map(|s| s.max(0.0)).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| x >= l && x < h)
    }

    /// Euclidean distance from `p` to the closed box.
    pub fn distance(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (l, h))| {
                let d = if x < l {
                    l - x
                } else if x > h {
                    x - h
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// True when `self` lies inside `other` up to `tol`.
    pub fn within(&self, other: &Window, tol: f64) -> bool {
        (0..self.dim()).all(|k| self.lo[k] >= other.lo[k] - tol && self.hi[k] <= other.hi[k] + tol)
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Window) -> Window {
        Window {
            lo: self
                .lo
                .iter()
                .zip(&other.lo)
                .map(|(a, b)| a.min(*b))
                .collect(),
            hi: self
                .hi
                .iter()
                .zip(&other.hi)
                .map(|(a, b)| a.max(*b))
                .collect(),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.sides().iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn translate(&self, t: &[f64]) -> Window {
        Window {
            lo: self.lo.iter().zip(t).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(t).map(|(a, b)| a + b).collect(),
        }
    }

    /// Box thickening by `r` in every coordinate direction.
    pub fn dilate(&self, r: f64) -> Result<Window> {
        if r < 0.0 {
            return Err(GeometryError::NegativeRadius(r));
        }
        Ok(Window {
            lo: self.lo.iter().map(|x| x - r).collect(),
            hi: self.hi.iter().map(|x| x + r).collect(),
        })
    }

    /// Points at box distance at least `r` from the boundary; `None` when empty.
    pub fn erode(&self, r: f64) -> Result<Option<Window>> {
        if r < 0.0 {
            return Err(GeometryError::NegativeRadius(r));
        }
        let w = Window {
            lo: self.lo.iter().map(|x| x + r).collect(),
            hi: self.hi.iter().map(|x| x - r).collect(),
        };
        Ok((!w.is_degenerate()).then_some(w))
    }
}

/// Vol((∂F)^{+r}) / Vol(F) for a box F, in closed form.
pub fn vanhove_ratio(f: &Window, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(GeometryError::NegativeRadius(r));
    }
    if f.is_degenerate() {
        return Err(GeometryError::Degenerate(
            "van Hove ratio of an empty box".into(),
        ));
    }
    let sides = f.sides();
    let outer: f64 = sides.iter().map(|l| l + 2.0 * r).product();
    let inner: f64 = sides.iter().map(|l| (l - 2.0 * r).max(0.0)).product();
    Ok((outer - inner) / f.volume())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_erosion_and_dilation() {
        let f = Window::cube(2, 0.0, 10.0);
        assert_eq!(f.dilate(1.0).unwrap().volume(), 144.0);
        assert_eq!(f.erode(1.0).unwrap().unwrap().volume(), 64.0);
        assert!(Window::cube(2, 0.0, 1.0).erode(1.0).unwrap().is_none());
        assert!(f.dilate(-1.0).is_err());
    }

    #[test]
    fn van_hove_closed_form() {
        assert!((vanhove_ratio(&Window::cube(2, 0.0, 100.0), 1.0).unwrap() - 0.08).abs() < 1e-12);
        assert!((vanhove_ratio(&Window::cube(2, 0.0, 4.0), 1.0).unwrap() - 2.0).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for l in [2.0, 4.0, 8.0, 16.0, 64.0, 1024.0] {
            let v = vanhove_ratio(&Window::cube(3, 0.0, l), 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(vanhove_ratio(&Window::new(vec![0.0], vec![0.0]), 1.0).is_err());
    }

    #[test]
    fn half_open_membership() {
        let w = Window::cube(2, 0.0, 1.0);
        assert!(w.contains(&[0.0, 0.5]));
        assert!(!w.contains(&[1.0, 0.5]));
        assert_eq!(w.distance(&[2.0, 0.5]), 1.0);
    }
}
