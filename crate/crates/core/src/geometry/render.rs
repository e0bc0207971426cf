use std::fmt::Write as _;

use super::{GeometryError, RegionMask, Result};

/// Fill colours by prototile type, cycled.
pub const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];

fn plane_shape(mask: &RegionMask) -> Result<(usize, usize)> {
    match mask.shape() {
        [w] => Ok((*w, 1)),
        [w, h] => Ok((*w, *h)),
        _ => Err(GeometryError::Degenerate(
            "only 1D and 2D masks can be rendered".into(),
        )),
    }
}

/// Binary PGM, one byte per cell, highest row first.
pub fn mask_to_pgm(mask: &RegionMask) -> Result<Vec<u8>> {
    let (w, h) = plane_shape(mask)?;
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for row in (0..h).rev() {
        out.extend((0..w).map(|x| if mask.get(row * w + x) { 255u8 } else { 0u8 }));
    }
    Ok(out)
}

/// Maximal horizontal runs `(row, first, last_exclusive)` of occupied cells.
fn runs(mask: &RegionMask, w: usize, h: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for row in 0..h {
        let mut x = 0;
        while x < w {
            if mask.get(row * w + x) {
                let start = x;
                while x < w && mask.get(row * w + x) {
                    x += 1;
                }
                out.push((row, start, x));
            } else {
                x += 1;
            }
        }
    }
    out
}

fn push_runs(svg: &mut String, mask: &RegionMask, shift: [f64; 2], fill: &str) -> Result<()> {
    let (w, h) = plane_shape(mask)?;
    let cell = mask.resolution();
    let origin = mask.origin();
    let oy = origin.get(1).copied().unwrap_or(0.0);
    let _ = write!(svg, "<g fill=\"{fill}\">");
    for (row, a, b) in runs(mask, w, h) {
        let x = origin[0] + a as f64 * cell + shift[0];
        let y = oy + row as f64 * cell + shift[1];
        let _ = write!(
            svg,
            "<rect x=\"{x:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{cell:.6}\"/>",
            -(y + cell),
            (b - a) as f64 * cell
        );
    }
    svg.push_str("</g>\n");
    Ok(())
}

fn svg_frame(lo: [f64; 2], hi: [f64; 2], body: &str) -> String {
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {w:.6} {h:.6}\" data-schema-version=\"1\">\n{body}</svg>\n",
        lo[0], -hi[1]
    )
}

/// Mask as SVG rectangles, one per maximal row run; y points up.
pub fn mask_to_svg(mask: &RegionMask) -> Result<String> {
    let mut body = String::new();
    push_runs(&mut body, mask, [0.0, 0.0], PALETTE[0])?;
    let ext = mask.extent();
    let hi1 = ext.hi.get(1).copied().unwrap_or(mask.resolution());
    let lo1 = ext.lo.get(1).copied().unwrap_or(0.0);
    Ok(svg_frame([ext.lo[0], lo1], [ext.hi[0], hi1], &body))
}

/// Patch rendering: each tile drawn as its prototile mask, coloured by type.
pub fn patch_to_svg(masks: &[RegionMask], tiles: &[(usize, Vec<f64>)]) -> Result<String> {
    let mut body = String::new();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for (ty, pos) in tiles {
        let mask = masks
            .get(*ty)
            .ok_or_else(|| GeometryError::Degenerate(format!("no mask for type {}", ty + 1)))?;
        let shift = [pos[0], pos.get(1).copied().unwrap_or(0.0)];
        push_runs(&mut body, mask, shift, PALETTE[ty % PALETTE.len()])?;
        let ext = mask.extent();
        for k in 0..2 {
            let (l, h) = match (ext.lo.get(k), ext.hi.get(k)) {
                (Some(l), Some(h)) => (*l, *h),
                _ => (0.0, mask.resolution()),
            };
            lo[k] = lo[k].min(l + shift[k]);
            hi[k] = hi[k].max(h + shift[k]);
        }
    }
    if tiles.is_empty() {
        lo = [0.0, 0.0];
        hi = [1.0, 1.0];
    }
    Ok(svg_frame(lo, hi, &body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;

    #[test]
    fn pgm_has_one_byte_per_cell() {
        let m = RegionMask::from_window(0.25, &Window::cube(2, 0.0, 1.0)).unwrap();
        let pgm = mask_to_pgm(&m).unwrap();
        assert!(pgm.starts_with(b"P5\n4 4\n255\n"));
        assert_eq!(pgm.len(), b"P5\n4 4\n255\n".len() + 16);
    }

    #[test]
    fn svg_merges_rows() {
        let m = RegionMask::from_window(0.25, &Window::cube(2, 0.0, 1.0)).unwrap();
        let svg = mask_to_svg(&m).unwrap();
        assert_eq!(svg.matches("<rect").count(), 4);
        let patch = patch_to_svg(&[m], &[(0, vec![0.0, 0.0]), (0, vec![1.0, 0.0])]).unwrap();
        assert_eq!(patch.matches("<rect").count(), 8);
    }
}
