use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use super::{Result, SubstitutionError, SubstitutionSystem};
use crate::geometry::Window;
use crate::numberfield::{
    format_rational, parse_rational, CoordinateBasis, Rational, SymbolicVector,
};

/// Translate of prototile `ty` (0-based) by `shift`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub ty: usize,
    pub shift: SymbolicVector,
}

impl Tile {
    pub fn new(ty: usize, shift: SymbolicVector) -> Self {
        Tile { ty, shift }
    }
}

/// Finite set of tiles in deterministic (generation) order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Patch {
    tiles: Vec<Tile>,
}

impl Patch {
    /// Drops repeated tiles, keeping the first occurrence.
    pub fn new(tiles: Vec<Tile>) -> Self {
        let mut seen = HashSet::with_capacity(tiles.len());
        let tiles = tiles
            .into_iter()
            .filter(|t| seen.insert(t.clone()))
            .collect();
        Patch { tiles }
    }

    pub fn single(ty: usize, shift: SymbolicVector) -> Self {
        Patch {
            tiles: vec![Tile { ty, shift }],
        }
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn index(&self) -> HashMap<&Tile, usize> {
        self.tiles.iter().enumerate().map(|(i, t)| (t, i)).collect()
    }

    pub fn translate(&self, v: &SymbolicVector) -> Patch {
        Patch {
            tiles: self
                .tiles
                .iter()
                .map(|t| Tile {
                    ty: t.ty,
                    shift: &t.shift + v,
                })
                .collect(),
        }
    }

    pub fn count_by_type(&self, kappa: usize) -> Vec<usize> {
        let mut counts = vec![0; kappa];
        for t in &self.tiles {
            counts[t.ty] += 1;
        }
        counts
    }

    pub fn float_shifts(&self, basis: &CoordinateBasis) -> Vec<Vec<f64>> {
        self.tiles
            .iter()
            .map(|t| t.shift.eval_f64(basis.values()))
            .collect()
    }

    /// Line-oriented text form: exact coefficients then float evaluations.
    pub fn to_text(&self, basis: &CoordinateBasis, dim: usize) -> String {
        let names: Vec<&str> = basis.names().collect();
        let mut out = String::new();
        out.push_str("# tilescope patch\n# schema_version: 1\n");
        out.push_str(&format!("# dim: {dim}\n# basis: {}\n", names.join(" ")));
        out.push_str(&format!("# tiles: {}\n", self.tiles.len()));
        let s = basis.len();
        for t in &self.tiles {
            let coords: Vec<String> = (0..dim)
                .map(|i| {
                    t.shift.flat()[i * s..(i + 1) * s]
                        .iter()
                        .map(format_rational)
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            let floats: Vec<String> = t
                .shift
                .eval_f64(basis.values())
                .iter()
                .map(|x| format!("{x}"))
                .collect();
            out.push_str(&format!(
                "{} [{}] | {}\n",
                t.ty + 1,
                coords.join(";"),
                floats.join(" ")
            ));
        }
        out
    }

    pub fn from_text(text: &str, basis: &CoordinateBasis, dim: usize) -> Result<Patch> {
        let s = basis.len();
        let mut tiles = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| SubstitutionError::PatchFormat {
                line: lineno + 1,
                msg,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let header = header.trim();
                if let Some(v) = header.strip_prefix("schema_version:") {
                    if v.trim() != "1" {
                        return Err(err(format!("unsupported schema_version {}", v.trim())));
                    }
                } else if let Some(v) = header.strip_prefix("dim:") {
                    if v.trim().parse::<usize>().ok() != Some(dim) {
                        return Err(err(format!("dimension {} does not match {dim}", v.trim())));
                    }
                } else if let Some(v) = header.strip_prefix("basis:") {
                    let names: Vec<&str> = v.split_whitespace().collect();
                    if !names.iter().copied().eq(basis.names()) {
                        return Err(err(format!(
                            "basis {names:?} does not match the system basis"
                        )));
                    }
                }
                continue;
            }
            let exact = line.split('|').next().unwrap_or("").trim();
            let (ty, rest) = exact
                .split_once(' ')
                .ok_or_else(|| err("missing coordinates".into()))?;
            let ty: usize = ty
                .parse()
                .map_err(|_| err(format!("bad tile type '{ty}'")))?;
            if ty == 0 {
                return Err(err("tile types are 1-based".into()));
            }
            let body = rest
                .trim()
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'));
            let body = body.ok_or_else(|| err("coordinates must be enclosed in [ ]".into()))?;
            let rows: Vec<&str> = body.split(';').collect();
            if rows.len() != dim {
                return Err(err(format!(
                    "expected {dim} coordinates, found {}",
                    rows.len()
                )));
            }
            let mut coeffs: Vec<Rational> = Vec::with_capacity(dim * s);
            for row in rows {
                let parts: Vec<&str> = row.split(',').collect();
                if parts.len() != s {
                    return Err(err(format!(
                        "expected {s} basis coefficients, found {}",
                        parts.len()
                    )));
                }
                for p in parts {
                    coeffs.push(parse_rational(p).map_err(|e| err(e.to_string()))?);
                }
            }
            tiles.push(Tile {
                ty: ty - 1,
                shift: SymbolicVector::from_flat(dim, s, coeffs),
            });
        }
        Ok(Patch::new(tiles))
    }
}

/// Numeric powers Q^m and the descendant spread bounds used for clipping.
struct ClipPlan {
    powers: Vec<DMatrix<f64>>,
    slack: Vec<f64>,
}

impl ClipPlan {
    fn new(sys: &SubstitutionSystem, k: usize) -> Self {
        let q = sys.q().numeric();
        let dim = sys.dim();
        let mut powers = vec![DMatrix::<f64>::identity(dim, dim)];
        for m in 1..=k {
            powers.push(&powers[m - 1] * q);
        }
        let maxd = sys.max_digit_norm();
        let mut slack = vec![1e-9];
        let mut acc = 0.0;
        for m in 0..k {
            acc += powers[m].singular_values().max();
            slack.push(maxd * acc * (1.0 + 1e-12) + 1e-9);
        }
        ClipPlan { powers, slack }
    }

    fn keep(&self, window: &Window, remaining: usize, x: &[f64]) -> bool {
        if remaining == 0 {
            return window.contains(x);
        }
        let p = &self.powers[remaining];
        let image: Vec<f64> = (0..x.len())
            .map(|i| (0..x.len()).map(|j| p[(i, j)] * x[j]).sum())
            .collect();
        window.distance(&image) <= self.slack[remaining]
    }
}

fn substitute_once(
    sys: &SubstitutionSystem,
    patch: &Patch,
    mut keep: impl FnMut(&SymbolicVector) -> bool,
) -> Result<(Patch, Vec<usize>)> {
    let kappa = sys.kappa();
    let budget = sys.bit_budget();
    let mut seen: HashSet<Tile> = HashSet::with_capacity(patch.len() * 4);
    let mut tiles = Vec::with_capacity(patch.len() * 4);
    let mut parents = Vec::with_capacity(patch.len() * 4);
    for (pi, t) in patch.tiles.iter().enumerate() {
        let qx = sys.q().apply(&t.shift);
        qx.check_budget(budget)
            .map_err(|_| SubstitutionError::BitBudget(budget))?;
        for i in 0..kappa {
            for d in sys.digits().get(i, t.ty) {
                let shift = &qx + d;
                if !keep(&shift) {
                    continue;
                }
                let tile = Tile { ty: i, shift };
                if seen.insert(tile.clone()) {
                    tiles.push(tile);
                    parents.push(pi);
                }
            }
        }
    }
    Ok((Patch { tiles }, parents))
}

/// ω^k(P) in exact arithmetic, optionally clipped to tiles whose anchors
/// end inside `window`.
pub fn substitute(
    sys: &SubstitutionSystem,
    patch: &Patch,
    k: usize,
    window: Option<&Window>,
) -> Result<Patch> {
    let plan = window.map(|_| ClipPlan::new(sys, k));
    let values = sys.basis().values().to_vec();
    let mut cur = patch.clone();
    for level in 0..k {
        let remaining = k - level - 1;
        let keep = |v: &SymbolicVector| match (window, &plan) {
            (Some(w), Some(p)) => p.keep(w, remaining, &v.eval_f64(&values)),
            _ => true,
        };
        cur = substitute_once(sys, &cur, keep)?.0;
    }
    Ok(cur)
}

/// One level of a traced substitution: `parent[i]` indexes the tile of the
/// previous level that produced tile `i`.
#[derive(Debug, Clone)]
pub struct TracedLevel {
    pub patch: Patch,
    pub parent: Vec<usize>,
}

/// ω^0(P), ..., ω^k(P) with parent links between consecutive levels.
pub fn substitute_traced(
    sys: &SubstitutionSystem,
    patch: &Patch,
    k: usize,
) -> Result<Vec<TracedLevel>> {
    let mut levels = vec![TracedLevel {
        patch: patch.clone(),
        parent: Vec::new(),
    }];
    for _ in 0..k {
        let (next, parent) = substitute_once(sys, &levels.last().unwrap().patch, |_| true)?;
        levels.push(TracedLevel {
            patch: next,
            parent,
        });
    }
    Ok(levels)
}

/// Floating-point patch for deep renders; duplicates merged at 1e-9.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloatPatch {
    pub tiles: Vec<(usize, Vec<f64>)>,
}

const FLOAT_DEDUP: f64 = 1e-9;

impl FloatPatch {
    pub fn from_patch(patch: &Patch, basis: &CoordinateBasis) -> Self {
        FloatPatch {
            tiles: patch
                .tiles()
                .iter()
                .map(|t| (t.ty, t.shift.eval_f64(basis.values())))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

struct FloatDedup {
    cells: HashMap<(usize, Vec<i64>), Vec<usize>>,
}

impl FloatDedup {
    fn key(p: &[f64]) -> Vec<i64> {
        p.iter().map(|x| (x / FLOAT_DEDUP).floor() as i64).collect()
    }

    fn insert(&mut self, ty: usize, p: &[f64], store: &[(usize, Vec<f64>)], idx: usize) -> bool {
        let key = Self::key(p);
        let dim = p.len();
        let neighbours = 3usize.pow(dim as u32);
        for code in 0..neighbours {
            let mut c = code;
            let probe: Vec<i64> = key
                .iter()
                .map(|k| {
                    let off = (c % 3) as i64 - 1;
                    c /= 3;
                    k + off
                })
                .collect();
            if let Some(list) = self.cells.get(&(ty, probe)) {
                for &j in list {
                    let q = &store[j].1;
                    if p.iter().zip(q).all(|(a, b)| (a - b).abs() <= FLOAT_DEDUP) {
                        return false;
                    }
                }
            }
        }
        self.cells.entry((ty, key)).or_default().push(idx);
        true
    }
}

/// ω^k in floating point.
pub fn substitute_float(
    sys: &SubstitutionSystem,
    patch: &FloatPatch,
    k: usize,
    window: Option<&Window>,
) -> FloatPatch {
    let plan = window.map(|_| ClipPlan::new(sys, k));
    let kappa = sys.kappa();
    let values = sys.basis().values();
    let digits: Vec<Vec<Vec<Vec<f64>>>> = (0..kappa)
        .map(|i| {
            (0..kappa)
                .map(|j| {
                    sys.digits()
                        .get(i, j)
                        .iter()
                        .map(|d| d.eval_f64(values))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut cur = patch.clone();
    for level in 0..k {
        let remaining = k - level - 1;
        let mut next: Vec<(usize, Vec<f64>)> = Vec::with_capacity(cur.len() * 4);
        let mut dedup = FloatDedup {
            cells: HashMap::new(),
        };
        for (ty, x) in &cur.tiles {
            let qx = sys.q().apply_f64(x);
            for (i, row) in digits.iter().enumerate() {
                for d in &row[*ty] {
                    let p: Vec<f64> = qx.iter().zip(d).map(|(a, b)| a + b).collect();
                    if let (Some(w), Some(plan)) = (window, &plan) {
                        if !plan.keep(w, remaining, &p) {
                            continue;
                        }
                    }
                    let idx = next.len();
                    if dedup.insert(i, &p, &next, idx) {
                        next.push((i, p));
                    }
                }
            }
        }
        cur = FloatPatch { tiles: next };
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::substitution::s_power;

    #[test]
    fn kenyon_first_level_has_nine_tiles() {
        let sys = catalog::kenyon().unwrap();
        let p = substitute(&sys, &Patch::single(0, sys.zero_vector()), 1, None).unwrap();
        assert_eq!(p.len(), 9);
        let expect = SymbolicVector::parse(sys.basis(), &["1", "1+a"]).unwrap();
        assert!(p.tiles().iter().any(|t| t.shift == expect));
    }

    #[test]
    fn level_zero_is_identity() {
        let sys = catalog::frank_robinson().unwrap();
        let p = Patch::single(
            2,
            SymbolicVector::parse(sys.basis(), &["b", "1/2"]).unwrap(),
        );
        assert_eq!(substitute(&sys, &p, 0, None).unwrap(), p);
    }

    #[test]
    fn modified_kenyon_second_type() {
        let sys = catalog::kenyon_modified().unwrap();
        let p = substitute(&sys, &Patch::single(1, sys.zero_vector()), 1, None).unwrap();
        let expect: Vec<Tile> = [["0", "0"], ["tau", "0"], ["2tau", "a"]]
            .iter()
            .map(|c| Tile::new(0, SymbolicVector::parse(sys.basis(), c).unwrap()))
            .collect();
        assert_eq!(p.tiles(), expect.as_slice());
    }

    #[test]
    fn counts_follow_substitution_matrix() {
        for sys in catalog::all().unwrap() {
            for j in 0..sys.kappa() {
                let mut p = Patch::single(j, sys.zero_vector());
                for k in 1..=3u32 {
                    p = substitute(&sys, &p, 1, None).unwrap();
                    let sk = s_power(sys.s_matrix(), k);
                    let counts = p.count_by_type(sys.kappa());
                    for i in 0..sys.kappa() {
                        assert_eq!(
                            counts[i] as u128,
                            sk[i][j],
                            "{} k={k} i={i} j={j}",
                            sys.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn clipping_keeps_window_tiles() {
        let sys = catalog::kenyon().unwrap();
        let seed = Patch::single(0, sys.zero_vector());
        let full = substitute(&sys, &seed, 3, None).unwrap();
        let w = Window::centered(2, 4.0);
        let clipped = substitute(&sys, &seed, 3, Some(&w)).unwrap();
        let vals = sys.basis().values();
        let inside: HashSet<&Tile> = full
            .tiles()
            .iter()
            .filter(|t| w.contains(&t.shift.eval_f64(vals)))
            .collect();
        let got: HashSet<&Tile> = clipped.tiles().iter().collect();
        assert_eq!(inside, got);
    }

    #[test]
    fn float_mode_matches_exact_counts() {
        let sys = catalog::frank_robinson().unwrap();
        let seed = Patch::single(0, sys.zero_vector());
        let exact = substitute(&sys, &seed, 3, None).unwrap();
        let float = substitute_float(&sys, &FloatPatch::from_patch(&seed, sys.basis()), 3, None);
        assert_eq!(exact.len(), float.len());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let sys = catalog::kenyon_modified().unwrap();
        let p = substitute(&sys, &Patch::single(0, sys.zero_vector()), 2, None).unwrap();
        let p = p.translate(&SymbolicVector::parse(sys.basis(), &["1/3", "-2/7*a"]).unwrap());
        let text = p.to_text(sys.basis(), 2);
        assert_eq!(Patch::from_text(&text, sys.basis(), 2).unwrap(), p);
        assert!(Patch::from_text("1 [0,0]", sys.basis(), 2).is_err());
        assert!(Patch::from_text("0 [0,0,0,0;0,0,0,0]", sys.basis(), 2).is_err());
    }

    #[test]
    fn equivariance_under_translation() {
        let sys = catalog::frank_robinson().unwrap();
        let p = substitute(&sys, &Patch::single(0, sys.zero_vector()), 1, None).unwrap();
        let x = SymbolicVector::parse(sys.basis(), &["3/5 - b", "2b"]).unwrap();
        let lhs = substitute(&sys, &p.translate(&-&x), 1, None).unwrap();
        let rhs = substitute(&sys, &p, 1, None)
            .unwrap()
            .translate(&-&sys.q().apply(&x));
        assert_eq!(lhs, rhs);
    }
}
