use serde::Serialize;

/// Upper cap of the local rubber metric, 2^{-1/2}.
pub const RUBBER_CAP: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `(colour, position)`.
pub type ColouredPoint = (usize, Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RubberDistance {
    pub value: f64,
    pub capped: bool,
    pub warning: Option<String>,
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn nearest_same_colour(p: &ColouredPoint, set: &[ColouredPoint]) -> f64 {
    set.iter()
        .filter(|q| q.0 == p.0)
        .map(|q| norm(&p.1.iter().zip(&q.1).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest ε with `B_{1/ε}(0) ∩ to ⊂ from + B_ε(0)` colourwise. A point p is
/// covered either by a same-colour neighbour within ε or by lying outside the
/// ball, so the infimum is `max_p min(dist(p, from), 1/|p|)`.
fn one_sided(from: &[ColouredPoint], to: &[ColouredPoint]) -> f64 {
    to.iter()
        .map(|p| nearest_same_colour(p, from).min(1.0 / norm(&p.1)))
        .fold(0.0, f64::max)
}

/// Local rubber distance, capped at 2^{-1/2}.
pub fn rubber_metric(a: &[ColouredPoint], b: &[ColouredPoint]) -> RubberDistance {
    if a.is_empty() || b.is_empty() {
        return RubberDistance {
            value: RUBBER_CAP,
            capped: true,
            warning: Some("empty point set; returning the cap".into()),
        };
    }
    let raw = one_sided(a, b).max(one_sided(b, a));
    let capped = raw >= RUBBER_CAP;
    RubberDistance {
        value: raw.min(RUBBER_CAP),
        capped,
        warning: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lattice(shift: [f64; 2], n: i32) -> Vec<ColouredPoint> {
        (-n..=n)
            .flat_map(|x| {
                (-n..=n).map(move |y| (0, vec![x as f64 + shift[0], y as f64 + shift[1]]))
            })
            .collect()
    }

    #[test]
    fn identity_translation_and_cap() {
        let a = lattice([0.0, 0.0], 10);
        assert_eq!(rubber_metric(&a, &a).value, 0.0);
        let b = lattice([0.006, 0.008], 10);
        assert!(rubber_metric(&a, &b).value <= 0.01 + 1e-12);
        let far: Vec<ColouredPoint> = vec![(1, vec![0.0, 0.0])];
        let d = rubber_metric(&a, &far);
        assert_eq!(d.value, RUBBER_CAP);
        assert!(d.capped);
        assert!(rubber_metric(&[], &a).warning.is_some());
    }

    fn point_set() -> impl Strategy<Value = Vec<ColouredPoint>> {
        prop::collection::vec((0usize..2, prop::collection::vec(-3.0f64..3.0, 2)), 1..12)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn symmetric_and_triangle(a in point_set(), b in point_set(), c in point_set()) {
            let ab = rubber_metric(&a, &b).value;
            let ba = rubber_metric(&b, &a).value;
            let bc = rubber_metric(&b, &c).value;
            let ac = rubber_metric(&a, &c).value;
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert!((0.0..=RUBBER_CAP).contains(&ab));
        }
    }
}
