use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{Result, SpectralError};
use crate::analysis::ReturnVectorSet;
use crate::numberfield::{
    hp, is_pisot_family, is_totally_non_pisot, rat_to_f64, AlgebraicScalar, BasisScalar,
    CoordinateBasis, Rational, SymbolicVector,
};
use crate::substitution::SubstitutionSystem;

/// Numeric residues above this error bound are not trusted.
const MAX_RESIDUE_ERROR: f64 = 1e-6;
/// A numeric decay is accepted only once residues fall below this.
const NUMERIC_PASS_CEILING: f64 = 1e-3;
const FIT_RMS_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct Residue {
    pub n: usize,
    /// `max_z ‖⟨Qⁿz, α⟩‖` over the return vectors z.
    pub value: f64,
    /// Every pairing was a rational number evaluated exactly.
    pub exact: bool,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidueSequence {
    pub alpha: Vec<String>,
    pub residues: Vec<Residue>,
    pub precision_bits: u32,
    /// Set when the sequence stopped early because precision ran out.
    pub notice: Option<String>,
}

fn frac_dist(r: &Rational) -> Rational {
    let f = r - r.floor();
    let g = Rational::from_integer(1.into()) - &f;
    if f < g {
        f
    } else {
        g
    }
}

fn l1(x: &BasisScalar, values: &[f64]) -> f64 {
    x.0.iter()
        .zip(values)
        .map(|(c, v)| rat_to_f64(&c.abs()) * v.abs().max(1.0))
        .sum()
}

/// Exact pairing `⟨v, α⟩` as a basis scalar, if every product is tabulated.
fn pairing(
    basis: &CoordinateBasis,
    v: &SymbolicVector,
    alpha: &[BasisScalar],
) -> Option<BasisScalar> {
    let mut acc = BasisScalar::zero(basis.len());
    for (i, a) in alpha.iter().enumerate() {
        acc = &acc + &basis.mul(&v.coord(i), a).ok()?;
    }
    Some(acc)
}

struct Pairing {
    value: f64,
    exact: bool,
    error: f64,
}

fn pair_residue(
    basis: &CoordinateBasis,
    hpv: &[Rational],
    bits: u32,
    v: &SymbolicVector,
    alpha: &[BasisScalar],
) -> Pairing {
    if let Some(p) = pairing(basis, v, alpha) {
        if let Some(r) = p.as_rational() {
            return Pairing {
                value: rat_to_f64(&frac_dist(r)),
                exact: true,
                error: 0.0,
            };
        }
        let value = frac_dist(&p.eval_exact(hpv));
        let error = l1(&p, basis.values()) * 2f64.powi(-(bits as i32));
        return Pairing {
            value: rat_to_f64(&value),
            exact: false,
            error,
        };
    }
    let eps = 2f64.powi(-(bits as i32));
    let mut total = Rational::zero();
    let mut error = 0.0;
    for (i, a) in alpha.iter().enumerate() {
        let x = v.coord(i);
        let xv = x.eval_exact(hpv);
        let av = a.eval_exact(hpv);
        let (lx, la) = (l1(&x, basis.values()), l1(a, basis.values()));
        error += lx * la * eps * (2.0 + eps);
        total += xv * av;
    }
    Pairing {
        value: rat_to_f64(&frac_dist(&total)),
        exact: false,
        error,
    }
}

/// `s_n = max_{z ∈ Ξ} ‖⟨Qⁿz, α⟩‖` for `n = 1..=n_max`, exactly when every
/// pairing is rational and in dyadic high precision otherwise.
pub fn eigenvalue_residues(
    sys: &SubstitutionSystem,
    alpha: &[BasisScalar],
    xi: &ReturnVectorSet,
    n_max: usize,
) -> Result<ResidueSequence> {
    if alpha.len() != sys.dim() {
        return Err(SpectralError::InvalidArgument(format!(
            "alpha needs {} coordinates",
            sys.dim()
        )));
    }
    if xi.is_empty() {
        return Err(SpectralError::InvalidArgument(
            "return vector set is empty".into(),
        ));
    }
    let basis = sys.basis();
    let bits = hp::precision_bits();
    let hpv = basis.hp_values(bits);
    let mut current: Vec<SymbolicVector> = xi.iter().cloned().collect();
    let mut residues = Vec::with_capacity(n_max);
    let mut notice = None;
    for n in 1..=n_max {
        current = current.iter().map(|z| sys.q().apply(z)).collect();
        let mut value: f64 = 0.0;
        let mut exact = true;
        let mut error: f64 = 0.0;
        for z in &current {
            let p = pair_residue(basis, &hpv, bits, z, alpha);
            value = value.max(p.value);
            exact &= p.exact;
            error = error.max(p.error);
        }
        if error > MAX_RESIDUE_ERROR {
            notice = Some(format!(
                "stopped at n = {n}: error bound {error:.3e} at {bits} bits; raise TILESCOPE_PRECISION_BITS"
            ));
            break;
        }
        residues.push(Residue {
            n,
            value,
            exact,
            error_bound: error,
        });
    }
    Ok(ResidueSequence {
        alpha: alpha.iter().map(|a| basis.format(a)).collect(),
        residues,
        precision_bits: bits,
        notice,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EigenStatus {
    /// Residues vanish exactly from `from` on.
    ExactPass {
        from: usize,
    },
    /// Residues decay like `c·ρⁿ` on the upper half of the range.
    NumericPass {
        rho: f64,
        c: f64,
    },
    Fail {
        n_star: usize,
        residue: f64,
    },
}

impl EigenStatus {
    pub fn passed(&self) -> bool {
        !matches!(self, EigenStatus::Fail { .. })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueVerdict {
    pub sequence: ResidueSequence,
    pub status: EigenStatus,
    /// `⟨g, α⟩ ∈ ℤ` for every detected period g.
    pub period_ok: bool,
    #[serde(skip)]
    pub alpha: Vec<BasisScalar>,
}

fn classify(seq: &ResidueSequence, n_max: usize) -> EigenStatus {
    let rs = &seq.residues;
    let from = rs
        .iter()
        .rev()
        .find(|r| !(r.exact && r.value == 0.0))
        .map_or(1, |r| r.n + 1);
    if !rs.is_empty() && rs.len() == n_max && from <= n_max / 2 {
        return EigenStatus::ExactPass { from };
    }
    let half = n_max / 2;
    let tail: Vec<&Residue> = rs.iter().filter(|r| r.n >= half.max(1)).collect();
    let worst = tail
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .map_or(
            EigenStatus::Fail {
                n_star: 0,
                residue: f64::NAN,
            },
            |r| EigenStatus::Fail {
                n_star: r.n,
                residue: r.value,
            },
        );
    if tail.len() < 3 {
        return worst;
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|r| (r.n as f64, r.value.max(1e-300).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - icpt - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let last = tail.last().map_or(1.0, |r| r.value);
    if slope < 0.0 && rms < FIT_RMS_LIMIT && last < NUMERIC_PASS_CEILING {
        EigenStatus::NumericPass {
            rho: slope.exp(),
            c: icpt.exp(),
        }
    } else {
        worst
    }
}

/// Eigenvalue test for α: residues over `Ξ`, classification, and the period check.
pub fn eigenvalue_test(
    sys: &SubstitutionSystem,
    alpha: &[BasisScalar],
    xi: &ReturnVectorSet,
    n_max: usize,
    periods: &[SymbolicVector],
) -> Result<EigenvalueVerdict> {
    if n_max < 2 {
        return Err(SpectralError::InvalidArgument(
            "n_max must be at least 2".into(),
        ));
    }
    let sequence = eigenvalue_residues(sys, alpha, xi, n_max)?;
    let status = classify(&sequence, n_max);
    let basis = sys.basis();
    let bits = hp::precision_bits();
    let hpv = basis.hp_values(bits);
    let period_ok = periods.iter().all(|g| {
        let p = pair_residue(basis, &hpv, bits, g, alpha);
        if p.exact {
            p.value == 0.0
        } else {
            p.value <= p.error.max(1e-12)
        }
    });
    Ok(EigenvalueVerdict {
        sequence,
        status,
        period_ok,
        alpha: alpha.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PisotFamilyReport {
    /// Eigenvalues of Q whose eigendirections α charges.
    pub theta: Vec<String>,
    pub family: bool,
    /// Membership in Θ was decided from floating-point eigenvectors.
    pub undecided: bool,
}

fn describe(a: &AlgebraicScalar) -> String {
    let z = a.approx();
    if z.im == 0.0 {
        format!("{} (root of {})", z.re, a.minpoly().to_display())
    } else {
        format!("{}{:+}i (root of {})", z.re, z.im, a.minpoly().to_display())
    }
}

/// The declared eigenvalues of Q as algebraic scalars, expanded by conjugates
/// that are themselves eigenvalues.
fn eigen_scalars(sys: &SubstitutionSystem) -> Vec<AlgebraicScalar> {
    sys.q()
        .eigen_decl()
        .iter()
        .map(|(e, _)| e.clone())
        .collect()
}

/// The set Θ of eigenvalues charged by α, and whether it is a Pisot family.
pub fn pisot_family_of_alpha(
    sys: &SubstitutionSystem,
    alpha: &[BasisScalar],
) -> Result<PisotFamilyReport> {
    let decl = eigen_scalars(sys);
    let q = sys.q();
    let d = sys.dim();
    let values = sys.basis().values();
    let mut theta: Vec<AlgebraicScalar> = Vec::new();
    let undecided;
    if q.is_diagonal() {
        undecided = false;
        for (j, a) in alpha.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let v = Complex64::new(q.entry(j, j).eval_f64(values), 0.0);
            if let Some(e) = decl.iter().find(|e| e.contains(v)) {
                if !theta.contains(e) {
                    theta.push(e.clone());
                }
            }
        }
    } else {
        undecided = true;
        let qt: DMatrix<Complex64> = q.numeric().transpose().map(|x| Complex64::new(x, 0.0));
        let av = nalgebra::DVector::from_iterator(
            d,
            alpha
                .iter()
                .map(|a| Complex64::new(a.eval_f64(values), 0.0)),
        );
        let scale = av.norm().max(1.0) * qt.norm().max(1.0).powi(d as i32);
        for (e, _) in sys.q().eigen_decl() {
            let mut v = av.clone();
            for (mu, m) in sys.q().eigen_decl() {
                if mu == e {
                    continue;
                }
                let shift = &qt - DMatrix::<Complex64>::identity(d, d) * mu.approx();
                for _ in 0..*m {
                    v = &shift * v;
                }
            }
            if v.norm() > 1e-9 * scale && !theta.contains(e) {
                theta.push(e.clone());
            }
        }
    }
    let family = if theta.is_empty() {
        true
    } else {
        is_pisot_family(&theta)?
    };
    Ok(PisotFamilyReport {
        theta: theta.iter().map(describe).collect(),
        family,
        undecided,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MixingVerdict {
    WeaklyMixing,
    NotWeaklyMixing,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakMixingReport {
    pub verdict: MixingVerdict,
    pub eigenvalues: Vec<String>,
    pub totally_non_pisot: bool,
    /// Indices of the candidates that certify a nonzero eigenvalue.
    pub witnesses: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Weak-mixing verdict from the eigenvalue set of Q and the tested α.
/// `structural` lists findings (such as ILC or non-rigidity) that a full-rank
/// set of passing α would contradict.
pub fn weak_mixing_verdict(
    sys: &SubstitutionSystem,
    tested: &[EigenvalueVerdict],
    structural: &[&str],
) -> Result<WeakMixingReport> {
    let decl = eigen_scalars(sys);
    let totally_non_pisot = is_totally_non_pisot(&decl)?;
    let witnesses: Vec<usize> = tested
        .iter()
        .enumerate()
        .filter(|(_, v)| v.status.passed() && v.period_ok && v.alpha.iter().any(|a| !a.is_zero()))
        .map(|(i, _)| i)
        .collect();
    let mut warnings = Vec::new();
    let verdict = if totally_non_pisot {
        if !witnesses.is_empty() {
            warnings.push(
                "eigenvalue set is totally non-Pisot but some α passed the residue test".into(),
            );
        }
        MixingVerdict::WeaklyMixing
    } else if !witnesses.is_empty() {
        MixingVerdict::NotWeaklyMixing
    } else {
        MixingVerdict::Inconclusive
    };
    if !witnesses.is_empty() && !structural.is_empty() {
        let rows: Vec<Vec<f64>> = witnesses
            .iter()
            .map(|&i| {
                tested[i]
                    .alpha
                    .iter()
                    .map(|a| a.eval_f64(sys.basis().values()))
                    .collect()
            })
            .collect();
        let m = DMatrix::from_row_iterator(rows.len(), sys.dim(), rows.into_iter().flatten());
        if m.rank(1e-9) == sys.dim() {
            warnings.push(format!(
                "passing α span ℝ^{} (pure point spectrum candidate) although {} was reported",
                sys.dim(),
                structural.join(", ")
            ));
        }
    }
    Ok(WeakMixingReport {
        verdict,
        eigenvalues: decl.iter().map(describe).collect(),
        totally_non_pisot,
        witnesses,
        warnings,
    })
}
