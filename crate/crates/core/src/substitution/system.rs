use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::matrix::{perron_frobenius, primitivity_exponent};
use super::{Result, SubstitutionError, DEFAULT_BIT_BUDGET};
use crate::numberfield::{
    q_action_matrix, AlgebraicScalar, BasisScalar, CoordinateBasis, RatMatrix, SymbolicVector,
};

/// Expansive linear map Q with exact entries over a coordinate basis.
#[derive(Debug, Clone)]
pub struct ExpansionMap {
    dim: usize,
    entries: Vec<BasisScalar>,
    eigen_decl: Vec<(AlgebraicScalar, usize)>,
    numeric: DMatrix<f64>,
    action: RatMatrix,
}

fn fmt_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.10}", z.re)
    } else {
        format!("{:.10}{:+.10}i", z.re, z.im)
    }
}

impl ExpansionMap {
    /// Builds Q from row-major entries; checks expansivity and that the
    /// numeric spectrum matches the declared eigenvalues to 1e-8.
    pub fn new(
        basis: &CoordinateBasis,
        dim: usize,
        entries: Vec<BasisScalar>,
        eigen_decl: Vec<(AlgebraicScalar, usize)>,
    ) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(SubstitutionError::Dimension(format!(
                "expansion matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let total: usize = eigen_decl.iter().map(|(_, m)| m).sum();
        if total != dim {
            return Err(SubstitutionError::Dimension(format!(
                "declared eigenvalue multiplicities sum to {total}, expected {dim}"
            )));
        }
        for (ev, _) in &eigen_decl {
            let m = ev.approx().norm();
            if m <= 1.0 {
                return Err(SubstitutionError::NonExpansive(m));
            }
        }
        let values = basis.values();
        let numeric = DMatrix::from_fn(dim, dim, |i, j| entries[i * dim + j].eval_f64(values));
        let action = q_action_matrix(basis, &entries, dim)?;
        let map = ExpansionMap {
            dim,
            entries,
            eigen_decl,
            numeric,
            action,
        };
        map.check_spectrum()?;
        Ok(map)
    }

    fn check_spectrum(&self) -> Result<()> {
        let numeric = self.numeric_eigenvalues();
        if let Some(small) = numeric.iter().find(|z| z.norm() <= 1.0) {
            return Err(SubstitutionError::NonExpansive(small.norm()));
        }
        let mut declared: Vec<Complex64> = Vec::new();
        for (ev, mult) in &self.eigen_decl {
            declared.extend(std::iter::repeat(ev.approx()).take(*mult));
        }
        let mut used = vec![false; declared.len()];
        let mut ok = true;
        for z in &numeric {
            let best = (0..declared.len()).filter(|&k| !used[k]).min_by(|&a, &b| {
                (declared[a] - z)
                    .norm()
                    .total_cmp(&(declared[b] - z).norm())
            });
            match best {
                Some(k) if (declared[k] - z).norm() <= 1e-8 * z.norm().max(1.0) => used[k] = true,
                _ => ok = false,
            }
        }
        if ok {
            Ok(())
        } else {
            Err(SubstitutionError::EigenMismatch {
                numeric: numeric.iter().map(fmt_complex).collect(),
                declared: declared.iter().map(fmt_complex).collect(),
            })
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[BasisScalar] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &BasisScalar {
        &self.entries[i * self.dim + j]
    }

    pub fn eigen_decl(&self) -> &[(AlgebraicScalar, usize)] {
        &self.eigen_decl
    }

    pub fn numeric(&self) -> &DMatrix<f64> {
        &self.numeric
    }

    /// Action of Q on flattened symbolic coefficient vectors.
    pub fn action(&self) -> &RatMatrix {
        &self.action
    }

    pub fn apply(&self, v: &SymbolicVector) -> SymbolicVector {
        v.apply(&self.action)
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.numeric[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn numeric_eigenvalues(&self) -> Vec<Complex64> {
        let mut ev: Vec<Complex64> = self
            .numeric
            .clone()
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
        ev
    }

    pub fn det_abs(&self) -> f64 {
        self.numeric.determinant().abs()
    }

    /// Operator 2-norm of Q^m.
    pub fn power_norm(&self, m: u32) -> f64 {
        let mut p = DMatrix::<f64>::identity(self.dim, self.dim);
        for _ in 0..m {
            p = &p * &self.numeric;
        }
        p.singular_values().max()
    }

    pub fn inverse_norm(&self) -> f64 {
        let sv = self.numeric.singular_values();
        1.0 / sv.min()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.entry(i, j).is_zero()))
    }
}

/// Digit sets D_ij: type-i children of a type-j tile sit at Qx + d, d ∈ D_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitSetMatrix {
    kappa: usize,
    entries: Vec<Vec<SymbolicVector>>,
}

impl DigitSetMatrix {
    /// `entries[child * kappa + parent]` lists D_{child,parent}.
    pub fn new(kappa: usize, entries: Vec<Vec<SymbolicVector>>) -> Result<Self> {
        if entries.len() != kappa * kappa {
            return Err(SubstitutionError::Dimension(format!(
                "digit matrix needs {} entries, got {}",
                kappa * kappa,
                entries.len()
            )));
        }
        for (idx, set) in entries.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for d in set {
                if !seen.insert(d) {
                    return Err(SubstitutionError::DuplicateDigit {
                        child: idx / kappa + 1,
                        parent: idx % kappa + 1,
                    });
                }
            }
        }
        Ok(DigitSetMatrix { kappa, entries })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn get(&self, child: usize, parent: usize) -> &[SymbolicVector] {
        &self.entries[child * self.kappa + parent]
    }

    pub fn all(&self) -> impl Iterator<Item = &SymbolicVector> {
        self.entries.iter().flatten()
    }
}

#[derive(Debug, Clone)]
pub struct SubstitutionSystem {
    name: String,
    labels: Vec<String>,
    anchors: Vec<SymbolicVector>,
    basis: CoordinateBasis,
    q: ExpansionMap,
    digits: DigitSetMatrix,
    s: Vec<Vec<u64>>,
    primitive_exponent: Option<usize>,
    bit_budget: u64,
}

impl SubstitutionSystem {
    pub fn new(
        name: &str,
        basis: CoordinateBasis,
        labels: Vec<String>,
        anchors: Option<Vec<SymbolicVector>>,
        q: ExpansionMap,
        digits: DigitSetMatrix,
    ) -> Result<Self> {
        let kappa = digits.kappa();
        let dim = q.dim();
        if labels.len() != kappa {
            return Err(SubstitutionError::Dimension(format!(
                "{} labels for {kappa} prototiles",
                labels.len()
            )));
        }
        for d in digits.all() {
            if d.dim() != dim || d.basis_len() != basis.len() {
                return Err(SubstitutionError::Dimension(
                    "digit vector shape does not match the system".into(),
                ));
            }
        }
        let anchors =
            anchors.unwrap_or_else(|| vec![SymbolicVector::zero(dim, basis.len()); kappa]);
        if anchors.len() != kappa {
            return Err(SubstitutionError::Dimension(format!(
                "{} anchors for {kappa} prototiles",
                anchors.len()
            )));
        }
        let s: Vec<Vec<u64>> = (0..kappa)
            .map(|i| (0..kappa).map(|j| digits.get(i, j).len() as u64).collect())
            .collect();
        let primitive_exponent = primitivity_exponent(&s);
        Ok(SubstitutionSystem {
            name: name.to_string(),
            labels,
            anchors,
            basis,
            q,
            digits,
            s,
            primitive_exponent,
            bit_budget: DEFAULT_BIT_BUDGET,
        })
    }

    pub fn with_bit_budget(mut self, bits: u64) -> Self {
        self.bit_budget = bits;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn anchors(&self) -> &[SymbolicVector] {
        &self.anchors
    }

    pub fn basis(&self) -> &CoordinateBasis {
        &self.basis
    }

    pub fn q(&self) -> &ExpansionMap {
        &self.q
    }

    pub fn digits(&self) -> &DigitSetMatrix {
        &self.digits
    }

    pub fn kappa(&self) -> usize {
        self.digits.kappa()
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn s_matrix(&self) -> &[Vec<u64>] {
        &self.s
    }

    pub fn bit_budget(&self) -> u64 {
        self.bit_budget
    }

    pub fn primitivity_exponent(&self) -> Option<usize> {
        self.primitive_exponent
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive_exponent.is_some()
    }

    pub fn require_primitive(&self, what: &'static str) -> Result<()> {
        if self.is_primitive() {
            Ok(())
        } else {
            Err(SubstitutionError::NotPrimitive(what))
        }
    }

    pub fn zero_vector(&self) -> SymbolicVector {
        SymbolicVector::zero(self.dim(), self.basis.len())
    }

    /// Largest Euclidean norm of any digit.
    pub fn max_digit_norm(&self) -> f64 {
        self.digits
            .all()
            .map(|d| {
                d.eval_f64(self.basis.values())
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub expansive: bool,
    pub numeric_eigenvalues: Vec<[f64; 2]>,
    pub primitivity_exponent: Option<usize>,
    pub perron_frobenius: f64,
    pub det_abs: f64,
    pub pf_relative_error: f64,
    pub warnings: Vec<String>,
}

/// Checks expansivity, primitivity and the PF(S) = |det Q| identity.
pub fn validate_system(sys: &SubstitutionSystem) -> Result<ValidationReport> {
    let eig = sys.q().numeric_eigenvalues();
    if let Some(z) = eig.iter().find(|z| z.norm() <= 1.0) {
        return Err(SubstitutionError::NonExpansive(z.norm()));
    }
    let pf = perron_frobenius(sys.s_matrix()).value;
    let det = sys.q().det_abs();
    let rel = (pf - det).abs() / det;
    let mut warnings = Vec::new();
    if sys.primitivity_exponent().is_none() {
        warnings.push(
            "substitution matrix is not primitive; frequency and spectral operations are disabled"
                .into(),
        );
    }
    if rel > 1e-8 {
        warnings.push(format!(
            "Perron-Frobenius eigenvalue {pf:.10} differs from |det Q| = {det:.10} (relative error {rel:.3e}); \
             the data do not describe a self-affine tiling"
        ));
    }
    Ok(ValidationReport {
        expansive: true,
        numeric_eigenvalues: eig.iter().map(|z| [z.re, z.im]).collect(),
        primitivity_exponent: sys.primitivity_exponent(),
        perron_frobenius: pf,
        det_abs: det,
        pf_relative_error: rel,
        warnings,
    })
}
