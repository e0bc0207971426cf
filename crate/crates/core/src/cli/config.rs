//! JSON system configuration (schema version 1).

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numberfield::{
    parse_rational, AlgebraicScalar, CoordinateBasis, FreeWitness, MinimalPolynomial,
    NumberFieldError, SymbolicVector,
};
use crate::substitution::{
    validate_system, DigitSetMatrix, ExpansionMap, SubstitutionError, SubstitutionSystem,
    ValidationReport,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub schema_version: u32,
    pub name: String,
    pub dimension: usize,
    #[serde(default)]
    pub basis: BasisConfig,
    pub expansion: ExpansionConfig,
    pub prototiles: Vec<PrototileConfig>,
    #[serde(default, skip_serializing_if = "AnalysisDefaults::is_empty")]
    pub analysis: AnalysisDefaults,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default)]
    pub symbols: Vec<SymbolConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub products: Vec<ProductConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolConfig {
    /// Real root of `minpoly` (constant term first) nearest `approx`.
    Algebraic {
        name: String,
        minpoly: Vec<i64>,
        approx: f64,
    },
    /// Symbol treated as algebraically independent, evaluated through a witness.
    Free {
        name: String,
        witness: WitnessConfig,
    },
    /// Product of two declared symbols.
    Product { name: String, of: [String; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum WitnessConfig {
    Algebraic { minpoly: Vec<i64>, approx: f64 },
    Decimal { decimal: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductConfig {
    pub lhs: String,
    pub rhs: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    pub matrix: Vec<Vec<String>>,
    pub eigenvalues: Vec<EigenvalueConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenvalueConfig {
    pub minpoly: Vec<i64>,
    pub approx: ApproxValue,
    #[serde(default = "one")]
    pub multiplicity: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ApproxValue {
    Real(f64),
    Complex([f64; 2]),
}

impl ApproxValue {
    fn complex(self) -> Complex64 {
        match self {
            ApproxValue::Real(x) => Complex64::new(x, 0.0),
            ApproxValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrototileConfig {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<String>>,
    /// The tile equation Q·A_j = ⋃ (A_i + D_ij), listed by child type.
    pub children: Vec<ChildConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChildConfig {
    /// 1-based prototile index.
    #[serde(rename = "type")]
    pub ty: usize,
    pub at: Vec<Vec<String>>,
}

/// Per-system defaults for the analysis commands.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisDefaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flc_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flc_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder_m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder_level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigentest_nmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha_candidates: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing_z: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prototile_resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prototile_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_tolerance: Option<f64>,
}

impl AnalysisDefaults {
    pub fn is_empty(&self) -> bool {
        *self == AnalysisDefaults::default()
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("schema error at {pointer}: {msg}")]
    Schema { pointer: String, msg: String },
    #[error("validation error: {0}")]
    Math(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

impl ConfigError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ConfigError::Schema { .. } => 2,
            ConfigError::Math(_) => 3,
            ConfigError::Io { .. } => 4,
        }
    }

    fn schema(pointer: impl Into<String>, msg: impl ToString) -> Self {
        ConfigError::Schema {
            pointer: pointer.into(),
            msg: msg.to_string(),
        }
    }
}

/// Routes number-field failures: undeclared or malformed data is a schema
/// problem, inconsistent mathematics is a validation problem.
fn classify_nf(pointer: &str, e: NumberFieldError) -> ConfigError {
    match e {
        NumberFieldError::UnknownSymbol(_)
        | NumberFieldError::Parse { .. }
        | NumberFieldError::DuplicateSymbol(_)
        | NumberFieldError::InvalidSymbolName(_)
        | NumberFieldError::MissingProduct { .. } => ConfigError::schema(pointer, e),
        other => ConfigError::Math(format!("{pointer}: {other}")),
    }
}

fn classify_sub(pointer: &str, e: SubstitutionError) -> ConfigError {
    match e {
        SubstitutionError::NumberField(nf) => classify_nf(pointer, nf),
        SubstitutionError::Dimension(msg) => ConfigError::schema(pointer, msg),
        other => ConfigError::Math(other.to_string()),
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl SystemConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SystemConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(e.path());
            ConfigError::schema(pointer, e.into_inner())
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::schema(
                "/schema_version",
                format!(
                    "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                    cfg.schema_version
                ),
            ));
        }
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn build_basis(&self) -> Result<CoordinateBasis, ConfigError> {
        let mut b = CoordinateBasis::builder();
        for (i, sym) in self.basis.symbols.iter().enumerate() {
            let ptr = format!("/basis/symbols/{i}");
            b = match sym {
                SymbolConfig::Algebraic {
                    name,
                    minpoly,
                    approx,
                } => {
                    let mp = MinimalPolynomial::new(minpoly.clone())
                        .map_err(|e| classify_nf(&ptr, e))?;
                    let a = AlgebraicScalar::real(mp, *approx).map_err(|e| classify_nf(&ptr, e))?;
                    b.algebraic(name, a)
                }
                SymbolConfig::Free { name, witness } => {
                    let w = match witness {
                        WitnessConfig::Algebraic { minpoly, approx } => {
                            let mp = MinimalPolynomial::new(minpoly.clone())
                                .map_err(|e| classify_nf(&ptr, e))?;
                            FreeWitness::Algebraic(
                                AlgebraicScalar::real(mp, *approx)
                                    .map_err(|e| classify_nf(&ptr, e))?,
                            )
                        }
                        WitnessConfig::Decimal { decimal } => FreeWitness::Decimal(
                            parse_rational(decimal).map_err(|e| classify_nf(&ptr, e))?,
                        ),
                    };
                    b.free(name, w)
                }
                SymbolConfig::Product { name, of } => b.product(name, &of[0], &of[1]),
            };
        }
        for p in &self.basis.products {
            b = b.relation(&p.lhs, &p.rhs, &p.value);
        }
        b.build().map_err(|e| classify_nf("/basis", e))
    }

    fn parse_vector(
        basis: &CoordinateBasis,
        ptr: &str,
        v: &[String],
        dim: usize,
    ) -> Result<SymbolicVector, ConfigError> {
        if v.len() != dim {
            return Err(ConfigError::schema(
                ptr,
                format!("expected {dim} coordinates, got {}", v.len()),
            ));
        }
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        SymbolicVector::parse(basis, &refs).map_err(|e| classify_nf(ptr, e))
    }

    /// Parses a vector given as per-coordinate expressions over this system's basis.
    pub fn vector(
        &self,
        sys: &SubstitutionSystem,
        ptr: &str,
        v: &[String],
    ) -> Result<SymbolicVector, ConfigError> {
        Self::parse_vector(sys.basis(), ptr, v, sys.dim())
    }

    pub fn build(&self) -> Result<SubstitutionSystem, ConfigError> {
        let d = self.dimension;
        if d == 0 {
            return Err(ConfigError::schema(
                "/dimension",
                "dimension must be positive",
            ));
        }
        let basis = self.build_basis()?;
        if self.expansion.matrix.len() != d || self.expansion.matrix.iter().any(|r| r.len() != d) {
            return Err(ConfigError::schema(
                "/expansion/matrix",
                format!("expected a {d}x{d} matrix"),
            ));
        }
        let mut entries = Vec::with_capacity(d * d);
        for (i, row) in self.expansion.matrix.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let ptr = format!("/expansion/matrix/{i}/{j}");
                entries.push(basis.parse(e).map_err(|err| classify_nf(&ptr, err))?);
            }
        }
        let mut eigen = Vec::new();
        for (k, ev) in self.expansion.eigenvalues.iter().enumerate() {
            let ptr = format!("/expansion/eigenvalues/{k}");
            let mp =
                MinimalPolynomial::new(ev.minpoly.clone()).map_err(|e| classify_nf(&ptr, e))?;
            let a =
                AlgebraicScalar::new(mp, ev.approx.complex()).map_err(|e| classify_nf(&ptr, e))?;
            eigen.push((a, ev.multiplicity));
        }
        let q = ExpansionMap::new(&basis, d, entries, eigen)
            .map_err(|e| classify_sub("/expansion", e))?;

        let kappa = self.prototiles.len();
        if kappa == 0 {
            return Err(ConfigError::schema(
                "/prototiles",
                "at least one prototile is required",
            ));
        }
        let mut digit_sets = vec![Vec::new(); kappa * kappa];
        let mut anchors = Vec::new();
        let mut any_anchor = false;
        for (j, tile) in self.prototiles.iter().enumerate() {
            for (c, child) in tile.children.iter().enumerate() {
                let ptr = format!("/prototiles/{j}/children/{c}");
                if child.ty == 0 || child.ty > kappa {
                    return Err(ConfigError::schema(
                        format!("{ptr}/type"),
                        format!("type must lie in 1..={kappa}"),
                    ));
                }
                for (k, at) in child.at.iter().enumerate() {
                    let v = Self::parse_vector(&basis, &format!("{ptr}/at/{k}"), at, d)?;
                    digit_sets[(child.ty - 1) * kappa + j].push(v);
                }
            }
            anchors.push(match &tile.anchor {
                Some(a) => {
                    any_anchor = true;
                    Self::parse_vector(&basis, &format!("/prototiles/{j}/anchor"), a, d)?
                }
                None => SymbolicVector::zero(d, basis.len()),
            });
        }
        let digits =
            DigitSetMatrix::new(kappa, digit_sets).map_err(|e| classify_sub("/prototiles", e))?;
        let labels = self.prototiles.iter().map(|p| p.label.clone()).collect();
        SubstitutionSystem::new(
            &self.name,
            basis,
            labels,
            any_anchor.then_some(anchors),
            q,
            digits,
        )
        .map_err(|e| classify_sub("/prototiles", e))
    }
}

/// Reads, builds and validates a configuration file.
pub fn load_config(
    path: &Path,
) -> Result<(SystemConfig, SubstitutionSystem, ValidationReport), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    load_config_str(&text)
}

pub fn load_config_str(
    text: &str,
) -> Result<(SystemConfig, SubstitutionSystem, ValidationReport), ConfigError> {
    let cfg = SystemConfig::from_json_str(text)?;
    let sys = cfg.build()?;
    let report = validate_system(&sys).map_err(|e| ConfigError::Math(e.to_string()))?;
    Ok((cfg, sys, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn bundled_configs_round_trip() {
        for (name, text) in catalog::SOURCES {
            let cfg = SystemConfig::from_json_str(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let again = SystemConfig::from_json_str(&cfg.to_json_string()).unwrap();
            assert_eq!(cfg, again, "{name}");
            assert_eq!(again.to_json_string(), cfg.to_json_string());
        }
    }

    #[test]
    fn duplicate_digit_is_a_math_error() {
        let mut cfg = SystemConfig::from_json_str(catalog::SOURCES[1].1).unwrap();
        let first = cfg.prototiles[0].children[0].at[0].clone();
        cfg.prototiles[0].children[0].at.push(first);
        let err = cfg.build().unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("duplicate digit"));
    }

    #[test]
    fn undeclared_symbol_is_a_schema_error() {
        let text = r#"{
            "schema_version": 1, "name": "broken", "dimension": 1,
            "expansion": {"matrix": [["2"]], "eigenvalues": [{"minpoly": [-2, 1], "approx": 2.0}]},
            "prototiles": [{"label": "A", "children": [{"type": 1, "at": [["0"], ["a"]]}]}]
        }"#;
        let err = load_config_str(text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(
            err.to_string().contains("/prototiles/0/children/0/at/1"),
            "{err}"
        );
    }

    #[test]
    fn schema_errors_carry_json_pointers() {
        let text = r#"{"schema_version": 1, "name": "x", "dimension": 1,
            "expansion": {"matrix": [["2"]], "eigenvalues": [{"minpoly": [-2, 1], "approx": "two"}]},
            "prototiles": []}"#;
        let err = SystemConfig::from_json_str(text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(
            err.to_string().contains("/expansion/eigenvalues/0"),
            "{err}"
        );
        let err = SystemConfig::from_json_str(r#"{"schema_version": 2}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn non_expansive_map_is_rejected() {
        let text = r#"{
            "schema_version": 1, "name": "flat", "dimension": 1,
            "expansion": {"matrix": [["1"]], "eigenvalues": [{"minpoly": [-1, 1], "approx": 1.0}]},
            "prototiles": [{"label": "A", "children": [{"type": 1, "at": [["0"]]}]}]
        }"#;
        assert_eq!(load_config_str(text).unwrap_err().exit_code(), 3);
    }
}
