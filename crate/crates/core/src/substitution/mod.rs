//! Substitution systems: expansion maps, digit sets, patch generation by
//! iterated substitution, κ-set substitution, legality and supertiles.

mod kset;
mod matrix;
mod patch;
mod seed;
mod supertile;
mod system;

pub use kset::{
    generating_set, is_legal, kset_substitute, special_rank, KSetCluster, Legality, SpecialRank,
};
pub use matrix::{
    perron_frobenius, primitivity_exponent, s_power, second_eigenvalue_modulus, PerronFrobenius,
};
pub use patch::{
    substitute, substitute_float, substitute_traced, FloatPatch, Patch, Tile, TracedLevel,
};
pub use seed::{fixed_point_seed, FixedPointSeed};
pub use supertile::{supertile_assign, SupertileAssignment};
pub use system::{
    validate_system, DigitSetMatrix, ExpansionMap, SubstitutionSystem, ValidationReport,
};

use thiserror::Error;

use crate::numberfield::NumberFieldError;

/// Coefficient growth limit in bits before exact substitution gives up.
pub const DEFAULT_BIT_BUDGET: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstitutionError {
    #[error(transparent)]
    NumberField(#[from] NumberFieldError),
    #[error("expansion map is not expansive: eigenvalue of modulus {0}")]
    NonExpansive(f64),
    #[error("numeric eigenvalues {numeric:?} do not match the declared eigenvalues {declared:?}")]
    EigenMismatch {
        numeric: Vec<String>,
        declared: Vec<String>,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("duplicate digit in D[{child}][{parent}]")]
    DuplicateDigit { child: usize, parent: usize },
    #[error("coefficients exceed the {0}-bit budget; rerun in float mode")]
    BitBudget(u64),
    #[error("no fixed-point seed found with N <= {0}; supply a seed manually")]
    NoSeed(usize),
    #[error("system is not primitive; {0} is unavailable")]
    NotPrimitive(&'static str),
    #[error("patch is not traceable to the canonical fixed point: {0}")]
    NotTraceable(String),
    #[error("patch format error at line {line}: {msg}")]
    PatchFormat { line: usize, msg: String },
}

pub type Result<T, E = SubstitutionError> = std::result::Result<T, E>;
