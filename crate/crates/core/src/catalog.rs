//! The bundled example systems.

use crate::cli::config::{ConfigError, SystemConfig};
use crate::substitution::SubstitutionSystem;

/// `(name, JSON source)` for every bundled system.
pub const SOURCES: [(&str, &str); 5] = [
    (
        "frank_robinson",
        include_str!("../systems/frank_robinson.json"),
    ),
    ("kenyon", include_str!("../systems/kenyon.json")),
    (
        "kenyon_modified",
        include_str!("../systems/kenyon_modified.json"),
    ),
    ("fibonacci_1d", include_str!("../systems/fibonacci_1d.json")),
    (
        "square_lattice",
        include_str!("../systems/square_lattice.json"),
    ),
];

pub fn config(name: &str) -> Result<SystemConfig, ConfigError> {
    let (_, text) = SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ConfigError::Io {
            path: name.to_string(),
            msg: "no bundled system with this name".into(),
        })?;
    SystemConfig::from_json_str(text)
}

pub fn load(name: &str) -> Result<SubstitutionSystem, ConfigError> {
    config(name)?.build()
}

pub fn frank_robinson() -> Result<SubstitutionSystem, ConfigError> {
    load("frank_robinson")
}

pub fn kenyon() -> Result<SubstitutionSystem, ConfigError> {
    load("kenyon")
}

pub fn kenyon_modified() -> Result<SubstitutionSystem, ConfigError> {
    load("kenyon_modified")
}

pub fn fibonacci_1d() -> Result<SubstitutionSystem, ConfigError> {
    load("fibonacci_1d")
}

pub fn square_lattice() -> Result<SubstitutionSystem, ConfigError> {
    load("square_lattice")
}

pub fn all() -> Result<Vec<SubstitutionSystem>, ConfigError> {
    SOURCES.iter().map(|(n, _)| load(n)).collect()
}
