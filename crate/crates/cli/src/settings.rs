//! Config resolution: defaults, then an optional flat JSON file, then
//! `key=value` overrides, then `CBNET_SEED`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use cbnet::NetworkConfig;
use serde_json::{Map, Value};

pub const SEED_ENV: &str = "CBNET_SEED";

/// Short names accepted on the command line for common fields.
const ALIASES: [(&str, &str); 7] = [
    ("r", "monitor_radius"),
    ("n", "node_count"),
    ("N", "node_count"),
    ("kappa", "phase_kappa"),
    ("e0", "initial_energy"),
    ("K", "amplification"),
    ("P", "ch_ratio"),
];

pub fn canonical_key(key: &str) -> &str {
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == key)
        .map_or(key, |(_, field)| field)
}

/// Parses a command-line value: JSON literals pass through, `none` and
/// `inf` clear optional fields, anything else is a string.
pub fn parse_value(text: &str) -> Value {
    match text {
        "none" | "inf" | "infinity" => Value::Null,
        _ => serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string())),
    }
}

/// Splits `key=value` into a canonical key and its JSON value.
pub fn parse_assignment(text: &str) -> Result<(String, Value)> {
    let (key, value) = text
        .split_once('=')
        .with_context(|| format!("expected key=value, got `{text}`"))?;
    let key = key.trim();
    if key.is_empty() {
        bail!("empty key in `{text}`");
    }
    Ok((canonical_key(key).to_string(), parse_value(value.trim())))
}

pub fn read_config_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => bail!("config {}: top level must be a JSON object", path.display()),
    }
}

/// Builds and validates the config. `seed_env` is the value of `CBNET_SEED`, if set.
pub fn resolve(file: Option<&Path>, overrides: &[(String, Value)], seed_env: Option<&str>) -> Result<NetworkConfig> {
    let mut config = NetworkConfig::default();
    if let Some(path) = file {
        config.apply_flat_overrides(&read_config_file(path)?)?;
    }
    let map: Map<String, Value> = overrides.iter().cloned().collect();
    config.apply_flat_overrides(&map)?;
    if let Some(seed) = seed_env {
        config.master_seed = seed
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got `{seed}`"))?;
    }
    config.validate()?;
    Ok(config)
}

pub fn seed_from_env() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(parse_value("4"), Value::from(4));
        assert_eq!(parse_value("0.5"), Value::from(0.5));
        assert_eq!(parse_value("none"), Value::Null);
        assert_eq!(parse_value("true"), Value::Bool(true));
        assert_eq!(parse_value("abc"), Value::from("abc"));
    }

    #[test]
    fn aliases_resolve() {
        let (k, v) = parse_assignment("r=6").unwrap();
        assert_eq!((k.as_str(), v), ("monitor_radius", Value::from(6)));
        assert_eq!(parse_assignment("bs_position.x=10").unwrap().0, "bs_position.x");
        assert!(parse_assignment("novalue").is_err());
    }

    #[test]
    fn overrides_and_seed_env() {
        let overrides = vec![
            parse_assignment("e0=4.0").unwrap(),
            parse_assignment("kappa=10").unwrap(),
        ];
        let config = resolve(None, &overrides, Some("42")).unwrap();
        assert_eq!(config.initial_energy, 4.0);
        assert_eq!(config.phase_kappa, Some(10.0));
        assert_eq!(config.master_seed, 42);
        assert!(resolve(None, &[], Some("x")).is_err());
    }

    #[test]
    fn invalid_field_is_named() {
        let overrides = vec![parse_assignment("ch_ratio=2.0").unwrap()];
        let err = resolve(None, &overrides, None).unwrap_err();
        assert!(format!("{err:#}").contains("ch_ratio"), "{err:#}");
    }
}
