//! TOML config file with one table per subcommand. Flags override file values.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

const SECTIONS: [&str; 11] = [
    "global",
    "kl-table",
    "kl-check",
    "sumprod-scan",
    "moments",
    "bilinear-sweep",
    "opnorm",
    "shift-check",
    "sk",
    "progression",
    "exponent-lp",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table: toml::Table = text.parse().with_context(|| format!("parsing {}", path.display()))?;
        for (key, value) in &table {
            if !SECTIONS.contains(&key.as_str()) {
                bail!("unknown config section [{key}]");
            }
            if !value.is_table() {
                bail!("config entry {key:?} must be a section");
            }
        }
        Ok(ConfigFile { table })
    }

    /// Overlays the flags that were given onto the file section `name`.
    pub fn resolve<T: Serialize + DeserializeOwned>(&self, name: &str, flags: &T) -> Result<T> {
        let mut merged = match self.table.get(name) {
            Some(toml::Value::Table(t)) => t.clone(),
            _ => toml::Table::new(),
        };
        let given = toml::Table::try_from(flags).context("encoding flags")?;
        merged.extend(given);
        toml::Value::Table(merged)
            .try_into()
            .with_context(|| format!("invalid settings for [{name}]"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{GlobalArgs, KlTableArgs};

    #[test]
    fn flags_override_file() {
        let cfg = ConfigFile {
            table: "[kl-table]\nq = [7, 11]\nk = [3]\n".parse().unwrap(),
        };
        let flags = KlTableArgs {
            k: Some(vec![2]),
            ..Default::default()
        };
        let r = cfg.resolve("kl-table", &flags).unwrap();
        assert_eq!(r.q, Some(vec![7, 11]));
        assert_eq!(r.k, Some(vec![2]));
        assert_eq!(r.d, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cfg = ConfigFile {
            table: "[global]\nformat = \"csv\"\nthreads = 3\n".parse().unwrap(),
        };
        assert!(cfg.resolve("global", &GlobalArgs::default()).is_err());
    }
}
