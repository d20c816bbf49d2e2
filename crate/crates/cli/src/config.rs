use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use bsf_core::format::parse_config;

use crate::Failure;

/// Values from a config file. Command-line flags win over these.
#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("reading {}: {e}", path.display())))?;
        Ok(Config {
            values: parse_config(&text)?.into_iter().collect(),
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag if given, else the parsed config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Failure::input(format!("config key {key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, Failure> {
        self.pick(flag, key)?
            .ok_or_else(|| Failure::input(format!("missing --{} (or `{key}` in the config file)", key.replace('_', "-"))))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, Failure> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let cfg = Config {
            values: [("k".to_string(), "2".to_string())].into_iter().collect(),
        };
        assert_eq!(cfg.pick(Some(3usize), "k").unwrap(), Some(3));
        assert_eq!(cfg.pick::<usize>(None, "k").unwrap(), Some(2));
        assert_eq!(cfg.pick::<usize>(None, "r").unwrap(), None);
        assert!(cfg.require::<usize>(None, "r").is_err());
    }
}
