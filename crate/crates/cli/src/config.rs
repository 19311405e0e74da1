//! TOML config file. Effective settings resolve as
//! flags > config file > built-in defaults; the file is found via
//! `--config PATH` or, failing that, `./bellactiv.toml` if present.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

pub const DEFAULT_CONFIG_NAME: &str = "bellactiv.toml";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub search: SearchSection,
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SearchSection {
    pub scenario: Option<String>,
    pub dims: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub max_cycles: Option<usize>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifySection {
    /// Tolerance for |stored - recomputed| on every stored value.
    pub value_tolerance: Option<f64>,
}

impl FileConfig {
    fn parse(text: &str, origin: &Path) -> Result<Self, Failure> {
        toml::from_str(text)
            .map_err(|e| Failure::Parse(format!("{}: {e}", origin.display())))
    }

    /// Loads an explicit config path (an error if unreadable), or probes
    /// the default name and silently falls back to defaults when absent.
    pub fn load(explicit: Option<&Path>) -> Result<Self, Failure> {
        match explicit {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
                Self::parse(&text, path)
            }
            None => {
                let fallback = PathBuf::from(DEFAULT_CONFIG_NAME);
                match fs::read_to_string(&fallback) {
                    Ok(text) => Self::parse(&text, &fallback),
                    Err(_) => Ok(Self::default()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let c = FileConfig::parse("", Path::new("test")).unwrap();
        assert!(c.search.scenario.is_none());
        assert!(c.verify.value_tolerance.is_none());
    }

    #[test]
    fn sections_parse_with_kebab_case_keys() {
        let c = FileConfig::parse(
            "[search]\nscenario = \"chsh-asym\"\ndims = 3\nmax-cycles = 100\n\n\
             [verify]\nvalue-tolerance = 1e-8\n",
            Path::new("test"),
        )
        .unwrap();
        assert_eq!(c.search.scenario.as_deref(), Some("chsh-asym"));
        assert_eq!(c.search.dims, Some(3));
        assert_eq!(c.search.max_cycles, Some(100));
        assert_eq!(c.verify.value_tolerance, Some(1e-8));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = FileConfig::parse("[search]\nrestart = 5\n", Path::new("test")).unwrap_err();
        assert!(matches!(err, Failure::Parse(_)));
        assert!(err.to_string().contains("restart"), "{err}");
    }

    #[test]
    fn missing_explicit_config_is_an_io_error() {
        let err = FileConfig::load(Some(Path::new("/nonexistent/path.toml"))).unwrap_err();
        assert!(matches!(err, Failure::Io(_)));
    }
}
