//! Registry of hardware error profiles.

use std::collections::BTreeMap;

use serde::Deserialize;

use qsurrogate_core::hardware::HardwareProfile;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("profiles.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub e_single: f64,
    pub e_two: f64,
    pub e_readout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRegistry {
    entries: BTreeMap<String, ProfileEntry>,
}

impl ProfileRegistry {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled profile registry is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = toml::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
        Ok(Self { entries })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entry(&self, name: &str) -> Option<&ProfileEntry> {
        self.entries.get(name)
    }

    /// Resolves `name`; `readout` overrides the stored readout error and is
    /// mandatory for profiles that have none.
    pub fn resolve(&self, name: &str, readout: Option<f64>) -> Result<HardwareProfile> {
        let entry = self.entries.get(name).ok_or_else(|| {
            Error::Profile(format!(
                "unknown profile '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        let e_readout = readout
            .or(entry.e_readout)
            .ok_or_else(|| Error::Profile(format!("profile '{name}' has no readout error; pass one explicitly")))?;
        Ok(HardwareProfile::new(name, entry.e_single, entry.e_two, e_readout)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_profiles() {
        let reg = ProfileRegistry::builtin();
        assert_eq!(reg.resolve("ibmq_belem", None).unwrap(), HardwareProfile::ibmq_belem());
        assert!(reg.resolve("falcon_r5_11", None).is_err());
        let falcon = reg.resolve("falcon_r5_11", Some(0.018)).unwrap();
        assert_eq!(falcon, HardwareProfile::falcon_r5_11(0.018).unwrap());
        assert!(reg
            .resolve("nope", None)
            .unwrap_err()
            .to_string()
            .contains("ibmq_belem"));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ProfileRegistry::parse("[x]\ne_single = 0.1\ne_two = 0.1\nfoo = 1\n").is_err());
    }
}
