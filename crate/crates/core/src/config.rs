//! Shared caps for the exponential-cost operations.

use crate::error::Error;
use crate::Result;

/// Size caps for brute-force enumerations. Every cap can be overridden per
/// call site, from the CLI, or through the `PERIMKIT_CAPS` environment
/// variable (`brute=22,xi=18,regions=24,free=8,patterns=1048576,pairs=12`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// Max |E| for brute-force bipartition search.
    pub brute: usize,
    /// Max |E| for full split-family enumeration.
    pub xi: usize,
    /// Max region count in simple-set enumeration.
    pub regions: usize,
    /// Max free coordinates in a BV ball instance.
    pub free: usize,
    /// Max sign-pattern count in vertex enumeration.
    pub patterns: u64,
    /// Max cell count for exhaustive disjoint-pair audits.
    pub pairs: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            brute: 22,
            xi: 18,
            regions: 24,
            free: 8,
            patterns: 1 << 20,
            pairs: 12,
        }
    }
}

impl Caps {
    /// Applies `key=value` overrides in the `PERIMKIT_CAPS` format.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<()> {
        for part in spec.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| Error::Parse {
                what: "caps override",
                input: part.to_string(),
            })?;
            let parse_usize = |v: &str| {
                v.trim().parse::<usize>().map_err(|_| Error::Parse {
                    what: "caps override",
                    input: part.to_string(),
                })
            };
            match key.trim() {
                "brute" => self.brute = parse_usize(value)?,
                "xi" => self.xi = parse_usize(value)?,
                "regions" => self.regions = parse_usize(value)?,
                "free" => self.free = parse_usize(value)?,
                "patterns" => self.patterns = parse_usize(value)? as u64,
                "pairs" => self.pairs = parse_usize(value)?,
                _ => {
                    return Err(Error::Parse {
                        what: "caps override",
                        input: part.to_string(),
                    })
                }
            }
        }
        Ok(())
    }

    /// Reads `PERIMKIT_CAPS` from the environment, if set.
    pub fn from_env() -> Result<Self> {
        let mut caps = Caps::default();
        if let Ok(spec) = std::env::var("PERIMKIT_CAPS") {
            caps.apply_overrides(&spec)?;
        }
        Ok(caps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let mut caps = Caps::default();
        caps.apply_overrides("brute=10, xi=9,patterns=64").unwrap();
        assert_eq!(caps.brute, 10);
        assert_eq!(caps.xi, 9);
        assert_eq!(caps.patterns, 64);
        assert_eq!(caps.regions, Caps::default().regions);
        assert!(caps.apply_overrides("bogus=1").is_err());
        assert!(caps.apply_overrides("brute").is_err());
    }
}
