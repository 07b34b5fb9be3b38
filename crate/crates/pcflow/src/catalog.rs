//! Built-in named experiments.

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{PcflowError, Result};

pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

macro_rules! entry {
    ($id:literal, $description:literal) => {
        CatalogEntry {
            id: $id,
            description: $description,
            text: include_str!(concat!("../catalog/", $id, ".toml")),
        }
    };
}

pub const CATALOG: &[CatalogEntry] = &[
    entry!("torus-single-mode", "sin(2πx/L) on a 3×3 torus, analytic σ_1 decay"),
    entry!("torus-random", "random band-16 data at N=64, all torus monitors"),
    entry!("torus-sweep", "random band-8 data for resolution sweeps"),
    entry!("sphere-cos-theta", "u = cos θ on the unit sphere, with snapshots"),
    entry!("sphere-random", "random degree-8 data at L_max=32"),
    entry!("sphere-commutation", "random degree-4 data for commutation sweeps"),
    entry!("sphere-flipped", "commutation control with the curvature sign flipped"),
    entry!("kahler-random", "random band-8 data on the complex torus, m=2, N=32"),
    entry!("shrinking-random", "trace evolution on the shrinking sphere, time scale 2"),
];

pub fn find(id: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.id == id)
}

/// Parsed config of a catalog entry.
pub fn load(id: &str) -> Result<ExperimentConfig> {
    let entry = find(id).ok_or_else(|| PcflowError::config("", format!("no catalog experiment `{id}`")))?;
    parse_config(entry.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses_with_matching_id() {
        for e in CATALOG {
            let c = load(e.id).unwrap();
            assert_eq!(c.id, e.id);
        }
        let mut ids: Vec<_> = CATALOG.iter().map(|e| e.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), CATALOG.len());
        assert!(load("nope").is_err());
    }
}
