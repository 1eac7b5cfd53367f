//! Run configuration, its `key = value` file format and fingerprint.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::footprint::{AlphaRadius, EpsilonScale, FootprintConfig};
use crate::metadata::GoodnessRule;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub epsilon_good: f64,
    pub goodness_rule: GoodnessRule,
    pub spearman_floor: f64,
    pub duplicate_rho: f64,
    pub boundary_threshold: f64,
    pub restarts: usize,
    pub candidate_cap: usize,
    pub kmeans_restarts: usize,
    pub forest_trees: usize,
    pub cv_folds: usize,
    pub k_clusters: Option<usize>,
    pub alpha_radius: Option<f64>,
    pub epsilon_scale: EpsilonScale,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            epsilon_good: 0.05,
            goodness_rule: GoodnessRule::Absolute,
            spearman_floor: 0.3,
            duplicate_rho: 0.95,
            boundary_threshold: 0.7,
            restarts: 30,
            candidate_cap: 1000,
            kmeans_restarts: 100,
            forest_trees: 100,
            cv_folds: 5,
            k_clusters: None,
            alpha_radius: None,
            epsilon_scale: EpsilonScale::Product,
        }
    }
}

/// Keys accepted in a config file, in canonical order.
pub const KEYS: [&str; 14] = [
    "seed",
    "epsilon_good",
    "goodness_rule",
    "spearman_floor",
    "duplicate_rho",
    "boundary_threshold",
    "restarts",
    "candidate_cap",
    "kmeans_restarts",
    "forest_trees",
    "cv_folds",
    "k_clusters",
    "alpha_radius",
    "epsilon_scale",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_opt<T: std::str::FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v == "none" {
        Ok(None)
    } else {
        parse_num(key, v).map(Some)
    }
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

impl RunConfig {
    /// Sets one value by key; the result is not validated until [`validate`](Self::validate).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse_num(key, v)?,
            "epsilon_good" => self.epsilon_good = parse_num(key, v)?,
            "goodness_rule" => self.goodness_rule = v.parse()?,
            "spearman_floor" => self.spearman_floor = parse_num(key, v)?,
            "duplicate_rho" => self.duplicate_rho = parse_num(key, v)?,
            "boundary_threshold" => self.boundary_threshold = parse_num(key, v)?,
            "restarts" => self.restarts = parse_num(key, v)?,
            "candidate_cap" => self.candidate_cap = parse_num(key, v)?,
            "kmeans_restarts" => self.kmeans_restarts = parse_num(key, v)?,
            "forest_trees" => self.forest_trees = parse_num(key, v)?,
            "cv_folds" => self.cv_folds = parse_num(key, v)?,
            "k_clusters" => self.k_clusters = parse_opt(key, v)?,
            "alpha_radius" => self.alpha_radius = parse_opt(key, v)?,
            "epsilon_scale" => self.epsilon_scale = v.parse().map_err(Error::Config)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}`; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "seed" => self.seed.to_string(),
            "epsilon_good" => self.epsilon_good.to_string(),
            "goodness_rule" => self.goodness_rule.to_string(),
            "spearman_floor" => self.spearman_floor.to_string(),
            "duplicate_rho" => self.duplicate_rho.to_string(),
            "boundary_threshold" => self.boundary_threshold.to_string(),
            "restarts" => self.restarts.to_string(),
            "candidate_cap" => self.candidate_cap.to_string(),
            "kmeans_restarts" => self.kmeans_restarts.to_string(),
            "forest_trees" => self.forest_trees.to_string(),
            "cv_folds" => self.cv_folds.to_string(),
            "k_clusters" => fmt_opt(&self.k_clusters),
            "alpha_radius" => fmt_opt(&self.alpha_radius),
            "epsilon_scale" => self.epsilon_scale.to_string(),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(
            self.epsilon_good >= 0.0 && self.epsilon_good <= 1.0,
            "epsilon_good must lie in [0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.spearman_floor),
            "spearman_floor must lie in [0, 1]",
        )?;
        check(
            self.duplicate_rho > 0.0 && self.duplicate_rho <= 1.0,
            "duplicate_rho must lie in (0, 1]",
        )?;
        check(
            self.boundary_threshold > 0.0 && self.boundary_threshold <= 1.0,
            "boundary_threshold must lie in (0, 1]",
        )?;
        check(self.restarts >= 1, "restarts must be at least 1")?;
        check(self.candidate_cap >= 1, "candidate_cap must be at least 1")?;
        check(self.kmeans_restarts >= 1, "kmeans_restarts must be at least 1")?;
        check(self.forest_trees >= 1, "forest_trees must be at least 1")?;
        check(self.cv_folds >= 2, "cv_folds must be at least 2")?;
        check(self.k_clusters.is_none_or(|k| k >= 1), "k_clusters must be at least 1")?;
        check(
            self.alpha_radius.is_none_or(|r| r > 0.0 && !r.is_nan()),
            "alpha_radius must be positive",
        )?;
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys not present keep
    /// their defaults. Repeated keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(Error::Config(format!("line {}: `{k}` given twice", no + 1)));
            }
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        self.validate()
    }

    /// Canonical `key = value` rendering of every value.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    /// Short hash of the canonical rendering, stamped into every artifact.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn footprint_config(&self) -> FootprintConfig {
        FootprintConfig {
            alpha_radius: self.alpha_radius.map_or(AlphaRadius::Auto, AlphaRadius::Fixed),
            epsilon_scale: self.epsilon_scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_text() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.fingerprint().len(), 16);
    }

    #[test]
    fn parse_overrides_and_comments() {
        let cfg =
            RunConfig::parse("# run\nseed = 7\nrestarts=5 # fewer\nalpha_radius = 0.5\n\nk_clusters = none\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.restarts, 5);
        assert_eq!(cfg.alpha_radius, Some(0.5));
        assert_eq!(cfg.k_clusters, None);
        assert_ne!(cfg.fingerprint(), RunConfig::default().fingerprint());
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(RunConfig::parse("colour = red")
            .unwrap_err()
            .to_string()
            .contains("valid keys"));
        assert!(RunConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(RunConfig::parse("spearman_floor = 1.5").is_err());
        assert!(RunConfig::parse("boundary_threshold = 0").is_err());
        assert!(RunConfig::parse("seed").is_err());
        assert!(RunConfig::parse("restarts = -1").is_err());
    }
}
