//! Experiment configuration.
//!
//! Experiments are TOML documents. Every section is optional and defaults to
//! the baseline suite; unknown keys are rejected. A minimal file:
//!
//! ```toml
//! name = "baseline"
//! seed = 20240601
//!
//! [model]
//! a = 1.0
//! epsilon = 0.25
//! env = { kind = "constant", b = 1.0 }
//!
//! [checks.mean_count]
//! t = 1.5
//! n = 20000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::tagged_seed;
use crate::verify::{
    BenefitBoundConfig, ContractionConfig, DriftConfig, GrowthRateConfig, Harness, KernelSamplerConfig, LlnConfig,
    ManyToOneConfig, MartingaleConfig, MeanCountConfig, MomentsConfig, QuadratureConfig, SemigroupDriftConfig,
    ThinningConfig, VarianceRatioConfig, CHECK_NAMES,
};

/// Largest seed representable in a config file.
pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
    /// Checks to run, in suite order; empty runs all of them.
    pub select: Vec<String>,
    pub model: ModelParams,
    pub harness: Harness,
    pub checks: ChecksConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "baseline".into(),
            seed: 1,
            out_dir: PathBuf::from("out"),
            workers: None,
            select: Vec::new(),
            model: ModelParams::baseline(),
            harness: Harness::default(),
            checks: ChecksConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub mean_count: MeanCountConfig,
    pub many_to_one: ManyToOneConfig,
    pub kernel_sampler: KernelSamplerConfig,
    pub quadrature: QuadratureConfig,
    pub drift: DriftConfig,
    pub moments: MomentsConfig,
    pub variance_ratio: VarianceRatioConfig,
    pub martingale: MartingaleConfig,
    pub lln: LlnConfig,
    pub contraction: ContractionConfig,
    pub growth_rate: GrowthRateConfig,
    pub semigroup_drift: SemigroupDriftConfig,
    pub thinning: ThinningConfig,
    pub benefit_bound: BenefitBoundConfig,
}

impl ChecksConfig {
    fn seed_slot(&mut self, name: &str) -> Option<&mut Option<u64>> {
        Some(match name {
            "mean_count" => &mut self.mean_count.seed,
            "many_to_one" => &mut self.many_to_one.seed,
            "kernel_sampler" => &mut self.kernel_sampler.seed,
            "quadrature" => &mut self.quadrature.seed,
            "drift" => &mut self.drift.seed,
            "moments" => &mut self.moments.seed,
            "variance_ratio" => &mut self.variance_ratio.seed,
            "martingale" => &mut self.martingale.seed,
            "lln" => &mut self.lln.seed,
            "contraction" => &mut self.contraction.seed,
            "growth_rate" => &mut self.growth_rate.seed,
            "semigroup_drift" => &mut self.semigroup_drift.seed,
            "thinning" => &mut self.thinning.seed,
            "benefit_bound" => &mut self.benefit_bound.seed,
            _ => return None,
        })
    }

    /// Sets the replica budget of every Monte Carlo check to `n`.
    pub fn set_replicas(&mut self, n: u64) {
        self.mean_count.n = n;
        self.many_to_one.n_pop = n;
        self.many_to_one.n_spine = n;
        self.kernel_sampler.n = n;
        self.drift.n = n;
        self.moments.n = n;
        self.variance_ratio.n = n;
        self.martingale.n = n;
        self.lln.n = n;
        self.contraction.n = n;
        self.growth_rate.n = n;
        self.semigroup_drift.n = n;
        self.thinning.n = n;
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_value(parse_table(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` (or the defaults) and applies `key=value` overrides on
    /// dotted paths, e.g. `model.epsilon=0.3` or `checks.lln.n=2000`.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut value = match path {
            Some(p) => parse_table(&std::fs::read_to_string(p)?)?,
            None => toml::Value::Table(toml::map::Map::new()),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    fn from_value(value: toml::Value) -> Result<Self> {
        let cfg: ExperimentConfig =
            value.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for name in &self.select {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(Error::invalid(
                    "select",
                    format!("unknown check `{name}`; known checks: {}", CHECK_NAMES.join(", ")),
                ));
            }
        }
        if self.seed > MAX_SEED {
            return Err(Error::invalid("seed", "seed ≤ 2^63 − 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "workers ≥ 1"));
        }
        let h = &self.harness;
        if !(h.sigmas > 0.0 && h.max_se_fraction > 0.0 && (0.0..1.0).contains(&h.max_truncated_fraction)) {
            return Err(Error::invalid("harness", "sigmas > 0, max_se_fraction > 0, max_truncated_fraction ∈ [0, 1)"));
        }
        if h.max_individuals == 0 {
            return Err(Error::invalid("harness.max_individuals", "max_individuals ≥ 1"));
        }
        Ok(())
    }

    /// Checks to run, in suite order.
    pub fn selected(&self) -> Vec<&'static str> {
        CHECK_NAMES.iter().copied().filter(|n| self.select.is_empty() || self.select.iter().any(|s| s == n)).collect()
    }

    /// Seed of `check`: its configured seed, or one derived from the run seed and its name.
    pub fn check_seed(&self, check: &str) -> u64 {
        let mut checks = self.checks.clone();
        // Derived seeds keep 63 bits so that they fit a TOML integer.
        checks.seed_slot(check).and_then(|s| *s).unwrap_or_else(|| tagged_seed(self.seed, check) & MAX_SEED)
    }

    /// The configuration with every check seed written out, so that a rerun
    /// from it does not depend on the seed derivation.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        for name in CHECK_NAMES {
            let seed = self.check_seed(name);
            if let Some(slot) = out.checks.seed_slot(name) {
                *slot = Some(seed);
            }
        }
        out
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 over the canonical JSON form of the resolved configuration,
    /// leaving out the output directory and worker count (neither changes results).
    pub fn hash(&self) -> String {
        let mut canon = self.resolved();
        canon.out_dir = PathBuf::new();
        canon.workers = None;
        let json = serde_json::to_string(&canon).expect("configs serialize to JSON");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_table(text: &str) -> Result<toml::Value> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    Ok(toml::Value::Table(table))
}

fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}` descends into a non-table value")))?;
        node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("override `{key}` descends into a non-table value")))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Annotated description of the configuration format followed by the defaults.
pub fn schema() -> String {
    let defaults = ExperimentConfig::default().to_toml_string().expect("defaults serialize");
    format!(
        "\
# Experiment configuration (TOML). All sections are optional; unknown keys are rejected.
#
# name          text, experiment name
# seed          unsigned integer, run seed; check seeds derive from it unless set per check
# out_dir       output directory for CSVs, manifest and summaries
# workers       worker threads (≥ 1); omitted means all cores
# select        list of check names; empty means all of: {}
#
# [model]       a > 0, epsilon ∈ (0, 1/2)
#   env = {{ kind = \"constant\", b = <b > 0> }}
#   env = {{ kind = \"sinusoidal\", alpha = <α>, beta = <β> }}      (α − |β| > 0)
#   env = {{ kind = \"tabulated\", points = [[t, φ], ...] }}        (≥ 2 points, increasing t, φ > 0)
#
# [harness]     sigmas, max_se_fraction, max_truncated_fraction, max_individuals
# [checks.<name>]  per-check grids, replica budgets and optional seed
#
# Functionals: const_one, recip_one_plus_endpoint, capped_jump_count(cap), endpoint_power(p)
#
# Defaults:

{defaults}",
        CHECK_NAMES.join(", ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::NamedFunctional;
    use crate::verify::LlnNormalization;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        assert!(schema().contains("epsilon"));
    }

    #[test]
    fn empty_document_is_baseline() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.selected().len(), CHECK_NAMES.len());
    }

    #[test]
    fn bad_epsilon_names_key_and_constraint() {
        let text = "[model]\na = 1.0\nepsilon = 0.6\nenv = { kind = \"constant\", b = 1.0 }\n";
        let err = ExperimentConfig::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("ε ∈ (0, 1/2)") && err.contains("epsilon"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("colour = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("[checks.lln]\nbogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("select = [\"nope\"]").is_err());
    }

    #[test]
    fn overrides() {
        let cfg = ExperimentConfig::load_with_overrides(
            None,
            &[
                "checks.lln.n=123".into(),
                "checks.lln.functional=capped_jump_count(5)".into(),
                "checks.lln.normalization=mean_mass".into(),
                "model.epsilon=0.3".into(),
                "select=[\"lln\"]".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.checks.lln.n, 123);
        assert_eq!(cfg.checks.lln.functional, NamedFunctional::CappedJumpCount(5));
        assert_eq!(cfg.checks.lln.normalization, LlnNormalization::MeanMass);
        assert_eq!(cfg.model.epsilon(), 0.3);
        assert_eq!(cfg.selected(), vec!["lln"]);
        assert!(ExperimentConfig::load_with_overrides(None, &["model.epsilon=0.6".into()]).is_err());
        assert!(ExperimentConfig::load_with_overrides(None, &["noequals".into()]).is_err());
    }

    #[test]
    fn hash_ignores_layout_and_output_location() {
        let a = ExperimentConfig::from_toml_str("seed = 5\nname = \"x\"").unwrap();
        let mut b = ExperimentConfig::from_toml_str("name = \"x\"\n\n# c\nseed = 5").unwrap();
        b.out_dir = "elsewhere".into();
        b.workers = Some(3);
        assert_eq!(a.hash(), b.hash());
        // Writing out the derived seeds does not change the experiment.
        assert_eq!(a.hash(), a.resolved().hash());
        let c = ExperimentConfig::from_toml_str("seed = 6\nname = \"x\"").unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
