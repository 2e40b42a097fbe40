//! YAML run configuration: one file fully determines a run, and every
//! output records the file's SHA-256 so replays are verifiable.
//!
//! All randomness flows from the single `seed` through labeled sub-seeds
//! (sampling, GA, power vectors, surrogate split, Monte Carlo, polynomial
//! fit), so components stay reproducible independently of each other.

use axop::axmodel::{SamplingStrategy, TiePolarity};
use axop::dse::{GaParams, MetricKey, Objectives};
use axop::opgen::OperatorSpec;
use axop::ppa::{DelayModel, PowerPlan};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error("config: {0}")]
    Invalid(String),
}

/// Derives a component seed from the master seed and a fixed label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// Hex SHA-256 over the run-defining parts of the config, recorded in output
/// headers. `workers` and `output_dir` never change results (the merge
/// contract is order-independent), so they are excluded and runs that differ
/// only in them hash identically.
pub fn config_hash(text: &str) -> String {
    let canonical = match serde_yaml::from_str::<serde_yaml::Value>(text) {
        Ok(mut value) => {
            if let Some(map) = value.as_mapping_mut() {
                map.remove("workers");
                map.remove("output_dir");
            }
            serde_yaml::to_string(&value).unwrap_or_else(|_| text.to_string())
        }
        Err(_) => text.to_string(),
    };
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    format!("{:x}", hasher.finalize())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub estimation: EstimationSection,
    #[serde(default)]
    pub dse: DseSection,
    #[serde(default)]
    pub objectives: Vec<ObjectiveEntry>,
    #[serde(default)]
    pub constraints: Vec<ConstraintEntry>,
    #[serde(default)]
    pub task: Option<TaskSection>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_seed() -> u64 {
    1
}

fn default_workers() -> usize {
    1
}

fn default_output_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    /// `uadd` or `smul-bw`.
    pub kind: String,
    pub width_a: usize,
    #[serde(default)]
    pub width_b: Option<usize>,
}

impl OperatorSection {
    pub fn spec(&self) -> Result<OperatorSpec, ConfigError> {
        let width_b = self.width_b.unwrap_or(self.width_a);
        match self.kind.as_str() {
            "uadd" => {
                if width_b != self.width_a {
                    return Err(ConfigError::Invalid(
                        "operator.width_b: unsigned adders need equal operand widths".into(),
                    ));
                }
                Ok(OperatorSpec::unsigned_add(self.width_a))
            }
            "smul-bw" => Ok(OperatorSpec::signed_mul_bw(self.width_a, width_b)),
            other => Err(ConfigError::Invalid(format!(
                "operator.kind: unknown kind {other:?} (expected uadd or smul-bw)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Polarity pruned fanout is tied to: `zero` (default) or `one`.
    #[serde(default)]
    pub tie: Option<String>,
}

impl ModelSection {
    pub fn tie_polarity(&self) -> Result<TiePolarity, ConfigError> {
        match self.tie.as_deref() {
            None | Some("zero") => Ok(TiePolarity::Zero),
            Some("one") => Ok(TiePolarity::One),
            Some(other) => Err(ConfigError::Invalid(format!(
                "model.tie: expected zero or one, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimationSection {
    #[serde(default)]
    pub behav: BehavSection,
    #[serde(default)]
    pub ppa: PpaSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehavSection {
    /// Output estimator: `netlist` (default), `lookup`, or `poly`.
    #[serde(default = "default_estimator")]
    pub estimator: String,
    /// Plan: `exhaustive` (default) or `monte-carlo`.
    #[serde(default = "default_plan")]
    pub plan: String,
    #[serde(default = "default_mc_samples")]
    pub samples: usize,
    /// Polynomial degree for `poly`.
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Fitting sample count for `poly`.
    #[serde(default = "default_fit_samples")]
    pub fit_samples: usize,
}

fn default_estimator() -> String {
    "netlist".to_string()
}

fn default_plan() -> String {
    "exhaustive".to_string()
}

fn default_mc_samples() -> usize {
    100_000
}

fn default_degree() -> usize {
    2
}

fn default_fit_samples() -> usize {
    200
}

impl Default for BehavSection {
    fn default() -> Self {
        BehavSection {
            estimator: default_estimator(),
            plan: default_plan(),
            samples: default_mc_samples(),
            degree: default_degree(),
            fit_samples: default_fit_samples(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpaSection {
    #[serde(default = "default_lut_delay")]
    pub lut_delay: f64,
    #[serde(default = "default_carry_delay")]
    pub carry_per_bit_delay: f64,
    #[serde(default = "default_power_vectors")]
    pub power_vectors: usize,
    /// Optional externally measured PPA CSV; matching configs override
    /// proxies.
    #[serde(default)]
    pub imported: Option<String>,
}

fn default_lut_delay() -> f64 {
    1.0
}

fn default_carry_delay() -> f64 {
    0.1
}

fn default_power_vectors() -> usize {
    256
}

impl Default for PpaSection {
    fn default() -> Self {
        PpaSection {
            lut_delay: default_lut_delay(),
            carry_per_bit_delay: default_carry_delay(),
            power_vectors: default_power_vectors(),
            imported: None,
        }
    }
}

impl PpaSection {
    pub fn delay_model(&self) -> DelayModel {
        DelayModel {
            lut_delay: self.lut_delay,
            carry_per_bit_delay: self.carry_per_bit_delay,
        }
    }

    pub fn power_plan(&self, master_seed: u64) -> PowerPlan {
        PowerPlan {
            vectors: self.power_vectors,
            seed: derive_seed(master_seed, "power-vectors"),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DseSection {
    /// `list`, `enumerate`, `sample`, or `ga`.
    #[serde(default)]
    pub method: Option<String>,
    #[serde(default)]
    pub list_file: Option<String>,
    #[serde(default)]
    pub sample: Option<SampleSection>,
    #[serde(default)]
    pub ga: Option<GaSection>,
    /// When present, GA fitness comes from surrogates fitted on a
    /// characterized training sample instead of exact characterization.
    #[serde(default)]
    pub surrogate_fitness: Vec<SurrogateEntry>,
    #[serde(default)]
    pub surrogate_training: Option<SampleSection>,
    /// Cap for `enumerate`.
    #[serde(default = "default_enumeration_cap")]
    pub enumeration_cap: u64,
}

fn default_enumeration_cap() -> u64 {
    axop::axmodel::ENUMERATION_CAP
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    /// `random`, `patterned`, or `special`.
    pub kind: String,
    pub count: usize,
    #[serde(default)]
    pub window: Option<usize>,
}

impl SampleSection {
    pub fn strategy(&self, master_seed: u64) -> Result<SamplingStrategy, ConfigError> {
        match self.kind.as_str() {
            "random" => Ok(SamplingStrategy::Random {
                seed: derive_seed(master_seed, "sampling"),
            }),
            "patterned" => Ok(SamplingStrategy::Patterned {
                window: self.window.ok_or_else(|| {
                    ConfigError::Invalid("dse.sample.window: required for patterned sampling".into())
                })?,
            }),
            "special" => Ok(SamplingStrategy::Special),
            other => Err(ConfigError::Invalid(format!(
                "sample.kind: unknown kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSection {
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_crossover")]
    pub crossover_prob: f64,
    #[serde(default)]
    pub mutation_prob_per_bit: Option<f64>,
    #[serde(default = "default_tournament")]
    pub tournament_size: usize,
}

fn default_population() -> usize {
    32
}

fn default_generations() -> usize {
    25
}

fn default_crossover() -> f64 {
    0.9
}

fn default_tournament() -> usize {
    2
}

impl GaSection {
    pub fn params(&self, master_seed: u64) -> GaParams {
        GaParams {
            population: self.population,
            generations: self.generations,
            crossover_prob: self.crossover_prob,
            mutation_prob_per_bit: self.mutation_prob_per_bit,
            tournament_size: self.tournament_size,
            seed: derive_seed(master_seed, "ga"),
        }
    }
}

impl Default for GaSection {
    fn default() -> Self {
        GaSection {
            population: default_population(),
            generations: default_generations(),
            crossover_prob: default_crossover(),
            mutation_prob_per_bit: None,
            tournament_size: default_tournament(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateEntry {
    pub target: String,
    #[serde(default = "default_features")]
    pub features: String,
    #[serde(default)]
    pub lambda: f64,
}

fn default_features() -> String {
    "bits_linear".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveEntry {
    pub metric: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub metric: String,
    pub max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    /// `fir` or `conv2d`.
    pub kind: String,
    /// `builtin` or a file path (signal CSV / PGM image).
    #[serde(default = "default_builtin")]
    pub signal: String,
    #[serde(default)]
    pub taps: Option<Vec<i64>>,
    #[serde(default = "default_builtin")]
    pub image: String,
    #[serde(default)]
    pub kernel: Option<Vec<Vec<i64>>>,
}

fn default_builtin() -> String {
    "builtin".to_string()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let config: RunConfig = serde_yaml::from_str(text)?;
        if config.workers == 0 {
            return Err(ConfigError::Invalid("workers: must be at least 1".into()));
        }
        Ok(config)
    }

    pub fn objectives(&self) -> Result<Objectives, ConfigError> {
        let minimize = self
            .objectives
            .iter()
            .map(|o| {
                MetricKey::parse(&o.metric).ok_or_else(|| {
                    ConfigError::Invalid(format!("objectives.metric: unknown metric {:?}", o.metric))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                MetricKey::parse(&c.metric)
                    .map(|key| (key, c.max))
                    .ok_or_else(|| {
                        ConfigError::Invalid(format!(
                            "constraints.metric: unknown metric {:?}",
                            c.metric
                        ))
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Objectives::new(minimize).with_constraints(constraints))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "operator:\n  kind: uadd\n  width_a: 4\n";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(config.seed, 1);
        assert_eq!(config.workers, 1);
        assert_eq!(config.operator.spec().unwrap().config_len(), 4);
        assert_eq!(config.estimation.behav.estimator, "netlist");
    }

    #[test]
    fn missing_required_key_names_the_field() {
        let err = RunConfig::parse("seed: 3\n").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("operator"), "{message}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("operator:\n  kind: uadd\n  width_a: 4\n  bogus: 1\n");
        assert!(err.is_err());
    }

    #[test]
    fn seed_derivation_is_labeled_and_stable() {
        let a = derive_seed(42, "sampling");
        let b = derive_seed(42, "sampling");
        let c = derive_seed(42, "ga");
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn objectives_parse_and_reject_unknown() {
        let text = "operator:\n  kind: uadd\n  width_a: 4\nobjectives:\n  - metric: pdp_proxy\n  - metric: avg_abs_err\nconstraints:\n  - metric: avg_abs_err\n    max: 3.5\n";
        let config = RunConfig::parse(text).unwrap();
        let objectives = config.objectives().unwrap();
        assert_eq!(objectives.minimize.len(), 2);
        assert_eq!(objectives.constraints.len(), 1);

        let bad = "operator:\n  kind: uadd\n  width_a: 4\nobjectives:\n  - metric: nonsense\n";
        assert!(RunConfig::parse(bad).unwrap().objectives().is_err());
    }

    #[test]
    fn config_hash_is_stable() {
        assert_eq!(config_hash(MINIMAL), config_hash(MINIMAL));
        assert_ne!(config_hash(MINIMAL), config_hash("operator:\n  kind: uadd\n  width_a: 8\n"));
    }

    #[test]
    fn config_hash_ignores_worker_count_and_output_dir() {
        let one = format!("{MINIMAL}workers: 1\noutput_dir: a\n");
        let eight = format!("{MINIMAL}workers: 8\noutput_dir: b\n");
        assert_eq!(config_hash(&one), config_hash(&eight));
        assert_eq!(config_hash(&one), config_hash(MINIMAL));
    }
}
