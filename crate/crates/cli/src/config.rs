use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gtsarah::algorithms::{Algorithm, RunConfig, Sampling, StepSize};
use gtsarah::data::{LabelRule, SynthKind};
use gtsarah::engine::Def33Mode;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

fn one() -> usize {
    1
}

fn default_reg() -> f64 {
    1e-4
}

fn default_noise() -> f64 {
    0.1
}

fn default_hetero() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_kind() -> String {
    "heterogeneous".into()
}

fn default_rule() -> String {
    "sign".into()
}

fn default_sampling() -> String {
    "uniform".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

/// A whole experiment: one network, one dataset, one or more algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every other stream is derived from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default = "one")]
    pub threads: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Equal epoch budget; overrides `outer` and `steps` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub def33: Def33Setting,
    pub topology: TopologyConfig,
    pub dataset: DatasetConfig,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Def33Setting {
    Off,
    #[default]
    Recorded,
    EveryIterate,
}

impl From<Def33Setting> for Def33Mode {
    fn from(s: Def33Setting) -> Self {
        match s {
            Def33Setting::Off => Def33Mode::Off,
            Def33Setting::Recorded => Def33Mode::Recorded,
            Def33Setting::EveryIterate => Def33Mode::EveryIterate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    /// complete, ring, path, grid, exponential or custom.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `RxC` for grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<String>,
    /// Edge-list file for custom graphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DatasetConfig {
    Synthetic {
        /// `logistic` or `quadratic`.
        family: String,
        #[serde(default = "default_kind")]
        kind: String,
        m: usize,
        p: usize,
        #[serde(default = "default_reg")]
        reg: f64,
        #[serde(default = "default_noise")]
        label_noise: f64,
        #[serde(default = "default_hetero")]
        heterogeneity: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<String>,
        /// `sign`, `fashion-mnist`, `threshold:T` or `map:P1,P2/N1,N2`.
        #[serde(default = "default_rule")]
        label_rule: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
        #[serde(default = "default_reg")]
        reg: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlphaSpec {
    #[default]
    Auto,
    Fixed(f64),
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Auto => f.write_str("auto"),
            AlphaSpec::Fixed(a) => write!(f, "{a}"),
        }
    }
}

impl Serialize for AlphaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaSpec::Auto => s.serialize_str("auto"),
            AlphaSpec::Fixed(a) => s.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(AlphaSpec::Fixed(v as f64)),
            Raw::Num(v) => Ok(AlphaSpec::Fixed(v)),
            Raw::Text(t) if t.trim().eq_ignore_ascii_case("auto") => Ok(AlphaSpec::Auto),
            Raw::Text(t) => t
                .trim()
                .parse::<f64>()
                .map(AlphaSpec::Fixed)
                .map_err(|_| de::Error::custom(format!("alpha must be \"auto\" or a number, got `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// gt-sarah, dsgt or dsgd.
    pub name: String,
    /// Used in output file names; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub alpha: AlphaSpec,
    #[serde(default = "one")]
    pub batch: usize,
    /// Defaults to `ceil(m / B)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default = "one")]
    pub outer: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "default_sampling")]
    pub sampling: String,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl AlgorithmConfig {
    pub fn algorithm(&self) -> Result<Algorithm> {
        Ok(self.name.parse()?)
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.clone())
    }

    pub fn run_config(&self, m: usize, seed: u64) -> Result<RunConfig<f64>> {
        let mut c = RunConfig::new(self.algorithm()?);
        c.alpha = match self.alpha {
            AlphaSpec::Auto => StepSize::Auto,
            AlphaSpec::Fixed(a) => StepSize::Fixed(a),
        };
        c.batch = self.batch;
        c.q = self.q.unwrap_or_else(|| m.div_ceil(self.batch.max(1)));
        c.outer = self.outer;
        c.steps = self.steps;
        c.sampling = parse_sampling(&self.sampling)?;
        c.epsilon = self.epsilon;
        c.seed = seed;
        c.validate(m)
            .with_context(|| format!("algorithm `{}`", self.label()))?;
        Ok(c)
    }
}

pub fn parse_sampling(s: &str) -> Result<Sampling> {
    match s.trim().to_ascii_lowercase().as_str() {
        "uniform" => Ok(Sampling::Uniform),
        "full-pass" | "full" => Ok(Sampling::FullPass),
        other => bail!("unknown sampling `{other}` (expected uniform or full-pass)"),
    }
}

pub fn parse_label_rule(s: &str) -> Result<LabelRule> {
    let s = s.trim();
    let lower = s.to_ascii_lowercase();
    if lower == "sign" {
        return Ok(LabelRule::Sign);
    }
    if lower == "fashion-mnist" {
        return Ok(LabelRule::fashion_mnist_tshirt_dress());
    }
    if let Some(t) = lower.strip_prefix("threshold:") {
        return Ok(LabelRule::Threshold(t.trim().parse().context("threshold value")?));
    }
    if let Some(spec) = lower.strip_prefix("map:") {
        let (pos, neg) = spec
            .split_once('/')
            .context("map rule must look like map:P1,P2/N1,N2")?;
        let list = |part: &str| -> Result<Vec<f64>> {
            part.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>().with_context(|| format!("label `{t}`")))
                .collect()
        };
        return Ok(LabelRule::Map {
            positive: list(pos)?,
            negative: list(neg)?,
        });
    }
    bail!("unknown label rule `{s}`")
}

pub fn parse_synth_kind(s: &str) -> Result<SynthKind> {
    Ok(s.parse()?)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks that do not need the dataset.
    pub fn check(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            bail!("at least one [[algorithm]] section is required");
        }
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        if let Some(e) = self.epochs {
            if !(e > 0.0 && e.is_finite()) {
                bail!("epochs must be positive");
            }
        }
        if self.record_every == Some(0) {
            bail!("record_every must be positive");
        }
        let mut labels = std::collections::BTreeSet::new();
        for a in &self.algorithms {
            a.algorithm()?;
            parse_sampling(&a.sampling)?;
            if let AlphaSpec::Fixed(v) = a.alpha {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("algorithm `{}`: alpha must be positive, got {v}", a.label());
                }
            }
            if !labels.insert(a.label()) {
                bail!("duplicate algorithm label `{}`; set distinct `label`s", a.label());
            }
        }
        match &self.dataset {
            DatasetConfig::Synthetic { family, kind, .. } => {
                if family != "logistic" && family != "quadratic" {
                    bail!("synthetic family must be logistic or quadratic, got `{family}`");
                }
                parse_synth_kind(kind)?;
            }
            DatasetConfig::File { label_rule, format, .. } => {
                parse_label_rule(label_rule)?;
                if let Some(f) = format {
                    f.parse::<gtsarah::data::Format>()?;
                }
            }
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let DatasetConfig::File { path, .. } = &mut self.dataset {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(edges) = &mut self.topology.edges {
            if edges.is_relative() {
                *edges = base.join(&*edges);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 3
replicates = 2
epochs = 5.0

[topology]
kind = "ring"
n = 8

[dataset]
source = "synthetic"
family = "logistic"
m = 50
p = 5

[[algorithm]]
name = "gt-sarah"
alpha = "auto"
batch = 2

[[algorithm]]
name = "dsgt"
alpha = "1e-2"

[[algorithm]]
name = "dsgd"
alpha = 0.05
"#;

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.algorithms.len(), 3);
        assert_eq!(c.algorithms[0].alpha, AlphaSpec::Auto);
        assert_eq!(c.algorithms[1].alpha, AlphaSpec::Fixed(0.01));
        assert_eq!(c.algorithms[2].alpha, AlphaSpec::Fixed(0.05));
        assert_eq!(c.def33, Def33Setting::Recorded);
        let rc = c.algorithms[0].run_config(50, 9).unwrap();
        assert_eq!(rc.q, 25);
        assert_eq!(rc.seed, 9);
    }

    #[test]
    fn dump_round_trip() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("\"1e-2\"", "\"fast\"")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("\"dsgd\"", "\"adam\"")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("seed = 3", "sed = 3")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("alpha = 0.05", "alpha = -1")).is_err());
        let none = SAMPLE.split("[[algorithm]]").next().unwrap().to_string() + "algorithm = []\n";
        assert!(ExperimentConfig::from_toml(&none).is_err());
    }

    #[test]
    fn label_rules() {
        assert_eq!(parse_label_rule("sign").unwrap(), LabelRule::Sign);
        assert_eq!(
            parse_label_rule("map:1,2/0").unwrap(),
            LabelRule::Map { positive: vec![1.0, 2.0], negative: vec![0.0] }
        );
        assert_eq!(parse_label_rule("threshold:0.5").unwrap(), LabelRule::Threshold(0.5));
        assert!(parse_label_rule("map:1").is_err());
    }
}
