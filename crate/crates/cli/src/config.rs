use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use molforest::classifiers::{ClassifierConfig, ForestConfig, NetConfig, SvmConfig, SvmKernel};
use molforest::evaluate::Protocol;
use molforest::featurizer::{FeatureConfig, FeatureMode, FeatureVocabulary};
use molforest::kernels::KernelKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Sorted, deduplicated set of heights or distances. Parsed from `a-b`,
/// `a,b,c` or any comma-separated mix such as `0-2,5`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LevelsRepr")]
pub struct Levels(pub Vec<u32>);

#[derive(Deserialize)]
#[serde(untagged)]
enum LevelsRepr {
    Text(String),
    List(Vec<u32>),
    One(u32),
}

impl TryFrom<LevelsRepr> for Levels {
    type Error = String;

    fn try_from(r: LevelsRepr) -> Result<Self, String> {
        match r {
            LevelsRepr::Text(s) => s.parse(),
            LevelsRepr::List(v) => Ok(Levels::from_values(v)),
            LevelsRepr::One(v) => Ok(Levels(vec![v])),
        }
    }
}

impl Levels {
    fn from_values(mut v: Vec<u32>) -> Self {
        v.sort_unstable();
        v.dedup();
        Levels(v)
    }
}

impl FromStr for Levels {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad range {s:?}; expected a-b or a,b,c");
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim) {
            if part.is_empty() {
                return Err(bad());
            }
            match part.split_once('-') {
                Some((a, b)) => {
                    let a: u32 = a.trim().parse().map_err(|_| bad())?;
                    let b: u32 = b.trim().parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    out.extend(a..=b);
                }
                None => out.push(part.parse().map_err(|_| bad())?),
            }
        }
        Ok(Levels::from_values(out))
    }
}

impl fmt::Display for Levels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Height,
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    #[default]
    None,
    Cosine,
    Nspdk,
}

impl KernelChoice {
    pub fn kind(self) -> Option<KernelKind> {
        match self {
            KernelChoice::None => None,
            KernelChoice::Cosine => Some(KernelKind::Cosine),
            KernelChoice::Nspdk => Some(KernelKind::Nspdk),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rf,
    Mlp,
    Pnet,
    Svm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SvmKernelChoice {
    Linear,
    Rbf,
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Smiles,
    Sdf,
    Pairs,
}

/// Experiment manifest read from `--config`. Every field is optional;
/// command-line flags win over values given here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub heights: Option<Levels>,
    pub distances: Option<Levels>,
    pub mode: Option<Mode>,
    pub kernel: Option<KernelChoice>,
    pub algorithm: Option<Algorithm>,
    pub forest: Option<ForestConfig>,
    pub net: Option<NetConfig>,
    /// Kept raw so an absent `kernel` key can be told from an explicit one.
    pub svm: Option<serde_json::Value>,
    pub protocol: Option<Protocol>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub paths: Paths,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub drops: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub roc: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub gram: Option<PathBuf>,
}

impl RunConfig {
    /// SVM settings from the file, and whether they name a kernel.
    pub fn svm(&self) -> Result<(SvmConfig, bool), CliError> {
        match &self.svm {
            None => Ok((SvmConfig::default(), false)),
            Some(v) => {
                let c = SvmConfig::deserialize(v).map_err(|e| CliError::Config(format!("svm: {e}")))?;
                Ok((c, v.get("kernel").is_some()))
            }
        }
    }

    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flag value if given, else the manifest's, else an error naming both.
pub fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::Config(format!("missing --{name} (or `{name}` in the config file)")))
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct FeatureArgs {
    /// Subgraph heights, e.g. `0-3` or `1,3`.
    #[arg(long)]
    pub heights: Option<Levels>,
    /// Root-pair distances (pair mode only), e.g. `0-5`.
    #[arg(long)]
    pub distances: Option<Levels>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
}

impl FeatureArgs {
    pub fn mode(&self, cfg: &RunConfig) -> Option<Mode> {
        self.mode.or(cfg.mode)
    }

    /// Feature extraction settings; height mode is the default.
    pub fn resolve(&self, cfg: &RunConfig) -> Result<FeatureConfig, CliError> {
        let heights = required(self.heights.clone(), cfg.heights.clone(), "heights")?;
        let distances = self.distances.clone().or_else(|| cfg.distances.clone());
        let fc = match self.mode(cfg).unwrap_or(Mode::Height) {
            Mode::Height => {
                let distances = distances.unwrap_or(Levels(vec![0]));
                if distances.0.iter().any(|&d| d != 0) {
                    return Err(CliError::Config(format!(
                        "mode height forbids non-zero distances (got {distances})"
                    )));
                }
                FeatureConfig::height(heights.0)
            }
            Mode::Pair => FeatureConfig::pair(heights.0, distances.unwrap_or(Levels(vec![0])).0),
        };
        fc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(fc)
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    /// Similarity used as an empirical kernel map before training.
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    /// Feature mode the input was built with; checked against the kernel.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trees (rf).
    #[arg(long)]
    pub trees: Option<usize>,
    /// Split criterion (rf).
    #[arg(long, value_enum)]
    pub criterion: Option<Criterion>,
    /// Initial learning rate (mlp, pnet).
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Momentum (mlp, pnet).
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Maximum training epochs (mlp, pnet).
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Fraction held out for early stopping (mlp, pnet).
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    /// Keep one voting snapshot per improving epoch (mlp, pnet).
    #[arg(long)]
    pub voted: bool,
    /// Kernel inside the SVM; defaults to precomputed when --kernel is set.
    #[arg(long, value_enum)]
    pub svm_kernel: Option<SvmKernelChoice>,
    /// RBF width (svm with --svm-kernel rbf).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Misclassification cost C (svm).
    #[arg(long = "cost")]
    pub c: Option<f64>,
    /// Cost multiplier for positives (svm).
    #[arg(long = "cost-ratio")]
    pub j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSettings {
    pub algorithm: Algorithm,
    pub kernel: KernelChoice,
    pub classifier: ClassifierConfig,
    pub seed: u64,
}

impl ModelArgs {
    pub fn resolve(&self, cfg: &RunConfig, vocab: &FeatureVocabulary) -> Result<ModelSettings, CliError> {
        let algorithm = required(self.algorithm, cfg.algorithm, "algorithm")?;
        let kernel = self.kernel.or(cfg.kernel).unwrap_or_default();
        if kernel == KernelChoice::Nspdk {
            let mode = self.mode.or(cfg.mode).unwrap_or_else(|| infer_mode(vocab));
            if mode == Mode::Height {
                return Err(CliError::Config("kernel nspdk requires pair-mode features".into()));
            }
        }
        let classifier = match algorithm {
            Algorithm::Rf => {
                let mut c = cfg.forest.unwrap_or_default();
                if let Some(n) = self.trees {
                    c.n_trees = n;
                }
                if let Some(k) = self.criterion {
                    c.criterion = match k {
                        Criterion::Gini => molforest::classifiers::SplitCriterion::Gini,
                        Criterion::Entropy => molforest::classifiers::SplitCriterion::Entropy,
                    };
                }
                if c.n_trees == 0 {
                    return Err(CliError::Config("--trees must be positive".into()));
                }
                ClassifierConfig::Forest(c)
            }
            Algorithm::Mlp | Algorithm::Pnet => {
                let mut c = cfg.net.unwrap_or_default();
                if let Some(v) = self.learning_rate {
                    c.learning_rate = v;
                }
                if let Some(v) = self.momentum {
                    c.momentum = v;
                }
                if let Some(v) = self.max_epochs {
                    c.max_epochs = v;
                }
                if let Some(v) = self.validation_fraction {
                    c.validation_fraction = v;
                }
                c.voted |= self.voted;
                if algorithm == Algorithm::Mlp {
                    ClassifierConfig::Mlp(c)
                } else {
                    ClassifierConfig::Partitioned(c)
                }
            }
            Algorithm::Svm => {
                let (mut c, named) = cfg.svm()?;
                if let Some(v) = self.c {
                    c.c = v;
                }
                if let Some(v) = self.j {
                    c.j = v;
                }
                let from_file = named.then_some(match c.kernel {
                    SvmKernel::Linear => SvmKernelChoice::Linear,
                    SvmKernel::Rbf { .. } => SvmKernelChoice::Rbf,
                    SvmKernel::Precomputed => SvmKernelChoice::Precomputed,
                });
                let explicit = self.svm_kernel.or(from_file);
                let choice = match (explicit, kernel) {
                    (Some(k), _) => k,
                    (None, KernelChoice::None) => SvmKernelChoice::Linear,
                    (None, _) => SvmKernelChoice::Precomputed,
                };
                c.kernel = match choice {
                    SvmKernelChoice::Linear => SvmKernel::Linear,
                    SvmKernelChoice::Rbf => {
                        let old = match c.kernel {
                            SvmKernel::Rbf { gamma } => Some(gamma),
                            _ => None,
                        };
                        let gamma = required(self.gamma, old, "gamma")?;
                        SvmKernel::Rbf { gamma }
                    }
                    SvmKernelChoice::Precomputed => {
                        if kernel == KernelChoice::None {
                            return Err(CliError::Config("--svm-kernel precomputed requires --kernel".into()));
                        }
                        SvmKernel::Precomputed
                    }
                };
                ClassifierConfig::Svm(c)
            }
        };
        Ok(ModelSettings {
            algorithm,
            kernel,
            classifier,
            seed: self.seed.or(cfg.seed).unwrap_or(0),
        })
    }
}

/// Pair mode if any feature block pairs roots at a non-zero distance.
pub fn infer_mode(vocab: &FeatureVocabulary) -> Mode {
    let pair = vocab
        .keys()
        .iter()
        .any(|k| !k.block().ends_with(".d0"));
    if pair {
        Mode::Pair
    } else {
        Mode::Height
    }
}

pub fn feature_mode(m: Mode) -> FeatureMode {
    match m {
        Mode::Height => FeatureMode::Height,
        Mode::Pair => FeatureMode::Pair,
    }
}
