//! Run configuration: an optional TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use authvar_core::{
    ExportFormat, MappingConfig, MatchConfig, NoisePolicy, RetrofitRuleConfig, ScoreInterval,
    Weights,
};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::Args;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RetrofitMode {
    #[default]
    Off,
    Rule,
    Interval,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub products: Option<PathBuf>,
    pub relations: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub blocklist: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrofitSection {
    pub mode: RetrofitMode,
    pub window_days: i64,
    pub min_shared_authors: usize,
    /// Width of the score interval in standard deviations.
    pub multiplier: f64,
}

impl Default for RetrofitSection {
    fn default() -> Self {
        let rule = RetrofitRuleConfig::default();
        Self {
            mode: RetrofitMode::Off,
            window_days: rule.window_days,
            min_shared_authors: rule.min_shared_authors,
            multiplier: ScoreInterval::DEFAULT_MULTIPLIER,
        }
    }
}

impl RetrofitSection {
    pub fn rule(&self) -> RetrofitRuleConfig {
        RetrofitRuleConfig {
            window_days: self.window_days,
            min_shared_authors: self.min_shared_authors,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub mapping: MappingConfig,
    pub noise: NoisePolicy,
    pub matching: MatchConfig,
    pub retrofit: RetrofitSection,
    pub weights: Weights,
    pub format: ExportFormat,
    pub strict: bool,
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// Loads the config file (if any), applies flag overrides, loads the
    /// mapping and blocklist files it points at, and validates the result.
    pub fn resolve(args: &Args) -> anyhow::Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                toml::from_str::<RunConfig>(&text)
                    .with_context(|| format!("invalid config {}", path.display()))?
            }
            None => RunConfig::default(),
        };

        let p = &mut cfg.paths;
        override_opt(&mut p.products, &args.products);
        override_opt(&mut p.relations, &args.relations);
        override_opt(&mut p.mapping, &args.mapping);
        override_opt(&mut p.blocklist, &args.blocklist);
        override_opt(&mut p.pairs, &args.pairs);
        override_opt(&mut p.annotations, &args.annotations);
        override_opt(&mut p.out, &args.out);
        if let Some(v) = args.window_days {
            cfg.retrofit.window_days = v;
        }
        if let Some(v) = args.min_shared_authors {
            cfg.retrofit.min_shared_authors = v;
        }
        if let Some(v) = args.interval_multiplier {
            cfg.retrofit.multiplier = v;
        }
        if let Some(v) = args.retrofit {
            cfg.retrofit.mode = v;
        }
        if let Some(v) = args.fuzzy_threshold {
            cfg.matching.fuzzy_threshold = v;
        }
        if args.no_fuzzy {
            cfg.matching.fuzzy_enabled = false;
        }
        if let Some(v) = args.fanin_threshold {
            cfg.noise.fanin_threshold = v;
        }
        if let Some(v) = args.min_title_length {
            cfg.noise.min_title_length = v;
        }
        if let Some(v) = args.format {
            cfg.format = v.into();
        }
        if args.strict {
            cfg.strict = true;
        }
        if args.jobs.is_some() {
            cfg.jobs = args.jobs;
        }

        if let Some(path) = &cfg.paths.mapping {
            require_file(path, "mapping")?;
            cfg.mapping = MappingConfig::from_path(path)?;
        }
        if let Some(path) = &cfg.paths.blocklist {
            require_file(path, "blocklist")?;
            let file = std::fs::File::open(path)
                .with_context(|| format!("cannot open blocklist {}", path.display()))?;
            cfg.noise.load_blocklist(std::io::BufReader::new(file))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.mapping.validate()?;
        self.noise.validate()?;
        self.matching.validate()?;
        self.retrofit.rule().validate()?;
        self.weights.validate()?;
        if !(self.retrofit.multiplier >= 0.0) {
            bail!("retrofit multiplier must be non-negative");
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Input path that must be set and exist.
    pub fn input(&self, path: &Option<PathBuf>, what: &str) -> anyhow::Result<PathBuf> {
        let Some(path) = path else {
            bail!("missing --{what} path");
        };
        require_file(path, what)?;
        Ok(path.clone())
    }
}

fn override_opt<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        slot.clone_from(flag);
    }
}

fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_file() {
        bail!("{what} file not found: {}", path.display());
    }
    Ok(())
}
