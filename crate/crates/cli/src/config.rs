//! Run configuration: defaults, key=value config file, environment
//! overrides (seed and worker count only), and CLI-flag overrides, applied
//! in that order.

use anyhow::{bail, Context};
use fraclab::{McConfig, Params};
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        match text {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => bail!("unknown format `{other}` (expected json or csv)"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub n: u32,
    pub s: f64,
    pub p: f64,
    pub a: f64,
    pub seed: u64,
    /// Sample count for R^N Monte Carlo integrals.
    pub samples: u64,
    /// Sample count for the 2N-dimensional seminorm integrals.
    pub samples_gagliardo: u64,
    pub truncation: f64,
    pub split: f64,
    pub function: String,
    pub workers: usize,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 3,
            s: 1.25,
            p: 1.6,
            a: 0.25,
            seed: 0x5eed,
            samples: 400_000,
            samples_gagliardo: 1_000_000,
            truncation: 8.0,
            split: 0.5,
            function: "bump".into(),
            workers: 0, // 0 = library default
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn apply_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key=value", line_no + 1))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => self.n = value.parse()?,
                "s" => self.s = value.parse()?,
                "p" => self.p = value.parse()?,
                "a" => self.a = value.parse()?,
                "seed" => self.seed = value.parse()?,
                "samples" => self.samples = value.parse()?,
                "samples_gagliardo" => self.samples_gagliardo = value.parse()?,
                "truncation" => self.truncation = value.parse()?,
                "split" => self.split = value.parse()?,
                "function" => self.function = value.into(),
                "workers" => self.workers = value.parse()?,
                "format" => self.format = OutputFormat::parse(value)?,
                other => bail!("unknown config key `{other}` (line {})", line_no + 1),
            }
        }
        Ok(())
    }

    pub fn apply_env(&mut self) -> anyhow::Result<()> {
        if let Ok(seed) = std::env::var("FRACLAB_SEED") {
            self.seed = seed.parse().context("FRACLAB_SEED must be an integer")?;
        }
        if let Ok(workers) = std::env::var("FRACLAB_WORKERS") {
            self.workers = workers
                .parse()
                .context("FRACLAB_WORKERS must be an integer")?;
        }
        Ok(())
    }

    /// Admissibility gate: every run validates its exponent bundle first.
    pub fn params(&self) -> anyhow::Result<Params> {
        Params::validate(self.n, self.s, self.p, self.a)
            .map_err(|e| anyhow::anyhow!("invalid parameters: {e}"))
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            seed: self.seed,
            sample_count: self.samples,
            truncation_radius: self.truncation,
            singular_split_radius: self.split,
        }
    }

    pub fn mc_gagliardo(&self) -> McConfig {
        McConfig {
            sample_count: self.samples_gagliardo,
            ..self.mc()
        }
    }
}
