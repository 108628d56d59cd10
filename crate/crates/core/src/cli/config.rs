//! Flat TOML run configuration layered over the bundled defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::EstimateId;
use crate::meyer::{ramp_by_name, MeyerWindow};
use crate::solver::{Preset, SolverConfig};
use crate::spectral::FrequencyLattice;

pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

/// Smallest lattice the commands accept.
pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub resolution: usize,
    pub p: f64,
    pub m: f64,
    pub ramp: String,
    pub seed: u64,
    pub out: PathBuf,
    pub shell_lo: u32,
    pub shell_hi: i64,
    pub estimates: Vec<String>,
    pub configs: usize,
    pub grid: usize,
    pub ensemble: usize,
    pub pairs: usize,
    pub experiment_samples: usize,
    pub preset: String,
    pub scale: f64,
    pub lambda: u32,
    pub samples_per_shell: usize,
    pub extra_shells: u32,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub smallness: f64,
    pub allow_m_below_one: bool,
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Config(format!("{origin}: {e}")))
}

impl RunConfig {
    /// The bundled defaults.
    pub fn defaults() -> Self {
        Self::from_layers(None).expect("bundled defaults parse")
    }

    /// Defaults overridden by the keys in `text`; errors name the file and line.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        Self::from_layers(Some((text, origin)))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    fn from_layers(user: Option<(&str, &str)>) -> Result<Self> {
        let mut table = parse_table(DEFAULT_CONFIG, "default config")?;
        if let Some((text, origin)) = user {
            for (key, value) in parse_table(text, origin)? {
                let line = line_of(text, &key).map_or(String::new(), |l| format!(", line {}", l + 1));
                let Some(slot) = table.get_mut(&key) else {
                    return Err(Error::Config(format!("{origin}{line}: unknown key `{key}`")));
                };
                let default_kind = slot.type_str();
                let numeric = |v: &toml::Value| matches!(v, toml::Value::Integer(_) | toml::Value::Float(_));
                let value = match (&*slot, value) {
                    (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
                    (d, v) if d.type_str() == v.type_str() || (numeric(d) && numeric(&v)) => v,
                    (_, v) => {
                        return Err(Error::Config(format!(
                            "{origin}{line}: `{key}` expects {default_kind}, found {}",
                            v.type_str()
                        )))
                    }
                };
                *slot = value;
            }
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e| Error::Config(format!("config: {e}")))?;
        Ok(cfg)
    }

    /// Checks every field; the solver and suites check their own preconditions again.
    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dimension) {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {}", self.dimension)));
        }
        if self.resolution < MIN_RESOLUTION || !self.resolution.is_power_of_two() {
            return Err(Error::Config(format!(
                "resolution must be a power of two >= {MIN_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::Config(format!("p must be finite and >= 1, got {}", self.p)));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("m must be positive, got {}", self.m)));
        }
        self.window()?;
        for id in &self.estimates {
            id.parse::<EstimateId>()?;
        }
        self.preset.parse::<Preset>()?;
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Config(format!("scale must be positive, got {}", self.scale)));
        }
        if ![0, 2, 4].contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must be 0, 2 or 4, got {}", self.lambda)));
        }
        if self.shell_hi >= 0 && (self.shell_hi as u32) < self.shell_lo {
            return Err(Error::Config(format!("empty shell range {}..={}", self.shell_lo, self.shell_hi)));
        }
        if self.configs == 0 || self.ensemble == 0 {
            return Err(Error::Config("ensembles must be non-empty".into()));
        }
        if self.experiment_samples < 4 {
            return Err(Error::Config("experiment_samples must be at least 4".into()));
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<FrequencyLattice> {
        FrequencyLattice::new(self.dimension, self.resolution)
    }

    pub fn window(&self) -> Result<MeyerWindow> {
        let ramp = ramp_by_name(&self.ramp)
            .ok_or_else(|| Error::Config(format!("unknown ramp {:?} (expected polynomial, smoothstep or quadratic)", self.ramp)))?;
        MeyerWindow::new(ramp)
    }

    /// Shell range on a lattice whose finest atom level is `j_max`.
    pub fn shells(&self, j_max: u32) -> (u32, u32) {
        let hi = if self.shell_hi < 0 { j_max } else { (self.shell_hi as u32).min(j_max) };
        (self.shell_lo.min(hi), hi)
    }

    pub fn estimate_ids(&self) -> Result<Vec<EstimateId>> {
        if self.estimates.is_empty() {
            return Ok(EstimateId::ALL.to_vec());
        }
        let mut ids = self.estimates.iter().map(|s| s.parse()).collect::<Result<Vec<EstimateId>>>()?;
        ids.sort();
        ids.dedup();
        Ok(ids)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            p: self.p,
            m: self.m,
            shells: (self.shell_lo, if self.shell_hi < 0 { u32::MAX } else { self.shell_hi as u32 }),
            samples_per_shell: self.samples_per_shell,
            extra_shells: self.extra_shells,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            smallness: self.smallness,
            allow_m_below_one: self.allow_m_below_one,
        }
    }
}
