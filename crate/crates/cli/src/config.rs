use std::path::{Path, PathBuf};

use metastab::convexity::ModulusDesc;
use metastab::num::nat_serde;
use metastab::oracle::SequenceDesc;
use metastab::picard::{MuProfileDesc, ScenarioDesc};
use metastab::{CounterDesc, Nat, PosRational};
use serde::{Deserialize, Serialize};

/// Which family of bounds a run checks, with the family's parameters.
/// `K`, `r`, the modulus and the μ profile default to a scenario's own
/// certificate, `ℓ_p` modulus and profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateSpec {
    Monotone {
        #[serde(rename = "K")]
        k: PosRational,
    },
    /// The rate of metastability obtained from `Γ(…, N) = N + gamma_offset`.
    FromGamma {
        #[serde(rename = "K")]
        k: PosRational,
        #[serde(default = "zero", with = "nat_serde")]
        gamma_offset: Nat,
    },
    Omega {
        #[serde(default, rename = "K")]
        k: Option<PosRational>,
        #[serde(default)]
        r: Option<PosRational>,
        #[serde(default)]
        modulus: Option<ModulusDesc>,
        #[serde(default = "zero", with = "nat_serde")]
        gamma_offset: Nat,
    },
    NonexpansiveOmega {
        #[serde(default, rename = "K")]
        k: Option<PosRational>,
        #[serde(default)]
        r: Option<PosRational>,
        #[serde(default)]
        modulus: Option<ModulusDesc>,
    },
    OmegaDecreasingMu {
        #[serde(default, rename = "K")]
        k: Option<PosRational>,
        #[serde(default)]
        r: Option<PosRational>,
        #[serde(default)]
        modulus: Option<ModulusDesc>,
        #[serde(default)]
        mu: Option<MuProfileDesc>,
    },
    LpAsymptoticRegularity {
        #[serde(default)]
        p: Option<u32>,
        #[serde(default, rename = "K")]
        k: Option<PosRational>,
        #[serde(default)]
        r: Option<PosRational>,
        #[serde(default = "default_window")]
        window: u64,
    },
    /// `Φ ≡ value`, for negative controls.
    Constant {
        #[serde(with = "nat_serde")]
        value: Nat,
    },
}

fn zero() -> Nat {
    Nat::from(0u32)
}

fn default_window() -> u64 {
    10_000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_orbit_cap")]
    pub orbit: u64,
    #[serde(default = "default_scan_cap")]
    pub scan: u64,
}

fn default_orbit_cap() -> u64 {
    metastab::picard::DEFAULT_ORBIT_CAP
}

fn default_scan_cap() -> u64 {
    1_000_000
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            orbit: default_orbit_cap(),
            scan: default_scan_cap(),
        }
    }
}

/// A counterfunction in a config: either a compact string (`const:1`,
/// `affine:2,3`, `id`, `succ`, `quadratic`) or a JSON descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GSpec {
    Short(String),
    Desc(CounterDesc),
}

impl GSpec {
    pub fn resolve(&self) -> metastab::Result<CounterDesc> {
        match self {
            GSpec::Short(s) => CounterDesc::parse_short(s),
            GSpec::Desc(d) => Ok(d.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub rate: RateSpec,
    #[serde(default)]
    pub scenarios: Vec<ScenarioDesc>,
    #[serde(default)]
    pub sequences: Vec<SequenceDesc>,
    pub epsilons: Vec<PosRational>,
    #[serde(default)]
    pub g: Vec<GSpec>,
    #[serde(default)]
    pub caps: Caps,
    /// Seed for certificate spot checks.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_certificate_samples")]
    pub certificate_samples: u64,
    /// Report directory, relative to the config file unless absolute.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_certificate_samples() -> u64 {
    256
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Schema {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_json(&text).map_err(|source| ConfigError::Schema {
            path: path.to_owned(),
            source,
        })?;
        if let Some(out) = &cfg.output {
            if out.is_relative() {
                cfg.output = Some(path.parent().unwrap_or(Path::new(".")).join(out));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks caps, the ε grid and every `g` preset.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.caps.orbit == 0 || self.caps.scan == 0 {
            return bad("caps must be positive".into());
        }
        if let Some(e) = self.epsilons.iter().find(|e| e.is_zero()) {
            return bad(format!("ε = {e} must be positive"));
        }
        let regularity = matches!(self.rate, RateSpec::LpAsymptoticRegularity { .. });
        if !regularity && self.g.is_empty() && !(self.scenarios.is_empty() && self.sequences.is_empty()) {
            return bad("at least one g preset is required".into());
        }
        for g in &self.g {
            if let Err(e) = g.resolve() {
                return bad(format!("unresolvable g preset {g:?}: {e}"));
            }
        }
        if regularity && !self.sequences.is_empty() {
            return bad("lp-asymptotic-regularity needs scenarios, not sequences".into());
        }
        Ok(())
    }

    pub fn g_presets(&self) -> Vec<CounterDesc> {
        self.g.iter().map(|g| g.resolve().expect("validated")).collect()
    }
}
