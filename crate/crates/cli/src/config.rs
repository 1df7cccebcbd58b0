//! Device configuration files.
//!
//! The format is TOML with four tables: `[system]` (required), `[kerr]`,
//! `[heating]` and `[noise]`. Frequencies in the file are ordinary
//! frequencies in Hz; the accessors hand out angular frequencies.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use optomech::physics::{CavityParams, CouplingParams, MechanicalParams, ThermalEnvironment};
use optomech::{angular, HeatingModel, KerrCavity, NoiseModel, PhysicalConstants, SystemParams};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::Spanned;

/// Bundled parameter set of the reference device.
pub const PAPER_DEVICE: &str = include_str!("../presets/paper_device.toml");

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "OPTOMECH_CONFIG";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Syntax(String),
    #[error("missing required fields: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("line {line}: {field} {message}")]
    Invalid { field: String, line: usize, message: String },
}

/// `[system]`, as written in the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSection {
    pub f_c: f64,
    pub kappa: f64,
    pub f_m: f64,
    pub gamma_m0: f64,
    pub mass: f64,
    /// g/2π, Hz per metre.
    pub g: f64,
    pub t0: f64,
    pub tp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingSection {
    pub enabled: bool,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSection {
    pub imprecision_ref: f64,
    pub p_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub system: SystemSection,
    /// Kerr pull per photon in Hz; `None` selects the 1 µW rule.
    pub kerr_hz: Option<f64>,
    pub heating: HeatingSection,
    pub noise: NoiseSection,
}

type Field = Option<Spanned<f64>>;

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFile {
    system: Option<RawSystem>,
    kerr: Option<RawKerr>,
    heating: Option<RawHeating>,
    noise: Option<RawNoise>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    f_c: Field,
    kappa: Field,
    f_m: Field,
    gamma_m0: Field,
    mass: Field,
    g: Field,
    #[serde(rename = "T_0")]
    t0: Field,
    #[serde(rename = "T_p")]
    tp: Field,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawKerr {
    #[serde(rename = "K")]
    k: Field,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawHeating {
    enabled: Option<bool>,
    alpha: Field,
    beta: Field,
    eta: Field,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    imprecision_ref: Field,
    #[serde(rename = "P_ref")]
    p_ref: Field,
}

enum Bound {
    Positive,
    NonNegative,
}

struct Checker<'a> {
    text: &'a str,
    missing: Vec<String>,
}

impl Checker<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn value(&mut self, name: &str, field: &Field, bound: Bound, default: Option<f64>) -> Result<f64, ConfigError> {
        let Some(spanned) = field else {
            return match default {
                Some(v) => Ok(v),
                None => {
                    self.missing.push(name.to_string());
                    Ok(f64::NAN)
                }
            };
        };
        let v = *spanned.get_ref();
        let ok = v.is_finite()
            && match bound {
                Bound::Positive => v > 0.0,
                Bound::NonNegative => v >= 0.0,
            };
        if ok {
            return Ok(v);
        }
        let message = match bound {
            Bound::Positive => format!("must be positive and finite, got {v}"),
            Bound::NonNegative => format!("must be non-negative and finite, got {v}"),
        };
        Err(ConfigError::Invalid {
            field: name.to_string(),
            line: self.line_of(spanned.span().start),
            message,
        })
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawFile = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string().trim_end().to_string()))?;
        let mut ck = Checker { text, missing: Vec::new() };
        let s = raw.system.unwrap_or_default();
        let system = SystemSection {
            f_c: ck.value("system.f_c", &s.f_c, Bound::Positive, None)?,
            kappa: ck.value("system.kappa", &s.kappa, Bound::Positive, None)?,
            f_m: ck.value("system.f_m", &s.f_m, Bound::Positive, None)?,
            gamma_m0: ck.value("system.gamma_m0", &s.gamma_m0, Bound::Positive, None)?,
            mass: ck.value("system.mass", &s.mass, Bound::Positive, None)?,
            g: ck.value("system.g", &s.g, Bound::NonNegative, None)?,
            t0: ck.value("system.T_0", &s.t0, Bound::NonNegative, None)?,
            tp: ck.value(
                "system.T_p",
                &s.tp,
                Bound::NonNegative,
                Some(ThermalEnvironment::<f64>::DEFAULT_PHOTON_BATH_K),
            )?,
        };
        let k = raw.kerr.unwrap_or_default();
        let kerr_hz = match &k.k {
            Some(_) => Some(ck.value("kerr.K", &k.k, Bound::NonNegative, None)?),
            None => None,
        };
        let h = raw.heating.unwrap_or_default();
        let heating = HeatingSection {
            enabled: h.enabled.unwrap_or(false),
            alpha: ck.value("heating.alpha", &h.alpha, Bound::NonNegative, Some(0.0))?,
            beta: ck.value("heating.beta", &h.beta, Bound::Positive, Some(1.0))?,
            eta: ck.value("heating.eta", &h.eta, Bound::NonNegative, Some(0.0))?,
        };
        let defaults = NoiseModel::default();
        let n = raw.noise.unwrap_or_default();
        let noise = NoiseSection {
            imprecision_ref: ck.value(
                "noise.imprecision_ref",
                &n.imprecision_ref,
                Bound::Positive,
                Some(defaults.imprecision_ref),
            )?,
            p_ref: ck.value("noise.P_ref", &n.p_ref, Bound::Positive, Some(defaults.p_ref))?,
        };
        if !ck.missing.is_empty() {
            return Err(ConfigError::Missing(ck.missing));
        }
        if system.kappa >= system.f_c {
            let line = s.kappa.as_ref().map_or(1, |v| ck.line_of(v.span().start));
            return Err(ConfigError::Invalid {
                field: "system.kappa".into(),
                line,
                message: format!("must be below f_c = {} Hz, got {}", system.f_c, system.kappa),
            });
        }
        Ok(Self {
            system,
            kerr_hz,
            heating,
            noise,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn paper_device() -> Self {
        Self::parse(PAPER_DEVICE).expect("bundled preset is valid")
    }

    /// Device parameters in angular units.
    pub fn params(&self) -> SystemParams {
        let s = &self.system;
        SystemParams::new(
            CavityParams {
                omega_c: angular(s.f_c),
                kappa: angular(s.kappa),
            },
            MechanicalParams {
                omega_m: angular(s.f_m),
                gamma_m0: angular(s.gamma_m0),
                mass: s.mass,
            },
            CouplingParams { g: angular(s.g) },
            ThermalEnvironment { t0: s.t0, tp: s.tp },
        )
    }

    pub fn kerr(&self) -> KerrCavity {
        let cavity = self.params().cavity;
        match self.kerr_hz {
            Some(k) => KerrCavity { k: angular(k), base: cavity },
            None => KerrCavity::default_for(cavity, &PhysicalConstants::si()),
        }
    }

    pub fn heating(&self) -> HeatingModel {
        let h = &self.heating;
        HeatingModel {
            alpha: h.alpha,
            beta: h.beta,
            eta: h.eta,
            enabled: h.enabled,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            imprecision_ref: self.noise.imprecision_ref,
            p_ref: self.noise.p_ref,
        }
    }

    /// Canonical `key = value` listing of every setting, defaults included.
    pub fn canonical(&self) -> BTreeMap<&'static str, String> {
        let s = &self.system;
        let h = &self.heating;
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("system.f_c", s.f_c),
            ("system.kappa", s.kappa),
            ("system.f_m", s.f_m),
            ("system.gamma_m0", s.gamma_m0),
            ("system.mass", s.mass),
            ("system.g", s.g),
            ("system.T_0", s.t0),
            ("system.T_p", s.tp),
            ("heating.alpha", h.alpha),
            ("heating.beta", h.beta),
            ("heating.eta", h.eta),
            ("noise.imprecision_ref", self.noise.imprecision_ref),
            ("noise.P_ref", self.noise.p_ref),
        ] {
            m.insert(k, format!("{v:e}"));
        }
        m.insert("heating.enabled", h.enabled.to_string());
        m.insert(
            "kerr.K",
            self.kerr_hz.map_or_else(|| "default".to_string(), |k| format!("{k:e}")),
        );
        m
    }

    /// SHA-256 of the canonical listing; independent of field order,
    /// comments and number spelling in the source file.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.canonical() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        format!("{:x}", h.finalize())
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.canonical() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Where the configuration came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigSource {
    File(String),
    Preset,
}

impl fmt::Display for ConfigSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigSource::File(p) => f.write_str(p),
            ConfigSource::Preset => f.write_str("preset:paper_device"),
        }
    }
}

/// Explicit path, else the path in [`CONFIG_ENV`], else the bundled preset.
pub fn resolve(explicit: Option<&Path>) -> Result<(Config, ConfigSource), ConfigError> {
    let path = explicit
        .map(|p| p.to_path_buf())
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(Into::into));
    match path {
        Some(p) => Ok((Config::load(&p)?, ConfigSource::File(p.display().to_string()))),
        None => Ok((Config::paper_device(), ConfigSource::Preset)),
    }
}
