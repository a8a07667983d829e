//! JSON run configurations. Unknown keys are rejected everywhere.

use std::path::Path;

use qillum_core::params::MAX_DOF;
use qillum_core::OpaParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

/// A real-valued sweep axis: one value, an explicit list, or a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Scalar(f64),
    List(Vec<f64>),
    Range(RangeSpec),
}

impl Grid {
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let values = match self {
            Grid::Scalar(v) => vec![*v],
            Grid::List(v) => v.clone(),
            Grid::Range(r) => range_values(r, name)?,
        };
        if values.is_empty() {
            return Err(CliError::Config(format!("{name}: grid is empty")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("{name}: non-finite value {v}")));
        }
        Ok(values)
    }

    /// Grid of positive integer counts. Range points are rounded; explicit
    /// values must already be integers.
    pub fn counts(&self, name: &str) -> Result<Vec<u64>> {
        let rounded = matches!(self, Grid::Range(_));
        self.values(name)?
            .into_iter()
            .map(|v| {
                let r = v.round();
                if (!rounded && r != v) || r < 1.0 || r > u64::MAX as f64 {
                    Err(CliError::Config(format!("{name}: {v} is not a positive integer")))
                } else {
                    Ok(r as u64)
                }
            })
            .collect()
    }
}

fn range_values(r: &RangeSpec, name: &str) -> Result<Vec<f64>> {
    if r.points == 0 {
        return Err(CliError::Config(format!("{name}: range needs at least one point")));
    }
    if !r.start.is_finite() || !r.stop.is_finite() {
        return Err(CliError::Config(format!("{name}: range bounds must be finite")));
    }
    if r.points == 1 {
        return Ok(vec![r.start]);
    }
    let last = (r.points - 1) as f64;
    match r.scale {
        Scale::Linear => Ok((0..r.points)
            .map(|i| r.start + (r.stop - r.start) * i as f64 / last)
            .collect()),
        Scale::Log => {
            if r.start <= 0.0 || r.stop <= 0.0 {
                return Err(CliError::Config(format!("{name}: log range needs positive bounds")));
            }
            let (a, b) = (r.start.log10(), r.stop.log10());
            Ok((0..r.points)
                .map(|i| match i {
                    0 => r.start,
                    i if i == r.points - 1 => r.stop,
                    i => 10f64.powf(a + (b - a) * i as f64 / last),
                })
                .collect())
        }
    }
}

fn default_tol() -> f64 {
    qillum_core::chernoff::DEFAULT_TOL
}

fn one_count() -> Grid {
    Grid::Scalar(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Closed,
    Numeric,
    #[default]
    Both,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Numeric => "numeric",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernoffConfig {
    #[serde(rename = "M")]
    pub modes: Grid,
    /// Internal dimensions; mutually exclusive with `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Grid>,
    pub kappa: Grid,
    #[serde(rename = "N_B")]
    pub n_b: Grid,
    #[serde(default)]
    pub method: Method,
    /// Shot count for the exponent columns.
    #[serde(rename = "N", default = "one_count")]
    pub n: Grid,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl ChernoffConfig {
    /// Internal dimensions from `d` or `f`.
    pub fn internal_dims(&self) -> Result<Vec<usize>> {
        match (&self.d, &self.f) {
            (Some(_), Some(_)) => Err(CliError::Config("give either d or f, not both".into())),
            (None, None) => Err(CliError::Config("missing d (or f)".into())),
            (Some(d), None) => d
                .counts("d")?
                .into_iter()
                .map(|d| {
                    if d.is_power_of_two() && d <= 1 << MAX_DOF {
                        Ok(d as usize)
                    } else {
                        Err(CliError::Config(format!("d = {d} is not a power of two up to 2^{MAX_DOF}")))
                    }
                })
                .collect(),
            (None, Some(f)) => f
                .values("f")?
                .into_iter()
                .map(|f| {
                    if f.fract() != 0.0 || !(0.0..=MAX_DOF as f64).contains(&f) {
                        Err(CliError::Config(format!("f = {f} must be an integer in 0..={MAX_DOF}")))
                    } else {
                        Ok(1usize << f as u32)
                    }
                })
                .collect(),
        }
    }

    pub fn shots(&self) -> Result<u64> {
        match self.n.counts("N")?.as_slice() {
            [n] => Ok(*n),
            _ => Err(CliError::Config("N must be a single shot count".into())),
        }
    }
}

/// Amplifiers from a gain grid given either as `G` or as
/// `epsilon_sq = G - 1`; the default gain when neither is set.
pub fn amplifiers(gain: &Option<Grid>, epsilon_sq: &Option<Grid>) -> Result<Vec<OpaParams>> {
    match (gain, epsilon_sq) {
        (Some(_), Some(_)) => Err(CliError::Config("give either G or epsilon_sq, not both".into())),
        (None, None) => Ok(vec![OpaParams::default()]),
        (Some(g), None) => g
            .values("G")?
            .into_iter()
            .map(|g| OpaParams::from_gain(g).map_err(CliError::from))
            .collect(),
        (None, Some(e)) => e
            .values("epsilon_sq")?
            .into_iter()
            .map(|e| OpaParams::from_epsilon_sq(e).map_err(CliError::from))
            .collect(),
    }
}

fn fig_n_s() -> f64 {
    0.01
}

fn fig_kappa() -> f64 {
    0.01
}

fn fig_n_b() -> f64 {
    20.0
}

fn fig_n_grid() -> Grid {
    Grid::Range(RangeSpec {
        start: 1e3,
        stop: 1e7,
        points: 40,
        scale: Scale::Log,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Config {
    #[serde(rename = "N_S", default = "fig_n_s")]
    pub n_s: f64,
    #[serde(default = "fig_kappa")]
    pub kappa: f64,
    #[serde(rename = "N_B", default = "fig_n_b")]
    pub n_b: f64,
    /// Gain as `G`, or as `epsilon_sq = G - 1` (default 0.005).
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_sq: Option<f64>,
    #[serde(rename = "N", default = "fig_n_grid")]
    pub n: Grid,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self {
            n_s: fig_n_s(),
            kappa: fig_kappa(),
            n_b: fig_n_b(),
            gain: None,
            epsilon_sq: None,
            n: fig_n_grid(),
        }
    }
}

impl Figure1Config {
    pub fn amplifier(&self) -> Result<OpaParams> {
        match (self.gain, self.epsilon_sq) {
            (Some(_), Some(_)) => Err(CliError::Config("give either G or epsilon_sq, not both".into())),
            (Some(g), None) => Ok(OpaParams::from_gain(g)?),
            (None, Some(e)) => Ok(OpaParams::from_epsilon_sq(e)?),
            (None, None) => Ok(OpaParams::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum McModel {
    #[default]
    HyperOpa,
    LoneOpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisChoice {
    Present,
    Absent,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default)]
    pub model: McModel,
    #[serde(rename = "N_S")]
    pub n_s: Grid,
    pub kappa: Grid,
    #[serde(rename = "N_B")]
    pub n_b: Grid,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_sq: Option<Grid>,
    #[serde(rename = "N")]
    pub n: Grid,
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub hypothesis: HypothesisChoice,
}

fn default_n_max() -> u32 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationsConfig {
    #[serde(rename = "N_S_prime")]
    pub n_s_prime: Grid,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Hyper,
    Lone,
}

fn both_variants() -> Vec<VariantChoice> {
    vec![VariantChoice::Hyper, VariantChoice::Lone]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpaConfig {
    #[serde(default = "both_variants")]
    pub variants: Vec<VariantChoice>,
    #[serde(rename = "N_S")]
    pub n_s: Grid,
    pub kappa: Grid,
    #[serde(rename = "N_B")]
    pub n_b: Grid,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_sq: Option<Grid>,
    #[serde(rename = "N", default = "one_count")]
    pub n: Grid,
}

fn one_cycle() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfSfgConfig {
    #[serde(rename = "N_S")]
    pub n_s: Grid,
    pub kappa: Grid,
    #[serde(rename = "N_B")]
    pub n_b: Grid,
    #[serde(rename = "N", default = "one_count")]
    pub n: Grid,
    /// Feed-forward cycles; recorded only, the exponents assume many.
    #[serde(rename = "K", default = "one_cycle")]
    pub cycles: u32,
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
    parse(&text)
}
