//! TOML experiment configuration.

use std::f64::consts::PI;
use std::path::Path;

use hypo::basis::Discretization;
use hypo::bismut::Sign;
use hypo::potential::Potential;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Fast,
    Full,
}

impl Profile {
    /// `(K, M)` of the profile.
    pub fn cutoffs(self) -> (usize, usize) {
        match self {
            Profile::Fast => (12, 16),
            Profile::Full => (24, 32),
        }
    }
}

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialCfg {
    #[serde(default = "two_pi")]
    pub circumference: f64,
    /// Coefficient of `cos(jωq)` at index `j`.
    #[serde(default, rename = "cos_coeffs")]
    pub cos: Vec<f64>,
    #[serde(default, rename = "sin_coeffs")]
    pub sin: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationCfg {
    #[serde(rename = "K")]
    pub k_max: Option<usize>,
    #[serde(rename = "M")]
    pub m_max: Option<usize>,
    #[serde(rename = "C_g", default = "one")]
    pub c_g: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for DiscretizationCfg {
    fn default() -> Self {
        DiscretizationCfg { k_max: None, m_max: None, c_g: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignChoice {
    Plus,
    Minus,
    Both,
}

impl SignChoice {
    pub fn signs(self) -> Vec<Sign> {
        match self {
            SignChoice::Plus => vec![Sign::Plus],
            SignChoice::Minus => vec![Sign::Minus],
            SignChoice::Both => vec![Sign::Plus, Sign::Minus],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersCfg {
    pub h: f64,
    /// Explicit friction parameter; otherwise `b = b_factor·h·ϱ_h`.
    pub b: Option<f64>,
    #[serde(default = "b_factor")]
    pub b_factor: f64,
    /// Truncation level; defaults to the fitted `C₀`.
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "L", default = "one")]
    pub l: f64,
    #[serde(default = "kappa")]
    pub kappa: f64,
    #[serde(default = "both")]
    pub sign: SignChoice,
}

fn b_factor() -> f64 {
    0.02
}

fn kappa() -> f64 {
    0.15
}

fn both() -> SignChoice {
    SignChoice::Both
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentsCfg {
    pub identity_h: Vec<f64>,
    pub grushin_b: Vec<f64>,
    pub grushin_h: f64,
    pub region_b_divisors: Vec<f64>,
    pub region_a: Vec<f64>,
    pub semigroup_cutoffs: [usize; 2],
    /// Semiclassical parameter of the small semigroup instance; defaults to `parameters.h`.
    pub semigroup_h: Option<f64>,
    pub semigroup_times: Vec<f64>,
    pub scaling_b: f64,
    pub scaling_cutoffs: [usize; 2],
    pub contour_quad: usize,
    pub barcode_grid: usize,
}

impl Default for ExperimentsCfg {
    fn default() -> Self {
        ExperimentsCfg {
            identity_h: vec![1.0, 0.5, 0.25],
            grushin_b: vec![1.0, 0.5, 0.25, 0.125],
            grushin_h: 0.5,
            region_b_divisors: vec![20.0, 40.0, 80.0],
            region_a: vec![2.0, 3.0, 4.0],
            semigroup_cutoffs: [10, 8],
            semigroup_h: None,
            semigroup_times: vec![1.0, 5.0, 25.0],
            scaling_b: 0.3,
            scaling_cutoffs: [10, 12],
            contour_quad: 128,
            barcode_grid: 4096,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub potential: PotentialCfg,
    #[serde(default)]
    pub discretization: DiscretizationCfg,
    pub parameters: ParametersCfg,
    #[serde(default)]
    pub experiments: ExperimentsCfg,
    #[serde(default)]
    pub seed: u64,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Config = toml::from_str(text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::ConfigInvalid(m.into()));
        if !(self.potential.circumference > 0.0) {
            return bad("potential.circumference must be positive");
        }
        if self.potential.cos.iter().chain(&self.potential.sin).any(|x| !x.is_finite()) {
            return bad("potential coefficients must be finite");
        }
        let p = &self.parameters;
        if !(p.h > 0.0 && p.h <= 1.0) {
            return bad("parameters.h must lie in (0, 1]");
        }
        if let Some(b) = p.b {
            if !(b > 0.0) {
                return bad("parameters.b must be positive");
            }
        }
        if !(p.b_factor > 0.0) || !(p.l > 0.0) || !(p.kappa > 0.0) {
            return bad("b_factor, L and kappa must be positive");
        }
        if let Some(a) = p.a {
            if !(a > 0.0) {
                return bad("parameters.A must be positive");
            }
        }
        if self.discretization.c_g < 1.0 {
            return bad("discretization.c_g must be at least 1");
        }
        Ok(())
    }

    pub fn potential(&self) -> Potential {
        Potential::new(self.potential.circumference, self.potential.cos.clone(), self.potential.sin.clone())
    }

    /// Cutoffs from the config, falling back to the profile.
    pub fn discretization(&self, profile: Profile) -> Discretization {
        let (k, m) = profile.cutoffs();
        let mut d = Discretization::new(
            self.discretization.k_max.unwrap_or(k),
            self.discretization.m_max.unwrap_or(m),
            self.potential.circumference,
        );
        d.c_g = self.discretization.c_g;
        d
    }

    /// Applies one sweep value to the named axis.
    pub fn with_axis(&self, axis: Axis, value: f64) -> Result<Self, HarnessError> {
        let mut c = self.clone();
        match axis {
            Axis::B => c.parameters.b = Some(value),
            Axis::H => c.parameters.h = value,
            Axis::A => c.parameters.a = Some(value),
            Axis::K => c.discretization.k_max = Some(value as usize),
            Axis::M => c.discretization.m_max = Some(value as usize),
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Axis {
    #[value(name = "b")]
    #[serde(rename = "b")]
    B,
    #[value(name = "h")]
    #[serde(rename = "h")]
    H,
    #[value(name = "A")]
    #[serde(rename = "A")]
    A,
    #[value(name = "K")]
    #[serde(rename = "K")]
    K,
    #[value(name = "M")]
    #[serde(rename = "M")]
    M,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::B => "b",
            Axis::H => "h",
            Axis::A => "A",
            Axis::K => "K",
            Axis::M => "M",
        }
    }
}
