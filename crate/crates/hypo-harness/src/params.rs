//! Resolved parameters and admissibility flags.

use hypo::basis::Discretization;
use hypo::bismut::{self, build_projectors, BismutAssembly, Sign};
use hypo::potential::Potential;
use hypo::witten::{self, GapCertificate, WittenAssembly};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::Result;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Admissibility {
    /// `C₀b <= hϱ_h`.
    pub c0_b: bool,
    /// `bA⁴C₀ <= hϱ_h`.
    pub b_a4_c0: bool,
    /// `C_s·max(Ab, b, 1/A) <= 1`.
    pub c_s: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParameterSet {
    pub b: f64,
    pub h: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub rho: Option<f64>,
    pub c0: Option<f64>,
    pub c_s: Option<f64>,
    pub k_max: usize,
    pub m_max: usize,
    pub circumference: f64,
    pub seed: u64,
    pub admissibility: Option<Admissibility>,
}

impl ParameterSet {
    /// Parameters without the gap certificate (for experiments that do not need one).
    pub fn partial(cfg: &Config, d: &Discretization) -> Self {
        let p = &cfg.parameters;
        ParameterSet {
            b: p.b.unwrap_or(f64::NAN),
            h: p.h,
            a: p.a.unwrap_or(f64::NAN),
            l: p.l,
            rho: None,
            c0: None,
            c_s: None,
            k_max: d.k_max,
            m_max: d.m_max,
            circumference: d.circumference,
            seed: cfg.seed,
            admissibility: None,
        }
    }

    /// Full resolution: `ϱ_h` from the gap certificate, `b` from `b_factor` when not given,
    /// fitted `C₀`, `C_s` and the admissibility flags.
    pub fn resolve(cfg: &Config, d: &Discretization, v: &Potential) -> Result<(Self, WittenAssembly, GapCertificate)> {
        let p = &cfg.parameters;
        let w = WittenAssembly::new(d, v, p.h)?;
        let gap = witten::gap_certificate(&w, &v.barcode(cfg.experiments.barcode_grid)?)?;
        let b = p.b.unwrap_or(p.b_factor * p.h * gap.rho);
        let asm = BismutAssembly::new(d, v, Sign::Plus, b, p.h)?;
        let gp = build_projectors(d, Sign::Plus);
        let c0 = bismut::fitted_c0(&asm, &gp)?;
        let sub = bismut::subelliptic_report(&asm, 1.0, 0.0, 4, cfg.seed)?;
        let c_s = 1.0 + sub.fitted_constant;
        let a = p.a.unwrap_or(c0);
        let hr = p.h * gap.rho;
        let admissibility = Admissibility {
            c0_b: c0 * b <= hr,
            b_a4_c0: b * a.powi(4) * c0 <= hr,
            c_s: c_s * (a * b).max(b).max(1.0 / a) <= 1.0,
        };
        let ps = ParameterSet {
            b,
            h: p.h,
            a,
            l: p.l,
            rho: Some(gap.rho),
            c0: Some(c0),
            c_s: Some(c_s),
            k_max: d.k_max,
            m_max: d.m_max,
            circumference: d.circumference,
            seed: cfg.seed,
            admissibility: Some(admissibility),
        };
        Ok((ps, w, gap))
    }
}
