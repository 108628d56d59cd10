//! Empirical certification of decay bounds of the form
//! `|value| <= C * base * exp(-c * heat) * (1 + distance)^{-N}`.
//!
//! `c` is the largest grid value for which `value * exp(c * heat) / base` shows no growth
//! in `heat`; `N` is the largest grid exponent showing no growth in `distance` at that `c`.
//! "No growth" compares the outer half of the coordinate range with the inner half.
//! `C` is then the maximum normalized ratio.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateId {
    /// `(1+|x|)^{n+1} |g(x)| <= C` for the `tau = 1` kernels.
    KernelDecay,
    /// Heat-propagated derivatives of scaling atoms.
    AtomDecayScaling,
    /// Heat-propagated derivatives of detail atoms.
    AtomDecayDetail,
    /// Coupling coefficients of detail products against scaling atoms.
    CouplingDecay,
    /// Detail coefficients of heat trajectories against neighbouring-level data.
    HeatDecayDetail,
    /// Scaling coefficients of heat trajectories against coarser data.
    HeatDecayScaling,
    /// Solution norm of heat trajectories against the critical Besov norm of the data.
    Embedding,
    /// Sup bound on scaling coefficients of heat trajectories.
    LowFrequencyBound,
    /// Solution norm of the bilinear operator against the product of input norms.
    BilinearBound,
}

impl EstimateId {
    pub const ALL: [EstimateId; 9] = [
        Self::KernelDecay,
        Self::AtomDecayScaling,
        Self::AtomDecayDetail,
        Self::CouplingDecay,
        Self::HeatDecayDetail,
        Self::HeatDecayScaling,
        Self::Embedding,
        Self::LowFrequencyBound,
        Self::BilinearBound,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::KernelDecay => "kernel-decay",
            Self::AtomDecayScaling => "atom-decay-scaling",
            Self::AtomDecayDetail => "atom-decay-detail",
            Self::CouplingDecay => "coupling-decay",
            Self::HeatDecayDetail => "heat-decay-detail",
            Self::HeatDecayScaling => "heat-decay-scaling",
            Self::Embedding => "embedding",
            Self::LowFrequencyBound => "low-frequency-bound",
            Self::BilinearBound => "bilinear-bound",
        }
    }

    /// Whether the estimate is a pointwise decay bound handled by [`fit_decay`].
    pub fn is_decay(&self) -> bool {
        !matches!(self, Self::Embedding | Self::LowFrequencyBound | Self::BilinearBound)
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimate id '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecaySample {
    /// Configuration the sample belongs to; noise floors are relative to its peak.
    pub config: usize,
    pub value: f64,
    pub base: f64,
    pub heat: f64,
    pub distance: f64,
    /// Exponent prescribed by the bound itself, overriding the fitted `N`.
    pub fixed_exponent: Option<f64>,
}

impl DecaySample {
    pub fn new(config: usize, value: f64, base: f64) -> Self {
        Self { config, value, base, heat: 0.0, distance: 0.0, fixed_exponent: None }
    }

    pub fn heat(mut self, heat: f64) -> Self {
        self.heat = heat;
        self
    }

    pub fn distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    pub fn fixed_exponent(mut self, exponent: f64) -> Self {
        self.fixed_exponent = Some(exponent);
        self
    }

    fn ratio(&self, c: f64, n_exp: f64) -> f64 {
        let e = self.fixed_exponent.unwrap_or(n_exp);
        self.value * (c * self.heat).exp() * (1.0 + self.distance).powf(e) / self.base
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitShape {
    /// Fit the exponential rate `c`.
    pub fit_c: bool,
    /// Fit the polynomial exponent `N`; otherwise `N = n + 1`.
    pub fit_n: bool,
    /// Relative noise floor: samples below this fraction of their configuration's peak are skipped.
    pub floor: f64,
}

impl FitShape {
    pub const fn new(fit_c: bool, fit_n: bool) -> Self {
        Self { fit_c, fit_n, floor: 1e-11 }
    }
}

/// Logarithmic grid for `c`: 21 points over a decade ending at `(2 pi)^2`.
pub fn c_grid() -> Vec<f64> {
    let top = 4.0 * PI * PI;
    (0..21).map(|k| 0.1 * top * 10f64.powf(k as f64 / 20.0)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub id: EstimateId,
    pub resolution: usize,
    pub constant: f64,
    pub c: Option<f64>,
    pub exponent: f64,
    pub residual_mean: f64,
    pub residual_max: f64,
    pub samples: usize,
    pub skipped: usize,
}

/// `max(outer half) <= max(inner half)`, splitting the coordinate range at its midpoint.
fn no_growth(points: &[(f64, f64)]) -> bool {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if points.iter().any(|p| !p.1.is_finite()) {
        return false;
    }
    if !(hi > lo) {
        return true;
    }
    let split = 0.5 * (lo + hi);
    let lower = points.iter().filter(|p| p.0 <= split).map(|p| p.1).fold(0.0, f64::max);
    let upper = points.iter().filter(|p| p.0 > split).map(|p| p.1).fold(0.0, f64::max);
    upper <= lower * (1.0 + 1e-9)
}

fn kept(samples: &[DecaySample], floor: f64) -> (Vec<DecaySample>, usize) {
    let configs = samples.iter().map(|s| s.config).max().map_or(0, |m| m + 1);
    let mut peak = vec![0.0f64; configs];
    for s in samples {
        peak[s.config] = peak[s.config].max(s.value.abs());
    }
    let keep: Vec<DecaySample> = samples
        .iter()
        .filter(|s| s.value.abs() > floor * peak[s.config] && s.value.abs() > 0.0)
        .copied()
        .collect();
    let skipped = samples.len() - keep.len();
    (keep, skipped)
}

/// Largest normalized ratio at fixed shape parameters.
pub fn constant_at(samples: &[DecaySample], shape: FitShape, c: f64, exponent: f64) -> f64 {
    let (keep, _) = kept(samples, shape.floor);
    keep.iter().map(|s| s.ratio(c, exponent)).fold(0.0, f64::max)
}

pub fn fit_decay(id: EstimateId, samples: &[DecaySample], shape: FitShape, dim: usize, resolution: usize) -> Result<DecayFit> {
    if samples.is_empty() {
        return Err(Error::Precondition(format!("{id}: empty ensemble")));
    }
    if samples.iter().any(|s| !s.value.is_finite() || !(s.base > 0.0) || !s.base.is_finite()) {
        return Err(Error::Certification(format!("{id}: non-finite sample or non-positive bound shape")));
    }
    let (keep, skipped) = kept(samples, shape.floor);
    let base_n = dim as f64 + 1.0;
    if keep.is_empty() {
        return Ok(DecayFit {
            id,
            resolution,
            constant: 0.0,
            c: shape.fit_c.then_some(0.0),
            exponent: base_n,
            residual_mean: 0.0,
            residual_max: 0.0,
            samples: 0,
            skipped,
        });
    }
    let fit_exponent = |c: f64| -> Option<f64> {
        if shape.fit_n {
            (0..6)
                .map(|e| base_n + e as f64)
                .filter(|&n_exp| no_growth(&keep.iter().map(|s| (s.distance, s.ratio(c, n_exp))).collect::<Vec<_>>()))
                .last()
        } else {
            no_growth(&keep.iter().map(|s| (s.distance, s.ratio(c, base_n))).collect::<Vec<_>>()).then_some(base_n)
        }
    };
    let (c, exponent) = if shape.fit_c {
        let passing: Vec<f64> = c_grid()
            .into_iter()
            .filter(|&c| no_growth(&keep.iter().map(|s| (s.heat, s.ratio(c, base_n))).collect::<Vec<_>>()))
            .collect();
        if passing.is_empty() {
            return Err(Error::Certification(format!("{id}: no decay rate on the grid fits")));
        }
        // the largest rate that still admits a distance exponent
        let found = passing.iter().rev().find_map(|&c| fit_exponent(c).map(|e| (Some(c), e)));
        found.ok_or_else(|| Error::Certification(format!("{id}: decay slower than (1+d)^-(n+1)")))?
    } else {
        let e = fit_exponent(0.0).ok_or_else(|| {
            if shape.fit_n {
                Error::Certification(format!("{id}: decay slower than (1+d)^-(n+1)"))
            } else {
                Error::Certification(format!("{id}: normalized ratio grows with distance"))
            }
        })?;
        (None, e)
    };
    let c_val = c.unwrap_or(0.0);
    let ratios: Vec<f64> = keep.iter().map(|s| s.ratio(c_val, exponent)).collect();
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    if !constant.is_finite() {
        return Err(Error::Certification(format!("{id}: no finite constant")));
    }
    let res: Vec<f64> = ratios.iter().map(|r| 1.0 - r / constant).collect();
    Ok(DecayFit {
        id,
        resolution,
        constant,
        c,
        exponent,
        residual_mean: res.iter().sum::<f64>() / res.len() as f64,
        residual_max: res.iter().copied().fold(0.0, f64::max),
        samples: keep.len(),
        skipped,
    })
}
