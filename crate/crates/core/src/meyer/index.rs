//! Time-adapted index sets: one scaling band at the level matched to `t`, all finer details.

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest integer `j` with `4^j t >= 1`, so that `1 <= 4^j t < 4`.
pub fn time_level(t: f64) -> Result<i64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be positive and finite, got {t}")));
    }
    let mut j = (-t.log2() / 2.0).ceil() as i64;
    while 4f64.powi(j as i32 - 1) * t >= 1.0 {
        j -= 1;
    }
    while 4f64.powi(j as i32) * t < 1.0 {
        j += 1;
    }
    Ok(j)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterIndexSet {
    t: f64,
    /// Unclamped level from the definition, before the cut offset.
    raw_level: i64,
    cut_offset: i64,
    j_t: u32,
    j_max: u32,
    warning: Option<String>,
}

impl ParameterIndexSet {
    pub fn new(t: f64, j_max: u32) -> Result<Self> {
        Self::with_cut_offset(t, j_max, 0)
    }

    /// Places the scaling band at `time_level(t) + cut_offset`, clamped to `[0, j_max]`.
    pub fn with_cut_offset(t: f64, j_max: u32, cut_offset: i64) -> Result<Self> {
        let raw_level = time_level(t)?;
        let wanted = raw_level + cut_offset;
        let clamped = wanted.clamp(0, j_max as i64);
        let warning = (clamped != wanted).then(|| {
            format!("scaling level {wanted} for t = {t} clamped to {clamped} on the torus")
        });
        Ok(Self { t, raw_level, cut_offset, j_t: clamped as u32, j_max, warning })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn raw_level(&self) -> i64 {
        self.raw_level
    }

    pub fn cut_offset(&self) -> i64 {
        self.cut_offset
    }

    pub fn j_t(&self) -> u32 {
        self.j_t
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// Membership in the scaling part: `eps = 0` at level `j_t`.
    pub fn in_scaling_part(&self, eps: u8, j: u32) -> bool {
        eps == 0 && j == self.j_t
    }

    /// Membership in the detail part: `eps != 0` and `j_t <= j <= j_max`.
    pub fn in_detail_part(&self, eps: u8, j: u32) -> bool {
        eps != 0 && (self.j_t..=self.j_max).contains(&j)
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        self.j_t..=self.j_max
    }
}
