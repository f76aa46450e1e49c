use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Robbins-Monro step sizes `alpha_n = scale / (n + offset)^power`.
///
/// Requires `offset >= 1`, `power` in `(0.5, 1]` and `0 < scale <= offset^power`,
/// so `alpha_0 <= 1`, `sum alpha_n` diverges and `sum alpha_n^2` converges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct StepSizeSchedule {
    scale: f64,
    offset: f64,
    power: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    #[serde(default = "one")]
    scale: f64,
    #[serde(default = "one")]
    offset: f64,
    power: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawSchedule> for StepSizeSchedule {
    type Error = Error;
    fn try_from(r: RawSchedule) -> Result<Self> {
        StepSizeSchedule::new(r.scale, r.offset, r.power)
    }
}

impl From<StepSizeSchedule> for RawSchedule {
    fn from(s: StepSizeSchedule) -> Self {
        RawSchedule {
            scale: s.scale,
            offset: s.offset,
            power: s.power,
        }
    }
}

impl Default for StepSizeSchedule {
    /// `alpha_n = 1 / (n + 1)^0.7`.
    fn default() -> Self {
        Self {
            scale: 1.0,
            offset: 1.0,
            power: 0.7,
        }
    }
}

impl StepSizeSchedule {
    pub fn new(scale: f64, offset: f64, power: f64) -> Result<Self> {
        if !(power > 0.5 && power <= 1.0) {
            return Err(Error::InvalidSchedule(format!("power must lie in (0.5, 1], got {power}")));
        }
        if !(offset.is_finite() && offset >= 1.0) {
            return Err(Error::InvalidSchedule(format!("offset must be >= 1, got {offset}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidSchedule(format!("scale must be positive, got {scale}")));
        }
        if scale > offset.powf(power) {
            return Err(Error::InvalidSchedule(format!(
                "initial step {} exceeds 1",
                scale / offset.powf(power)
            )));
        }
        Ok(Self { scale, offset, power })
    }

    /// `1 / (n + 1)^power`.
    pub fn polynomial(power: f64) -> Result<Self> {
        Self::new(1.0, 1.0, power)
    }

    pub fn alpha(&self, n: u64) -> f64 {
        self.scale / (n as f64 + self.offset).powf(self.power)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}
