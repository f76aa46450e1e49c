use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quasi-hyperbolic discount parameters `(sigma, gamma)`.
///
/// The weight on the reward at step `t` is `1` for `t = 0` and `sigma * gamma^t`
/// afterwards. `sigma = 1` is ordinary exponential discounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscount", into = "RawDiscount")]
pub struct DiscountParams {
    sigma: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDiscount {
    sigma: f64,
    gamma: f64,
}

impl TryFrom<RawDiscount> for DiscountParams {
    type Error = Error;
    fn try_from(raw: RawDiscount) -> Result<Self> {
        DiscountParams::new(raw.sigma, raw.gamma)
    }
}

impl From<DiscountParams> for RawDiscount {
    fn from(p: DiscountParams) -> Self {
        RawDiscount {
            sigma: p.sigma,
            gamma: p.gamma,
        }
    }
}

impl DiscountParams {
    pub fn new(sigma: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(Error::InvalidDiscount(format!(
                "sigma must lie in [0, 1], got {sigma}"
            )));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidDiscount(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        Ok(Self { sigma, gamma })
    }

    /// Exponential discounting with factor `gamma`.
    pub fn exponential(gamma: f64) -> Result<Self> {
        Self::new(1.0, gamma)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Same `gamma`, present bias removed.
    pub fn to_exponential(self) -> Self {
        Self {
            sigma: 1.0,
            gamma: self.gamma,
        }
    }

    /// Weight `d(t)` applied to the reward received `t` steps from now.
    pub fn weight(&self, t: u32) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.sigma * self.gamma.powi(t as i32)
        }
    }
}

/// Free-function form of [`DiscountParams::weight`].
pub fn qh_weight(params: &DiscountParams, t: u32) -> f64 {
    params.weight(t)
}
