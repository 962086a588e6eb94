//! Binary cross-entropy objectives and their margin derivatives.
//!
//! All objectives share one loss family. With `p = sigmoid(z)`:
//!
//! ```text
//! y = 1:  -w * a * (1 - p)^γ * ln p
//! y = 0:  -p^γ * ln(1 - p)
//! ```
//!
//! where `w` is `scale_pos_weight`, `a` the weighted-α factor (1 when off) and
//! `γ` the focal exponent (0 when off). The derivatives are written so that
//! `γ = 0`, `a = 1` and `w = 1` evaluate to the very same floating-point
//! operations as the plain logistic gradient `p - y` and hessian `p (1 - p)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hessians are clamped from below at this value.
pub const HESSIAN_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Objective {
    pub scale_pos_weight: f64,
    pub weighted_alpha: Option<f64>,
    pub focal_gamma: Option<f64>,
}

impl Default for Objective {
    fn default() -> Self {
        Self::logistic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradHess {
    pub grad: f64,
    pub hess: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Objective {
    pub fn logistic() -> Self {
        Self {
            scale_pos_weight: 1.0,
            weighted_alpha: None,
            focal_gamma: None,
        }
    }

    pub fn scaled(w: f64) -> Self {
        Self {
            scale_pos_weight: w,
            ..Self::logistic()
        }
    }

    pub fn weighted(alpha: f64) -> Self {
        Self {
            weighted_alpha: Some(alpha),
            ..Self::logistic()
        }
    }

    pub fn focal(gamma: f64) -> Self {
        Self {
            focal_gamma: Some(gamma),
            ..Self::logistic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_pos_weight.is_finite() && self.scale_pos_weight >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scale_pos_weight must be >= 1, got {}",
                self.scale_pos_weight
            )));
        }
        if let Some(a) = self.weighted_alpha {
            if !(a.is_finite() && a >= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "weighted alpha must be >= 1, got {a}"
                )));
            }
        }
        if let Some(g) = self.focal_gamma {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "focal gamma must be >= 0, got {g}"
                )));
            }
        }
        if self.weighted_alpha.is_some() && self.focal_gamma.is_some() {
            return Err(Error::InvalidParameter(
                "weighted alpha and focal gamma cannot be combined".into(),
            ));
        }
        Ok(())
    }

    fn positive_weight(&self) -> f64 {
        self.scale_pos_weight * self.weighted_alpha.unwrap_or(1.0)
    }

    pub fn loss(&self, label: u8, margin: f64) -> f64 {
        let gamma = self.focal_gamma.unwrap_or(0.0);
        if label != 0 {
            let ln_p = -softplus(-margin);
            let q = 1.0 - sigmoid(margin);
            -self.positive_weight() * q.powf(gamma) * ln_p
        } else {
            let ln_q = -softplus(margin);
            let p = sigmoid(margin);
            -p.powf(gamma) * ln_q
        }
    }

    /// Unclamped first and second derivatives of the loss in the margin.
    pub fn grad_hess_raw(&self, label: u8, margin: f64) -> GradHess {
        let p = sigmoid(margin);
        let q = 1.0 - p;
        let w = self.positive_weight();
        match self.focal_gamma {
            None => {
                if label != 0 {
                    GradHess {
                        grad: w * (p - 1.0),
                        hess: w * (p * q),
                    }
                } else {
                    GradHess {
                        grad: p,
                        hess: p * q,
                    }
                }
            }
            Some(gamma) => {
                if label != 0 {
                    // d/dz [-(1-p)^γ ln p]
                    let ln_p = -softplus(-margin);
                    let qg = q.powf(gamma);
                    let inner = gamma * p * ln_p - q;
                    let grad = qg * inner;
                    let hess = -gamma * p * qg * inner + qg * p * q * (gamma * ln_p + gamma + 1.0);
                    GradHess {
                        grad: w * grad,
                        hess: w * hess,
                    }
                } else {
                    // d/dz [-p^γ ln(1-p)]
                    let ln_q = -softplus(margin);
                    let pg = p.powf(gamma);
                    let inner = p - gamma * q * ln_q;
                    GradHess {
                        grad: pg * inner,
                        hess: gamma * pg * q * inner + pg * p * q * (1.0 + gamma + gamma * ln_q),
                    }
                }
            }
        }
    }

    pub fn grad_hess(&self, label: u8, margin: f64) -> GradHess {
        let gh = self.grad_hess_raw(label, margin);
        GradHess {
            grad: gh.grad,
            hess: gh.hess.max(HESSIAN_FLOOR),
        }
    }

    pub fn tag(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "off".to_string(), |v| format!("{v}"));
        format!(
            "logistic;scale_pos_weight={};weighted_alpha={};focal_gamma={}",
            self.scale_pos_weight,
            opt(self.weighted_alpha),
            opt(self.focal_gamma)
        )
    }

    pub fn parse_tag(tag: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("malformed objective tag {tag:?}"));
        let mut parts = tag.split(';');
        if parts.next() != Some("logistic") {
            return Err(bad());
        }
        let mut obj = Objective::logistic();
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let opt = |v: &str| -> Result<Option<f64>> {
                if v == "off" {
                    Ok(None)
                } else {
                    v.parse().map(Some).map_err(|_| bad())
                }
            };
            match k {
                "scale_pos_weight" => obj.scale_pos_weight = v.parse().map_err(|_| bad())?,
                "weighted_alpha" => obj.weighted_alpha = opt(v)?,
                "focal_gamma" => obj.focal_gamma = opt(v)?,
                _ => return Err(bad()),
            }
        }
        obj.validate()?;
        Ok(obj)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Gradients and hessians for every row, clamped.
pub fn grad_hess(objective: &Objective, labels: &[u8], margins: &[f64]) -> Result<Vec<GradHess>> {
    objective.validate()?;
    if labels.len() != margins.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: margins.len(),
        });
    }
    Ok(labels
        .iter()
        .zip(margins)
        .map(|(&y, &z)| objective.grad_hess(y, z))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_at_zero() {
        let gh = Objective::logistic().grad_hess(1, 0.0);
        assert_eq!((gh.grad, gh.hess), (-0.5, 0.25));
        let gh = Objective::logistic().grad_hess(0, 0.0);
        assert_eq!((gh.grad, gh.hess), (0.5, 0.25));
    }

    #[test]
    fn scale_weight_nineteen_at_zero() {
        let gh = Objective::scaled(19.0).grad_hess(1, 0.0);
        assert_eq!((gh.grad, gh.hess), (-9.5, 4.75));
    }

    #[test]
    fn reductions_are_bit_exact() {
        let plain = Objective::logistic();
        for i in -1200..=1200 {
            let z = i as f64 / 100.0;
            for y in [0u8, 1] {
                let base = plain.grad_hess(y, z);
                for other in [Objective::focal(0.0), Objective::weighted(1.0), Objective::scaled(1.0)] {
                    let gh = other.grad_hess(y, z);
                    assert_eq!(base.grad.to_bits(), gh.grad.to_bits(), "{other} y={y} z={z}");
                    assert_eq!(base.hess.to_bits(), gh.hess.to_bits(), "{other} y={y} z={z}");
                }
            }
        }
    }

    #[test]
    fn extreme_margins_stay_finite() {
        for obj in [Objective::logistic(), Objective::focal(2.0), Objective::weighted(4.0)] {
            for z in [-800.0, -40.0, 40.0, 800.0] {
                for y in [0, 1] {
                    let gh = obj.grad_hess(y, z);
                    assert!(gh.grad.is_finite() && gh.hess >= HESSIAN_FLOOR);
                    assert!(obj.loss(y, z).is_finite());
                }
            }
        }
    }

    #[test]
    fn invalid_combinations() {
        let both = Objective {
            scale_pos_weight: 1.0,
            weighted_alpha: Some(2.0),
            focal_gamma: Some(1.0),
        };
        assert!(both.validate().is_err());
        assert!(Objective::scaled(0.5).validate().is_err());
        assert!(Objective::weighted(0.5).validate().is_err());
        assert!(Objective::focal(-1.0).validate().is_err());
        assert!(grad_hess(&both, &[1], &[0.0]).is_err());
        assert!(grad_hess(&Objective::logistic(), &[1], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn tag_round_trip() {
        for obj in [
            Objective::logistic(),
            Objective::scaled(19.0),
            Objective::weighted(3.0),
            Objective {
                scale_pos_weight: 3.0,
                weighted_alpha: None,
                focal_gamma: Some(2.0),
            },
        ] {
            assert_eq!(Objective::parse_tag(&obj.tag()).unwrap(), obj);
        }
    }
}
