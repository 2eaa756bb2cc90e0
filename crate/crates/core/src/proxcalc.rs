//! Losses, regularizers, their conjugates and proximal maps.
//!
//! Norm losses have indicator conjugates: `||.||_2` pairs with the unit l2
//! ball and `||.||_1` with the unit l-infinity ball. The conjugate value is
//! `+inf` outside the ball.

use serde::{Deserialize, Serialize};

/// Slack on the dual-ball test in [`conjugate_value`], so that rounded unit
/// vectors such as `v / ||v||` count as feasible.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossSpec {
    /// `0.5 * ||v||_2^2`
    #[serde(rename = "half_sq_l2")]
    HalfSquaredL2,
    /// `||v||_2`
    #[serde(rename = "l2")]
    L2Norm,
    /// `||v||_1`
    #[serde(rename = "l1")]
    L1Norm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegularizerKind {
    #[serde(rename = "zero")]
    Zero,
    #[serde(rename = "l1")]
    L1Norm,
}

/// `weight * f(x)` with `f` given by `kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub weight: f64,
}

impl RegularizerSpec {
    pub fn zero() -> Self {
        Self {
            kind: RegularizerKind::Zero,
            weight: 0.0,
        }
    }

    /// Panics if `weight` is negative or not finite.
    pub fn l1(weight: f64) -> Self {
        assert!(weight >= 0.0 && weight.is_finite(), "regularizer weight must be >= 0");
        Self {
            kind: RegularizerKind::L1Norm,
            weight,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            RegularizerKind::Zero => 0.0,
            RegularizerKind::L1Norm => self.weight * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }
}

/// JSON form `{"loss": "half_sq_l2"|"l2"|"l1", "reg": "zero"|"l1", "lambda": number}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub loss: LossSpec,
    pub reg: RegularizerKind,
    #[serde(default)]
    pub lambda: f64,
}

impl EstimatorSpec {
    pub fn regularizer(&self) -> RegularizerSpec {
        match self.reg {
            RegularizerKind::Zero => RegularizerSpec::zero(),
            RegularizerKind::L1Norm => RegularizerSpec::l1(self.lambda),
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn loss_value(spec: LossSpec, v: &[f64]) -> f64 {
    match spec {
        LossSpec::HalfSquaredL2 => 0.5 * v.iter().map(|x| x * x).sum::<f64>(),
        LossSpec::L2Norm => norm2(v),
        LossSpec::L1Norm => v.iter().map(|x| x.abs()).sum(),
    }
}

/// Fenchel conjugate `L*(u)`; `f64::INFINITY` outside the effective domain.
pub fn conjugate_value(spec: LossSpec, u: &[f64]) -> f64 {
    match spec {
        LossSpec::HalfSquaredL2 => 0.5 * u.iter().map(|x| x * x).sum::<f64>(),
        LossSpec::L2Norm => {
            if norm2(u) <= 1.0 + DOMAIN_TOLERANCE {
                0.0
            } else {
                f64::INFINITY
            }
        }
        LossSpec::L1Norm => {
            if u.iter().all(|x| x.abs() <= 1.0 + DOMAIN_TOLERANCE) {
                0.0
            } else {
                f64::INFINITY
            }
        }
    }
}

/// `argmin_x 0.5 ||x - v||^2 + step * weight * f(x)`.
pub fn prox_regularizer(spec: RegularizerSpec, v: &[f64], step: f64) -> Vec<f64> {
    debug_assert!(step > 0.0);
    match spec.kind {
        RegularizerKind::Zero => v.to_vec(),
        RegularizerKind::L1Norm => {
            let t = step * spec.weight;
            v.iter().map(|x| x.signum() * (x.abs() - t).max(0.0)).collect()
        }
    }
}

/// Prox at unit step of the conjugate of `weight * f`: projection onto its domain.
pub fn prox_regularizer_conjugate(spec: RegularizerSpec, v: &[f64]) -> Vec<f64> {
    match spec.kind {
        // Conjugate of the zero function is the indicator of {0}.
        RegularizerKind::Zero => vec![0.0; v.len()],
        RegularizerKind::L1Norm => v.iter().map(|x| x.clamp(-spec.weight, spec.weight)).collect(),
    }
}

/// Euclidean projection onto `dom L*`.
pub fn project_dual_ball(spec: LossSpec, u: &[f64]) -> Vec<f64> {
    match spec {
        LossSpec::HalfSquaredL2 => u.to_vec(),
        LossSpec::L2Norm => {
            let r = norm2(u);
            if r <= 1.0 {
                u.to_vec()
            } else {
                u.iter().map(|x| x / r).collect()
            }
        }
        LossSpec::L1Norm => u.iter().map(|x| x.clamp(-1.0, 1.0)).collect(),
    }
}

/// `argmin_p 0.5 ||p - u||^2 + step * (L*(p) + shift^T p)`.
pub fn prox_conjugate(spec: LossSpec, u: &[f64], step: f64, shift: &[f64]) -> Vec<f64> {
    debug_assert!(step > 0.0);
    debug_assert_eq!(u.len(), shift.len());
    let moved: Vec<f64> = u.iter().zip(shift).map(|(a, s)| a - step * s).collect();
    match spec {
        LossSpec::HalfSquaredL2 => moved.iter().map(|x| x / (1.0 + step)).collect(),
        LossSpec::L2Norm | LossSpec::L1Norm => project_dual_ball(spec, &moved),
    }
}
