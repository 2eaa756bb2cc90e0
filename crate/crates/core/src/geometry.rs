//! Closed convex cones, Euclidean projection onto them, the restricted
//! supremum `D(h)` and Monte Carlo Gaussian width.
//!
//! The l1 descent cone at a signed support `(S, s)` is represented by the
//! single inequality `s^T w_S + ||w_{S^c}||_1 <= 0`, which is already closed.
//! An empty support gives the trivial cone `{0}` (the descent cone of the l1
//! norm at the origin).

use serde::{Deserialize, Serialize};

use crate::ensembles::RandomSource;
use crate::experiments::exec::{map_indexed_with, Execution};
use crate::linalg::{mean_stderr, Vector};
use crate::{Error, Result};

/// Tolerance on the unit norm of a ray direction.
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Relative tolerance below which a constraint violation counts as zero.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-10;
/// Bisection cap for the l1 descent projection multiplier.
pub const BISECTION_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum ConeKind {
    FullSpace,
    NonnegativeOrthant,
    SingleRay { direction: Vec<f64> },
    L1Descent { support: Vec<usize>, signs: Vec<f64> },
}

/// A validated closed convex cone in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    kind: ConeKind,
    n: usize,
}

impl ConeSpec {
    pub fn full_space(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            kind: ConeKind::FullSpace,
            n,
        })
    }

    pub fn nonnegative_orthant(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            kind: ConeKind::NonnegativeOrthant,
            n,
        })
    }

    pub fn single_ray(direction: Vec<f64>) -> Result<Self> {
        check_dim(direction.len())?;
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidArguments(format!(
                "ray direction must have unit norm, got {norm}"
            )));
        }
        let n = direction.len();
        Ok(Self {
            kind: ConeKind::SingleRay { direction },
            n,
        })
    }

    pub fn l1_descent(support: Vec<usize>, signs: Vec<f64>, n: usize) -> Result<Self> {
        check_dim(n)?;
        if support.len() != signs.len() {
            return Err(Error::InvalidArguments(format!(
                "support has {} indices but {} signs",
                support.len(),
                signs.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in &support {
            if i >= n {
                return Err(Error::InvalidArguments(format!("support index {i} >= n = {n}")));
            }
            if seen[i] {
                return Err(Error::InvalidArguments(format!("duplicate support index {i}")));
            }
            seen[i] = true;
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidArguments("signs must be +1 or -1".into()));
        }
        Ok(Self {
            kind: ConeKind::L1Descent { support, signs },
            n,
        })
    }

    /// Descent cone of the l1 norm at `x0`: support and signs of its nonzero entries.
    pub fn l1_descent_at(x0: &[f64]) -> Result<Self> {
        let (support, signs): (Vec<usize>, Vec<f64>) = x0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, v.signum()))
            .unzip();
        Self::l1_descent(support, signs, x0.len())
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::shape(self.n, len));
        }
        Ok(())
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("cone ambient dimension must be >= 1".into()));
    }
    Ok(())
}

/// Canonical JSON form: `{"kind": ..., "n": ..., "support": [...], "signs": [...]}`,
/// plus `"direction"` for a single ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConeSpecJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    direction: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
}

impl Serialize for ConeSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = Some(self.n);
        let repr = match &self.kind {
            ConeKind::FullSpace => ConeSpecJson {
                kind: "full_space".into(),
                support: None,
                signs: None,
                direction: None,
                n,
            },
            ConeKind::NonnegativeOrthant => ConeSpecJson {
                kind: "nonnegative_orthant".into(),
                support: None,
                signs: None,
                direction: None,
                n,
            },
            ConeKind::SingleRay { direction } => ConeSpecJson {
                kind: "single_ray".into(),
                support: None,
                signs: None,
                direction: Some(direction.clone()),
                n,
            },
            ConeKind::L1Descent { support, signs } => ConeSpecJson {
                kind: "l1_descent".into(),
                support: Some(support.clone()),
                signs: Some(signs.clone()),
                direction: None,
                n,
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ConeSpecJson::deserialize(deserializer)?;
        let need_n = |n: Option<usize>| n.ok_or_else(|| D::Error::missing_field("n"));
        let cone = match repr.kind.as_str() {
            "full_space" => ConeSpec::full_space(need_n(repr.n)?),
            "nonnegative_orthant" => ConeSpec::nonnegative_orthant(need_n(repr.n)?),
            "single_ray" => {
                let direction = repr.direction.ok_or_else(|| D::Error::missing_field("direction"))?;
                if let Some(n) = repr.n {
                    if n != direction.len() {
                        return Err(D::Error::custom("n does not match direction length"));
                    }
                }
                ConeSpec::single_ray(direction)
            }
            "l1_descent" => ConeSpec::l1_descent(
                repr.support.unwrap_or_default(),
                repr.signs.unwrap_or_default(),
                need_n(repr.n)?,
            ),
            other => return Err(D::Error::custom(format!("unknown cone kind {other:?}"))),
        };
        cone.map_err(D::Error::custom)
    }
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// Constraint value `s^T (v_S - mu s) + sum_{j not in S} (|v_j| - mu)_+`, decreasing in `mu`.
fn l1_constraint(v: &[f64], support: &[usize], signs: &[f64], off: &[usize], mu: f64) -> f64 {
    let on: f64 = support.iter().zip(signs).map(|(&i, &s)| s * v[i]).sum::<f64>() - mu * support.len() as f64;
    let rest: f64 = off.iter().map(|&j| (v[j].abs() - mu).max(0.0)).sum();
    on + rest
}

fn project_l1_descent(v: &[f64], support: &[usize], signs: &[f64]) -> Vec<f64> {
    let n = v.len();
    if support.is_empty() {
        return vec![0.0; n];
    }
    let mut in_support = vec![false; n];
    for &i in support {
        in_support[i] = true;
    }
    let off: Vec<usize> = (0..n).filter(|&j| !in_support[j]).collect();
    if l1_constraint(v, support, signs, &off, 0.0) <= 0.0 {
        return v.to_vec();
    }
    let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = MEMBERSHIP_TOLERANCE * (1.0 + vnorm);
    let (mut lo, mut hi) = (0.0, v.iter().map(|x| x.abs()).sum::<f64>() + 1.0);
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..BISECTION_ITERATIONS {
        mu = 0.5 * (lo + hi);
        let c = l1_constraint(v, support, signs, &off, mu);
        if c.abs() <= tol {
            break;
        }
        if c > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
    }
    // The constraint is piecewise linear in mu; once the active set is known
    // the root has a closed form, which removes the bisection residual.
    let active: Vec<usize> = off.iter().copied().filter(|&j| v[j].abs() > mu).collect();
    let numer = support.iter().zip(signs).map(|(&i, &s)| s * v[i]).sum::<f64>()
        + active.iter().map(|&j| v[j].abs()).sum::<f64>();
    let exact = numer / (support.len() + active.len()) as f64;
    if exact >= 0.0 {
        let consistent = off.iter().all(|&j| (v[j].abs() > exact) == (v[j].abs() > mu));
        if consistent {
            mu = exact;
        }
    }
    let mut w = vec![0.0; n];
    for (&i, &s) in support.iter().zip(signs) {
        w[i] = v[i] - mu * s;
    }
    for &j in &off {
        w[j] = soft_threshold(v[j], mu);
    }
    w
}

/// Euclidean projection of `v` onto `cone`.
pub fn project_cone(v: &[f64], cone: &ConeSpec) -> Result<Vec<f64>> {
    cone.check_len(v.len())?;
    Ok(match &cone.kind {
        ConeKind::FullSpace => v.to_vec(),
        ConeKind::NonnegativeOrthant => v.iter().map(|x| x.max(0.0)).collect(),
        ConeKind::SingleRay { direction } => {
            let t = direction.iter().zip(v).map(|(d, x)| d * x).sum::<f64>().max(0.0);
            direction.iter().map(|d| t * d).collect()
        }
        ConeKind::L1Descent { support, signs } => project_l1_descent(v, support, signs),
    })
}

/// Convenience wrapper over [`project_cone`] for nalgebra vectors.
pub fn project_cone_vec(v: &Vector, cone: &ConeSpec) -> Result<Vector> {
    project_cone(v.as_slice(), cone).map(Vector::from_vec)
}

/// `D(h) = ||Proj_cone(h)||_2`.
///
/// This is the maximum of `h^T w` over unit vectors of the cone when that
/// maximum is positive, and zero otherwise.
pub fn restricted_sup(h: &[f64], cone: &ConeSpec) -> Result<f64> {
    let p = project_cone(h, cone)?;
    Ok(p.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Constraint violation of `v`; zero exactly when `v` is in the cone up to
/// [`MEMBERSHIP_TOLERANCE`] relative to `1 + ||v||`.
pub fn membership_residual(v: &[f64], cone: &ConeSpec) -> Result<f64> {
    cone.check_len(v.len())?;
    let raw = match &cone.kind {
        ConeKind::FullSpace => 0.0,
        ConeKind::NonnegativeOrthant => v.iter().map(|x| (-x).max(0.0)).fold(0.0, f64::max),
        ConeKind::SingleRay { .. } => {
            let p = project_cone(v, cone)?;
            v.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        }
        ConeKind::L1Descent { support, signs } => {
            let mut in_support = vec![false; v.len()];
            let mut total = 0.0;
            for (&i, &s) in support.iter().zip(signs) {
                in_support[i] = true;
                total += s * v[i];
            }
            total += v
                .iter()
                .enumerate()
                .filter(|(j, _)| !in_support[*j])
                .map(|(_, x)| x.abs())
                .sum::<f64>();
            total.max(0.0)
        }
    };
    let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(if raw <= MEMBERSHIP_TOLERANCE * (1.0 + vnorm) { 0.0 } else { raw })
}

/// Monte Carlo estimate of the Gaussian width `E D(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub omega: f64,
    pub omega_stderr: f64,
    pub n_samples: usize,
}

/// Width estimate from `n_samples` standard normal vectors drawn in order from `source`.
pub fn gaussian_width(cone: &ConeSpec, source: RandomSource, n_samples: usize) -> Result<WidthEstimate> {
    gaussian_width_with(Execution::default(), cone, source, n_samples)
}

pub fn gaussian_width_with(
    exec: Execution,
    cone: &ConeSpec,
    source: RandomSource,
    n_samples: usize,
) -> Result<WidthEstimate> {
    if n_samples < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: n_samples,
        });
    }
    let n = cone.ambient_dim();
    let mut stream = source.stream();
    let draws: Vec<Vector> = (0..n_samples)
        .map(|_| stream.vector(n))
        .collect::<Result<_>>()?;
    let values = map_indexed_with(exec, n_samples, |i| {
        restricted_sup(draws[i].as_slice(), cone).expect("dimension checked")
    });
    let (omega, omega_stderr) = mean_stderr(&values);
    Ok(WidthEstimate {
        omega,
        omega_stderr,
        n_samples,
    })
}

/// `sqrt(2 k ln(2n/k))`, the classical bound on the width of the l1 descent
/// cone at a k-sparse point.
pub fn l1_width_upper_bound(k: usize, n: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::InvalidArguments(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let (k, n) = (k as f64, n as f64);
    Ok((2.0 * k * (2.0 * n / k).ln()).sqrt())
}

/// Geometric summary feeding the deterministic curve `d(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryStats {
    pub gamma_m: f64,
    pub omega: f64,
    pub omega_stderr: f64,
    pub n_samples: usize,
    pub m: usize,
    pub ambient_dim: usize,
}

impl GeometryStats {
    /// Estimates the width of `cone` and pairs it with the exact `gamma_m`.
    pub fn estimate(cone: &ConeSpec, m: usize, source: RandomSource, n_samples: usize) -> Result<Self> {
        let gamma = crate::ensembles::gamma_m(m)?.value;
        let width = gaussian_width(cone, source, n_samples)?;
        Ok(Self {
            gamma_m: gamma,
            omega: width.omega,
            omega_stderr: width.omega_stderr,
            n_samples,
            m,
            ambient_dim: cone.ambient_dim(),
        })
    }

    /// `(1 - eps) gamma_m > omega > eps gamma_m`.
    pub fn in_linear_regime(&self, eps: f64) -> bool {
        (1.0 - eps) * self.gamma_m > self.omega && self.omega > eps * self.gamma_m
    }
}
