//! The auxiliary side: per-sample AO values, the deterministic curve `d(alpha)`
//! and the closed-form error prediction it implies.
//!
//! For the cone-constrained LASSO the AO scalarizes to
//!
//! ```text
//! phi(g, h) = min_{0 <= alpha <= K} ( sqrt(alpha^2 + sigma^2) ||g|| / sqrt(m)
//!                                     - alpha D(-h) / sqrt(m) )_+
//! ```
//!
//! and replacing `||g||` by `gamma_m` and `D(-h)` by the width `omega` gives
//! the deterministic curve `d(alpha)`, whose minimizer predicts `||w_hat||`.

use serde::{Deserialize, Serialize};

use crate::geometry::{restricted_sup, ConeKind, ConeSpec, GeometryStats};
use crate::{Error, Result};

/// Bracket width used by [`predict`] for its numeric cross-check.
pub const GOLDEN_TOLERANCE: f64 = 1e-12;
/// Allowed gap between the closed form and the numeric minimizer.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-8;
/// Subgradient iterations for the numeric AO evaluators.
pub const AO_SUBGRADIENT_ITERATIONS: usize = 100_000;
const AO_STAGES: usize = 40;
const GOLDEN_MAX_ITER: usize = 1_000;

/// `d(alpha) = sqrt(alpha^2 + sigma^2) gamma_m / sqrt(m) - alpha omega / sqrt(m)` on `[0, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DCurve {
    gamma_m: f64,
    omega: f64,
    sigma: f64,
    m: usize,
    k: f64,
}

impl DCurve {
    /// Fails with a regime error unless `gamma_m > omega >= 0`.
    pub fn new(gamma_m: f64, omega: f64, sigma: f64, m: usize, k: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension("m must be >= 1".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArguments(format!("sigma must be positive, got {sigma}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArguments(format!("K must be positive, got {k}")));
        }
        if !(omega >= 0.0 && gamma_m.is_finite()) {
            return Err(Error::InvalidArguments(format!("omega must be >= 0, got {omega}")));
        }
        if omega >= gamma_m {
            return Err(Error::Regime(format!(
                "omega = {omega} must be below gamma_m = {gamma_m}"
            )));
        }
        Ok(Self {
            gamma_m,
            omega,
            sigma,
            m,
            k,
        })
    }

    pub fn from_stats(stats: &GeometryStats, sigma: f64, k: f64) -> Result<Self> {
        Self::new(stats.gamma_m, stats.omega, sigma, stats.m, k)
    }

    pub fn gamma_m(&self) -> f64 {
        self.gamma_m
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Lower bound `sigma^2 gamma_m / (sqrt(m) (K^2 + sigma^2)^{3/2})` on `d''` over `[0, K]`.
    pub fn strong_convexity_modulus(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        s2 * self.gamma_m / ((self.m as f64).sqrt() * (self.k * self.k + s2).powf(1.5))
    }

    /// True when `d(a) < d(b)`, decided without cancellation.
    pub fn precedes(&self, a: f64, b: f64) -> bool {
        let sa = a.hypot(self.sigma);
        let sb = b.hypot(self.sigma);
        (a - b) * (self.gamma_m * (a + b) / (sa + sb) - self.omega) < 0.0
    }

    /// Golden-section minimizer of `d` on `[0, K]`.
    pub fn minimize_numeric(&self, tol: f64) -> Result<(f64, f64)> {
        let alpha = golden_section_by(|a, b| self.precedes(a, b), 0.0, self.k, tol)?;
        Ok((alpha, d_value(self, alpha)?))
    }
}

/// `sqrt(a^2 + s^2) b - a d` for `b >= d >= 0`, as a ratio of positive terms.
fn scalar_gap(alpha: f64, b: f64, d: f64, sigma: f64) -> f64 {
    let num = alpha * alpha * (b - d) * (b + d) + b * b * sigma * sigma;
    let den = alpha.hypot(sigma) * b + alpha * d;
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn d_value(curve: &DCurve, alpha: f64) -> Result<f64> {
    if !(0.0..=curve.k).contains(&alpha) {
        return Err(Error::Domain {
            value: alpha,
            lo: 0.0,
            hi: curve.k,
        });
    }
    Ok(scalar_gap(alpha, curve.gamma_m, curve.omega, curve.sigma) / (curve.m as f64).sqrt())
}

pub fn strong_convexity_modulus(curve: &DCurve) -> f64 {
    curve.strong_convexity_modulus()
}

/// Golden-section search on `[lo, hi]` driven by a strict-order predicate
/// `less(a, b) <=> f(a) < f(b)`. The left endpoint wins ties with the
/// interior point; the right endpoint only wins when strictly better.
pub fn golden_section_by(less: impl Fn(f64, f64) -> bool, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArguments(format!("bad interval [{lo}, {hi}]")));
    }
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..GOLDEN_MAX_ITER {
        if b - a <= tol {
            break;
        }
        if less(c, d) {
            b = d;
            d = c;
            c = b - inv_phi * (b - a);
        } else {
            a = c;
            c = d;
            d = a + inv_phi * (b - a);
        }
    }
    let mut best = 0.5 * (a + b);
    if !less(best, lo) {
        best = lo;
    }
    if less(hi, best) {
        best = hi;
    }
    Ok(best)
}

/// Golden-section minimization of `f` on `[lo, hi]`; returns `(argmin, min)`.
pub fn minimize_strongly_convex(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let x = golden_section_by(|a, b| f(a) < f(b), lo, hi, tol)?;
    Ok((x, f(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub alpha_star: f64,
    pub d_star: f64,
    pub nse: f64,
    pub method: PredictionMethod,
}

/// Closed-form minimizer of `d`:
/// `alpha* = sigma omega / sqrt(gamma_m^2 - omega^2)`,
/// `d* = sigma sqrt(gamma_m^2 - omega^2) / sqrt(m)`,
/// `NSE = omega^2 / (gamma_m^2 - omega^2)`.
///
/// The closed form is cross-checked against [`DCurve::minimize_numeric`].
pub fn predict(curve: &DCurve) -> Result<Prediction> {
    let (g, w, s) = (curve.gamma_m, curve.omega, curve.sigma);
    let gap = (g - w) * (g + w);
    let root = gap.sqrt();
    let alpha_star = s * w / root;
    if alpha_star >= curve.k {
        return Err(Error::Domain {
            value: alpha_star,
            lo: 0.0,
            hi: curve.k,
        });
    }
    let d_star = s * root / (curve.m as f64).sqrt();
    let nse = w * w / gap;
    let (numeric, _) = curve.minimize_numeric(GOLDEN_TOLERANCE)?;
    if (numeric - alpha_star).abs() > CROSS_CHECK_TOLERANCE * alpha_star.max(1.0) {
        return Err(Error::Numeric(format!(
            "closed-form alpha* = {alpha_star} disagrees with numeric {numeric}"
        )));
    }
    Ok(Prediction {
        alpha_star,
        d_star,
        nse,
        method: PredictionMethod::ClosedForm,
    })
}

/// Prediction from golden-section minimization alone.
pub fn predict_numeric(curve: &DCurve, tol: f64) -> Result<Prediction> {
    let (alpha_star, d_star) = curve.minimize_numeric(tol)?;
    Ok(Prediction {
        alpha_star,
        d_star,
        nse: (alpha_star / curve.sigma).powi(2),
        method: PredictionMethod::Numeric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AOSample {
    pub phi: f64,
    pub minimizer_norm: f64,
    /// The minimizer sits on the `K` bound, so `K` may be too small.
    pub at_boundary: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArguments(format!("{name} must be positive, got {v}")))
    }
}

/// Scalarized cone-LASSO AO value, normalized by `sqrt(m)` with `m = g.len()`.
pub fn ao_cone_value(g: &[f64], h: &[f64], sigma: f64, cone: &ConeSpec, k: f64) -> Result<AOSample> {
    ao_cone_value_augmented(g, h, 0.0, sigma, cone, k)
}

/// Gordon AO of the cone LASSO written over the augmented Gaussian matrix
/// `[A, -z/sigma]` and the variable `(w, sigma)`:
///
/// ```text
/// min_{0 <= alpha <= K} ( sqrt(alpha^2 + sigma^2) ||g|| - alpha D(-h) + sigma h_noise )_+ / sqrt(m)
/// ```
///
/// `h_noise` is the extra standard normal paired with the noise column.
/// With `h_noise = 0` this is [`ao_cone_value`]. `sigma = 0` gives the noiseless AO.
pub fn ao_cone_value_augmented(
    g: &[f64],
    h: &[f64],
    h_noise: f64,
    sigma: f64,
    cone: &ConeSpec,
    k: f64,
) -> Result<AOSample> {
    if g.is_empty() {
        return Err(Error::InvalidDimension("g must be nonempty".into()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArguments(format!("sigma must be >= 0, got {sigma}")));
    }
    check_positive("K", k)?;
    let neg_h: Vec<f64> = h.iter().map(|x| -x).collect();
    let d = restricted_sup(&neg_h, cone)?;
    let b = norm(g);
    let (alpha, raw, at_boundary) = if b > d {
        let interior = if sigma == 0.0 { 0.0 } else { sigma * d / ((b - d) * (b + d)).sqrt() };
        let alpha = interior.min(k);
        (alpha, scalar_gap(alpha, b, d, sigma), interior >= k)
    } else {
        // Nonincreasing in alpha, so the minimum sits at K.
        (k, k.hypot(sigma) * b - k * d, true)
    };
    Ok(AOSample {
        phi: ((raw + sigma * h_noise) / (g.len() as f64).sqrt()).max(0.0),
        minimizer_norm: alpha,
        at_boundary,
    })
}

/// Lipschitz constant `sqrt(2) sqrt(K^2 + sigma^2) / sqrt(m)` of the
/// normalized augmented AO as a function of `(g, h, h_noise)`.
pub fn ao_cone_lipschitz(m: usize, sigma: f64, k: f64) -> f64 {
    std::f64::consts::SQRT_2 * k.hypot(sigma) / (m as f64).sqrt()
}

/// AO value for the smallest singular value: `||g|| - ||h||`.
pub fn ao_smin_value(g: &[f64], h: &[f64]) -> f64 {
    norm(g) - norm(h)
}

/// Minimizes a convex function over `||w|| <= radius` by projected normalized
/// subgradient steps. The step halves at every stage and each stage restarts
/// from the best point seen. Returns `(w_best, f(w_best))`.
fn minimize_over_ball(n: usize, radius: f64, eval: impl Fn(&[f64]) -> (f64, Vec<f64>)) -> (Vec<f64>, f64) {
    let per_stage = AO_SUBGRADIENT_ITERATIONS / AO_STAGES;
    let mut best_w = vec![0.0; n];
    let (mut best_val, _) = eval(&best_w);
    let mut step = 0.1 * radius;
    for _ in 0..AO_STAGES {
        let mut w = best_w.clone();
        for _ in 0..per_stage {
            let (val, sub) = eval(&w);
            if val < best_val {
                best_val = val;
                best_w.clone_from(&w);
            }
            let sn = norm(&sub);
            if sn == 0.0 {
                return (w, val);
            }
            for (wi, si) in w.iter_mut().zip(&sub) {
                *wi -= step * si / sn;
            }
            let wn = norm(&w);
            if wn > radius {
                w.iter_mut().for_each(|x| *x *= radius / wn);
            }
        }
        step *= 0.5;
    }
    (best_w, best_val)
}

fn sample_from(w: &[f64], phi: f64, radius: f64) -> AOSample {
    let minimizer_norm = norm(w);
    AOSample {
        phi,
        minimizer_norm,
        at_boundary: minimizer_norm >= radius * (1.0 - 1e-9),
    }
}

/// l2-LASSO AO `min_{||w|| <= K_w} (sqrt(||w||^2 + sigma^2) ||g|| + h^T w)_+ + lambda ||x0 + w||_1`.
///
/// Numeric and inexact: the returned value is the best one visited by a
/// first-order method, hence an upper bound on the true minimum.
pub fn ao_l2_lasso_value(g: &[f64], h: &[f64], x0: &[f64], lambda: f64, sigma: f64, k_w: f64) -> Result<AOSample> {
    if h.len() != x0.len() {
        return Err(Error::shape(h.len(), x0.len()));
    }
    if h.is_empty() || g.is_empty() {
        return Err(Error::InvalidDimension("g and h must be nonempty".into()));
    }
    check_positive("sigma", sigma)?;
    check_positive("K_w", k_w)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArguments("lambda must be >= 0".into()));
    }
    let gn = norm(g);
    let eval = |w: &[f64]| {
        let s = norm(w).hypot(sigma);
        let a = s * gn + dot(h, w);
        let mut sub = vec![0.0; w.len()];
        if a > 0.0 {
            for (i, si) in sub.iter_mut().enumerate() {
                *si = gn * w[i] / s + h[i];
            }
        }
        let mut reg = 0.0;
        for (i, si) in sub.iter_mut().enumerate() {
            let v = x0[i] + w[i];
            reg += v.abs();
            if v != 0.0 {
                *si += lambda * v.signum();
            }
        }
        (a.max(0.0) + lambda * reg, sub)
    };
    let (w, phi) = minimize_over_ball(h.len(), k_w, eval);
    Ok(sample_from(&w, phi, k_w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoKind {
    GenLasso,
    GenL2Lasso,
    Lad,
}

/// Parameters of the first-order AO forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoParams {
    pub sigma: f64,
    pub lambda: f64,
    pub k_w: f64,
    /// Dual radius for `gen_lasso`.
    pub k_u: f64,
    /// Number of nonzero noise entries for `lad`; they occupy the leading coordinates.
    pub sparse_noise: usize,
}

/// `max_{s in subdifferential} s^T w` and a maximizing `s`.
fn support_function(cone: &ConeSpec, w: &[f64]) -> Result<(f64, Vec<f64>)> {
    match cone.kind() {
        ConeKind::FullSpace => Ok((0.0, vec![0.0; w.len()])),
        ConeKind::L1Descent { support, signs } => {
            let mut s: Vec<f64> = w.iter().map(|x| if *x == 0.0 { 0.0 } else { x.signum() }).collect();
            for (&i, &sg) in support.iter().zip(signs) {
                s[i] = sg;
            }
            Ok((dot(&s, w), s))
        }
        other => Err(Error::Capability(format!(
            "no subdifferential model for cone {other:?}"
        ))),
    }
}

/// `max_{||u||_inf <= 1} c^T u + t ||u||_2` and a maximizer.
pub(crate) fn box_l2_max(c: &[f64], t: f64) -> (f64, Vec<f64>) {
    let l1: f64 = c.iter().map(|x| x.abs()).sum();
    if t >= 0.0 {
        let u = c.iter().map(|x| if *x >= 0.0 { 1.0 } else { -1.0 }).collect();
        return (l1 + t * (c.len() as f64).sqrt(), u);
    }
    let t2 = t * t;
    if c.iter().map(|x| x * x).sum::<f64>() <= t2 {
        return (0.0, vec![0.0; c.len()]);
    }
    // Water-filling: sum_i min(|c_i|, theta)^2 = t^2.
    let mut a: Vec<f64> = c.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| x.total_cmp(y));
    let m = a.len();
    let mut below = 0.0;
    let mut theta = a[m - 1];
    for (j, &aj) in a.iter().enumerate() {
        let rest = (m - j) as f64;
        if below + rest * aj * aj >= t2 {
            theta = ((t2 - below) / rest).sqrt();
            break;
        }
        below += aj * aj;
    }
    let shrink: f64 = c.iter().map(|x| x.abs().min(theta)).sum();
    let u = c
        .iter()
        .map(|x| if x.abs() > theta { x.signum() } else { x / theta })
        .collect();
    (l1 - shrink, u)
}

/// Numeric evaluator for the first-order AO forms of the generalized LASSO,
/// generalized l2-LASSO and LAD. `subdiff` describes the regularizer at
/// `x0`: an l1 descent cone stands for the l1 norm at that signed support,
/// the full space for `f = 0`.
///
/// Values are unnormalized and, as for [`ao_l2_lasso_value`], upper bounds.
pub fn ao_general_value(kind: AoKind, g: &[f64], h: &[f64], subdiff: &ConeSpec, params: AoParams) -> Result<AOSample> {
    let n = h.len();
    if n != subdiff.ambient_dim() {
        return Err(Error::shape(subdiff.ambient_dim(), n));
    }
    if g.is_empty() {
        return Err(Error::InvalidDimension("g must be nonempty".into()));
    }
    check_positive("sigma", params.sigma)?;
    check_positive("K_w", params.k_w)?;
    if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
        return Err(Error::InvalidArguments("lambda must be >= 0".into()));
    }
    if kind == AoKind::GenLasso {
        check_positive("K_u", params.k_u)?;
    }
    if kind == AoKind::Lad && params.sparse_noise > g.len() {
        return Err(Error::InvalidArguments(format!(
            "sparse_noise = {} exceeds m = {}",
            params.sparse_noise,
            g.len()
        )));
    }
    support_function(subdiff, &vec![0.0; n])?;

    let (sigma, lambda) = (params.sigma, params.lambda);
    let gn = norm(g);
    let eval = |w: &[f64]| {
        let wn = norm(w);
        let s = wn.hypot(sigma);
        let t = dot(h, w);
        let (reg, s_star) = support_function(subdiff, w).expect("checked above");
        // value, coefficient on w/s, coefficient on w/||w||, coefficient on h
        let (value, c_s, c_w, c_h) = match kind {
            AoKind::GenL2Lasso => {
                let a = s * gn + t;
                if a > 0.0 {
                    (a, gn, 0.0, 1.0)
                } else {
                    (0.0, 0.0, 0.0, 0.0)
                }
            }
            AoKind::GenLasso => {
                let a = s * gn + t;
                let beta = a.clamp(0.0, params.k_u);
                (beta * a - 0.5 * beta * beta, beta * gn, 0.0, beta)
            }
            AoKind::Lad => {
                let sp = params.sparse_noise;
                let c: Vec<f64> = g
                    .iter()
                    .enumerate()
                    .map(|(i, gi)| if i < sp { s * gi } else { wn * gi })
                    .collect();
                let (v, u) = box_l2_max(&c, t);
                let head = dot(&g[..sp], &u[..sp]);
                let tail = dot(&g[sp..], &u[sp..]);
                (v, head, tail, norm(&u))
            }
        };
        let mut sub = vec![0.0; w.len()];
        for i in 0..w.len() {
            sub[i] = c_s * w[i] / s + c_h * h[i] + lambda * s_star[i];
            if wn > 0.0 {
                sub[i] += c_w * w[i] / wn;
            }
        }
        (value + lambda * reg, sub)
    };
    let (w, phi) = minimize_over_ball(n, params.k_w, eval);
    Ok(sample_from(&w, phi, params.k_w))
}
