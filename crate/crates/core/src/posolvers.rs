//! First-order solvers for the primary optimization problems.
//!
//! All solvers work in the error variable `w = x - x0`, so an instance is
//! described by `(A, z, x0)` with observations `y = A x0 + z`:
//!
//! * [`solve_cone_lasso`]: `min ||A w - z||_2` subject to `w` in a cone.
//! * [`solve_lasso_fista`]: `min 0.5 ||A w - z||^2 + lambda ||x0 + w||_1`.
//! * [`solve_saddle_pdhg`]: the saddle form
//!   `min_w max_u u^T A w - u^T z - L*(u) + lambda f(x0 + w)` for any
//!   supported loss, by primal-dual hybrid gradient.
//!
//! The cone problem is solved through its squared surrogate, which has the
//! same minimizers; the reported objective is the unsquared residual norm.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::geometry::{membership_residual, project_cone_vec, ConeSpec};
use crate::linalg::{spectral_norm, Matrix, Vector};
use crate::proxcalc::{loss_value, prox_conjugate, prox_regularizer, LossSpec, RegularizerSpec};
use crate::{Error, Result};

pub const FISTA_MAX_ITER: usize = 50_000;
pub const PDHG_MAX_ITER: usize = 200_000;
/// Stopping tolerance, scaled by `1 + ||z||`.
pub const STOP_TOLERANCE: f64 = 1e-8;
/// PDHG uses `tau_p = tau_d = PDHG_STEP_FACTOR / ||A||_2`.
pub const PDHG_STEP_FACTOR: f64 = 0.99;

/// Radii `K_w`, `K_u` of the balls that make the saddle problem compact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub k_w: f64,
    pub k_u: f64,
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: Matrix,
    z: Vector,
    x0: Vector,
    sigma: f64,
    loss: LossSpec,
    reg: RegularizerSpec,
    cone: Option<ConeSpec>,
    bounds: Bounds,
    a_norm: f64,
}

impl ProblemInstance {
    /// Validates shapes and fills in the default bounds
    /// `K_w = 10 sigma sqrt(n)` and `K_u = 10 (||z|| + K_w ||A||_2)`.
    pub fn new(a: Matrix, z: Vector, x0: Vector, sigma: f64, loss: LossSpec, reg: RegularizerSpec) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension("measurement matrix is empty".into()));
        }
        if z.len() != m {
            return Err(Error::shape(m, z.len()));
        }
        if x0.len() != n {
            return Err(Error::shape(n, x0.len()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArguments(format!("sigma must be positive, got {sigma}")));
        }
        if !(reg.weight >= 0.0 && reg.weight.is_finite()) {
            return Err(Error::InvalidArguments("regularizer weight must be >= 0".into()));
        }
        let a_norm = spectral_norm(&a)?;
        let k_w = 10.0 * sigma * (n as f64).sqrt();
        let k_u = 10.0 * (z.norm() + k_w * a_norm);
        Ok(Self {
            a,
            z,
            x0,
            sigma,
            loss,
            reg,
            cone: None,
            bounds: Bounds { k_w, k_u },
            a_norm,
        })
    }

    pub fn with_cone(mut self, cone: ConeSpec) -> Result<Self> {
        if cone.ambient_dim() != self.a.ncols() {
            return Err(Error::shape(self.a.ncols(), cone.ambient_dim()));
        }
        self.cone = Some(cone);
        Ok(self)
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if !(bounds.k_w > 0.0 && bounds.k_u > 0.0) {
            return Err(Error::InvalidArguments("bounds must be positive".into()));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn z(&self) -> &Vector {
        &self.z
    }
    pub fn x0(&self) -> &Vector {
        &self.x0
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn loss(&self) -> LossSpec {
        self.loss
    }
    pub fn reg(&self) -> RegularizerSpec {
        self.reg
    }
    pub fn cone(&self) -> Option<&ConeSpec> {
        self.cone.as_ref()
    }
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
    /// Power-iteration estimate of `||A||_2`.
    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }
    pub fn m(&self) -> usize {
        self.a.nrows()
    }
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    fn stop_tolerance(&self) -> f64 {
        STOP_TOLERANCE * (1.0 + self.z.norm())
    }

    /// `loss(A w - z) + lambda f(x0 + w)`.
    pub fn penalized_objective(&self, w: &Vector) -> f64 {
        let r = &self.a * w - &self.z;
        loss_value(self.loss, r.as_slice()) + self.reg.value((&self.x0 + w).as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct POResult {
    pub w_hat: Vector,
    pub objective: f64,
    /// `||A w_hat - z||_2`
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    /// `||w_hat||_2 > K_w`; reported, never clipped.
    pub exceeds_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Absolute tolerance; `None` uses `1e-8 (1 + ||z||)`.
    pub tolerance: Option<f64>,
}

impl SolverOptions {
    pub fn fista() -> Self {
        Self {
            max_iter: FISTA_MAX_ITER,
            tolerance: None,
        }
    }
    pub fn pdhg() -> Self {
        Self {
            max_iter: PDHG_MAX_ITER,
            tolerance: None,
        }
    }
}

struct FistaOutcome {
    x: Vector,
    iterations: usize,
    converged: bool,
    /// Gradient-mapping norm at `x`.
    residual: f64,
}

/// Accelerated proximal gradient on `0.5 ||A w - z||^2 + g(w)` with
/// gradient-based adaptive restart. `prox(v, t)` is the prox of `t g`.
fn fista(
    a: &Matrix,
    z: &Vector,
    lipschitz: f64,
    prox: impl Fn(&Vector, f64) -> Vector,
    max_iter: usize,
    tol: f64,
) -> FistaOutcome {
    let n = a.ncols();
    let step = 1.0 / lipschitz;
    let grad = |v: &Vector| a.tr_mul(&(a * v - z));
    let mapping_norm = |v: &Vector| {
        let next = prox(&(v - step * grad(v)), step);
        ((v - &next).norm() / step, next)
    };

    let mut x = Vector::zeros(n);
    let mut y = x.clone();
    let mut theta = 1.0_f64;
    let mut best = (f64::INFINITY, x.clone());
    for it in 1..=max_iter {
        let g = grad(&y);
        let x_new = prox(&(&y - step * &g), step);
        let diff = &y - &x_new;
        let res_y = diff.norm() / step;
        if res_y <= tol {
            let (res_x, _) = mapping_norm(&x_new);
            if res_x <= tol {
                return FistaOutcome {
                    x: x_new,
                    iterations: it,
                    converged: true,
                    residual: res_x,
                };
            }
        }
        if res_y < best.0 {
            best = (res_y, x_new.clone());
        }
        let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let mut beta = (theta - 1.0) / theta_new;
        // Restart when momentum points uphill.
        if diff.dot(&(&x_new - &x)) > 0.0 {
            beta = 0.0;
            theta = 1.0;
        } else {
            theta = theta_new;
        }
        y = &x_new + beta * (&x_new - &x);
        x = x_new;
    }
    let (res_x, _) = mapping_norm(&x);
    let (x, residual) = if res_x <= best.0 {
        (x, res_x)
    } else {
        let (r, _) = mapping_norm(&best.1);
        (best.1, r)
    };
    FistaOutcome {
        x,
        iterations: max_iter,
        converged: residual <= tol,
        residual,
    }
}

fn check_bound(w: &Vector, bounds: Bounds) -> bool {
    let exceeds = w.norm() > bounds.k_w;
    if exceeds {
        warn!("solution norm {} exceeds K_w = {}", w.norm(), bounds.k_w);
    }
    exceeds
}

/// `min_w ||A w - z||_2` over the instance cone by accelerated projected gradient.
pub fn solve_cone_lasso(instance: &ProblemInstance) -> Result<POResult> {
    solve_cone_lasso_with(instance, SolverOptions::fista())
}

pub fn solve_cone_lasso_with(instance: &ProblemInstance, opts: SolverOptions) -> Result<POResult> {
    let cone = instance
        .cone()
        .ok_or_else(|| Error::InvalidArguments("cone-constrained solve needs a cone".into()))?;
    let tol = opts.tolerance.unwrap_or_else(|| instance.stop_tolerance());
    let lipschitz = instance.a_norm().powi(2);
    if lipschitz == 0.0 {
        let w = Vector::zeros(instance.n());
        let r = instance.z().norm();
        return Ok(POResult {
            w_hat: w,
            objective: r,
            residual_norm: r,
            iterations: 0,
            converged: true,
            kkt_residual: 0.0,
            exceeds_bound: false,
        });
    }
    let project = |v: &Vector, _t: f64| project_cone_vec(v, cone).expect("cone dimension checked");
    let out = fista(instance.a(), instance.z(), lipschitz, project, opts.max_iter, tol);
    debug_assert_eq!(membership_residual(out.x.as_slice(), cone).unwrap_or(0.0), 0.0);
    let residual_norm = (instance.a() * &out.x - instance.z()).norm();
    if !out.converged {
        warn!("cone LASSO hit the iteration cap; residual {}", out.residual);
    }
    Ok(POResult {
        exceeds_bound: check_bound(&out.x, instance.bounds()),
        w_hat: out.x,
        objective: residual_norm,
        residual_norm,
        iterations: out.iterations,
        converged: out.converged,
        kkt_residual: out.residual,
    })
}

/// LASSO `0.5 ||A w - z||^2 + lambda ||x0 + w||_1` by FISTA.
pub fn solve_lasso_fista(instance: &ProblemInstance) -> Result<POResult> {
    solve_lasso_fista_with(instance, SolverOptions::fista())
}

pub fn solve_lasso_fista_with(instance: &ProblemInstance, opts: SolverOptions) -> Result<POResult> {
    if instance.loss() != LossSpec::HalfSquaredL2 {
        return Err(Error::InvalidArguments("FISTA LASSO requires the half squared l2 loss".into()));
    }
    let tol = opts.tolerance.unwrap_or_else(|| instance.stop_tolerance());
    let lipschitz = instance.a_norm().powi(2).max(f64::MIN_POSITIVE);
    let reg = instance.reg();
    let x0 = instance.x0();
    let prox = |v: &Vector, t: f64| shifted_prox(reg, v, t, x0);
    let out = fista(instance.a(), instance.z(), lipschitz, prox, opts.max_iter, tol);
    let residual_norm = (instance.a() * &out.x - instance.z()).norm();
    Ok(POResult {
        exceeds_bound: check_bound(&out.x, instance.bounds()),
        objective: instance.penalized_objective(&out.x),
        w_hat: out.x,
        residual_norm,
        iterations: out.iterations,
        converged: out.converged,
        kkt_residual: out.residual,
    })
}

/// Prox of `w -> t * reg(x0 + w)`.
fn shifted_prox(reg: RegularizerSpec, v: &Vector, t: f64, x0: &Vector) -> Vector {
    let shifted = v + x0;
    Vector::from_vec(prox_regularizer(reg, shifted.as_slice(), t)) - x0
}

/// Primal-dual hybrid gradient on the saddle form of the penalized estimator.
pub fn solve_saddle_pdhg(instance: &ProblemInstance) -> Result<POResult> {
    solve_saddle_pdhg_with(instance, SolverOptions::pdhg())
}

pub fn solve_saddle_pdhg_with(instance: &ProblemInstance, opts: SolverOptions) -> Result<POResult> {
    let a = instance.a();
    let z = instance.z();
    let a_norm = instance.a_norm();
    if !(a_norm > 0.0 && a_norm.is_finite()) {
        return Err(Error::Numeric(format!("unusable ||A||_2 estimate {a_norm}")));
    }
    let tol = opts.tolerance.unwrap_or_else(|| instance.stop_tolerance());
    let tau_p = PDHG_STEP_FACTOR / a_norm;
    let tau_d = PDHG_STEP_FACTOR / a_norm;
    let (reg, loss, x0) = (instance.reg(), instance.loss(), instance.x0());

    let mut w = Vector::zeros(instance.n());
    let mut u = Vector::zeros(instance.m());
    let mut aw = Vector::zeros(instance.m());
    let mut atu = Vector::zeros(instance.n());
    let mut converged = false;
    let mut iterations = opts.max_iter;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let w_new = shifted_prox(reg, &(&w - tau_p * &atu), tau_p, x0);
        let aw_new = a * &w_new;
        let extrapolated = 2.0 * &aw_new - &aw;
        let u_new = Vector::from_vec(prox_conjugate(
            loss,
            (&u + tau_d * extrapolated).as_slice(),
            tau_d,
            z.as_slice(),
        ));
        let atu_new = a.tr_mul(&u_new);
        let primal = ((&w - &w_new) / tau_p - (&atu - &atu_new)).norm();
        let dual = ((&u - &u_new) / tau_d - (&aw - &aw_new)).norm();
        residual = primal + dual;
        w = w_new;
        u = u_new;
        aw = aw_new;
        atu = atu_new;
        if residual <= tol {
            converged = true;
            iterations = it;
            break;
        }
    }
    if !converged {
        warn!("PDHG hit the iteration cap; residual {residual}");
    }
    let residual_norm = (a * &w - z).norm();
    Ok(POResult {
        exceeds_bound: check_bound(&w, instance.bounds()),
        objective: instance.penalized_objective(&w),
        w_hat: w,
        residual_norm,
        iterations,
        converged,
        kkt_residual: residual,
    })
}

/// Smallest singular value `min_{||a||=1} ||G a||_2`.
///
/// Wide matrices have a nontrivial null space, so the value is exactly zero.
pub fn smin_via_po(g: &Matrix) -> Result<f64> {
    let (m, n) = g.shape();
    if m == 0 || n == 0 {
        return Err(Error::shape(1, 0));
    }
    if m < n {
        return Ok(0.0);
    }
    let sv = g.clone().svd(false, false).singular_values;
    Ok(sv.min().max(0.0))
}
