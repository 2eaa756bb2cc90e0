//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use cgmt_core::aoengine::{
    ao_cone_value, ao_cone_value_augmented, d_value, predict, strong_convexity_modulus, DCurve,
};
use cgmt_core::ensembles::gamma_m;
use cgmt_core::experiments::{
    run_experiment, run_experiment_with, run_width_table, Execution, ExperimentConfig, ExperimentKind,
};
use cgmt_core::geometry::{l1_width_upper_bound, project_cone, restricted_sup, ConeKind, ConeSpec};
use cgmt_core::linalg::{Matrix, Vector};
use cgmt_core::posolvers::{solve_lasso_fista, solve_saddle_pdhg, ProblemInstance};
use cgmt_core::proxcalc::{
    conjugate_value, loss_value, prox_conjugate, prox_regularizer, prox_regularizer_conjugate, LossSpec,
    RegularizerSpec,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

fn nse_config() -> ExperimentConfig {
    ExperimentConfig {
        n: 256,
        m: 128,
        k: 5,
        sigma: 0.05,
        trials: 50,
        master_seed: 2024,
        width_samples: 10_000,
        ..ExperimentConfig::new(ExperimentKind::NseConvergence)
    }
}

fn nse_and_residual() -> (Outcome, Outcome) {
    match run_experiment(&nse_config()) {
        Ok(report) => {
            let s = &report.summary;
            let v = |id: &str| report.verdicts.iter().find(|v| v.claim_id == id).unwrap();
            let nse = Outcome::new(
                v("nse_prediction").pass && s.relative_gap.unwrap() <= 0.15,
                format!(
                    "median NSE {:.4} vs predicted {:.4}, relative gap {:.4} (limit 0.15)",
                    s.median_nse_empirical.unwrap(),
                    s.predicted_nse.unwrap(),
                    s.relative_gap.unwrap()
                ),
            );
            let resid = Outcome::new(
                v("residual_prediction").pass && s.residual_relative_gap.unwrap() <= 0.10,
                format!(
                    "median residual ratio {:.4} vs predicted {:.4}, relative gap {:.4} (limit 0.10)",
                    s.median_residual_ratio.unwrap(),
                    s.predicted_residual_ratio.unwrap(),
                    s.residual_relative_gap.unwrap()
                ),
            );
            (nse, resid)
        }
        Err(e) => (
            Outcome::new(false, format!("run failed: {e}")),
            Outcome::new(false, format!("run failed: {e}")),
        ),
    }
}

fn tail_inequalities() -> Outcome {
    let config = ExperimentConfig {
        n: 128,
        m: 64,
        k: 4,
        sigma: 0.05,
        trials: 200,
        master_seed: 11,
        ..ExperimentConfig::new(ExperimentKind::TailComparison)
    };
    match run_experiment(&config) {
        Ok(r) => {
            let margins: Vec<String> = r
                .verdicts
                .iter()
                .map(|v| format!("{} margin {:.4}", v.claim_id, v.margin))
                .collect();
            Outcome::new(
                r.verdicts.len() == 2 && r.all_pass() && r.cdf_grid_values.len() == config.cdf_grid,
                margins.join(", "),
            )
        }
        Err(e) => Outcome::new(false, format!("run failed: {e}")),
    }
}

fn smin_concentration() -> Outcome {
    let config = ExperimentConfig {
        n: 100,
        m: 400,
        trials: 500,
        master_seed: 3,
        ..ExperimentConfig::new(ExperimentKind::ConcentrationSmin)
    };
    match run_experiment(&config) {
        Ok(r) => {
            let details: Vec<String> = r
                .verdicts
                .iter()
                .map(|v| format!("{} margin {:.4}", v.claim_id, v.margin))
                .collect();
            Outcome::new(r.all_pass() && r.verdicts.len() == 2, details.join(", "))
        }
        Err(e) => Outcome::new(false, format!("run failed: {e}")),
    }
}

fn lipschitz() -> Outcome {
    let config = ExperimentConfig {
        n: 128,
        m: 64,
        k: 4,
        sigma: 0.05,
        trials: 1000,
        master_seed: 17,
        ..ExperimentConfig::new(ExperimentKind::LipschitzCheck)
    };
    match run_experiment(&config) {
        Ok(r) => {
            let v = &r.verdicts[0];
            Outcome::new(v.pass, format!("1000 pairs, worst slack to the bound {:.3e}", v.margin))
        }
        Err(e) => Outcome::new(false, format!("run failed: {e}")),
    }
}

/// Exact projection onto `{w : sum_S s_i w_i + sum_{off S} |w_i| <= 0}` by
/// solving the piecewise-linear multiplier equation after a sort.
fn l1_descent_projection(v: &[f64], support: &[usize], signs: &[f64]) -> Vec<f64> {
    let mut on = vec![false; v.len()];
    for &i in support {
        on[i] = true;
    }
    let lin: f64 = support.iter().zip(signs).map(|(&i, s)| s * v[i]).sum();
    let mut off: Vec<f64> = (0..v.len()).filter(|i| !on[*i]).map(|i| v[i].abs()).collect();
    if lin + off.iter().sum::<f64>() <= 0.0 {
        return v.to_vec();
    }
    off.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let k = support.len() as f64;
    let mut acc = lin;
    let mut mu = lin / k;
    for j in 0..=off.len() {
        mu = acc / (k + j as f64);
        let upper = if j == 0 { f64::INFINITY } else { off[j - 1] };
        let lower = if j < off.len() { off[j] } else { 0.0 };
        if mu >= lower && mu <= upper {
            break;
        }
        if j < off.len() {
            acc += off[j];
        }
    }
    let mut w = vec![0.0; v.len()];
    for (i, x) in v.iter().enumerate() {
        w[i] = if on[i] { *x } else { x.signum() * (x.abs() - mu).max(0.0) };
    }
    for (&i, s) in support.iter().zip(signs) {
        w[i] -= mu * s;
    }
    w
}

fn random_l1_cone(rng: &mut ChaCha8Rng, n: usize, max_k: usize) -> (Vec<usize>, Vec<f64>) {
    let k = rng.random_range(1..=max_k);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let support: Vec<usize> = idx[..k].to_vec();
    let signs = (0..k).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    (support, signs)
}

fn scalarization_oracle() -> Outcome {
    let (n, m) = (50, 50);
    let (sigma, k_bound) = (1.0, 3.0);
    let alpha_points = 4000;
    let beta_points = 101;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for inst in 0..100 {
        let (support, signs) = random_l1_cone(&mut rng, n, 10);
        let cone = ConeSpec::l1_descent(support.clone(), signs.clone(), n).unwrap();
        let g = normals(&mut rng, m);
        let h = normals(&mut rng, n);
        let h_noise = if inst % 2 == 0 { 0.0 } else { rng.sample(rand_distr::StandardNormal) };
        let neg_h: Vec<f64> = h.iter().map(|x| -x).collect();
        let d = norm(&l1_descent_projection(&neg_h, &support, &signs));
        let b = norm(&g);
        let sqrt_m = (m as f64).sqrt();
        let mut grid_min = f64::INFINITY;
        for i in 0..=alpha_points {
            let alpha = k_bound * i as f64 / alpha_points as f64;
            let inner = (alpha * alpha + sigma * sigma).sqrt() * b - alpha * d + sigma * h_noise;
            let best_beta = (0..=beta_points)
                .map(|j| j as f64 / beta_points as f64 * inner)
                .fold(f64::NEG_INFINITY, f64::max);
            grid_min = grid_min.min(best_beta / sqrt_m);
        }
        let value = if h_noise == 0.0 {
            ao_cone_value(&g, &h, sigma, &cone, k_bound).unwrap().phi
        } else {
            ao_cone_value_augmented(&g, &h, h_noise, sigma, &cone, k_bound).unwrap().phi
        };
        worst = worst.max((value - grid_min).abs());
    }
    Outcome::new(worst <= 1e-4, format!("100 instances, max |phi - grid| = {worst:.3e} (limit 1e-4)"))
}

fn closed_form_vs_numeric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_alpha: f64 = 0.0;
    let mut worst_ratio = f64::INFINITY;
    for _ in 0..1000 {
        let m = rng.random_range(10..=1000);
        let gamma = gamma_m(m).unwrap().value;
        let omega = rng.random_range(0.01..0.95) * gamma;
        let sigma = rng.random_range(0.01..2.0);
        let alpha_star = sigma * omega / ((gamma - omega) * (gamma + omega)).sqrt();
        let k = alpha_star * rng.random_range(1.5..4.0) + 0.1 * sigma;
        let curve = DCurve::new(gamma, omega, sigma, m, k).unwrap();
        let p = predict(&curve).unwrap();
        let (alpha_num, _) = curve.minimize_numeric(1e-12).unwrap();
        worst_alpha = worst_alpha.max((p.alpha_star - alpha_num).abs() / p.alpha_star.max(1.0));

        let modulus = strong_convexity_modulus(&curve);
        let step = k / 1000.0;
        for j in 1..50 {
            let a = k * j as f64 / 50.0;
            let second = (d_value(&curve, a + step).unwrap() - 2.0 * d_value(&curve, a).unwrap()
                + d_value(&curve, a - step).unwrap())
                / (step * step);
            worst_ratio = worst_ratio.min(second / modulus);
        }
    }
    Outcome::new(
        worst_alpha <= 1e-8 && worst_ratio >= 0.9,
        format!(
            "1000 triples, max alpha gap {worst_alpha:.3e} (limit 1e-8), min second difference / modulus {worst_ratio:.3} (limit 0.9)"
        ),
    )
}

/// Violation of `r` being in the polar cone.
fn polar_violation(r: &[f64], cone: &ConeSpec) -> f64 {
    match cone.kind() {
        ConeKind::FullSpace => norm(r),
        ConeKind::NonnegativeOrthant => r.iter().map(|x| x.max(0.0)).fold(0.0, f64::max),
        ConeKind::SingleRay { direction } => dot(r, direction).max(0.0),
        ConeKind::L1Descent { support, signs } => {
            // Polar is the cone generated by the subdifferential: r_S = t s, |r_off| <= t.
            let t = support.iter().zip(signs).map(|(&i, s)| s * r[i]).sum::<f64>() / support.len() as f64;
            let mut on = vec![false; r.len()];
            let mut v: f64 = (-t).max(0.0);
            for (&i, s) in support.iter().zip(signs) {
                on[i] = true;
                v = v.max((r[i] - t * s).abs());
            }
            for (i, x) in r.iter().enumerate() {
                if !on[i] {
                    v = v.max(x.abs() - t.max(0.0));
                }
            }
            v.max(0.0)
        }
    }
}

fn cone_zoo(rng: &mut ChaCha8Rng, n: usize) -> Vec<ConeSpec> {
    let dir = normals(rng, n);
    let r = norm(&dir);
    let (support, signs) = random_l1_cone(rng, n, n.min(3));
    vec![
        ConeSpec::full_space(n).unwrap(),
        ConeSpec::nonnegative_orthant(n).unwrap(),
        ConeSpec::single_ray(dir.iter().map(|x| x / r).collect()).unwrap(),
        ConeSpec::l1_descent(support, signs, n).unwrap(),
    ]
}

fn geometry_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut worst_moreau: f64 = 0.0;
    for kind in 0..4 {
        for _ in 0..1000 {
            let n = rng.random_range(1..=30);
            let cone = cone_zoo(&mut rng, n).swap_remove(kind);
            let scale = 10f64.powf(rng.random_range(-3.0..3.0));
            let v: Vec<f64> = normals(&mut rng, n).iter().map(|x| x * scale).collect();
            let u: Vec<f64> = normals(&mut rng, n).iter().map(|x| x * scale).collect();
            let p = project_cone(&v, &cone).unwrap();
            let r: Vec<f64> = v.iter().zip(&p).map(|(a, b)| a - b).collect();
            let vv = dot(&v, &v);
            let split = (vv - dot(&p, &p) - dot(&r, &r)).abs() / vv;
            let orth = dot(&p, &r).abs() / vv;
            let polar = polar_violation(&r, &cone) / vv.sqrt();
            worst_moreau = worst_moreau.max(split).max(orth);
            if split > 1e-8 || orth > 1e-8 || polar > 1e-8 {
                failures.push(format!("moreau {kind}: {split:.1e} {orth:.1e} {polar:.1e}"));
            }
            let pp = project_cone(&p, &cone).unwrap();
            if dist(&pp, &p) > 1e-9 * (1.0 + norm(&p)) {
                failures.push(format!("idempotence {kind}"));
            }
            let pu = project_cone(&u, &cone).unwrap();
            if dist(&pu, &p) > dist(&u, &v) * (1.0 + 1e-9) {
                failures.push(format!("nonexpansive {kind}"));
            }
            let t = 10f64.powf(rng.random_range(-2.0..2.0));
            let tv: Vec<f64> = v.iter().map(|x| t * x).collect();
            let ptv = project_cone(&tv, &cone).unwrap();
            let tp: Vec<f64> = p.iter().map(|x| t * x).collect();
            if dist(&ptv, &tp) > 1e-9 * t * (norm(&p) + 1e-300).max(norm(&v) * 1e-3) {
                failures.push(format!("homogeneity {kind}"));
            }
        }
    }

    // Tiny instances: sampled unit vectors of the cone never beat restricted_sup,
    // and in the plane a dense angular grid reproduces it.
    let mut worst_grid: f64 = 0.0;
    for trial in 0..40 {
        let n = 2 + trial % 3;
        for cone in cone_zoo(&mut rng, n) {
            let h = normals(&mut rng, n);
            let d = restricted_sup(&h, &cone).unwrap();
            let mut sampled = f64::NEG_INFINITY;
            for _ in 0..100_000 {
                let p = project_cone(&normals(&mut rng, n), &cone).unwrap();
                let r = norm(&p);
                if r > 1e-12 {
                    sampled = sampled.max(dot(&h, &p) / r);
                }
            }
            if sampled > 0.0 && sampled > d + 1e-6 {
                failures.push(format!("sampled sup {sampled} exceeds {d}"));
            }
            if n == 2 {
                let mut grid = f64::NEG_INFINITY;
                let steps = 200_000;
                for i in 0..steps {
                    let th = std::f64::consts::TAU * i as f64 / steps as f64;
                    let w = [th.cos(), th.sin()];
                    if cgmt_core::geometry::membership_residual(&w, &cone).unwrap() == 0.0 {
                        grid = grid.max(dot(&h, &w));
                    }
                }
                if let ConeKind::SingleRay { direction } = cone.kind() {
                    grid = grid.max(dot(&h, direction));
                }
                if grid > 0.0 {
                    worst_grid = worst_grid.max((grid - d).abs());
                    if (grid - d).abs() > 1e-6 {
                        failures.push(format!("grid sup {grid} vs {d}"));
                    }
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "4000 random inputs, worst Moreau defect {worst_moreau:.1e}, planar grid gap {worst_grid:.1e}, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn lasso_instance(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ProblemInstance {
    let a = Matrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal) / (m as f64).sqrt());
    let mut x0 = Vector::zeros(n);
    for i in 0..5 {
        x0[i] = rng.sample(rand_distr::StandardNormal);
    }
    let z = Vector::from_vec(normals(rng, m)) * 0.1;
    let lambda = rng.random_range(0.05..0.5);
    ProblemInstance::new(a, z, x0, 0.1, LossSpec::HalfSquaredL2, RegularizerSpec::l1(lambda)).unwrap()
}

fn solver_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut unconverged = 0;
    for _ in 0..50 {
        let inst = lasso_instance(&mut rng, 40, 80);
        let f = solve_lasso_fista(&inst).unwrap();
        let p = solve_saddle_pdhg(&inst).unwrap();
        unconverged += usize::from(!f.converged) + usize::from(!p.converged);
        worst = worst.max((f.objective - p.objective).abs() / f.objective.abs().max(1e-12));
    }

    let y = Vector::from_vec(vec![3.0, -0.2, 0.7, -1.5, 0.0, 0.4]);
    let lambda = 0.5;
    let ident = ProblemInstance::new(
        Matrix::identity(6, 6),
        y.clone(),
        Vector::zeros(6),
        1.0,
        LossSpec::HalfSquaredL2,
        RegularizerSpec::l1(lambda),
    )
    .unwrap();
    let w = solve_lasso_fista(&ident).unwrap().w_hat;
    let exact: Vec<f64> = y.iter().map(|x| x.signum() * (x.abs() - lambda).max(0.0)).collect();
    let ident_gap = dist(w.as_slice(), &exact);
    Outcome::new(
        worst <= 1e-6 && ident_gap <= 1e-9 && unconverged == 0,
        format!(
            "50 instances, max relative objective gap {worst:.3e} (limit 1e-6), {unconverged} unconverged; identity design error {ident_gap:.1e} (limit 1e-9)"
        ),
    )
}

/// Closed-form prox of the loss at unit step.
fn prox_loss(spec: LossSpec, v: &[f64]) -> Vec<f64> {
    match spec {
        LossSpec::HalfSquaredL2 => v.iter().map(|x| x / 2.0).collect(),
        LossSpec::L2Norm => {
            let r = norm(v);
            let s = if r > 1.0 { 1.0 - 1.0 / r } else { 0.0 };
            v.iter().map(|x| x * s).collect()
        }
        LossSpec::L1Norm => v.iter().map(|x| x.signum() * (x.abs() - 1.0).max(0.0)).collect(),
    }
}

fn prox_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_moreau: f64 = 0.0;
    let mut worst_fy: f64 = 0.0;
    let mut fy_violations = 0;
    for spec in [LossSpec::HalfSquaredL2, LossSpec::L2Norm, LossSpec::L1Norm] {
        for _ in 0..1000 {
            let n = rng.random_range(1..=20);
            let scale = 10f64.powf(rng.random_range(-1.0..1.5));
            let v: Vec<f64> = normals(&mut rng, n).iter().map(|x| x * scale).collect();
            let zero = vec![0.0; n];
            let dual = prox_conjugate(spec, &v, 1.0, &zero);
            let primal = prox_loss(spec, &v);
            let defect = v
                .iter()
                .zip(primal.iter().zip(&dual))
                .map(|(a, (p, d))| (a - p - d).abs())
                .fold(0.0, f64::max);
            worst_moreau = worst_moreau.max(defect / (1.0 + norm(&v)));

            let u_star: Vec<f64> = match spec {
                LossSpec::HalfSquaredL2 => v.clone(),
                LossSpec::L2Norm => v.iter().map(|x| x / norm(&v)).collect(),
                LossSpec::L1Norm => v.iter().map(|x| x.signum()).collect(),
            };
            let eq = (loss_value(spec, &v) + conjugate_value(spec, &u_star) - dot(&u_star, &v)).abs();
            worst_fy = worst_fy.max(eq / (1.0 + loss_value(spec, &v)));

            let raw = normals(&mut rng, n);
            let u = cgmt_core::proxcalc::project_dual_ball(spec, &raw);
            if loss_value(spec, &v) + conjugate_value(spec, &u) < dot(&u, &v) - 1e-12 * (1.0 + norm(&v) * norm(&u)) {
                fy_violations += 1;
            }
        }
    }
    let mut worst_reg: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let reg = RegularizerSpec::l1(rng.random_range(0.0..3.0));
        let v = normals(&mut rng, n);
        let a = prox_regularizer(reg, &v, 1.0);
        let b = prox_regularizer_conjugate(reg, &v);
        let defect = v.iter().zip(a.iter().zip(&b)).map(|(x, (p, q))| (x - p - q).abs()).fold(0.0, f64::max);
        worst_reg = worst_reg.max(defect);
    }
    Outcome::new(
        worst_moreau <= 1e-8 && worst_fy <= 1e-8 && fy_violations == 0 && worst_reg <= 1e-9,
        format!(
            "3000 vectors, Moreau defect {worst_moreau:.1e}, Fenchel-Young equality defect {worst_fy:.1e}, {fy_violations} inequality violations, regularizer defect {worst_reg:.1e}"
        ),
    )
}

fn width_bounds() -> Outcome {
    let config = ExperimentConfig {
        pairs: vec![(5, 500), (10, 1000), (20, 1000)],
        master_seed: 12,
        ..ExperimentConfig::new(ExperimentKind::WidthTable)
    };
    let rows = match run_width_table(&config) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("run failed: {e}")),
    };
    let mut pass = rows.len() == 3;
    let mut parts = Vec::new();
    for r in &rows {
        let bound = l1_width_upper_bound(r.k, r.n).unwrap();
        let ok = r.omega_hat <= bound + 3.0 * r.stderr;
        pass &= ok && r.pass;
        parts.push(format!("({},{}) {:.3} <= {:.3}", r.k, r.n, r.omega_hat, bound + 3.0 * r.stderr));
    }
    let mut gamma_fail = 0;
    for m in 1..=1000 {
        let g = gamma_m(m).unwrap().value;
        let mf = m as f64;
        if !(mf / (mf + 1.0).sqrt() <= g && g <= mf.sqrt()) {
            gamma_fail += 1;
        }
    }
    pass &= gamma_fail == 0;
    Outcome::new(pass, format!("{}; gamma_m bound failures for m <= 1000: {gamma_fail}", parts.join(", ")))
}

fn reproducibility() -> Outcome {
    let base = |kind| ExperimentConfig {
        n: 40,
        m: 24,
        k: 3,
        sigma: 0.1,
        trials: 40,
        master_seed: 99,
        width_samples: 400,
        lipschitz_pairs: 100,
        ..ExperimentConfig::new(kind)
    };
    let configs = vec![
        base(ExperimentKind::TailComparison),
        base(ExperimentKind::NseConvergence),
        base(ExperimentKind::ConcentrationPhi),
        base(ExperimentKind::LipschitzCheck),
        ExperimentConfig {
            m: 60,
            ..base(ExperimentKind::ConcentrationSmin)
        },
        ExperimentConfig {
            pairs: vec![(2, 40), (4, 60)],
            ..base(ExperimentKind::WidthTable)
        },
    ];
    let mut mismatches = Vec::new();
    for config in &configs {
        let render = |exec| {
            let r = run_experiment_with(config, exec).unwrap();
            (r.to_json_string().unwrap(), r.to_csv_string())
        };
        let first = render(Execution::Parallel);
        let second = render(Execution::Parallel);
        let serial = render(Execution::Serial);
        if first != second || first != serial {
            mismatches.push(format!("{:?}", config.kind));
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "{} kinds rerun twice and serially, mismatches: {:?}",
            configs.len(),
            mismatches
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let start = Instant::now();
    let (nse, resid) = nse_and_residual();
    let secs = start.elapsed().as_secs_f64();
    for (id, name, o) in [(1, "nse_prediction", nse), (2, "residual_prediction", resid)] {
        println!(
            "criterion {id:>2} {name:<28} {} [{secs:.1}s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o, secs));
    }
    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {name:<28} {} [{secs:.1}s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o, secs));
    };

    timed(3, "tail_inequalities", &tail_inequalities);
    timed(4, "smin_concentration", &smin_concentration);
    timed(5, "ao_lipschitz", &lipschitz);
    timed(6, "scalarization_oracle", &scalarization_oracle);
    timed(7, "closed_form_vs_numeric", &closed_form_vs_numeric);
    timed(8, "cone_projection_properties", &geometry_suite);
    timed(9, "solver_cross_validation", &solver_cross_validation);
    timed(10, "prox_conjugate_identities", &prox_identities);
    timed(11, "width_bounds", &width_bounds);
    timed(12, "reproducibility", &reproducibility);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
