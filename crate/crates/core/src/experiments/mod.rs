//! Seeded Monte Carlo campaigns pairing primary solves with auxiliary values.
//!
//! Trial `i` draws everything from stream `i` of the master seed, in the
//! order `G` (row-major), `z`, `g`, `h`, `h_noise`. Quantities shared by all
//! trials (the true signal, width estimates, independent AO batches) use
//! reserved streams whose indices sit far above any trial index.
//!
//! The primary objective is reported normalized, `Phi = ||A w_hat - z|| / sqrt(m)`,
//! on the same scale as the auxiliary value.

pub mod config;
pub mod exec;
pub mod report;

pub use config::{dkw_slack, ExperimentConfig, ExperimentKind};
pub use exec::{map_indexed, map_indexed_with, Execution};
pub use report::{
    width_csv, CdfPoint, Claim, ExperimentReport, Metadata, Summary, TrialRecord, Verdict, WidthRow, CSV_HEADER,
    WIDTH_CSV_HEADER,
};

use crate::aoengine::{ao_cone_lipschitz, ao_cone_value_augmented, ao_smin_value, predict, DCurve};
use crate::ensembles::{gamma_m, RandomSource};
use crate::geometry::{gaussian_width_with, l1_width_upper_bound, ConeSpec, GeometryStats};
use crate::linalg::{mean_stderr, median, Vector};
use crate::posolvers::{smin_via_po, solve_cone_lasso, Bounds, ProblemInstance};
use crate::proxcalc::{LossSpec, RegularizerSpec};
use crate::{Error, Result, VERSION};

/// Largest tolerated fraction of unconverged primary solves.
pub const MAX_UNCONVERGED_FRACTION: f64 = 0.05;

const TAG_SHIFT: u32 = 56;
const SIGNAL_TAG: u64 = 0xFF;
const WIDTH_TAG: u64 = 0xFE;
const AO_BATCH_TAG: u64 = 0xFD;
const LIPSCHITZ_TAG: u64 = 0xFC;

fn reserved(seed: u64, tag: u64, index: u64) -> RandomSource {
    RandomSource::new(seed, (tag << TAG_SHIFT) | index)
}

/// Reserved stream for width estimates. Index 0 feeds the NSE prediction and
/// index `1 + j` the `j`-th `width_table` pair, so a standalone prediction
/// with the same seed reproduces the width an NSE run uses.
pub fn width_source(master_seed: u64, index: u64) -> RandomSource {
    reserved(master_seed, WIDTH_TAG, index)
}

fn claim(id: &str) -> Claim {
    let statement = match id {
        "tail_lower" => "P(Phi < c) <= 2 P(phi <= c) for every c (Gaussian min-max comparison, lower tail)",
        "tail_upper" => {
            "P(Phi > c) <= 2 P(phi >= c) for every c when the sets are convex and the objective convex-concave"
        }
        "nse_prediction" => {
            "||w_hat||^2 / sigma^2 -> omega^2 / (gamma_m^2 - omega^2) for the cone-constrained LASSO as sigma -> 0"
        }
        "residual_prediction" => {
            "||y - A x_hat|| / (sqrt(m) sigma) -> sqrt(gamma_m^2 - omega^2) / sqrt(m) as sigma -> 0"
        }
        "smin_tail" => "P(sigma_min(G) < sqrt(m) - sqrt(n) - t) <= 4 exp(-t^2 / 4)",
        "ao_smin_mean" => "E(||g|| - ||h||) = gamma_m - gamma_n",
        "phi_concentration" => "P(|Phi - E phi| > t) <= 4 exp(-t^2 / (4 R_x^2 R_y^2))",
        "ao_lipschitz" => "phi(g, h) is Lipschitz with constant sqrt(2) R_x R_y",
        "width_bound" => "omega^2 <= 2 k log(2n/k) for the l1 descent cone at a k-sparse point",
        _ => "",
    };
    Claim {
        claim_id: id.to_string(),
        statement: statement.to_string(),
    }
}

fn metadata(config: &ExperimentConfig, claims: &[&str]) -> Metadata {
    Metadata {
        tool_version: VERSION.to_string(),
        master_seed: config.master_seed,
        config: config.clone(),
        claims: claims.iter().map(|c| claim(c)).collect(),
    }
}

/// True signal: support on the first `k` coordinates, standard normal
/// entries scaled to unit norm.
pub fn true_signal(config: &ExperimentConfig) -> Result<Vector> {
    let mut x0 = Vector::zeros(config.n);
    if config.k > 0 {
        let v = reserved(config.master_seed, SIGNAL_TAG, 0).stream().vector(config.k)?;
        let scale = v.norm();
        for i in 0..config.k {
            x0[i] = v[i] / scale;
        }
    }
    Ok(x0)
}

fn signal_and_cone(config: &ExperimentConfig) -> Result<(Vector, ConeSpec)> {
    let x0 = true_signal(config)?;
    let cone = ConeSpec::l1_descent_at(x0.as_slice())?;
    Ok((x0, cone))
}

/// Outcome of one cone-LASSO trial and its paired AO draw.
struct ConeTrial {
    record: TrialRecord,
    exceeds_bound: bool,
    residual_norm: f64,
}

fn cone_trial(config: &ExperimentConfig, x0: &Vector, cone: &ConeSpec, index: usize) -> Result<ConeTrial> {
    let (m, n, sigma) = (config.m, config.n, config.sigma);
    let k_bound = config.resolved_k_bound();
    let mut stream = RandomSource::new(config.master_seed, index as u64).stream();
    let a = stream.matrix(m, n)?;
    let mut z = stream.vector(m)? * sigma;
    if config.zero_noise {
        z.fill(0.0);
    }
    let g = stream.vector(m)?;
    let h = stream.vector(n)?;
    let h_noise = stream.next_normal();

    let instance = ProblemInstance::new(a, z, x0.clone(), sigma, LossSpec::L2Norm, RegularizerSpec::zero())?
        .with_cone(cone.clone())?;
    let k_u = instance.bounds().k_u;
    let instance = instance.with_bounds(Bounds { k_w: k_bound, k_u })?;
    let po = solve_cone_lasso(&instance)?;

    let ao_sigma = if config.zero_noise { 0.0 } else { sigma };
    let ao = ao_cone_value_augmented(g.as_slice(), h.as_slice(), h_noise, ao_sigma, cone, k_bound)?;
    let sqrt_m = (m as f64).sqrt();
    Ok(ConeTrial {
        record: TrialRecord {
            trial_index: index,
            phi_po: po.objective / sqrt_m,
            w_hat_norm: po.w_hat.norm(),
            phi: ao.phi,
            ao_norm: ao.minimizer_norm,
            converged: po.converged,
        },
        exceeds_bound: po.exceeds_bound,
        residual_norm: po.residual_norm,
    })
}

fn run_cone_trials(config: &ExperimentConfig, exec: Execution) -> Result<(Vec<ConeTrial>, ConeSpec)> {
    let (x0, cone) = signal_and_cone(config)?;
    let trials: Vec<ConeTrial> = map_indexed_with(exec, config.trials, |i| cone_trial(config, &x0, &cone, i))
        .into_iter()
        .collect::<Result<_>>()?;
    let unconverged = trials.iter().filter(|t| !t.record.converged).count();
    if unconverged as f64 > MAX_UNCONVERGED_FRACTION * config.trials as f64 {
        return Err(Error::ExperimentInvalid(format!(
            "{unconverged} of {} primary solves did not converge",
            config.trials
        )));
    }
    Ok((trials, cone))
}

fn base_summary(trials: &[ConeTrial]) -> Summary {
    Summary {
        unconverged_trials: trials.iter().filter(|t| !t.record.converged).count(),
        bound_exceeded_trials: trials.iter().filter(|t| t.exceeds_bound).count(),
        ..Summary::default()
    }
}

/// Evaluation points spanning the pooled range of both samples.
fn cdf_grid(a: &[f64], b: &[f64], points: usize) -> Vec<f64> {
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    (0..points)
        .map(|j| lo + (hi - lo) * j as f64 / (points - 1) as f64)
        .collect()
}

fn fraction(values: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    values.iter().filter(|v| pred(**v)).count() as f64 / values.len() as f64
}

/// Runs `config` with the default execution mode.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    config.validate()?;
    match config.kind {
        ExperimentKind::TailComparison => tail_comparison(config, exec),
        ExperimentKind::NseConvergence => nse_convergence(config, exec),
        ExperimentKind::ConcentrationSmin => concentration_smin(config, exec),
        ExperimentKind::ConcentrationPhi => concentration_phi(config, exec),
        ExperimentKind::LipschitzCheck => lipschitz_check(config, exec),
        ExperimentKind::WidthTable => width_table_report(config, exec),
    }
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::InvalidConfig(format!(
            "expected a {kind:?} config, got {:?}",
            config.kind
        )));
    }
    config.validate()
}

/// Lower- and upper-tail comparison of the primary value against its AO.
pub fn run_tail_comparison(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::TailComparison)?;
    tail_comparison(config, Execution::default())
}

fn tail_comparison(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let resolved = config.resolved();
    let slack = config.resolved_slack();
    let (trials, _) = run_cone_trials(config, exec)?;
    let po: Vec<f64> = trials.iter().map(|t| t.record.phi_po).collect();
    let ao: Vec<f64> = trials.iter().map(|t| t.record.phi).collect();

    let mut points = Vec::with_capacity(config.cdf_grid);
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for c in cdf_grid(&po, &ao, config.cdf_grid) {
        let po_cdf = fraction(&po, |v| v < c);
        let ao_cdf = fraction(&ao, |v| v <= c);
        let ao_below = fraction(&ao, |v| v < c);
        lower = lower.min(2.0 * ao_cdf + slack - po_cdf);
        upper = upper.min(2.0 * (1.0 - ao_below) + slack - (1.0 - po_cdf));
        points.push(CdfPoint { c, po_cdf, ao_cdf });
    }
    Ok(ExperimentReport {
        metadata: metadata(&resolved, &["tail_lower", "tail_upper"]),
        summary: base_summary(&trials),
        per_trial: trials.into_iter().map(|t| t.record).collect(),
        cdf_grid_values: points,
        verdicts: vec![
            Verdict::from_margin("tail_lower", lower),
            Verdict::from_margin("tail_upper", upper),
        ],
        width_table: Vec::new(),
    })
}

/// Empirical NSE and residual against the closed-form prediction.
pub fn run_nse_convergence(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::NseConvergence)?;
    nse_convergence(config, Execution::default())
}

fn nse_convergence(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let resolved = config.resolved();
    let (_, cone) = signal_and_cone(config)?;
    let stats = GeometryStats::estimate(
        &cone,
        config.m,
        width_source(config.master_seed, 0),
        config.width_samples,
    )?;
    let (gamma, omega) = (stats.gamma_m, stats.omega);
    if omega >= gamma || (config.m as f64) <= omega * omega {
        return Err(Error::Regime(format!(
            "need gamma_m > omega and m > omega^2; gamma_m = {gamma}, omega = {omega}, m = {}",
            config.m
        )));
    }
    let curve = DCurve::from_stats(&stats, config.sigma, config.resolved_k_bound())?;
    let prediction = predict(&curve)?;
    let predicted_residual = ((gamma - omega) * (gamma + omega)).sqrt() / (config.m as f64).sqrt();

    let (trials, _) = run_cone_trials(config, exec)?;
    let s2 = config.sigma * config.sigma;
    let nse: Vec<f64> = trials.iter().map(|t| t.record.w_hat_norm.powi(2) / s2).collect();
    let resid: Vec<f64> = trials
        .iter()
        .map(|t| t.residual_norm / ((config.m as f64).sqrt() * config.sigma))
        .collect();
    let median_nse = median(&nse);
    let median_resid = median(&resid);
    let nse_gap = relative_gap(median_nse, prediction.nse);
    let resid_gap = relative_gap(median_resid, predicted_residual);

    let summary = Summary {
        median_nse_empirical: Some(median_nse),
        predicted_nse: Some(prediction.nse),
        relative_gap: Some(nse_gap),
        median_residual_ratio: Some(median_resid),
        predicted_residual_ratio: Some(predicted_residual),
        residual_relative_gap: Some(resid_gap),
        omega_estimate: Some(omega),
        omega_stderr: Some(stats.omega_stderr),
        gamma_m: Some(gamma),
        in_linear_regime: Some(stats.in_linear_regime(config.epsilon)),
        ..base_summary(&trials)
    };
    Ok(ExperimentReport {
        metadata: metadata(&resolved, &["nse_prediction", "residual_prediction"]),
        summary,
        per_trial: trials.into_iter().map(|t| t.record).collect(),
        cdf_grid_values: Vec::new(),
        verdicts: vec![
            Verdict::from_margin("nse_prediction", config.nse_tolerance - nse_gap),
            Verdict::from_margin("residual_prediction", config.residual_tolerance - resid_gap),
        ],
        width_table: Vec::new(),
    })
}

/// `|a - b| / |b|`, or `|a|` when `b = 0`.
fn relative_gap(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        (value - reference).abs() / reference.abs()
    }
}

/// Smallest-singular-value tail bound and the AO mean identity.
pub fn run_concentration_smin(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::ConcentrationSmin)?;
    concentration_smin(config, Execution::default())
}

fn concentration_smin(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let (m, n) = (config.m, config.n);
    let t_grid = config.t_grid.clone().unwrap_or_else(|| vec![1.0, 2.0, 3.0, 4.0]);
    let mut resolved = config.resolved();
    resolved.t_grid = Some(t_grid.clone());
    let slack = config.resolved_slack();

    let records: Vec<TrialRecord> = map_indexed_with(exec, config.trials, |i| -> Result<TrialRecord> {
        let mut stream = RandomSource::new(config.master_seed, i as u64).stream();
        let g_mat = stream.matrix(m, n)?;
        let g = stream.vector(m)?;
        let h = stream.vector(n)?;
        Ok(TrialRecord {
            trial_index: i,
            phi_po: smin_via_po(&g_mat)?,
            w_hat_norm: 1.0,
            phi: ao_smin_value(g.as_slice(), h.as_slice()),
            ao_norm: 1.0,
            converged: true,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let smin: Vec<f64> = records.iter().map(|r| r.phi_po).collect();
    let center = (m as f64).sqrt() - (n as f64).sqrt();
    let tail_margin = t_grid
        .iter()
        .map(|t| {
            let freq = fraction(&smin, |v| v < center - t);
            4.0 * (-t * t / 4.0).exp() + slack - freq
        })
        .fold(f64::INFINITY, f64::min);

    let ao: Vec<f64> = records.iter().map(|r| r.phi).collect();
    let (ao_mean, ao_stderr) = mean_stderr(&ao);
    let exact = gamma_m(m)?.value - gamma_m(n)?.value;
    let mean_margin = 3.0 * ao_stderr - (ao_mean - exact).abs();

    Ok(ExperimentReport {
        metadata: metadata(&resolved, &["smin_tail", "ao_smin_mean"]),
        per_trial: records,
        cdf_grid_values: Vec::new(),
        verdicts: vec![
            Verdict::from_margin("smin_tail", tail_margin),
            Verdict::from_margin("ao_smin_mean", mean_margin),
        ],
        summary: Summary {
            ao_mean: Some(ao_mean),
            ao_stderr: Some(ao_stderr),
            gamma_m: Some(gamma_m(m)?.value),
            ..Summary::default()
        },
        width_table: Vec::new(),
    })
}

/// Maximum Lipschitz ratio minus the bound over paired AO draws; nonpositive
/// means no violations. Even pairs are independent, odd pairs are small
/// perturbations.
fn lipschitz_worst(config: &ExperimentConfig, cone: &ConeSpec, pairs: usize, exec: Execution) -> Result<(f64, usize)> {
    let (m, n) = (config.m, config.n);
    let k_bound = config.resolved_k_bound();
    let sigma = if config.zero_noise { 0.0 } else { config.sigma };
    let lip = ao_cone_lipschitz(m, sigma, k_bound);
    let excess: Vec<f64> = map_indexed_with(exec, pairs, |i| -> Result<f64> {
        let mut st = reserved(config.master_seed, LIPSCHITZ_TAG, i as u64).stream();
        let mut draw = |scale: f64| -> Result<Vector> { Ok(st.vector(m + n + 1)? * scale) };
        let first = draw(1.0)?;
        let second = if i % 2 == 0 { draw(1.0)? } else { &first + draw(1e-2)? };
        let eval = |v: &Vector| {
            ao_cone_value_augmented(&v.as_slice()[..m], &v.as_slice()[m..m + n], v[m + n], sigma, cone, k_bound)
                .map(|s| s.phi)
        };
        let gap = (eval(&first)? - eval(&second)?).abs();
        Ok(gap - lip * (&first - &second).norm())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let violations = excess.iter().filter(|e| **e > 0.0).count();
    let worst = excess.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((worst, violations))
}

/// Concentration of the primary value around the AO mean, plus a Lipschitz sub-check.
pub fn run_concentration_phi(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::ConcentrationPhi)?;
    concentration_phi(config, Execution::default())
}

fn concentration_phi(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let k_bound = config.resolved_k_bound();
    let sigma_ao = if config.zero_noise { 0.0 } else { config.sigma };
    // R_x R_y after the 1/sqrt(m) normalization: ||(w, sigma)|| <= sqrt(K^2 + sigma^2), ||u|| <= 1.
    let r = k_bound.hypot(sigma_ao) / (config.m as f64).sqrt();
    let t_grid = config
        .t_grid
        .clone()
        .unwrap_or_else(|| [0.0, 1.0, 2.0, 3.0, 4.0].iter().map(|c| c * r).collect());
    let mut resolved = config.resolved();
    resolved.t_grid = Some(t_grid.clone());
    let slack = config.resolved_slack();

    let (trials, cone) = run_cone_trials(config, exec)?;
    let (m, n) = (config.m, config.n);
    let batch: Vec<f64> = map_indexed_with(exec, config.trials, |i| -> Result<f64> {
        let mut st = reserved(config.master_seed, AO_BATCH_TAG, i as u64).stream();
        let g = st.vector(m)?;
        let h = st.vector(n)?;
        let h_noise = st.next_normal();
        Ok(ao_cone_value_augmented(g.as_slice(), h.as_slice(), h_noise, sigma_ao, &cone, k_bound)?.phi)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let (ao_mean, ao_stderr) = mean_stderr(&batch);

    let po: Vec<f64> = trials.iter().map(|t| t.record.phi_po).collect();
    let conc_margin = t_grid
        .iter()
        .map(|t| {
            let freq = fraction(&po, |v| (v - ao_mean).abs() > *t);
            4.0 * (-t * t / (4.0 * r * r)).exp() + slack - freq
        })
        .fold(f64::INFINITY, f64::min);
    let (worst, violations) = lipschitz_worst(config, &cone, config.lipschitz_pairs, exec)?;
    let lip_margin = if violations == 0 { -worst } else { -worst.max(f64::MIN_POSITIVE) };

    Ok(ExperimentReport {
        metadata: metadata(&resolved, &["phi_concentration", "ao_lipschitz"]),
        summary: Summary {
            ao_mean: Some(ao_mean),
            ao_stderr: Some(ao_stderr),
            ..base_summary(&trials)
        },
        per_trial: trials.into_iter().map(|t| t.record).collect(),
        cdf_grid_values: Vec::new(),
        verdicts: vec![
            Verdict::from_margin("phi_concentration", conc_margin),
            Verdict::from_margin("ao_lipschitz", lip_margin),
        ],
        width_table: Vec::new(),
    })
}

/// Lipschitz bound on `trials` paired AO draws; passes only with zero violations.
pub fn run_lipschitz_check(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, ExperimentKind::LipschitzCheck)?;
    lipschitz_check(config, Execution::default())
}

fn lipschitz_check(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let resolved = config.resolved();
    let (_, cone) = signal_and_cone(config)?;
    let (worst, violations) = lipschitz_worst(config, &cone, config.trials, exec)?;
    let margin = if violations == 0 { -worst } else { -worst.max(f64::MIN_POSITIVE) };
    Ok(ExperimentReport {
        metadata: metadata(&resolved, &["ao_lipschitz"]),
        per_trial: Vec::new(),
        cdf_grid_values: Vec::new(),
        verdicts: vec![Verdict::from_margin("ao_lipschitz", margin)],
        summary: Summary::default(),
        width_table: Vec::new(),
    })
}

/// Monte Carlo width of the l1 descent cone per `(k, n)` pair against the
/// `sqrt(2 k ln(2n/k))` bound, with pass meaning `omega_hat <= bound + 3 stderr`.
pub fn run_width_table(config: &ExperimentConfig) -> Result<Vec<WidthRow>> {
    expect_kind(config, ExperimentKind::WidthTable)?;
    width_rows(config, Execution::default())
}

fn width_rows(config: &ExperimentConfig, exec: Execution) -> Result<Vec<WidthRow>> {
    config
        .pairs
        .iter()
        .enumerate()
        .map(|(j, &(k, n))| {
            let cone = ConeSpec::l1_descent((0..k).collect(), vec![1.0; k], n)?;
            let source = width_source(config.master_seed, 1 + j as u64);
            let est = gaussian_width_with(exec, &cone, source, config.width_samples)?;
            let bound = l1_width_upper_bound(k, n)?;
            Ok(WidthRow {
                k,
                n,
                omega_hat: est.omega,
                stderr: est.omega_stderr,
                bound,
                pass: est.omega <= bound + 3.0 * est.omega_stderr,
            })
        })
        .collect()
}

fn width_table_report(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let rows = width_rows(config, exec)?;
    let margin = rows
        .iter()
        .map(|r| r.bound + 3.0 * r.stderr - r.omega_hat)
        .fold(f64::INFINITY, f64::min);
    Ok(ExperimentReport {
        metadata: metadata(config, &["width_bound"]),
        per_trial: Vec::new(),
        cdf_grid_values: Vec::new(),
        verdicts: vec![Verdict::from_margin("width_bound", margin)],
        summary: Summary::default(),
        width_table: rows,
    })
}
