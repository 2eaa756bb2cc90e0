use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cgmt_core::aoengine::{predict as predict_curve, DCurve, PredictionMethod};
use cgmt_core::ensembles::gamma_m;
use cgmt_core::experiments::{
    report::width_csv, run_experiment, run_width_table, width_source, ExperimentConfig, ExperimentKind,
    ExperimentReport, Verdict,
};
use cgmt_core::geometry::{gaussian_width, ConeSpec};

use crate::failure::{Failure, EXIT_VERDICT};
use crate::svg;

const DEFAULT_WIDTH_SAMPLES: usize = 10_000;

fn read_config(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = read_config(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Either `(n, m, k, sigma)` with a Monte Carlo width, or explicit
/// `(omega, sigma, m)` with `gamma_m` optional (exact value when absent).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictConfig {
    m: usize,
    sigma: f64,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    gamma_m: Option<f64>,
    #[serde(default)]
    omega: Option<f64>,
    #[serde(default)]
    width_samples: Option<usize>,
    #[serde(default)]
    master_seed: Option<u64>,
    /// Upper end of the `alpha` search; defaults to `10 sigma sqrt(n)`, or `10 sigma sqrt(m)` without `n`.
    #[serde(default)]
    k_bound: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PredictInputs {
    m: usize,
    sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    gamma_m: f64,
    omega: f64,
    k_bound: f64,
}

#[derive(Debug, Serialize)]
struct Provenance {
    tool_version: &'static str,
    gamma_m_source: &'static str,
    omega_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct PredictOutput {
    alpha_star: f64,
    d_star: f64,
    nse: f64,
    method: PredictionMethod,
    inputs: PredictInputs,
    provenance: Provenance,
}

pub fn predict(path: &Path) -> Result<u8, Failure> {
    let c: PredictConfig = parse(path)?;
    if !(c.sigma > 0.0 && c.sigma.is_finite()) {
        return Err(Failure::input(format!("sigma must be positive, got {}", c.sigma)));
    }
    if c.m == 0 {
        return Err(Failure::input("m must be positive"));
    }
    let explicit_gamma = c.gamma_m.is_some();
    let gamma = match c.gamma_m {
        Some(g) => g,
        None => gamma_m(c.m)?.value,
    };

    let (omega, stderr, samples, seed) = match (c.omega, c.n, c.k) {
        (Some(w), None, None) => (w, None, None, None),
        (None, Some(n), Some(k)) => {
            if k > n {
                return Err(Failure::input(format!("k = {k} exceeds n = {n}")));
            }
            let samples = c.width_samples.unwrap_or(DEFAULT_WIDTH_SAMPLES);
            let seed = c.master_seed.unwrap_or(0);
            let cone = ConeSpec::l1_descent((0..k).collect(), vec![1.0; k], n)?;
            let est = gaussian_width(&cone, width_source(seed, 0), samples)?;
            (est.omega, Some(est.omega_stderr), Some(samples), Some(seed))
        }
        _ => {
            return Err(Failure::input(
                "give either omega (explicit mode) or both n and k (Monte Carlo mode), not a mix",
            ))
        }
    };
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Failure::input(format!("omega must be >= 0, got {omega}")));
    }
    let k_bound = c
        .k_bound
        .unwrap_or_else(|| 10.0 * c.sigma * (c.n.unwrap_or(c.m) as f64).sqrt());
    let curve = DCurve::new(gamma, omega, c.sigma, c.m, k_bound)?;
    let p = predict_curve(&curve)?;
    let out = PredictOutput {
        alpha_star: p.alpha_star,
        d_star: p.d_star,
        nse: p.nse,
        method: p.method,
        inputs: PredictInputs {
            m: c.m,
            sigma: c.sigma,
            n: c.n,
            k: c.k,
            gamma_m: gamma,
            omega,
            k_bound,
        },
        provenance: Provenance {
            tool_version: cgmt_core::VERSION,
            gamma_m_source: if explicit_gamma { "explicit" } else { "exact" },
            omega_source: if c.omega.is_some() { "explicit" } else { "monte_carlo" },
            omega_stderr: stderr,
            width_samples: samples,
            master_seed: seed,
        },
    };
    println!("{}", to_pretty(&out)?);
    Ok(0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WidthConfig {
    #[serde(default)]
    kind: Option<ExperimentKind>,
    pairs: Vec<(usize, usize)>,
    #[serde(default)]
    width_samples: Option<usize>,
    #[serde(default)]
    master_seed: u64,
}

pub fn width(path: &Path) -> Result<u8, Failure> {
    let c: WidthConfig = parse(path)?;
    if let Some(kind) = c.kind {
        if kind != ExperimentKind::WidthTable {
            return Err(Failure::input(format!("width expects kind width_table, got {kind:?}")));
        }
    }
    let config = ExperimentConfig {
        pairs: c.pairs,
        width_samples: c.width_samples.unwrap_or(DEFAULT_WIDTH_SAMPLES),
        master_seed: c.master_seed,
        ..ExperimentConfig::new(ExperimentKind::WidthTable)
    };
    let rows = run_width_table(&config)?;
    print!("{}", width_csv(&rows));
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { EXIT_VERDICT })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindFilter {
    Any,
    Tails,
    Concentration,
}

impl KindFilter {
    fn admits(self, kind: ExperimentKind) -> bool {
        match self {
            Self::Any => true,
            Self::Tails => kind == ExperimentKind::TailComparison,
            Self::Concentration => matches!(
                kind,
                ExperimentKind::ConcentrationSmin | ExperimentKind::ConcentrationPhi | ExperimentKind::LipschitzCheck
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub config: PathBuf,
    pub out: PathBuf,
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    kind: ExperimentKind,
    all_pass: bool,
    verdicts: &'a [Verdict],
    files: Vec<String>,
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::internal(e.to_string()))
}

/// Creates `dir` if needed and confirms a file can be written there.
fn prepare_output_dir(dir: &Path) -> Result<(), Failure> {
    let unwritable = |e: std::io::Error| Failure::input(format!("output directory {} is not writable: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(unwritable)?;
    let probe = dir.join(".cgmt-lab-probe");
    fs::write(&probe, b"").map_err(unwritable)?;
    fs::remove_file(&probe).map_err(unwritable)
}

/// Writes through a temporary name so a failed write never leaves a truncated artifact.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn render(report: &ExperimentReport, req: &RunRequest) -> Result<Vec<(&'static str, String)>, Failure> {
    let kind = report.metadata.config.kind;
    let mut files = Vec::new();
    if req.json {
        files.push(("report.json", report.to_json_string()?));
    }
    if req.csv {
        if kind == ExperimentKind::WidthTable {
            files.push(("width_table.csv", width_csv(&report.width_table)));
        } else {
            files.push(("trials.csv", report.to_csv_string()));
        }
    }
    if req.svg {
        match kind {
            ExperimentKind::TailComparison => files.push(("cdf_overlay.svg", svg::cdf_overlay(&report.cdf_grid_values))),
            ExperimentKind::NseConvergence => {
                let sigma = report.metadata.config.sigma;
                let nse: Vec<f64> = report
                    .per_trial
                    .iter()
                    .map(|r| (r.w_hat_norm / sigma).powi(2))
                    .collect();
                let predicted = report.summary.predicted_nse.unwrap_or(f64::NAN);
                files.push(("nse_histogram.svg", svg::nse_histogram(&nse, predicted)));
            }
            other => log::info!("no plot defined for {other:?}; skipping --svg"),
        }
    }
    Ok(files)
}

pub fn experiment(req: &RunRequest, filter: KindFilter) -> Result<u8, Failure> {
    let text = read_config(&req.config)?;
    let config = ExperimentConfig::from_json(&text)?;
    config.validate()?;
    if !filter.admits(config.kind) {
        return Err(Failure::input(format!(
            "{:?} experiments are not accepted by this subcommand",
            config.kind
        )));
    }
    prepare_output_dir(&req.out)?;

    let report = run_experiment(&config)?;
    let files = render(&report, req)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in &files {
        let path = req.out.join(name);
        write_atomic(&path, contents)?;
        written.push(path.display().to_string());
    }
    let summary = RunSummary {
        kind: config.kind,
        all_pass: report.all_pass(),
        verdicts: &report.verdicts,
        files: written,
    };
    println!("{}", to_pretty(&summary)?);
    Ok(if report.all_pass() { 0 } else { EXIT_VERDICT })
}
