use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TailComparison,
    NseConvergence,
    ConcentrationSmin,
    ConcentrationPhi,
    LipschitzCheck,
    WidthTable,
}

impl ExperimentKind {
    /// Kinds whose verdicts rest on empirical CDFs or frequencies.
    pub fn is_cdf_based(self) -> bool {
        matches!(
            self,
            Self::TailComparison | Self::ConcentrationSmin | Self::ConcentrationPhi
        )
    }

    fn uses_cone_problem(self) -> bool {
        matches!(
            self,
            Self::TailComparison | Self::NseConvergence | Self::ConcentrationPhi | Self::LipschitzCheck
        )
    }
}

pub const MIN_CDF_TRIALS: usize = 30;
/// Confidence level of the DKW band behind the default slack.
pub const DKW_ALPHA: f64 = 0.01;

/// Two-sided DKW band half-width at 99%, doubled: `2 sqrt(ln(2/0.01) / (2 trials))`.
pub fn dkw_slack(trials: usize) -> f64 {
    2.0 * ((2.0 / DKW_ALPHA).ln() / (2.0 * trials as f64)).sqrt()
}

fn default_epsilon() -> f64 {
    0.1
}
fn default_cdf_grid() -> usize {
    100
}
fn default_width_samples() -> usize {
    10_000
}
fn default_lipschitz_pairs() -> usize {
    1_000
}
fn default_nse_tolerance() -> f64 {
    0.15
}
fn default_residual_tolerance() -> f64 {
    0.10
}

/// One Monte Carlo campaign. Fields a kind does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    /// Sparsity of the true signal; its support is the first `k` coordinates.
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Reported linear-regime margin `(1-eps) gamma_m > omega > eps gamma_m`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_cdf_grid")]
    pub cdf_grid: usize,
    /// Verdict slack; `None` resolves to [`dkw_slack`].
    #[serde(default)]
    pub slack: Option<f64>,
    /// Monte Carlo samples for width estimates.
    #[serde(default = "default_width_samples")]
    pub width_samples: usize,
    /// Bound `K` on `||w||` (PO) and `alpha` (AO); `None` resolves to `10 sigma sqrt(n)`.
    #[serde(default)]
    pub k_bound: Option<f64>,
    /// Deviation levels for the concentration kinds; `None` resolves per kind.
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    /// `(k, n)` pairs for `width_table`.
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
    /// Paired AO draws for the Lipschitz sub-check of `concentration_phi`.
    #[serde(default = "default_lipschitz_pairs")]
    pub lipschitz_pairs: usize,
    /// Force `z = 0` (and a noiseless AO).
    #[serde(default)]
    pub zero_noise: bool,
    #[serde(default = "default_nse_tolerance")]
    pub nse_tolerance: f64,
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
}

impl ExperimentConfig {
    /// A config of `kind` with every optional field at its default.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            n: 0,
            m: 0,
            k: 0,
            sigma: 0.0,
            lambda: 0.0,
            trials: 0,
            master_seed: 0,
            epsilon: default_epsilon(),
            cdf_grid: default_cdf_grid(),
            slack: None,
            width_samples: default_width_samples(),
            k_bound: None,
            t_grid: None,
            pairs: Vec::new(),
            lipschitz_pairs: default_lipschitz_pairs(),
            zero_noise: false,
            nse_tolerance: default_nse_tolerance(),
            residual_tolerance: default_residual_tolerance(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if let Some(s) = self.slack {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("slack must be >= 0, got {s}"));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.kind == ExperimentKind::WidthTable {
            if self.pairs.is_empty() {
                return bad("width_table needs at least one (k, n) pair".into());
            }
            if let Some(&(k, n)) = self.pairs.iter().find(|(k, n)| *k == 0 || k > n) {
                return bad(format!("width pair needs 1 <= k <= n, got ({k}, {n})"));
            }
            if self.width_samples < 2 {
                return bad("width_samples must be >= 2".into());
            }
            return Ok(());
        }
        if self.n == 0 || self.m == 0 {
            return bad("n and m must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.kind.is_cdf_based() && self.trials < MIN_CDF_TRIALS {
            return bad(format!(
                "{:?} needs at least {MIN_CDF_TRIALS} trials, got {}",
                self.kind, self.trials
            ));
        }
        if self.kind == ExperimentKind::ConcentrationSmin {
            if self.m <= self.n {
                return bad(format!("concentration_smin needs m > n, got m={}, n={}", self.m, self.n));
            }
        } else if self.kind.uses_cone_problem() {
            if self.k > self.n {
                return bad(format!("k = {} exceeds n = {}", self.k, self.n));
            }
            if !(self.sigma > 0.0 && self.sigma.is_finite()) {
                return bad(format!("sigma must be positive, got {}", self.sigma));
            }
            if let Some(kb) = self.k_bound {
                if !(kb > 0.0 && kb.is_finite()) {
                    return bad(format!("k_bound must be positive, got {kb}"));
                }
            }
            if self.width_samples < 2 {
                return bad("width_samples must be >= 2".into());
            }
        }
        if self.kind.is_cdf_based() && self.cdf_grid < 2 {
            return bad("cdf_grid must be >= 2".into());
        }
        if let Some(t) = &self.t_grid {
            if t.is_empty() || t.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return bad("t_grid entries must be finite and >= 0".into());
            }
        }
        if self.kind == ExperimentKind::ConcentrationPhi && self.lipschitz_pairs == 0 {
            return bad("lipschitz_pairs must be positive".into());
        }
        if !(self.nse_tolerance > 0.0 && self.residual_tolerance > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    /// `K = 10 sigma sqrt(n)` unless set.
    pub fn resolved_k_bound(&self) -> f64 {
        self.k_bound
            .unwrap_or_else(|| 10.0 * self.sigma * (self.n as f64).sqrt())
    }

    pub fn resolved_slack(&self) -> f64 {
        self.slack.unwrap_or_else(|| dkw_slack(self.trials.max(1)))
    }

    /// Copy with every defaulted quantity written out, as embedded in reports.
    /// `t_grid` is resolved by the runner since its default depends on the kind.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if c.kind != ExperimentKind::WidthTable {
            c.slack = Some(self.resolved_slack());
            if self.kind.uses_cone_problem() {
                c.k_bound = Some(self.resolved_k_bound());
            }
        }
        c
    }
}
