//! Stage-wise Bernoulli likelihood and the recursive Beta posterior over the
//! probability that the series converges.
//!
//! At stage `j` the indicator `y_j = [|S_j| <= c_j]` is observed. The stage-`k`
//! posterior is
//!
//! ```text
//! Beta( sum_{j<=k} alpha_j + sum y_j ,  k + sum_{j<=k} beta_j - sum y_j )
//! ```
//!
//! with `alpha_j = beta_j = 1/j^2` by default. The non-recursive variant uses
//! only the current stage: `Beta(alpha_k + y_k, 1 + beta_k - y_k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameter sequences `alpha_j`, `beta_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub enum PriorSchedule {
    /// `alpha_j = beta_j = 1/j^2`.
    #[default]
    InverseSquare,
    /// `alpha_j = beta_j = j^-p`, `p > 0`.
    InversePower(f64),
    /// Fixed hyperparameters. The posterior mean of the non-recursive mode
    /// then tends to 1/2 for the prior, so this is mostly useful in tests.
    Constant { alpha: f64, beta: f64 },
}


impl PriorSchedule {
    pub fn alpha(&self, j: u64) -> f64 {
        match *self {
            PriorSchedule::InverseSquare => {
                let j = j as f64;
                1.0 / (j * j)
            }
            PriorSchedule::InversePower(p) => (j as f64).powf(-p),
            PriorSchedule::Constant { alpha, .. } => alpha,
        }
    }

    pub fn beta(&self, j: u64) -> f64 {
        match *self {
            PriorSchedule::Constant { beta, .. } => beta,
            _ => self.alpha(j),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PriorSchedule::InverseSquare => true,
            PriorSchedule::InversePower(p) => p.is_finite() && p > 0.0,
            PriorSchedule::Constant { alpha, beta } => {
                alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid prior schedule {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PosteriorMode {
    Recursive,
    NonRecursive,
}

/// One observed stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageObservation {
    pub stage: u64,
    pub block_sum: f64,
    pub bound: f64,
    /// `|block_sum| <= bound`; equality counts as a hit.
    pub y: bool,
}

impl StageObservation {
    pub fn indicator(&self) -> u8 {
        self.y as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    k: u64,
    sum_alpha: f64,
    sum_beta: f64,
    sum_y: u64,
    last_y: bool,
    mode: PosteriorMode,
    schedule: PriorSchedule,
}

impl Default for PosteriorState {
    fn default() -> Self {
        PosteriorState::recursive()
    }
}

impl PosteriorState {
    pub fn new(mode: PosteriorMode, schedule: PriorSchedule) -> Result<Self> {
        schedule.validate()?;
        Ok(PosteriorState {
            k: 0,
            sum_alpha: 0.0,
            sum_beta: 0.0,
            sum_y: 0,
            last_y: false,
            mode,
            schedule,
        })
    }

    /// Recursive mode with `alpha_j = beta_j = 1/j^2`.
    pub fn recursive() -> Self {
        PosteriorState {
            k: 0,
            sum_alpha: 0.0,
            sum_beta: 0.0,
            sum_y: 0,
            last_y: false,
            mode: PosteriorMode::Recursive,
            schedule: PriorSchedule::InverseSquare,
        }
    }

    pub fn stages(&self) -> u64 {
        self.k
    }
    pub fn sum_alpha(&self) -> f64 {
        self.sum_alpha
    }
    pub fn sum_beta(&self) -> f64 {
        self.sum_beta
    }
    pub fn sum_y(&self) -> u64 {
        self.sum_y
    }
    pub fn mode(&self) -> PosteriorMode {
        self.mode
    }
    pub fn schedule(&self) -> PriorSchedule {
        self.schedule
    }

    /// Consumes one stage and returns the successor state.
    pub fn observe(&self, block_sum: f64, bound: f64) -> Result<(PosteriorState, StageObservation)> {
        let mut next = *self;
        let obs = next.update(block_sum, bound)?;
        Ok((next, obs))
    }

    /// In-place form of [`observe`](Self::observe).
    pub fn update(&mut self, block_sum: f64, bound: f64) -> Result<StageObservation> {
        let stage = self.k + 1;
        if !block_sum.is_finite() {
            return Err(Error::NonFinite {
                index: stage,
                value: block_sum,
            });
        }
        if !bound.is_finite() {
            return Err(Error::NonFinite {
                index: stage,
                value: bound,
            });
        }
        if bound < 0.0 {
            return Err(Error::domain(format!("negative bound {bound} at stage {stage}")));
        }
        let y = block_sum.abs() <= bound;
        self.k = stage;
        self.sum_alpha += self.schedule.alpha(stage);
        self.sum_beta += self.schedule.beta(stage);
        self.sum_y += y as u64;
        self.last_y = y;
        Ok(StageObservation {
            stage,
            block_sum,
            bound,
            y,
        })
    }

    /// Shape parameters of the current posterior.
    pub fn beta_params(&self) -> Result<(f64, f64)> {
        if self.k == 0 {
            return Err(Error::NoData);
        }
        Ok(match self.mode {
            PosteriorMode::Recursive => {
                let y = self.sum_y as f64;
                (self.sum_alpha + y, self.k as f64 + self.sum_beta - y)
            }
            PosteriorMode::NonRecursive => {
                let y = self.last_y as u8 as f64;
                let a = self.schedule.alpha(self.k);
                let b = self.schedule.beta(self.k);
                (a + y, 1.0 + b - y)
            }
        })
    }

    pub fn mean(&self) -> Result<f64> {
        if self.k == 0 {
            return Err(Error::NoData);
        }
        match self.mode {
            PosteriorMode::Recursive => Ok((self.sum_alpha + self.sum_y as f64)
                / (self.k as f64 + self.sum_alpha + self.sum_beta)),
            PosteriorMode::NonRecursive => posterior_mean_nonrecursive(
                self.last_y,
                self.schedule.alpha(self.k),
                self.schedule.beta(self.k),
            ),
        }
    }

    pub fn variance(&self) -> Result<f64> {
        let (a, b) = self.beta_params()?;
        Ok(beta_variance(a, b))
    }
}

fn beta_variance(a: f64, b: f64) -> f64 {
    let s = a + b;
    a * b / (s * s * (s + 1.0))
}

/// `(alpha_k + y_k) / (1 + alpha_k + beta_k)`.
pub fn posterior_mean_nonrecursive(y: bool, alpha: f64, beta: f64) -> Result<f64> {
    check_hyper(alpha, beta)?;
    Ok((alpha + y as u8 as f64) / (1.0 + alpha + beta))
}

pub fn posterior_variance_nonrecursive(y: bool, alpha: f64, beta: f64) -> Result<f64> {
    check_hyper(alpha, beta)?;
    let y = y as u8 as f64;
    Ok(beta_variance(alpha + y, 1.0 + beta - y))
}

fn check_hyper(alpha: f64, beta: f64) -> Result<()> {
    if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "hyperparameters must be positive, got alpha={alpha}, beta={beta}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLabel {
    Convergent,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictLabel::Convergent => "convergent",
            VerdictLabel::Divergent => "divergent",
            VerdictLabel::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub final_mean: f64,
    pub final_variance: f64,
    /// Least-squares slope of the posterior mean per stage over the tail window.
    pub tail_slope: f64,
}

/// Finite-trace decision thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub window: usize,
    pub mean_high: f64,
    pub mean_low: f64,
    pub slope_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            window: 500,
            mean_high: 0.9,
            mean_low: 0.1,
            slope_tol: 1e-6,
        }
    }
}

/// Labels a trace of `(mean, variance)` pairs.
///
/// Divergent when the final mean is at most `mean_low` or the tail is falling
/// faster than `slope_tol` per stage; convergent when the final mean is at
/// least `mean_high` and the tail is not falling; inconclusive otherwise.
pub fn classify(trace: &[(f64, f64)], cfg: &ClassifyConfig) -> Result<Verdict> {
    if cfg.window < 2 {
        return Err(Error::precondition("classification window must be at least 2"));
    }
    if trace.len() < cfg.window {
        return Err(Error::precondition(format!(
            "trace has {} stages, window needs {}",
            trace.len(),
            cfg.window
        )));
    }
    let (final_mean, final_variance) = trace[trace.len() - 1];
    let tail: Vec<f64> = trace[trace.len() - cfg.window..].iter().map(|p| p.0).collect();
    let tail_slope = ls_slope(&tail);

    let label = if final_mean <= cfg.mean_low || tail_slope < -cfg.slope_tol {
        VerdictLabel::Divergent
    } else if final_mean >= cfg.mean_high && tail_slope >= 0.0 {
        VerdictLabel::Convergent
    } else {
        VerdictLabel::Inconclusive
    };
    Ok(Verdict {
        label,
        final_mean,
        final_variance,
        tail_slope,
    })
}

fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let x_bar = (n - 1.0) / 2.0;
    let y_bar = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - x_bar;
        sxy += dx * (y - y_bar);
        sxx += dx * dx;
    }
    sxy / sxx
}
