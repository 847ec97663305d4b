//! Limit points of oscillating series.
//!
//! The running sum `S_{1,k}` is squashed through `logistic(S)^rho` and
//! assigned to one of `M` bins whose boundaries are the cumulative posterior
//! means of the previous stage. Bin membership carries either a finite
//! Dirichlet posterior or a Dirichlet-process posterior with prior mass
//! `sum_{j<=k} 1/j^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::Params;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMode {
    DirichletFinite,
    DirichletProcess,
}

impl FromStr for LimitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "finite" | "dirichlet" | "dirichlet_finite" => Ok(LimitMode::DirichletFinite),
            "dp" | "dirichlet_process" => Ok(LimitMode::DirichletProcess),
            _ => Err(Error::domain(format!("unknown limit mode '{s}'"))),
        }
    }
}

/// Base measure `G` of the Dirichlet process, truncated to `M` bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMeasure {
    /// `G(m) = 1/M`.
    Uniform,
    /// `G(m) = 2^{-m}`; the truncated support carries `1 - 2^{-M}`.
    Geometric,
}

impl FromStr for BaseMeasure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(BaseMeasure::Uniform),
            "geometric" => Ok(BaseMeasure::Geometric),
            _ => Err(Error::domain(format!("unknown base measure '{s}'"))),
        }
    }
}

impl BaseMeasure {
    fn weight(self, m: usize, bins: usize) -> f64 {
        match self {
            BaseMeasure::Uniform => 1.0 / bins as f64,
            BaseMeasure::Geometric => 0.5f64.powi(m as i32),
        }
    }

    /// `sum_{l<=m} G(l)`.
    fn cumulative(self, m: usize, bins: usize) -> f64 {
        match self {
            BaseMeasure::Uniform => m as f64 / bins as f64,
            BaseMeasure::Geometric => 1.0 - 0.5f64.powi(m as i32),
        }
    }
}

/// How the power `rho` applied to the logistic transform is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoPolicy {
    Constant(f64),
    /// `max(a - b + eps, eps)`.
    AMinusB { epsilon: f64 },
    /// `a^6`.
    ASixth,
}

impl RhoPolicy {
    pub fn rho(&self, theta: &Params) -> Result<f64> {
        let r = match *self {
            RhoPolicy::Constant(r) => r,
            RhoPolicy::AMinusB { epsilon } => (theta.a - theta.b + epsilon).max(epsilon),
            RhoPolicy::ASixth => theta.a.powi(6),
        };
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain(format!("rho must be positive and finite, got {r}")));
        }
        Ok(r)
    }
}

impl fmt::Display for RhoPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoPolicy::Constant(r) => write!(f, "{r}"),
            RhoPolicy::AMinusB { .. } => f.write_str("a-b"),
            RhoPolicy::ASixth => f.write_str("a6"),
        }
    }
}

impl FromStr for RhoPolicy {
    type Err = Error;
    /// Accepts a number, `a-b`, or `a6` / `a^6`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "a-b" | "a_minus_b" => Ok(RhoPolicy::AMinusB {
                epsilon: crate::catalog::DEFAULT_EPSILON,
            }),
            "a6" | "a^6" | "a_sixth" => Ok(RhoPolicy::ASixth),
            _ => {
                let r: f64 = t
                    .parse()
                    .map_err(|_| Error::domain(format!("unknown rho policy '{s}'")))?;
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::domain(format!("rho must be positive, got {s}")));
                }
                Ok(RhoPolicy::Constant(r))
            }
        }
    }
}

/// `ln(1/(1+e^{-s}))` without overflow in either tail.
fn ln_logistic(s: f64) -> f64 {
    if s >= 0.0 {
        -(-s).exp().ln_1p()
    } else {
        s - s.exp().ln_1p()
    }
}

/// `min(1, logistic(s)^rho)`.
pub fn logistic_power(s: f64, rho: f64) -> f64 {
    (rho * ln_logistic(s)).exp().min(1.0)
}

/// Smallest 1-based `m` with `cumulative[m-1] >= v`; `M` when `v` exceeds
/// every threshold.
pub fn assign_bin(s: f64, rho: f64, cumulative: &[f64]) -> usize {
    let v = logistic_power(s, rho);
    let bins = cumulative.len();
    if v >= 1.0 {
        return bins;
    }
    cumulative.partition_point(|&c| c < v).min(bins - 1) + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub bins: usize,
    pub mode: LimitMode,
    pub base: BaseMeasure,
    pub rho: f64,
}

impl LimitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::precondition(format!("need at least 2 bins, got {}", self.bins)));
        }
        if self.mode == LimitMode::DirichletProcess && self.base == BaseMeasure::Geometric && self.bins > 1000 {
            return Err(Error::precondition("geometric base weights underflow beyond 1000 bins"));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::domain(format!("rho must be positive, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Running Dirichlet / Dirichlet-process state over bin membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPointState {
    config: LimitConfig,
    counts: Vec<u64>,
    k: u64,
    /// `sum_{j<=k} 1/j^2`.
    prior_mass: f64,
    running_sum: f64,
}

/// One assignment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitStep {
    pub k: u64,
    pub running_sum: f64,
    pub bin: usize,
}

impl LimitPointState {
    pub fn new(config: LimitConfig) -> Result<Self> {
        config.validate()?;
        Ok(LimitPointState {
            counts: vec![0; config.bins],
            config,
            k: 0,
            prior_mass: 0.0,
            running_sum: 0.0,
        })
    }

    pub fn config(&self) -> &LimitConfig {
        &self.config
    }

    pub fn stages(&self) -> u64 {
        self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn running_sum(&self) -> f64 {
        self.running_sum
    }

    pub fn prior_mass(&self) -> f64 {
        self.prior_mass
    }

    /// Base weights `g_m` of the active prior (uniform in finite mode).
    pub fn base_weights(&self) -> Vec<f64> {
        let m = self.config.bins;
        (1..=m).map(|i| self.base_weight(i)).collect()
    }

    fn base_weight(&self, m: usize) -> f64 {
        match self.config.mode {
            LimitMode::DirichletFinite => 1.0 / self.config.bins as f64,
            LimitMode::DirichletProcess => self.config.base.weight(m, self.config.bins),
        }
    }

    /// Prior mass used at the current stage: before any data this is the
    /// stage-one prior, so the thresholds reduce to the prior means.
    fn effective_mass(&self) -> f64 {
        if self.k == 0 {
            1.0
        } else {
            self.prior_mass
        }
    }

    /// Cumulative posterior means `sum_{l<=m} E(p_l)` for `m = 1..=M`.
    pub fn cumulative_means(&self) -> Vec<f64> {
        let bins = self.config.bins;
        let s = self.effective_mass();
        let k = self.k as f64;
        let mut ncum = 0u64;
        (1..=bins)
            .map(|m| {
                ncum += self.counts[m - 1];
                match self.config.mode {
                    LimitMode::DirichletFinite => (m as f64 * s + ncum as f64) / (bins as f64 * s + k),
                    LimitMode::DirichletProcess => {
                        (self.config.base.cumulative(m, bins) * s + ncum as f64) / (s + k)
                    }
                }
            })
            .collect()
    }

    /// Adds one term to the running sum and assigns it to a bin.
    pub fn update(&mut self, x: f64) -> Result<LimitStep> {
        if !x.is_finite() {
            return Err(Error::NonFinite {
                index: self.k + 1,
                value: x,
            });
        }
        let s = self.running_sum + x;
        if !s.is_finite() {
            return Err(Error::NonFinite {
                index: self.k + 1,
                value: s,
            });
        }
        let bin = assign_bin(s, self.config.rho, &self.cumulative_means());
        self.running_sum = s;
        self.record(bin)?;
        Ok(LimitStep {
            k: self.k,
            running_sum: s,
            bin,
        })
    }

    /// Records a bin observation directly, bypassing the running sum.
    pub fn record(&mut self, bin: usize) -> Result<()> {
        if bin == 0 || bin > self.config.bins {
            return Err(Error::OutOfRange {
                index: bin as u64,
                limit: self.config.bins as u64,
            });
        }
        self.counts[bin - 1] += 1;
        self.k += 1;
        let j = self.k as f64;
        self.prior_mass += 1.0 / (j * j);
        Ok(())
    }

    /// Posterior mean and variance of bin `m` (1-based).
    pub fn posterior_mean_var(&self, m: usize) -> Result<(f64, f64)> {
        if m == 0 || m > self.config.bins {
            return Err(Error::OutOfRange {
                index: m as u64,
                limit: self.config.bins as u64,
            });
        }
        if self.k == 0 {
            return Err(Error::NoData);
        }
        let s = self.prior_mass;
        let k = self.k as f64;
        let n = self.counts[m - 1] as f64;
        let (alpha, total) = match self.config.mode {
            LimitMode::DirichletFinite => (s + n, self.config.bins as f64 * s + k),
            LimitMode::DirichletProcess => (self.base_weight(m) * s + n, s + k),
        };
        let mean = alpha / total;
        let var = alpha * (total - alpha) / (total * total * (total + 1.0));
        Ok((mean, var))
    }

    pub fn posterior_means(&self) -> Result<Vec<f64>> {
        (1..=self.config.bins)
            .map(|m| self.posterior_mean_var(m).map(|(mean, _)| mean))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThumbRule {
    pub mass_floor: f64,
    pub burn_in: u64,
    pub high_ratio: f64,
    pub low_ratio: f64,
}

impl Default for ThumbRule {
    fn default() -> Self {
        ThumbRule {
            mass_floor: 0.05,
            burn_in: 1000,
            high_ratio: 0.9,
            low_ratio: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    DivergesToPlusInf,
    ConvergedSinglePoint,
    NeedsConvergenceCheck,
    Oscillates,
    Inconclusive,
}

impl fmt::Display for LimitVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitVerdict::DivergesToPlusInf => "diverges_to_plus_inf",
            LimitVerdict::ConvergedSinglePoint => "converged_single_point",
            LimitVerdict::NeedsConvergenceCheck => "needs_convergence_check",
            LimitVerdict::Oscillates => "oscillates",
            LimitVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub verdict: LimitVerdict,
    pub limit_points: usize,
    /// 1-based bins whose posterior mean reaches the mass floor.
    pub bins: Vec<usize>,
    pub proportions: Vec<f64>,
    pub total_bins: usize,
    pub stages: u64,
}

/// Applies the thumb rule to the bins whose posterior mean reaches the floor.
pub fn classify_limit_points(state: &LimitPointState, rule: &ThumbRule) -> Result<LimitReport> {
    if state.stages() < rule.burn_in {
        return Err(Error::precondition(format!(
            "classification needs at least {} stages, have {}",
            rule.burn_in,
            state.stages()
        )));
    }
    let means = state.posterior_means()?;
    let (bins, proportions): (Vec<usize>, Vec<f64>) = means
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= rule.mass_floor)
        .map(|(i, &p)| (i + 1, p))
        .unzip();
    let total = state.config().bins;
    let verdict = match bins.as_slice() {
        [] => LimitVerdict::Inconclusive,
        [m] => {
            let ratio = *m as f64 / total as f64;
            if ratio > rule.high_ratio {
                LimitVerdict::DivergesToPlusInf
            } else if ratio > rule.low_ratio {
                LimitVerdict::ConvergedSinglePoint
            } else {
                LimitVerdict::NeedsConvergenceCheck
            }
        }
        _ => LimitVerdict::Oscillates,
    };
    Ok(LimitReport {
        verdict,
        limit_points: bins.len(),
        bins,
        proportions,
        total_bins: total,
        stages: state.stages(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(mode: LimitMode, base: BaseMeasure) -> LimitConfig {
        LimitConfig {
            bins: 10,
            mode,
            base,
            rho: 2.0,
        }
    }

    #[test]
    fn zero_with_uniform_thresholds_lands_in_third_bin() {
        let st = LimitPointState::new(config(LimitMode::DirichletFinite, BaseMeasure::Uniform)).unwrap();
        assert_eq!(assign_bin(0.0, 2.0, &st.cumulative_means()), 3);
    }

    #[test]
    fn zero_with_geometric_thresholds_lands_in_first_bin() {
        let st = LimitPointState::new(config(LimitMode::DirichletProcess, BaseMeasure::Geometric)).unwrap();
        assert_eq!(st.cumulative_means()[0], 0.5);
        assert_eq!(assign_bin(0.0, 2.0, &st.cumulative_means()), 1);
    }

    #[test]
    fn saturation() {
        let st = LimitPointState::new(config(LimitMode::DirichletProcess, BaseMeasure::Geometric)).unwrap();
        let c = st.cumulative_means();
        for rho in [1e-6, 0.5, 2.0, 64.0] {
            assert_eq!(assign_bin(1e4, rho, &c), 10);
            assert_eq!(assign_bin(f64::MAX, rho, &c), 10);
        }
        for rho in [0.5, 2.0, 64.0] {
            assert_eq!(assign_bin(-1e4, rho, &c), 1);
            assert_eq!(assign_bin(-f64::MAX, rho, &c), 1);
        }
    }

    #[test]
    fn finite_posterior_examples() {
        let mut st = LimitPointState::new(LimitConfig {
            bins: 2,
            ..config(LimitMode::DirichletFinite, BaseMeasure::Uniform)
        })
        .unwrap();
        st.record(1).unwrap();
        let (mean, _) = st.posterior_mean_var(1).unwrap();
        assert!((mean - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(st.posterior_mean_var(3), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn dp_posterior_example() {
        let mut st = LimitPointState::new(config(LimitMode::DirichletProcess, BaseMeasure::Geometric)).unwrap();
        st.record(1).unwrap();
        assert_eq!(st.posterior_mean_var(1).unwrap().0, 0.75);
    }

    #[test]
    fn no_data_before_first_update() {
        let st = LimitPointState::new(config(LimitMode::DirichletFinite, BaseMeasure::Uniform)).unwrap();
        assert!(matches!(st.posterior_mean_var(1), Err(Error::NoData)));
    }

    #[test]
    fn alternating_first_two_steps_hit_distinct_bins() {
        let mut st = LimitPointState::new(config(LimitMode::DirichletFinite, BaseMeasure::Uniform)).unwrap();
        let a = st.update(1.0).unwrap().bin;
        let b = st.update(-1.0).unwrap().bin;
        assert_ne!(a, b);
        assert_eq!(st.counts().iter().sum::<u64>(), 2);
    }

    #[test]
    fn constant_zero_series_concentrates() {
        let mut st = LimitPointState::new(config(LimitMode::DirichletProcess, BaseMeasure::Uniform)).unwrap();
        for _ in 0..5000 {
            st.update(0.0).unwrap();
        }
        let nonzero: Vec<_> = st.counts().iter().filter(|&&c| c > 0).collect();
        assert_eq!(nonzero.len(), 1);
        let means = st.posterior_means().unwrap();
        assert!(means.iter().cloned().fold(0.0, f64::max) > 0.999);
    }

    #[test]
    fn rho_policies() {
        let p = Params::new(2.0, 1.0);
        assert_eq!(RhoPolicy::Constant(2.0).rho(&p).unwrap(), 2.0);
        assert!((RhoPolicy::AMinusB { epsilon: 1e-10 }.rho(&p).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(RhoPolicy::AMinusB { epsilon: 1e-10 }.rho(&Params::new(0.5, 3.0)).unwrap(), 1e-10);
        assert_eq!(RhoPolicy::ASixth.rho(&p).unwrap(), 64.0);
        assert!(RhoPolicy::ASixth.rho(&Params::new(0.0, 0.0)).is_err());
        assert_eq!("a-b".parse::<RhoPolicy>().unwrap(), RhoPolicy::AMinusB { epsilon: 1e-10 });
        assert!("-1".parse::<RhoPolicy>().is_err());
    }

    #[test]
    fn thumb_rule() {
        let cfg = config(LimitMode::DirichletFinite, BaseMeasure::Uniform);
        let rule = ThumbRule::default();
        let run = |bin: usize| {
            let mut st = LimitPointState::new(cfg).unwrap();
            for _ in 0..2000 {
                st.record(bin).unwrap();
            }
            classify_limit_points(&st, &rule).unwrap()
        };
        assert_eq!(run(10).verdict, LimitVerdict::DivergesToPlusInf);
        assert_eq!(run(6).verdict, LimitVerdict::ConvergedSinglePoint);
        assert_eq!(run(1).verdict, LimitVerdict::NeedsConvergenceCheck);

        let mut st = LimitPointState::new(cfg).unwrap();
        for i in 0..2000 {
            st.record(if i % 2 == 0 { 5 } else { 6 }).unwrap();
        }
        let r = classify_limit_points(&st, &rule).unwrap();
        assert_eq!(r.verdict, LimitVerdict::Oscillates);
        assert_eq!(r.bins, vec![5, 6]);
        assert!(r.proportions.iter().all(|p| (p - 0.5).abs() < 0.01));

        let short = LimitPointState::new(cfg).unwrap();
        assert!(classify_limit_points(&short, &rule).is_err());
    }
}
