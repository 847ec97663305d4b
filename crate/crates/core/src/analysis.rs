//! End-to-end pipelines: convergence traces, limit-point traces, and
//! parameter sweeps.

use serde::{Deserialize, Serialize};

use crate::catalog::{reference_series, BoundSpec, Params, RefCache, SeriesSpec};
use crate::error::{Error, Result};
use crate::limits::{classify_limit_points, LimitConfig, LimitPointState, LimitReport, ThumbRule};
use crate::posterior::{classify, ClassifyConfig, PosteriorMode, PosteriorState, PriorSchedule, Verdict};
use crate::summation::{block_sums, SumOptions, TermSource};

#[derive(Debug, Clone)]
pub struct ConvergenceSetup {
    pub series: SeriesSpec,
    pub bound: BoundSpec,
    pub block_size: u64,
    pub stages: u64,
    pub sum: SumOptions,
    pub classify: ClassifyConfig,
    pub mode: PosteriorMode,
    pub schedule: PriorSchedule,
}

impl ConvergenceSetup {
    pub fn new(series: SeriesSpec, block_size: u64, stages: u64) -> Self {
        let bound = BoundSpec::for_series(series.id());
        ConvergenceSetup {
            series,
            bound,
            block_size,
            stages,
            sum: SumOptions::default(),
            classify: ClassifyConfig::default(),
            mode: PosteriorMode::Recursive,
            schedule: PriorSchedule::InverseSquare,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::precondition("block size must be positive"));
        }
        if self.stages == 0 {
            return Err(Error::precondition("need at least one stage"));
        }
        Ok(())
    }

    /// Classification window, shrunk to the trace length for short runs.
    pub fn effective_classify(&self) -> ClassifyConfig {
        let mut c = self.classify;
        c.window = c.window.min(self.stages as usize).max(2);
        c
    }

    /// Reference block sums the bound needs, through `cache` when given.
    pub fn reference(&self, cache: Option<&RefCache>) -> Result<Option<Vec<f64>>> {
        let Some(spec) = reference_series(&self.bound, &self.series)? else {
            return Ok(None);
        };
        let sums = match cache {
            Some(c) => c.get_or_compute(&spec, self.block_size, self.stages, &self.sum)?,
            None => crate::catalog::reference_block_sums(&spec, self.block_size, self.stages, &self.sum)?,
        };
        Ok(Some(sums))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub stage: u64,
    pub partial_sum: f64,
    pub bound: f64,
    pub y: u8,
    pub post_mean: f64,
    pub post_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    pub rows: Vec<TraceRow>,
    pub verdict: Verdict,
}

/// Block sums, bounds, indicators and the posterior trace for one series.
pub fn run_convergence(setup: &ConvergenceSetup, reference: Option<&[f64]>) -> Result<ConvergenceRun> {
    setup.validate()?;
    let sums = block_sums(
        &setup.series,
        setup.series.start_index(),
        setup.block_size,
        setup.stages,
        &setup.sum,
    )?;
    trace_from_sums(setup, &sums, reference)
}

/// Posterior trace over precomputed block sums.
pub fn trace_from_sums(setup: &ConvergenceSetup, sums: &[f64], reference: Option<&[f64]>) -> Result<ConvergenceRun> {
    let theta = setup.series.params();
    let mut state = PosteriorState::new(setup.mode, setup.schedule)?;
    let mut rows = Vec::with_capacity(sums.len());
    for (idx, &s) in sums.iter().enumerate() {
        let j = idx as u64 + 1;
        let c = setup.bound.value(j, setup.block_size, &theta, reference)?;
        let obs = state.update(s, c)?;
        rows.push(TraceRow {
            stage: j,
            partial_sum: s,
            bound: c,
            y: obs.indicator(),
            post_mean: state.mean()?,
            post_var: state.variance()?,
        });
    }
    let trace: Vec<(f64, f64)> = rows.iter().map(|r| (r.post_mean, r.post_var)).collect();
    let verdict = classify(&trace, &setup.effective_classify())?;
    Ok(ConvergenceRun { rows, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: Params,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
    /// First grid point, in grid order, labelled convergent.
    pub smallest_convergent: Option<Params>,
}

/// Runs the convergence pipeline at every grid point, sharing one set of
/// reference sums. Grid points run in parallel when `setup.sum.exec` allows.
pub fn run_sweep(setup: &ConvergenceSetup, grid: &[Params], reference: Option<&[f64]>) -> Result<SweepSummary> {
    if grid.is_empty() {
        return Err(Error::precondition("sweep grid is empty"));
    }
    setup.validate()?;
    let inner = SumOptions {
        exec: crate::par::Execution::Sequential,
        ..setup.sum
    };
    let results = setup.sum.exec.map_indexed(grid.len(), |g| -> Result<SweepPoint> {
        let point = ConvergenceSetup {
            series: setup.series.at(grid[g])?,
            sum: inner,
            ..setup.clone()
        };
        let run = run_convergence(&point, reference)?;
        Ok(SweepPoint {
            params: grid[g],
            verdict: run.verdict,
        })
    });
    let points: Vec<SweepPoint> = results.into_iter().collect::<Result<_>>()?;
    let smallest_convergent = points
        .iter()
        .filter(|p| p.verdict.label == crate::posterior::VerdictLabel::Convergent)
        .map(|p| p.params)
        .next();
    Ok(SweepSummary {
        points,
        smallest_convergent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub k: u64,
    pub running_sum: f64,
    pub bin: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRun {
    pub rows: Vec<LimitRow>,
    /// Per-bin posterior means after each stage, row-aligned with `rows`.
    pub means: Vec<Vec<f64>>,
    pub state: LimitPointState,
    pub report: LimitReport,
}

/// Feeds `stages` terms one at a time through the limit-point engine.
///
/// `keep_means` controls whether the per-stage mean vectors are retained
/// (they are `O(stages * M)`).
pub fn run_limits(
    series: &SeriesSpec,
    config: LimitConfig,
    stages: u64,
    rule: &ThumbRule,
    keep_means: bool,
) -> Result<LimitRun> {
    if stages == 0 {
        return Err(Error::precondition("need at least one stage"));
    }
    series.check_range(series.start_index() + stages - 1)?;
    let mut state = LimitPointState::new(config)?;
    let mut rows = Vec::with_capacity(stages as usize);
    let mut means = Vec::new();
    let start = series.start_index();
    for i in start..start + stages {
        let x = TermSource::term(series, i);
        if !x.is_finite() {
            return Err(Error::NonFinite { index: i, value: x });
        }
        let step = state.update(x)?;
        rows.push(LimitRow {
            k: step.k,
            running_sum: step.running_sum,
            bin: step.bin,
        });
        if keep_means {
            means.push(state.posterior_means()?);
        }
    }
    let rule = ThumbRule {
        burn_in: rule.burn_in.min(stages),
        ..*rule
    };
    let report = classify_limit_points(&state, &rule)?;
    Ok(LimitRun {
        rows,
        means,
        state,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::SeriesId;
    use crate::limits::{BaseMeasure, LimitMode, LimitVerdict};
    use crate::posterior::VerdictLabel;

    #[test]
    fn example1_small_is_divergent() {
        let setup = ConvergenceSetup::new(SeriesSpec::with_defaults(SeriesId::Example1), 1000, 100);
        let run = run_convergence(&setup, None).unwrap();
        assert_eq!(run.rows.len(), 100);
        assert_eq!(run.verdict.label, VerdictLabel::Divergent);
    }

    #[test]
    fn missing_reference_surfaces() {
        let setup = ConvergenceSetup::new(SeriesSpec::with_defaults(SeriesId::Example2), 100, 5);
        assert!(matches!(run_convergence(&setup, None), Err(Error::MissingReference { stage: 1 })));
    }

    #[test]
    fn example2_at_reference_point_is_all_ones() {
        let setup = ConvergenceSetup::new(SeriesSpec::with_defaults(SeriesId::Example2), 1000, 50);
        let reference = setup.reference(None).unwrap().unwrap();
        let run = run_convergence(&setup, Some(&reference)).unwrap();
        assert!(run.rows.iter().all(|r| r.y == 1));
    }

    #[test]
    fn zero_stages_rejected() {
        let setup = ConvergenceSetup::new(SeriesSpec::with_defaults(SeriesId::Example1), 1000, 0);
        assert!(run_convergence(&setup, None).is_err());
    }

    #[test]
    fn sweep_single_point() {
        let setup = ConvergenceSetup::new(SeriesSpec::with_defaults(SeriesId::EulerZeta), 100, 20);
        let s = run_sweep(&setup, &[Params::new(2.0, 0.0)], None).unwrap();
        assert_eq!(s.points.len(), 1);
        let conv = s.points[0].verdict.label == VerdictLabel::Convergent;
        assert_eq!(s.smallest_convergent.is_some(), conv);
        assert!(run_sweep(&setup, &[], None).is_err());
    }

    #[test]
    fn alternating_limits_short_run() {
        let cfg = LimitConfig {
            bins: 10,
            mode: LimitMode::DirichletProcess,
            base: BaseMeasure::Uniform,
            rho: 2.0,
        };
        let run = run_limits(
            &SeriesSpec::with_defaults(SeriesId::AlternatingUnit),
            cfg,
            2000,
            &ThumbRule::default(),
            true,
        )
        .unwrap();
        assert_eq!(run.report.verdict, LimitVerdict::Oscillates);
        assert_eq!(run.report.limit_points, 2);
        assert_eq!(run.means.len(), 2000);
    }
}
