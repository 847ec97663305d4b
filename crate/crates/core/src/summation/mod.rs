//! Block partial sums `S_{j,n} = sum of X_i over block j`.
//!
//! Blocks are split at fixed chunk boundaries; each chunk is summed with a
//! compensated accumulator and the chunk partials are folded in ascending
//! order. The result depends only on `(series, plan, chunk)`.

mod compensated;

pub use compensated::CompensatedSum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

pub const DEFAULT_CHUNK: usize = 1 << 16;

/// Anything that can produce the real terms `X_i` of a series.
pub trait TermSource: Sync {
    /// First admissible index.
    fn start_index(&self) -> u64;

    fn term(&self, i: u64) -> f64;

    /// Rejects blocks the source cannot evaluate (e.g. past the end of a table).
    fn check_range(&self, _last: u64) -> Result<()> {
        Ok(())
    }
}

impl<T: TermSource + ?Sized> TermSource for &T {
    fn start_index(&self) -> u64 {
        (**self).start_index()
    }
    fn term(&self, i: u64) -> f64 {
        (**self).term(i)
    }
    fn check_range(&self, last: u64) -> Result<()> {
        (**self).check_range(last)
    }
}

/// Adapts a closure into a [`TermSource`].
#[derive(Debug, Clone, Copy)]
pub struct FnTerms<F> {
    pub start: u64,
    pub f: F,
}

impl<F: Fn(u64) -> f64 + Sync> TermSource for FnTerms<F> {
    fn start_index(&self) -> u64 {
        self.start
    }
    fn term(&self, i: u64) -> f64 {
        (self.f)(i)
    }
}

/// Constant-size block layout: stage `j` covers
/// `[start + n(j-1), start + nj - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub start_index: u64,
    pub block_size: u64,
    pub stage: u64,
}

impl BlockPlan {
    pub fn new(start_index: u64, block_size: u64, stage: u64) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::precondition("block size must be positive"));
        }
        if stage == 0 {
            return Err(Error::precondition("stages are numbered from 1"));
        }
        Ok(BlockPlan {
            start_index,
            block_size,
            stage,
        })
    }

    pub fn first(&self) -> u64 {
        self.start_index + self.block_size * (self.stage - 1)
    }

    pub fn last(&self) -> u64 {
        self.start_index + self.block_size * self.stage - 1
    }

    fn validate<S: TermSource + ?Sized>(&self, series: &S) -> Result<()> {
        if self.start_index < series.start_index() {
            return Err(Error::precondition(format!(
                "block starts at {} but the series starts at {}",
                self.start_index,
                series.start_index()
            )));
        }
        series.check_range(self.last())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumOptions {
    pub chunk: usize,
    pub exec: Execution,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions {
            chunk: DEFAULT_CHUNK,
            exec: Execution::default(),
        }
    }
}

fn sum_range<S: TermSource + ?Sized>(series: &S, first: u64, last: u64) -> Result<CompensatedSum> {
    let mut acc = CompensatedSum::new();
    for i in first..=last {
        let x = series.term(i);
        if !x.is_finite() {
            return Err(Error::NonFinite { index: i, value: x });
        }
        acc.add(x);
    }
    Ok(acc)
}

/// Sequential compensated sum over one block.
pub fn block_sum<S: TermSource + ?Sized>(series: &S, plan: &BlockPlan) -> Result<f64> {
    plan.validate(series)?;
    Ok(sum_range(series, plan.first(), plan.last())?.value())
}

/// Chunked block sum. Chunks may run on several workers; partials are
/// reduced in ascending chunk order, so the output is independent of the
/// worker count.
pub fn chunked_parallel_sum<S: TermSource + ?Sized>(
    series: &S,
    plan: &BlockPlan,
    chunk: usize,
    exec: Execution,
) -> Result<f64> {
    if chunk == 0 || chunk as u64 > plan.block_size {
        return Err(Error::precondition(format!(
            "chunk size {chunk} must lie in 1..={}",
            plan.block_size
        )));
    }
    plan.validate(series)?;
    chunked_unchecked(series, plan, chunk as u64, exec)
}

fn chunked_unchecked<S: TermSource + ?Sized>(
    series: &S,
    plan: &BlockPlan,
    chunk: u64,
    exec: Execution,
) -> Result<f64> {
    let first = plan.first();
    let last = plan.last();
    let chunks = plan.block_size.div_ceil(chunk) as usize;
    let partials = exec.map_indexed(chunks, |c| {
        let lo = first + c as u64 * chunk;
        let hi = (lo + chunk - 1).min(last);
        sum_range(series, lo, hi)
    });
    let mut total = CompensatedSum::new();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total.value())
}

/// Block sums for stages `1..=stages` of a constant-size plan.
///
/// Stages are independent, so they are distributed over workers as well as
/// the chunks inside each block. The chunk size is capped at `block_size`.
pub fn block_sums<S: TermSource + ?Sized>(
    series: &S,
    start_index: u64,
    block_size: u64,
    stages: u64,
    opts: &SumOptions,
) -> Result<Vec<f64>> {
    if stages == 0 {
        return Ok(Vec::new());
    }
    let last_plan = BlockPlan::new(start_index, block_size, stages)?;
    last_plan.validate(series)?;
    let chunk = (opts.chunk.max(1) as u64).min(block_size);
    let inner = if opts.exec.is_parallel() {
        Execution::Parallel { workers: None }
    } else {
        Execution::Sequential
    };
    let sums = opts.exec.map_indexed(stages as usize, |j| {
        let plan = BlockPlan {
            start_index,
            block_size,
            stage: j as u64 + 1,
        };
        chunked_unchecked(series, &plan, chunk, inner)
    });
    sums.into_iter().collect()
}
