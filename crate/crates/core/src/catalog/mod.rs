//! The analyzed series, their parameter domains, and the bound sequences
//! designed for each.

mod bound;
mod reference;
mod series;

pub use bound::{BoundKind, BoundSpec, DEFAULT_ADJUSTMENT, DEFAULT_TILT};
pub use reference::{read_sums, reference_block_sums, reference_series, write_sums, RefCache, CACHE_MAGIC};
pub use series::{parse_real, Params, SeriesId, SeriesSpec, DEFAULT_EPSILON};

use crate::error::{Error, Result};
use crate::summation::{block_sum, BlockPlan, TermSource};

/// Block sums `(S^theta_{j,n}, S^theta'_{j,n})` for checking the parameter
/// orderings of example4 (needs even `n`) and example5 (needs `n % 4 == 0`).
pub fn check_monotonicity(
    id: SeriesId,
    j: u64,
    n: u64,
    theta: Params,
    theta_prime: Params,
) -> Result<(f64, f64)> {
    match id {
        SeriesId::Example4 if !n.is_multiple_of(2) => {
            return Err(Error::precondition(format!("example4 needs an even block size, got {n}")))
        }
        SeriesId::Example5 if !n.is_multiple_of(4) => {
            return Err(Error::precondition(format!(
                "example5 needs a block size divisible by 4, got {n}"
            )))
        }
        SeriesId::Example4 | SeriesId::Example5 => {}
        other => {
            return Err(Error::precondition(format!(
                "no parameter ordering is known for {other}"
            )))
        }
    }
    let first = SeriesSpec::new(id, theta)?;
    let second = SeriesSpec::new(id, theta_prime)?;
    let plan = BlockPlan::new(first.start_index(), n, j)?;
    Ok((block_sum(&first, &plan)?, block_sum(&second, &plan)?))
}
