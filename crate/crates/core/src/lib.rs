//! Bayesian characterization of infinite series.
//!
//! Partial sums of a series are turned into a stream of threshold
//! indicators `y_j = [|S_j| <= c_j]`, and a recursive Beta posterior over the
//! probability of convergence is updated stage by stage. Its mean tends to 1
//! for convergent series and to 0 for divergent ones. Oscillating series are
//! handled by a Dirichlet / Dirichlet-process posterior over adaptive bins of
//! the running sum.
//!
//! The crate also ships the series catalog used to exercise the method, a
//! segmented Mobius sieve feeding the Dirichlet series `sum mu(n)/n^a`, and a
//! probe for the Bernoulli-number series tied to the Riemann Hypothesis.
//!
//! Parallel kernels (block sums, sieve segments, sweeps) run on rayon when the
//! `parallel` feature is enabled and fall back to sequential loops otherwise.
//! Results are bit-identical either way.

pub mod analysis;
pub mod bernoulli;
pub mod catalog;
pub mod error;
pub mod limits;
pub mod mobius;
pub mod par;
pub mod posterior;
pub mod summation;

pub use error::{Error, Result};
