use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::series::{Params, SeriesId, DEFAULT_EPSILON};
use crate::error::{Error, Result};

/// Offset subtracted from the parameter gap so that the reference point
/// itself lands strictly inside the convergent region.
pub const DEFAULT_ADJUSTMENT: f64 = 9e-11;

/// Shift that tilts the example6 bound towards convergence below `b = 2`
/// and towards divergence at or above it.
pub const DEFAULT_TILT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `1/sqrt(n j)`.
    InverseSqrt,
    /// Reference sum plus `(a - 1 - adj)/ln(j+1)`, with positive-part fallback.
    Example2,
    /// Reference sum plus `(a - e - adj)/ln(j+1)`, with positive-part fallback.
    Example3,
    /// Reference sum plus `(a - 1 - b - adj)/ln(j+1)`, reference `(1+eps, 0)`.
    Example4,
    /// As example4, reference `(1+eps, eps)`.
    Example5,
    /// Reference `(eps, 2-eps)` plus `(|a| - b + 2 - 2eps +/- tilt)/ln(j+1)`.
    Example6,
    /// Reference `(1/pi, 1+eps)` plus `eps/j`.
    Example7,
    /// `|S^1_j + a/(j+1)|` over the Mobius series at exponent 1.
    Riemann,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::InverseSqrt => "inverse_sqrt",
            BoundKind::Example2 => "example2",
            BoundKind::Example3 => "example3",
            BoundKind::Example4 => "example4",
            BoundKind::Example5 => "example5",
            BoundKind::Example6 => "example6",
            BoundKind::Example7 => "example7",
            BoundKind::Riemann => "riemann",
        }
    }

    /// The bound designed for `series`.
    pub fn for_series(series: SeriesId) -> BoundKind {
        match series {
            SeriesId::Example2 => BoundKind::Example2,
            SeriesId::Example3 => BoundKind::Example3,
            SeriesId::Example4 => BoundKind::Example4,
            SeriesId::Example5 => BoundKind::Example5,
            SeriesId::Example6 => BoundKind::Example6,
            SeriesId::Example7 => BoundKind::Example7,
            SeriesId::MobiusDirichlet => BoundKind::Riemann,
            SeriesId::Example1 | SeriesId::AlternatingUnit | SeriesId::EulerZeta => {
                BoundKind::InverseSqrt
            }
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        [
            BoundKind::InverseSqrt,
            BoundKind::Example2,
            BoundKind::Example3,
            BoundKind::Example4,
            BoundKind::Example5,
            BoundKind::Example6,
            BoundKind::Example7,
            BoundKind::Riemann,
        ]
        .into_iter()
        .find(|k| k.name() == key)
        .ok_or_else(|| Error::domain(format!("unknown bound '{s}'")))
    }
}

/// A stage-indexed threshold generator `j -> c_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub kind: BoundKind,
    pub epsilon: f64,
    pub adjustment: f64,
    pub tilt: f64,
}

impl BoundSpec {
    pub fn new(kind: BoundKind) -> Self {
        BoundSpec {
            kind,
            epsilon: DEFAULT_EPSILON,
            adjustment: DEFAULT_ADJUSTMENT,
            tilt: DEFAULT_TILT,
        }
    }

    pub fn for_series(series: SeriesId) -> Self {
        Self::new(BoundKind::for_series(series))
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// The series and parameter point whose block sums anchor the bound,
    /// or `None` for bounds that need no reference.
    pub fn reference(&self) -> Option<(SeriesId, Params)> {
        let eps = self.epsilon;
        match self.kind {
            BoundKind::InverseSqrt => None,
            BoundKind::Example2 => Some((SeriesId::Example2, Params::new(1.0 + eps, 0.0))),
            BoundKind::Example3 => Some((SeriesId::Example3, Params::new(E + eps, 0.0))),
            BoundKind::Example4 => Some((SeriesId::Example4, Params::new(1.0 + eps, 0.0))),
            BoundKind::Example5 => Some((SeriesId::Example5, Params::new(1.0 + eps, eps))),
            BoundKind::Example6 => Some((SeriesId::Example6, Params::new(eps, 2.0 - eps))),
            BoundKind::Example7 => Some((SeriesId::Example7, Params::new(1.0 / PI, 1.0 + eps))),
            BoundKind::Riemann => Some((SeriesId::MobiusDirichlet, Params::new(1.0, 0.0))),
        }
    }

    pub fn needs_reference(&self) -> bool {
        self.reference().is_some()
    }

    /// `c_{j,n}` at parameters `theta`. `reference[j-1]` must hold the
    /// reference block sum for stage `j` when the bound uses one.
    pub fn value(&self, j: u64, n: u64, theta: &Params, reference: Option<&[f64]>) -> Result<f64> {
        if j == 0 {
            return Err(Error::precondition("stages are numbered from 1"));
        }
        if n == 0 {
            return Err(Error::precondition("block size must be positive"));
        }
        let reference_sum = || -> Result<f64> {
            reference
                .and_then(|r| r.get((j - 1) as usize).copied())
                .ok_or(Error::MissingReference { stage: j })
        };
        let jf = j as f64;
        let log_j1 = (jf + 1.0).ln();
        let Params { a, b } = *theta;
        let eps = self.epsilon;
        let positive_part = |s: f64, gap: f64| {
            let u = s + gap / log_j1;
            if u > 0.0 {
                u
            } else {
                s
            }
        };
        let c = match self.kind {
            BoundKind::InverseSqrt => 1.0 / (n as f64 * jf).sqrt(),
            BoundKind::Example2 => positive_part(reference_sum()?, a - 1.0 - self.adjustment),
            BoundKind::Example3 => positive_part(reference_sum()?, a - E - self.adjustment),
            BoundKind::Example4 | BoundKind::Example5 => {
                positive_part(reference_sum()?, a - 1.0 - b - self.adjustment)
            }
            BoundKind::Example6 => {
                let tilt = if b < 2.0 { self.tilt } else { -self.tilt };
                let v = reference_sum()? + (a.abs() - b + 2.0 - 2.0 * eps + tilt) / log_j1;
                v.max(0.0)
            }
            BoundKind::Example7 => reference_sum()? + eps / jf,
            BoundKind::Riemann => (reference_sum()? + a / (jf + 1.0)).abs(),
        };
        if !c.is_finite() {
            return Err(Error::NonFinite { index: j, value: c });
        }
        Ok(c)
    }
}
