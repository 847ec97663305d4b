//! Bernoulli numbers and the log-magnitudes of the terms `a_m` of the two
//! Bernoulli-number series
//!
//! ```text
//! a_m = pi (4m+3) / 2^{4m+1} * sum_{k=0}^{m} (-1)^k C(2m+1,k) C(4m+2-2k,2m+1) / n_k * ln L_k,
//! n_k = 2m+2-2k,
//! S1: L_k = (2 pi)^{n} |B_n| / (2 n^2 (n-2)!)
//! S2: L_k = (n-1) |B_n| / |B_{n+2}|
//! ```
//!
//! The inner alternating sum is evaluated as a signed log-sum-exp and
//! rejected when its condition number exceeds [`CONDITION_LIMIT`].

use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const CONDITION_LIMIT: f64 = 1e12;

/// `B_0, ..., B_{n_max}` from `sum_{k=0}^{n} C(n+1,k) B_k = 0` (so `B_1 = -1/2`).
pub fn bernoulli_numbers(n_max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n_max + 1);
    b.push(BigRational::one());
    // Row n+1 of Pascal's triangle, updated in place.
    let mut row: Vec<BigInt> = vec![BigInt::one(), BigInt::one()];
    for n in 1..=n_max {
        let next_len = row.len() + 1;
        let mut next = vec![BigInt::one(); next_len];
        for k in 1..next_len - 1 {
            next[k] = &row[k - 1] + &row[k];
        }
        row = next;
        if n > 1 && n % 2 == 1 {
            b.push(BigRational::zero());
            continue;
        }
        let mut acc = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            if !bk.is_zero() {
                acc += bk * BigRational::from_integer(row[k].clone());
            }
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(n as u64 + 1)));
    }
    b
}

/// Exact `B_n`.
pub fn bernoulli_exact(n: usize) -> BigRational {
    if n > 1 && n % 2 == 1 {
        return BigRational::zero();
    }
    bernoulli_numbers(n).pop().expect("nonempty")
}

fn ln_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().expect("64-bit value").ln() + shift as f64 * LN_2
}

/// `ln|q|`, finite for any nonzero rational however large.
pub fn ln_abs_rational(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_bigint(q.numer()) - ln_abs_bigint(q.denom())
}

/// `B_n` as a double, or an overflow error past the double range.
pub fn bernoulli_f64(n: usize) -> Result<f64> {
    let b = bernoulli_exact(n);
    if b.is_zero() {
        return Ok(0.0);
    }
    let ln_abs = ln_abs_rational(&b);
    if ln_abs >= f64::MAX.ln() {
        return Err(Error::Overflow(format!("|B_{n}| exceeds the double range")));
    }
    match b.to_f64() {
        Some(v) if v.is_finite() && v != 0.0 => Ok(v),
        _ => {
            let sign = if b.is_negative() { -1.0 } else { 1.0 };
            Ok(sign * ln_abs.exp())
        }
    }
}

/// `ln(4 sqrt(pi m)) + 2m ln(m/(pi e))`, the Stirling form of `ln|B_{2m}|`.
pub fn log_abs_bernoulli_asymptotic(m: u64) -> f64 {
    let m = m as f64;
    (4.0 * (PI * m).sqrt()).ln() + 2.0 * m * (m / (PI * E)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BernoulliSeries {
    S1,
    S2,
}

impl FromStr for BernoulliSeries {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" | "s1tilde" => Ok(BernoulliSeries::S1),
            "s2" | "s2tilde" => Ok(BernoulliSeries::S2),
            _ => Err(Error::domain(format!("unknown Bernoulli series '{s}'"))),
        }
    }
}

impl fmt::Display for BernoulliSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BernoulliSeries::S1 => "s1",
            BernoulliSeries::S2 => "s2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermMode {
    Exact,
    Stirling,
}

impl FromStr for TermMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(TermMode::Exact),
            "stirling" => Ok(TermMode::Stirling),
            _ => Err(Error::domain(format!("unknown term mode '{s}'"))),
        }
    }
}

impl fmt::Display for TermMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermMode::Exact => "exact",
            TermMode::Stirling => "stirling",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliTermRow {
    pub m: u64,
    pub log_abs_term: f64,
    pub sign: i8,
    pub mode: TermMode,
}

/// Source of `ln|B_n|` for even `n`, exact or asymptotic.
#[derive(Debug, Clone)]
pub struct LogBernoulli {
    mode: TermMode,
    exact: Vec<f64>,
}

impl LogBernoulli {
    /// Prepares `ln|B_n|` for even `n <= n_max`.
    pub fn new(mode: TermMode, n_max: usize) -> Self {
        let exact = match mode {
            TermMode::Exact => bernoulli_numbers(n_max).iter().map(ln_abs_rational).collect(),
            TermMode::Stirling => Vec::new(),
        };
        LogBernoulli { mode, exact }
    }

    pub fn mode(&self) -> TermMode {
        self.mode
    }

    /// `ln|B_n|`, `n` even and at least 2.
    pub fn get(&self, n: usize) -> Result<f64> {
        if n < 2 || n % 2 == 1 {
            return Err(Error::domain(format!("ln|B_n| needs even n >= 2, got {n}")));
        }
        match self.mode {
            TermMode::Exact => self
                .exact
                .get(n)
                .copied()
                .ok_or_else(|| Error::precondition(format!("B_{n} was not prepared"))),
            TermMode::Stirling => Ok(log_abs_bernoulli_asymptotic((n / 2) as u64)),
        }
    }
}

/// Largest Bernoulli index the term `a_m` reads.
pub fn max_bernoulli_index(series: BernoulliSeries, m: u64) -> usize {
    let n = 2 * m as usize + 2;
    match series {
        BernoulliSeries::S1 => n,
        BernoulliSeries::S2 => n + 2,
    }
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `a_m` for one series, in log-magnitude form.
pub fn series_term(series: BernoulliSeries, m: u64, logb: &LogBernoulli) -> Result<BernoulliTermRow> {
    if m == 0 {
        return Err(Error::domain("terms are indexed from m = 1"));
    }
    // Signed summands as (sign, ln|value|).
    let mut parts = Vec::with_capacity(m as usize + 1);
    for k in 0..=m {
        let n = 2 * m + 2 - 2 * k;
        let nf = n as f64;
        let ln_l = match series {
            BernoulliSeries::S1 => {
                nf * (2.0 * PI).ln() + logb.get(n as usize)? - LN_2 - 2.0 * nf.ln() - ln_gamma(nf - 1.0)
            }
            BernoulliSeries::S2 => (nf - 1.0).ln() + logb.get(n as usize)? - logb.get(n as usize + 2)?,
        };
        if ln_l == 0.0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 } * ln_l.signum();
        let mag = ln_binomial(2 * m + 1, k) + ln_binomial(4 * m + 2 - 2 * k, 2 * m + 1) - nf.ln() + ln_l.abs().ln();
        parts.push((sign, mag));
    }
    let top = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = crate::summation::CompensatedSum::new();
    for &(s, l) in &parts {
        acc.add(s * (l - top).exp());
    }
    let r = acc.value();
    let condition = if r == 0.0 { f64::INFINITY } else { 1.0 / r.abs() };
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(Error::PrecisionLoss {
            m,
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let outer = (PI * (4 * m + 3) as f64).ln() - (4 * m + 1) as f64 * LN_2;
    Ok(BernoulliTermRow {
        m,
        log_abs_term: outer + top + r.abs().ln(),
        sign: if r > 0.0 { 1 } else { -1 },
        mode: logb.mode(),
    })
}

/// Rows for `m = 1..=m_max`; each entry fails independently.
pub fn series_terms(series: BernoulliSeries, m_max: u64, mode: TermMode) -> Vec<Result<BernoulliTermRow>> {
    let logb = LogBernoulli::new(mode, max_bernoulli_index(series, m_max.max(1)));
    (1..=m_max).map(|m| series_term(series, m, &logb)).collect()
}
