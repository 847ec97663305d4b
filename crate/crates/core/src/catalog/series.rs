use std::f64::consts::{E, FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{mobius_of, MobiusTable};
use crate::summation::TermSource;

/// Default small offset used by the reference parameter points.
pub const DEFAULT_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesId {
    Example1,
    Example2,
    Example3,
    Example4,
    Example5,
    Example6,
    Example7,
    AlternatingUnit,
    MobiusDirichlet,
    EulerZeta,
}

impl SeriesId {
    pub const ALL: [SeriesId; 10] = [
        SeriesId::Example1,
        SeriesId::Example2,
        SeriesId::Example3,
        SeriesId::Example4,
        SeriesId::Example5,
        SeriesId::Example6,
        SeriesId::Example7,
        SeriesId::AlternatingUnit,
        SeriesId::MobiusDirichlet,
        SeriesId::EulerZeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesId::Example1 => "example1",
            SeriesId::Example2 => "example2",
            SeriesId::Example3 => "example3",
            SeriesId::Example4 => "example4",
            SeriesId::Example5 => "example5",
            SeriesId::Example6 => "example6",
            SeriesId::Example7 => "example7",
            SeriesId::AlternatingUnit => "alternating_unit",
            SeriesId::MobiusDirichlet => "mobius_dirichlet",
            SeriesId::EulerZeta => "euler_zeta",
        }
    }

    pub fn start_index(self) -> u64 {
        match self {
            SeriesId::Example1 | SeriesId::Example2 => 2,
            SeriesId::Example3 | SeriesId::Example4 => 3,
            SeriesId::Example5 => 5,
            _ => 1,
        }
    }

    /// Parameter names the term function reads.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            SeriesId::Example1 | SeriesId::AlternatingUnit => &[],
            SeriesId::Example2 | SeriesId::Example3 | SeriesId::MobiusDirichlet | SeriesId::EulerZeta => &["a"],
            _ => &["a", "b"],
        }
    }

    pub fn default_params(self) -> Params {
        match self {
            SeriesId::Example2 | SeriesId::Example4 => Params::new(1.0 + DEFAULT_EPSILON, 0.0),
            SeriesId::Example3 => Params::new(E + DEFAULT_EPSILON, 0.0),
            SeriesId::Example5 => Params::new(2.0, 1.0),
            SeriesId::Example6 => Params::new(DEFAULT_EPSILON, 2.0 - DEFAULT_EPSILON),
            SeriesId::Example7 => Params::new(1.0 / PI, 1.0 + DEFAULT_EPSILON),
            SeriesId::MobiusDirichlet => Params::new(1.0, 0.0),
            SeriesId::EulerZeta => Params::new(2.0, 0.0),
            SeriesId::Example1 | SeriesId::AlternatingUnit => Params::default(),
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            SeriesId::Example1 => "1/ln(i)",
            SeriesId::Example2 => "(1 - ln(i)/i - a ln(ln(i))/i)^i",
            SeriesId::Example3 => "(1 - (ln(i)/i) a^(ln(ln(i))/ln(i)))^i",
            SeriesId::Example4 => "(1 - ln(i)/i - (ln(ln(i))/i) cos^2(1/i) (a + (-1)^i b))^i",
            SeriesId::Example5 => {
                "(1 - (ln(i)/i) (a (1 + sin^2(sqrt(ln(ln(i))/ln(i)))) + b sin(i pi/4)))^i"
            }
            SeriesId::Example6 => "i^(b-3) / (a + |sin(i)|)",
            SeriesId::Example7 => "|sin(a pi i)|^i / i^b",
            SeriesId::AlternatingUnit => "(-1)^(i-1)",
            SeriesId::MobiusDirichlet => "mu(i) / i^a",
            SeriesId::EulerZeta => "1 / i^a",
        }
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeriesId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match key.as_str() {
            "riemann" | "mobius" => Some(SeriesId::MobiusDirichlet),
            "alternating" => Some(SeriesId::AlternatingUnit),
            "zeta" => Some(SeriesId::EulerZeta),
            _ => None,
        };
        alias
            .or_else(|| SeriesId::ALL.into_iter().find(|id| id.name() == key))
            .ok_or_else(|| Error::domain(format!("unknown series '{s}'")))
    }
}

/// Series parameters. Series that take fewer than two ignore the rest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
}

impl Params {
    pub const fn new(a: f64, b: f64) -> Self {
        Params { a, b }
    }

    /// Overrides `base` with `name=value` pairs separated by commas or
    /// whitespace, e.g. `a=2,b=0.5`.
    pub fn parse_onto(base: Params, text: &str) -> Result<Params> {
        let mut p = base;
        for pair in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("expected name=value, got '{pair}'")))?;
            let v: f64 = parse_real(value)?;
            match name.trim() {
                "a" => p.a = v,
                "b" => p.b = v,
                other => return Err(Error::domain(format!("unknown parameter '{other}'"))),
            }
        }
        Ok(p)
    }

    pub fn bits(&self) -> (u64, u64) {
        (self.a.to_bits(), self.b.to_bits())
    }
}

/// Parses a real, accepting the symbolic constants `pi`, `e`, `1/pi`.
pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "pi" => PI,
        "e" => E,
        "1/pi" => 1.0 / PI,
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::domain(format!("not a real number: '{t}'")))?,
    };
    if !v.is_finite() {
        return Err(Error::domain(format!("parameter must be finite, got '{t}'")));
    }
    Ok(v)
}

/// A catalog series at a fixed parameter point.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    id: SeriesId,
    params: Params,
    mobius: Option<Arc<MobiusTable>>,
}

impl SeriesSpec {
    pub fn new(id: SeriesId, params: Params) -> Result<Self> {
        check_domain(id, params)?;
        Ok(SeriesSpec {
            id,
            params,
            mobius: None,
        })
    }

    pub fn with_defaults(id: SeriesId) -> Self {
        Self::new(id, id.default_params()).expect("default parameters lie in the domain")
    }

    /// Serves `mu(i)` from `table` instead of trial division.
    pub fn with_mobius(mut self, table: Arc<MobiusTable>) -> Self {
        self.mobius = Some(table);
        self
    }

    pub fn id(&self) -> SeriesId {
        self.id
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn mobius(&self) -> Option<&Arc<MobiusTable>> {
        self.mobius.as_ref()
    }

    /// Same series and table, different parameters.
    pub fn at(&self, params: Params) -> Result<Self> {
        check_domain(self.id, params)?;
        Ok(SeriesSpec {
            id: self.id,
            params,
            mobius: self.mobius.clone(),
        })
    }

    /// `X_i`. Indices below the start index are a caller error.
    pub fn term(&self, i: u64) -> Result<f64> {
        if i < self.id.start_index() {
            return Err(Error::precondition(format!(
                "{} starts at i = {}, got {i}",
                self.id,
                self.id.start_index()
            )));
        }
        self.check_range(i)?;
        Ok(self.eval(i))
    }

    fn eval(&self, i: u64) -> f64 {
        let Params { a, b } = self.params;
        let x = i as f64;
        match self.id {
            SeriesId::Example1 => 1.0 / x.ln(),
            SeriesId::Example2 => {
                let l = x.ln();
                pow_one_minus((l + a * l.ln()) / x, i)
            }
            SeriesId::Example3 => {
                let l = x.ln();
                pow_one_minus(l / x * a.powf(l.ln() / l), i)
            }
            SeriesId::Example4 => {
                let l = x.ln();
                let c = (1.0 / x).cos();
                let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
                pow_one_minus(l / x + l.ln() / x * c * c * (a + sign * b), i)
            }
            SeriesId::Example5 => {
                let l = x.ln();
                let s = (l.ln() / l).sqrt().sin();
                pow_one_minus(l / x * (a * (1.0 + s * s) + b * sin_quarter_pi(i)), i)
            }
            SeriesId::Example6 => x.powf(b - 3.0) / (a + x.sin().abs()),
            SeriesId::Example7 => (a * PI * x).sin().abs().powf(x) / x.powf(b),
            SeriesId::AlternatingUnit => {
                if i % 2 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            SeriesId::MobiusDirichlet => {
                let mu = match &self.mobius {
                    Some(t) => t.mu_unchecked(i),
                    None => mobius_of(i),
                };
                if mu == 0 {
                    0.0
                } else {
                    mu as f64 / x.powf(a)
                }
            }
            SeriesId::EulerZeta => x.powf(-a),
        }
    }
}

impl TermSource for SeriesSpec {
    fn start_index(&self) -> u64 {
        self.id.start_index()
    }

    fn term(&self, i: u64) -> f64 {
        self.eval(i)
    }

    fn check_range(&self, last: u64) -> Result<()> {
        match (&self.mobius, self.id) {
            (Some(t), SeriesId::MobiusDirichlet) if last > t.limit() => Err(Error::TableTooShort {
                limit: t.limit(),
                needed: last,
            }),
            _ => Ok(()),
        }
    }
}

fn check_domain(id: SeriesId, p: Params) -> Result<()> {
    if !p.a.is_finite() || !p.b.is_finite() {
        return Err(Error::domain("parameters must be finite"));
    }
    match id {
        SeriesId::Example3 if p.a <= 0.0 => Err(Error::domain("example3 requires a > 0")),
        SeriesId::Example5 if p.a <= 0.0 || p.b <= 0.0 => {
            Err(Error::domain("example5 requires a > 0 and b > 0"))
        }
        SeriesId::Example7 if p.b < 1.0 => Err(Error::domain("example7 requires b >= 1")),
        _ => Ok(()),
    }
}

/// `(1 - x)^i`, through `exp(i ln(1-x))` where that is defined so that the
/// tiny `x` of late indices keeps full relative precision.
#[inline]
fn pow_one_minus(x: f64, i: u64) -> f64 {
    if x < 1.0 {
        (i as f64 * (-x).ln_1p()).exp()
    } else {
        (1.0 - x).powi(i.min(i32::MAX as u64) as i32)
    }
}

/// `sin(i pi / 4)` exactly, by residue mod 8.
#[inline]
fn sin_quarter_pi(i: u64) -> f64 {
    const TABLE: [f64; 8] = [
        0.0,
        FRAC_1_SQRT_2,
        1.0,
        FRAC_1_SQRT_2,
        0.0,
        -FRAC_1_SQRT_2,
        -1.0,
        -FRAC_1_SQRT_2,
    ];
    TABLE[(i % 8) as usize]
}
