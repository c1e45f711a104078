//! Parameterized scalar function families.
//!
//! Every scalar ingredient of an economy (endowment profile, power cost,
//! extraction technology, utilities) is a [`FunctionDescriptor`]: a family tag,
//! a short list of coefficients and a closed domain. All families have closed
//! forms for value, slope, curvature and antiderivative, so solvers never
//! depend on numerical differentiation.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::ModelError;

/// Relative slack allowed when a point sits on a domain boundary after
/// floating-point accumulation (e.g. `k * dy` overshooting 1.0).
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `[k]`: `k`
    Constant,
    /// `[a]` or `[a, b]`: `a·x + b`
    Linear,
    /// `[a, b]`: `a·x^b`
    Power,
    /// `[a]` or `[a, b, c]`: `a·x² + b·x + c`
    Quadratic,
    /// `[a, b]` or `[a, b, c]`: `a·e^(b·x) + c`
    Exponential,
    /// `[a]` or `[a, b]`: `a·ln(1 + b·x)`
    Log,
    /// `[cap]` or `[cap, slope]`: `slope·min(x, cap)`
    CappedLinear,
    /// `[x0, y0, x1, y1, ...]`: linear interpolation through the points
    PiecewiseLinearTable,
}

impl Family {
    fn arity(self) -> &'static [usize] {
        match self {
            Family::Constant => &[1],
            Family::Linear => &[1, 2],
            Family::Power => &[2],
            Family::Quadratic => &[1, 3],
            Family::Exponential => &[2, 3],
            Family::Log => &[1, 2],
            Family::CappedLinear => &[1, 2],
            Family::PiecewiseLinearTable => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Linear => "linear",
            Family::Power => "power",
            Family::Quadratic => "quadratic",
            Family::Exponential => "exponential",
            Family::Log => "log",
            Family::CappedLinear => "capped-linear",
            Family::PiecewiseLinearTable => "piecewise-linear-table",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed interval. The upper end may be `+inf`; it is written as `null` in JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub const NONNEGATIVE: Domain = Domain { lo: 0.0, hi: f64::INFINITY };
    pub const UNIT: Domain = Domain { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, ModelError> {
        if lo.is_nan() || hi.is_nan() || !lo.is_finite() || lo > hi {
            return Err(ModelError::InvalidDomain { lo, hi });
        }
        Ok(Domain { lo, hi })
    }

    fn slack(bound: f64) -> f64 {
        DOMAIN_SLACK * bound.abs().max(1.0)
    }

    /// Clamps `x` into the domain if it lies within rounding slack of it.
    pub fn admit(&self, x: f64) -> Option<f64> {
        if x.is_nan() || x < self.lo - Self::slack(self.lo) || x > self.hi + Self::slack(self.hi) {
            None
        } else {
            Some(x.clamp(self.lo, self.hi))
        }
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.admit(lo).is_some() && self.admit(hi).is_some()
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let hi = if self.hi.is_finite() { Some(self.hi) } else { None };
        (self.lo, hi).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (lo, hi): (f64, Option<f64>) = Deserialize::deserialize(d)?;
        Domain::new(lo, hi.unwrap_or(f64::INFINITY)).map_err(serde::de::Error::custom)
    }
}

/// First derivative at a point. At a kink `value` is the right-hand slope
/// (left-hand at the upper domain end) and `kink` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub value: f64,
    pub kink: bool,
}

impl Slope {
    fn smooth(value: f64) -> Self {
        Slope { value, kink: false }
    }
}

/// Resource level beyond which a nondecreasing function stops increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Satiation {
    Finite(f64),
    Infinite,
}

impl Satiation {
    /// True if the satiation level lies strictly above `x`.
    pub fn exceeds(&self, x: f64) -> bool {
        match *self {
            Satiation::Finite(s) => s > x,
            Satiation::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Satiation::Finite(s) => Some(s),
            Satiation::Infinite => None,
        }
    }
}

impl fmt::Display for Satiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Satiation::Finite(s) => write!(f, "{s}"),
            Satiation::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for Satiation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Satiation::Finite(v) => s.serialize_f64(v),
            Satiation::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Satiation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Satiation::Finite(v)),
            Repr::Tag(t) if t == "infinite" => Ok(Satiation::Infinite),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unknown satiation `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDescriptor", into = "RawDescriptor")]
pub struct FunctionDescriptor {
    family: Family,
    params: Vec<f64>,
    domain: Domain,
}

#[derive(Serialize, Deserialize)]
struct RawDescriptor {
    family: Family,
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Domain>,
}

impl TryFrom<RawDescriptor> for FunctionDescriptor {
    type Error = ModelError;

    fn try_from(raw: RawDescriptor) -> Result<Self, Self::Error> {
        match raw.domain {
            Some(d) => FunctionDescriptor::with_domain(raw.family, raw.params, d),
            None => FunctionDescriptor::new(raw.family, raw.params),
        }
    }
}

impl From<FunctionDescriptor> for RawDescriptor {
    fn from(fd: FunctionDescriptor) -> Self {
        RawDescriptor { family: fd.family, params: fd.params, domain: Some(fd.domain) }
    }
}

impl FunctionDescriptor {
    /// Builds a descriptor on its default domain: `[x0, xn]` for tables and
    /// `[0, inf)` otherwise.
    pub fn new(family: Family, params: Vec<f64>) -> Result<Self, ModelError> {
        let domain = match family {
            Family::PiecewiseLinearTable if params.len() >= 4 => {
                Domain::new(params[0], params[params.len() - 2])?
            }
            _ => Domain::NONNEGATIVE,
        };
        Self::with_domain(family, params, domain)
    }

    pub fn with_domain(family: Family, params: Vec<f64>, domain: Domain) -> Result<Self, ModelError> {
        if params.iter().any(|p| !p.is_finite()) {
            return Err(ModelError::BadParams { family, reason: "coefficients must be finite".into() });
        }
        let arity = family.arity();
        if !arity.is_empty() && !arity.contains(&params.len()) {
            return Err(ModelError::BadParams {
                family,
                reason: format!("expected {arity:?} coefficients, got {}", params.len()),
            });
        }
        match family {
            Family::PiecewiseLinearTable => {
                if params.len() < 4 || !params.len().is_multiple_of(2) {
                    return Err(ModelError::BadParams {
                        family,
                        reason: "table needs at least two (x, y) pairs".into(),
                    });
                }
                let xs: Vec<f64> = params.iter().step_by(2).copied().collect();
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(ModelError::BadParams {
                        family,
                        reason: "table abscissae must be strictly increasing".into(),
                    });
                }
                if domain.lo < xs[0] || domain.hi > xs[xs.len() - 1] {
                    return Err(ModelError::BadParams {
                        family,
                        reason: "domain extends beyond the table".into(),
                    });
                }
            }
            Family::Power if domain.lo < 0.0 => {
                return Err(ModelError::BadParams { family, reason: "power family needs domain ⊆ [0, inf)".into() });
            }
            Family::Log => {
                let b = params.get(1).copied().unwrap_or(1.0);
                let worst = if b < 0.0 { domain.hi } else { domain.lo };
                if 1.0 + b * worst <= 0.0 {
                    return Err(ModelError::BadParams { family, reason: "1 + b·x must stay positive on the domain".into() });
                }
            }
            _ => {}
        }
        Ok(FunctionDescriptor { family, params, domain })
    }

    pub fn constant(k: f64) -> Self {
        Self::new(Family::Constant, vec![k]).expect("finite constant")
    }

    pub fn linear(slope: f64) -> Self {
        Self::new(Family::Linear, vec![slope]).expect("finite slope")
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        Self::new(Family::Linear, vec![slope, intercept]).expect("finite coefficients")
    }

    pub fn power(a: f64, b: f64) -> Self {
        Self::new(Family::Power, vec![a, b]).expect("finite coefficients")
    }

    pub fn quadratic(a: f64) -> Self {
        Self::new(Family::Quadratic, vec![a]).expect("finite coefficient")
    }

    pub fn quadratic_full(a: f64, b: f64, c: f64) -> Self {
        Self::new(Family::Quadratic, vec![a, b, c]).expect("finite coefficients")
    }

    pub fn log(a: f64, b: f64) -> Result<Self, ModelError> {
        Self::new(Family::Log, vec![a, b])
    }

    pub fn capped_linear(cap: f64, slope: f64) -> Self {
        Self::new(Family::CappedLinear, vec![cap, slope]).expect("finite coefficients")
    }

    pub fn table(points: &[(f64, f64)]) -> Result<Self, ModelError> {
        let params = points.iter().flat_map(|&(x, y)| [x, y]).collect();
        Self::new(Family::PiecewiseLinearTable, params)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Same family and coefficients, restricted or extended to `domain`.
    pub fn on_domain(&self, domain: Domain) -> Result<Self, ModelError> {
        Self::with_domain(self.family, self.params.clone(), domain)
    }

    fn p(&self, i: usize, default: f64) -> f64 {
        self.params.get(i).copied().unwrap_or(default)
    }

    fn admit(&self, x: f64) -> Result<f64, ModelError> {
        self.domain.admit(x).ok_or(ModelError::OutOfDomain {
            family: self.family,
            x,
            lo: self.domain.lo,
            hi: self.domain.hi,
        })
    }

    fn table_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.params.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    /// Index of the table segment containing `x`, preferring the right-hand
    /// segment at interior breakpoints.
    fn table_segment(&self, x: f64) -> usize {
        let n = self.params.len() / 2;
        let mut seg = 0;
        for i in 1..n - 1 {
            if x >= self.params[2 * i] {
                seg = i;
            }
        }
        seg
    }

    fn segment_slope(&self, seg: usize) -> f64 {
        let (x0, y0, x1, y1) = (
            self.params[2 * seg],
            self.params[2 * seg + 1],
            self.params[2 * seg + 2],
            self.params[2 * seg + 3],
        );
        (y1 - y0) / (x1 - x0)
    }

    fn value_unchecked(&self, x: f64) -> f64 {
        match self.family {
            Family::Constant => self.params[0],
            Family::Linear => self.params[0] * x + self.p(1, 0.0),
            Family::Power => self.params[0] * x.powf(self.params[1]),
            Family::Quadratic => self.params[0] * x * x + self.p(1, 0.0) * x + self.p(2, 0.0),
            Family::Exponential => self.params[0] * (self.params[1] * x).exp() + self.p(2, 0.0),
            Family::Log => self.params[0] * (self.p(1, 1.0) * x).ln_1p(),
            Family::CappedLinear => self.p(1, 1.0) * x.min(self.params[0]),
            Family::PiecewiseLinearTable => {
                let seg = self.table_segment(x);
                let (x0, y0) = (self.params[2 * seg], self.params[2 * seg + 1]);
                y0 + self.segment_slope(seg) * (x - x0)
            }
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, ModelError> {
        let x = self.admit(x)?;
        Ok(self.value_unchecked(x))
    }

    /// Evaluates a point known to be inside the domain (panics otherwise).
    pub(crate) fn at(&self, x: f64) -> f64 {
        self.evaluate(x).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn derivative(&self, x: f64) -> Result<Slope, ModelError> {
        let x = self.admit(x)?;
        let slope = match self.family {
            Family::Constant => Slope::smooth(0.0),
            Family::Linear => Slope::smooth(self.params[0]),
            Family::Power => {
                let (a, b) = (self.params[0], self.params[1]);
                if b == 0.0 {
                    Slope::smooth(0.0)
                } else {
                    Slope::smooth(a * b * x.powf(b - 1.0))
                }
            }
            Family::Quadratic => Slope::smooth(2.0 * self.params[0] * x + self.p(1, 0.0)),
            Family::Exponential => {
                let (a, b) = (self.params[0], self.params[1]);
                Slope::smooth(a * b * (b * x).exp())
            }
            Family::Log => {
                let (a, b) = (self.params[0], self.p(1, 1.0));
                Slope::smooth(a * b / (1.0 + b * x))
            }
            Family::CappedLinear => {
                let (cap, slope) = (self.params[0], self.p(1, 1.0));
                if x < cap {
                    Slope::smooth(slope)
                } else if x > cap {
                    Slope::smooth(0.0)
                } else if x >= self.domain.hi {
                    Slope { value: slope, kink: true }
                } else {
                    Slope { value: 0.0, kink: true }
                }
            }
            Family::PiecewiseLinearTable => {
                let n = self.params.len() / 2;
                let at_break = (1..n - 1).any(|i| self.params[2 * i] == x);
                if at_break && x >= self.domain.hi {
                    Slope { value: self.segment_slope(self.table_segment(x) - 1), kink: true }
                } else {
                    Slope { value: self.segment_slope(self.table_segment(x)), kink: at_break }
                }
            }
        };
        Ok(slope)
    }

    /// Curvature away from kinks; kinks themselves contribute zero.
    pub fn second_derivative(&self, x: f64) -> Result<f64, ModelError> {
        let x = self.admit(x)?;
        Ok(match self.family {
            Family::Constant | Family::Linear | Family::CappedLinear | Family::PiecewiseLinearTable => 0.0,
            Family::Power => {
                let (a, b) = (self.params[0], self.params[1]);
                if b == 0.0 || b == 1.0 {
                    0.0
                } else {
                    a * b * (b - 1.0) * x.powf(b - 2.0)
                }
            }
            Family::Quadratic => 2.0 * self.params[0],
            Family::Exponential => {
                let (a, b) = (self.params[0], self.params[1]);
                a * b * b * (b * x).exp()
            }
            Family::Log => {
                let (a, b) = (self.params[0], self.p(1, 1.0));
                -a * b * b / ((1.0 + b * x) * (1.0 + b * x))
            }
        })
    }

    fn antiderivative(&self, x: f64) -> f64 {
        match self.family {
            Family::Constant => self.params[0] * x,
            Family::Linear => 0.5 * self.params[0] * x * x + self.p(1, 0.0) * x,
            Family::Power => {
                let (a, b) = (self.params[0], self.params[1]);
                if b == -1.0 {
                    a * x.ln()
                } else {
                    a * x.powf(b + 1.0) / (b + 1.0)
                }
            }
            Family::Quadratic => {
                self.params[0] * x * x * x / 3.0 + 0.5 * self.p(1, 0.0) * x * x + self.p(2, 0.0) * x
            }
            Family::Exponential => {
                let (a, b, c) = (self.params[0], self.params[1], self.p(2, 0.0));
                if b == 0.0 {
                    (a + c) * x
                } else {
                    a * (b * x).exp() / b + c * x
                }
            }
            Family::Log => {
                let (a, b) = (self.params[0], self.p(1, 1.0));
                if b == 0.0 {
                    0.0
                } else {
                    let u = 1.0 + b * x;
                    // (u ln u - u + 1) / b, written to stay accurate near u = 1
                    a * (u * (b * x).ln_1p() - b * x) / b
                }
            }
            Family::CappedLinear => {
                let (cap, slope) = (self.params[0], self.p(1, 1.0));
                if x <= cap {
                    0.5 * slope * x * x
                } else {
                    slope * (0.5 * cap * cap + cap * (x - cap))
                }
            }
            Family::PiecewiseLinearTable => {
                let mut acc = 0.0;
                let pts: Vec<(f64, f64)> = self.table_points().collect();
                for w in pts.windows(2) {
                    let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                    if x <= x0 {
                        break;
                    }
                    let hi = x.min(x1);
                    let y_hi = y0 + (y1 - y0) * (hi - x0) / (x1 - x0);
                    acc += 0.5 * (y0 + y_hi) * (hi - x0);
                }
                acc
            }
        }
    }

    pub fn definite_integral(&self, a: f64, b: f64) -> Result<f64, ModelError> {
        if a > b {
            return Err(ModelError::ReversedInterval { a, b });
        }
        let (a, b) = (self.admit(a)?, self.admit(b)?);
        if a == b {
            return Ok(0.0);
        }
        Ok(self.antiderivative(b) - self.antiderivative(a))
    }

    /// Smallest level beyond which the function no longer increases, assuming
    /// the function is nondecreasing on its domain. Families that keep rising
    /// (even with vanishing slope, like `ln(1+x)`) are `Infinite`.
    pub fn satiation_point(&self, tol: f64) -> Satiation {
        let lo = self.domain.lo;
        match self.family {
            Family::Constant => Satiation::Finite(lo),
            Family::Linear => rising(self.params[0] > tol, lo),
            Family::Power => rising(self.params[0] * self.params[1] > 0.0, lo),
            Family::Quadratic => {
                let (a, b) = (self.params[0], self.p(1, 0.0));
                if a < 0.0 {
                    Satiation::Finite((-b / (2.0 * a)).max(lo))
                } else if a == 0.0 {
                    rising(b > tol, lo)
                } else {
                    Satiation::Infinite
                }
            }
            Family::Exponential => rising(self.params[0] * self.params[1] > 0.0, lo),
            Family::Log => rising(self.params[0] * self.p(1, 1.0) > 0.0, lo),
            Family::CappedLinear => {
                let (cap, slope) = (self.params[0], self.p(1, 1.0));
                if slope > tol {
                    Satiation::Finite(cap.max(lo))
                } else {
                    Satiation::Finite(lo)
                }
            }
            Family::PiecewiseLinearTable => {
                let n = self.params.len() / 2;
                let last_rising = (0..n - 1).rev().find(|&seg| self.segment_slope(seg) > tol);
                match last_rising {
                    None => Satiation::Finite(lo),
                    Some(seg) if seg == n - 2 => Satiation::Infinite,
                    Some(seg) => Satiation::Finite(self.params[2 * seg + 2].max(lo)),
                }
            }
        }
    }
}

fn rising(increasing: bool, lo: f64) -> Satiation {
    if increasing {
        Satiation::Infinite
    } else {
        Satiation::Finite(lo)
    }
}

impl fmt::Display for FunctionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// Composite Simpson quadrature with `n` (rounded up to even) subintervals.
pub fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = g(a) + g(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(a + i as f64 * h);
    }
    acc * h / 3.0
}
