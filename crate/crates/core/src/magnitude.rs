//! Extended-range nonnegative reals.
//!
//! The oscillating warp needs breakpoints like `e^8000`, far outside `f64`.
//! A [`Magnitude`] holds its value linearly inside `[1e-299, 1e299]` and as a
//! natural logarithm beyond that, so ordinary radii keep exact `f64`
//! semantics and huge or tiny radii keep full relative precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Values in `[1e-299, 1e299]` (and zero) are stored linearly.
const LIN_MAX: f64 = 1.0e299;
const LIN_MIN: f64 = 1.0e-299;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    Lin(f64),
    Log(f64),
}

/// A nonnegative real number with practically unbounded exponent range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Magnitude(Repr);

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude(Repr::Lin(0.0));
    pub const ONE: Magnitude = Magnitude(Repr::Lin(1.0));

    /// Wraps a nonnegative `f64`. Panics on negative or NaN input.
    pub fn new(x: f64) -> Self {
        assert!(
            x >= 0.0,
            "Magnitude::new requires a nonnegative value, got {x}"
        );
        if x == 0.0 {
            return Self::ZERO;
        }
        if x.is_finite() && (LIN_MIN..=LIN_MAX).contains(&x) {
            Magnitude(Repr::Lin(x))
        } else {
            Magnitude(Repr::Log(x.ln()))
        }
    }

    /// Builds `e^l`. `l = -inf` gives zero.
    pub fn from_ln(l: f64) -> Self {
        assert!(!l.is_nan(), "Magnitude::from_ln got NaN");
        if l == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let x = l.exp();
        if x.is_finite() && (LIN_MIN..=LIN_MAX).contains(&x) {
            Magnitude(Repr::Lin(x))
        } else {
            Magnitude(Repr::Log(l))
        }
    }

    pub fn ln(self) -> f64 {
        match self.0 {
            Repr::Lin(x) => x.ln(),
            Repr::Log(l) => l,
        }
    }

    pub fn log10(self) -> f64 {
        match self.0 {
            Repr::Lin(x) => x.log10(),
            Repr::Log(l) => l / std::f64::consts::LN_10,
        }
    }

    /// Nearest `f64`; overflows to `inf` and underflows to `0`.
    pub fn to_f64(self) -> f64 {
        match self.0 {
            Repr::Lin(x) => x,
            Repr::Log(l) => l.exp(),
        }
    }

    /// `Some(x)` when the value is held linearly.
    pub fn as_linear(self) -> Option<f64> {
        match self.0 {
            Repr::Lin(x) => Some(x),
            Repr::Log(_) => None,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self.0, Repr::Lin(x) if x == 0.0)
    }

    pub fn powf(self, p: f64) -> Self {
        match self.0 {
            Repr::Lin(0.0) => {
                if p == 0.0 {
                    Self::ONE
                } else if p > 0.0 {
                    Self::ZERO
                } else {
                    Magnitude(Repr::Log(f64::INFINITY))
                }
            }
            Repr::Lin(x) => {
                let r = x.powf(p);
                if r.is_finite() && (LIN_MIN..=LIN_MAX).contains(&r) {
                    Magnitude(Repr::Lin(r))
                } else {
                    Self::from_ln(p * x.ln())
                }
            }
            Repr::Log(l) => Self::from_ln(p * l),
        }
    }

    pub fn sqrt(self) -> Self {
        match self.0 {
            Repr::Lin(x) => Magnitude(Repr::Lin(x.sqrt())),
            Repr::Log(l) => Self::from_ln(0.5 * l),
        }
    }

    /// `self - other`, or `None` when the difference would be negative.
    pub fn checked_sub(self, other: Self) -> Option<Self> {
        match (self.0, other.0) {
            (Repr::Lin(a), Repr::Lin(b)) => {
                let d = a - b;
                if d < 0.0 {
                    None
                } else {
                    Some(Self::new(d))
                }
            }
            _ => {
                let (la, lb) = (self.ln(), other.ln());
                if lb > la {
                    None
                } else if lb == la {
                    Some(Self::ZERO)
                } else {
                    Some(Self::from_ln(la + (-(lb - la).exp_m1()).ln()))
                }
            }
        }
    }

    /// `|self - other|`.
    pub fn abs_diff(self, other: Self) -> Self {
        if self >= other {
            self.checked_sub(other).unwrap_or(Self::ZERO)
        } else {
            other.checked_sub(self).unwrap_or(Self::ZERO)
        }
    }

    /// The next representable magnitude above `self`.
    pub fn next_up(self) -> Self {
        match self.0 {
            Repr::Lin(x) => Self::new(x.next_up()),
            Repr::Log(l) => Self::from_ln(l.next_up()),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Relative difference `|a - b| / max(a, b)`, computed without overflow.
    pub fn rel_diff(self, other: Self) -> f64 {
        let big = self.max(other);
        if big.is_zero() {
            return 0.0;
        }
        (self.abs_diff(other) / big).to_f64()
    }
}

impl From<f64> for Magnitude {
    fn from(x: f64) -> Self {
        Magnitude::new(x)
    }
}

impl Add for Magnitude {
    type Output = Magnitude;
    fn add(self, rhs: Self) -> Self {
        if let (Repr::Lin(a), Repr::Lin(b)) = (self.0, rhs.0) {
            let s = a + b;
            if s <= LIN_MAX {
                return Magnitude(Repr::Lin(s));
            }
        }
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (la, lb) = (self.ln(), rhs.ln());
        let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
        Magnitude::from_ln(hi + (lo - hi).exp().ln_1p())
    }
}

impl Mul for Magnitude {
    type Output = Magnitude;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Magnitude::ZERO;
        }
        if let (Repr::Lin(a), Repr::Lin(b)) = (self.0, rhs.0) {
            let p = a * b;
            if (LIN_MIN..=LIN_MAX).contains(&p) {
                return Magnitude(Repr::Lin(p));
            }
        }
        Magnitude::from_ln(self.ln() + rhs.ln())
    }
}

impl Mul<f64> for Magnitude {
    type Output = Magnitude;
    fn mul(self, rhs: f64) -> Self {
        self * Magnitude::new(rhs)
    }
}

impl Div for Magnitude {
    type Output = Magnitude;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "Magnitude division by zero");
        if self.is_zero() {
            return Magnitude::ZERO;
        }
        if let (Repr::Lin(a), Repr::Lin(b)) = (self.0, rhs.0) {
            let q = a / b;
            if (LIN_MIN..=LIN_MAX).contains(&q) {
                return Magnitude(Repr::Lin(q));
            }
        }
        Magnitude::from_ln(self.ln() - rhs.ln())
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.0, other.0) {
            (Repr::Lin(a), Repr::Lin(b)) => a.partial_cmp(&b),
            _ => self.ln().partial_cmp(&other.ln()),
        }
    }
}

/// Scientific notation with 17 significant digits (`%.16e` style).
impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Lin(x) => write!(f, "{x:.16e}"),
            Repr::Log(l) => {
                let e10 = l / std::f64::consts::LN_10;
                let mut exp = e10.floor();
                let mut mant = 10f64.powf(e10 - exp);
                if mant >= 9.999_999_999_999_999_5 {
                    mant /= 10.0;
                    exp += 1.0;
                }
                write!(f, "{mant:.16}e{}", exp as i64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseMagnitudeError(pub String);

impl fmt::Display for ParseMagnitudeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid magnitude literal `{}`", self.0)
    }
}

impl std::error::Error for ParseMagnitudeError {}

impl FromStr for Magnitude {
    type Err = ParseMagnitudeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseMagnitudeError(s.to_string());
        if let Ok(x) = s.parse::<f64>() {
            if x.is_finite() && x >= 0.0 && (x == 0.0 || (LIN_MIN..=LIN_MAX).contains(&x)) {
                return Ok(Magnitude::new(x));
            }
        }
        // Out of f64 range: split mantissa and exponent by hand.
        let (mant, exp) = s.split_once(['e', 'E']).ok_or_else(bad)?;
        let mant: f64 = mant.parse().map_err(|_| bad())?;
        let exp: i64 = exp.parse().map_err(|_| bad())?;
        if !(mant > 0.0) || !mant.is_finite() {
            return Err(bad());
        }
        Ok(Magnitude::from_ln(
            mant.ln() + exp as f64 * std::f64::consts::LN_10,
        ))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MagnitudeDto {
    Linear(f64),
    Log { ln: f64 },
}

/// Linear values serialize as JSON numbers, log-held values as `{"ln": x}`.
/// Both forms round-trip bit-exactly.
impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Repr::Lin(x) => MagnitudeDto::Linear(x),
            Repr::Log(l) => MagnitudeDto::Log { ln: l },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Magnitude {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match MagnitudeDto::deserialize(deserializer)? {
            MagnitudeDto::Linear(x) if x >= 0.0 => Ok(Magnitude::new(x)),
            MagnitudeDto::Linear(x) => {
                Err(serde::de::Error::custom(format!("negative magnitude {x}")))
            }
            MagnitudeDto::Log { ln } if !ln.is_nan() => Ok(Magnitude::from_ln(ln)),
            MagnitudeDto::Log { .. } => Err(serde::de::Error::custom("NaN log-magnitude")),
        }
    }
}
