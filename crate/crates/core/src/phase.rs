//! Angles as exact rational multiples of *π*, with a raw-radians escape hatch.
//!
//! Exact phases are always reduced modulo 2*π* and stored as a fraction in
//! `[0, 2)` (units of *π*). Arithmetic between two exact phases stays exact;
//! mixing in a [`Phase::Radians`] value degrades the result to radians.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real phase angle.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Phase {
    /// `r·π` with `r` reduced into `[0, 2)`.
    Pi(Rational64),
    /// Arbitrary angle in radians, kept as given.
    Radians(f64),
}

fn reduce(r: Rational64) -> Rational64 {
    let two = Rational64::from_integer(2);
    let q = (r / two).floor();
    r - q * two
}

impl Phase {
    pub fn zero() -> Self {
        Self::Pi(Rational64::zero())
    }

    pub fn pi() -> Self {
        Self::Pi(Rational64::from_integer(1))
    }

    /// `num/den · π`. Panics if `den == 0`.
    pub fn pi_frac(num: i64, den: i64) -> Self {
        Self::from_pi_ratio(Rational64::new(num, den))
    }

    pub fn from_pi_ratio(r: Rational64) -> Self {
        Self::Pi(reduce(r))
    }

    pub fn radians(self) -> f64 {
        match self {
            Self::Pi(r) => r.to_f64().unwrap_or(f64::NAN) * PI,
            Self::Radians(x) => x,
        }
    }

    /// The exact multiple of *π*, if this phase is exact.
    pub fn exact(self) -> Option<Rational64> {
        match self {
            Self::Pi(r) => Some(r),
            Self::Radians(_) => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Self::Pi(_))
    }

    /// Signed representative in `(-1, 1]` units of *π*.
    pub fn signed_pi_ratio(self) -> Option<Rational64> {
        self.exact().map(|r| {
            if r > Rational64::from_integer(1) {
                r - Rational64::from_integer(2)
            } else {
                r
            }
        })
    }

    /// Zero modulo 2π (exactly, or within `1e-12` for radians).
    pub fn is_zero(self) -> bool {
        match self {
            Self::Pi(r) => r.is_zero(),
            Self::Radians(x) => {
                let m = x.rem_euclid(2.0 * PI);
                m < 1e-12 || 2.0 * PI - m < 1e-12
            }
        }
    }

    /// `e^{iφ}`.
    pub fn unit(self) -> num_complex::Complex64 {
        match self.exact() {
            // exact values on the π/4 grid avoid sin/cos rounding
            Some(r) if (r * Rational64::from_integer(4)).is_integer() => {
                let k = (r * Rational64::from_integer(4)).to_integer().rem_euclid(8);
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let (re, im) = match k {
                    0 => (1.0, 0.0),
                    1 => (h, h),
                    2 => (0.0, 1.0),
                    3 => (-h, h),
                    4 => (-1.0, 0.0),
                    5 => (-h, -h),
                    6 => (0.0, -1.0),
                    _ => (h, -h),
                };
                num_complex::Complex64::new(re, im)
            }
            _ => num_complex::Complex64::from_polar(1.0, self.radians()),
        }
    }
}

impl Default for Phase {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        match (self, rhs) {
            (Self::Pi(a), Self::Pi(b)) => Self::from_pi_ratio(a + b),
            (a, b) => Self::Radians(a.radians() + b.radians()),
        }
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        match self {
            Self::Pi(a) => Self::from_pi_ratio(-a),
            Self::Radians(x) => Self::Radians(-x),
        }
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        self + (-rhs)
    }
}

impl Mul<i64> for Phase {
    type Output = Phase;
    fn mul(self, k: i64) -> Phase {
        match self {
            Self::Pi(a) => Self::from_pi_ratio(a * Rational64::from_integer(k)),
            Self::Radians(x) => Self::Radians(x * k as f64),
        }
    }
}

/// Division acts on the signed representative, so `(-π/2)/2 = -π/4`.
impl Div<i64> for Phase {
    type Output = Phase;
    fn div(self, k: i64) -> Phase {
        match self {
            Self::Pi(_) => {
                let s = self.signed_pi_ratio().unwrap();
                Self::from_pi_ratio(s / Rational64::from_integer(k))
            }
            Self::Radians(x) => Self::Radians(x / k as f64),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.signed_pi_ratio() {
            None => write!(f, "{}", self.radians()),
            Some(r) if r.is_zero() => write!(f, "0"),
            Some(r) => {
                let sign = if r.is_negative() { "-" } else { "" };
                let (n, d) = (r.numer().abs(), *r.denom());
                match (n, d) {
                    (1, 1) => write!(f, "{sign}π"),
                    (1, d) => write!(f, "{sign}π/{d}"),
                    (n, 1) => write!(f, "{sign}{n}π"),
                    (n, d) => write!(f, "{sign}{n}π/{d}"),
                }
            }
        }
    }
}

/// Parse `"1/2"` (meaning π/2), `"-1/4"`, `"1"`, or `"0"`.
impl std::str::FromStr for Phase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: i64 = num.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let den: i64 = den.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if den == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Self::pi_frac(num, den))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PhaseRepr {
    Pi { pi_num: i64, pi_den: i64 },
    Radians(f64),
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let repr = match self.signed_pi_ratio() {
            Some(r) => PhaseRepr::Pi { pi_num: *r.numer(), pi_den: *r.denom() },
            None => PhaseRepr::Radians(self.radians()),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        match PhaseRepr::deserialize(de)? {
            PhaseRepr::Pi { pi_den: 0, .. } => {
                Err(serde::de::Error::custom("pi_den must be nonzero"))
            }
            PhaseRepr::Pi { pi_num, pi_den } => Ok(Self::pi_frac(pi_num, pi_den)),
            PhaseRepr::Radians(x) => Ok(Self::Radians(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_display() {
        assert_eq!(Phase::pi_frac(-1, 2), Phase::pi_frac(3, 2));
        assert_eq!(Phase::pi_frac(5, 2), Phase::pi_frac(1, 2));
        assert_eq!(Phase::pi_frac(-1, 2).to_string(), "-π/2");
        assert_eq!(Phase::pi_frac(1, 1).to_string(), "π");
        assert_eq!(Phase::pi_frac(2, 3).to_string(), "2π/3");
        assert_eq!(Phase::zero().to_string(), "0");
    }

    #[test]
    fn exact_arithmetic() {
        let a = Phase::pi_frac(1, 4);
        assert_eq!(a + a, Phase::pi_frac(1, 2));
        assert_eq!(a * 8, Phase::zero());
        assert_eq!(Phase::pi() / 2, Phase::pi_frac(1, 2));
        assert_eq!(-(Phase::pi() / 2), Phase::pi_frac(-1, 2));
        // -π is stored as π, so halving it gives π/2
        assert_eq!((-Phase::pi()) / 2, Phase::pi_frac(1, 2));
        assert_eq!(Phase::pi_frac(-1, 2) / 2, Phase::pi_frac(-1, 4));
        assert!((Phase::pi_frac(1, 3) + Phase::Radians(0.5)).radians() - (PI / 3.0 + 0.5) < 1e-15);
    }

    #[test]
    fn unit_on_grid_is_exact() {
        assert_eq!(Phase::pi_frac(1, 2).unit(), num_complex::Complex64::new(0.0, 1.0));
        assert_eq!(Phase::pi().unit(), num_complex::Complex64::new(-1.0, 0.0));
        let u = Phase::pi_frac(1, 3).unit();
        assert!((u.arg() - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn parse_and_json() {
        assert_eq!("1/2".parse::<Phase>().unwrap(), Phase::pi_frac(1, 2));
        assert_eq!("-1/4".parse::<Phase>().unwrap(), Phase::pi_frac(7, 4));
        assert!("1/0".parse::<Phase>().is_err());
        let j = serde_json::to_string(&Phase::pi_frac(3, 2)).unwrap();
        assert_eq!(j, r#"{"pi_num":-1,"pi_den":2}"#);
        let p: Phase = serde_json::from_str("0.25").unwrap();
        assert_eq!(p, Phase::Radians(0.25));
        let p: Phase = serde_json::from_str(r#"{"pi_num":1,"pi_den":4}"#).unwrap();
        assert_eq!(p, Phase::pi_frac(1, 4));
    }
}
