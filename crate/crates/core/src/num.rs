//! Exact number types shared by every rate functional.
//!
//! Rates are arbitrary-precision naturals ([`Nat`]); the real-valued
//! parameters they depend on (ε, K, r, η, ...) are nonnegative rationals
//! kept in lowest terms ([`PosRational`]). Nothing here ever rounds.

use std::fmt;
use std::ops::{Add, Div, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision natural number.
pub type Nat = BigUint;

/// Signed exact rational, used for point coordinates in certificates.
pub type Rational = BigRational;

/// Nonnegative rational in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosRational(Ratio<BigUint>);

impl PosRational {
    pub fn new(numer: impl Into<BigUint>, denom: impl Into<BigUint>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Self(Ratio::new(numer.into(), denom)))
    }

    /// `numer/denom` from machine integers. Panics if `denom == 0`.
    pub fn ratio(numer: u64, denom: u64) -> Self {
        assert!(denom != 0, "zero denominator");
        Self(Ratio::new(BigUint::from(numer), BigUint::from(denom)))
    }

    pub fn integer(n: u64) -> Self {
        Self(Ratio::from_integer(BigUint::from(n)))
    }

    pub fn from_nat(n: Nat) -> Self {
        Self(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn one() -> Self {
        Self(Ratio::one())
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Exact ceiling. An integral value is its own ceiling.
    pub fn ceil(&self) -> Nat {
        self.numer().div_ceil(self.denom())
    }

    pub fn floor(&self) -> Nat {
        self.numer() / self.denom()
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(Self(&self.0 / &rhs.0))
        }
    }

    /// `self - rhs`, or `None` when the result would be negative.
    pub fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        if rhs > self {
            None
        } else {
            Some(Self(&self.0 - &rhs.0))
        }
    }

    pub fn recip(&self) -> Option<Self> {
        Self::one().checked_div(self)
    }

    pub fn pow(&self, exp: u32) -> Self {
        Self(Ratio::new_raw(self.numer().pow(exp), self.denom().pow(exp)))
    }

    /// Nearest `f64`; used only where a bound meets floating-point data.
    pub fn to_f64(&self) -> f64 {
        let n = BigInt::from(self.numer().clone());
        let d = BigInt::from(self.denom().clone());
        Ratio::new_raw(n, d).to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn to_signed(&self) -> Rational {
        Ratio::new_raw(
            BigInt::from(self.numer().clone()),
            BigInt::from(self.denom().clone()),
        )
    }

    /// Exact conversion of a finite, nonnegative `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() || x < 0.0 {
            return None;
        }
        let r = Ratio::<BigInt>::from_float(x)?;
        let (n, d) = r.into();
        Some(Self(Ratio::new(n.to_biguint()?, d.to_biguint()?)))
    }
}

impl fmt::Display for PosRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for PosRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PosRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let parse = |t: &str| {
            t.parse::<BigUint>()
                .map_err(|_| Error::Parse(format!("`{s}` is not a nonnegative rational")))
        };
        Self::new(parse(n)?, parse(d)?)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&PosRational> for &PosRational {
            type Output = PosRational;
            fn $method(self, rhs: &PosRational) -> PosRational {
                PosRational($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr for PosRational {
            type Output = PosRational;
            fn $method(self, rhs: PosRational) -> PosRational {
                PosRational($tr::$method(self.0, rhs.0))
            }
        }
        impl $tr<&PosRational> for PosRational {
            type Output = PosRational;
            fn $method(self, rhs: &PosRational) -> PosRational {
                PosRational($tr::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Mul, mul);
// Division by zero panics, as for the underlying ratio type; use `checked_div`
// where the divisor is not known to be positive.
forward_binop!(Div, div);

impl Serialize for PosRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("PosRational", 2)?;
        st.serialize_field("num", &self.numer().to_string())?;
        st.serialize_field("den", &self.denom().to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PosRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;

        impl<'de> Visitor<'de> for V {
            type Value = PosRational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str(r#"a rational as "num/den", an integer, or {"num": "..", "den": ".."}"#)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<PosRational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<PosRational, E> {
                Ok(PosRational::integer(v))
            }

            fn visit_map<A: de::MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<PosRational, A::Error> {
                let mut num: Option<String> = None;
                let mut den: Option<String> = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "num" => num = Some(map.next_value()?),
                        "den" => den = Some(map.next_value()?),
                        other => return Err(de::Error::unknown_field(other, &["num", "den"])),
                    }
                }
                let num = num.ok_or_else(|| de::Error::missing_field("num"))?;
                let den = den.ok_or_else(|| de::Error::missing_field("den"))?;
                format!("{num}/{den}").parse().map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_any(V)
    }
}

/// Parses a signed rational written as `"[-]num/den"` or `"[-]num"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let mag: PosRational = body.parse()?;
    let r = mag.to_signed();
    Ok(if neg { -r } else { r })
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter for [`Nat`] as a decimal string (integers also accepted).
pub mod nat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(n: &Nat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Nat, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Nat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a natural number as a decimal string or integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Nat, E> {
                v.trim().parse().map_err(|_| E::custom(format!("`{v}` is not a natural number")))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Nat, E> {
                Ok(Nat::from(v))
            }
        }
        d.deserialize_any(V)
    }
}

/// Serde adapter for `Vec<Nat>`.
pub mod nat_vec_serde {
    use super::*;
    use serde::ser::SerializeSeq;

    #[derive(Deserialize)]
    struct Wrapped(#[serde(with = "nat_serde")] Nat);

    pub fn serialize<S: Serializer>(v: &[Nat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for n in v {
            seq.serialize_element(&n.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Nat>, D::Error> {
        let v: Vec<Wrapped> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|w| w.0).collect())
    }
}

/// Serde adapter for signed rationals as `"num/den"` strings.
pub mod rational_vec_serde {
    use super::*;
    use serde::ser::SerializeSeq;

    fn show(r: &Rational) -> String {
        if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&show(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        let raw: Vec<Raw> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|r| match r {
                Raw::Str(s) => parse_rational(&s).map_err(de::Error::custom),
                Raw::Int(i) => Ok(Rational::from_integer(BigInt::from(i))),
            })
            .collect()
    }
}
