//! Physical quantities with explicit units.
//!
//! Durations are stored in nanoseconds and angular rates in rad/ns, so that
//! products like `kappa * t` are dimensionless without further conversion.
//! Textual forms always carry a unit suffix (`350ns`, `100us`, `200MHz`);
//! bare numbers are rejected.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A duration, possibly infinite (used for "no decay" lifetimes).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Time(f64);

impl Time {
    pub const INFINITE: Time = Time(f64::INFINITY);
    pub const ZERO: Time = Time(0.0);

    pub fn from_ns(ns: f64) -> Self {
        Time(ns)
    }

    pub fn from_us(us: f64) -> Self {
        Time(us * 1e3)
    }

    pub fn ns(self) -> f64 {
        self.0
    }

    pub fn us(self) -> f64 {
        self.0 * 1e-3
    }

    pub fn seconds(self) -> f64 {
        self.0 * 1e-9
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}ns", self.0)
        }
    }
}

impl FromStr for Time {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") {
            return Ok(Time::INFINITE);
        }
        let (value, scale) = split_unit(s, &[("ns", 1.0), ("us", 1e3), ("µs", 1e3), ("ms", 1e6)])
            .ok_or_else(|| Error::invalid(format!("duration `{s}` needs a unit suffix (ns, us, ms) or `inf`")))?;
        let t = value * scale;
        if t.is_nan() {
            return Err(Error::invalid(format!("duration `{s}` is not a number")));
        }
        Ok(Time(t))
    }
}

/// Angular rate in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngularRate(f64);

impl AngularRate {
    pub fn from_rad_per_ns(w: f64) -> Self {
        AngularRate(w)
    }

    pub fn from_rad_per_s(w: f64) -> Self {
        AngularRate(w * 1e-9)
    }

    /// `2π × mhz` MHz, the usual way coupling rates are quoted.
    pub fn from_cyclic_mhz(mhz: f64) -> Self {
        AngularRate(std::f64::consts::TAU * mhz * 1e-3)
    }

    pub fn rad_per_ns(self) -> f64 {
        self.0
    }

    pub fn cyclic_mhz(self) -> f64 {
        self.0 / std::f64::consts::TAU * 1e3
    }
}

impl fmt::Display for AngularRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}MHz", self.cyclic_mhz())
    }
}

impl FromStr for AngularRate {
    type Err = Error;

    /// Parses a cyclic frequency (`200MHz`, `1.5GHz`, `800kHz`) as `2π f`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (value, scale) = split_unit(s, &[("GHz", 1e3), ("MHz", 1.0), ("kHz", 1e-3)])
            .ok_or_else(|| Error::invalid(format!("rate `{s}` needs a unit suffix (kHz, MHz, GHz)")))?;
        if !value.is_finite() {
            return Err(Error::invalid(format!("rate `{s}` must be finite")));
        }
        Ok(AngularRate::from_cyclic_mhz(value * scale))
    }
}

fn split_unit(s: &str, units: &[(&str, f64)]) -> Option<(f64, f64)> {
    units.iter().find_map(|(suffix, scale)| {
        let head = s.strip_suffix(suffix)?;
        head.trim().parse::<f64>().ok().map(|v| (v, *scale))
    })
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Time);
string_serde!(AngularRate);
