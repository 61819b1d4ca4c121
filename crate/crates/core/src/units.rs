//! Unit handling.
//!
//! Internally everything is ħ = 1 with energies and angular frequencies in
//! rad/ns and times in ns. Frequencies quoted in GHz or MHz are taken as
//! angular (1 GHz = 1 rad/ns), matching how the device numbers are usually
//! quoted. Energies may also be given in μeV and are converted with
//! [`HBAR_UEV_NS`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ħ in μeV·ns.
pub const HBAR_UEV_NS: f64 = 0.658_211_956_9;

pub fn uev_to_rad_per_ns(energy_uev: f64) -> f64 {
    energy_uev / HBAR_UEV_NS
}

pub fn rad_per_ns_to_uev(omega: f64) -> f64 {
    omega * HBAR_UEV_NS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    /// Energy or angular frequency (rad/ns canonical).
    Frequency,
    /// Time (ns canonical).
    Time,
    Dimensionless,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "rad/ns")]
    RadPerNs,
    #[serde(rename = "ueV", alias = "μeV", alias = "µeV")]
    MicroElectronVolt,
    #[serde(rename = "GHz")]
    GigaHertz,
    #[serde(rename = "MHz")]
    MegaHertz,
    #[serde(rename = "ns")]
    Nanosecond,
    #[serde(rename = "us", alias = "μs", alias = "µs")]
    Microsecond,
    #[serde(rename = "ps")]
    Picosecond,
    #[serde(rename = "1", alias = "dimensionless", alias = "")]
    Dimensionless,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::RadPerNs | Unit::MicroElectronVolt | Unit::GigaHertz | Unit::MegaHertz => {
                Dimension::Frequency
            }
            Unit::Nanosecond | Unit::Microsecond | Unit::Picosecond => Dimension::Time,
            Unit::Dimensionless => Dimension::Dimensionless,
        }
    }

    /// Converts a value in this unit to the canonical unit of its dimension.
    pub fn to_canonical(self, value: f64) -> f64 {
        match self {
            Unit::RadPerNs | Unit::GigaHertz | Unit::Nanosecond | Unit::Dimensionless => value,
            Unit::MicroElectronVolt => uev_to_rad_per_ns(value),
            Unit::MegaHertz => value * 1e-3,
            Unit::Microsecond => value * 1e3,
            Unit::Picosecond => value * 1e-3,
        }
    }

    pub fn from_canonical(self, value: f64) -> f64 {
        match self {
            Unit::RadPerNs | Unit::GigaHertz | Unit::Nanosecond | Unit::Dimensionless => value,
            Unit::MicroElectronVolt => rad_per_ns_to_uev(value),
            Unit::MegaHertz => value * 1e3,
            Unit::Microsecond => value * 1e-3,
            Unit::Picosecond => value * 1e3,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::RadPerNs => "rad/ns",
            Unit::MicroElectronVolt => "ueV",
            Unit::GigaHertz => "GHz",
            Unit::MegaHertz => "MHz",
            Unit::Nanosecond => "ns",
            Unit::Microsecond => "us",
            Unit::Picosecond => "ps",
            Unit::Dimensionless => "1",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "rad/ns" => Unit::RadPerNs,
            "ueV" | "μeV" | "µeV" => Unit::MicroElectronVolt,
            "GHz" => Unit::GigaHertz,
            "MHz" => Unit::MegaHertz,
            "ns" => Unit::Nanosecond,
            "us" | "μs" | "µs" => Unit::Microsecond,
            "ps" => Unit::Picosecond,
            "" | "1" | "dimensionless" => Unit::Dimensionless,
            other => return Err(Error::InvalidParameter(format!("unknown unit '{other}'"))),
        })
    }
}

/// A value with an explicit unit tag, e.g. `{"value": 40, "unit": "ueV"}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub fn rad_per_ns(value: f64) -> Self {
        Self::new(value, Unit::RadPerNs)
    }

    pub fn ns(value: f64) -> Self {
        Self::new(value, Unit::Nanosecond)
    }

    pub fn dimensionless(value: f64) -> Self {
        Self::new(value, Unit::Dimensionless)
    }

    /// Canonical value, checking that the unit has the expected dimension.
    pub fn canonical(&self, expected: Dimension) -> Result<f64> {
        if self.unit.dimension() != expected {
            return Err(Error::InvalidParameter(format!(
                "unit '{}' has dimension {:?}, expected {:?}",
                self.unit,
                self.unit.dimension(),
                expected
            )));
        }
        Ok(self.unit.to_canonical(self.value))
    }
}

impl FromStr for Quantity {
    type Err = Error;

    /// Parses `"40ueV"`, `"40 ueV"`, `"0.5us"` or a bare number.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+')
                    && !((c == 'e' || c == 'E')
                        && s[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+'))
            })
            .map(|(i, _)| i)
            .unwrap_or(s.len());
        let (num, unit) = s.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("cannot parse quantity '{s}'")))?;
        Ok(Quantity::new(value, unit.parse()?))
    }
}

/// A parameter-file field: either a bare number (canonical unit assumed) or a
/// tagged [`Quantity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuantityField {
    Bare(f64),
    Tagged(Quantity),
}

impl QuantityField {
    pub fn canonical(&self, expected: Dimension) -> Result<f64> {
        match self {
            QuantityField::Bare(v) => Ok(*v),
            QuantityField::Tagged(q) => q.canonical(expected),
        }
    }
}

/// Parses an angle given either as a decimal or as a rational multiple of π:
/// `"pi/8"`, `"3pi/8"`, `"3*pi/8"`, `"-pi"`, `"0.3927"`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::InvalidParameter(format!("cannot parse angle '{s}'"));
    let t: String = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
    let lower = t.to_ascii_lowercase();
    let Some(pos) = lower.find("pi").or_else(|| lower.find('π')) else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let tok_len = if lower[pos..].starts_with("pi") { 2 } else { 'π'.len_utf8() };
    let (before, after) = (&lower[..pos], &lower[pos + tok_len..]);
    let before = before.strip_suffix('*').unwrap_or(before);
    let coeff = match before {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let denom = match after {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    if denom == 0.0 {
        return Err(bad());
    }
    Ok(coeff * std::f64::consts::PI / denom)
}
