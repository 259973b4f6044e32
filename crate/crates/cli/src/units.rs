//! Quantities written either as plain SI numbers or as `"<value> <unit>"`.

use std::f64::consts::PI;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Angle,
    Nonlinear,
}

impl Dimension {
    fn unit_scale(self, unit: &str) -> Option<f64> {
        let s = match (self, unit) {
            (Dimension::Length, "m") => 1.0,
            (Dimension::Length, "mm") => 1e-3,
            (Dimension::Length, "um" | "µm" | "μm") => 1e-6,
            (Dimension::Length, "nm") => 1e-9,
            (Dimension::Time, "s") => 1.0,
            (Dimension::Time, "ps") => 1e-12,
            (Dimension::Time, "fs") => 1e-15,
            (Dimension::Angle, "rad") => 1.0,
            (Dimension::Angle, "deg") => PI / 180.0,
            (Dimension::Nonlinear, "m/V") => 1.0,
            (Dimension::Nonlinear, "pm/V") => 1e-12,
            _ => return None,
        };
        Some(s)
    }

    fn units(self) -> &'static str {
        match self {
            Dimension::Length => "m, mm, um, nm",
            Dimension::Time => "s, ps, fs",
            Dimension::Angle => "rad, deg",
            Dimension::Nonlinear => "m/V, pm/V",
        }
    }
}

/// A raw quantity as it appears in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Si(f64),
    Text(String),
}

impl Quantity {
    /// Value in SI units.
    pub fn si(&self, dim: Dimension) -> Result<f64, String> {
        match self {
            Quantity::Si(v) => Ok(*v),
            Quantity::Text(s) => parse(s, dim),
        }
    }
}

pub fn parse(text: &str, dim: Dimension) -> Result<f64, String> {
    let t = text.trim();
    let split = t
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("'{text}' does not start with a number"))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(value);
    }
    dim.unit_scale(unit)
        .map(|s| value * s)
        .ok_or_else(|| format!("unit '{unit}' in '{text}' is not one of {}", dim.units()))
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantity::Si(v) => s.serialize_f64(*v),
            Quantity::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Quantity;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number in SI units or a string such as \"400 nm\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Quantity, E> {
                Ok(Quantity::Si(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantity, E> {
                Ok(Quantity::Si(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantity, E> {
                Ok(Quantity::Si(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Quantity, E> {
                Ok(Quantity::Text(v.to_owned()))
            }
        }
        d.deserialize_any(V)
    }
}
