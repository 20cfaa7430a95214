//! Scalar attribute values and column types.
//!
//! Values form a total order so that sorting is always decidable:
//! numerics (`Int` and `Float`, compared by value) come first, then
//! `Timestamp`, then `Str`, and `Missing` sorts after everything else.
//! Numerically equal `Int` and `Float` values are ordered `Int` first.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use ordered_float::NotNan;

use crate::error::{Error, Result};

/// Declared type of a dataframe column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColumnType {
    Str,
    Int,
    Float,
    Timestamp,
    /// Mixed tags allowed.
    Object,
}

impl ColumnType {
    pub const ALL: [ColumnType; 5] = [
        ColumnType::Str,
        ColumnType::Int,
        ColumnType::Float,
        ColumnType::Timestamp,
        ColumnType::Object,
    ];

    /// One-byte code used by the EDF1 format.
    pub fn code(self) -> u8 {
        match self {
            ColumnType::Str => 0,
            ColumnType::Int => 1,
            ColumnType::Float => 2,
            ColumnType::Timestamp => 3,
            ColumnType::Object => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnType::Str => "str",
            ColumnType::Int => "int",
            ColumnType::Float => "float",
            ColumnType::Timestamp => "timestamp",
            ColumnType::Object => "object",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    /// Whether a non-missing value of `value` may be stored in a column of this type.
    pub fn admits(self, value: &AttrValue) -> bool {
        match (self, value) {
            (_, AttrValue::Missing) | (ColumnType::Object, _) => true,
            (t, v) => v.tag() == Some(t),
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single attribute value, or the missing marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrValue {
    Int(i64),
    Float(NotNan<f64>),
    /// Milliseconds since the Unix epoch, UTC.
    Timestamp(i64),
    Str(Arc<str>),
    Missing,
}

impl AttrValue {
    pub fn str(s: impl AsRef<str>) -> Self {
        AttrValue::Str(Arc::from(s.as_ref()))
    }

    /// Rejects NaN.
    pub fn float(f: f64) -> Result<Self> {
        NotNan::new(f)
            .map(AttrValue::Float)
            .map_err(|_| Error::TypeViolation {
                attr: String::new(),
                detail: "NaN is not a valid float value".into(),
            })
    }

    /// Rejects instants outside the representable calendar range.
    pub fn timestamp(ms: i64) -> Result<Self> {
        if timestamp_in_range(ms) {
            Ok(AttrValue::Timestamp(ms))
        } else {
            Err(Error::TypeViolation {
                attr: String::new(),
                detail: format!("timestamp {ms} ms is not a representable instant"),
            })
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, AttrValue::Missing)
    }

    /// The concrete type of this value; `None` for `Missing`.
    pub fn tag(&self) -> Option<ColumnType> {
        match self {
            AttrValue::Int(_) => Some(ColumnType::Int),
            AttrValue::Float(_) => Some(ColumnType::Float),
            AttrValue::Timestamp(_) => Some(ColumnType::Timestamp),
            AttrValue::Str(_) => Some(ColumnType::Str),
            AttrValue::Missing => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttrValue::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Canonical text rendering.
    ///
    /// `Str` verbatim, `Int` in decimal, `Float` as the shortest decimal
    /// that round-trips (always with a fractional part or exponent),
    /// `Timestamp` as ISO-8601 UTC with millisecond precision, and
    /// `Missing` as `ε`.
    pub fn render(&self) -> String {
        match self {
            AttrValue::Str(s) => s.to_string(),
            AttrValue::Int(i) => i.to_string(),
            AttrValue::Float(f) => format!("{:?}", f.into_inner()),
            AttrValue::Timestamp(ms) => format_timestamp(*ms),
            AttrValue::Missing => MISSING_RENDER.to_string(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            AttrValue::Int(_) | AttrValue::Float(_) => 0,
            AttrValue::Timestamp(_) => 1,
            AttrValue::Str(_) => 2,
            AttrValue::Missing => 3,
        }
    }
}

pub const MISSING_RENDER: &str = "ε";

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Str(s) => f.write_str(s),
            other => f.write_str(&other.render()),
        }
    }
}

impl Ord for AttrValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use AttrValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Float(a), Float(b)) => a.cmp(b),
            (Int(a), Float(b)) => cmp_int_float(*a, b.into_inner()).then(Ordering::Less),
            (Float(a), Int(b)) => cmp_int_float(*b, a.into_inner())
                .reverse()
                .then(Ordering::Greater),
            (Timestamp(a), Timestamp(b)) => a.cmp(b),
            (Str(a), Str(b)) => a.as_bytes().cmp(b.as_bytes()),
            (Missing, Missing) => Ordering::Equal,
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }
}

impl PartialOrd for AttrValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::str(s)
    }
}

impl From<String> for AttrValue {
    fn from(s: String) -> Self {
        AttrValue::Str(Arc::from(s))
    }
}

impl From<i64> for AttrValue {
    fn from(i: i64) -> Self {
        AttrValue::Int(i)
    }
}

/// Exact comparison of an integer against a non-NaN float.
pub(crate) fn cmp_int_float(i: i64, f: f64) -> Ordering {
    const TWO_63: f64 = 9_223_372_036_854_775_808.0;
    if f >= TWO_63 {
        return Ordering::Less;
    }
    if f < -TWO_63 {
        return Ordering::Greater;
    }
    let whole = f.trunc();
    // |whole| < 2^63 so the cast is exact
    match i.cmp(&(whole as i64)) {
        Ordering::Equal => {
            let frac = f - whole;
            if frac > 0.0 {
                Ordering::Less
            } else if frac < 0.0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        }
        ord => ord,
    }
}

pub(crate) fn timestamp_in_range(ms: i64) -> bool {
    DateTime::<Utc>::from_timestamp_millis(ms).is_some()
}

pub fn format_timestamp(ms: i64) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ms) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => ms.to_string(),
    }
}

/// Parses ISO-8601 text with a zone designator, or a decimal integer of epoch milliseconds.
pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(ms) = text.parse::<i64>() {
        return timestamp_in_range(ms).then_some(ms);
    }
    DateTime::parse_from_rfc3339(text)
        .ok()
        .map(|dt| dt.timestamp_millis())
}
