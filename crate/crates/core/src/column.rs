//! Typed, dense column storage with explicit missing slots.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use ordered_float::NotNan;

use crate::error::{Error, Result};
use crate::value::{timestamp_in_range, AttrValue, ColumnType};

/// Values of one attribute for every row, in positional order. `None` (or
/// `AttrValue::Missing` in object columns) is the missing marker.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Str(Vec<Option<Arc<str>>>),
    Int(Vec<Option<i64>>),
    Float(Vec<Option<NotNan<f64>>>),
    Timestamp(Vec<Option<i64>>),
    Object(Vec<AttrValue>),
}

macro_rules! each_variant {
    ($col:expr, $v:ident => $body:expr) => {
        match $col {
            Column::Str($v) => $body,
            Column::Int($v) => $body,
            Column::Float($v) => $body,
            Column::Timestamp($v) => $body,
            Column::Object($v) => $body,
        }
    };
}

macro_rules! map_variant {
    ($col:expr, $v:ident => $body:expr) => {
        match $col {
            Column::Str($v) => Column::Str($body),
            Column::Int($v) => Column::Int($body),
            Column::Float($v) => Column::Float($body),
            Column::Timestamp($v) => Column::Timestamp($body),
            Column::Object($v) => Column::Object($body),
        }
    };
}

impl Column {
    /// Builds a column of the declared type, checking every non-missing value's tag.
    pub fn from_values(kind: ColumnType, values: Vec<AttrValue>, name: &str) -> Result<Self> {
        let violation = |v: &AttrValue| Error::TypeViolation {
            attr: name.to_string(),
            detail: format!("{:?} value in a {kind} column", v.tag().unwrap()),
        };
        let col = match kind {
            ColumnType::Object => {
                for v in &values {
                    if let AttrValue::Timestamp(ms) = v {
                        check_timestamp(*ms, name)?;
                    }
                }
                Column::Object(values)
            }
            ColumnType::Str => Column::Str(
                values
                    .into_iter()
                    .map(|v| match v {
                        AttrValue::Missing => Ok(None),
                        AttrValue::Str(s) => Ok(Some(s)),
                        other => Err(violation(&other)),
                    })
                    .collect::<Result<_>>()?,
            ),
            ColumnType::Int => Column::Int(
                values
                    .into_iter()
                    .map(|v| match v {
                        AttrValue::Missing => Ok(None),
                        AttrValue::Int(i) => Ok(Some(i)),
                        other => Err(violation(&other)),
                    })
                    .collect::<Result<_>>()?,
            ),
            ColumnType::Float => Column::Float(
                values
                    .into_iter()
                    .map(|v| match v {
                        AttrValue::Missing => Ok(None),
                        AttrValue::Float(f) => Ok(Some(f)),
                        other => Err(violation(&other)),
                    })
                    .collect::<Result<_>>()?,
            ),
            ColumnType::Timestamp => Column::Timestamp(
                values
                    .into_iter()
                    .map(|v| match v {
                        AttrValue::Missing => Ok(None),
                        AttrValue::Timestamp(ms) => check_timestamp(ms, name).map(Some),
                        other => Err(violation(&other)),
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(col)
    }

    /// Object column holding `values`, narrowed to a concrete type when every
    /// non-missing value shares one tag.
    pub fn refined(values: Vec<AttrValue>, name: &str) -> Result<Self> {
        let mut tags = values.iter().filter_map(AttrValue::tag);
        let kind = match tags.next() {
            None => ColumnType::Object,
            Some(first) if tags.all(|t| t == first) => first,
            Some(_) => ColumnType::Object,
        };
        Column::from_values(kind, values, name)
    }

    pub fn kind(&self) -> ColumnType {
        match self {
            Column::Str(_) => ColumnType::Str,
            Column::Int(_) => ColumnType::Int,
            Column::Float(_) => ColumnType::Float,
            Column::Timestamp(_) => ColumnType::Timestamp,
            Column::Object(_) => ColumnType::Object,
        }
    }

    pub fn len(&self) -> usize {
        each_variant!(self, v => v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, pos: usize) -> AttrValue {
        match self {
            Column::Str(v) => v[pos].clone().map_or(AttrValue::Missing, AttrValue::Str),
            Column::Int(v) => v[pos].map_or(AttrValue::Missing, AttrValue::Int),
            Column::Float(v) => v[pos].map_or(AttrValue::Missing, AttrValue::Float),
            Column::Timestamp(v) => v[pos].map_or(AttrValue::Missing, AttrValue::Timestamp),
            Column::Object(v) => v[pos].clone(),
        }
    }

    pub fn is_missing_at(&self, pos: usize) -> bool {
        match self {
            Column::Object(v) => v[pos].is_missing(),
            Column::Str(v) => v[pos].is_none(),
            Column::Int(v) | Column::Timestamp(v) => v[pos].is_none(),
            Column::Float(v) => v[pos].is_none(),
        }
    }

    /// Position of the first missing slot, if any.
    pub fn first_missing(&self) -> Option<usize> {
        match self {
            Column::Object(v) => v.iter().position(AttrValue::is_missing),
            Column::Str(v) => v.iter().position(Option::is_none),
            Column::Int(v) | Column::Timestamp(v) => v.iter().position(Option::is_none),
            Column::Float(v) => v.iter().position(Option::is_none),
        }
    }

    pub fn present_count(&self) -> usize {
        (0..self.len()).filter(|&p| !self.is_missing_at(p)).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = AttrValue> + '_ {
        (0..self.len()).map(move |p| self.get(p))
    }

    /// Gathers the slots at `positions`, in that order.
    #[allow(clippy::clone_on_copy)]
    pub fn take(&self, positions: &[usize]) -> Column {
        map_variant!(self, v => positions.iter().map(|&p| v[p].clone()).collect())
    }

    /// Repeats the whole column `times` times.
    pub fn tiled(&self, times: usize) -> Column {
        map_variant!(self, v => {
            let mut out = Vec::with_capacity(v.len() * times);
            for _ in 0..times {
                out.extend_from_slice(v);
            }
            out
        })
    }

    /// Compares the values at two positions under the value total order.
    pub fn cmp_positions(&self, a: usize, b: usize) -> Ordering {
        fn missing_last<T: Ord>(x: &Option<T>, y: &Option<T>) -> Ordering {
            match (x, y) {
                (Some(x), Some(y)) => x.cmp(y),
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Greater,
                (Some(_), None) => Ordering::Less,
            }
        }
        match self {
            Column::Str(v) => missing_last(&v[a], &v[b]),
            Column::Int(v) | Column::Timestamp(v) => missing_last(&v[a], &v[b]),
            Column::Float(v) => missing_last(&v[a], &v[b]),
            Column::Object(v) => v[a].cmp(&v[b]),
        }
    }

    /// Positions whose value belongs to `allowed`, in ascending order.
    pub fn positions_in(&self, allowed: &HashSet<AttrValue>) -> Vec<usize> {
        let want_missing = allowed.contains(&AttrValue::Missing);
        match self {
            Column::Str(v) => {
                let keys: HashSet<&str> = allowed.iter().filter_map(AttrValue::as_str).collect();
                collect_positions(v, |x| match x {
                    Some(s) => keys.contains(s.as_ref()),
                    None => want_missing,
                })
            }
            Column::Int(v) => {
                let keys: HashSet<i64> = allowed
                    .iter()
                    .filter_map(|a| match a {
                        AttrValue::Int(i) => Some(*i),
                        _ => None,
                    })
                    .collect();
                collect_positions(v, |x| x.map_or(want_missing, |i| keys.contains(&i)))
            }
            Column::Timestamp(v) => {
                let keys: HashSet<i64> = allowed
                    .iter()
                    .filter_map(|a| match a {
                        AttrValue::Timestamp(i) => Some(*i),
                        _ => None,
                    })
                    .collect();
                collect_positions(v, |x| x.map_or(want_missing, |i| keys.contains(&i)))
            }
            Column::Float(v) => {
                let keys: HashSet<NotNan<f64>> = allowed
                    .iter()
                    .filter_map(|a| match a {
                        AttrValue::Float(f) => Some(*f),
                        _ => None,
                    })
                    .collect();
                collect_positions(v, |x| x.map_or(want_missing, |f| keys.contains(&f)))
            }
            Column::Object(v) => collect_positions(v, |x| allowed.contains(x)),
        }
    }

    /// Deterministic size estimate in bytes; see [`crate::Dataframe::memory_footprint`].
    pub fn footprint(&self) -> usize {
        match self {
            Column::Str(v) => {
                v.len() * STR_SLOT_BYTES
                    + v.iter().flatten().map(|s| s.len()).sum::<usize>()
            }
            Column::Int(v) | Column::Timestamp(v) => v.len() * FIXED_SLOT_BYTES,
            Column::Float(v) => v.len() * FIXED_SLOT_BYTES,
            Column::Object(v) => {
                v.len() * OBJECT_SLOT_BYTES
                    + v.iter().filter_map(AttrValue::as_str).map(str::len).sum::<usize>()
            }
        }
    }
}

pub(crate) const FIXED_SLOT_BYTES: usize = 9;
pub(crate) const STR_SLOT_BYTES: usize = 17;
pub(crate) const OBJECT_SLOT_BYTES: usize = 25;

fn collect_positions<T>(values: &[T], mut keep: impl FnMut(&T) -> bool) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter_map(|(p, x)| keep(x).then_some(p))
        .collect()
}

fn check_timestamp(ms: i64, name: &str) -> Result<i64> {
    if timestamp_in_range(ms) {
        Ok(ms)
    } else {
        Err(Error::TypeViolation {
            attr: name.to_string(),
            detail: format!("timestamp {ms} ms is not a representable instant"),
        })
    }
}
