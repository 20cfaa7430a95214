//! The indexed columnar dataframe.
//!
//! A [`Dataframe`] holds a signed 64-bit index (one distinct entry per row),
//! an insertion-ordered set of named, typed columns, and the designation of
//! the case and activity columns. Every column has exactly one slot per row.
//! Frames are immutable: transformations return new frames, sharing
//! unchanged columns through `Arc`.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use indexmap::IndexMap;

use crate::column::Column;
use crate::error::{Error, Result};
use crate::value::{AttrValue, ColumnType};

/// Fixed per-frame overhead counted by [`Dataframe::memory_footprint`].
pub const FRAME_HEADER_BYTES: usize = 64;
/// Fixed per-column overhead, excluding the name bytes.
pub const COLUMN_HEADER_BYTES: usize = 48;

#[derive(Debug, Clone)]
pub struct Dataframe {
    index: Vec<i64>,
    columns: IndexMap<String, Arc<Column>>,
    case_column: String,
    activity_column: String,
}

impl Dataframe {
    /// Validating constructor from untyped values.
    pub fn build<S: Into<String>>(
        index: Vec<i64>,
        columns: Vec<(S, ColumnType, Vec<AttrValue>)>,
        case_column: &str,
        activity_column: &str,
    ) -> Result<Self> {
        let typed = columns
            .into_iter()
            .map(|(name, kind, values)| {
                let name = name.into();
                let col = Column::from_values(kind, values, &name)?;
                Ok((name, col))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(index, typed, case_column, activity_column)
    }

    /// Validating constructor from already-typed columns.
    pub fn from_columns(
        index: Vec<i64>,
        columns: Vec<(String, Column)>,
        case_column: &str,
        activity_column: &str,
    ) -> Result<Self> {
        let rows = index.len();
        let mut map = IndexMap::with_capacity(columns.len());
        for (name, col) in columns {
            if col.len() != rows {
                return Err(Error::LengthMismatch {
                    column: name,
                    expected: rows,
                    actual: col.len(),
                });
            }
            if map.contains_key(&name) {
                return Err(Error::NameCollision(name));
            }
            map.insert(name, Arc::new(col));
        }
        if !index.windows(2).all(|w| w[0] < w[1]) {
            let mut seen = HashSet::with_capacity(rows);
            for &i in &index {
                if !seen.insert(i) {
                    return Err(Error::DuplicateIndex(i));
                }
            }
        }
        for mandatory in [case_column, activity_column] {
            let col = map.get(mandatory).ok_or_else(|| Error::MissingMandatory {
                attr: mandatory.to_string(),
                row: None,
            })?;
            if let Some(row) = col.first_missing() {
                return Err(Error::MissingMandatory {
                    attr: mandatory.to_string(),
                    row: Some(row),
                });
            }
        }
        Ok(Dataframe {
            index,
            columns: map,
            case_column: case_column.to_string(),
            activity_column: activity_column.to_string(),
        })
    }

    /// Assembles a frame from parts already known to satisfy every invariant.
    pub(crate) fn from_parts(
        index: Vec<i64>,
        columns: IndexMap<String, Arc<Column>>,
        case_column: String,
        activity_column: String,
    ) -> Self {
        debug_assert!(columns.values().all(|c| c.len() == index.len()));
        debug_assert!(columns.contains_key(&case_column) && columns.contains_key(&activity_column));
        Dataframe {
            index,
            columns,
            case_column,
            activity_column,
        }
    }

    /// Keeps the rows at `positions` (in that order) across every column.
    pub(crate) fn take_rows(&self, positions: &[usize]) -> Self {
        let index = positions.iter().map(|&p| self.index[p]).collect();
        let columns = self
            .columns
            .iter()
            .map(|(n, c)| (n.clone(), Arc::new(c.take(positions))))
            .collect();
        Self::from_parts(index, columns, self.case_column.clone(), self.activity_column.clone())
    }

    pub(crate) fn with_index(&self, index: Vec<i64>) -> Self {
        debug_assert_eq!(index.len(), self.index.len());
        Dataframe {
            index,
            ..self.clone()
        }
    }

    pub(crate) fn with_column(&self, name: String, column: Column) -> Self {
        let mut out = self.clone();
        out.columns.insert(name, Arc::new(column));
        out
    }

    pub(crate) fn column_map(&self) -> &IndexMap<String, Arc<Column>> {
        &self.columns
    }

    /// Same rows and values, index renumbered `0..row_count` in positional order.
    pub fn reset_index(&self) -> Self {
        self.with_index((0..self.row_count() as i64).collect())
    }

    /// Keeps only the named columns, in their existing order. The case and
    /// activity columns are always retained.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        for n in names {
            self.column(n)?;
        }
        let columns = self
            .columns
            .iter()
            .filter(|(n, _)| {
                names.contains(&n.as_str()) || **n == self.case_column || **n == self.activity_column
            })
            .map(|(n, c)| (n.clone(), Arc::clone(c)))
            .collect();
        Ok(Self::from_parts(
            self.index.clone(),
            columns,
            self.case_column.clone(),
            self.activity_column.clone(),
        ))
    }

    pub fn row_count(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &[i64] {
        &self.index
    }

    pub fn case_column(&self) -> &str {
        &self.case_column
    }

    pub fn activity_column(&self) -> &str {
        &self.activity_column
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.columns.iter().map(|(n, c)| (n.as_str(), c.as_ref()))
    }

    pub fn has_column(&self, attr: &str) -> bool {
        self.columns.contains_key(attr)
    }

    pub fn column(&self, attr: &str) -> Result<&Column> {
        self.columns
            .get(attr)
            .map(Arc::as_ref)
            .ok_or_else(|| Error::UnknownAttribute(attr.to_string()))
    }

    pub fn column_type(&self, attr: &str) -> Result<ColumnType> {
        self.column(attr).map(Column::kind)
    }

    /// Value of `attr` at a row position; constant time.
    pub fn value_at(&self, row: usize, attr: &str) -> Result<AttrValue> {
        let col = self.column(attr)?;
        if row >= self.row_count() {
            return Err(Error::RowOutOfRange {
                row,
                row_count: self.row_count(),
            });
        }
        Ok(col.get(row))
    }

    /// All `(index entry, value)` pairs of a column in positional order.
    pub fn column_values(&self, attr: &str) -> Result<Vec<(i64, AttrValue)>> {
        let col = self.column(attr)?;
        Ok(self.index.iter().copied().zip(col.iter()).collect())
    }

    /// The set of values taken by `attr`, including `Missing` if present.
    pub fn distinct_values(&self, attr: &str) -> Result<BTreeSet<AttrValue>> {
        let col = self.column(attr)?;
        let out = match col {
            Column::Str(v) => {
                let uniq: HashSet<Option<&str>> = v.iter().map(Option::as_deref).collect();
                uniq.into_iter()
                    .map(|s| s.map_or(AttrValue::Missing, AttrValue::str))
                    .collect()
            }
            _ => {
                let uniq: HashSet<AttrValue> = col.iter().collect();
                uniq.into_iter().collect()
            }
        };
        Ok(out)
    }

    /// Deterministic size estimate in bytes:
    ///
    /// ```text
    /// 64 + 8 * rows
    ///    + Σ_columns (48 + name bytes + slots)
    /// slots: int/float/timestamp  9 * rows
    ///        str                 17 * rows + UTF-8 bytes of present strings
    ///        object              25 * rows + UTF-8 bytes of string payloads
    /// ```
    pub fn memory_footprint(&self) -> usize {
        FRAME_HEADER_BYTES
            + 8 * self.row_count()
            + self
                .columns
                .iter()
                .map(|(n, c)| COLUMN_HEADER_BYTES + n.len() + c.footprint())
                .sum::<usize>()
    }
}

impl PartialEq for Dataframe {
    /// Same index, same columns in the same order, same designations.
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
            && self.case_column == other.case_column
            && self.activity_column == other.activity_column
            && self.columns.len() == other.columns.len()
            && self
                .columns
                .iter()
                .zip(other.columns.iter())
                .all(|((n1, c1), (n2, c2))| n1 == n2 && c1 == c2)
    }
}
