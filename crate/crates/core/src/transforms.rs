//! Pure dataframe → dataframe transformations: projection, grouping,
//! shifting, concatenation, sorting and string attribute merging.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::column::Column;
use crate::dataframe::Dataframe;
use crate::error::{Error, Result};
use crate::value::AttrValue;

type EvalFn = dyn Fn(i64, &RowView<'_>) -> bool + Send + Sync;

/// A row selection function over a declared set of attributes.
///
/// The evaluator receives the row's index entry and a [`RowView`] that only
/// exposes the declared attributes.
#[derive(Clone)]
pub struct RowPredicate {
    attrs: Vec<String>,
    eval: Arc<EvalFn>,
}

impl RowPredicate {
    pub fn new<I, S, F>(attrs: I, eval: F) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        F: Fn(i64, &RowView<'_>) -> bool + Send + Sync + 'static,
    {
        RowPredicate {
            attrs: attrs.into_iter().map(Into::into).collect(),
            eval: Arc::new(eval),
        }
    }

    /// Keeps rows whose value of `attr` is in `allowed`.
    pub fn member_of(attr: &str, allowed: HashSet<AttrValue>) -> Self {
        let name = attr.to_string();
        RowPredicate::new([attr], move |_, row| {
            row.get(&name).is_some_and(|v| allowed.contains(&v))
        })
    }

    pub fn always(result: bool) -> Self {
        RowPredicate::new(Vec::<String>::new(), move |_, _| result)
    }

    pub fn negate(&self) -> Self {
        let inner = Arc::clone(&self.eval);
        RowPredicate {
            attrs: self.attrs.clone(),
            eval: Arc::new(move |i, row| !inner(i, row)),
        }
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }
}

impl fmt::Debug for RowPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RowPredicate").field("attrs", &self.attrs).finish_non_exhaustive()
    }
}

/// Read access to one row, restricted to a predicate's declared attributes.
pub struct RowView<'a> {
    attrs: &'a [String],
    columns: Vec<&'a Column>,
    pos: usize,
}

impl RowView<'_> {
    /// Value of a declared attribute at this row; `None` for undeclared names.
    pub fn get(&self, attr: &str) -> Option<AttrValue> {
        self.attrs
            .iter()
            .position(|a| a == attr)
            .map(|k| self.columns[k].get(self.pos))
    }

    pub fn attrs(&self) -> &[String] {
        self.attrs
    }
}

/// Keeps the rows for which `pred` holds; order and index entries are preserved.
pub fn proj(df: &Dataframe, pred: &RowPredicate) -> Result<Dataframe> {
    let columns = pred
        .attrs
        .iter()
        .map(|a| df.column(a))
        .collect::<Result<Vec<_>>>()?;
    let mut view = RowView {
        attrs: &pred.attrs,
        columns,
        pos: 0,
    };
    let mut keep = Vec::new();
    for (pos, &i) in df.index().iter().enumerate() {
        view.pos = pos;
        if (pred.eval)(i, &view) {
            keep.push(pos);
        }
    }
    Ok(select_positions(df, &keep))
}

/// Projection on set membership of one attribute's value.
pub fn eq_proj(df: &Dataframe, attr: &str, allowed: &HashSet<AttrValue>) -> Result<Dataframe> {
    let keep = df.column(attr)?.positions_in(allowed);
    Ok(select_positions(df, &keep))
}

fn select_positions(df: &Dataframe, keep: &[usize]) -> Dataframe {
    if keep.len() == df.row_count() {
        // positions are ascending, so keeping all of them is the identity
        df.clone()
    } else {
        df.take_rows(keep)
    }
}

/// Row positions of each distinct value of `attr`, groups in first-occurrence order.
pub fn group_positions(df: &Dataframe, attr: &str) -> Result<Vec<Vec<usize>>> {
    let col = df.column(attr)?;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    match col {
        Column::Str(v) => {
            let mut slot: HashMap<Option<&str>, usize> = HashMap::new();
            for (pos, x) in v.iter().enumerate() {
                let g = *slot.entry(x.as_deref()).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[g].push(pos);
            }
        }
        _ => {
            let mut slot: HashMap<AttrValue, usize> = HashMap::new();
            for (pos, x) in col.iter().enumerate() {
                let g = *slot.entry(x).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[g].push(pos);
            }
        }
    }
    Ok(groups)
}

/// One frame per distinct value of `attr`, each equal to `eq_proj(df, attr, {v})`.
pub fn group(df: &Dataframe, attr: &str) -> Result<Vec<Dataframe>> {
    Ok(group_positions(df, attr)?
        .iter()
        .map(|positions| select_positions(df, positions))
        .collect())
}

/// Decrements every index entry by one; values and row order are unchanged.
///
/// # Panics
///
/// If an index entry equals `i64::MIN`.
pub fn shift(df: &Dataframe) -> Dataframe {
    let index = df
        .index()
        .iter()
        .map(|i| i.checked_sub(1).expect("index entry underflow in shift"))
        .collect();
    df.with_index(index)
}

/// Joins two frames on equal index entries, appending `suffix` to the names
/// of the right frame's columns.
///
/// Only index entries present in both frames are kept, in the left frame's
/// positional order. Case and activity designations come from the left frame.
pub fn concat(left: &Dataframe, right: &Dataframe, suffix: &str) -> Result<Dataframe> {
    if suffix.is_empty() {
        return Err(Error::EmptySuffix);
    }
    let renamed: Vec<String> = right.column_names().map(|n| format!("{n}{suffix}")).collect();
    if let Some(clash) = renamed.iter().find(|n| left.has_column(n)) {
        return Err(Error::NameCollision(clash.clone()));
    }

    let (lpos, rpos) = matching_positions(left.index(), right.index());
    let index = lpos.iter().map(|&p| left.index()[p]).collect();
    let gather = |col: &Arc<Column>, pos: &[usize], total: usize| {
        if is_identity(pos, total) {
            Arc::clone(col)
        } else {
            Arc::new(col.take(pos))
        }
    };
    let mut columns: IndexMap<String, Arc<Column>> =
        IndexMap::with_capacity(left.column_count() + right.column_count());
    for (name, col) in left.column_map() {
        columns.insert(name.clone(), gather(col, &lpos, left.row_count()));
    }
    for (name, col) in renamed.into_iter().zip(right.column_map().values()) {
        columns.insert(name, gather(col, &rpos, right.row_count()));
    }
    Ok(Dataframe::from_parts(
        index,
        columns,
        left.case_column().to_string(),
        left.activity_column().to_string(),
    ))
}

fn is_identity(pos: &[usize], total: usize) -> bool {
    pos.len() == total && pos.iter().enumerate().all(|(k, &p)| k == p)
}

fn strictly_increasing(index: &[i64]) -> bool {
    index.windows(2).all(|w| w[0] < w[1])
}

/// Positions `(l, r)` with `left[l] == right[r]`, in left positional order.
fn matching_positions(left: &[i64], right: &[i64]) -> (Vec<usize>, Vec<usize>) {
    let mut lpos = Vec::with_capacity(left.len().min(right.len()));
    let mut rpos = Vec::with_capacity(left.len().min(right.len()));
    if strictly_increasing(left) && strictly_increasing(right) {
        let (mut a, mut b) = (0, 0);
        while a < left.len() && b < right.len() {
            match left[a].cmp(&right[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    lpos.push(a);
                    rpos.push(b);
                    a += 1;
                    b += 1;
                }
            }
        }
    } else {
        let lookup: HashMap<i64, usize> = right.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        for (p, i) in left.iter().enumerate() {
            if let Some(&q) = lookup.get(i) {
                lpos.push(p);
                rpos.push(q);
            }
        }
    }
    (lpos, rpos)
}

/// Stable sort of the rows by the values of `attr`; index entries travel
/// with their rows. Missing values sort last.
pub fn sort(df: &Dataframe, attr: &str) -> Result<Dataframe> {
    let col = df.column(attr)?;
    let mut perm: Vec<usize> = (0..df.row_count()).collect();
    perm.sort_by(|&a, &b| col.cmp_positions(a, b));
    if is_identity(&perm, df.row_count()) {
        return Ok(df.clone());
    }
    Ok(df.take_rows(&perm))
}

/// Adds a string column `new_attr` whose value is
/// `render(a1) + sep + render(a2)` at every row.
pub fn mergstrv(df: &Dataframe, new_attr: &str, a1: &str, a2: &str, sep: &str) -> Result<Dataframe> {
    let first = df.column(a1)?;
    let second = df.column(a2)?;
    if df.has_column(new_attr) {
        return Err(Error::NameCollision(new_attr.to_string()));
    }
    let merged: Vec<Option<Arc<str>>> = match (first, second) {
        (Column::Str(x), Column::Str(y)) => x
            .iter()
            .zip(y)
            .map(|(p, q)| {
                let p = p.as_deref().unwrap_or(crate::value::MISSING_RENDER);
                let q = q.as_deref().unwrap_or(crate::value::MISSING_RENDER);
                let mut s = String::with_capacity(p.len() + sep.len() + q.len());
                s.push_str(p);
                s.push_str(sep);
                s.push_str(q);
                Some(Arc::from(s))
            })
            .collect(),
        _ => first
            .iter()
            .zip(second.iter())
            .map(|(p, q)| Some(Arc::from(format!("{}{sep}{}", p.render(), q.render()))))
            .collect(),
    };
    Ok(df.with_column(new_attr.to_string(), Column::Str(merged)))
}
