//! Classical event logs and their bridge to dataframes.
//!
//! An [`EventLog`] is a totally ordered sequence of events (the order of the
//! `events` vector), a mapping from case identifiers to non-empty sets of
//! event positions, and the set of activities. Each [`Event`] has an
//! activity and a partial attribute map: an absent key is the missing value.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{Read, Write};
use std::sync::Arc;

use indexmap::IndexMap;

use crate::column::Column;
use crate::dataframe::Dataframe;
use crate::error::{Error, Result};
use crate::transforms::group_positions;
use crate::value::{parse_timestamp, AttrValue, ColumnType};

pub const DEFAULT_CASE_KEY: &str = "case:concept:name";
pub const DEFAULT_ACTIVITY_KEY: &str = "concept:name";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    activity: String,
    attributes: BTreeMap<String, AttrValue>,
}

impl Event {
    pub fn new(activity: impl Into<String>) -> Self {
        Event {
            activity: activity.into(),
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: AttrValue) -> Self {
        self.set_attr(name, value);
        self
    }

    /// Setting `Missing` removes the attribute.
    pub fn set_attr(&mut self, name: impl Into<String>, value: AttrValue) {
        let name = name.into();
        if value.is_missing() {
            self.attributes.remove(&name);
        } else {
            self.attributes.insert(name, value);
        }
    }

    pub fn activity(&self) -> &str {
        &self.activity
    }

    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        self.attributes.get(name)
    }

    pub fn attributes(&self) -> &BTreeMap<String, AttrValue> {
        &self.attributes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
    cases: IndexMap<String, BTreeSet<usize>>,
    activities: BTreeSet<String>,
    case_key: String,
    activity_key: String,
}

impl EventLog {
    /// Validates that every case is non-empty and refers to existing events.
    pub fn new(events: Vec<Event>, cases: IndexMap<String, BTreeSet<usize>>) -> Result<Self> {
        for (id, members) in &cases {
            if members.is_empty() {
                return Err(Error::InvalidLog(format!("case `{id}` has no events")));
            }
            if let Some(&bad) = members.iter().find(|&&e| e >= events.len()) {
                return Err(Error::InvalidLog(format!(
                    "case `{id}` references event {bad} of {}",
                    events.len()
                )));
            }
        }
        let activities = events.iter().map(|e| e.activity.clone()).collect();
        Ok(EventLog {
            events,
            cases,
            activities,
            case_key: DEFAULT_CASE_KEY.to_string(),
            activity_key: DEFAULT_ACTIVITY_KEY.to_string(),
        })
    }

    /// Log whose events are the traces' events laid out one trace after another.
    /// Traces with the same identifier are merged; empty traces are dropped.
    pub fn from_traces<I, S>(traces: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<Event>)>,
        S: Into<String>,
    {
        let mut events = Vec::new();
        let mut cases: IndexMap<String, BTreeSet<usize>> = IndexMap::new();
        for (id, trace) in traces {
            if trace.is_empty() {
                continue;
            }
            let members = cases.entry(id.into()).or_default();
            for ev in trace {
                members.insert(events.len());
                events.push(ev);
            }
        }
        EventLog::new(events, cases).expect("traces always form a valid log")
    }

    /// Attribute names used for the case and activity columns on conversion.
    pub fn with_keys(mut self, case_key: &str, activity_key: &str) -> Self {
        self.case_key = case_key.to_string();
        self.activity_key = activity_key.to_string();
        self
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn cases(&self) -> &IndexMap<String, BTreeSet<usize>> {
        &self.cases
    }

    pub fn activities(&self) -> &BTreeSet<String> {
        &self.activities
    }

    pub fn case_key(&self) -> &str {
        &self.case_key
    }

    pub fn activity_key(&self) -> &str {
        &self.activity_key
    }

    /// Each case's events in log order.
    pub fn traces(&self) -> impl Iterator<Item = (&str, Vec<&Event>)> + '_ {
        self.cases
            .iter()
            .map(|(id, members)| (id.as_str(), members.iter().map(|&e| &self.events[e]).collect()))
    }
}

/// Log characterization: events, cases, variants and activity classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LogStats {
    pub events: usize,
    pub cases: usize,
    pub variants: usize,
    pub classes: usize,
}

impl LogStats {
    /// `events,cases,variants,classes`
    pub fn to_csv_line(&self) -> String {
        format!("{},{},{},{}", self.events, self.cases, self.variants, self.classes)
    }
}

/// Converts a log into a dataframe with one row per event in log order.
///
/// Columns are the case column, the activity column and then every other
/// attribute name in order of first appearance. A column is typed when all
/// its present values share a tag and is an object column otherwise.
pub fn log_to_dataframe(log: &EventLog) -> Result<Dataframe> {
    let n = log.events.len();
    let mut case_of: Vec<Option<AttrValue>> = vec![None; n];
    for (id, members) in &log.cases {
        let id: AttrValue = AttrValue::Str(Arc::from(id.as_str()));
        for &e in members {
            if case_of[e].is_some() {
                return Err(Error::SharedEvent { event: e });
            }
            case_of[e] = Some(id.clone());
        }
    }

    let mut case_values = Vec::with_capacity(n);
    let mut activity_values = Vec::with_capacity(n);
    let mut attrs: IndexMap<&str, Vec<AttrValue>> = IndexMap::new();
    for (pos, (ev, case)) in log.events.iter().zip(case_of).enumerate() {
        let case = case
            .or_else(|| ev.attr(&log.case_key).cloned())
            .ok_or_else(|| Error::MissingMandatory {
                attr: log.case_key.clone(),
                row: Some(pos),
            })?;
        case_values.push(case);
        activity_values.push(AttrValue::str(&ev.activity));
        for (name, value) in &ev.attributes {
            if *name == log.case_key || *name == log.activity_key {
                continue;
            }
            attrs
                .entry(name.as_str())
                .or_insert_with(|| vec![AttrValue::Missing; n])[pos] = value.clone();
        }
    }

    let mut columns = Vec::with_capacity(attrs.len() + 2);
    columns.push((log.case_key.clone(), Column::refined(case_values, &log.case_key)?));
    columns.push((
        log.activity_key.clone(),
        Column::from_values(ColumnType::Str, activity_values, &log.activity_key)?,
    ));
    for (name, values) in attrs {
        columns.push((name.to_string(), Column::refined(values, name)?));
    }
    Dataframe::from_columns((0..n as i64).collect(), columns, &log.case_key, &log.activity_key)
}

/// One event per row in positional order; missing slots are left out of the
/// events' attribute maps and cases are grouped by the rendered case value.
pub fn dataframe_to_log(df: &Dataframe) -> EventLog {
    let case_col = df.column(df.case_column()).expect("case column present");
    let act_col = df.column(df.activity_column()).expect("activity column present");
    let others: Vec<(&str, &Column)> = df
        .columns()
        .filter(|(n, _)| *n != df.case_column() && *n != df.activity_column())
        .collect();

    let mut events = Vec::with_capacity(df.row_count());
    let mut cases: IndexMap<String, BTreeSet<usize>> = IndexMap::new();
    for pos in 0..df.row_count() {
        let mut ev = Event::new(act_col.get(pos).render());
        for (name, col) in &others {
            ev.set_attr(*name, col.get(pos));
        }
        cases.entry(case_col.get(pos).render()).or_default().insert(pos);
        events.push(ev);
    }
    EventLog::new(events, cases)
        .expect("rows always form a valid log")
        .with_keys(df.case_column(), df.activity_column())
}

/// Events, cases, variants (distinct per-case activity sequences in frame
/// order) and activity classes of a frame.
pub fn stats(df: &Dataframe) -> LogStats {
    let act_groups = group_positions(df, df.activity_column()).expect("activity column present");
    let mut activity_id = vec![0u32; df.row_count()];
    for (id, positions) in act_groups.iter().enumerate() {
        for &p in positions {
            activity_id[p] = id as u32;
        }
    }
    let case_groups = group_positions(df, df.case_column()).expect("case column present");
    let variants: HashSet<Vec<u32>> = case_groups
        .iter()
        .map(|positions| positions.iter().map(|&p| activity_id[p]).collect())
        .collect();
    LogStats {
        events: df.row_count(),
        cases: case_groups.len(),
        variants: variants.len(),
        classes: act_groups.len(),
    }
}

/// Options for [`ingest_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub case_column: String,
    pub activity_column: String,
    pub timestamp_column: Option<String>,
    pub type_hints: HashMap<String, ColumnType>,
}

impl CsvOptions {
    pub fn new(case_column: &str, activity_column: &str) -> Self {
        CsvOptions {
            case_column: case_column.to_string(),
            activity_column: activity_column.to_string(),
            timestamp_column: None,
            type_hints: HashMap::new(),
        }
    }

    pub fn timestamp(mut self, column: &str) -> Self {
        self.timestamp_column = Some(column.to_string());
        self
    }

    pub fn hint(mut self, column: &str, kind: ColumnType) -> Self {
        self.type_hints.insert(column.to_string(), kind);
        self
    }

    fn kind_of(&self, column: &str) -> ColumnType {
        if let Some(&k) = self.type_hints.get(column) {
            k
        } else if self.timestamp_column.as_deref() == Some(column) {
            ColumnType::Timestamp
        } else {
            ColumnType::Str
        }
    }
}

/// Reads an RFC-4180 CSV with a header row into a dataframe indexed `0..n`
/// in file order. Empty fields become missing values.
pub fn ingest_csv<R: Read>(source: R, opts: &CsvOptions) -> Result<Dataframe> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    if let Some(dup) = headers.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(Error::MalformedCsv(format!("duplicate header `{dup}`")));
    }
    for mandatory in [&opts.case_column, &opts.activity_column] {
        if !headers.contains(mandatory) {
            return Err(Error::MissingMandatory {
                attr: mandatory.clone(),
                row: None,
            });
        }
    }
    if let Some(ts) = &opts.timestamp_column {
        if !headers.contains(ts) {
            return Err(Error::UnknownAttribute(ts.clone()));
        }
    }

    let kinds: Vec<ColumnType> = headers.iter().map(|h| opts.kind_of(h)).collect();
    let mut values: Vec<Vec<AttrValue>> = vec![Vec::new(); headers.len()];
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    while reader.read_record(&mut record)? {
        for (k, field) in record.iter().enumerate() {
            let v = parse_field(field, kinds[k]).ok_or_else(|| Error::TypeViolation {
                attr: headers[k].clone(),
                detail: format!("cannot parse `{field}` as {} at row {row}", kinds[k]),
            })?;
            values[k].push(v);
        }
        row += 1;
    }

    let columns = headers
        .into_iter()
        .zip(kinds)
        .zip(values)
        .map(|((name, kind), vals)| {
            let col = Column::from_values(kind, vals, &name)?;
            Ok((name, col))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataframe::from_columns(
        (0..row as i64).collect(),
        columns,
        &opts.case_column,
        &opts.activity_column,
    )
}

fn parse_field(field: &str, kind: ColumnType) -> Option<AttrValue> {
    if field.is_empty() {
        return Some(AttrValue::Missing);
    }
    match kind {
        ColumnType::Str => Some(AttrValue::str(field)),
        ColumnType::Int => field.trim().parse().ok().map(AttrValue::Int),
        ColumnType::Float => field
            .trim()
            .parse::<f64>()
            .ok()
            .and_then(|f| AttrValue::float(f).ok()),
        ColumnType::Timestamp => parse_timestamp(field).map(AttrValue::Timestamp),
        ColumnType::Object => Some(
            field
                .parse::<i64>()
                .map(AttrValue::Int)
                .ok()
                .or_else(|| field.parse::<f64>().ok().and_then(|f| AttrValue::float(f).ok()))
                .unwrap_or_else(|| AttrValue::str(field)),
        ),
    }
}

/// Writes a frame as CSV with a header row; missing slots are empty fields
/// and other values use their canonical rendering.
pub fn write_csv<W: Write>(df: &Dataframe, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(df.column_names())?;
    let columns: Vec<&Column> = df.columns().map(|(_, c)| c).collect();
    let mut record: Vec<String> = vec![String::new(); columns.len()];
    for pos in 0..df.row_count() {
        for (slot, col) in record.iter_mut().zip(&columns) {
            *slot = match col.get(pos) {
                AttrValue::Missing => String::new(),
                v => v.render(),
            };
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
