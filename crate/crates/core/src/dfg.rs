//! Directly-follows graph discovery and event/case filtering.
//!
//! Three strategies compute the same [`DfgGraph`]:
//!
//! * [`dfg_iterate`] walks the cases of a classical [`EventLog`];
//! * [`dfg_mapreduce`] groups a dataframe by case, counts consecutive
//!   activity pairs per group on worker threads and merges the partial
//!   counts by summation;
//! * [`dfg_shift_count`] sorts by case, joins the frame with its shifted
//!   copy, keeps same-case rows, merges the activity pair into one string
//!   column and counts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;
use std::thread;

use crate::column::Column;
use crate::dataframe::Dataframe;
use crate::error::{Error, Result};
use crate::eventlog::EventLog;
use crate::transforms::{self, concat, eq_proj, group_positions, mergstrv, proj, shift, RowPredicate};
use crate::value::AttrValue;

/// Separator of the merged activity-pair column.
pub const PAIR_SEPARATOR: &str = ",";
/// Suffix given to the shifted copy's columns.
pub const SHIFT_SUFFIX: &str = "_2";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DfgGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<(String, String), u64>,
    pub start_activities: BTreeMap<String, u64>,
    pub end_activities: BTreeMap<String, u64>,
}

impl DfgGraph {
    pub fn total_edge_count(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn edge(&self, source: &str, target: &str) -> u64 {
        self.edges
            .get(&(source.to_string(), target.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// DOT digraph. Nodes are emitted in lexicographic order, edges by
    /// `(source, target)`, each labelled with its count. Start and end
    /// activities hang off two pseudo-nodes.
    pub fn to_dot(&self) -> String {
        let ids: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), k))
            .collect();
        let mut out = String::from("digraph dfg {\n");
        for (k, name) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{k} [shape=box, label=\"{}\"];", dot_escape(name));
        }
        for ((src, dst), count) in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{count}\"];", ids[src.as_str()], ids[dst.as_str()]);
        }
        if !self.start_activities.is_empty() {
            out.push_str("  start [shape=circle, label=\"start\"];\n");
            for (act, count) in &self.start_activities {
                let _ = writeln!(out, "  start -> n{} [label=\"{count}\"];", ids[act.as_str()]);
            }
        }
        if !self.end_activities.is_empty() {
            out.push_str("  end [shape=doublecircle, label=\"end\"];\n");
            for (act, count) in &self.end_activities {
                let _ = writeln!(out, "  n{} -> end [label=\"{count}\"];", ids[act.as_str()]);
            }
        }
        out.push_str("}\n");
        out
    }

    /// Edge list as CSV with header `source,target,count`, sorted by `(source, target)`.
    pub fn write_edge_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(["source", "target", "count"])?;
        for ((src, dst), count) in &self.edges {
            writer.write_record([src.as_str(), dst.as_str(), &count.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_edge_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV of UTF-8 names is UTF-8")
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// Baseline DFG over the cases of a classical log.
pub fn dfg_iterate(log: &EventLog) -> DfgGraph {
    let mut g = DfgGraph {
        nodes: log.events().iter().map(|e| e.activity().to_string()).collect(),
        ..Default::default()
    };
    for (_, trace) in log.traces() {
        let (Some(first), Some(last)) = (trace.first(), trace.last()) else {
            continue;
        };
        *g.start_activities.entry(first.activity().to_string()).or_default() += 1;
        *g.end_activities.entry(last.activity().to_string()).or_default() += 1;
        for pair in trace.windows(2) {
            let key = (pair[0].activity().to_string(), pair[1].activity().to_string());
            *g.edges.entry(key).or_default() += 1;
        }
    }
    g
}

/// Partial result of one map worker, over dense activity ids.
#[derive(Debug, Default)]
struct PartialDfg {
    edges: HashMap<(u32, u32), u64>,
    starts: HashMap<u32, u64>,
    ends: HashMap<u32, u64>,
}

impl PartialDfg {
    fn absorb(&mut self, other: PartialDfg) {
        for (k, c) in other.edges {
            *self.edges.entry(k).or_default() += c;
        }
        for (k, c) in other.starts {
            *self.starts.entry(k).or_default() += c;
        }
        for (k, c) in other.ends {
            *self.ends.entry(k).or_default() += c;
        }
    }
}

/// Activity id per row plus the rendered name of each id.
fn activity_ids(df: &Dataframe) -> (Vec<u32>, Vec<String>) {
    let groups = group_positions(df, df.activity_column()).expect("activity column present");
    let act = df.column(df.activity_column()).expect("activity column present");
    let mut ids = vec![0u32; df.row_count()];
    let mut names = Vec::with_capacity(groups.len());
    for (id, positions) in groups.iter().enumerate() {
        names.push(act.get(positions[0]).render());
        for &p in positions {
            ids[p] = id as u32;
        }
    }
    (ids, names)
}

/// Map-reduce DFG: case groups are dealt round-robin (in first-occurrence
/// order) to `workers` threads, each counting the pairs of positionally
/// consecutive rows in its groups; the partial counts are summed.
pub fn dfg_mapreduce(df: &Dataframe, workers: usize) -> DfgGraph {
    let workers = workers.max(1);
    let (ids, names) = activity_ids(df);
    let groups = group_positions(df, df.case_column()).expect("case column present");

    let map = |worker: usize| {
        let mut part = PartialDfg::default();
        for positions in groups.iter().skip(worker).step_by(workers) {
            let first = ids[positions[0]];
            let last = ids[*positions.last().unwrap()];
            *part.starts.entry(first).or_default() += 1;
            *part.ends.entry(last).or_default() += 1;
            for pair in positions.windows(2) {
                *part.edges.entry((ids[pair[0]], ids[pair[1]])).or_default() += 1;
            }
        }
        part
    };

    let mut total = PartialDfg::default();
    if workers == 1 {
        total = map(0);
    } else {
        let partials: Vec<PartialDfg> = thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || map(w))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("map worker panicked"))
                .collect()
        });
        for part in partials {
            total.absorb(part);
        }
    }

    let name = |id: u32| names[id as usize].clone();
    DfgGraph {
        nodes: names.iter().cloned().collect(),
        edges: total.edges.into_iter().map(|((a, b), c)| ((name(a), name(b)), c)).collect(),
        start_activities: total.starts.into_iter().map(|(a, c)| (name(a), c)).collect(),
        end_activities: total.ends.into_iter().map(|(a, c)| (name(a), c)).collect(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShiftCountOptions {
    /// Rows of each case are already contiguous; skip the sort.
    pub assume_sorted: bool,
    /// Count edges by splitting the merged `source,target` strings instead of
    /// from the activity pairs. Fails if an activity contains the separator.
    pub strict_merged: bool,
}

/// Shifting-and-counting DFG; see [`dfg_shift_count_with`].
pub fn dfg_shift_count(df: &Dataframe, assume_sorted: bool) -> Result<DfgGraph> {
    dfg_shift_count_with(
        df,
        ShiftCountOptions {
            assume_sorted,
            strict_merged: false,
        },
    )
}

/// Shifting-and-counting DFG.
///
/// 0. unless `assume_sorted`, stable-sort by case; rows are then renumbered
///    `0..n` in positional order;
/// 1. shift the frame;
/// 2. join it with its shifted copy on the index (suffix `_2`);
/// 3. keep rows whose case equals the successor's case;
/// 4. merge activity and successor activity into one string column (`,`);
/// 5. count the merged values.
///
/// Only the case and activity columns take part; other columns cannot
/// change the result.
pub fn dfg_shift_count_with(df: &Dataframe, opts: ShiftCountOptions) -> Result<DfgGraph> {
    let case = df.case_column().to_string();
    let act = df.activity_column().to_string();
    let nodes: BTreeSet<String> = df
        .distinct_values(&act)?
        .into_iter()
        .map(|v| v.render())
        .collect();
    if opts.strict_merged {
        if let Some(bad) = nodes.iter().find(|n| n.contains(PAIR_SEPARATOR)) {
            return Err(Error::SeparatorCollision(bad.clone()));
        }
    }

    let narrow = df.select(&[])?;
    let sorted = if opts.assume_sorted {
        narrow
    } else {
        transforms::sort(&narrow, &case)?
    };
    let sorted = sorted.reset_index();

    let joined = concat(&sorted, &shift(&sorted), SHIFT_SUFFIX)?;
    let case_next = format!("{case}{SHIFT_SUFFIX}");
    let act_next = format!("{act}{SHIFT_SUFFIX}");
    let same_case = {
        let (c1, c2) = (case.clone(), case_next.clone());
        RowPredicate::new([case.clone(), case_next.clone()], move |_, row| {
            row.get(&c1) == row.get(&c2)
        })
    };
    let pairs = proj(&joined, &same_case)?;
    let merged_name = fresh_name(&pairs, &format!("{act}{SHIFT_SUFFIX}_pair"));
    let merged = mergstrv(&pairs, &merged_name, &act, &act_next, PAIR_SEPARATOR)?;

    let mut edges: BTreeMap<(String, String), u64> = BTreeMap::new();
    if opts.strict_merged {
        let counts = count_values(merged.column(&merged_name)?);
        for (value, c) in counts {
            let (src, dst) = value
                .split_once(PAIR_SEPARATOR)
                .ok_or_else(|| Error::SeparatorCollision(value.clone()))?;
            edges.insert((src.to_string(), dst.to_string()), c);
        }
    } else {
        let sources = merged.column(&act)?;
        let targets = merged.column(&act_next)?;
        let mut counts: HashMap<(AttrValue, AttrValue), u64> = HashMap::new();
        match (sources, targets) {
            (Column::Str(s), Column::Str(t)) => {
                let mut by_str: HashMap<(&str, &str), u64> = HashMap::new();
                for (a, b) in s.iter().zip(t) {
                    let key = (a.as_deref().unwrap_or_default(), b.as_deref().unwrap_or_default());
                    *by_str.entry(key).or_default() += 1;
                }
                for ((a, b), c) in by_str {
                    edges.insert((a.to_string(), b.to_string()), c);
                }
            }
            _ => {
                for (a, b) in sources.iter().zip(targets.iter()) {
                    *counts.entry((a, b)).or_default() += 1;
                }
                for ((a, b), c) in counts {
                    edges.insert((a.render(), b.render()), c);
                }
            }
        }
    }

    let (start_activities, end_activities) = block_boundaries(&sorted);
    Ok(DfgGraph {
        nodes,
        edges,
        start_activities,
        end_activities,
    })
}

fn fresh_name(df: &Dataframe, base: &str) -> String {
    let mut name = base.to_string();
    while df.has_column(&name) {
        name.push('_');
    }
    name
}

fn count_values(col: &Column) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for v in col.iter() {
        *counts.entry(v.render()).or_default() += 1;
    }
    counts
}

/// First and last activity of every contiguous block of equal case values.
fn block_boundaries(df: &Dataframe) -> (BTreeMap<String, u64>, BTreeMap<String, u64>) {
    let case = df.column(df.case_column()).expect("case column present");
    let act = df.column(df.activity_column()).expect("activity column present");
    let n = df.row_count();
    let mut starts = HashMap::new();
    let mut ends = HashMap::new();
    for pos in 0..n {
        if pos == 0 || case.cmp_positions(pos - 1, pos).is_ne() {
            *starts.entry(act.get(pos)).or_insert(0) += 1;
        }
        if pos + 1 == n || case.cmp_positions(pos, pos + 1).is_ne() {
            *ends.entry(act.get(pos)).or_insert(0) += 1;
        }
    }
    let render = |m: HashMap<AttrValue, u64>| m.into_iter().map(|(k, c)| (k.render(), c)).collect();
    (render(starts), render(ends))
}

/// Keeps the events whose `attr` value is in `allowed`.
pub fn filter_events(df: &Dataframe, attr: &str, allowed: &HashSet<AttrValue>) -> Result<Dataframe> {
    eq_proj(df, attr, allowed)
}

/// Keeps every event of each case that has at least one event whose `attr`
/// value is in `allowed`.
pub fn filter_cases(df: &Dataframe, attr: &str, allowed: &HashSet<AttrValue>) -> Result<Dataframe> {
    let hits = df.column(attr)?.positions_in(allowed);
    let case = df.column(df.case_column())?;
    let qualifying: HashSet<AttrValue> = hits.into_iter().map(|p| case.get(p)).collect();
    eq_proj(df, df.case_column(), &qualifying)
}

/// The most frequent activity; ties go to the smallest value.
pub fn most_frequent_activity(df: &Dataframe) -> Option<AttrValue> {
    let act = df.column(df.activity_column()).ok()?;
    group_positions(df, df.activity_column())
        .ok()?
        .into_iter()
        .map(|positions| (positions.len(), act.get(positions[0])))
        .max_by(|(n1, v1), (n2, v2)| n1.cmp(n2).then_with(|| v2.cmp(v1)))
        .map(|(_, v)| v)
}
