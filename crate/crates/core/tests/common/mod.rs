//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use indexmap::IndexMap;
use pmframe::{AttrValue, ColumnType, Dataframe, Event, EventLog};
use proptest::prelude::*;
use rand::Rng;

pub mod props;

/// A log as a flat list of `(case, activity)` pairs in log order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLog {
    pub events: Vec<(String, String)>,
}

impl RawLog {
    /// Random log with `1..=max_cases` cases of `1..=max_len` events over
    /// `1..=max_acts` activities. Cases are interleaved unless `contiguous`.
    pub fn random(rng: &mut impl Rng, max_cases: usize, max_len: usize, max_acts: usize, contiguous: bool) -> Self {
        let cases = rng.gen_range(1..=max_cases);
        let acts = rng.gen_range(1..=max_acts);
        let mut remaining: Vec<(String, usize)> = (0..cases)
            .map(|c| (format!("case{c}"), rng.gen_range(1..=max_len)))
            .collect();
        let mut events = Vec::new();
        if contiguous {
            for (id, len) in &remaining {
                for _ in 0..*len {
                    events.push((id.clone(), format!("act{}", rng.gen_range(0..acts))));
                }
            }
        } else {
            while !remaining.is_empty() {
                let k = rng.gen_range(0..remaining.len());
                events.push((remaining[k].0.clone(), format!("act{}", rng.gen_range(0..acts))));
                remaining[k].1 -= 1;
                if remaining[k].1 == 0 {
                    remaining.swap_remove(k);
                }
            }
        }
        RawLog { events }
    }

    /// Same events, regrouped so that each case is one contiguous block
    /// (cases in order of first appearance, events in log order).
    pub fn regrouped(&self) -> Self {
        let mut blocks: IndexMap<&str, Vec<&str>> = IndexMap::new();
        for (c, a) in &self.events {
            blocks.entry(c).or_default().push(a);
        }
        RawLog {
            events: blocks
                .into_iter()
                .flat_map(|(c, acts)| acts.into_iter().map(move |a| (c.to_string(), a.to_string())))
                .collect(),
        }
    }

    pub fn to_event_log(&self) -> EventLog {
        let mut cases: IndexMap<String, BTreeSet<usize>> = IndexMap::new();
        let events = self
            .events
            .iter()
            .enumerate()
            .map(|(i, (c, a))| {
                cases.entry(c.clone()).or_default().insert(i);
                Event::new(a.as_str())
            })
            .collect();
        EventLog::new(events, cases).unwrap()
    }

    fn traces(&self) -> Vec<Vec<&str>> {
        let mut by_case: Vec<(&str, Vec<&str>)> = Vec::new();
        for (c, a) in &self.events {
            match by_case.iter_mut().find(|(id, _)| id == c) {
                Some((_, t)) => t.push(a),
                None => by_case.push((c, vec![a])),
            }
        }
        by_case.into_iter().map(|(_, t)| t).collect()
    }
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct OracleDfg {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<(String, String), u64>,
    pub starts: BTreeMap<String, u64>,
    pub ends: BTreeMap<String, u64>,
}

/// Directly-follows relation by walking every trace pair by pair.
pub fn oracle_dfg(log: &RawLog) -> OracleDfg {
    let mut out = OracleDfg::default();
    for trace in log.traces() {
        for w in trace.windows(2) {
            *out.edges.entry((w[0].to_string(), w[1].to_string())).or_default() += 1;
        }
        *out.starts.entry(trace[0].to_string()).or_default() += 1;
        *out.ends.entry(trace[trace.len() - 1].to_string()).or_default() += 1;
    }
    out.nodes = log.events.iter().map(|(_, a)| a.clone()).collect();
    out
}

pub fn matches_oracle(g: &pmframe::DfgGraph, o: &OracleDfg) -> bool {
    g.nodes == o.nodes && g.edges == o.edges && g.start_activities == o.starts && g.end_activities == o.ends
}

/// `(events, cases, variants, classes)` counted directly from the raw list.
pub fn oracle_stats(log: &RawLog) -> (usize, usize, usize, usize) {
    let traces = log.traces();
    let mut variants: Vec<Vec<&str>> = Vec::new();
    for t in &traces {
        if !variants.contains(t) {
            variants.push(t.clone());
        }
    }
    let mut classes: Vec<&str> = Vec::new();
    for (_, a) in &log.events {
        if !classes.contains(&a.as_str()) {
            classes.push(a);
        }
    }
    (log.events.len(), traces.len(), variants.len(), classes.len())
}

/// Rows as `(index entry, values in column order)`.
pub fn rows(df: &Dataframe) -> Vec<(i64, Vec<AttrValue>)> {
    let names: Vec<&str> = df.column_names().collect();
    (0..df.row_count())
        .map(|p| {
            (
                df.index()[p],
                names.iter().map(|n| df.value_at(p, n).unwrap()).collect(),
            )
        })
        .collect()
}

/// Reference order: Int/Float by value (Int first on ties), then
/// timestamps, then strings, then missing.
pub fn oracle_cmp(a: &AttrValue, b: &AttrValue) -> Ordering {
    fn rank(v: &AttrValue) -> u8 {
        match v {
            AttrValue::Int(_) | AttrValue::Float(_) => 0,
            AttrValue::Timestamp(_) => 1,
            AttrValue::Str(_) => 2,
            AttrValue::Missing => 3,
        }
    }
    fn numeric(v: &AttrValue) -> (f64, u8) {
        match v {
            AttrValue::Int(i) => (*i as f64, 0),
            AttrValue::Float(f) => (f.into_inner(), 1),
            _ => unreachable!(),
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (AttrValue::Timestamp(x), AttrValue::Timestamp(y)) => x.cmp(y),
        (AttrValue::Str(x), AttrValue::Str(y)) => x.as_bytes().cmp(y.as_bytes()),
        (AttrValue::Missing, AttrValue::Missing) => Ordering::Equal,
        _ => {
            let (x, tx) = numeric(a);
            let (y, ty) = numeric(b);
            x.partial_cmp(&y).unwrap().then(tx.cmp(&ty))
        }
    })
}

fn value_of(kind: ColumnType) -> BoxedStrategy<AttrValue> {
    let present: BoxedStrategy<AttrValue> = match kind {
        ColumnType::Int => (-20i64..20).prop_map(AttrValue::Int).boxed(),
        ColumnType::Float => (-80i32..80)
            .prop_map(|q| AttrValue::float(q as f64 / 4.0).unwrap())
            .boxed(),
        ColumnType::Timestamp => (0i64..5)
            .prop_map(|k| AttrValue::timestamp(1_600_000_000_000 + k * 1_500).unwrap())
            .boxed(),
        ColumnType::Str => "[ab,]{0,2}".prop_map(AttrValue::str).boxed(),
        ColumnType::Object => prop_oneof![
            value_of(ColumnType::Int),
            value_of(ColumnType::Float),
            value_of(ColumnType::Timestamp),
            value_of(ColumnType::Str),
        ]
        .boxed(),
    };
    prop_oneof![6 => present, 1 => Just(AttrValue::Missing)].boxed()
}

fn kind() -> impl Strategy<Value = ColumnType> {
    prop::sample::select(ColumnType::ALL.to_vec())
}

/// Index shapes: contiguous from 0, increasing with gaps, or shuffled.
fn index(n: usize) -> BoxedStrategy<Vec<i64>> {
    let gapped = (-5i64..5, prop::collection::vec(1i64..4, n)).prop_map(|(start, steps)| {
        steps
            .iter()
            .scan(start, |acc, s| {
                let v = *acc;
                *acc += s;
                Some(v)
            })
            .collect::<Vec<_>>()
    });
    prop_oneof![
        Just((0..n as i64).collect::<Vec<_>>()),
        gapped.clone(),
        gapped.prop_shuffle(),
    ]
    .boxed()
}

/// Frames of up to `max_rows` rows with a string case column `case`
/// (values c0..c4), a string activity column `act` (a0..a4) and up to four
/// extra columns `x0..` of random kinds with missing slots.
pub fn frame(max_rows: usize) -> impl Strategy<Value = Dataframe> {
    (0..=max_rows, prop::collection::vec(kind(), 0..=4)).prop_flat_map(|(n, kinds)| {
        let extras: Vec<BoxedStrategy<(ColumnType, Vec<AttrValue>)>> = kinds
            .into_iter()
            .map(|k| (Just(k), prop::collection::vec(value_of(k), n)).boxed())
            .collect();
        (
            index(n),
            prop::collection::vec(0u8..5, n),
            prop::collection::vec(0u8..5, n),
            extras,
        )
            .prop_map(|(idx, cases, acts, extras)| {
                let mut cols = vec![
                    (
                        "case".to_string(),
                        ColumnType::Str,
                        cases.iter().map(|c| AttrValue::str(format!("c{c}"))).collect(),
                    ),
                    (
                        "act".to_string(),
                        ColumnType::Str,
                        acts.iter().map(|a| AttrValue::str(format!("a{a}"))).collect(),
                    ),
                ];
                for (j, (k, vals)) in extras.into_iter().enumerate() {
                    cols.push((format!("x{j}"), k, vals));
                }
                Dataframe::build(idx, cols, "case", "act").unwrap()
            })
    })
}

/// Frames whose case blocks are contiguous: rows stable-sorted by case in a
/// test-side sort (not the library's).
pub fn contiguous(df: &Dataframe) -> Dataframe {
    let mut perm: Vec<usize> = (0..df.row_count()).collect();
    perm.sort_by_key(|&p| df.value_at(p, "case").unwrap());
    rebuild(df, &perm, (0..perm.len() as i64).collect())
}

/// Frame with the given rows (by position) and index, same columns and kinds.
pub fn rebuild(df: &Dataframe, positions: &[usize], index: Vec<i64>) -> Dataframe {
    let cols = df
        .columns()
        .map(|(name, col)| {
            (
                name.to_string(),
                col.kind(),
                positions.iter().map(|&p| col.get(p)).collect::<Vec<_>>(),
            )
        })
        .collect::<Vec<_>>();
    Dataframe::build(index, cols, df.case_column(), df.activity_column()).unwrap()
}

pub fn value_set(values: &[&str]) -> HashSet<AttrValue> {
    values.iter().map(AttrValue::str).collect()
}

pub const GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

/// The checked-in EDF1 fixtures as `(file name, frame, compression)`.
pub fn golden_frames() -> Vec<(&'static str, Dataframe, pmframe::edf::Compression)> {
    use pmframe::edf::Compression;
    use AttrValue::{Int, Missing};
    let s = AttrValue::str;
    let f = |x: f64| AttrValue::float(x).unwrap();
    let t = |ms: i64| AttrValue::timestamp(ms).unwrap();

    let empty = Dataframe::build(
        vec![],
        vec![("case", ColumnType::Str, vec![]), ("activity", ColumnType::Str, vec![])],
        "case",
        "activity",
    )
    .unwrap();

    let mixed = Dataframe::build(
        (0..5).collect(),
        vec![
            ("case", ColumnType::Str, vec![s("c1"), s("c1"), s("c2"), s("c2"), s("c2")]),
            ("activity", ColumnType::Str, vec![s("A"), s("B"), s("A"), s("C"), s("B")]),
            ("count", ColumnType::Int, vec![Int(1), Missing, Int(-3), Int(i64::MAX), Int(0)]),
            ("cost", ColumnType::Float, vec![f(0.5), f(-2.25), Missing, f(1e10), f(0.0)]),
            (
                "time",
                ColumnType::Timestamp,
                vec![t(0), t(1_600_000_000_123), Missing, t(-86_400_000), t(1)],
            ),
            ("note", ColumnType::Str, vec![Missing, s(""), s("é,\"q\""), s("x"), Missing]),
            ("any", ColumnType::Object, vec![Int(7), f(7.5), t(42), s("s"), Missing]),
        ],
        "case",
        "activity",
    )
    .unwrap();

    let n = 1000i64;
    let large = Dataframe::build(
        (0..n).collect(),
        vec![
            ("case", ColumnType::Str, (0..n).map(|i| AttrValue::str(format!("C{}", i / 7))).collect()),
            (
                "activity",
                ColumnType::Str,
                (0..n).map(|i| AttrValue::str(format!("A{}", (i * i + 3 * i) % 6))).collect(),
            ),
            (
                "time",
                ColumnType::Timestamp,
                (0..n).map(|i| t(1_577_836_800_000 + i * 60_000)).collect(),
            ),
            (
                "amount",
                ColumnType::Int,
                (0..n).map(|i| if i % 11 == 0 { Missing } else { Int(i % 13) }).collect(),
            ),
            ("cost", ColumnType::Float, (0..n).map(|i| f((i % 100) as f64 / 8.0)).collect()),
        ],
        "case",
        "activity",
    )
    .unwrap();

    vec![
        ("empty.edf", empty, Compression::None),
        ("mixed5.edf", mixed, Compression::None),
        ("deflate1000.edf", large, Compression::Deflate),
    ]
}
