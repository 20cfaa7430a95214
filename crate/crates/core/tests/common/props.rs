//! Property bodies shared by the proptest suites and the acceptance runner.

use std::collections::{BTreeMap, HashSet};
use std::io::Cursor;

use pmframe::dfg::{dfg_iterate, dfg_mapreduce, dfg_shift_count};
use pmframe::edf::{read_edf_bytes, to_edf_bytes, Compression, EdfReader};
use pmframe::eventlog::{log_to_dataframe, stats};
use pmframe::transforms::{concat, eq_proj, group, mergstrv, proj, shift, sort, RowPredicate};
use pmframe::{AttrValue, Dataframe, Error};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{matches_oracle, oracle_cmp, oracle_dfg, oracle_stats, rows, RawLog};

type Check = Result<(), TestCaseError>;

pub fn act_subset() -> impl Strategy<Value = HashSet<AttrValue>> {
    prop::collection::hash_set((0u8..5).prop_map(|a| AttrValue::str(format!("a{a}"))), 0..4)
}

pub fn compression() -> impl Strategy<Value = Compression> {
    prop_oneof![Just(Compression::None), Just(Compression::Deflate)]
}

fn by_parity_and_act(acts: HashSet<AttrValue>) -> RowPredicate {
    RowPredicate::new(["act"], move |i, row| {
        i.rem_euclid(2) == 0 || acts.contains(&row.get("act").unwrap())
    })
}

fn by_index(mut r: Vec<(i64, Vec<AttrValue>)>) -> Vec<(i64, Vec<AttrValue>)> {
    r.sort_by_key(|row| row.0);
    r
}

pub fn projection_idempotent(df: &Dataframe, acts: HashSet<AttrValue>) -> Check {
    let p = by_parity_and_act(acts);
    let once = proj(df, &p).unwrap();
    prop_assert_eq!(proj(&once, &p).unwrap(), once);
    Ok(())
}

pub fn projection_partition(df: &Dataframe, acts: HashSet<AttrValue>) -> Check {
    let p = by_parity_and_act(acts);
    let kept = proj(df, &p).unwrap();
    let dropped = proj(df, &p.negate()).unwrap();
    prop_assert_eq!(kept.row_count() + dropped.row_count(), df.row_count());
    let all: Vec<_> = rows(&kept).into_iter().chain(rows(&dropped)).collect();
    prop_assert_eq!(by_index(all), by_index(rows(df)));
    Ok(())
}

pub fn eq_proj_exact(df: &Dataframe, acts: &HashSet<AttrValue>) -> Check {
    let out = eq_proj(df, "act", acts).unwrap();
    let expected: Vec<_> = rows(df).into_iter().filter(|r| acts.contains(&r.1[1])).collect();
    prop_assert_eq!(rows(&out), expected);
    Ok(())
}

pub fn group_partition(df: &Dataframe) -> Check {
    let groups = group(df, "case").unwrap();
    let mut seen = HashSet::new();
    let mut keys = Vec::new();
    for g in &groups {
        prop_assert!(g.row_count() > 0);
        let key = g.value_at(0, "case").unwrap();
        for p in 0..g.row_count() {
            prop_assert_eq!(&g.value_at(p, "case").unwrap(), &key);
        }
        for &i in g.index() {
            prop_assert!(seen.insert(i), "index entry {} in two groups", i);
        }
        keys.push(key);
    }
    prop_assert_eq!(seen.len(), df.row_count());
    let mut first = Vec::new();
    for p in 0..df.row_count() {
        let v = df.value_at(p, "case").unwrap();
        if !first.contains(&v) {
            first.push(v);
        }
    }
    prop_assert_eq!(keys, first);
    Ok(())
}

pub fn shift_index_law(df: &Dataframe) -> Check {
    let s = shift(df);
    let expected: Vec<i64> = df.index().iter().map(|i| i - 1).collect();
    prop_assert_eq!(s.index(), expected.as_slice());
    let values = |f: &Dataframe| rows(f).into_iter().map(|r| r.1).collect::<Vec<_>>();
    prop_assert_eq!(values(&s), values(df));
    Ok(())
}

/// Sorting by the `col`-th column (mod column count) equals a stable
/// reference sort; this implies the permutation and tie-order properties.
pub fn sort_stable(df: &Dataframe, col: usize) -> Check {
    let names: Vec<String> = df.column_names().map(str::to_string).collect();
    let k = col % names.len();
    let out = sort(df, &names[k]).unwrap();
    let mut expected = rows(df);
    expected.sort_by(|a, b| oracle_cmp(&a.1[k], &b.1[k]));
    prop_assert_eq!(rows(&out), expected);
    Ok(())
}

pub fn concat_join(df: &Dataframe) -> Check {
    let s = shift(df);
    let joined = concat(df, &s, "_2").unwrap();
    let right: BTreeMap<i64, Vec<AttrValue>> = rows(&s).into_iter().collect();
    let expected: Vec<(i64, Vec<AttrValue>)> = rows(df)
        .into_iter()
        .filter_map(|(i, mut vals)| {
            right.get(&i).map(|r| {
                vals.extend(r.iter().cloned());
                (i, vals)
            })
        })
        .collect();
    prop_assert_eq!(rows(&joined), expected);
    prop_assert_eq!(joined.column_count(), 2 * df.column_count());
    Ok(())
}

pub fn concat_own_shift_contiguous(df: &Dataframe) -> Check {
    let df = df.reset_index();
    let joined = concat(&df, &shift(&df), "_2").unwrap();
    prop_assert_eq!(joined.row_count(), df.row_count().saturating_sub(1));
    Ok(())
}

pub fn mergstrv_one_column(df: &Dataframe, a: usize, b: usize) -> Check {
    let names: Vec<String> = df.column_names().map(str::to_string).collect();
    let (a1, a2) = (&names[a % names.len()], &names[b % names.len()]);
    let out = mergstrv(df, "merged", a1, a2, "-").unwrap();
    prop_assert_eq!(out.column_count(), df.column_count() + 1);
    prop_assert_eq!(out.index(), df.index());
    for name in &names {
        prop_assert_eq!(out.column(name).unwrap(), df.column(name).unwrap());
    }
    for p in 0..df.row_count() {
        let expected = format!(
            "{}-{}",
            df.value_at(p, a1).unwrap().render(),
            df.value_at(p, a2).unwrap().render()
        );
        prop_assert_eq!(out.value_at(p, "merged").unwrap(), AttrValue::str(expected));
    }
    prop_assert!(matches!(mergstrv(&out, "merged", a1, a2, "-"), Err(Error::NameCollision(_))));
    Ok(())
}

/// Every strategy (and both sort modes) against the pair-walking oracle.
pub fn three_way(raw: &RawLog) -> Check {
    let oracle = oracle_dfg(raw);
    let log = raw.to_event_log();
    let df = log_to_dataframe(&log).unwrap();
    let iterated = dfg_iterate(&log);
    prop_assert!(matches_oracle(&iterated, &oracle), "iterate disagrees with the oracle");
    for w in [1, 2, 8] {
        prop_assert_eq!(&dfg_mapreduce(&df, w), &iterated, "mapreduce with {} workers", w);
    }
    prop_assert_eq!(&dfg_shift_count(&df, false).unwrap(), &iterated);
    let grouped = log_to_dataframe(&raw.regrouped().to_event_log()).unwrap();
    prop_assert_eq!(&dfg_shift_count(&grouped, true).unwrap(), &iterated);
    prop_assert_eq!(&dfg_shift_count(&grouped, false).unwrap(), &iterated);
    Ok(())
}

/// Edge total = events − non-empty cases; start and end totals = cases.
pub fn conservation(df: &Dataframe) -> Check {
    let cases = df.distinct_values(df.case_column()).unwrap().len() as u64;
    for g in [dfg_shift_count(df, false).unwrap(), dfg_mapreduce(df, 2)] {
        prop_assert_eq!(g.total_edge_count(), df.row_count() as u64 - cases);
        prop_assert_eq!(g.start_activities.values().sum::<u64>(), cases);
        prop_assert_eq!(g.end_activities.values().sum::<u64>(), cases);
    }
    Ok(())
}

pub fn edf_round_trip(df: &Dataframe, c: Compression) -> Check {
    let bytes = to_edf_bytes(df, c);
    prop_assert_eq!(&to_edf_bytes(df, c), &bytes);
    prop_assert_eq!(read_edf_bytes(&bytes, None).unwrap(), df.reset_index());
    Ok(())
}

/// Reading the columns picked by `mask` equals the full read restricted to
/// them, and the counter covers exactly the decoded blocks.
pub fn edf_subset(df: &Dataframe, c: Compression, mask: &[bool]) -> Check {
    let bytes = to_edf_bytes(df, c);
    let names: Vec<String> = df.column_names().map(str::to_string).collect();
    let subset: Vec<&str> = names
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(n, _)| n.as_str())
        .collect();
    let mut reader = EdfReader::open(Cursor::new(&bytes)).unwrap();
    let part = reader.read(Some(&subset)).unwrap();
    let full = read_edf_bytes(&bytes, None).unwrap();
    prop_assert_eq!(&part, &full.select(&subset).unwrap());
    let expected: u64 = reader
        .header()
        .directory
        .iter()
        .filter(|m| part.has_column(&m.name))
        .map(|m| m.compressed_length)
        .sum();
    prop_assert_eq!(reader.bytes_decompressed(), expected);
    Ok(())
}

pub fn stats_match_oracle(raw: &RawLog) -> Check {
    let s = stats(&log_to_dataframe(&raw.to_event_log()).unwrap());
    prop_assert_eq!((s.events, s.cases, s.variants, s.classes), oracle_stats(raw));
    Ok(())
}
