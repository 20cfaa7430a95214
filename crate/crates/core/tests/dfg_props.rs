mod common;

use std::collections::HashSet;

use common::{contiguous, frame, props, RawLog};
use pmframe::dfg::{
    dfg_mapreduce, dfg_shift_count, dfg_shift_count_with, filter_cases, filter_events,
    ShiftCountOptions,
};
use pmframe::eventlog::log_to_dataframe;
use pmframe::{AttrValue, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn all_strategies_agree_with_the_oracle(seed in any::<u64>(), contiguous_log in any::<bool>()) {
        let raw = RawLog::random(&mut ChaCha8Rng::seed_from_u64(seed), 20, 12, 6, contiguous_log);
        props::three_way(&raw)?;
    }

    #[test]
    fn edge_counts_are_conserved(df in frame(40)) {
        props::conservation(&df)?;
    }

    #[test]
    fn sorted_shortcut_matches_full_pipeline(df in frame(40)) {
        let df = contiguous(&df);
        prop_assert_eq!(dfg_shift_count(&df, true).unwrap(), dfg_shift_count(&df, false).unwrap());
        prop_assert_eq!(dfg_mapreduce(&df, 3), dfg_shift_count(&df, true).unwrap());
    }

    #[test]
    fn strict_counting_agrees_without_separators(df in frame(40)) {
        let strict = ShiftCountOptions { assume_sorted: false, strict_merged: true };
        prop_assert_eq!(dfg_shift_count_with(&df, strict).unwrap(), dfg_shift_count(&df, false).unwrap());
    }

    #[test]
    fn filter_cases_keeps_whole_cases(df in frame(40), keep in prop::collection::hash_set(0u8..5, 0..3)) {
        let allowed: HashSet<AttrValue> = keep.iter().map(|a| AttrValue::str(format!("a{a}"))).collect();
        let out = filter_cases(&df, "act", &allowed).unwrap();
        let in_cases = df.distinct_values("case").unwrap();
        for case in out.distinct_values("case").unwrap() {
            prop_assert!(in_cases.contains(&case));
            let rows_of = |f: &pmframe::Dataframe| {
                let mut r: Vec<_> = common::rows(f).into_iter().filter(|(_, v)| v[0] == case).collect();
                r.sort();
                r
            };
            prop_assert_eq!(rows_of(&out), rows_of(&df));
            prop_assert!(rows_of(&out).iter().any(|(_, v)| allowed.contains(&v[1])));
        }
        let events = filter_events(&df, "act", &allowed).unwrap();
        prop_assert!(events.row_count() <= out.row_count());
    }
}

#[test]
fn separator_in_activity_is_only_fatal_in_strict_mode() {
    let raw = RawLog {
        events: vec![("c".into(), "x,y".into()), ("c".into(), "z".into())],
    };
    let df = log_to_dataframe(&raw.to_event_log()).unwrap();
    assert_eq!(dfg_shift_count(&df, false).unwrap().edge("x,y", "z"), 1);
    let strict = ShiftCountOptions {
        assume_sorted: false,
        strict_merged: true,
    };
    assert!(matches!(dfg_shift_count_with(&df, strict), Err(Error::SeparatorCollision(_))));
}
