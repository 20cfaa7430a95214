mod common;

use common::RawLog;
use pmframe::eventlog::{dataframe_to_log, ingest_csv, log_to_dataframe, stats, write_csv, CsvOptions};
use pmframe::{AttrValue, Error, Event, EventLog};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn stats_match_brute_force(seed in any::<u64>(), contiguous in any::<bool>()) {
        let raw = RawLog::random(&mut ChaCha8Rng::seed_from_u64(seed), 30, 10, 5, contiguous);
        common::props::stats_match_oracle(&raw)?;
    }

    #[test]
    fn conversion_preserves_log_order(seed in any::<u64>()) {
        let raw = RawLog::random(&mut ChaCha8Rng::seed_from_u64(seed), 10, 8, 4, false);
        let df = log_to_dataframe(&raw.to_event_log()).unwrap();
        for (p, (c, a)) in raw.events.iter().enumerate() {
            prop_assert_eq!(df.value_at(p, df.case_column()).unwrap(), AttrValue::str(c));
            prop_assert_eq!(df.value_at(p, df.activity_column()).unwrap(), AttrValue::str(a));
        }
        let back = log_to_dataframe(&dataframe_to_log(&df)).unwrap();
        prop_assert_eq!(back, df);
    }

    #[test]
    fn csv_round_trip(df in common::frame(25)) {
        let mut buf = Vec::new();
        write_csv(&df, &mut buf).unwrap();
        let back = ingest_csv(buf.as_slice(), &CsvOptions::new("case", "act")).unwrap();
        prop_assert_eq!(back.row_count(), df.row_count());
        for name in df.column_names() {
            for p in 0..df.row_count() {
                let original = df.value_at(p, name).unwrap();
                let read = back.value_at(p, name).unwrap();
                // empty strings and missing slots share the empty field
                let expected = match original {
                    AttrValue::Missing => AttrValue::Missing,
                    v if v.render().is_empty() => AttrValue::Missing,
                    v => AttrValue::str(v.render()),
                };
                prop_assert_eq!(read, expected);
            }
        }
    }
}

#[test]
fn csv_log_csv_round_trip_keeps_the_frame() {
    let text = "case,activity,cost\nc1,A,1\nc2,A,\nc1,\"B, quoted\",3\r\nc2,B,4\n";
    let df = ingest_csv(text.as_bytes(), &CsvOptions::new("case", "activity")).unwrap();
    assert_eq!(df.value_at(2, "activity").unwrap(), AttrValue::str("B, quoted"));
    assert!(df.value_at(1, "cost").unwrap().is_missing());
    let back = log_to_dataframe(&dataframe_to_log(&df)).unwrap();
    assert_eq!(back, df);
}

#[test]
fn shared_events_are_rejected() {
    let cases = [("a", [0usize]), ("b", [0])]
        .into_iter()
        .map(|(id, m)| (id.to_string(), m.into_iter().collect()))
        .collect();
    let log = EventLog::new(vec![Event::new("A")], cases).unwrap();
    assert!(matches!(log_to_dataframe(&log), Err(Error::SharedEvent { event: 0 })));
}

#[test]
fn stats_fixtures() {
    let frame = |traces: &[(&str, &[&str])]| {
        let log = EventLog::from_traces(
            traces
                .iter()
                .map(|(c, acts)| (c.to_string(), acts.iter().map(|a| Event::new(*a)).collect())),
        );
        stats(&log_to_dataframe(&log).unwrap())
    };
    assert_eq!(frame(&[("c1", &["A", "B"]), ("c2", &["A", "B"])]).to_csv_line(), "4,2,1,2");
    assert_eq!(frame(&[("c1", &["A", "B"]), ("c2", &["B", "A"])]).variants, 2);
    assert_eq!(frame(&[]).to_csv_line(), "0,0,0,0");
}
