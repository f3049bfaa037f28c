use std::path::PathBuf;

use proptest::prelude::*;
use replicability::io::{parse_pvalue_csv, parse_pvalue_str, write_pvalue_csv};
use replicability::{HypothesisRecord, StudyPairData};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn fixtures_round_trip() {
    for name in ["hippocampal.csv", "crohns.csv"] {
        let d = parse_pvalue_csv(fixture(name)).unwrap();
        let back = parse_pvalue_str(&write_pvalue_csv(&d)).unwrap();
        assert_eq!(back.records(), d.records(), "{name}");
        assert_eq!(back.m(), d.m());
        assert_eq!(back.r1(), d.r1());
    }
}

#[test]
fn fixture_headers_are_read() {
    let d = parse_pvalue_csv(fixture("crohns.csv")).unwrap();
    assert_eq!((d.len(), d.m(), d.r1()), (36, 635_547, 126));
    let d = parse_pvalue_csv(fixture("hippocampal.csv")).unwrap();
    assert_eq!((d.len(), d.m(), d.r1()), (5, 2_500_000, 5));
}

proptest! {
    #[test]
    fn arbitrary_tables_round_trip(
        rows in prop::collection::vec((0.0f64..=1.0, prop::option::of(0.0f64..=1.0)), 1..40),
        extra in 0usize..1000,
    ) {
        let records: Vec<HypothesisRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(p1, p2))| HypothesisRecord::new(format!("id,{i}"), p1, p2))
            .collect();
        let listed = records.iter().filter(|r| r.p2.is_some()).count();
        let d = StudyPairData::try_new(records, Some(rows.len() + extra), Some(listed + extra)).unwrap();
        let back = parse_pvalue_str(&write_pvalue_csv(&d)).unwrap();
        prop_assert_eq!(back.records(), d.records());
        prop_assert_eq!(back.m(), d.m());
        prop_assert_eq!(back.r1(), d.r1());
    }
}
