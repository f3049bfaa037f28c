use proptest::prelude::*;

use replicability::adjust::{build_adjusted_table, AdjustFlavor};
use replicability::procedures::{fdr_symmetric, fdr_two_stage, fwer_two_stage, DependenceMode, FwerMethod};
use replicability::selection::{FollowedUp, SelectionRule};
use replicability::sim::{largest_remainder, run_scenario, SimProcedure, SimScenario, SimSelection};
use replicability::{DiscoveryReport, HypothesisRecord, StudyPairData};

fn pvalue() -> impl Strategy<Value = f64> {
    prop_oneof![0.0f64..=1.0, 0.0f64..1e-3, Just(0.0), Just(1.0), (0u32..8).prop_map(|k| k as f64 / 1000.0)]
}

fn dataset() -> impl Strategy<Value = StudyPairData> {
    prop::collection::vec((pvalue(), prop::option::weighted(0.7, pvalue())), 1..60).prop_map(|rows| {
        let records = rows
            .into_iter()
            .enumerate()
            .map(|(i, (p1, p2))| HypothesisRecord::new(format!("h{i}"), p1, p2))
            .collect();
        StudyPairData::new(records, None, None)
    })
}

fn complete_dataset() -> impl Strategy<Value = StudyPairData> {
    prop::collection::vec((pvalue(), pvalue()), 1..60).prop_map(|rows| {
        StudyPairData::from_pairs(rows.into_iter().enumerate().map(|(i, (a, b))| (format!("h{i}"), a, b)))
    })
}

fn levels() -> impl Strategy<Value = (f64, f64)> {
    (0.001f64..0.3, 0.05f64..0.95).prop_map(|(q, c)| (c * q, q))
}

fn check_report(data: &StudyPairData, r: &DiscoveryReport, followed: &[usize], q: Option<f64>) {
    assert_eq!(r.r2, r.rejected.len());
    assert_eq!(r.rejected_ids, data.ids_of(&r.rejected));
    assert!(r.rejected.iter().all(|j| followed.contains(j)));
    if let Some(q) = q {
        for s in &r.per_hypothesis {
            assert_eq!(s.adjusted_p <= q, r.is_rejected(s.index), "{}", s.id);
            assert!((0.0..=1.0).contains(&s.adjusted_p));
        }
    }
}

proptest! {
    #[test]
    fn fdr_report_invariants(data in dataset(), (q1, q) in levels()) {
        let r = fdr_two_stage(&data, &FollowedUp, q1, q, DependenceMode::Independent).unwrap();
        check_report(&data, &r, &data.followed_up_indices(), Some(q));
    }

    #[test]
    fn fdr_modified_modes_reject_a_subset(data in dataset(), (q1, q) in levels()) {
        let base = fdr_two_stage(&data, &FollowedUp, q1, q, DependenceMode::Independent).unwrap();
        for mode in [DependenceMode::ArbitraryPrimaryItem1, DependenceMode::ArbitraryBoth { t: None }] {
            let r = fdr_two_stage(&data, &FollowedUp, q1, q, mode).unwrap();
            check_report(&data, &r, &data.followed_up_indices(), Some(q));
            prop_assert!(r.rejected.iter().all(|j| base.rejected.contains(j)));
        }
    }

    #[test]
    fn selection_rule_report_invariants(data in complete_dataset(), (q1, q) in levels(), k in 1usize..20) {
        let k = k.min(data.len());
        let r = fdr_two_stage(&data, &SelectionRule::TopK(k), q1, q, DependenceMode::Independent).unwrap();
        prop_assert_eq!(r.r1, k);
        let all: Vec<usize> = (0..data.len()).collect();
        check_report(&data, &r, &all, Some(q));
    }

    #[test]
    fn symmetric_report_invariants(data in complete_dataset(), (q1, q) in levels(), w1 in prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0f64..=1.0]) {
        let rule = SelectionRule::BhAtLevel(q1.max(1e-6));
        let r = fdr_symmetric(&data, &rule, &rule, w1, q1, q, DependenceMode::Independent).unwrap();
        let all: Vec<usize> = (0..data.len()).collect();
        check_report(&data, &r, &all, Some(q));
        let union: usize = r.components.iter().map(|c| c.r2).sum();
        prop_assert!(r.r2 <= union);
    }

    #[test]
    fn fwer_report_invariants(data in dataset(), (a1, a) in levels()) {
        for method in [FwerMethod::Bonferroni, FwerMethod::Holm] {
            let r = fwer_two_stage(&data, &FollowedUp, a1, a, method).unwrap();
            check_report(&data, &r, &data.followed_up_indices(), None);
        }
    }

    #[test]
    fn adjusted_table_sorted_and_bounded(data in dataset(), c in 0.01f64..0.99) {
        for flavor in [AdjustFlavor::Bonferroni, AdjustFlavor::Fdr] {
            let t = build_adjusted_table(&data, c, flavor, DependenceMode::ArbitraryPrimaryItem1).unwrap();
            for w in t.rows.windows(2) {
                prop_assert!(
                    w[0].adjusted_p < w[1].adjusted_p
                        || (w[0].adjusted_p == w[1].adjusted_p && w[0].id <= w[1].id)
                );
            }
            for row in &t.rows {
                prop_assert!((0.0..=1.0).contains(&row.adjusted_p));
                let modified = row.adjusted_p_modified.unwrap();
                prop_assert!((row.adjusted_p..=1.0).contains(&modified));
            }
        }
    }

    #[test]
    fn largest_remainder_covers_m(m in 1usize..5000, raw in prop::array::uniform4(0.0f64..1.0)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 0.0);
        let fractions = raw.map(|x| x / total);
        let counts = largest_remainder(m, fractions);
        prop_assert_eq!(counts.iter().sum::<usize>(), m);
        for (n, f) in counts.iter().zip(fractions) {
            prop_assert!((*n as f64 - f * m as f64).abs() < 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_means_are_bounded(mu in 0.0f64..4.0, f11 in 0.0f64..0.3, reps in 1usize..30, seed: u64) {
        let f00 = 0.9 - f11;
        let s = SimScenario::new(
            200,
            [f00, 0.05, 0.05, f11],
            (mu, mu),
            (1.0, 1.0),
            SimProcedure::TwoStageFdr {
                q1: 0.025,
                q: 0.05,
                mode: DependenceMode::Independent,
                selection: SimSelection::Natural,
            },
            reps,
            seed,
        )
        .unwrap();
        let e = run_scenario(&s).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.avg_fdp));
        prop_assert!((0.0..=1.0).contains(&e.fwer));
        prop_assert!(e.avg_rejections >= 0.0);
        if let Some(p) = e.avg_power {
            prop_assert!((0.0..=1.0).contains(&p));
        }
        prop_assert_eq!(e.fdp_se.is_some(), reps >= 2);
    }
}
