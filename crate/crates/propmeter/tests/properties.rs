//! Property tests for the structural invariants: format round-trips, the
//! committee-distance metric, threshold semantics, completion conservation
//! laws, and feasibility monotonicity during threshold descent.

mod common;

use proptest::prelude::*;

use propmeter::coalitions::{
    is_ell_alpha_large, maximal_solid_coalitions, threshold_set, DivisorMethod,
};
use propmeter::completion::{complete_ballots, CompletionConfig};
use propmeter::formats::{from_json, parse_blt, to_json, write_blt};
use propmeter::measures::MeasureContext;
use propmeter::model::{committee_distance, BallotType, Committee, Election, Frac};
use propmeter::optimizer::ConstraintSystem;

fn arb_election(max_m: usize, max_voters: usize) -> impl Strategy<Value = Election> {
    (2..=max_m)
        .prop_flat_map(move |m| {
            let prefix = proptest::sample::subsequence((1..=m).collect::<Vec<_>>(), 1..=m)
                .prop_shuffle();
            let ballots = proptest::collection::vec((1u64..4, prefix), 1..=max_voters);
            (Just(m), 1..m, ballots)
        })
        .prop_map(|(m, k, raw)| {
            let ballots = raw
                .into_iter()
                .map(|(weight, prefix)| BallotType { weight, prefix })
                .collect();
            Election::new(
                "prop",
                (1..=m).map(|i| format!("c{i}")).collect(),
                k,
                ballots,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blt_and_json_round_trips(e in arb_election(6, 10)) {
        prop_assert_eq!(&parse_blt(&write_blt(&e)).unwrap(), &e);
        prop_assert_eq!(&from_json(&to_json(&e)).unwrap(), &e);
    }

    #[test]
    fn weights_sum_to_n(e in arb_election(6, 10)) {
        let n: u64 = e.ballots().iter().map(|b| b.weight).sum();
        prop_assert_eq!(n, e.total_voters());
    }

    #[test]
    fn rank_of_is_bijective_on_prefix(e in arb_election(6, 6)) {
        let m = e.num_candidates();
        for b in e.ballots() {
            let mut on_prefix: Vec<usize> =
                b.prefix.iter().map(|&c| e.rank_of(b, c)).collect();
            on_prefix.sort_unstable();
            // ranks 1..=len with no gaps
            prop_assert_eq!(on_prefix, (1..=b.prefix.len()).collect::<Vec<_>>());
            for c in 1..=m {
                if !b.prefix.contains(&c) {
                    prop_assert_eq!(e.rank_of(b, c), m);
                }
            }
        }
    }

    #[test]
    fn committee_distance_is_a_metric(
        (m, a, b, c) in (4usize..=8).prop_flat_map(|m| {
            let committee = proptest::sample::subsequence((1..=m).collect::<Vec<_>>(), 2)
                .prop_map(move |members| Committee::new(members, m).unwrap());
            (Just(m), committee.clone(), committee.clone(), committee)
        })
    ) {
        let _ = m;
        let d = |x: &Committee, y: &Committee| committee_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        if a != b {
            prop_assert!(d(&a, &b) > 0);
        }
    }

    #[test]
    fn thresholds_characterise_largeness(e in arb_election(6, 10)) {
        let coalitions = maximal_solid_coalitions(&e);
        let thresholds = threshold_set(
            &coalitions,
            e.total_voters(),
            e.seats(),
            DivisorMethod::DHondt,
        );
        for t in &thresholds {
            // a group is ell_alpha-large exactly up to its threshold
            prop_assert!(is_ell_alpha_large(
                t.support, t.ell, t.threshold, e.total_voters(), e.seats()
            ));
            let above = t.threshold + Frac::new(1, 1_000_000);
            prop_assert!(!is_ell_alpha_large(
                t.support, t.ell, above, e.total_voters(), e.seats()
            ));
        }
        // coalition count is bounded by total prefix length plus the full set
        let bound: usize = e.ballots().iter().map(|b| b.prefix.len()).sum::<usize>() + 1;
        prop_assert!(coalitions.len() <= bound);
    }

    #[test]
    fn psc_scan_equals_naive_maximum(e in arb_election(5, 8)) {
        let ctx = MeasureContext::new(&e);
        for members in propmeter::optimizer::committees(e.num_candidates(), e.seats()) {
            let w = Committee::new(members, e.num_candidates()).unwrap();
            let (scan, _) = ctx.psc_value(&w);
            let w_mask = w.mask();
            let naive = ctx
                .thresholds
                .iter()
                .filter(|t| {
                    let mask = t.candidates.iter().fold(0u64, |a, &c| a | 1 << (c - 1));
                    ((mask & w_mask).count_ones() as usize) < t.ell
                })
                .map(|t| t.threshold)
                .max()
                .unwrap_or_else(|| Frac::new(0, 1));
            prop_assert_eq!(scan, naive);
        }
    }

    #[test]
    fn completion_preserves_voters_and_prefixes(
        e in arb_election(6, 8),
        seed in 0u64..1000,
    ) {
        let completed = complete_ballots(&e, &CompletionConfig {
            cutoff: Frac::new(1, 10),
            seed,
        });
        prop_assert_eq!(completed.total_voters(), e.total_voters());
        let m = e.num_candidates();
        for b in completed.ballots() {
            prop_assert!(b.prefix.len() >= m - 1);
            let mut sorted = b.prefix.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), b.prefix.len());
        }
        // every original ballot is a prefix of enough completed weight
        for original in e.ballots() {
            let extended: u64 = completed
                .ballots()
                .iter()
                .filter(|b| {
                    b.prefix.len() >= original.prefix.len()
                        && b.prefix[..original.prefix.len()] == original.prefix[..]
                })
                .map(|b| b.weight)
                .sum();
            prop_assert!(extended >= original.weight);
        }
    }

    #[test]
    fn descent_infeasibility_is_absorbing(e in arb_election(6, 10)) {
        let coalitions = maximal_solid_coalitions(&e);
        let thresholds = threshold_set(
            &coalitions,
            e.total_voters(),
            e.seats(),
            DivisorMethod::DHondt,
        );
        let mut system = ConstraintSystem::new(e.num_candidates(), e.seats()).unwrap();
        let mut infeasible_seen = false;
        for t in &thresholds {
            system.push(&t.candidates, t.ell);
            let feasible = system.feasible().is_some();
            if infeasible_seen {
                prop_assert!(!feasible, "feasibility returned after infeasibility");
            }
            if !feasible {
                infeasible_seen = true;
            }
        }
    }
}
