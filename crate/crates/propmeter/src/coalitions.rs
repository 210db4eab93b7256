//! Maximal solid coalitions and the threshold-constraint set driving all
//! PSC computations.
//!
//! A group of voters solidly supports a candidate set `C'` when every member
//! ranks every candidate of `C'` above every candidate outside it. With
//! top-truncated strict ballots this happens exactly when the first `|C'|`
//! ranked candidates of the ballot form the set `C'`, so the maximal
//! coalitions are found by iterating over ballot prefixes. The full candidate
//! set is solidly supported by all `n` voters (vacuously).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{Election, Frac};

/// A candidate set together with the total weight of its maximal group of
/// solid supporters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolidCoalition {
    /// Sorted candidate indices.
    pub candidates: Vec<usize>,
    /// Total weight of voters solidly supporting the set.
    pub support: u64,
}

/// One PSC demand: committees must satisfy `|W ∩ candidates| >= ell` for the
/// axiom to hold at any `alpha <= threshold`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdConstraint {
    pub candidates: Vec<usize>,
    pub ell: usize,
    pub threshold: Frac,
    /// Support of the coalition the constraint came from.
    pub support: u64,
}

/// Divisor sequence used to derive per-`ell` thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DivisorMethod {
    /// Divisors 1, 2, 3, ...
    DHondt,
    /// Divisors 1, 3, 5, ...
    SainteLague,
}

impl DivisorMethod {
    pub fn divisor(self, ell: usize) -> u64 {
        match self {
            DivisorMethod::DHondt => ell as u64,
            DivisorMethod::SainteLague => 2 * ell as u64 - 1,
        }
    }
}

impl std::str::FromStr for DivisorMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dhondt" => Ok(DivisorMethod::DHondt),
            "sainte-lague" => Ok(DivisorMethod::SainteLague),
            other => Err(format!("unknown divisor method {other:?}")),
        }
    }
}

/// Enumerates all maximal solid coalitions, sorted by support descending and
/// ties by lexicographic candidate set.
///
/// One entry per set that occurs as the first `t` ranked candidates of some
/// ballot, with support equal to the total weight of ballots whose first
/// `|C'|` ranked candidates form exactly that set, plus the full candidate
/// set supported by all `n` voters.
pub fn maximal_solid_coalitions(e: &Election) -> Vec<SolidCoalition> {
    let m = e.num_candidates();
    let mut supports: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for b in e.ballots() {
        let mut set: Vec<usize> = Vec::with_capacity(b.prefix.len());
        for &c in &b.prefix {
            let pos = set.binary_search(&c).unwrap_err();
            set.insert(pos, c);
            if set.len() < m {
                *supports.entry(set.clone()).or_insert(0) += b.weight;
            }
        }
    }
    supports.insert((1..=m).collect(), e.total_voters());

    let mut out: Vec<SolidCoalition> = supports
        .into_iter()
        .map(|(candidates, support)| SolidCoalition { candidates, support })
        .collect();
    out.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then_with(|| a.candidates.cmp(&b.candidates))
    });
    out
}

/// Derives the sorted threshold-constraint set from a coalition list.
///
/// For each coalition and each `ell <= min(|C'|, k)` the threshold is
/// `support * k / (n * d_ell)`. The list is sorted by threshold
/// non-increasing, ties broken by larger support, then lexicographic
/// candidate set, then smaller `ell`.
pub fn threshold_set(
    coalitions: &[SolidCoalition],
    n: u64,
    k: usize,
    divisors: DivisorMethod,
) -> Vec<ThresholdConstraint> {
    let mut out = Vec::new();
    for coalition in coalitions {
        let cap = coalition.candidates.len().min(k);
        for ell in 1..=cap {
            let threshold = Frac::new(
                coalition.support as i64 * k as i64,
                n as i64 * divisors.divisor(ell) as i64,
            );
            out.push(ThresholdConstraint {
                candidates: coalition.candidates.clone(),
                ell,
                threshold,
                support: coalition.support,
            });
        }
    }
    out.sort_by(|a, b| {
        b.threshold
            .cmp(&a.threshold)
            .then_with(|| b.support.cmp(&a.support))
            .then_with(|| a.candidates.cmp(&b.candidates))
            .then_with(|| a.ell.cmp(&b.ell))
    });
    out
}

/// Smallest group size at which a coalition deserves one seat: `ceil(n / k)`.
pub fn one_large_threshold(n: u64, k: usize) -> u64 {
    n.div_ceil(k as u64)
}

/// Whether a group of the given size is `ell_alpha`-large, i.e. whether
/// `size >= alpha * ell * n / k`.
pub fn is_ell_alpha_large(size: u64, ell: usize, alpha: Frac, n: u64, k: usize) -> bool {
    // size >= alpha * ell * n / k  <=>  size * k * alpha.den >= alpha.num * ell * n
    let lhs = size as i128 * k as i128 * *alpha.denom() as i128;
    let rhs = *alpha.numer() as i128 * ell as i128 * n as i128;
    lhs >= rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{round_3dp, BallotType, Election};

    fn election(names: &[&str], k: usize, ballots: &[(u64, &[usize])]) -> Election {
        Election::new(
            "test",
            names.iter().map(|s| s.to_string()).collect(),
            k,
            ballots
                .iter()
                .map(|(w, p)| BallotType {
                    weight: *w,
                    prefix: p.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn toy_coalitions() {
        // 2 x [a > b], 1 x [b] over {a, b, c}
        let e = election(&["a", "b", "c"], 2, &[(2, &[1, 2]), (1, &[2])]);
        let got = maximal_solid_coalitions(&e);
        let as_pairs: Vec<(Vec<usize>, u64)> =
            got.iter().map(|c| (c.candidates.clone(), c.support)).collect();
        assert_eq!(
            as_pairs,
            vec![
                (vec![1, 2, 3], 3),
                (vec![1], 2),
                (vec![1, 2], 2),
                (vec![2], 1),
            ]
        );
    }

    #[test]
    fn single_ballot_prefixes() {
        let e = election(&["a", "b", "c"], 2, &[(1, &[1, 2, 3])]);
        let got = maximal_solid_coalitions(&e);
        let as_pairs: Vec<(Vec<usize>, u64)> =
            got.iter().map(|c| (c.candidates.clone(), c.support)).collect();
        assert_eq!(
            as_pairs,
            vec![(vec![1], 1), (vec![1, 2], 1), (vec![1, 2, 3], 1)]
        );
    }

    /// Support of a set straight from the definition: every candidate of the
    /// set must beat every candidate outside it, with ranked candidates above
    /// unranked ones and unranked candidates mutually tied.
    fn definition_support(e: &Election, set: &[usize]) -> u64 {
        let m = e.num_candidates();
        e.ballots()
            .iter()
            .filter(|b| {
                let inside = |c: usize| set.contains(&c);
                (1..=m).filter(|&c| !inside(c)).all(|outside| {
                    set.iter().all(|&c| {
                        let rc = e.rank_of(b, c);
                        let ro = e.rank_of(b, outside);
                        // strict preference: ranked beats unranked and
                        // earlier positions beat later ones; two unranked
                        // candidates are tied, never strictly ordered.
                        rc < ro || (rc < b.prefix.len() + 1 && rc < ro)
                    })
                })
            })
            .map(|b| b.weight)
            .sum()
    }

    #[test]
    fn brute_force_equivalence_small() {
        let e = election(
            &["a", "b", "c", "d"],
            2,
            &[(2, &[1, 2]), (1, &[2]), (3, &[3, 1, 2]), (1, &[4, 3])],
        );
        let got = maximal_solid_coalitions(&e);
        // every subset of candidates: definition support must match the
        // enumerated entry (or be zero and absent)
        let m = e.num_candidates();
        for bits in 1u32..(1 << m) {
            let set: Vec<usize> = (1..=m).filter(|c| bits >> (c - 1) & 1 == 1).collect();
            let expected = definition_support(&e, &set);
            let found = got
                .iter()
                .find(|c| c.candidates == set)
                .map(|c| c.support)
                .unwrap_or(0);
            assert_eq!(found, expected, "set {set:?}");
        }
    }

    #[test]
    fn coalition_count_bound() {
        let e = election(
            &["a", "b", "c", "d", "e"],
            2,
            &[(2, &[1, 2, 3]), (1, &[2]), (3, &[5, 4]), (1, &[4, 3])],
        );
        let bound: usize = e.ballots().iter().map(|b| b.prefix.len()).sum::<usize>() + 1;
        assert!(maximal_solid_coalitions(&e).len() <= bound);
    }

    #[test]
    fn paper_threshold_values() {
        // Midlothian 2012 ward 2 head coalitions, n = 5132, k = 3.
        let coalitions = vec![
            SolidCoalition { candidates: vec![5, 6], support: 1624 },
            SolidCoalition { candidates: vec![5], support: 1574 },
            SolidCoalition { candidates: vec![3, 7], support: 1277 },
            SolidCoalition { candidates: vec![3], support: 1257 },
            SolidCoalition { candidates: vec![2], support: 671 },
        ];
        let ts = threshold_set(&coalitions, 5132, 3, DivisorMethod::DHondt);
        let find = |cands: &[usize], ell: usize| {
            ts.iter()
                .find(|t| t.candidates == cands && t.ell == ell)
                .unwrap()
                .threshold
        };
        assert_eq!(round_3dp(find(&[2], 1)), 0.392);
        assert_eq!(round_3dp(find(&[5, 6], 2)), 0.474);
        assert_eq!(round_3dp(find(&[3, 7], 2)), 0.373);
        assert_eq!(round_3dp(find(&[5, 6], 1)), 0.949);
        assert_eq!(round_3dp(find(&[5], 1)), 0.920);
        assert_eq!(round_3dp(find(&[3, 7], 1)), 0.746);
        assert_eq!(round_3dp(find(&[3], 1)), 0.734);
        // sorted non-increasing
        assert!(ts.windows(2).all(|w| w[0].threshold >= w[1].threshold));
    }

    #[test]
    fn one_large_examples() {
        assert_eq!(one_large_threshold(5132, 3), 1711);
        assert_eq!(one_large_threshold(6, 3), 2);
        assert_eq!(one_large_threshold(7, 3), 3);
    }

    #[test]
    fn ell_alpha_large_matches_threshold() {
        // a group is ell_alpha-large iff alpha <= support * k / (n * ell)
        let (n, k) = (5132u64, 3usize);
        for &(support, ell) in &[(1624u64, 2usize), (671, 1), (554, 3)] {
            let threshold = Frac::new(support as i64 * k as i64, n as i64 * ell as i64);
            assert!(is_ell_alpha_large(support, ell, threshold, n, k));
            let above = threshold + Frac::new(1, 100_000);
            assert!(!is_ell_alpha_large(support, ell, above, n, k));
        }
    }

    #[test]
    fn dhondt_singleton_threshold_is_first_place_share() {
        let e = election(&["a", "b", "c"], 2, &[(4, &[1, 2]), (3, &[2]), (2, &[3, 1])]);
        let coalitions = maximal_solid_coalitions(&e);
        let ts = threshold_set(&coalitions, e.total_voters(), e.seats(), DivisorMethod::DHondt);
        for c in 1..=3usize {
            let first_place: u64 = e
                .ballots()
                .iter()
                .filter(|b| b.prefix[0] == c)
                .map(|b| b.weight)
                .sum();
            if first_place == 0 {
                continue;
            }
            let t = ts
                .iter()
                .find(|t| t.candidates == vec![c] && t.ell == 1)
                .unwrap();
            assert_eq!(
                t.threshold,
                Frac::new(first_place as i64 * 2, e.total_voters() as i64)
            );
        }
    }

    #[test]
    fn sainte_lague_divisors() {
        let coalitions = vec![SolidCoalition { candidates: vec![1, 2, 3], support: 90 }];
        let ts = threshold_set(&coalitions, 100, 3, DivisorMethod::SainteLague);
        let thresholds: Vec<Frac> = ts.iter().map(|t| t.threshold).collect();
        assert_eq!(
            thresholds,
            vec![
                Frac::new(90 * 3, 100),
                Frac::new(90 * 3, 300),
                Frac::new(90 * 3, 500),
            ]
        );
    }
}
