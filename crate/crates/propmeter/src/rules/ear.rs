//! The expanding approvals rule: a rank pointer sweeps from first to last
//! place, selecting any candidate whose supporting weight at the current
//! rank reaches the quota and reweighting supporters proportionally.

use num::{BigInt, BigRational, One, Zero};

use crate::model::{Committee, Election};
use crate::rules::{RoundAction, RoundLog, TieBreakPolicy};

/// How a voter's unranked candidates participate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum EarUnranked {
    /// Unranked candidates never gather support during the rank sweep; they
    /// can only enter through the final fill by remaining weight.
    #[default]
    Ignore,
    /// Unranked candidates count as ranked at the last place `m`, so every
    /// voter supports every candidate once the pointer reaches the final
    /// rank.
    FinalRank,
}

/// Runs EAR with the Droop quota. At each rank `r`, while some unselected
/// candidate has total supporting weight at least `q` over the voters
/// ranking it within `r`, the one with the largest weight is selected and
/// its supporters are scaled by `(t - q) / t`. Seats still open after the
/// last rank are filled by descending remaining support.
pub fn ear(e: &Election, tiebreak: TieBreakPolicy, unranked: EarUnranked) -> (Committee, RoundLog) {
    let m = e.num_candidates();
    let k = e.seats();
    let quota = BigRational::from_integer(BigInt::from(e.droop_quota()));
    let mut weights: Vec<BigRational> = e.ballots().iter().map(|_| BigRational::one()).collect();
    let mut selected = vec![false; m + 1];
    let mut committee: Vec<usize> = Vec::new();
    let mut breaker = tiebreak.breaker();
    let mut log = RoundLog::default();

    // effective rank of candidate c on ballot type i, None when the ballot
    // never supports c
    let ranks = e.rank_matrix();
    let effective_rank = |i: usize, c: usize| -> Option<usize> {
        let rank = ranks.rank(i, c);
        let ranked = rank <= e.ballots()[i].prefix.len() && e.ballots()[i].prefix[rank - 1] == c;
        match (ranked, unranked) {
            (true, _) => Some(rank),
            (false, EarUnranked::Ignore) => None,
            (false, EarUnranked::FinalRank) => Some(m),
        }
    };

    let support_at = |r: usize, weights: &[BigRational], selected: &[bool]| -> Vec<BigRational> {
        let mut support = vec![BigRational::zero(); m + 1];
        for (i, b) in e.ballots().iter().enumerate() {
            let ballot_weight = &weights[i] * BigRational::from_integer(BigInt::from(b.weight));
            for c in 1..=m {
                if selected[c] {
                    continue;
                }
                if matches!(effective_rank(i, c), Some(rank) if rank <= r) {
                    support[c] += &ballot_weight;
                }
            }
        }
        support
    };

    'ranks: for r in 1..=m {
        loop {
            if committee.len() == k {
                break 'ranks;
            }
            let support = support_at(r, &weights, &selected);
            let unselected: Vec<usize> = (1..=m).filter(|&c| !selected[c]).collect();
            let top = unselected.iter().map(|&c| &support[c]).max().unwrap().clone();
            if top < quota {
                log.push(
                    RoundAction::ExpandRank { rank: r },
                    unselected.iter().map(|&c| (c, support[c].clone())).collect(),
                    None,
                    Some(quota.clone()),
                );
                break;
            }
            let tied: Vec<usize> = unselected
                .iter()
                .copied()
                .filter(|&c| support[c] == top)
                .collect();
            let winner = breaker.pick(&tied);
            let factor = (&top - &quota) / &top;
            for (i, w) in weights.iter_mut().enumerate() {
                if matches!(effective_rank(i, winner), Some(rank) if rank <= r) {
                    *w *= &factor;
                }
            }
            selected[winner] = true;
            committee.push(winner);
            log.push(
                RoundAction::Elect { candidate: winner },
                unselected.iter().map(|&c| (c, support[c].clone())).collect(),
                Some(factor),
                Some(quota.clone()),
            );
        }
    }

    // under-election: fill the open seats by remaining support at the final
    // rank, largest first
    while committee.len() < k {
        let support = support_at(m, &weights, &selected);
        let unselected: Vec<usize> = (1..=m).filter(|&c| !selected[c]).collect();
        let top = unselected.iter().map(|&c| &support[c]).max().unwrap().clone();
        let tied: Vec<usize> = unselected
            .iter()
            .copied()
            .filter(|&c| support[c] == top)
            .collect();
        let winner = breaker.pick(&tied);
        selected[winner] = true;
        committee.push(winner);
        log.push(
            RoundAction::Elect { candidate: winner },
            unselected.iter().map(|&c| (c, support[c].clone())).collect(),
            None,
            None,
        );
    }

    committee.sort_unstable();
    let committee = Committee::new(committee, m).expect("rule selects k distinct candidates");
    (committee, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::testutil::election;

    #[test]
    fn unanimous_single_winner() {
        let e = election(&["x", "y"], 1, &[(3, &[1])]);
        let (w, _) = ear(&e, TieBreakPolicy::Lexicographic, EarUnranked::default());
        assert_eq!(w.members(), &[1]);
    }

    #[test]
    fn fill_by_remaining_support() {
        // quota 3: a selected at rank 1 and reweighted by 1/4; nobody else
        // reaches the quota at any rank, so the last seat goes to c (weight
        // 2) over b (weight 1)
        let e = election(&["a", "b", "c"], 2, &[(4, &[1, 2]), (2, &[3])]);
        let (w, log) = ear(&e, TieBreakPolicy::Lexicographic, EarUnranked::default());
        assert_eq!(w.members(), &[1, 3], "{}", log.to_json());
        let last = log.rounds.last().unwrap();
        assert_eq!(last.action, RoundAction::Elect { candidate: 3 });
        assert!(last.quota.is_none());
    }

    #[test]
    fn final_rank_variant_pools_all_weight() {
        // with unranked candidates active at rank m, the pooled weight of
        // 1 + 2 = 3 reaches the quota and the tie at 3 selects b over c
        let e = election(&["a", "b", "c"], 2, &[(4, &[1, 2]), (2, &[3])]);
        let (w, _) = ear(&e, TieBreakPolicy::Lexicographic, EarUnranked::FinalRank);
        assert_eq!(w.members(), &[1, 2]);
    }

    #[test]
    fn quota_reached_at_second_rank() {
        // nobody clears the quota on first preferences; at rank 2 candidate
        // b is supported by everyone
        let e = election(&["a", "b", "c"], 1, &[(3, &[1, 2]), (3, &[3, 2])]);
        let (w, _) = ear(&e, TieBreakPolicy::Lexicographic, EarUnranked::default());
        assert_eq!(w.members(), &[2]);
    }
}
