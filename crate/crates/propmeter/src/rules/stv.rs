//! Scottish STV: Weighted Inclusive Gregory with a fixed Droop quota and
//! exact rational transfers.

use num::{BigInt, BigRational, One, Zero};

use crate::model::{Committee, Election};
use crate::rules::{RoundAction, RoundLog, TieBreakPolicy};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Continuing,
    Elected,
    Eliminated,
}

/// Runs Scottish STV. Each round either elects the candidate with the most
/// weighted first preferences (if it reaches the quota, scaling its
/// supporters' ballots by `(t - q) / t` so the total weight drops by exactly
/// `q`), or eliminates the candidate with the fewest. Exhausted ballots keep
/// their weight but support nobody. When as many candidates remain as seats,
/// all of them are elected.
pub fn scottish_stv(e: &Election, tiebreak: TieBreakPolicy) -> (Committee, RoundLog) {
    let m = e.num_candidates();
    let k = e.seats();
    let quota = BigRational::from_integer(BigInt::from(e.droop_quota()));
    let mut weights: Vec<BigRational> = e.ballots().iter().map(|_| BigRational::one()).collect();
    let mut status = vec![Status::Continuing; m + 1];
    let mut elected: Vec<usize> = Vec::new();
    let mut breaker = tiebreak.breaker();
    let mut log = RoundLog::default();

    while elected.len() < k {
        let continuing: Vec<usize> = (1..=m)
            .filter(|&c| status[c] == Status::Continuing)
            .collect();
        let remaining = k - elected.len();
        let (tallies, first_choice) = count(e, &weights, &status);
        let tally_pairs = |tallies: &[BigRational]| {
            continuing
                .iter()
                .map(|&c| (c, tallies[c].clone()))
                .collect::<Vec<_>>()
        };

        if continuing.len() == remaining {
            // elect everyone left, highest tally first
            let mut order = continuing.clone();
            order.sort_by(|&a, &b| tallies[b].cmp(&tallies[a]).then(a.cmp(&b)));
            for c in order {
                elected.push(c);
                status[c] = Status::Elected;
                log.push(
                    RoundAction::Elect { candidate: c },
                    tally_pairs(&tallies),
                    None,
                    Some(quota.clone()),
                );
            }
            break;
        }

        let top_tally = continuing.iter().map(|&c| &tallies[c]).max().unwrap();
        if *top_tally >= quota {
            let tied: Vec<usize> = continuing
                .iter()
                .copied()
                .filter(|&c| tallies[c] == *top_tally)
                .collect();
            let winner = breaker.pick(&tied);
            let total_before: BigRational = weights
                .iter()
                .zip(e.ballots())
                .map(|(w, b)| w * BigRational::from_integer(BigInt::from(b.weight)))
                .sum();
            let t = tallies[winner].clone();
            let factor = (&t - &quota) / &t;
            for (i, fc) in first_choice.iter().enumerate() {
                if *fc == Some(winner) {
                    weights[i] *= &factor;
                }
            }
            status[winner] = Status::Elected;
            elected.push(winner);
            log.push(
                RoundAction::Elect { candidate: winner },
                tally_pairs(&tallies),
                Some(factor),
                Some(quota.clone()),
            );
            // the transfer removes exactly one quota of weight
            let total_after: BigRational = weights
                .iter()
                .zip(e.ballots())
                .map(|(w, b)| w * BigRational::from_integer(BigInt::from(b.weight)))
                .sum();
            if &total_before - &total_after != quota {
                log.diagnostics.push(format!(
                    "weight drop after electing {winner} was {} instead of the quota",
                    total_before - total_after
                ));
            }
        } else {
            let low_tally = continuing.iter().map(|&c| &tallies[c]).min().unwrap();
            let tied: Vec<usize> = continuing
                .iter()
                .copied()
                .filter(|&c| tallies[c] == *low_tally)
                .collect();
            let loser = breaker.pick(&tied);
            status[loser] = Status::Eliminated;
            log.push(
                RoundAction::Eliminate { candidate: loser },
                tally_pairs(&tallies),
                None,
                Some(quota.clone()),
            );
        }
    }

    elected.sort_unstable();
    let committee = Committee::new(elected, m).expect("rule elects k distinct candidates");
    (committee, log)
}

/// Weighted first-preference tallies among continuing candidates, plus each
/// ballot type's current first choice (None when exhausted).
fn count(
    e: &Election,
    weights: &[BigRational],
    status: &[Status],
) -> (Vec<BigRational>, Vec<Option<usize>>) {
    let m = e.num_candidates();
    let mut tallies = vec![BigRational::zero(); m + 1];
    let mut first_choice = vec![None; e.ballots().len()];
    for (i, b) in e.ballots().iter().enumerate() {
        if let Some(&c) = b.prefix.iter().find(|&&c| status[c] == Status::Continuing) {
            tallies[c] += &weights[i] * BigRational::from_integer(BigInt::from(b.weight));
            first_choice[i] = Some(c);
        }
    }
    (tallies, first_choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::testutil::election;

    #[test]
    fn worked_transfer_example() {
        // n = 6, k = 2: a elected with 4 (quota 3, factor 1/4), c eliminated,
        // b takes the last seat
        let e = election(&["a", "b", "c"], 2, &[(4, &[1, 2]), (1, &[2]), (1, &[3])]);
        let (w, log) = scottish_stv(&e, TieBreakPolicy::Lexicographic);
        assert_eq!(w.members(), &[1, 2]);
        let actions: Vec<&RoundAction> = log.rounds.iter().map(|r| &r.action).collect();
        assert_eq!(
            actions,
            vec![
                &RoundAction::Elect { candidate: 1 },
                &RoundAction::Eliminate { candidate: 3 },
                &RoundAction::Elect { candidate: 2 },
            ]
        );
        // factor (4 - 3) / 4
        assert_eq!(
            log.rounds[0].transfer_factor,
            Some(BigRational::new(BigInt::from(1), BigInt::from(4)))
        );
        // b's tally after the transfer: 1 + 4 * 1/4 = 2
        let b_tally = log.rounds[1]
            .tallies
            .iter()
            .find(|(c, _)| *c == 2)
            .map(|(_, t)| t.clone())
            .unwrap();
        assert_eq!(b_tally, BigRational::from_integer(BigInt::from(2)));
        assert!(log.diagnostics.is_empty());
    }

    #[test]
    fn unanimous_single_winner() {
        let e = election(&["x", "y"], 1, &[(5, &[1])]);
        let (w, _) = scottish_stv(&e, TieBreakPolicy::Lexicographic);
        assert_eq!(w.members(), &[1]);
    }

    #[test]
    fn weight_drops_by_quota_each_election() {
        let e = election(
            &["a", "b", "c", "d", "e"],
            3,
            &[(10, &[1, 2, 3]), (6, &[2, 1]), (5, &[3, 4]), (4, &[4]), (2, &[5, 1])],
        );
        let (_, log) = scottish_stv(&e, TieBreakPolicy::Lexicographic);
        // the in-rule exact check files a diagnostic on any mismatch
        assert!(log.diagnostics.is_empty(), "{:?}", log.diagnostics);
    }

    #[test]
    fn total_exhaustion_falls_back_to_equal_count_rule() {
        // single-candidate ballots exhaust immediately after their candidate
        // leaves; the rule still seats k candidates
        let e = election(&["a", "b", "c", "d"], 2, &[(4, &[1]), (1, &[2]), (1, &[3]), (1, &[4])]);
        let (w, _) = scottish_stv(&e, TieBreakPolicy::Lexicographic);
        assert_eq!(w.len(), 2);
        assert!(w.contains(1));
    }
}
