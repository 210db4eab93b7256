//! Meek STV: keep factors in floating point with a dynamic quota, re-checked
//! in exact rationals at the end of every electing round.

use num::{BigInt, BigRational, FromPrimitive, One, Signed, Zero};

use crate::model::{Committee, Election};
use crate::rules::{RoundAction, RoundLog, TieBreakPolicy};

/// Added to the quota so a candidate must strictly clear it.
const DELTA: f64 = 1e-9;
/// Convergence tolerance on |tally - quota| for elected candidates.
const TOLERANCE: f64 = 1e-9;
/// Keep-factor iterations allowed per round before a diagnostic is filed.
const ITERATION_CAP: usize = 1000;
/// Slack allowed when the converged round is re-verified in rationals.
const VERIFY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Hopeful,
    Elected,
    Excluded,
}

/// Runs Meek STV. Ballot weight flows down the ranking with each candidate
/// retaining `tally * keep`; the quota is recomputed every iteration as
/// `(non-exhausted weight) / (k + 1) + delta`; elected candidates' keep
/// factors contract multiplicatively by `quota / tally` until every elected
/// tally sits within tolerance of the quota. When no hopeful reaches the
/// quota, the lowest-tally hopeful is excluded.
pub fn meek_stv(e: &Election, tiebreak: TieBreakPolicy) -> (Committee, RoundLog) {
    let m = e.num_candidates();
    let k = e.seats();
    let n = e.total_voters() as f64;
    let mut keep = vec![1.0f64; m + 1];
    let mut status = vec![Status::Hopeful; m + 1];
    let mut elected: Vec<usize> = Vec::new();
    let mut breaker = tiebreak.breaker();
    let mut log = RoundLog::default();

    loop {
        if elected.len() == k {
            break;
        }
        let hopefuls: Vec<usize> = (1..=m)
            .filter(|&c| status[c] == Status::Hopeful)
            .collect();
        if elected.len() + hopefuls.len() == k {
            // the remaining hopefuls are elected unconditionally
            let (tallies, _) = flow(e, &keep, &status);
            let mut order = hopefuls;
            order.sort_by(|&a, &b| {
                tallies[b]
                    .partial_cmp(&tallies[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            for c in order {
                status[c] = Status::Elected;
                elected.push(c);
                log.push(
                    RoundAction::Elect { candidate: c },
                    float_tallies(&tallies, &status, m),
                    None,
                    None,
                );
            }
            break;
        }

        // contract elected keep factors to a fixpoint
        let mut iterations = 0;
        let (tallies, quota) = loop {
            let (tallies, exhausted) = flow(e, &keep, &status);
            let quota = (n - exhausted) / (k as f64 + 1.0) + DELTA;
            let converged = elected
                .iter()
                .all(|&c| (tallies[c] - quota).abs() <= TOLERANCE);
            if converged {
                break (tallies, quota);
            }
            iterations += 1;
            if iterations > ITERATION_CAP {
                log.diagnostics.push(format!(
                    "keep-factor iteration failed to converge within {ITERATION_CAP} steps"
                ));
                break (tallies, quota);
            }
            for &c in &elected {
                if tallies[c] > 0.0 {
                    keep[c] = (keep[c] * quota / tallies[c]).min(1.0);
                }
            }
        };

        let hopefuls: Vec<usize> = (1..=m)
            .filter(|&c| status[c] == Status::Hopeful)
            .collect();
        let best = hopefuls
            .iter()
            .map(|&c| tallies[c])
            .fold(f64::NEG_INFINITY, f64::max);
        if best >= quota {
            let tied: Vec<usize> = hopefuls
                .iter()
                .copied()
                .filter(|&c| tallies[c] == best)
                .collect();
            let winner = breaker.pick(&tied);
            status[winner] = Status::Elected;
            elected.push(winner);
            log.push(
                RoundAction::Elect { candidate: winner },
                float_tallies(&tallies, &status, m),
                None,
                Some(BigRational::from_f64(quota).unwrap()),
            );
            verify_round(e, &keep, &status, &elected, k, &mut log);
        } else {
            let worst = hopefuls
                .iter()
                .map(|&c| tallies[c])
                .fold(f64::INFINITY, f64::min);
            let tied: Vec<usize> = hopefuls
                .iter()
                .copied()
                .filter(|&c| tallies[c] == worst)
                .collect();
            let loser = breaker.pick(&tied);
            status[loser] = Status::Excluded;
            keep[loser] = 0.0;
            log.push(
                RoundAction::Eliminate { candidate: loser },
                float_tallies(&tallies, &status, m),
                None,
                Some(BigRational::from_f64(quota).unwrap()),
            );
        }
    }

    elected.sort_unstable();
    let committee = Committee::new(elected, m).expect("rule elects k distinct candidates");
    (committee, log)
}

/// Sends each ballot's weight down its ranking; candidate `c` retains a
/// `keep[c]` share of whatever reaches it. Returns per-candidate tallies and
/// the exhausted weight that flowed past every ranked candidate.
fn flow(e: &Election, keep: &[f64], status: &[Status]) -> (Vec<f64>, f64) {
    let m = e.num_candidates();
    let mut tallies = vec![0.0f64; m + 1];
    let mut exhausted = 0.0f64;
    for b in e.ballots() {
        let mut remaining = b.weight as f64;
        for &c in &b.prefix {
            if status[c] == Status::Excluded {
                continue;
            }
            let take = remaining * keep[c];
            tallies[c] += take;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        exhausted += remaining;
    }
    (tallies, exhausted)
}

/// Recomputes the converged round exactly from the binary keep factors and
/// files a diagnostic if an elected tally strays from the quota by more than
/// the verification slack.
fn verify_round(
    e: &Election,
    keep: &[f64],
    status: &[Status],
    elected: &[usize],
    k: usize,
    log: &mut RoundLog,
) {
    let m = e.num_candidates();
    let exact_keep: Vec<BigRational> = keep
        .iter()
        .map(|&f| BigRational::from_f64(f).unwrap_or_else(BigRational::zero))
        .collect();
    let mut tallies = vec![BigRational::zero(); m + 1];
    let mut exhausted = BigRational::zero();
    for b in e.ballots() {
        let mut remaining = BigRational::from_integer(BigInt::from(b.weight));
        for &c in &b.prefix {
            if status[c] == Status::Excluded {
                continue;
            }
            let take = &remaining * &exact_keep[c];
            tallies[c] += &take;
            remaining -= take;
            if remaining.is_zero() {
                break;
            }
        }
        exhausted += remaining;
    }
    let n = BigRational::from_integer(BigInt::from(e.total_voters()));
    let quota = (n - exhausted) / BigRational::from_integer(BigInt::from(k as u64 + 1))
        + BigRational::from_f64(DELTA).unwrap();
    let slack = BigRational::from_f64(VERIFY_TOL).unwrap();
    for &c in elected {
        // the most recent winner still carries keep = 1 and holds its whole
        // surplus; only previously contracted candidates sit at the quota
        if keep[c] == 1.0 {
            continue;
        }
        let deviation = (&tallies[c] - &quota).abs();
        if deviation > slack {
            log.diagnostics.push(format!(
                "rational re-check: elected candidate {c} tally deviates from quota by {deviation}"
            ));
        }
    }
}

fn float_tallies(tallies: &[f64], status: &[Status], m: usize) -> Vec<(usize, BigRational)> {
    (1..=m)
        .filter(|&c| status[c] != Status::Excluded)
        .map(|c| {
            (
                c,
                BigRational::from_f64(tallies[c]).unwrap_or_else(BigRational::one),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::testutil::election;

    #[test]
    fn unanimous_single_winner() {
        let e = election(&["x", "y"], 1, &[(7, &[1])]);
        let (w, log) = meek_stv(&e, TieBreakPolicy::Lexicographic);
        assert_eq!(w.members(), &[1]);
        assert!(log.diagnostics.is_empty());
    }

    #[test]
    fn surplus_transfer_changes_outcome() {
        // a's surplus must flow to b: without transfers c would beat b
        let e = election(
            &["a", "b", "c"],
            2,
            &[(12, &[1, 2]), (5, &[3]), (1, &[2])],
        );
        let (w, log) = meek_stv(&e, TieBreakPolicy::Lexicographic);
        assert_eq!(w.members(), &[1, 2], "{:?}", log.to_json());
    }

    #[test]
    fn converged_rounds_pass_rational_recheck() {
        let e = election(
            &["a", "b", "c", "d"],
            2,
            &[(9, &[1, 2, 3]), (7, &[2, 3]), (4, &[3, 4]), (3, &[4, 1])],
        );
        let (_, log) = meek_stv(&e, TieBreakPolicy::Lexicographic);
        assert!(log.diagnostics.is_empty(), "{:?}", log.diagnostics);
    }
}
