//! SNTV, single-winner instant-runoff voting, and sequential RCV.

use std::collections::HashSet;

use num::{BigInt, BigRational};

use crate::model::{Committee, Election};
use crate::rules::{RoundAction, RoundLog, TieBreakPolicy, TieBreaker};

/// SNTV: the `k` candidates with the highest first-place weight, boundary
/// ties resolved by the policy.
pub fn sntv(e: &Election, tiebreak: TieBreakPolicy) -> Committee {
    let m = e.num_candidates();
    let mut first_place = vec![0u64; m + 1];
    for b in e.ballots() {
        first_place[b.prefix[0]] += b.weight;
    }
    let mut breaker = tiebreak.breaker();
    let mut chosen: Vec<usize> = Vec::with_capacity(e.seats());
    let mut remaining: Vec<usize> = (1..=m).collect();
    while chosen.len() < e.seats() {
        let top = remaining.iter().map(|&c| first_place[c]).max().unwrap();
        let tied: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&c| first_place[c] == top)
            .collect();
        let pick = breaker.pick(&tied);
        chosen.push(pick);
        remaining.retain(|&c| c != pick);
    }
    Committee::new(chosen, m).expect("k distinct candidates chosen")
}

/// Single-winner IRV: repeatedly eliminates the candidate with the fewest
/// first-place votes among continuing candidates (ballots skip removed
/// candidates, exhausted ballots count for nobody) until one remains.
pub fn irv(e: &Election, tiebreak: TieBreakPolicy) -> (usize, RoundLog) {
    let mut breaker = tiebreak.breaker();
    let mut log = RoundLog::default();
    let winner = irv_run(e, &HashSet::new(), &mut breaker, &mut log);
    (winner, log)
}

fn irv_run(
    e: &Election,
    removed: &HashSet<usize>,
    breaker: &mut TieBreaker,
    log: &mut RoundLog,
) -> usize {
    let m = e.num_candidates();
    let mut continuing: Vec<usize> = (1..=m).filter(|c| !removed.contains(c)).collect();
    while continuing.len() > 1 {
        let mut tallies = vec![0u64; m + 1];
        for b in e.ballots() {
            if let Some(&c) = b.prefix.iter().find(|c| continuing.contains(c)) {
                tallies[c] += b.weight;
            }
        }
        let fewest = continuing.iter().map(|&c| tallies[c]).min().unwrap();
        let tied: Vec<usize> = continuing
            .iter()
            .copied()
            .filter(|&c| tallies[c] == fewest)
            .collect();
        let loser = breaker.pick(&tied);
        log.push(
            RoundAction::Eliminate { candidate: loser },
            continuing
                .iter()
                .map(|&c| (c, BigRational::from_integer(BigInt::from(tallies[c]))))
                .collect(),
            None,
            None,
        );
        continuing.retain(|&c| c != loser);
    }
    continuing[0]
}

/// Sequential RCV: runs IRV, permanently removes the winner from every
/// ballot, and repeats `k` times.
pub fn seq_rcv(e: &Election, tiebreak: TieBreakPolicy) -> (Committee, RoundLog) {
    let mut breaker = tiebreak.breaker();
    let mut log = RoundLog::default();
    let mut removed: HashSet<usize> = HashSet::new();
    let mut committee: Vec<usize> = Vec::new();
    for _ in 0..e.seats() {
        let winner = irv_run(e, &removed, &mut breaker, &mut log);
        log.push(RoundAction::Elect { candidate: winner }, Vec::new(), None, None);
        removed.insert(winner);
        committee.push(winner);
    }
    committee.sort_unstable();
    let committee = Committee::new(committee, e.num_candidates()).expect("k distinct winners");
    (committee, log)
}
