//! Definition-level brute-force oracles. Everything here enumerates voter
//! groups or candidate subsets straight from the axiom statements, without
//! touching the library's threshold or interval machinery, so the fast paths
//! can be checked against an independent route.

use propmeter::model::{BallotType, Committee, Election, Frac};

/// Individual voters of an election, weights expanded away.
fn individual_ballots(e: &Election) -> Vec<&BallotType> {
    let mut out = Vec::new();
    for b in e.ballots() {
        for _ in 0..b.weight {
            out.push(b);
        }
    }
    out
}

/// Whether this ballot ranks every candidate of `set` strictly above every
/// candidate outside it (ranked candidates beat unranked ones; unranked
/// candidates are mutually tied).
fn solidly_supports(e: &Election, ballot: &BallotType, set: &[usize]) -> bool {
    let m = e.num_candidates();
    (1..=m).filter(|c| !set.contains(c)).all(|outside| {
        set.iter()
            .all(|&inside| e.rank_of(ballot, inside) < e.rank_of(ballot, outside))
    })
}

/// PSC value by enumerating every voter subset, every candidate subset it
/// solidly supports, and every demand level in [k].
pub fn psc_value_brute(e: &Election, w: &Committee) -> Frac {
    let voters = individual_ballots(e);
    let n = voters.len();
    assert!(n <= 16, "oracle is exponential in the voter count");
    let m = e.num_candidates();
    let k = e.seats();
    let mut best = Frac::new(0, 1);
    for group_bits in 1u32..(1 << n) {
        let members: Vec<&BallotType> = (0..n)
            .filter(|i| group_bits >> i & 1 == 1)
            .map(|i| voters[i])
            .collect();
        for set_bits in 1u32..(1 << m) {
            let set: Vec<usize> = (1..=m).filter(|c| set_bits >> (c - 1) & 1 == 1).collect();
            if !members.iter().all(|b| solidly_supports(e, b, &set)) {
                continue;
            }
            let in_committee = set.iter().filter(|c| w.contains(**c)).count();
            for ell in 1..=k {
                if in_committee < set.len().min(ell) {
                    // violated exactly when the group is ell_alpha-large,
                    // i.e. alpha <= |N'| k / (n ell)
                    let alpha = Frac::new(
                        members.len() as i64 * k as i64,
                        n as i64 * ell as i64,
                    );
                    best = best.max(alpha);
                }
            }
        }
    }
    best
}

/// EJR+ value by enumerating every (group, candidate, rank, ell) tuple.
pub fn ejr_plus_value_brute(e: &Election, w: &Committee) -> Frac {
    let voters = individual_ballots(e);
    let n = voters.len();
    assert!(n <= 16, "oracle is exponential in the voter count");
    let m = e.num_candidates();
    let k = e.seats();
    let mut best = Frac::new(0, 1);
    for group_bits in 1u32..(1 << n) {
        let members: Vec<&BallotType> = (0..n)
            .filter(|i| group_bits >> i & 1 == 1)
            .map(|i| voters[i])
            .collect();
        for c in (1..=m).filter(|c| !w.contains(*c)) {
            for r in 1..=m {
                // (i) everyone ranks c within r
                if !members.iter().all(|b| e.rank_of(b, c) <= r) {
                    continue;
                }
                for ell in 1..=k {
                    // (ii) everyone sees fewer than ell members at rank <= r
                    let starved = members.iter().all(|b| {
                        let seen = w
                            .members()
                            .iter()
                            .filter(|&&cw| e.rank_of(b, cw) <= r)
                            .count();
                        seen < ell
                    });
                    if starved {
                        let alpha = Frac::new(
                            members.len() as i64 * k as i64,
                            n as i64 * ell as i64,
                        );
                        best = best.max(alpha);
                    }
                }
            }
        }
    }
    best
}

/// Local-stability value by enumerating every (group, candidate) pair.
pub fn local_stability_value_brute(e: &Election, w: &Committee) -> Frac {
    let voters = individual_ballots(e);
    let n = voters.len();
    assert!(n <= 16, "oracle is exponential in the voter count");
    let m = e.num_candidates();
    let k = e.seats();
    let mut best = Frac::new(0, 1);
    for group_bits in 1u32..(1 << n) {
        let members: Vec<&BallotType> = (0..n)
            .filter(|i| group_bits >> i & 1 == 1)
            .map(|i| voters[i])
            .collect();
        for c in (1..=m).filter(|c| !w.contains(*c)) {
            let unanimous = members.iter().all(|b| {
                w.members()
                    .iter()
                    .all(|&cw| e.rank_of(b, c) < e.rank_of(b, cw))
            });
            if unanimous {
                let alpha = Frac::new(members.len() as i64 * k as i64, n as i64);
                best = best.max(alpha);
            }
        }
    }
    best
}

/// Whether the 3-Hitting-Set instance admits a hitting set of size at most
/// `h`, by subset enumeration.
pub fn has_hitting_set(universe: usize, sets: &[[usize; 3]], h: usize) -> bool {
    assert!(universe <= 20);
    (0u32..1 << universe).any(|bits| {
        bits.count_ones() as usize <= h
            && sets
                .iter()
                .all(|s| s.iter().any(|&x| bits >> (x - 1) & 1 == 1))
    })
}
