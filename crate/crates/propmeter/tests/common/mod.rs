//! Shared helpers for integration tests: the Midlothian coalition fixture,
//! random election generators, and definition-level brute-force oracles that
//! stay independent of the library's computation paths.

#![allow(dead_code)]

pub mod oracles;

use propmeter::coalitions::SolidCoalition;
use propmeter::model::{BallotType, Election, Frac};
use rand::Rng;
use serde::Deserialize;

#[derive(Deserialize)]
pub struct FixtureCandidate {
    pub index: usize,
    pub letter: String,
    pub name: String,
    pub short: String,
    pub first_place: u64,
}

#[derive(Deserialize)]
pub struct Fixture {
    pub title: String,
    pub n: u64,
    pub m: usize,
    pub k: usize,
    pub candidates: Vec<FixtureCandidate>,
    pub coalitions: Vec<FixtureCoalition>,
}

#[derive(Deserialize)]
pub struct FixtureCoalition {
    pub set: Vec<usize>,
    pub support: u64,
}

impl Fixture {
    pub fn coalition_list(&self) -> Vec<SolidCoalition> {
        self.coalitions
            .iter()
            .map(|c| SolidCoalition {
                candidates: c.set.clone(),
                support: c.support,
            })
            .collect()
    }

    /// Candidate index for a short label like "DM".
    pub fn index_of(&self, short: &str) -> usize {
        self.candidates
            .iter()
            .find(|c| c.short == short)
            .map(|c| c.index)
            .unwrap_or_else(|| panic!("unknown candidate {short}"))
    }
}

pub fn midlothian() -> Fixture {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/testdata/midlothian_2012_ward2.json"
    );
    let text = std::fs::read_to_string(path).expect("fixture present");
    serde_json::from_str(&text).expect("fixture parses")
}

pub fn election(names_count: usize, k: usize, ballots: &[(u64, &[usize])]) -> Election {
    Election::new(
        "test",
        (1..=names_count).map(|i| format!("c{i}")).collect(),
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

/// Random election with top-truncated strict ballots, one ballot per voter.
pub fn random_election(rng: &mut impl Rng, max_m: usize, max_k: usize, max_n: u64) -> Election {
    let m = rng.gen_range(2..=max_m.max(2));
    let k = rng.gen_range(1..m).min(max_k);
    let n = rng.gen_range(1..=max_n);
    random_election_sized(rng, m, k, n)
}

/// Random election with at least `k * (k + 1)` voters. Below that size a
/// single voter can be 2-large relative to n/k while holding less than a
/// Droop quota, and the STV proportionality guarantee genuinely does not
/// apply; real elections sit far above the bound.
pub fn random_quota_sized_election(
    rng: &mut impl Rng,
    max_m: usize,
    max_k: usize,
    max_n: u64,
) -> Election {
    let m = rng.gen_range(2..=max_m.max(2));
    let k = rng.gen_range(1..m).min(max_k);
    let floor = (k * (k + 1)) as u64;
    let n = rng.gen_range(floor..=max_n.max(floor));
    random_election_sized(rng, m, k, n)
}

fn random_election_sized(rng: &mut impl Rng, m: usize, k: usize, n: u64) -> Election {
    let ballots = (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=m);
            BallotType {
                weight: 1,
                prefix: random_prefix(rng, m, len),
            }
        })
        .collect();
    Election::new(
        "random",
        (1..=m).map(|i| format!("c{i}")).collect(),
        k,
        ballots,
    )
    .unwrap()
}

/// Random election in which every ballot ranks all m candidates.
pub fn random_complete_election(
    rng: &mut impl Rng,
    max_m: usize,
    max_k: usize,
    max_n: u64,
) -> Election {
    let m = rng.gen_range(2..=max_m.max(2));
    let k = rng.gen_range(1..m).min(max_k);
    let n = rng.gen_range(1..=max_n);
    let ballots = (0..n)
        .map(|_| BallotType {
            weight: 1,
            prefix: random_prefix(rng, m, m),
        })
        .collect();
    Election::new(
        "random-complete",
        (1..=m).map(|i| format!("c{i}")).collect(),
        k,
        ballots,
    )
    .unwrap()
}

pub fn random_prefix(rng: &mut impl Rng, m: usize, len: usize) -> Vec<usize> {
    let mut cands: Vec<usize> = (1..=m).collect();
    for i in (1..cands.len()).rev() {
        cands.swap(i, rng.gen_range(0..=i));
    }
    cands.truncate(len);
    cands
}

/// Random committee of the election's size.
pub fn random_committee(rng: &mut impl Rng, e: &Election) -> propmeter::model::Committee {
    let members = random_prefix(rng, e.num_candidates(), e.seats());
    propmeter::model::Committee::new(members, e.num_candidates()).unwrap()
}

pub fn frac(n: i64, d: i64) -> Frac {
    Frac::new(n, d)
}
