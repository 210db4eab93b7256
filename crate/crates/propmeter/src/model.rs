//! Core election data model and shared primitives.
//!
//! Candidates are identified by 1-based indices (`1..=m`), matching the BLT
//! file format. Ballots are strict top-truncated rankings, aggregated into
//! weighted [`BallotType`]s: all algorithms in this crate operate on types,
//! since the definitions are anonymous and real data contains far fewer
//! distinct ballots than voters.

use std::collections::BTreeMap;
use std::fmt;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used for thresholds and measure values.
///
/// Numerators and denominators stay within `n * k * divisor` for everything
/// this alias is used for, so an `i64` ratio never overflows on realistic
/// inputs.
pub type Frac = Ratio<i64>;

/// Truncate a rational to three decimal places, as used in report tables.
pub fn round_3dp(x: Frac) -> f64 {
    let scaled = (x.numer() * 1000).div_euclid(*x.denom());
    scaled as f64 / 1000.0
}

/// A candidate: 1-based index plus display name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub name: String,
}

/// A weighted ballot type: `weight` identical ballots ranking `prefix` in
/// order. Unranked candidates are tied below all ranked ones.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallotType {
    pub weight: u64,
    #[serde(rename = "ranking")]
    pub prefix: Vec<usize>,
}

/// Errors raised while constructing or parsing elections.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

impl ModelError {
    pub(crate) fn parse_at(line: usize, msg: impl Into<String>) -> Self {
        ModelError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

/// An election instance: `m` candidates, committee size `k`, and weighted
/// top-truncated ballots. Immutable after construction; ballot types are kept
/// merged and sorted so structural equality doubles as semantic equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Election {
    pub title: String,
    candidates: Vec<Candidate>,
    seats: usize,
    ballots: Vec<BallotType>,
}

impl Election {
    /// Builds an election, validating every invariant and canonicalising the
    /// ballot list (identical prefixes merged, entries sorted).
    pub fn new(
        title: impl Into<String>,
        names: Vec<String>,
        seats: usize,
        ballots: Vec<BallotType>,
    ) -> Result<Self, ModelError> {
        let m = names.len();
        if m < 2 {
            return Err(ModelError::Invalid(format!(
                "need at least 2 candidates, got {m}"
            )));
        }
        if seats < 1 || seats >= m {
            return Err(ModelError::Invalid(format!(
                "committee size {seats} out of range [1, {})",
                m
            )));
        }
        if ballots.is_empty() {
            return Err(ModelError::Invalid("no ballots".into()));
        }
        let mut merged: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for b in ballots {
            if b.weight == 0 {
                return Err(ModelError::Invalid("ballot weight must be positive".into()));
            }
            if b.prefix.is_empty() {
                return Err(ModelError::Invalid("empty ballot".into()));
            }
            let mut seen = vec![false; m + 1];
            for &c in &b.prefix {
                if c == 0 || c > m {
                    return Err(ModelError::Invalid(format!(
                        "candidate index {c} out of range [1, {m}]"
                    )));
                }
                if seen[c] {
                    return Err(ModelError::Invalid(format!(
                        "candidate {c} repeated within one ballot"
                    )));
                }
                seen[c] = true;
            }
            *merged.entry(b.prefix).or_insert(0) += b.weight;
        }
        let ballots = merged
            .into_iter()
            .map(|(prefix, weight)| BallotType { weight, prefix })
            .collect();
        Ok(Election {
            title: title.into(),
            candidates: disambiguate_names(names),
            seats,
            ballots,
        })
    }

    /// Number of candidates (`m`).
    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Committee size (`k`).
    pub fn seats(&self) -> usize {
        self.seats
    }

    /// Total number of voters (`n`), the sum of all ballot weights.
    pub fn total_voters(&self) -> u64 {
        self.ballots.iter().map(|b| b.weight).sum()
    }

    /// Ballot types, merged and in canonical (lexicographic) order.
    pub fn ballots(&self) -> &[BallotType] {
        &self.ballots
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidate_name(&self, index: usize) -> &str {
        &self.candidates[index - 1].name
    }

    /// Single-seat instances are parsed but excluded from multiwinner runs.
    pub fn is_multiwinner(&self) -> bool {
        self.seats > 1
    }

    /// The rank a ballot assigns to a candidate: its 1-based position within
    /// the prefix, or `m` for every unranked candidate.
    pub fn rank_of(&self, ballot: &BallotType, candidate: usize) -> usize {
        ballot
            .prefix
            .iter()
            .position(|&c| c == candidate)
            .map(|p| p + 1)
            .unwrap_or(self.num_candidates())
    }

    /// Full rank matrix over ballot types.
    pub fn rank_matrix(&self) -> RankMatrix {
        let m = self.num_candidates();
        let rows = self
            .ballots
            .iter()
            .map(|b| {
                let mut row = vec![m as u32; m];
                for (pos, &c) in b.prefix.iter().enumerate() {
                    row[c - 1] = pos as u32 + 1;
                }
                row
            })
            .collect();
        RankMatrix { rows }
    }

    /// The Droop quota `floor(n / (k + 1)) + 1`.
    pub fn droop_quota(&self) -> u64 {
        droop_quota(self.total_voters(), self.seats)
    }
}

/// Per-type, per-candidate rank values.
///
/// `rank(i, c)` is the position of `c` within the prefix of type `i` when
/// ranked, and `m` otherwise.
pub struct RankMatrix {
    rows: Vec<Vec<u32>>,
}

impl RankMatrix {
    pub fn rank(&self, ballot_type: usize, candidate: usize) -> usize {
        self.rows[ballot_type][candidate - 1] as usize
    }

    pub fn row(&self, ballot_type: usize) -> &[u32] {
        &self.rows[ballot_type]
    }
}

/// The Droop quota `floor(n / (k + 1)) + 1`.
pub fn droop_quota(n: u64, k: usize) -> u64 {
    n / (k as u64 + 1) + 1
}

/// Names are deduplicated after whitespace trimming by appending the
/// candidate index to every member of a collision group.
fn disambiguate_names(names: Vec<String>) -> Vec<Candidate> {
    let trimmed: Vec<String> = names.iter().map(|s| s.trim().to_string()).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for name in &trimmed {
        *counts.entry(name.as_str()).or_insert(0) += 1;
    }
    trimmed
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let index = i + 1;
            let name = if counts[name.as_str()] > 1 {
                format!("{name} ({index})")
            } else {
                name.clone()
            };
            Candidate { index, name }
        })
        .collect()
}

/// A size-`k` subset of candidates; stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Committee {
    members: Vec<usize>,
}

impl Committee {
    pub fn new(
        members: impl IntoIterator<Item = usize>,
        num_candidates: usize,
    ) -> Result<Self, ModelError> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(ModelError::Invalid("committee members must be distinct".into()));
        }
        if members.is_empty() {
            return Err(ModelError::Invalid("empty committee".into()));
        }
        if members[0] == 0 || *members.last().unwrap() > num_candidates {
            return Err(ModelError::Invalid(format!(
                "committee members must lie in [1, {num_candidates}]"
            )));
        }
        Ok(Committee { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, candidate: usize) -> bool {
        self.members.binary_search(&candidate).is_ok()
    }

    /// Bitmask over candidates (bit `c - 1` set for member `c`). Panics only
    /// for indices beyond 64 candidates, far above the supported range.
    pub fn mask(&self) -> u64 {
        self.members.iter().map(|&c| 1u64 << (c - 1)).sum()
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Half the symmetric difference of two equal-size committees.
pub fn committee_distance(a: &Committee, b: &Committee) -> Result<u64, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::Invalid(format!(
            "committee size mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let shared = a.members.iter().filter(|c| b.contains(**c)).count();
    Ok((a.len() - shared) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn droop_quota_examples() {
        assert_eq!(droop_quota(5132, 3), 1284);
        assert_eq!(droop_quota(6, 2), 3);
        assert_eq!(droop_quota(3, 3), 1);
    }

    #[test]
    fn rank_of_examples() {
        let e = Election::new(
            "t",
            vec!["a".into(), "b".into(), "c".into()],
            2,
            vec![BallotType {
                weight: 1,
                prefix: vec![1, 2],
            }],
        )
        .unwrap();
        let b = &e.ballots()[0];
        assert_eq!(e.rank_of(b, 2), 2);
        assert_eq!(e.rank_of(b, 3), 3);

        let e7 = Election::new(
            "t",
            (1..=7).map(|i| format!("c{i}")).collect(),
            3,
            vec![BallotType {
                weight: 1,
                prefix: vec![3],
            }],
        )
        .unwrap();
        assert_eq!(e7.rank_of(&e7.ballots()[0], 5), 7);
    }

    #[test]
    fn committee_distance_examples() {
        let w = |v: &[usize]| Committee::new(v.iter().copied(), 6).unwrap();
        assert_eq!(committee_distance(&w(&[1, 2, 3]), &w(&[1, 2, 3])).unwrap(), 0);
        assert_eq!(committee_distance(&w(&[1, 2, 3]), &w(&[1, 2, 4])).unwrap(), 1);
        assert_eq!(committee_distance(&w(&[1, 2, 3]), &w(&[4, 5, 6])).unwrap(), 3);
        assert!(committee_distance(&w(&[1, 2]), &w(&[1, 2, 3])).is_err());
    }

    #[test]
    fn ballot_merging_and_invariants() {
        let e = Election::new(
            "t",
            vec!["a".into(), "b".into(), "c".into()],
            2,
            vec![
                BallotType { weight: 1, prefix: vec![1, 2] },
                BallotType { weight: 1, prefix: vec![1, 2] },
                BallotType { weight: 1, prefix: vec![3] },
            ],
        )
        .unwrap();
        assert_eq!(e.total_voters(), 3);
        assert_eq!(e.ballots().len(), 2);
        assert_eq!(e.ballots()[0].weight, 2);
    }

    #[test]
    fn name_collisions_get_indices() {
        let e = Election::new(
            "t",
            vec!["x ".into(), "x".into(), "y".into()],
            1,
            vec![BallotType { weight: 1, prefix: vec![1] }],
        )
        .unwrap();
        assert_eq!(e.candidate_name(1), "x (1)");
        assert_eq!(e.candidate_name(2), "x (2)");
        assert_eq!(e.candidate_name(3), "y");
    }

    #[test]
    fn round_3dp_truncates() {
        assert_eq!(round_3dp(Frac::new(2013, 5132)), 0.392);
        assert_eq!(round_3dp(Frac::new(2436, 5132)), 0.474);
        assert_eq!(round_3dp(Frac::new(3771, 5132)), 0.734);
    }
}
