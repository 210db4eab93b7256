//! Completion of truncated ballots: iterative frequency-proportional
//! extension with Hamilton rounding, followed by a seeded uniform-random
//! tail fill for ballots the data cannot extend.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{BallotType, Election, Frac, ModelError};

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error("negative quota at position {0}")]
    NegativeQuota(usize),
    #[error("quotas sum to {0}, not an integer")]
    NonIntegerTotal(BigRational),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Configuration for [`complete_ballots`].
#[derive(Debug, Clone)]
pub struct CompletionConfig {
    /// Extension proceeds only while the weighted count of agreeing longer
    /// ballots is at least `cutoff` times the weighted count being extended.
    pub cutoff: Frac,
    /// Seed for the uniform-random tail fill.
    pub seed: u64,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        CompletionConfig {
            cutoff: Frac::new(1, 10),
            seed: 0,
        }
    }
}

/// Hamilton (largest remainder) rounding: floors everywhere, then one extra
/// unit to each of the largest fractional parts, ties to the smaller index.
/// The quotas must sum to an integer, which the result sums to as well.
pub fn hamilton_round(quotas: &[BigRational]) -> Result<Vec<u64>, CompletionError> {
    let total: BigRational = quotas.iter().sum();
    if !total.is_integer() {
        return Err(CompletionError::NonIntegerTotal(total));
    }
    let mut floors = Vec::with_capacity(quotas.len());
    let mut remainders = Vec::with_capacity(quotas.len());
    for (i, q) in quotas.iter().enumerate() {
        if q.is_negative() {
            return Err(CompletionError::NegativeQuota(i));
        }
        let floor = q.floor();
        remainders.push((q - &floor, i));
        floors.push(floor.to_integer().to_u64().expect("quota fits in u64"));
    }
    let assigned: u64 = floors.iter().sum();
    let target = total.to_integer().to_u64().expect("total fits in u64");
    let mut leftover = target - assigned;
    // largest fractional part first, ties to the smaller index
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in remainders {
        if leftover == 0 {
            break;
        }
        floors[i] += 1;
        leftover -= 1;
    }
    Ok(floors)
}

/// Extends every ballot to a complete ranking (length at least `m - 1`).
///
/// Stage `r` distributes each group of length-`r` ballots over the observed
/// `(r+1)`-th candidates of longer ballots sharing the same ordered prefix,
/// proportionally with Hamilton rounding, provided the agreeing longer
/// ballots weigh at least `cutoff` times the group. Ballots still shorter
/// than `m - 1` afterwards get a uniformly random tail from a per-prefix
/// stream derived from the seed, so results are byte-identical for equal
/// inputs and seeds.
pub fn complete_ballots(e: &Election, config: &CompletionConfig) -> Election {
    let m = e.num_candidates();
    let mut pool: BTreeMap<Vec<usize>, u64> = e
        .ballots()
        .iter()
        .map(|b| (b.prefix.clone(), b.weight))
        .collect();

    for r in 1..=m.saturating_sub(2) {
        let level: Vec<(Vec<usize>, u64)> = pool
            .iter()
            .filter(|(seq, _)| seq.len() == r)
            .map(|(seq, w)| (seq.clone(), *w))
            .collect();
        for (seq, stock) in level {
            // frequency of each observed next candidate among longer
            // agreeing ballots
            let mut freq: BTreeMap<usize, u64> = BTreeMap::new();
            for (other, w) in pool.iter() {
                if other.len() > r && other[..r] == seq[..] {
                    *freq.entry(other[r]).or_insert(0) += w;
                }
            }
            let evidence: u64 = freq.values().sum();
            // extend only while the longer ballots are frequent enough:
            // evidence >= cutoff * stock
            let sufficient = evidence as i64 * *config.cutoff.denom()
                >= *config.cutoff.numer() * stock as i64;
            if evidence == 0 || !sufficient {
                continue;
            }
            let quotas: Vec<BigRational> = freq
                .values()
                .map(|&f| {
                    BigRational::new(
                        BigInt::from(stock) * BigInt::from(f),
                        BigInt::from(evidence),
                    )
                })
                .collect();
            let counts = hamilton_round(&quotas).expect("proportional quotas are nonnegative");
            pool.remove(&seq);
            for (&next, &count) in freq.keys().zip(&counts) {
                if count > 0 {
                    let mut extended = seq.clone();
                    extended.push(next);
                    *pool.entry(extended).or_insert(0) += count;
                }
            }
        }
    }

    // uniform-random tail fill, one deterministic stream per remaining
    // prefix so parallel callers cannot perturb results
    let incomplete: Vec<(Vec<usize>, u64)> = pool
        .iter()
        .filter(|(seq, _)| seq.len() < m - 1)
        .map(|(seq, w)| (seq.clone(), *w))
        .collect();
    for (seq, weight) in incomplete {
        pool.remove(&seq);
        let mut rng = prefix_stream(config.seed, &seq);
        for _ in 0..weight {
            let mut tail: Vec<usize> = (1..=m).filter(|c| !seq.contains(c)).collect();
            for i in (1..tail.len()).rev() {
                tail.swap(i, rng.gen_range(0..=i));
            }
            let mut full = seq.clone();
            full.extend(tail);
            *pool.entry(full).or_insert(0) += 1;
        }
    }

    let ballots = pool
        .into_iter()
        .map(|(prefix, weight)| BallotType { weight, prefix })
        .collect();
    Election::new(
        e.title.clone(),
        e.candidates().iter().map(|c| c.name.clone()).collect(),
        e.seats(),
        ballots,
    )
    .expect("completion preserves validity")
}

/// Derives the independent random stream for one ballot prefix.
fn prefix_stream(seed: u64, prefix: &[usize]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for &c in prefix {
        hasher.update((c as u32).to_le_bytes());
    }
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::write_blt;

    fn big(n: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(n: u64, d: u64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn hamilton_reference_example() {
        // counts (9, 12, 17) scaled to a stock of 10
        let quotas = vec![
            ratio(9 * 10, 38),
            ratio(12 * 10, 38),
            ratio(17 * 10, 38),
        ];
        assert_eq!(hamilton_round(&quotas).unwrap(), vec![2, 3, 5]);
    }

    #[test]
    fn hamilton_integral_and_tie_cases() {
        assert_eq!(
            hamilton_round(&[big(1), big(2), big(3)]).unwrap(),
            vec![1, 2, 3]
        );
        assert_eq!(
            hamilton_round(&[ratio(1, 2), ratio(1, 2)]).unwrap(),
            vec![1, 0]
        );
        assert!(hamilton_round(&[ratio(1, 2)]).is_err());
        assert!(hamilton_round(&[big(2) - big(5), big(3)]).is_err());
    }

    #[test]
    fn hamilton_quota_rule() {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let parts = rng.gen_range(2..6usize);
            let weights: Vec<u64> = (0..parts).map(|_| rng.gen_range(1..50)).collect();
            let total_weight: u64 = weights.iter().sum();
            let target = rng.gen_range(1..40u64);
            let quotas: Vec<BigRational> = weights
                .iter()
                .map(|&w| ratio(w * target, total_weight))
                .collect();
            let counts = hamilton_round(&quotas).unwrap();
            assert_eq!(counts.iter().sum::<u64>(), target);
            for (count, quota) in counts.iter().zip(&quotas) {
                // within one of the quota: floor(q) <= count <= ceil(q)
                assert!(big(*count) >= quota.floor() && big(*count) <= quota.ceil());
            }
        }
    }

    fn election(names: &[&str], k: usize, ballots: &[(u64, &[usize])]) -> Election {
        Election::new(
            "test",
            names.iter().map(|s| s.to_string()).collect(),
            k,
            ballots
                .iter()
                .map(|(w, p)| BallotType { weight: *w, prefix: p.to_vec() })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn reference_extension_distribution() {
        // 10 ballots [A,B,C] alongside 9 ABCD, 12 ABCE, 17 ABCF extend to
        // 2 / 3 / 5
        let e = election(
            &["A", "B", "C", "D", "E", "F"],
            2,
            &[
                (10, &[1, 2, 3]),
                (9, &[1, 2, 3, 4]),
                (12, &[1, 2, 3, 5]),
                (17, &[1, 2, 3, 6]),
            ],
        );
        let completed = complete_ballots(&e, &CompletionConfig::default());
        assert_eq!(completed.total_voters(), e.total_voters());
        // lengths 4 stopped extending (no length-5 evidence), so the split
        // is visible directly
        let weight_of = |p: &[usize]| {
            completed
                .ballots()
                .iter()
                .filter(|b| b.prefix.len() >= p.len() && b.prefix[..p.len()] == *p)
                .map(|b| b.weight)
                .sum::<u64>()
        };
        assert_eq!(weight_of(&[1, 2, 3, 4]), 9 + 2);
        assert_eq!(weight_of(&[1, 2, 3, 5]), 12 + 3);
        assert_eq!(weight_of(&[1, 2, 3, 6]), 17 + 5);
    }

    #[test]
    fn already_complete_election_is_a_fixpoint() {
        let e = election(&["a", "b", "c"], 2, &[(3, &[1, 2, 3]), (2, &[2, 1])]);
        let completed = complete_ballots(&e, &CompletionConfig::default());
        assert_eq!(completed, e);
    }

    #[test]
    fn pure_random_fill_properties() {
        // no longer ballots exist: everything is completed by the seeded
        // uniform tail
        let e = election(&["a", "b", "c", "d"], 2, &[(20, &[1]), (10, &[2])]);
        let cfg = CompletionConfig { cutoff: Frac::new(1, 10), seed: 7 };
        let completed = complete_ballots(&e, &cfg);
        assert_eq!(completed.total_voters(), 30);
        let m = completed.num_candidates();
        for b in completed.ballots() {
            assert!(b.prefix.len() >= m - 1);
            let mut sorted = b.prefix.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), b.prefix.len(), "duplicate in {:?}", b.prefix);
        }
        // original prefixes are preserved
        let starting_with_1: u64 = completed
            .ballots()
            .iter()
            .filter(|b| b.prefix[0] == 1)
            .map(|b| b.weight)
            .sum();
        assert_eq!(starting_with_1, 20);
    }

    #[test]
    fn determinism_same_seed_byte_identical() {
        let e = election(
            &["a", "b", "c", "d", "e"],
            2,
            &[(7, &[1]), (5, &[2, 3]), (3, &[4, 5, 1]), (1, &[1, 2, 3, 4])],
        );
        let cfg = CompletionConfig { cutoff: Frac::new(1, 10), seed: 42 };
        let one = write_blt(&complete_ballots(&e, &cfg));
        let two = write_blt(&complete_ballots(&e, &cfg));
        assert_eq!(one, two);
        let other_seed =
            write_blt(&complete_ballots(&e, &CompletionConfig { cutoff: Frac::new(1, 10), seed: 43 }));
        assert_ne!(one, other_seed);
    }

    #[test]
    fn random_tails_are_uniform_over_permutations() {
        // one ballot [1] in a 4-candidate election: the tail is a random
        // permutation of {2, 3, 4}; chi-square over 6 cells across seeds
        let e = election(&["a", "b", "c", "d"], 2, &[(1, &[1]), (1, &[1])]);
        let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        let trials = 3000u64;
        for seed in 0..trials {
            let cfg = CompletionConfig { cutoff: Frac::new(1, 10), seed };
            let completed = complete_ballots(&e, &cfg);
            for b in completed.ballots() {
                *counts.entry(b.prefix[1..].to_vec()).or_insert(0) += b.weight;
            }
        }
        let total: u64 = counts.values().sum();
        assert_eq!(total, 2 * trials);
        let expected = total as f64 / 6.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // upper 1% critical value for chi-square with 5 degrees of freedom
        let critical = statrs::distribution::ContinuousCDF::inverse_cdf(
            &statrs::distribution::ChiSquared::new(5.0).unwrap(),
            0.99,
        );
        assert!(counts.len() == 6 && chi2 < critical, "chi2 {chi2} >= {critical}");
    }
}
