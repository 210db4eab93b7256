//! Instance-level optimisation: the exact feasibility kernel for PSC
//! constraint systems, threshold descent for the instance-optimal PSC value,
//! brute-force optima for the other measures, the hardness-instance
//! generator, and apportionment over non-disjoint coalitions.

use num::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coalitions::{self, DivisorMethod, SolidCoalition, ThresholdConstraint};
use crate::measures::{MeasureContext, MeasureId, PriceMode, PricePath};
use crate::model::{Committee, Election, Frac, ModelError};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("enumeration over {combinations} committees exceeds the cap of {cap}")]
    EnumerationCapExceeded { combinations: u128, cap: u64 },
    #[error("feasibility kernel supports at most 64 candidates, got {0}")]
    TooManyCandidates(usize),
    #[error("malformed hitting-set input: {0}")]
    MalformedSets(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Default cap on brute-force committee enumeration. The Scottish corpus
/// tops out at C(14, 4) = 1001 committees, far below it.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
    }
    result
}

/// Iterates over all size-`k` subsets of `1..=m` in lexicographic order.
pub fn committees(m: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= m {
        Some((1..=k).collect())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let result = current.clone()?;
        let cur = current.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if cur[i] < m - (k - 1 - i) {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(result)
    })
}

/// A collection of demands `|W ∩ C'| >= ell` over committees of size `k`.
///
/// Supports incremental pushes and exact feasibility queries, answered by
/// branch and bound over candidate inclusion with constraint propagation and
/// a disjoint-packing lower bound.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    num_candidates: usize,
    k: usize,
    constraints: Vec<(u64, u32)>,
}

impl ConstraintSystem {
    pub fn new(num_candidates: usize, k: usize) -> Result<Self, OptimizerError> {
        if num_candidates > 64 {
            return Err(OptimizerError::TooManyCandidates(num_candidates));
        }
        Ok(ConstraintSystem {
            num_candidates,
            k,
            constraints: Vec::new(),
        })
    }

    pub fn push(&mut self, candidates: &[usize], ell: usize) {
        let mask = candidates.iter().fold(0u64, |acc, &c| acc | 1 << (c - 1));
        self.constraints.push((mask, ell as u32));
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Exact feasibility: is there a committee of size `k` meeting every
    /// demand? Returns some witness committee if so.
    pub fn feasible(&self) -> Option<Committee> {
        self.feasible_prefix(self.constraints.len())
    }

    /// Feasibility over the first `len` pushed constraints only.
    pub fn feasible_prefix(&self, len: usize) -> Option<Committee> {
        Searcher::new(self.num_candidates, self.k, &self.constraints[..len])
            .search(0, 0, 0)
            .map(|mask| self.committee_from_mask(mask))
    }

    fn feasible_masked(&self, len: usize, included: u64, excluded: u64) -> Option<u64> {
        let count = included.count_ones();
        if count > self.k as u32 {
            return None;
        }
        Searcher::new(self.num_candidates, self.k, &self.constraints[..len])
            .search(included, count, excluded)
    }

    /// The lexicographically smallest feasible committee, if any.
    pub fn lex_min_witness(&self) -> Option<Committee> {
        self.lex_min_witness_prefix(self.constraints.len())
    }

    pub fn lex_min_witness_prefix(&self, len: usize) -> Option<Committee> {
        self.feasible_prefix(len)?;
        let mut included = 0u64;
        let mut excluded = 0u64;
        let mut count = 0usize;
        for c in 1..=self.num_candidates {
            if count == self.k {
                break;
            }
            let bit = 1u64 << (c - 1);
            if self.feasible_masked(len, included | bit, excluded).is_some() {
                included |= bit;
                count += 1;
            } else {
                excluded |= bit;
            }
        }
        debug_assert_eq!(count, self.k);
        Some(self.committee_from_mask(included))
    }

    fn committee_from_mask(&self, mask: u64) -> Committee {
        let members = (1..=self.num_candidates).filter(|c| mask >> (c - 1) & 1 == 1);
        Committee::new(members, self.num_candidates).expect("search returns valid committees")
    }
}

/// Branch-and-bound state shared across one feasibility query.
struct Searcher {
    k: u32,
    all_mask: u64,
    constraints: Vec<(u64, u32)>,
}

impl Searcher {
    fn new(num_candidates: usize, k: usize, raw: &[(u64, u32)]) -> Self {
        // Deduplicate by candidate set keeping the strongest demand, then
        // drop demands implied by a subset with an equal or larger demand.
        let mut sorted: Vec<(u64, u32)> = raw.to_vec();
        sorted.sort_unstable();
        sorted.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 = prev.1.max(next.1);
                true
            } else {
                false
            }
        });
        let mut constraints: Vec<(u64, u32)> = Vec::with_capacity(sorted.len());
        for &(mask, need) in &sorted {
            if need == 0 {
                continue;
            }
            let dominated = sorted.iter().any(|&(other, other_need)| {
                other != mask && other & mask == other && other_need >= need
            });
            if !dominated {
                constraints.push((mask, need));
            }
        }
        Searcher {
            k: k as u32,
            all_mask: if num_candidates == 64 {
                u64::MAX
            } else {
                (1u64 << num_candidates) - 1
            },
            constraints,
        }
    }

    /// Returns a mask of a satisfying committee of exactly `k` members, or
    /// None. `included`/`excluded` are prior decisions.
    fn search(&self, mut included: u64, mut count: u32, excluded: u64) -> Option<u64> {
        if count > self.k {
            return None;
        }
        // constraint propagation: force inclusions whenever a demand has no
        // slack left among its undecided candidates
        loop {
            let mut changed = false;
            for &(mask, need) in &self.constraints {
                let have = (mask & included).count_ones();
                if have >= need {
                    continue;
                }
                let avail = mask & !included & !excluded;
                let deficit = need - have;
                let avail_count = avail.count_ones();
                if deficit > avail_count {
                    return None;
                }
                if deficit == avail_count {
                    included |= avail;
                    count = included.count_ones();
                    if count > self.k {
                        return None;
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut unsat: Vec<(u64, u32)> = Vec::new();
        for &(mask, need) in &self.constraints {
            let have = (mask & included).count_ones();
            if have < need {
                unsat.push((mask & !included & !excluded, need - have));
            }
        }
        if unsat.is_empty() {
            // pad with the smallest candidates not yet included up to k
            let mut pad = included;
            let mut c = 0;
            while pad.count_ones() < self.k {
                if pad >> c & 1 == 0 && self.all_mask >> c & 1 == 1 {
                    pad |= 1 << c;
                }
                c += 1;
            }
            return Some(pad);
        }

        // admissible lower bound: demands over pairwise disjoint pools need
        // distinct candidates
        unsat.sort_unstable_by_key(|&(pool, _)| pool.count_ones());
        let mut used = 0u64;
        let mut bound = 0u32;
        for &(pool, deficit) in &unsat {
            if pool & used == 0 {
                used |= pool;
                bound += deficit;
            }
        }
        if count + bound > self.k {
            return None;
        }

        // branch on the candidate of the tightest demand that appears in the
        // most unsatisfied demands; include first
        let (pool, _) = unsat[0];
        let mut best_c = pool.trailing_zeros();
        let mut best_hits = 0u32;
        let mut bits = pool;
        while bits != 0 {
            let c = bits.trailing_zeros();
            let bit = 1u64 << c;
            let hits = unsat.iter().filter(|&&(p, _)| p & bit != 0).count() as u32;
            if hits > best_hits {
                best_hits = hits;
                best_c = c;
            }
            bits &= bits - 1;
        }
        let bit = 1u64 << best_c;
        if let Some(w) = self.search(included | bit, count + 1, excluded) {
            return Some(w);
        }
        self.search(included, count, excluded | bit)
    }
}

/// How an instance optimum was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OptMethod {
    Descent,
    BruteForce,
}

/// One step of the threshold descent: the active constraint count after
/// pushing a threshold batch and whether the system stayed feasible.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub threshold: Frac,
    pub active_constraints: usize,
    pub feasible: bool,
}

/// Instance-optimal value report.
#[derive(Debug, Clone, Serialize)]
pub struct OptReport {
    pub measure: MeasureId,
    pub alpha: Frac,
    pub witness: Committee,
    pub method: OptMethod,
    pub trace: Vec<TraceStep>,
}

/// The instance-optimal PSC value: descend the threshold list pushing each
/// constraint batch and querying the feasibility kernel; the optimum is the
/// largest threshold whose batch makes the system infeasible (0 if none
/// does), and the witness is the lexicographically smallest committee
/// feasible for everything above it.
pub fn optimal_psc(e: &Election) -> Result<OptReport, OptimizerError> {
    let coalitions = coalitions::maximal_solid_coalitions(e);
    let thresholds = coalitions::threshold_set(
        &coalitions,
        e.total_voters(),
        e.seats(),
        DivisorMethod::DHondt,
    );
    optimal_psc_from_thresholds(e.num_candidates(), e.seats(), &thresholds)
}

/// Descent over an explicit threshold list (sorted non-increasing).
pub fn optimal_psc_from_thresholds(
    num_candidates: usize,
    k: usize,
    thresholds: &[ThresholdConstraint],
) -> Result<OptReport, OptimizerError> {
    let mut system = ConstraintSystem::new(num_candidates, k)?;
    let mut trace = Vec::new();
    let mut idx = 0;
    while idx < thresholds.len() {
        let threshold = thresholds[idx].threshold;
        let before = system.len();
        // equal thresholds are pushed as a batch before re-querying
        while idx < thresholds.len() && thresholds[idx].threshold == threshold {
            system.push(&thresholds[idx].candidates, thresholds[idx].ell);
            idx += 1;
        }
        let feasible = system.feasible().is_some();
        trace.push(TraceStep {
            threshold,
            active_constraints: system.len(),
            feasible,
        });
        if !feasible {
            let witness = system
                .lex_min_witness_prefix(before)
                .expect("prefix was feasible at the previous step");
            return Ok(OptReport {
                measure: MeasureId::Psc,
                alpha: threshold,
                witness,
                method: OptMethod::Descent,
                trace,
            });
        }
    }
    let witness = system
        .lex_min_witness()
        .expect("a fully satisfiable system is feasible");
    Ok(OptReport {
        measure: MeasureId::Psc,
        alpha: Frac::zero(),
        witness,
        method: OptMethod::Descent,
        trace,
    })
}

/// Whether alpha-PSC is satisfiable for the instance at a given alpha; the
/// active demands are exactly the threshold constraints with threshold >=
/// alpha.
pub fn alpha_psc_feasible(e: &Election, alpha: Frac) -> Result<Option<Committee>, OptimizerError> {
    let coalitions = coalitions::maximal_solid_coalitions(e);
    let thresholds = coalitions::threshold_set(
        &coalitions,
        e.total_voters(),
        e.seats(),
        DivisorMethod::DHondt,
    );
    let mut system = ConstraintSystem::new(e.num_candidates(), e.seats())?;
    for t in thresholds.iter().filter(|t| t.threshold >= alpha) {
        system.push(&t.candidates, t.ell);
    }
    Ok(system.feasible())
}

/// Instance optimum by full enumeration: the minimum committee value over
/// all C(m, k) committees, with the lexicographically smallest argmin as
/// witness. The only exact method for EJR+, local stability and
/// priceability; also the oracle for the PSC descent.
pub fn optimal_bruteforce(
    e: &Election,
    measure: MeasureId,
    cap: u64,
) -> Result<OptReport, OptimizerError> {
    let combinations = binomial(e.num_candidates(), e.seats());
    if combinations > cap as u128 {
        return Err(OptimizerError::EnumerationCapExceeded { combinations, cap });
    }
    let ctx = MeasureContext::new(e);
    let evaluate = |members: Vec<usize>| -> (Frac, Committee) {
        let w = Committee::new(members, e.num_candidates()).unwrap();
        let value = ctx.value(&w, measure, PriceMode::default(), PricePath::Auto);
        (value, w)
    };
    let keep_smaller = |a: (Frac, Committee), b: (Frac, Committee)| if b.0 < a.0 { b } else { a };
    let best = if measure == MeasureId::Priceability {
        // priceability needs one LP per committee; spread the solves
        let all: Vec<Vec<usize>> = committees(e.num_candidates(), e.seats()).collect();
        all.into_par_iter().map(evaluate).reduce_with(keep_smaller)
    } else {
        committees(e.num_candidates(), e.seats())
            .map(evaluate)
            .reduce(keep_smaller)
    };
    let (alpha, witness) = best.expect("k < m implies at least one committee");
    Ok(OptReport {
        measure,
        alpha,
        witness,
        method: OptMethod::BruteForce,
        trace: Vec::new(),
    })
}

/// Builds the election of the 3-Hitting-Set reduction: candidates are the
/// universe plus one dummy per set, two voters per set ranking the dummy
/// first, committee size `h + j`. Alpha-PSC is satisfiable at the returned
/// alpha exactly when the source instance has a hitting set of size `h`.
pub fn hitting_set_instance(
    universe: usize,
    sets: &[[usize; 3]],
    h: usize,
) -> Result<(Election, Frac), OptimizerError> {
    let j = sets.len();
    if j == 0 {
        return Err(OptimizerError::MalformedSets("no sets given".into()));
    }
    // h = j is allowed and yields alpha = 1, i.e. plain PSC
    if h > j {
        return Err(OptimizerError::MalformedSets(format!(
            "need h <= number of sets, got h = {h}, j = {j}"
        )));
    }
    if h >= universe {
        return Err(OptimizerError::MalformedSets(format!(
            "need h < universe size, got h = {h}, |S| = {universe}"
        )));
    }
    for (i, s) in sets.iter().enumerate() {
        if s.iter().any(|&x| x == 0 || x > universe) {
            return Err(OptimizerError::MalformedSets(format!(
                "set {} has elements outside [1, {universe}]",
                i + 1
            )));
        }
        if s[0] == s[1] || s[0] == s[2] || s[1] == s[2] {
            return Err(OptimizerError::MalformedSets(format!(
                "set {} has repeated elements",
                i + 1
            )));
        }
    }

    let mut names: Vec<String> = (1..=universe).map(|i| format!("s{i}")).collect();
    names.extend((1..=j).map(|i| format!("d{i}")));
    let ballots = sets
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let dummy = universe + i + 1;
            [
                crate::model::BallotType {
                    weight: 1,
                    prefix: vec![dummy, s[0], s[1], s[2]],
                },
                crate::model::BallotType {
                    weight: 1,
                    prefix: vec![dummy, s[1], s[2], s[0]],
                },
            ]
        })
        .collect();
    let k = h + j;
    let n = 2 * j;
    let election = Election::new("3-hitting-set reduction", names, k, ballots)?;
    Ok((election, Frac::new(k as i64, n as i64)))
}

/// One representation guarantee of the apportionment view: the demand
/// `|W ∩ candidates| >= ell`, ordered by the quotient `support / d_ell`.
#[derive(Debug, Clone, Serialize)]
pub struct Guarantee {
    pub candidates: Vec<usize>,
    pub ell: usize,
    pub support: u64,
    pub quotient: Frac,
    pub threshold: Frac,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApportionTrace {
    pub accepted: Vec<Guarantee>,
    /// First guarantee whose addition makes the collection infeasible, when
    /// the iteration stopped early.
    pub blocking: Option<Guarantee>,
}

/// Divisor-method apportionment over non-disjoint coalitions: guarantees are
/// handed out in non-increasing quotient order until adding one would make
/// the demand collection infeasible.
pub fn apportion_nondisjoint(
    coalitions: &[SolidCoalition],
    num_candidates: usize,
    n: u64,
    k: usize,
    divisors: DivisorMethod,
) -> Result<ApportionTrace, OptimizerError> {
    let mut guarantees: Vec<Guarantee> = Vec::new();
    for c in coalitions {
        for ell in 1..=c.candidates.len().min(k) {
            let d = divisors.divisor(ell) as i64;
            guarantees.push(Guarantee {
                candidates: c.candidates.clone(),
                ell,
                support: c.support,
                quotient: Frac::new(c.support as i64, d),
                threshold: Frac::new(c.support as i64 * k as i64, n as i64 * d),
            });
        }
    }
    guarantees.sort_by(|a, b| {
        b.quotient
            .cmp(&a.quotient)
            .then_with(|| b.support.cmp(&a.support))
            .then_with(|| a.candidates.cmp(&b.candidates))
            .then_with(|| a.ell.cmp(&b.ell))
    });

    let mut system = ConstraintSystem::new(num_candidates, k)?;
    let mut accepted = Vec::new();
    for g in guarantees {
        system.push(&g.candidates, g.ell);
        if system.feasible().is_none() {
            return Ok(ApportionTrace {
                accepted,
                blocking: Some(g),
            });
        }
        accepted.push(g);
    }
    Ok(ApportionTrace {
        accepted,
        blocking: None,
    })
}

/// Plain divisor-method apportionment over disjoint party vote totals; the
/// oracle the non-disjoint variant is compared against.
pub fn divisor_apportionment(votes: &[u64], k: usize, divisors: DivisorMethod) -> Vec<usize> {
    let mut seats = vec![0usize; votes.len()];
    for _ in 0..k {
        let best = (0..votes.len())
            .max_by(|&a, &b| {
                let qa = Frac::new(votes[a] as i64, divisors.divisor(seats[a] + 1) as i64);
                let qb = Frac::new(votes[b] as i64, divisors.divisor(seats[b] + 1) as i64);
                qa.cmp(&qb).then(b.cmp(&a))
            })
            .expect("at least one party");
        seats[best] += 1;
    }
    seats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BallotType;

    #[test]
    fn feasible_direct_examples() {
        let mut s = ConstraintSystem::new(5, 3).unwrap();
        s.push(&[1, 2], 2);
        s.push(&[3], 1);
        let w = s.feasible().unwrap();
        assert_eq!(w.members(), &[1, 2, 3]);

        let mut s = ConstraintSystem::new(5, 4).unwrap();
        s.push(&[1, 2], 2);
        s.push(&[3, 4], 2);
        s.push(&[5], 1);
        assert!(s.feasible().is_none());
    }

    #[test]
    fn feasible_agrees_with_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let m = rng.gen_range(3..=10usize);
            let k = rng.gen_range(1..m);
            let mut system = ConstraintSystem::new(m, k).unwrap();
            for _ in 0..rng.gen_range(1..=6) {
                let size = rng.gen_range(1..=m);
                let mut cands: Vec<usize> = (1..=m).collect();
                for i in (1..cands.len()).rev() {
                    cands.swap(i, rng.gen_range(0..=i));
                }
                cands.truncate(size);
                let ell = rng.gen_range(1..=size.min(k));
                system.push(&cands, ell);
            }
            let expected = committees(m, k).any(|members| {
                let w_mask = members.iter().fold(0u64, |a, &c| a | 1 << (c - 1));
                system
                    .constraints
                    .iter()
                    .all(|&(mask, need)| (mask & w_mask).count_ones() >= need)
            });
            let got = system.feasible();
            assert_eq!(got.is_some(), expected, "m={m} k={k} {:?}", system.constraints);
            if let Some(w) = got {
                let w_mask = w.mask();
                assert!(system
                    .constraints
                    .iter()
                    .all(|&(mask, need)| (mask & w_mask).count_ones() >= need));
                assert_eq!(w.len(), k);
            }
        }
    }

    #[test]
    fn lex_min_witness_is_smallest() {
        // {1, 9} covers both demands through 9 and beats {2, 3} lexicographically
        let mut s = ConstraintSystem::new(9, 2).unwrap();
        s.push(&[2, 9], 1);
        s.push(&[3, 9], 1);
        let w = s.lex_min_witness().unwrap();
        assert_eq!(w.members(), &[1, 9]);

        let mut s = ConstraintSystem::new(9, 2).unwrap();
        s.push(&[5], 1);
        assert_eq!(s.lex_min_witness().unwrap().members(), &[1, 5]);

        // forcing 2 and 3 through tight demands pushes 1 out
        let mut s = ConstraintSystem::new(9, 2).unwrap();
        s.push(&[2], 1);
        s.push(&[3], 1);
        assert_eq!(s.lex_min_witness().unwrap().members(), &[2, 3]);
    }

    #[test]
    fn pigeonhole_equal_thresholds() {
        // k + 1 singletons with equal support force infeasibility exactly at
        // the shared threshold
        let e = Election::new(
            "pigeonhole",
            (1..=4).map(|i| format!("c{i}")).collect(),
            3,
            (1..=4)
                .map(|c| BallotType { weight: 5, prefix: vec![c] })
                .collect(),
        )
        .unwrap();
        let report = optimal_psc(&e).unwrap();
        // each singleton: threshold 5 * 3 / 20 = 3/4
        assert_eq!(report.alpha, Frac::new(3, 4));
        assert_eq!(report.witness.members(), &[1, 2, 3]);
    }

    #[test]
    fn all_feasible_gives_zero() {
        let e = Election::new(
            "single",
            vec!["a".into(), "b".into()],
            1,
            vec![BallotType { weight: 4, prefix: vec![1] }],
        )
        .unwrap();
        let report = optimal_psc(&e).unwrap();
        assert_eq!(report.alpha, Frac::zero());
        assert_eq!(report.witness.members(), &[1]);
    }

    #[test]
    fn descent_trace_is_upward_closed() {
        let e = Election::new(
            "trace",
            (1..=5).map(|i| format!("c{i}")).collect(),
            2,
            vec![
                BallotType { weight: 4, prefix: vec![1] },
                BallotType { weight: 3, prefix: vec![2] },
                BallotType { weight: 2, prefix: vec![3] },
                BallotType { weight: 2, prefix: vec![4, 5] },
            ],
        )
        .unwrap();
        let report = optimal_psc(&e).unwrap();
        // feasibility flags form a prefix of trues followed by at most one false
        let flags: Vec<bool> = report.trace.iter().map(|t| t.feasible).collect();
        let first_false = flags.iter().position(|f| !f).unwrap_or(flags.len());
        assert!(flags[..first_false].iter().all(|&f| f));
        assert!(flags[first_false..].iter().all(|&f| !f));
    }

    #[test]
    fn hitting_set_generator_shape() {
        let (e, alpha) = hitting_set_instance(3, &[[1, 2, 3]], 1).unwrap();
        assert_eq!(e.total_voters(), 2);
        assert_eq!(e.seats(), 2);
        assert_eq!(alpha, Frac::new(1, 1));
        // feasible at alpha = 1: pick d_1 plus any universe element
        assert!(alpha_psc_feasible(&e, alpha).unwrap().is_some());
    }

    #[test]
    fn hitting_set_disjoint_sets_infeasible() {
        // two disjoint sets with h = 1 cannot be hit by one element
        let (e, alpha) = hitting_set_instance(6, &[[1, 2, 3], [4, 5, 6]], 1).unwrap();
        assert!(alpha_psc_feasible(&e, alpha).unwrap().is_none());
    }

    #[test]
    fn hitting_set_rejects_malformed() {
        assert!(hitting_set_instance(3, &[[1, 1, 2]], 0).is_err());
        assert!(hitting_set_instance(3, &[[1, 2, 4]], 0).is_err());
        assert!(hitting_set_instance(3, &[[1, 2, 3]], 2).is_err()); // h > j
        assert!(hitting_set_instance(3, &[[1, 2, 3]; 4], 3).is_err()); // h >= |S|
    }

    #[test]
    fn apportion_matches_direct_method_on_disjoint_parties() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for method in [DivisorMethod::DHondt, DivisorMethod::SainteLague] {
            for _ in 0..50 {
                let parties = rng.gen_range(2..=4usize);
                let k = rng.gen_range(1..=5usize);
                // each party fields k candidates so the deservingness cap
                // never binds, as in a classic closed list
                let votes: Vec<u64> = (0..parties).map(|_| rng.gen_range(1..=1000)).collect();
                let n: u64 = votes.iter().sum();
                let coalitions: Vec<SolidCoalition> = votes
                    .iter()
                    .enumerate()
                    .map(|(p, &v)| SolidCoalition {
                        candidates: (p * k + 1..=(p + 1) * k).collect(),
                        support: v,
                    })
                    .collect();
                let m = parties * k;
                let trace = apportion_nondisjoint(&coalitions, m, n, k, method).unwrap();
                let mut got = vec![0usize; parties];
                for g in &trace.accepted {
                    let party = (g.candidates[0] - 1) / k;
                    got[party] = got[party].max(g.ell);
                }
                let expected = divisor_apportionment(&votes, k, method);
                assert_eq!(got, expected, "votes {votes:?} k {k} method {method:?}");
            }
        }
    }

    #[test]
    fn committee_iterator_counts() {
        assert_eq!(committees(7, 3).count(), 35);
        assert_eq!(binomial(14, 4), 1001);
        let all: Vec<_> = committees(4, 2).collect();
        assert_eq!(all[0], vec![1, 2]);
        assert_eq!(all.last().unwrap(), &vec![3, 4]);
    }
}
