//! Per-committee proportionality measures: the alpha values for PSC, EJR+,
//! local stability and priceability, the satisfaction predicates behind
//! them, and the whole-committee census.
//!
//! Every measure reports the largest parameter at which the committee still
//! violates the parameterised axiom (0 when nothing is violated); the
//! committee satisfies the plain axiom exactly when its value is below 1.

pub mod price;

use num::Zero;
use serde::Serialize;

use crate::coalitions::{self, DivisorMethod, ThresholdConstraint};
use crate::model::{Committee, Election, Frac};
use crate::optimizer::{binomial, committees, OptimizerError};
pub use price::{PriceMode, PricePath, PriceReport, PriceSystem};

/// The four measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MeasureId {
    Psc,
    EjrPlus,
    LocalStability,
    Priceability,
}

impl MeasureId {
    pub const ALL: [MeasureId; 4] = [
        MeasureId::Psc,
        MeasureId::EjrPlus,
        MeasureId::LocalStability,
        MeasureId::Priceability,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MeasureId::Psc => "psc",
            MeasureId::EjrPlus => "ejr",
            MeasureId::LocalStability => "ls",
            MeasureId::Priceability => "price",
        }
    }
}

impl std::str::FromStr for MeasureId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psc" => Ok(MeasureId::Psc),
            "ejr" => Ok(MeasureId::EjrPlus),
            "ls" => Ok(MeasureId::LocalStability),
            "price" => Ok(MeasureId::Priceability),
            other => Err(format!("unknown measure {other:?}")),
        }
    }
}

/// The coalition whose demand sets a committee's PSC value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PscWitness {
    pub candidates: Vec<usize>,
    pub ell: usize,
    pub support: u64,
}

/// The (candidate, rank, ell) triple maximising the EJR+ group value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EjrWitness {
    pub candidate: usize,
    pub rank: usize,
    pub ell: usize,
    pub group_weight: u64,
}

/// The unelected candidate maximising the local-stability group value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LsWitness {
    pub candidate: usize,
    pub group_weight: u64,
}

/// All four measure values for one committee.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub committee: Committee,
    pub psc_alpha: Frac,
    pub psc_witness: Option<PscWitness>,
    pub ejr_alpha: Frac,
    pub ejr_witness: Option<EjrWitness>,
    pub ls_alpha: Frac,
    pub ls_witness: Option<LsWitness>,
    pub price_alpha: Frac,
    /// The minimal price itself; `price_alpha = price * k / n`.
    pub price: Frac,
    pub price_exact: bool,
}

/// Election-derived data shared across committee evaluations: the sorted
/// threshold constraints with bitmasks, per-type candidate ranks, weights.
pub struct MeasureContext<'e> {
    pub election: &'e Election,
    pub thresholds: Vec<ThresholdConstraint>,
    threshold_masks: Vec<u64>,
    /// rank(i, c) per ballot type, `m` for unranked candidates.
    ranks: Vec<Vec<u32>>,
    weights: Vec<u64>,
}

impl<'e> MeasureContext<'e> {
    pub fn new(election: &'e Election) -> Self {
        let coalitions = coalitions::maximal_solid_coalitions(election);
        let thresholds = coalitions::threshold_set(
            &coalitions,
            election.total_voters(),
            election.seats(),
            DivisorMethod::DHondt,
        );
        Self::with_thresholds(election, thresholds)
    }

    /// Builds a context from an externally supplied threshold list (used for
    /// fixtures that ship coalition data without full ballots).
    pub fn with_thresholds(election: &'e Election, thresholds: Vec<ThresholdConstraint>) -> Self {
        let threshold_masks = thresholds
            .iter()
            .map(|t| t.candidates.iter().fold(0u64, |a, &c| a | 1 << (c - 1)))
            .collect();
        let rank_matrix = election.rank_matrix();
        let ranks = (0..election.ballots().len())
            .map(|i| rank_matrix.row(i).to_vec())
            .collect();
        let weights = election.ballots().iter().map(|b| b.weight).collect();
        MeasureContext {
            election,
            thresholds,
            threshold_masks,
            ranks,
            weights,
        }
    }

    fn n(&self) -> i64 {
        self.election.total_voters() as i64
    }

    fn k(&self) -> usize {
        self.election.seats()
    }

    fn m(&self) -> usize {
        self.election.num_candidates()
    }

    /// Dispatch on measure id; used by enumeration loops.
    pub fn value(&self, w: &Committee, measure: MeasureId, mode: PriceMode, path: PricePath) -> Frac {
        match measure {
            MeasureId::Psc => self.psc_value(w).0,
            MeasureId::EjrPlus => self.ejr_plus_value(w).0,
            MeasureId::LocalStability => self.local_stability_value(w).0,
            MeasureId::Priceability => price::priceability_value(self.election, w, mode, path).alpha,
        }
    }

    /// The PSC value: scan the threshold constraints in non-increasing
    /// order and return the first (largest) threshold whose demand the
    /// committee violates, with that demand as witness; 0 if none fails.
    pub fn psc_value(&self, w: &Committee) -> (Frac, Option<PscWitness>) {
        let w_mask = w.mask();
        for (t, &mask) in self.thresholds.iter().zip(&self.threshold_masks) {
            if ((mask & w_mask).count_ones() as usize) < t.ell {
                return (
                    t.threshold,
                    Some(PscWitness {
                        candidates: t.candidates.clone(),
                        ell: t.ell,
                        support: t.support,
                    }),
                );
            }
        }
        (Frac::zero(), None)
    }

    /// The EJR+ value: the maximum over unselected candidates `c`, ranks
    /// `r`, and `ell` of `|N'| * k / (n * ell)`, where `N'` are the voters
    /// ranking `c` within rank `r` while seeing fewer than `ell` committee
    /// members at rank `r` or better.
    pub fn ejr_plus_value(&self, w: &Committee) -> (Frac, Option<EjrWitness>) {
        let m = self.m();
        let k = self.k();
        let members = w.members();
        // diff[c - 1][ell - 1][r] accumulates group weight deltas over r
        let mut diff = vec![vec![vec![0i64; m + 2]; k]; m];
        for (i, row) in self.ranks.iter().enumerate() {
            let weight = self.weights[i] as i64;
            // sorted ranks of committee members on this ballot
            let mut w_ranks: Vec<u32> = members.iter().map(|&c| row[c - 1]).collect();
            w_ranks.sort_unstable();
            for (c0, &rank) in row.iter().enumerate() {
                if w.contains(c0 + 1) {
                    continue;
                }
                // the voter is in the group for r in [rank, exit_ell - 1],
                // where exit_ell is the rank of the ell-th committee member;
                // unranked candidates (rank m) never produce a non-empty
                // interval since the k-th member rank is at most m
                for (ell0, &exit) in w_ranks.iter().enumerate() {
                    if rank < exit {
                        diff[c0][ell0][rank as usize] += weight;
                        diff[c0][ell0][exit as usize] -= weight;
                    }
                }
            }
        }
        let n = self.n();
        let mut best = Frac::zero();
        let mut witness = None;
        for c0 in 0..m {
            if w.contains(c0 + 1) {
                continue;
            }
            for ell0 in 0..k {
                let mut group: i64 = 0;
                for r in 1..=m {
                    group += diff[c0][ell0][r];
                    if group == 0 {
                        continue;
                    }
                    let alpha = Frac::new(group * k as i64, n * (ell0 as i64 + 1));
                    if alpha > best {
                        best = alpha;
                        witness = Some(EjrWitness {
                            candidate: c0 + 1,
                            rank: r,
                            ell: ell0 + 1,
                            group_weight: group as u64,
                        });
                    }
                }
            }
        }
        (best, witness)
    }

    /// The local-stability value: the maximum over unselected candidates of
    /// `weight * k / n` where `weight` counts voters ranking the candidate
    /// strictly above every committee member.
    pub fn local_stability_value(&self, w: &Committee) -> (Frac, Option<LsWitness>) {
        let m = self.m();
        let mut group = vec![0u64; m];
        for (i, row) in self.ranks.iter().enumerate() {
            let min_w_rank = w
                .members()
                .iter()
                .map(|&c| row[c - 1])
                .min()
                .expect("committees are non-empty");
            for (c0, &rank) in row.iter().enumerate() {
                // an unranked candidate carries rank m and so is never
                // strictly above anything; the comparison excludes it
                if rank < min_w_rank {
                    group[c0] += self.weights[i];
                }
            }
        }
        let n = self.n();
        let k = self.k() as i64;
        let mut best = Frac::zero();
        let mut witness = None;
        for c0 in 0..m {
            if w.contains(c0 + 1) || group[c0] == 0 {
                continue;
            }
            let alpha = Frac::new(group[c0] as i64 * k, n);
            if alpha > best {
                best = alpha;
                witness = Some(LsWitness {
                    candidate: c0 + 1,
                    group_weight: group[c0],
                });
            }
        }
        (best, witness)
    }

    /// All four measures for one committee.
    pub fn report(&self, w: &Committee, mode: PriceMode, path: PricePath) -> MeasureReport {
        let (psc_alpha, psc_witness) = self.psc_value(w);
        let (ejr_alpha, ejr_witness) = self.ejr_plus_value(w);
        let (ls_alpha, ls_witness) = self.local_stability_value(w);
        let price = price::priceability_value(self.election, w, mode, path);
        MeasureReport {
            committee: w.clone(),
            psc_alpha,
            psc_witness,
            ejr_alpha,
            ejr_witness,
            ls_alpha,
            ls_witness,
            price_alpha: price.alpha,
            price: price.price,
            price_exact: price.exact,
        }
    }
}

/// Satisfaction predicates evaluated directly from the parameterised axiom
/// definitions; used for the monotonicity checks around reported values.
pub fn satisfies_alpha(
    e: &Election,
    ctx: &MeasureContext,
    w: &Committee,
    measure: MeasureId,
    alpha: Frac,
) -> bool {
    match measure {
        MeasureId::Psc => {
            // every demand whose group is ell_alpha-large must hold
            let w_mask = w.mask();
            ctx.thresholds
                .iter()
                .zip(&ctx.threshold_masks)
                .all(|(t, &mask)| {
                    t.threshold < alpha || ((mask & w_mask).count_ones() as usize) >= t.ell
                })
        }
        MeasureId::EjrPlus => {
            let (value, _) = ctx.ejr_plus_value(w);
            value < alpha
        }
        MeasureId::LocalStability => {
            let (value, _) = ctx.local_stability_value(w);
            value < alpha
        }
        MeasureId::Priceability => {
            // satisfied when the minimal price is at most alpha * n / k
            let report = price::priceability_value(e, w, PriceMode::default(), PricePath::Exact);
            report.alpha <= alpha
        }
    }
}

/// Per-axiom satisfaction counts over every size-k committee.
#[derive(Debug, Clone, Serialize)]
pub struct Census {
    pub total_committees: u64,
    /// Counts of committees with value < 1, indexed like [`MeasureId::ALL`].
    pub satisfied: [u64; 4],
}

impl Census {
    pub fn satisfied_count(&self, measure: MeasureId) -> u64 {
        let idx = MeasureId::ALL.iter().position(|m| *m == measure).unwrap();
        self.satisfied[idx]
    }
}

/// Counts, for each axiom, the committees whose measure value is below 1.
///
/// Refuses to enumerate beyond `cap` committees.
pub fn axiom_census(e: &Election, cap: u64, mode: PriceMode) -> Result<Census, OptimizerError> {
    let combinations = binomial(e.num_candidates(), e.seats());
    if combinations > cap as u128 {
        return Err(OptimizerError::EnumerationCapExceeded { combinations, cap });
    }
    let ctx = MeasureContext::new(e);
    let one = Frac::new(1, 1);
    let mut census = Census {
        total_committees: combinations as u64,
        satisfied: [0; 4],
    };
    for members in committees(e.num_candidates(), e.seats()) {
        let w = Committee::new(members, e.num_candidates()).unwrap();
        if ctx.psc_value(&w).0 < one {
            census.satisfied[0] += 1;
        }
        if ctx.ejr_plus_value(&w).0 < one {
            census.satisfied[1] += 1;
        }
        if ctx.local_stability_value(&w).0 < one {
            census.satisfied[2] += 1;
        }
        if price::priceability_value(e, &w, mode, PricePath::Auto).alpha < one {
            census.satisfied[3] += 1;
        }
    }
    Ok(census)
}
