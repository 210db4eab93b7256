//! Priceability: the smallest price `p` at which a committee is supportable
//! by unit voter budgets, found by linear programming.
//!
//! The program, with one payment variable per (ballot type, committee
//! member) pair and the price `p`:
//!
//! * each voter spends at most 1 across committee members;
//! * each committee member receives at most `p` in total;
//! * payments to non-members are zero (implicit: no such variables);
//! * for every unselected candidate `c` and rank `r`, the voters ranking
//!   `c` within rank `r` retain at most `p` of budget not yet committed to
//!   members they rank at `r` or better.
//!
//! The last constraint follows the reading in which money committed to
//! members ranked *at or above* `r` is spent and the rest is redirectable;
//! [`PriceMode::StrictPaper`] instead subtracts payments to members ranked
//! strictly below `r`, which forces prices of at least `n` at rank `m` on
//! complete profiles. The alpha value is `p * k / n`.

use num::rational::Ratio;
use num::{BigRational, FromPrimitive, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::lp::{self, big, Cmp, Outcome, Problem};
use crate::model::{Committee, Election, Frac};

/// Which leftover convention the stability constraint uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PriceMode {
    /// Budget minus payments to members ranked at or above the deviation
    /// rank (default).
    #[default]
    Redirectable,
    /// Budget minus payments to members ranked strictly below the deviation
    /// rank, as the displayed formula reads.
    StrictPaper,
}

/// Solver selection for the price program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PricePath {
    /// Exact rational simplex for small programs, float otherwise.
    #[default]
    Auto,
    Exact,
    Float,
}

/// Tableau-cell budget below which the exact simplex is used on `Auto`.
const EXACT_CELL_CAP: usize = 60_000;

/// Verification slack for price systems recovered from the float path.
const VERIFY_TOL: f64 = 1e-8;

/// A concrete price system: the price and per-ballot-type payments (per
/// single voter of the type) to committee members.
#[derive(Debug, Clone)]
pub struct PriceSystem {
    pub price: BigRational,
    /// `payments[i]` lists `(member, payment)` for ballot type `i`.
    pub payments: Vec<Vec<(usize, BigRational)>>,
}

/// Result of the priceability computation.
#[derive(Debug, Clone)]
pub struct PriceReport {
    /// `price * k / n`.
    pub alpha: Frac,
    pub price: Frac,
    /// Whether the values are exact rationals (exact simplex path) rather
    /// than approximations recovered from a float solve.
    pub exact: bool,
    /// Whether the returned system passed constraint re-verification.
    pub verified: bool,
    pub system: PriceSystem,
}

/// Builds and solves the price program for a committee.
pub fn priceability_value(
    e: &Election,
    w: &Committee,
    mode: PriceMode,
    path: PricePath,
) -> PriceReport {
    let problem = build_program(e, w, mode);
    let use_exact = match path {
        PricePath::Exact => true,
        PricePath::Float => false,
        PricePath::Auto => problem.cells() <= EXACT_CELL_CAP,
    };
    let k = e.seats();
    let p_var = e.ballots().len() * k;

    let (values, exact): (Vec<BigRational>, bool) = if use_exact {
        match lp::solve_exact(&problem) {
            Outcome::Optimal { values, .. } => (values, true),
            other => unreachable!("price program is always feasible and bounded: {other:?}"),
        }
    } else {
        match lp::solve_f64(&problem) {
            Outcome::Optimal { values, .. } => {
                let rational = values
                    .into_iter()
                    .map(|v| {
                        BigRational::from_f64(v.max(0.0)).expect("solver returns finite values")
                    })
                    .collect();
                (rational, false)
            }
            other => unreachable!("price program is always feasible and bounded: {other:?}"),
        }
    };

    let price = values[p_var].clone();
    let payments = e
        .ballots()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            w.members()
                .iter()
                .enumerate()
                .filter_map(|(j, &c)| {
                    let v = &values[i * k + j];
                    (!v.is_zero()).then(|| (c, v.clone()))
                })
                .collect()
        })
        .collect();
    let system = PriceSystem {
        price: price.clone(),
        payments,
    };
    let verified = verify_system(e, w, &system, mode);
    if !verified {
        log::warn!(
            "price system for committee {} breached re-verification tolerance",
            w
        );
    }

    let n = e.total_voters() as i64;
    let alpha_big = &price * big(k as i64) / big(n);
    PriceReport {
        alpha: frac_from_big(&alpha_big),
        price: frac_from_big(&price),
        exact,
        verified,
        system,
    }
}

/// Decides alpha-priceability at a fixed alpha: whether the minimal price is
/// at most `alpha * n / k`.
pub fn satisfies_alpha_price(e: &Election, w: &Committee, alpha: Frac, mode: PriceMode) -> bool {
    let report = priceability_value(e, w, mode, PricePath::Exact);
    report.alpha <= alpha
}

fn build_program(e: &Election, w: &Committee, mode: PriceMode) -> Problem {
    let k = e.seats();
    let m = e.num_candidates();
    let types = e.ballots().len();
    let p_var = types * k;
    let mut problem = Problem::new(p_var + 1);
    problem.set_objective(p_var, big(1));

    let ranks = e.rank_matrix();
    let weights: Vec<i64> = e.ballots().iter().map(|b| b.weight as i64).collect();
    // member ranks per type, in committee order
    let member_ranks: Vec<Vec<usize>> = (0..types)
        .map(|i| w.members().iter().map(|&c| ranks.rank(i, c)).collect())
        .collect();

    // (a) unit budget per voter of each type
    for i in 0..types {
        let coeffs = (0..k).map(|j| (i * k + j, big(1))).collect();
        problem.add(coeffs, Cmp::Le, big(1));
    }
    // (b) each member receives at most p in total
    for j in 0..k {
        let mut coeffs: Vec<(usize, BigRational)> = (0..types)
            .map(|i| (i * k + j, big(weights[i])))
            .collect();
        coeffs.push((p_var, big(-1)));
        problem.add(coeffs, Cmp::Le, big(0));
    }
    // (d) stability rows per unselected candidate and rank
    for c in 1..=m {
        if w.contains(c) {
            continue;
        }
        let rows: Vec<usize> = match mode {
            PriceMode::Redirectable => {
                // binding ranks: each distinct rank at which some ballot
                // places c (the group or the spent prefix changes there);
                // the rank-m row is shared across candidates and added once
                let mut rs: Vec<usize> = (0..types)
                    .map(|i| ranks.rank(i, c))
                    .filter(|&r| r < m)
                    .collect();
                rs.sort_unstable();
                rs.dedup();
                rs
            }
            PriceMode::StrictPaper => (1..=m).collect(),
        };
        for r in rows {
            add_stability_row(&mut problem, &ranks, &weights, &member_ranks, mode, c, r, p_var, k);
        }
    }
    match mode {
        PriceMode::Redirectable => {
            // rank-m row, identical for every unselected candidate: the
            // whole electorate's unspent budget is at most p
            let n: i64 = weights.iter().sum();
            let mut coeffs: Vec<(usize, BigRational)> = Vec::with_capacity(p_var + 1);
            for i in 0..types {
                for j in 0..k {
                    coeffs.push((i * k + j, big(-weights[i])));
                }
            }
            coeffs.push((p_var, big(-1)));
            problem.add(coeffs, Cmp::Le, big(-n));
        }
        PriceMode::StrictPaper => {}
    }
    problem
}

#[allow(clippy::too_many_arguments)]
fn add_stability_row(
    problem: &mut Problem,
    ranks: &crate::model::RankMatrix,
    weights: &[i64],
    member_ranks: &[Vec<usize>],
    mode: PriceMode,
    c: usize,
    r: usize,
    p_var: usize,
    k: usize,
) {
    let mut coeffs: Vec<(usize, BigRational)> = Vec::new();
    let mut group_weight: i64 = 0;
    for (i, &weight) in weights.iter().enumerate() {
        if ranks.rank(i, c) > r {
            continue;
        }
        group_weight += weight;
        for j in 0..k {
            let in_sum = match mode {
                PriceMode::Redirectable => member_ranks[i][j] <= r,
                PriceMode::StrictPaper => member_ranks[i][j] > r,
            };
            if in_sum {
                coeffs.push((i * k + j, big(-weight)));
            }
        }
    }
    if group_weight == 0 {
        return;
    }
    coeffs.push((p_var, big(-1)));
    problem.add(coeffs, Cmp::Le, big(-group_weight));
}

/// Re-verifies a price system against all four constraint families in exact
/// rational arithmetic, allowing the float-path tolerance.
pub fn verify_system(e: &Election, w: &Committee, system: &PriceSystem, mode: PriceMode) -> bool {
    let tol = BigRational::from_f64(VERIFY_TOL).unwrap();
    let one = big(1);
    let m = e.num_candidates();
    let ranks = e.rank_matrix();

    // payments nonnegative, restricted to members, per-voter budget
    for row in &system.payments {
        let mut total = BigRational::zero();
        for (c, v) in row {
            if v.is_negative() || !w.contains(*c) {
                return false;
            }
            total += v;
        }
        if total > &one + &tol {
            return false;
        }
    }
    // per-member cap
    for &c in w.members() {
        let mut received = BigRational::zero();
        for (i, row) in system.payments.iter().enumerate() {
            let weight = big(e.ballots()[i].weight as i64);
            for (member, v) in row {
                if *member == c {
                    received += v * &weight;
                }
            }
        }
        if received > &system.price + &tol {
            return false;
        }
    }
    // stability rows
    let spent_at = |i: usize, r: usize| -> BigRational {
        system.payments[i]
            .iter()
            .filter(|(member, _)| {
                let rank = ranks.rank(i, *member);
                match mode {
                    PriceMode::Redirectable => rank <= r,
                    PriceMode::StrictPaper => rank > r,
                }
            })
            .map(|(_, v)| v.clone())
            .sum()
    };
    for c in 1..=m {
        if w.contains(c) {
            continue;
        }
        for r in 1..=m {
            let mut lhs = BigRational::zero();
            for (i, b) in e.ballots().iter().enumerate() {
                if ranks.rank(i, c) <= r {
                    lhs += big(b.weight as i64) * (&one - spent_at(i, r));
                }
            }
            if lhs > &system.price + &tol {
                return false;
            }
        }
    }
    true
}

fn frac_from_big(x: &BigRational) -> Frac {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(n), Some(d)) => Ratio::new(n, d),
        _ => lp::frac_from_f64(x.to_f64().unwrap_or(f64::MAX)),
    }
}
