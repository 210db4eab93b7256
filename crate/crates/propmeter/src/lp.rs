//! Small linear-programming layer.
//!
//! Two solvers sit behind one problem type: a dense two-phase simplex over
//! exact rationals (Bland's rule, so it always terminates) for the small
//! programs where exact optima are wanted, and the `minilp` sparse solver in
//! floating point for large instances. Callers pick via [`solve_exact`] /
//! [`solve_f64`].

use num::rational::Ratio;
use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};

/// Comparison operator of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// A single constraint `sum coeffs . x  cmp  rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, BigRational)>,
    pub cmp: Cmp,
    pub rhs: BigRational,
}

/// `minimize c.x  s.t.  constraints, x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct Problem {
    pub num_vars: usize,
    pub objective: Vec<(usize, BigRational)>,
    pub constraints: Vec<Constraint>,
}

impl Problem {
    pub fn new(num_vars: usize) -> Self {
        Problem {
            num_vars,
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, var: usize, coeff: BigRational) {
        self.objective.push((var, coeff));
    }

    pub fn add(&mut self, coeffs: Vec<(usize, BigRational)>, cmp: Cmp, rhs: BigRational) {
        self.constraints.push(Constraint { coeffs, cmp, rhs });
    }

    /// Rough size measure used to decide between the exact and float paths.
    pub fn cells(&self) -> usize {
        let cols = self.num_vars + self.constraints.len();
        (self.constraints.len() + 1) * (cols + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Optimal { values: Vec<T>, objective: T },
    Infeasible,
    Unbounded,
}

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Solves the program exactly with a dense two-phase tableau simplex.
///
/// Intended for small programs (a few hundred tableau columns); cost grows
/// quickly beyond that since every pivot touches the whole tableau in big
/// rational arithmetic.
pub fn solve_exact(p: &Problem) -> Outcome<BigRational> {
    Simplex::build(p).solve()
}

/// Solves the program in floating point via `minilp`.
pub fn solve_f64(p: &Problem) -> Outcome<f64> {
    let mut problem = minilp::Problem::new(minilp::OptimizationDirection::Minimize);
    let mut objective = vec![0.0; p.num_vars];
    for (v, c) in &p.objective {
        objective[*v] += c.to_f64().expect("finite coefficient");
    }
    let vars: Vec<minilp::Variable> = objective
        .iter()
        .map(|&c| problem.add_var(c, (0.0, f64::INFINITY)))
        .collect();
    for con in &p.constraints {
        let expr: Vec<(minilp::Variable, f64)> = con
            .coeffs
            .iter()
            .map(|(v, c)| (vars[*v], c.to_f64().expect("finite coefficient")))
            .collect();
        let op = match con.cmp {
            Cmp::Le => minilp::ComparisonOp::Le,
            Cmp::Ge => minilp::ComparisonOp::Ge,
            Cmp::Eq => minilp::ComparisonOp::Eq,
        };
        problem.add_constraint(&expr, op, con.rhs.to_f64().expect("finite rhs"));
    }
    match problem.solve() {
        Ok(solution) => {
            let values = vars.iter().map(|&v| solution[v]).collect();
            Outcome::Optimal {
                objective: solution.objective(),
                values,
            }
        }
        Err(minilp::Error::Infeasible) => Outcome::Infeasible,
        Err(minilp::Error::Unbounded) => Outcome::Unbounded,
    }
}

/// Dense tableau with Bland's anti-cycling rule.
struct Simplex {
    /// rows x cols; last column is the rhs.
    tableau: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    num_structural: usize,
    num_artificial: usize,
    objective: Vec<BigRational>,
}

impl Simplex {
    fn build(p: &Problem) -> Self {
        let rows = p.constraints.len();
        // columns: structural | slack/surplus | artificial | rhs
        let num_slack = p
            .constraints
            .iter()
            .filter(|c| c.cmp != Cmp::Eq)
            .count();
        // artificials are added per row lazily below
        let mut tableau: Vec<Vec<BigRational>> = Vec::with_capacity(rows);
        let mut basis = vec![usize::MAX; rows];
        let mut slack_idx = 0usize;
        let mut artificial_cols: Vec<usize> = Vec::new();

        // First pass to learn which rows need artificials after sign
        // normalisation, so the column layout is known up front.
        let mut needs_artificial = vec![false; rows];
        for (r, con) in p.constraints.iter().enumerate() {
            let neg_rhs = con.rhs.is_negative();
            match (con.cmp, neg_rhs) {
                (Cmp::Le, false) => {}
                (Cmp::Ge, true) => {} // becomes Le with positive rhs
                _ => needs_artificial[r] = true,
            }
        }
        let num_artificial = needs_artificial.iter().filter(|b| **b).count();
        let total_cols = p.num_vars + num_slack + num_artificial + 1;

        let mut artificial_cursor = p.num_vars + num_slack;
        for (r, con) in p.constraints.iter().enumerate() {
            let mut row = vec![BigRational::zero(); total_cols];
            let mut rhs = con.rhs.clone();
            let mut coeffs: Vec<(usize, BigRational)> = con.coeffs.clone();
            let mut cmp = con.cmp;
            if rhs.is_negative() {
                for (_, c) in coeffs.iter_mut() {
                    *c = -c.clone();
                }
                rhs = -rhs;
                cmp = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
            }
            for (v, c) in coeffs {
                row[v] += c;
            }
            match cmp {
                Cmp::Le => {
                    let col = p.num_vars + slack_idx;
                    slack_idx += 1;
                    row[col] = big(1);
                    basis[r] = col;
                }
                Cmp::Ge => {
                    let col = p.num_vars + slack_idx;
                    slack_idx += 1;
                    row[col] = big(-1);
                }
                Cmp::Eq => {}
            }
            if basis[r] == usize::MAX {
                let col = artificial_cursor;
                artificial_cursor += 1;
                row[col] = big(1);
                basis[r] = col;
                artificial_cols.push(col);
            }
            *row.last_mut().unwrap() = rhs;
            tableau.push(row);
        }

        let mut objective = vec![BigRational::zero(); total_cols];
        for (v, c) in &p.objective {
            objective[*v] += c.clone();
        }

        Simplex {
            tableau,
            basis,
            num_structural: p.num_vars,
            num_artificial,
            objective,
        }
    }

    fn solve(mut self) -> Outcome<BigRational> {
        let cols = self.cols();
        let art_start = cols - 1 - self.num_artificial;

        if self.num_artificial > 0 {
            // Phase 1: minimise the sum of artificial variables; every
            // column may enter.
            let mut phase1 = vec![BigRational::zero(); cols];
            for col in art_start..cols - 1 {
                phase1[col] = big(1);
            }
            match self.run(&phase1, cols - 1) {
                Ok((z, _)) if z.is_zero() => {}
                Ok(_) => return Outcome::Infeasible,
                Err(()) => unreachable!("phase 1 objective is bounded below"),
            }
            // Drive remaining artificial basics out where possible; rows
            // that cannot pivot are redundant and stay at zero.
            for r in 0..self.tableau.len() {
                if self.basis[r] >= art_start {
                    if let Some(col) = (0..art_start).find(|&c| !self.tableau[r][c].is_zero()) {
                        self.pivot(r, col);
                    }
                }
            }
        }

        let objective = self.objective.clone();
        match self.run(&objective, art_start) {
            Ok((z, x)) => Outcome::Optimal {
                objective: z,
                values: x,
            },
            Err(()) => Outcome::Unbounded,
        }
    }

    fn cols(&self) -> usize {
        self.tableau.first().map(|r| r.len()).unwrap_or(1)
    }

    /// Runs the simplex for a given objective; columns at or beyond
    /// `entering_cap` never enter the basis. Returns objective value and
    /// structural variable values, or Err on unboundedness.
    fn run(
        &mut self,
        objective: &[BigRational],
        entering_cap: usize,
    ) -> Result<(BigRational, Vec<BigRational>), ()> {
        let cols = self.cols();
        let rows = self.tableau.len();
        // reduced costs z_j - c_j maintained directly in a working row
        let mut obj_row = objective.to_vec();
        let mut obj_value = BigRational::zero();
        for r in 0..rows {
            let b = self.basis[r];
            if !obj_row[b].is_zero() {
                let factor = obj_row[b].clone();
                for c in 0..cols {
                    let t = &self.tableau[r][c] * &factor;
                    obj_row[c] -= t;
                }
                obj_value -= &factor * &self.tableau[r][cols - 1];
            }
        }

        loop {
            // Bland: entering column = smallest index with negative cost.
            let entering = (0..entering_cap).find(|&c| obj_row[c].is_negative());
            let entering = match entering {
                Some(c) => c,
                None => {
                    let mut x = vec![BigRational::zero(); self.num_structural];
                    for r in 0..rows {
                        if self.basis[r] < self.num_structural {
                            x[self.basis[r]] = self.tableau[r][cols - 1].clone();
                        }
                    }
                    // obj_row holds c - z; objective value accumulated with
                    // opposite sign.
                    return Ok((-obj_value, x));
                }
            };
            // Ratio test, Bland ties by smallest basis variable.
            let mut leave: Option<(usize, BigRational)> = None;
            for r in 0..rows {
                let a = &self.tableau[r][entering];
                if a.is_positive() {
                    let ratio = &self.tableau[r][cols - 1] / a;
                    let better = match &leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < *lratio
                                || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let (leave_row, _) = leave.ok_or(())?;
            self.pivot(leave_row, entering);
            // update objective row
            let factor = obj_row[entering].clone();
            if !factor.is_zero() {
                for c in 0..cols {
                    let t = &self.tableau[leave_row][c] * &factor;
                    obj_row[c] -= t;
                }
                obj_value -= &factor * &self.tableau[leave_row][cols - 1];
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols();
        let pivot = self.tableau[row][col].clone();
        for c in 0..cols {
            self.tableau[row][c] /= &pivot;
        }
        for r in 0..self.tableau.len() {
            if r != row && !self.tableau[r][col].is_zero() {
                let factor = self.tableau[r][col].clone();
                for c in 0..cols {
                    let t = &self.tableau[row][c] * &factor;
                    self.tableau[r][c] -= t;
                }
            }
        }
        self.basis[row] = col;
    }
}

/// Best rational approximation of a float, for presenting float-path results
/// as the `Frac` values the rest of the crate uses.
pub fn frac_from_f64(x: f64) -> Ratio<i64> {
    Ratio::<i64>::approximate_float(x).unwrap_or_else(|| Ratio::new(0, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_simple_minimum() {
        // minimize x + y  s.t.  x + 2y >= 4, x >= 0, y >= 0 -> (0, 2), z = 2
        let mut p = Problem::new(2);
        p.set_objective(0, big(1));
        p.set_objective(1, big(1));
        p.add(vec![(0, big(1)), (1, big(2))], Cmp::Ge, big(4));
        match solve_exact(&p) {
            Outcome::Optimal { objective, .. } => assert_eq!(objective, big(2)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn exact_infeasible() {
        // x <= 1, x >= 2
        let mut p = Problem::new(1);
        p.set_objective(0, big(1));
        p.add(vec![(0, big(1))], Cmp::Le, big(1));
        p.add(vec![(0, big(1))], Cmp::Ge, big(2));
        assert_eq!(solve_exact(&p), Outcome::Infeasible);
    }

    #[test]
    fn exact_unbounded() {
        // minimize -x, x >= 0
        let mut p = Problem::new(1);
        p.set_objective(0, big(-1));
        p.add(vec![(0, big(1))], Cmp::Ge, big(0));
        assert_eq!(solve_exact(&p), Outcome::Unbounded);
    }

    #[test]
    fn float_agrees_with_exact() {
        let mut p = Problem::new(3);
        p.set_objective(2, big(1));
        // x0 + x1 <= 1; 3 x0 - x2 <= 0; 2 - x0 - x1 <= x2
        p.add(vec![(0, big(1)), (1, big(1))], Cmp::Le, big(1));
        p.add(vec![(0, big(3)), (2, big(-1))], Cmp::Le, big(0));
        p.add(vec![(0, big(-1)), (1, big(-1)), (2, big(-1))], Cmp::Le, big(-1));
        let exact = match solve_exact(&p) {
            Outcome::Optimal { objective, .. } => objective.to_f64().unwrap(),
            other => panic!("unexpected {other:?}"),
        };
        let approx = match solve_f64(&p) {
            Outcome::Optimal { objective, .. } => objective,
            other => panic!("unexpected {other:?}"),
        };
        assert!((exact - approx).abs() < 1e-9, "{exact} vs {approx}");
    }
}
