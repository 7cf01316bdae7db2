//! Dense two-phase simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable on ratio ties), which terminates without any
//! numerical tie-breaking. Problems here are tiny (one per atom and time
//! step), so a dense tableau is the right tool.

use num_traits::{Signed, Zero};

use crate::rational::{zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        LinearProgram { n_vars: objective.len(), objective, constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        assert_eq!(coeffs.len(), self.n_vars, "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    n_orig: usize,
    n_cols: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        // Normalise to nonnegative right-hand sides.
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -c.rhs.clone())
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let n_orig = lp.n_vars;
        let n_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let n_art = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let first_artificial = n_orig + n_slack;
        let n_cols = first_artificial + n_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut rhs = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut next_slack, mut next_art) = (n_orig, first_artificial);
        for (coeffs, relation, b) in normalized {
            let mut row = coeffs;
            row.resize(n_cols, zero());
            match relation {
                Relation::Le => {
                    row[next_slack] = Rational::from_integer(1.into());
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = Rational::from_integer((-1).into());
                    next_slack += 1;
                    row[next_art] = Rational::from_integer(1.into());
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::from_integer(1.into());
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }
        Tableau { rows, rhs, basis, n_orig, n_cols, first_artificial }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Runs primal simplex for `max cost · x` over columns `< col_limit`.
    /// Returns `false` when unbounded.
    fn optimize(&mut self, cost: &[Rational], col_limit: usize) -> bool {
        loop {
            let entering = (0..col_limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = self
                    .basis
                    .iter()
                    .enumerate()
                    .fold(cost[j].clone(), |acc, (i, &b)| acc - &cost[b] * &self.rows[i][j]);
                reduced.is_positive()
            });
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, j),
                None => return false,
            }
        }
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.basis.iter().zip(&self.rhs).fold(zero(), |acc, (&b, v)| acc + &cost[b] * v)
    }

    fn solve(mut self, objective: &[Rational]) -> LpOutcome {
        if self.first_artificial < self.n_cols {
            let mut phase1 = vec![zero(); self.n_cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = Rational::from_integer((-1).into());
            }
            self.optimize(&phase1, self.n_cols);
            if self.objective_value(&phase1).is_negative() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.rows.remove(i);
                            self.rhs.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = vec![zero(); self.n_cols];
        cost[..self.n_orig].clone_from_slice(objective);
        if !self.optimize(&cost, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![zero(); self.n_orig];
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            if b < self.n_orig {
                x[b] = v.clone();
            }
        }
        LpOutcome::Optimal { value: self.objective_value(&cost), x }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::new(v(&[3, 5]));
        lp.add(v(&[1, 0]), Relation::Le, int(4))
            .add(v(&[0, 2]), Relation::Le, int(12))
            .add(v(&[3, 2]), Relation::Le, int(18));
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: int(36), x: v(&[2, 6]) });
    }

    #[test]
    fn equality_and_ge_constraints() {
        // max x st x + y = 1, x - y >= 1/2 -> x = 1
        let mut lp = LinearProgram::new(v(&[1, 0]));
        lp.add(v(&[1, 1]), Relation::Eq, int(1)).add(v(&[1, -1]), Relation::Ge, ratio(1, 2));
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: int(1), x: v(&[1, 0]) });
        // min x (max -x) with same constraints -> x = 3/4
        let mut lp = LinearProgram::new(v(&[-1, 0]));
        lp.add(v(&[1, 1]), Relation::Eq, int(1)).add(v(&[1, -1]), Relation::Ge, ratio(1, 2));
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: ratio(-3, 4), x: vec![ratio(3, 4), ratio(1, 4)] });
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(v(&[1]));
        lp.add(v(&[1]), Relation::Le, int(1)).add(v(&[1]), Relation::Ge, int(2));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(v(&[1, 1]));
        lp.add(v(&[1, -1]), Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_and_negative_rhs() {
        let mut lp = LinearProgram::new(v(&[1, 2]));
        lp.add(v(&[1, 1]), Relation::Eq, int(2))
            .add(v(&[2, 2]), Relation::Eq, int(4))
            .add(v(&[-1, 0]), Relation::Le, int(-1));
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: int(3), x: v(&[1, 1]) });
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling example; Bland's rule must terminate.
        let mut lp = LinearProgram::new(vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)]);
        lp.add(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], Relation::Le, int(0))
            .add(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], Relation::Le, int(0))
            .add(vec![int(0), int(0), int(1), int(0)], Relation::Le, int(1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
