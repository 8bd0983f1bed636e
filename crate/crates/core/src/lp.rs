//! Exact-rational two-phase simplex.
//!
//! Dense tableau over [`Rational`]. Dantzig pricing with a fallback to Bland's
//! rule on degenerate stalls, so runs terminate and are reproducible.
//! Problems here are desk scale (tens of rows, a few hundred columns).

use num_traits::{Signed, Zero};

use crate::rational::{one, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<Rational>,
    relation: Relation,
    rhs: Rational,
}

/// A linear program over `num_vars` variables, nonnegative unless marked free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    free: Vec<bool>,
    rows: Vec<Row>,
    objective: Vec<Rational>,
    sense: Sense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            free: vec![false; num_vars],
            rows: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
            sense: Sense::Maximize,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Lets variable `j` take any sign.
    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.free[j] = true;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn constrain_sparse(
        &mut self,
        terms: &[(usize, Rational)],
        relation: Relation,
        rhs: Rational,
    ) -> &mut Self {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.constrain(coeffs, relation, rhs)
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<Rational>) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars, "objective width");
        self.sense = sense;
        self.objective = coeffs;
        self
    }

    pub fn solve(&self) -> LpOutcome {
        // Column layout: one column per nonnegative variable, two (plus, minus)
        // per free variable, then one slack/surplus per inequality row, then
        // artificials.
        let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.num_vars);
        let mut ncols = 0;
        for &free in &self.free {
            if free {
                var_cols.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                var_cols.push((ncols, None));
                ncols += 1;
            }
        }
        let structural = ncols;
        let slack_count = self
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let first_artificial = structural + slack_count;

        // Normalize every row to rhs >= 0 and decide which need an artificial.
        let m = self.rows.len();
        let mut needs_artificial = Vec::with_capacity(m);
        let mut normalized = Vec::with_capacity(m);
        for row in &self.rows {
            let (sign, relation) = if row.rhs.is_negative() {
                let flipped = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (-one(), flipped)
            } else {
                (one(), row.relation)
            };
            needs_artificial.push(relation != Relation::Le);
            normalized.push((sign, relation));
        }
        let artificial_count = needs_artificial.iter().filter(|&&a| a).count();
        let total = first_artificial + artificial_count;

        let mut table = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = structural;
        let mut artificial = first_artificial;
        for (i, row) in self.rows.iter().enumerate() {
            let (sign, relation) = &normalized[i];
            let mut t = vec![Rational::zero(); total + 1];
            for (j, c) in row.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let v = c * sign;
                let (plus, minus) = var_cols[j];
                if let Some(minus) = minus {
                    t[minus] = -v.clone();
                }
                t[plus] = v;
            }
            t[total] = &row.rhs * sign;
            match relation {
                Relation::Le => {
                    t[slack] = one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    t[slack] = -one();
                    slack += 1;
                    t[artificial] = one();
                    basis.push(artificial);
                    artificial += 1;
                }
                Relation::Eq => {
                    t[artificial] = one();
                    basis.push(artificial);
                    artificial += 1;
                }
            }
            table.push(t);
        }

        let mut tableau = Tableau {
            rows: table,
            basis,
            width: total,
        };

        if artificial_count > 0 {
            let mut phase_one = vec![Rational::zero(); total];
            for c in phase_one.iter_mut().skip(first_artificial) {
                *c = -one();
            }
            // Phase one is bounded above by zero.
            let _ = tableau.optimize(&phase_one, total);
            if tableau.objective_value(&phase_one).is_negative() {
                return LpOutcome::Infeasible;
            }
            tableau.expel_artificials(first_artificial);
        }

        let mut cost = vec![Rational::zero(); total];
        let flip = self.sense == Sense::Minimize;
        for (j, c) in self.objective.iter().enumerate() {
            let c = if flip { -c.clone() } else { c.clone() };
            let (plus, minus) = var_cols[j];
            if let Some(minus) = minus {
                cost[minus] = -c.clone();
            }
            cost[plus] = c;
        }
        if tableau.optimize(&cost, first_artificial).is_err() {
            return LpOutcome::Unbounded;
        }

        let mut values = vec![Rational::zero(); total];
        for (i, &b) in tableau.basis.iter().enumerate() {
            values[b] = tableau.rows[i][total].clone();
        }
        let x: Vec<Rational> = var_cols
            .iter()
            .map(|&(plus, minus)| match minus {
                Some(minus) => &values[plus] - &values[minus],
                None => values[plus].clone(),
            })
            .collect();
        let value = crate::rational::dot(&self.objective, &x);
        LpOutcome::Optimal(LpSolution { value, x })
    }
}

struct Unbounded;

const DEGENERATE_RUN: usize = 50;

/// Entering column: largest positive reduced cost, or the first one under
/// Bland's rule. Basic columns have zero reduced cost and are never chosen.
fn entering(reduced: &[Rational], limit: usize, bland: bool) -> Option<usize> {
    let mut candidates = (0..limit).filter(|&j| reduced[j].is_positive());
    if bland {
        return candidates.next();
    }
    candidates.fold(None, |best: Option<usize>, j| match best {
        Some(b) if reduced[b] >= reduced[j] => Some(b),
        _ => Some(j),
    })
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Number of variable columns; the rhs sits at index `width`.
    width: usize,
}

impl Tableau {
    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rows)
            .fold(Rational::zero(), |acc, (&b, row)| {
                acc + &cost[b] * &row[self.width]
            })
    }

    /// Maximizes `cost` using only columns below `limit` as entering candidates.
    ///
    /// Dantzig pricing on a maintained reduced-cost row; after a run of
    /// degenerate pivots it switches to Bland's rule for the rest of the call.
    fn optimize(&mut self, cost: &[Rational], limit: usize) -> Result<(), Unbounded> {
        let mut reduced: Vec<Rational> = cost.to_vec();
        reduced.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if cost[b].is_zero() {
                continue;
            }
            for (j, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    reduced[j] -= &cost[b] * x;
                }
            }
        }
        let mut bland = false;
        let mut stalled = 0;
        loop {
            let Some(enter) = entering(&reduced, limit, bland) else {
                return Ok(());
            };
            let Some(leave) = self.leaving(enter) else {
                return Err(Unbounded);
            };
            if self.rows[leave][self.width].is_zero() {
                stalled += 1;
                bland |= stalled > DEGENERATE_RUN;
            } else {
                stalled = 0;
            }
            self.pivot(leave, enter);
            let factor = reduced[enter].clone();
            for (r, x) in reduced.iter_mut().zip(&self.rows[leave]) {
                if !x.is_zero() {
                    *r -= &factor * x;
                }
            }
        }
    }

    fn leaving(&self, enter: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[self.width] / &row[enter];
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let support: Vec<usize> = (0..=self.width)
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for &j in &support {
                row[j] -= &factor * &pivot_row[j];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Removes artificial columns from the basis after a feasible phase one;
    /// rows that cannot be pivoted are linearly redundant and dropped.
    fn expel_artificials(&mut self, first_artificial: usize) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < first_artificial {
                r += 1;
                continue;
            }
            match (0..first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                Some(j) => {
                    self.pivot(r, j);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
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
        // max 2x + 3y, 2x + y <= 18, 6x + 5y <= 60, 2x + 5y <= 40
        let mut lp = LinearProgram::new(2);
        lp.constrain(v(&[2, 1]), Relation::Le, int(18))
            .constrain(v(&[6, 5]), Relation::Le, int(60))
            .constrain(v(&[2, 5]), Relation::Le, int(40))
            .set_objective(Sense::Maximize, v(&[2, 3]));
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.value, int(28));
        assert_eq!(sol.x, v(&[5, 6]));
    }

    #[test]
    fn equality_and_free_variables() {
        // min x - y, x + y = 1, x free, y in [0, 3]
        let mut lp = LinearProgram::new(2);
        lp.set_free(0)
            .constrain(v(&[1, 1]), Relation::Eq, int(1))
            .constrain(v(&[0, 1]), Relation::Le, int(3))
            .set_objective(Sense::Minimize, v(&[1, -1]));
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.x, v(&[-2, 3]));
        assert_eq!(sol.value, int(-5));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constrain(v(&[1]), Relation::Ge, int(2))
            .constrain(v(&[1]), Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(1);
        lp.set_objective(Sense::Maximize, v(&[1]));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        // lambda on a segment reproducing (1/2, 1/2): rows are linearly dependent.
        let mut lp = LinearProgram::new(2);
        lp.constrain(v(&[1, 1]), Relation::Eq, int(1))
            .constrain(v(&[1, 0]), Relation::Eq, ratio(1, 2))
            .constrain(v(&[0, 1]), Relation::Eq, ratio(1, 2));
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.x, vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // max x, -x >= -4
        let mut lp = LinearProgram::new(1);
        lp.constrain(v(&[-1]), Relation::Ge, int(-4))
            .set_objective(Sense::Maximize, v(&[1]));
        assert_eq!(lp.solve().optimal().unwrap().value, int(4));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic Beale cycling example under Dantzig's rule.
        let mut lp = LinearProgram::new(4);
        lp.constrain(
            vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)],
            Relation::Le,
            int(0),
        )
        .constrain(
            vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)],
            Relation::Le,
            int(0),
        )
        .constrain(v(&[0, 0, 1, 0]), Relation::Le, int(1))
        .set_objective(
            Sense::Maximize,
            vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)],
        );
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.value, ratio(1, 20));
    }
}
