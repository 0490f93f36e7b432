//! Dense two-phase simplex over exact rationals.
//!
//! Pivoting follows Bland's rule, so the method terminates on degenerate
//! problems. Intended for the small systems that arise from single-slot
//! auctions; there is no attempt at sparse or numerically clever pivoting.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: Vec<Scalar>,
    pub relation: Relation,
    pub rhs: Scalar,
}

/// `minimize c·x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    objective: Vec<Scalar>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpSolution {
    Optimal { x: Vec<Scalar>, value: Scalar },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<Scalar>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coefficients: Vec<Scalar>, relation: Relation, rhs: Scalar) -> &mut Self {
        assert_eq!(coefficients.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        self
    }

    pub fn solve(&self) -> LpSolution {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    n: usize,
    cols: usize,
    /// Each row holds `cols` coefficients followed by the right-hand side.
    rows: Vec<Vec<Scalar>>,
    basis: Vec<usize>,
    artificial_start: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        // Normalize to non-negative right-hand sides.
        let normalized: Vec<(Vec<Scalar>, Relation, Scalar)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coefficients.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else {
                    (c.coefficients.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let slack_count = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let artificial_count = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let artificial_start = n + slack_count;
        let cols = artificial_start + artificial_count;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, artificial_start);
        for (coeffs, relation, rhs) in normalized {
            let mut row = vec![Scalar::zero(); cols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[cols] = rhs;
            match relation {
                Relation::Le => {
                    row[next_slack] = Scalar::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Scalar::one();
                    next_slack += 1;
                    row[next_art] = Scalar::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Scalar::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            n,
            cols,
            rows,
            basis,
            artificial_start,
        }
    }

    fn run(mut self, objective: &[Scalar]) -> LpSolution {
        if self.artificial_start < self.cols {
            let mut phase_one = vec![Scalar::zero(); self.cols];
            for c in &mut phase_one[self.artificial_start..] {
                *c = Scalar::one();
            }
            match self.optimize(&phase_one, self.cols) {
                Phase::Optimal => {}
                Phase::Unbounded => unreachable!("phase one is bounded below by zero"),
            }
            if self.objective_value(&phase_one).is_positive() {
                return LpSolution::Infeasible;
            }
            self.evict_artificials();
        }
        let mut costs = vec![Scalar::zero(); self.cols];
        costs[..self.n].clone_from_slice(objective);
        match self.optimize(&costs, self.artificial_start) {
            Phase::Unbounded => LpSolution::Unbounded,
            Phase::Optimal => {
                let mut x = vec![Scalar::zero(); self.n];
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if b < self.n {
                        x[b] = row[self.cols].clone();
                    }
                }
                let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                LpSolution::Optimal { x, value }
            }
        }
    }

    fn objective_value(&self, costs: &[Scalar]) -> Scalar {
        self.rows
            .iter()
            .zip(&self.basis)
            .map(|(row, &b)| &costs[b] * &row[self.cols])
            .sum()
    }

    /// Runs simplex iterations with entering columns restricted to
    /// `0..allowed`.
    fn optimize(&mut self, costs: &[Scalar], allowed: usize) -> Phase {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = &costs[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| &costs[b] * &row[j])
                        .sum::<Scalar>();
                reduced.is_negative()
            });
            let Some(col) = entering else {
                return Phase::Optimal;
            };
            let mut leaving: Option<(usize, Scalar)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[col];
                let better = match &leaving {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return Phase::Unbounded;
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in &mut self.rows[r] {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// After a zero-cost phase one, pivots remaining (zero-valued) artificial
    /// variables out of the basis, dropping rows that turn out redundant.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.artificial_start {
                r += 1;
                continue;
            }
            match (0..self.artificial_start).find(|&j| !self.rows[r][j].is_zero()) {
                Some(col) => {
                    self.pivot(r, col);
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
    use crate::scalar::s;

    fn v(xs: &[&str]) -> Vec<Scalar> {
        xs.iter().map(|x| s(x)).collect()
    }

    #[test]
    fn covering_lp() {
        // min a + b + 3c, a + c >= 1, b + c >= 1, all <= 1
        let mut lp = LinearProgram::minimize(v(&["1", "1", "3"]));
        lp.constrain(v(&["1", "0", "1"]), Relation::Ge, s("1"))
            .constrain(v(&["0", "1", "1"]), Relation::Ge, s("1"));
        for k in 0..3 {
            let mut row = v(&["0", "0", "0"]);
            row[k] = s("1");
            lp.constrain(row, Relation::Le, s("1"));
        }
        assert_eq!(
            lp.solve(),
            LpSolution::Optimal {
                x: v(&["1", "1", "0"]),
                value: s("2")
            }
        );
    }

    #[test]
    fn textbook_max_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let mut lp = LinearProgram::minimize(v(&["-3", "-5"]));
        lp.constrain(v(&["1", "0"]), Relation::Le, s("4"))
            .constrain(v(&["0", "2"]), Relation::Le, s("12"))
            .constrain(v(&["3", "2"]), Relation::Le, s("18"));
        assert_eq!(
            lp.solve(),
            LpSolution::Optimal {
                x: v(&["2", "6"]),
                value: s("-36")
            }
        );
    }

    #[test]
    fn equality_and_negative_rhs() {
        // min x + y, x - y = -1/3, x >= 0 -> x = 0, y = 1/3
        let mut lp = LinearProgram::minimize(v(&["1", "1"]));
        lp.constrain(v(&["1", "-1"]), Relation::Eq, s("-1/3"));
        assert_eq!(
            lp.solve(),
            LpSolution::Optimal {
                x: v(&["0", "1/3"]),
                value: s("1/3")
            }
        );
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::minimize(v(&["1", "2"]));
        lp.constrain(v(&["1", "1"]), Relation::Eq, s("2"))
            .constrain(v(&["2", "2"]), Relation::Eq, s("4"));
        assert_eq!(
            lp.solve(),
            LpSolution::Optimal {
                x: v(&["2", "0"]),
                value: s("2")
            }
        );
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::minimize(v(&["1"]));
        lp.constrain(v(&["1"]), Relation::Ge, s("2"))
            .constrain(v(&["1"]), Relation::Le, s("1"));
        assert_eq!(lp.solve(), LpSolution::Infeasible);

        let mut lp = LinearProgram::minimize(v(&["-1", "0"]));
        lp.constrain(v(&["1", "-1"]), Relation::Le, s("1"));
        assert_eq!(lp.solve(), LpSolution::Unbounded);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Classic cycling example (Beale); Bland's rule must terminate.
        let mut lp = LinearProgram::minimize(v(&["-3/4", "150", "-1/50", "6"]));
        lp.constrain(v(&["1/4", "-60", "-1/25", "9"]), Relation::Le, s("0"))
            .constrain(v(&["1/2", "-90", "-1/50", "3"]), Relation::Le, s("0"))
            .constrain(v(&["0", "0", "1", "0"]), Relation::Le, s("1"));
        match lp.solve() {
            LpSolution::Optimal { value, .. } => assert_eq!(value, s("-1/20")),
            other => panic!("{other:?}"),
        }
    }
}
