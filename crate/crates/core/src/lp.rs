//! Exact linear programming over rationals.
//!
//! A dense two-phase primal simplex with Bland's least-index pivot rule.
//! Bland's rule never cycles, which matters here: the persuasion programs
//! are heavily degenerate (many obedience rows are tight at zero).

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{dot, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn is_satisfied_by(&self, assignment: &[Rational]) -> bool {
        let lhs = dot(&self.coefficients, assignment);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }

    /// `rhs - lhs` for `≤`, `lhs - rhs` for `≥`, `|lhs - rhs|` for `=`.
    pub fn slack(&self, assignment: &[Rational]) -> Rational {
        let lhs = dot(&self.coefficients, assignment);
        match self.relation {
            Relation::Le => &self.rhs - lhs,
            Relation::Ge => lhs - &self.rhs,
            Relation::Eq => (lhs - &self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bound {
    pub lower: Rational,
    pub upper: Option<Rational>,
}

impl Default for Bound {
    fn default() -> Self {
        Bound {
            lower: Rational::zero(),
            upper: None,
        }
    }
}

/// `maximize objective · x` subject to the constraints and variable bounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("a linear program needs at least one variable")]
    NoVariables,
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    RowLength {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("expected {expected} variable bounds, found {found}")]
    BoundsLength { found: usize, expected: usize },
}

impl LinearProgram {
    /// A program over `objective.len()` variables, all bounded below by zero.
    pub fn maximize(objective: Vec<Rational>) -> Self {
        let bounds = vec![Bound::default(); objective.len()];
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coefficients: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, var: usize, lower: Rational, upper: Option<Rational>) {
        self.bounds[var] = Bound { lower, upper };
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(LpError::NoVariables);
        }
        if self.bounds.len() != n {
            return Err(LpError::BoundsLength {
                found: self.bounds.len(),
                expected: n,
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(LpError::RowLength {
                    row,
                    found: c.coefficients.len(),
                    expected: n,
                });
            }
        }
        Ok(())
    }

    /// True when `assignment` satisfies every row and bound exactly.
    pub fn is_feasible(&self, assignment: &[Rational]) -> bool {
        assignment.len() == self.num_vars()
            && self.bounds.iter().zip(assignment).all(|(b, x)| {
                *x >= b.lower && b.upper.as_ref().is_none_or(|u| x <= u)
            })
            && self.constraints.iter().all(|c| c.is_satisfied_by(assignment))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: Option<Rational>,
    pub assignment: Option<Vec<Rational>>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        LpSolution {
            status,
            value: None,
            assignment: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves `lp` exactly. Infeasibility and unboundedness are reported through
/// [`LpStatus`]; only malformed input is an error.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();

    // Shift every variable to x = lower + x', x' >= 0; upper bounds become rows.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let shift = dot(&c.coefficients, &lower_bounds(lp));
        rows.push((c.coefficients.clone(), c.relation, &c.rhs - shift));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if let Some(upper) = &b.upper {
            let mut coeffs = vec![Rational::zero(); n];
            coeffs[j] = Rational::from_integer(1.into());
            rows.push((coeffs, Relation::Le, upper - &b.lower));
        }
    }
    dedup_rows(&mut rows);

    let mut tableau = Tableau::build(n, &rows);
    if !tableau.phase_one() {
        return Ok(LpSolution::without_point(LpStatus::Infeasible));
    }
    if !tableau.phase_two(&lp.objective) {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let assignment: Vec<Rational> = tableau
        .structural_values()
        .into_iter()
        .zip(&lp.bounds)
        .map(|(x, b)| x + &b.lower)
        .collect();
    let value = dot(&lp.objective, &assignment);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: Some(value),
        assignment: Some(assignment),
    })
}

fn lower_bounds(lp: &LinearProgram) -> Vec<Rational> {
    lp.bounds.iter().map(|b| b.lower.clone()).collect()
}

/// Removes exact duplicate rows, keeping the first occurrence.
fn dedup_rows(rows: &mut Vec<(Vec<Rational>, Relation, Rational)>) {
    let mut seen = std::collections::HashSet::new();
    rows.retain(|row| seen.insert(row.clone()));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs `c_j - z_j` followed by the negated objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
    structural: usize,
}

impl Tableau {
    fn build(structural: usize, rows: &[(Vec<Rational>, Relation, Rational)]) -> Self {
        let mut kinds = vec![ColumnKind::Structural; structural];
        // Column layout: structural | one slack/surplus per inequality | artificials.
        let mut slack_of = Vec::with_capacity(rows.len());
        for (_, rel, _) in rows {
            if *rel == Relation::Eq {
                slack_of.push(None);
            } else {
                slack_of.push(Some(kinds.len()));
                kinds.push(ColumnKind::Slack);
            }
        }
        let mut normalized = Vec::with_capacity(rows.len());
        let mut needs_artificial = Vec::with_capacity(rows.len());
        for (coeffs, rel, rhs) in rows {
            let flip = rhs.is_negative();
            let sign = |x: &Rational| if flip { -x.clone() } else { x.clone() };
            let coeffs: Vec<Rational> = coeffs.iter().map(sign).collect();
            let rhs = sign(rhs);
            let slack_sign = match (rel, flip) {
                (Relation::Le, false) | (Relation::Ge, true) => 1,
                (Relation::Ge, false) | (Relation::Le, true) => -1,
                (Relation::Eq, _) => 0,
            };
            needs_artificial.push(slack_sign != 1);
            normalized.push((coeffs, slack_sign, rhs));
        }
        let mut artificial_of = Vec::with_capacity(rows.len());
        for needs in &needs_artificial {
            if *needs {
                artificial_of.push(Some(kinds.len()));
                kinds.push(ColumnKind::Artificial);
            } else {
                artificial_of.push(None);
            }
        }
        let width = kinds.len() + 1;
        let mut table = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        for (i, (coeffs, slack_sign, rhs)) in normalized.into_iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            for (j, a) in coeffs.into_iter().enumerate() {
                row[j] = a;
            }
            if let Some(s) = slack_of[i] {
                row[s] = Rational::from_integer(slack_sign.into());
            }
            match artificial_of[i] {
                Some(a) => {
                    row[a] = Rational::from_integer(1.into());
                    basis.push(a);
                }
                None => basis.push(slack_of[i].expect("slack-based row has a slack column")),
            }
            row[width - 1] = rhs;
            table.push(row);
        }
        Tableau {
            rows: table,
            cost: vec![Rational::zero(); width],
            basis,
            kinds,
            structural,
        }
    }

    fn width(&self) -> usize {
        self.kinds.len() + 1
    }

    /// Loads reduced costs for `maximize objective · x` given the current basis.
    fn load_objective(&mut self, objective: &[Rational]) {
        let width = self.width();
        let mut cost = vec![Rational::zero(); width];
        for (j, c) in objective.iter().enumerate() {
            cost[j] = c.clone();
        }
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    cost[j] -= &cb * a;
                }
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width();
        let pivot = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            if !x.is_zero() {
                *x /= &pivot;
            }
        }
        let support: Vec<usize> = (0..width).filter(|&j| !self.rows[row][j].is_zero()).collect();
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for &j in &support {
                r[j] -= &factor * &pivot_row[j];
            }
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for &j in &support {
                self.cost[j] -= &factor * &pivot_row[j];
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule until optimal. Returns false when unbounded.
    fn iterate(&mut self, allowed: impl Fn(ColumnKind) -> bool) -> bool {
        let rhs = self.width() - 1;
        loop {
            let entering = (0..rhs).find(|&j| allowed(self.kinds[j]) && self.cost[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if !r[col].is_positive() {
                    continue;
                }
                let ratio = &r[rhs] / &r[col];
                let better = match &leaving {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio || (ratio == *best_ratio && self.basis[i] < self.basis[*best])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    /// Finds a basic feasible solution. Returns false when none exists.
    fn phase_one(&mut self) -> bool {
        if !self.kinds.contains(&ColumnKind::Artificial) {
            return true;
        }
        let phase_one_objective: Vec<Rational> = self
            .kinds
            .iter()
            .map(|k| match k {
                ColumnKind::Artificial => Rational::from_integer((-1).into()),
                _ => Rational::zero(),
            })
            .collect();
        self.load_objective(&phase_one_objective);
        let bounded = self.iterate(|_| true);
        debug_assert!(bounded, "phase one objective is bounded by zero");
        let rhs = self.width() - 1;
        let infeasibility = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| self.kinds[b] == ColumnKind::Artificial)
            .fold(Rational::zero(), |acc, (i, _)| acc + &self.rows[i][rhs]);
        if infeasibility.is_positive() {
            return false;
        }
        self.expel_artificials();
        true
    }

    /// Pivots zero-valued artificials out of the basis; drops rows that are
    /// linear combinations of the others.
    fn expel_artificials(&mut self) {
        let rhs = self.width() - 1;
        let mut i = 0;
        while i < self.rows.len() {
            if self.kinds[self.basis[i]] != ColumnKind::Artificial {
                i += 1;
                continue;
            }
            let replacement =
                (0..rhs).find(|&j| self.kinds[j] != ColumnKind::Artificial && !self.rows[i][j].is_zero());
            match replacement {
                Some(col) => {
                    self.pivot(i, col);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    /// Optimizes the real objective. Returns false when unbounded.
    fn phase_two(&mut self, objective: &[Rational]) -> bool {
        self.load_objective(objective);
        self.iterate(|k| k != ColumnKind::Artificial)
    }

    fn structural_values(&self) -> Vec<Rational> {
        let rhs = self.width() - 1;
        let mut values = vec![Rational::zero(); self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                values[b] = self.rows[i][rhs].clone();
            }
        }
        values
    }
}
