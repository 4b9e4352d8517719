//! The greedy signaling scheme for square games and credence-goods markets.
//!
//! Round `i` solves a small LP that recommends action `a_i` as often as the
//! remaining prior budget and the receiver's obedience allow, then removes
//! that mass from the budget. When the receiver's utility is cyclically
//! monotone and weakly log-supermodular, and the sender ranks the actions
//! the same way in every state, the result is ex-post IR.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{self, LinearProgram, Relation};
use crate::model::{Belief, Game, Matrix};
use crate::rational::{dot, Rational};
use crate::solver::{is_expost_ir, solve_bp, solve_expost, OutcomeDistribution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GreedyError {
    #[error("greedy signaling needs as many actions as states, got {actions}x{states}")]
    DimensionMismatch { actions: usize, states: usize },
    #[error("prior has {found} entries but the game has {expected} states")]
    PriorLength { found: usize, expected: usize },
    #[error("budget left after the last round: {residual:?}")]
    BudgetNotExhausted {
        residual: Vec<Rational>,
        trace: Box<GreedyTrace>,
    },
    #[error("receiver utility is not cyclically monotone and weakly log-supermodular")]
    ConditionsNotMet(ConditionReport),
    #[error("invalid credence parameters: {0}")]
    ParamInvariantViolated(String),
}

/// A failed inequality, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionWitness {
    /// In column `k` read cyclically from the diagonal, position `i` sits
    /// below position `j > i`.
    Cyclic { i: usize, j: usize, k: usize },
    /// `u(i,k) u(j,k+1) < u(j,k) u(i,k+1)` with `i < j`, `j ≠ k`.
    LogSupermodular { i: usize, j: usize, k: usize },
    /// A non-positive entry makes the ratio test inapplicable.
    NonPositive { i: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub cyclically_monotone: bool,
    pub weakly_log_supermodular: bool,
    /// False when some entry is non-positive and the ratio test was skipped.
    pub log_supermodularity_applicable: bool,
    pub witnesses: Vec<ConditionWitness>,
}

impl ConditionReport {
    pub fn both_hold(&self) -> bool {
        self.cyclically_monotone && self.weakly_log_supermodular
    }
}

pub fn check_conditions(u: &Matrix) -> Result<ConditionReport, GreedyError> {
    let n = u.len();
    if u.iter().any(|row| row.len() != n) {
        return Err(GreedyError::DimensionMismatch {
            actions: n,
            states: u.first().map_or(0, Vec::len),
        });
    }
    let mut witnesses = Vec::new();
    let mut cyclically_monotone = true;
    for k in 0..n {
        for p in 0..n.saturating_sub(1) {
            if u[(k + p) % n][k] < u[(k + p + 1) % n][k] {
                cyclically_monotone = false;
                witnesses.push(ConditionWitness::Cyclic { i: p, j: p + 1, k });
            }
        }
    }

    let mut applicable = true;
    for (i, row) in u.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            if !x.is_positive() {
                applicable = false;
                witnesses.push(ConditionWitness::NonPositive { i, k });
            }
        }
    }
    let mut weakly_log_supermodular = applicable;
    if applicable {
        for k in 0..n.saturating_sub(1) {
            for j in (1..n).filter(|&j| j != k) {
                for i in 0..j {
                    if &u[i][k] * &u[j][k + 1] < &u[j][k] * &u[i][k + 1] {
                        weakly_log_supermodular = false;
                        witnesses.push(ConditionWitness::LogSupermodular { i, j, k });
                    }
                }
            }
        }
    }
    Ok(ConditionReport {
        cyclically_monotone,
        weakly_log_supermodular,
        log_supermodularity_applicable: applicable,
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyRound {
    /// Action recommended this round, as an index of the input game.
    pub action: usize,
    /// The round's program over the states that carry prior mass.
    pub lp: LinearProgram,
    /// `π(a_i, ·)` over all states.
    pub row: Vec<Rational>,
    /// Budget left after the round, over all states.
    pub residual: Vec<Rational>,
}

impl GreedyRound {
    pub fn mass(&self) -> Rational {
        self.row.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyTrace {
    pub rounds: Vec<GreedyRound>,
    pub outcome: OutcomeDistribution,
    pub value: Rational,
    pub exhausted: bool,
    /// Input indices kept after dropping states without prior mass.
    pub kept: Vec<usize>,
}

/// `LP_i`: maximize `Σ_k x_k` subject to obedience against every other
/// action and `x_k ≤ μ(k)`.
fn round_program(game: &Game, i: usize, budget: &[Rational]) -> LinearProgram {
    let m = game.num_states();
    let mut lp = LinearProgram::maximize(vec![Rational::one(); m]);
    for j in (0..game.num_actions()).filter(|&j| j != i) {
        let row = (0..m)
            .map(|k| game.receiver_utility(j, k) - game.receiver_utility(i, k))
            .collect();
        lp.add_constraint(row, Relation::Le, Rational::zero());
    }
    for (k, cap) in budget.iter().enumerate() {
        let mut row = vec![Rational::zero(); m];
        row[k] = Rational::one();
        lp.add_constraint(row, Relation::Le, cap.clone());
    }
    lp
}

/// Among the optimal rows of `LP_i`, the one taking as much as possible from
/// the last state, then the one before it, and so on. Early states stay in
/// the budget for the later rounds, whose obedience they support.
fn later_states_first(lp: &LinearProgram) -> Vec<Rational> {
    let solve = |program: &LinearProgram| {
        lp::solve(program)
            .expect("round program is well formed")
            .assignment
            .expect("zero is feasible and the budget bounds the objective")
    };
    let m = lp.num_vars();
    let first = solve(lp);
    let mut program = lp.clone();
    program.add_constraint(vec![Rational::one(); m], Relation::Eq, first.iter().sum());
    let mut row = first;
    for k in (0..m).rev() {
        let mut unit = vec![Rational::zero(); m];
        unit[k] = Rational::one();
        program.objective = unit.clone();
        row = solve(&program);
        program.add_constraint(unit, Relation::Eq, row[k].clone());
    }
    row
}

pub fn greedy_scheme(game: &Game, prior: &Belief) -> Result<GreedyTrace, GreedyError> {
    let (n, m) = (game.num_actions(), game.num_states());
    if n != m {
        return Err(GreedyError::DimensionMismatch { actions: n, states: m });
    }
    if prior.len() != m {
        return Err(GreedyError::PriorLength { found: prior.len(), expected: m });
    }
    let kept = prior.support();
    let all_actions: Vec<usize> = (0..n).collect();
    let reduced = game.restrict(&all_actions, &kept);
    let embed = |measure: &[Rational]| {
        let mut full = vec![Rational::zero(); m];
        for (r, &s) in kept.iter().enumerate() {
            full[s] = measure[r].clone();
        }
        full
    };

    let mut budget: Vec<Rational> = kept.iter().map(|&s| prior[s].clone()).collect();
    let mut rounds = Vec::new();
    let mut pi = vec![vec![Rational::zero(); m]; n];
    let mut value = Rational::zero();
    for action in 0..n {
        if budget.iter().all(Zero::is_zero) {
            break;
        }
        let lp = round_program(&reduced, action, &budget);
        let row = later_states_first(&lp);
        for (b, x) in budget.iter_mut().zip(&row) {
            *b -= x;
        }
        let full_row = embed(&row);
        value += dot(&game.sender()[action], &full_row);
        pi[action] = full_row.clone();
        rounds.push(GreedyRound {
            action,
            lp,
            row: full_row,
            residual: embed(&budget),
        });
    }

    let exhausted = budget.iter().all(Zero::is_zero);
    let residual = embed(&budget);
    let trace = GreedyTrace {
        rounds,
        outcome: OutcomeDistribution { pi },
        value,
        exhausted,
        kept,
    };
    if !exhausted {
        return Err(GreedyError::BudgetNotExhausted {
            residual,
            trace: Box::new(trace),
        });
    }
    Ok(trace)
}

/// Whether the residual at the round's own state is zero after the round.
pub fn round_uses_up_own_state(trace: &GreedyTrace, round: usize) -> bool {
    let state = trace.rounds[round].action;
    trace.rounds[round].residual[state].is_zero()
}

/// Rows of `lp` holding obedience against `a_j` (none in `a_j`'s own round)
/// and the budget on reduced state `j`.
fn tight_rows(lp: &LinearProgram, kept: &[usize], own: usize, j: usize) -> (Option<usize>, usize) {
    let budget = lp.constraints.len() - kept.len() + j;
    let action = kept[j];
    let obedience = match action.cmp(&own) {
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Less => Some(action),
        std::cmp::Ordering::Greater => Some(action - 1),
    };
    (obedience, budget)
}

/// For each kept state `j`, whether obedience against `a_j` or the budget
/// on `θ_j` binds at `assignment` (reduced indices).
fn binds_everywhere(lp: &LinearProgram, kept: &[usize], own: usize, assignment: &[Rational]) -> bool {
    (0..kept.len()).all(|j| {
        let (obedience, budget) = tight_rows(lp, kept, own, j);
        obedience.is_none_or(|row| lp.constraints[row].slack(assignment).is_zero())
            || lp.constraints[budget].slack(assignment).is_zero()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BindCheck {
    /// Every state has a tight constraint at the returned optimum.
    pub returned: bool,
    /// Some optimum has a tight constraint at every state.
    pub exists: bool,
}

/// Checks that at round `round`'s optimum, for every state `j`, either the
/// obedience constraint against `a_j` or the budget on `θ_j` is tight.
/// When the returned optimum fails, searches the optimal face for one that
/// passes by fixing one tight constraint per state.
pub fn bind_check(trace: &GreedyTrace, round: usize) -> BindCheck {
    let r = &trace.rounds[round];
    let assignment: Vec<Rational> = trace.kept.iter().map(|&s| r.row[s].clone()).collect();
    let returned = binds_everywhere(&r.lp, &trace.kept, r.action, &assignment);
    if returned {
        return BindCheck { returned, exists: true };
    }
    let m = assignment.len();
    let optimum: Rational = assignment.iter().sum();
    let exists = (0..1u32 << m).any(|choice| {
        let mut face = r.lp.clone();
        face.add_constraint(vec![Rational::one(); m], Relation::Eq, optimum.clone());
        for j in 0..m {
            let (obedience, budget) = tight_rows(&r.lp, &trace.kept, r.action, j);
            let row = match (choice & (1 << j) != 0, obedience) {
                (true, _) => budget,
                (false, Some(row)) => row,
                (false, None) => continue,
            };
            let c = r.lp.constraints[row].clone();
            face.add_constraint(c.coefficients, Relation::Eq, c.rhs);
        }
        lp::solve(&face).expect("well formed").is_optimal()
    });
    BindCheck { returned, exists }
}

/// Treatments `1..n` with prices `p`, expert margins `s`, loss `l` from an
/// unsolved problem and a baseline `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CredenceParams {
    pub prices: Vec<Rational>,
    pub margins: Vec<Rational>,
    pub loss: Rational,
    pub offset: Rational,
}

impl CredenceParams {
    /// Loss `10 · p_n` and the smallest integer offset keeping every
    /// receiver utility at least one.
    pub fn with_default_loss(prices: Vec<Rational>, margins: Vec<Rational>) -> Self {
        let top = prices.last().cloned().unwrap_or_else(Rational::zero);
        let loss = &top * Rational::from_integer(10.into());
        let offset = (&top + &loss + Rational::one()).ceil();
        CredenceParams {
            prices,
            margins,
            loss,
            offset,
        }
    }

    pub fn n(&self) -> usize {
        self.prices.len()
    }

    pub fn validate(&self) -> Result<(), GreedyError> {
        let fail = |msg: &str| Err(GreedyError::ParamInvariantViolated(msg.to_string()));
        if self.prices.is_empty() {
            return fail("at least one treatment is required");
        }
        if self.prices.len() != self.margins.len() {
            return fail("prices and margins differ in length");
        }
        if !self.prices.windows(2).all(|w| w[0] < w[1]) {
            return fail("prices must strictly increase");
        }
        if !self.margins.windows(2).all(|w| w[0] > w[1]) {
            return fail("margins must strictly decrease");
        }
        if self.loss.is_negative() {
            return fail("loss must be nonnegative");
        }
        let n = self.n();
        let mut lowest = &self.offset - &self.prices[n - 1];
        if n > 1 {
            lowest = lowest.min(&self.offset - &self.prices[n - 2] - &self.loss);
        }
        if !lowest.is_positive() {
            return fail("offset too small: some receiver utility is not positive");
        }
        Ok(())
    }
}

/// `u(a_i, θ_j) = c - p_i - l·1{i < j}` and `v(a_i, θ_j) = s_i`.
pub fn make_credence_game(params: &CredenceParams) -> Result<Game, GreedyError> {
    params.validate()?;
    let n = params.n();
    let receiver: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let base = &params.offset - &params.prices[i];
                    if i < j {
                        base - &params.loss
                    } else {
                        base
                    }
                })
                .collect()
        })
        .collect();
    let sender: Matrix = params.margins.iter().map(|s| vec![s.clone(); n]).collect();
    let actions = (1..=n).map(|i| format!("treat{i}")).collect();
    let states = (1..=n).map(|i| format!("problem{i}")).collect();
    Ok(Game::new(actions, states, sender, receiver).expect("square matrices"))
}

/// Closed-form mass of round `i` on a credence game given the budget left
/// by the previous rounds.
pub fn perturbation_loss_mass(params: &CredenceParams, residual: &[Rational], i: usize) -> Rational {
    let n = params.n();
    let up_to_i: Rational = residual[..=i].iter().sum();
    (i..n)
        .map(|j| {
            let tail: Rational = residual[j + 1..].iter().sum();
            let discount = Rational::one() - (&params.prices[j] - &params.prices[i]) / &params.loss;
            (&up_to_i + tail) / discount
        })
        .min()
        .expect("i < n")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapBound {
    pub v_bp: Rational,
    pub v_expost: Rational,
    pub v_greedy: Rational,
    pub greedy_expost_ir: bool,
    /// `V - V_expost ≤ V - V_greedy`.
    pub bound_holds: bool,
}

pub fn greedy_gap_bound(game: &Game, prior: &Belief) -> Result<GapBound, GreedyError> {
    let report = check_conditions(game.receiver())?;
    if !report.both_hold() {
        return Err(GreedyError::ConditionsNotMet(report));
    }
    let trace = greedy_scheme(game, prior)?;
    let v_bp = solve_bp(game, prior).expect("prior length checked").value;
    let v_expost = solve_expost(game, prior).expect("prior length checked").value;
    let bound_holds = &v_bp - &v_expost <= &v_bp - &trace.value;
    Ok(GapBound {
        v_bp,
        v_expost,
        greedy_expost_ir: is_expost_ir(&trace.outcome, game, prior),
        v_greedy: trace.value,
        bound_holds,
    })
}
