//! Brute-force persuasion values that never build the outcome LP.
//!
//! Candidate posteriors are the vertices of the arrangement formed by the
//! simplex facets and every pairwise receiver indifference hyperplane. Each
//! candidate is scored by the best sender value among the receiver's tied
//! actions, and a small weights program splits the prior across candidates.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{self, LinearProgram, Relation};
use crate::model::{best_response, Belief, Game};
use crate::rational::{dot, Rational};

pub const MAX_ORACLE_ACTIONS: usize = 8;
pub const MAX_ORACLE_STATES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bp,
    ExPost,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle supports at most {MAX_ORACLE_ACTIONS} actions and {MAX_ORACLE_STATES} states, got {actions}x{states}")]
    OracleTooLarge { actions: usize, states: usize },
    #[error("prior has {found} entries but the game has {expected} states")]
    PriorLength { found: usize, expected: usize },
}

/// Solves a square system by exact Gauss-Jordan elimination; `None` if singular.
fn solve_square(mut rows: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rows.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = Rational::one() / &rows[col][col];
        for c in col..n {
            rows[col][c] = &rows[col][c] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..n {
            if r == col || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in col..n {
                let delta = &factor * &rows[col][c];
                rows[r][c] -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    Some(rhs)
}

fn combinations(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, current: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if current.len() == k {
            visit(current);
            return;
        }
        for i in start..n {
            current.push(i);
            go(i + 1, n, k, current, visit);
            current.pop();
        }
    }
    go(0, n, k, &mut Vec::with_capacity(k), visit);
}

/// Every vertex of the simplex cut by all pairwise receiver indifference
/// hyperplanes, sorted and deduplicated.
pub fn candidate_posteriors(game: &Game) -> Vec<Vec<Rational>> {
    let (n, m) = (game.num_actions(), game.num_states());
    let mut hyperplanes: Vec<Vec<Rational>> = (0..m)
        .map(|k| (0..m).map(|j| if j == k { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for b in 0..n {
        for c in b + 1..n {
            let row: Vec<Rational> = (0..m)
                .map(|k| game.receiver_utility(b, k) - game.receiver_utility(c, k))
                .collect();
            if row.iter().any(|x| !x.is_zero()) {
                hyperplanes.push(row);
            }
        }
    }
    let mut points = Vec::new();
    combinations(hyperplanes.len(), m - 1, &mut |chosen| {
        let mut rows: Vec<Vec<Rational>> = chosen.iter().map(|&h| hyperplanes[h].clone()).collect();
        let mut rhs = vec![Rational::zero(); m - 1];
        rows.push(vec![Rational::one(); m]);
        rhs.push(Rational::one());
        if let Some(point) = solve_square(rows, rhs) {
            if point.iter().all(|x| !x.is_negative()) {
                points.push(point);
            }
        }
    });
    points.sort();
    points.dedup();
    points
}

/// Best sender value over the receiver's tied actions at `posterior`,
/// restricted in ex-post mode to actions that do not hurt the sender in any
/// state the posterior can realize.
fn candidate_value(game: &Game, posterior: &Belief, admissible: &dyn Fn(usize, &Belief) -> bool) -> Option<Rational> {
    best_response(game, posterior)
        .tied
        .iter()
        .filter(|&&a| admissible(a, posterior))
        .map(|&a| dot(&game.sender()[a], posterior.probabilities()))
        .max()
}

pub fn oracle_value(game: &Game, prior: &Belief, mode: Mode) -> Result<Rational, OracleError> {
    let (n, m) = (game.num_actions(), game.num_states());
    if n > MAX_ORACLE_ACTIONS || m > MAX_ORACLE_STATES {
        return Err(OracleError::OracleTooLarge { actions: n, states: m });
    }
    if prior.len() != m {
        return Err(OracleError::PriorLength { found: prior.len(), expected: m });
    }
    let k = best_response(game, prior).action;
    let admissible = |a: usize, posterior: &Belief| match mode {
        Mode::Bp => true,
        Mode::ExPost => posterior
            .support()
            .into_iter()
            .all(|s| game.sender_utility(a, s) >= game.sender_utility(k, s)),
    };
    let scored: Vec<(Vec<Rational>, Rational)> = candidate_posteriors(game)
        .into_iter()
        .filter_map(|p| {
            let belief = Belief::new(p.clone()).expect("arrangement vertices lie in the simplex");
            candidate_value(game, &belief, &admissible).map(|v| (p, v))
        })
        .collect();
    let mut weights = LinearProgram::maximize(scored.iter().map(|(_, v)| v.clone()).collect());
    for s in 0..m {
        let row = scored.iter().map(|(p, _)| p[s].clone()).collect();
        weights.add_constraint(row, Relation::Eq, prior[s].clone());
    }
    let solution = lp::solve(&weights).expect("weights program is well formed");
    Ok(solution
        .value
        .expect("the prior splits into vertices of its own best-response region"))
}
