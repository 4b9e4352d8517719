//! Small named games used throughout the docs, tests and CLI fixtures.

use crate::model::{Game, Matrix};
use crate::rational::{int, rat, Rational};

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn ints(rows: &[&[i64]]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

fn constant_rows(values: &[Rational], states: usize) -> Matrix {
    values.iter().map(|v| vec![v.clone(); states]).collect()
}

/// Lending: a lender rejects below 3/10 repayment probability, lends small on
/// `[3/10, 1)` and lends big only when repayment is certain. States are
/// `(repay, default)`; the agency earns 0, 1 or 10.
pub fn lending() -> Game {
    Game::new(
        labels(&["reject", "small", "huge"]),
        labels(&["repay", "default"]),
        ints(&[&[0, 0], &[1, 1], &[10, 10]]),
        ints(&[&[0, 0], &[7, -3], &[7, -10]]),
    )
    .expect("static game is well formed")
}

fn quasi_receiver() -> Matrix {
    ints(&[&[8, 0], &[7, 3], &[0, 8], &[3, 7]])
}

/// Four actions, state-independent sender utilities 4, 3, 2, 1.
pub fn quasi_first_sender() -> Game {
    Game::from_matrices(constant_rows(&[int(4), int(3), int(2), int(1)], 2), quasi_receiver())
        .expect("static game is well formed")
}

/// Same receiver as [`quasi_first_sender`], sender utilities 4, 7/2, 2, 1.
pub fn quasi_second_sender() -> Game {
    Game::from_matrices(constant_rows(&[int(4), rat(7, 2), int(2), int(1)], 2), quasi_receiver())
        .expect("static game is well formed")
}

/// Additively separable sender where credible persuasion beats the ex-post
/// IR constraint.
pub fn compare_credible_wins() -> Game {
    Game::from_matrices(
        constant_rows(&[int(0), rat(1, 2), int(4)], 2),
        ints(&[&[0, -16], &[-4, -4], &[-16, 0]]),
    )
    .expect("static game is well formed")
}

/// Two actions, supermodular sender and submodular receiver: the ex-post IR
/// constraint is free while credible persuasion collapses to no communication.
pub fn compare_expost_wins() -> Game {
    Game::from_matrices(ints(&[&[1, 1], &[2, 3]]), ints(&[&[1, 1], &[2, -1]]))
        .expect("static game is well formed")
}

/// Five actions without a sender preference order; v̂ is continuous, so
/// cheap talk reaches the persuasion value while the ex-post IR optimum is
/// no communication at interior priors.
pub fn cheap_talk_gap() -> Game {
    Game::from_matrices(
        ints(&[&[10, 0], &[-2, 3], &[1, 1], &[3, -2], &[0, 10]]),
        ints(&[&[-4, 21], &[0, 20], &[12, 12], &[20, 0], &[21, -4]]),
    )
    .expect("static game is well formed")
}
