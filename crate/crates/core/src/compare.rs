//! Sender values under four information models: Bayesian persuasion,
//! ex-post IR persuasion, credible persuasion and cheap talk.
//!
//! The first two come from the LPs. The other two have no general algorithm
//! here; they are reported exactly only when a sufficient condition holds,
//! and as unknown otherwise.

use std::fmt;

use crate::geometry::{quasiconcave_closure, vhat_curve};
use crate::model::{no_communication_value, sender_preference_order, Belief, Game, Matrix};
use crate::rational::Rational;
use crate::solver::{solve_bp, solve_expost, SolveError};

/// Sufficient conditions under which a gated value is known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// `v(a, θ) = f(θ) + g(a)`: credible persuasion reaches the persuasion value.
    AdditivelySeparable,
    /// Supermodular `v` and submodular `u`: credible persuasion is no communication.
    SupermodularSubmodular,
    /// Two states and a continuous `v̂`: cheap talk reaches the persuasion value.
    ContinuousVhat,
    /// Two states and state-independent `v`: cheap talk reaches the
    /// quasiconcave closure. This rests on an external result.
    StateIndependentSender,
}

impl Gate {
    pub fn name(self) -> &'static str {
        match self {
            Gate::AdditivelySeparable => "additively_separable",
            Gate::SupermodularSubmodular => "supermodular_submodular",
            Gate::ContinuousVhat => "continuous_vhat",
            Gate::StateIndependentSender => "state_independent_sender",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GatedValue {
    Exact { value: Rational, gate: Gate },
    Unknown { reason: String },
}

impl GatedValue {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            GatedValue::Exact { value, .. } => Some(value),
            GatedValue::Unknown { .. } => None,
        }
    }

    pub fn gate(&self) -> Option<Gate> {
        match self {
            GatedValue::Exact { gate, .. } => Some(*gate),
            GatedValue::Unknown { .. } => None,
        }
    }

    fn unknown(reason: &str) -> Self {
        GatedValue::Unknown {
            reason: reason.to_string(),
        }
    }
}

/// `v(a, θ) − v(a, θ')` does not depend on `a`.
pub fn is_additively_separable(v: &Matrix) -> bool {
    let Some(first) = v.first() else { return true };
    v.iter().all(|row| {
        let shift = &row[0] - &first[0];
        row.iter().zip(first).all(|(x, y)| x - y == shift)
    })
}

fn adjacent_differences(m: &Matrix) -> impl Iterator<Item = Rational> + '_ {
    m.windows(2).flat_map(|rows| {
        (0..rows[0].len().saturating_sub(1))
            .map(move |k| &rows[1][k + 1] + &rows[0][k] - &rows[1][k] - &rows[0][k + 1])
    })
}

/// `m(a_{i+1}, θ_{k+1}) + m(a_i, θ_k) ≥ m(a_{i+1}, θ_k) + m(a_i, θ_{k+1})`
/// for every adjacent pair, in the given index order.
pub fn is_supermodular(m: &Matrix) -> bool {
    adjacent_differences(m).all(|d| d >= Rational::from_integer(0.into()))
}

pub fn is_submodular(m: &Matrix) -> bool {
    adjacent_differences(m).all(|d| d <= Rational::from_integer(0.into()))
}

pub fn credible_value(game: &Game, prior: &Belief) -> Result<GatedValue, SolveError> {
    if is_additively_separable(game.sender()) {
        return Ok(GatedValue::Exact {
            value: solve_bp(game, prior)?.value,
            gate: Gate::AdditivelySeparable,
        });
    }
    if is_supermodular(game.sender()) && is_submodular(game.receiver()) {
        solve_bp(game, prior)?;
        return Ok(GatedValue::Exact {
            value: no_communication_value(game, prior),
            gate: Gate::SupermodularSubmodular,
        });
    }
    Ok(GatedValue::unknown(
        "sender utility is not additively separable and the supermodular/submodular pair does not hold",
    ))
}

pub fn cheap_talk_value(game: &Game, prior: &Belief) -> Result<GatedValue, SolveError> {
    let bp = solve_bp(game, prior)?.value;
    let Ok(vhat) = vhat_curve(game) else {
        return Ok(GatedValue::unknown("cheap-talk gates need exactly two states"));
    };
    if vhat.is_continuous() {
        return Ok(GatedValue::Exact {
            value: bp,
            gate: Gate::ContinuousVhat,
        });
    }
    if game.is_sender_state_independent() {
        return Ok(GatedValue::Exact {
            value: quasiconcave_closure(&vhat).curve.eval(&prior[0]),
            gate: Gate::StateIndependentSender,
        });
    }
    Ok(GatedValue::unknown(
        "sender's expected utility jumps and sender utility depends on the state",
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Holds,
    Fails,
    Skipped,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Holds => "holds",
            CheckStatus::Fails => "fails",
            CheckStatus::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingCheck {
    pub inequality: &'static str,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareReport {
    pub v_bp: Rational,
    pub v_expost: Rational,
    pub v_credible: GatedValue,
    pub v_cheap: GatedValue,
    /// Whether the sender ranks actions the same way in every state.
    pub sender_order_holds: bool,
    pub ordering_checks: Vec<OrderingCheck>,
}

impl CompareReport {
    /// Known values from largest to smallest, ties joined by `=` in the
    /// order expost, bp, credible, cheap.
    pub fn ordering_line(&self) -> String {
        let mut known: Vec<(&str, &Rational)> = vec![("expost", &self.v_expost), ("bp", &self.v_bp)];
        if let Some(v) = self.v_credible.value() {
            known.push(("credible", v));
        }
        if let Some(v) = self.v_cheap.value() {
            known.push(("cheap", v));
        }
        // Stable sort keeps the canonical order within ties.
        known.sort_by(|a, b| b.1.cmp(a.1));
        let mut line = String::from(known[0].0);
        for w in known.windows(2) {
            line.push_str(if w[0].1 == w[1].1 { " = " } else { " > " });
            line.push_str(w[1].0);
        }
        line
    }
}

fn check(larger: Option<&Rational>, smaller: Option<&Rational>, inequality: &'static str) -> OrderingCheck {
    let status = match (larger, smaller) {
        (Some(a), Some(b)) if a >= b => CheckStatus::Holds,
        (Some(_), Some(_)) => CheckStatus::Fails,
        _ => CheckStatus::Skipped,
    };
    OrderingCheck { inequality, status }
}

pub fn compare_report(game: &Game, prior: &Belief) -> Result<CompareReport, SolveError> {
    let v_bp = solve_bp(game, prior)?.value;
    let v_expost = solve_expost(game, prior)?.value;
    let v_credible = credible_value(game, prior)?;
    let v_cheap = cheap_talk_value(game, prior)?;
    let ordering_checks = vec![
        check(Some(&v_bp), Some(&v_expost), "bp >= expost"),
        check(Some(&v_bp), v_credible.value(), "bp >= credible"),
        check(v_credible.value(), v_cheap.value(), "credible >= cheap"),
        check(Some(&v_expost), v_cheap.value(), "expost >= cheap"),
    ];
    Ok(CompareReport {
        sender_order_holds: sender_preference_order(game).is_some(),
        v_bp,
        v_expost,
        v_credible,
        v_cheap,
        ordering_checks,
    })
}
