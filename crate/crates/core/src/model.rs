//! Games, beliefs and the receiver's best response.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{self, LinearProgram, Relation};
use crate::rational::{dot, is_nonnegative, Rational};

/// Utilities indexed `[action][state]`.
pub type Matrix = Vec<Vec<Rational>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a game needs at least one action")]
    NoActions,
    #[error("a game needs at least one state")]
    NoStates,
    #[error("{matrix} utility has {found} rows, expected one per action ({expected})")]
    RowCount {
        matrix: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("{matrix} utility row {row} has {found} entries, expected one per state ({expected})")]
    RowLength {
        matrix: &'static str,
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("belief has {found} entries, expected {expected}")]
    BeliefLength { found: usize, expected: usize },
    #[error("belief entry {index} is negative")]
    NegativeProbability { index: usize },
    #[error("belief sums to {0}, not 1")]
    NotNormalized(Rational),
    #[error("no ordering of the actions makes the sender's utility weakly decreasing in every state")]
    NoOrderingExists,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    actions: Vec<String>,
    states: Vec<String>,
    sender: Matrix,
    receiver: Matrix,
}

impl Game {
    pub fn new(
        actions: Vec<String>,
        states: Vec<String>,
        sender: Matrix,
        receiver: Matrix,
    ) -> Result<Self, ModelError> {
        if actions.is_empty() {
            return Err(ModelError::NoActions);
        }
        if states.is_empty() {
            return Err(ModelError::NoStates);
        }
        for (name, m) in [("sender", &sender), ("receiver", &receiver)] {
            if m.len() != actions.len() {
                return Err(ModelError::RowCount {
                    matrix: name,
                    found: m.len(),
                    expected: actions.len(),
                });
            }
            if let Some((row, r)) = m.iter().enumerate().find(|(_, r)| r.len() != states.len()) {
                return Err(ModelError::RowLength {
                    matrix: name,
                    row,
                    found: r.len(),
                    expected: states.len(),
                });
            }
        }
        Ok(Game {
            actions,
            states,
            sender,
            receiver,
        })
    }

    /// A game with generated labels `a1..an` and `t1..tm`.
    pub fn from_matrices(sender: Matrix, receiver: Matrix) -> Result<Self, ModelError> {
        let n = receiver.len();
        let m = receiver.first().map_or(0, Vec::len);
        Game::new(
            (1..=n).map(|i| format!("a{i}")).collect(),
            (1..=m).map(|k| format!("t{k}")).collect(),
            sender,
            receiver,
        )
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn sender(&self) -> &Matrix {
        &self.sender
    }

    pub fn receiver(&self) -> &Matrix {
        &self.receiver
    }

    pub fn sender_utility(&self, action: usize, state: usize) -> &Rational {
        &self.sender[action][state]
    }

    pub fn receiver_utility(&self, action: usize, state: usize) -> &Rational {
        &self.receiver[action][state]
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }

    pub fn sender_value(&self, action: usize, belief: &Belief) -> Rational {
        dot(&self.sender[action], belief.probabilities())
    }

    pub fn receiver_value(&self, action: usize, belief: &Belief) -> Rational {
        dot(&self.receiver[action], belief.probabilities())
    }

    /// Keeps the listed actions (in the given order) and states.
    pub fn restrict(&self, actions: &[usize], states: &[usize]) -> Game {
        let pick = |m: &Matrix| -> Matrix {
            actions
                .iter()
                .map(|&a| states.iter().map(|&s| m[a][s].clone()).collect())
                .collect()
        };
        Game {
            actions: actions.iter().map(|&a| self.actions[a].clone()).collect(),
            states: states.iter().map(|&s| self.states[s].clone()).collect(),
            sender: pick(&self.sender),
            receiver: pick(&self.receiver),
        }
    }

    pub fn is_sender_state_independent(&self) -> bool {
        self.sender.iter().all(|row| row.iter().all(|x| *x == row[0]))
    }
}

/// A probability vector over states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Belief(Vec<Rational>);

impl Belief {
    pub fn new(probabilities: Vec<Rational>) -> Result<Self, ModelError> {
        if let Some(index) = probabilities.iter().position(|p| p.is_negative()) {
            return Err(ModelError::NegativeProbability { index });
        }
        let total: Rational = probabilities.iter().sum();
        if !total.is_one() {
            return Err(ModelError::NotNormalized(total));
        }
        Ok(Belief(probabilities))
    }

    /// Checks the belief also matches the game's state count.
    pub fn for_game(probabilities: Vec<Rational>, game: &Game) -> Result<Self, ModelError> {
        if probabilities.len() != game.num_states() {
            return Err(ModelError::BeliefLength {
                found: probabilities.len(),
                expected: game.num_states(),
            });
        }
        Belief::new(probabilities)
    }

    pub fn point_mass(num_states: usize, state: usize) -> Self {
        let mut p = vec![Rational::zero(); num_states];
        p[state] = Rational::one();
        Belief(p)
    }

    /// Two-state belief with `first` on the first state.
    pub fn binary(first: Rational) -> Self {
        let second = Rational::one() - &first;
        Belief(vec![first, second])
    }

    pub fn uniform(num_states: usize) -> Self {
        let p = Rational::new(1.into(), (num_states as i64).into());
        Belief(vec![p; num_states])
    }

    /// Normalizes a nonnegative measure with positive mass.
    pub fn from_measure(measure: &[Rational]) -> Option<Self> {
        let total: Rational = measure.iter().sum();
        if !total.is_positive() || !measure.iter().all(is_nonnegative) {
            return None;
        }
        Some(Belief(measure.iter().map(|m| m / &total).collect()))
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k].is_positive()).collect()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }
}

impl std::ops::Index<usize> for Belief {
    type Output = Rational;

    fn index(&self, index: usize) -> &Rational {
        &self.0[index]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    pub action: usize,
    pub receiver_value: Rational,
    /// Every receiver-optimal action, ascending.
    pub tied: Vec<usize>,
}

/// The receiver's best response, breaking ties by the sender's expected
/// utility and then by lowest index.
pub fn best_response(game: &Game, belief: &Belief) -> BestResponse {
    let values: Vec<Rational> = (0..game.num_actions()).map(|a| game.receiver_value(a, belief)).collect();
    let best = values.iter().max().expect("games have at least one action").clone();
    let tied: Vec<usize> = (0..values.len()).filter(|&a| values[a] == best).collect();
    let action = sender_favorite(game, &tied, belief);
    BestResponse {
        action,
        receiver_value: best,
        tied,
    }
}

/// Among `candidates`, the action with the highest sender value; lowest index on ties.
pub(crate) fn sender_favorite(game: &Game, candidates: &[usize], belief: &Belief) -> usize {
    let mut best: Option<(usize, Rational)> = None;
    for &a in candidates {
        let v = game.sender_value(a, belief);
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((a, v));
        }
    }
    best.expect("candidate set is nonempty").0
}

/// v̂(μ): the sender's expected utility when the receiver best-responds to μ.
pub fn expected_sender_utility(game: &Game, belief: &Belief) -> Rational {
    game.sender_value(best_response(game, belief).action, belief)
}

pub fn no_communication_value(game: &Game, prior: &Belief) -> Rational {
    expected_sender_utility(game, prior)
}

/// The receiver's expected utility without any information beyond the prior.
pub fn no_communication_receiver_value(game: &Game, prior: &Belief) -> Rational {
    best_response(game, prior).receiver_value
}

/// `true` when `v(a, θ) ≥ v(b, θ)` in every state.
pub fn sender_weakly_prefers(game: &Game, a: usize, b: usize) -> bool {
    game.sender[a].iter().zip(&game.sender[b]).all(|(x, y)| x >= y)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// The game with actions sorted by sender preference when such an order
    /// exists, otherwise the input unchanged.
    pub game: Game,
    /// `order[i]` is the input index of the action now at position `i`.
    pub order: Vec<usize>,
    /// Set when the sender's preference is not a total order over actions.
    pub ordering_error: Option<ModelError>,
    /// Actions (indices into `game`) that are not a best response to any belief.
    pub never_best_response: Vec<usize>,
}

impl ValidationReport {
    pub fn sender_order_holds(&self) -> bool {
        self.ordering_error.is_none()
    }
}

/// Sorts actions by sender preference when possible and lists the actions
/// that are never a receiver best response. Utilities are never changed.
pub fn validate_game(game: &Game) -> ValidationReport {
    let (order, ordering_error) = match sender_preference_order(game) {
        Some(order) => (order, None),
        None => ((0..game.num_actions()).collect(), Some(ModelError::NoOrderingExists)),
    };
    let sorted = game.restrict(&order, &(0..game.num_states()).collect::<Vec<_>>());
    let never_best_response = (0..sorted.num_actions())
        .filter(|&a| !is_best_response_somewhere(&sorted, a))
        .collect();
    ValidationReport {
        game: sorted,
        order,
        ordering_error,
        never_best_response,
    }
}

/// An ordering with `v(a_i, ·) ≥ v(a_j, ·)` componentwise for `i < j`, if any.
pub fn sender_preference_order(game: &Game) -> Option<Vec<usize>> {
    // Componentwise dominance implies a larger row sum, so a valid order (if
    // one exists) is the stable sort by descending row sum.
    let mut order: Vec<usize> = (0..game.num_actions()).collect();
    let sums: Vec<Rational> = game.sender.iter().map(|row| row.iter().sum()).collect();
    order.sort_by(|&a, &b| sums[b].cmp(&sums[a]));
    order
        .windows(2)
        .all(|w| sender_weakly_prefers(game, w[0], w[1]))
        .then_some(order)
}

/// Whether some belief makes `action` receiver-optimal (ties allowed).
pub fn is_best_response_somewhere(game: &Game, action: usize) -> bool {
    let m = game.num_states();
    let mut lp = LinearProgram::maximize(vec![Rational::zero(); m]);
    lp.add_constraint(vec![Rational::one(); m], Relation::Eq, Rational::one());
    for other in (0..game.num_actions()).filter(|&b| b != action) {
        let diff: Vec<Rational> = (0..m)
            .map(|k| &game.receiver[action][k] - &game.receiver[other][k])
            .collect();
        lp.add_constraint(diff, Relation::Ge, Rational::zero());
    }
    lp::solve(&lp).expect("well-formed program").is_optimal()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedGame {
    pub game: Game,
    /// `original[i]` is the input index of the pruned game's action `i`.
    pub original: Vec<usize>,
}

/// Drops actions that are never a receiver best response.
pub fn prune_never_best(game: &Game) -> PrunedGame {
    let keep: Vec<usize> = (0..game.num_actions())
        .filter(|&a| is_best_response_somewhere(game, a))
        .collect();
    PrunedGame {
        game: game.restrict(&keep, &(0..game.num_states()).collect::<Vec<_>>()),
        original: keep,
    }
}
