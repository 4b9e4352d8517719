//! Optimal signaling via the outcome-distribution linear programs.
//!
//! Variables are the joint probabilities `π(a, θ)` of recommending action
//! `a` in state `θ`. Obedience rows keep each recommendation a receiver best
//! response, and feasibility rows make the rows of `π` add back up to the
//! prior. The ex-post IR program additionally fixes `π(a, θ) = 0` whenever
//! recommending `a` in state `θ` leaves the sender worse off than the
//! no-communication action.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lp::{self, LinearProgram, Relation};
use crate::model::{best_response, sender_weakly_prefers, Belief, Game};
use crate::rational::{dot, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("prior has {found} entries but the game has {expected} states")]
    PriorLength { found: usize, expected: usize },
}

/// Joint distribution over (recommended action, state), indexed `[action][state]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDistribution {
    pub pi: Vec<Vec<Rational>>,
}

impl OutcomeDistribution {
    /// All mass on the receiver's prior best response.
    pub fn no_communication(game: &Game, prior: &Belief) -> Self {
        let k = best_response(game, prior).action;
        let mut pi = vec![vec![Rational::zero(); game.num_states()]; game.num_actions()];
        pi[k] = prior.probabilities().to_vec();
        OutcomeDistribution { pi }
    }

    pub fn sender_value(&self, game: &Game) -> Rational {
        self.pi
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (a, row)| acc + dot(&game.sender()[a], row))
    }

    pub fn receiver_value(&self, game: &Game) -> Rational {
        self.pi
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (a, row)| acc + dot(&game.receiver()[a], row))
    }

    /// `Σ_a π(a, θ) - μ₀(θ)` per state; all zero for a feasible outcome.
    pub fn feasibility_residuals(&self, prior: &Belief) -> Vec<Rational> {
        (0..prior.len())
            .map(|k| self.pi.iter().map(|row| &row[k]).sum::<Rational>() - &prior[k])
            .collect()
    }

    /// Largest `Σ_θ (u(a', θ) - u(a, θ)) π(a, θ)` over action pairs, clamped at
    /// zero. Zero means every recommendation is obeyed.
    pub fn max_obedience_violation(&self, game: &Game) -> Rational {
        let mut worst = Rational::zero();
        for (a, row) in self.pi.iter().enumerate() {
            let own = dot(&game.receiver()[a], row);
            for alt in 0..game.num_actions() {
                let gain = dot(&game.receiver()[alt], row) - &own;
                if gain > worst {
                    worst = gain;
                }
            }
        }
        worst
    }

    pub fn is_valid(&self, game: &Game, prior: &Belief) -> bool {
        self.pi.iter().flatten().all(|p| !p.is_negative())
            && self.feasibility_residuals(prior).iter().all(Zero::is_zero)
            && self.max_obedience_violation(game).is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub posterior: Belief,
    pub weight: Rational,
    pub action: usize,
}

/// A Bayes-plausible split of the prior into posteriors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignalingScheme {
    pub signals: Vec<Signal>,
}

impl SignalingScheme {
    pub fn is_bayes_plausible(&self, prior: &Belief) -> bool {
        let weights: Rational = self.signals.iter().map(|s| &s.weight).sum();
        let mean: Vec<Rational> = (0..prior.len())
            .map(|k| self.signals.iter().map(|s| &s.weight * &s.posterior[k]).sum())
            .collect();
        self.signals.iter().all(|s| s.weight.is_positive())
            && weights == Rational::from_integer(1.into())
            && mean == prior.probabilities()
    }

    /// Rebuilds `π` by pooling signals that recommend the same action.
    pub fn to_outcome(&self, num_actions: usize, num_states: usize) -> OutcomeDistribution {
        let mut pi = vec![vec![Rational::zero(); num_states]; num_actions];
        for s in &self.signals {
            for (k, p) in s.posterior.probabilities().iter().enumerate() {
                pi[s.action][k] += &s.weight * p;
            }
        }
        OutcomeDistribution { pi }
    }

    pub fn sender_value(&self, game: &Game) -> Rational {
        self.signals
            .iter()
            .fold(Rational::zero(), |acc, s| acc + &s.weight * game.sender_value(s.action, &s.posterior))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub value: Rational,
    pub outcome: OutcomeDistribution,
    pub scheme: SignalingScheme,
    pub ex_post_ir: bool,
}

fn check_prior(game: &Game, prior: &Belief) -> Result<(), SolveError> {
    if prior.len() != game.num_states() {
        return Err(SolveError::PriorLength {
            found: prior.len(),
            expected: game.num_states(),
        });
    }
    Ok(())
}

/// Column of `π(a, θ)` in the persuasion programs.
pub fn pair_index(game: &Game, action: usize, state: usize) -> usize {
    action * game.num_states() + state
}

/// The standard persuasion program: maximize the sender's expected utility
/// over obedient, prior-consistent outcome distributions.
pub fn build_bp_lp(game: &Game, prior: &Belief) -> Result<LinearProgram, SolveError> {
    check_prior(game, prior)?;
    let (n, m) = (game.num_actions(), game.num_states());
    let vars = n * m;
    let objective = (0..n)
        .flat_map(|a| (0..m).map(move |k| (a, k)))
        .map(|(a, k)| game.sender_utility(a, k).clone())
        .collect();
    let mut lp = LinearProgram::maximize(objective);
    for a in 0..n {
        for alt in (0..n).filter(|&alt| alt != a) {
            let mut row = vec![Rational::zero(); vars];
            for k in 0..m {
                row[pair_index(game, a, k)] = game.receiver_utility(alt, k) - game.receiver_utility(a, k);
            }
            lp.add_constraint(row, Relation::Le, Rational::zero());
        }
    }
    for k in 0..m {
        let mut row = vec![Rational::zero(); vars];
        for a in 0..n {
            row[pair_index(game, a, k)] = Rational::from_integer(1.into());
        }
        lp.add_constraint(row, Relation::Eq, prior[k].clone());
    }
    Ok(lp)
}

/// Actions the sender weakly prefers, state by state, to the prior best response.
pub fn compute_a_plus(game: &Game, prior: &Belief) -> Vec<usize> {
    let k = best_response(game, prior).action;
    (0..game.num_actions())
        .filter(|&a| sender_weakly_prefers(game, a, k))
        .collect()
}

/// `(a, θ)` pairs whose recommendation would leave the sender below the
/// no-communication utility in that state.
pub fn expost_forbidden_pairs(game: &Game, prior: &Belief) -> Vec<(usize, usize)> {
    let k = best_response(game, prior).action;
    (0..game.num_actions())
        .flat_map(|a| (0..game.num_states()).map(move |s| (a, s)))
        .filter(|&(a, s)| game.sender_utility(a, s) < game.sender_utility(k, s))
        .collect()
}

pub fn build_expost_lp(game: &Game, prior: &Belief) -> Result<LinearProgram, SolveError> {
    let mut lp = build_bp_lp(game, prior)?;
    for (a, k) in expost_forbidden_pairs(game, prior) {
        let mut row = vec![Rational::zero(); lp.num_vars()];
        row[pair_index(game, a, k)] = Rational::from_integer(1.into());
        lp.add_constraint(row, Relation::Eq, Rational::zero());
    }
    Ok(lp)
}

fn solve_program(game: &Game, prior: &Belief, lp: &LinearProgram) -> SolveResult {
    let solution = lp::solve(lp).expect("persuasion programs are well formed");
    // The no-communication outcome is feasible for both programs and the
    // objective is bounded by the largest utility, so this is always optimal.
    let assignment = solution
        .assignment
        .expect("persuasion programs always have an optimum");
    let (n, m) = (game.num_actions(), game.num_states());
    let pi = (0..n)
        .map(|a| (0..m).map(|k| assignment[pair_index(game, a, k)].clone()).collect())
        .collect();
    let outcome = OutcomeDistribution { pi };
    let value = outcome.sender_value(game);
    debug_assert_eq!(Some(&value), solution.value.as_ref());
    let scheme = outcome_to_scheme(&outcome);
    let ex_post_ir = is_expost_ir(&outcome, game, prior);
    SolveResult {
        value,
        outcome,
        scheme,
        ex_post_ir,
    }
}

/// Optimal Bayesian persuasion.
pub fn solve_bp(game: &Game, prior: &Belief) -> Result<SolveResult, SolveError> {
    let lp = build_bp_lp(game, prior)?;
    Ok(solve_program(game, prior, &lp))
}

/// Optimal Bayesian persuasion under the ex-post IR constraint.
pub fn solve_expost(game: &Game, prior: &Belief) -> Result<SolveResult, SolveError> {
    let lp = build_expost_lp(game, prior)?;
    Ok(solve_program(game, prior, &lp))
}

/// One signal per recommended action with positive mass; the posterior is
/// the normalized row of `π`.
pub fn outcome_to_scheme(outcome: &OutcomeDistribution) -> SignalingScheme {
    let signals = outcome
        .pi
        .iter()
        .enumerate()
        .filter_map(|(action, row)| {
            let weight: Rational = row.iter().sum();
            let posterior = Belief::from_measure(row)?;
            Some(Signal {
                posterior,
                weight,
                action,
            })
        })
        .collect();
    SignalingScheme { signals }
}

/// Whether every realized (recommendation, state) pair leaves the sender at
/// least as well off as no communication in that state.
pub fn is_expost_ir(outcome: &OutcomeDistribution, game: &Game, prior: &Belief) -> bool {
    let k = best_response(game, prior).action;
    outcome.pi.iter().enumerate().all(|(a, row)| {
        row.iter()
            .enumerate()
            .all(|(s, p)| !p.is_positive() || game.sender_utility(a, s) >= game.sender_utility(k, s))
    })
}

/// Whether some optimal scheme is ex-post IR, i.e. the constraint is free.
pub fn exists_expost_ir_optimum(game: &Game, prior: &Belief) -> Result<bool, SolveError> {
    Ok(solve_bp(game, prior)?.value == solve_expost(game, prior)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::model::no_communication_value;
    use crate::rational::{int, rat};

    fn half() -> Belief {
        Belief::binary(rat(1, 2))
    }

    #[test]
    fn lending_program_shape() {
        let lp = build_bp_lp(&instances::lending(), &half()).unwrap();
        assert_eq!(lp.num_vars(), 6);
        let le = lp.constraints.iter().filter(|c| c.relation == Relation::Le).count();
        let eq = lp.constraints.iter().filter(|c| c.relation == Relation::Eq).count();
        assert_eq!((le, eq), (6, 2));
    }

    #[test]
    fn quasi_program_shape() {
        let lp = build_bp_lp(&instances::quasi_second_sender(), &Belief::binary(rat(3, 5))).unwrap();
        assert_eq!(lp.num_vars(), 8);
        assert_eq!(lp.constraints.iter().filter(|c| c.relation == Relation::Le).count(), 12);
    }

    #[test]
    fn single_action_program_only_admits_prior_row() {
        let game = Game::from_matrices(vec![vec![int(3), int(1)]], vec![vec![int(0), int(0)]]).unwrap();
        let prior = Belief::binary(rat(1, 3));
        let result = solve_bp(&game, &prior).unwrap();
        assert_eq!(result.outcome.pi, vec![prior.probabilities().to_vec()]);
        assert_eq!(result.value, rat(5, 3));
    }

    #[test]
    fn a_plus_examples() {
        let game = instances::lending();
        let mut a_plus = compute_a_plus(&game, &half());
        a_plus.sort();
        let expected = vec![game.action_index("small").unwrap(), game.action_index("huge").unwrap()];
        assert_eq!(a_plus, expected);

        let game = instances::compare_credible_wins();
        assert_eq!(compute_a_plus(&game, &half()), vec![1, 2]);

        // Prior where the sender's favorite is already chosen.
        let game = instances::quasi_first_sender();
        assert_eq!(compute_a_plus(&game, &Belief::binary(rat(9, 10))), vec![0]);
    }

    #[test]
    fn expost_program_zeroes_reject_row() {
        let game = instances::lending();
        let reject = game.action_index("reject").unwrap();
        let pairs = expost_forbidden_pairs(&game, &half());
        assert_eq!(pairs, vec![(reject, 0), (reject, 1)]);
        let lp = build_expost_lp(&game, &half()).unwrap();
        let eq = lp.constraints.iter().filter(|c| c.relation == Relation::Eq).count();
        assert_eq!(eq, 4);
    }

    #[test]
    fn worst_action_prior_adds_no_zero_rows() {
        // The quasi second sender's worst action a4 is chosen on (1/4, 1/2).
        let game = instances::quasi_second_sender();
        assert!(expost_forbidden_pairs(&game, &Belief::binary(rat(2, 5))).is_empty());
    }

    #[test]
    fn compare_example_one_zeroes_bottom_action() {
        let game = instances::compare_credible_wins();
        assert_eq!(expost_forbidden_pairs(&game, &half()), vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn lending_values() {
        let game = instances::lending();
        let bp = solve_bp(&game, &half()).unwrap();
        let expost = solve_expost(&game, &half()).unwrap();
        assert_eq!(bp.value, int(5));
        assert_eq!(expost.value, rat(25, 7));
        assert!(!bp.ex_post_ir);
        assert!(expost.ex_post_ir);
        assert!(!exists_expost_ir_optimum(&game, &half()).unwrap());
    }

    #[test]
    fn lending_schemes() {
        let game = instances::lending();
        let huge = game.action_index("huge").unwrap();
        let reject = game.action_index("reject").unwrap();
        let small = game.action_index("small").unwrap();

        let bp = solve_bp(&game, &half()).unwrap();
        let mut signals = bp.scheme.signals.clone();
        signals.sort_by_key(|s| s.action);
        let expected = {
            let mut v = vec![
                Signal {
                    posterior: Belief::binary(int(1)),
                    weight: rat(1, 2),
                    action: huge,
                },
                Signal {
                    posterior: Belief::binary(int(0)),
                    weight: rat(1, 2),
                    action: reject,
                },
            ];
            v.sort_by_key(|s| s.action);
            v
        };
        assert_eq!(signals, expected);

        let expost = solve_expost(&game, &half()).unwrap();
        let mut signals = expost.scheme.signals.clone();
        signals.sort_by_key(|s| s.action);
        assert_eq!(signals.len(), 2);
        let by_action = |a: usize| signals.iter().find(|s| s.action == a).unwrap();
        assert_eq!(by_action(huge).posterior, Belief::binary(int(1)));
        assert_eq!(by_action(huge).weight, rat(2, 7));
        assert_eq!(by_action(small).posterior, Belief::binary(rat(3, 10)));
        assert_eq!(by_action(small).weight, rat(5, 7));
        assert!(expost.scheme.is_bayes_plausible(&half()));
    }

    #[test]
    fn full_revelation_is_not_expost_ir() {
        let game = instances::lending();
        let huge = game.action_index("huge").unwrap();
        let reject = game.action_index("reject").unwrap();
        let mut pi = vec![vec![int(0); 2]; 3];
        pi[huge][0] = rat(1, 2);
        pi[reject][1] = rat(1, 2);
        let outcome = OutcomeDistribution { pi };
        assert!(outcome.is_valid(&game, &half()));
        assert!(!is_expost_ir(&outcome, &game, &half()));
        assert!(is_expost_ir(&OutcomeDistribution::no_communication(&game, &half()), &game, &half()));
    }

    #[test]
    fn point_mass_priors_have_nothing_to_reveal() {
        let game = instances::quasi_first_sender();
        for state in 0..2 {
            let prior = Belief::point_mass(2, state);
            let expected = no_communication_value(&game, &prior);
            assert_eq!(solve_bp(&game, &prior).unwrap().value, expected);
            assert_eq!(solve_expost(&game, &prior).unwrap().value, expected);
        }
    }

    #[test]
    fn no_communication_scheme_is_the_prior() {
        let game = instances::lending();
        let scheme = outcome_to_scheme(&OutcomeDistribution::no_communication(&game, &half()));
        assert_eq!(scheme.signals.len(), 1);
        assert_eq!(scheme.signals[0].posterior, half());
        assert_eq!(scheme.signals[0].weight, int(1));
    }

    #[test]
    fn quasi_second_sender_has_no_gap_on_grid() {
        let game = instances::quasi_second_sender();
        for k in 0..=20 {
            assert!(exists_expost_ir_optimum(&game, &Belief::binary(rat(k, 20))).unwrap());
        }
    }

    #[test]
    fn prior_length_is_checked() {
        let err = solve_bp(&instances::lending(), &Belief::uniform(3)).unwrap_err();
        assert_eq!(err, SolveError::PriorLength { found: 3, expected: 2 });
    }
}
