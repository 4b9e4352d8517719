//! Trading games: square games whose receiver utility is upper-triangular,
//! column-monotone and sums with the sender's to a per-state constant.
//!
//! For these games an optimal scheme that is ex-post IR is built by
//! repeatedly peeling off the posterior that makes the receiver indifferent
//! across every action indexed by the current support.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{best_response, no_communication_receiver_value, Belief, Game, Matrix};
use crate::rational::{dot, Rational};
use crate::solver::{OutcomeDistribution, Signal, SignalingScheme};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TradingError {
    #[error("trading games need as many actions as states, got {actions}x{states}")]
    DimensionMismatch { actions: usize, states: usize },
    #[error("no indifference posterior exists on support {support:?}")]
    NoSolution { support: Vec<usize> },
    #[error("game is not a trading game")]
    NotTradingGame(TradingCertificate),
    #[error("prior has {found} entries but the game has {expected} states")]
    PriorLength { found: usize, expected: usize },
    #[error("values must be positive and strictly increasing")]
    NotIncreasing,
    #[error("bid matrix must be {expected}x{expected}")]
    BidShape { expected: usize },
    #[error("bid b({i},{j}) must lie in [0, value {j}]")]
    BidOutOfRange { i: usize, j: usize },
    #[error("bid b({i},{j}) exceeds b({next},{j})", next = .i + 1)]
    BidMonotonicityViolated { i: usize, j: usize },
}

/// A failed trading condition with 0-based witness indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingViolation {
    /// 1: nonnegative and upper-triangular; 2: column-monotone; 3: constant
    /// positive surplus per state.
    pub condition: u8,
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingCertificate {
    pub is_trading: bool,
    pub violations: Vec<TradingViolation>,
    /// Per-state surplus `c_k` when the third condition holds.
    pub welfare_constants: Option<Vec<Rational>>,
}

fn check_square(game: &Game) -> Result<usize, TradingError> {
    let (n, m) = (game.num_actions(), game.num_states());
    if n != m {
        return Err(TradingError::DimensionMismatch { actions: n, states: m });
    }
    Ok(n)
}

pub fn classify_trading(game: &Game) -> Result<TradingCertificate, TradingError> {
    let n = check_square(game)?;
    let u = |i: usize, k: usize| game.receiver_utility(i, k);
    let v = |i: usize, k: usize| game.sender_utility(i, k);
    let mut violations = Vec::new();
    let mut violate = |condition, i, j, k| violations.push(TradingViolation { condition, i, j, k });

    for i in 0..n {
        for k in 0..n {
            if u(i, k).is_negative() || (i > k && !u(i, k).is_zero()) {
                violate(1, i, i, k);
            }
        }
    }
    for k in 0..n {
        for j in 0..=k {
            for i in 0..j {
                if u(i, k) > u(j, k) {
                    violate(2, i, j, k);
                }
            }
        }
    }
    let surplus: Vec<Rational> = (0..n).map(|k| v(0, k) + u(0, k)).collect();
    let mut surplus_holds = true;
    for (k, c) in surplus.iter().enumerate() {
        if !c.is_positive() {
            surplus_holds = false;
            violate(3, 0, 0, k);
        }
        for i in 1..=k {
            if &(v(i, k) + u(i, k)) != c {
                surplus_holds = false;
                violate(3, 0, i, k);
            }
        }
    }
    Ok(TradingCertificate {
        is_trading: violations.is_empty(),
        violations,
        welfare_constants: surplus_holds.then_some(surplus),
    })
}

/// The belief on `support` that makes the receiver indifferent across the
/// actions sharing those indices, by back-substitution on the triangular
/// system with the common utility normalized to one. A state whose column
/// is all zero leaves every action at zero, so its point mass is returned.
pub fn indifference_posterior(game: &Game, support: &[usize]) -> Result<Belief, TradingError> {
    let n = check_square(game)?;
    let mut states = support.to_vec();
    states.sort_unstable();
    states.dedup();
    let fail = || TradingError::NoSolution { support: states.clone() };
    if states.is_empty() || states.iter().any(|&s| s >= n) {
        return Err(fail());
    }
    if let Some(&s) = states
        .iter()
        .find(|&&s| (0..n).all(|i| game.receiver_utility(i, s).is_zero()))
    {
        return Ok(Belief::point_mass(n, s));
    }
    let mut mass = vec![Rational::zero(); n];
    for (pos, &s) in states.iter().enumerate().rev() {
        let diagonal = game.receiver_utility(s, s);
        if diagonal.is_zero() {
            return Err(fail());
        }
        let later: Rational = states[pos + 1..]
            .iter()
            .map(|&k| game.receiver_utility(s, k) * &mass[k])
            .sum();
        let value = (Rational::one() - later) / diagonal;
        if value.is_negative() {
            return Err(fail());
        }
        mass[s] = value;
    }
    Belief::from_measure(&mass).ok_or_else(fail)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionStep {
    /// `S_t`, the support of the residual before this step.
    pub support: Vec<usize>,
    pub posterior: Belief,
    pub weight: Rational,
    /// Unnormalized residual after subtracting `weight * posterior`.
    pub residual: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTrace {
    pub steps: Vec<DecompositionStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingDecomposition {
    pub trace: DecompositionTrace,
    pub scheme: SignalingScheme,
    pub outcome: OutcomeDistribution,
    pub value: Rational,
}

pub fn trading_decompose(game: &Game, prior: &Belief) -> Result<TradingDecomposition, TradingError> {
    let certificate = classify_trading(game)?;
    if !certificate.is_trading {
        return Err(TradingError::NotTradingGame(certificate));
    }
    let n = game.num_states();
    if prior.len() != n {
        return Err(TradingError::PriorLength { found: prior.len(), expected: n });
    }

    // States without prior mass are dropped together with their actions.
    let kept = prior.support();
    let reduced = game.restrict(&kept, &kept);
    let embed = |reduced_measure: &[Rational]| {
        let mut full = vec![Rational::zero(); n];
        for (r, &s) in kept.iter().enumerate() {
            full[s] = reduced_measure[r].clone();
        }
        full
    };

    let mut residual: Vec<Rational> = kept.iter().map(|&s| prior[s].clone()).collect();
    let mut steps = Vec::new();
    let mut signals = Vec::new();
    let mut pi = vec![vec![Rational::zero(); n]; game.num_actions()];
    let mut value = Rational::zero();
    while residual.iter().any(|x| x.is_positive()) {
        let support: Vec<usize> = (0..residual.len()).filter(|&k| residual[k].is_positive()).collect();
        let posterior = indifference_posterior(&reduced, &support)?;
        let weight = support
            .iter()
            .filter(|&&k| posterior[k].is_positive())
            .map(|&k| &residual[k] / &posterior[k])
            .min()
            .expect("posterior has mass on its support");
        for (k, p) in posterior.probabilities().iter().enumerate() {
            residual[k] -= &weight * p;
        }

        let posterior = Belief::new(embed(posterior.probabilities())).expect("embedding keeps normalization");
        let action = best_response(game, &posterior).action;
        value += &weight * game.sender_value(action, &posterior);
        for (k, p) in posterior.probabilities().iter().enumerate() {
            pi[action][k] += &weight * p;
        }
        steps.push(DecompositionStep {
            support: support.iter().map(|&k| kept[k]).collect(),
            posterior: posterior.clone(),
            weight: weight.clone(),
            residual: embed(&residual),
        });
        signals.push(Signal {
            posterior,
            weight,
            action,
        });
    }

    Ok(TradingDecomposition {
        trace: DecompositionTrace { steps },
        scheme: SignalingScheme { signals },
        outcome: OutcomeDistribution { pi },
        value,
    })
}

/// `Σ_k c_k μ₀(θ_k)`, the total surplus every efficient outcome realizes.
pub fn total_welfare(certificate: &TradingCertificate, prior: &Belief) -> Option<Rational> {
    certificate
        .welfare_constants
        .as_ref()
        .map(|c| dot(c, prior.probabilities()))
}

/// The sender's value promised by the decomposition: total surplus minus
/// what the receiver secures without communication.
pub fn trading_value_formula(game: &Game, prior: &Belief) -> Result<Rational, TradingError> {
    let certificate = classify_trading(game)?;
    let welfare = total_welfare(&certificate, prior).ok_or(TradingError::NotTradingGame(certificate))?;
    Ok(welfare - no_communication_receiver_value(game, prior))
}

fn check_values(values: &[Rational]) -> Result<(), TradingError> {
    let increasing = values.windows(2).all(|w| w[0] < w[1]);
    if values.is_empty() || !values[0].is_positive() || !increasing {
        return Err(TradingError::NotIncreasing);
    }
    Ok(())
}

/// Seller posts price `θ_i`, buyer with value `θ_k` trades iff `θ_k ≥ θ_i`.
/// The sender is the buyer, the receiver the seller.
pub fn make_bilateral_trade(values: &[Rational]) -> Result<Game, TradingError> {
    check_values(values)?;
    let n = values.len();
    let sender: Matrix = (0..n)
        .map(|i| (0..n).map(|k| if k >= i { &values[k] - &values[i] } else { Rational::zero() }).collect())
        .collect();
    let receiver: Matrix = (0..n)
        .map(|i| (0..n).map(|k| if k >= i { values[i].clone() } else { Rational::zero() }).collect())
        .collect();
    Ok(Game::from_matrices(sender, receiver).expect("square matrices"))
}

/// Reserve price `θ_i` with winning bid `b(i, j)` when the bidder's value is
/// `θ_j ≥ θ_i`. Without a bid matrix the winner bids the reserve.
pub fn make_first_price_auction(values: &[Rational], bids: Option<&[Vec<Rational>]>) -> Result<Game, TradingError> {
    check_values(values)?;
    let n = values.len();
    let default_bids: Vec<Vec<Rational>>;
    let bids = match bids {
        Some(b) => b,
        None => {
            default_bids = (0..n).map(|i| vec![values[i].clone(); n]).collect();
            &default_bids
        }
    };
    if bids.len() != n || bids.iter().any(|row| row.len() != n) {
        return Err(TradingError::BidShape { expected: n });
    }
    for j in 0..n {
        for i in 0..=j {
            if bids[i][j].is_negative() || bids[i][j] > values[j] {
                return Err(TradingError::BidOutOfRange { i, j });
            }
            if i < j && bids[i][j] > bids[i + 1][j] {
                return Err(TradingError::BidMonotonicityViolated { i, j });
            }
        }
    }
    let sender: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i <= j { &values[j] - &bids[i][j] } else { Rational::zero() }).collect())
        .collect();
    let receiver: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i <= j { bids[i][j].clone() } else { Rational::zero() }).collect())
        .collect();
    Ok(Game::from_matrices(sender, receiver).expect("square matrices"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::solver::{is_expost_ir, solve_bp};

    fn ints(values: &[i64]) -> Vec<Rational> {
        values.iter().map(|&v| int(v)).collect()
    }

    #[test]
    fn bilateral_pair_is_trading() {
        let game = make_bilateral_trade(&ints(&[1, 2])).unwrap();
        assert_eq!(game.receiver(), &vec![ints(&[1, 1]), ints(&[0, 2])]);
        assert_eq!(game.sender(), &vec![ints(&[0, 1]), ints(&[0, 0])]);
        let cert = classify_trading(&game).unwrap();
        assert!(cert.is_trading);
        assert_eq!(cert.welfare_constants, Some(ints(&[1, 2])));
    }

    #[test]
    fn bilateral_triple_matrices() {
        let game = make_bilateral_trade(&ints(&[1, 2, 4])).unwrap();
        assert_eq!(game.receiver(), &vec![ints(&[1, 1, 1]), ints(&[0, 2, 2]), ints(&[0, 0, 4])]);
    }

    #[test]
    fn single_value_game() {
        let game = make_bilateral_trade(&ints(&[5])).unwrap();
        assert_eq!(game.receiver(), &vec![ints(&[5])]);
        assert_eq!(game.sender(), &vec![ints(&[0])]);
    }

    #[test]
    fn value_validation() {
        assert_eq!(make_bilateral_trade(&ints(&[2, 1])), Err(TradingError::NotIncreasing));
        assert_eq!(make_bilateral_trade(&ints(&[0, 1])), Err(TradingError::NotIncreasing));
        assert_eq!(make_bilateral_trade(&[]), Err(TradingError::NotIncreasing));
    }

    #[test]
    fn identity_violates_surplus_condition() {
        let id = vec![ints(&[1, 0]), ints(&[0, 1])];
        let game = Game::from_matrices(id.clone(), id).unwrap();
        let cert = classify_trading(&game).unwrap();
        assert!(!cert.is_trading);
        // c_2 is read off the first row as 0, which is also not positive.
        assert_eq!(
            cert.violations,
            vec![
                TradingViolation { condition: 3, i: 0, j: 0, k: 1 },
                TradingViolation { condition: 3, i: 0, j: 1, k: 1 },
            ]
        );
        assert_eq!(cert.welfare_constants, None);
    }

    #[test]
    fn lower_triangular_mass_violates_first_condition() {
        let game = Game::from_matrices(vec![ints(&[0, 0]); 2], vec![ints(&[1, 1]), ints(&[1, 2])]).unwrap();
        let cert = classify_trading(&game).unwrap();
        assert!(cert.violations.contains(&TradingViolation { condition: 1, i: 1, j: 1, k: 0 }));
    }

    #[test]
    fn non_square_rejected() {
        let game = Game::from_matrices(vec![ints(&[0, 0])], vec![ints(&[0, 0])]).unwrap();
        assert_eq!(
            classify_trading(&game),
            Err(TradingError::DimensionMismatch { actions: 1, states: 2 })
        );
    }

    #[test]
    fn indifference_posteriors() {
        let pair = make_bilateral_trade(&ints(&[1, 2])).unwrap();
        assert_eq!(indifference_posterior(&pair, &[0, 1]).unwrap(), Belief::binary(rat(1, 2)));
        assert_eq!(indifference_posterior(&pair, &[1]).unwrap(), Belief::point_mass(2, 1));
        let triple = make_bilateral_trade(&ints(&[1, 2, 4])).unwrap();
        assert_eq!(
            indifference_posterior(&triple, &[0, 1, 2]).unwrap().into_inner(),
            vec![rat(1, 2), rat(1, 4), rat(1, 4)]
        );
    }

    #[test]
    fn indifference_makes_support_actions_best() {
        let game = make_bilateral_trade(&ints(&[1, 3, 4, 7])).unwrap();
        let posterior = indifference_posterior(&game, &[0, 2, 3]).unwrap();
        let tied = best_response(&game, &posterior).tied;
        assert!([0, 2, 3].iter().all(|a| tied.contains(a)));
    }

    #[test]
    fn bilateral_pair_decomposition() {
        let game = make_bilateral_trade(&ints(&[1, 2])).unwrap();
        let prior = Belief::binary(rat(1, 2));
        let d = trading_decompose(&game, &prior).unwrap();
        assert_eq!(d.trace.steps.len(), 1);
        assert_eq!(d.trace.steps[0].posterior, prior);
        assert_eq!(d.trace.steps[0].weight, int(1));
        assert_eq!(d.value, rat(1, 2));
        assert_eq!(trading_value_formula(&game, &prior).unwrap(), rat(1, 2));
    }

    #[test]
    fn point_mass_prior_is_one_singleton_step() {
        let game = make_bilateral_trade(&ints(&[1, 2, 4])).unwrap();
        let prior = Belief::point_mass(3, 1);
        let d = trading_decompose(&game, &prior).unwrap();
        assert_eq!(d.trace.steps.len(), 1);
        assert_eq!(d.trace.steps[0].support, vec![1]);
        assert_eq!(d.scheme.signals[0].action, 1);
        assert_eq!(d.value, int(0));
    }

    #[test]
    fn triple_decomposition_matches_lp() {
        let game = make_bilateral_trade(&ints(&[1, 2, 4])).unwrap();
        let prior = Belief::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        let d = trading_decompose(&game, &prior).unwrap();
        assert_eq!(d.trace.steps.len(), 1);
        assert_eq!(d.value, solve_bp(&game, &prior).unwrap().value);
        assert!(is_expost_ir(&d.outcome, &game, &prior));
    }

    #[test]
    fn uniform_triple_peels_several_layers() {
        let game = make_bilateral_trade(&ints(&[1, 2, 4])).unwrap();
        let prior = Belief::uniform(3);
        let d = trading_decompose(&game, &prior).unwrap();
        assert!(d.trace.steps.len() > 1);
        assert!(d.trace.steps.windows(2).all(|w| w[1].support.len() < w[0].support.len()));
        assert!(d.trace.steps.last().unwrap().residual.iter().all(Zero::is_zero));
        assert!(d.scheme.is_bayes_plausible(&prior));
        assert_eq!(d.value, solve_bp(&game, &prior).unwrap().value);
    }

    #[test]
    fn first_price_auctions() {
        let values = ints(&[1, 2]);
        let bids = vec![vec![rat(1, 2), int(1)], vec![int(0), rat(3, 2)]];
        let game = make_first_price_auction(&values, Some(&bids)).unwrap();
        assert!(classify_trading(&game).unwrap().is_trading);

        let game = make_first_price_auction(&values, None).unwrap();
        assert_eq!(game.sender(), &vec![ints(&[0, 1]), ints(&[0, 0])]);
        let cert = classify_trading(&game).unwrap();
        assert_eq!(cert.welfare_constants, Some(values.clone()));

        let zeros = vec![ints(&[0, 0]); 2];
        let game = make_first_price_auction(&values, Some(&zeros)).unwrap();
        assert!(classify_trading(&game).unwrap().is_trading);
    }

    #[test]
    fn first_price_auction_bid_errors() {
        let values = ints(&[1, 2]);
        let high = vec![ints(&[2, 1]), ints(&[0, 2])];
        assert_eq!(
            make_first_price_auction(&values, Some(&high)),
            Err(TradingError::BidOutOfRange { i: 0, j: 0 })
        );
        let decreasing = vec![vec![int(1), rat(3, 2)], vec![int(0), int(1)]];
        assert_eq!(
            make_first_price_auction(&values, Some(&decreasing)),
            Err(TradingError::BidMonotonicityViolated { i: 0, j: 1 })
        );
        assert_eq!(
            make_first_price_auction(&values, Some(&[ints(&[1])])),
            Err(TradingError::BidShape { expected: 2 })
        );
    }

    #[test]
    fn zero_bids_decompose_by_point_masses() {
        let zeros = vec![vec![int(0); 2]; 2];
        let game = make_first_price_auction(&[int(1), int(2)], Some(&zeros)).unwrap();
        assert_eq!(indifference_posterior(&game, &[0, 1]).unwrap(), Belief::point_mass(2, 0));
        let prior = Belief::uniform(2);
        let decomposition = trading_decompose(&game, &prior).unwrap();
        assert_eq!(decomposition.trace.steps.len(), 2);
        assert_eq!(decomposition.value, solve_bp(&game, &prior).unwrap().value);
        assert!(is_expost_ir(&decomposition.outcome, &game, &prior));
    }

    #[test]
    fn zero_prior_states_are_dropped() {
        let game = make_bilateral_trade(&ints(&[1, 2, 4])).unwrap();
        let prior = Belief::new(vec![rat(1, 2), int(0), rat(1, 2)]).unwrap();
        let d = trading_decompose(&game, &prior).unwrap();
        assert!(d.trace.steps.iter().all(|s| !s.support.contains(&1)));
        assert_eq!(d.value, solve_bp(&game, &prior).unwrap().value);
    }
}
