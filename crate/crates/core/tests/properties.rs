mod common;

use common::*;
use expost_core::compare::{compare_report, CheckStatus, GatedValue};
use expost_core::geometry::{analyze_binary, concave_closure, expost_closure_value, sample_curves};
use expost_core::greedy::greedy_scheme;
use expost_core::lp::{solve, LinearProgram, LpStatus, Relation};
use expost_core::model::{best_response, expected_sender_utility, no_communication_value, Belief, Game};
use expost_core::rational::{int, Rational};
use expost_core::solver::{is_expost_ir, solve_bp, solve_expost};
use expost_core::trading::{trading_decompose, trading_value_formula};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

fn random_game(seed: u64, max_actions: usize, max_states: usize) -> (Game, Belief) {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=max_actions);
    let m = rng.gen_range(1..=max_states);
    let game = Game::from_matrices(random_matrix(&mut rng, n, m), random_matrix(&mut rng, n, m)).unwrap();
    let prior = random_prior(&mut rng, m);
    (game, prior)
}

fn binary_game(seed: u64) -> Game {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=5);
    Game::from_matrices(random_matrix(&mut rng, n, 2), random_matrix(&mut rng, n, 2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_strong_duality(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (rows, cols) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a: Vec<Vec<Rational>> = (0..rows).map(|_| (0..cols).map(|_| int(rng.gen_range(-3..=4))).collect()).collect();
        let b: Vec<Rational> = (0..rows).map(|_| int(rng.gen_range(0..=6))).collect();
        let c: Vec<Rational> = (0..cols).map(|_| int(rng.gen_range(-3..=4))).collect();

        let mut primal = LinearProgram::maximize(c.clone());
        for (row, rhs) in a.iter().zip(&b) {
            primal.add_constraint(row.clone(), Relation::Le, rhs.clone());
        }
        let mut dual = LinearProgram::maximize(b.iter().map(|x| -x).collect());
        for (j, cj) in c.iter().enumerate() {
            dual.add_constraint(a.iter().map(|row| row[j].clone()).collect(), Relation::Ge, cj.clone());
        }

        let p = solve(&primal).unwrap();
        let d = solve(&dual).unwrap();
        prop_assert_eq!(solve(&primal).unwrap(), p.clone());
        match p.status {
            LpStatus::Optimal => {
                prop_assert_eq!(d.status, LpStatus::Optimal);
                prop_assert_eq!(p.value.clone().unwrap(), -d.value.unwrap());
                prop_assert!(primal.is_feasible(p.assignment.as_ref().unwrap()));
            }
            LpStatus::Unbounded => prop_assert_eq!(d.status, LpStatus::Infeasible),
            LpStatus::Infeasible => prop_assert!(false, "x = 0 is feasible"),
        }
    }

    #[test]
    fn solver_values_are_ordered(seed in any::<u64>()) {
        let (game, prior) = random_game(seed, 4, 3);
        let bp = solve_bp(&game, &prior).unwrap();
        let expost = solve_expost(&game, &prior).unwrap();
        prop_assert!(bp.outcome.is_valid(&game, &prior));
        prop_assert!(expost.outcome.is_valid(&game, &prior));
        prop_assert!(is_expost_ir(&expost.outcome, &game, &prior));
        prop_assert!(expost.value <= bp.value);
        prop_assert!(no_communication_value(&game, &prior) <= expost.value);
        for result in [&bp, &expost] {
            prop_assert!(result.scheme.is_bayes_plausible(&prior));
            prop_assert_eq!(result.scheme.sender_value(&game), result.value.clone());
            prop_assert_eq!(result.outcome.sender_value(&game), result.value.clone());
        }
    }

    #[test]
    fn binary_curves_are_nested(seed in any::<u64>()) {
        let game = binary_game(seed);
        let analysis = analyze_binary(&game).unwrap();
        for s in sample_curves(&analysis) {
            prop_assert!(s.concave >= s.quasiconcave, "at {}", s.x);
            prop_assert!(s.quasiconcave >= s.vhat, "at {}", s.x);
            if s.x.is_positive() && s.x < int(1) {
                let belief = Belief::binary(s.x.clone());
                prop_assert_eq!(&s.vhat, &expected_sender_utility(&game, &belief));
            }
        }
        for (i, &action) in analysis.partition.interval_actions.iter().enumerate() {
            let t = &analysis.partition.thresholds;
            let mid = (&t[i] + &t[i + 1]) / int(2);
            prop_assert_eq!(best_response(&game, &Belief::binary(mid)).action, action);
        }
    }

    #[test]
    fn binary_closures_match_programs(seed in any::<u64>()) {
        let game = binary_game(seed);
        let mut rng = rng(seed ^ 1);
        let prior = random_prior(&mut rng, 2);
        let concave = concave_closure(&analyze_binary(&game).unwrap().vhat);
        let x = &prior[0];
        prop_assert_eq!(concave.eval(x), solve_bp(&game, &prior).unwrap().value);
        prop_assert_eq!(expost_closure_value(&game, &prior).unwrap(), solve_expost(&game, &prior).unwrap().value);
    }

    #[test]
    fn trading_decomposition_accounts_for_prior(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=5);
        let game = if seed % 2 == 0 { bilateral_trade(&mut rng, n) } else { first_price_auction(&mut rng, n) };
        let prior = random_prior(&mut rng, n);
        let d = trading_decompose(&game, &prior).unwrap();
        prop_assert!(d.scheme.is_bayes_plausible(&prior));
        prop_assert!(d.outcome.is_valid(&game, &prior));
        prop_assert_eq!(d.value.clone(), trading_value_formula(&game, &prior).unwrap());
        for step in &d.trace.steps {
            prop_assert!(step.residual.iter().all(|x| !x.is_negative()));
            let tied = best_response(&game, &step.posterior).tied;
            let positive: Vec<usize> = step.support.iter().copied().filter(|&k| step.posterior[k].is_positive()).collect();
            prop_assert!(positive.iter().all(|a| tied.contains(a)));
        }
        prop_assert!(d.trace.steps.last().unwrap().residual.iter().all(Zero::is_zero));
    }

    #[test]
    fn greedy_rounds_partition_the_prior(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=4);
        let game = Game::from_matrices(random_matrix(&mut rng, n, n), random_matrix(&mut rng, n, n)).unwrap();
        let prior = random_prior(&mut rng, n);
        let trace = greedy_scheme(&game, &prior).unwrap();
        prop_assert!(trace.exhausted);
        prop_assert!(trace.outcome.is_valid(&game, &prior));
        let mut budget = prior.probabilities().to_vec();
        for round in &trace.rounds {
            for k in 0..n {
                budget[k] -= &round.row[k];
            }
            prop_assert_eq!(&round.residual, &budget);
        }
        prop_assert_eq!(trace.outcome.sender_value(&game), trace.value.clone());
    }

    #[test]
    fn compare_respects_gates(seed in any::<u64>()) {
        let (game, prior) = random_game(seed, 3, 3);
        let report = compare_report(&game, &prior).unwrap();
        prop_assert!(report.v_expost <= report.v_bp);
        for value in [&report.v_credible, &report.v_cheap] {
            if let GatedValue::Exact { value, .. } = value {
                prop_assert!(value <= &report.v_bp);
            }
        }
        for check in &report.ordering_checks {
            if check.inequality.contains("credible") && report.v_credible.value().is_none() {
                prop_assert_eq!(check.status, CheckStatus::Skipped);
            }
            if check.inequality.contains("cheap") && report.v_cheap.value().is_none() {
                prop_assert_eq!(check.status, CheckStatus::Skipped);
            }
        }
        let line = report.ordering_line();
        prop_assert!(line.contains("bp") && line.contains("expost"));
    }
}
