//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use expost_core::greedy::{check_conditions, CredenceParams};
use expost_core::model::{Belief, Game, Matrix};
use expost_core::rational::{int, rat, Rational};
use expost_core::trading::{make_bilateral_trade, make_first_price_auction};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k / d` with `|k| ≤ 6` and `d ∈ {1, 2, 3}`.
pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-6..=6), rng.gen_range(1..=3))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    (0..rows).map(|_| (0..cols).map(|_| small_rational(rng)).collect()).collect()
}

/// Each column sorted in decreasing order, so row `i` weakly dominates row
/// `i + 1` for the sender.
pub fn ordered_sender(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let mut v = vec![vec![Rational::from_integer(0.into()); cols]; rows];
    for k in 0..cols {
        let mut column: Vec<Rational> = (0..rows).map(|_| small_rational(rng)).collect();
        column.sort_by(|a, b| b.cmp(a));
        for (i, x) in column.into_iter().enumerate() {
            v[i][k] = x;
        }
    }
    v
}

/// Decreasing state-independent sender utilities.
pub fn ordered_constant_sender(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let mut values: Vec<Rational> = (0..rows).map(|_| small_rational(rng)).collect();
    values.sort_by(|a, b| b.cmp(a));
    values.into_iter().map(|x| vec![x; cols]).collect()
}

/// Lines over `μ(θ₁)` that take turns on the upper envelope: every action
/// is the receiver's best response on its own interval. Rows are shuffled.
pub fn tangent_receiver(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut cuts: Vec<i64> = (1..4 * n as i64).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<Rational> = cuts[..n - 1].iter().map(|&k| rat(k, 4 * n as i64)).collect();
    cuts.sort();
    let mut slope = int(rng.gen_range(-8..=0));
    let mut intercept = small_rational(rng);
    let mut rows = vec![vec![&slope + &intercept, intercept.clone()]];
    for t in &cuts {
        let next = &slope + int(rng.gen_range(1..=4));
        intercept = &intercept + (&slope - &next) * t;
        slope = next;
        rows.push(vec![&slope + &intercept, intercept.clone()]);
    }
    rows.shuffle(rng);
    rows
}

pub fn random_prior(rng: &mut ChaCha8Rng, states: usize) -> Belief {
    loop {
        let measure: Vec<Rational> = (0..states).map(|_| int(rng.gen_range(0..10))).collect();
        if let Some(prior) = Belief::from_measure(&measure) {
            return prior;
        }
    }
}

pub fn interior_prior(rng: &mut ChaCha8Rng, states: usize) -> Belief {
    let measure: Vec<Rational> = (0..states).map(|_| int(rng.gen_range(1..10))).collect();
    Belief::from_measure(&measure).expect("positive mass")
}

pub fn increasing_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let mut x = Rational::from_integer(0.into());
    (0..n)
        .map(|_| {
            x = &x + rat(rng.gen_range(1..=6), rng.gen_range(1..=3));
            x.clone()
        })
        .collect()
}

pub fn bilateral_trade(rng: &mut ChaCha8Rng, n: usize) -> Game {
    make_bilateral_trade(&increasing_values(rng, n)).expect("increasing values")
}

/// Bids nondecreasing in the reserve index and within `[0, θ_j]`.
pub fn first_price_auction(rng: &mut ChaCha8Rng, n: usize) -> Game {
    let values = increasing_values(rng, n);
    let mut bids = vec![vec![Rational::from_integer(0.into()); n]; n];
    for j in 0..n {
        let mut column: Vec<Rational> = (0..=j).map(|_| &values[j] * rat(rng.gen_range(0..=4), 4)).collect();
        column.sort();
        for (i, b) in column.into_iter().enumerate() {
            bids[i][j] = b;
        }
    }
    make_first_price_auction(&values, Some(&bids)).expect("valid bids")
}

pub fn credence_params(rng: &mut ChaCha8Rng, n: usize) -> CredenceParams {
    let prices = increasing_values(rng, n);
    let mut margins = increasing_values(rng, n);
    margins.reverse();
    CredenceParams::with_default_loss(prices, margins)
}

/// A receiver that is cyclically monotone by construction and weakly
/// log-supermodular by rejection.
pub fn conditioned_receiver(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let mut u = vec![vec![Rational::from_integer(0.into()); n]; n];
        for k in 0..n {
            let mut column: Vec<i64> = (0..n).map(|_| rng.gen_range(1..12)).collect();
            column.sort_by(|a, b| b.cmp(a));
            for (p, x) in column.into_iter().enumerate() {
                u[(k + p) % n][k] = int(x);
            }
        }
        if check_conditions(&u).expect("square").both_hold() {
            return u;
        }
    }
}
