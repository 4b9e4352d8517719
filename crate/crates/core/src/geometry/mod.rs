//! Two-state geometry: the best-response partition of `μ(θ₁) ∈ [0, 1]`,
//! the sender's expected utility `v̂` and its closures.
//!
//! The ex-post IR constraint is free at every prior exactly when the
//! smoothed quasiconcave closure `Γ` is concave. Deciding this needs one
//! sort of the receiver's lines and linear sweeps afterwards.

mod closure;
mod curve;
mod envelope;

use thiserror::Error;

pub use closure::{
    concave_closure, expost_closure_value, gamma_is_concave, quasiconcave_closure, smoothed_quasiconcave_closure,
    QuasiconcaveClosure,
};
pub use curve::{vhat_curve, ClosureChain, PiecewiseLinear};
pub use envelope::{compute_partition, Line, Partition};

use crate::model::Game;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("binary geometry needs exactly two states, got {states}")]
    NotBinary { states: usize },
}

/// Counts elementary steps (comparisons, stack moves, sweep iterations).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter(u64);

impl OpCounter {
    pub fn tick(&mut self, n: u64) {
        self.0 += n;
    }

    pub fn count(&self) -> u64 {
        self.0
    }
}

/// Everything the two-state decision path computes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryAnalysis {
    pub partition: Partition,
    pub vhat: PiecewiseLinear,
    pub quasiconcave: QuasiconcaveClosure,
    pub gamma: PiecewiseLinear,
    pub expost_ir: bool,
    pub operations: u64,
}

/// Runs the decision path: partition, `v̂`, `V̄`, `Γ` and the concavity test.
pub fn analyze_binary(game: &Game) -> Result<BinaryAnalysis, GeometryError> {
    let mut ops = OpCounter::default();
    let partition = envelope::compute_partition_counted(game, &mut ops)?;
    let vhat = curve::vhat_from_partition(game, &partition, &mut ops);
    let quasiconcave = closure::quasiconcave_closure_counted(&vhat, &mut ops);
    let gamma = smoothed_quasiconcave_closure(&quasiconcave);
    ops.tick(gamma.breakpoints.len() as u64);
    let expost_ir = closure::gamma_is_concave_counted(&gamma, &mut ops);
    Ok(BinaryAnalysis {
        partition,
        vhat,
        quasiconcave,
        gamma,
        expost_ir,
        operations: ops.count(),
    })
}

/// Priors at which every curve of the analysis can kink: partition
/// thresholds, `Γ` breakpoints and the midpoints between consecutive ones.
pub fn probe_priors(analysis: &BinaryAnalysis) -> Vec<Rational> {
    let mut xs: Vec<Rational> = analysis
        .partition
        .thresholds
        .iter()
        .chain(&analysis.gamma.breakpoints)
        .cloned()
        .collect();
    xs.sort();
    xs.dedup();
    let two = Rational::from_integer(2.into());
    let mids: Vec<Rational> = xs.windows(2).map(|w| (&w[0] + &w[1]) / &two).collect();
    xs.extend(mids);
    xs.sort();
    xs
}

/// One sample of every curve, for plotting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSample {
    pub x: Rational,
    pub vhat: Rational,
    pub concave: Rational,
    pub quasiconcave: Rational,
    pub gamma: Rational,
}

/// Samples `v̂`, its concave closure, `V̄` and `Γ` at every breakpoint of
/// any of them and at the midpoints between.
pub fn sample_curves(analysis: &BinaryAnalysis) -> Vec<CurveSample> {
    let concave = concave_closure(&analysis.vhat);
    let mut xs: Vec<Rational> = analysis
        .vhat
        .breakpoints
        .iter()
        .chain(&analysis.quasiconcave.curve.breakpoints)
        .chain(&analysis.gamma.breakpoints)
        .chain(concave.vertices.iter().map(|v| &v.0))
        .cloned()
        .collect();
    xs.sort();
    xs.dedup();
    let two = Rational::from_integer(2.into());
    let mids: Vec<Rational> = xs.windows(2).map(|w| (&w[0] + &w[1]) / &two).collect();
    xs.extend(mids);
    xs.sort();
    xs.into_iter()
        .map(|x| CurveSample {
            vhat: analysis.vhat.eval(&x),
            concave: concave.eval(&x),
            quasiconcave: analysis.quasiconcave.curve.eval(&x),
            gamma: analysis.gamma.eval(&x),
            x,
        })
        .collect()
}
