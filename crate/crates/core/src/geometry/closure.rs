//! Concave, quasiconcave and smoothed quasiconcave closures of `v̂`.

use std::cmp::Ordering;

use super::curve::{pointwise_min, ClosureChain, PiecewiseLinear};
use super::envelope::{compute_partition_counted, sender_line, Line};
use super::{GeometryError, OpCounter};
use crate::model::{best_response, Belief, Game};
use crate::rational::Rational;

/// Cross product sign test: whether `b` lies on or below the segment `a`–`c`.
fn is_not_above(a: &(Rational, Rational), b: &(Rational, Rational), c: &(Rational, Rational)) -> bool {
    let lhs = (&b.1 - &a.1) * (&c.0 - &a.0);
    let rhs = (&c.1 - &a.1) * (&b.0 - &a.0);
    lhs <= rhs
}

/// Upper hull of points sorted by `x`, keeping the highest point per `x`.
pub(crate) fn upper_hull(points: &[(Rational, Rational)], ops: &mut OpCounter) -> ClosureChain {
    let mut hull: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        ops.tick(1);
        if let Some(next) = points.get(i + 1) {
            match p.0.cmp(&next.0) {
                Ordering::Equal if p.1 <= next.1 => continue,
                Ordering::Greater => panic!("points must be sorted by abscissa"),
                _ => {}
            }
        }
        if hull.last().is_some_and(|last| last.0 == p.0) {
            continue;
        }
        while hull.len() >= 2 && is_not_above(&hull[hull.len() - 2], &hull[hull.len() - 1], p) {
            ops.tick(1);
            hull.pop();
        }
        hull.push(p.clone());
    }
    ClosureChain { vertices: hull }
}

/// Every value the curve attains or approaches at its breakpoints.
fn breakpoint_values(curve: &PiecewiseLinear) -> Vec<(Rational, Rational)> {
    (0..curve.breakpoints.len())
        .map(|i| {
            let best = [curve.left_limit(i), Some(curve.point_values[i].clone()), curve.right_limit(i)]
                .into_iter()
                .flatten()
                .max()
                .expect("point value present");
            (curve.breakpoints[i].clone(), best)
        })
        .collect()
}

/// The smallest concave function above the curve.
pub fn concave_closure(curve: &PiecewiseLinear) -> ClosureChain {
    upper_hull(&breakpoint_values(curve), &mut OpCounter::default())
}

/// `x ↦ sup_{y ≤ x} f(y)`.
pub(crate) fn running_max(curve: &PiecewiseLinear, ops: &mut OpCounter) -> PiecewiseLinear {
    let mut breakpoints = vec![curve.breakpoints[0].clone()];
    let mut point_values = vec![curve.point_values[0].clone()];
    let mut pieces = Vec::with_capacity(curve.pieces.len());
    let mut best = curve.point_values[0].clone();
    for (i, line) in curve.pieces.iter().enumerate() {
        ops.tick(1);
        let (start, end) = (&curve.breakpoints[i], &curve.breakpoints[i + 1]);
        best = best.max(line.eval(start));
        let at_end = line.eval(end);
        if at_end <= best {
            pieces.push(Line::new(Rational::from_integer(0.into()), best.clone()));
        } else {
            let catch_up = (&best - &line.intercept) / &line.slope;
            if &catch_up > start {
                pieces.push(Line::new(Rational::from_integer(0.into()), best.clone()));
                breakpoints.push(catch_up);
                point_values.push(best.clone());
            }
            pieces.push(line.clone());
            best = at_end;
        }
        best = best.max(curve.point_values[i + 1].clone());
        breakpoints.push(end.clone());
        point_values.push(best.clone());
    }
    PiecewiseLinear::new(breakpoints, pieces, point_values).simplified()
}

/// `V̄` together with the chain of its values at `β`: both endpoints and
/// every discontinuity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiconcaveClosure {
    pub curve: PiecewiseLinear,
    pub chain: ClosureChain,
}

/// The lowest quasiconcave upper-semicontinuous function above the curve,
/// `min(sup_{y ≤ x} v̂(y), sup_{y ≥ x} v̂(y))`.
pub fn quasiconcave_closure(curve: &PiecewiseLinear) -> QuasiconcaveClosure {
    quasiconcave_closure_counted(curve, &mut OpCounter::default())
}

pub(crate) fn quasiconcave_closure_counted(curve: &PiecewiseLinear, ops: &mut OpCounter) -> QuasiconcaveClosure {
    let left = running_max(curve, ops);
    let right = running_max(&curve.mirrored(), ops).mirrored();
    let vbar = pointwise_min(&left, &right, ops);
    let last = vbar.breakpoints.len() - 1;
    let vertices = (0..=last)
        .filter(|&i| {
            ops.tick(1);
            i == 0 || i == last || !vbar.is_continuous_at(i)
        })
        .map(|i| (vbar.breakpoints[i].clone(), vbar.point_values[i].clone()))
        .collect();
    QuasiconcaveClosure {
        curve: vbar,
        chain: ClosureChain { vertices },
    }
}

/// `Γ`: chords between consecutive `(β_j, V̄(β_j))`.
pub fn smoothed_quasiconcave_closure(qc: &QuasiconcaveClosure) -> PiecewiseLinear {
    qc.chain.to_curve()
}

/// Whether the chord slopes never increase from left to right.
pub fn gamma_is_concave(gamma: &PiecewiseLinear) -> bool {
    gamma_is_concave_counted(gamma, &mut OpCounter::default())
}

pub(crate) fn gamma_is_concave_counted(gamma: &PiecewiseLinear, ops: &mut OpCounter) -> bool {
    gamma.pieces.windows(2).all(|w| {
        ops.tick(1);
        w[0].slope >= w[1].slope
    })
}

/// The concave closure over posteriors whose induced action never leaves
/// the sender below the no-communication utility in a state the posterior
/// can realize, evaluated at the prior.
pub fn expost_closure_value(game: &Game, prior: &Belief) -> Result<Rational, GeometryError> {
    let partition = compute_partition_counted(game, &mut OpCounter::default())?;
    let k = best_response(game, prior).action;
    let last = partition.thresholds.len() - 1;
    let points: Vec<(Rational, Rational)> = partition
        .thresholds
        .iter()
        .enumerate()
        .filter_map(|(t, x)| {
            // μ(θ₁) = 0 realizes only θ₂ and μ(θ₁) = 1 only θ₁.
            let states: &[usize] = match t {
                0 => &[1],
                t if t == last => &[0],
                _ => &[0, 1],
            };
            partition.threshold_ties[t]
                .iter()
                .filter(|&&a| states.iter().all(|&s| game.sender_utility(a, s) >= game.sender_utility(k, s)))
                .map(|&a| sender_line(game, a).eval(x))
                .max()
                .map(|v| (x.clone(), v))
        })
        .collect();
    let hull = upper_hull(&points, &mut OpCounter::default());
    Ok(hull.eval(&prior[0]))
}
