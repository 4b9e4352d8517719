//! Piecewise-linear functions on `[0, 1]` and vertex chains.

use std::cmp::Ordering;

use super::envelope::{compute_partition_counted, sender_line, Line, Partition};
use super::{GeometryError, OpCounter};
use crate::model::Game;
use crate::rational::Rational;

/// A function on `[0, 1]` that is linear on each open interval between
/// consecutive breakpoints and takes explicit values at the breakpoints.
/// Point values may sit above both adjacent limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinear {
    pub breakpoints: Vec<Rational>,
    /// `pieces[i]` applies on `(breakpoints[i], breakpoints[i + 1])`.
    pub pieces: Vec<Line>,
    pub point_values: Vec<Rational>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<Line>, point_values: Vec<Rational>) -> Self {
        assert!(breakpoints.len() >= 2, "a curve needs both endpoints");
        assert_eq!(pieces.len() + 1, breakpoints.len());
        assert_eq!(point_values.len(), breakpoints.len());
        assert!(breakpoints.windows(2).all(|w| w[0] < w[1]), "breakpoints must increase");
        PiecewiseLinear {
            breakpoints,
            pieces,
            point_values,
        }
    }

    /// Continuous interpolation through `(x, y)` vertices.
    pub fn interpolate(vertices: &[(Rational, Rational)]) -> Self {
        let pieces = vertices
            .windows(2)
            .map(|w| {
                let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
                let intercept = &w[0].1 - &slope * &w[0].0;
                Line::new(slope, intercept)
            })
            .collect();
        PiecewiseLinear::new(
            vertices.iter().map(|v| v.0.clone()).collect(),
            pieces,
            vertices.iter().map(|v| v.1.clone()).collect(),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self.breakpoints.binary_search(x) {
            Ok(i) => self.point_values[i].clone(),
            Err(0) => panic!("{x} lies left of the domain"),
            Err(i) if i == self.breakpoints.len() => panic!("{x} lies right of the domain"),
            Err(i) => self.pieces[i - 1].eval(x),
        }
    }

    /// Limit from the left at breakpoint `i`; `None` at the left end.
    pub fn left_limit(&self, i: usize) -> Option<Rational> {
        (i > 0).then(|| self.pieces[i - 1].eval(&self.breakpoints[i]))
    }

    /// Limit from the right at breakpoint `i`; `None` at the right end.
    pub fn right_limit(&self, i: usize) -> Option<Rational> {
        self.pieces.get(i).map(|p| p.eval(&self.breakpoints[i]))
    }

    /// Whether the point value at breakpoint `i` matches both one-sided limits.
    pub fn is_continuous_at(&self, i: usize) -> bool {
        let value = &self.point_values[i];
        self.left_limit(i).is_none_or(|l| &l == value) && self.right_limit(i).is_none_or(|r| &r == value)
    }

    pub fn is_continuous(&self) -> bool {
        (0..self.breakpoints.len()).all(|i| self.is_continuous_at(i))
    }

    /// Slopes of the pieces, left to right.
    pub fn slopes(&self) -> Vec<Rational> {
        self.pieces.iter().map(|p| p.slope.clone()).collect()
    }

    /// `x ↦ f(1 - x)`.
    pub fn mirrored(&self) -> Self {
        let one = Rational::from_integer(1.into());
        PiecewiseLinear {
            breakpoints: self.breakpoints.iter().rev().map(|b| &one - b).collect(),
            pieces: self
                .pieces
                .iter()
                .rev()
                .map(|p| Line::new(-&p.slope, &p.slope + &p.intercept))
                .collect(),
            point_values: self.point_values.iter().rev().cloned().collect(),
        }
    }

    /// Drops breakpoints where the function is continuous and the same line
    /// continues on both sides.
    pub fn simplified(&self) -> Self {
        let last = self.breakpoints.len() - 1;
        let mut breakpoints = vec![self.breakpoints[0].clone()];
        let mut point_values = vec![self.point_values[0].clone()];
        let mut pieces: Vec<Line> = Vec::new();
        for i in 0..last {
            let piece = &self.pieces[i];
            if i > 0 && self.is_continuous_at(i) && pieces.last() == Some(piece) {
                breakpoints.pop();
                point_values.pop();
            } else {
                pieces.push(piece.clone());
            }
            breakpoints.push(self.breakpoints[i + 1].clone());
            point_values.push(self.point_values[i + 1].clone());
        }
        PiecewiseLinear::new(breakpoints, pieces, point_values)
    }
}

/// Vertices `(x, y)` with strictly increasing `x` from 0 to 1, read as the
/// continuous polyline through them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureChain {
    pub vertices: Vec<(Rational, Rational)>,
}

impl ClosureChain {
    pub fn eval(&self, x: &Rational) -> Rational {
        let idx = self.vertices.partition_point(|v| &v.0 < x);
        match idx {
            i if i < self.vertices.len() && &self.vertices[i].0 == x => self.vertices[i].1.clone(),
            0 => panic!("{x} lies left of the chain"),
            i if i == self.vertices.len() => panic!("{x} lies right of the chain"),
            i => {
                let (x0, y0) = &self.vertices[i - 1];
                let (x1, y1) = &self.vertices[i];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn to_curve(&self) -> PiecewiseLinear {
        PiecewiseLinear::interpolate(&self.vertices)
    }

    pub fn slopes(&self) -> Vec<Rational> {
        self.vertices
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect()
    }
}

/// The sender's expected utility `v̂(μ)` as a function of `μ(θ₁)`.
pub fn vhat_curve(game: &Game) -> Result<PiecewiseLinear, GeometryError> {
    let partition = compute_partition_counted(game, &mut OpCounter::default())?;
    Ok(vhat_from_partition(game, &partition, &mut OpCounter::default()))
}

pub(crate) fn vhat_from_partition(game: &Game, partition: &Partition, ops: &mut OpCounter) -> PiecewiseLinear {
    ops.tick(partition.thresholds.len() as u64);
    let pieces = partition.interval_actions.iter().map(|&a| sender_line(game, a)).collect();
    let point_values = partition
        .threshold_actions
        .iter()
        .zip(&partition.thresholds)
        .map(|(&a, x)| sender_line(game, a).eval(x))
        .collect();
    PiecewiseLinear::new(partition.thresholds.clone(), pieces, point_values)
}

/// Pointwise minimum of two curves on `[0, 1]`.
pub(crate) fn pointwise_min(f: &PiecewiseLinear, g: &PiecewiseLinear, ops: &mut OpCounter) -> PiecewiseLinear {
    let mut xs: Vec<Rational> = Vec::with_capacity(f.breakpoints.len() + g.breakpoints.len());
    let (mut i, mut j) = (0, 0);
    while i < f.breakpoints.len() || j < g.breakpoints.len() {
        ops.tick(1);
        let next = match (f.breakpoints.get(i), g.breakpoints.get(j)) {
            (Some(a), Some(b)) => match a.cmp(b) {
                Ordering::Less => {
                    i += 1;
                    a
                }
                Ordering::Greater => {
                    j += 1;
                    b
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    a
                }
            },
            (Some(a), None) => {
                i += 1;
                a
            }
            (None, Some(b)) => {
                j += 1;
                b
            }
            (None, None) => unreachable!(),
        };
        xs.push(next.clone());
    }

    let (mut fi, mut gi) = (0, 0);
    let mut breakpoints = Vec::new();
    let mut pieces = Vec::new();
    let mut point_values = Vec::new();
    for w in 0..xs.len() {
        ops.tick(1);
        let x = &xs[w];
        while fi + 1 < f.breakpoints.len() && f.breakpoints[fi + 1] <= *x {
            fi += 1;
        }
        while gi + 1 < g.breakpoints.len() && g.breakpoints[gi + 1] <= *x {
            gi += 1;
        }
        let at = |h: &PiecewiseLinear, k: usize| {
            if &h.breakpoints[k] == x {
                h.point_values[k].clone()
            } else {
                h.pieces[k].eval(x)
            }
        };
        breakpoints.push(x.clone());
        point_values.push(at(f, fi).min(at(g, gi)));
        if w + 1 == xs.len() {
            break;
        }
        let (lf, lg) = (&f.pieces[fi], &g.pieces[gi]);
        let next = &xs[w + 1];
        if lf.slope != lg.slope {
            let cross = lf.crossing(lg);
            if &cross > x && &cross < next {
                let (first, second) = if lf.eval(x) <= lg.eval(x) { (lf, lg) } else { (lg, lf) };
                pieces.push(first.clone());
                breakpoints.push(cross.clone());
                point_values.push(first.eval(&cross));
                pieces.push(second.clone());
                continue;
            }
        }
        let mid = (x + next) / Rational::from_integer(2.into());
        pieces.push(if lf.eval(&mid) <= lg.eval(&mid) { lf.clone() } else { lg.clone() });
    }
    PiecewiseLinear::new(breakpoints, pieces, point_values).simplified()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::rational::{int, rat};

    #[test]
    fn quasi_first_sender_vhat() {
        let curve = vhat_curve(&instances::quasi_first_sender()).unwrap();
        assert_eq!(curve.pieces.iter().map(|p| p.intercept.clone()).collect::<Vec<_>>(), vec![int(2), int(1), int(3), int(4)]);
        assert!(curve.slopes().iter().all(|s| s == &int(0)));
        assert_eq!(curve.eval(&rat(1, 4)), int(2));
        assert_eq!(curve.eval(&rat(1, 2)), int(3));
        assert_eq!(curve.eval(&rat(3, 4)), int(4));
    }

    #[test]
    fn lending_vhat() {
        let curve = vhat_curve(&instances::lending()).unwrap();
        assert_eq!(curve.eval(&rat(1, 5)), int(0));
        assert_eq!(curve.eval(&rat(3, 10)), int(1));
        assert_eq!(curve.eval(&rat(9, 10)), int(1));
        assert_eq!(curve.eval(&int(1)), int(10));
        assert_eq!(curve.left_limit(2), Some(int(1)));
        assert!(!curve.is_continuous());
    }

    #[test]
    fn cheap_talk_vhat_is_continuous() {
        let curve = vhat_curve(&instances::cheap_talk_gap()).unwrap();
        assert_eq!(curve.breakpoints, vec![int(0), rat(1, 5), rat(2, 5), rat(3, 5), rat(4, 5), int(1)]);
        assert!(curve.is_continuous());
        assert_eq!(curve.eval(&rat(1, 5)), int(2));
        assert_eq!(curve.eval(&rat(4, 5)), int(2));
        assert_eq!(curve.eval(&rat(1, 2)), int(1));
        assert_eq!(curve.eval(&rat(2, 5)), int(1));
    }

    #[test]
    fn mirror_is_an_involution() {
        let curve = vhat_curve(&instances::lending()).unwrap();
        let mirrored = curve.mirrored();
        assert_eq!(mirrored.eval(&int(0)), int(10));
        assert_eq!(mirrored.eval(&rat(1, 5)), curve.eval(&rat(4, 5)));
        assert_eq!(mirrored.mirrored(), curve);
    }

    #[test]
    fn simplify_merges_collinear_pieces() {
        let curve = PiecewiseLinear::interpolate(&[(int(0), int(0)), (rat(1, 2), int(1)), (int(1), int(2))]);
        let simple = curve.simplified();
        assert_eq!(simple.breakpoints, vec![int(0), int(1)]);
        assert_eq!(simple.eval(&rat(1, 4)), rat(1, 2));
    }

    #[test]
    fn min_inserts_crossing() {
        let up = PiecewiseLinear::interpolate(&[(int(0), int(0)), (int(1), int(1))]);
        let down = PiecewiseLinear::interpolate(&[(int(0), int(1)), (int(1), int(0))]);
        let m = pointwise_min(&up, &down, &mut OpCounter::default());
        assert_eq!(m.breakpoints, vec![int(0), rat(1, 2), int(1)]);
        assert_eq!(m.eval(&rat(1, 2)), rat(1, 2));
        assert_eq!(m.eval(&rat(3, 4)), rat(1, 4));
    }

    #[test]
    fn chain_interpolates() {
        let chain = ClosureChain {
            vertices: vec![(int(0), int(2)), (rat(3, 4), int(4)), (int(1), int(4))],
        };
        assert_eq!(chain.eval(&rat(3, 5)), rat(18, 5));
        assert_eq!(chain.slopes(), vec![rat(8, 3), int(0)]);
    }
}
