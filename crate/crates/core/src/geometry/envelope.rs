//! Upper envelopes of lines and the receiver's best-response partition.

use num_traits::Zero;

use super::{GeometryError, OpCounter};
use crate::model::Game;
use crate::rational::Rational;

/// `y = slope * x + intercept`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Line {
    pub slope: Rational,
    pub intercept: Rational,
}

impl Line {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        Line { slope, intercept }
    }

    /// The line through `(0, at_zero)` and `(1, at_one)`.
    pub fn through(at_zero: &Rational, at_one: &Rational) -> Self {
        Line::new(at_one - at_zero, at_zero.clone())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    /// Abscissa where two non-parallel lines cross.
    pub fn crossing(&self, other: &Line) -> Rational {
        (&self.intercept - &other.intercept) / (&other.slope - &self.slope)
    }
}

/// Receiver utility of `action` as a function of `μ(θ₁)`.
pub(crate) fn receiver_line(game: &Game, action: usize) -> Line {
    Line::through(game.receiver_utility(action, 1), game.receiver_utility(action, 0))
}

/// Sender utility of `action` as a function of `μ(θ₁)`.
pub(crate) fn sender_line(game: &Game, action: usize) -> Line {
    Line::through(game.sender_utility(action, 1), game.sender_utility(action, 0))
}

/// Upper envelope over the whole real line. `groups[i]` holds every input
/// index whose line equals `lines[i]`; `vertices[i]` is where `lines[i]`
/// hands over to `lines[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Hull {
    pub lines: Vec<Line>,
    pub groups: Vec<Vec<usize>>,
    pub vertices: Vec<Rational>,
}

pub(crate) fn upper_envelope(lines: &[Line], ops: &mut OpCounter) -> Hull {
    let mut order: Vec<usize> = (0..lines.len()).collect();
    order.sort_by(|&a, &b| {
        ops.tick(1);
        lines[a].cmp(&lines[b]).then(a.cmp(&b))
    });

    let mut hull: Vec<(Line, Vec<usize>)> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        ops.tick(1);
        let line = &lines[order[start]];
        let mut end = start + 1;
        while end < order.len() && &lines[order[end]] == line {
            ops.tick(1);
            end += 1;
        }
        let group = order[start..end].to_vec();
        start = end;

        if hull.last().is_some_and(|(top, _)| top.slope == line.slope) {
            ops.tick(1);
            hull.pop();
        }
        while hull.len() >= 2 {
            ops.tick(1);
            let (prev, _) = &hull[hull.len() - 2];
            let (top, _) = &hull[hull.len() - 1];
            if prev.crossing(line) <= prev.crossing(top) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((line.clone(), group));
    }

    let vertices = hull.windows(2).map(|w| w[0].0.crossing(&w[1].0)).collect();
    let (lines, groups) = hull.into_iter().unzip();
    Hull {
        lines,
        groups,
        vertices,
    }
}

impl Hull {
    /// Pieces of positive length inside `[lo, hi]` as `(start, end, hull index)`.
    pub fn clip(&self, lo: &Rational, hi: &Rational) -> Vec<(Rational, Rational, usize)> {
        (0..self.lines.len())
            .filter_map(|i| {
                let start = match i {
                    0 => lo.clone(),
                    _ => self.vertices[i - 1].clone().max(lo.clone()),
                };
                let end = match self.vertices.get(i) {
                    Some(v) => v.clone().min(hi.clone()),
                    None => hi.clone(),
                };
                (start < end).then_some((start, end, i))
            })
            .collect()
    }

    /// The hull vertex a line of this slope could touch, found by binary
    /// search over the increasing hull slopes.
    fn touching_vertex(&self, slope: &Rational, ops: &mut OpCounter) -> Option<usize> {
        let idx = self.lines.partition_point(|l| {
            ops.tick(1);
            &l.slope < slope
        });
        if idx == 0 || idx == self.lines.len() || &self.lines[idx].slope == slope {
            return None;
        }
        Some(idx - 1)
    }
}

/// The receiver's best-response structure on `μ(θ₁) ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// `0 = α₀ < α₁ < … < α_r = 1`.
    pub thresholds: Vec<Rational>,
    /// Sender-favored best response on each open interval `(α_{i-1}, α_i)`.
    pub interval_actions: Vec<usize>,
    /// Sender-favored best response at each threshold.
    pub threshold_actions: Vec<usize>,
    /// Every receiver-optimal action at each threshold, ascending.
    pub threshold_ties: Vec<Vec<usize>>,
}

impl Partition {
    pub fn num_intervals(&self) -> usize {
        self.interval_actions.len()
    }
}

fn sender_favorite(game: &Game, tied: &[usize], x: &Rational) -> usize {
    let mut best = tied[0];
    let mut best_value = sender_line(game, best).eval(x);
    for &a in &tied[1..] {
        let value = sender_line(game, a).eval(x);
        if value > best_value || (value == best_value && a < best) {
            best = a;
            best_value = value;
        }
    }
    best
}

pub fn compute_partition(game: &Game) -> Result<Partition, GeometryError> {
    compute_partition_counted(game, &mut OpCounter::default())
}

pub(crate) fn compute_partition_counted(game: &Game, ops: &mut OpCounter) -> Result<Partition, GeometryError> {
    if game.num_states() != 2 {
        return Err(GeometryError::NotBinary {
            states: game.num_states(),
        });
    }
    let (lo, hi) = (Rational::zero(), Rational::from_integer(1.into()));
    let receiver: Vec<Line> = (0..game.num_actions()).map(|a| receiver_line(game, a)).collect();
    let hull = upper_envelope(&receiver, ops);

    // Actions with identical receiver lines stay tied across the whole
    // piece, so the sender's favorite among them can switch mid-piece.
    let mut segments: Vec<(Rational, Rational, usize, usize)> = Vec::new();
    for (start, end, h) in hull.clip(&lo, &hi) {
        ops.tick(1);
        let group = &hull.groups[h];
        let senders: Vec<Line> = group.iter().map(|&a| sender_line(game, a)).collect();
        if senders.iter().all(|s| s == &senders[0]) {
            segments.push((start, end, group[0], h));
            continue;
        }
        let inner = upper_envelope(&senders, ops);
        for (s, e, i) in inner.clip(&start, &end) {
            let action = inner.groups[i].iter().map(|&j| group[j]).min().expect("nonempty group");
            segments.push((s, e, action, h));
        }
    }

    let mut thresholds = vec![segments[0].0.clone()];
    thresholds.extend(segments.iter().map(|s| s.1.clone()));
    let interval_actions: Vec<usize> = segments.iter().map(|s| s.2).collect();

    let mut ties: Vec<Vec<usize>> = vec![Vec::new(); thresholds.len()];
    for (i, seg) in segments.iter().enumerate() {
        ties[i].extend_from_slice(&hull.groups[seg.3]);
        ties[i + 1].extend_from_slice(&hull.groups[seg.3]);
    }
    let locate = |x: &Rational, ops: &mut OpCounter| {
        let idx = thresholds.partition_point(|t| {
            ops.tick(1);
            t < x
        });
        (idx < thresholds.len() && &thresholds[idx] == x).then_some(idx)
    };
    for (v, x) in hull.vertices.iter().enumerate() {
        if let Some(t) = locate(x, ops) {
            ties[t].extend_from_slice(&hull.groups[v]);
            ties[t].extend_from_slice(&hull.groups[v + 1]);
        }
    }
    let mut on_hull = vec![false; receiver.len()];
    for &a in hull.groups.iter().flatten() {
        on_hull[a] = true;
    }
    for (a, line) in receiver.iter().enumerate().filter(|(a, _)| !on_hull[*a]) {
        ops.tick(1);
        let Some(v) = hull.touching_vertex(&line.slope, ops) else {
            continue;
        };
        let x = &hull.vertices[v];
        if line.eval(x) == hull.lines[v].eval(x) {
            if let Some(t) = locate(x, ops) {
                ties[t].push(a);
            }
        }
    }
    for tied in &mut ties {
        ops.tick(tied.len() as u64);
        tied.sort_unstable();
        tied.dedup();
    }
    let threshold_actions = ties
        .iter()
        .zip(&thresholds)
        .map(|(tied, x)| sender_favorite(game, tied, x))
        .collect();

    Ok(Partition {
        thresholds,
        interval_actions,
        threshold_actions,
        threshold_ties: ties,
    })
}
