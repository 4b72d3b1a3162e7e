//! One-dimensional optimal transport between histograms on a unit-spaced grid.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether two total masses match.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Non-negative masses on consecutive integer bins starting at `origin`.
///
/// The distance between global bins `i` and `j` is `|i - j|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram1D {
    origin: i64,
    masses: Vec<f64>,
}

impl Histogram1D {
    pub fn new(origin: i64, masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Parameter("histogram needs at least one bin".into()));
        }
        if let Some(bad) = masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::Parameter(format!(
                "histogram masses must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self { origin, masses })
    }

    /// A single empty bin at index 0.
    pub fn zero() -> Self {
        Self {
            origin: 0,
            masses: vec![0.0],
        }
    }

    /// Counts how many times each global bin index occurs.
    pub fn from_indices(indices: impl IntoIterator<Item = i64>) -> Self {
        let indices: Vec<i64> = indices.into_iter().collect();
        let (Some(&lo), Some(&hi)) = (indices.iter().min(), indices.iter().max()) else {
            return Self::zero();
        };
        let mut masses = vec![0.0; (hi - lo + 1) as usize];
        for i in indices {
            masses[(i - lo) as usize] += 1.0;
        }
        Self { origin: lo, masses }
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Global index one past the last bin.
    pub fn end(&self) -> i64 {
        self.origin + self.masses.len() as i64
    }

    /// Same masses, origin moved by `offset` bins.
    pub fn shifted(&self, offset: i64) -> Self {
        Self {
            origin: self.origin + offset,
            masses: self.masses.clone(),
        }
    }

    /// Mass at global bin `index` (zero outside the stored range).
    pub fn mass_at(&self, index: i64) -> f64 {
        if index < self.origin || index >= self.end() {
            0.0
        } else {
            self.masses[(index - self.origin) as usize]
        }
    }

    /// First and last global index holding positive mass.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.masses.iter().position(|&m| m > 0.0)?;
        let last = self.masses.iter().rposition(|&m| m > 0.0)?;
        Some((self.origin + first as i64, self.origin + last as i64))
    }

    fn normalized(&self) -> Self {
        let total = self.total();
        Self {
            origin: self.origin,
            masses: self.masses.iter().map(|m| m / total).collect(),
        }
    }
}

/// Both histograms laid out over the union of their index ranges.
fn align(x: &Histogram1D, y: &Histogram1D) -> (Vec<f64>, Vec<f64>) {
    let lo = x.origin.min(y.origin);
    let hi = x.end().max(y.end());
    let xs = (lo..hi).map(|i| x.mass_at(i)).collect();
    let ys = (lo..hi).map(|i| y.mass_at(i)).collect();
    (xs, ys)
}

fn masses_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= MASS_TOLERANCE * a.max(b).max(1.0)
}

/// Penalty charged per unit of unmatched mass by [`emd_1d`]: the number of
/// bins spanned by the union of both supports (0 when both are empty).
pub fn surplus_penalty(x: &Histogram1D, y: &Histogram1D) -> f64 {
    let support = match (x.support(), y.support()) {
        (Some((a, b)), Some((c, d))) => (a.min(c), b.max(d)),
        (Some(s), None) | (None, Some(s)) => s,
        (None, None) => return 0.0,
    };
    (support.1 - support.0 + 1) as f64
}

/// Earth Mover's Distance between two histograms with ground distance `|i - j|`.
///
/// When the totals differ, the lighter side is completed with a virtual bin
/// at distance [`surplus_penalty`] from every real bin, so each unit of
/// surplus costs that penalty while the remaining mass is transported
/// optimally. Equal totals reduce to the plain cumulative-difference sweep.
pub fn emd_1d(x: &Histogram1D, y: &Histogram1D) -> f64 {
    let (xs, ys) = align(x, y);
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    if masses_match(sx, sy) {
        return cdf_sweep(&xs, &ys);
    }
    let penalty = surplus_penalty(x, y);
    let (src, dst) = if sx > sy { (&xs, &ys) } else { (&ys, &xs) };
    let (transport, surplus) = partial_transport(src, dst);
    transport + penalty * surplus
}

/// First Wasserstein distance between the unit-normalized histograms.
pub fn wasserstein_1(x: &Histogram1D, y: &Histogram1D) -> Result<f64> {
    for (name, h) in [("first", x), ("second", y)] {
        if h.total() <= 0.0 {
            return Err(Error::UndefinedInput(format!(
                "{name} histogram has zero total mass"
            )));
        }
    }
    let (xs, ys) = align(&x.normalized(), &y.normalized());
    Ok(cdf_sweep(&xs, &ys))
}

/// Σ |CDF_x − CDF_y| over aligned bins.
fn cdf_sweep(xs: &[f64], ys: &[f64]) -> f64 {
    let mut flow = 0.0;
    let mut cost = 0.0;
    for (a, b) in xs.iter().zip(ys) {
        flow += a - b;
        cost += flow.abs();
    }
    cost
}

#[derive(Debug, Clone, Copy)]
struct Breakpoint {
    pos: f64,
    weight: f64,
}

impl PartialEq for Breakpoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Breakpoint {}

impl PartialOrd for Breakpoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Breakpoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pos.total_cmp(&other.pos)
    }
}

/// Convex piecewise-linear function of one variable kept as slope-change
/// breakpoints around its minimum. Positions in `right` are stored minus
/// `shift` so the increasing branch can be translated in O(1).
struct ConvexPwl {
    min_value: f64,
    left: BinaryHeap<Breakpoint>,
    right: BinaryHeap<Reverse<Breakpoint>>,
    shift: f64,
}

impl ConvexPwl {
    /// Indicator of the single point 0.
    fn point_at_zero() -> Self {
        let wall = Breakpoint {
            pos: 0.0,
            weight: f64::INFINITY,
        };
        Self {
            min_value: 0.0,
            left: BinaryHeap::from([wall]),
            right: BinaryHeap::from([Reverse(wall)]),
            shift: 0.0,
        }
    }

    /// f(R) <- min over t in [0, width] of f(R - t).
    fn widen_right(&mut self, width: f64) {
        self.shift += width;
    }

    fn left_top(&self) -> f64 {
        self.left.peek().map_or(f64::NEG_INFINITY, |b| b.pos)
    }

    fn right_top(&self) -> f64 {
        self.right
            .peek()
            .map_or(f64::INFINITY, |b| b.0.pos + self.shift)
    }

    /// f(R) += |R - c|.
    fn add_abs(&mut self, c: f64) {
        self.add_ramp_up(c, 1.0);
        self.add_ramp_down(c, 1.0);
    }

    /// f(R) += w · max(0, R - c).
    fn add_ramp_up(&mut self, c: f64, w: f64) {
        if c >= self.left_top() {
            self.right.push(Reverse(Breakpoint {
                pos: c - self.shift,
                weight: w,
            }));
            return;
        }
        self.left.push(Breakpoint { pos: c, weight: w });
        let mut remaining = w;
        while remaining > 0.0 {
            let top = self.left.pop().expect("left branch holds the pushed point");
            let take = top.weight.min(remaining);
            self.min_value += take * (top.pos - c);
            self.right.push(Reverse(Breakpoint {
                pos: top.pos - self.shift,
                weight: take,
            }));
            if top.weight > take {
                self.left.push(Breakpoint {
                    pos: top.pos,
                    weight: top.weight - take,
                });
            }
            remaining -= take;
        }
    }

    /// f(R) += w · max(0, c - R).
    fn add_ramp_down(&mut self, c: f64, w: f64) {
        if c <= self.right_top() {
            self.left.push(Breakpoint { pos: c, weight: w });
            return;
        }
        self.right.push(Reverse(Breakpoint {
            pos: c - self.shift,
            weight: w,
        }));
        let mut remaining = w;
        while remaining > 0.0 {
            let Reverse(top) = self
                .right
                .pop()
                .expect("right branch holds the pushed point");
            let pos = top.pos + self.shift;
            let take = top.weight.min(remaining);
            self.min_value += take * (c - pos);
            self.left.push(Breakpoint { pos, weight: take });
            if top.weight > take {
                self.right.push(Reverse(Breakpoint {
                    pos: top.pos,
                    weight: top.weight - take,
                }));
            }
            remaining -= take;
        }
    }

    fn value_at(mut self, r: f64) -> f64 {
        let mut value = self.min_value;
        if r > self.right_top() {
            while let Some(Reverse(b)) = self.right.pop() {
                let pos = b.pos + self.shift;
                if pos >= r {
                    break;
                }
                value += b.weight * (r - pos);
            }
        } else if r < self.left_top() {
            while let Some(b) = self.left.pop() {
                if b.pos <= r {
                    break;
                }
                value += b.weight * (b.pos - r);
            }
        }
        value
    }
}

/// Cheapest way to move all of `dst` from `src` when `src` holds more mass,
/// leaving the surplus behind. Returns (transport cost, surplus).
///
/// With `R_i` the cumulative mass left behind up to bin `i`, the cost of a
/// choice is `Σ |C_i − R_i|` where `C_i` is the cumulative `src − dst`
/// difference; `R` is non-decreasing, grows by at most `src[i]` per bin and
/// must end at the surplus. The DP over `R` stays convex and piecewise
/// linear, so it is carried as a breakpoint set.
fn partial_transport(src: &[f64], dst: &[f64]) -> (f64, f64) {
    let mut f = ConvexPwl::point_at_zero();
    let mut cumulative = 0.0;
    let mut total_src = 0.0;
    let mut total_dst = 0.0;
    for (&s, &d) in src.iter().zip(dst) {
        f.widen_right(s);
        total_src += s;
        total_dst += d;
        cumulative += s - d;
        f.add_abs(cumulative);
    }
    let surplus = (total_src - total_dst).max(0.0);
    (f.value_at(surplus), surplus)
}
