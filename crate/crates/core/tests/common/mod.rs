//! Slow, independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use logdist::event_log::{read_log, ColumnMapping, EventLog, FormatOptions};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load(name: &str) -> EventLog {
    read_log(
        fixture(name),
        &ColumnMapping::default(),
        &FormatOptions::default(),
    )
    .unwrap()
}

/// Unbalanced EMD on integer histograms given as (origin, masses), by
/// successive shortest paths on the explicit flow network:
/// source -> heavy bins -> {light bins, virtual sink} -> sink.
pub fn emd_min_cost_flow(x: (i64, &[u32]), y: (i64, &[u32])) -> f64 {
    let sx: u32 = x.1.iter().sum();
    let sy: u32 = y.1.iter().sum();
    let (heavy, light) = if sx >= sy { (x, y) } else { (y, x) };
    let surplus = sx.abs_diff(sy);

    let support = |(o, m): (i64, &[u32])| -> Vec<i64> {
        m.iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, _)| o + i as i64)
            .collect()
    };
    let all: Vec<i64> = support(x).into_iter().chain(support(y)).collect();
    if all.is_empty() {
        return 0.0;
    }
    let penalty = all.iter().max().unwrap() - all.iter().min().unwrap() + 1;

    // nodes: 0 source, 1..=h heavy bins, then light bins, then virtual, then sink
    let h = heavy.1.len();
    let l = light.1.len();
    let virt = 1 + h + l;
    let sink = virt + 1;
    let mut g = Graph::new(sink + 1);
    for (i, &m) in heavy.1.iter().enumerate() {
        g.add(0, 1 + i, m as i64, 0);
        for j in 0..l {
            let d = (heavy.0 + i as i64 - light.0 - j as i64).abs();
            g.add(1 + i, 1 + h + j, i64::MAX / 4, d);
        }
        g.add(1 + i, virt, i64::MAX / 4, penalty);
    }
    for (j, &m) in light.1.iter().enumerate() {
        g.add(1 + h + j, sink, m as i64, 0);
    }
    g.add(virt, sink, surplus as i64, 0);
    g.min_cost_flow(0, sink) as f64
}

struct Graph {
    edges: Vec<(usize, i64, i64)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Self {
            edges: vec![],
            adj: vec![vec![]; n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: i64) {
        self.adj[from].push(self.edges.len());
        self.edges.push((to, cap, cost));
        self.adj[to].push(self.edges.len());
        self.edges.push((from, 0, -cost));
    }

    /// Saturating min-cost flow; Bellman-Ford for each augmenting path.
    fn min_cost_flow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut dist = vec![i64::MAX; n];
            let mut prev: Vec<Option<usize>> = vec![None; n];
            dist[s] = 0;
            for _ in 0..n {
                let mut changed = false;
                for u in 0..n {
                    if dist[u] == i64::MAX {
                        continue;
                    }
                    for &e in &self.adj[u] {
                        let (v, cap, cost) = self.edges[e];
                        if cap > 0 && dist[u] + cost < dist[v] {
                            dist[v] = dist[u] + cost;
                            prev[v] = Some(e);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t] == i64::MAX {
                return total;
            }
            let mut push = i64::MAX;
            let mut v = t;
            while let Some(e) = prev[v] {
                push = push.min(self.edges[e].1);
                v = self.edges[e ^ 1].0;
            }
            let mut v = t;
            while let Some(e) = prev[v] {
                self.edges[e].1 -= push;
                self.edges[e ^ 1].1 += push;
                v = self.edges[e ^ 1].0;
            }
            total += push * dist[t];
        }
    }
}

/// Same quantity by enumerating every integer transport plan that fully
/// serves the lighter side. Only usable on a handful of units.
pub fn emd_enumerate(x: (i64, &[u32]), y: (i64, &[u32])) -> f64 {
    let sx: u32 = x.1.iter().sum();
    let sy: u32 = y.1.iter().sum();
    let (heavy, light) = if sx >= sy { (x, y) } else { (y, x) };
    let all: Vec<i64> = [x, y]
        .iter()
        .flat_map(|(o, m)| {
            m.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(move |(i, _)| o + i as i64)
        })
        .collect();
    if all.is_empty() {
        return 0.0;
    }
    let penalty = (all.iter().max().unwrap() - all.iter().min().unwrap() + 1) as f64;
    let units: Vec<i64> = light
        .1
        .iter()
        .enumerate()
        .flat_map(|(j, &m)| std::iter::repeat_n(light.0 + j as i64, m as usize))
        .collect();
    let mut left: Vec<u32> = heavy.1.to_vec();
    let best = assign_units(&units, heavy.0, &mut left);
    best as f64 + penalty * sx.abs_diff(sy) as f64
}

fn assign_units(units: &[i64], origin: i64, left: &mut [u32]) -> i64 {
    let Some((&pos, rest)) = units.split_first() else {
        return 0;
    };
    let mut best = i64::MAX;
    for i in 0..left.len() {
        if left[i] > 0 {
            left[i] -= 1;
            let cost = (origin + i as i64 - pos).abs() + assign_units(rest, origin, left);
            left[i] += 1;
            best = best.min(cost);
        }
    }
    best
}

/// Minimum over all n! permutations.
pub fn assignment_brute_force(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for c in 0..cost.len() {
            if !used[c] {
                used[c] = true;
                best = best.min(cost[row][c] + go(cost, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    go(cost, 0, &mut vec![false; cost.len()])
}

/// Restricted Damerau-Levenshtein distance straight from its recursive
/// definition, memoized on suffix lengths.
pub fn osa_recursive<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn d<T: PartialEq>(
        a: &[T],
        b: &[T],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if i == 0 {
            return j;
        }
        if j == 0 {
            return i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let sub = usize::from(a[i - 1] != b[j - 1]);
        let mut best = (d(a, b, i - 1, j, memo) + 1)
            .min(d(a, b, i, j - 1, memo) + 1)
            .min(d(a, b, i - 1, j - 1, memo) + sub);
        if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
            best = best.min(d(a, b, i - 2, j - 2, memo) + 1);
        }
        memo.insert((i, j), best);
        best
    }
    d(a, b, a.len(), b.len(), &mut HashMap::new())
}
