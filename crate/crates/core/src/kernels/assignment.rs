use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square matrix of finite, non-negative assignment costs (row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    n: usize,
    cost: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut cost = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "cost matrix has {n} rows but row {i} has {} columns",
                    row.len()
                )));
            }
            cost.extend(row);
        }
        Self::from_row_major(n, cost)
    }

    pub fn from_row_major(n: usize, cost: Vec<f64>) -> Result<Self> {
        if cost.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                cost.len()
            )));
        }
        if let Some(bad) = cost.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::Parameter(format!(
                "costs must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self { n, cost })
    }

    /// Builds the matrix from a cost function, evaluating rows in parallel.
    pub fn from_fn<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let cost: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self::from_row_major(n, cost)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cost[row * self.n + col]
    }

    /// Total cost of assigning row `i` to column `perm[i]`.
    pub fn cost_of(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `permutation[row]` is the column assigned to `row`.
    pub permutation: Vec<usize>,
    pub total: f64,
}

/// Minimum-cost perfect matching of rows to columns (Hungarian method with
/// potentials and shortest augmenting paths, O(n³)).
///
/// Rows are inserted in index order; when several columns tie for the next
/// step of an augmenting path the lowest column index is taken, so equal
/// inputs always produce the same permutation.
pub fn optimal_assignment(matrix: &CostMatrix) -> Assignment {
    let n = matrix.size();
    if n == 0 {
        return Assignment {
            permutation: vec![],
            total: 0.0,
        };
    }
    // 1-based arrays; column 0 is the virtual start of each augmenting path
    let mut row_pot = vec![0.0f64; n + 1];
    let mut col_pot = vec![0.0f64; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        col_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = matrix.get(i0 - 1, j - 1) - row_pot[i0] - col_pot[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    row_pot[col_row[j]] += delta;
                    col_pot[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut permutation = vec![0usize; n];
    for j in 1..=n {
        permutation[col_row[j] - 1] = j - 1;
    }
    let total = matrix.cost_of(&permutation);
    Assignment { permutation, total }
}
