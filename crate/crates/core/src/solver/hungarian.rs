//! Shortest-augmenting-path assignment solver with dual potentials.

use crate::scalar::Real;

use super::SolverError;

/// Reusable workspace for rectangular assignment problems with
/// `rows <= cols`. Forbidden pairs carry an infinite cost.
#[derive(Debug, Clone, Default)]
pub(crate) struct Lap<T> {
    u: Vec<T>,
    v: Vec<T>,
    matched_row: Vec<usize>,
    way: Vec<usize>,
    minv: Vec<T>,
    used: Vec<bool>,
    row_to_col: Vec<usize>,
}

impl<T: Real> Lap<T> {
    pub(crate) fn new() -> Self {
        Self {
            u: Vec::new(),
            v: Vec::new(),
            matched_row: Vec::new(),
            way: Vec::new(),
            minv: Vec::new(),
            used: Vec::new(),
            row_to_col: Vec::new(),
        }
    }

    /// Solves the problem, returning the minimum total cost, or `None` when
    /// every complete matching uses a forbidden pair. Rows are matched in
    /// index order and the lowest column wins ties.
    pub(crate) fn solve(
        &mut self,
        rows: usize,
        cols: usize,
        cost: impl Fn(usize, usize) -> T,
    ) -> Option<T> {
        debug_assert!(rows <= cols);
        let inf = T::infinity();
        self.u.clear();
        self.u.resize(rows + 1, T::zero());
        self.v.clear();
        self.v.resize(cols + 1, T::zero());
        self.matched_row.clear();
        self.matched_row.resize(cols + 1, 0);
        self.way.clear();
        self.way.resize(cols + 1, 0);
        for i in 1..=rows {
            self.matched_row[0] = i;
            let mut j0 = 0;
            self.minv.clear();
            self.minv.resize(cols + 1, inf);
            self.used.clear();
            self.used.resize(cols + 1, false);
            loop {
                self.used[j0] = true;
                let i0 = self.matched_row[j0];
                let mut delta = inf;
                let mut j1 = 0;
                for j in 1..=cols {
                    if self.used[j] {
                        continue;
                    }
                    let cur = cost(i0 - 1, j - 1) - self.u[i0] - self.v[j];
                    if cur < self.minv[j] {
                        self.minv[j] = cur;
                        self.way[j] = j0;
                    }
                    if self.minv[j] < delta {
                        delta = self.minv[j];
                        j1 = j;
                    }
                }
                if j1 == 0 {
                    return None;
                }
                for j in 0..=cols {
                    if self.used[j] {
                        let r = self.matched_row[j];
                        self.u[r] = self.u[r] + delta;
                        self.v[j] = self.v[j] - delta;
                    } else {
                        self.minv[j] = self.minv[j] - delta;
                    }
                }
                j0 = j1;
                if self.matched_row[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = self.way[j0];
                self.matched_row[j0] = self.matched_row[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        self.row_to_col.clear();
        self.row_to_col.resize(rows, usize::MAX);
        let mut total = T::zero();
        for j in 1..=cols {
            let r = self.matched_row[j];
            if r != 0 {
                self.row_to_col[r - 1] = j - 1;
                total = total + cost(r - 1, j - 1);
            }
        }
        Some(total)
    }

    /// Column of each row in the last solution.
    pub(crate) fn assignment(&self) -> &[usize] {
        &self.row_to_col
    }

    /// Reduced cost `c(r, c) - u_r - v_c >= 0` of a pair under the last
    /// solution's potentials. Any complete matching using the pair costs at
    /// least the optimum plus this amount.
    pub(crate) fn reduced_cost(&self, r: usize, c: usize, cost: T) -> T {
        cost - self.u[r + 1] - self.v[c + 1]
    }
}

/// Minimum-cost perfect matching of a square matrix: returns the column
/// chosen for each row and the total cost.
pub fn hungarian<T: Real>(cost: &[Vec<T>]) -> Result<(Vec<usize>, T), SolverError> {
    let m = cost.len();
    for (r, row) in cost.iter().enumerate() {
        if row.len() != m {
            return Err(SolverError::NotSquare {
                rows: m,
                cols: row.len(),
            });
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::NonFiniteEntry(r, c));
        }
    }
    if m == 0 {
        return Ok((Vec::new(), T::zero()));
    }
    let mut lap = Lap::new();
    let total = lap
        .solve(m, m, |r, c| cost[r][c])
        .expect("finite square matrix has a perfect matching");
    Ok((lap.assignment().to_vec(), total))
}
