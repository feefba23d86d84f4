//! Exhaustive enumeration for small instances.

use std::time::Instant;

use super::{Instance, OptResult, Solution, SolveStatus, SolverError};
use crate::scalar::Real;

pub const MAX_BRUTE_KEYS: usize = 9;

/// Evaluates every permutation of the free keys. The first optimal
/// permutation in lexicographic order wins ties.
pub fn solve_brute<T: Real>(inst: &Instance<T>) -> Result<OptResult<T>, SolverError> {
    let m = inst.len();
    if m > MAX_BRUTE_KEYS {
        return Err(SolverError::InstanceTooLarge {
            got: m,
            max: MAX_BRUTE_KEYS,
        });
    }
    let started = Instant::now();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut visited = 0u64;
    loop {
        visited += 1;
        if inst.is_feasible(&perm) {
            let cost = inst.free_cost(&perm);
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, perm.clone()));
            }
        }
        let Some(i) = (1..m).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..m)
            .rev()
            .find(|&j| perm[j] > perm[i - 1])
            .expect("successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    let Some((_, slots)) = best else {
        return Ok(OptResult::infeasible(
            T::infinity(),
            visited,
            started.elapsed(),
        ));
    };
    let metrics = inst.metrics(&slots);
    Ok(OptResult {
        status: SolveStatus::Optimal,
        lower_bound: metrics.time_cost,
        solution: Some(Solution { slots, metrics }),
        node_count: visited,
        wall_time: started.elapsed(),
        trace: Vec::new(),
    })
}
