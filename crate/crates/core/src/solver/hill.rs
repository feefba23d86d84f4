//! Randomized local search by pairwise swaps.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{lit, Real};

use super::lagrangian::lagrangian_bound;
use super::{Instance, OptResult, Solution, SolveStatus, SolverError};

/// Random permutations tried per restart before falling back to the
/// error-minimal placement.
const START_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HillOptions {
    pub seed: u64,
    pub restarts: usize,
}

impl Default for HillOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
        }
    }
}

/// Applies the best budget-respecting improving swap until none is left.
pub(crate) fn descend<T: Real>(inst: &Instance<T>, slots: &mut [usize]) -> usize {
    let (f, t, p) = (&inst.freqs, &inst.times, &inst.errors);
    let mut weight = inst.free_weight(slots);
    let mut cost = inst.free_cost(slots);
    let mut moves = 0;
    loop {
        let threshold = lit::<T>(1e-12) * cost.abs().max(T::one());
        let mut best: Option<(T, usize, usize)> = None;
        for a in 0..slots.len() {
            for b in a + 1..slots.len() {
                let df = f[a] - f[b];
                if df == T::zero() {
                    continue;
                }
                let (sa, sb) = (slots[a], slots[b]);
                let delta = df * (t[sb] - t[sa]);
                if delta < -threshold
                    && best.is_none_or(|(d, _, _)| delta < d)
                    && inst.fits(weight + df * (p[sb] - p[sa]))
                {
                    best = Some((delta, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { return moves };
        slots.swap(a, b);
        moves += 1;
        weight = inst.free_weight(slots);
        cost = inst.free_cost(slots);
    }
}

/// Best local optimum over `restarts` seeded random feasible starts.
///
/// The result is never certified optimal; its lower bound is the
/// unconstrained minimum time cost.
pub fn solve_hill_climb<T: Real>(
    inst: &Instance<T>,
    options: &HillOptions,
) -> Result<OptResult<T>, SolverError> {
    let started = Instant::now();
    if !inst.is_feasible(&inst.weight_minimal()) {
        return Err(SolverError::NoFeasibleStart);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut evaluated = 0u64;
    for _ in 0..options.restarts.max(1) {
        let mut slots: Vec<usize> = (0..inst.len()).collect();
        let mut found = false;
        for _ in 0..START_ATTEMPTS {
            slots.shuffle(&mut rng);
            evaluated += 1;
            if inst.is_feasible(&slots) {
                found = true;
                break;
            }
        }
        if !found {
            slots = inst.weight_minimal();
        }
        evaluated += descend(inst, &mut slots) as u64;
        let cost = inst.free_cost(&slots);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, slots));
        }
    }
    let (_, slots) = best.expect("at least one restart");
    let lower_bound = lagrangian_bound(inst, T::zero())?.dual;
    let metrics = inst.metrics(&slots);
    Ok(OptResult {
        status: SolveStatus::Feasible,
        solution: Some(Solution { slots, metrics }),
        lower_bound,
        node_count: evaluated,
        wall_time: started.elapsed(),
        trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descent_respects_budget_and_improves() {
        let inst = Instance::from_parts(
            vec![9.0, 5.0, 3.0, 1.0],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.9, 0.1, 0.1, 0.0],
            0.4,
        )
        .unwrap();
        let mut slots = vec![3, 2, 1, 0];
        assert!(inst.is_feasible(&slots));
        let before = inst.free_cost(&slots);
        descend(&inst, &mut slots);
        assert!(inst.is_feasible(&slots));
        assert!(inst.free_cost(&slots) < before);
    }

    #[test]
    fn same_seed_same_result() {
        let inst = Instance::from_parts(
            vec![4.0, 7.0, 1.0, 3.0, 2.0],
            vec![1.0, 2.0, 2.0, 3.0, 4.0],
            vec![0.5, 0.2, 0.3, 0.1, 0.0],
            0.25,
        )
        .unwrap();
        let opts = HillOptions {
            seed: 7,
            restarts: 3,
        };
        let a = solve_hill_climb(&inst, &opts).unwrap();
        let b = solve_hill_climb(&inst, &opts).unwrap();
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.status, SolveStatus::Feasible);
        assert!(a.lower_bound <= a.time_cost().unwrap() + 1e-12);
    }

    #[test]
    fn no_start_when_budget_unreachable() {
        let inst =
            Instance::from_parts(vec![4.0, 7.0], vec![1.0, 2.0], vec![0.5, 0.5], 0.1).unwrap();
        assert_eq!(
            solve_hill_climb(&inst, &HillOptions::default()).unwrap_err(),
            SolverError::NoFeasibleStart
        );
    }
}
