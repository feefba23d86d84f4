//! Lagrangian relaxation of the error budget.
//!
//! Pricing the budget with a multiplier `λ >= 0` leaves a plain assignment
//! problem with costs `f_i (t_p + λ p_p)`. Its optimum minus `λ * budget` is
//! a lower bound on the constrained optimum for every `λ`; the best bound is
//! found by searching the breakpoints of this concave piecewise-linear dual.

use crate::scalar::{lit, Real};

use super::hungarian::Lap;
use super::{Instance, SolverError};

/// One evaluation of the dual at a fixed multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianEval<T> {
    /// Dual value in seconds per character, pinned keys included.
    pub dual: T,
    /// Free-position index of each free key in the relaxed matching.
    pub slots: Vec<usize>,
    /// `Σ f_i p_p` of the relaxed matching, count units.
    pub weight: T,
}

/// Dual value and relaxed matching at multiplier `lambda`.
pub fn lagrangian_bound<T: Real>(
    inst: &Instance<T>,
    lambda: T,
) -> Result<LagrangianEval<T>, SolverError> {
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(SolverError::InvalidInstance(
            "multiplier must be finite and non-negative".into(),
        ));
    }
    let sub = Subproblem::root(inst);
    let mut lap = Lap::new();
    let e = sub
        .eval(&mut lap, Price::Lambda(lambda))
        .expect("unconstrained subproblem always has a matching");
    let mut slots = vec![usize::MAX; inst.len()];
    for (r, &c) in e.cols.iter().enumerate() {
        slots[sub.rows[r]] = sub.cols[c];
    }
    fill_zero_keys(inst, &mut slots);
    Ok(LagrangianEval {
        dual: (e.lagrangian(lambda, sub.budget) + sub.base) / inst.n(),
        slots,
        weight: e.weight,
    })
}

/// Places keys without a slot, in index order, on the unused positions in
/// index order.
pub(crate) fn fill_zero_keys<T: Real>(inst: &Instance<T>, slots: &mut [usize]) {
    let mut used = vec![false; inst.len()];
    for &s in slots.iter().filter(|s| **s != usize::MAX) {
        used[s] = true;
    }
    let mut free = (0..inst.len()).filter(|p| !used[*p]);
    for s in slots.iter_mut().filter(|s| **s == usize::MAX) {
        *s = free.next().expect("as many positions as keys");
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Price<T> {
    Lambda(T),
    /// Error mass only.
    WeightOnly,
}

/// Matching of the active rows with its time and weight totals.
#[derive(Debug, Clone)]
pub(crate) struct Eval<T> {
    /// Active-column index of each active row.
    pub cols: Vec<usize>,
    pub cost: T,
    pub weight: T,
}

impl<T: Real> Eval<T> {
    /// `cost + λ (weight - budget)`, without the pinned base cost.
    pub(crate) fn lagrangian(&self, lambda: T, budget: T) -> T {
        self.cost + lambda * (self.weight - budget)
    }
}

/// Assignment of the still-open keys with positive frequency onto the
/// still-open positions, with some (row, position) pairs forbidden.
#[derive(Debug, Clone)]
pub(crate) struct Subproblem<'a, T> {
    pub inst: &'a Instance<T>,
    /// Free-key indices of the active rows.
    pub rows: Vec<usize>,
    /// Free-position indices of the active columns.
    pub cols: Vec<usize>,
    /// Row-major over `rows x cols`.
    pub allowed: Vec<bool>,
    /// Residual budget after the forced pairs, comparison slack included.
    pub budget: T,
    /// Time cost of pinned keys plus forced pairs.
    pub base: T,
}

impl<'a, T: Real> Subproblem<'a, T> {
    pub(crate) fn root(inst: &'a Instance<T>) -> Self {
        let rows: Vec<usize> = (0..inst.len())
            .filter(|&i| inst.freqs[i] > T::zero())
            .collect();
        let cols: Vec<usize> = (0..inst.len()).collect();
        let allowed = vec![true; rows.len() * cols.len()];
        Self {
            inst,
            rows,
            cols,
            allowed,
            budget: inst.budget + inst.slack(),
            base: inst.fixed_cost,
        }
    }

    pub(crate) fn is_allowed(&self, r: usize, c: usize) -> bool {
        self.allowed[r * self.cols.len() + c]
    }

    pub(crate) fn pair_cost(&self, r: usize, c: usize, price: Price<T>) -> T {
        let (i, p) = (self.rows[r], self.cols[c]);
        let f = self.inst.freqs[i];
        match price {
            Price::Lambda(l) => f * (self.inst.times[p] + l * self.inst.errors[p]),
            Price::WeightOnly => f * self.inst.errors[p],
        }
    }

    pub(crate) fn eval(&self, lap: &mut Lap<T>, price: Price<T>) -> Option<Eval<T>> {
        let width = self.cols.len();
        let column_value: Vec<T> = self
            .cols
            .iter()
            .map(|&p| match price {
                Price::Lambda(l) => self.inst.times[p] + l * self.inst.errors[p],
                Price::WeightOnly => self.inst.errors[p],
            })
            .collect();
        let freqs: Vec<T> = self.rows.iter().map(|&i| self.inst.freqs[i]).collect();
        let allowed = &self.allowed;
        lap.solve(self.rows.len(), width, |r, c| {
            if allowed[r * width + c] {
                freqs[r] * column_value[c]
            } else {
                T::infinity()
            }
        })?;
        let cols = lap.assignment().to_vec();
        let (mut cost, mut weight) = (T::zero(), T::zero());
        for (r, &c) in cols.iter().enumerate() {
            let (f, p) = (freqs[r], self.cols[c]);
            cost = cost + f * self.inst.times[p];
            weight = weight + f * self.inst.errors[p];
        }
        Some(Eval { cols, cost, weight })
    }
}

/// Result of maximizing the dual of one subproblem.
#[derive(Debug, Clone)]
pub(crate) enum DualOutcome<T> {
    /// No matching respects the forbidden pairs and the budget.
    Infeasible,
    /// The time-minimal matching already fits the budget.
    Solved {
        eval: Eval<T>,
    },
    Open(OpenNode<T>),
}

#[derive(Debug, Clone)]
pub(crate) struct OpenNode<T> {
    /// Best dual value found, count units, base included.
    pub bound: T,
    /// Budget-violating matching optimal at `lambda`.
    pub violating: Eval<T>,
    /// Cheapest budget-respecting matching seen during the search.
    pub feasible: Eval<T>,
    /// Reduced costs at `lambda`, row-major over the active pairs.
    pub reduced: Vec<T>,
}

const MAX_BREAKPOINT_STEPS: usize = 200;

/// Maximizes the dual over `λ >= 0` by repeatedly intersecting the lines of
/// the best budget-violating and budget-respecting matchings found so far.
/// Every intersection either proves optimality or uncovers a new
/// breakpoint of the dual, so the search is exact and finite.
pub(crate) fn maximize_dual<T: Real>(sub: &Subproblem<'_, T>, lap: &mut Lap<T>) -> DualOutcome<T> {
    let fits = |e: &Eval<T>| e.weight <= sub.budget;

    let Some(at_zero) = sub.eval(lap, Price::Lambda(T::zero())) else {
        return DualOutcome::Infeasible;
    };
    if fits(&at_zero) {
        return DualOutcome::Solved { eval: at_zero };
    }
    let Some(lightest) = sub.eval(lap, Price::WeightOnly) else {
        return DualOutcome::Infeasible;
    };
    if !fits(&lightest) {
        return DualOutcome::Infeasible;
    }

    let mut lo = at_zero;
    let mut hi = lightest;
    let mut best_bound = lo.cost;
    let mut best_lambda = T::zero();
    let mut best_feasible = hi.clone();

    for _ in 0..MAX_BREAKPOINT_STEPS {
        let g_lo = lo.weight - sub.budget;
        let g_hi = hi.weight - sub.budget;
        let denom = g_lo - g_hi;
        if !(denom > T::zero()) {
            break;
        }
        let lambda = ((hi.cost - lo.cost) / denom).max(T::zero());
        let Some(e) = sub.eval(lap, Price::Lambda(lambda)) else {
            return DualOutcome::Infeasible;
        };
        let value = e.lagrangian(lambda, sub.budget);
        if value > best_bound {
            best_bound = value;
            best_lambda = lambda;
        }
        if fits(&e) && e.cost < best_feasible.cost {
            best_feasible = e.clone();
        }
        let predicted = lo.lagrangian(lambda, sub.budget);
        let tol = lit::<T>(1e-12) * predicted.abs().max(T::one());
        if value >= predicted - tol {
            best_bound = best_bound.max(value);
            break;
        }
        if e.weight - sub.budget > T::zero() {
            lo = e;
        } else {
            hi = e;
        }
    }

    // re-solve at the best multiplier to obtain its potentials
    let lambda = best_lambda;
    let relaxed = sub
        .eval(lap, Price::Lambda(lambda))
        .expect("matching existed at this multiplier");
    let width = sub.cols.len();
    let mut reduced = Vec::with_capacity(sub.rows.len() * width);
    for r in 0..sub.rows.len() {
        for c in 0..width {
            reduced.push(if sub.is_allowed(r, c) {
                lap.reduced_cost(r, c, sub.pair_cost(r, c, Price::Lambda(lambda)))
            } else {
                T::infinity()
            });
        }
    }
    let violating = if fits(&relaxed) { lo } else { relaxed };
    DualOutcome::Open(OpenNode {
        bound: best_bound + sub.base,
        violating,
        feasible: best_feasible,
        reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_optimum(inst: &Instance<f64>) -> Option<f64> {
        let m = inst.len();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut best: Option<f64> = None;
        loop {
            if inst.is_feasible(&perm) {
                let c = inst.metrics(&perm).time_cost;
                best = Some(best.map_or(c, |b: f64| b.min(c)));
            }
            // next lexicographic permutation
            let Some(i) = (1..m).rev().find(|&i| perm[i - 1] < perm[i]) else {
                break;
            };
            let j = (i..m).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
        best
    }

    fn four_key() -> Instance<f64> {
        Instance::from_parts(
            vec![40.0, 30.0, 20.0, 10.0],
            vec![2.0, 3.0, 3.0, 4.0],
            vec![0.6, 0.1, 0.5, 0.05],
            0.3,
        )
        .unwrap()
    }

    #[test]
    fn zero_multiplier_is_unconstrained_optimum() {
        let inst = four_key();
        let e = lagrangian_bound(&inst, 0.0).unwrap();
        let sorted = inst.time_minimal();
        assert!((e.dual - inst.metrics(&sorted).time_cost).abs() < 1e-12);
    }

    #[test]
    fn large_multiplier_minimizes_weight() {
        let inst = four_key();
        let e = lagrangian_bound(&inst, 1e9).unwrap();
        let lightest = inst.free_weight(&inst.weight_minimal());
        assert!((e.weight - lightest).abs() < 1e-9);
        let tight = Instance::from_parts(
            vec![40.0, 30.0, 20.0, 10.0],
            vec![2.0, 3.0, 3.0, 4.0],
            vec![0.6, 0.1, 0.5, 0.05],
            0.05,
        )
        .unwrap();
        assert!(!tight.fits(lagrangian_bound(&tight, 1e9).unwrap().weight));
    }

    #[test]
    fn dual_never_exceeds_optimum() {
        let inst = four_key();
        let opt = brute_optimum(&inst).unwrap();
        let mut best = f64::NEG_INFINITY;
        for step in 0..=400 {
            let lambda = step as f64 * 0.05;
            let d = lagrangian_bound(&inst, lambda).unwrap().dual;
            assert!(d <= opt + 1e-12, "λ = {lambda}: {d} > {opt}");
            best = best.max(d);
        }
        let sub = Subproblem::root(&inst);
        let mut lap = Lap::new();
        match maximize_dual(&sub, &mut lap) {
            DualOutcome::Open(node) => {
                let exact = node.bound / inst.n();
                assert!(
                    exact >= best - 1e-12,
                    "breakpoint search {exact} below grid {best}"
                );
                assert!(exact <= opt + 1e-12);
            }
            other => panic!("expected an open node, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_multiplier() {
        assert!(lagrangian_bound(&four_key(), -1.0).is_err());
    }

    #[test]
    fn zero_frequency_keys_fill_remaining_positions() {
        let inst =
            Instance::from_parts(vec![0.0, 5.0, 0.0], vec![1.0, 2.0, 3.0], vec![0.0; 3], 1.0)
                .unwrap();
        let e = lagrangian_bound(&inst, 0.0).unwrap();
        assert_eq!(e.slots, vec![1, 0, 2]);
    }
}
