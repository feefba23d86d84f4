//! Budget-constrained placement of keys on the free grid positions.
//!
//! After the pinned keys are placed, the problem is to assign each free key
//! `i` (frequency `f_i`) to a free position `p` (scan time `t_p`, error
//! probability `p_p`) minimizing `Σ f_i t_p` subject to
//! `Σ f_i p_p <= budget`, where the budget is `n * epsilon` minus the error
//! mass of the pinned keys. Everything is kept in count units; costs are
//! divided by `n` only when reported.

mod brute;
mod exact;
mod hill;
mod hungarian;
mod lagrangian;
mod sweep;

use std::time::Duration;

use thiserror::Error;

use crate::corpus::{CharacterFrequencies, KeyIndex};
use crate::error_model::ErrorTable;
use crate::layout::{
    apply_fixed, step_time, Assignment, CursorConfig, FixedAssignment, KeyboardSpec, LayoutError,
    LayoutMetrics, Position,
};
use crate::scalar::{count, lit, Real};

pub use brute::{solve_brute, MAX_BRUTE_KEYS};
pub use exact::{solve_exact, ExactOptions, TraceRow};
pub use hill::{solve_hill_climb, HillOptions};
pub use hungarian::hungarian;
pub use lagrangian::{lagrangian_bound, LagrangianEval};
pub use sweep::{sweep_durations, Problem, SweepEntry, SweepReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("cost matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("cost matrix entry ({0}, {1}) is not finite")]
    NonFiniteEntry(usize, usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("brute force handles at most {max} free keys, instance has {got}")]
    InstanceTooLarge { got: usize, max: usize },
    #[error("no feasible starting assignment exists")]
    NoFeasibleStart,
    #[error("no cursor duration admits a feasible layout")]
    AllInfeasible,
    #[error("duration list is empty or contains a non-positive value")]
    BadDurations,
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Model(#[from] crate::error_model::ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Feasible => "Feasible",
            SolveStatus::Infeasible => "Infeasible",
        }
    }
}

/// The reduced problem over free keys and free positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    keys: Vec<KeyIndex>,
    freqs: Vec<T>,
    positions: Vec<Position>,
    times: Vec<T>,
    errors: Vec<T>,
    fixed: Vec<FixedAssignment>,
    budget: T,
    fixed_cost: T,
    fixed_weight: T,
    n: T,
    epsilon: T,
}

impl<T: Real> Instance<T> {
    /// Assembles the reduced problem for `spec` at error budget `epsilon`.
    pub fn build(
        spec: &KeyboardSpec,
        freqs: &CharacterFrequencies,
        cfg: &CursorConfig<T>,
        table: &ErrorTable<T>,
        epsilon: T,
    ) -> Result<Self, SolverError> {
        if freqs.len() != spec.size() {
            return Err(LayoutError::MismatchedInventory(format!(
                "{} frequencies for {} keys",
                freqs.len(),
                spec.size()
            ))
            .into());
        }
        if !table.matches(spec) {
            return Err(LayoutError::MismatchedInventory(
                "error table does not match the grid".into(),
            )
            .into());
        }
        let part = apply_fixed(spec)?;
        let d = cfg.duration();
        let (mut fixed_cost, mut fixed_weight) = (T::zero(), T::zero());
        for f in &part.fixed {
            let fi = count::<T>(freqs.get(f.key));
            fixed_cost = fixed_cost + fi * step_time(f.pos, d);
            fixed_weight = fixed_weight + fi * table.get(f.pos);
        }
        Self::assemble(
            part.free_keys.clone(),
            part.free_keys
                .iter()
                .map(|k| count::<T>(freqs.get(*k)))
                .collect(),
            part.free_positions.clone(),
            part.free_positions
                .iter()
                .map(|p| step_time(*p, d))
                .collect(),
            part.free_positions.iter().map(|p| table.get(*p)).collect(),
            part.fixed,
            fixed_cost,
            fixed_weight,
            count::<T>(freqs.n()),
            epsilon,
        )
    }

    /// Builds an instance without pinned keys directly from per-key
    /// frequencies and per-position times and error probabilities. Keys are
    /// numbered from 1 and position `i` is reported as `(1, i + 1)`.
    pub fn from_parts(
        freqs: Vec<T>,
        times: Vec<T>,
        errors: Vec<T>,
        epsilon: T,
    ) -> Result<Self, SolverError> {
        let n = freqs.iter().copied().sum::<T>();
        let keys = (1..=freqs.len()).map(KeyIndex).collect();
        let positions = (1..=times.len()).map(|c| Position::new(1, c)).collect();
        Self::assemble(
            keys,
            freqs,
            positions,
            times,
            errors,
            Vec::new(),
            T::zero(),
            T::zero(),
            n,
            epsilon,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        keys: Vec<KeyIndex>,
        freqs: Vec<T>,
        positions: Vec<Position>,
        times: Vec<T>,
        errors: Vec<T>,
        fixed: Vec<FixedAssignment>,
        fixed_cost: T,
        fixed_weight: T,
        n: T,
        epsilon: T,
    ) -> Result<Self, SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidInstance(m.to_string()));
        if keys.len() != positions.len()
            || freqs.len() != keys.len()
            || times.len() != positions.len()
            || errors.len() != positions.len()
        {
            return bad("free keys and free positions differ in number");
        }
        if freqs.iter().any(|f| !(*f >= T::zero()) || !f.is_finite()) {
            return bad("frequencies must be non-negative");
        }
        if times.iter().chain(&errors).any(|v| !v.is_finite()) {
            return bad("times and error probabilities must be finite");
        }
        if !(n > T::zero()) {
            return bad("corpus size must be positive");
        }
        if !(epsilon >= T::zero() && epsilon <= T::one()) {
            return bad("epsilon must lie in [0, 1]");
        }
        let budget = n * epsilon - fixed_weight;
        Ok(Self {
            keys,
            freqs,
            positions,
            times,
            errors,
            fixed,
            budget,
            fixed_cost,
            fixed_weight,
            n,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn errors(&self) -> &[T] {
        &self.errors
    }

    pub fn keys(&self) -> &[KeyIndex] {
        &self.keys
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// Residual error budget in count units.
    pub fn budget(&self) -> T {
        self.budget
    }

    pub fn fixed_cost(&self) -> T {
        self.fixed_cost
    }

    pub fn n(&self) -> T {
        self.n
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Slack on the budget comparison, in count units.
    pub(crate) fn slack(&self) -> T {
        self.n * lit::<T>(1e-10).max(T::epsilon() * lit(64.0))
    }

    pub(crate) fn fits(&self, weight: T) -> bool {
        weight <= self.budget + self.slack()
    }

    /// `Σ f_i t_slot(i)` over the free keys. `slots[i]` is the free
    /// position index of free key `i`.
    pub fn free_cost(&self, slots: &[usize]) -> T {
        slots
            .iter()
            .enumerate()
            .map(|(i, &s)| self.freqs[i] * self.times[s])
            .sum()
    }

    pub fn free_weight(&self, slots: &[usize]) -> T {
        slots
            .iter()
            .enumerate()
            .map(|(i, &s)| self.freqs[i] * self.errors[s])
            .sum()
    }

    pub fn is_feasible(&self, slots: &[usize]) -> bool {
        self.fits(self.free_weight(slots))
    }

    pub fn metrics(&self, slots: &[usize]) -> LayoutMetrics<T> {
        LayoutMetrics {
            time_cost: (self.fixed_cost + self.free_cost(slots)) / self.n,
            error_cost: ((self.fixed_weight + self.free_weight(slots)) / self.n).max(T::zero()),
        }
    }

    /// Free-key slots of the assignment with minimal error mass: keys by
    /// decreasing frequency onto positions by increasing error probability.
    pub fn weight_minimal(&self) -> Vec<usize> {
        sorted_pairing(&self.freqs, &self.errors, &self.times)
    }

    /// Free-key slots minimizing time alone: keys by decreasing frequency
    /// onto positions by increasing scan time.
    pub fn time_minimal(&self) -> Vec<usize> {
        sorted_pairing(&self.freqs, &self.times, &self.errors)
    }

    /// Full key-to-position map for `slots`, pinned keys included.
    pub fn placement(&self, slots: &[usize]) -> Vec<(KeyIndex, Position)> {
        let mut out: Vec<(KeyIndex, Position)> =
            self.fixed.iter().map(|f| (f.key, f.pos)).collect();
        out.extend(
            slots
                .iter()
                .enumerate()
                .map(|(i, &s)| (self.keys[i], self.positions[s])),
        );
        out.sort();
        out
    }

    /// Converts `slots` into a validated [`Assignment`] for `spec`.
    pub fn assignment(
        &self,
        slots: &[usize],
        spec: &KeyboardSpec,
    ) -> Result<Assignment, LayoutError> {
        let placed = self.placement(slots);
        if placed.len() != spec.size() {
            return Err(LayoutError::MismatchedInventory(
                "instance does not cover the spec".into(),
            ));
        }
        Assignment::new(spec, placed.into_iter().map(|(_, p)| p).collect())
    }
}

/// Keys by decreasing `freq` onto positions by increasing `primary`, then
/// `secondary`, then index.
fn sorted_pairing<T: Real>(freqs: &[T], primary: &[T], secondary: &[T]) -> Vec<usize> {
    let mut keys: Vec<usize> = (0..freqs.len()).collect();
    keys.sort_by(|&a, &b| freqs[b].partial_cmp(&freqs[a]).unwrap().then(a.cmp(&b)));
    let mut pos: Vec<usize> = (0..primary.len()).collect();
    pos.sort_by(|&a, &b| {
        primary[a]
            .partial_cmp(&primary[b])
            .unwrap()
            .then(secondary[a].partial_cmp(&secondary[b]).unwrap())
            .then(a.cmp(&b))
    });
    let mut slots = vec![0; freqs.len()];
    for (k, p) in keys.into_iter().zip(pos) {
        slots[k] = p;
    }
    slots
}

/// A feasible placement with its costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    /// `slots[i]` is the free-position index of free key `i`.
    pub slots: Vec<usize>,
    pub metrics: LayoutMetrics<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<T> {
    pub status: SolveStatus,
    pub solution: Option<Solution<T>>,
    /// Lower bound on the optimal time cost, seconds per character.
    pub lower_bound: T,
    pub node_count: u64,
    pub wall_time: Duration,
    pub trace: Vec<TraceRow>,
}

impl<T: Real> OptResult<T> {
    pub(crate) fn infeasible(lower_bound: T, node_count: u64, wall_time: Duration) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            solution: None,
            lower_bound,
            node_count,
            wall_time,
            trace: Vec::new(),
        }
    }

    pub fn time_cost(&self) -> Option<T> {
        self.solution.as_ref().map(|s| s.metrics.time_cost)
    }

    pub fn error_cost(&self) -> Option<T> {
        self.solution.as_ref().map(|s| s.metrics.error_cost)
    }

    pub fn is_feasible(&self) -> bool {
        self.solution.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_corpus, UnknownPolicy};

    #[test]
    fn build_accounts_for_pinned_keys() {
        let spec = KeyboardSpec::default_8x8();
        let text = "hello world 0123456789";
        let freqs = load_corpus(text, spec.inventory(), UnknownPolicy::Skip).unwrap();
        let cfg = CursorConfig::new(0.35).unwrap();
        let table = ErrorTable::from_stage_errors(0.35, &[0.1; 8], &[0.2; 8]).unwrap();
        let inst = Instance::build(&spec, &freqs, &cfg, &table, 0.5).unwrap();
        assert_eq!(inst.len(), 54);
        // ten digits, one each, at rows 7-8
        let expected_fixed: f64 = [(7, 7), (7, 8)]
            .iter()
            .chain(&[
                (8, 1),
                (8, 2),
                (8, 3),
                (8, 4),
                (8, 5),
                (8, 6),
                (8, 7),
                (8, 8),
            ])
            .map(|&(r, c)| 0.35 * (r + c) as f64)
            .sum();
        assert!((inst.fixed_cost() - expected_fixed).abs() < 1e-12);
        let pe = 1.0 - 0.9 * 0.8;
        assert!((inst.budget() - (freqs.n() as f64 * 0.5 - 10.0 * pe)).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_parts() {
        assert!(Instance::from_parts(vec![1.0, 2.0], vec![1.0], vec![0.1], 0.5).is_err());
        assert!(Instance::from_parts(vec![-1.0], vec![1.0], vec![0.1], 0.5).is_err());
        assert!(Instance::from_parts(vec![1.0], vec![1.0], vec![0.1], 1.5).is_err());
        assert!(Instance::from_parts(vec![0.0], vec![1.0], vec![0.1], 0.5).is_err());
    }

    #[test]
    fn sorted_pairings() {
        let inst = Instance::from_parts(
            vec![1.0, 5.0, 3.0],
            vec![3.0, 1.0, 2.0],
            vec![0.0, 0.9, 0.5],
            1.0,
        )
        .unwrap();
        assert_eq!(inst.time_minimal(), vec![0, 1, 2]);
        assert_eq!(inst.weight_minimal(), vec![1, 0, 2]);
    }
}
