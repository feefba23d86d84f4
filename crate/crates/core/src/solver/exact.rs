//! Best-first branch and bound over Lagrangian assignment bounds.
//!
//! Each node fixes some key-position pairs and forbids others. Its bound is
//! the maximized Lagrangian dual of the remaining assignment problem.
//! Positions with identical scan time and error probability form a class;
//! branching forces a key into a class (at its lowest free member) or
//! forbids the whole class, which keeps interchangeable positions from
//! multiplying the tree.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;
use std::time::Instant;

use crate::scalar::{lit, Real};

use super::hill::descend;
use super::hungarian::Lap;
use super::lagrangian::{fill_zero_keys, maximize_dual, DualOutcome, Eval, Subproblem};
use super::{Instance, OptResult, Solution, SolveStatus};

#[derive(Debug, Clone, Copy)]
pub struct ExactOptions<T> {
    /// Relative optimality gap, measured on seconds per character.
    pub tol: T,
    pub max_nodes: u64,
    /// Record one [`TraceRow`] per evaluated node.
    pub trace: bool,
}

impl<T: Real> Default for ExactOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-9),
            max_nodes: 1_000_000,
            trace: false,
        }
    }
}

/// Per-node search record; bound and incumbent in seconds per character.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub node: u64,
    pub bound: f64,
    pub incumbent: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy)]
enum Constraint {
    Force { key: usize, pos: usize },
    Forbid { key: usize, class: usize },
}

#[derive(Debug)]
struct Link {
    constraint: Constraint,
    parent: Option<Rc<Link>>,
}

fn push(chain: &Option<Rc<Link>>, constraint: Constraint) -> Option<Rc<Link>> {
    Some(Rc::new(Link {
        constraint,
        parent: chain.clone(),
    }))
}

#[derive(Debug)]
struct Node<T> {
    bound: T,
    id: u64,
    depth: usize,
    chain: Option<Rc<Link>>,
    branch_key: usize,
    branch_class: usize,
}

impl<T: Real> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Node<T> {}

impl<T: Real> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Node<T> {
    // reversed: the heap pops the lowest bound, then the oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.id.cmp(&self.id))
    }
}

/// Groups positions whose time and error probability coincide exactly.
fn position_classes<T: Real>(inst: &Instance<T>) -> Vec<usize> {
    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    (0..inst.len())
        .map(|p| {
            let key = (
                inst.times[p].to_f64().unwrap().to_bits(),
                inst.errors[p].to_f64().unwrap().to_bits(),
            );
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect()
}

struct Search<'a, T> {
    inst: &'a Instance<T>,
    classes: Vec<usize>,
    options: ExactOptions<T>,
    lap: Lap<T>,
    incumbent: Option<(T, Vec<usize>)>,
    /// Lowest bound of any region discarded within the tolerance.
    floor: T,
    nodes: u64,
    trace: Vec<TraceRow>,
}

enum Evaluated<T> {
    Closed,
    Open(Node<T>),
}

impl<'a, T: Real> Search<'a, T> {
    /// Absolute gap in count units for an objective value in count units.
    fn gap(&self, objective: T) -> T {
        self.options.tol * objective.abs().max(self.inst.n)
    }

    fn incumbent_value(&self) -> T {
        self.incumbent.as_ref().map_or(T::infinity(), |(v, _)| *v)
    }

    fn prunes(&self, bound: T) -> bool {
        let inc = self.incumbent_value();
        inc.is_finite() && bound >= inc - self.gap(inc)
    }

    fn offer(&mut self, mut slots: Vec<usize>) {
        if !self.inst.is_feasible(&slots) {
            return;
        }
        let value = self.inst.fixed_cost + self.inst.free_cost(&slots);
        if value < self.incumbent_value() {
            descend(self.inst, &mut slots);
            let value = self.inst.fixed_cost + self.inst.free_cost(&slots);
            self.incumbent = Some((value, slots));
        }
    }

    fn subproblem(&self, chain: &Option<Rc<Link>>) -> Option<Subproblem<'a, T>> {
        let inst = self.inst;
        let mut forced: Vec<(usize, usize)> = Vec::new();
        let mut forbids: Vec<(usize, usize)> = Vec::new();
        let mut link = chain.as_ref();
        while let Some(l) = link {
            match l.constraint {
                Constraint::Force { key, pos } => forced.push((key, pos)),
                Constraint::Forbid { key, class } => forbids.push((key, class)),
            }
            link = l.parent.as_ref();
        }
        let mut key_done = vec![false; inst.len()];
        let mut pos_done = vec![false; inst.len()];
        let mut budget = inst.budget + inst.slack();
        let mut base = inst.fixed_cost;
        for &(k, p) in &forced {
            if std::mem::replace(&mut key_done[k], true)
                || std::mem::replace(&mut pos_done[p], true)
            {
                return None;
            }
            budget = budget - inst.freqs[k] * inst.errors[p];
            base = base + inst.freqs[k] * inst.times[p];
        }
        let rows: Vec<usize> = (0..inst.len())
            .filter(|&k| !key_done[k] && inst.freqs[k] > T::zero())
            .collect();
        let cols: Vec<usize> = (0..inst.len()).filter(|&p| !pos_done[p]).collect();
        let mut row_of = vec![usize::MAX; inst.len()];
        for (r, &k) in rows.iter().enumerate() {
            row_of[k] = r;
        }
        let width = cols.len();
        let mut allowed = vec![true; rows.len() * width];
        for &(k, class) in &forbids {
            let r = row_of[k];
            if r == usize::MAX {
                continue;
            }
            for (c, &p) in cols.iter().enumerate() {
                if self.classes[p] == class {
                    allowed[r * width + c] = false;
                }
            }
        }
        let mut sub = Subproblem::root(inst);
        sub.rows = rows;
        sub.cols = cols;
        sub.allowed = allowed;
        sub.budget = budget;
        sub.base = base;
        Some(sub)
    }

    /// Full free-key slots from the forced pairs plus a subproblem matching.
    fn complete(
        &self,
        sub: &Subproblem<'_, T>,
        chain: &Option<Rc<Link>>,
        eval: &Eval<T>,
    ) -> Vec<usize> {
        let mut slots = vec![usize::MAX; self.inst.len()];
        let mut link = chain.as_ref();
        while let Some(l) = link {
            if let Constraint::Force { key, pos } = l.constraint {
                slots[key] = pos;
            }
            link = l.parent.as_ref();
        }
        for (r, &c) in eval.cols.iter().enumerate() {
            slots[sub.rows[r]] = sub.cols[c];
        }
        fill_zero_keys(self.inst, &mut slots);
        slots
    }

    fn record(&mut self, id: u64, bound: T, depth: usize) {
        if self.options.trace {
            let n = self.inst.n;
            self.trace.push(TraceRow {
                node: id,
                bound: (bound / n).to_f64().unwrap_or(f64::NAN),
                incumbent: (self.incumbent_value() / n).to_f64().unwrap_or(f64::NAN),
                depth,
            });
        }
    }

    fn evaluate(&mut self, chain: Option<Rc<Link>>, depth: usize) -> Evaluated<T> {
        self.nodes += 1;
        let id = self.nodes;
        let Some(sub) = self.subproblem(&chain) else {
            self.record(id, T::infinity(), depth);
            return Evaluated::Closed;
        };
        let mut lap = std::mem::take(&mut self.lap);
        let outcome = maximize_dual(&sub, &mut lap);
        self.lap = lap;
        let open = match outcome {
            DualOutcome::Infeasible => {
                self.record(id, T::infinity(), depth);
                return Evaluated::Closed;
            }
            DualOutcome::Solved { eval } => {
                let slots = self.complete(&sub, &chain, &eval);
                self.offer(slots);
                self.record(id, eval.cost + sub.base, depth);
                return Evaluated::Closed;
            }
            DualOutcome::Open(open) => open,
        };
        let slots = self.complete(&sub, &chain, &open.feasible);
        self.offer(slots);
        self.record(id, open.bound, depth);

        let feasible_value = open.feasible.cost + sub.base;
        if self.prunes(open.bound) || feasible_value - open.bound <= self.gap(feasible_value) {
            // closed within tolerance; the region may still hold values down to the bound
            self.floor = self.floor.min(open.bound);
            return Evaluated::Closed;
        }

        // forbid key-class pairs whose cheapest completion cannot beat the incumbent
        let mut chain = chain;
        let inc = self.incumbent_value();
        if inc.is_finite() {
            let threshold = inc - self.gap(inc) - open.bound;
            let width = sub.cols.len();
            for r in 0..sub.rows.len() {
                let mut by_class: Vec<(usize, T, bool)> = Vec::new();
                for c in 0..width {
                    let class = self.classes[sub.cols[c]];
                    let rc = open.reduced[r * width + c];
                    match by_class.iter_mut().find(|(k, _, _)| *k == class) {
                        Some(entry) => {
                            entry.1 = entry.1.min(rc);
                            entry.2 |= rc.is_finite();
                        }
                        None => by_class.push((class, rc, rc.is_finite())),
                    }
                }
                for (class, min_rc, any_allowed) in by_class {
                    if any_allowed && min_rc >= threshold {
                        self.floor = self.floor.min(open.bound + min_rc);
                        chain = push(
                            &chain,
                            Constraint::Forbid {
                                key: sub.rows[r],
                                class,
                            },
                        );
                    }
                }
            }
        }

        // branch on the heaviest error contribution of the violating
        // matching, preferring pairs the feasible matching does not share
        let mut pick: Option<(bool, T, usize)> = None;
        for (r, &c) in open.violating.cols.iter().enumerate() {
            let p = sub.cols[c];
            let differs = self.classes[sub.cols[open.feasible.cols[r]]] != self.classes[p];
            let score = self.inst.freqs[sub.rows[r]] * self.inst.errors[p];
            let better = match pick {
                None => true,
                Some((d, s, _)) => (differs, score) > (d, s) && !(differs == d && score == s),
            };
            if better {
                pick = Some((differs, score, r));
            }
        }
        let (_, _, r) = pick.expect("open node has active rows");
        let c = open.violating.cols[r];
        Evaluated::Open(Node {
            bound: open.bound,
            id,
            depth,
            chain,
            branch_key: sub.rows[r],
            branch_class: self.classes[sub.cols[c]],
        })
    }

    fn children(&mut self, node: &Node<T>) -> Vec<Evaluated<T>> {
        let mut out = Vec::with_capacity(2);
        // lowest free member of the class that the key may still use
        if let Some(sub) = self.subproblem(&node.chain) {
            let r = sub.rows.iter().position(|&k| k == node.branch_key);
            let target = r.and_then(|r| {
                sub.cols
                    .iter()
                    .enumerate()
                    .find(|(c, &p)| self.classes[p] == node.branch_class && sub.is_allowed(r, *c))
                    .map(|(_, &p)| p)
            });
            if let Some(pos) = target {
                let chain = push(
                    &node.chain,
                    Constraint::Force {
                        key: node.branch_key,
                        pos,
                    },
                );
                out.push(self.evaluate(chain, node.depth + 1));
            }
        }
        let chain = push(
            &node.chain,
            Constraint::Forbid {
                key: node.branch_key,
                class: node.branch_class,
            },
        );
        out.push(self.evaluate(chain, node.depth + 1));
        out
    }
}

/// Minimizes the time cost subject to the error budget.
///
/// Returns `Optimal` with a certified lower bound, `Infeasible` when even
/// the error-minimal placement exceeds the budget, or `Feasible` with the
/// best incumbent when the node limit is reached.
pub fn solve_exact<T: Real>(inst: &Instance<T>, options: &ExactOptions<T>) -> OptResult<T> {
    let started = Instant::now();
    if !inst.is_feasible(&inst.weight_minimal()) {
        return OptResult::infeasible(T::infinity(), 0, started.elapsed());
    }
    let mut search = Search {
        inst,
        classes: position_classes(inst),
        options: *options,
        lap: Lap::new(),
        incumbent: None,
        floor: T::infinity(),
        nodes: 0,
        trace: Vec::new(),
    };
    search.offer(inst.weight_minimal());

    let mut heap = BinaryHeap::new();
    if let Evaluated::Open(root) = search.evaluate(None, 0) {
        heap.push(root);
    }
    let mut status = SolveStatus::Optimal;
    while let Some(node) = heap.pop() {
        if search.prunes(node.bound) {
            search.floor = search.floor.min(node.bound);
            heap.clear();
            break;
        }
        if search.nodes >= options.max_nodes {
            status = SolveStatus::Feasible;
            search.floor = search.floor.min(node.bound);
            break;
        }
        for child in search.children(&node) {
            if let Evaluated::Open(c) = child {
                heap.push(c);
            }
        }
    }
    let open_floor = heap
        .iter()
        .map(|n| n.bound)
        .fold(T::infinity(), |a, b| a.min(b));
    let (value, slots) = search
        .incumbent
        .take()
        .expect("weight-minimal placement is feasible");
    let lower = value.min(search.floor).min(open_floor);
    let metrics = inst.metrics(&slots);
    OptResult {
        status,
        solution: Some(Solution { slots, metrics }),
        lower_bound: lower / inst.n,
        node_count: search.nodes,
        wall_time: started.elapsed(),
        trace: search.trace,
    }
}
