//! Primal network simplex specialised to the complete bipartite
//! transportation graph.
//!
//! The spanning-tree bookkeeping (parent / thread / reverse thread /
//! successor counts / last successor) follows the LEMON implementation,
//! with block-search pivoting. Strongly feasible trees are maintained by
//! the `<=` tie rule on the second half of the pivot cycle, which rules
//! out cycling under exact arithmetic.
//!
//! Arcs `0..n*m` are the transport arcs `i -> n + j`; arcs `n*m..` are the
//! artificial arcs that connect every node to the extra root node in the
//! initial basis. Artificial arcs never re-enter.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use crate::{Error, Result};

const NONE: usize = usize::MAX;

const STATE_LOWER: i8 = 1;
const STATE_TREE: i8 = 0;

const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;

/// Flow values carried by the solver.
///
/// `i64` gives exact vertex solutions for rational marginals with a common
/// denominator; `f64` handles arbitrary weights.
pub trait Flow: Copy + PartialOrd + Debug + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;
    const INF: Self;
    fn to_f64(self) -> f64;
}

impl Flow for i64 {
    const ZERO: Self = 0;
    const INF: Self = i64::MAX;
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Flow for f64 {
    const ZERO: Self = 0.0;
    const INF: Self = f64::INFINITY;
    fn to_f64(self) -> f64 {
        self
    }
}

/// Outcome of a solve: nonzero transport flows and solver diagnostics.
#[derive(Debug, Clone)]
pub struct Solution<F> {
    /// `(i, j, flow)` for every transport arc with positive flow, ordered by `(i, j)`.
    pub flows: Vec<(usize, usize, F)>,
    pub pivots: usize,
}

pub struct NetworkSimplex<'a, F: Flow> {
    n: usize,
    m: usize,
    costs: &'a [f64],
    arc_num: usize,
    root: usize,

    art_source: Vec<usize>,
    art_target: Vec<usize>,
    art_cost: f64,

    flow: Vec<F>,
    state: Vec<i8>,
    pi: Vec<f64>,

    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,

    block_size: usize,
    next_arc: usize,
    tolerance: f64,
    max_pivots: usize,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: F,
}

impl<'a, F: Flow> NetworkSimplex<'a, F> {
    /// `supply` has length `n` (sources), `demand` length `m` (sinks), and
    /// `costs` is the row-major `n x m` arc cost matrix. Supply and demand
    /// totals must agree.
    pub fn new(supply: &[F], demand: &[F], costs: &'a [f64]) -> Self {
        let n = supply.len();
        let m = demand.len();
        assert_eq!(costs.len(), n * m, "cost matrix shape");
        let node_num = n + m;
        let arc_num = n * m;
        let root = node_num;

        let max_cost = costs.iter().fold(0.0_f64, |acc, &c| acc.max(c.abs()));
        let art_cost = (max_cost + 1.0) * node_num as f64;

        let mut ns = Self {
            n,
            m,
            costs,
            arc_num,
            root,
            art_source: vec![0; node_num],
            art_target: vec![0; node_num],
            art_cost,
            flow: vec![F::ZERO; arc_num + node_num],
            state: vec![STATE_LOWER; arc_num + node_num],
            pi: vec![0.0; node_num + 1],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            tolerance: 1e-12 * max_cost.max(1.0),
            max_pivots: 50 * (arc_num + node_num) + 10_000,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: F::ZERO,
        };

        ns.parent[root] = NONE;
        ns.pred[root] = NONE;
        ns.thread[root] = 0;
        ns.rev_thread[0] = root;
        ns.succ_num[root] = node_num + 1;
        ns.last_succ[root] = root - 1;
        ns.pi[root] = 0.0;

        for u in 0..node_num {
            let e = arc_num + u;
            ns.parent[u] = root;
            ns.pred[u] = e;
            ns.thread[u] = u + 1;
            ns.rev_thread[u + 1] = u;
            ns.succ_num[u] = 1;
            ns.last_succ[u] = u;
            ns.state[e] = STATE_TREE;
            if u < n {
                ns.pred_dir[u] = DIR_UP;
                ns.pi[u] = 0.0;
                ns.art_source[u] = u;
                ns.art_target[u] = root;
                ns.flow[e] = supply[u];
            } else {
                ns.pred_dir[u] = DIR_DOWN;
                ns.pi[u] = art_cost;
                ns.art_source[u] = root;
                ns.art_target[u] = u;
                ns.flow[e] = demand[u - n];
            }
        }
        ns
    }

    #[inline]
    fn source(&self, e: usize) -> usize {
        if e < self.arc_num {
            e / self.m
        } else {
            self.art_source[e - self.arc_num]
        }
    }

    #[inline]
    fn target(&self, e: usize) -> usize {
        if e < self.arc_num {
            self.n + e % self.m
        } else {
            self.art_target[e - self.arc_num]
        }
    }

    #[inline]
    fn cost(&self, e: usize) -> f64 {
        if e < self.arc_num {
            self.costs[e]
        } else if self.art_source[e - self.arc_num] == self.root {
            self.art_cost
        } else {
            0.0
        }
    }

    /// Block search over transport arcs. Only `LOWER` arcs can enter since
    /// arcs are uncapacitated.
    fn find_entering_arc(&mut self) -> bool {
        let m = self.m;
        let n = self.n;
        let mut min = -self.tolerance;
        let mut best = NONE;
        let mut cnt = self.block_size;
        let total = self.arc_num;
        let mut e = self.next_arc;
        for _ in 0..total {
            if self.state[e] == STATE_LOWER {
                let i = e / m;
                let j = n + e % m;
                let c = self.costs[e] + self.pi[i] - self.pi[j];
                if c < min {
                    min = c;
                    best = e;
                }
            }
            e += 1;
            if e == total {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if best != NONE {
                    break;
                }
                cnt = self.block_size;
            }
        }
        if best == NONE {
            return false;
        }
        self.in_arc = best;
        self.next_arc = e;
        true
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let first = self.source(self.in_arc);
        let second = self.target(self.in_arc);
        let mut delta = F::INF;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_DOWN {
                F::INF
            } else {
                self.flow[e]
            };
            if d < delta {
                delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_UP {
                F::INF
            } else {
                self.flow[e]
            };
            if d <= delta {
                delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }

        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        self.delta = delta;
        result != 0
    }

    fn change_flow(&mut self) {
        let delta = self.delta;
        if delta > F::ZERO {
            let in_arc = self.in_arc;
            self.flow[in_arc] = self.flow[in_arc] + delta;
            let mut u = self.source(in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] = if self.pred_dir[u] == DIR_UP {
                    self.flow[e] - delta
                } else {
                    self.flow[e] + delta
                };
                u = self.parent[u];
            }
            let mut u = self.target(in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] = if self.pred_dir[u] == DIR_UP {
                    self.flow[e] + delta
                } else {
                    self.flow[e] - delta
                };
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        self.flow[out] = F::ZERO;
        self.state[out] = STATE_LOWER;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;

        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        let in_dir = if u_in == self.source(in_arc) {
            DIR_UP
        } else {
            DIR_DOWN
        };

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            // Re-hang the stem nodes between u_in and u_out.
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                // succ_num[p] > succ_num[u] on the old tree; the running
                // total stays nonnegative.
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in {
            join
        } else {
            NONE
        };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let c = self.cost(self.in_arc);
        let dir = f64::from(self.pred_dir[u_in]);
        let sigma = self.pi[self.v_in] - self.pi[u_in] - dir * c;
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Runs pivots to optimality.
    ///
    /// `feasibility_tol` bounds the flow left on artificial arcs.
    pub fn run(mut self, feasibility_tol: f64) -> Result<Solution<F>> {
        let mut pivots = 0usize;
        while self.find_entering_arc() {
            pivots += 1;
            if pivots > self.max_pivots {
                return Err(Error::NonConvergence {
                    iterations: pivots,
                    objective: self.objective(),
                });
            }
            self.find_join_node();
            if !self.find_leaving_arc() {
                return Err(Error::Internal(
                    "unbounded pivot cycle in transportation problem".into(),
                ));
            }
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
        }

        let residual: f64 = self.flow[self.arc_num..]
            .iter()
            .map(|f| f.to_f64().abs())
            .sum();
        if residual > feasibility_tol {
            return Err(Error::Infeasible { residual });
        }

        log::debug!(
            "network simplex: {}x{} solved in {pivots} pivots",
            self.n,
            self.m
        );

        let m = self.m;
        let flows = self.flow[..self.arc_num]
            .iter()
            .enumerate()
            .filter(|(_, f)| **f > F::ZERO)
            .map(|(e, f)| (e / m, e % m, *f))
            .collect();
        Ok(Solution { flows, pivots })
    }

    fn objective(&self) -> f64 {
        self.flow[..self.arc_num]
            .iter()
            .zip(self.costs)
            .map(|(f, c)| f.to_f64() * c)
            .sum()
    }
}
