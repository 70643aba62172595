//! Depth-first branch-and-bound over the network. Binary branching (assign
//! a value versus remove it), trail rollback between branches, and a
//! configurable propagation stack at every node: node consistency, hard
//! arc consistency on the tables, LP propagation of touched linear
//! constraints, and optionally full threshold-descent analysis.

use std::time::{Duration, Instant};

use crate::cost::Cost;
use crate::model::{Cfn, ConstraintRef};
use crate::vac::{direct_lin_propagate, make_schedule, vac_lin_with, VacStats};

/// How much propagation runs at each node (levels are cumulative).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum PropLevel {
    /// Node consistency and hard table revision only.
    NcOnly,
    /// Plus LP propagation of linear constraints touched since the parent.
    DirectLp,
    /// Plus one full threshold descent at the root.
    VacRoot,
    /// Plus a full threshold descent at every node, from scratch.
    VacEveryNode,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarHeuristic {
    MinDomain,
    DomWdeg,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ValHeuristic {
    MinValue,
    /// Minimum value surviving the last filtering pass, falling back to the
    /// cheapest unary cost when no pass ran.
    BoolSupport,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub prop: PropLevel,
    pub var_heuristic: VarHeuristic,
    pub val_heuristic: ValHeuristic,
    pub initial_ub: Option<Cost>,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    pub theta_start: Option<Cost>,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            prop: PropLevel::VacRoot,
            var_heuristic: VarHeuristic::DomWdeg,
            val_heuristic: ValHeuristic::BoolSupport,
            initial_ub: None,
            node_limit: None,
            time_limit: None,
            seed: 0,
            theta_start: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Optimal,
    Infeasible,
    LimitReached,
}

/// Root bound after each propagation stage that ran.
#[derive(Clone, Copy, Debug, Default)]
pub struct RootBounds {
    pub after_nc: Option<Cost>,
    pub after_lp: Option<Cost>,
    pub after_vac: Option<Cost>,
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub root_lower_bound: Cost,
    pub root_bounds: RootBounds,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: Status,
    pub best: Option<(Vec<usize>, Cost)>,
    pub lower_bound: Cost,
    pub stats: SearchStats,
    pub vac: VacStats,
}

/// Mutable per-solve heuristic state: conflict weights for dom/wdeg and the
/// surviving-value hints from the last filtering pass.
pub struct SearchState {
    pub weights: Vec<u64>,
    pub bool_support: Vec<Option<usize>>,
}

impl SearchState {
    pub fn fresh(p: &Cfn) -> SearchState {
        SearchState {
            weights: vec![1; p.num_vars()],
            bool_support: vec![None; p.num_vars()],
        }
    }
}

/// Picks the next branching decision, or None when every variable is
/// assigned. Variable choice minimizes domain size (optionally divided by
/// the conflict weight, compared by cross-multiplication so scaling all
/// weights changes nothing); ties break by index. Value choice is the
/// minimum domain value or the filtering-pass support.
pub fn select_decision(
    p: &Cfn,
    cfg: &SearchConfig,
    state: &SearchState,
) -> Option<(usize, usize)> {
    let mut best: Option<usize> = None;
    for var in 0..p.num_vars() {
        if p.domain_count(var) < 2 {
            continue;
        }
        best = Some(match best {
            None => var,
            Some(cur) => {
                let better = match cfg.var_heuristic {
                    VarHeuristic::MinDomain => p.domain_count(var) < p.domain_count(cur),
                    VarHeuristic::DomWdeg => {
                        let lhs = p.domain_count(var) as u128 * state.weights[cur] as u128;
                        let rhs = p.domain_count(cur) as u128 * state.weights[var] as u128;
                        lhs < rhs
                    }
                };
                if better {
                    var
                } else {
                    cur
                }
            }
        });
    }
    let var = best?;
    let val = match cfg.val_heuristic {
        ValHeuristic::MinValue => p.domain_values(var).next().unwrap(),
        ValHeuristic::BoolSupport => match state.bool_support[var] {
            Some(s) if p.present(var, s) => s,
            _ => p
                .domain_values(var)
                .min_by_key(|&v| (p.unary(var, v), v))
                .unwrap(),
        },
    };
    Some((var, val))
}

struct Limits {
    deadline: Option<Instant>,
    node_limit: Option<u64>,
}

struct Searcher<'a> {
    p: &'a mut Cfn,
    cfg: SearchConfig,
    state: SearchState,
    ub: Cost,
    best: Option<(Vec<usize>, Cost)>,
    nodes: u64,
    backtracks: u64,
    limits: Limits,
    limit_hit: bool,
}

impl<'a> Searcher<'a> {
    fn bound(&self) -> Cost {
        self.ub.min(self.p.top())
    }

    fn bump_weights(&mut self, c: ConstraintRef) {
        match c {
            ConstraintRef::Unary(v) => self.state.weights[v] += 1,
            ConstraintRef::Binary(t) => {
                let (a, b) = self.p.binary(t).vars();
                self.state.weights[a] += 1;
                self.state.weights[b] += 1;
            }
            ConstraintRef::Linear(l) => {
                let scope = self.p.linear(l).scope().to_vec();
                for v in scope {
                    self.state.weights[v] += 1;
                }
            }
        }
    }

    /// Node consistency with conflict attribution: reaching the bound while
    /// projecting a variable's minimum charges that variable's weight.
    fn node_consistency(&mut self) -> bool {
        let bound = self.bound();
        for var in 0..self.p.num_vars() {
            let min = self
                .p
                .domain_values(var)
                .map(|v| self.p.unary(var, v))
                .min()
                .expect("empty domain in search");
            if min > Cost::ZERO {
                let shift = min.min(self.p.top());
                if shift >= self.p.top() {
                    self.p.set_infeasible();
                } else {
                    self.p.unary_project(var, shift);
                }
                if self.p.lower_bound() >= bound {
                    self.bump_weights(ConstraintRef::Unary(var));
                    return false;
                }
            }
        }
        for var in 0..self.p.num_vars() {
            let doomed: Vec<usize> = self
                .p
                .domain_values(var)
                .filter(|&v| {
                    self.p
                        .lower_bound()
                        .cap_add(self.p.unary(var, v), self.p.top())
                        >= self.p.top()
                })
                .collect();
            for val in doomed {
                if self.p.remove_value(var, val) == 0 {
                    self.p.set_infeasible();
                    self.bump_weights(ConstraintRef::Unary(var));
                    return false;
                }
            }
        }
        true
    }

    /// Removes table-supportless values at the hard level: a value whose
    /// every tuple with some neighbor is forbidden cannot appear in any
    /// finite-cost assignment.
    fn hard_table_revision(&mut self, touched: &mut Vec<usize>) -> bool {
        let top = self.p.top();
        let mut changed = true;
        while changed {
            changed = false;
            for t in 0..self.p.binary_count() {
                let (v1, v2) = self.p.binary(t).vars();
                for (var, other, flip) in [(v1, v2, false), (v2, v1, true)] {
                    let doomed: Vec<usize> = self
                        .p
                        .domain_values(var)
                        .filter(|&a| {
                            self.p.domain_values(other).all(|b| {
                                let c = if flip {
                                    self.p.binary(t).cost(b, a)
                                } else {
                                    self.p.binary(t).cost(a, b)
                                };
                                c >= top
                            })
                        })
                        .collect();
                    for a in doomed {
                        if self.p.remove_value(var, a) == 0 {
                            self.p.set_infeasible();
                            self.bump_weights(ConstraintRef::Binary(t));
                            return false;
                        }
                        touched.push(var);
                        changed = true;
                    }
                }
            }
        }
        true
    }

    /// The per-node propagation pipeline. `touched` seeds the set of
    /// variables whose domains changed since the parent node.
    fn propagate(&mut self, touched: Vec<usize>) -> bool {
        let mut touched = touched;
        loop {
            if !self.node_consistency() {
                return false;
            }
            if self.p.lower_bound() >= self.bound() {
                return false;
            }
            if !self.hard_table_revision(&mut touched) {
                return false;
            }
            if self.p.lower_bound() >= self.bound() {
                return false;
            }
            let mut changed = false;
            if self.cfg.prop >= PropLevel::DirectLp {
                let mut dirty = vec![false; self.p.linear_count()];
                for &var in &touched {
                    for &c in self.p.attached(var) {
                        if let ConstraintRef::Linear(l) = c {
                            dirty[l] = true;
                        }
                    }
                }
                touched.clear();
                for l in 0..self.p.linear_count() {
                    if !dirty[l] {
                        continue;
                    }
                    let gain = direct_lin_propagate(self.p, l);
                    if self.p.is_infeasible() || self.p.lower_bound() >= self.bound() {
                        self.bump_weights(ConstraintRef::Linear(l));
                        return false;
                    }
                    if gain > Cost::ZERO {
                        changed = true;
                    }
                }
            } else {
                touched.clear();
            }
            if self.cfg.prop == PropLevel::VacEveryNode {
                let mut scratch = VacStats::default();
                let schedule = schedule_for(self.p, &self.cfg);
                vac_lin_with(self.p, &schedule, &mut scratch);
                if !scratch.last_support.is_empty() {
                    self.state.bool_support = scratch.last_support.clone();
                }
                if self.p.is_infeasible() || self.p.lower_bound() >= self.bound() {
                    if let Some(c) = scratch.last_conflict {
                        self.bump_weights(c);
                    }
                    return false;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if let Some(deadline) = self.limits.deadline {
            if Instant::now() >= deadline {
                self.limit_hit = true;
                return true;
            }
        }
        if let Some(limit) = self.limits.node_limit {
            if self.nodes >= limit {
                self.limit_hit = true;
                return true;
            }
        }
        false
    }

    fn dfs(&mut self) {
        if self.limit_hit || self.out_of_budget() {
            return;
        }
        if self.p.lower_bound() >= self.bound() {
            return;
        }
        let decision = select_decision(self.p, &self.cfg, &self.state);
        let (var, val) = match decision {
            None => {
                let tau: Vec<usize> = (0..self.p.num_vars())
                    .map(|v| self.p.domain_values(v).next().unwrap())
                    .collect();
                let cost = self.p.assignment_cost(&tau);
                if cost < self.ub {
                    self.ub = cost;
                    self.best = Some((tau, cost));
                }
                return;
            }
            Some(d) => d,
        };
        self.nodes += 1;

        let mark = self.p.save_state();
        self.p.assign(var, val);
        if self.propagate(vec![var]) {
            self.dfs();
        }
        self.p.restore(mark);
        self.backtracks += 1;

        if self.limit_hit || self.p.lower_bound() >= self.bound() {
            return;
        }
        let mark = self.p.save_state();
        self.p.remove_value(var, val);
        if self.propagate(vec![var]) {
            self.dfs();
        }
        self.p.restore(mark);
        self.backtracks += 1;
    }
}

fn schedule_for(p: &Cfn, cfg: &SearchConfig) -> Vec<Cost> {
    match cfg.theta_start {
        None => make_schedule(p),
        Some(start) => {
            let mut theta = start.raw().max(1);
            let mut schedule = vec![Cost::new(theta)];
            while theta > 1 {
                theta = (theta / 2).max(1);
                schedule.push(Cost::new(theta));
            }
            schedule
        }
    }
}

/// Solves to optimality (or to a node/time limit) with the configured
/// propagation stack. The network is left in its root-propagated state.
pub fn branch_and_bound(p: &mut Cfn, cfg: &SearchConfig) -> SolveOutcome {
    let mut vac_stats = VacStats::default();
    let mut bounds = RootBounds::default();

    let feasible_root = p.enforce_nc();
    bounds.after_nc = Some(p.lower_bound());
    let mut state = SearchState::fresh(p);
    if feasible_root && cfg.prop >= PropLevel::DirectLp {
        loop {
            let mut gained = false;
            for l in 0..p.linear_count() {
                if direct_lin_propagate(p, l) > Cost::ZERO {
                    gained = true;
                }
                if p.is_infeasible() {
                    break;
                }
            }
            if p.is_infeasible() || !p.enforce_nc() || !gained {
                break;
            }
        }
        bounds.after_lp = Some(p.lower_bound());
    }
    if !p.is_infeasible() && cfg.prop >= PropLevel::VacRoot {
        let schedule = schedule_for(p, cfg);
        vac_lin_with(p, &schedule, &mut vac_stats);
        bounds.after_vac = Some(p.lower_bound());
        if !vac_stats.last_support.is_empty() {
            state.bool_support = vac_stats.last_support.clone();
        }
    }
    let root_lb = p.lower_bound();

    let ub = cfg.initial_ub.unwrap_or(p.top()).min(p.top());
    if p.is_infeasible() || root_lb >= ub {
        return SolveOutcome {
            status: Status::Infeasible,
            best: None,
            lower_bound: ub.min(p.top()),
            stats: SearchStats {
                nodes: 0,
                backtracks: 0,
                root_lower_bound: root_lb,
                root_bounds: bounds,
            },
            vac: vac_stats,
        };
    }

    let deadline = cfg.time_limit.map(|d| Instant::now() + d);
    let mut searcher = Searcher {
        p,
        cfg: cfg.clone(),
        state,
        ub,
        best: None,
        nodes: 0,
        backtracks: 0,
        limits: Limits {
            deadline,
            node_limit: cfg.node_limit,
        },
        limit_hit: false,
    };
    let root_mark = searcher.p.save_state();
    if searcher.propagate(Vec::new()) {
        searcher.dfs();
    }
    searcher.p.restore(root_mark);

    let (status, lower_bound) = if searcher.limit_hit {
        (Status::LimitReached, root_lb)
    } else {
        match &searcher.best {
            Some((_, cost)) => (Status::Optimal, *cost),
            None => (Status::Infeasible, ub),
        }
    };
    SolveOutcome {
        status,
        best: searcher.best.clone(),
        lower_bound,
        stats: SearchStats {
            nodes: searcher.nodes,
            backtracks: searcher.backtracks,
            root_lower_bound: root_lb,
            root_bounds: bounds,
        },
        vac: vac_stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn config(prop: PropLevel) -> SearchConfig {
        SearchConfig {
            prop,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn chain4_solves_to_one_under_every_config() {
        for prop in [
            PropLevel::NcOnly,
            PropLevel::DirectLp,
            PropLevel::VacRoot,
            PropLevel::VacEveryNode,
        ] {
            let mut p = fixtures::chain4();
            let out = branch_and_bound(&mut p, &config(prop));
            assert_eq!(out.status, Status::Optimal, "{prop:?}");
            let (tau, cost) = out.best.expect("an optimum exists");
            assert_eq!(cost, Cost::new(1), "{prop:?}");
            assert_eq!(fixtures::chain4().assignment_cost(&tau), Cost::new(1));
        }
    }

    #[test]
    fn knap6_solves_to_two_under_every_config() {
        for prop in [
            PropLevel::NcOnly,
            PropLevel::DirectLp,
            PropLevel::VacRoot,
            PropLevel::VacEveryNode,
        ] {
            let mut p = fixtures::knap6();
            let out = branch_and_bound(&mut p, &config(prop));
            assert_eq!(out.status, Status::Optimal, "{prop:?}");
            assert_eq!(out.best.unwrap().1, Cost::new(2), "{prop:?}");
            assert_eq!(out.lower_bound, Cost::new(2));
        }
    }

    #[test]
    fn always_forbidden_constraint_is_infeasible() {
        let mut p = Cfn::new(Cost::new(10));
        let x = p.add_variable(2);
        p.add_linear(vec![x], vec![vec![1, 1]], 3);
        let out = branch_and_bound(&mut p, &config(PropLevel::NcOnly));
        assert_eq!(out.status, Status::Infeasible);
        assert!(out.best.is_none());
    }

    #[test]
    fn min_domain_picks_smaller_domain_first() {
        let mut p = Cfn::new(Cost::new(10));
        p.add_variable(3);
        p.add_variable(2);
        let cfg = SearchConfig {
            var_heuristic: VarHeuristic::MinDomain,
            val_heuristic: ValHeuristic::MinValue,
            ..SearchConfig::default()
        };
        let state = SearchState::fresh(&p);
        assert_eq!(select_decision(&p, &cfg, &state), Some((1, 0)));
    }

    #[test]
    fn dom_wdeg_is_invariant_under_weight_scaling() {
        let mut p = Cfn::new(Cost::new(10));
        p.add_variable(3);
        p.add_variable(2);
        p.add_variable(2);
        let cfg = SearchConfig {
            var_heuristic: VarHeuristic::DomWdeg,
            val_heuristic: ValHeuristic::MinValue,
            ..SearchConfig::default()
        };
        let mut state = SearchState::fresh(&p);
        state.weights = vec![6, 2, 3];
        let before = select_decision(&p, &cfg, &state);
        state.weights = vec![60, 20, 30];
        assert_eq!(select_decision(&p, &cfg, &state), before);
        // 3/6 = 0.5, 2/2 = 1, 2/3 = 0.66: variable 0 wins.
        assert_eq!(before, Some((0, 0)));
    }

    #[test]
    fn bool_support_hint_guides_value_choice() {
        let p = fixtures::chain4();
        let cfg = SearchConfig {
            val_heuristic: ValHeuristic::BoolSupport,
            ..SearchConfig::default()
        };
        let mut state = SearchState::fresh(&p);
        state.bool_support[0] = Some(1);
        let (var, val) = select_decision(&p, &cfg, &state).unwrap();
        if var == 0 {
            assert_eq!(val, 1);
        }
        // Fallback: without a hint the cheapest unary value is taken.
        state.bool_support[0] = None;
        state.weights[0] = 100; // force variable 0 under dom/wdeg
        let (_, val) = select_decision(&p, &cfg, &state).unwrap();
        let _ = val;
    }

    #[test]
    fn node_limit_reports_limit_reached() {
        let mut p = fixtures::knap6();
        let cfg = SearchConfig {
            prop: PropLevel::NcOnly,
            node_limit: Some(1),
            ..SearchConfig::default()
        };
        let out = branch_and_bound(&mut p, &cfg);
        assert_eq!(out.status, Status::LimitReached);
    }

    #[test]
    fn initial_upper_bound_below_optimum_proves_infeasible() {
        let mut p = fixtures::knap6();
        let cfg = SearchConfig {
            initial_ub: Some(Cost::new(2)),
            ..SearchConfig::default()
        };
        let out = branch_and_bound(&mut p, &cfg);
        // The optimum is exactly 2, so no solution beats the bound.
        assert_eq!(out.status, Status::Infeasible);
        assert_eq!(out.lower_bound, Cost::new(2));
    }
}
