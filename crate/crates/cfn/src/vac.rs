//! Threshold-descent propagation that converts conflicts in the relaxed
//! view into provable lower-bound increases.
//!
//! One iteration has three phases. Phase 1 filters every constraint in the
//! view until a conflict surfaces (a constraint whose LP bound reaches the
//! threshold, a weight-infeasible constraint, or a domain wipe-out) or a
//! fixpoint is reached. Phase 2 replays the removal queue backwards from
//! the conflict, asking each responsible constraint for an explanation and
//! counting how often every source value is requested; the counters bound
//! the amount `lambda` movable to the zero-arity cost. Phase 3 applies the
//! resulting cost-move plan.
//!
//! The module also hosts the one-constraint-at-a-time LP propagator used as
//! the baseline and inside search.

use std::collections::{HashMap, VecDeque};

use crate::boolview::{
    lin_explain, lin_filter, table_explain, table_revise, BoolView, FilterOutcome, RemovalKind,
};
use crate::cost::Cost;
use crate::mckp::{rat, solve_mckp_lp, MckpInstance, Rat};
use crate::model::{Cfn, ConstraintRef};

/// Counters for one threshold of the descent.
#[derive(Clone, Debug, Default)]
pub struct ThetaStats {
    pub theta: u64,
    pub iterations: u64,
    pub gain: u64,
    pub stalls: u64,
    pub hard_removals: u64,
    pub soft_removals: u64,
    pub table_removals: u64,
    pub lp_solves: u64,
}

/// Statistics across a full run, plus the per-variable minimum surviving
/// view value of the last conflict-free filtering pass (used as a value
/// ordering hint by search).
#[derive(Clone, Debug, Default)]
pub struct VacStats {
    pub thetas: Vec<ThetaStats>,
    pub last_support: Vec<Option<usize>>,
    pub last_conflict: Option<ConstraintRef>,
}

/// Conflict found by phase 1: the bound certified on the conflicting
/// constraint (the problem `top` for wipe-outs and weight-infeasible
/// constraints) and the removals it depends on.
#[derive(Clone, Debug)]
pub struct PassConflict {
    pub cost: Rat,
    pub constraint: ConstraintRef,
    pub explanation: Vec<(usize, usize)>,
}

pub struct Pass1Result {
    pub conflict: Option<PassConflict>,
    pub view: BoolView,
}

struct Queue {
    tables: VecDeque<usize>,
    linears: VecDeque<usize>,
    queued_tables: Vec<bool>,
    queued_linears: Vec<bool>,
}

impl Queue {
    fn new(p: &Cfn) -> Queue {
        Queue {
            tables: (0..p.binary_count()).collect(),
            linears: (0..p.linear_count()).collect(),
            queued_tables: vec![true; p.binary_count()],
            queued_linears: vec![true; p.linear_count()],
        }
    }

    fn push(&mut self, c: ConstraintRef) {
        match c {
            ConstraintRef::Binary(t) => {
                if !self.queued_tables[t] {
                    self.queued_tables[t] = true;
                    self.tables.push_back(t);
                }
            }
            ConstraintRef::Linear(l) => {
                if !self.queued_linears[l] {
                    self.queued_linears[l] = true;
                    self.linears.push_back(l);
                }
            }
            ConstraintRef::Unary(_) => {}
        }
    }

    /// Tables drain before linear constraints; FIFO within each band.
    fn pop(&mut self) -> Option<ConstraintRef> {
        if let Some(t) = self.tables.pop_front() {
            self.queued_tables[t] = false;
            return Some(ConstraintRef::Binary(t));
        }
        if let Some(l) = self.linears.pop_front() {
            self.queued_linears[l] = false;
            return Some(ConstraintRef::Linear(l));
        }
        None
    }
}

/// Phase 1: propagate all constraints on the view at threshold `theta`,
/// recording every removal and its responsible constraint, until a conflict
/// or a fixpoint. The network itself is not touched.
pub fn vac_pass1(p: &Cfn, theta: Cost, stats: &mut ThetaStats) -> Pass1Result {
    let mut view = BoolView::build(p, theta);
    // A variable whose whole domain sits at or above the threshold is an
    // immediate wipe-out (cannot happen on a node-consistent network).
    for var in 0..p.num_vars() {
        if p.domain_count(var) > 0 && view.count(var) == 0 {
            let explanation = view.d_copy(var).iter().map(|&v| (var, v)).collect();
            return Pass1Result {
                conflict: Some(PassConflict {
                    cost: rat(p.top().raw() as i128),
                    constraint: ConstraintRef::Unary(var),
                    explanation,
                }),
                view,
            };
        }
    }

    let mut queue = Queue::new(p);
    while let Some(c) = queue.pop() {
        let removals: Vec<(usize, usize, RemovalKind)> = match c {
            ConstraintRef::Binary(t) => table_revise(p, t, &view, theta)
                .into_iter()
                .map(|(var, val)| (var, val, RemovalKind::Hard))
                .collect(),
            ConstraintRef::Linear(l) => {
                let (outcome, ran_lp) = lin_filter(p, l, &view, theta);
                if ran_lp {
                    stats.lp_solves += 1;
                }
                match outcome {
                    FilterOutcome::Conflict {
                        cost,
                        constraint,
                        explanation,
                    } => {
                        return Pass1Result {
                            conflict: Some(PassConflict {
                                cost,
                                constraint,
                                explanation,
                            }),
                            view,
                        };
                    }
                    FilterOutcome::Removals(r) => r,
                }
            }
            ConstraintRef::Unary(_) => unreachable!(),
        };
        for (var, val, kind) in removals {
            if !view.contains(var, val) {
                continue;
            }
            match (c, kind) {
                (ConstraintRef::Binary(_), _) => stats.table_removals += 1,
                (_, RemovalKind::Hard) => stats.hard_removals += 1,
                (_, RemovalKind::Soft) => stats.soft_removals += 1,
            }
            if view.remove(var, val, c) == 0 {
                let explanation = view.d_copy(var).iter().map(|&v| (var, v)).collect();
                return Pass1Result {
                    conflict: Some(PassConflict {
                        cost: rat(p.top().raw() as i128),
                        constraint: ConstraintRef::Unary(var),
                        explanation,
                    }),
                    view,
                };
            }
            // Re-propagate everything else touching the variable; a linear
            // constraint also revisits itself so the LP sees its own
            // bounds-consistency removals once they are on the record.
            for &other in p.attached(var) {
                if other == c && matches!(c, ConstraintRef::Binary(_)) {
                    continue;
                }
                queue.push(other);
            }
        }
    }
    Pass1Result {
        conflict: None,
        view,
    }
}

/// One cost move of the phase-3 plan; `units` scale the final `lambda`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ept {
    ExtendToTable { table: usize, var: usize, val: usize, units: u64 },
    ExtendToLinear { lin: usize, var: usize, val: usize, units: u64 },
    ProjectFromTable { table: usize, var: usize, val: usize, units: u64 },
    ProjectFromLinear { lin: usize, var: usize, val: usize, units: u64 },
    ProjectLinearToBound { lin: usize },
    ProjectUnaryToBound { var: usize },
}

/// Explanation computed while tracing, kept for diagnostics and tests.
#[derive(Clone, Debug)]
pub struct TraceExplanation {
    pub constraint: ConstraintRef,
    pub target: Option<(usize, usize)>,
    pub explanation: Vec<(usize, usize)>,
}

#[derive(Default)]
struct ValueTrace {
    k: u64,
    marked: bool,
    requests: Vec<(ConstraintRef, u64)>,
}

/// Result of phase 2: the movable amount, floored for application, the
/// ordered cost-move plan and per-value request counters.
pub struct VacTrace {
    pub lambda: Rat,
    pub lambda_floor: Cost,
    pub plan: Vec<Ept>,
    pub explanations: Vec<TraceExplanation>,
    k: HashMap<(usize, usize), ValueTrace>,
}

impl VacTrace {
    pub fn request_count(&self, var: usize, val: usize) -> u64 {
        self.k.get(&(var, val)).map_or(0, |v| v.k)
    }

    pub fn is_marked(&self, var: usize, val: usize) -> bool {
        self.k.get(&(var, val)).map_or(false, |v| v.marked)
    }
}

struct Pass2State<'a> {
    p: &'a Cfn,
    lambda: Rat,
    values: HashMap<(usize, usize), ValueTrace>,
    k_cs: HashMap<ConstraintRef, u64>,
}

impl<'a> Pass2State<'a> {
    /// Records `amount` requests on `(var, val)` by `requester`. Zero-cost
    /// values are marked for further tracing; the rest are sources whose
    /// unary cost caps `lambda` at cost/requests.
    fn bump(&mut self, var: usize, val: usize, requester: ConstraintRef, amount: u64) {
        let vt = self.values.entry((var, val)).or_default();
        vt.k += amount;
        match vt.requests.iter_mut().find(|(c, _)| *c == requester) {
            Some((_, u)) => *u += amount,
            None => vt.requests.push((requester, amount)),
        }
        let c = self.p.unary(var, val);
        if c.is_zero() {
            vt.marked = true;
        } else {
            let cap = rat(c.raw() as i128) / rat(vt.k as i128);
            if cap < self.lambda {
                self.lambda = cap;
            }
        }
    }
}

/// Phase 2: replay the removal queue backwards from the conflict, growing
/// the request counters and shrinking `lambda`, then lay out the cost-move
/// plan. Binary tables additionally cap `lambda` by the exact per-tuple
/// demand the plan will place on them.
pub fn vac_pass2(p: &Cfn, r: &Pass1Result, stats: &mut ThetaStats) -> VacTrace {
    let conflict = r.conflict.as_ref().expect("phase 2 requires a conflict");
    let view = &r.view;
    let theta = view.theta();
    let mut state = Pass2State {
        p,
        lambda: conflict.cost,
        values: HashMap::new(),
        k_cs: HashMap::new(),
    };
    state.k_cs.insert(conflict.constraint, 1);
    let mut explanations = vec![TraceExplanation {
        constraint: conflict.constraint,
        target: None,
        explanation: conflict.explanation.clone(),
    }];
    for &(var, val) in &conflict.explanation {
        state.bump(var, val, conflict.constraint, 1);
    }

    let queue = view.queue().to_vec();
    for &(var, val) in queue.iter().rev() {
        let is_marked = state
            .values
            .get(&(var, val))
            .map_or(false, |v| v.marked && v.k > 0);
        if !is_marked {
            continue;
        }
        let k_here = state.values[&(var, val)].k;
        let killer = view.killer(var, val).expect("queued removal has a killer");
        let explanation = match killer {
            ConstraintRef::Linear(l) => {
                let (e, z) = lin_explain(p, l, (var, val), view, theta);
                stats.lp_solves += 1;
                let entry = state.k_cs.entry(killer).or_insert(0);
                *entry += k_here;
                let cap = z / rat(*entry as i128);
                if cap < state.lambda {
                    state.lambda = cap;
                }
                e
            }
            ConstraintRef::Binary(t) => table_explain(p, t, (var, val), view, theta),
            ConstraintRef::Unary(_) => {
                unreachable!("threshold prunes have positive cost and are never marked")
            }
        };
        for &(j, b) in &explanation {
            state.bump(j, b, killer, k_here);
        }
        explanations.push(TraceExplanation {
            constraint: killer,
            target: Some((var, val)),
            explanation,
        });
    }

    // Lay out the plan: sources with their own cost extend first, then each
    // traced value in removal order receives its projection and passes the
    // cost on, and the conflicting constraint finally pays the bound. This
    // order funds every tuple before it is drawn on.
    let emit_extensions = |plan: &mut Vec<Ept>, var: usize, val: usize, vt: &ValueTrace| {
        for &(requester, units) in &vt.requests {
            match requester {
                ConstraintRef::Binary(table) => plan.push(Ept::ExtendToTable {
                    table,
                    var,
                    val,
                    units,
                }),
                ConstraintRef::Linear(lin) => plan.push(Ept::ExtendToLinear {
                    lin,
                    var,
                    val,
                    units,
                }),
                // Requests by a wiped-out variable stay on the unary table
                // for the final projection to the bound.
                ConstraintRef::Unary(_) => {}
            }
        }
    };
    let mut plan = Vec::new();
    let chronological = view.chronological_removed();
    for &(var, val) in &chronological {
        if let Some(vt) = state.values.get(&(var, val)) {
            if !vt.marked && vt.k > 0 {
                emit_extensions(&mut plan, var, val, vt);
            }
        }
    }
    for &(var, val) in &queue {
        if let Some(vt) = state.values.get(&(var, val)) {
            if vt.marked && vt.k > 0 {
                match view.killer(var, val).unwrap() {
                    ConstraintRef::Binary(table) => plan.push(Ept::ProjectFromTable {
                        table,
                        var,
                        val,
                        units: vt.k,
                    }),
                    ConstraintRef::Linear(lin) => plan.push(Ept::ProjectFromLinear {
                        lin,
                        var,
                        val,
                        units: vt.k,
                    }),
                    ConstraintRef::Unary(_) => unreachable!(),
                }
                emit_extensions(&mut plan, var, val, vt);
            }
        }
    }
    match conflict.constraint {
        ConstraintRef::Linear(lin) => plan.push(Ept::ProjectLinearToBound { lin }),
        ConstraintRef::Unary(var) => plan.push(Ept::ProjectUnaryToBound { var }),
        ConstraintRef::Binary(_) => unreachable!("tables conflict only through wipe-outs"),
    }

    // Exact per-tuple funding check for binary tables: walk the plan and
    // track the worst interim demand each tuple sees, in lambda units.
    let mut deficit: HashMap<(usize, usize, usize), (i64, i64)> = HashMap::new();
    let mut touch = |table: usize, a: usize, b: usize, delta: i64| {
        let e = deficit.entry((table, a, b)).or_insert((0, 0));
        e.0 += delta;
        if e.0 > e.1 {
            e.1 = e.0;
        }
    };
    for ept in &plan {
        match *ept {
            Ept::ExtendToTable {
                table,
                var,
                val,
                units,
            } => {
                let t = p.binary(table);
                let pos = t.pos_of(var).unwrap();
                for u in p.domain_values(t.other(var)) {
                    let (a, b) = if pos == 0 { (val, u) } else { (u, val) };
                    touch(table, a, b, -(units as i64));
                }
            }
            Ept::ProjectFromTable {
                table,
                var,
                val,
                units,
            } => {
                let t = p.binary(table);
                let pos = t.pos_of(var).unwrap();
                for u in p.domain_values(t.other(var)) {
                    let (a, b) = if pos == 0 { (val, u) } else { (u, val) };
                    touch(table, a, b, units as i64);
                }
            }
            _ => {}
        }
    }
    for ((table, a, b), (_, worst)) in deficit {
        if worst > 0 {
            let c = p.binary(table).cost(a, b);
            if c < p.top() {
                let cap = rat(c.raw() as i128) / rat(worst as i128);
                if cap < state.lambda {
                    state.lambda = cap;
                }
            }
        }
    }

    let lambda = state.lambda;
    let floored = lambda.floor().to_integer();
    let lambda_floor = Cost::new(floored.clamp(0, p.top().raw() as i128) as u64);
    VacTrace {
        lambda,
        lambda_floor,
        plan,
        explanations,
        k: state.values,
    }
}

/// Phase 3: apply the plan with the floored `lambda`, raising the bound by
/// exactly that amount. Requires `lambda >= 1`.
pub fn vac_pass3(p: &mut Cfn, trace: &VacTrace) -> Cost {
    let lambda = trace.lambda_floor;
    assert!(lambda >= Cost::new(1), "phase 3 needs a positive floored lambda");
    let scaled = |units: u64| -> Cost {
        let amount = units as u128 * lambda.raw() as u128;
        assert!(amount <= u64::MAX as u128, "cost move overflow");
        Cost::new(amount as u64)
    };
    for ept in &trace.plan {
        match *ept {
            Ept::ExtendToTable {
                table,
                var,
                val,
                units,
            } => p.extend(table, var, val, scaled(units)),
            Ept::ExtendToLinear {
                lin,
                var,
                val,
                units,
            } => p.lin_extend(lin, var, val, scaled(units)),
            Ept::ProjectFromTable {
                table,
                var,
                val,
                units,
            } => p.project(table, var, val, scaled(units)),
            Ept::ProjectFromLinear {
                lin,
                var,
                val,
                units,
            } => p.lin_project(lin, var, val, scaled(units)),
            Ept::ProjectLinearToBound { lin } => p.lin_project_zero(lin, lambda),
            Ept::ProjectUnaryToBound { var } => p.unary_project(var, lambda),
        }
    }
    lambda
}

/// Runs phase 1-2-3 at one threshold until the view is conflict-free or the
/// movable amount floors to zero (a stall). Returns the lower-bound gain.
pub fn vac_iterate(p: &mut Cfn, theta: Cost, stats: &mut VacStats) -> Cost {
    let start = p.lower_bound();
    let ts = match stats.thetas.last_mut() {
        Some(t) if t.theta == theta.raw() => t,
        _ => {
            stats.thetas.push(ThetaStats {
                theta: theta.raw(),
                ..ThetaStats::default()
            });
            stats.thetas.last_mut().unwrap()
        }
    };
    loop {
        if !p.enforce_nc() {
            break;
        }
        let r = vac_pass1(p, theta, ts);
        ts.iterations += 1;
        match &r.conflict {
            None => {
                stats.last_support = (0..p.num_vars())
                    .map(|var| r.view.values(var).next())
                    .collect();
                break;
            }
            Some(conflict) => {
                stats.last_conflict = Some(conflict.constraint);
                let trace = vac_pass2(p, &r, ts);
                if trace.lambda_floor < Cost::new(1) {
                    ts.stalls += 1;
                    break;
                }
                let gain = vac_pass3(p, &trace);
                ts.gain += gain.raw();
            }
        }
    }
    Cost::new(p.lower_bound().raw() - start.raw())
}

/// Geometric threshold descent derived from the cost distribution: start at
/// the largest finite nonzero cost and halve down to 1.
pub fn make_schedule(p: &Cfn) -> Vec<Cost> {
    let mut theta = p.max_finite_cost().raw().max(1);
    let mut schedule = vec![Cost::new(theta)];
    while theta > 1 {
        theta = (theta / 2).max(1);
        schedule.push(Cost::new(theta));
    }
    schedule
}

/// Full run over an explicit threshold schedule. Returns the total
/// lower-bound gain.
pub fn vac_lin_with(p: &mut Cfn, schedule: &[Cost], stats: &mut VacStats) -> Cost {
    let start = p.lower_bound();
    for &theta in schedule {
        if p.is_infeasible() {
            break;
        }
        vac_iterate(p, theta, stats);
    }
    Cost::new(p.lower_bound().raw() - start.raw())
}

/// Full run with the automatic schedule.
pub fn vac_lin(p: &mut Cfn) -> Cost {
    let mut stats = VacStats::default();
    let schedule = make_schedule(p);
    vac_lin_with(p, &schedule, &mut stats)
}

/// LP-based propagation of a single linear constraint with unary costs in
/// the objective: moves unary cost down to its floored reduced cost and
/// projects the floored LP optimum to the bound. A weight-infeasible
/// constraint makes the whole problem infeasible.
pub fn direct_lin_propagate(p: &mut Cfn, lin: usize) -> Cost {
    let inst = MckpInstance::from_linear(p, lin, true);
    let res = solve_mckp_lp(&inst);
    if !res.feasible {
        p.set_infeasible();
        return Cost::ZERO;
    }
    let gain = res.z_star.floor().to_integer();
    if gain < 1 {
        return Cost::ZERO;
    }
    let gain = Cost::new(gain.min(p.top().raw() as i128) as u64);
    let scope = p.linear(lin).scope().to_vec();
    for (pos, &var) in scope.iter().enumerate() {
        let vals: Vec<usize> = p.domain_values(var).collect();
        for val in vals {
            let item = inst.item_index(pos, val).expect("domain value is an item");
            let rc_floor = res.reduced_cost(pos, item).floor().to_integer();
            debug_assert!(rc_floor >= 0);
            let alpha = p.unary(var, val).raw() as i128 - rc_floor;
            if alpha != 0 {
                p.lin_move_cost(lin, var, val, -(alpha as i64));
            }
        }
    }
    p.lin_project_zero(lin, gain);
    gain
}
