//! The thresholded relaxation view of a network: only values and tuples of
//! cost below a threshold remain allowed. Filtering removes values that can
//! be proven absent from every allowed tuple — by bounds reasoning on the
//! weights (hard removals), by reduced-cost reasoning on the LP relaxation
//! (soft removals), or by support loss in binary tables — and every removal
//! can be explained by a set of earlier removals sufficient to re-derive it.

use crate::cost::Cost;
use crate::mckp::{rat, solve_mckp_lp, MckpInstance, Rat};
use crate::model::{Cfn, ConstraintRef};

/// Reduced-domain view of a network at threshold `theta`, together with the
/// removal chronology phase 2 of conflict analysis replays: the queue of
/// propagation removals, the constraint responsible for each, and the
/// values pruned at construction because their unary cost already reaches
/// the threshold.
pub struct BoolView {
    theta: Cost,
    present: Vec<Vec<bool>>,
    count: Vec<usize>,
    d_copy: Vec<Vec<usize>>,
    pruned: Vec<(usize, usize)>,
    queue: Vec<(usize, usize)>,
    killer: Vec<Vec<Option<ConstraintRef>>>,
    q_pos: Vec<Vec<Option<usize>>>,
}

impl BoolView {
    /// Restricts each domain to values with unary cost below `theta`.
    /// The construction prunes are terminal explanation sources: their
    /// remaining unary cost funds bound increases.
    pub fn build(p: &Cfn, theta: Cost) -> BoolView {
        assert!(theta >= Cost::new(1) && theta <= p.top());
        let n = p.num_vars();
        let mut view = BoolView {
            theta,
            present: (0..n).map(|v| vec![false; p.domain_size(v)]).collect(),
            count: vec![0; n],
            d_copy: (0..n).map(|v| p.domain_values(v).collect()).collect(),
            pruned: Vec::new(),
            queue: Vec::new(),
            killer: (0..n).map(|v| vec![None; p.domain_size(v)]).collect(),
            q_pos: (0..n).map(|v| vec![None; p.domain_size(v)]).collect(),
        };
        for var in 0..n {
            for val in p.domain_values(var) {
                if p.unary(var, val) < theta {
                    view.present[var][val] = true;
                    view.count[var] += 1;
                } else {
                    view.pruned.push((var, val));
                }
            }
        }
        view
    }

    pub fn theta(&self) -> Cost {
        self.theta
    }

    pub fn contains(&self, var: usize, val: usize) -> bool {
        self.present[var][val]
    }

    pub fn count(&self, var: usize) -> usize {
        self.count[var]
    }

    pub fn values(&self, var: usize) -> impl Iterator<Item = usize> + '_ {
        self.present[var]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(v, _)| v)
    }

    /// The domain of `var` as of view construction.
    pub fn d_copy(&self, var: usize) -> &[usize] {
        &self.d_copy[var]
    }

    pub fn pruned(&self) -> &[(usize, usize)] {
        &self.pruned
    }

    pub fn queue(&self) -> &[(usize, usize)] {
        &self.queue
    }

    pub fn killer(&self, var: usize, val: usize) -> Option<ConstraintRef> {
        self.killer[var][val]
    }

    /// True for values that were in the base domain but are gone from the
    /// view, whether pruned at construction or removed by propagation.
    pub fn removed_or_pruned(&self, var: usize, val: usize) -> bool {
        self.d_copy[var].contains(&val) && !self.present[var][val]
    }

    /// Removes a value, recording the responsible constraint and the queue
    /// position. Returns the remaining view-domain count.
    pub fn remove(&mut self, var: usize, val: usize, by: ConstraintRef) -> usize {
        assert!(self.present[var][val]);
        self.present[var][val] = false;
        self.count[var] -= 1;
        self.killer[var][val] = Some(by);
        self.q_pos[var][val] = Some(self.queue.len());
        self.queue.push((var, val));
        self.count[var]
    }

    /// All values gone from the view, in chronological order: construction
    /// prunes first, then queue order.
    pub fn chronological_removed(&self) -> Vec<(usize, usize)> {
        let mut all = self.pruned.clone();
        all.extend_from_slice(&self.queue);
        all
    }

    /// Chronological removals strictly before the removal of `(var, val)`.
    pub fn prefix_of(&self, var: usize, val: usize) -> Vec<(usize, usize)> {
        let pos = self.q_pos[var][val].expect("value was not removed by propagation");
        let mut prefix = self.pruned.clone();
        prefix.extend_from_slice(&self.queue[..pos]);
        prefix
    }
}

/// Kind of a value removal on a linear constraint: hard removals hold for
/// any delta costs and threshold, soft removals follow from the reduced
/// costs reaching the threshold.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RemovalKind {
    Hard,
    Soft,
}

/// Result of filtering one constraint in the view.
pub enum FilterOutcome {
    /// The constraint cannot be satisfied below the threshold; `cost` is the
    /// LP bound (the problem `top` when the constraint is weight-infeasible)
    /// and `explanation` the removals responsible.
    Conflict {
        cost: Rat,
        constraint: ConstraintRef,
        explanation: Vec<(usize, usize)>,
    },
    /// Values that lost all allowed tuples, in removal order.
    Removals(Vec<(usize, usize, RemovalKind)>),
}

fn scope_max_weights(p: &Cfn, lin: usize, allowed: &dyn Fn(usize, usize) -> bool) -> Option<Vec<u64>> {
    let c = p.linear(lin);
    let mut maxima = Vec::with_capacity(c.arity());
    for (pos, &var) in c.scope().iter().enumerate() {
        let m = p
            .domain_values(var)
            .filter(|&v| allowed(var, v))
            .map(|v| c.weight(pos, v))
            .max()?;
        maxima.push(m);
    }
    Some(maxima)
}

/// True iff some tuple over the allowed values reaches the capacity,
/// optionally with one variable pinned to a value.
fn weight_feasible(
    p: &Cfn,
    lin: usize,
    allowed: &dyn Fn(usize, usize) -> bool,
    pin: Option<(usize, usize)>,
) -> bool {
    let c = p.linear(lin);
    let restricted = |var: usize, val: usize| match pin {
        Some((pv, pval)) if pv == var => val == pval,
        _ => allowed(var, val),
    };
    match scope_max_weights(p, lin, &restricted) {
        None => false,
        Some(maxima) => maxima.iter().sum::<u64>() >= c.capacity(),
    }
}

/// Bounds-consistency removals at the hard (weight-only) level: a value goes
/// when even the heaviest completion cannot reach the capacity. Runs to a
/// constraint-local fixpoint and returns removals in discovery order without
/// touching the view.
pub fn hard_filter(p: &Cfn, lin: usize, view: &BoolView) -> Vec<(usize, usize)> {
    let c = p.linear(lin);
    let scope = c.scope().to_vec();
    let mut alive: Vec<Vec<usize>> = scope.iter().map(|&v| view.values(v).collect()).collect();
    let mut removed = Vec::new();
    loop {
        let maxima: Vec<u64> = alive
            .iter()
            .enumerate()
            .map(|(pos, vals)| {
                vals.iter().map(|&v| c.weight(pos, v)).max().unwrap_or(0)
            })
            .collect();
        if alive.iter().any(|vals| vals.is_empty()) {
            return removed;
        }
        let total: u64 = maxima.iter().sum();
        let mut changed = false;
        for pos in 0..scope.len() {
            let rest = total - maxima[pos];
            let (keep, drop): (Vec<usize>, Vec<usize>) = alive[pos]
                .iter()
                .partition(|&&v| c.weight(pos, v) + rest >= c.capacity());
            for v in drop {
                removed.push((scope[pos], v));
                changed = true;
            }
            alive[pos] = keep;
            if alive[pos].is_empty() {
                return removed;
            }
        }
        if !changed {
            return removed;
        }
    }
}

/// Deletion-minimal explanation of a weight-infeasible constraint state.
/// `candidates` are currently-removed values in chronological order; values
/// outside them count as present. Returns the kept subset and whether the
/// constraint is infeasible even with every candidate restored (then the
/// explanation is empty and the problem itself is inconsistent).
pub fn explain_hard_conflict(
    p: &Cfn,
    lin: usize,
    candidates: &[(usize, usize)],
    target: Option<(usize, usize)>,
) -> (Vec<(usize, usize)>, bool) {
    let scope = p.linear(lin).scope();
    let in_scope: Vec<(usize, usize)> = candidates
        .iter()
        .copied()
        .filter(|&(var, _)| scope.contains(&var))
        .collect();
    let feasible_with = |kept_removed: &[(usize, usize)]| {
        let allowed = |var: usize, val: usize| !kept_removed.contains(&(var, val));
        weight_feasible(p, lin, &allowed, target)
    };
    if feasible_with(&[]) == false {
        // Not satisfiable even with everything restored.
        return (Vec::new(), true);
    }
    assert!(
        !feasible_with(&in_scope),
        "explain_hard_conflict called on a satisfiable state"
    );
    let mut kept = in_scope;
    let mut idx = 0;
    while idx < kept.len() {
        let mut trial = kept.clone();
        trial.remove(idx);
        if !feasible_with(&trial) {
            kept = trial;
        } else {
            idx += 1;
        }
    }
    (kept, false)
}

/// Builds the delta-cost LP over the base domains of the scope with the
/// given values forbidden and optionally one value pinned.
fn lp_instance(
    p: &Cfn,
    lin: usize,
    forbidden: &dyn Fn(usize, usize) -> bool,
    forced: Option<(usize, usize)>,
) -> MckpInstance {
    let mut inst = MckpInstance::from_linear(p, lin, false);
    for class in 0..inst.classes.len() {
        let var = inst.classes[class].var;
        for item in 0..inst.classes[class].items.len() {
            let val = inst.classes[class].items[item].value;
            if forbidden(var, val) {
                inst.forbid(class, item);
            }
            if forced == Some((var, val)) {
                inst.force(class, item);
            }
        }
    }
    inst
}

/// One filtering pass over a linear constraint, following the order: weight
/// feasibility, bounds-consistency removals, then the LP relaxation without
/// unary costs. Hard removals are reported alone so they enter the global
/// removal record before the LP conclusions that build on them; the caller
/// revisits the constraint afterwards. Returns the outcome and whether an
/// LP was solved.
pub fn lin_filter(
    p: &Cfn,
    lin: usize,
    view: &BoolView,
    theta: Cost,
) -> (FilterOutcome, bool) {
    let in_view = |var: usize, val: usize| view.contains(var, val);
    if !weight_feasible(p, lin, &in_view, None) {
        let (explanation, _) =
            explain_hard_conflict(p, lin, &view.chronological_removed(), None);
        return (
            FilterOutcome::Conflict {
                cost: rat(p.top().raw() as i128),
                constraint: ConstraintRef::Linear(lin),
                explanation,
            },
            false,
        );
    }
    let hard = hard_filter(p, lin, view);
    if !hard.is_empty() {
        return (
            FilterOutcome::Removals(hard.into_iter().map(|(v, a)| (v, a, RemovalKind::Hard)).collect()),
            false,
        );
    }

    let inst = lp_instance(p, lin, &|var, val| view.removed_or_pruned(var, val), None);
    let res = solve_mckp_lp(&inst);
    assert!(res.feasible, "weight screen guarantees LP feasibility");
    let theta_r = rat(theta.raw() as i128);
    if res.z_star >= theta_r {
        // Conflict: earlier removals whose reduced cost is negative are the
        // ones the bound depends on.
        let mut explanation = Vec::new();
        for &(var, val) in view.chronological_removed().iter() {
            let c = p.linear(lin);
            if let Some(pos) = c.pos_of(var) {
                let item = inst.item_index(pos, val).expect("removed value is an item");
                if res.reduced_cost(pos, item) < rat(0) {
                    explanation.push((var, val));
                }
            }
        }
        return (
            FilterOutcome::Conflict {
                cost: res.z_star,
                constraint: ConstraintRef::Linear(lin),
                explanation,
            },
            true,
        );
    }
    let mut soft = Vec::new();
    let c = p.linear(lin);
    for (pos, &var) in c.scope().iter().enumerate() {
        for val in view.values(var) {
            let item = inst.item_index(pos, val).expect("view value is an item");
            if res.z_star + res.reduced_cost(pos, item) >= theta_r {
                soft.push((var, val, RemovalKind::Soft));
            }
        }
    }
    (FilterOutcome::Removals(soft), true)
}

/// Support-based revision of a binary table in the view: a value goes when
/// no partner value below the threshold survives. Cascades to the
/// constraint-local fixpoint; returns removals in discovery order.
pub fn table_revise(p: &Cfn, table: usize, view: &BoolView, theta: Cost) -> Vec<(usize, usize)> {
    let t = p.binary(table);
    let (v1, v2) = t.vars();
    let mut alive1: Vec<usize> = view.values(v1).collect();
    let mut alive2: Vec<usize> = view.values(v2).collect();
    let mut removed = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        let (keep1, drop1): (Vec<usize>, Vec<usize>) = alive1
            .iter()
            .partition(|&&a| alive2.iter().any(|&b| t.cost(a, b) < theta));
        for a in drop1 {
            removed.push((v1, a));
            changed = true;
        }
        alive1 = keep1;
        let (keep2, drop2): (Vec<usize>, Vec<usize>) = alive2
            .iter()
            .partition(|&&b| alive1.iter().any(|&a| t.cost(a, b) < theta));
        for b in drop2 {
            removed.push((v2, b));
            changed = true;
        }
        alive2 = keep2;
        if alive1.is_empty() || alive2.is_empty() {
            break;
        }
    }
    removed
}

/// Explains a removal made by a linear constraint: solves the LP with the
/// value pinned and the earlier removals forbidden. When that LP is
/// weight-infeasible the explanation falls back to the minimal hard one;
/// otherwise it keeps the earlier removals with negative reduced cost and
/// returns the (at least threshold) bound. The returned cost is the problem
/// `top` on the infeasible branch.
pub fn lin_explain(
    p: &Cfn,
    lin: usize,
    target: (usize, usize),
    view: &BoolView,
    theta: Cost,
) -> (Vec<(usize, usize)>, Rat) {
    let (var, val) = target;
    let prefix = view.prefix_of(var, val);
    let scope = p.linear(lin).scope();
    let prefix_in_scope: Vec<(usize, usize)> = prefix
        .iter()
        .copied()
        .filter(|&(v, _)| scope.contains(&v))
        .collect();

    let forbidden = |v: usize, a: usize| (v, a) != target && prefix_in_scope.contains(&(v, a));
    let inst = lp_instance(p, lin, &forbidden, Some(target));
    let res = solve_mckp_lp(&inst);
    if !res.feasible {
        let (explanation, _) = explain_hard_conflict(p, lin, &prefix_in_scope, Some(target));
        return (explanation, rat(p.top().raw() as i128));
    }
    let theta_r = rat(theta.raw() as i128);
    assert!(
        res.z_star >= theta_r,
        "pinned LP below threshold: the removal being explained was unsound"
    );
    let c = p.linear(lin);
    let mut explanation = Vec::new();
    for &(v, a) in &prefix_in_scope {
        if (v, a) == target {
            continue;
        }
        let pos = c.pos_of(v).unwrap();
        let item = inst.item_index(pos, a).expect("prefix value is an item");
        if res.reduced_cost(pos, item) < rat(0) {
            explanation.push((v, a));
        }
    }
    (explanation, res.z_star)
}

/// Explains a removal made by a binary table: the partners that would have
/// supported the value below the threshold, all of which are gone from the
/// view (that is why the value was removed).
pub fn table_explain(
    p: &Cfn,
    table: usize,
    target: (usize, usize),
    view: &BoolView,
    theta: Cost,
) -> Vec<(usize, usize)> {
    let t = p.binary(table);
    let (var, val) = target;
    let other = t.other(var);
    let pos = t.pos_of(var).expect("target variable not in table scope");
    let mut explanation = Vec::new();
    for &b in view.d_copy(other) {
        let cost = if pos == 0 {
            t.cost(val, b)
        } else {
            t.cost(b, val)
        };
        if cost < theta {
            assert!(
                view.removed_or_pruned(other, b),
                "support still present for a removed value"
            );
            explanation.push((other, b));
        }
    }
    explanation
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn prune_view_like_knap6(p: &Cfn, theta: Cost) -> BoolView {
        BoolView::build(p, theta)
    }

    #[test]
    fn build_prunes_threshold_values_on_chain4() {
        let p = fixtures::chain4();
        let view = BoolView::build(&p, Cost::new(1));
        assert!(!view.contains(0, 0)); // unary cost 1 >= theta
        assert!(!view.contains(3, 1));
        assert!(view.contains(0, 1));
        assert_eq!(view.pruned(), &[(0, 0), (3, 1)]);
    }

    #[test]
    fn build_at_top_keeps_everything_without_top_costs() {
        let p = fixtures::chain4();
        let view = BoolView::build(&p, p.top());
        for var in 0..p.num_vars() {
            assert_eq!(view.count(var), 2);
        }
    }

    #[test]
    fn build_on_zero_costs_prunes_nothing() {
        let mut p = Cfn::new(Cost::new(10));
        p.add_variable(3);
        let view = BoolView::build(&p, Cost::new(1));
        assert_eq!(view.count(0), 3);
        assert!(view.pruned().is_empty());
    }

    #[test]
    fn hard_filter_reproduces_knap6_bounds_removals() {
        let p = fixtures::knap6();
        let mut view = prune_view_like_knap6(&p, Cost::new(1));
        // After the construction prunes of (1,a) and (3,a), value (2,b)
        // cannot reach the capacity of the five-variable constraint.
        let removed = hard_filter(&p, 0, &view);
        assert_eq!(removed, vec![(1, 1)]);
        view.remove(1, 1, ConstraintRef::Linear(0));
        // On the three-variable constraint, after (2,b) and (6,a) are gone,
        // (4,b) has no weight left.
        let removed = hard_filter(&p, 2, &view);
        assert_eq!(removed, vec![(3, 1)]);
    }

    #[test]
    fn hard_filter_with_zero_capacity_removes_nothing() {
        let mut p = Cfn::new(Cost::new(10));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        p.add_linear(vec![x, y], vec![vec![1, 0], vec![1, 0]], 0);
        let view = BoolView::build(&p, Cost::new(1));
        assert!(hard_filter(&p, 0, &view).is_empty());
    }

    #[test]
    fn lin_filter_detects_knap6_pair_conflict() {
        let p = fixtures::knap6();
        let mut view = prune_view_like_knap6(&p, Cost::new(1));
        view.remove(3, 1, ConstraintRef::Linear(2)); // (4,b)
        let (outcome, _) = lin_filter(&p, 1, &view, Cost::new(1));
        match outcome {
            FilterOutcome::Conflict {
                explanation, cost, ..
            } => {
                assert_eq!(explanation, vec![(0, 0), (3, 1)]);
                assert_eq!(cost, rat(p.top().raw() as i128));
            }
            FilterOutcome::Removals(_) => panic!("expected a conflict"),
        }
    }

    #[test]
    fn lin_filter_soft_removes_by_reduced_cost() {
        // x1a + x2a >= 1 with one unit of delta cost on (1,b).
        let mut p = Cfn::new(Cost::new(100));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        let lin = p.add_linear(vec![x, y], vec![vec![1, 0], vec![1, 0]], 1);
        p.set_unary(x, 1, Cost::new(1));
        p.lin_extend(lin, x, 1, Cost::new(1)); // delta(1,b) = 1, c back to 0
        let view = BoolView::build(&p, Cost::new(1));
        let (outcome, ran_lp) = lin_filter(&p, lin, &view, Cost::new(1));
        assert!(ran_lp);
        match outcome {
            FilterOutcome::Removals(r) => {
                assert_eq!(r, vec![(x, 1, RemovalKind::Soft)]);
            }
            _ => panic!("expected removals"),
        }
    }

    #[test]
    fn lin_filter_with_zero_deltas_removes_nothing() {
        let mut p = Cfn::new(Cost::new(10));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        p.add_linear(vec![x, y], vec![vec![1, 0], vec![1, 0]], 1);
        let view = BoolView::build(&p, Cost::new(1));
        let (outcome, ran_lp) = lin_filter(&p, 0, &view, Cost::new(1));
        assert!(ran_lp);
        match outcome {
            FilterOutcome::Removals(r) => assert!(r.is_empty()),
            _ => panic!("expected no conflict"),
        }
    }

    #[test]
    fn table_revise_removes_supportless_values() {
        let p = fixtures::chain4();
        let view = BoolView::build(&p, Cost::new(1)); // (1,a) pruned
        let removed = table_revise(&p, 0, &view, Cost::new(1));
        // (2,a)'s only sub-threshold support was (1,a).
        assert_eq!(removed, vec![(1, 0)]);
    }

    #[test]
    fn table_revise_on_zero_table_removes_nothing() {
        let mut p = Cfn::new(Cost::new(10));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        p.add_binary(x, y, vec![Cost::ZERO; 4]);
        let view = BoolView::build(&p, Cost::new(1));
        assert!(table_revise(&p, 0, &view, Cost::new(1)).is_empty());
    }

    #[test]
    fn table_revise_at_top_without_top_tuples_removes_nothing() {
        let p = fixtures::chain4();
        let view = BoolView::build(&p, p.top());
        assert!(table_revise(&p, 1, &view, p.top()).is_empty());
    }

    #[test]
    fn hard_conflict_explanations_are_minimal() {
        let p = fixtures::knap6();
        // Pin (2,b) on the five-variable constraint with (1,a),(3,a) removed:
        // only (1,a) is needed.
        let (e, flag) =
            explain_hard_conflict(&p, 0, &[(0, 0), (2, 0)], Some((1, 1)));
        assert!(!flag);
        assert_eq!(e, vec![(0, 0)]);
        // Pin (4,b) on the three-variable constraint with (2,b),(6,a) gone:
        // both are needed.
        let (e, flag) =
            explain_hard_conflict(&p, 2, &[(5, 0), (1, 1)], Some((3, 1)));
        assert!(!flag);
        assert_eq!(e, vec![(5, 0), (1, 1)]);
    }

    #[test]
    fn unconditionally_infeasible_constraint_flags_globally() {
        let mut p = Cfn::new(Cost::new(10));
        let x = p.add_variable(2);
        p.add_linear(vec![x], vec![vec![1, 1]], 5);
        let (e, flag) = explain_hard_conflict(&p, 0, &[], None);
        assert!(flag);
        assert!(e.is_empty());
    }

    #[test]
    fn lin_explain_handles_all_three_branches() {
        // Unconditional removal: delta already reaches the threshold.
        let mut p = Cfn::new(Cost::new(100));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        let lin = p.add_linear(vec![x, y], vec![vec![1, 0], vec![1, 0]], 1);
        p.set_unary(x, 1, Cost::new(1));
        p.lin_extend(lin, x, 1, Cost::new(1));
        let mut view = BoolView::build(&p, Cost::new(1));
        view.remove(x, 1, ConstraintRef::Linear(lin));
        let (e, z) = lin_explain(&p, lin, (x, 1), &view, Cost::new(1));
        assert!(e.is_empty());
        assert_eq!(z, rat(1));

        // Weight-infeasible branch: 2 x1a + 2 x2a >= 2 after (2,a) is gone,
        // explaining the removal of (1,b).
        let mut p = Cfn::new(Cost::new(100));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        let lin = p.add_linear(vec![x, y], vec![vec![2, 0], vec![2, 0]], 2);
        let mut view = BoolView::build(&p, Cost::new(1));
        view.remove(y, 0, ConstraintRef::Linear(lin));
        view.remove(x, 1, ConstraintRef::Linear(lin));
        let (e, z) = lin_explain(&p, lin, (x, 1), &view, Cost::new(1));
        assert_eq!(e, vec![(y, 0)]);
        assert_eq!(z, rat(p.top().raw() as i128));
    }

    #[test]
    fn table_explain_returns_lost_supports() {
        let p = fixtures::chain4();
        let mut view = BoolView::build(&p, Cost::new(1));
        view.remove(1, 0, ConstraintRef::Binary(0)); // (2,a) by c12
        let e = table_explain(&p, 0, (1, 0), &view, Cost::new(1));
        assert_eq!(e, vec![(0, 0)]);

        // (2,b) removed by the middle table once (3,b) is gone.
        view.remove(2, 1, ConstraintRef::Binary(2));
        view.remove(1, 1, ConstraintRef::Binary(1));
        let e = table_explain(&p, 1, (1, 1), &view, Cost::new(1));
        assert_eq!(e, vec![(2, 1)]);
    }

    #[test]
    fn table_explain_with_no_allowed_supports_is_empty() {
        let mut p = Cfn::new(Cost::new(10));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        let costs = vec![
            Cost::new(5),
            Cost::new(5), // value (x,0) has no sub-threshold tuple at all
            Cost::ZERO,
            Cost::ZERO,
        ];
        p.add_binary(x, y, costs);
        let mut view = BoolView::build(&p, Cost::new(1));
        view.remove(x, 0, ConstraintRef::Binary(0));
        assert!(table_explain(&p, 0, (x, 0), &view, Cost::new(1)).is_empty());
    }
}
