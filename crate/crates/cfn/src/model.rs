//! The cost function network: variables with finite domains, one unary cost
//! table per variable, binary cost tables, linear inequality constraints with
//! delta-cost bookkeeping, and the zero-arity lower bound `c0`.
//!
//! All mutations (cost moves, domain removals, bound increases) are recorded
//! on a trail so search can restore earlier states in O(1) per event.

use crate::cost::Cost;

/// Identifies a cost function for propagation queues, conflict reporting and
/// removal attribution. `Unary(i)` doubles as the conflict marker for a
/// domain wipe-out at variable `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ConstraintRef {
    Unary(usize),
    Binary(usize),
    Linear(usize),
}

/// Binary cost table over an ordered variable pair, dense row-major storage.
#[derive(Clone, Debug)]
pub struct BinaryFn {
    var1: usize,
    var2: usize,
    d2: usize,
    costs: Vec<Cost>,
}

impl BinaryFn {
    pub fn vars(&self) -> (usize, usize) {
        (self.var1, self.var2)
    }

    pub fn cost(&self, a: usize, b: usize) -> Cost {
        self.costs[a * self.d2 + b]
    }

    /// Position of `var` in the pair, if it participates.
    pub fn pos_of(&self, var: usize) -> Option<usize> {
        if var == self.var1 {
            Some(0)
        } else if var == self.var2 {
            Some(1)
        } else {
            None
        }
    }

    pub fn other(&self, var: usize) -> usize {
        if var == self.var1 {
            self.var2
        } else {
            self.var1
        }
    }
}

/// Linear inequality `sum w_iv x_iv >= capacity` over a scope, with per-value
/// delta costs recording how much unary cost the constraint has absorbed
/// (positive) or handed out (negative), and `delta_zero` the amount already
/// projected to the problem lower bound.
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    scope: Vec<usize>,
    weights: Vec<Vec<u64>>,
    capacity: u64,
    deltas: Vec<Vec<i64>>,
    delta_zero: u64,
}

impl LinearConstraint {
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn pos_of(&self, var: usize) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    pub fn weight(&self, pos: usize, val: usize) -> u64 {
        self.weights[pos][val]
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn delta(&self, pos: usize, val: usize) -> i64 {
        self.deltas[pos][val]
    }

    pub fn delta_zero(&self) -> u64 {
        self.delta_zero
    }
}

#[derive(Clone, Debug)]
struct Variable {
    domain_size: usize,
    present: Vec<bool>,
    count: usize,
}

enum TrailEvent {
    Unary { var: usize, val: usize, prev: Cost },
    Binary { table: usize, cell: usize, prev: Cost },
    Delta { lin: usize, pos: usize, val: usize, prev: i64 },
    DeltaZero { lin: usize, prev: u64 },
    LowerBound { prev: Cost },
    Removal { var: usize, val: usize },
}

/// Snapshot marker returned by [`Cfn::save_state`].
#[derive(Clone, Copy, Debug)]
pub struct Marker(usize);

/// A weighted constraint network under reparameterization.
#[derive(Default)]
pub struct Cfn {
    vars: Vec<Variable>,
    unary: Vec<Vec<Cost>>,
    binaries: Vec<BinaryFn>,
    linears: Vec<LinearConstraint>,
    attached: Vec<Vec<ConstraintRef>>,
    c0: Cost,
    top: Cost,
    trail: Vec<TrailEvent>,
}

impl Cfn {
    pub fn new(top: Cost) -> Cfn {
        assert!(top > Cost::ZERO, "top must be positive");
        Cfn {
            top,
            ..Cfn::default()
        }
    }

    pub fn add_variable(&mut self, domain_size: usize) -> usize {
        assert!(domain_size > 0);
        self.vars.push(Variable {
            domain_size,
            present: vec![true; domain_size],
            count: domain_size,
        });
        self.unary.push(vec![Cost::ZERO; domain_size]);
        self.attached.push(Vec::new());
        self.vars.len() - 1
    }

    pub fn set_unary(&mut self, var: usize, val: usize, cost: Cost) {
        assert!(cost <= self.top);
        self.unary[var][val] = cost;
    }

    /// Adds a binary table; `costs` is row-major over (var1 value, var2 value).
    pub fn add_binary(&mut self, var1: usize, var2: usize, costs: Vec<Cost>) -> usize {
        assert_ne!(var1, var2);
        let (d1, d2) = (self.domain_size(var1), self.domain_size(var2));
        assert_eq!(costs.len(), d1 * d2);
        assert!(costs.iter().all(|&c| c <= self.top));
        self.binaries.push(BinaryFn {
            var1,
            var2,
            d2,
            costs,
        });
        let idx = self.binaries.len() - 1;
        self.attached[var1].push(ConstraintRef::Binary(idx));
        self.attached[var2].push(ConstraintRef::Binary(idx));
        idx
    }

    /// Adds a linear constraint `sum w >= capacity`; `weights[p][v]` is the
    /// weight of value `v` of the `p`-th scope variable. Delta costs start
    /// at zero (the constraint is initially hard).
    pub fn add_linear(&mut self, scope: Vec<usize>, weights: Vec<Vec<u64>>, capacity: u64) -> usize {
        assert_eq!(scope.len(), weights.len());
        assert!(!scope.is_empty());
        for (p, &var) in scope.iter().enumerate() {
            assert_eq!(weights[p].len(), self.domain_size(var));
            assert!(scope.iter().filter(|&&v| v == var).count() == 1);
        }
        let deltas = weights.iter().map(|w| vec![0i64; w.len()]).collect();
        self.linears.push(LinearConstraint {
            scope: scope.clone(),
            weights,
            capacity,
            deltas,
            delta_zero: 0,
        });
        let idx = self.linears.len() - 1;
        for &var in &scope {
            self.attached[var].push(ConstraintRef::Linear(idx));
        }
        idx
    }

    pub fn set_lower_bound(&mut self, c0: Cost) {
        self.c0 = c0;
    }

    // ------------------------------------------------------------------
    // Accessors
    // ------------------------------------------------------------------

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn domain_size(&self, var: usize) -> usize {
        self.vars[var].domain_size
    }

    pub fn present(&self, var: usize, val: usize) -> bool {
        self.vars[var].present[val]
    }

    pub fn domain_count(&self, var: usize) -> usize {
        self.vars[var].count
    }

    pub fn domain_values(&self, var: usize) -> impl Iterator<Item = usize> + '_ {
        self.vars[var]
            .present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(v, _)| v)
    }

    pub fn unary(&self, var: usize, val: usize) -> Cost {
        self.unary[var][val]
    }

    pub fn lower_bound(&self) -> Cost {
        self.c0
    }

    pub fn top(&self) -> Cost {
        self.top
    }

    pub fn binary_count(&self) -> usize {
        self.binaries.len()
    }

    pub fn binary(&self, idx: usize) -> &BinaryFn {
        &self.binaries[idx]
    }

    pub fn linear_count(&self) -> usize {
        self.linears.len()
    }

    pub fn linear(&self, idx: usize) -> &LinearConstraint {
        &self.linears[idx]
    }

    /// Constraints attached to a variable (binaries and linears).
    pub fn attached(&self, var: usize) -> &[ConstraintRef] {
        &self.attached[var]
    }

    pub fn is_infeasible(&self) -> bool {
        self.c0 >= self.top
    }

    // ------------------------------------------------------------------
    // Cost evaluation
    // ------------------------------------------------------------------

    /// Total cost of a complete assignment, saturating at `top`.
    /// Every `tau[i]` must lie in the current domain of variable `i`.
    pub fn assignment_cost(&self, tau: &[usize]) -> Cost {
        assert_eq!(tau.len(), self.num_vars());
        for (var, &val) in tau.iter().enumerate() {
            debug_assert!(self.present(var, val));
        }
        let mut total = self.c0;
        for (var, &val) in tau.iter().enumerate() {
            total = total.cap_add(self.unary[var][val], self.top);
        }
        for table in &self.binaries {
            total = total.cap_add(table.cost(tau[table.var1], tau[table.var2]), self.top);
        }
        for idx in 0..self.linears.len() {
            let scope_tau: Vec<usize> = self.linears[idx]
                .scope
                .iter()
                .map(|&v| tau[v])
                .collect();
            total = total.cap_add(self.linear_tuple_cost(idx, &scope_tau), self.top);
        }
        total
    }

    /// Cost the linear constraint assigns to a tuple over its scope:
    /// `sum deltas - delta_zero` when the inequality holds, `top` otherwise.
    pub fn linear_tuple_cost(&self, lin: usize, scope_tau: &[usize]) -> Cost {
        let c = &self.linears[lin];
        assert_eq!(scope_tau.len(), c.scope.len());
        let weight: u64 = scope_tau
            .iter()
            .enumerate()
            .map(|(p, &v)| c.weights[p][v])
            .sum();
        if weight < c.capacity {
            return self.top;
        }
        let sum: i128 = scope_tau
            .iter()
            .enumerate()
            .map(|(p, &v)| c.deltas[p][v] as i128)
            .sum::<i128>()
            - c.delta_zero as i128;
        debug_assert!(sum >= 0, "satisfying tuple with negative implied cost");
        Cost::new(sum.max(0).min(self.top.raw() as i128) as u64)
    }

    // ------------------------------------------------------------------
    // Trail
    // ------------------------------------------------------------------

    pub fn save_state(&mut self) -> Marker {
        Marker(self.trail.len())
    }

    pub fn restore(&mut self, marker: Marker) {
        while self.trail.len() > marker.0 {
            match self.trail.pop().unwrap() {
                TrailEvent::Unary { var, val, prev } => self.unary[var][val] = prev,
                TrailEvent::Binary { table, cell, prev } => {
                    self.binaries[table].costs[cell] = prev
                }
                TrailEvent::Delta { lin, pos, val, prev } => {
                    self.linears[lin].deltas[pos][val] = prev
                }
                TrailEvent::DeltaZero { lin, prev } => self.linears[lin].delta_zero = prev,
                TrailEvent::LowerBound { prev } => self.c0 = prev,
                TrailEvent::Removal { var, val } => {
                    self.vars[var].present[val] = true;
                    self.vars[var].count += 1;
                }
            }
        }
    }

    fn write_unary(&mut self, var: usize, val: usize, new: Cost) {
        let prev = self.unary[var][val];
        self.trail.push(TrailEvent::Unary { var, val, prev });
        self.unary[var][val] = new;
    }

    fn write_binary(&mut self, table: usize, cell: usize, new: Cost) {
        let prev = self.binaries[table].costs[cell];
        self.trail.push(TrailEvent::Binary { table, cell, prev });
        self.binaries[table].costs[cell] = new;
    }

    fn write_delta(&mut self, lin: usize, pos: usize, val: usize, new: i64) {
        let prev = self.linears[lin].deltas[pos][val];
        self.trail.push(TrailEvent::Delta { lin, pos, val, prev });
        self.linears[lin].deltas[pos][val] = new;
    }

    fn raise_lower_bound(&mut self, amount: Cost) {
        let prev = self.c0;
        self.trail.push(TrailEvent::LowerBound { prev });
        self.c0 = self.c0.cap_add(amount, self.top);
    }

    /// Marks the problem globally infeasible by pushing `c0` to `top`.
    pub fn set_infeasible(&mut self) {
        let prev = self.c0;
        self.trail.push(TrailEvent::LowerBound { prev });
        self.c0 = self.top;
    }

    /// Removes a value from the current domain. Returns the remaining count.
    pub fn remove_value(&mut self, var: usize, val: usize) -> usize {
        assert!(self.vars[var].present[val]);
        self.vars[var].present[val] = false;
        self.vars[var].count -= 1;
        self.trail.push(TrailEvent::Removal { var, val });
        self.vars[var].count
    }

    /// Restricts a variable to a single value.
    pub fn assign(&mut self, var: usize, val: usize) {
        assert!(self.present(var, val));
        let others: Vec<usize> = self.domain_values(var).filter(|&v| v != val).collect();
        for v in others {
            self.remove_value(var, v);
        }
    }

    // ------------------------------------------------------------------
    // Equivalence-preserving transformations
    // ------------------------------------------------------------------

    /// Moves `alpha` units between the unary table of `var` and a binary
    /// table containing it: positive `alpha` flows table -> unary (projection),
    /// negative unary -> table (extension). The tuples touched range over the
    /// current domain of the other variable.
    pub fn move_cost_binary(&mut self, table: usize, var: usize, val: usize, alpha: i64) {
        if alpha == 0 {
            return;
        }
        let t = &self.binaries[table];
        let pos = t.pos_of(var).expect("variable not in table scope");
        let other = t.other(var);
        let d2 = t.d2;
        let amount = Cost::new(alpha.unsigned_abs());
        let cells: Vec<usize> = self
            .domain_values(other)
            .map(|u| if pos == 0 { val * d2 + u } else { u * d2 + val })
            .collect();
        if alpha > 0 {
            for cell in cells {
                let new = self.binaries[table].costs[cell].sub_below_top(amount, self.top);
                self.write_binary(table, cell, new);
            }
            let new = self.unary[var][val].cap_add(amount, self.top);
            self.write_unary(var, val, new);
        } else {
            let new = self.unary[var][val].sub_below_top(amount, self.top);
            self.write_unary(var, val, new);
            for cell in cells {
                let new = self.binaries[table].costs[cell].cap_add(amount, self.top);
                self.write_binary(table, cell, new);
            }
        }
    }

    /// Projection wrapper: moves `alpha > 0` from the table onto `c_var(val)`.
    pub fn project(&mut self, table: usize, var: usize, val: usize, alpha: Cost) {
        self.move_cost_binary(table, var, val, alpha.raw() as i64);
    }

    /// Extension wrapper: moves `alpha > 0` from `c_var(val)` into the table.
    pub fn extend(&mut self, table: usize, var: usize, val: usize, alpha: Cost) {
        self.move_cost_binary(table, var, val, -(alpha.raw() as i64));
    }

    /// Moves `alpha` from the unary table of `var` to the lower bound,
    /// subtracting it from every value in the current domain.
    pub fn unary_project(&mut self, var: usize, alpha: Cost) {
        if alpha.is_zero() {
            return;
        }
        let vals: Vec<usize> = self.domain_values(var).collect();
        for val in vals {
            let new = self.unary[var][val].sub_below_top(alpha, self.top);
            self.write_unary(var, val, new);
        }
        self.raise_lower_bound(alpha);
    }

    /// Constant-time cost move between `c_var(val)` and a linear constraint:
    /// `c_var(val) += alpha; delta -= alpha`. Positive `alpha` is a
    /// projection out of the constraint, negative an extension into it.
    pub fn lin_move_cost(&mut self, lin: usize, var: usize, val: usize, alpha: i64) {
        if alpha == 0 {
            return;
        }
        let pos = self.linears[lin].pos_of(var).expect("variable not in scope");
        if alpha > 0 {
            let new = self.unary[var][val].cap_add(Cost::new(alpha as u64), self.top);
            self.write_unary(var, val, new);
        } else {
            let new = self.unary[var][val]
                .sub_below_top(Cost::new(alpha.unsigned_abs()), self.top);
            self.write_unary(var, val, new);
        }
        let new_delta = self.linears[lin].deltas[pos][val]
            .checked_sub(alpha)
            .expect("delta overflow");
        self.write_delta(lin, pos, val, new_delta);
    }

    /// Projection wrapper for linear constraints (`alpha > 0`).
    pub fn lin_project(&mut self, lin: usize, var: usize, val: usize, alpha: Cost) {
        self.lin_move_cost(lin, var, val, alpha.raw() as i64);
    }

    /// Extension wrapper for linear constraints (`alpha > 0`).
    pub fn lin_extend(&mut self, lin: usize, var: usize, val: usize, alpha: Cost) {
        self.lin_move_cost(lin, var, val, -(alpha.raw() as i64));
    }

    /// Projects `alpha` from a linear constraint straight to the lower bound.
    /// The caller guarantees every satisfying tuple carries at least `alpha`.
    pub fn lin_project_zero(&mut self, lin: usize, alpha: Cost) {
        if alpha.is_zero() {
            return;
        }
        let prev = self.linears[lin].delta_zero;
        self.trail.push(TrailEvent::DeltaZero { lin, prev });
        self.linears[lin].delta_zero = prev
            .checked_add(alpha.raw())
            .expect("delta_zero overflow");
        self.raise_lower_bound(alpha);
    }

    // ------------------------------------------------------------------
    // Node consistency
    // ------------------------------------------------------------------

    /// Projects each variable's minimum unary cost to the lower bound and
    /// prunes values whose unary cost no longer fits under `top`. Returns
    /// false (with `c0 = top`) on a wipe-out or saturated bound.
    pub fn enforce_nc(&mut self) -> bool {
        for var in 0..self.num_vars() {
            let min = self
                .domain_values(var)
                .map(|v| self.unary[var][v])
                .min()
                .expect("empty domain entering enforce_nc");
            if min > Cost::ZERO {
                let shift = if min >= self.top { self.top } else { min };
                if shift >= self.top {
                    self.set_infeasible();
                    return false;
                }
                self.unary_project(var, shift);
            }
        }
        if self.is_infeasible() {
            return false;
        }
        for var in 0..self.num_vars() {
            let doomed: Vec<usize> = self
                .domain_values(var)
                .filter(|&v| self.c0.cap_add(self.unary[var][v], self.top) >= self.top)
                .collect();
            for val in doomed {
                if self.remove_value(var, val) == 0 {
                    self.set_infeasible();
                    return false;
                }
            }
        }
        true
    }

    /// Largest finite nonzero cost stored in unary or binary tables.
    pub fn max_finite_cost(&self) -> Cost {
        let mut max = Cost::ZERO;
        for var in 0..self.num_vars() {
            for val in 0..self.domain_size(var) {
                let c = self.unary[var][val];
                if c < self.top && c > max {
                    max = c;
                }
            }
        }
        for table in &self.binaries {
            for &c in &table.costs {
                if c < self.top && c > max {
                    max = c;
                }
            }
        }
        max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn assignment_cost_on_chain4() {
        let p = fixtures::chain4();
        // (a,a,a,a): only c_1(a)=1 contributes.
        assert_eq!(p.assignment_cost(&[0, 0, 0, 0]), Cost::new(1));
        // (b,b,a,a): c_23(b,a)=1.
        assert_eq!(p.assignment_cost(&[1, 1, 0, 0]), Cost::new(1));
    }

    #[test]
    fn assignment_cost_of_empty_network_is_lower_bound() {
        let mut p = Cfn::new(Cost::new(100));
        p.add_variable(2);
        p.add_variable(3);
        p.set_lower_bound(Cost::new(7));
        assert_eq!(p.assignment_cost(&[0, 2]), Cost::new(7));
    }

    #[test]
    fn move_cost_extend_on_chain4() {
        let mut p = fixtures::chain4();
        // extend 1 from c_1(a) into c_12: row a of the table gains 1.
        p.extend(0, 0, 0, Cost::new(1));
        assert_eq!(p.unary(0, 0), Cost::ZERO);
        assert_eq!(p.binary(0).cost(0, 0), Cost::new(1));
        assert_eq!(p.binary(0).cost(0, 1), Cost::new(1));
        assert_eq!(p.binary(0).cost(1, 0), Cost::new(1)); // untouched original
    }

    #[test]
    fn zero_move_is_identity() {
        let mut p = fixtures::chain4();
        let before: Vec<Cost> = (0..2).map(|v| p.unary(0, v)).collect();
        p.move_cost_binary(0, 0, 0, 0);
        let after: Vec<Cost> = (0..2).map(|v| p.unary(0, v)).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn lin_move_cost_on_knap6() {
        let mut p = fixtures::knap6();
        // extend 1 from c_1(a) into the big linear constraint.
        p.lin_extend(0, 0, 0, Cost::new(1));
        assert_eq!(p.unary(0, 0), Cost::new(1));
        assert_eq!(p.linear(0).delta(0, 0), 1);
        // project it back: state restored exactly.
        p.lin_project(0, 0, 0, Cost::new(1));
        assert_eq!(p.unary(0, 0), Cost::new(2));
        assert_eq!(p.linear(0).delta(0, 0), 0);
    }

    #[test]
    fn lin_project_zero_moves_bound() {
        let mut p = fixtures::knap6();
        p.lin_project_zero(1, Cost::new(1));
        assert_eq!(p.lower_bound(), Cost::new(1));
        assert_eq!(p.linear(1).delta_zero(), 1);
        p.lin_project_zero(1, Cost::ZERO);
        assert_eq!(p.lower_bound(), Cost::new(1));
    }

    #[test]
    fn linear_tuple_cost_cases() {
        let mut p = fixtures::knap6();
        // Fresh deltas, satisfying tuple of the pair constraint: 0.
        assert_eq!(p.linear_tuple_cost(1, &[0, 0]), Cost::ZERO);
        // Violating tuple: top.
        assert_eq!(p.linear_tuple_cost(1, &[1, 0]), p.top());
        // After moves mirroring the worked reparameterization of knap6:
        p.lin_extend(1, 0, 0, Cost::ZERO);
        let cost = |p: &Cfn| p.linear_tuple_cost(1, &[0, 1]);
        assert_eq!(cost(&p), Cost::ZERO);
        // deltas 1a=1, 4b=1, dz=1 -> tuple (a, b) costs 1.
        p.set_unary(0, 0, Cost::new(3));
        p.lin_extend(1, 0, 0, Cost::new(1));
        p.set_unary(3, 1, Cost::new(1));
        p.lin_extend(1, 3, 1, Cost::new(1));
        p.lin_project_zero(1, Cost::new(1));
        assert_eq!(cost(&p), Cost::new(1));
    }

    #[test]
    fn enforce_nc_projects_minimum() {
        let mut p = Cfn::new(Cost::new(100));
        let x = p.add_variable(2);
        p.set_unary(x, 0, Cost::new(2));
        p.set_unary(x, 1, Cost::new(1));
        assert!(p.enforce_nc());
        assert_eq!(p.unary(x, 0), Cost::new(1));
        assert_eq!(p.unary(x, 1), Cost::ZERO);
        assert_eq!(p.lower_bound(), Cost::new(1));
    }

    #[test]
    fn enforce_nc_prunes_against_top() {
        let mut p = Cfn::new(Cost::new(6));
        let x = p.add_variable(2);
        p.set_unary(x, 1, Cost::new(1));
        p.set_lower_bound(Cost::new(5));
        assert!(p.enforce_nc());
        assert!(p.present(x, 0));
        assert!(!p.present(x, 1));
    }

    #[test]
    fn enforce_nc_is_idempotent() {
        let mut p = fixtures::knap6();
        assert!(p.enforce_nc());
        let lb = p.lower_bound();
        let dom: Vec<usize> = (0..p.num_vars()).map(|v| p.domain_count(v)).collect();
        assert!(p.enforce_nc());
        assert_eq!(p.lower_bound(), lb);
        let dom2: Vec<usize> = (0..p.num_vars()).map(|v| p.domain_count(v)).collect();
        assert_eq!(dom, dom2);
    }

    #[test]
    fn trail_restores_everything() {
        let mut p = fixtures::knap6();
        let mark = p.save_state();
        p.lin_extend(0, 0, 0, Cost::new(2));
        p.unary_project(5, Cost::ZERO);
        p.remove_value(1, 1);
        p.lin_project_zero(2, Cost::new(1));
        p.restore(mark);
        assert_eq!(p.unary(0, 0), Cost::new(2));
        assert_eq!(p.linear(0).delta(0, 0), 0);
        assert!(p.present(1, 1));
        assert_eq!(p.lower_bound(), Cost::ZERO);
        assert_eq!(p.linear(2).delta_zero(), 0);
    }
}
