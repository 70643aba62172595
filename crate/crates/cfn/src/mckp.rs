//! Exact rational solver for the linear relaxation of multiple-choice
//! knapsack subproblems: one item per class, total weight at least the
//! capacity, minimize total cost minus a constant offset.
//!
//! The solver works on the per-class lower convex hulls of (weight, cost)
//! points and sweeps upgrade steps by increasing incremental efficiency.
//! It returns an optimal primal together with a dual and reduced costs for
//! every item, including fixed and forbidden ones: reduced costs of
//! forbidden items are computed against their original right-hand side, so
//! they may be negative, which is exactly the signal conflict explanations
//! look for.

use num_rational::Ratio;

use crate::model::Cfn;

pub type Rat = Ratio<i128>;

pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

#[derive(Clone, Debug)]
pub struct MckpItem {
    pub value: usize,
    pub weight: u64,
    pub cost: Rat,
}

#[derive(Clone, Debug)]
pub struct MckpClass {
    pub var: usize,
    pub items: Vec<MckpItem>,
}

/// One LP instance. `forced[i]` pins class `i` to a single item (by item
/// index); `forbidden[i][j]` excludes item `j`. A forced item wins over its
/// own forbidden flag.
#[derive(Clone, Debug)]
pub struct MckpInstance {
    pub classes: Vec<MckpClass>,
    pub capacity: u64,
    pub delta_zero: Rat,
    pub forced: Vec<Option<usize>>,
    pub forbidden: Vec<Vec<bool>>,
}

impl MckpInstance {
    pub fn new(capacity: u64, delta_zero: Rat) -> MckpInstance {
        MckpInstance {
            classes: Vec::new(),
            capacity,
            delta_zero,
            forced: Vec::new(),
            forbidden: Vec::new(),
        }
    }

    pub fn add_class(&mut self, var: usize) -> usize {
        self.classes.push(MckpClass {
            var,
            items: Vec::new(),
        });
        self.forced.push(None);
        self.forbidden.push(Vec::new());
        self.classes.len() - 1
    }

    pub fn add_item(&mut self, class: usize, value: usize, weight: u64, cost: Rat) -> usize {
        self.classes[class].items.push(MckpItem {
            value,
            weight,
            cost,
        });
        self.forbidden[class].push(false);
        self.classes[class].items.len() - 1
    }

    pub fn forbid(&mut self, class: usize, item: usize) {
        self.forbidden[class][item] = true;
    }

    pub fn force(&mut self, class: usize, item: usize) {
        self.forced[class] = Some(item);
    }

    pub fn item_index(&self, class: usize, value: usize) -> Option<usize> {
        self.classes[class].items.iter().position(|it| it.value == value)
    }

    /// The relaxation of a linear constraint over the current domains of
    /// its scope: one class per variable, one item per domain value, costs
    /// from the delta costs plus optionally the unary costs.
    pub fn from_linear(p: &Cfn, lin: usize, include_unary: bool) -> MckpInstance {
        let c = p.linear(lin);
        let mut inst = MckpInstance::new(c.capacity(), rat(c.delta_zero() as i128));
        for (pos, &var) in c.scope().iter().enumerate() {
            let class = inst.add_class(var);
            for val in p.domain_values(var) {
                let mut cost = rat(c.delta(pos, val) as i128);
                if include_unary {
                    cost += rat(p.unary(var, val).raw() as i128);
                }
                inst.add_item(class, val, c.weight(pos, val), cost);
            }
        }
        inst
    }

    fn is_allowed(&self, class: usize, item: usize) -> bool {
        match self.forced[class] {
            Some(f) => item == f,
            None => !self.forbidden[class][item],
        }
    }

    /// Items the dual constraints must respect: everything not forbidden,
    /// plus a forced item regardless of its flag.
    fn in_dual_scope(&self, class: usize, item: usize) -> bool {
        !self.forbidden[class][item] || self.forced[class] == Some(item)
    }

    /// Maximum total weight achievable under the fixings, or None when some
    /// class has no item left.
    pub fn max_weight(&self) -> Option<u64> {
        let mut total: u64 = 0;
        for (i, class) in self.classes.iter().enumerate() {
            let m = (0..class.items.len())
                .filter(|&j| self.is_allowed(i, j))
                .map(|j| class.items[j].weight)
                .max()?;
            total += m;
        }
        Some(total)
    }

    pub fn has_forced(&self) -> bool {
        self.forced.iter().any(|f| f.is_some())
    }
}

/// Primal/dual solution with reduced costs for every (class, item).
#[derive(Clone, Debug)]
pub struct LpResult {
    pub feasible: bool,
    pub z_star: Rat,
    pub primal: Vec<Vec<Rat>>,
    pub y_cc: Rat,
    pub y: Vec<Rat>,
    pub reduced: Vec<Vec<Rat>>,
}

impl LpResult {
    fn infeasible(inst: &MckpInstance) -> LpResult {
        LpResult {
            feasible: false,
            z_star: rat(0),
            primal: Vec::new(),
            y_cc: rat(0),
            y: vec![rat(0); inst.classes.len()],
            reduced: Vec::new(),
        }
    }

    pub fn reduced_cost(&self, class: usize, item: usize) -> Rat {
        self.reduced[class][item]
    }
}

#[derive(Clone, Copy)]
struct HullPoint {
    item: usize,
    weight: u64,
    cost: Rat,
}

fn slope(a: &HullPoint, b: &HullPoint) -> Rat {
    (b.cost - a.cost) / rat((b.weight - a.weight) as i128)
}

/// Lower convex hull of the allowed items of one class, starting at the
/// cheapest (heaviest on ties) item and climbing by weight.
fn class_hull(inst: &MckpInstance, class: usize) -> Vec<HullPoint> {
    let items = &inst.classes[class].items;
    let allowed: Vec<usize> = (0..items.len())
        .filter(|&j| inst.is_allowed(class, j))
        .collect();
    debug_assert!(!allowed.is_empty());
    // Base: min cost, then max weight, then lowest index.
    let base = *allowed
        .iter()
        .min_by(|&&a, &&b| {
            items[a]
                .cost
                .cmp(&items[b].cost)
                .then(items[b].weight.cmp(&items[a].weight))
                .then(a.cmp(&b))
        })
        .unwrap();
    let mut hull = vec![HullPoint {
        item: base,
        weight: items[base].weight,
        cost: items[base].cost,
    }];
    let mut ups: Vec<usize> = allowed
        .into_iter()
        .filter(|&j| items[j].weight > items[base].weight)
        .collect();
    ups.sort_by(|&a, &b| {
        items[a]
            .weight
            .cmp(&items[b].weight)
            .then(items[a].cost.cmp(&items[b].cost))
            .then(a.cmp(&b))
    });
    for j in ups {
        let p = HullPoint {
            item: j,
            weight: items[j].weight,
            cost: items[j].cost,
        };
        if p.weight <= hull.last().unwrap().weight {
            continue;
        }
        // Upgrades are strictly costlier than the base, so this never empties.
        while hull.last().unwrap().cost >= p.cost {
            hull.pop();
        }
        while hull.len() >= 2 {
            let s1 = slope(&hull[hull.len() - 2], &hull[hull.len() - 1]);
            let s2 = slope(hull.last().unwrap(), &p);
            if s1 >= s2 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Solves the LP relaxation exactly. Infeasibility means the maximum
/// achievable weight under the fixings is below the capacity.
pub fn solve_mckp_lp(inst: &MckpInstance) -> LpResult {
    let n = inst.classes.len();
    let max_w = match inst.max_weight() {
        Some(w) => w,
        None => return LpResult::infeasible(inst),
    };
    if max_w < inst.capacity {
        return LpResult::infeasible(inst);
    }

    let hulls: Vec<Vec<HullPoint>> = (0..n).map(|i| class_hull(inst, i)).collect();
    let mut current: Vec<usize> = vec![0; n]; // hull position per class
    let base_weight: u64 = hulls.iter().map(|h| h[0].weight).sum();

    struct Step {
        efficiency: Rat,
        class: usize,
        hull_pos: usize, // step from hull_pos to hull_pos + 1
    }
    let mut steps: Vec<Step> = Vec::new();
    for (i, h) in hulls.iter().enumerate() {
        for k in 0..h.len().saturating_sub(1) {
            steps.push(Step {
                efficiency: slope(&h[k], &h[k + 1]),
                class: i,
                hull_pos: k,
            });
        }
    }
    steps.sort_by(|a, b| {
        a.efficiency
            .cmp(&b.efficiency)
            .then(a.class.cmp(&b.class))
            .then(a.hull_pos.cmp(&b.hull_pos))
    });

    let mut y_cc = rat(0);
    let mut fractional: Option<(usize, usize, Rat)> = None; // class, lower hull pos, frac of upper
    if base_weight < inst.capacity {
        let mut need = inst.capacity - base_weight;
        for step in &steps {
            let lo = hulls[step.class][step.hull_pos];
            let hi = hulls[step.class][step.hull_pos + 1];
            let dw = hi.weight - lo.weight;
            if need >= dw {
                current[step.class] = step.hull_pos + 1;
                need -= dw;
                y_cc = step.efficiency;
                if need == 0 {
                    break;
                }
            } else {
                let f = Rat::new(need as i128, dw as i128);
                fractional = Some((step.class, step.hull_pos, f));
                y_cc = step.efficiency;
                need = 0;
                break;
            }
        }
        assert_eq!(need, 0, "max-weight screen guarantees the sweep completes");
    }

    let mut primal: Vec<Vec<Rat>> = inst
        .classes
        .iter()
        .map(|c| vec![rat(0); c.items.len()])
        .collect();
    let mut z = -inst.delta_zero;
    for i in 0..n {
        match fractional {
            Some((fc, pos, f)) if fc == i => {
                let lo = hulls[i][pos];
                let hi = hulls[i][pos + 1];
                primal[i][lo.item] = rat(1) - f;
                primal[i][hi.item] = f;
                z += lo.cost * (rat(1) - f) + hi.cost * f;
            }
            _ => {
                let p = hulls[i][current[i]];
                primal[i][p.item] = rat(1);
                z += p.cost;
            }
        }
    }

    let mut y: Vec<Rat> = Vec::with_capacity(n);
    for (i, class) in inst.classes.iter().enumerate() {
        let m = (0..class.items.len())
            .filter(|&j| inst.in_dual_scope(i, j))
            .map(|j| class.items[j].cost - rat(class.items[j].weight as i128) * y_cc)
            .min()
            .expect("dual scope never empty");
        y.push(m);
    }
    let reduced: Vec<Vec<Rat>> = inst
        .classes
        .iter()
        .enumerate()
        .map(|(i, class)| {
            class
                .items
                .iter()
                .map(|it| it.cost - rat(it.weight as i128) * y_cc - y[i])
                .collect()
        })
        .collect();

    LpResult {
        feasible: true,
        z_star: z,
        primal,
        y_cc,
        y,
        reduced,
    }
}

/// Exact certificate check: primal feasibility, dual feasibility and
/// complementary slackness over the dual scope, and strong duality when no
/// class is forced. For an infeasible result, verifies the infeasibility
/// claim itself and reports true vacuously.
pub fn check_lp_certificate(inst: &MckpInstance, res: &LpResult) -> bool {
    if !res.feasible {
        return match inst.max_weight() {
            None => true,
            Some(w) => w < inst.capacity,
        };
    }
    let n = inst.classes.len();
    if res.primal.len() != n || res.reduced.len() != n || res.y.len() != n {
        return false;
    }
    let mut weight = rat(0);
    let mut cost = -inst.delta_zero;
    let mut fractional_classes = 0usize;
    for (i, class) in inst.classes.iter().enumerate() {
        if res.primal[i].len() != class.items.len() {
            return false;
        }
        let mut sum = rat(0);
        let mut frac_here = 0usize;
        for (j, it) in class.items.iter().enumerate() {
            let x = res.primal[i][j];
            if x < rat(0) || x > rat(1) {
                return false;
            }
            if !inst.is_allowed(i, j) && x != rat(0) {
                return false;
            }
            if x != rat(0) && x != rat(1) {
                frac_here += 1;
            }
            sum += x;
            weight += x * rat(it.weight as i128);
            cost += x * it.cost;
        }
        if sum != rat(1) {
            return false;
        }
        if let Some(f) = inst.forced[i] {
            if res.primal[i][f] != rat(1) {
                return false;
            }
        }
        if frac_here > 0 {
            if frac_here != 2 {
                return false;
            }
            fractional_classes += 1;
        }
    }
    if fractional_classes > 1 || weight < rat(inst.capacity as i128) || cost != res.z_star {
        return false;
    }
    if res.y_cc < rat(0) {
        return false;
    }
    for (i, class) in inst.classes.iter().enumerate() {
        for (j, it) in class.items.iter().enumerate() {
            let rc = it.cost - rat(it.weight as i128) * res.y_cc - res.y[i];
            if rc != res.reduced[i][j] {
                return false;
            }
            if inst.in_dual_scope(i, j) && rc < rat(0) {
                return false;
            }
            // Complementary slackness outside forced classes.
            if inst.forced[i].is_none() && res.primal[i][j] > rat(0) && rc != rat(0) {
                return false;
            }
        }
    }
    if res.y_cc > rat(0) && weight != rat(inst.capacity as i128) {
        return false;
    }
    if !inst.has_forced() {
        let dual_obj = rat(inst.capacity as i128) * res.y_cc + res.y.iter().sum::<Rat>()
            - inst.delta_zero;
        if dual_obj != res.z_star {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two classes, capacity 4: the optimum splits class 1 across its two
    /// items. All values here were frozen from the vertex-enumeration
    /// reference in cfn-oracle.
    fn split_instance() -> MckpInstance {
        let mut inst = MckpInstance::new(4, rat(0));
        let c1 = inst.add_class(0);
        inst.add_item(c1, 0, 3, rat(2));
        inst.add_item(c1, 1, 0, rat(0));
        let c2 = inst.add_class(1);
        inst.add_item(c2, 0, 2, rat(1));
        inst.add_item(c2, 1, 0, rat(0));
        inst
    }

    #[test]
    fn fractional_optimum_with_duals() {
        let inst = split_instance();
        let res = solve_mckp_lp(&inst);
        assert!(res.feasible);
        assert_eq!(res.z_star, Rat::new(7, 3));
        assert_eq!(res.primal[0][0], Rat::new(2, 3));
        assert_eq!(res.primal[0][1], Rat::new(1, 3));
        assert_eq!(res.primal[1][0], rat(1));
        assert_eq!(res.y_cc, Rat::new(2, 3));
        assert_eq!(res.y[0], rat(0));
        assert_eq!(res.y[1], Rat::new(-1, 3));
        assert_eq!(res.reduced[0][0], rat(0));
        assert_eq!(res.reduced[0][1], rat(0));
        assert_eq!(res.reduced[1][0], rat(0));
        assert_eq!(res.reduced[1][1], Rat::new(1, 3));
        assert!(check_lp_certificate(&inst, &res));
    }

    #[test]
    fn knap6_big_constraint_unary_mode_gains_nothing() {
        // Weights of the five-variable constraint with the unary costs
        // of knap6 folded in: capacity reachable at zero cost.
        let mut inst = MckpInstance::new(10, rat(0));
        let data: [(u64, i128); 5] = [(7, 2), (7, 0), (3, 2), (3, 0), (3, 0)];
        for (i, (w, c)) in data.iter().enumerate() {
            let cl = inst.add_class(i);
            inst.add_item(cl, 0, *w, rat(*c));
            inst.add_item(cl, 1, 0, rat(0));
        }
        let res = solve_mckp_lp(&inst);
        assert!(res.feasible);
        assert_eq!(res.z_star, rat(0));
        assert!(check_lp_certificate(&inst, &res));
    }

    #[test]
    fn capacity_beyond_total_weight_is_infeasible() {
        let mut inst = split_instance();
        inst.capacity = 6;
        let res = solve_mckp_lp(&inst);
        assert!(!res.feasible);
        assert!(check_lp_certificate(&inst, &res));
    }

    #[test]
    fn zero_capacity_takes_class_minima() {
        let mut inst = split_instance();
        inst.capacity = 0;
        let res = solve_mckp_lp(&inst);
        assert_eq!(res.z_star, rat(0));
        assert_eq!(res.y_cc, rat(0));
        assert!(check_lp_certificate(&inst, &res));
    }

    #[test]
    fn perturbed_dual_fails_certificate() {
        let inst = split_instance();
        let mut res = solve_mckp_lp(&inst);
        res.y_cc += rat(1);
        assert!(!check_lp_certificate(&inst, &res));
    }

    #[test]
    fn identical_instances_solve_identically() {
        let inst = split_instance();
        let a = solve_mckp_lp(&inst);
        let b = solve_mckp_lp(&inst);
        assert_eq!(a.z_star, b.z_star);
        assert_eq!(a.primal, b.primal);
        assert_eq!(a.y, b.y);
        assert_eq!(a.y_cc, b.y_cc);
    }

    #[test]
    fn forced_and_forbidden_items_get_reduced_costs() {
        let mut inst = split_instance();
        inst.force(0, 1); // pin class 0 to its light item
        inst.forbid(1, 1);
        let res = solve_mckp_lp(&inst);
        // capacity 4 now unreachable: 0 + 2 < 4.
        assert!(!res.feasible);
        inst.capacity = 2;
        let res = solve_mckp_lp(&inst);
        assert!(res.feasible);
        assert_eq!(res.z_star, rat(1));
        // Reduced costs exist for every item, including the pinned-out one.
        assert_eq!(res.reduced[0].len(), 2);
        assert!(check_lp_certificate(&inst, &res));
    }
}
