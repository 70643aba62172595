//! Independent brute-force references used to check the solver: exhaustive
//! optimum over complete assignments, vertex enumeration for the knapsack
//! LP relaxation, and reparameterization equivalence. Everything here
//! re-derives costs from the raw network data and shares no propagation
//! code with the solver. Oracles refuse oversized inputs instead of
//! approximating.

use cfn::cost::Cost;
use cfn::mckp::{rat, MckpInstance, Rat};
use cfn::model::Cfn;

/// Enumeration cap. Oracles return `BudgetExceeded` rather than sample.
#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    pub max_tuples: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_tuples: 1_000_000,
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum OracleError {
    BudgetExceeded,
    StructureMismatch,
}

/// Re-derives the cost of a complete assignment straight from the stored
/// tables and deltas, without calling into the solver's evaluation path.
pub fn tuple_cost(p: &Cfn, tau: &[usize]) -> Cost {
    let top = p.top();
    let mut total = p.lower_bound();
    for (var, &val) in tau.iter().enumerate() {
        total = total.cap_add(p.unary(var, val), top);
    }
    for t in 0..p.binary_count() {
        let table = p.binary(t);
        let (v1, v2) = table.vars();
        total = total.cap_add(table.cost(tau[v1], tau[v2]), top);
    }
    for l in 0..p.linear_count() {
        let c = p.linear(l);
        let mut weight: u64 = 0;
        let mut deltas: i128 = 0;
        for (pos, &var) in c.scope().iter().enumerate() {
            weight += c.weight(pos, tau[var]);
            deltas += c.delta(pos, tau[var]) as i128;
        }
        let tuple = if weight >= c.capacity() {
            let implied = deltas - c.delta_zero() as i128;
            Cost::new(implied.max(0).min(top.raw() as i128) as u64)
        } else {
            top
        };
        total = total.cap_add(tuple, top);
    }
    total
}

fn tuple_space(p: &Cfn, budget: OracleBudget) -> Result<Vec<Vec<usize>>, OracleError> {
    let mut size: u64 = 1;
    let mut domains = Vec::with_capacity(p.num_vars());
    for var in 0..p.num_vars() {
        let values: Vec<usize> = p.domain_values(var).collect();
        size = size.saturating_mul(values.len() as u64);
        if size > budget.max_tuples {
            return Err(OracleError::BudgetExceeded);
        }
        domains.push(values);
    }
    Ok(domains)
}

fn for_each_tuple<F: FnMut(&[usize])>(domains: &[Vec<usize>], mut f: F) {
    let n = domains.len();
    let mut idx = vec![0usize; n];
    let mut tau: Vec<usize> = domains.iter().map(|d| d[0]).collect();
    loop {
        f(&tau);
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            if idx[pos] + 1 < domains[pos].len() {
                idx[pos] += 1;
                tau[pos] = domains[pos][idx[pos]];
                break;
            }
            idx[pos] = 0;
            tau[pos] = domains[pos][0];
            if pos == 0 {
                return;
            }
        }
        if n == 0 {
            return;
        }
    }
}

/// Exact minimum of the assignment cost over the current domains.
pub fn brute_force_optimum(p: &Cfn, budget: OracleBudget) -> Result<Cost, OracleError> {
    let domains = tuple_space(p, budget)?;
    let mut best = p.top();
    for_each_tuple(&domains, |tau| {
        let c = tuple_cost(p, tau);
        if c < best {
            best = c;
        }
    });
    Ok(best)
}

/// Minimizing assignment along with its cost.
pub fn brute_force_argmin(
    p: &Cfn,
    budget: OracleBudget,
) -> Result<(Vec<usize>, Cost), OracleError> {
    let domains = tuple_space(p, budget)?;
    let mut best = p.top();
    let mut arg: Vec<usize> = domains.iter().map(|d| d[0]).collect();
    for_each_tuple(&domains, |tau| {
        let c = tuple_cost(p, tau);
        if c < best {
            best = c;
            arg = tau.to_vec();
        }
    });
    Ok((arg, best))
}

/// True iff both networks assign the same total cost to every complete
/// assignment over their (identical) current domains.
pub fn check_reparam_equiv(
    a: &Cfn,
    b: &Cfn,
    budget: OracleBudget,
) -> Result<bool, OracleError> {
    if a.num_vars() != b.num_vars()
        || a.top() != b.top()
        || a.binary_count() != b.binary_count()
        || a.linear_count() != b.linear_count()
    {
        return Err(OracleError::StructureMismatch);
    }
    for var in 0..a.num_vars() {
        let da: Vec<usize> = a.domain_values(var).collect();
        let db: Vec<usize> = b.domain_values(var).collect();
        if da != db {
            return Err(OracleError::StructureMismatch);
        }
    }
    let domains = tuple_space(a, budget)?;
    let mut equal = true;
    for_each_tuple(&domains, |tau| {
        if equal && tuple_cost(a, tau) != tuple_cost(b, tau) {
            equal = false;
        }
    });
    Ok(equal)
}

/// Outcome of the LP vertex enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MckpOracle {
    Infeasible,
    Optimum(Rat),
}

/// Enumerates all candidate vertices of the LP relaxation: every integer
/// choice combination, plus, for each class and each ordered pair of its
/// items, the point that makes the knapsack constraint tight with the other
/// classes integral. Returns the feasible minimum.
pub fn brute_force_mckp(inst: &MckpInstance, budget: OracleBudget) -> Result<MckpOracle, OracleError> {
    let n = inst.classes.len();
    let mut allowed: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut item_count: u64 = 0;
    for (i, class) in inst.classes.iter().enumerate() {
        let a: Vec<usize> = (0..class.items.len())
            .filter(|&j| match inst.forced[i] {
                Some(f) => j == f,
                None => !inst.forbidden[i][j],
            })
            .collect();
        if a.is_empty() {
            return Ok(MckpOracle::Infeasible);
        }
        item_count += class.items.len() as u64;
        allowed.push(a);
    }
    if item_count > 64 {
        return Err(OracleError::BudgetExceeded);
    }
    let mut combos: u64 = 1;
    for a in &allowed {
        combos = combos.saturating_mul(a.len() as u64);
        if combos > budget.max_tuples {
            return Err(OracleError::BudgetExceeded);
        }
    }

    let mut best: Option<Rat> = None;
    let mut consider = |cand: Rat| {
        if best.map_or(true, |b| cand < b) {
            best = Some(cand);
        }
    };

    let domains: Vec<Vec<usize>> = allowed.clone();
    for_each_tuple(&domains, |choice| {
        // choice[i] is an item index of class i.
        let weight: u64 = choice
            .iter()
            .enumerate()
            .map(|(i, &j)| inst.classes[i].items[j].weight)
            .sum();
        let cost: Rat = choice
            .iter()
            .enumerate()
            .map(|(i, &j)| inst.classes[i].items[j].cost)
            .sum::<Rat>()
            - inst.delta_zero;
        if weight >= inst.capacity {
            consider(cost);
        }
        // Split one class fractionally across each of its item pairs so the
        // knapsack constraint becomes tight.
        for (i, items) in allowed.iter().enumerate() {
            let rest_weight = weight - inst.classes[i].items[choice[i]].weight;
            let rest_cost =
                cost - inst.classes[i].items[choice[i]].cost;
            for (ai, &ja) in items.iter().enumerate() {
                for &jb in items.iter().skip(ai + 1) {
                    let (wa, ca) = (
                        inst.classes[i].items[ja].weight,
                        inst.classes[i].items[ja].cost,
                    );
                    let (wb, cb) = (
                        inst.classes[i].items[jb].weight,
                        inst.classes[i].items[jb].cost,
                    );
                    if wa == wb {
                        continue;
                    }
                    // x on ja, 1-x on jb with rest + x*wa + (1-x)*wb == C.
                    let num = rat(inst.capacity as i128)
                        - rat(rest_weight as i128)
                        - rat(wb as i128);
                    let den = rat(wa as i128) - rat(wb as i128);
                    let x = num / den;
                    if x < rat(0) || x > rat(1) {
                        continue;
                    }
                    consider(rest_cost + x * ca + (rat(1) - x) * cb);
                }
            }
        }
    });

    Ok(match best {
        Some(b) => MckpOracle::Optimum(b),
        None => MckpOracle::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfn::fixtures;

    #[test]
    fn chain4_optimum_is_one() {
        let p = fixtures::chain4();
        let opt = brute_force_optimum(&p, OracleBudget::default()).unwrap();
        assert_eq!(opt, Cost::new(1));
    }

    #[test]
    fn knap6_optimum_is_two() {
        let p = fixtures::knap6();
        let opt = brute_force_optimum(&p, OracleBudget::default()).unwrap();
        assert_eq!(opt, Cost::new(2));
    }

    #[test]
    fn all_forbidden_instance_reports_top() {
        let mut p = Cfn::new(Cost::new(50));
        let x = p.add_variable(2);
        let y = p.add_variable(2);
        p.add_binary(x, y, vec![Cost::new(50); 4]);
        let opt = brute_force_optimum(&p, OracleBudget::default()).unwrap();
        assert_eq!(opt, p.top());
    }

    #[test]
    fn budget_is_respected() {
        let mut p = Cfn::new(Cost::new(10));
        for _ in 0..4 {
            p.add_variable(10);
        }
        let tight = OracleBudget { max_tuples: 100 };
        assert_eq!(
            brute_force_optimum(&p, tight).unwrap_err(),
            OracleError::BudgetExceeded
        );
    }

    #[test]
    fn vertex_enumeration_matches_frozen_example() {
        let mut inst = MckpInstance::new(4, rat(0));
        let c1 = inst.add_class(0);
        inst.add_item(c1, 0, 3, rat(2));
        inst.add_item(c1, 1, 0, rat(0));
        let c2 = inst.add_class(1);
        inst.add_item(c2, 0, 2, rat(1));
        inst.add_item(c2, 1, 0, rat(0));
        assert_eq!(
            brute_force_mckp(&inst, OracleBudget::default()).unwrap(),
            MckpOracle::Optimum(Rat::new(7, 3))
        );
    }

    #[test]
    fn zero_capacity_sums_class_minima() {
        let mut inst = MckpInstance::new(0, rat(2));
        let c1 = inst.add_class(0);
        inst.add_item(c1, 0, 3, rat(4));
        inst.add_item(c1, 1, 0, rat(1));
        let c2 = inst.add_class(1);
        inst.add_item(c2, 0, 2, rat(5));
        assert_eq!(
            brute_force_mckp(&inst, OracleBudget::default()).unwrap(),
            MckpOracle::Optimum(rat(4)) // 1 + 5 - 2
        );
    }

    #[test]
    fn unreachable_capacity_is_infeasible() {
        let mut inst = MckpInstance::new(9, rat(0));
        let c1 = inst.add_class(0);
        inst.add_item(c1, 0, 3, rat(0));
        assert_eq!(
            brute_force_mckp(&inst, OracleBudget::default()).unwrap(),
            MckpOracle::Infeasible
        );
    }

    #[test]
    fn equivalence_detects_corruption() {
        let a = fixtures::chain4();
        let mut b = fixtures::chain4();
        assert!(check_reparam_equiv(&a, &b, OracleBudget::default()).unwrap());
        b.set_unary(2, 0, Cost::new(3));
        assert!(!check_reparam_equiv(&a, &b, OracleBudget::default()).unwrap());
    }
}
