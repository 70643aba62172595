//! Small hand-built instances used across tests and as CLI demo input.

use crate::cost::Cost;
use crate::model::Cfn;

/// Four Boolean-domain variables chained by three binary tables, plus two
/// unary costs. The minimum assignment cost is 1 and cost-move propagation
/// at threshold 1 can prove it.
///
/// Value 0 plays the role of `a`, value 1 of `b`.
pub fn chain4() -> Cfn {
    let mut p = Cfn::new(Cost::new(1000));
    for _ in 0..4 {
        p.add_variable(2);
    }
    p.set_unary(0, 0, Cost::new(1)); // c_1(a) = 1
    p.set_unary(3, 1, Cost::new(1)); // c_4(b) = 1
    let mut t = vec![Cost::ZERO; 4];
    t[1 * 2 + 0] = Cost::new(1); // (b, a) = 1
    p.add_binary(0, 1, t.clone());
    p.add_binary(1, 2, t.clone());
    p.add_binary(2, 3, t);
    p
}

/// Six Boolean-domain variables under three linear inequalities and three
/// unary costs of 2. One-at-a-time linear propagation gains nothing here,
/// while threshold-1 conflict analysis proves a lower bound of 1. The
/// integer optimum is 2.
pub fn knap6() -> Cfn {
    let mut p = Cfn::new(Cost::new(1000));
    for _ in 0..6 {
        p.add_variable(2);
    }
    p.set_unary(0, 0, Cost::new(2)); // c_1(a)
    p.set_unary(2, 0, Cost::new(2)); // c_3(a)
    p.set_unary(5, 0, Cost::new(2)); // c_6(a)

    // 7 x_1a + 7 x_2a + 3 x_3a + 3 x_4a + 3 x_5a >= 10
    p.add_linear(
        vec![0, 1, 2, 3, 4],
        vec![
            vec![7, 0],
            vec![7, 0],
            vec![3, 0],
            vec![3, 0],
            vec![3, 0],
        ],
        10,
    );
    // x_1a + x_4b >= 1
    p.add_linear(vec![0, 3], vec![vec![1, 0], vec![0, 1]], 1);
    // x_2b + x_4a + 2 x_6a >= 1
    p.add_linear(vec![1, 3, 5], vec![vec![0, 1], vec![1, 0], vec![2, 0]], 1);
    p
}
