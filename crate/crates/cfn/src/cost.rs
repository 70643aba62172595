use std::fmt;

/// A non-negative integer cost. Each problem designates a finite ceiling
/// `top` that stands for "forbidden"; additions saturate there and `top`
/// itself is never decremented (a forbidden tuple stays forbidden).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    pub fn new(value: u64) -> Cost {
        Cost(value)
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `a + b` capped at `top`.
    pub fn cap_add(self, other: Cost, top: Cost) -> Cost {
        Cost(self.0.saturating_add(other.0).min(top.0))
    }

    /// `self - amount`, with `top` absorbing: subtracting from a forbidden
    /// entry leaves it forbidden. Panics if a finite cost would go negative;
    /// that is a contract violation in the caller, not a recoverable state.
    pub fn sub_below_top(self, amount: Cost, top: Cost) -> Cost {
        if self >= top {
            return top;
        }
        assert!(
            self.0 >= amount.0,
            "cost move would drive a stored cost negative ({} - {})",
            self.0,
            amount.0
        );
        Cost(self.0 - amount.0)
    }

    pub fn checked_mul(self, factor: u64) -> Cost {
        Cost(self.0.checked_mul(factor).expect("cost overflow"))
    }
}

impl From<u64> for Cost {
    fn from(value: u64) -> Cost {
        Cost(value)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_saturates_at_top() {
        let top = Cost::new(10);
        assert_eq!(top.cap_add(Cost::new(3), top), top);
        assert_eq!(Cost::new(7).cap_add(Cost::new(7), top), top);
        assert_eq!(Cost::new(2).cap_add(Cost::new(3), top), Cost::new(5));
    }

    #[test]
    fn top_absorbs_subtraction() {
        let top = Cost::new(10);
        assert_eq!(top.sub_below_top(Cost::new(4), top), top);
        assert_eq!(Cost::new(5).sub_below_top(Cost::new(5), top), Cost::ZERO);
    }

    #[test]
    #[should_panic(expected = "negative")]
    fn underflow_is_a_contract_error() {
        let top = Cost::new(10);
        let _ = Cost::new(1).sub_below_top(Cost::new(2), top);
    }
}
