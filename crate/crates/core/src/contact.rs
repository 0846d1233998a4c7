//! Fractional contact orders `l = k/r`, the bracket `[l]`, ordered
//! partitions of a divisor pairing into contact orders, and automorphism
//! counts of relative-insertion multisets.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inertia::ClassCatalog;
use crate::rational::{fmt_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContactError {
    #[error("contact order needs positive k and r, got k={k}, r={r}")]
    NonPositive { k: u64, r: u64 },
    #[error("the bracket is only defined for positive values, got {0}")]
    Domain(String),
    #[error("unknown monodromy class `{0}`")]
    UnknownClass(String),
    #[error("contact order {order} has r={r} but monodromy ({class}) has order {class_order}")]
    OrderMismatch { order: String, r: u64, class: String, class_order: u64 },
}

/// A fractional contact order: lowest nonzero degree `k` of the normal
/// component of the lift, over the monodromy order `r`.
///
/// `k/r` is not reduced: `2/2` and `1/1` have the same value but different
/// monodromy orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContactOrder {
    pub k: u64,
    pub r: u64,
}

impl ContactOrder {
    pub fn new(k: u64, r: u64) -> Result<Self, ContactError> {
        if k == 0 || r == 0 {
            return Err(ContactError::NonPositive { k, r });
        }
        Ok(ContactOrder { k, r })
    }

    /// Integer contact order with trivial monodromy.
    pub fn smooth(k: u64) -> Self {
        ContactOrder { k, r: 1 }
    }

    pub fn value(&self) -> Q {
        Q::new(self.k as i64, self.r as i64)
    }
}

impl fmt::Display for ContactOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.k, self.r)
    }
}

/// `[l] = floor(l)` for `l > 0`, so `[2] = 2` and `[3/2] = 1`.
pub fn floor_bracket(l: &Q) -> Result<i64, ContactError> {
    if !l.is_positive() {
        return Err(ContactError::Domain(fmt_q(l)));
    }
    Ok(l.floor().to_integer())
}

/// Whether the contact values add up to `total` exactly.
pub fn contact_sum_check(orders: &[ContactOrder], total: &Q) -> bool {
    orders.iter().fold(Q::zero(), |acc, o| acc + o.value()) == *total
}

/// All ordered tuples `(l_1, ..., l_k)` with `l_j` in `(1/r_j) Z_{>0}`
/// summing to `total`, in lexicographic order of values.
///
/// Numerators are bounded by `total * r_j`; an infeasible total gives an
/// empty list.
pub fn enumerate_partitions(total: &Q, slot_orders: &[u64]) -> Vec<Vec<ContactOrder>> {
    let mut out = Vec::new();
    if !total.is_positive() || slot_orders.is_empty() || slot_orders.contains(&0) {
        return out;
    }
    let mut prefix = Vec::with_capacity(slot_orders.len());
    partitions_rec(*total, slot_orders, &mut prefix, &mut out);
    out
}

fn partitions_rec(
    remaining: Q,
    slots: &[u64],
    prefix: &mut Vec<ContactOrder>,
    out: &mut Vec<Vec<ContactOrder>>,
) {
    let r = slots[0];
    let scaled = remaining * Q::from_integer(r as i64);
    if slots.len() == 1 {
        if scaled.is_integer() && scaled.is_positive() {
            prefix.push(ContactOrder { k: scaled.to_integer() as u64, r });
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    // Strictly less than the remainder: later slots need positive parts.
    let cap = scaled.ceil().to_integer() - 1;
    for k in 1..=cap.max(0) as u64 {
        let c = ContactOrder { k, r };
        prefix.push(c);
        partitions_rec(remaining - c.value(), &slots[1..], prefix, out);
        prefix.pop();
    }
}

/// A relative marked point: contact order, monodromy class of the divisor
/// and an optional cohomology label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelInsertion {
    pub order: ContactOrder,
    pub monodromy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_label: Option<String>,
}

impl RelInsertion {
    /// Checks `order.r` against the order of the monodromy class.
    pub fn new(
        order: ContactOrder,
        monodromy: &str,
        basis_label: Option<String>,
        catalog: &ClassCatalog,
    ) -> Result<Self, ContactError> {
        let class_order = catalog
            .order(monodromy)
            .ok_or_else(|| ContactError::UnknownClass(monodromy.to_string()))?;
        if class_order != order.r {
            return Err(ContactError::OrderMismatch {
                order: order.to_string(),
                r: order.r,
                class: monodromy.to_string(),
                class_order,
            });
        }
        Ok(RelInsertion { order, monodromy: monodromy.to_string(), basis_label })
    }
}

/// Order of the group of permutations fixing every `(l, h, beta)` triple:
/// the product of the factorials of the multiplicities.
pub fn aut_order(insertions: &[RelInsertion]) -> u64 {
    let mut counts: BTreeMap<&RelInsertion, u64> = BTreeMap::new();
    for i in insertions {
        *counts.entry(i).or_default() += 1;
    }
    counts.values().map(|&m| factorial(m)).product()
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product::<u64>().max(1)
}

/// Degree of the smoothing-parameter cover at an orbifold node of
/// multiplicity `r`: the disk `D_r` is an `r`-fold branched cover of `D_1`.
pub fn branch_cover_degree(r: u64) -> u64 {
    r
}

/// Splits `l` into `floor(l) + frac(l)`.
pub fn bracket_split(l: &Q) -> Result<(i64, Q), ContactError> {
    let f = floor_bracket(l)?;
    let rest = l - Q::from_integer(f);
    debug_assert!(!rest.is_negative() && rest < Q::one());
    Ok((f, rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn tuple_values(ps: &[Vec<ContactOrder>]) -> Vec<Vec<Q>> {
        ps.iter().map(|p| p.iter().map(ContactOrder::value).collect()).collect()
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(floor_bracket(&q(3, 2)).unwrap(), 1);
        assert_eq!(floor_bracket(&qi(2)).unwrap(), 2);
        assert_eq!(floor_bracket(&q(1, 3)).unwrap(), 0);
        assert!(floor_bracket(&qi(0)).is_err());
        assert!(floor_bracket(&q(-1, 2)).is_err());
    }

    #[test]
    fn sum_check_examples() {
        let one = ContactOrder::smooth(1);
        assert!(contact_sum_check(&[one, one], &qi(2)));
        let a = ContactOrder::new(1, 2).unwrap();
        let b = ContactOrder::new(3, 2).unwrap();
        assert!(contact_sum_check(&[a, b], &qi(2)));
        assert!(!contact_sum_check(&[a], &qi(1)));
    }

    #[test]
    fn partition_examples() {
        assert_eq!(tuple_values(&enumerate_partitions(&qi(2), &[1, 1])), vec![vec![qi(1), qi(1)]]);
        assert_eq!(
            tuple_values(&enumerate_partitions(&qi(2), &[2, 2])),
            vec![vec![q(1, 2), q(3, 2)], vec![qi(1), qi(1)], vec![q(3, 2), q(1, 2)]]
        );
        assert!(enumerate_partitions(&qi(1), &[1, 1]).is_empty());
        assert!(enumerate_partitions(&q(1, 2), &[1]).is_empty());
        assert_eq!(enumerate_partitions(&q(3, 2), &[2]), vec![vec![ContactOrder { k: 3, r: 2 }]]);
        assert!(enumerate_partitions(&qi(0), &[1]).is_empty());
    }

    #[test]
    fn aut_examples() {
        let h = "0".to_string();
        let ins = |k: u64, b: &str| RelInsertion {
            order: ContactOrder::smooth(k),
            monodromy: h.clone(),
            basis_label: Some(b.to_string()),
        };
        assert_eq!(aut_order(&[ins(1, "a"), ins(2, "a"), ins(1, "b")]), 1);
        assert_eq!(aut_order(&[ins(1, "b1"), ins(1, "b1"), ins(2, "b2")]), 2);
        assert_eq!(aut_order(&[ins(1, "b"), ins(1, "b"), ins(1, "b")]), 6);
        assert_eq!(aut_order(&[]), 1);
    }

    #[test]
    fn insertion_checks_monodromy_order() {
        let z2 = ClassCatalog::from_group(&crate::inertia::FiniteGroupTable::cyclic(2).unwrap());
        assert!(RelInsertion::new(ContactOrder::new(1, 2).unwrap(), "1", None, &z2).is_ok());
        assert!(matches!(
            RelInsertion::new(ContactOrder::smooth(1), "1", None, &z2),
            Err(ContactError::OrderMismatch { .. })
        ));
        assert!(RelInsertion::new(ContactOrder::smooth(1), "7", None, &z2).is_err());
    }

    #[test]
    fn cover_degree() {
        assert_eq!(branch_cover_degree(1), 1);
        assert_eq!(branch_cover_degree(3), 3);
        assert_eq!(branch_cover_degree(5), 5);
    }
}
