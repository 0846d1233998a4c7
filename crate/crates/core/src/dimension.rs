//! Virtual dimensions of the four moduli flavors and the dimension ledger
//! of a splitting.
//!
//! All dimensions are complex.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{floor_bracket, RelInsertion};
use crate::inertia::ClassCatalog;
use crate::rational::{fmt_q, qi, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimensionError {
    #[error("{flavor}: {reason}")]
    Flavor { flavor: Flavor, reason: String },
    #[error("node {node}: {reason}")]
    Node { node: usize, reason: String },
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    AbsoluteSmooth,
    RelativeSmooth,
    AbsoluteOrbifold,
    RelativeOrbifold,
}

impl Flavor {
    pub fn is_relative(self) -> bool {
        matches!(self, Flavor::RelativeSmooth | Flavor::RelativeOrbifold)
    }

    pub fn is_orbifold(self) -> bool {
        matches!(self, Flavor::AbsoluteOrbifold | Flavor::RelativeOrbifold)
    }

    pub fn name(self) -> &'static str {
        match self {
            Flavor::AbsoluteSmooth => "absolute-smooth",
            Flavor::RelativeSmooth => "relative-smooth",
            Flavor::AbsoluteOrbifold => "absolute-orbifold",
            Flavor::RelativeOrbifold => "relative-orbifold",
        }
    }
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An absolute marked point: its sector label and degree shift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedSector {
    pub sector: String,
    #[serde(with = "crate::rational::serde_q")]
    pub shift: Q,
}

/// A relative marked point together with the degree shift of its divisor
/// sector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelSlot {
    pub insertion: RelInsertion,
    #[serde(with = "crate::rational::serde_q")]
    pub shift: Q,
}

impl RelSlot {
    pub fn smooth(k: u64) -> Self {
        RelSlot {
            insertion: RelInsertion {
                order: crate::contact::ContactOrder::smooth(k),
                monodromy: "0".into(),
                basis_label: None,
            },
            shift: Q::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliSpec {
    pub flavor: Flavor,
    /// Complex dimension of the target.
    pub n: u32,
    pub g: u32,
    pub m: u32,
    /// One entry per absolute marked point; smooth flavors may leave it empty.
    #[serde(default)]
    pub insertions: Vec<MarkedSector>,
    #[serde(default)]
    pub rel_insertions: Vec<RelSlot>,
    #[serde(with = "crate::rational::serde_q")]
    pub c1a: Q,
    #[serde(with = "crate::rational::serde_q", default)]
    pub za: Q,
}

impl ModuliSpec {
    pub fn smooth_absolute(n: u32, g: u32, m: u32, c1a: Q) -> Self {
        ModuliSpec {
            flavor: Flavor::AbsoluteSmooth,
            n,
            g,
            m,
            insertions: Vec::new(),
            rel_insertions: Vec::new(),
            c1a,
            za: Q::zero(),
        }
    }

    /// Relative-smooth spec with integer contact orders; `za` is their sum.
    pub fn smooth_relative(n: u32, g: u32, m: u32, c1a: Q, contacts: &[u64]) -> Self {
        ModuliSpec {
            flavor: Flavor::RelativeSmooth,
            n,
            g,
            m,
            insertions: Vec::new(),
            rel_insertions: contacts.iter().map(|&k| RelSlot::smooth(k)).collect(),
            c1a,
            za: qi(contacts.iter().sum::<u64>() as i64),
        }
    }

    pub fn k(&self) -> usize {
        self.rel_insertions.len()
    }

    pub fn validate(&self) -> Result<(), DimensionError> {
        let fail = |reason: String| Err(DimensionError::Flavor { flavor: self.flavor, reason });
        if self.n == 0 {
            return fail("n must be positive".into());
        }
        let m = self.m as usize;
        if self.flavor.is_orbifold() && self.insertions.len() != m {
            return fail(format!("m = {m} but {} absolute insertions given", self.insertions.len()));
        }
        if !self.flavor.is_orbifold() && !self.insertions.is_empty() && self.insertions.len() != m {
            return fail(format!("m = {m} but {} absolute insertions given", self.insertions.len()));
        }
        if let Some(bad) = self.insertions.iter().find(|s| s.shift.is_negative()) {
            return fail(format!("negative shift {} on sector ({})", fmt_q(&bad.shift), bad.sector));
        }
        if !self.flavor.is_relative() && !self.rel_insertions.is_empty() {
            return fail("absolute flavors take no relative insertions".into());
        }
        if !self.flavor.is_orbifold() {
            if let Some(s) = self.insertions.iter().find(|s| !s.shift.is_zero()) {
                return fail(format!("smooth flavor with nonzero shift {}", fmt_q(&s.shift)));
            }
            for (j, r) in self.rel_insertions.iter().enumerate() {
                if r.insertion.order.r != 1 || !r.shift.is_zero() {
                    return fail(format!("relative insertion {j} has nontrivial monodromy"));
                }
            }
        }
        for (j, r) in self.rel_insertions.iter().enumerate() {
            if r.insertion.order.k == 0 || r.insertion.order.r == 0 {
                return fail(format!("relative insertion {j} has contact order {}", r.insertion.order));
            }
            if r.shift.is_negative() {
                return fail(format!("relative insertion {j} has negative shift"));
            }
        }
        if self.flavor.is_relative() {
            let total = self.rel_insertions.iter().fold(Q::zero(), |acc, r| acc + r.insertion.order.value());
            if total != self.za {
                return fail(format!("contact orders sum to {} but zA = {}", fmt_q(&total), fmt_q(&self.za)));
            }
        }
        Ok(())
    }
}

/// Virtual complex dimension.
///
/// * absolute-smooth: `c1(A) + (3-n)(g-1) + m`
/// * relative-smooth: `c1(A) + (3-n)(g-1) + m + k - sum l_j`
/// * absolute-orbifold: `c1(A) + (3-n)(g-1) + m - sum iota(g_i)`
/// * relative-orbifold: `c1(A) + (3-n)(g-1) + m + k - sum iota(g_i) - sum iota(h_j) - sum [l_j]`
pub fn virdim(spec: &ModuliSpec) -> Result<Q, DimensionError> {
    spec.validate()?;
    let base = spec.c1a + qi((3 - spec.n as i64) * (spec.g as i64 - 1)) + qi(spec.m as i64);
    let abs_shift = spec.insertions.iter().fold(Q::zero(), |acc, s| acc + s.shift);
    let k = qi(spec.k() as i64);
    Ok(match spec.flavor {
        Flavor::AbsoluteSmooth => base,
        Flavor::RelativeSmooth => {
            base + k - spec.rel_insertions.iter().fold(Q::zero(), |acc, r| acc + r.insertion.order.value())
        }
        Flavor::AbsoluteOrbifold => base - abs_shift,
        Flavor::RelativeOrbifold => {
            let mut d = base + k - abs_shift;
            for r in &spec.rel_insertions {
                let bracket = floor_bracket(&r.insertion.order.value()).expect("validated positive");
                d -= r.shift + qi(bracket);
            }
            d
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    #[serde(with = "crate::rational::serde_q")]
    pub d_total: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub d_plus: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub d_minus: Q,
    #[serde(with = "crate::rational::serde_q_vec")]
    pub constraint_dims: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub defect: Q,
}

impl Ledger {
    pub fn new(d_total: Q, d_plus: Q, d_minus: Q, constraint_dims: Vec<Q>) -> Self {
        let defect = d_plus + d_minus - constraint_dims.iter().fold(Q::zero(), |a, c| a + c) - d_total;
        Ledger { d_total, d_plus, d_minus, constraint_dims, defect }
    }

    pub fn is_balanced(&self) -> bool {
        self.defect.is_zero()
    }
}

/// Dimension bookkeeping for the fiber product of the two sides over the
/// matched divisor sectors.
///
/// `minus = None` is the splitting with empty `-` side; then `plus` has no
/// relative insertions. Node `j` pairs `plus.rel_insertions[j]` with
/// `minus.rel_insertions[j]`: monodromies must be mutually inverse in
/// `divisor` and the contact orders equal.
pub fn splitting_ledger(
    plus: &ModuliSpec,
    minus: Option<&ModuliSpec>,
    constraint_dims: &[Q],
    total: &ModuliSpec,
    divisor: &ClassCatalog,
) -> Result<Ledger, DimensionError> {
    let shape = |s: String| Err(DimensionError::Shape(s));
    if total.flavor.is_relative() {
        return shape(format!("total spec must be absolute, got {}", total.flavor));
    }
    if !plus.flavor.is_relative() {
        return shape(format!("+ side must be relative, got {}", plus.flavor));
    }
    let d_plus = virdim(plus)?;
    let d_total = virdim(total)?;
    let d_minus = match minus {
        None => {
            if plus.k() != 0 {
                return shape(format!("- side is empty but the + side has {} relative insertions", plus.k()));
            }
            Q::zero()
        }
        Some(minus) => {
            if !minus.flavor.is_relative() {
                return shape(format!("- side must be relative, got {}", minus.flavor));
            }
            let d = virdim(minus)?;
            let nodes = plus.k().max(minus.k());
            for j in 0..nodes {
                let node = |reason: String| Err(DimensionError::Node { node: j, reason });
                let (Some(a), Some(b)) = (plus.rel_insertions.get(j), minus.rel_insertions.get(j)) else {
                    return node(format!("+ side has {} nodes, - side has {}", plus.k(), minus.k()));
                };
                let (a, b) = (&a.insertion, &b.insertion);
                match divisor.inverse(&a.monodromy) {
                    None => return node(format!("unknown monodromy ({})", a.monodromy)),
                    Some(inv) if inv != b.monodromy => {
                        return node(format!("monodromies ({}) and ({}) are not inverse", a.monodromy, b.monodromy))
                    }
                    _ => {}
                }
                if a.order != b.order {
                    return node(format!("contact orders {} and {} differ", a.order, b.order));
                }
            }
            d
        }
    };
    if constraint_dims.len() != plus.k() {
        return shape(format!("{} constraint dimensions for {} nodes", constraint_dims.len(), plus.k()));
    }
    Ok(Ledger::new(d_total, d_plus, d_minus, constraint_dims.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::ContactOrder;
    use crate::inertia::FiniteGroupTable;
    use crate::rational::q;

    #[test]
    fn absolute_smooth_example() {
        assert_eq!(virdim(&ModuliSpec::smooth_absolute(2, 0, 0, qi(0))).unwrap(), qi(-1));
        assert_eq!(virdim(&ModuliSpec::smooth_absolute(3, 0, 0, qi(0))).unwrap(), qi(0));
    }

    #[test]
    fn relative_smooth_example() {
        for c in -3..4 {
            for d in 1..5u64 {
                let s = ModuliSpec::smooth_relative(1, 0, 0, qi(c), &[d]);
                assert_eq!(virdim(&s).unwrap(), qi(c - 1 - d as i64));
            }
        }
    }

    #[test]
    fn orbifold_shifts_and_brackets() {
        let z2 = ClassCatalog::from_group(&FiniteGroupTable::cyclic(2).unwrap());
        let ins = RelInsertion::new(ContactOrder::new(3, 2).unwrap(), "1", None, &z2).unwrap();
        let spec = ModuliSpec {
            flavor: Flavor::RelativeOrbifold,
            n: 2,
            g: 0,
            m: 1,
            insertions: vec![MarkedSector { sector: "1".into(), shift: q(1, 2) }],
            rel_insertions: vec![RelSlot { insertion: ins, shift: q(1, 2) }],
            c1a: qi(3),
            za: q(3, 2),
        };
        // 3 - 1 + 1 + 1 - 1/2 - 1/2 - 1
        assert_eq!(virdim(&spec).unwrap(), qi(2));
    }

    #[test]
    fn flavor_mismatches() {
        let mut s = ModuliSpec::smooth_relative(2, 0, 0, qi(1), &[2]);
        s.za = qi(3);
        assert!(matches!(virdim(&s), Err(DimensionError::Flavor { .. })));
        let mut a = ModuliSpec::smooth_absolute(2, 0, 1, qi(0));
        a.insertions = vec![MarkedSector { sector: "1".into(), shift: q(1, 3) }];
        assert!(virdim(&a).is_err());
        a.flavor = Flavor::AbsoluteOrbifold;
        assert_eq!(virdim(&a).unwrap(), qi(-1) + qi(1) - q(1, 3));
        let mut r = ModuliSpec::smooth_relative(2, 0, 0, qi(1), &[2]);
        r.flavor = Flavor::AbsoluteSmooth;
        assert!(virdim(&r).is_err());
    }

    #[test]
    fn ledger_smooth_one_node() {
        let n = 2;
        let (c1p, c1m, za) = (qi(3), qi(2), qi(1));
        let plus = ModuliSpec::smooth_relative(n, 0, 0, c1p, &[1]);
        let minus = ModuliSpec::smooth_relative(n, 0, 0, c1m, &[1]);
        let total = ModuliSpec::smooth_absolute(n, 0, 0, c1p + c1m - qi(2) * za);
        let l = splitting_ledger(&plus, Some(&minus), &[qi(n as i64 - 1)], &total, &ClassCatalog::trivial()).unwrap();
        assert!(l.is_balanced());
    }

    #[test]
    fn ledger_trivial_splitting() {
        let plus = ModuliSpec::smooth_relative(3, 1, 2, qi(4), &[]);
        let total = ModuliSpec::smooth_absolute(3, 1, 2, qi(4));
        let l = splitting_ledger(&plus, None, &[], &total, &ClassCatalog::trivial()).unwrap();
        assert_eq!(l.d_plus, l.d_total);
        assert!(l.is_balanced());
    }

    #[test]
    fn ledger_names_bad_node() {
        let plus = ModuliSpec::smooth_relative(2, 0, 0, qi(3), &[1, 1]);
        let minus = ModuliSpec::smooth_relative(2, 0, 0, qi(3), &[2]);
        let total = ModuliSpec::smooth_absolute(2, 1, 0, qi(2));
        let e = splitting_ledger(&plus, Some(&minus), &[qi(1), qi(1)], &total, &ClassCatalog::trivial());
        assert!(matches!(e, Err(DimensionError::Node { node: 0, .. })));
    }

    #[test]
    fn ledger_orbifold_reports_defect() {
        let z2 = ClassCatalog::from_group(&FiniteGroupTable::cyclic(2).unwrap());
        let ins = RelInsertion::new(ContactOrder::new(1, 2).unwrap(), "1", None, &z2).unwrap();
        let side = |c1: Q| ModuliSpec {
            flavor: Flavor::RelativeOrbifold,
            n: 2,
            g: 0,
            m: 0,
            insertions: vec![],
            rel_insertions: vec![RelSlot { insertion: ins.clone(), shift: q(1, 2) }],
            c1a: c1,
            za: q(1, 2),
        };
        let total = ModuliSpec { flavor: Flavor::AbsoluteOrbifold, ..ModuliSpec::smooth_absolute(2, 0, 0, qi(1)) };
        let l = splitting_ledger(&side(qi(1)), Some(&side(qi(1))), &[qi(1)], &total, &z2).unwrap();
        assert_eq!(l.defect, l.d_plus + l.d_minus - qi(1) - l.d_total);
    }
}
