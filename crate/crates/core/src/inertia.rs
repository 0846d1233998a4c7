//! Finite local groups, their conjugacy classes, twisted sectors and the
//! Chen–Ruan grading.
//!
//! Groups are given extensionally by a multiplication table. A sector is
//! described by the rotation numbers of its class acting on the ambient
//! `C^n`; the degree shift (age) is their sum. Sector cohomology is carried
//! as a Betti table only.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{fmt_q, is_unit_interval, Q};

/// Largest group order accepted by [`FiniteGroupTable::new`].
pub const MAX_GROUP_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group table is empty")]
    Empty,
    #[error("group order {order} exceeds the cap of {cap}")]
    TooLarge { order: usize, cap: usize },
    #[error("row {row} of the multiplication table has length {len}, expected {order}")]
    Ragged { row: usize, len: usize, order: usize },
    #[error("product {a}*{b} = {value} is not an element index")]
    OutOfRange { a: usize, b: usize, value: usize },
    #[error("identity index {0} is out of range")]
    BadIdentity(usize),
    #[error("element {element} is not fixed by the identity")]
    NotUnit { element: usize },
    #[error("multiplication is not associative on ({a}, {b}, {c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("element {element} has no two-sided inverse")]
    NoInverse { element: usize },
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupTable {
    mul: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroupTable {
    /// Validates the table exhaustively: closure, unit, associativity, inverses.
    pub fn new(mul: Vec<Vec<usize>>, identity: usize) -> Result<Self, GroupError> {
        let order = mul.len();
        if order == 0 {
            return Err(GroupError::Empty);
        }
        if order > MAX_GROUP_ORDER {
            return Err(GroupError::TooLarge { order, cap: MAX_GROUP_ORDER });
        }
        for (row, r) in mul.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::Ragged { row, len: r.len(), order });
            }
            if let Some((b, &value)) = r.iter().enumerate().find(|(_, &v)| v >= order) {
                return Err(GroupError::OutOfRange { a: row, b, value });
            }
        }
        if identity >= order {
            return Err(GroupError::BadIdentity(identity));
        }
        for x in 0..order {
            if mul[identity][x] != x || mul[x][identity] != x {
                return Err(GroupError::NotUnit { element: x });
            }
        }
        for a in 0..order {
            for b in 0..order {
                let ab = mul[a][b];
                for c in 0..order {
                    if mul[ab][c] != mul[a][mul[b][c]] {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let mut inverse = Vec::with_capacity(order);
        for x in 0..order {
            let inv = (0..order)
                .find(|&y| mul[x][y] == identity && mul[y][x] == identity)
                .ok_or(GroupError::NoInverse { element: x })?;
            inverse.push(inv);
        }
        Ok(FiniteGroupTable { mul, identity, inverse })
    }

    /// The cyclic group `Z_n` with element `j` standing for `g^j`.
    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(mul, 0)
    }

    /// The symmetric group on `n <= 4` letters, elements in lexicographic
    /// order of their one-line notation, composed as `(a*b)(i) = a(b(i))`.
    pub fn symmetric(n: usize) -> Result<Self, GroupError> {
        let perms = permutations(n);
        let index: BTreeMap<Vec<usize>, usize> =
            perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mul = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index[&(0..n).map(|i| a[b[i]]).collect::<Vec<_>>()])
                    .collect()
            })
            .collect();
        Self::new(mul, 0)
    }

    pub fn direct_product(&self, other: &FiniteGroupTable) -> Result<Self, GroupError> {
        let m = other.order();
        let n = self.order() * m;
        let mul = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| self.mul(x / m, y / m) * m + other.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        Self::new(mul, self.identity * m + other.identity)
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

/// A conjugacy class. The representative is always the smallest member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConjugacyClass {
    pub representative: usize,
    pub members: Vec<usize>,
    pub ord: u64,
}

impl ConjugacyClass {
    pub fn label(&self) -> String {
        self.representative.to_string()
    }

    pub fn contains(&self, element: usize) -> bool {
        self.members.binary_search(&element).is_ok()
    }
}

fn class_containing(g: &FiniteGroupTable, x: usize) -> ConjugacyClass {
    let mut members: Vec<usize> = (0..g.order())
        .map(|h| g.mul(g.mul(h, x), g.inverse(h)))
        .collect();
    members.sort_unstable();
    members.dedup();
    ConjugacyClass { representative: members[0], members, ord: g.element_order(x) }
}

/// Conjugacy classes of `g`, identity class first, the rest ordered by
/// representative.
pub fn conjugacy_classes(g: &FiniteGroupTable) -> Vec<ConjugacyClass> {
    let mut seen = vec![false; g.order()];
    let mut classes = vec![class_containing(g, g.identity())];
    seen[g.identity()] = true;
    for x in 0..g.order() {
        if seen[x] {
            continue;
        }
        let class = class_containing(g, x);
        for &m in &class.members {
            seen[m] = true;
        }
        classes.push(class);
    }
    classes
}

/// The class of inverses of the members of `c` (the involution `I`).
pub fn inverse_class(g: &FiniteGroupTable, c: &ConjugacyClass) -> ConjugacyClass {
    let mut members: Vec<usize> = c.members.iter().map(|&x| g.inverse(x)).collect();
    members.sort_unstable();
    ConjugacyClass { representative: members[0], members, ord: c.ord }
}

/// Index of the class containing `element`.
pub fn class_index(classes: &[ConjugacyClass], element: usize) -> Option<usize> {
    classes.iter().position(|c| c.contains(element))
}

/// Monodromy labels with their orders and inverses.
///
/// Graphs, relative insertions and dual bases refer to conjugacy classes by
/// label only; a catalog resolves orders and the inversion involution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCatalog {
    entries: BTreeMap<String, CatalogEntry>,
    identity: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub order: u64,
    pub inverse: String,
}

impl ClassCatalog {
    /// Labels are the decimal representative indices of the classes.
    pub fn from_group(g: &FiniteGroupTable) -> Self {
        let classes = conjugacy_classes(g);
        let entries = classes
            .iter()
            .map(|c| {
                let inv = inverse_class(g, c);
                (c.label(), CatalogEntry { order: c.ord, inverse: inv.label() })
            })
            .collect();
        ClassCatalog { entries, identity: classes[0].label() }
    }

    /// Catalog of the trivial group: the single label `"0"`.
    pub fn trivial() -> Self {
        Self::from_group(&FiniteGroupTable::cyclic(1).expect("trivial group"))
    }

    pub fn identity_label(&self) -> &str {
        &self.identity
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.contains_key(label)
    }

    pub fn order(&self, label: &str) -> Option<u64> {
        self.entries.get(label).map(|e| e.order)
    }

    pub fn inverse(&self, label: &str) -> Option<&str> {
        self.entries.get(label).map(|e| e.inverse.as_str())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectorError {
    #[error("rotation {value} at position {index} is outside [0, 1)")]
    RotationRange { index: usize, value: String },
    #[error("rotation {value} at position {index} has denominator not dividing the class order {ord}")]
    RotationDenominator { index: usize, value: String, ord: u64 },
    #[error("expected {expected} rotation numbers, found {found}")]
    RotationCount { expected: usize, found: usize },
    #[error("class index {0} is not a class of the group")]
    UnknownClass(usize),
    #[error("no sector given for class ({0})")]
    MissingClass(String),
    #[error("two sectors given for class ({0})")]
    DuplicateClass(String),
    #[error("the untwisted sector must have all rotations zero")]
    TwistedIdentity,
    #[error("pairing violation: {0}")]
    Pairing(PairingViolation),
}

/// Degree shift `sum(theta_i)` of a list of rotation numbers.
pub fn degree_shift_of(rotations: &[Q]) -> Result<Q, SectorError> {
    for (index, r) in rotations.iter().enumerate() {
        if !is_unit_interval(r) {
            return Err(SectorError::RotationRange { index, value: fmt_q(r) });
        }
    }
    Ok(rotations.iter().fold(Q::zero(), |acc, r| acc + r))
}

/// Rotation numbers of `g^power` for the diagonal action of `Z_order` with
/// the given integer weights.
pub fn cyclic_rotations(order: u64, weights: &[i64], power: i64) -> Vec<Q> {
    let n = order as i64;
    weights.iter().map(|w| Q::new((w * power).mod_floor(&n), n)).collect()
}

/// One twisted (or untwisted) sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorDatum {
    class: usize,
    rotations: Vec<Q>,
    sector_dim: u32,
    betti: BTreeMap<i64, u64>,
}

impl SectorDatum {
    /// `class` indexes `classes`; `ambient_dim` is the complex dimension `n`.
    pub fn new(
        classes: &[ConjugacyClass],
        class: usize,
        ambient_dim: u32,
        rotations: Vec<Q>,
        betti: BTreeMap<i64, u64>,
    ) -> Result<Self, SectorError> {
        let cls = classes.get(class).ok_or(SectorError::UnknownClass(class))?;
        if rotations.len() != ambient_dim as usize {
            return Err(SectorError::RotationCount {
                expected: ambient_dim as usize,
                found: rotations.len(),
            });
        }
        degree_shift_of(&rotations)?;
        for (index, r) in rotations.iter().enumerate() {
            if (cls.ord as i64) % r.denom() != 0 {
                return Err(SectorError::RotationDenominator {
                    index,
                    value: fmt_q(r),
                    ord: cls.ord,
                });
            }
        }
        let twisted = rotations.iter().filter(|r| !r.is_zero()).count() as u32;
        let betti = betti.into_iter().filter(|&(_, b)| b > 0).collect();
        Ok(SectorDatum { class, rotations, sector_dim: ambient_dim - twisted, betti })
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn rotations(&self) -> &[Q] {
        &self.rotations
    }

    pub fn sector_dim(&self) -> u32 {
        self.sector_dim
    }

    pub fn betti(&self) -> &BTreeMap<i64, u64> {
        &self.betti
    }

    pub fn degree_shift(&self) -> Q {
        self.rotations.iter().fold(Q::zero(), |acc, r| acc + r)
    }

    /// Number of nonzero rotation numbers, `n - sector_dim`.
    pub fn twisted_count(&self) -> u32 {
        self.rotations.iter().filter(|r| !r.is_zero()).count() as u32
    }

    pub fn total_betti(&self) -> u64 {
        self.betti.values().sum()
    }
}

/// Degree shift of a validated sector.
pub fn degree_shift(s: &SectorDatum) -> Q {
    s.degree_shift()
}

/// The sector data of a global quotient: one sector per conjugacy class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CRProfile {
    ambient_dim: u32,
    classes: Vec<ConjugacyClass>,
    inverse: Vec<usize>,
    sectors: Vec<SectorDatum>,
}

impl CRProfile {
    /// Checks coverage of every class and an all-zero untwisted sector. The
    /// pairing shape is not enforced here; see [`pairing_check`].
    pub fn new(
        group: &FiniteGroupTable,
        ambient_dim: u32,
        mut sectors: Vec<SectorDatum>,
    ) -> Result<Self, SectorError> {
        let classes = conjugacy_classes(group);
        sectors.sort_by_key(|s| s.class);
        for w in sectors.windows(2) {
            if w[0].class == w[1].class {
                return Err(SectorError::DuplicateClass(classes[w[0].class].label()));
            }
        }
        for (i, c) in classes.iter().enumerate() {
            if !sectors.iter().any(|s| s.class == i) {
                return Err(SectorError::MissingClass(c.label()));
            }
        }
        if sectors.iter().any(|s| s.class >= classes.len()) {
            return Err(SectorError::UnknownClass(sectors.last().map_or(0, |s| s.class)));
        }
        if sectors[0].rotations.iter().any(|r| !r.is_zero()) {
            return Err(SectorError::TwistedIdentity);
        }
        let inverse = classes
            .iter()
            .map(|c| {
                let inv = inverse_class(group, c);
                classes.iter().position(|d| *d == inv).expect("inverse class exists")
            })
            .collect();
        Ok(CRProfile { ambient_dim, classes, inverse, sectors })
    }

    pub fn ambient_dim(&self) -> u32 {
        self.ambient_dim
    }

    pub fn classes(&self) -> &[ConjugacyClass] {
        &self.classes
    }

    /// Sectors, indexed by class index.
    pub fn sectors(&self) -> &[SectorDatum] {
        &self.sectors
    }

    pub fn inverse_index(&self, class: usize) -> usize {
        self.inverse[class]
    }
}

/// A located failure of the Poincaré pairing shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairingViolation {
    /// `betti_(g)(d) != betti_(g^-1)(2 n_g - d)`.
    Betti {
        class: String,
        degree: i64,
        betti: u64,
        paired_class: String,
        paired_degree: i64,
        paired_betti: u64,
    },
    /// Paired sectors of different dimension.
    SectorDim { class: String, dim: u32, paired_class: String, paired_dim: u32 },
    /// Rotations of `(g^-1)` are not `{1 - theta}` of those of `(g)`.
    Rotations { class: String, paired_class: String },
    /// Paired CR degrees do not sum to `2n`.
    DegreeSum { class: String, paired_class: String, sum: String, expected: u32 },
}

impl fmt::Display for PairingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingViolation::Betti {
                class,
                degree,
                betti,
                paired_class,
                paired_degree,
                paired_betti,
            } => write!(
                f,
                "sector ({class}) degree {degree} has betti {betti} but sector ({paired_class}) degree {paired_degree} has betti {paired_betti}"
            ),
            PairingViolation::SectorDim { class, dim, paired_class, paired_dim } => write!(
                f,
                "sector ({class}) has dimension {dim} but its inverse ({paired_class}) has dimension {paired_dim}"
            ),
            PairingViolation::Rotations { class, paired_class } => write!(
                f,
                "rotations of ({paired_class}) are not the complements of those of ({class})"
            ),
            PairingViolation::DegreeSum { class, paired_class, sum, expected } => write!(
                f,
                "CR degrees of ({class}) and ({paired_class}) pair to {sum}, expected {expected}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairingReport {
    pub violations: Vec<PairingViolation>,
}

impl PairingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn complement_multiset(rotations: &[Q]) -> Vec<Q> {
    let mut c: Vec<Q> = rotations
        .iter()
        .map(|r| if r.is_zero() { Q::zero() } else { Q::from_integer(1) - r })
        .collect();
    c.sort();
    c
}

/// Checks the shape of the pairing `H^{d-2i(g)}(G_(g)) x H^{2n-d-2i(g^-1)}(G_(g^-1))`
/// for every class and degree, collecting every violation.
pub fn pairing_check(p: &CRProfile) -> PairingReport {
    let mut violations = Vec::new();
    let two_n = 2 * p.ambient_dim;
    for (ci, s) in p.sectors.iter().enumerate() {
        let pi = p.inverse[ci];
        let t = &p.sectors[pi];
        let class = p.classes[ci].label();
        let paired_class = p.classes[pi].label();
        if s.sector_dim != t.sector_dim {
            violations.push(PairingViolation::SectorDim {
                class: class.clone(),
                dim: s.sector_dim,
                paired_class: paired_class.clone(),
                paired_dim: t.sector_dim,
            });
        }
        let mut mine = s.rotations.clone();
        mine.sort();
        if complement_multiset(&t.rotations) != mine {
            violations.push(PairingViolation::Rotations {
                class: class.clone(),
                paired_class: paired_class.clone(),
            });
        }
        let sum = Q::from_integer(2 * s.sector_dim as i64)
            + s.degree_shift() * 2
            + t.degree_shift() * 2;
        if sum != Q::from_integer(two_n as i64) {
            violations.push(PairingViolation::DegreeSum {
                class: class.clone(),
                paired_class: paired_class.clone(),
                sum: fmt_q(&sum),
                expected: two_n,
            });
        }
        let top = 2 * s.sector_dim as i64;
        let degrees: std::collections::BTreeSet<i64> = s
            .betti
            .keys()
            .copied()
            .chain(t.betti.keys().map(|d| top - d))
            .collect();
        for d in degrees {
            let b = s.betti.get(&d).copied().unwrap_or(0);
            let pd = top - d;
            let pb = t.betti.get(&pd).copied().unwrap_or(0);
            if b != pb {
                violations.push(PairingViolation::Betti {
                    class: class.clone(),
                    degree: d,
                    betti: b,
                    paired_class: paired_class.clone(),
                    paired_degree: pd,
                    paired_betti: pb,
                });
            }
        }
    }
    PairingReport { violations }
}

/// Chen–Ruan Poincaré polynomial: each sector's Betti table shifted up by
/// twice its degree shift, merged by degree.
pub fn cr_poincare_polynomial(p: &CRProfile) -> Result<Vec<(Q, u64)>, SectorError> {
    if let Some(v) = pairing_check(p).violations.into_iter().next() {
        return Err(SectorError::Pairing(v));
    }
    let mut poly: BTreeMap<Q, u64> = BTreeMap::new();
    for s in &p.sectors {
        let shift = s.degree_shift() * 2;
        for (&d, &b) in &s.betti {
            *poly.entry(Q::from_integer(d) + shift).or_default() += b;
        }
    }
    Ok(poly.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn betti(pairs: &[(i64, u64)]) -> BTreeMap<i64, u64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn class_counts() {
        let trivial = FiniteGroupTable::cyclic(1).unwrap();
        assert_eq!(conjugacy_classes(&trivial).len(), 1);
        let z3 = FiniteGroupTable::cyclic(3).unwrap();
        let c = conjugacy_classes(&z3);
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|k| k.members.len() == 1));
        let s3 = FiniteGroupTable::symmetric(3).unwrap();
        let sizes: Vec<usize> = conjugacy_classes(&s3).iter().map(|k| k.members.len()).collect();
        assert_eq!(sizes, vec![1, 3, 2]);
    }

    #[test]
    fn rejects_non_associative_table() {
        // A Latin square with identity 0 that is not a group (order 5 loop).
        let mul = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        match FiniteGroupTable::new(mul, 0) {
            Err(GroupError::NotAssociative { .. }) => {}
            other => panic!("expected associativity failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_inverse() {
        // Monoid {0, 1} with 1*1 = 1.
        let mul = vec![vec![0, 1], vec![1, 1]];
        assert_eq!(FiniteGroupTable::new(mul, 0), Err(GroupError::NoInverse { element: 1 }));
    }

    #[test]
    fn inverse_class_examples() {
        let z3 = FiniteGroupTable::cyclic(3).unwrap();
        let c = conjugacy_classes(&z3);
        assert_eq!(inverse_class(&z3, &c[0]), c[0]);
        assert_eq!(inverse_class(&z3, &c[1]), c[2]);
        let s3 = FiniteGroupTable::symmetric(3).unwrap();
        let c = conjugacy_classes(&s3);
        let transpositions = c.iter().find(|k| k.members.len() == 3).unwrap();
        assert_eq!(&inverse_class(&s3, transpositions), transpositions);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(degree_shift_of(&[qi(0), qi(0)]).unwrap(), qi(0));
        assert_eq!(degree_shift_of(&[q(1, 2)]).unwrap(), q(1, 2));
        assert_eq!(degree_shift_of(&[q(1, 3), q(2, 3)]).unwrap(), qi(1));
        assert!(matches!(
            degree_shift_of(&[qi(1)]),
            Err(SectorError::RotationRange { index: 0, .. })
        ));
        assert!(degree_shift_of(&[q(-1, 2)]).is_err());
    }

    #[test]
    fn denominators_must_divide_order() {
        let z2 = FiniteGroupTable::cyclic(2).unwrap();
        let c = conjugacy_classes(&z2);
        let err = SectorDatum::new(&c, 1, 1, vec![q(1, 3)], BTreeMap::new()).unwrap_err();
        assert!(matches!(err, SectorError::RotationDenominator { ord: 2, .. }));
    }

    fn z3_profile(b1: &[(i64, u64)], b2: &[(i64, u64)]) -> CRProfile {
        let z3 = FiniteGroupTable::cyclic(3).unwrap();
        let c = conjugacy_classes(&z3);
        let sectors = vec![
            SectorDatum::new(&c, 0, 2, vec![qi(0), qi(0)], betti(&[(0, 1), (2, 1), (4, 1)])).unwrap(),
            SectorDatum::new(&c, 1, 2, cyclic_rotations(3, &[1, 2], 1), betti(b1)).unwrap(),
            SectorDatum::new(&c, 2, 2, cyclic_rotations(3, &[1, 2], 2), betti(b2)).unwrap(),
        ];
        CRProfile::new(&z3, 2, sectors).unwrap()
    }

    #[test]
    fn poincare_polynomial_of_z3_pair() {
        // Z3 acting on C^1 with weight 1: shifts 1/3 and 2/3.
        let z3 = FiniteGroupTable::cyclic(3).unwrap();
        let c = conjugacy_classes(&z3);
        let sectors = vec![
            SectorDatum::new(&c, 0, 1, vec![qi(0)], betti(&[(0, 1), (2, 1)])).unwrap(),
            SectorDatum::new(&c, 1, 1, vec![q(1, 3)], betti(&[(0, 1)])).unwrap(),
            SectorDatum::new(&c, 2, 1, vec![q(2, 3)], betti(&[(0, 1)])).unwrap(),
        ];
        let p = CRProfile::new(&z3, 1, sectors).unwrap();
        let poly = cr_poincare_polynomial(&p).unwrap();
        assert_eq!(poly, vec![(qi(0), 1), (q(2, 3), 1), (q(4, 3), 1), (qi(2), 1)]);
    }

    #[test]
    fn manifold_and_z2_contributions() {
        let triv = FiniteGroupTable::cyclic(1).unwrap();
        let c = conjugacy_classes(&triv);
        let s = SectorDatum::new(&c, 0, 1, vec![qi(0)], betti(&[(0, 1), (2, 1)])).unwrap();
        let p = CRProfile::new(&triv, 1, vec![s]).unwrap();
        assert_eq!(cr_poincare_polynomial(&p).unwrap(), vec![(qi(0), 1), (qi(2), 1)]);
        assert!(pairing_check(&p).is_ok());

        let z2 = FiniteGroupTable::cyclic(2).unwrap();
        let c = conjugacy_classes(&z2);
        let sectors = vec![
            SectorDatum::new(&c, 0, 1, vec![qi(0)], betti(&[(0, 1), (2, 1)])).unwrap(),
            SectorDatum::new(&c, 1, 1, vec![q(1, 2)], betti(&[(0, 1)])).unwrap(),
        ];
        let p = CRProfile::new(&z2, 1, sectors).unwrap();
        let poly = cr_poincare_polynomial(&p).unwrap();
        assert!(poly.contains(&(qi(1), 1)));
    }

    #[test]
    fn asymmetric_betti_is_located() {
        let p = z3_profile(&[(0, 1)], &[(0, 2)]);
        let report = pairing_check(&p);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            PairingViolation::Betti { class, degree: 0, betti: 1, paired_betti: 2, .. } if class == "1"
        )));
        assert!(matches!(cr_poincare_polynomial(&p), Err(SectorError::Pairing(_))));
    }

    #[test]
    fn z3_degrees_pair_to_2n() {
        let p = z3_profile(&[(0, 1)], &[(0, 1)]);
        assert!(pairing_check(&p).is_ok());
        for (i, s) in p.sectors().iter().enumerate() {
            let t = &p.sectors()[p.inverse_index(i)];
            assert_eq!(
                s.degree_shift() + t.degree_shift(),
                Q::from_integer(s.twisted_count() as i64)
            );
        }
    }

    #[test]
    fn profile_requires_every_class() {
        let z2 = FiniteGroupTable::cyclic(2).unwrap();
        let c = conjugacy_classes(&z2);
        let s = SectorDatum::new(&c, 0, 1, vec![qi(0)], BTreeMap::new()).unwrap();
        assert_eq!(
            CRProfile::new(&z2, 1, vec![s]).unwrap_err(),
            SectorError::MissingClass("1".into())
        );
    }

    #[test]
    fn catalog_from_s3() {
        let s3 = FiniteGroupTable::symmetric(3).unwrap();
        let cat = ClassCatalog::from_group(&s3);
        assert_eq!(cat.len(), 3);
        for l in cat.labels() {
            let inv = cat.inverse(l).unwrap();
            assert_eq!(cat.inverse(inv).unwrap(), l);
            assert_eq!(cat.order(l), cat.order(inv));
        }
        assert_eq!(ClassCatalog::trivial().identity_label(), "0");
    }

    #[test]
    fn products_and_orders() {
        let z2 = FiniteGroupTable::cyclic(2).unwrap();
        let z3 = FiniteGroupTable::cyclic(3).unwrap();
        let z6 = z2.direct_product(&z3).unwrap();
        assert_eq!(z6.order(), 6);
        assert!(z6.is_abelian());
        assert_eq!((0..6).map(|x| z6.element_order(x)).max(), Some(6));
        assert!(!FiniteGroupTable::symmetric(3).unwrap().is_abelian());
    }
}
