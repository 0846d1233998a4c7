//! Twisted sectors of cyclic and symmetric quotients of C^2, their degree
//! shifts and the Chen-Ruan Poincare polynomial.

use std::collections::BTreeMap;

use orbi_degen::inertia::{
    conjugacy_classes, cr_poincare_polynomial, cyclic_rotations, pairing_check, CRProfile, FiniteGroupTable,
    SectorDatum,
};
use orbi_degen::rational::{fmt_q, q, qi};

fn betti(dim: u32) -> BTreeMap<i64, u64> {
    (0..=dim as i64).map(|d| (2 * d, 1)).collect()
}

fn cyclic_profile(order: u64, weights: &[i64]) -> CRProfile {
    let group = FiniteGroupTable::cyclic(order as usize).unwrap();
    let classes = conjugacy_classes(&group);
    let sectors = (0..classes.len())
        .map(|i| {
            let power = classes[i].representative as i64;
            let rot = cyclic_rotations(order, weights, power);
            let dim = rot.iter().filter(|r| **r == qi(0)).count() as u32;
            SectorDatum::new(&classes, i, 2, rot, betti(dim)).unwrap()
        })
        .collect();
    CRProfile::new(&group, 2, sectors).unwrap()
}

fn show(name: &str, p: &CRProfile) {
    println!("{name}");
    for s in p.sectors() {
        let rot: Vec<String> = s.rotations().iter().map(fmt_q).collect();
        println!(
            "  ({})  rotations [{}]  iota {}  sector dim {}",
            p.classes()[s.class()].label(),
            rot.join(", "),
            fmt_q(&s.degree_shift()),
            s.sector_dim()
        );
    }
    let poly = cr_poincare_polynomial(p).unwrap();
    let terms: Vec<String> = poly.iter().map(|(d, b)| format!("{b} t^{}", fmt_q(d))).collect();
    println!("  P(t) = {}", terms.join(" + "));
    println!("  pairing ok: {}", pairing_check(p).is_ok());
}

fn main() {
    show("Z3 acting with weights (1, 2)", &cyclic_profile(3, &[1, 2]));
    show("Z6 acting with weights (1, 2)", &cyclic_profile(6, &[1, 2]));

    let s3 = FiniteGroupTable::symmetric(3).unwrap();
    let classes = conjugacy_classes(&s3);
    let rotations = [vec![qi(0), qi(0)], vec![qi(0), q(1, 2)], vec![q(1, 3), q(2, 3)]];
    let sectors = classes
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let dim = rotations[i].iter().filter(|r| **r == qi(0)).count() as u32;
            SectorDatum::new(&classes, i, 2, rotations[i].clone(), betti(dim)).unwrap()
        })
        .collect();
    show("S3 in its reflection representation", &CRProfile::new(&s3, 2, sectors).unwrap());
}
