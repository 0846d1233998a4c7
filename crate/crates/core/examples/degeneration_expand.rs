//! Terms of the degeneration formula for a smooth one-node scenario and for
//! a scenario with two identical nodes, plus the side swap.

use orbi_degen::contact::ContactOrder;
use orbi_degen::expand::{
    enumerate_splittings, expand, gluing_bundle_report, gluing_degrees, side_swap, terms_table, BasisEntry, CRBasisZ,
    SplittingScenario,
};
use orbi_degen::graph::{Decorations, HomologyModel};
use orbi_degen::rational::{fmt_q, qi};

fn basis(size: usize) -> CRBasisZ {
    let entries = (0..size)
        .map(|i| BasisEntry { label: format!("b{i}"), sector: "0".into(), cr_degree: qi(2 * i as i64) })
        .collect();
    CRBasisZ { dim: size as u32 - 1, entries, duality: (0..size).rev().collect() }
}

fn scenario(genus: u32, max_nodes: usize) -> SplittingScenario {
    let h = HomologyModel::new(1, vec![qi(2)], vec![qi(1)], vec![vec![0], vec![1], vec![2]]).unwrap();
    SplittingScenario {
        genus,
        insertions: vec![],
        class_splittings: vec![(vec![2], vec![2])],
        max_nodes,
        monodromy_menu: vec![],
        za: qi(2),
        plus: h.clone(),
        minus: h,
        plus_degree: None,
    }
}

fn main() {
    let c = |k, r| ContactOrder::new(k, r).unwrap();
    let (kappa, ell) = gluing_degrees(&[c(2, 1), c(3, 1)]);
    println!("contacts (2, 3): kappa {kappa}, ell {}", fmt_q(&ell));
    let report = gluing_bundle_report(&[c(2, 2), c(2, 1)]);
    println!("contacts (2/2, 2/1): exponents {:?}, group order {}, ell {}", report.exponents, report.group_order, fmt_q(&report.ell));

    let dec = Decorations::smooth();
    let one = scenario(0, 1);
    let b3 = basis(3);
    let terms = expand(&one, &b3, &dec).unwrap();
    println!("\none smooth node, basis of size 3:");
    print!("{}", terms_table(&terms));
    println!("swapped:");
    print!("{}", terms_table(&side_swap(&terms, &b3).unwrap()));

    let two = scenario(1, 2);
    let list = enumerate_splittings(&two, &dec).unwrap();
    println!("\ngenus 1, up to two nodes: {} splittings (complete: {})", list.splittings.len(), list.complete);
    print!("{}", terms_table(&expand(&two, &basis(1), &dec).unwrap()));
}
