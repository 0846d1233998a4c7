//! Relative dual graphs: validation, contractions, canonical forms and the
//! stratification poset, with Graphviz output.

use orbi_degen::contact::ContactOrder;
use orbi_degen::graph::{
    automorphism_order, bullet_genus, canonical_form, contract_level, poset_to_dot, stratification_poset, summary,
    to_dot, total_class, validate, Decorations, Edge, HomologyModel, PosetBounds, RelGraph, StratumType, Tail, Vertex,
};
use orbi_degen::rational::qi;

fn main() {
    let h = HomologyModel::new(1, vec![qi(2)], vec![qi(1)], vec![vec![0], vec![1], vec![2]]).unwrap();
    let dec = Decorations::smooth();
    let one = ContactOrder::smooth(1);

    // Two components on the lower level, each meeting the upper one once.
    let g = RelGraph {
        vertices: vec![
            Vertex { level: 0, genus: 0, class: vec![1] },
            Vertex { level: 0, genus: 0, class: vec![1] },
            Vertex { level: 1, genus: 0, class: vec![0] },
        ],
        edges: vec![Edge::relative(0, 2, "0", "0", one), Edge::relative(1, 2, "0", "0", one)],
        tails: vec![Tail::relative(2, "0", ContactOrder::smooth(2))],
    };
    println!("{}", summary(&g));
    println!("diagnostics: {:?}", validate(&g, &h, &dec));
    println!("genus {}  class {:?}  |Aut| {}", bullet_genus(&g), total_class(&g), automorphism_order(&g).unwrap());

    let c = contract_level(&g, 0).unwrap();
    println!("after collapsing levels 0-1: {}", summary(&c));
    println!("genus {}  class {:?}", bullet_genus(&c), total_class(&c));
    println!("{}", to_dot(&canonical_form(&g).unwrap(), "two_to_one"));

    let ty = StratumType { genus: 0, class: vec![2], absolute_tails: vec![], relative_tails: vec![(ContactOrder::smooth(2), "0".into())] };
    let bounds = PosetBounds { max_vertices: 2, max_levels: 2, max_nodes: 1000 };
    let poset = stratification_poset(&ty, &h, &dec, bounds).unwrap();
    println!("poset: {} nodes, {} covers, complete {}", poset.nodes.len(), poset.covers.len(), poset.complete);
    print!("{}", poset_to_dot(&poset, "g0_A2"));
}
