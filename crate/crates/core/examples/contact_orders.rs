//! Fractional contact orders: partitions of a total contact, the floor
//! bracket, and automorphisms of relative insertions.

use orbi_degen::contact::{aut_order, bracket_split, enumerate_partitions, floor_bracket, ContactOrder, RelInsertion};
use orbi_degen::inertia::{ClassCatalog, FiniteGroupTable};
use orbi_degen::rational::{fmt_q, q, qi};

fn main() {
    for (total, orders) in [(qi(2), vec![2, 2]), (qi(1), vec![2, 2]), (q(5, 2), vec![2, 1, 2])] {
        let tuples = enumerate_partitions(&total, &orders);
        println!("total {} over orders {:?}: {} tuple(s)", fmt_q(&total), orders, tuples.len());
        for t in tuples {
            let parts: Vec<String> = t.iter().map(|c| c.to_string()).collect();
            println!("  ({})", parts.join(", "));
        }
    }

    let c = ContactOrder::new(5, 3).unwrap();
    let (whole, frac) = bracket_split(&c.value()).unwrap();
    println!("{c}: floor {} + fractional part {}", floor_bracket(&c.value()).unwrap(), fmt_q(&frac));
    assert_eq!(qi(whole) + frac, c.value());

    let z2 = ClassCatalog::from_group(&FiniteGroupTable::cyclic(2).unwrap());
    let half = ContactOrder::new(1, 2).unwrap();
    let a = RelInsertion::new(half, "1", Some("tw".into()), &z2).unwrap();
    let b = RelInsertion::new(ContactOrder::new(3, 2).unwrap(), "1", Some("tw".into()), &z2).unwrap();
    println!("|Aut| of (a, a, b) = {}", aut_order(&[a.clone(), a.clone(), b]));
    println!("order 1/1 with twisted monodromy rejected: {}", RelInsertion::new(ContactOrder::smooth(1), "1", None, &z2).is_err());
}
