//! Virtual dimensions of the four moduli flavors and the dimension ledger
//! of a one-node splitting.

use orbi_degen::contact::ContactOrder;
use orbi_degen::contact::RelInsertion;
use orbi_degen::dimension::{splitting_ledger, virdim, Flavor, MarkedSector, ModuliSpec, RelSlot};
use orbi_degen::inertia::ClassCatalog;
use orbi_degen::rational::{fmt_q, q, qi};

fn main() {
    // A surface with c1(A) = 3 and a one-node degeneration along a curve Z
    // with Z.A = 2 on each side.
    let total = ModuliSpec::smooth_absolute(2, 0, 0, qi(2));
    let plus = ModuliSpec::smooth_relative(2, 0, 0, qi(3), &[2]);
    let minus = ModuliSpec::smooth_relative(2, 0, 0, qi(3), &[2]);
    for (name, s) in [("total", &total), ("plus", &plus), ("minus", &minus)] {
        println!("{name:>6}  {:<18} virdim {}", s.flavor.name(), fmt_q(&virdim(s).unwrap()));
    }
    let ledger = splitting_ledger(&plus, Some(&minus), &[qi(1)], &total, &ClassCatalog::trivial()).unwrap();
    println!("ledger defect {} (balanced: {})", fmt_q(&ledger.defect), ledger.is_balanced());

    // An orbifold point with age 1 and two half contacts with Z/2 monodromy.
    let half = RelSlot {
        insertion: RelInsertion { order: ContactOrder { k: 1, r: 2 }, monodromy: "1".into(), basis_label: None },
        shift: q(1, 2),
    };
    let orb = ModuliSpec {
        flavor: Flavor::RelativeOrbifold,
        n: 2,
        g: 0,
        m: 1,
        insertions: vec![MarkedSector { sector: "1".into(), shift: qi(1) }],
        rel_insertions: vec![half.clone(), half],
        c1a: qi(3),
        za: qi(1),
    };
    println!("relative orbifold virdim {}", fmt_q(&virdim(&orb).unwrap()));
}
