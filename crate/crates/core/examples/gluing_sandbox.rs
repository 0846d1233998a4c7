//! The correction scheme on the builtin finite-dimensional models:
//! estimated constants, Picard iteration and chart probes.

use orbi_degen::glue::{
    chart_map, correct, demo, estimate_constants, jacobian_consistency, model, builtin_models, EstimateOptions,
    Vector, MODEL_NAMES,
};

fn main() {
    // A radially mis-scaled chart of the unit sphere: x(s) sits at radius
    // 1.05 and the correction pulls it back by 0.105 in the normal direction.
    let m = model("sphere", 0.0, 1.05).unwrap();
    let s = Vector::from_vec(vec![1.0, 0.3]);
    let corr = correct(m.system.as_ref(), m.chart.as_ref(), &s, 1e-12, 50).unwrap();
    for row in &corr.history {
        println!("n={:<2} |xi|={:.12} residual={:.3e}", row.n, row.xi_norm, row.residual);
    }
    println!("|xi| = {:.12}, within 2|t(x(s))|: {}", corr.xi_norm(), corr.xi_bound_ok);

    let consts = estimate_constants(m.system.as_ref(), m.chart.as_ref(), EstimateOptions::default()).unwrap();
    let c = consts.constants;
    println!("C1 {:.4}  C2 {:.4}  eps1 {:.4}  delta1 {:.4}  ordering ok: {}", c.c1, c.c2, c.eps1, c.delta1, consts.ordering_ok);

    // Node smoothing xy = tau, parametrized by x.
    let node = model("node", 0.25, 1.0).unwrap();
    let probe = chart_map(node.chart.as_ref(), &Vector::from_element(1, 0.5), &Vector::from_element(1, 0.01));
    println!("node: |D Phi| = {:.6} (bound violated: {})", probe.derivative_norm, probe.violation);

    for (name, m) in MODEL_NAMES.iter().zip(builtin_models()) {
        let err = jacobian_consistency(&m, 20, 3).unwrap();
        println!("{name}: relative Jacobian discrepancy {err:.2e}");
    }

    let report = demo("node", 0.25, 1.0).unwrap();
    println!("node demo: |xi| bound {}, |DPhi| bound {}", report.xi_bound_verdict, report.chart_norm_verdict);
}
