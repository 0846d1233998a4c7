//! CLI invocations with golden outputs under `tests/golden`.

use orbi_degen::cli::run;

pub const CASES: &[(&str, &[&str], i32)] = &[
    ("sectors_ex_z3", &["sectors", "--in", "data/ex_z3.json"], 0),
    ("sectors_profiles", &["sectors", "--in", "data/profiles.json"], 0),
    ("sectors_profiles_json", &["--json", "sectors", "--in", "data/profiles.json", "--name", "z6_c2"], 0),
    ("sectors_corrupt", &["sectors", "--in", "data/corrupt_profiles.json"], 1),
    ("graphs_validate", &["graphs", "validate", "--in", "data/graphs.json"], 0),
    ("graphs_validate_invalid", &["graphs", "validate", "--in", "data/invalid_graphs.json"], 1),
    ("graphs_validate_dot", &["graphs", "validate", "--in", "data/graphs.json", "--dot"], 0),
    ("graphs_genus", &["graphs", "genus", "--in", "data/graphs.json"], 0),
    ("graphs_contract_level", &["graphs", "contract", "--in", "data/graphs.json", "--name", "two_level", "--level", "0"], 0),
    ("graphs_contract_edge_json", &["--json", "graphs", "contract", "--in", "data/graphs.json", "--name", "loop", "--edge", "0"], 0),
    ("graphs_poset", &["graphs", "poset", "--in", "data/posets.json"], 0),
    ("graphs_poset_dot", &["graphs", "poset", "--in", "data/posets.json", "--name", "genus0_class1", "--dot"], 0),
    ("dim_virdim", &["dim", "virdim", "--in", "data/dims.json"], 0),
    ("dim_ledger", &["dim", "ledger", "--in", "data/dims.json"], 0),
    ("dim_ledger_json", &["--json", "dim", "ledger", "--in", "data/dims.json"], 0),
    ("partitions_2_22", &["partitions", "--total", "2", "--orders", "2,2"], 0),
    ("partitions_json", &["--json", "partitions", "--total", "5/2", "--orders", "2,1,2"], 0),
    ("expand_smooth1", &["expand", "--in", "data/smooth1.json"], 0),
    ("expand_smooth1_json", &["--json", "expand", "--in", "data/smooth1.json"], 0),
    ("expand_duplicate", &["expand", "--in", "data/duplicate.json"], 0),
    ("expand_z2", &["expand", "--in", "data/z2_scenario.json"], 0),
    ("expand_z2_swap", &["expand", "--in", "data/z2_scenario.json", "--swap"], 0),
    ("expand_three_nodes", &["expand", "--in", "data/three_nodes.json"], 0),
    ("glue_sphere", &["glue", "demo", "sphere", "--scale", "1.05"], 0),
    ("glue_node", &["glue", "demo", "node", "--tau", "0.25"], 0),
    ("glue_linear_json", &["--json", "glue", "demo", "linear"], 0),
];

pub fn invoke(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let argv: Vec<String> = std::iter::once("orbi-degen").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (code, out, err)
}
