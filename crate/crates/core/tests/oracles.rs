mod common;

use std::collections::BTreeSet;

use common::*;
use orbi_degen::cli::Workspace;
use orbi_degen::expand::{enumerate_splittings, expand, CRBasisZ};
use orbi_degen::graph::{
    automorphism_order, canonical_form, contract_edge, contract_level, stratification_poset, Kind, RelGraph,
};

fn workspace(path: &str) -> Workspace {
    Workspace::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn posets_match_brute_force() {
    let ws = workspace("data/posets.json");
    for p in &ws.doc.posets {
        let dec = ws.decorations(&p.absolute_group, &p.relative_group);
        let h = &ws.homology[&p.homology];
        let lib = stratification_poset(&p.stratum, h, &dec, p.bounds).unwrap();
        assert!(lib.complete);
        let (nodes, covers) = brute_force_poset(&p.stratum, h, &dec, p.bounds.max_vertices, p.bounds.max_levels);
        let lib_nodes: BTreeSet<RelGraph> = lib.nodes.iter().map(oracle_canonical).collect();
        assert_eq!(lib_nodes, nodes, "{}", p.name);
        assert_eq!(lib.covers.len(), covers, "{}", p.name);
    }
}

#[test]
fn contractions_match_oracle() {
    let ws = workspace("data/posets.json");
    let p = &ws.doc.posets[2];
    let dec = ws.decorations(&p.absolute_group, &p.relative_group);
    let lib = stratification_poset(&p.stratum, &ws.homology[&p.homology], &dec, p.bounds).unwrap();
    for g in &lib.nodes {
        for (i, e) in g.edges.iter().enumerate() {
            if e.kind == Kind::Absolute {
                let ours = oracle_canonical(&oracle_contract_edge(g, i));
                assert_eq!(oracle_canonical(&contract_edge(g, i).unwrap()), ours);
            }
        }
        let top = g.max_level().unwrap();
        for l in 0..top {
            let ours = oracle_canonical(&oracle_contract_level(g, l));
            assert_eq!(oracle_canonical(&contract_level(g, l).unwrap()), ours);
        }
    }
}

#[test]
fn automorphisms_match_oracle() {
    let ws = workspace("data/posets.json");
    for p in &ws.doc.posets {
        let dec = ws.decorations(&p.absolute_group, &p.relative_group);
        let lib = stratification_poset(&p.stratum, &ws.homology[&p.homology], &dec, p.bounds).unwrap();
        for g in &lib.nodes {
            assert_eq!(automorphism_order(g).unwrap(), oracle_automorphisms(g), "{g:?}");
            // Canonical forms agree up to the oracle's own canonicalization.
            for perm in permutations(g.vertices.len()) {
                let h = orbi_degen::graph::relabel(g, &perm);
                assert_eq!(canonical_form(&h).unwrap(), canonical_form(g).unwrap());
            }
        }
    }
}

fn check_expand(path: &str) {
    let ws = workspace(path);
    for s in &ws.doc.scenarios {
        let (scenario, dec) = ws.scenario(s).unwrap();
        let basis: &CRBasisZ = &ws.doc.bases.iter().find(|b| Some(&b.name) == s.basis.as_ref()).unwrap().basis;
        let oracle = brute_force_splittings(&scenario, &dec);
        let lib = enumerate_splittings(&scenario, &dec).unwrap();
        let lib_set: BTreeSet<RelGraph> = lib.splittings.iter().map(|sp| oracle_canonical(&sp.glued)).collect();
        assert_eq!(lib_set, oracle, "{path}: {}", s.name);
        assert_eq!(lib.splittings.len(), oracle.len());
        // Term count: product over nodes of the basis support size.
        let expected: usize = oracle
            .iter()
            .map(|g| g.edges.iter().map(|e| basis.on_sector(&e.half.0).len()).product::<usize>())
            .sum();
        assert_eq!(expand(&scenario, basis, &dec).unwrap().len(), expected, "{path}: {}", s.name);
    }
}

#[test]
fn expand_matches_side_bijection_oracle() {
    for path in ["data/smooth1.json", "data/duplicate.json", "data/z2_scenario.json", "data/three_nodes.json"] {
        check_expand(path);
    }
}
