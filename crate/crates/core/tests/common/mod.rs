//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's canonical forms, contractions or enumerators.

#![allow(dead_code)]

pub mod golden;

use std::collections::BTreeSet;

use orbi_degen::contact::ContactOrder;
use orbi_degen::expand::SplittingScenario;
use orbi_degen::graph::{validate, Decorations, Edge, HomologyModel, Kind, RelGraph, StratumType, Tail, Vertex};
use orbi_degen::inertia::ClassCatalog;
use orbi_degen::rational::Q;

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Graph rewritten under `perm` (old index -> new index) with edges and
/// tails in a fixed orientation and sorted.
fn apply(g: &RelGraph, perm: &[usize]) -> RelGraph {
    let mut vertices = vec![g.vertices[0].clone(); g.vertices.len()];
    for (old, &new) in perm.iter().enumerate() {
        vertices[new] = g.vertices[old].clone();
    }
    let mut edges: Vec<Edge> = g
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (perm[e.ends.0], perm[e.ends.1]);
            let mut e = e.clone();
            let flip = match e.kind {
                Kind::Absolute => a > b || (a == b && e.half.0 > e.half.1),
                Kind::Relative => vertices[a].level > vertices[b].level,
            };
            if flip {
                e.ends = (b, a);
                e.half = (e.half.1.clone(), e.half.0.clone());
            } else {
                e.ends = (a, b);
            }
            e
        })
        .collect();
    edges.sort();
    let mut tails: Vec<Tail> = g.tails.iter().map(|t| Tail { vertex: perm[t.vertex], ..t.clone() }).collect();
    tails.sort();
    RelGraph { vertices, edges, tails }
}

/// Lexicographically smallest relabeling over all vertex permutations.
pub fn oracle_canonical(g: &RelGraph) -> RelGraph {
    if g.vertices.is_empty() {
        let mut h = g.clone();
        h.edges.sort();
        h.tails.sort();
        return h;
    }
    permutations(g.vertices.len()).iter().map(|p| apply(g, p)).min().unwrap()
}

/// Number of vertex permutations fixing the canonical graph.
pub fn oracle_automorphisms(g: &RelGraph) -> u64 {
    let c = oracle_canonical(g);
    permutations(c.vertices.len()).iter().filter(|p| apply(&c, p) == c).count() as u64
}

pub fn connected(nv: usize, edges: &[(usize, usize)]) -> bool {
    if nv == 0 {
        return true;
    }
    let mut seen = vec![false; nv];
    seen[0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            if seen[a] != seen[b] {
                seen[a] = true;
                seen[b] = true;
                changed = true;
            }
        }
    }
    seen.iter().all(|&s| s)
}

pub fn genus(g: &RelGraph) -> i64 {
    let gsum: i64 = g.vertices.iter().map(|v| v.genus as i64).sum();
    gsum + g.edges.len() as i64 - g.vertices.len() as i64 + 1
}

pub fn class(g: &RelGraph, rank: usize) -> Vec<i64> {
    let mut out = vec![0; rank];
    for v in &g.vertices {
        for (o, x) in out.iter_mut().zip(&v.class) {
            *o += x;
        }
    }
    out
}

fn merge(g: &RelGraph, groups: &[Vec<usize>], new_level: impl Fn(&Vertex) -> i32, drop: &[usize]) -> RelGraph {
    // `groups` partitions the vertices; `drop` lists edges removed by the merge.
    let nv = g.vertices.len();
    let mut owner = vec![0; nv];
    for (i, grp) in groups.iter().enumerate() {
        for &v in grp {
            owner[v] = i;
        }
    }
    let rank = g.vertices[0].class.len();
    let mut vertices = Vec::new();
    for grp in groups {
        let inner = drop.iter().filter(|&&e| grp.contains(&g.edges[e].ends.0)).count() as i64;
        let genus: i64 = grp.iter().map(|&v| g.vertices[v].genus as i64).sum::<i64>() + inner - grp.len() as i64 + 1;
        let mut class = vec![0; rank];
        for &v in grp {
            for (c, x) in class.iter_mut().zip(&g.vertices[v].class) {
                *c += x;
            }
        }
        vertices.push(Vertex { level: new_level(&g.vertices[grp[0]]), genus: genus as u32, class });
    }
    let edges = g
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, e)| Edge { ends: (owner[e.ends.0], owner[e.ends.1]), ..e.clone() })
        .collect();
    let tails = g.tails.iter().map(|t| Tail { vertex: owner[t.vertex], ..t.clone() }).collect();
    RelGraph { vertices, edges, tails }
}

/// Contraction of one absolute edge.
pub fn oracle_contract_edge(g: &RelGraph, e: usize) -> RelGraph {
    let (a, b) = g.edges[e].ends;
    let groups: Vec<Vec<usize>> = (0..g.vertices.len())
        .filter(|&v| v != b || a == b)
        .map(|v| if v == a && a != b { vec![a, b] } else { vec![v] })
        .collect();
    merge(g, &groups, |v| v.level, &[e])
}

/// Collapse of levels `l` and `l + 1` along their relative edges.
pub fn oracle_contract_level(g: &RelGraph, l: i32) -> RelGraph {
    let nv = g.vertices.len();
    let drop: Vec<usize> = (0..g.edges.len())
        .filter(|&i| {
            let e = &g.edges[i];
            e.kind == Kind::Relative && {
                let (x, y) = (g.vertices[e.ends.0].level, g.vertices[e.ends.1].level);
                x.min(y) == l
            }
        })
        .collect();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &i in &drop {
        let (a, b) = g.edges[i].ends;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for v in 0..nv {
        let r = find(&mut parent, v);
        match roots.iter().position(|&x| x == r) {
            Some(i) => groups[i].push(v),
            None => {
                roots.push(r);
                groups.push(vec![v]);
            }
        }
    }
    merge(g, &groups, |v| if v.level > l { v.level - 1 } else { v.level }, &drop)
}

/// All single contractions, canonicalized by the oracle.
pub fn oracle_contractions(g: &RelGraph) -> Vec<RelGraph> {
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if e.kind == Kind::Absolute {
            out.push(oracle_canonical(&oracle_contract_edge(g, i)));
        }
    }
    let top = g.vertices.iter().map(|v| v.level).max().unwrap_or(0);
    for l in 0..top {
        out.push(oracle_canonical(&oracle_contract_level(g, l)));
    }
    out
}

fn tuples(len: usize, radix: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..radix).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Unordered pairs `(u, v)` with `u <= v`, chosen as a multiset of size `k`.
fn pair_multisets(nv: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|u| (u..nv).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    fn rec(p: &[(usize, usize)], k: usize, start: usize, acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if acc.len() == k {
            out.push(acc.clone());
            return;
        }
        for i in start..p.len() {
            acc.push(p[i]);
            rec(p, k, i, acc, out);
            acc.pop();
        }
    }
    rec(&pairs, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Every valid connected graph of the type with at most `max_vertices`
/// vertices and `max_levels` levels, found by exhaustive search over raw
/// vertex data, edge multisets, decorations and tail placements.
pub fn brute_force_poset(
    ty: &StratumType,
    h: &HomologyModel,
    dec: &Decorations,
    max_vertices: usize,
    max_levels: usize,
) -> (BTreeSet<RelGraph>, usize) {
    let mut found = BTreeSet::new();
    let za: Q = h.z(&ty.class);
    let rel_orders: Vec<u64> = dec.relative.labels().map(|l| dec.relative.order(l).unwrap()).collect();
    let max_r = rel_orders.iter().copied().max().unwrap_or(1);
    let kmax = (za * Q::from_integer(max_r as i64)).to_integer().max(1) as u64;
    let abs_labels: Vec<String> = dec.absolute.labels().map(String::from).collect();
    let rel_labels: Vec<String> = dec.relative.labels().map(String::from).collect();
    for nv in 1..=max_vertices {
        for levels in tuples(nv, max_levels) {
            let mut occupied: Vec<usize> = levels.clone();
            occupied.sort();
            occupied.dedup();
            if occupied != (0..occupied.len()).collect::<Vec<_>>() {
                continue;
            }
            let nclasses = h.effective().len();
            for gen in tuples(nv, ty.genus as usize + 1) {
                let gsum: usize = gen.iter().sum();
                if gsum > ty.genus as usize {
                    continue;
                }
                let ne = ty.genus as usize - gsum + nv - 1;
                for cls in tuples(nv, nclasses) {
                    let vertices: Vec<Vertex> = (0..nv)
                        .map(|i| Vertex { level: levels[i] as i32, genus: gen[i] as u32, class: h.effective()[cls[i]].clone() })
                        .collect();
                    let g0 = RelGraph { vertices, edges: vec![], tails: vec![] };
                    if class(&g0, h.rank()) != ty.class {
                        continue;
                    }
                    for pairs in pair_multisets(nv, ne) {
                        if !connected(nv, &pairs) {
                            continue;
                        }
                        let kinds: Option<Vec<Kind>> = pairs
                            .iter()
                            .map(|&(u, v)| match (levels[u] as i64 - levels[v] as i64).abs() {
                                0 => Some(Kind::Absolute),
                                1 => Some(Kind::Relative),
                                _ => None,
                            })
                            .collect();
                        let Some(kinds) = kinds else { continue };
                        // Decoration choices per edge.
                        let choices: Vec<Vec<Edge>> = pairs
                            .iter()
                            .zip(&kinds)
                            .map(|(&(u, v), k)| match k {
                                Kind::Absolute => abs_labels
                                    .iter()
                                    .map(|a| Edge::absolute(u, v, a, dec.absolute.inverse(a).unwrap()))
                                    .collect(),
                                Kind::Relative => {
                                    let (lo, hi) = if levels[u] < levels[v] { (u, v) } else { (v, u) };
                                    let mut out = Vec::new();
                                    for hl in &rel_labels {
                                        let r = dec.relative.order(hl).unwrap();
                                        for k in 1..=kmax {
                                            out.push(Edge::relative(
                                                lo,
                                                hi,
                                                hl,
                                                dec.relative.inverse(hl).unwrap(),
                                                ContactOrder { k, r },
                                            ));
                                        }
                                    }
                                    out
                                }
                            })
                            .collect();
                        let radices: Vec<usize> = choices.iter().map(Vec::len).collect();
                        let mut idx = vec![0usize; radices.len()];
                        loop {
                            let edges: Vec<Edge> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
                            for ap in tuples(ty.absolute_tails.len(), nv) {
                                for rp in tuples(ty.relative_tails.len(), nv) {
                                    let mut tails: Vec<Tail> =
                                        ty.absolute_tails.iter().zip(&ap).map(|(m, &v)| Tail::absolute(v, m)).collect();
                                    tails.extend(ty.relative_tails.iter().zip(&rp).map(|((c, m), &v)| Tail::relative(v, m, *c)));
                                    let g = RelGraph { vertices: g0.vertices.clone(), edges: edges.clone(), tails };
                                    if validate(&g, h, dec).is_empty() {
                                        found.insert(oracle_canonical(&g));
                                    }
                                }
                            }
                            let mut c = 0;
                            while c < idx.len() {
                                idx[c] += 1;
                                if idx[c] < radices[c] {
                                    break;
                                }
                                idx[c] = 0;
                                c += 1;
                            }
                            if c == idx.len() {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    let covers = found
        .iter()
        .map(|g| oracle_contractions(g).into_iter().filter(|c| found.contains(c)).collect::<BTreeSet<_>>().len())
        .sum();
    (found, covers)
}

/// One side of a splitting before gluing: components and, per node slot,
/// `(component, monodromy at this side, contact)`.
#[derive(Clone, Debug)]
struct Side {
    comps: Vec<(u32, Vec<i64>)>,
    slots: Vec<(usize, String, ContactOrder)>,
}

fn sides(
    n: usize,
    total: &[i64],
    model: &HomologyModel,
    genus_max: u32,
    labels: &[String],
    catalog: &ClassCatalog,
    kmax: u64,
) -> Vec<Side> {
    let mut out = Vec::new();
    for c in 1..=n {
        for gen in tuples(c, genus_max as usize + 1) {
            if gen.iter().sum::<usize>() > genus_max as usize {
                continue;
            }
            for cls in tuples(c, model.effective().len()) {
                let comps: Vec<(u32, Vec<i64>)> =
                    (0..c).map(|i| (gen[i] as u32, model.effective()[cls[i]].clone())).collect();
                let mut sum = vec![0; model.rank()];
                for (_, a) in &comps {
                    for (s, x) in sum.iter_mut().zip(a) {
                        *s += x;
                    }
                }
                if sum != total {
                    continue;
                }
                for owners in tuples(n, c) {
                    if (0..c).any(|i| !owners.contains(&i)) {
                        continue;
                    }
                    for labs in tuples(n, labels.len()) {
                        for ks in tuples(n, kmax as usize) {
                            let slots: Vec<(usize, String, ContactOrder)> = (0..n)
                                .map(|j| {
                                    let l = &labels[labs[j]];
                                    (owners[j], l.clone(), ContactOrder { k: ks[j] as u64 + 1, r: catalog.order(l).unwrap() })
                                })
                                .collect();
                            let ok = (0..c).all(|i| {
                                let s: Q = slots.iter().filter(|x| x.0 == i).map(|x| x.2.value()).sum();
                                s == model.z(&comps[i].1)
                            });
                            if ok {
                                out.push(Side { comps: comps.clone(), slots });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Splittings found by enumerating both sides independently and then all
/// bijections between their node slots. Returns oracle-canonical glued
/// graphs (untagged).
pub fn brute_force_splittings(s: &SplittingScenario, dec: &Decorations) -> BTreeSet<RelGraph> {
    let mut found = BTreeSet::new();
    let menu: Vec<String> = if s.monodromy_menu.is_empty() {
        dec.relative.labels().map(String::from).collect()
    } else {
        let set: BTreeSet<String> = s.monodromy_menu.iter().cloned().collect();
        set.into_iter().collect()
    };
    let inv_menu: Vec<String> = {
        let set: BTreeSet<String> = menu.iter().map(|h| dec.relative.inverse(h).unwrap().to_string()).collect();
        set.into_iter().collect()
    };
    let max_r = menu.iter().map(|h| dec.relative.order(h).unwrap()).max().unwrap_or(1);
    let kmax = (s.za * Q::from_integer(max_r as i64)).to_integer().max(0) as u64;
    for (ap, am) in &s.class_splittings {
        if s.za == Q::from_integer(0) {
            for (level, a, other, model) in [(1, ap, am, &s.plus), (0, am, ap, &s.minus)] {
                if other.iter().all(|&x| x == 0) && model.is_effective(a) {
                    for _ in 0..1 {
                        let g = RelGraph {
                            vertices: vec![Vertex { level, genus: s.genus, class: a.clone() }],
                            edges: vec![],
                            tails: s
                                .insertions
                                .iter()
                                .map(|i| Tail { label: Some(i.label.clone()), ..Tail::absolute(0, &i.monodromy) })
                                .collect(),
                        };
                        found.insert(oracle_canonical(&g));
                    }
                }
            }
            continue;
        }
        for n in 1..=s.max_nodes {
            let plus = sides(n, ap, &s.plus, s.genus, &menu, &dec.relative, kmax);
            let minus = sides(n, am, &s.minus, s.genus, &inv_menu, &dec.relative, kmax);
            for p in &plus {
                for m in &minus {
                    for sigma in permutations(n) {
                        // Plus slot j meets minus slot sigma[j].
                        let ok = (0..n).all(|j| {
                            let (ps, ms) = (&p.slots[j], &m.slots[sigma[j]]);
                            ps.2 == ms.2 && dec.relative.inverse(&ps.1).unwrap() == ms.1
                        });
                        if !ok {
                            continue;
                        }
                        let vm = m.comps.len();
                        let mut vertices: Vec<Vertex> =
                            m.comps.iter().map(|(g, a)| Vertex { level: 0, genus: *g, class: a.clone() }).collect();
                        vertices.extend(p.comps.iter().map(|(g, a)| Vertex { level: 1, genus: *g, class: a.clone() }));
                        let edges: Vec<Edge> = (0..n)
                            .map(|j| {
                                let (ps, ms) = (&p.slots[j], &m.slots[sigma[j]]);
                                Edge::relative(ms.0, vm + ps.0, &ms.1, &ps.1, ps.2)
                            })
                            .collect();
                        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| e.ends).collect();
                        if !connected(vertices.len(), &pairs) {
                            continue;
                        }
                        let base = RelGraph { vertices, edges, tails: vec![] };
                        if genus(&base) != s.genus as i64 {
                            continue;
                        }
                        for place in tuples(s.insertions.len(), base.vertices.len()) {
                            let mut g = base.clone();
                            g.tails = s
                                .insertions
                                .iter()
                                .zip(&place)
                                .map(|(i, &v)| Tail { label: Some(i.label.clone()), ..Tail::absolute(v, &i.monodromy) })
                                .collect();
                            found.insert(oracle_canonical(&g));
                        }
                    }
                }
            }
        }
    }
    found
}
