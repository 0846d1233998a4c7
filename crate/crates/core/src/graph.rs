//! Decorated relative dual graphs.
//!
//! A [`RelGraph`] records the combinatorial type of a relative stable map:
//! vertices with genus, class and level, absolute and relative edges with
//! half-edge monodromies, and tails. This module validates the decoration
//! rules, computes genus and class, implements the two contraction moves and
//! builds the stratification poset they generate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{enumerate_partitions, ContactOrder};
use crate::inertia::ClassCatalog;
use crate::rational::{fmt_q, pair, Q};

/// Vertex cap for brute-force automorphism counting and poset generation.
pub const MAX_VERTICES: usize = 12;

/// Cap on the number of vertex permutations tried during canonicalization.
pub const MAX_PERMUTATIONS: u64 = 2_000_000;

pub type ClassVec = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph is disconnected ({components} components); use bullet_genus")]
    Disconnected { components: usize },
    #[error("edge {0} does not exist")]
    EdgeIndex(usize),
    #[error("edge {0} is relative; relative edges are removed only by level contraction")]
    RelativeEdge(usize),
    #[error("edge {edge} joins levels {a} and {b}; only same-level edges contract")]
    LevelMismatch { edge: usize, a: i32, b: i32 },
    #[error("level {0} has no vertices")]
    EmptyLevel(i32),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("invalid homology model: {0}")]
    Model(String),
    #[error("maximal graph is invalid: {0}")]
    InvalidMaximal(String),
}

/// Linear data on `H_2`: first Chern class, divisor pairing and the finite
/// list of classes allowed on vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyModel {
    rank: usize,
    #[serde(with = "crate::rational::serde_q_vec")]
    c1: Vec<Q>,
    #[serde(with = "crate::rational::serde_q_vec")]
    z_pairing: Vec<Q>,
    effective: Vec<ClassVec>,
}

impl HomologyModel {
    pub fn new(
        rank: usize,
        c1: Vec<Q>,
        z_pairing: Vec<Q>,
        mut effective: Vec<ClassVec>,
    ) -> Result<Self, GraphError> {
        if c1.len() != rank || z_pairing.len() != rank {
            return Err(GraphError::Model(format!(
                "c1 has length {}, z_pairing has length {}, rank is {rank}",
                c1.len(),
                z_pairing.len()
            )));
        }
        if let Some(bad) = effective.iter().find(|a| a.len() != rank) {
            return Err(GraphError::Model(format!("effective class {bad:?} has the wrong length")));
        }
        if !effective.iter().any(|a| a.iter().all(|&x| x == 0)) {
            return Err(GraphError::Model("the zero class must be effective".into()));
        }
        effective.sort();
        effective.dedup();
        Ok(HomologyModel { rank, c1, z_pairing, effective })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn effective(&self) -> &[ClassVec] {
        &self.effective
    }

    pub fn is_effective(&self, a: &[i64]) -> bool {
        self.effective.iter().any(|e| e.as_slice() == a)
    }

    pub fn c1(&self, a: &[i64]) -> Q {
        pair(&self.c1, a)
    }

    pub fn z(&self, a: &[i64]) -> Q {
        pair(&self.z_pairing, a)
    }

    pub fn zero(&self) -> ClassVec {
        vec![0; self.rank]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Absolute,
    Relative,
}

/// Field order is the sort order used by canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub level: i32,
    pub genus: u32,
    pub class: ClassVec,
}

/// An edge. `half.0` decorates the end at `ends.0`; for relative edges the
/// lower-level end carries the monodromy `(h)` and the other end `(h^-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub ends: (usize, usize),
    pub kind: Kind,
    pub half: (String, String),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact: Option<ContactOrder>,
    /// Opaque label carried through isomorphisms (used for basis labels).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tail {
    pub vertex: usize,
    pub kind: Kind,
    pub monodromy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact: Option<ContactOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelGraph {
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub tails: Vec<Tail>,
}

impl Edge {
    pub fn absolute(u: usize, v: usize, a: &str, b: &str) -> Self {
        Edge { ends: (u, v), kind: Kind::Absolute, half: (a.into(), b.into()), contact: None, tag: None }
    }

    /// `lower` carries `h`, `upper` carries `h_inv`.
    pub fn relative(lower: usize, upper: usize, h: &str, h_inv: &str, contact: ContactOrder) -> Self {
        Edge {
            ends: (lower, upper),
            kind: Kind::Relative,
            half: (h.into(), h_inv.into()),
            contact: Some(contact),
            tag: None,
        }
    }

    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

impl Tail {
    pub fn absolute(vertex: usize, monodromy: &str) -> Self {
        Tail { vertex, kind: Kind::Absolute, monodromy: monodromy.into(), contact: None, label: None }
    }

    pub fn relative(vertex: usize, monodromy: &str, contact: ContactOrder) -> Self {
        Tail {
            vertex,
            kind: Kind::Relative,
            monodromy: monodromy.into(),
            contact: Some(contact),
            label: None,
        }
    }
}

impl RelGraph {
    pub fn single(genus: u32, class: ClassVec) -> Self {
        RelGraph { vertices: vec![Vertex { level: 0, genus, class }], ..Default::default() }
    }

    pub fn max_level(&self) -> Option<i32> {
        self.vertices.iter().map(|v| v.level).max()
    }

    pub fn relative_tail_orders(&self) -> Vec<ContactOrder> {
        self.tails.iter().filter(|t| t.kind == Kind::Relative).filter_map(|t| t.contact).collect()
    }
}

/// Monodromy catalogs for absolute features (classes of the target's local
/// groups) and relative features (classes of the divisor's local groups).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decorations {
    pub absolute: ClassCatalog,
    pub relative: ClassCatalog,
}

impl Decorations {
    pub fn smooth() -> Self {
        Decorations { absolute: ClassCatalog::trivial(), relative: ClassCatalog::trivial() }
    }

    pub fn catalog(&self, kind: Kind) -> &ClassCatalog {
        match kind {
            Kind::Absolute => &self.absolute,
            Kind::Relative => &self.relative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Index,
    Rank,
    Effective,
    Level,
    LevelRange,
    Balance,
    Contact,
    TailLevel,
    TailSum,
    Flow,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Index => "index",
            Rule::Rank => "rank",
            Rule::Effective => "effective class",
            Rule::Level => "level rule",
            Rule::LevelRange => "level range",
            Rule::Balance => "balance",
            Rule::Contact => "contact order",
            Rule::TailLevel => "tail level",
            Rule::TailSum => "tail sum",
            Rule::Flow => "contact flow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "at", content = "index", rename_all = "snake_case")]
pub enum Location {
    Graph,
    Vertex(usize),
    Edge(usize),
    Tail(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Graph => write!(f, "graph"),
            Location::Vertex(i) => write!(f, "vertex {i}"),
            Location::Edge(i) => write!(f, "edge {i}"),
            Location::Tail(i) => write!(f, "tail {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub rule: Rule,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.location, self.rule.name(), self.message)
    }
}

/// Checks every decoration rule; an empty result means the graph is valid.
///
/// Rules: vertex classes are effective; absolute edges join equal levels and
/// relative edges adjacent levels; occupied levels are `0..=L`; half-edge
/// monodromies are mutually inverse; contact orders sit exactly on relative
/// features with `r` equal to the monodromy order; relative tails sit on the
/// top level; their contacts sum to the divisor pairing of the total class;
/// and at each vertex the upward minus downward contact equals the divisor
/// pairing of its class.
pub fn validate(g: &RelGraph, h: &HomologyModel, dec: &Decorations) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |rule, location, message: String| out.push(Diagnostic { rule, location, message });
    let nv = g.vertices.len();

    for (i, v) in g.vertices.iter().enumerate() {
        if v.class.len() != h.rank() {
            push(Rule::Rank, Location::Vertex(i), format!("class {:?} has rank {}", v.class, v.class.len()));
        } else if !h.is_effective(&v.class) {
            push(Rule::Effective, Location::Vertex(i), format!("class {:?} is not effective", v.class));
        }
    }

    let levels: BTreeSet<i32> = g.vertices.iter().map(|v| v.level).collect();
    if !levels.is_empty() && !levels.iter().copied().eq(0..=*levels.iter().last().unwrap()) {
        push(Rule::LevelRange, Location::Graph, format!("occupied levels {levels:?} are not 0..=L"));
    }
    let top = g.max_level();

    let mut up = vec![Q::zero(); nv];
    let mut down = vec![Q::zero(); nv];
    let mut flow_ok = true;

    for (i, e) in g.edges.iter().enumerate() {
        let loc = Location::Edge(i);
        let (a, b) = e.ends;
        if a >= nv || b >= nv {
            push(Rule::Index, loc, format!("endpoint out of range ({a}, {b})"));
            flow_ok = false;
            continue;
        }
        let (la, lb) = (g.vertices[a].level, g.vertices[b].level);
        match e.kind {
            Kind::Absolute if la != lb => {
                push(Rule::Level, loc, format!("absolute edge joins levels {la} and {lb}"));
            }
            Kind::Relative if (la - lb).abs() != 1 => {
                push(Rule::Level, loc, format!("relative edge joins levels {la} and {lb}"));
                flow_ok = false;
            }
            _ => {}
        }
        let cat = dec.catalog(e.kind);
        match cat.inverse(&e.half.0) {
            None => push(Rule::Balance, loc, format!("unknown class ({})", e.half.0)),
            Some(inv) if inv != e.half.1 => push(
                Rule::Balance,
                loc,
                format!("half-edges ({}) and ({}) are not mutually inverse", e.half.0, e.half.1),
            ),
            _ => {}
        }
        match (e.kind, e.contact) {
            (Kind::Absolute, Some(c)) => {
                push(Rule::Contact, loc, format!("absolute edge carries contact order {c}"))
            }
            (Kind::Relative, None) => {
                push(Rule::Contact, loc, "relative edge has no contact order".into());
                flow_ok = false;
            }
            (Kind::Relative, Some(c)) => {
                if c.k == 0 || c.r == 0 {
                    push(Rule::Contact, loc, format!("contact order {c} is not positive"));
                    flow_ok = false;
                    continue;
                }
                let lower = if la < lb { &e.half.0 } else { &e.half.1 };
                if let Some(o) = cat.order(lower) {
                    if o != c.r {
                        push(Rule::Contact, loc, format!("contact {c} but monodromy ({lower}) has order {o}"));
                    }
                }
                if (la - lb).abs() == 1 {
                    let (lo, hi) = if la < lb { (a, b) } else { (b, a) };
                    up[lo] += c.value();
                    down[hi] += c.value();
                }
            }
            (Kind::Absolute, None) => {}
        }
    }

    let mut tail_sum = Q::zero();
    for (i, t) in g.tails.iter().enumerate() {
        let loc = Location::Tail(i);
        if t.vertex >= nv {
            push(Rule::Index, loc, format!("vertex {} out of range", t.vertex));
            flow_ok = false;
            continue;
        }
        if !dec.catalog(t.kind).contains(&t.monodromy) {
            push(Rule::Balance, loc, format!("unknown class ({})", t.monodromy));
        }
        match (t.kind, t.contact) {
            (Kind::Absolute, Some(c)) => {
                push(Rule::Contact, loc, format!("absolute tail carries contact order {c}"))
            }
            (Kind::Relative, None) => {
                push(Rule::Contact, loc, "relative tail has no contact order".into());
                flow_ok = false;
            }
            (Kind::Relative, Some(c)) => {
                if c.k == 0 || c.r == 0 {
                    push(Rule::Contact, loc, format!("contact order {c} is not positive"));
                    flow_ok = false;
                    continue;
                }
                if let Some(o) = dec.relative.order(&t.monodromy) {
                    if o != c.r {
                        push(Rule::Contact, loc, format!("contact {c} but monodromy ({}) has order {o}", t.monodromy));
                    }
                }
                if Some(g.vertices[t.vertex].level) != top {
                    push(Rule::TailLevel, loc, "relative tail is not on a top-level vertex".into());
                }
                tail_sum += c.value();
                up[t.vertex] += c.value();
            }
            (Kind::Absolute, None) => {}
        }
    }

    if g.vertices.iter().all(|v| v.class.len() == h.rank()) {
        let z_total = g.vertices.iter().fold(Q::zero(), |acc, v| acc + h.z(&v.class));
        if tail_sum != z_total {
            push(
                Rule::TailSum,
                Location::Graph,
                format!("relative tail contacts sum to {} but Z.A = {}", fmt_q(&tail_sum), fmt_q(&z_total)),
            );
        }
        if flow_ok {
            for (i, v) in g.vertices.iter().enumerate() {
                let net = up[i] - down[i];
                let za = h.z(&v.class);
                if net != za {
                    push(
                        Rule::Flow,
                        Location::Vertex(i),
                        format!("upward minus downward contact is {} but Z.A_v = {}", fmt_q(&net), fmt_q(&za)),
                    );
                }
            }
        }
    }
    out.sort();
    out
}

/// Vertex sets of the connected components, each sorted, ordered by their
/// smallest vertex.
pub fn components(g: &RelGraph) -> Vec<Vec<usize>> {
    let n = g.vertices.len();
    let mut uf = UnionFind::new(n);
    for e in &g.edges {
        if e.ends.0 < n && e.ends.1 < n {
            uf.union(e.ends.0, e.ends.1);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        groups.entry(uf.find(v)).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

pub fn is_connected(g: &RelGraph) -> bool {
    components(g).len() == 1
}

fn betti_one(edges: usize, vertices: usize, components: usize) -> i64 {
    edges as i64 - vertices as i64 + components as i64
}

/// `dim H^1(G) + sum g_v` of a connected graph.
pub fn genus(g: &RelGraph) -> Result<u32, GraphError> {
    let c = components(g).len();
    if c != 1 {
        return Err(GraphError::Disconnected { components: c });
    }
    let h1 = betti_one(g.edges.len(), g.vertices.len(), 1);
    Ok(h1 as u32 + g.vertices.iter().map(|v| v.genus).sum::<u32>())
}

/// Genus of a possibly disconnected graph: the sum of component genera minus
/// `(#components - 1)`, so gluing two components at one node is additive.
pub fn bullet_genus(g: &RelGraph) -> i64 {
    let comps = components(g);
    let mut total = 0i64;
    for comp in &comps {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let edges = g.edges.iter().filter(|e| members.contains(&e.ends.0)).count();
        let gv: i64 = comp.iter().map(|&v| g.vertices[v].genus as i64).sum();
        total += betti_one(edges, comp.len(), 1) + gv;
    }
    total - (comps.len() as i64 - 1)
}

/// Componentwise sum of the vertex classes.
pub fn total_class(g: &RelGraph) -> ClassVec {
    let rank = g.vertices.iter().map(|v| v.class.len()).max().unwrap_or(0);
    let mut out = vec![0; rank];
    for v in &g.vertices {
        for (o, x) in out.iter_mut().zip(&v.class) {
            *o += x;
        }
    }
    out
}

fn add_classes(a: &[i64], b: &[i64]) -> ClassVec {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)).collect()
}

/// Rebuilds `g` after merging vertices: `target[v]` is the new index of `v`,
/// new vertices are given, and edges in `drop` disappear.
fn rebuild(g: &RelGraph, vertices: Vec<Vertex>, target: &[usize], drop: &BTreeSet<usize>) -> RelGraph {
    let edges = g
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, e)| Edge { ends: (target[e.ends.0], target[e.ends.1]), ..e.clone() })
        .collect();
    let tails = g.tails.iter().map(|t| Tail { vertex: target[t.vertex], ..t.clone() }).collect();
    RelGraph { vertices, edges, tails }
}

/// Contraction of type (i): a same-level edge. A non-loop merges its ends
/// (genera and classes add); a loop is removed and its vertex gains genus 1.
pub fn contract_edge(g: &RelGraph, e: usize) -> Result<RelGraph, GraphError> {
    let edge = g.edges.get(e).ok_or(GraphError::EdgeIndex(e))?;
    if edge.kind == Kind::Relative {
        return Err(GraphError::RelativeEdge(e));
    }
    let (a, b) = (edge.ends.0.min(edge.ends.1), edge.ends.0.max(edge.ends.1));
    if b >= g.vertices.len() {
        return Err(GraphError::EdgeIndex(e));
    }
    let (la, lb) = (g.vertices[a].level, g.vertices[b].level);
    if la != lb {
        return Err(GraphError::LevelMismatch { edge: e, a: la, b: lb });
    }
    let drop: BTreeSet<usize> = [e].into();
    if a == b {
        let mut vertices = g.vertices.clone();
        vertices[a].genus += 1;
        let target: Vec<usize> = (0..g.vertices.len()).collect();
        return Ok(rebuild(g, vertices, &target, &drop));
    }
    let mut vertices = g.vertices.clone();
    let merged = Vertex {
        level: la,
        genus: g.vertices[a].genus + g.vertices[b].genus,
        class: add_classes(&g.vertices[a].class, &g.vertices[b].class),
    };
    vertices[a] = merged;
    vertices.remove(b);
    let target: Vec<usize> = (0..g.vertices.len())
        .map(|v| match v.cmp(&b) {
            std::cmp::Ordering::Less => v,
            std::cmp::Ordering::Equal => a,
            std::cmp::Ordering::Greater => v - 1,
        })
        .collect();
    Ok(rebuild(g, vertices, &target, &drop))
}

/// Contraction of type (ii): every relative edge between levels `i` and
/// `i + 1` is contracted and all vertices above level `i` drop by one.
pub fn contract_level(g: &RelGraph, i: i32) -> Result<RelGraph, GraphError> {
    for l in [i, i + 1] {
        if !g.vertices.iter().any(|v| v.level == l) {
            return Err(GraphError::EmptyLevel(l));
        }
    }
    let n = g.vertices.len();
    let mut uf = UnionFind::new(n);
    let mut drop = BTreeSet::new();
    for (idx, e) in g.edges.iter().enumerate() {
        if e.kind != Kind::Relative {
            continue;
        }
        let (la, lb) = (g.vertices[e.ends.0].level, g.vertices[e.ends.1].level);
        if la.min(lb) == i && la.max(lb) == i + 1 {
            uf.union(e.ends.0, e.ends.1);
            drop.insert(idx);
        }
    }
    let mut reps: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
    // Use the smallest member as the representative of each group.
    let mut smallest: BTreeMap<usize, usize> = BTreeMap::new();
    for (v, &r) in reps.iter().enumerate() {
        smallest.entry(r).or_insert(v);
    }
    for r in reps.iter_mut() {
        *r = smallest[r];
    }
    let survivors: Vec<usize> = (0..n).filter(|&v| reps[v] == v).collect();
    let new_index: BTreeMap<usize, usize> = survivors.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let target: Vec<usize> = reps.iter().map(|r| new_index[r]).collect();

    let mut vertices: Vec<Vertex> = survivors
        .iter()
        .map(|&v| {
            let lvl = g.vertices[v].level;
            Vertex { level: if lvl > i { lvl - 1 } else { lvl }, genus: 0, class: Vec::new() }
        })
        .collect();
    let mut counts = vec![(0i64, 0i64); survivors.len()];
    for (v, vert) in g.vertices.iter().enumerate() {
        let t = target[v];
        vertices[t].genus += vert.genus;
        vertices[t].class = add_classes(&vertices[t].class, &vert.class);
        counts[t].1 += 1;
    }
    for &idx in &drop {
        counts[target[g.edges[idx].ends.0]].0 += 1;
    }
    for (vert, (edges, verts)) in vertices.iter_mut().zip(&counts) {
        // Cycles among the contracted edges become genus.
        vert.genus += (edges - verts + 1) as u32;
    }
    Ok(rebuild(g, vertices, &target, &drop))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical forms and automorphisms

/// Orients edges (`ends.0 <= ends.1`, loop halves sorted) and sorts edges and
/// tails. Two graphs are equal after normalization iff they differ only by
/// the order of edges and tails.
pub fn normalize(g: &RelGraph) -> RelGraph {
    let mut edges: Vec<Edge> = g
        .edges
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if e.ends.0 > e.ends.1 || (e.ends.0 == e.ends.1 && e.half.0 > e.half.1) {
                e.ends = (e.ends.1, e.ends.0);
                e.half = (e.half.1, e.half.0);
            }
            e
        })
        .collect();
    edges.sort();
    let mut tails = g.tails.clone();
    tails.sort();
    RelGraph { vertices: g.vertices.clone(), edges, tails }
}

/// Relabels vertices: old vertex `v` moves to position `perm[v]`.
pub fn relabel(g: &RelGraph, perm: &[usize]) -> RelGraph {
    let mut vertices = g.vertices.clone();
    for (v, vert) in g.vertices.iter().enumerate() {
        vertices[perm[v]] = vert.clone();
    }
    let edges = g
        .edges
        .iter()
        .map(|e| Edge { ends: (perm[e.ends.0], perm[e.ends.1]), ..e.clone() })
        .collect();
    let tails = g.tails.iter().map(|t| Tail { vertex: perm[t.vertex], ..t.clone() }).collect();
    normalize(&RelGraph { vertices, edges, tails })
}

type EdgeSig = (Kind, String, String, Option<ContactOrder>, Option<String>, bool, usize);

/// Isomorphism-invariant vertex colors by iterated refinement, as ranks.
fn vertex_colors(g: &RelGraph) -> Vec<usize> {
    let n = g.vertices.len();
    let mut tails: Vec<Vec<&Tail>> = vec![Vec::new(); n];
    for t in &g.tails {
        tails[t.vertex].push(t);
    }
    let initial: Vec<_> = (0..n)
        .map(|v| {
            let mut ts: Vec<_> = tails[v]
                .iter()
                .map(|t| (t.kind, t.monodromy.clone(), t.contact, t.label.clone()))
                .collect();
            ts.sort();
            (g.vertices[v].clone(), ts)
        })
        .collect();
    let mut colors = ranks(&initial);
    loop {
        let distinct = colors.iter().collect::<BTreeSet<_>>().len();
        let sigs: Vec<(usize, Vec<EdgeSig>)> = (0..n)
            .map(|v| {
                let mut s: Vec<EdgeSig> = Vec::new();
                for e in &g.edges {
                    let lp = e.is_loop();
                    if e.ends.0 == v {
                        s.push((e.kind, e.half.0.clone(), e.half.1.clone(), e.contact, e.tag.clone(), lp, colors[e.ends.1]));
                    }
                    if e.ends.1 == v && !lp {
                        s.push((e.kind, e.half.1.clone(), e.half.0.clone(), e.contact, e.tag.clone(), lp, colors[e.ends.0]));
                    }
                }
                s.sort();
                (colors[v], s)
            })
            .collect();
        let next = ranks(&sigs);
        let next_distinct = next.iter().collect::<BTreeSet<_>>().len();
        colors = next;
        if next_distinct == distinct {
            return colors;
        }
    }
}

fn ranks<T: Ord>(keys: &[T]) -> Vec<usize> {
    let sorted: BTreeSet<&T> = keys.iter().collect();
    let index: BTreeMap<&T, usize> = sorted.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    keys.iter().map(|k| index[k]).collect()
}

/// Color blocks in color order; each block lists vertices of one color.
fn color_blocks(g: &RelGraph) -> Vec<Vec<usize>> {
    let colors = vertex_colors(g);
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, c) in colors.into_iter().enumerate() {
        blocks.entry(c).or_default().push(v);
    }
    blocks.into_values().collect()
}

fn block_perm_count(blocks: &[Vec<usize>]) -> u64 {
    blocks
        .iter()
        .map(|b| (1..=b.len() as u64).product::<u64>())
        .try_fold(1u64, |acc, f| acc.checked_mul(f))
        .unwrap_or(u64::MAX)
}

/// Calls `f` with every permutation (`perm[old] = new`) that places block
/// `k` on the positions after blocks `0..k`.
fn for_each_block_perm(blocks: &[Vec<usize>], n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(
        blocks: &[Vec<usize>],
        bi: usize,
        used: &mut Vec<bool>,
        start: usize,
        pos: usize,
        perm: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if bi == blocks.len() {
            f(perm);
            return;
        }
        let block = &blocks[bi];
        let k = pos - start;
        if k == block.len() {
            let next_start = pos;
            let mut fresh = vec![false; blocks.get(bi + 1).map_or(0, Vec::len)];
            rec(blocks, bi + 1, &mut fresh, next_start, next_start, perm, f);
            return;
        }
        for (j, &v) in block.iter().enumerate() {
            if used[j] {
                continue;
            }
            used[j] = true;
            perm[v] = pos;
            rec(blocks, bi, used, start, pos + 1, perm, f);
            used[j] = false;
        }
    }
    if blocks.is_empty() {
        f(&[]);
        return;
    }
    let mut perm = vec![0; n];
    let mut used = vec![false; blocks[0].len()];
    rec(blocks, 0, &mut used, 0, 0, &mut perm, f);
}

/// Canonical representative of the isomorphism class of `g` together with
/// the vertex permutation (`perm[old] = new`) that produces it.
pub fn canonical_labeling(g: &RelGraph) -> Result<(RelGraph, Vec<usize>), GraphError> {
    let blocks = color_blocks(g);
    let count = block_perm_count(&blocks);
    if count > MAX_PERMUTATIONS {
        return Err(GraphError::Resource(format!(
            "canonical form needs {count} permutations (cap {MAX_PERMUTATIONS})"
        )));
    }
    let mut best: Option<(RelGraph, Vec<usize>)> = None;
    for_each_block_perm(&blocks, g.vertices.len(), &mut |perm| {
        let cand = relabel(g, perm);
        if best.as_ref().is_none_or(|(b, _)| cand < *b) {
            best = Some((cand, perm.to_vec()));
        }
    });
    Ok(best.expect("at least one permutation"))
}

pub fn canonical_form(g: &RelGraph) -> Result<RelGraph, GraphError> {
    canonical_labeling(g).map(|(c, _)| c)
}

/// Order of the group of vertex permutations preserving every decoration
/// (vertex data, edge multiset with half-edge decorations, tail multiset).
pub fn automorphism_order(g: &RelGraph) -> Result<u64, GraphError> {
    if g.vertices.len() > MAX_VERTICES {
        return Err(GraphError::Resource(format!(
            "{} vertices exceeds the cap of {MAX_VERTICES}",
            g.vertices.len()
        )));
    }
    let blocks = color_blocks(g);
    let count = block_perm_count(&blocks);
    if count > MAX_PERMUTATIONS {
        return Err(GraphError::Resource(format!(
            "automorphism search needs {count} permutations (cap {MAX_PERMUTATIONS})"
        )));
    }
    let mut base: Option<RelGraph> = None;
    let mut order = 0u64;
    for_each_block_perm(&blocks, g.vertices.len(), &mut |perm| {
        let cand = relabel(g, perm);
        let base = base.get_or_insert_with(|| cand.clone());
        if cand == *base {
            order += 1;
        }
    });
    Ok(order)
}

// ---------------------------------------------------------------------------
// DOT export

fn class_text(a: &[i64]) -> String {
    let parts: Vec<String> = a.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

pub fn vertex_label(v: &Vertex) -> String {
    format!("g={},A={},lvl={}", v.genus, class_text(&v.class), v.level)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn edge_label(e: &Edge, g: &RelGraph) -> String {
    let mut s = match (e.kind, e.contact) {
        (Kind::Relative, Some(c)) => {
            let lower = if g.vertices[e.ends.0].level <= g.vertices[e.ends.1].level { &e.half.0 } else { &e.half.1 };
            format!("ℓ={}/{},({})", c.k, c.r, lower)
        }
        _ => format!("({}),({})", e.half.0, e.half.1),
    };
    if let Some(t) = &e.tag {
        write!(s, ",{t}").unwrap();
    }
    s
}

fn tail_label(t: &Tail) -> String {
    let mut s = match t.contact {
        Some(c) => format!("ℓ={}/{},({})", c.k, c.r, t.monodromy),
        None => format!("({})", t.monodromy),
    };
    if let Some(l) = &t.label {
        write!(s, ",{l}").unwrap();
    }
    s
}

/// Graphviz rendering. Relative edges and tails are dashed.
pub fn to_dot(g: &RelGraph, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "graph \"{}\" {{", escape(name)).unwrap();
    for (i, v) in g.vertices.iter().enumerate() {
        writeln!(out, "  v{i} [label=\"{}\"];", escape(&vertex_label(v))).unwrap();
    }
    for e in &g.edges {
        let style = if e.kind == Kind::Relative { "style=dashed, " } else { "" };
        writeln!(
            out,
            "  v{} -- v{} [{}label=\"{}\"];",
            e.ends.0,
            e.ends.1,
            style,
            escape(&edge_label(e, g))
        )
        .unwrap();
    }
    for (i, t) in g.tails.iter().enumerate() {
        let style = if t.kind == Kind::Relative { "style=dashed, " } else { "" };
        writeln!(out, "  t{i} [shape=point];").unwrap();
        writeln!(out, "  v{} -- t{i} [{}label=\"{}\"];", t.vertex, style, escape(&tail_label(t))).unwrap();
    }
    out.push_str("}\n");
    out
}

/// One-line summary of a graph, used for poset node labels and tables.
pub fn summary(g: &RelGraph) -> String {
    let vs: Vec<String> = g.vertices.iter().map(vertex_label).collect();
    let es: Vec<String> = g
        .edges
        .iter()
        .map(|e| format!("{}-{}[{}]", e.ends.0, e.ends.1, edge_label(e, g)))
        .collect();
    let ts: Vec<String> = g.tails.iter().map(|t| format!("{}[{}]", t.vertex, tail_label(t))).collect();
    format!("V{{{}}} E{{{}}} T{{{}}}", vs.join("; "), es.join("; "), ts.join("; "))
}

// ---------------------------------------------------------------------------
// Stratification poset

/// Decorations of the one-vertex graph `Gamma_{g,m,A,T_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumType {
    pub genus: u32,
    pub class: ClassVec,
    /// Monodromy labels of the absolute tails.
    #[serde(default)]
    pub absolute_tails: Vec<String>,
    /// Contact orders and monodromy labels of the relative tails.
    #[serde(default)]
    pub relative_tails: Vec<(ContactOrder, String)>,
}

impl StratumType {
    pub fn maximal_graph(&self) -> RelGraph {
        let mut g = RelGraph::single(self.genus, self.class.clone());
        g.tails.extend(self.absolute_tails.iter().map(|m| Tail::absolute(0, m)));
        g.tails.extend(self.relative_tails.iter().map(|(c, m)| Tail::relative(0, m, *c)));
        normalize(&g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetBounds {
    pub max_vertices: usize,
    pub max_levels: usize,
    pub max_nodes: usize,
}

impl Default for PosetBounds {
    fn default() -> Self {
        PosetBounds { max_vertices: 3, max_levels: 2, max_nodes: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratPoset {
    /// Canonical graphs; node 0 is the maximal one-vertex graph.
    pub nodes: Vec<RelGraph>,
    /// `(lower, upper)`: `upper` is obtained from `lower` by one contraction.
    pub covers: Vec<(usize, usize)>,
    /// False when a bound stopped the enumeration early.
    pub complete: bool,
}

impl StratPoset {
    pub fn maximal(&self) -> Option<&RelGraph> {
        self.nodes.first()
    }
}

/// All single contractions of `g`.
pub fn single_contractions(g: &RelGraph) -> Vec<RelGraph> {
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if e.kind == Kind::Absolute {
            if let Ok(c) = contract_edge(g, i) {
                out.push(c);
            }
        }
    }
    if let Some(top) = g.max_level() {
        for l in 0..top {
            if let Ok(c) = contract_level(g, l) {
                out.push(c);
            }
        }
    }
    out
}

struct PosetSearch<'a> {
    ty: &'a StratumType,
    h: &'a HomologyModel,
    dec: &'a Decorations,
    bounds: PosetBounds,
    found: BTreeSet<RelGraph>,
    complete: bool,
}

/// Every valid connected graph (up to isomorphism) that contracts to the
/// one-vertex graph of type `ty`, within the vertex and level bounds,
/// together with the single-contraction relation.
pub fn stratification_poset(
    ty: &StratumType,
    h: &HomologyModel,
    dec: &Decorations,
    bounds: PosetBounds,
) -> Result<StratPoset, GraphError> {
    if bounds.max_vertices > MAX_VERTICES {
        return Err(GraphError::Resource(format!(
            "max_vertices {} exceeds the cap of {MAX_VERTICES}",
            bounds.max_vertices
        )));
    }
    let top = ty.maximal_graph();
    let diags = validate(&top, h, dec);
    if let Some(d) = diags.first() {
        return Err(GraphError::InvalidMaximal(d.to_string()));
    }
    let mut search = PosetSearch { ty, h, dec, bounds, found: BTreeSet::new(), complete: true };
    'outer: for nv in 1..=bounds.max_vertices.max(1) {
        for nl in 1..=bounds.max_levels.max(1).min(nv) {
            for counts in compositions(nv, nl) {
                let levels: Vec<i32> = counts
                    .iter()
                    .enumerate()
                    .flat_map(|(l, &c)| std::iter::repeat_n(l as i32, c))
                    .collect();
                search.with_levels(&levels)?;
                if !search.complete {
                    break 'outer;
                }
            }
        }
    }
    let mut nodes: Vec<RelGraph> = search.found.into_iter().collect();
    nodes.sort_by(|a, b| (a.vertices.len(), a.edges.len(), a).cmp(&(b.vertices.len(), b.edges.len(), b)));
    let index: BTreeMap<&RelGraph, usize> = nodes.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut covers = BTreeSet::new();
    for (i, g) in nodes.iter().enumerate() {
        for c in single_contractions(g) {
            let c = canonical_form(&c)?;
            if let Some(&j) = index.get(&c) {
                covers.insert((i, j));
            }
        }
    }
    Ok(StratPoset { covers: covers.into_iter().collect(), nodes, complete: search.complete })
}

/// Compositions of `n` into exactly `k` positive parts, lexicographic.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            if n >= 1 {
                prefix.push(n);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for first in 1..n {
            prefix.push(first);
            rec(n - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Multisets of size `k` drawn from `0..n`, as non-decreasing index lists.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in start..n {
            prefix.push(i);
            rec(n, k, i, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// All functions from `0..items` to `0..targets`.
fn assignments(items: usize, targets: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..items {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..targets).map(move |t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

impl PosetSearch<'_> {
    fn with_levels(&mut self, levels: &[i32]) -> Result<(), GraphError> {
        let nv = levels.len();
        let mut decorations = Vec::new();
        let mut current: Vec<(u32, ClassVec)> = Vec::with_capacity(nv);
        self.vertex_data(levels, 0, self.ty.genus, &mut current, &mut decorations);
        for data in decorations {
            let vertices: Vec<Vertex> = levels
                .iter()
                .zip(&data)
                .map(|(&level, (genus, class))| Vertex { level, genus: *genus, class: class.clone() })
                .collect();
            let used: u32 = data.iter().map(|(g, _)| g).sum();
            let edges = nv + (self.ty.genus - used) as usize - 1;
            self.with_vertices(vertices, edges)?;
            if !self.complete {
                return Ok(());
            }
        }
        Ok(())
    }

    /// Genus/class assignments, sorted within each level.
    fn vertex_data(
        &self,
        levels: &[i32],
        i: usize,
        genus_left: u32,
        current: &mut Vec<(u32, ClassVec)>,
        out: &mut Vec<Vec<(u32, ClassVec)>>,
    ) {
        if i == levels.len() {
            let total = current.iter().fold(self.h.zero(), |acc, (_, a)| add_classes(&acc, a));
            if total == self.ty.class {
                out.push(current.clone());
            }
            return;
        }
        for g in 0..=genus_left {
            for a in self.h.effective() {
                let cand = (g, a.clone());
                if i > 0 && levels[i - 1] == levels[i] && current[i - 1] > cand {
                    continue;
                }
                current.push(cand);
                self.vertex_data(levels, i + 1, genus_left - g, current, out);
                current.pop();
            }
        }
    }

    fn with_vertices(&mut self, vertices: Vec<Vertex>, edge_count: usize) -> Result<(), GraphError> {
        let nv = vertices.len();
        // Candidate edge slots without contact orders.
        let mut slots: Vec<Edge> = Vec::new();
        for u in 0..nv {
            for v in u..nv {
                let (lu, lv) = (vertices[u].level, vertices[v].level);
                if lu == lv {
                    for a in self.dec.absolute.labels() {
                        let inv = self.dec.absolute.inverse(a).unwrap();
                        if u == v && a > inv {
                            continue;
                        }
                        slots.push(Edge::absolute(u, v, a, inv));
                    }
                } else if lv == lu + 1 {
                    for hl in self.dec.relative.labels() {
                        let inv = self.dec.relative.inverse(hl).unwrap();
                        slots.push(Edge::relative(u, v, hl, inv, ContactOrder { k: 1, r: 1 }));
                    }
                }
            }
        }
        let top = vertices.iter().map(|v| v.level).max().unwrap_or(0);
        let top_vertices: Vec<usize> = (0..nv).filter(|&v| vertices[v].level == top).collect();
        // Contact flowing across the cut between levels l and l+1.
        let cut_sums: Vec<Q> = (0..top)
            .map(|l| {
                vertices
                    .iter()
                    .filter(|v| v.level <= l)
                    .fold(Q::zero(), |acc, v| acc + self.h.z(&v.class))
            })
            .collect();
        if cut_sums.iter().any(|s| !s.is_positive()) {
            return Ok(());
        }
        let abs_tails = &self.ty.absolute_tails;
        let rel_tails = &self.ty.relative_tails;
        let abs_places = assignments(abs_tails.len(), nv);
        let rel_places = assignments(rel_tails.len(), top_vertices.len());

        for choice in multisets(slots.len(), edge_count) {
            let mut edges: Vec<Edge> = choice.iter().map(|&s| slots[s].clone()).collect();
            let mut uf = UnionFind::new(nv);
            for e in &edges {
                uf.union(e.ends.0, e.ends.1);
            }
            if (0..nv).any(|v| uf.find(v) != uf.find(0)) {
                continue;
            }
            // Contacts per cut from the partitions of the cut sum.
            let mut per_cut: Vec<(Vec<usize>, Vec<Vec<ContactOrder>>)> = Vec::new();
            let mut feasible = true;
            for (l, sum) in cut_sums.iter().enumerate() {
                let idx: Vec<usize> = edges
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.kind == Kind::Relative && vertices[e.ends.0].level == l as i32)
                    .map(|(i, _)| i)
                    .collect();
                let orders: Vec<u64> =
                    idx.iter().map(|&i| self.dec.relative.order(&edges[i].half.0).unwrap()).collect();
                let parts = enumerate_partitions(sum, &orders);
                if parts.is_empty() {
                    feasible = false;
                    break;
                }
                per_cut.push((idx, parts));
            }
            if !feasible {
                continue;
            }
            let mut cursor = vec![0usize; per_cut.len()];
            loop {
                for (c, (idx, parts)) in per_cut.iter().enumerate() {
                    for (j, &ei) in idx.iter().enumerate() {
                        edges[ei].contact = Some(parts[cursor[c]][j]);
                    }
                }
                for ap in &abs_places {
                    for rp in &rel_places {
                        let mut tails: Vec<Tail> =
                            abs_tails.iter().zip(ap).map(|(m, &v)| Tail::absolute(v, m)).collect();
                        tails.extend(
                            rel_tails.iter().zip(rp).map(|((c, m), &k)| Tail::relative(top_vertices[k], m, *c)),
                        );
                        let g = RelGraph { vertices: vertices.clone(), edges: edges.clone(), tails };
                        if validate(&g, self.h, self.dec).is_empty() {
                            self.found.insert(canonical_form(&g)?);
                            if self.found.len() > self.bounds.max_nodes {
                                self.complete = false;
                                return Ok(());
                            }
                        }
                    }
                }
                // Advance the mixed-radix cursor over cut partitions.
                let mut c = 0;
                while c < cursor.len() {
                    cursor[c] += 1;
                    if cursor[c] < per_cut[c].1.len() {
                        break;
                    }
                    cursor[c] = 0;
                    c += 1;
                }
                if c == cursor.len() {
                    break;
                }
            }
        }
        Ok(())
    }
}

/// Graphviz rendering of a poset; arrows point from a graph to its
/// contraction.
pub fn poset_to_dot(p: &StratPoset, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    writeln!(out, "  node [shape=box];").unwrap();
    for (i, g) in p.nodes.iter().enumerate() {
        let label: Vec<String> = std::iter::once(format!("#{i}"))
            .chain(g.vertices.iter().map(vertex_label))
            .chain(g.edges.iter().map(|e| format!("{}-{} {}", e.ends.0, e.ends.1, edge_label(e, g))))
            .map(|s| escape(&s))
            .collect();
        writeln!(out, "  n{i} [label=\"{}\"];", label.join("\\n")).unwrap();
    }
    for (a, b) in &p.covers {
        writeln!(out, "  n{a} -> n{b};").unwrap();
    }
    out.push_str("}\n");
    out
}
