//! Symbolic expansion of the degeneration formula.
//!
//! A splitting is stored as one glued graph: `-` side vertices on level 0,
//! `+` side vertices on level 1, and one relative edge per node. Terms tag
//! each node edge with a basis label and keep the glued graph in canonical
//! form, so term lists compare exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{aut_order, enumerate_partitions, ContactOrder, RelInsertion};
use crate::graph::{
    canonical_form, components, validate, ClassVec, Decorations, Edge, GraphError, HomologyModel, Kind, RelGraph,
    Tail, Vertex,
};
use crate::inertia::ClassCatalog;
use crate::rational::{fmt_q, qi, Q};

pub const PLUS_LEVEL: i32 = 1;
pub const MINUS_LEVEL: i32 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid basis: {0}")]
    Basis(String),
    #[error("basis has no entry on sector ({0})")]
    Coverage(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub label: String,
    pub sector: String,
    #[serde(with = "crate::rational::serde_q")]
    pub cr_degree: Q,
}

/// A basis of the Chen-Ruan cohomology of the divisor with its dual basis,
/// given as an involution on entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CRBasisZ {
    /// Complex dimension of the divisor.
    pub dim: u32,
    pub entries: Vec<BasisEntry>,
    /// `duality[i]` is the index of the dual of entry `i`.
    pub duality: Vec<usize>,
}

impl CRBasisZ {
    pub fn validate(&self, divisor: &ClassCatalog) -> Result<(), ExpandError> {
        let err = |s: String| Err(ExpandError::Basis(s));
        if self.duality.len() != self.entries.len() {
            return err(format!("{} entries but {} duality indices", self.entries.len(), self.duality.len()));
        }
        let labels: BTreeSet<&str> = self.entries.iter().map(|e| e.label.as_str()).collect();
        if labels.len() != self.entries.len() {
            return err("duplicate entry labels".into());
        }
        let top = qi(2 * self.dim as i64);
        for (i, (e, &j)) in self.entries.iter().zip(&self.duality).enumerate() {
            if j >= self.entries.len() || self.duality[j] != i {
                return err(format!("duality is not an involution at entry {i}"));
            }
            let Some(inv) = divisor.inverse(&e.sector) else {
                return err(format!("entry {} lives on unknown sector ({})", e.label, e.sector));
            };
            let d = &self.entries[j];
            if d.sector != inv {
                return err(format!("{} and its dual {} are not on inverse sectors", e.label, d.label));
            }
            if e.cr_degree + d.cr_degree != top {
                return err(format!(
                    "degrees of {} and {} sum to {}, expected {}",
                    e.label,
                    d.label,
                    fmt_q(&(e.cr_degree + d.cr_degree)),
                    fmt_q(&top)
                ));
            }
        }
        Ok(())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }

    pub fn dual_label(&self, label: &str) -> Option<&str> {
        self.index_of(label).map(|i| self.entries[self.duality[i]].label.as_str())
    }

    /// Entries on the given sector, in basis order.
    pub fn on_sector(&self, sector: &str) -> Vec<usize> {
        (0..self.entries.len()).filter(|&i| self.entries[i].sector == sector).collect()
    }
}

/// A labeled absolute insertion; its side is not prescribed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbsInsertion {
    pub label: String,
    pub monodromy: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingScenario {
    pub genus: u32,
    #[serde(default)]
    pub insertions: Vec<AbsInsertion>,
    /// Pairs `(A+, A-)` in the homology of the two sides.
    pub class_splittings: Vec<(ClassVec, ClassVec)>,
    pub max_nodes: usize,
    /// Divisor classes allowed as `+` side node monodromy; empty means all.
    #[serde(default)]
    pub monodromy_menu: Vec<String>,
    #[serde(with = "crate::rational::serde_q")]
    pub za: Q,
    pub plus: HomologyModel,
    pub minus: HomologyModel,
    /// Keep only index tuples whose `+` side labels have this total degree.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_q")]
    pub plus_degree: Option<Q>,
}

mod opt_q {
    use crate::rational::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(q) => s.serialize_some(&fmt_q(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_q(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl SplittingScenario {
    /// The same degeneration with the roles of the two sides exchanged.
    pub fn swapped(&self, divisor: &ClassCatalog) -> Self {
        SplittingScenario {
            class_splittings: self.class_splittings.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
            monodromy_menu: self
                .monodromy_menu
                .iter()
                .map(|h| divisor.inverse(h).unwrap_or(h).to_string())
                .collect(),
            plus: self.minus.clone(),
            minus: self.plus.clone(),
            plus_degree: None,
            ..self.clone()
        }
    }

    pub fn validate(&self, dec: &Decorations) -> Result<(), ExpandError> {
        let err = |s: String| Err(ExpandError::Scenario(s));
        if self.class_splittings.is_empty() {
            return err("no class splittings".into());
        }
        for (i, (ap, am)) in self.class_splittings.iter().enumerate() {
            if ap.len() != self.plus.rank() || am.len() != self.minus.rank() {
                return err(format!("class splitting {i} has the wrong rank"));
            }
            if self.plus.z(ap) != self.za || self.minus.z(am) != self.za {
                return err(format!(
                    "class splitting {i}: Z.A+ = {}, Z.A- = {}, zA = {}",
                    fmt_q(&self.plus.z(ap)),
                    fmt_q(&self.minus.z(am)),
                    fmt_q(&self.za)
                ));
            }
        }
        for h in &self.monodromy_menu {
            if !dec.relative.contains(h) {
                return err(format!("unknown divisor class ({h}) in monodromy menu"));
            }
        }
        let mut labels = BTreeSet::new();
        for a in &self.insertions {
            if !labels.insert(&a.label) {
                return err(format!("duplicate insertion label {}", a.label));
            }
            if !dec.absolute.contains(&a.monodromy) {
                return err(format!("insertion {} has unknown class ({})", a.label, a.monodromy));
            }
        }
        Ok(())
    }

    fn menu<'a>(&'a self, dec: &'a Decorations) -> Vec<&'a str> {
        if self.monodromy_menu.is_empty() {
            dec.relative.labels().collect()
        } else {
            let set: BTreeSet<&str> = self.monodromy_menu.iter().map(String::as_str).collect();
            set.into_iter().collect()
        }
    }
}

/// One splitting: the glued graph and its two sides.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Splitting {
    pub glued: RelGraph,
    pub gamma_plus: RelGraph,
    pub gamma_minus: RelGraph,
}

impl Splitting {
    pub fn nodes(&self) -> usize {
        self.glued.edges.len()
    }

    /// Contact orders of the nodes in edge order.
    pub fn contacts(&self) -> Vec<ContactOrder> {
        self.glued.edges.iter().filter_map(|e| e.contact).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingList {
    pub splittings: Vec<Splitting>,
    pub complete: bool,
}

/// Separates a glued graph into its `+` and `-` sides. Node `j` becomes the
/// `j`-th relative tail of each side; `+` tails carry `h` and the edge tag's
/// dual label, `-` tails carry `h^-1` and the tag.
pub fn split_sides(glued: &RelGraph, basis: Option<&CRBasisZ>) -> (RelGraph, RelGraph) {
    let mut index = vec![0usize; glued.vertices.len()];
    let mut sides = [RelGraph::default(), RelGraph::default()];
    for (v, vert) in glued.vertices.iter().enumerate() {
        let s = usize::from(vert.level == PLUS_LEVEL);
        index[v] = sides[s].vertices.len();
        sides[s].vertices.push(Vertex { level: 0, ..vert.clone() });
    }
    for t in &glued.tails {
        let s = usize::from(glued.vertices[t.vertex].level == PLUS_LEVEL);
        sides[s].tails.push(Tail { vertex: index[t.vertex], ..t.clone() });
    }
    for e in &glued.edges {
        // Edges run from the - end (ends.0) to the + end (ends.1).
        let c = e.contact.expect("node edges carry contact orders");
        let mut minus = Tail::relative(index[e.ends.0], &e.half.0, c);
        let mut plus = Tail::relative(index[e.ends.1], &e.half.1, c);
        minus.label = e.tag.clone();
        plus.label = match (basis, &e.tag) {
            (Some(b), Some(t)) => b.dual_label(t).map(str::to_string),
            _ => None,
        };
        sides[0].tails.push(minus);
        sides[1].tails.push(plus);
    }
    let [minus, plus] = sides;
    (plus, minus)
}

fn splitting_from(glued: RelGraph) -> Splitting {
    let (gamma_plus, gamma_minus) = split_sides(&glued, None);
    Splitting { glued, gamma_plus, gamma_minus }
}

/// All splittings of the scenario up to simultaneous isomorphism, in
/// canonical order.
///
/// Each side is a possibly disconnected graph whose vertices carry the
/// absolute insertions; the glued graph is connected of genus `g`, each
/// vertex's node contacts sum to the divisor pairing of its class, and the
/// classes on each side add up to a listed splitting.
pub fn enumerate_splittings(s: &SplittingScenario, dec: &Decorations) -> Result<SplittingList, ExpandError> {
    s.validate(dec)?;
    let mut found: BTreeSet<RelGraph> = BTreeSet::new();
    let menu = s.menu(dec);
    for (ap, am) in &s.class_splittings {
        for n in 0..=s.max_nodes {
            if n == 0 {
                if !s.za.is_zero() {
                    continue;
                }
                for (level, a_side, other, model) in
                    [(PLUS_LEVEL, ap, am, &s.plus), (MINUS_LEVEL, am, ap, &s.minus)]
                {
                    if other.iter().any(|&x| x != 0) || !model.is_effective(a_side) {
                        continue;
                    }
                    let mut g = RelGraph {
                        vertices: vec![Vertex { level, genus: s.genus, class: a_side.clone() }],
                        ..Default::default()
                    };
                    g.tails = s.insertions.iter().map(|a| labeled_tail(0, a)).collect();
                    found.insert(canonical_form(&g)?);
                }
                continue;
            }
            if s.za.is_zero() {
                continue;
            }
            for vp in 1..=n {
                for vm in 1..=(n + 1 - vp) {
                    let h1 = n as i64 - (vp + vm) as i64 + 1;
                    let genus_left = s.genus as i64 - h1;
                    if genus_left < 0 {
                        continue;
                    }
                    let plus_data = side_data(vp, genus_left as u32, ap, &s.plus);
                    let minus_data = side_data(vm, genus_left as u32, am, &s.minus);
                    for pd in &plus_data {
                        for md in &minus_data {
                            let gp: u32 = pd.iter().map(|x| x.0).sum();
                            let gm: u32 = md.iter().map(|x| x.0).sum();
                            if (gp + gm) as i64 != genus_left {
                                continue;
                            }
                            glue_nodes(s, dec, &menu, pd, md, n, &mut found)?;
                        }
                    }
                }
            }
        }
    }
    let splittings: Vec<Splitting> = found.into_iter().map(splitting_from).collect();
    Ok(SplittingList { splittings, complete: true })
}

fn labeled_tail(vertex: usize, a: &AbsInsertion) -> Tail {
    Tail { label: Some(a.label.clone()), ..Tail::absolute(vertex, &a.monodromy) }
}

/// Sorted `(genus, class)` lists of length `count` with total genus at most
/// `genus_left` and classes summing to `total`.
fn side_data(count: usize, genus_left: u32, total: &[i64], model: &HomologyModel) -> Vec<Vec<(u32, ClassVec)>> {
    fn rec(
        count: usize,
        genus_left: u32,
        total: &[i64],
        model: &HomologyModel,
        acc: &mut Vec<(u32, ClassVec)>,
        out: &mut Vec<Vec<(u32, ClassVec)>>,
    ) {
        if acc.len() == count {
            let mut sum = model.zero();
            for (_, a) in acc.iter() {
                for (s, x) in sum.iter_mut().zip(a) {
                    *s += x;
                }
            }
            if sum == total {
                out.push(acc.clone());
            }
            return;
        }
        for g in 0..=genus_left {
            for a in model.effective() {
                let cand = (g, a.clone());
                if acc.last().is_some_and(|last| *last > cand) {
                    continue;
                }
                acc.push(cand);
                rec(count, genus_left - g, total, model, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(count, genus_left, total, model, &mut Vec::new(), &mut out);
    out
}

fn glue_nodes(
    s: &SplittingScenario,
    dec: &Decorations,
    menu: &[&str],
    plus: &[(u32, ClassVec)],
    minus: &[(u32, ClassVec)],
    n: usize,
    found: &mut BTreeSet<RelGraph>,
) -> Result<(), ExpandError> {
    let vm = minus.len();
    let mut vertices: Vec<Vertex> = minus
        .iter()
        .map(|(g, a)| Vertex { level: MINUS_LEVEL, genus: *g, class: a.clone() })
        .collect();
    vertices.extend(plus.iter().map(|(g, a)| Vertex { level: PLUS_LEVEL, genus: *g, class: a.clone() }));
    let nv = vertices.len();
    let target_z: Vec<Q> = (0..nv)
        .map(|v| if v < vm { s.minus.z(&vertices[v].class) } else { s.plus.z(&vertices[v].class) })
        .collect();
    // Slots: (- vertex, + vertex, + side monodromy).
    let mut slots: Vec<(usize, usize, &str)> = Vec::new();
    for m in 0..vm {
        for p in vm..nv {
            for &h in menu {
                slots.push((m, p, h));
            }
        }
    }
    let places = assignments(s.insertions.len(), nv);
    for choice in multisets(slots.len(), n) {
        let chosen: Vec<(usize, usize, &str)> = choice.iter().map(|&i| slots[i]).collect();
        let mut reach = vec![false; nv];
        reach[0] = true;
        loop {
            let mut changed = false;
            for &(a, b, _) in &chosen {
                if reach[a] != reach[b] {
                    reach[a] = true;
                    reach[b] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if reach.iter().any(|r| !r) {
            continue;
        }
        let orders: Vec<u64> = chosen.iter().map(|&(_, _, h)| dec.relative.order(h).unwrap()).collect();
        for contacts in enumerate_partitions(&s.za, &orders) {
            let mut sums = vec![Q::zero(); nv];
            for (&(a, b, _), c) in chosen.iter().zip(&contacts) {
                sums[a] += c.value();
                sums[b] += c.value();
            }
            if sums != target_z {
                continue;
            }
            let edges: Vec<Edge> = chosen
                .iter()
                .zip(&contacts)
                .map(|(&(a, b, h), &c)| {
                    let inv = dec.relative.inverse(h).unwrap();
                    Edge::relative(a, b, inv, h, c)
                })
                .collect();
            for place in &places {
                let tails = s.insertions.iter().zip(place).map(|(a, &v)| labeled_tail(v, a)).collect();
                let g = RelGraph { vertices: vertices.clone(), edges: edges.clone(), tails };
                if sides_valid(&g, s, dec) {
                    found.insert(canonical_form(&g)?);
                }
            }
        }
    }
    Ok(())
}

fn sides_valid(g: &RelGraph, s: &SplittingScenario, dec: &Decorations) -> bool {
    let (plus, minus) = split_sides(g, None);
    validate(&plus, &s.plus, dec).is_empty() && validate(&minus, &s.minus, dec).is_empty()
}

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

fn assignments(items: usize, targets: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..items {
        let mut next = Vec::with_capacity(out.len() * targets);
        for p in &out {
            for t in 0..targets {
                let mut q = p.clone();
                q.push(t);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// `kappa = prod k_i` and `l = prod k_i / r_i`; the empty product is `(1, 1)`.
pub fn gluing_degrees(orders: &[ContactOrder]) -> (u64, Q) {
    let kappa = orders.iter().map(|o| o.k).product();
    let ell = orders.iter().fold(Q::one(), |acc, o| acc * o.value());
    (kappa, ell)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingBundleReport {
    pub kappa: u64,
    /// Normalization exponents `kappa / k_i`.
    pub exponents: Vec<u64>,
    /// Order of `Z_{r_1} x ... x Z_{r_k}`.
    pub group_order: u64,
    #[serde(with = "crate::rational::serde_q")]
    pub ell: Q,
}

pub fn gluing_bundle_report(orders: &[ContactOrder]) -> GluingBundleReport {
    let (kappa, _) = gluing_degrees(orders);
    let group_order: u64 = orders.iter().map(|o| o.r).product();
    GluingBundleReport {
        kappa,
        exponents: orders.iter().map(|o| kappa / o.k).collect(),
        group_order,
        ell: Q::new(kappa as i64, group_order as i64),
    }
}

/// One summand `C(Gamma, I) <a+ | b^I>_{Gamma+} <a- | b_I>_{Gamma-}`.
///
/// `index[j]` is the label `b_{i_j}` placed on the `-` end of node `j`; the
/// `+` end receives its dual.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub glued: RelGraph,
    pub gamma_plus: RelGraph,
    pub gamma_minus: RelGraph,
    pub index: Vec<String>,
    #[serde(with = "crate::rational::serde_q")]
    pub coefficient: Q,
}

impl Term {
    /// Builds a term from a tagged glued graph, recomputing the coefficient.
    pub fn from_glued(glued: &RelGraph, basis: &CRBasisZ) -> Result<Term, ExpandError> {
        let glued = canonical_form(glued)?;
        let (gamma_plus, gamma_minus) = split_sides(&glued, Some(basis));
        let index: Vec<String> = glued.edges.iter().map(|e| e.tag.clone().unwrap_or_default()).collect();
        let coefficient = coefficient(&glued, basis);
        Ok(Term { glued, gamma_plus, gamma_minus, index, coefficient })
    }

    pub fn contacts(&self) -> Vec<ContactOrder> {
        self.glued.edges.iter().filter_map(|e| e.contact).collect()
    }
}

/// The relative data `T(Gamma, b^I)` of the `+` side.
pub fn plus_relative_data(glued: &RelGraph, basis: &CRBasisZ) -> Vec<RelInsertion> {
    glued
        .edges
        .iter()
        .map(|e| RelInsertion {
            order: e.contact.expect("node edges carry contact orders"),
            monodromy: e.half.1.clone(),
            basis_label: e.tag.as_deref().and_then(|t| basis.dual_label(t)).map(str::to_string),
        })
        .collect()
}

/// `C(Gamma, I) = l(Gamma) |Aut(T(Gamma, b^I))|`.
pub fn coefficient(glued: &RelGraph, basis: &CRBasisZ) -> Q {
    let contacts: Vec<ContactOrder> = glued.edges.iter().filter_map(|e| e.contact).collect();
    let (_, ell) = gluing_degrees(&contacts);
    ell * qi(aut_order(&plus_relative_data(glued, basis)) as i64)
}

/// All terms of the expansion, sorted canonically.
pub fn expand(s: &SplittingScenario, basis: &CRBasisZ, dec: &Decorations) -> Result<Vec<Term>, ExpandError> {
    basis.validate(&dec.relative)?;
    for h in s.menu(dec) {
        let inv = dec.relative.inverse(h).unwrap();
        if basis.on_sector(inv).is_empty() {
            return Err(ExpandError::Coverage(inv.to_string()));
        }
    }
    let list = enumerate_splittings(s, dec)?;
    let mut terms = Vec::new();
    for sp in &list.splittings {
        let choices: Vec<Vec<usize>> = sp.glued.edges.iter().map(|e| basis.on_sector(&e.half.0)).collect();
        for tuple in product(&choices) {
            if let Some(want) = &s.plus_degree {
                let deg = tuple.iter().fold(Q::zero(), |acc, &i| acc + basis.entries[basis.duality[i]].cr_degree);
                if deg != *want {
                    continue;
                }
            }
            let mut g = sp.glued.clone();
            for (e, &i) in g.edges.iter_mut().zip(&tuple) {
                e.tag = Some(basis.entries[i].label.clone());
            }
            terms.push(Term::from_glued(&g, basis)?);
        }
    }
    terms.sort();
    Ok(terms)
}

fn product(choices: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for p in &out {
            for &x in c {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Exchanges the two sides of every term and replaces each index by its
/// dual tuple. Maps the terms of a scenario onto the terms of its swap.
pub fn side_swap(terms: &[Term], basis: &CRBasisZ) -> Result<Vec<Term>, ExpandError> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let mut g = t.glued.clone();
        for v in &mut g.vertices {
            v.level = if v.level == PLUS_LEVEL { MINUS_LEVEL } else { PLUS_LEVEL };
        }
        for e in &mut g.edges {
            e.ends = (e.ends.1, e.ends.0);
            e.half = (e.half.1.clone(), e.half.0.clone());
            if let Some(tag) = &e.tag {
                let dual = basis
                    .dual_label(tag)
                    .ok_or_else(|| ExpandError::Basis(format!("unknown basis label {tag}")))?;
                e.tag = Some(dual.to_string());
            }
        }
        out.push(Term::from_glued(&g, basis)?);
    }
    out.sort();
    Ok(out)
}

fn side_text(g: &RelGraph) -> String {
    if g.vertices.is_empty() {
        return "-".into();
    }
    let comps = components(g);
    let parts: Vec<String> = comps
        .iter()
        .flat_map(|c| c.iter())
        .map(|&v| {
            let vert = &g.vertices[v];
            let class: Vec<String> = vert.class.iter().map(i64::to_string).collect();
            let mut tails: Vec<String> = g
                .tails
                .iter()
                .filter(|t| t.vertex == v)
                .map(|t| {
                    let label = t.label.as_deref().unwrap_or("");
                    match (t.kind, t.contact) {
                        (Kind::Relative, Some(c)) => format!("{label}@{c}({})", t.monodromy),
                        _ => format!("{label}({})", t.monodromy),
                    }
                })
                .collect();
            tails.sort();
            format!("[g={} A=({}) {}]", vert.genus, class.join(","), tails.join(" "))
        })
        .collect();
    parts.join(" ")
}

/// Aligned plain-text table of terms.
pub fn terms_table(terms: &[Term]) -> String {
    let rows: Vec<[String; 4]> = terms
        .iter()
        .map(|t| {
            let idx = if t.index.is_empty() { "()".to_string() } else { format!("({})", t.index.join(",")) };
            [fmt_q(&t.coefficient), idx, side_text(&t.gamma_plus), side_text(&t.gamma_minus)]
        })
        .collect();
    let header = ["coef", "I", "Gamma+", "Gamma-"].map(String::from);
    let mut widths = header.clone().map(|h| h.chars().count());
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
    }
    out
}

/// Groups terms by splitting (the untagged glued graph).
pub fn terms_by_splitting(terms: &[Term]) -> BTreeMap<RelGraph, Vec<&Term>> {
    let mut out: BTreeMap<RelGraph, Vec<&Term>> = BTreeMap::new();
    for t in terms {
        let mut g = t.glued.clone();
        for e in &mut g.edges {
            e.tag = None;
        }
        let key = canonical_form(&g).unwrap_or(g);
        out.entry(key).or_default().push(t);
    }
    out
}
