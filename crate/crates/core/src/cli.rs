//! Command-line front end.
//!
//! Input files are JSON documents with `"schema": "orbi-degen/1"` and named
//! arrays of groups, profiles, homology models, graphs, moduli specs,
//! ledgers, posets, scenarios and bases. Every report prints as an aligned
//! text table, or as JSON with `--json`.
//!
//! Exit codes: 0 success, 1 validation error, 2 usage error, 3 resource
//! bound hit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::contact::{enumerate_partitions, ContactOrder};
use crate::dimension::{splitting_ledger, virdim, Ledger, ModuliSpec};
use crate::expand::{self, CRBasisZ, SplittingScenario, Term};
use crate::glue::{self, DemoReport};
use crate::graph::{
    self, bullet_genus, contract_edge, contract_level, stratification_poset, total_class, validate, ClassVec,
    Decorations, Diagnostic, GraphError, HomologyModel, PosetBounds, RelGraph, StratPoset, StratumType,
};
use crate::inertia::{
    conjugacy_classes, cr_poincare_polynomial, pairing_check, ClassCatalog, CRProfile, FiniteGroupTable,
    PairingReport, SectorDatum,
};
use crate::rational::{fmt_q, parse_q, Q};

pub const SCHEMA: &str = "orbi-degen/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("resource limit: {0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Resource(m) => m,
        }
    }
}

fn invalid(m: impl Into<String>) -> CliError {
    CliError::Validation(m.into())
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Resource(m) => CliError::Resource(m),
            other => invalid(other.to_string()),
        }
    }
}

impl From<expand::ExpandError> for CliError {
    fn from(e: expand::ExpandError) -> Self {
        match e {
            expand::ExpandError::Graph(g) => g.into(),
            other => invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "orbi-degen", version, about = "Relative orbifold GW bookkeeping and gluing sandbox")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree shifts, CR Poincare polynomial and pairing check.
    Sectors(Select),
    /// Dual graph operations.
    Graphs {
        #[command(subcommand)]
        op: GraphsOp,
    },
    /// Virtual dimensions and splitting ledgers.
    Dim {
        #[command(subcommand)]
        op: DimOp,
    },
    /// Ordered partitions of a total into fractional contact orders.
    Partitions {
        /// Total contact, e.g. `2` or `3/2`.
        #[arg(long)]
        total: String,
        /// Comma-separated monodromy orders, one per slot.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
    },
    /// Degeneration formula terms of a scenario.
    Expand {
        #[command(flatten)]
        select: Select,
        /// Basis name (defaults to the scenario's basis).
        #[arg(long)]
        basis: Option<String>,
        /// Apply the side swap to the term list.
        #[arg(long)]
        swap: bool,
    },
    /// Gluing sandbox.
    Glue {
        #[command(subcommand)]
        op: GlueOp,
    },
}

#[derive(Debug, Args)]
pub struct Select {
    /// Input document.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Only the named item (default: all items of the relevant kind).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum GraphsOp {
    /// Check the decoration rules.
    Validate {
        #[command(flatten)]
        select: Select,
        /// Print Graphviz instead of the report.
        #[arg(long)]
        dot: bool,
    },
    /// Genus and total class.
    Genus(Select),
    /// One contraction of a graph.
    Contract {
        #[command(flatten)]
        select: Select,
        /// Contract this same-level edge.
        #[arg(long, conflicts_with = "level")]
        edge: Option<usize>,
        /// Collapse the relative edges between this level and the next.
        #[arg(long)]
        level: Option<i32>,
        #[arg(long)]
        dot: bool,
    },
    /// Stratification poset of a one-vertex type.
    Poset {
        #[command(flatten)]
        select: Select,
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum DimOp {
    Virdim(Select),
    Ledger(Select),
}

#[derive(Debug, Subcommand)]
pub enum GlueOp {
    /// Constants, correction and chart probes on a builtin model.
    Demo {
        /// sphere, node or linear.
        model: String,
        #[arg(long, default_value_t = 0.25)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

// ---------------------------------------------------------------------------
// Input document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub schema: String,
    #[serde(default)]
    pub groups: Vec<GroupDoc>,
    #[serde(default)]
    pub profiles: Vec<ProfileDoc>,
    #[serde(default)]
    pub homology: Vec<HomologyDoc>,
    #[serde(default)]
    pub graphs: Vec<GraphDoc>,
    #[serde(default)]
    pub moduli: Vec<ModuliDoc>,
    #[serde(default)]
    pub ledgers: Vec<LedgerDoc>,
    #[serde(default)]
    pub posets: Vec<PosetDoc>,
    #[serde(default)]
    pub scenarios: Vec<ScenarioDoc>,
    #[serde(default, alias = "basis")]
    pub bases: Vec<BasisDoc>,
}

/// A group: either `spec` (`"trivial"`, `"cyclic:n"`, `"symmetric:n"`, or
/// factors joined by `x`) or an explicit multiplication `table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub identity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorDoc {
    pub class: String,
    pub rotations: Vec<String>,
    #[serde(default)]
    pub betti: BTreeMap<i64, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    pub name: String,
    pub group: String,
    pub ambient_dim: u32,
    pub sectors: Vec<SectorDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomologyDoc {
    pub name: String,
    pub rank: usize,
    pub c1: Vec<String>,
    pub z_pairing: Vec<String>,
    pub effective: Vec<ClassVec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub name: String,
    pub homology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_group: Option<String>,
    pub graph: RelGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuliDoc {
    pub name: String,
    pub spec: ModuliSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerDoc {
    pub name: String,
    pub plus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<String>,
    pub total: String,
    #[serde(default)]
    pub constraint_dims: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor_group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDoc {
    pub name: String,
    pub homology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_group: Option<String>,
    #[serde(rename = "type")]
    pub stratum: StratumType,
    #[serde(default)]
    pub bounds: PosetBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    pub plus: String,
    pub minus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    pub genus: u32,
    #[serde(default)]
    pub insertions: Vec<expand::AbsInsertion>,
    pub class_splittings: Vec<(ClassVec, ClassVec)>,
    pub max_nodes: usize,
    #[serde(default)]
    pub monodromy_menu: Vec<String>,
    pub za: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus_degree: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    pub name: String,
    #[serde(flatten)]
    pub basis: CRBasisZ,
}

fn parse_rational(field: &str, text: &str) -> Result<Q, CliError> {
    parse_q(text).map_err(|e| invalid(format!("{field}: {e}")))
}

/// Parses a group spec such as `cyclic:3`, `symmetric:3` or `cyclic:2xcyclic:3`.
pub fn parse_group_spec(spec: &str) -> Result<FiniteGroupTable, String> {
    let mut out: Option<FiniteGroupTable> = None;
    for factor in spec.split('x') {
        let factor = factor.trim();
        let g = if factor == "trivial" {
            FiniteGroupTable::cyclic(1)
        } else if let Some(n) = factor.strip_prefix("cyclic:") {
            FiniteGroupTable::cyclic(n.parse().map_err(|_| format!("bad order in `{factor}`"))?)
        } else if let Some(n) = factor.strip_prefix("symmetric:") {
            FiniteGroupTable::symmetric(n.parse().map_err(|_| format!("bad degree in `{factor}`"))?)
        } else {
            return Err(format!("unknown group spec `{factor}`"));
        }
        .map_err(|e| e.to_string())?;
        out = Some(match out {
            None => g,
            Some(acc) => acc.direct_product(&g).map_err(|e| e.to_string())?,
        });
    }
    out.ok_or_else(|| "empty group spec".into())
}

/// A parsed and cross-checked document.
pub struct Workspace {
    pub doc: InputDocument,
    pub groups: BTreeMap<String, FiniteGroupTable>,
    pub homology: BTreeMap<String, HomologyModel>,
}

fn unique_names<'a>(kind: &str, names: impl Iterator<Item = &'a str>) -> Result<(), CliError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(invalid(format!("{kind}: duplicate name `{n}`")));
        }
    }
    Ok(())
}

impl Workspace {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: InputDocument = serde_json::from_str(text).map_err(|e| invalid(format!("input: {e}")))?;
        if doc.schema != SCHEMA {
            return Err(invalid(format!("schema: expected `{SCHEMA}`, found `{}`", doc.schema)));
        }
        unique_names("groups", doc.groups.iter().map(|g| g.name.as_str()))?;
        unique_names("profiles", doc.profiles.iter().map(|g| g.name.as_str()))?;
        unique_names("homology", doc.homology.iter().map(|g| g.name.as_str()))?;
        unique_names("graphs", doc.graphs.iter().map(|g| g.name.as_str()))?;
        unique_names("moduli", doc.moduli.iter().map(|g| g.name.as_str()))?;
        unique_names("ledgers", doc.ledgers.iter().map(|g| g.name.as_str()))?;
        unique_names("posets", doc.posets.iter().map(|g| g.name.as_str()))?;
        unique_names("scenarios", doc.scenarios.iter().map(|g| g.name.as_str()))?;
        unique_names("bases", doc.bases.iter().map(|g| g.name.as_str()))?;
        let mut groups = BTreeMap::new();
        for g in &doc.groups {
            let table = match (&g.spec, &g.table) {
                (Some(spec), None) => parse_group_spec(spec),
                (None, Some(t)) => FiniteGroupTable::new(t.clone(), g.identity).map_err(|e| e.to_string()),
                _ => Err("give exactly one of `spec` and `table`".to_string()),
            }
            .map_err(|e| invalid(format!("groups.{}: {e}", g.name)))?;
            groups.insert(g.name.clone(), table);
        }
        let mut homology = BTreeMap::new();
        for h in &doc.homology {
            let field = |f: &str| format!("homology.{}.{f}", h.name);
            let c1 = h.c1.iter().map(|t| parse_rational(&field("c1"), t)).collect::<Result<_, _>>()?;
            let z = h.z_pairing.iter().map(|t| parse_rational(&field("z_pairing"), t)).collect::<Result<_, _>>()?;
            let model = HomologyModel::new(h.rank, c1, z, h.effective.clone())
                .map_err(|e| invalid(format!("homology.{}: {e}", h.name)))?;
            homology.insert(h.name.clone(), model);
        }
        let ws = Workspace { doc, groups, homology };
        ws.check_references()?;
        Ok(ws)
    }

    fn check_references(&self) -> Result<(), CliError> {
        let group = |ctx: String, g: &Option<String>| -> Result<(), CliError> {
            match g {
                Some(n) if !self.groups.contains_key(n) => Err(invalid(format!("{ctx}: unknown group `{n}`"))),
                _ => Ok(()),
            }
        };
        let hom = |ctx: String, h: &str| -> Result<(), CliError> {
            if self.homology.contains_key(h) {
                Ok(())
            } else {
                Err(invalid(format!("{ctx}: unknown homology model `{h}`")))
            }
        };
        for p in &self.doc.profiles {
            group(format!("profiles.{}", p.name), &Some(p.group.clone()))?;
        }
        for g in &self.doc.graphs {
            hom(format!("graphs.{}", g.name), &g.homology)?;
            group(format!("graphs.{}", g.name), &g.absolute_group)?;
            group(format!("graphs.{}", g.name), &g.relative_group)?;
        }
        for p in &self.doc.posets {
            hom(format!("posets.{}", p.name), &p.homology)?;
            group(format!("posets.{}", p.name), &p.absolute_group)?;
            group(format!("posets.{}", p.name), &p.relative_group)?;
        }
        let moduli: BTreeSet<&str> = self.doc.moduli.iter().map(|m| m.name.as_str()).collect();
        for l in &self.doc.ledgers {
            for m in [Some(&l.plus), l.minus.as_ref(), Some(&l.total)].into_iter().flatten() {
                if !moduli.contains(m.as_str()) {
                    return Err(invalid(format!("ledgers.{}: unknown moduli spec `{m}`", l.name)));
                }
            }
            group(format!("ledgers.{}", l.name), &l.divisor_group)?;
        }
        let bases: BTreeSet<&str> = self.doc.bases.iter().map(|b| b.name.as_str()).collect();
        for s in &self.doc.scenarios {
            hom(format!("scenarios.{}", s.name), &s.plus)?;
            hom(format!("scenarios.{}", s.name), &s.minus)?;
            group(format!("scenarios.{}", s.name), &s.absolute_group)?;
            group(format!("scenarios.{}", s.name), &s.relative_group)?;
            if let Some(b) = &s.basis {
                if !bases.contains(b.as_str()) {
                    return Err(invalid(format!("scenarios.{}: unknown basis `{b}`", s.name)));
                }
            }
            let (scenario, dec) = self.scenario(s)?;
            scenario.validate(&dec).map_err(|e| invalid(format!("scenarios.{}: {e}", s.name)))?;
            if let Some(b) = &s.basis {
                let basis = &self.doc.bases.iter().find(|x| &x.name == b).expect("checked").basis;
                basis.validate(&dec.relative).map_err(|e| invalid(format!("bases.{b}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn catalog(&self, group: &Option<String>) -> ClassCatalog {
        match group {
            Some(n) => ClassCatalog::from_group(&self.groups[n]),
            None => ClassCatalog::trivial(),
        }
    }

    pub fn decorations(&self, absolute: &Option<String>, relative: &Option<String>) -> Decorations {
        Decorations { absolute: self.catalog(absolute), relative: self.catalog(relative) }
    }

    pub fn profile(&self, p: &ProfileDoc) -> Result<CRProfile, CliError> {
        let group = &self.groups[&p.group];
        let classes = conjugacy_classes(group);
        let mut sectors = Vec::new();
        for (i, s) in p.sectors.iter().enumerate() {
            let ctx = format!("profiles.{}.sectors[{i}]", p.name);
            let idx = classes
                .iter()
                .position(|c| c.label() == s.class)
                .ok_or_else(|| invalid(format!("{ctx}: unknown class ({})", s.class)))?;
            let rot = s
                .rotations
                .iter()
                .map(|t| parse_rational(&format!("{ctx}.rotations"), t))
                .collect::<Result<Vec<_>, _>>()?;
            let datum = SectorDatum::new(&classes, idx, p.ambient_dim, rot, s.betti.clone())
                .map_err(|e| invalid(format!("{ctx}: {e}")))?;
            sectors.push(datum);
        }
        CRProfile::new(group, p.ambient_dim, sectors).map_err(|e| invalid(format!("profiles.{}: {e}", p.name)))
    }

    pub fn scenario(&self, s: &ScenarioDoc) -> Result<(SplittingScenario, Decorations), CliError> {
        let ctx = format!("scenarios.{}", s.name);
        let scenario = SplittingScenario {
            genus: s.genus,
            insertions: s.insertions.clone(),
            class_splittings: s.class_splittings.clone(),
            max_nodes: s.max_nodes,
            monodromy_menu: s.monodromy_menu.clone(),
            za: parse_rational(&format!("{ctx}.za"), &s.za)?,
            plus: self.homology[&s.plus].clone(),
            minus: self.homology[&s.minus].clone(),
            plus_degree: s
                .plus_degree
                .as_deref()
                .map(|t| parse_rational(&format!("{ctx}.plus_degree"), t))
                .transpose()?,
        };
        Ok((scenario, self.decorations(&s.absolute_group, &s.relative_group)))
    }
}

fn pick<'a, T>(items: &'a [T], name: &Option<String>, kind: &str, get: impl Fn(&T) -> &str) -> Result<Vec<&'a T>, CliError> {
    match name {
        Some(n) => items
            .iter()
            .find(|i| get(i) == n)
            .map(|i| vec![i])
            .ok_or_else(|| invalid(format!("no {kind} named `{n}`"))),
        None if items.is_empty() => Err(invalid(format!("input has no {kind}"))),
        None => Ok(items.iter().collect()),
    }
}

fn load(select: &Select) -> Result<Workspace, CliError> {
    let text = std::fs::read_to_string(&select.input)
        .map_err(|e| invalid(format!("{}: {e}", select.input.display())))?;
    Workspace::parse(&text)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorRow {
    pub class: String,
    pub inverse: String,
    pub rotations: Vec<String>,
    pub shift: String,
    pub sector_dim: u32,
    pub betti: BTreeMap<i64, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorsReport {
    pub profile: String,
    pub ambient_dim: u32,
    pub sectors: Vec<SectorRow>,
    /// `(degree, dimension)` pairs; absent when the pairing check fails.
    pub poincare: Option<Vec<(String, u64)>>,
    pub pairing: PairingReport,
}

pub fn sectors_report(name: &str, p: &CRProfile) -> SectorsReport {
    let sectors = p
        .sectors()
        .iter()
        .map(|s| SectorRow {
            class: p.classes()[s.class()].label(),
            inverse: p.classes()[p.inverse_index(s.class())].label(),
            rotations: s.rotations().iter().map(fmt_q).collect(),
            shift: fmt_q(&s.degree_shift()),
            sector_dim: s.sector_dim(),
            betti: s.betti().clone(),
        })
        .collect();
    let poincare = cr_poincare_polynomial(p)
        .ok()
        .map(|poly| poly.iter().map(|(d, b)| (fmt_q(d), *b)).collect());
    SectorsReport {
        profile: name.to_string(),
        ambient_dim: p.ambient_dim(),
        sectors,
        poincare,
        pairing: pairing_check(p),
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let head: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    for r in std::iter::once(&head).chain(rows) {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
    }
    out
}

fn sectors_text(r: &SectorsReport) -> String {
    let mut out = format!("profile {} (n = {})\n", r.profile, r.ambient_dim);
    let rows: Vec<Vec<String>> = r
        .sectors
        .iter()
        .map(|s| {
            let betti: Vec<String> = s.betti.iter().map(|(d, b)| format!("{d}:{b}")).collect();
            vec![
                format!("({})", s.class),
                format!("({})", s.inverse),
                s.rotations.join(","),
                s.shift.clone(),
                s.sector_dim.to_string(),
                betti.join(" "),
            ]
        })
        .collect();
    out.push_str(&table(&["class", "inverse", "rotations", "iota", "dim", "betti"], &rows));
    if let Some(poly) = &r.poincare {
        let terms: Vec<String> = poly.iter().map(|(d, b)| format!("{b}*t^{d}")).collect();
        writeln!(out, "CR Poincare: {}", terms.join(" + ")).unwrap();
    }
    if r.pairing.is_ok() {
        out.push_str("pairing: ok\n");
    } else {
        out.push_str("pairing: FAILED\n");
        for v in &r.pairing.violations {
            writeln!(out, "  {v}").unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub graph: String,
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusReport {
    pub graph: String,
    pub connected: bool,
    pub genus: i64,
    pub class: ClassVec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractReport {
    pub graph: String,
    pub result: RelGraph,
    pub genus: i64,
    pub class: ClassVec,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetReport {
    pub poset: String,
    pub poset_data: StratPoset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirdimRow {
    pub spec: String,
    pub flavor: String,
    pub virdim: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub ledger: String,
    pub data: Ledger,
    pub balanced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionsReport {
    pub total: String,
    pub orders: Vec<u64>,
    pub tuples: Vec<Vec<ContactOrder>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandReport {
    pub scenario: String,
    pub basis: String,
    pub swapped: bool,
    pub splittings: usize,
    pub terms: Vec<Term>,
}

fn class_text(a: &[i64]) -> String {
    let parts: Vec<String> = a.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| invalid(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| invalid(e.to_string()))
}

fn write_text(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| invalid(e.to_string()))
}

// ---------------------------------------------------------------------------
// Dispatch

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let json = cli.json;
    match &cli.command {
        Command::Sectors(sel) => cmd_sectors(sel, json, out),
        Command::Graphs { op } => cmd_graphs(op, json, out),
        Command::Dim { op } => cmd_dim(op, json, out),
        Command::Partitions { total, orders } => cmd_partitions(total, orders, json, out),
        Command::Expand { select, basis, swap } => cmd_expand(select, basis, *swap, json, out),
        Command::Glue { op: GlueOp::Demo { model, tau, scale } } => cmd_glue(model, *tau, *scale, json, out),
    }
}

fn cmd_sectors(sel: &Select, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let ws = load(sel)?;
    let mut reports = Vec::new();
    for p in pick(&ws.doc.profiles, &sel.name, "profile", |p| &p.name)? {
        reports.push(sectors_report(&p.name, &ws.profile(p)?));
    }
    if json {
        emit(out, &reports)?;
    } else {
        let texts: Vec<String> = reports.iter().map(sectors_text).collect();
        write_text(out, &texts.join("\n"))?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pairing.is_ok()).map(|r| r.profile.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(invalid(format!("pairing check failed for {}", failed.join(", "))))
    }
}

fn cmd_graphs(op: &GraphsOp, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    match op {
        GraphsOp::Validate { select, dot } => {
            let ws = load(select)?;
            let mut reports = Vec::new();
            let mut dots = String::new();
            for g in pick(&ws.doc.graphs, &select.name, "graph", |g| &g.name)? {
                let dec = ws.decorations(&g.absolute_group, &g.relative_group);
                let diagnostics = validate(&g.graph, &ws.homology[&g.homology], &dec);
                dots.push_str(&graph::to_dot(&g.graph, &g.name));
                reports.push(ValidateReport { graph: g.name.clone(), valid: diagnostics.is_empty(), diagnostics });
            }
            if *dot {
                write_text(out, &dots)?;
            } else if json {
                emit(out, &reports)?;
            } else {
                let mut text = String::new();
                for r in &reports {
                    if r.valid {
                        writeln!(text, "graph {}: valid", r.graph).unwrap();
                    } else {
                        writeln!(text, "graph {}: {} violation(s)", r.graph, r.diagnostics.len()).unwrap();
                        for d in &r.diagnostics {
                            writeln!(text, "  {d}").unwrap();
                        }
                    }
                }
                write_text(out, &text)?;
            }
            let bad: Vec<&str> = reports.iter().filter(|r| !r.valid).map(|r| r.graph.as_str()).collect();
            if bad.is_empty() {
                Ok(())
            } else {
                Err(invalid(format!("invalid graph(s): {}", bad.join(", "))))
            }
        }
        GraphsOp::Genus(select) => {
            let ws = load(select)?;
            let reports: Vec<GenusReport> = pick(&ws.doc.graphs, &select.name, "graph", |g| &g.name)?
                .into_iter()
                .map(|g| GenusReport {
                    graph: g.name.clone(),
                    connected: graph::is_connected(&g.graph),
                    genus: bullet_genus(&g.graph),
                    class: total_class(&g.graph),
                })
                .collect();
            if json {
                emit(out, &reports)?;
            } else {
                let rows: Vec<Vec<String>> = reports
                    .iter()
                    .map(|r| {
                        vec![
                            r.graph.clone(),
                            if r.connected { "yes" } else { "no" }.into(),
                            r.genus.to_string(),
                            class_text(&r.class),
                        ]
                    })
                    .collect();
                write_text(out, &table(&["graph", "connected", "genus", "class"], &rows))?;
            }
            Ok(())
        }
        GraphsOp::Contract { select, edge, level, dot } => {
            let ws = load(select)?;
            let graphs = pick(&ws.doc.graphs, &select.name, "graph", |g| &g.name)?;
            if graphs.len() != 1 {
                return Err(CliError::Usage("contract needs --name when the input has several graphs".into()));
            }
            let g = graphs[0];
            let result = match (edge, level) {
                (Some(e), None) => contract_edge(&g.graph, *e)?,
                (None, Some(l)) => contract_level(&g.graph, *l)?,
                _ => return Err(CliError::Usage("give one of --edge or --level".into())),
            };
            let dec = ws.decorations(&g.absolute_group, &g.relative_group);
            let report = ContractReport {
                graph: g.name.clone(),
                genus: bullet_genus(&result),
                class: total_class(&result),
                valid: validate(&result, &ws.homology[&g.homology], &dec).is_empty(),
                result,
            };
            if *dot {
                write_text(out, &graph::to_dot(&report.result, &format!("{}/contracted", g.name)))
            } else if json {
                emit(out, &report)
            } else {
                let text = format!(
                    "graph {} contracted: genus {}, class {}, {}\n{}\n",
                    report.graph,
                    report.genus,
                    class_text(&report.class),
                    if report.valid { "valid" } else { "invalid" },
                    graph::summary(&report.result)
                );
                write_text(out, &text)
            }
        }
        GraphsOp::Poset { select, dot } => {
            let ws = load(select)?;
            let mut incomplete = Vec::new();
            let mut reports = Vec::new();
            for p in pick(&ws.doc.posets, &select.name, "poset", |p| &p.name)? {
                let dec = ws.decorations(&p.absolute_group, &p.relative_group);
                let data = stratification_poset(&p.stratum, &ws.homology[&p.homology], &dec, p.bounds)?;
                if !data.complete {
                    incomplete.push(p.name.clone());
                }
                reports.push(PosetReport { poset: p.name.clone(), poset_data: data });
            }
            if *dot {
                let dots: String = reports.iter().map(|r| graph::poset_to_dot(&r.poset_data, &r.poset)).collect();
                write_text(out, &dots)?;
            } else if json {
                emit(out, &reports)?;
            } else {
                let mut text = String::new();
                for r in &reports {
                    let p = &r.poset_data;
                    writeln!(
                        text,
                        "poset {}: {} nodes, {} covers{}",
                        r.poset,
                        p.nodes.len(),
                        p.covers.len(),
                        if p.complete { "" } else { " (incomplete)" }
                    )
                    .unwrap();
                    for (i, g) in p.nodes.iter().enumerate() {
                        writeln!(text, "  #{i} {}", graph::summary(g)).unwrap();
                    }
                    let covers: Vec<String> = p.covers.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                    writeln!(text, "  covers: {}", covers.join(" ")).unwrap();
                }
                write_text(out, &text)?;
            }
            if incomplete.is_empty() {
                Ok(())
            } else {
                Err(CliError::Resource(format!("node bound reached for {}", incomplete.join(", "))))
            }
        }
    }
}

fn cmd_dim(op: &DimOp, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    match op {
        DimOp::Virdim(select) => {
            let ws = load(select)?;
            let mut rows = Vec::new();
            for m in pick(&ws.doc.moduli, &select.name, "moduli spec", |m| &m.name)? {
                let d = virdim(&m.spec).map_err(|e| invalid(format!("moduli.{}: {e}", m.name)))?;
                rows.push(VirdimRow { spec: m.name.clone(), flavor: m.spec.flavor.name().into(), virdim: fmt_q(&d) });
            }
            if json {
                emit(out, &rows)
            } else {
                let cells: Vec<Vec<String>> =
                    rows.iter().map(|r| vec![r.spec.clone(), r.flavor.clone(), r.virdim.clone()]).collect();
                write_text(out, &table(&["spec", "flavor", "virdim"], &cells))
            }
        }
        DimOp::Ledger(select) => {
            let ws = load(select)?;
            let spec = |name: &str| &ws.doc.moduli.iter().find(|m| m.name == name).expect("checked").spec;
            let mut reports = Vec::new();
            for l in pick(&ws.doc.ledgers, &select.name, "ledger", |l| &l.name)? {
                let dims = l
                    .constraint_dims
                    .iter()
                    .map(|t| parse_rational(&format!("ledgers.{}.constraint_dims", l.name), t))
                    .collect::<Result<Vec<_>, _>>()?;
                let divisor = ws.catalog(&l.divisor_group);
                let data = splitting_ledger(spec(&l.plus), l.minus.as_deref().map(spec), &dims, spec(&l.total), &divisor)
                    .map_err(|e| invalid(format!("ledgers.{}: {e}", l.name)))?;
                reports.push(LedgerReport { ledger: l.name.clone(), balanced: data.is_balanced(), data });
            }
            if json {
                emit(out, &reports)
            } else {
                let rows: Vec<Vec<String>> = reports
                    .iter()
                    .map(|r| {
                        let dims: Vec<String> = r.data.constraint_dims.iter().map(fmt_q).collect();
                        vec![
                            r.ledger.clone(),
                            fmt_q(&r.data.d_total),
                            fmt_q(&r.data.d_plus),
                            fmt_q(&r.data.d_minus),
                            format!("[{}]", dims.join(",")),
                            fmt_q(&r.data.defect),
                        ]
                    })
                    .collect();
                write_text(out, &table(&["ledger", "d_total", "d_plus", "d_minus", "constraints", "defect"], &rows))
            }
        }
    }
}

fn cmd_partitions(total: &str, orders: &[u64], json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let t = parse_q(total).map_err(|e| CliError::Usage(e.to_string()))?;
    if orders.contains(&0) {
        return Err(CliError::Usage("orders must be positive".into()));
    }
    let tuples = enumerate_partitions(&t, orders);
    let report = PartitionsReport { total: fmt_q(&t), orders: orders.to_vec(), tuples };
    if json {
        return emit(out, &report);
    }
    let mut text = format!("{} tuple(s) of total {}\n", report.tuples.len(), report.total);
    for tuple in &report.tuples {
        let parts: Vec<String> = tuple.iter().map(|c| format!("{c}")).collect();
        writeln!(text, "({})", parts.join(", ")).unwrap();
    }
    write_text(out, &text)
}

fn cmd_expand(
    select: &Select,
    basis: &Option<String>,
    swap: bool,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let ws = load(select)?;
    let mut reports = Vec::new();
    for s in pick(&ws.doc.scenarios, &select.name, "scenario", |s| &s.name)? {
        let basis_name = basis
            .clone()
            .or_else(|| s.basis.clone())
            .ok_or_else(|| invalid(format!("scenarios.{}: no basis given", s.name)))?;
        let b = &ws
            .doc
            .bases
            .iter()
            .find(|b| b.name == basis_name)
            .ok_or_else(|| invalid(format!("no basis named `{basis_name}`")))?
            .basis;
        let (scenario, dec) = ws.scenario(s)?;
        let mut terms = expand::expand(&scenario, b, &dec).map_err(|e| prefix(&format!("scenarios.{}", s.name), e))?;
        if swap {
            terms = expand::side_swap(&terms, b)?;
        }
        let splittings = expand::enumerate_splittings(&scenario, &dec)?.splittings.len();
        reports.push(ExpandReport { scenario: s.name.clone(), basis: basis_name, swapped: swap, splittings, terms });
    }
    if json {
        return emit(out, &reports);
    }
    let mut text = String::new();
    for r in &reports {
        writeln!(
            text,
            "scenario {} (basis {}{}): {} splitting(s), {} term(s)",
            r.scenario,
            r.basis,
            if r.swapped { ", swapped" } else { "" },
            r.splittings,
            r.terms.len()
        )
        .unwrap();
        text.push_str(&expand::terms_table(&r.terms));
    }
    write_text(out, &text)
}

fn prefix(ctx: &str, e: expand::ExpandError) -> CliError {
    match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{ctx}: {m}")),
        other => other,
    }
}

fn cmd_glue(model: &str, tau: f64, scale: f64, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let report = glue::demo(model, tau, scale).map_err(|e| match e {
        glue::GlueError::Input(m) => CliError::Usage(m),
        other => invalid(other.to_string()),
    })?;
    if json {
        return emit(out, &report);
    }
    write_text(out, &glue_text(&report))
}

fn f(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn glue_text(r: &DemoReport) -> String {
    let mut out = format!("model {}\n", r.model);
    let c = &r.constants.constants;
    writeln!(
        out,
        "constants: C1 = {}  C2 = {}  eps1 = {}  delta1 = {}  K1 = {}",
        f(c.c1),
        f(c.c2),
        f(c.eps1),
        f(c.delta1),
        f(c.k1)
    )
    .unwrap();
    writeln!(
        out,
        "ordering eps1 << delta1 << C2 (factor {}): {}",
        glue::SEPARATION,
        if r.constants.ordering_ok { "ok" } else { "FLAGGED" }
    )
    .unwrap();
    writeln!(out, "right inverse error: {}", f(r.constants.right_inverse_error)).unwrap();
    let rows: Vec<Vec<String>> = r
        .constants
        .conditions
        .iter()
        .map(|c| {
            let w: Vec<String> = c.witness.iter().map(|x| format!("{x:.4}")).collect();
            vec![
                c.name.clone(),
                f(c.value),
                if c.pass { "pass" } else { "fail" }.into(),
                format!("({})", w.join(",")),
                c.note.clone(),
            ]
        })
        .collect();
    out.push_str(&table(&["cond", "value", "verdict", "witness", "meaning"], &rows));
    let s: Vec<String> = r.s.iter().map(|x| format!("{x:.6}")).collect();
    writeln!(out, "correction at s = ({})", s.join(", ")).unwrap();
    match (&r.correction, &r.correction_error) {
        (Some(corr), _) => {
            let rows: Vec<Vec<String>> = corr
                .history
                .iter()
                .map(|h| vec![h.n.to_string(), f(h.xi_norm), f(h.residual)])
                .collect();
            out.push_str(&table(&["n", "|xi_n|", "residual"], &rows));
            let xi: Vec<String> = corr.xi.iter().map(|x| format!("{x:.9}")).collect();
            writeln!(out, "xi = ({})", xi.join(", ")).unwrap();
        }
        (None, Some(e)) => writeln!(out, "correction failed: {e}").unwrap(),
        _ => {}
    }
    writeln!(out, "|xi| <= 2 eps1: {}", if r.xi_bound_verdict { "ok" } else { "FAILED" }).unwrap();
    writeln!(
        out,
        "|DPhi| <= 2 on 100 probes: {} (max {})",
        if r.chart_norm_verdict { "ok" } else { "FAILED" },
        f(r.chart_norm_max)
    )
    .unwrap();
    out
}
