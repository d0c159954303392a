//! Structural patterns: expansion, matching and block compatibility.
//!
//! A [`StructurePattern`] is a tree describing the expected shape of a
//! scene graph region: node kinds, required attributes and, per pattern
//! child, a cardinality (exactly one concrete node, or any number). A
//! concrete subgraph *matches* a pattern node when
//!
//! * the kinds are equal,
//! * the pattern attributes are a subset of the concrete attributes, and
//! * the concrete children can be partitioned among the pattern children:
//!   every child with cardinality ONE takes exactly one distinct matching
//!   concrete child, every `*` child absorbs any number of matching
//!   concrete children, and no concrete child is left over.
//!
//! Matching is existential: the question is whether *some* assignment of
//! concrete children to ONE-children works. Feasibility is decided with
//! maximum bipartite matching (two saturation checks; by the
//! Mendelsohn-Dulmage exchange argument a joint matching exists whenever
//! both one-sided ones do), so the answer never depends on declaration
//! order. The reported bindings are still deterministic: ONE children are
//! assigned in pattern order to the smallest feasible concrete id, `*`
//! children then absorb the remaining children in ascending id order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{Attribute, Cardinality, DeclKind, GeometryDecl};
use crate::diag::{DiagCode, Diagnostic};
use crate::runtime::NodeId;

use super::ValidatedModel;

/// Shape discriminator for geometry pattern nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeKind {
    Box,
    Cylinder,
    PointCloud,
    Mesh,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeKind::Box => write!(f, "Box"),
            ShapeKind::Cylinder => write!(f, "Cylinder"),
            ShapeKind::PointCloud => write!(f, "PointCloud"),
            ShapeKind::Mesh => write!(f, "Mesh"),
        }
    }
}

/// Node kind vocabulary shared by patterns and concrete graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternKind {
    Node,
    Group,
    Transform,
    Geometry(ShapeKind),
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::Node => write!(f, "NODE"),
            PatternKind::Group => write!(f, "GROUP"),
            PatternKind::Transform => write!(f, "TRANSFORM"),
            PatternKind::Geometry(shape) => write!(f, "GEOMETRY({shape})"),
        }
    }
}

/// A structural pattern tree.
#[derive(Clone, Debug, PartialEq)]
pub struct StructurePattern {
    pub kind: PatternKind,
    pub attributes: Vec<Attribute>,
    pub cardinality: Cardinality,
    pub children: Vec<StructurePattern>,
}

impl StructurePattern {
    /// Leaf constructor; children and attributes can be filled in after.
    pub fn new(kind: PatternKind) -> Self {
        StructurePattern {
            kind,
            attributes: Vec::new(),
            cardinality: Cardinality::One,
            children: Vec::new(),
        }
    }

    /// All pattern nodes in preorder; the pattern root has index 0. These
    /// indices key the bindings of a [`MatchResult`].
    pub fn preorder(&self) -> Vec<&StructurePattern> {
        let mut out = Vec::new();
        fn walk<'p>(node: &'p StructurePattern, out: &mut Vec<&'p StructurePattern>) {
            out.push(node);
            for child in &node.children {
                walk(child, out);
            }
        }
        walk(self, &mut out);
        out
    }

    /// Short label for explanations: kind plus name attribute if present.
    fn label(&self) -> String {
        match self.attributes.iter().find(|a| a.key == "name") {
            Some(attr) => format!("{}(name={})", self.kind, attr.value),
            None => format!("{}", self.kind),
        }
    }
}

/// Read interface over a concrete graph, as needed for matching.
///
/// Implemented by the runtime world model; tests implement it over small
/// fixture graphs directly.
pub trait Snapshot {
    /// Kind of the node, or `None` if the id does not exist.
    fn node_kind(&self, id: NodeId) -> Option<PatternKind>;
    fn node_attributes(&self, id: NodeId) -> Vec<Attribute>;
    fn node_children(&self, id: NodeId) -> Vec<NodeId>;
}

/// Result of matching a pattern against a concrete anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub matched: bool,
    /// Pattern preorder index to the concrete ids bound to that pattern
    /// node, in binding order. Unmatched patterns have empty bindings.
    pub bindings: BTreeMap<usize, Vec<NodeId>>,
}

impl MatchResult {
    fn failure() -> Self {
        MatchResult { matched: false, bindings: BTreeMap::new() }
    }
}

/// Expands the declaration subtree below `root` into a pattern tree.
///
/// Shared declarations (DAG references) are expanded once per occurrence,
/// so the result is always a tree. Only node declarations can appear here;
/// the resolver has already guaranteed that.
pub fn to_pattern(root: &str, vm: &ValidatedModel<'_>) -> Result<StructurePattern, Diagnostic> {
    let decl = vm.decl(root).ok_or_else(|| {
        Diagnostic::error(
            Default::default(),
            DiagCode::UndefinedName,
            format!("reference to undefined name `{root}`"),
        )
    })?;
    let props = decl.kind.props().ok_or_else(|| {
        Diagnostic::error(
            decl.name.pos,
            DiagCode::InvalidReference,
            format!("`{root}` is a {} and cannot be used as a structure", decl.kind.keyword()),
        )
    })?;
    let kind = match &decl.kind {
        DeclKind::Node(_) => PatternKind::Node,
        DeclKind::Group(_) => PatternKind::Group,
        DeclKind::Transform(_, _) => PatternKind::Transform,
        DeclKind::GeometricNode(_, geometry) => PatternKind::Geometry(match geometry {
            GeometryDecl::Box { .. } => ShapeKind::Box,
            GeometryDecl::Cylinder { .. } => ShapeKind::Cylinder,
            GeometryDecl::PointCloud { .. } => ShapeKind::PointCloud,
            GeometryDecl::Mesh { .. } => ShapeKind::Mesh,
        }),
        _ => unreachable!("props() returned Some"),
    };
    let mut children = Vec::with_capacity(props.children.len());
    for child in &props.children {
        children.push(to_pattern(&child.name, vm)?);
    }
    Ok(StructurePattern {
        kind,
        attributes: props.attributes.clone(),
        cardinality: props.cardinality,
        children,
    })
}

/// Matches `pattern` against the subgraph anchored at `anchor`.
pub fn match_pattern<S: Snapshot>(
    pattern: &StructurePattern,
    snapshot: &S,
    anchor: NodeId,
) -> MatchResult {
    let flat = FlatPattern::build(pattern);
    let mut ctx = MatchCtx { flat: &flat, snapshot, memo: BTreeMap::new() };
    match ctx.try_match(0, anchor) {
        None => MatchResult::failure(),
        Some(pairs) => {
            let mut bindings: BTreeMap<usize, Vec<NodeId>> =
                (0..flat.nodes.len()).map(|i| (i, Vec::new())).collect();
            for (idx, id) in pairs {
                bindings.get_mut(&idx).expect("preorder index in range").push(id);
            }
            MatchResult { matched: true, bindings }
        }
    }
}

/// Pattern tree flattened to preorder indices.
struct FlatPattern<'p> {
    nodes: Vec<&'p StructurePattern>,
    children: Vec<Vec<usize>>,
}

impl<'p> FlatPattern<'p> {
    fn build(root: &'p StructurePattern) -> Self {
        let mut flat = FlatPattern { nodes: Vec::new(), children: Vec::new() };
        fn walk<'p>(node: &'p StructurePattern, flat: &mut FlatPattern<'p>) -> usize {
            let idx = flat.nodes.len();
            flat.nodes.push(node);
            flat.children.push(Vec::new());
            for child in &node.children {
                let cidx = walk(child, flat);
                flat.children[idx].push(cidx);
            }
            idx
        }
        walk(root, &mut flat);
        flat
    }
}

/// One subtree match: `(pattern preorder index, concrete id)` pairs.
type BindingPairs = Vec<(usize, NodeId)>;

struct MatchCtx<'a, S: Snapshot> {
    flat: &'a FlatPattern<'a>,
    snapshot: &'a S,
    memo: BTreeMap<(usize, NodeId), Option<BindingPairs>>,
}

impl<'a, S: Snapshot> MatchCtx<'a, S> {
    fn try_match(&mut self, pidx: usize, cid: NodeId) -> Option<BindingPairs> {
        if let Some(cached) = self.memo.get(&(pidx, cid)) {
            return cached.clone();
        }
        let result = self.try_match_uncached(pidx, cid);
        self.memo.insert((pidx, cid), result.clone());
        result
    }

    fn try_match_uncached(&mut self, pidx: usize, cid: NodeId) -> Option<BindingPairs> {
        let pattern = self.flat.nodes[pidx];
        if self.snapshot.node_kind(cid)? != pattern.kind {
            return None;
        }
        let concrete_attrs = self.snapshot.node_attributes(cid);
        if !pattern.attributes.iter().all(|a| concrete_attrs.contains(a)) {
            return None;
        }

        let mut kids = self.snapshot.node_children(cid);
        kids.sort_unstable();
        let ones: Vec<usize> = self.flat.children[pidx]
            .iter()
            .copied()
            .filter(|&c| self.flat.nodes[c].cardinality == Cardinality::One)
            .collect();
        let anys: Vec<usize> = self.flat.children[pidx]
            .iter()
            .copied()
            .filter(|&c| self.flat.nodes[c].cardinality == Cardinality::Any)
            .collect();

        // Edge matrix between ONE pattern children and concrete children,
        // plus the first `*` child absorbing each concrete child, if any.
        let mut edge = vec![vec![false; kids.len()]; ones.len()];
        for (i, &one) in ones.iter().enumerate() {
            for (j, &kid) in kids.iter().enumerate() {
                edge[i][j] = self.try_match(one, kid).is_some();
            }
        }
        let absorber: Vec<Option<usize>> = kids
            .iter()
            .map(|&kid| anys.iter().copied().find(|&a| self.try_match(a, kid).is_some()))
            .collect();

        let sigma = assign_ones(&edge, &absorber)?;

        let mut pairs: BindingPairs = vec![(pidx, cid)];
        for (i, &j) in sigma.iter().enumerate() {
            pairs.extend(self.try_match(ones[i], kids[j]).expect("edge checked"));
        }
        for (j, &kid) in kids.iter().enumerate() {
            if sigma.contains(&j) {
                continue;
            }
            let any = absorber[j].expect("assignment feasibility guarantees an absorber");
            pairs.extend(self.try_match(any, kid).expect("absorber matched"));
        }
        Some(pairs)
    }
}

/// Assigns every ONE child (rows of `edge`) a distinct concrete child
/// (columns) such that all unassigned columns have an absorber. Returns the
/// lexicographically least feasible assignment in row order, or `None`.
fn assign_ones(edge: &[Vec<bool>], absorber: &[Option<usize>]) -> Option<Vec<usize>> {
    let n_ones = edge.len();
    let n_kids = absorber.len();
    let mut claimed = vec![false; n_kids];
    if !completion_feasible(edge, absorber, 0, &claimed) {
        return None;
    }
    let mut sigma = Vec::with_capacity(n_ones);
    for i in 0..n_ones {
        let mut placed = false;
        for j in 0..n_kids {
            if claimed[j] || !edge[i][j] {
                continue;
            }
            claimed[j] = true;
            if completion_feasible(edge, absorber, i + 1, &claimed) {
                sigma.push(j);
                placed = true;
                break;
            }
            claimed[j] = false;
        }
        debug_assert!(placed, "feasibility check promised an assignment");
        if !placed {
            return None;
        }
    }
    Some(sigma)
}

/// Can rows `next..` be perfectly assigned to unclaimed columns while every
/// unclaimed column without an absorber gets taken by some row?
///
/// Both saturation requirements are checked with independent maximum
/// matchings; the Mendelsohn-Dulmage exchange property guarantees a single
/// matching satisfying both whenever each is satisfiable on its own.
fn completion_feasible(
    edge: &[Vec<bool>],
    absorber: &[Option<usize>],
    next: usize,
    claimed: &[bool],
) -> bool {
    let rows: Vec<usize> = (next..edge.len()).collect();
    let cols: Vec<usize> = (0..claimed.len()).filter(|&j| !claimed[j]).collect();
    if rows.len() > cols.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = rows
        .iter()
        .map(|&i| cols.iter().enumerate().filter(|(_, &j)| edge[i][j]).map(|(c, _)| c).collect())
        .collect();
    if !saturates(&adj, cols.len(), rows.len()) {
        return false;
    }
    // Required columns: unclaimed kids no `*` child absorbs.
    let required: Vec<usize> =
        (0..cols.len()).filter(|&c| absorber[cols[c]].is_none()).collect();
    if required.is_empty() {
        return true;
    }
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); cols.len()];
    for (r, row) in adj.iter().enumerate() {
        for &c in row {
            radj[c].push(r);
        }
    }
    let required_adj: Vec<Vec<usize>> = required.iter().map(|&c| radj[c].clone()).collect();
    saturates(&required_adj, rows.len(), required.len())
}

/// Kuhn's augmenting-path algorithm: can all `n_left` left vertices be
/// matched simultaneously into distinct right vertices?
fn saturates(adj: &[Vec<usize>], n_right: usize, n_left: usize) -> bool {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), adj, seen, owner) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n_right];
    for u in 0..n_left {
        let mut seen = vec![false; n_right];
        if !augment(u, adj, &mut seen, &mut owner) {
            return false;
        }
    }
    true
}

/// Verdict of a producer/consumer structure comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compatibility {
    pub compatible: bool,
    /// Human readable reason when incompatible; empty when compatible.
    pub explanation: String,
}

/// Checks whether everything a producer block emits is acceptable input
/// for a consumer block, by comparing the producer's output structure
/// against the consumer's input structure.
pub fn check_block_compatibility(
    producer: &crate::ast::Decl,
    consumer: &crate::ast::Decl,
    vm: &ValidatedModel<'_>,
) -> Result<Compatibility, Diagnostic> {
    let (DeclKind::FunctionBlock(prefs), DeclKind::FunctionBlock(crefs)) =
        (&producer.kind, &consumer.kind)
    else {
        return Err(Diagnostic::error(
            producer.name.pos,
            DiagCode::InvalidReference,
            String::from("compatibility is defined between function blocks"),
        ));
    };
    let out = to_pattern(&prefs.output_structure.name, vm)?;
    let input = to_pattern(&crefs.input_structure.name, vm)?;
    Ok(pattern_subsumes(&out, &input))
}

/// Does every instance of `producer` also match `consumer`?
///
/// The relation is reflexive and transitive. Producer children must be
/// routed into consumer children: ONE may feed ONE or be absorbed by `*`,
/// `*` may only be absorbed by `*` (an any-number producer cannot promise
/// the exactly-one a consumer ONE child requires), every consumer ONE child
/// must be fed exactly once, and nothing the producer emits may be left
/// without a consumer counterpart.
pub fn pattern_subsumes(producer: &StructurePattern, consumer: &StructurePattern) -> Compatibility {
    match subsumes(producer, consumer, &producer.label()) {
        Ok(()) => Compatibility { compatible: true, explanation: String::new() },
        Err(explanation) => Compatibility { compatible: false, explanation },
    }
}

fn subsumes(p: &StructurePattern, c: &StructurePattern, path: &str) -> Result<(), String> {
    if p.kind != c.kind {
        return Err(format!("at {path}: producer provides {} but consumer expects {}", p.kind, c.kind));
    }
    for attr in &c.attributes {
        if !p.attributes.contains(attr) {
            return Err(format!(
                "at {path}: consumer requires attribute (\"{}\" = \"{}\") the producer does not guarantee",
                attr.key, attr.value
            ));
        }
    }
    if p.cardinality == Cardinality::Any && c.cardinality == Cardinality::One {
        return Err(format!(
            "at {path}: producer cardinality * cannot satisfy consumer cardinality ONE"
        ));
    }

    let c_ones: Vec<&StructurePattern> =
        c.children.iter().filter(|n| n.cardinality == Cardinality::One).collect();
    let c_anys: Vec<&StructurePattern> =
        c.children.iter().filter(|n| n.cardinality == Cardinality::Any).collect();

    // Routability of each producer child into each consumer child.
    let routable = |pc: &StructurePattern, cc: &StructurePattern| {
        subsumes(pc, cc, &format!("{path}/{}", pc.label())).is_ok()
    };

    // Every producer child must route somewhere at all.
    for pc in &p.children {
        let somewhere = c_ones.iter().any(|cc| routable(pc, cc))
            || c_anys.iter().any(|cc| routable(pc, cc));
        if !somewhere {
            // Re-run against the closest candidate for a concrete reason.
            let reason = c
                .children
                .first()
                .map(|cc| subsumes(pc, cc, &format!("{path}/{}", pc.label())).unwrap_err())
                .unwrap_or_else(|| {
                    format!(
                        "at {path}/{}: producer child has no consumer counterpart",
                        pc.label()
                    )
                });
            return Err(reason);
        }
    }

    // Consumer ONE children must each be fed by a distinct producer child;
    // producer children not feeding a ONE must be absorbable by some `*`.
    let edge: Vec<Vec<bool>> = c_ones
        .iter()
        .map(|cc| p.children.iter().map(|pc| routable(pc, cc)).collect())
        .collect();
    let absorbable: Vec<Option<usize>> = p
        .children
        .iter()
        .map(|pc| c_anys.iter().position(|cc| routable(pc, cc)))
        .collect();
    if assign_ones(&edge, &absorbable).is_none() {
        let unfed = c_ones
            .iter()
            .enumerate()
            .find(|(i, _)| !edge[*i].iter().any(|&e| e))
            .map(|(_, cc)| cc.label());
        return Err(match unfed {
            Some(label) => format!(
                "at {path}: no producer child guarantees the consumer child {label}"
            ),
            None => format!(
                "at {path}: producer children cannot be routed onto the consumer children \
                 (a consumer ONE child is left unfed or a producer child unabsorbed)"
            ),
        });
    }
    Ok(())
}
