//! Scene-graph runtime: a world model holding typed nodes in a directed
//! acyclic graph with shared subtrees, timed transform caches, attribute
//! search, policy-driven path resolution, and bounded traversal.
//!
//! Node identifiers are allocated from a monotone counter that never reuses
//! a value, even after deletions. The root group always exists and carries
//! identifier 1.

pub mod block;
pub mod demo;
pub mod snapshot;
pub mod transform;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ast::Attribute;
use crate::sem::pattern::{PatternKind, ShapeKind, Snapshot};
use transform::{HomMatrix, TransformCache, DEFAULT_CACHE_WINDOW_NS};

/// Unique handle of a scene node. Never reused within one world model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl core::fmt::Display for NodeId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point in time, in nanoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeStamp(pub i64);

impl TimeStamp {
    pub const ZERO: TimeStamp = TimeStamp(0);

    pub fn from_nanos(ns: i64) -> Self {
        TimeStamp(ns)
    }

    pub fn as_nanos(self) -> i64 {
        self.0
    }
}

impl core::fmt::Display for TimeStamp {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Failures of world-model operations.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WmError {
    #[error("NO_SUCH_NODE: node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error("NO_SUCH_PARENT: parent {0} does not exist")]
    NoSuchParent(NodeId),
    #[error("PARENT_IS_LEAF: node {0} cannot hold children")]
    ParentIsLeaf(NodeId),
    #[error("DUPLICATE_ATTRIBUTE: attribute ({0}) repeated with an identical value")]
    DuplicateAttribute(String),
    #[error("INVALID_ROTATION: rotation part is not orthonormal with determinant +1")]
    InvalidRotation,
    #[error("NONPOSITIVE_DIMENSION: {0} must be positive")]
    NonpositiveDimension(String),
    #[error("WOULD_CREATE_CYCLE: making {parent} a parent of {node} would close a cycle")]
    WouldCreateCycle { node: NodeId, parent: NodeId },
    #[error("DUPLICATE_EDGE: node {parent} is already a parent of {child}")]
    DuplicateEdge { child: NodeId, parent: NodeId },
    #[error("CANNOT_DELETE_ROOT: the root node cannot be deleted")]
    CannotDeleteRoot,
    #[error("NOT_A_TRANSFORM: node {0} has no transform cache")]
    NotATransform(NodeId),
    #[error("NONMONOTONE_STAMP: stamp {stamp} is not newer than {latest} on node {node}")]
    NonmonotoneStamp { node: NodeId, stamp: i64, latest: i64 },
    #[error("CACHE_MISS: node {node} has no cache entry covering stamp {stamp}")]
    CacheMiss { node: NodeId, stamp: i64 },
    #[error("NO_PATH: no admissible path from the root to node {0}")]
    NoPath(NodeId),
    #[error("EMPTY_TAG_QUERY: the tagged path policy requires at least one attribute")]
    EmptyTagQuery,
    #[error("HOOK_UNRESOLVED: {0}")]
    HookUnresolved(String),
    #[error("HOOK_AMBIGUOUS: {0}")]
    HookAmbiguous(String),
    #[error("INPUT_MISMATCH: {0}")]
    InputMismatch(String),
    #[error("OUTPUT_MISMATCH: {0}")]
    OutputMismatch(String),
    #[error("BODY_ERROR: {0}")]
    BodyError(String),
}

/// Geometric payload of a leaf node, already converted to SI units.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeData {
    Box { x: f64, y: f64, z: f64 },
    Cylinder { radius: f64, height: f64 },
    PointCloud { type_name: String, points: Vec<[f64; 3]> },
    Mesh { type_name: String, triangles: Vec<[[f64; 3]; 3]> },
}

impl ShapeData {
    pub fn kind(&self) -> ShapeKind {
        match self {
            ShapeData::Box { .. } => ShapeKind::Box,
            ShapeData::Cylinder { .. } => ShapeKind::Cylinder,
            ShapeData::PointCloud { .. } => ShapeKind::PointCloud,
            ShapeData::Mesh { .. } => ShapeKind::Mesh,
        }
    }

    fn check(&self) -> Result<(), WmError> {
        let want_positive = |value: f64, what: &str| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(WmError::NonpositiveDimension(String::from(what)))
            }
        };
        match self {
            ShapeData::Box { x, y, z } => {
                want_positive(*x, "box x")?;
                want_positive(*y, "box y")?;
                want_positive(*z, "box z")
            }
            ShapeData::Cylinder { radius, height } => {
                want_positive(*radius, "cylinder radius")?;
                want_positive(*height, "cylinder height")
            }
            ShapeData::PointCloud { .. } | ShapeData::Mesh { .. } => Ok(()),
        }
    }
}

/// Type-specific part of a scene node.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Node,
    Group { children: Vec<NodeId> },
    Transform { children: Vec<NodeId>, cache: TransformCache },
    Geometry { shape: ShapeData, stamp: TimeStamp },
}

/// One node of the scene graph.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneNode {
    pub id: NodeId,
    pub attributes: Vec<Attribute>,
    pub parents: BTreeSet<NodeId>,
    pub payload: Payload,
}

impl SceneNode {
    pub fn kind(&self) -> PatternKind {
        match &self.payload {
            Payload::Node => PatternKind::Node,
            Payload::Group { .. } => PatternKind::Group,
            Payload::Transform { .. } => PatternKind::Transform,
            Payload::Geometry { shape, .. } => PatternKind::Geometry(shape.kind()),
        }
    }

    pub fn is_grouplike(&self) -> bool {
        matches!(self.payload, Payload::Group { .. } | Payload::Transform { .. })
    }

    pub fn children(&self) -> &[NodeId] {
        match &self.payload {
            Payload::Group { children } | Payload::Transform { children, .. } => children,
            _ => &[],
        }
    }

    fn children_mut(&mut self) -> Option<&mut Vec<NodeId>> {
        match &mut self.payload {
            Payload::Group { children } | Payload::Transform { children, .. } => Some(children),
            _ => None,
        }
    }

    pub fn cache(&self) -> Option<&TransformCache> {
        match &self.payload {
            Payload::Transform { cache, .. } => Some(cache),
            _ => None,
        }
    }
}

/// How `resolve_path` ranks the root-to-node paths of a shared node.
#[derive(Clone, Debug, PartialEq)]
pub enum PathPolicy {
    /// Prefer the path whose stalest transform cache is freshest.
    Latest,
    /// Restrict to paths on which every node carries all given attributes,
    /// then rank as with `Latest`.
    Tagged(Vec<Attribute>),
}

/// Bottleneck freshness of one path: the minimum over its transform nodes
/// of their newest cache stamp. Paths without transforms are never stale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Freshness {
    Finite(i64),
    Infinite,
}

/// The scene graph itself.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldModel {
    nodes: BTreeMap<NodeId, SceneNode>,
    next_id: u64,
}

impl Default for WorldModel {
    fn default() -> Self {
        Self::new()
    }
}

impl WorldModel {
    pub const ROOT: NodeId = NodeId(1);

    /// A fresh world model holding only the root group.
    pub fn new() -> Self {
        let root = SceneNode {
            id: Self::ROOT,
            attributes: vec![Attribute::new("name", "root")],
            parents: BTreeSet::new(),
            payload: Payload::Group { children: Vec::new() },
        };
        let mut nodes = BTreeMap::new();
        nodes.insert(Self::ROOT, root);
        WorldModel { nodes, next_id: 2 }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Result<&SceneNode, WmError> {
        self.nodes.get(&id).ok_or(WmError::NoSuchNode(id))
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    fn attach_new(
        &mut self,
        parent: NodeId,
        attributes: Vec<Attribute>,
        payload: Payload,
    ) -> Result<NodeId, WmError> {
        check_attributes(&attributes)?;
        let parent_node = self.nodes.get(&parent).ok_or(WmError::NoSuchParent(parent))?;
        if !parent_node.is_grouplike() {
            return Err(WmError::ParentIsLeaf(parent));
        }
        let id = NodeId(self.next_id);
        self.next_id += 1;
        let mut parents = BTreeSet::new();
        parents.insert(parent);
        self.nodes.insert(id, SceneNode { id, attributes, parents, payload });
        self.nodes
            .get_mut(&parent)
            .expect("parent checked above")
            .children_mut()
            .expect("parent is group-like")
            .push(id);
        Ok(id)
    }

    /// Adds a plain leaf node under `parent`.
    pub fn add_node(&mut self, parent: NodeId, attributes: Vec<Attribute>) -> Result<NodeId, WmError> {
        self.attach_new(parent, attributes, Payload::Node)
    }

    /// Adds an empty group under `parent`.
    pub fn add_group(&mut self, parent: NodeId, attributes: Vec<Attribute>) -> Result<NodeId, WmError> {
        self.attach_new(parent, attributes, Payload::Group { children: Vec::new() })
    }

    /// Adds a transform node whose cache starts with one entry and uses the
    /// default ten-second window.
    pub fn add_transform_node(
        &mut self,
        parent: NodeId,
        attributes: Vec<Attribute>,
        matrix: HomMatrix,
        stamp: TimeStamp,
    ) -> Result<NodeId, WmError> {
        self.add_transform_node_with_window(parent, attributes, matrix, stamp, DEFAULT_CACHE_WINDOW_NS)
    }

    /// As [`add_transform_node`](Self::add_transform_node) with an explicit
    /// cache window in nanoseconds.
    pub fn add_transform_node_with_window(
        &mut self,
        parent: NodeId,
        attributes: Vec<Attribute>,
        matrix: HomMatrix,
        stamp: TimeStamp,
        window_ns: i64,
    ) -> Result<NodeId, WmError> {
        if !matrix.has_orthonormal_rotation() {
            return Err(WmError::InvalidRotation);
        }
        let mut cache = TransformCache::new(window_ns);
        cache.insert(stamp.0, matrix);
        self.attach_new(parent, attributes, Payload::Transform { children: Vec::new(), cache })
    }

    /// Adds a geometric leaf carrying `shape`, observed at `stamp`.
    pub fn add_geometric_node(
        &mut self,
        parent: NodeId,
        attributes: Vec<Attribute>,
        shape: ShapeData,
        stamp: TimeStamp,
    ) -> Result<NodeId, WmError> {
        shape.check()?;
        self.attach_new(parent, attributes, Payload::Geometry { shape, stamp })
    }

    /// Registers an additional parent for `node`, sharing its subtree.
    pub fn add_parent(&mut self, node: NodeId, parent: NodeId) -> Result<(), WmError> {
        self.node(node)?;
        let parent_node = self.nodes.get(&parent).ok_or(WmError::NoSuchParent(parent))?;
        if !parent_node.is_grouplike() {
            return Err(WmError::ParentIsLeaf(parent));
        }
        if self.nodes[&node].parents.contains(&parent) {
            return Err(WmError::DuplicateEdge { child: node, parent });
        }
        if node == parent || self.descendants(node).contains(&parent) {
            return Err(WmError::WouldCreateCycle { node, parent });
        }
        self.nodes.get_mut(&parent).unwrap().children_mut().unwrap().push(node);
        self.nodes.get_mut(&node).unwrap().parents.insert(parent);
        Ok(())
    }

    /// Detaches `id` from all parents and drops every node that became
    /// unreachable from the root. Shared subtrees survive through their
    /// remaining parents. The identifier counter is not rewound.
    pub fn delete_node(&mut self, id: NodeId) -> Result<(), WmError> {
        if id == Self::ROOT {
            return Err(WmError::CannotDeleteRoot);
        }
        self.node(id)?;
        let parents: Vec<NodeId> = self.nodes[&id].parents.iter().copied().collect();
        for p in parents {
            if let Some(children) = self.nodes.get_mut(&p).and_then(SceneNode::children_mut) {
                children.retain(|&c| c != id);
            }
        }
        self.nodes.get_mut(&id).unwrap().parents.clear();
        let live = self.reachable_from_root();
        self.nodes.retain(|nid, _| live.contains(nid));
        for node in self.nodes.values_mut() {
            node.parents.retain(|p| live.contains(p));
        }
        Ok(())
    }

    fn reachable_from_root(&self) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![Self::ROOT];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            if let Some(node) = self.nodes.get(&id) {
                stack.extend(node.children().iter().copied());
            }
        }
        seen
    }

    fn descendants(&self, id: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.nodes[&id].children().to_vec();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(self.nodes[&n].children().iter().copied());
            }
        }
        seen
    }

    /// Appends a cache entry on a transform node. The stamp must be
    /// strictly newer than the newest cached entry.
    pub fn insert_transform(
        &mut self,
        id: NodeId,
        matrix: HomMatrix,
        stamp: TimeStamp,
    ) -> Result<(), WmError> {
        if !matrix.has_orthonormal_rotation() {
            return Err(WmError::InvalidRotation);
        }
        let node = self.nodes.get_mut(&id).ok_or(WmError::NoSuchNode(id))?;
        let Payload::Transform { cache, .. } = &mut node.payload else {
            return Err(WmError::NotATransform(id));
        };
        let latest = cache.latest().map(|e| e.0).unwrap_or(i64::MIN);
        if !cache.insert(stamp.0, matrix) {
            return Err(WmError::NonmonotoneStamp { node: id, stamp: stamp.0, latest });
        }
        Ok(())
    }

    /// The cached transform of `id` closest to `stamp` (ties resolve to the
    /// earlier entry); a miss outside the cached interval is an error.
    pub fn get_transform(&self, id: NodeId, stamp: TimeStamp) -> Result<HomMatrix, WmError> {
        let node = self.node(id)?;
        let Payload::Transform { cache, .. } = &node.payload else {
            return Err(WmError::NotATransform(id));
        };
        cache.lookup(stamp.0).copied().ok_or(WmError::CacheMiss { node: id, stamp: stamp.0 })
    }

    fn paths_from_root(&self, id: NodeId) -> Vec<Vec<NodeId>> {
        if id == Self::ROOT {
            return vec![vec![id]];
        }
        let mut out = Vec::new();
        for &p in &self.nodes[&id].parents {
            for mut path in self.paths_from_root(p) {
                path.push(id);
                out.push(path);
            }
        }
        out
    }

    fn freshness(&self, path: &[NodeId]) -> Freshness {
        let mut best = Freshness::Infinite;
        for id in path {
            if let Some(cache) = self.nodes[id].cache() {
                let latest = cache.latest().map(|e| e.0).unwrap_or(i64::MIN);
                best = best.min(Freshness::Finite(latest));
            }
        }
        best
    }

    /// Selects one root-to-node path under the given policy: the admissible
    /// path with the freshest bottleneck, breaking ties towards the
    /// lexicographically smallest identifier sequence.
    pub fn resolve_path(&self, id: NodeId, policy: &PathPolicy) -> Result<Vec<NodeId>, WmError> {
        self.node(id)?;
        let mut paths = self.paths_from_root(id);
        if let PathPolicy::Tagged(tags) = policy {
            if tags.is_empty() {
                return Err(WmError::EmptyTagQuery);
            }
            paths.retain(|path| {
                path.iter().all(|n| has_all_attributes(&self.nodes[n].attributes, tags))
            });
        }
        let mut best: Option<(Freshness, Vec<NodeId>)> = None;
        for path in paths {
            let score = self.freshness(&path);
            let better = match &best {
                None => true,
                Some((s, p)) => score > *s || (score == *s && path < *p),
            };
            if better {
                best = Some((score, path));
            }
        }
        best.map(|(_, p)| p).ok_or(WmError::NoPath(id))
    }

    /// Composes the cached transforms along the resolved path, at `stamp`.
    pub fn get_global_transform(
        &self,
        id: NodeId,
        stamp: TimeStamp,
        policy: &PathPolicy,
    ) -> Result<HomMatrix, WmError> {
        let path = self.resolve_path(id, policy)?;
        let mut acc = HomMatrix::IDENTITY;
        for n in path {
            if self.nodes[&n].cache().is_some() {
                acc = acc.compose(&self.get_transform(n, stamp)?);
            }
        }
        Ok(acc)
    }

    /// All nodes carrying every attribute of `query`, in ascending
    /// identifier order. An empty query matches every node.
    pub fn find_nodes(&self, query: &[Attribute]) -> Vec<NodeId> {
        self.nodes
            .values()
            .filter(|n| has_all_attributes(&n.attributes, query))
            .map(|n| n.id)
            .collect()
    }

    /// Depth-first preorder walk from `start`, visiting children in
    /// insertion order. The visitor receives each node with its depth and
    /// returns whether to descend; nodes deeper than `max_depth` are not
    /// visited. A node shared along several admissible paths is visited
    /// once per path. Returns the visit sequence.
    pub fn traverse<F>(&self, start: NodeId, max_depth: u32, mut visit: F) -> Result<Vec<NodeId>, WmError>
    where
        F: FnMut(NodeId, u32) -> bool,
    {
        self.node(start)?;
        let mut seq = Vec::new();
        self.walk(start, 0, max_depth, &mut visit, &mut seq);
        Ok(seq)
    }

    fn walk<F>(&self, id: NodeId, depth: u32, max_depth: u32, visit: &mut F, seq: &mut Vec<NodeId>)
    where
        F: FnMut(NodeId, u32) -> bool,
    {
        seq.push(id);
        let descend = visit(id, depth);
        if !descend || depth >= max_depth {
            return;
        }
        for &c in self.nodes[&id].children() {
            self.walk(c, depth + 1, max_depth, visit, seq);
        }
    }
}

impl Snapshot for WorldModel {
    fn node_kind(&self, id: NodeId) -> Option<PatternKind> {
        self.nodes.get(&id).map(SceneNode::kind)
    }

    fn node_attributes(&self, id: NodeId) -> Vec<Attribute> {
        self.nodes.get(&id).map(|n| n.attributes.clone()).unwrap_or_default()
    }

    fn node_children(&self, id: NodeId) -> Vec<NodeId> {
        self.nodes.get(&id).map(|n| n.children().to_vec()).unwrap_or_default()
    }
}

fn check_attributes(attributes: &[Attribute]) -> Result<(), WmError> {
    for (i, a) in attributes.iter().enumerate() {
        if attributes[..i].contains(a) {
            return Err(WmError::DuplicateAttribute(format!("{} = {}", a.key, a.value)));
        }
    }
    Ok(())
}

fn has_all_attributes(haystack: &[Attribute], needles: &[Attribute]) -> bool {
    needles.iter().all(|n| haystack.contains(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs(pairs: &[(&str, &str)]) -> Vec<Attribute> {
        pairs.iter().map(|(k, v)| Attribute::new(k, v)).collect()
    }

    fn shift(x: f64, y: f64, z: f64) -> HomMatrix {
        HomMatrix::translation([x, y, z])
    }

    #[test]
    fn fresh_world_has_only_the_named_root() {
        let wm = WorldModel::new();
        assert_eq!(wm.len(), 1);
        let root = wm.node(WorldModel::ROOT).unwrap();
        assert_eq!(root.attributes, attrs(&[("name", "root")]));
        assert!(root.is_grouplike());
        assert_eq!(wm.find_nodes(&attrs(&[("name", "root")])), vec![WorldModel::ROOT]);
    }

    #[test]
    fn identifiers_are_monotone_and_never_reused() {
        let mut wm = WorldModel::new();
        let g = wm.add_group(WorldModel::ROOT, attrs(&[("name", "g")])).unwrap();
        let a = wm.add_node(g, Vec::new()).unwrap();
        assert_eq!((g, a), (NodeId(2), NodeId(3)));
        wm.delete_node(a).unwrap();
        let b = wm.add_node(g, Vec::new()).unwrap();
        assert_eq!(b, NodeId(4), "deleted identifiers must not come back");
    }

    #[test]
    fn leaves_reject_children_and_missing_parents_are_reported() {
        let mut wm = WorldModel::new();
        let leaf = wm.add_node(WorldModel::ROOT, Vec::new()).unwrap();
        assert_eq!(wm.add_node(leaf, Vec::new()), Err(WmError::ParentIsLeaf(leaf)));
        assert_eq!(
            wm.add_group(NodeId(99), Vec::new()),
            Err(WmError::NoSuchParent(NodeId(99)))
        );
        let geo = wm
            .add_geometric_node(
                WorldModel::ROOT,
                Vec::new(),
                ShapeData::Box { x: 1.0, y: 1.0, z: 1.0 },
                TimeStamp::ZERO,
            )
            .unwrap();
        assert_eq!(wm.add_node(geo, Vec::new()), Err(WmError::ParentIsLeaf(geo)));
    }

    #[test]
    fn attribute_multimap_allows_same_key_but_not_same_pair() {
        let mut wm = WorldModel::new();
        let n = wm
            .add_node(WorldModel::ROOT, attrs(&[("tag", "a"), ("tag", "b")]))
            .unwrap();
        assert_eq!(wm.find_nodes(&attrs(&[("tag", "a")])), vec![n]);
        assert_eq!(wm.find_nodes(&attrs(&[("tag", "a"), ("tag", "b")])), vec![n]);
        let err = wm.add_node(WorldModel::ROOT, attrs(&[("tag", "a"), ("tag", "a")]));
        assert_eq!(err, Err(WmError::DuplicateAttribute(String::from("tag = a"))));
    }

    #[test]
    fn nonpositive_shapes_are_rejected() {
        let mut wm = WorldModel::new();
        let bad = ShapeData::Cylinder { radius: 0.0, height: 1.0 };
        assert_eq!(
            wm.add_geometric_node(WorldModel::ROOT, Vec::new(), bad, TimeStamp::ZERO),
            Err(WmError::NonpositiveDimension(String::from("cylinder radius")))
        );
        assert_eq!(wm.len(), 1, "failed creation must not leave a node behind");
    }

    #[test]
    fn add_parent_shares_a_subtree_and_guards_the_dag() {
        let mut wm = WorldModel::new();
        let g1 = wm.add_group(WorldModel::ROOT, attrs(&[("name", "g1")])).unwrap();
        let g2 = wm.add_group(WorldModel::ROOT, attrs(&[("name", "g2")])).unwrap();
        let shared = wm.add_node(g1, attrs(&[("name", "shared")])).unwrap();
        wm.add_parent(shared, g2).unwrap();
        assert_eq!(wm.node(shared).unwrap().parents.len(), 2);
        assert_eq!(wm.node(g2).unwrap().children(), &[shared]);
        assert_eq!(
            wm.add_parent(shared, g2),
            Err(WmError::DuplicateEdge { child: shared, parent: g2 })
        );
        assert_eq!(
            wm.add_parent(g1, g1),
            Err(WmError::WouldCreateCycle { node: g1, parent: g1 })
        );
        // shared is a descendant of g1, so g1 gaining shared as parent
        // would close a cycle only the other way around: attach g1 under a
        // leaf is impossible, attach root under g1 closes a cycle.
        assert_eq!(
            wm.add_parent(WorldModel::ROOT, g1),
            Err(WmError::WouldCreateCycle { node: WorldModel::ROOT, parent: g1 })
        );
        assert_eq!(wm.add_parent(shared, shared), Err(WmError::ParentIsLeaf(shared)));
    }

    #[test]
    fn delete_drops_exclusive_subtrees_and_keeps_shared_ones() {
        let mut wm = WorldModel::new();
        let g1 = wm.add_group(WorldModel::ROOT, Vec::new()).unwrap();
        let g2 = wm.add_group(WorldModel::ROOT, Vec::new()).unwrap();
        let inner = wm.add_group(g1, Vec::new()).unwrap();
        let only = wm.add_node(inner, Vec::new()).unwrap();
        let shared = wm.add_node(inner, Vec::new()).unwrap();
        wm.add_parent(shared, g2).unwrap();

        assert_eq!(wm.delete_node(WorldModel::ROOT), Err(WmError::CannotDeleteRoot));
        wm.delete_node(g1).unwrap();
        assert!(!wm.contains(g1));
        assert!(!wm.contains(inner), "exclusive descendant must be garbage-collected");
        assert!(!wm.contains(only));
        assert!(wm.contains(shared), "shared node must survive through its other parent");
        let parents: Vec<NodeId> = wm.node(shared).unwrap().parents.iter().copied().collect();
        assert_eq!(parents, vec![g2], "dangling parent references must be pruned");
    }

    #[test]
    fn transform_updates_enforce_monotone_stamps() {
        let mut wm = WorldModel::new();
        let tf = wm
            .add_transform_node(WorldModel::ROOT, Vec::new(), shift(1.0, 0.0, 0.0), TimeStamp(1000))
            .unwrap();
        wm.insert_transform(tf, shift(2.0, 0.0, 0.0), TimeStamp(2000)).unwrap();
        assert_eq!(
            wm.insert_transform(tf, shift(3.0, 0.0, 0.0), TimeStamp(2000)),
            Err(WmError::NonmonotoneStamp { node: tf, stamp: 2000, latest: 2000 })
        );
        let not_tf = wm.add_node(WorldModel::ROOT, Vec::new()).unwrap();
        assert_eq!(
            wm.insert_transform(not_tf, shift(0.0, 0.0, 0.0), TimeStamp(9000)),
            Err(WmError::NotATransform(not_tf))
        );
        let bad_rot = HomMatrix::new([2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], [0.0; 3]);
        assert_eq!(wm.insert_transform(tf, bad_rot, TimeStamp(3000)), Err(WmError::InvalidRotation));
    }

    #[test]
    fn get_transform_picks_closest_and_misses_outside_window() {
        let mut wm = WorldModel::new();
        let tf = wm
            .add_transform_node(WorldModel::ROOT, Vec::new(), shift(1.0, 0.0, 0.0), TimeStamp(1000))
            .unwrap();
        wm.insert_transform(tf, shift(5.0, 0.0, 0.0), TimeStamp(3000)).unwrap();
        assert_eq!(wm.get_transform(tf, TimeStamp(1800)).unwrap().t[0], 1.0);
        assert_eq!(wm.get_transform(tf, TimeStamp(2200)).unwrap().t[0], 5.0);
        // Tie at the midpoint resolves to the earlier entry.
        assert_eq!(wm.get_transform(tf, TimeStamp(2000)).unwrap().t[0], 1.0);
        assert_eq!(
            wm.get_transform(tf, TimeStamp(999)),
            Err(WmError::CacheMiss { node: tf, stamp: 999 })
        );
    }

    #[test]
    fn global_transform_composes_the_chain() {
        let mut wm = WorldModel::new();
        let a = wm
            .add_transform_node(WorldModel::ROOT, Vec::new(), shift(1.0, 0.0, 0.0), TimeStamp::ZERO)
            .unwrap();
        let b = wm
            .add_transform_node(a, Vec::new(), shift(0.0, 2.0, 0.0), TimeStamp::ZERO)
            .unwrap();
        let leaf = wm.add_node(b, Vec::new()).unwrap();
        let m = wm.get_global_transform(leaf, TimeStamp::ZERO, &PathPolicy::Latest).unwrap();
        assert_eq!(m.t, [1.0, 2.0, 0.0]);
    }

    #[test]
    fn latest_policy_prefers_the_freshest_bottleneck() {
        let mut wm = WorldModel::new();
        // Two chains to one shared leaf. The stale chain has the smaller
        // ids, so freshness must dominate the lexicographic tie-break.
        let stale = wm
            .add_transform_node(WorldModel::ROOT, Vec::new(), shift(1.0, 0.0, 0.0), TimeStamp(1000))
            .unwrap();
        let fresh = wm
            .add_transform_node(WorldModel::ROOT, Vec::new(), shift(2.0, 0.0, 0.0), TimeStamp(5000))
            .unwrap();
        let leaf = wm.add_node(stale, Vec::new()).unwrap();
        wm.add_parent(leaf, fresh).unwrap();
        let path = wm.resolve_path(leaf, &PathPolicy::Latest).unwrap();
        assert_eq!(path, vec![WorldModel::ROOT, fresh, leaf]);
        // A transform-free bypass beats both finite chains.
        let bypass = wm.add_group(WorldModel::ROOT, Vec::new()).unwrap();
        wm.add_parent(leaf, bypass).unwrap();
        let path = wm.resolve_path(leaf, &PathPolicy::Latest).unwrap();
        assert_eq!(path, vec![WorldModel::ROOT, bypass, leaf]);
    }

    #[test]
    fn equally_fresh_paths_pick_the_smallest_id_sequence() {
        let mut wm = WorldModel::new();
        let g1 = wm.add_group(WorldModel::ROOT, Vec::new()).unwrap();
        let g2 = wm.add_group(WorldModel::ROOT, Vec::new()).unwrap();
        let leaf = wm.add_node(g2, Vec::new()).unwrap();
        wm.add_parent(leaf, g1).unwrap();
        let path = wm.resolve_path(leaf, &PathPolicy::Latest).unwrap();
        assert_eq!(path, vec![WorldModel::ROOT, g1, leaf]);
    }

    #[test]
    fn tagged_policy_filters_paths_by_attributes() {
        let mut wm = WorldModel::new();
        let tagged = wm
            .add_group(WorldModel::ROOT, attrs(&[("name", "left"), ("lane", "hot")]))
            .unwrap();
        let plain = wm.add_group(WorldModel::ROOT, attrs(&[("name", "right")])).unwrap();
        let leaf = wm.add_node(plain, attrs(&[("lane", "hot")])).unwrap();
        wm.add_parent(leaf, tagged).unwrap();
        // The root takes part in the filter like any other node; it only
        // carries ("name", "root"), so a lane=hot query has no admissible
        // path even though one chain is fully tagged below the root.
        let policy = PathPolicy::Tagged(attrs(&[("lane", "hot")]));
        assert_eq!(wm.resolve_path(leaf, &policy), Err(WmError::NoPath(leaf)));
        let policy = PathPolicy::Tagged(Vec::new());
        assert_eq!(wm.resolve_path(leaf, &policy), Err(WmError::EmptyTagQuery));
        // A query the root can satisfy admits fully tagged chains: attribute
        // keys are a multimap, so descendants may carry the root's
        // ("name", "root") pair alongside their own names.
        let aliased = wm
            .add_group(WorldModel::ROOT, attrs(&[("name", "mid"), ("name", "root")]))
            .unwrap();
        let deep = wm.add_node(aliased, attrs(&[("name", "root")])).unwrap();
        let policy = PathPolicy::Tagged(attrs(&[("name", "root")]));
        assert_eq!(wm.resolve_path(deep, &policy).unwrap(), vec![WorldModel::ROOT, aliased, deep]);
    }

    #[test]
    fn traverse_respects_depth_prune_and_shared_paths() {
        let mut wm = WorldModel::new();
        let g1 = wm.add_group(WorldModel::ROOT, attrs(&[("name", "g1")])).unwrap();
        let g2 = wm.add_group(WorldModel::ROOT, attrs(&[("name", "g2")])).unwrap();
        let shared = wm.add_group(g1, Vec::new()).unwrap();
        wm.add_parent(shared, g2).unwrap();
        let deep = wm.add_node(shared, Vec::new()).unwrap();

        let seq = wm.traverse(WorldModel::ROOT, 8, |_, _| true).unwrap();
        assert_eq!(
            seq,
            vec![WorldModel::ROOT, g1, shared, deep, g2, shared, deep],
            "a shared node is visited once per path, children in insertion order"
        );

        let seq = wm.traverse(WorldModel::ROOT, 1, |_, _| true).unwrap();
        assert_eq!(seq, vec![WorldModel::ROOT, g1, g2], "depth limit cuts below the children");

        // Prune below g1: its subtree disappears, g2's does not.
        let seq = wm
            .traverse(WorldModel::ROOT, 8, |id, _| id != g1)
            .unwrap();
        assert_eq!(seq, vec![WorldModel::ROOT, g1, g2, shared, deep]);

        assert_eq!(wm.traverse(NodeId(77), 1, |_, _| true), Err(WmError::NoSuchNode(NodeId(77))));
    }
}
