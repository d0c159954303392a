//! Name resolution and model validation.
//!
//! [`resolve`] checks that names are unique and every reference points at a
//! declaration of a suitable category; [`validate`] then checks the global
//! shape of the model (acyclic child edges, positive geometry, monotone
//! caches, correct dimensions) and computes the two semantic spaces a
//! declaration can live in: the *scene space* (reachable from the root,
//! instantiated by generated setup programs) and the *structure space*
//! (reachable from a function block's input/output structure references,
//! used as match patterns and never instantiated). Node declarations in
//! neither space are dead and reported as warnings, as is a `cardinality *`
//! marker outside the structure space, where it has no meaning.

pub mod pattern;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{Decl, DeclKind, GeometryDecl, SourceModel};
use crate::diag::{DiagCode, Diagnostic, Pos};
use crate::runtime::transform::HomMatrix;
use crate::units::{time_to_nanos, Dimension, Quantity};

/// Maps declaration names to indices into `SourceModel::decls`.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    by_name: BTreeMap<String, usize>,
}

impl SymbolTable {
    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }
}

/// A resolved and validated model, borrowing the underlying syntax tree.
#[derive(Clone, Debug)]
pub struct ValidatedModel<'a> {
    pub source: &'a SourceModel,
    pub symbols: SymbolTable,
    /// Parent name to ordered child names, for node declarations only.
    pub child_edges: BTreeMap<String, Vec<String>>,
    /// Indices of function block declarations, in declaration order.
    pub blocks: Vec<usize>,
    /// Names reachable from the root via child edges (including the root).
    pub scene_space: BTreeSet<String>,
    /// Names reachable from some block's structure references.
    pub structure_space: BTreeSet<String>,
}

impl<'a> ValidatedModel<'a> {
    pub fn decl(&self, name: &str) -> Option<&'a Decl> {
        self.symbols.lookup(name).map(|i| &self.source.decls[i])
    }

    pub fn root_decl(&self) -> &'a Decl {
        self.decl(&self.source.root.name).expect("validated model has a root")
    }

    pub fn block_decls(&self) -> impl Iterator<Item = &'a Decl> + '_ {
        self.blocks.iter().map(|&i| &self.source.decls[i])
    }

    pub fn children_of(&self, name: &str) -> &[String] {
        self.child_edges.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Builds the symbol table and checks every by-name reference.
pub fn resolve(model: &SourceModel) -> Result<SymbolTable, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut table = SymbolTable::default();
    for (i, decl) in model.decls.iter().enumerate() {
        if table.by_name.insert(decl.name.text.clone(), i).is_some() {
            diags.push(Diagnostic::error(
                decl.name.pos,
                DiagCode::DuplicateName,
                format!("duplicate declaration of `{}`", decl.name.text),
            ));
        }
    }

    for decl in &model.decls {
        match &decl.kind {
            DeclKind::Node(props)
            | DeclKind::Group(props)
            | DeclKind::Transform(props, _)
            | DeclKind::GeometricNode(props, _) => {
                for child in &props.children {
                    check_ref(model, &table, &mut diags, &child.name, child.pos, "a child");
                }
                if let DeclKind::GeometricNode(_, geometry) = &decl.kind {
                    check_type_ref(model, &table, geometry, &mut diags);
                }
            }
            DeclKind::FunctionBlock(refs) => {
                for (name_ref, what) in [
                    (&refs.input_hook, "an input hook"),
                    (&refs.input_structure, "an input structure"),
                    (&refs.output_hook, "an output hook"),
                    (&refs.output_structure, "an output structure"),
                ] {
                    check_ref(model, &table, &mut diags, &name_ref.name, name_ref.pos, what);
                }
            }
            DeclKind::PointCloudType(_) | DeclKind::MeshType(_) => {}
        }
    }

    // The root must exist and be able to carry children.
    match table.by_name.get(&model.root.name).map(|&i| &model.decls[i]) {
        None => diags.push(Diagnostic::error(
            model.root.pos,
            DiagCode::UndefinedName,
            format!("reference to undefined name `{}`", model.root.name),
        )),
        Some(decl) if !decl.kind.is_grouplike() => diags.push(Diagnostic::error(
            model.root.pos,
            DiagCode::RootNotGrouplike,
            format!(
                "root `{}` must be a Group or Transform, but is a {}",
                model.root.name,
                decl.kind.keyword()
            ),
        )),
        Some(_) => {}
    }

    if diags.is_empty() {
        Ok(table)
    } else {
        sort_diags(&mut diags);
        Err(diags)
    }
}

/// One by-name reference that must point at a node declaration.
fn check_ref(
    model: &SourceModel,
    table: &SymbolTable,
    diags: &mut Vec<Diagnostic>,
    name: &str,
    pos: Pos,
    what: &str,
) {
    match table.by_name.get(name).map(|&i| &model.decls[i]) {
        None => diags.push(Diagnostic::error(
            pos,
            DiagCode::UndefinedName,
            format!("reference to undefined name `{name}`"),
        )),
        Some(decl) if !decl.kind.is_node_kind() => {
            diags.push(Diagnostic::error(
                pos,
                DiagCode::InvalidReference,
                format!(
                    "{what} must reference a node declaration, but `{name}` is a {}",
                    decl.kind.keyword()
                ),
            ));
        }
        Some(_) => {}
    }
}

fn check_type_ref(
    model: &SourceModel,
    table: &SymbolTable,
    geometry: &GeometryDecl,
    diags: &mut Vec<Diagnostic>,
) {
    let (type_ref, want) = match geometry {
        GeometryDecl::PointCloud { type_ref, .. } => (type_ref, "PointCloudType"),
        GeometryDecl::Mesh { type_ref, .. } => (type_ref, "MeshType"),
        _ => return,
    };
    match table.by_name.get(&type_ref.name).map(|&i| &model.decls[i]) {
        None => diags.push(Diagnostic::error(
            type_ref.pos,
            DiagCode::UndefinedName,
            format!("reference to undefined name `{}`", type_ref.name),
        )),
        Some(decl) => {
            let ok = match geometry {
                GeometryDecl::PointCloud { .. } => {
                    matches!(decl.kind, DeclKind::PointCloudType(_))
                }
                _ => matches!(decl.kind, DeclKind::MeshType(_)),
            };
            if !ok {
                diags.push(Diagnostic::error(
                    type_ref.pos,
                    DiagCode::InvalidReference,
                    format!(
                        "a geometry type must reference a {want}, but `{}` is a {}",
                        type_ref.name,
                        decl.kind.keyword()
                    ),
                ));
            }
        }
    }
}

/// Validates the global shape of a resolved model.
///
/// On success returns the validated model together with any warnings; on
/// failure the diagnostics contain at least one error (warnings included).
pub fn validate<'a>(
    model: &'a SourceModel,
    symbols: SymbolTable,
) -> Result<(ValidatedModel<'a>, Vec<Diagnostic>), Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let mut child_edges: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for decl in &model.decls {
        if let Some(props) = decl.kind.props() {
            child_edges.insert(
                decl.name.text.clone(),
                props.children.iter().map(|c| c.name.clone()).collect(),
            );
        }
    }

    check_cycles(model, &child_edges, &mut errors);

    for decl in &model.decls {
        check_decl_payload(decl, &mut errors);
    }

    let scene_space = reach(&child_edges, [model.root.name.clone()]);
    let blocks: Vec<usize> = model
        .decls
        .iter()
        .enumerate()
        .filter(|(_, d)| matches!(d.kind, DeclKind::FunctionBlock(_)))
        .map(|(i, _)| i)
        .collect();
    let mut structure_roots = Vec::new();
    for &i in &blocks {
        if let DeclKind::FunctionBlock(refs) = &model.decls[i].kind {
            structure_roots.push(refs.input_structure.name.clone());
            structure_roots.push(refs.output_structure.name.clone());
        }
    }
    let structure_space = reach(&child_edges, structure_roots);

    for decl in &model.decls {
        let Some(props) = decl.kind.props() else { continue };
        let name = &decl.name.text;
        let in_scene = scene_space.contains(name);
        let in_structure = structure_space.contains(name);
        if !in_scene && !in_structure {
            warnings.push(Diagnostic::warning(
                decl.name.pos,
                DiagCode::UnreachableDecl,
                format!(
                    "`{name}` is not reachable from the root and not part of any \
                     function block structure; it will not be instantiated"
                ),
            ));
        }
        if props.cardinality == crate::ast::Cardinality::Any && !in_structure {
            warnings.push(Diagnostic::warning(
                decl.name.pos,
                DiagCode::CardinalityOutsideStructure,
                format!("`cardinality *` on `{name}` has no effect outside a function block structure"),
            ));
        }
    }

    if errors.is_empty() {
        sort_diags(&mut warnings);
        let vm = ValidatedModel {
            source: model,
            symbols,
            child_edges,
            blocks,
            scene_space,
            structure_space,
        };
        Ok((vm, warnings))
    } else {
        errors.append(&mut warnings);
        sort_diags(&mut errors);
        Err(errors)
    }
}

/// All names reachable from the given seeds via child edges.
fn reach(
    child_edges: &BTreeMap<String, Vec<String>>,
    seeds: impl IntoIterator<Item = String>,
) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut work: Vec<String> = seeds.into_iter().collect();
    while let Some(name) = work.pop() {
        if !child_edges.contains_key(&name) || !seen.insert(name.clone()) {
            continue;
        }
        for child in &child_edges[&name] {
            work.push(child.clone());
        }
    }
    seen
}

fn check_cycles(
    model: &SourceModel,
    child_edges: &BTreeMap<String, Vec<String>>,
    errors: &mut Vec<Diagnostic>,
) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        InProgress,
        Done,
    }

    fn visit(
        name: &str,
        child_edges: &BTreeMap<String, Vec<String>>,
        marks: &mut BTreeMap<String, Mark>,
        stack: &mut Vec<String>,
    ) -> Option<Vec<String>> {
        match marks.get(name) {
            Some(Mark::Done) => return None,
            Some(Mark::InProgress) => {
                let start = stack.iter().position(|n| n == name).unwrap_or(0);
                let mut cycle: Vec<String> = stack[start..].to_vec();
                cycle.push(String::from(name));
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(String::from(name), Mark::InProgress);
        stack.push(String::from(name));
        if let Some(children) = child_edges.get(name) {
            for child in children {
                if let Some(cycle) = visit(child, child_edges, marks, stack) {
                    return Some(cycle);
                }
            }
        }
        stack.pop();
        marks.insert(String::from(name), Mark::Done);
        None
    }

    let mut marks = BTreeMap::new();
    for decl in &model.decls {
        if !decl.kind.is_node_kind() {
            continue;
        }
        let mut stack = Vec::new();
        if let Some(cycle) = visit(&decl.name.text, child_edges, &mut marks, &mut stack) {
            errors.push(Diagnostic::error(
                decl.name.pos,
                DiagCode::CycleDetected,
                format!("cycle in child edges: {}", cycle.join(" -> ")),
            ));
            return; // one cycle report is enough; further ones repeat nodes
        }
    }
}

/// Reports a DIMENSION_MISMATCH unless `q` has the wanted dimension.
fn want_dim(
    errors: &mut Vec<Diagnostic>,
    q: &Quantity,
    dim: Dimension,
    what: &str,
    at: Pos,
) -> bool {
    if q.dimension() != dim {
        errors.push(Diagnostic::error(
            at,
            DiagCode::DimensionMismatch,
            format!("{what} must have dimension {dim}, got {} ({q})", q.dimension()),
        ));
        return false;
    }
    true
}

fn check_decl_payload(decl: &Decl, errors: &mut Vec<Diagnostic>) {
    let pos = decl.name.pos;
    let name = &decl.name.text;

    // Re-checked here because trees can also be built programmatically.
    if let Some(props) = decl.kind.props() {
        if !decl.kind.is_grouplike() && !props.children.is_empty() {
            errors.push(Diagnostic::error(
                pos,
                DiagCode::ChildOnLeaf,
                format!("`{name}` is a leaf declaration and cannot carry children"),
            ));
        }
        let mut seen = BTreeSet::new();
        for attr in &props.attributes {
            if !seen.insert((attr.key.as_str(), attr.value.as_str())) {
                errors.push(Diagnostic::error(
                    pos,
                    DiagCode::DuplicateAttribute,
                    format!("duplicate attribute pair (\"{}\", \"{}\")", attr.key, attr.value),
                ));
            }
        }
    }

    match &decl.kind {
        DeclKind::Transform(_, cache) => {
            if cache.is_empty() {
                errors.push(Diagnostic::error(
                    pos,
                    DiagCode::SyntaxError,
                    format!("Transform `{name}` requires at least one cache entry"),
                ));
            }
            let mut prev: Option<i64> = None;
            for entry in cache {
                for q in &entry.translation {
                    want_dim(errors, q, Dimension::Length, "a translation component", entry.pos);
                }
                let probe = HomMatrix::new(entry.rotation, [0.0; 3]);
                if !probe.has_orthonormal_rotation() {
                    errors.push(Diagnostic::error(
                        entry.pos,
                        DiagCode::InvalidRotation,
                        String::from(
                            "rotation part is not orthonormal with determinant +1",
                        ),
                    ));
                }
                if !want_dim(errors, &entry.stamp, Dimension::Time, "a cache stamp", entry.pos) {
                    continue;
                }
                match time_to_nanos(&entry.stamp) {
                    None => errors.push(Diagnostic::error(
                        entry.pos,
                        DiagCode::StampOutOfRange,
                        format!("cache stamp {} exceeds the representable time range", entry.stamp),
                    )),
                    Some(ns) => {
                        if let Some(prev_ns) = prev {
                            if ns <= prev_ns {
                                errors.push(Diagnostic::error(
                                    entry.pos,
                                    DiagCode::NonmonotoneCache,
                                    format!(
                                        "cache stamps must be strictly increasing: {} does not \
                                         follow the previous entry",
                                        entry.stamp
                                    ),
                                ));
                            }
                        }
                        prev = Some(ns);
                    }
                }
            }
        }
        DeclKind::GeometricNode(_, geometry) => match geometry {
            GeometryDecl::Box { x, y, z } => {
                for (q, axis) in [(x, "x"), (y, "y"), (z, "z")] {
                    if want_dim(errors, q, Dimension::Length, "a box extent", pos) && q.magnitude <= 0.0 {
                        errors.push(Diagnostic::error(
                            pos,
                            DiagCode::NonpositiveDimension,
                            format!("box extent {axis} must be positive, got {q}"),
                        ));
                    }
                }
            }
            GeometryDecl::Cylinder { radius, height } => {
                for (q, what) in [(radius, "radius"), (height, "height")] {
                    if want_dim(errors, q, Dimension::Length, "a cylinder dimension", pos)
                        && q.magnitude <= 0.0
                    {
                        errors.push(Diagnostic::error(
                            pos,
                            DiagCode::NonpositiveDimension,
                            format!("cylinder {what} must be positive, got {q}"),
                        ));
                    }
                }
            }
            GeometryDecl::PointCloud { points, .. } => {
                for p in points {
                    for q in p {
                        want_dim(errors, q, Dimension::Length, "a point coordinate", pos);
                    }
                }
            }
            GeometryDecl::Mesh { triangles, .. } => {
                for t in triangles {
                    for p in t {
                        for q in p {
                            want_dim(errors, q, Dimension::Length, "a vertex coordinate", pos);
                        }
                    }
                }
            }
        },
        _ => {}
    }
}

fn sort_diags(diags: &mut [Diagnostic]) {
    diags.sort_by_key(|d| (d.pos.line, d.pos.col, d.severity == crate::diag::Severity::Warning));
}
