//! Abstract syntax for model files.
//!
//! A model file declares a set of named nodes (plain nodes, groups,
//! transforms, geometric nodes), host type bindings for point clouds and
//! meshes, and function blocks, plus exactly one `root` designation naming
//! the entry point of the scene. Declarations reference each other by name;
//! resolution happens in a later pass, the tree here is purely syntactic.
//!
//! Equality on syntax trees is structural: source positions are carried for
//! diagnostics but ignored by `==` (see [`Pos`]).

mod lexer;
mod parser;
mod printer;

pub use parser::parse;
pub use printer::pretty_print;

use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::Pos;
use crate::units::Quantity;

/// A declared name together with where it was introduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub text: String,
    pub pos: Pos,
}

/// A by-name reference to some declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NameRef {
    pub name: String,
    pub pos: Pos,
}

/// One `"key" = "value"` entry of an attribute list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Attribute {
    pub key: String,
    pub value: String,
}

impl Attribute {
    pub fn new(key: &str, value: &str) -> Self {
        Attribute { key: String::from(key), value: String::from(value) }
    }
}

/// How many concrete nodes a declaration stands for when it is used as part
/// of a structural pattern: exactly one, or any number (`cardinality *`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Cardinality {
    #[default]
    One,
    Any,
}

/// Properties common to all four node declaration kinds.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NodeProps {
    pub attributes: Vec<Attribute>,
    pub cardinality: Cardinality,
    pub children: Vec<NameRef>,
}

/// One timed rigid transform entry of a transform cache.
///
/// `rotation` is a 3x3 matrix in row-major order; its entries are plain
/// numbers. Translation components are length quantities, the stamp is a
/// time quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntryDecl {
    pub rotation: [f64; 9],
    pub translation: [Quantity; 3],
    pub stamp: Quantity,
    pub pos: Pos,
}

/// Shape payload of a geometric node declaration.
#[derive(Clone, Debug, PartialEq)]
pub enum GeometryDecl {
    Box { x: Quantity, y: Quantity, z: Quantity },
    Cylinder { radius: Quantity, height: Quantity },
    PointCloud { type_ref: NameRef, points: Vec<[Quantity; 3]> },
    Mesh { type_ref: NameRef, triangles: Vec<[[Quantity; 3]; 3]> },
}

/// Host language binding carried by `PointCloudType` / `MeshType`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostTypeDecl {
    pub host_type: String,
    pub header: Option<String>,
}

/// The four hook/structure references of a function block declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionBlockRefs {
    pub input_hook: NameRef,
    pub input_structure: NameRef,
    pub output_hook: NameRef,
    pub output_structure: NameRef,
}

/// Payload of a top-level declaration.
#[derive(Clone, Debug, PartialEq)]
pub enum DeclKind {
    /// Leaf node without further payload.
    Node(NodeProps),
    /// Interior node grouping children.
    Group(NodeProps),
    /// Interior node with a timed rigid transform cache (at least one entry).
    Transform(NodeProps, Vec<CacheEntryDecl>),
    /// Leaf node carrying geometry data.
    GeometricNode(NodeProps, GeometryDecl),
    PointCloudType(HostTypeDecl),
    MeshType(HostTypeDecl),
    FunctionBlock(FunctionBlockRefs),
}

impl DeclKind {
    /// Shared node properties, if this is one of the four node kinds.
    pub fn props(&self) -> Option<&NodeProps> {
        match self {
            DeclKind::Node(p)
            | DeclKind::Group(p)
            | DeclKind::Transform(p, _)
            | DeclKind::GeometricNode(p, _) => Some(p),
            _ => None,
        }
    }

    pub fn is_node_kind(&self) -> bool {
        self.props().is_some()
    }

    /// Groups and transforms may carry children at runtime.
    pub fn is_grouplike(&self) -> bool {
        matches!(self, DeclKind::Group(_) | DeclKind::Transform(_, _))
    }

    /// Keyword used to introduce this declaration in source form.
    pub fn keyword(&self) -> &'static str {
        match self {
            DeclKind::Node(_) => "Node",
            DeclKind::Group(_) => "Group",
            DeclKind::Transform(_, _) => "Transform",
            DeclKind::GeometricNode(_, _) => "GeometricNode",
            DeclKind::PointCloudType(_) => "PointCloudType",
            DeclKind::MeshType(_) => "MeshType",
            DeclKind::FunctionBlock(_) => "FunctionBlock",
        }
    }
}

/// A single top-level declaration.
#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: Ident,
    pub kind: DeclKind,
}

/// A parsed model file: declarations in source order plus the single root
/// designation.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceModel {
    pub decls: Vec<Decl>,
    pub root: NameRef,
}

impl SourceModel {
    /// Linear scan lookup; the resolver builds an indexed table instead.
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name.text == name)
    }
}
