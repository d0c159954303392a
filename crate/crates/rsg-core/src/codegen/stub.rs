//! Interface stub generation for function blocks.
//!
//! For every declared function block the toolchain can render a
//! target-language source file that pins down the block's contract: its
//! name, the attribute queries that locate its hooks, constructors for its
//! input and output structure patterns, the host bindings of referenced
//! point types, and a trait whose default body reports the implementation
//! gap. Backends are keyed by language name; only Rust ships built in.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::{Attribute, Cardinality, Decl, DeclKind, GeometryDecl};
use crate::diag::{DiagCode, Diagnostic};
use crate::runtime::block::hook_attributes;
use crate::sem::pattern::{to_pattern, PatternKind, StructurePattern};
use crate::sem::ValidatedModel;

/// Host binding of a point cloud or mesh type referenced by a block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostTypeInfo {
    pub name: String,
    /// "point cloud" or "mesh".
    pub category: &'static str,
    pub host_type: String,
    pub header: Option<String>,
}

/// Everything a backend needs to render one block's interface.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockInterface {
    pub name: String,
    pub input_hook_query: Vec<Attribute>,
    pub output_hook_query: Vec<Attribute>,
    pub input_pattern: StructurePattern,
    pub output_pattern: StructurePattern,
    /// Referenced host types, sorted by name.
    pub host_types: Vec<HostTypeInfo>,
}

/// Extracts the renderable interface of a function block declaration.
pub fn block_interface(decl: &Decl, vm: &ValidatedModel<'_>) -> Result<BlockInterface, Diagnostic> {
    let DeclKind::FunctionBlock(refs) = &decl.kind else {
        return Err(Diagnostic::error(
            decl.name.pos,
            DiagCode::InvalidReference,
            format!("{} is not a function block", decl.name.text),
        ));
    };
    Ok(BlockInterface {
        name: decl.name.text.clone(),
        input_hook_query: hook_attributes(vm, &refs.input_hook)?,
        output_hook_query: hook_attributes(vm, &refs.output_hook)?,
        input_pattern: to_pattern(&refs.input_structure.name, vm)?,
        output_pattern: to_pattern(&refs.output_structure.name, vm)?,
        host_types: collect_host_types(vm, [&refs.input_structure.name, &refs.output_structure.name]),
    })
}

fn collect_host_types(vm: &ValidatedModel<'_>, roots: [&str; 2]) -> Vec<HostTypeInfo> {
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    let mut found: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::new();
    let mut stack: Vec<&str> = roots.to_vec();
    while let Some(name) = stack.pop() {
        if !visited.insert(name) {
            continue;
        }
        let Some(decl) = vm.decl(name) else { continue };
        if let DeclKind::GeometricNode(_, geometry) = &decl.kind {
            let (type_name, category) = match geometry {
                GeometryDecl::PointCloud { type_ref, .. } => (&type_ref.name, "point cloud"),
                GeometryDecl::Mesh { type_ref, .. } => (&type_ref.name, "mesh"),
                _ => continue,
            };
            if found.insert(type_name.clone()) {
                let host = match vm.decl(type_name).map(|d| &d.kind) {
                    Some(DeclKind::PointCloudType(host)) | Some(DeclKind::MeshType(host)) => host,
                    _ => continue,
                };
                out.push(HostTypeInfo {
                    name: type_name.clone(),
                    category,
                    host_type: host.host_type.clone(),
                    header: host.header.clone(),
                });
            }
        }
        for child in vm.children_of(name) {
            stack.push(child);
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

/// A stub renderer for one target language.
pub trait StubBackend: Sync {
    fn language(&self) -> &'static str;
    fn file_name(&self, block_name: &str) -> String;
    fn render(&self, interface: &BlockInterface) -> String;
}

static RUST_BACKEND: RustBackend = RustBackend;

/// All built-in backends.
pub fn backends() -> &'static [&'static dyn StubBackend] {
    static ALL: [&dyn StubBackend; 1] = [&RUST_BACKEND];
    &ALL
}

/// Looks up a backend by language name.
pub fn backend_for(language: &str) -> Option<&'static dyn StubBackend> {
    backends().iter().copied().find(|b| b.language() == language)
}

/// Renders interface stubs as Rust source depending only on this crate.
pub struct RustBackend;

impl StubBackend for RustBackend {
    fn language(&self) -> &'static str {
        "rust"
    }

    fn file_name(&self, block_name: &str) -> String {
        format!("{}_interface.rs", to_snake_case(block_name))
    }

    fn render(&self, interface: &BlockInterface) -> String {
        let mut body = String::new();
        body.push_str(&format!(
            "pub const BLOCK_NAME: &str = {:?};\n\n",
            interface.name
        ));
        body.push_str("/// Attribute query locating the input hook at execution time.\n");
        body.push_str(&render_query("INPUT_HOOK_QUERY", &interface.input_hook_query));
        body.push_str("\n/// Attribute query locating the output hook at execution time.\n");
        body.push_str(&render_query("OUTPUT_HOOK_QUERY", &interface.output_hook_query));
        if !interface.host_types.is_empty() {
            body.push_str("\n// Host bindings of the point types this block touches:\n");
            for ht in &interface.host_types {
                match &ht.header {
                    Some(header) => body.push_str(&format!(
                        "// - {} type `{}` maps to `{}` (header `{}`)\n",
                        ht.category, ht.name, ht.host_type, header
                    )),
                    None => body.push_str(&format!(
                        "// - {} type `{}` maps to `{}`\n",
                        ht.category, ht.name, ht.host_type
                    )),
                }
            }
        }
        body.push_str("\n/// Structure the input hook must satisfy before the body runs.\n");
        body.push_str("pub fn input_pattern() -> StructurePattern {\n    ");
        render_pattern(&interface.input_pattern, 1, &mut body);
        body.push_str("\n}\n");
        body.push_str("\n/// Structure every subtree created at the output hook must satisfy.\n");
        body.push_str("pub fn output_pattern() -> StructurePattern {\n    ");
        render_pattern(&interface.output_pattern, 1, &mut body);
        body.push_str("\n}\n");
        let trait_name = to_pascal_case(&interface.name);
        body.push_str(&format!(
            "\n/// Host-side body of `{}`. Implement `execute` and register the\n\
             /// implementation under [`BLOCK_NAME`]; the default body reports the\n\
             /// implementation gap.\n\
             pub trait {trait_name} {{\n\
             {I}fn execute(&self, input: &BlockInput<'_>) -> Result<Vec<CreationInstruction>, String> {{\n\
             {I}{I}let _ = input;\n\
             {I}{I}Err(String::from({gap:?}))\n\
             {I}}}\n\
             }}\n",
            interface.name,
            I = "    ",
            gap = format!("IMPLEMENTATION_GAP: {} has no registered body", interface.name),
        ));

        let mut out = String::new();
        out.push_str(&format!(
            "// Interface stub for function block `{}`.\n\
             // Generated from the world model declaration; regenerate rather than edit.\n\n",
            interface.name
        ));
        for import in rust_imports(&body) {
            out.push_str(import);
            out.push('\n');
        }
        out.push('\n');
        out.push_str(&body);
        out
    }
}

/// Imports required by the rendered body, in stable order.
fn rust_imports(body: &str) -> Vec<&'static str> {
    let mut out = Vec::new();
    let mut ast_items = Vec::new();
    if body.contains("Attribute::new(") {
        ast_items.push("Attribute");
    }
    if body.contains("Cardinality::") {
        ast_items.push("Cardinality");
    }
    match ast_items.as_slice() {
        ["Attribute"] => out.push("use rsg_core::ast::Attribute;"),
        ["Cardinality"] => out.push("use rsg_core::ast::Cardinality;"),
        ["Attribute", "Cardinality"] => out.push("use rsg_core::ast::{Attribute, Cardinality};"),
        _ => {}
    }
    out.push("use rsg_core::runtime::block::{BlockInput, CreationInstruction};");
    if body.contains("ShapeKind::") {
        out.push("use rsg_core::sem::pattern::{PatternKind, ShapeKind, StructurePattern};");
    } else {
        out.push("use rsg_core::sem::pattern::{PatternKind, StructurePattern};");
    }
    out
}

fn render_query(name: &str, query: &[Attribute]) -> String {
    if query.is_empty() {
        return format!("pub const {name}: &[(&str, &str)] = &[];\n");
    }
    let pairs: Vec<String> =
        query.iter().map(|a| format!("({:?}, {:?})", a.key, a.value)).collect();
    format!("pub const {name}: &[(&str, &str)] = &[{}];\n", pairs.join(", "))
}

fn render_pattern(pattern: &StructurePattern, depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    let inner = "    ".repeat(depth + 1);
    out.push_str("StructurePattern {\n");
    out.push_str(&format!("{inner}kind: {},\n", render_kind(&pattern.kind)));
    if pattern.attributes.is_empty() {
        out.push_str(&format!("{inner}attributes: Vec::new(),\n"));
    } else {
        out.push_str(&format!("{inner}attributes: vec![\n"));
        for a in &pattern.attributes {
            out.push_str(&format!("{inner}    Attribute::new({:?}, {:?}),\n", a.key, a.value));
        }
        out.push_str(&format!("{inner}],\n"));
    }
    let cardinality = match pattern.cardinality {
        Cardinality::One => "Cardinality::One",
        Cardinality::Any => "Cardinality::Any",
    };
    out.push_str(&format!("{inner}cardinality: {cardinality},\n"));
    if pattern.children.is_empty() {
        out.push_str(&format!("{inner}children: Vec::new(),\n"));
    } else {
        out.push_str(&format!("{inner}children: vec![\n"));
        for child in &pattern.children {
            out.push_str(&format!("{inner}    "));
            render_pattern(child, depth + 2, out);
            out.push_str(",\n");
        }
        out.push_str(&format!("{inner}],\n"));
    }
    out.push_str(&format!("{pad}}}"));
}

fn render_kind(kind: &PatternKind) -> String {
    match kind {
        PatternKind::Node => "PatternKind::Node".to_string(),
        PatternKind::Group => "PatternKind::Group".to_string(),
        PatternKind::Transform => "PatternKind::Transform".to_string(),
        PatternKind::Geometry(shape) => format!("PatternKind::Geometry(ShapeKind::{shape})"),
    }
}

fn to_snake_case(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_uppercase() {
            if !out.is_empty() && !out.ends_with('_') {
                out.push('_');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn to_pascal_case(name: &str) -> String {
    let mut out = String::new();
    let mut upper_next = true;
    for c in name.chars() {
        if c == '_' {
            upper_next = true;
        } else if upper_next {
            out.extend(c.to_uppercase());
            upper_next = false;
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;
    use crate::sem::{resolve, validate};
    use alloc::vec;

    const BLOCK_MODEL: &str = "root g\n\
        Group g { children { sensorCloud } }\n\
        GeometricNode sensorCloud {\n\
          attributes { \"name\" = \"cloud\" }\n\
          geometry pointcloud PclXyz { points {} }\n\
        }\n\
        PointCloudType PclXyz { hostType \"pcl::PointCloud<pcl::PointXYZ>\" header \"pcl/point_cloud.h\" }\n\
        Group planes {\n\
          attributes { \"name\" = \"planes\" }\n\
          children { segmentTf }\n\
        }\n\
        Transform segmentTf {\n\
          cardinality *\n\
          children { segmentCloud }\n\
          cache { transform { rotation [1 0 0 0 1 0 0 0 1] translation (0 m, 0 m, 0 m) stamp 0 s } }\n\
        }\n\
        GeometricNode segmentCloud { geometry pointcloud PclXyz { points {} } }\n\
        FunctionBlock horizontalPlaneSegmentation {\n\
          inputHook sensorCloud\n\
          inputStructure sensorCloud\n\
          outputHook g\n\
          outputStructure planes\n\
        }";

    fn interface() -> BlockInterface {
        let model = parse(BLOCK_MODEL).unwrap();
        let symbols = resolve(&model).unwrap();
        let (vm, _) = validate(&model, symbols).unwrap();
        let decl = vm.decl("horizontalPlaneSegmentation").unwrap();
        block_interface(decl, &vm).unwrap()
    }

    #[test]
    fn interface_captures_hooks_patterns_and_host_types() {
        let iface = interface();
        assert_eq!(iface.input_hook_query, vec![Attribute::new("name", "cloud")]);
        assert_eq!(iface.output_hook_query, Vec::new());
        assert_eq!(iface.input_pattern.children.len(), 0);
        assert_eq!(iface.output_pattern.children.len(), 1);
        assert_eq!(iface.output_pattern.children[0].cardinality, Cardinality::Any);
        assert_eq!(iface.host_types.len(), 1);
        assert_eq!(iface.host_types[0].name, "PclXyz");
        assert_eq!(iface.host_types[0].host_type, "pcl::PointCloud<pcl::PointXYZ>");
        assert_eq!(iface.host_types[0].header.as_deref(), Some("pcl/point_cloud.h"));
    }

    #[test]
    fn rust_stub_is_deterministic_and_self_describing() {
        let iface = interface();
        let backend = backend_for("rust").unwrap();
        let a = backend.render(&iface);
        let b = backend.render(&iface);
        assert_eq!(a, b);
        assert!(a.contains("pub const BLOCK_NAME: &str = \"horizontalPlaneSegmentation\";"));
        assert!(a.contains("pub const INPUT_HOOK_QUERY: &[(&str, &str)] = &[(\"name\", \"cloud\")];"));
        assert!(a.contains("pub const OUTPUT_HOOK_QUERY: &[(&str, &str)] = &[];"));
        assert!(a.contains("PatternKind::Geometry(ShapeKind::PointCloud)"));
        assert!(a.contains("cardinality: Cardinality::Any"));
        assert!(a.contains("pub trait HorizontalPlaneSegmentation"));
        assert!(a.contains("IMPLEMENTATION_GAP: horizontalPlaneSegmentation has no registered body"));
        assert!(a.contains("`pcl::PointCloud<pcl::PointXYZ>` (header `pcl/point_cloud.h`)"));
        assert!(a.contains("use rsg_core::sem::pattern::{PatternKind, ShapeKind, StructurePattern};"));
    }

    #[test]
    fn file_names_are_snake_cased_per_language() {
        let backend = backend_for("rust").unwrap();
        assert_eq!(
            backend.file_name("horizontalPlaneSegmentation"),
            "horizontal_plane_segmentation_interface.rs"
        );
        assert_eq!(backend.file_name("blk"), "blk_interface.rs");
        assert!(backend_for("fortran").is_none());
        assert_eq!(backends().len(), 1);
    }

    #[test]
    fn casing_helpers_handle_mixed_styles() {
        assert_eq!(to_snake_case("horizontalPlaneSegmentation"), "horizontal_plane_segmentation");
        assert_eq!(to_snake_case("already_snake"), "already_snake");
        assert_eq!(to_pascal_case("horizontalPlaneSegmentation"), "HorizontalPlaneSegmentation");
        assert_eq!(to_pascal_case("already_snake"), "AlreadySnake");
    }

    #[test]
    fn non_block_declarations_are_rejected() {
        let model = parse(BLOCK_MODEL).unwrap();
        let symbols = resolve(&model).unwrap();
        let (vm, _) = validate(&model, symbols).unwrap();
        let decl = vm.decl("planes").unwrap();
        assert!(block_interface(decl, &vm).is_err());
    }
}
