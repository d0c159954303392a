//! Canonical pretty printer for syntax trees.
//!
//! The printer is the inverse of the parser on well-formed trees:
//! `parse(pretty_print(m)) == m` for every tree the parser can produce, and
//! printing is a pure function of the tree, so repeated printing of the same
//! tree yields byte-identical text. Canonical form uses two-space
//! indentation, one blank line between top-level items, sections in the
//! fixed order attributes / cardinality / children / cache / geometry, and
//! the shortest round-tripping decimal form for numbers.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::units::Quantity;

use super::{Decl, DeclKind, GeometryDecl, HostTypeDecl, NodeProps, SourceModel};

/// Renders a model in canonical source form.
pub fn pretty_print(model: &SourceModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "root {}", model.root.name);
    for decl in &model.decls {
        out.push('\n');
        print_decl(&mut out, decl);
    }
    out
}

/// Escapes a string for inclusion in a quoted literal.
fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn quantity(q: &Quantity) -> String {
    let mut s = String::new();
    let _ = write!(s, "{} {}", q.magnitude, q.unit.symbol);
    s
}

fn quantity_triple(qs: &[Quantity; 3]) -> String {
    let mut s = String::new();
    let _ = write!(s, "({}, {}, {})", quantity(&qs[0]), quantity(&qs[1]), quantity(&qs[2]));
    s
}

fn print_decl(out: &mut String, decl: &Decl) {
    let name = &decl.name.text;
    let keyword = decl.kind.keyword();
    match &decl.kind {
        DeclKind::Node(props) | DeclKind::Group(props) => {
            print_node_like(out, keyword, name, props, |_| {});
        }
        DeclKind::Transform(props, cache) => {
            print_node_like(out, keyword, name, props, |out| {
                out.push_str("  cache {\n");
                for entry in cache {
                    out.push_str("    transform {\n");
                    out.push_str("      rotation [");
                    for (i, v) in entry.rotation.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{v}");
                    }
                    out.push_str("]\n");
                    let _ = writeln!(out, "      translation {}", quantity_triple(&entry.translation));
                    let _ = writeln!(out, "      stamp {}", quantity(&entry.stamp));
                    out.push_str("    }\n");
                }
                out.push_str("  }\n");
            });
        }
        DeclKind::GeometricNode(props, geometry) => {
            print_node_like(out, keyword, name, props, |out| print_geometry(out, geometry));
        }
        DeclKind::PointCloudType(host) | DeclKind::MeshType(host) => {
            print_type_decl(out, keyword, name, host);
        }
        DeclKind::FunctionBlock(refs) => {
            let _ = writeln!(out, "FunctionBlock {name} {{");
            let _ = writeln!(out, "  inputHook {}", refs.input_hook.name);
            let _ = writeln!(out, "  inputStructure {}", refs.input_structure.name);
            let _ = writeln!(out, "  outputHook {}", refs.output_hook.name);
            let _ = writeln!(out, "  outputStructure {}", refs.output_structure.name);
            out.push_str("}\n");
        }
    }
}

/// Prints the shared sections of a node declaration, then hands off to
/// `extra` for the kind-specific payload (cache or geometry).
fn print_node_like(
    out: &mut String,
    keyword: &str,
    name: &str,
    props: &NodeProps,
    extra: impl FnOnce(&mut String),
) {
    // Detect an entirely empty body so `Node n {}` stays on one line.
    let mut body = String::new();
    if !props.attributes.is_empty() {
        body.push_str("  attributes {\n");
        for attr in &props.attributes {
            let _ = writeln!(body, "    \"{}\" = \"{}\"", escape(&attr.key), escape(&attr.value));
        }
        body.push_str("  }\n");
    }
    if props.cardinality == super::Cardinality::Any {
        body.push_str("  cardinality *\n");
    }
    if !props.children.is_empty() {
        let names: Vec<&str> = props.children.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(body, "  children {{ {} }}", names.join(" "));
    }
    extra(&mut body);
    if body.is_empty() {
        let _ = writeln!(out, "{keyword} {name} {{}}");
    } else {
        let _ = writeln!(out, "{keyword} {name} {{");
        out.push_str(&body);
        out.push_str("}\n");
    }
}

fn print_geometry(out: &mut String, geometry: &GeometryDecl) {
    match geometry {
        GeometryDecl::Box { x, y, z } => {
            let _ = writeln!(
                out,
                "  geometry box ({}, {}, {})",
                quantity(x),
                quantity(y),
                quantity(z)
            );
        }
        GeometryDecl::Cylinder { radius, height } => {
            let _ = writeln!(out, "  geometry cylinder ({}, {})", quantity(radius), quantity(height));
        }
        GeometryDecl::PointCloud { type_ref, points } => {
            let _ = writeln!(out, "  geometry pointcloud {} {{", type_ref.name);
            if points.is_empty() {
                out.push_str("    points {}\n");
            } else {
                out.push_str("    points {\n");
                for p in points {
                    let _ = writeln!(out, "      {}", quantity_triple(p));
                }
                out.push_str("    }\n");
            }
            out.push_str("  }\n");
        }
        GeometryDecl::Mesh { type_ref, triangles } => {
            let _ = writeln!(out, "  geometry mesh {} {{", type_ref.name);
            if triangles.is_empty() {
                out.push_str("    triangles {}\n");
            } else {
                out.push_str("    triangles {\n");
                for t in triangles {
                    let _ = writeln!(
                        out,
                        "      {{ {} {} {} }}",
                        quantity_triple(&t[0]),
                        quantity_triple(&t[1]),
                        quantity_triple(&t[2])
                    );
                }
                out.push_str("    }\n");
            }
            out.push_str("  }\n");
        }
    }
}

fn print_type_decl(out: &mut String, keyword: &str, name: &str, host: &HostTypeDecl) {
    let _ = writeln!(out, "{keyword} {name} {{");
    let _ = writeln!(out, "  hostType \"{}\"", escape(&host.host_type));
    if let Some(header) = &host.header {
        let _ = writeln!(out, "  header \"{}\"", escape(header));
    }
    out.push_str("}\n");
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn canonical_form_of_a_single_node() {
        let model = parse("root n1 Node n1 { attributes { \"name\" = \"n1\" } }").unwrap();
        assert_eq!(
            pretty_print(&model),
            "root n1\n\nNode n1 {\n  attributes {\n    \"name\" = \"n1\"\n  }\n}\n"
        );
    }

    #[test]
    fn empty_body_collapses_to_one_line() {
        let model = parse("root n1\nGroup n1 {\n}").unwrap();
        assert_eq!(pretty_print(&model), "root n1\n\nGroup n1 {}\n");
    }

    #[test]
    fn parse_print_roundtrip_is_identity_on_a_mixed_model() {
        let src = r#"
            // comment noise and odd layout on purpose
            Group g { children { t p } attributes { "a" = "b" } }
            root g
            Transform t { cache { transform {
              rotation [1 0 0 0 1 0 0 0 1] translation (1 cm, 0 m, 2 mm) stamp 1.5 s } } }
            GeometricNode p { geometry pointcloud P { points { (1 m, 2 m, 3 m) } } cardinality * }
            PointCloudType P { hostType "pcl::T<q>" }
            FunctionBlock f { inputHook g inputStructure p outputHook g outputStructure p }
        "#;
        let first = parse(src).unwrap();
        let printed = pretty_print(&first);
        let reparsed = parse(&printed).unwrap();
        assert_eq!(first, reparsed);
        // Printing is canonical: a second round trip changes nothing.
        assert_eq!(printed, pretty_print(&reparsed));
    }

    #[test]
    fn escapes_survive_the_roundtrip() {
        let src = "root g\nGroup g { attributes { \"k\\\"ey\" = \"a\\\\b\\nc\\td\\re\" } }";
        let model = parse(src).unwrap();
        let printed = pretty_print(&model);
        assert_eq!(model, parse(&printed).unwrap());
    }

    #[test]
    fn printing_is_deterministic() {
        let model = parse("root g\nGroup g { children { a } }\nNode a {}").unwrap();
        assert_eq!(pretty_print(&model), pretty_print(&model));
    }
}
