//! Graphviz rendering of world-model snapshots.
//!
//! Produces a `digraph` over the snapshot's nodes: one box per node labeled
//! with its identifier, attributes and a kind-specific summary, and one
//! edge per parent-child relation in child order. Transform nodes are
//! highlighted yellow, geometric nodes green, groups grey.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::runtime::snapshot::{ShapeDoc, SnapshotDoc, SnapshotNode};

/// Renders the snapshot as a Graphviz document.
pub fn to_dot(doc: &SnapshotDoc) -> String {
    let mut out = String::from("digraph world_model {\n");
    out.push_str("  rankdir=TB;\n");
    out.push_str("  node [shape=box, style=filled, fillcolor=white, fontname=\"Helvetica\"];\n");
    for node in &doc.nodes {
        let label = escape_label(&node_label(node));
        match fill_color(node) {
            Some(color) => {
                out.push_str(&format!("  n{} [label=\"{label}\", fillcolor={color}];\n", node.id))
            }
            None => out.push_str(&format!("  n{} [label=\"{label}\"];\n", node.id)),
        }
    }
    for node in &doc.nodes {
        for child in &node.children {
            out.push_str(&format!("  n{} -> n{child};\n", node.id));
        }
    }
    out.push_str("}\n");
    out
}

fn fill_color(node: &SnapshotNode) -> Option<&'static str> {
    match node.kind.as_str() {
        "GROUP" => Some("lightgrey"),
        "TRANSFORM" => Some("lightyellow"),
        "GEOMETRY" => Some("lightgreen"),
        _ => None,
    }
}

fn node_label(node: &SnapshotNode) -> String {
    let mut lines: Vec<String> = Vec::new();
    lines.push(format!("[{}]", node.id));
    for attr in &node.attributes {
        lines.push(format!("({} = {})", attr.key, attr.value));
    }
    if let Some(cache) = &node.cache {
        if let Some(latest) = cache.entries.last() {
            let t = latest.translation;
            lines.push(format!("T = ({}, {}, {})", t[0], t[1], t[2]));
        }
        lines.push(format!("Updates: {}", cache.entries.len()));
    }
    if let Some(shape) = &node.shape {
        lines.push(shape_summary(shape));
    }
    lines.join("\n")
}

fn shape_summary(shape: &ShapeDoc) -> String {
    match shape {
        ShapeDoc::Box { x, y, z } => format!("box {x} x {y} x {z}"),
        ShapeDoc::Cylinder { radius, height } => format!("cylinder r={radius} h={height}"),
        ShapeDoc::PointCloud { type_name, points } => {
            format!("pointCloud {type_name} ({} points)", points.len())
        }
        ShapeDoc::Mesh { type_name, triangles } => {
            format!("mesh {type_name} ({} triangles)", triangles.len())
        }
    }
}

/// Escapes a multi-line label into one DOT double-quoted string body.
fn escape_label(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Attribute;
    use crate::runtime::transform::HomMatrix;
    use crate::runtime::{ShapeData, TimeStamp, WorldModel};
    use alloc::vec;

    fn sample() -> SnapshotDoc {
        let mut wm = WorldModel::new();
        let tf = wm
            .add_transform_node(
                WorldModel::ROOT,
                vec![Attribute::new("name", "worldToCamera")],
                HomMatrix::translation([0.0, 0.0, 1.0]),
                TimeStamp::ZERO,
            )
            .unwrap();
        wm.insert_transform(tf, HomMatrix::translation([0.0, 0.5, 1.0]), TimeStamp(1_000_000))
            .unwrap();
        wm.add_geometric_node(
            tf,
            vec![Attribute::new("name", "box1")],
            ShapeData::Box { x: 1.0, y: 2.0, z: 0.25 },
            TimeStamp::ZERO,
        )
        .unwrap();
        wm.snapshot()
    }

    #[test]
    fn dot_output_is_deterministic() {
        assert_eq!(to_dot(&sample()), to_dot(&sample()));
    }

    #[test]
    fn dot_labels_carry_ids_attributes_and_summaries() {
        let dot = to_dot(&sample());
        assert!(dot.starts_with("digraph world_model {\n"));
        assert!(dot.ends_with("}\n"));
        assert!(dot.contains("n1 [label=\"[1]\\n(name = root)\", fillcolor=lightgrey];"));
        assert!(dot.contains("(name = worldToCamera)"));
        assert!(dot.contains("T = (0, 0.5, 1)"));
        assert!(dot.contains("Updates: 2"));
        assert!(dot.contains("fillcolor=lightyellow"));
        assert!(dot.contains("box 1 x 2 x 0.25"));
        assert!(dot.contains("fillcolor=lightgreen"));
        assert!(dot.contains("  n1 -> n2;\n"));
        assert!(dot.contains("  n2 -> n3;\n"));
    }

    #[test]
    fn labels_are_escaped_for_dot() {
        let mut wm = WorldModel::new();
        wm.add_node(WorldModel::ROOT, vec![Attribute::new("say", "a \"b\" \\ c")]).unwrap();
        let dot = to_dot(&wm.snapshot());
        assert!(dot.contains("(say = a \\\"b\\\" \\\\ c)"));
    }
}
