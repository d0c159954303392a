//! Deterministic generation of world-model setup programs.
//!
//! A validated model is lowered into a linear *plan*: a depth-first walk of
//! the scene space from the root, creating each declaration the first time
//! it is reached and recording an extra-parent step on every later
//! encounter. Applying the plan reproduces the declared graph, including
//! shared subtrees and per-parent child order.
//!
//! The plan has two consumers that must agree: [`instantiate`] applies it
//! directly to a fresh world model, and [`emit_setup_program`] serializes
//! it into a JSON setup program that [`load_setup_program`] replays. Both
//! routes convert quantities to SI (metres, nanoseconds) the same way, so
//! the resulting worlds are indistinguishable by snapshot.

pub mod dot;
pub mod stub;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ast::{Attribute, CacheEntryDecl, DeclKind, GeometryDecl};
use crate::runtime::snapshot::{AttributeDoc, CacheEntryDoc, ShapeDoc};
use crate::runtime::transform::HomMatrix;
use crate::runtime::{NodeId, ShapeData, TimeStamp, WorldModel};
use crate::sem::ValidatedModel;
use crate::units::time_to_nanos;

/// One step of the creation plan, in application order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanStep {
    /// Create the declaration `name` under the already-created `parent`.
    Create { name: String, parent: String },
    /// `child` already exists; register `parent` as an additional parent.
    ExtraParent { child: String, parent: String },
}

/// Lowers the scene space into creation order: a depth-first preorder walk
/// from the root, children in declaration order. The root is not created —
/// it maps onto the world's built-in root.
pub fn plan(vm: &ValidatedModel<'_>) -> Vec<PlanStep> {
    let root = &vm.source.root.name;
    let mut steps = Vec::new();
    let mut created: BTreeSet<&str> = BTreeSet::new();
    created.insert(root);
    walk(vm, root, &mut created, &mut steps);
    steps
}

fn walk<'a>(
    vm: &ValidatedModel<'a>,
    name: &'a str,
    created: &mut BTreeSet<&'a str>,
    steps: &mut Vec<PlanStep>,
) {
    for child in vm.children_of(name) {
        if created.contains(child.as_str()) {
            steps.push(PlanStep::ExtraParent { child: child.clone(), parent: name.to_string() });
        } else {
            steps.push(PlanStep::Create { name: child.clone(), parent: name.to_string() });
            // Borrow the child name from the declaration, which outlives us.
            let durable = &vm.decl(child).expect("validated child").name.text;
            created.insert(durable);
            walk(vm, durable, created, steps);
        }
    }
}

/// A serializable world-construction program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SetupProgram {
    pub format_version: u32,
    /// Root declaration name; bound to the world root when loading.
    pub model_name: String,
    pub instructions: Vec<SetupInstruction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all_fields = "camelCase")]
pub enum SetupInstruction {
    #[serde(rename = "ADD_NODE")]
    AddNode { var: String, parent: String, attributes: Vec<AttributeDoc> },
    #[serde(rename = "ADD_GROUP")]
    AddGroup { var: String, parent: String, attributes: Vec<AttributeDoc> },
    #[serde(rename = "ADD_TRANSFORM")]
    AddTransform {
        var: String,
        parent: String,
        attributes: Vec<AttributeDoc>,
        cache: Vec<CacheEntryDoc>,
    },
    #[serde(rename = "ADD_GEOMETRY")]
    AddGeometry {
        var: String,
        parent: String,
        attributes: Vec<AttributeDoc>,
        shape: ShapeDoc,
        stamp: i64,
    },
    #[serde(rename = "ADD_PARENT")]
    AddParent { child: String, parent: String },
}

impl SetupProgram {
    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("program serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

fn attr_docs(attributes: &[Attribute]) -> Vec<AttributeDoc> {
    attributes
        .iter()
        .map(|a| AttributeDoc { key: a.key.clone(), value: a.value.clone() })
        .collect()
}

fn cache_entries_si(name: &str, entries: &[CacheEntryDecl]) -> Result<Vec<(i64, HomMatrix)>, String> {
    entries
        .iter()
        .map(|e| {
            let stamp = time_to_nanos(&e.stamp)
                .ok_or_else(|| format!("transform {name}: cache stamp out of range"))?;
            let t = [e.translation[0].to_si(), e.translation[1].to_si(), e.translation[2].to_si()];
            Ok((stamp, HomMatrix::new(e.rotation, t)))
        })
        .collect()
}

fn shape_si(geometry: &GeometryDecl) -> ShapeData {
    match geometry {
        GeometryDecl::Box { x, y, z } => {
            ShapeData::Box { x: x.to_si(), y: y.to_si(), z: z.to_si() }
        }
        GeometryDecl::Cylinder { radius, height } => {
            ShapeData::Cylinder { radius: radius.to_si(), height: height.to_si() }
        }
        GeometryDecl::PointCloud { type_ref, points } => ShapeData::PointCloud {
            type_name: type_ref.name.clone(),
            points: points
                .iter()
                .map(|p| [p[0].to_si(), p[1].to_si(), p[2].to_si()])
                .collect(),
        },
        GeometryDecl::Mesh { type_ref, triangles } => ShapeData::Mesh {
            type_name: type_ref.name.clone(),
            triangles: triangles
                .iter()
                .map(|t| {
                    [
                        [t[0][0].to_si(), t[0][1].to_si(), t[0][2].to_si()],
                        [t[1][0].to_si(), t[1][1].to_si(), t[1][2].to_si()],
                        [t[2][0].to_si(), t[2][1].to_si(), t[2][2].to_si()],
                    ]
                })
                .collect(),
        },
    }
}

/// Geometry declarations carry no stamp; created nodes observe time zero.
const GEOMETRY_DECL_STAMP: i64 = 0;

/// Serializes the plan into a setup program.
pub fn emit_setup_program(vm: &ValidatedModel<'_>) -> Result<SetupProgram, String> {
    let mut instructions = Vec::new();
    for step in plan(vm) {
        match step {
            PlanStep::ExtraParent { child, parent } => {
                instructions.push(SetupInstruction::AddParent { child, parent });
            }
            PlanStep::Create { name, parent } => {
                let decl = vm.decl(&name).expect("planned decls exist");
                let props = decl.kind.props().expect("scene decls are node-like");
                let attributes = attr_docs(&props.attributes);
                let var = name;
                instructions.push(match &decl.kind {
                    DeclKind::Node(_) => SetupInstruction::AddNode { var, parent, attributes },
                    DeclKind::Group(_) => SetupInstruction::AddGroup { var, parent, attributes },
                    DeclKind::Transform(_, entries) => SetupInstruction::AddTransform {
                        cache: cache_entries_si(&var, entries)?
                            .into_iter()
                            .map(|(stamp, m)| CacheEntryDoc {
                                stamp,
                                rotation: m.r,
                                translation: m.t,
                            })
                            .collect(),
                        var,
                        parent,
                        attributes,
                    },
                    DeclKind::GeometricNode(_, geometry) => SetupInstruction::AddGeometry {
                        shape: ShapeDoc::from(&shape_si(geometry)),
                        stamp: GEOMETRY_DECL_STAMP,
                        var,
                        parent,
                        attributes,
                    },
                    _ => unreachable!("plan only visits node declarations"),
                });
            }
        }
    }
    Ok(SetupProgram {
        format_version: 1,
        model_name: vm.source.root.name.clone(),
        instructions,
    })
}

/// Applies the plan directly, without the JSON detour.
pub fn instantiate(vm: &ValidatedModel<'_>) -> Result<WorldModel, String> {
    let mut wm = WorldModel::new();
    let mut vars: BTreeMap<String, NodeId> = BTreeMap::new();
    vars.insert(vm.source.root.name.clone(), WorldModel::ROOT);
    for step in plan(vm) {
        match step {
            PlanStep::ExtraParent { child, parent } => {
                wm.add_parent(vars[&child], vars[&parent])
                    .map_err(|e| format!("sharing {child} under {parent}: {e}"))?;
            }
            PlanStep::Create { name, parent } => {
                let decl = vm.decl(&name).expect("planned decls exist");
                let props = decl.kind.props().expect("scene decls are node-like");
                let attrs = props.attributes.clone();
                let parent_id = vars[&parent];
                let id = match &decl.kind {
                    DeclKind::Node(_) => wm.add_node(parent_id, attrs),
                    DeclKind::Group(_) => wm.add_group(parent_id, attrs),
                    DeclKind::Transform(_, entries) => {
                        let converted = cache_entries_si(&name, entries)?;
                        build_transform(&mut wm, parent_id, attrs, &converted)
                    }
                    DeclKind::GeometricNode(_, geometry) => wm.add_geometric_node(
                        parent_id,
                        attrs,
                        shape_si(geometry),
                        TimeStamp(GEOMETRY_DECL_STAMP),
                    ),
                    _ => unreachable!("plan only visits node declarations"),
                }
                .map_err(|e| format!("creating {name}: {e}"))?;
                vars.insert(name, id);
            }
        }
    }
    Ok(wm)
}

fn build_transform(
    wm: &mut WorldModel,
    parent: NodeId,
    attrs: Vec<Attribute>,
    entries: &[(i64, HomMatrix)],
) -> Result<NodeId, crate::runtime::WmError> {
    let (first, rest) = entries.split_first().expect("validated caches are non-empty");
    let id = wm.add_transform_node(parent, attrs, first.1, TimeStamp(first.0))?;
    for (stamp, matrix) in rest {
        wm.insert_transform(id, *matrix, TimeStamp(*stamp))?;
    }
    Ok(id)
}

/// Replays a setup program into a fresh world model.
pub fn load_setup_program(program: &SetupProgram) -> Result<WorldModel, String> {
    if program.format_version != 1 {
        return Err(format!("unsupported format version {}", program.format_version));
    }
    let mut wm = WorldModel::new();
    let mut vars: BTreeMap<&str, NodeId> = BTreeMap::new();
    vars.insert(&program.model_name, WorldModel::ROOT);
    let lookup = |vars: &BTreeMap<&str, NodeId>, var: &str| -> Result<NodeId, String> {
        vars.get(var).copied().ok_or_else(|| format!("unknown variable {var}"))
    };
    for ins in &program.instructions {
        match ins {
            SetupInstruction::AddParent { child, parent } => {
                wm.add_parent(lookup(&vars, child)?, lookup(&vars, parent)?)
                    .map_err(|e| format!("sharing {child} under {parent}: {e}"))?;
            }
            SetupInstruction::AddNode { var, parent, attributes }
            | SetupInstruction::AddGroup { var, parent, attributes }
            | SetupInstruction::AddTransform { var, parent, attributes, .. }
            | SetupInstruction::AddGeometry { var, parent, attributes, .. } => {
                if vars.contains_key(var.as_str()) {
                    return Err(format!("variable {var} bound twice"));
                }
                let parent_id = lookup(&vars, parent)?;
                let attrs: Vec<Attribute> = attributes
                    .iter()
                    .map(|a| Attribute::new(&a.key, &a.value))
                    .collect();
                let id = match ins {
                    SetupInstruction::AddNode { .. } => wm.add_node(parent_id, attrs),
                    SetupInstruction::AddGroup { .. } => wm.add_group(parent_id, attrs),
                    SetupInstruction::AddTransform { cache, .. } => {
                        if cache.is_empty() {
                            return Err(format!("transform {var} has no cache entries"));
                        }
                        let entries: Vec<(i64, HomMatrix)> = cache
                            .iter()
                            .map(|e| (e.stamp, HomMatrix::new(e.rotation, e.translation)))
                            .collect();
                        build_transform(&mut wm, parent_id, attrs, &entries)
                    }
                    SetupInstruction::AddGeometry { shape, stamp, .. } => wm.add_geometric_node(
                        parent_id,
                        attrs,
                        ShapeData::from(shape),
                        TimeStamp(*stamp),
                    ),
                    SetupInstruction::AddParent { .. } => unreachable!("handled above"),
                }
                .map_err(|e| format!("creating {var}: {e}"))?;
                vars.insert(var, id);
            }
        }
    }
    Ok(wm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;
    use crate::sem::{resolve, validate};
    use alloc::vec;

    fn validated(src: &str) -> (crate::ast::SourceModel, crate::sem::SymbolTable) {
        let model = parse(src).expect("test source parses");
        let symbols = resolve(&model).expect("test source resolves");
        (model, symbols)
    }

    const DIAMOND: &str = "root g\n\
        Group g { children { a b } }\n\
        Group a { children { s } }\n\
        Group b { children { s } }\n\
        Node s {}";

    #[test]
    fn plan_is_preorder_with_extra_parent_on_reencounter() {
        let (model, symbols) = validated(DIAMOND);
        let (vm, _) = validate(&model, symbols).unwrap();
        let steps = plan(&vm);
        assert_eq!(
            steps,
            vec![
                PlanStep::Create { name: "a".into(), parent: "g".into() },
                PlanStep::Create { name: "s".into(), parent: "a".into() },
                PlanStep::Create { name: "b".into(), parent: "g".into() },
                PlanStep::ExtraParent { child: "s".into(), parent: "b".into() },
            ]
        );
    }

    #[test]
    fn instantiate_builds_the_declared_diamond() {
        let (model, symbols) = validated(DIAMOND);
        let (vm, _) = validate(&model, symbols).unwrap();
        let wm = instantiate(&vm).unwrap();
        let doc = wm.snapshot();
        let ids: Vec<u64> = doc.nodes.iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![1, 2, 3, 4]);
        // a=2, s=3, b=4; both a and b hold s.
        assert_eq!(doc.nodes[1].children, vec![3]);
        assert_eq!(doc.nodes[3].children, vec![3]);
        assert_eq!(doc.nodes[2].parents, vec![2, 4]);
    }

    const UNITS: &str = "root g\n\
        Group g { children { tf } }\n\
        Transform tf {\n\
          children { b }\n\
          cache {\n\
            transform { rotation [1 0 0 0 1 0 0 0 1] translation (100 cm, 0 m, 1 dm) stamp 1 ms }\n\
            transform { rotation [1 0 0 0 1 0 0 0 1] translation (2 m, 0 m, 0 m) stamp 1 s }\n\
          }\n\
        }\n\
        GeometricNode b { geometry box (500 mm, 1 m, 2 dm) }";

    #[test]
    fn quantities_are_converted_to_si_on_both_routes() {
        let (model, symbols) = validated(UNITS);
        let (vm, _) = validate(&model, symbols).unwrap();
        let program = emit_setup_program(&vm).unwrap();
        let SetupInstruction::AddTransform { cache, .. } = &program.instructions[0] else {
            panic!("transform first");
        };
        assert_eq!(cache[0].stamp, 1_000_000);
        assert_eq!(cache[0].translation, [1.0, 0.0, 0.1]);
        assert_eq!(cache[1].stamp, 1_000_000_000);
        let SetupInstruction::AddGeometry { shape, stamp, .. } = &program.instructions[1] else {
            panic!("geometry second");
        };
        assert_eq!(*shape, ShapeDoc::Box { x: 0.5, y: 1.0, z: 0.2 });
        assert_eq!(*stamp, 0);

        let direct = instantiate(&vm).unwrap();
        let loaded = load_setup_program(&program).unwrap();
        assert_eq!(direct.snapshot(), loaded.snapshot());
    }

    #[test]
    fn emitted_json_is_deterministic_and_replays_identically() {
        let (model, symbols) = validated(DIAMOND);
        let (vm, _) = validate(&model, symbols).unwrap();
        let a = emit_setup_program(&vm).unwrap().to_json_pretty();
        let b = emit_setup_program(&vm).unwrap().to_json_pretty();
        assert_eq!(a, b);
        let program = SetupProgram::from_json(&a).unwrap();
        let direct = instantiate(&vm).unwrap().snapshot().to_json_pretty();
        let replayed = load_setup_program(&program).unwrap().snapshot().to_json_pretty();
        assert_eq!(direct, replayed);
    }

    #[test]
    fn program_json_uses_op_tags_and_camel_case() {
        let (model, symbols) = validated(UNITS);
        let (vm, _) = validate(&model, symbols).unwrap();
        let json = emit_setup_program(&vm).unwrap().to_json_pretty();
        assert!(json.contains("\"formatVersion\": 1"));
        assert!(json.contains("\"modelName\": \"g\""));
        assert!(json.contains("\"op\": \"ADD_TRANSFORM\""));
        assert!(json.contains("\"op\": \"ADD_GEOMETRY\""));
        assert!(json.contains("\"type\": \"box\""));
    }

    #[test]
    fn load_rejects_malformed_programs() {
        let (model, symbols) = validated(DIAMOND);
        let (vm, _) = validate(&model, symbols).unwrap();
        let mut program = emit_setup_program(&vm).unwrap();
        program.format_version = 2;
        assert!(load_setup_program(&program).unwrap_err().contains("format version"));

        let mut program = emit_setup_program(&vm).unwrap();
        program.instructions.remove(0);
        // First instruction created `a`, which `s` needs as parent.
        assert!(load_setup_program(&program).unwrap_err().contains("unknown variable"));

        let mut program = emit_setup_program(&vm).unwrap();
        let dup = program.instructions[0].clone();
        program.instructions.push(dup);
        assert!(load_setup_program(&program).unwrap_err().contains("bound twice"));
    }

    #[test]
    fn structure_and_type_declarations_stay_out_of_the_program() {
        let src = "root g\n\
            Group g { children { cloud } }\n\
            GeometricNode cloud { geometry pointcloud P { points { (1 m, 2 m, 3 m) } } }\n\
            PointCloudType P { hostType \"pcl::PointCloud<pcl::PointXYZ>\" }\n\
            Node pattern { cardinality * }\n\
            FunctionBlock blk {\n\
              inputHook cloud\n\
              inputStructure cloud\n\
              outputHook g\n\
              outputStructure pattern\n\
            }";
        let (model, symbols) = validated(src);
        let (vm, _) = validate(&model, symbols).unwrap();
        let program = emit_setup_program(&vm).unwrap();
        assert_eq!(program.instructions.len(), 1);
        let SetupInstruction::AddGeometry { shape, .. } = &program.instructions[0] else {
            panic!("cloud only");
        };
        let ShapeDoc::PointCloud { type_name, points } = shape else { panic!("cloud shape") };
        assert_eq!(type_name, "P");
        assert_eq!(points, &vec![[1.0, 2.0, 3.0]]);
    }
}
