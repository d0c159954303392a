//! Function-block execution: hook resolution, input matching, transactional
//! application of creation instructions, and output verification.
//!
//! A block instance couples the declared interface (hooks and structure
//! patterns) with a host-registered body. The body never touches the world
//! directly: it reads the matched input and returns creation instructions,
//! which the runtime applies atomically — on any failure the world is
//! rolled back to its state before the call (the identifier counter is not
//! rewound, so replays after a failed call stay deterministic).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{Attribute, Decl, DeclKind, NameRef};
use crate::diag::{DiagCode, Diagnostic};
use crate::sem::pattern::{match_pattern, MatchResult, StructurePattern};
use crate::sem::ValidatedModel;

use super::transform::HomMatrix;
use super::{NodeId, ShapeData, TimeStamp, WmError, WorldModel};

/// How a hook is located in the live world.
#[derive(Clone, Debug, PartialEq)]
pub enum HookRef {
    ById(NodeId),
    /// Resolved through an attribute query that must hit exactly one node.
    ByAttributes(Vec<Attribute>),
}

/// What a block body sees: the world (read-only), the resolved input hook,
/// the input-pattern bindings, and the execution stamp.
pub struct BlockInput<'a> {
    pub world: &'a WorldModel,
    pub input_hook: NodeId,
    pub bindings: &'a MatchResult,
    pub stamp: TimeStamp,
}

/// Where a created node is attached.
#[derive(Clone, Debug, PartialEq)]
pub enum CreationParent {
    OutputHook,
    /// A variable bound by an earlier instruction of the same body.
    Var(String),
}

/// The node-producing part of one creation instruction.
#[derive(Clone, Debug, PartialEq)]
pub enum CreationOp {
    Node { attributes: Vec<Attribute> },
    Group { attributes: Vec<Attribute> },
    Transform { attributes: Vec<Attribute>, matrix: HomMatrix, stamp: TimeStamp },
    Geometry { attributes: Vec<Attribute>, shape: ShapeData, stamp: TimeStamp },
}

/// One step of a block body's output: create a node, attach it, and bind it
/// to a fresh variable for later steps.
#[derive(Clone, Debug, PartialEq)]
pub struct CreationInstruction {
    pub var: String,
    pub parent: CreationParent,
    pub op: CreationOp,
}

/// A block body: pure with respect to the world, returning the instructions
/// to apply or an error message.
pub type BlockBody =
    Box<dyn Fn(&BlockInput<'_>) -> Result<Vec<CreationInstruction>, String> + Send + Sync>;

/// An executable function block: declared interface plus host body.
pub struct FunctionBlockInstance {
    pub name: String,
    pub input_hook: HookRef,
    pub output_hook: HookRef,
    pub input_pattern: StructurePattern,
    pub output_pattern: StructurePattern,
    pub body: BlockBody,
}

impl FunctionBlockInstance {
    /// Instantiates a declared block against a validated model: hooks
    /// become attribute queries over the hook declarations' attributes, and
    /// the structure declarations are expanded into patterns.
    pub fn from_decl(
        decl: &Decl,
        vm: &ValidatedModel<'_>,
        body: BlockBody,
    ) -> Result<Self, Diagnostic> {
        let DeclKind::FunctionBlock(refs) = &decl.kind else {
            return Err(Diagnostic::error(
                decl.name.pos,
                DiagCode::InvalidReference,
                format!("{} is not a function block", decl.name.text),
            ));
        };
        let input_pattern = crate::sem::pattern::to_pattern(&refs.input_structure.name, vm)?;
        let output_pattern = crate::sem::pattern::to_pattern(&refs.output_structure.name, vm)?;
        Ok(FunctionBlockInstance {
            name: decl.name.text.clone(),
            input_hook: HookRef::ByAttributes(hook_attributes(vm, &refs.input_hook)?),
            output_hook: HookRef::ByAttributes(hook_attributes(vm, &refs.output_hook)?),
            input_pattern,
            output_pattern,
            body,
        })
    }
}

pub(crate) fn hook_attributes(
    vm: &ValidatedModel<'_>,
    hook: &NameRef,
) -> Result<Vec<Attribute>, Diagnostic> {
    vm.decl(&hook.name)
        .and_then(|d| d.kind.props())
        .map(|p| p.attributes.clone())
        .ok_or_else(|| {
            Diagnostic::error(
                hook.pos,
                DiagCode::UndefinedName,
                format!("hook {} does not name a scene node", hook.name),
            )
        })
}

/// Everything a successful execution reports back.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionReport {
    pub block: String,
    pub input_hook: NodeId,
    pub output_hook: NodeId,
    pub bindings: MatchResult,
    /// Created nodes in creation order, with their body variables.
    pub created: Vec<(String, NodeId)>,
}

impl WorldModel {
    fn resolve_hook(&self, hook: &HookRef, role: &str) -> Result<NodeId, WmError> {
        match hook {
            HookRef::ById(id) => {
                if self.contains(*id) {
                    Ok(*id)
                } else {
                    Err(WmError::HookUnresolved(format!("{role} hook: node {id} does not exist")))
                }
            }
            HookRef::ByAttributes(query) => {
                let found = self.find_nodes(query);
                match found.len() {
                    0 => Err(WmError::HookUnresolved(format!(
                        "{role} hook: no node carries {}",
                        describe_query(query)
                    ))),
                    1 => Ok(found[0]),
                    n => Err(WmError::HookAmbiguous(format!(
                        "{role} hook: {n} nodes carry {}",
                        describe_query(query)
                    ))),
                }
            }
        }
    }

    /// Runs a function block at `stamp`. Resolves both hooks, matches the
    /// input structure at the input hook, applies the body's instructions,
    /// and verifies every node attached to the output hook against the
    /// output structure. Any failure rolls the world back unchanged.
    pub fn execute_function_block(
        &mut self,
        block: &FunctionBlockInstance,
        stamp: TimeStamp,
    ) -> Result<ExecutionReport, WmError> {
        let input_hook = self.resolve_hook(&block.input_hook, "input")?;
        let output_hook = self.resolve_hook(&block.output_hook, "output")?;
        if !self.nodes[&output_hook].is_grouplike() {
            return Err(WmError::HookUnresolved(format!(
                "output hook: node {output_hook} cannot hold children"
            )));
        }
        let bindings = match_pattern(&block.input_pattern, self, input_hook);
        if !bindings.matched {
            return Err(WmError::InputMismatch(format!(
                "node {input_hook} does not match the input structure of block {}",
                block.name
            )));
        }
        let saved = self.nodes.clone();
        match self.apply_body(block, input_hook, output_hook, &bindings, stamp) {
            Ok(report) => Ok(report),
            Err(e) => {
                self.nodes = saved;
                Err(e)
            }
        }
    }

    fn apply_body(
        &mut self,
        block: &FunctionBlockInstance,
        input_hook: NodeId,
        output_hook: NodeId,
        bindings: &MatchResult,
        stamp: TimeStamp,
    ) -> Result<ExecutionReport, WmError> {
        let instructions = {
            let input = BlockInput { world: &*self, input_hook, bindings, stamp };
            (block.body)(&input).map_err(WmError::BodyError)?
        };
        let mut vars: BTreeMap<String, NodeId> = BTreeMap::new();
        let mut created = Vec::new();
        let mut top_level = Vec::new();
        for ins in &instructions {
            if vars.contains_key(&ins.var) {
                return Err(WmError::BodyError(format!("variable {} bound twice", ins.var)));
            }
            let parent = match &ins.parent {
                CreationParent::OutputHook => output_hook,
                CreationParent::Var(v) => *vars
                    .get(v)
                    .ok_or_else(|| WmError::BodyError(format!("unknown variable {v}")))?,
            };
            let id = match &ins.op {
                CreationOp::Node { attributes } => self.add_node(parent, attributes.clone())?,
                CreationOp::Group { attributes } => self.add_group(parent, attributes.clone())?,
                CreationOp::Transform { attributes, matrix, stamp } => {
                    self.add_transform_node(parent, attributes.clone(), *matrix, *stamp)?
                }
                CreationOp::Geometry { attributes, shape, stamp } => {
                    self.add_geometric_node(parent, attributes.clone(), shape.clone(), *stamp)?
                }
            };
            vars.insert(ins.var.clone(), id);
            created.push((ins.var.clone(), id));
            if ins.parent == CreationParent::OutputHook {
                top_level.push(id);
            }
        }
        for &id in &top_level {
            let check = match_pattern(&block.output_pattern, self, id);
            if !check.matched {
                return Err(WmError::OutputMismatch(format!(
                    "created node {id} does not match the output structure of block {}",
                    block.name
                )));
            }
        }
        Ok(ExecutionReport {
            block: block.name.clone(),
            input_hook,
            output_hook,
            bindings: bindings.clone(),
            created,
        })
    }
}

fn describe_query(query: &[Attribute]) -> String {
    if query.is_empty() {
        return String::from("an empty attribute query");
    }
    let mut out = String::new();
    for (i, a) in query.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!("({} = {})", a.key, a.value));
    }
    out
}
