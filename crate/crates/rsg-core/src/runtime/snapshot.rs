//! Serializable snapshot of a world model.
//!
//! The snapshot is a stable wire format: nodes sorted by identifier,
//! parents sorted, children in insertion order, camelCase keys. Rendering
//! the same world twice yields byte-identical JSON.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Payload, ShapeData, WorldModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotDoc {
    pub format_version: u32,
    pub nodes: Vec<SnapshotNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotNode {
    pub id: u64,
    pub kind: String,
    pub attributes: Vec<AttributeDoc>,
    pub parents: Vec<u64>,
    pub children: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cache: Option<CacheDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shape: Option<ShapeDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stamp: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeDoc {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CacheDoc {
    pub window_ns: i64,
    pub entries: Vec<CacheEntryDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntryDoc {
    pub stamp: i64,
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ShapeDoc {
    Box { x: f64, y: f64, z: f64 },
    Cylinder { radius: f64, height: f64 },
    PointCloud { type_name: String, points: Vec<[f64; 3]> },
    Mesh { type_name: String, triangles: Vec<[[f64; 3]; 3]> },
}

impl From<&ShapeData> for ShapeDoc {
    fn from(shape: &ShapeData) -> Self {
        match shape {
            ShapeData::Box { x, y, z } => ShapeDoc::Box { x: *x, y: *y, z: *z },
            ShapeData::Cylinder { radius, height } => {
                ShapeDoc::Cylinder { radius: *radius, height: *height }
            }
            ShapeData::PointCloud { type_name, points } => {
                ShapeDoc::PointCloud { type_name: type_name.clone(), points: points.clone() }
            }
            ShapeData::Mesh { type_name, triangles } => {
                ShapeDoc::Mesh { type_name: type_name.clone(), triangles: triangles.clone() }
            }
        }
    }
}

impl From<&ShapeDoc> for ShapeData {
    fn from(doc: &ShapeDoc) -> Self {
        match doc {
            ShapeDoc::Box { x, y, z } => ShapeData::Box { x: *x, y: *y, z: *z },
            ShapeDoc::Cylinder { radius, height } => {
                ShapeData::Cylinder { radius: *radius, height: *height }
            }
            ShapeDoc::PointCloud { type_name, points } => {
                ShapeData::PointCloud { type_name: type_name.clone(), points: points.clone() }
            }
            ShapeDoc::Mesh { type_name, triangles } => {
                ShapeData::Mesh { type_name: type_name.clone(), triangles: triangles.clone() }
            }
        }
    }
}

impl WorldModel {
    /// Renders the world into its stable snapshot form.
    pub fn snapshot(&self) -> SnapshotDoc {
        let mut nodes = Vec::with_capacity(self.len());
        for id in self.ids() {
            let node = self.node(id).expect("iterating live ids");
            let kind = match &node.payload {
                Payload::Node => "NODE",
                Payload::Group { .. } => "GROUP",
                Payload::Transform { .. } => "TRANSFORM",
                Payload::Geometry { .. } => "GEOMETRY",
            };
            let (cache, shape, stamp) = match &node.payload {
                Payload::Transform { cache, .. } => (
                    Some(CacheDoc {
                        window_ns: cache.window_ns(),
                        entries: cache
                            .entries()
                            .iter()
                            .map(|(s, m)| CacheEntryDoc {
                                stamp: *s,
                                rotation: m.r,
                                translation: m.t,
                            })
                            .collect(),
                    }),
                    None,
                    None,
                ),
                Payload::Geometry { shape, stamp } => {
                    (None, Some(ShapeDoc::from(shape)), Some(stamp.0))
                }
                _ => (None, None, None),
            };
            nodes.push(SnapshotNode {
                id: id.0,
                kind: kind.to_string(),
                attributes: node
                    .attributes
                    .iter()
                    .map(|a| AttributeDoc { key: a.key.clone(), value: a.value.clone() })
                    .collect(),
                parents: node.parents.iter().map(|p| p.0).collect(),
                children: node.children().iter().map(|c| c.0).collect(),
                cache,
                shape,
                stamp,
            });
        }
        SnapshotDoc { format_version: 1, nodes }
    }
}

impl SnapshotDoc {
    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("snapshot serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}
