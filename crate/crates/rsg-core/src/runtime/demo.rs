//! Built-in function-block bodies the host registers by name.
//!
//! The only built-in is a horizontal plane segmentation: it slices the
//! input point cloud into height bins, merges runs of adjacent occupied
//! bins into clusters, and emits one transform (at the cluster centroid)
//! holding one sub-cloud per cluster, all under a fresh `planes` group.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ast::Attribute;

use super::block::{BlockBody, BlockInput, CreationInstruction, CreationOp, CreationParent};
use super::transform::HomMatrix;
use super::{Payload, ShapeData};

/// Name under which the segmentation body is registered.
pub const HORIZONTAL_PLANE_SEGMENTATION: &str = "horizontalPlaneSegmentation";

/// Height of one segmentation bin, in metres.
pub const BIN_HEIGHT_M: f64 = 0.05;

/// Looks up a built-in body by block name.
pub fn builtin_body(name: &str) -> Option<BlockBody> {
    match name {
        HORIZONTAL_PLANE_SEGMENTATION => Some(Box::new(horizontal_plane_segmentation)),
        _ => None,
    }
}

/// Names of all built-in bodies.
pub fn builtin_names() -> Vec<&'static str> {
    vec![HORIZONTAL_PLANE_SEGMENTATION]
}

/// Segments the input cloud by height. Points are binned by
/// `floor(z / BIN_HEIGHT_M)`; maximal runs of adjacent occupied bins form
/// clusters, in ascending height order. Emits a `planes` group under the
/// output hook with, per cluster, a transform translated to the cluster
/// centroid holding the cluster's points as a new cloud of the input's
/// point type.
pub fn horizontal_plane_segmentation(
    input: &BlockInput<'_>,
) -> Result<Vec<CreationInstruction>, String> {
    let node = input
        .world
        .node(input.input_hook)
        .map_err(|e| format!("input hook vanished: {e}"))?;
    let Payload::Geometry { shape: ShapeData::PointCloud { type_name, points }, .. } =
        &node.payload
    else {
        return Err(String::from("input hook does not hold a point cloud"));
    };

    let mut bins: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        if !p.iter().all(|c| c.is_finite()) {
            return Err(format!("point {i} has a non-finite coordinate"));
        }
        let bin = libm::floor(p[2] / BIN_HEIGHT_M) as i64;
        bins.entry(bin).or_default().push(i);
    }

    // Merge maximal runs of adjacent bins, ascending.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut prev_bin: Option<i64> = None;
    for (&bin, members) in &bins {
        match prev_bin {
            Some(p) if bin == p + 1 => clusters.last_mut().unwrap().extend(members),
            _ => clusters.push(members.clone()),
        }
        prev_bin = Some(bin);
    }

    let mut out = vec![CreationInstruction {
        var: String::from("planes"),
        parent: CreationParent::OutputHook,
        op: CreationOp::Group { attributes: vec![Attribute::new("name", "planes")] },
    }];
    for (ci, cluster) in clusters.iter().enumerate() {
        let mut centroid = [0.0f64; 3];
        for &i in cluster {
            for axis in 0..3 {
                centroid[axis] += points[i][axis];
            }
        }
        for c in &mut centroid {
            *c /= cluster.len() as f64;
        }
        let tf_var = format!("segment_{ci}_tf");
        let cloud_var = format!("segment_{ci}");
        out.push(CreationInstruction {
            var: tf_var.clone(),
            parent: CreationParent::Var(String::from("planes")),
            op: CreationOp::Transform {
                attributes: vec![Attribute::new("name", &tf_var)],
                matrix: HomMatrix::translation(centroid),
                stamp: input.stamp,
            },
        });
        out.push(CreationInstruction {
            var: cloud_var.clone(),
            parent: CreationParent::Var(tf_var),
            op: CreationOp::Geometry {
                attributes: vec![Attribute::new("name", &cloud_var)],
                shape: ShapeData::PointCloud {
                    type_name: type_name.clone(),
                    points: cluster.iter().map(|&i| points[i]).collect(),
                },
                stamp: input.stamp,
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{NodeId, TimeStamp, WorldModel};
    use crate::sem::pattern::match_pattern;

    fn cloud_world(points: Vec<[f64; 3]>) -> (WorldModel, NodeId, NodeId) {
        let mut wm = WorldModel::new();
        let sink = wm
            .add_group(WorldModel::ROOT, vec![Attribute::new("name", "sink")])
            .unwrap();
        let cloud = wm
            .add_geometric_node(
                WorldModel::ROOT,
                vec![Attribute::new("name", "cloud")],
                ShapeData::PointCloud { type_name: String::from("xyz"), points },
                TimeStamp::ZERO,
            )
            .unwrap();
        (wm, sink, cloud)
    }

    fn run_body(wm: &WorldModel, cloud: NodeId, stamp: i64) -> Vec<CreationInstruction> {
        use crate::sem::pattern::{PatternKind, ShapeKind, StructurePattern};
        let pattern = StructurePattern::new(PatternKind::Geometry(ShapeKind::PointCloud));
        let bindings = match_pattern(&pattern, wm, cloud);
        assert!(bindings.matched);
        let input = BlockInput {
            world: wm,
            input_hook: cloud,
            bindings: &bindings,
            stamp: TimeStamp(stamp),
        };
        horizontal_plane_segmentation(&input).unwrap()
    }

    #[test]
    fn three_separated_slabs_yield_three_segments() {
        let points = vec![
            [0.0, 0.0, 0.01],
            [1.0, 0.0, 0.02],
            [0.0, 1.0, 0.03],
            [0.5, 0.5, 0.52],
            [0.6, 0.4, 0.53],
            [2.0, 2.0, 1.01],
        ];
        let (wm, _, cloud) = cloud_world(points);
        let out = run_body(&wm, cloud, 7);
        // 1 planes group + 3 x (transform + cloud).
        assert_eq!(out.len(), 7);
        let CreationOp::Group { attributes } = &out[0].op else { panic!("planes group first") };
        assert_eq!(attributes, &vec![Attribute::new("name", "planes")]);
        let CreationOp::Transform { matrix, stamp, .. } = &out[1].op else { panic!() };
        assert_eq!(stamp.0, 7);
        // Centroid of the first slab.
        assert!((matrix.t[0] - (0.0 + 1.0 + 0.0) / 3.0).abs() < 1e-12);
        assert!((matrix.t[1] - (0.0 + 0.0 + 1.0) / 3.0).abs() < 1e-12);
        assert!((matrix.t[2] - (0.01 + 0.02 + 0.03) / 3.0).abs() < 1e-12);
        let CreationOp::Geometry { shape: ShapeData::PointCloud { points, type_name }, .. } =
            &out[2].op
        else {
            panic!()
        };
        assert_eq!(type_name, "xyz");
        assert_eq!(points.len(), 3);
    }

    #[test]
    fn adjacent_bins_merge_into_one_cluster() {
        // z values 0.02 (bin 0), 0.06 (bin 1): adjacent, so one cluster;
        // 0.52 (bin 10) stands alone.
        let points = vec![[0.0, 0.0, 0.02], [0.0, 0.0, 0.06], [0.0, 0.0, 0.52]];
        let (wm, _, cloud) = cloud_world(points);
        let out = run_body(&wm, cloud, 0);
        assert_eq!(out.len(), 5, "two clusters expected");
    }

    #[test]
    fn empty_cloud_yields_only_the_planes_group() {
        let (wm, _, cloud) = cloud_world(Vec::new());
        let out = run_body(&wm, cloud, 0);
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn negative_heights_bin_below_zero() {
        // -0.01 lands in bin -1, 0.01 in bin 0: adjacent, one cluster.
        let points = vec![[0.0, 0.0, -0.01], [0.0, 0.0, 0.01]];
        let (wm, _, cloud) = cloud_world(points);
        let out = run_body(&wm, cloud, 0);
        assert_eq!(out.len(), 3);
        // Distant negative slab stays separate.
        let points = vec![[0.0, 0.0, -1.0], [0.0, 0.0, 0.01]];
        let (wm, _, cloud) = cloud_world(points);
        let out = run_body(&wm, cloud, 0);
        assert_eq!(out.len(), 5);
    }

    #[test]
    fn registry_knows_the_builtin() {
        assert!(builtin_body(HORIZONTAL_PLANE_SEGMENTATION).is_some());
        assert!(builtin_body("noSuchBlock").is_none());
        assert_eq!(builtin_names(), vec![HORIZONTAL_PLANE_SEGMENTATION]);
    }
}
