//! Property tests for the runtime against independent reference models.
//!
//! The transform cache is checked against a plain mirror vector that
//! re-derives the monotonicity, eviction and closest-stamp rules; path
//! resolution is checked against an exhaustive enumeration of all
//! root-to-node paths; and global transforms are checked against a 4x4
//! homogeneous matrix product computed from scratch.

use proptest::prelude::*;
use proptest::sample::Index;

use rsg_core::ast::Attribute;
use rsg_core::runtime::transform::{HomMatrix, TransformCache};
use rsg_core::runtime::{NodeId, PathPolicy, TimeStamp, WmError, WorldModel};

fn marker(i: usize) -> HomMatrix {
    HomMatrix::translation([i as f64, 0.5 * i as f64, -(i as f64)])
}

proptest! {
    #[test]
    fn cache_agrees_with_a_mirror_of_its_rules(
        window in 1i64..500,
        stamps in prop::collection::vec(-1000i64..1000, 1..40),
        probes in prop::collection::vec(-1200i64..1200, 0..20),
    ) {
        let mut cache = TransformCache::new(window);
        let mut mirror: Vec<(i64, HomMatrix)> = Vec::new();
        for (i, &s) in stamps.iter().enumerate() {
            let m = marker(i);
            let monotone = mirror.last().is_none_or(|&(last, _)| s > last);
            prop_assert_eq!(cache.insert(s, m), monotone);
            if monotone {
                mirror.push((s, m));
                mirror.retain(|&(t, _)| t >= s - window);
            }
        }
        prop_assert_eq!(cache.entries(), &mirror[..]);

        // The first insert always lands, so the mirror is never empty.
        let (latest, _) = *mirror.last().unwrap();
        let (oldest, _) = mirror[0];
        for &(t, _) in cache.entries() {
            prop_assert!(t >= latest - window);
        }
        for &(t, ref m) in &mirror {
            prop_assert_eq!(cache.lookup(t), Some(m));
        }
        prop_assert_eq!(cache.lookup(oldest - 1), None);
        prop_assert_eq!(cache.lookup(latest + 1), None);
        for &p in &probes {
            let expected = if p < oldest || p > latest {
                None
            } else {
                mirror
                    .iter()
                    .min_by_key(|&&(t, _)| ((p - t).abs(), t))
                    .map(|(_, m)| m)
            };
            prop_assert_eq!(cache.lookup(p), expected);
        }
    }
}

#[test]
fn get_transform_misses_outside_the_cached_interval() {
    let mut wm = WorldModel::new();
    let t = wm
        .add_transform_node(WorldModel::ROOT, Vec::new(), HomMatrix::IDENTITY, TimeStamp(100))
        .unwrap();
    wm.insert_transform(t, marker(1), TimeStamp(200)).unwrap();
    assert!(wm.get_transform(t, TimeStamp(150)).is_ok());
    assert_eq!(
        wm.get_transform(t, TimeStamp(99)),
        Err(WmError::CacheMiss { node: t, stamp: 99 })
    );
    assert_eq!(
        wm.get_transform(t, TimeStamp(201)),
        Err(WmError::CacheMiss { node: t, stamp: 201 })
    );
}

/// Blueprint for one generated node of a random DAG. Every node is
/// group-like so later nodes can always pick it as a parent.
#[derive(Clone, Debug)]
struct NodeSpec {
    transform: bool,
    stamp: i64,
    tagged: bool,
    parent: Index,
    extra_parent: Option<Index>,
}

fn node_spec() -> impl Strategy<Value = NodeSpec> {
    (any::<bool>(), 0i64..60, any::<bool>(), any::<Index>(), prop::option::of(any::<Index>()))
        .prop_map(|(transform, stamp, tagged, parent, extra_parent)| NodeSpec {
            transform,
            stamp,
            tagged,
            parent,
            extra_parent,
        })
}

/// The only attribute the runtime root carries, so tagged queries that must
/// traverse the root can use it.
fn tag() -> Attribute {
    Attribute::new("name", "root")
}

fn build_dag(specs: &[NodeSpec]) -> WorldModel {
    let mut wm = WorldModel::new();
    let mut ids = vec![WorldModel::ROOT];
    for spec in specs {
        let parent = ids[spec.parent.index(ids.len())];
        let attrs = if spec.tagged { vec![tag()] } else { Vec::new() };
        let id = if spec.transform {
            wm.add_transform_node(parent, attrs, HomMatrix::IDENTITY, TimeStamp(spec.stamp))
                .unwrap()
        } else {
            wm.add_group(parent, attrs).unwrap()
        };
        if let Some(extra) = &spec.extra_parent {
            let second = ids[extra.index(ids.len())];
            if second != parent {
                wm.add_parent(id, second).unwrap();
            }
        }
        ids.push(id);
    }
    wm
}

fn all_paths(wm: &WorldModel, id: NodeId) -> Vec<Vec<NodeId>> {
    if id == WorldModel::ROOT {
        return vec![vec![id]];
    }
    let mut out = Vec::new();
    for &p in &wm.node(id).unwrap().parents {
        for mut path in all_paths(wm, p) {
            path.push(id);
            out.push(path);
        }
    }
    out
}

/// Bottleneck freshness; `None` means the path has no transform on it and
/// outranks every finite stamp.
fn oracle_freshness(wm: &WorldModel, path: &[NodeId]) -> Option<i64> {
    path.iter()
        .filter_map(|n| wm.node(*n).unwrap().cache())
        .map(|c| c.latest().unwrap().0)
        .min()
}

fn oracle_best(wm: &WorldModel, mut paths: Vec<Vec<NodeId>>) -> Option<Vec<NodeId>> {
    let best = paths.iter().map(|p| oracle_freshness(wm, p)).max_by(|a, b| match (a, b) {
        (None, None) => core::cmp::Ordering::Equal,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (Some(_), None) => core::cmp::Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    })?;
    paths.retain(|p| oracle_freshness(wm, p) == best);
    paths.into_iter().min()
}

proptest! {
    #[test]
    fn resolve_path_agrees_with_exhaustive_enumeration(
        specs in prop::collection::vec(node_spec(), 1..12),
    ) {
        let wm = build_dag(&specs);
        let ids: Vec<NodeId> = wm.ids().collect();
        for &id in &ids {
            let paths = all_paths(&wm, id);
            let expected = oracle_best(&wm, paths.clone()).expect("every node is reachable");
            prop_assert_eq!(wm.resolve_path(id, &PathPolicy::Latest), Ok(expected));

            let policy = PathPolicy::Tagged(vec![tag()]);
            let admissible: Vec<Vec<NodeId>> = paths
                .into_iter()
                .filter(|p| {
                    p.iter().all(|n| wm.node(*n).unwrap().attributes.contains(&tag()))
                })
                .collect();
            match oracle_best(&wm, admissible) {
                Some(expected) => prop_assert_eq!(wm.resolve_path(id, &policy), Ok(expected)),
                None => prop_assert_eq!(wm.resolve_path(id, &policy), Err(WmError::NoPath(id))),
            }
        }
    }
}

/// Independent 4x4 homogeneous product used as the composition oracle.
type Mat4 = [[f64; 4]; 4];

fn to_mat4(m: &HomMatrix) -> Mat4 {
    let r = m.r;
    let t = m.t;
    [
        [r[0], r[1], r[2], t[0]],
        [r[3], r[4], r[5], t[1]],
        [r[6], r[7], r[8], t[2]],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Rotation about one principal axis; exactly orthonormal up to rounding.
fn axis_rotation(axis: u8, angle: f64) -> HomMatrix {
    let (s, c) = angle.sin_cos();
    let r = match axis % 3 {
        0 => [1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c],
        1 => [c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c],
        _ => [c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0],
    };
    HomMatrix::new(r, [0.0; 3])
}

proptest! {
    #[test]
    fn global_transform_agrees_with_a_homogeneous_product(
        links in prop::collection::vec(
            (0u8..3, -3.0f64..3.0, -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0),
            1..6,
        ),
    ) {
        let mut wm = WorldModel::new();
        let mut parent = WorldModel::ROOT;
        let mut expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for &(axis, angle, x, y, z) in &links {
            let mut m = axis_rotation(axis, angle);
            m.t = [x, y, z];
            parent = wm.add_transform_node(parent, Vec::new(), m, TimeStamp(0)).unwrap();
            expected = mul4(&expected, &to_mat4(&m));
        }
        let leaf = wm.add_node(parent, Vec::new()).unwrap();
        let got = wm.get_global_transform(leaf, TimeStamp(0), &PathPolicy::Latest).unwrap();
        let got4 = to_mat4(&got);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!(
                    (got4[i][j] - expected[i][j]).abs() <= 1e-9,
                    "entry ({}, {}): {} vs {}", i, j, got4[i][j], expected[i][j]
                );
            }
        }
    }
}
