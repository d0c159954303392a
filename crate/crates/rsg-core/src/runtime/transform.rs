//! Rigid transform values and the per-node temporal cache.

use alloc::vec::Vec;

/// Tolerance for the rotation orthonormality check on insertion.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// Default temporal cache window: 10 seconds, in nanoseconds.
pub const DEFAULT_CACHE_WINDOW_NS: i64 = 10_000_000_000;

/// A rigid transform: row-major 3x3 rotation plus translation, both in SI
/// units (metres).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomMatrix {
    pub r: [f64; 9],
    pub t: [f64; 3],
}

impl HomMatrix {
    pub const IDENTITY: HomMatrix =
        HomMatrix { r: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], t: [0.0, 0.0, 0.0] };

    pub fn new(r: [f64; 9], t: [f64; 3]) -> Self {
        HomMatrix { r, t }
    }

    pub fn translation(t: [f64; 3]) -> Self {
        HomMatrix { t, ..Self::IDENTITY }
    }

    /// Homogeneous product `self * other`: the result first applies
    /// `other`, then `self`. Chaining transforms from the root towards a
    /// node therefore folds left-to-right.
    pub fn compose(&self, other: &HomMatrix) -> HomMatrix {
        let a = &self.r;
        let b = &other.r;
        let mut r = [0.0; 9];
        for row in 0..3 {
            for col in 0..3 {
                r[3 * row + col] = a[3 * row] * b[col]
                    + a[3 * row + 1] * b[3 + col]
                    + a[3 * row + 2] * b[6 + col];
            }
        }
        let mut t = [0.0; 3];
        for row in 0..3 {
            t[row] = a[3 * row] * other.t[0]
                + a[3 * row + 1] * other.t[1]
                + a[3 * row + 2] * other.t[2]
                + self.t[row];
        }
        HomMatrix { r, t }
    }

    fn det(&self) -> f64 {
        let r = &self.r;
        r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6])
            + r[2] * (r[3] * r[7] - r[4] * r[6])
    }

    /// Is the rotation part orthonormal with determinant +1, within
    /// [`ROTATION_TOLERANCE`]? Checked entrywise on `R^T R - I`.
    pub fn has_orthonormal_rotation(&self) -> bool {
        if (self.det() - 1.0).abs() > ROTATION_TOLERANCE {
            return false;
        }
        let r = &self.r;
        for i in 0..3 {
            for j in 0..3 {
                // Column i dot column j.
                let dot = r[i] * r[j] + r[3 + i] * r[3 + j] + r[6 + i] * r[6 + j];
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > ROTATION_TOLERANCE {
                    return false;
                }
            }
        }
        true
    }
}

/// Short-term memory of one transform node: timed entries inside a sliding
/// window anchored at the newest stamp.
///
/// Entries are kept sorted by stamp; insertion requires a strictly newer
/// stamp than the current latest, and entries older than `latest - window`
/// are evicted on insertion (an entry exactly at the window edge survives).
#[derive(Clone, Debug, PartialEq)]
pub struct TransformCache {
    entries: Vec<(i64, HomMatrix)>,
    window_ns: i64,
}

impl TransformCache {
    pub fn new(window_ns: i64) -> Self {
        TransformCache { entries: Vec::new(), window_ns }
    }

    pub fn window_ns(&self) -> i64 {
        self.window_ns
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(i64, HomMatrix)] {
        &self.entries
    }

    pub fn latest(&self) -> Option<&(i64, HomMatrix)> {
        self.entries.last()
    }

    pub fn oldest(&self) -> Option<&(i64, HomMatrix)> {
        self.entries.first()
    }

    /// Appends an entry; `false` if the stamp is not strictly newer.
    pub fn insert(&mut self, stamp: i64, matrix: HomMatrix) -> bool {
        if let Some(&(latest, _)) = self.latest() {
            if stamp <= latest {
                return false;
            }
        }
        self.entries.push((stamp, matrix));
        let cutoff = stamp.saturating_sub(self.window_ns);
        self.entries.retain(|&(s, _)| s >= cutoff);
        true
    }

    /// Entry closest to `stamp`; ties resolve to the earlier entry. `None`
    /// when the stamp lies outside the cached interval.
    pub fn lookup(&self, stamp: i64) -> Option<&HomMatrix> {
        let first = self.oldest()?.0;
        let last = self.latest()?.0;
        if stamp < first || stamp > last {
            return None;
        }
        let idx = self.entries.partition_point(|&(s, _)| s < stamp);
        if idx == 0 {
            return Some(&self.entries[0].1);
        }
        if idx == self.entries.len() {
            return Some(&self.entries[idx - 1].1);
        }
        let before = &self.entries[idx - 1];
        let after = &self.entries[idx];
        if stamp - before.0 <= after.0 - stamp {
            Some(&before.1)
        } else {
            Some(&after.1)
        }
    }
}

impl Default for TransformCache {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_WINDOW_NS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(x: f64) -> HomMatrix {
        HomMatrix::translation([x, 0.0, 0.0])
    }

    #[test]
    fn identity_composes_neutrally() {
        let m = HomMatrix::new([0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0], [1.0, 2.0, 3.0]);
        assert_eq!(HomMatrix::IDENTITY.compose(&m), m);
        assert_eq!(m.compose(&HomMatrix::IDENTITY), m);
    }

    #[test]
    fn translations_add_under_composition() {
        let a = HomMatrix::translation([1.0, 0.0, 0.0]);
        let b = HomMatrix::translation([0.0, 2.0, 0.0]);
        assert_eq!(a.compose(&b).t, [1.0, 2.0, 0.0]);
    }

    #[test]
    fn rotation_applies_to_inner_translation() {
        // 90 degrees about z: maps +x to +y.
        let rot = HomMatrix::new([0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0]);
        let step = HomMatrix::translation([1.0, 0.0, 0.0]);
        let global = rot.compose(&step);
        assert!((global.t[0] - 0.0).abs() < 1e-12);
        assert!((global.t[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormality_check_accepts_rotations_and_rejects_junk() {
        assert!(HomMatrix::IDENTITY.has_orthonormal_rotation());
        let rot = HomMatrix::new([0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0], [5.0, 6.0, 7.0]);
        assert!(rot.has_orthonormal_rotation());
        // Reflection: orthonormal columns but determinant -1.
        let refl = HomMatrix::new([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0], [0.0; 3]);
        assert!(!refl.has_orthonormal_rotation());
        let zero = HomMatrix::new([0.0; 9], [0.0; 3]);
        assert!(!zero.has_orthonormal_rotation());
        let scaled = HomMatrix::new([2.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 1.0], [0.0; 3]);
        assert!(!scaled.has_orthonormal_rotation());
    }

    #[test]
    fn cache_insert_keeps_window_and_monotonicity() {
        let mut cache = TransformCache::default();
        assert!(cache.insert(0, t(0.0)));
        assert!(cache.insert(5_000_000_000, t(1.0)));
        assert!(!cache.insert(5_000_000_000, t(2.0)), "equal stamp must be rejected");
        assert!(!cache.insert(4_000_000_000, t(2.0)), "older stamp must be rejected");
        assert_eq!(cache.len(), 2);
        // Jump far ahead: everything older than latest - window is evicted.
        assert!(cache.insert(90_000_000_000, t(3.0)));
        assert_eq!(cache.len(), 1);
        // An entry exactly at the window edge survives.
        assert!(cache.insert(100_000_000_000, t(4.0)));
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn lookup_picks_closest_with_earlier_tie_break() {
        let mut cache = TransformCache::default();
        cache.insert(0, t(0.0));
        cache.insert(2_000_000_000, t(2.0));
        assert_eq!(cache.lookup(900_000_000).unwrap().t[0], 0.0);
        assert_eq!(cache.lookup(1_100_000_000).unwrap().t[0], 2.0);
        // Exact midpoint: earlier entry wins.
        assert_eq!(cache.lookup(1_000_000_000).unwrap().t[0], 0.0);
        // Exact hits.
        assert_eq!(cache.lookup(0).unwrap().t[0], 0.0);
        assert_eq!(cache.lookup(2_000_000_000).unwrap().t[0], 2.0);
        // Outside the cached interval.
        assert!(cache.lookup(-1).is_none());
        assert!(cache.lookup(2_000_000_001).is_none());
    }
}
