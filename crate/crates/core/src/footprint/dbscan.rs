//! Density-based clustering of good instances in the 2D space.

use crate::geometry::Pt;

/// Neighbour count `k` and radius `eps` from the number of unique points and
/// the coordinate ranges. The radius multiplies both ranges, so it carries
/// area units; see [`EpsilonScale`] for the length-unit alternative.
pub fn dbscan_params(r: usize, range_z1: f64, range_z2: f64) -> (usize, f64) {
    assert!(r >= 1, "need at least one unique point");
    let k = r.div_ceil(20).clamp(3, 50);
    let gamma2 = 1.0;
    let eps = k as f64 * gamma2 / (r as f64 * std::f64::consts::PI).sqrt() * (range_z1 * range_z2);
    (k, eps)
}

/// How the coordinate ranges enter the DBSCAN radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsilonScale {
    /// Product of the two ranges (area units).
    #[default]
    Product,
    /// Geometric mean of the two ranges (length units).
    GeometricMean,
}

impl EpsilonScale {
    pub fn epsilon(self, r: usize, range_z1: f64, range_z2: f64) -> (usize, f64) {
        let (k, eps) = dbscan_params(r, range_z1, range_z2);
        match self {
            EpsilonScale::Product => (k, eps),
            EpsilonScale::GeometricMean => {
                let prod = range_z1 * range_z2;
                let eps = if prod > 0.0 { eps / prod * prod.sqrt() } else { 0.0 };
                (k, eps)
            }
        }
    }
}

impl std::str::FromStr for EpsilonScale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "product" => Ok(EpsilonScale::Product),
            "geometric-mean" => Ok(EpsilonScale::GeometricMean),
            _ => Err(format!(
                "unknown epsilon scale '{s}' (expected product or geometric-mean)"
            )),
        }
    }
}

impl std::fmt::Display for EpsilonScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EpsilonScale::Product => "product",
            EpsilonScale::GeometricMean => "geometric-mean",
        })
    }
}

pub const NOISE: i32 = -1;

fn within(a: Pt, b: Pt, eps2: f64) -> bool {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy <= eps2
}

/// Labels each point with a cluster id in `1..=N_c`, or [`NOISE`].
///
/// A point is core when at least `k` points (itself included) lie within
/// `eps`. Points are scanned in index order; each unlabelled core point
/// starts a new cluster that grows through core connectivity, and a border
/// point keeps the first cluster that reaches it.
pub fn dbscan(points: &[Pt], k: usize, eps: f64) -> Vec<i32> {
    assert!(eps > 0.0 && k >= 1);
    let n = points.len();
    let eps2 = eps * eps;
    let core: Vec<bool> = (0..n)
        .map(|i| points.iter().filter(|&&q| within(points[i], q, eps2)).count() >= k)
        .collect();
    let mut labels = vec![0i32; n];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for i in 0..n {
        if labels[i] != 0 {
            continue;
        }
        if !core[i] {
            labels[i] = NOISE;
            continue;
        }
        next += 1;
        labels[i] = next;
        queue.push_back(i);
        while let Some(q) = queue.pop_front() {
            for j in 0..n {
                if !within(points[q], points[j], eps2) {
                    continue;
                }
                if labels[j] == 0 || labels[j] == NOISE {
                    labels[j] = next;
                    if core[j] {
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    labels
}

/// Number of clusters in a label vector.
pub fn cluster_count(labels: &[i32]) -> usize {
    labels.iter().copied().max().unwrap_or(0).max(0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent route: union-find over core pairs, components numbered by
    /// their smallest core index, border points take the smallest id among
    /// their core neighbours.
    fn oracle(points: &[Pt], k: usize, eps: f64) -> Vec<i32> {
        let n = points.len();
        let eps2 = eps * eps;
        let adj = |a: usize, b: usize| within(points[a], points[b], eps2);
        let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| adj(i, j)).count() >= k).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for a in 0..n {
            for b in 0..n {
                if core[a] && core[b] && adj(a, b) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut id_of_root = std::collections::BTreeMap::new();
        let mut labels = vec![NOISE; n];
        for i in 0..n {
            if core[i] {
                let r = find(&mut parent, i);
                let next = id_of_root.len() as i32 + 1;
                labels[i] = *id_of_root.entry(r).or_insert(next);
            }
        }
        for i in 0..n {
            if !core[i] {
                labels[i] = (0..n)
                    .filter(|&j| core[j] && adj(i, j))
                    .map(|j| labels[j])
                    .min()
                    .unwrap_or(NOISE);
            }
        }
        labels
    }

    #[test]
    fn params_examples() {
        assert_eq!(dbscan_params(1088, 1.0, 1.0).0, 50);
        assert_eq!(dbscan_params(60, 1.0, 1.0).0, 3);
        let (k, eps) = dbscan_params(400, 2.0, 2.0);
        assert_eq!(k, 20);
        let expected = 20.0 / (400.0 * std::f64::consts::PI).sqrt() * 4.0;
        assert!((eps - expected).abs() < 1e-12 && (eps - 2.2568).abs() < 1e-4);
        assert_eq!(dbscan_params(1, 0.0, 0.0), (3, 0.0));
    }

    #[test]
    fn geometric_mean_scale_has_length_units() {
        let (_, a) = EpsilonScale::GeometricMean.epsilon(400, 2.0, 8.0);
        let (_, b) = EpsilonScale::Product.epsilon(400, 2.0, 8.0);
        assert!((a - b / 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_far_blobs() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push([i as f64 * 0.01, 0.0]);
            pts.push([100.0 + i as f64 * 0.01, 0.0]);
        }
        let l = dbscan(&pts, 3, 0.5);
        assert_eq!(cluster_count(&l), 2);
        assert!(l.iter().all(|&c| c > 0));
        assert_eq!(l[0], 1);
        assert_eq!(l[1], 2);
    }

    #[test]
    fn all_within_eps_is_one_cluster() {
        let pts: Vec<Pt> = (0..6).map(|i| [i as f64 * 0.1, 0.0]).collect();
        assert_eq!(dbscan(&pts, 6, 1.0), vec![1; 6]);
        assert_eq!(dbscan(&pts, 7, 1.0), vec![NOISE; 6]);
    }

    fn canonical(labels: &[i32]) -> Vec<i32> {
        let mut map = std::collections::HashMap::new();
        labels
            .iter()
            .map(|&c| {
                if c == NOISE {
                    NOISE
                } else {
                    let next = map.len() as i32 + 1;
                    *map.entry(c).or_insert(next)
                }
            })
            .collect()
    }

    proptest! {
        #[test]
        fn matches_oracle(
            pts in prop::collection::vec((0u8..20, 0u8..20), 1..50),
            k in 1usize..6,
            eps_tenths in 5u32..40,
        ) {
            let pts: Vec<Pt> = pts.iter().map(|&(a, b)| [a as f64 * 0.25, b as f64 * 0.25]).collect();
            let eps = eps_tenths as f64 / 10.0;
            prop_assert_eq!(dbscan(&pts, k, eps), oracle(&pts, k, eps));
        }

        #[test]
        fn core_clusters_are_order_invariant(
            pts in prop::collection::vec((0u8..30, 0u8..30), 3..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let pts: Vec<Pt> = pts.iter().map(|&(a, b)| [a as f64 * 0.2, b as f64 * 0.2]).collect();
            let mut perm: Vec<usize> = (0..pts.len()).collect();
            perm.shuffle(&mut crate::seed::rng(seed, &[]));
            let shuffled: Vec<Pt> = perm.iter().map(|&i| pts[i]).collect();
            let (k, eps) = (3, 0.9);
            let a = dbscan(&pts, k, eps);
            let b = dbscan(&shuffled, k, eps);
            let eps2 = eps * eps;
            let is_core = |i: usize| pts.iter().filter(|&&q| within(pts[i], q, eps2)).count() >= k;
            // map shuffled labels back to original indices, then compare the
            // partition of core points (border ties may legitimately differ)
            let mut back = vec![0; pts.len()];
            for (pos, &orig) in perm.iter().enumerate() {
                back[orig] = b[pos];
            }
            let core_idx: Vec<usize> = (0..pts.len()).filter(|&i| is_core(i)).collect();
            let ca = canonical(&core_idx.iter().map(|&i| a[i]).collect::<Vec<_>>());
            let cb = canonical(&core_idx.iter().map(|&i| back[i]).collect::<Vec<_>>());
            prop_assert_eq!(ca, cb);
            for i in 0..pts.len() {
                prop_assert_eq!(a[i] == NOISE, back[i] == NOISE);
            }
        }
    }
}
