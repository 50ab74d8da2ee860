//! Density-descending growth into local clusters.
//!
//! Points are processed in order of decreasing normalized density. Each
//! point either starts a new local cluster (no already-born neighbor in its
//! `k_s`-neighborhood) or attaches to the born neighbor with the steepest
//! density slope, inheriting that neighbor's root. Noise is dropped by a
//! relative-density threshold and propagates to flow descendants. Mutual
//! neighbor pairs straddling two clusters are collected as boundary pairs
//! for the topology stage.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::density::DensityField;
use crate::error::{Error, Result};

/// Parameters of the growth sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    /// Neighborhood size for parent search and boundary detection
    /// (self included).
    pub k_s: usize,
    /// Relative-density noise threshold in `[0, 1]`. A point whose density
    /// divided by its root's density falls strictly below this is dropped.
    /// At 0 nothing is ever dropped; any positive value necessarily drops
    /// the global minimum-density point.
    pub epsilon: f64,
}

/// A mutual-neighbor pair straddling two different local clusters,
/// recorded from the later-born endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryPair {
    pub a: usize,
    pub b: usize,
    pub root_a: usize,
    pub root_b: usize,
}

/// Output of the growth sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthResult {
    /// Parent along the discrete gradient flow; `parent[i] == i` for roots.
    pub parent: Vec<usize>,
    /// Root (cluster center) of each point; `None` marks noise.
    pub root: Vec<Option<usize>>,
    /// Members of each local cluster, keyed by root id; noise excluded.
    pub clusters: BTreeMap<usize, Vec<usize>>,
    /// Deduplicated boundary pairs in discovery order.
    pub boundary_pairs: Vec<BoundaryPair>,
    /// Point ids sorted by decreasing density (ties by increasing id).
    pub birth_order: Vec<usize>,
}

impl GrowthResult {
    pub fn noise_count(&self) -> usize {
        self.root.iter().filter(|r| r.is_none()).count()
    }

    pub fn coverage(&self) -> f64 {
        let n = self.root.len();
        if n == 0 {
            return 0.0;
        }
        (n - self.noise_count()) as f64 / n as f64
    }
}

/// Picks the parent of point `i` among its neighbors: the born neighbor
/// maximizing `(f_j - f_i) / d(i, j)`, ties broken by smaller id. Returns
/// `None` when no neighbor is born, which makes `i` a root. A coincident
/// born neighbor (distance zero) is treated as an infinite slope.
pub fn select_parent(
    i: usize,
    neighbors: &[(usize, f64)],
    densities: &[f64],
    born: impl Fn(usize) -> bool,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &(j, dist) in neighbors {
        if j == i || !born(j) {
            continue;
        }
        let slope = if dist > 0.0 {
            (densities[j] - densities[i]) / dist
        } else {
            f64::INFINITY
        };
        let better = match best {
            None => true,
            Some((s, id)) => slope > s || (slope == s && j < id),
        };
        if better {
            best = Some((slope, j));
        }
    }
    best.map(|(_, j)| j)
}

/// Runs the growth sweep over a density field.
pub fn grow(field: &DensityField, config: &GrowthConfig) -> Result<GrowthResult> {
    let n = field.len();
    let index = field.index();
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    if config.k_s == 0 || config.k_s > n {
        return Err(Error::InvalidParam(format!(
            "k_s = {} out of range 1..={}",
            config.k_s, n
        )));
    }
    if !(0.0..=1.0).contains(&config.epsilon) {
        return Err(Error::InvalidParam(format!(
            "epsilon = {} outside [0, 1]",
            config.epsilon
        )));
    }

    let points = index.points();
    let f = field.normalized();

    // Neighborhoods are independent; compute them up front in parallel.
    let neighborhoods: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| index.query_knn(points.row(i), config.k_s))
        .collect::<Result<Vec<_>>>()?;

    // Birth order: decreasing density, ties by increasing id, so equal
    // density points chain deterministically instead of all becoming roots.
    let mut birth_order: Vec<usize> = (0..n).collect();
    birth_order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then_with(|| a.cmp(&b)));
    let mut birth_rank = vec![0usize; n];
    for (rank, &i) in birth_order.iter().enumerate() {
        birth_rank[i] = rank;
    }

    let mut parent = vec![usize::MAX; n];
    let mut root: Vec<Option<usize>> = vec![None; n];
    let mut boundary_pairs = Vec::new();
    let mut seen_pairs: HashSet<(usize, usize)> = HashSet::new();

    for (rank, &i) in birth_order.iter().enumerate() {
        let born = |j: usize| birth_rank[j] < rank;
        match select_parent(i, &neighborhoods[i], f, born) {
            None => {
                parent[i] = i;
                root[i] = Some(i);
            }
            Some(p) => {
                parent[i] = p;
                match root[p] {
                    // Descendants of noise stay noise.
                    None => root[i] = None,
                    Some(r) => {
                        let ratio = if f[r] > 0.0 { f[i] / f[r] } else { 1.0 };
                        if ratio < config.epsilon {
                            root[i] = None;
                        } else {
                            root[i] = Some(r);
                            scan_boundary(
                                i,
                                r,
                                &neighborhoods,
                                &birth_rank,
                                rank,
                                &root,
                                &mut seen_pairs,
                                &mut boundary_pairs,
                            );
                        }
                    }
                }
            }
        }
    }

    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        if let Some(r) = root[i] {
            clusters.entry(r).or_default().push(i);
        }
    }

    Ok(GrowthResult {
        parent,
        root,
        clusters,
        boundary_pairs,
        birth_order,
    })
}

/// Records mutual-neighbor pairs between the freshly assigned point `i`
/// (root `r`) and already-born, non-noise neighbors with a different root.
#[allow(clippy::too_many_arguments)]
fn scan_boundary(
    i: usize,
    r: usize,
    neighborhoods: &[Vec<(usize, f64)>],
    birth_rank: &[usize],
    rank_i: usize,
    root: &[Option<usize>],
    seen: &mut HashSet<(usize, usize)>,
    out: &mut Vec<BoundaryPair>,
) {
    for &(s, _) in &neighborhoods[i] {
        if s == i || birth_rank[s] >= rank_i {
            continue;
        }
        let rs = match root[s] {
            Some(rs) if rs != r => rs,
            _ => continue,
        };
        // mutual neighborhood check
        if !neighborhoods[s].iter().any(|&(t, _)| t == i) {
            continue;
        }
        let key = (i.min(s), i.max(s));
        if seen.insert(key) {
            out.push(BoundaryPair {
                a: i,
                b: s,
                root_a: r,
                root_b: rs,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_blobs;
    use crate::density::{estimate_density, DensityConfig};
    use crate::neighbors::KnnIndex;
    use crate::points::Points;
    use std::sync::Arc;

    fn field_over(points: &Points, k_d: usize) -> DensityField {
        let index = Arc::new(KnnIndex::build(points).unwrap());
        let config = DensityConfig::silverman(points, k_d).unwrap();
        estimate_density(&index, &config).unwrap()
    }

    #[test]
    fn select_parent_prefers_steepest_slope() {
        // i = 0 with f = 0.5; neighbor 1 at distance 1.0 with f = 0.9 gives
        // slope 0.4; neighbor 2 at distance 0.1 with f = 0.8 gives slope 3.0.
        let densities = [0.5, 0.9, 0.8];
        let neighbors = [(0usize, 0.0), (1, 1.0), (2, 0.1)];
        let got = select_parent(0, &neighbors, &densities, |j| j != 0);
        assert_eq!(got, Some(2));
    }

    #[test]
    fn select_parent_none_for_global_maximum() {
        let densities = [1.0, 0.5, 0.4];
        let neighbors = [(0usize, 0.0), (1, 1.0), (2, 1.0)];
        let got = select_parent(0, &neighbors, &densities, |_| false);
        assert_eq!(got, None);
    }

    #[test]
    fn select_parent_tie_breaks_by_smaller_id() {
        // slopes: (0.5 - 0)/1 = 0.5 and (1.0 - 0)/2 = 0.5
        let densities = [0.0, 0.5, 1.0];
        let neighbors = [(2usize, 2.0), (1, 1.0)];
        let got = select_parent(0, &neighbors, &densities, |j| j != 0);
        assert_eq!(got, Some(1));
    }

    #[test]
    fn two_separated_blobs_form_two_clusters() {
        let set = gen_blobs(200, 2, 0.1, 5.0, 17);
        let field = field_over(&set.points, 10);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 10,
                epsilon: 0.0,
            },
        )
        .unwrap();

        assert_eq!(result.clusters.len(), 2);
        assert_eq!(result.noise_count(), 0);
        assert!(result.boundary_pairs.is_empty());
        let sizes: Vec<usize> = result.clusters.values().map(|v| v.len()).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 200);
        assert_eq!(sizes, vec![100, 100]);
    }

    #[test]
    fn single_blob_with_full_neighborhood_has_one_root() {
        let set = gen_blobs(100, 1, 0.2, 0.0, 3);
        let field = field_over(&set.points, 20);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 100,
                epsilon: 0.0,
            },
        )
        .unwrap();
        assert_eq!(result.clusters.len(), 1);
        let root = *result.clusters.keys().next().unwrap();
        assert_eq!(result.parent[root], root);
        // the root is the densest point
        let f = field.normalized();
        assert!(f.iter().all(|&v| v <= f[root]));
    }

    #[test]
    fn far_outlier_is_dropped_at_positive_epsilon() {
        let blob = gen_blobs(100, 1, 0.1, 0.0, 11);
        let mut rows: Vec<Vec<f64>> = blob.points.rows().map(|r| r.to_vec()).collect();
        rows.push(vec![100.0, 100.0]);
        let points = Points::from_rows(&rows).unwrap();
        let field = field_over(&points, 10);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 10,
                epsilon: 0.5,
            },
        )
        .unwrap();
        assert_eq!(result.root[100], None);
        assert_eq!(result.noise_count(), 1);
        assert!((result.coverage() - 100.0 / 101.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_zero_never_drops() {
        let set = gen_blobs(150, 3, 0.4, 4.0, 23);
        let field = field_over(&set.points, 12);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 8,
                epsilon: 0.0,
            },
        )
        .unwrap();
        assert_eq!(result.noise_count(), 0);
        assert_eq!(result.coverage(), 1.0);
    }

    #[test]
    fn noise_set_is_monotone_in_epsilon() {
        let set = gen_blobs(200, 2, 0.5, 3.0, 31);
        let field = field_over(&set.points, 15);
        let mut previous: HashSet<usize> = HashSet::new();
        for eps in [0.0, 0.05, 0.2, 0.5, 0.9] {
            let result = grow(
                &field,
                &GrowthConfig {
                    k_s: 12,
                    epsilon: eps,
                },
            )
            .unwrap();
            let noise: HashSet<usize> = (0..field.len()).filter(|&i| result.root[i].is_none()).collect();
            assert!(
                previous.is_subset(&noise),
                "noise set shrank when epsilon grew to {eps}"
            );
            previous = noise;
        }
    }

    #[test]
    fn parent_links_form_a_forest_reaching_roots() {
        let set = gen_blobs(300, 3, 0.3, 5.0, 7);
        let field = field_over(&set.points, 15);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 10,
                epsilon: 0.1,
            },
        )
        .unwrap();
        for start in 0..field.len() {
            if result.root[start].is_none() {
                continue;
            }
            let mut cur = start;
            let mut steps = 0;
            while result.parent[cur] != cur {
                cur = result.parent[cur];
                steps += 1;
                assert!(steps <= field.len(), "cycle detected from {start}");
            }
            assert_eq!(Some(cur), result.root[start]);
        }
        // number of trees equals number of clusters
        let roots: HashSet<usize> = (0..field.len())
            .filter(|&i| result.parent[i] == i)
            .collect();
        assert_eq!(roots.len(), result.clusters.len());
    }

    #[test]
    fn root_has_maximal_density_in_cluster() {
        let set = gen_blobs(240, 4, 0.4, 4.0, 41);
        let field = field_over(&set.points, 12);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 9,
                epsilon: 0.0,
            },
        )
        .unwrap();
        let f = field.normalized();
        for (root, members) in &result.clusters {
            for &m in members {
                assert!(f[m] <= f[*root]);
            }
        }
    }

    #[test]
    fn duplicate_points_chain_into_one_cluster() {
        let points = Points::from_flat(5, 2, vec![1.0; 10]).unwrap();
        let index = Arc::new(KnnIndex::build(&points).unwrap());
        let config = DensityConfig {
            k_d: 3,
            bandwidths: vec![1.0, 1.0],
            bandwidth_floor: 1e-9,
        };
        let field = estimate_density(&index, &config).unwrap();
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 5,
                epsilon: 0.0,
            },
        )
        .unwrap();
        assert_eq!(result.clusters.len(), 1);
        assert_eq!(result.clusters[&0], vec![0, 1, 2, 3, 4]);
        assert_eq!(result.parent, vec![0, 0, 0, 0, 0]);
    }

    #[test]
    fn birth_order_is_descending_density() {
        let set = gen_blobs(100, 2, 0.3, 3.0, 2);
        let field = field_over(&set.points, 10);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 5,
                epsilon: 0.0,
            },
        )
        .unwrap();
        let f = field.normalized();
        for w in result.birth_order.windows(2) {
            assert!(
                f[w[0]] > f[w[1]] || (f[w[0]] == f[w[1]] && w[0] < w[1]),
                "birth order violated between {} and {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn boundary_pairs_are_mutual_and_cross_cluster() {
        // two blobs close enough to share mutual neighbors
        let set = gen_blobs(200, 2, 0.45, 1.0, 19);
        let field = field_over(&set.points, 15);
        let result = grow(
            &field,
            &GrowthConfig {
                k_s: 15,
                epsilon: 0.0,
            },
        )
        .unwrap();
        let index = field.index();
        let points = index.points();
        assert!(!result.boundary_pairs.is_empty(), "expected contact pairs");
        let mut keys = HashSet::new();
        for pair in &result.boundary_pairs {
            assert_ne!(pair.root_a, pair.root_b);
            assert_eq!(result.root[pair.a], Some(pair.root_a));
            assert_eq!(result.root[pair.b], Some(pair.root_b));
            assert!(keys.insert((pair.a.min(pair.b), pair.a.max(pair.b))));
            // re-query the index to confirm mutual membership
            let na = index.query_knn(points.row(pair.a), 15).unwrap();
            let nb = index.query_knn(points.row(pair.b), 15).unwrap();
            assert!(na.iter().any(|&(t, _)| t == pair.b));
            assert!(nb.iter().any(|&(t, _)| t == pair.a));
        }
    }

    #[test]
    fn k_s_out_of_range_is_rejected() {
        let set = gen_blobs(20, 1, 0.1, 0.0, 1);
        let field = field_over(&set.points, 5);
        assert!(grow(
            &field,
            &GrowthConfig {
                k_s: 0,
                epsilon: 0.0
            }
        )
        .is_err());
        assert!(grow(
            &field,
            &GrowthConfig {
                k_s: 21,
                epsilon: 0.0
            }
        )
        .is_err());
        assert!(grow(
            &field,
            &GrowthConfig {
                k_s: 5,
                epsilon: 1.5
            }
        )
        .is_err());
    }
}
