//! Connectivity graph over local clusters, edge pruning, and final labels.
//!
//! Each local cluster becomes a vertex carrying its peak density. Boundary
//! pairs contribute squared midpoint densities to the edge weight between
//! their clusters, modulated by a squared peak-density ratio. Pruning cuts
//! an edge when its strength relative to either endpoint's strongest edge
//! falls below `alpha`; final labels are the connected components of the
//! surviving edges.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::density::DensityField;
use crate::error::{Error, Result};
use crate::growing::GrowthResult;

/// Sentinel label for noise points in the final output.
pub const NOISE_LABEL: i64 = -1;

/// A cluster vertex: peak (root) density and member count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexData {
    pub peak_density: f64,
    pub member_count: usize,
}

/// One undirected edge; `kept` is set by pruning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeData {
    /// Accumulated squared midpoint density over boundary pairs.
    pub w: f64,
    /// Squared min ratio of the endpoint peak densities.
    pub gamma: f64,
    /// Final connectivity `gamma * w`.
    pub e: f64,
    pub kept: bool,
}

/// The graph of density topology. Edges are stored once under the ordered
/// vertex pair `(min, max)`, which makes symmetry structural.
#[derive(Debug, Clone, PartialEq)]
pub struct TopoGraph {
    vertices: BTreeMap<usize, VertexData>,
    edges: BTreeMap<(usize, usize), EdgeData>,
    strongest: BTreeMap<usize, f64>,
}

/// Pruning threshold; `alpha` in `[0, 1]` is the cut point for the
/// relative edge strength at either endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneConfig {
    pub alpha: f64,
}

/// Converts the balance weight `beta` of the pruning objective into the
/// equivalent threshold `alpha = 1 / (sqrt(beta) + 1)`.
pub fn alpha_from_beta(beta: f64) -> f64 {
    1.0 / (beta.sqrt() + 1.0)
}

/// Final per-point labels with a noise sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    /// Label per point; `NOISE_LABEL` for dropped points.
    pub labels: Vec<i64>,
    /// Number of distinct non-noise labels.
    pub num_labels: usize,
    /// Fraction of points carrying a non-noise label.
    pub coverage: f64,
}

fn phi(x: f64) -> f64 {
    x * x
}

/// Peak-similarity modifier: squared min ratio of the two peak densities;
/// equal peaks (including the all-zero corner) give 1.
fn gamma_of_peaks(pi: f64, pj: f64) -> f64 {
    if pi == pj {
        return 1.0;
    }
    let (lo, hi) = if pi < pj { (pi, pj) } else { (pj, pi) };
    phi(lo / hi)
}

impl TopoGraph {
    /// Assembles a graph from explicit vertices `(id, peak_density,
    /// member_count)` and edges `(i, j, e)`. Mostly useful for tests and
    /// tooling; pipeline graphs come from [`build_topograph`].
    pub fn from_parts(
        vertices: impl IntoIterator<Item = (usize, f64, usize)>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let vertices: BTreeMap<usize, VertexData> = vertices
            .into_iter()
            .map(|(id, peak_density, member_count)| {
                (
                    id,
                    VertexData {
                        peak_density,
                        member_count,
                    },
                )
            })
            .collect();
        let mut edge_map = BTreeMap::new();
        for (i, j, e) in edges {
            if i == j {
                return Err(Error::Inconsistent(format!("self-loop on vertex {i}")));
            }
            if !vertices.contains_key(&i) || !vertices.contains_key(&j) {
                return Err(Error::Inconsistent(format!(
                    "edge ({i}, {j}) references a missing vertex"
                )));
            }
            if e < 0.0 {
                return Err(Error::InvalidParam(format!("negative edge weight {e}")));
            }
            edge_map.insert(
                (i.min(j), i.max(j)),
                EdgeData {
                    w: e,
                    gamma: 1.0,
                    e,
                    kept: true,
                },
            );
        }
        let strongest = compute_strongest(&vertices, &edge_map);
        Ok(Self {
            vertices,
            edges: edge_map,
            strongest,
        })
    }

    pub fn vertices(&self) -> &BTreeMap<usize, VertexData> {
        &self.vertices
    }

    /// Edge between `i` and `j` in either orientation.
    pub fn edge(&self, i: usize, j: usize) -> Option<&EdgeData> {
        self.edges.get(&(i.min(j), i.max(j)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &EdgeData)> {
        self.edges.iter().map(|(&(i, j), e)| (i, j, e))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn kept_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .filter(|(_, e)| e.kept)
            .map(|(&(i, j), _)| (i, j))
    }

    /// Strongest incident connectivity of a vertex (0 when isolated).
    pub fn strongest(&self, i: usize) -> f64 {
        self.strongest.get(&i).copied().unwrap_or(0.0)
    }

    /// Structured dump of vertices and edges (kept flags included), as
    /// deterministic pretty-printed JSON.
    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct VertexDump {
            root: usize,
            peak_density: f64,
            member_count: usize,
        }
        #[derive(Serialize)]
        struct EdgeDump {
            i: usize,
            j: usize,
            w: f64,
            gamma: f64,
            e: f64,
            kept: bool,
        }
        #[derive(Serialize)]
        struct GraphDump {
            vertices: Vec<VertexDump>,
            edges: Vec<EdgeDump>,
        }
        let dump = GraphDump {
            vertices: self
                .vertices
                .iter()
                .map(|(&root, v)| VertexDump {
                    root,
                    peak_density: v.peak_density,
                    member_count: v.member_count,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|(&(i, j), e)| EdgeDump {
                    i,
                    j,
                    w: e.w,
                    gamma: e.gamma,
                    e: e.e,
                    kept: e.kept,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("graph dump serializes")
    }
}

fn compute_strongest(
    vertices: &BTreeMap<usize, VertexData>,
    edges: &BTreeMap<(usize, usize), EdgeData>,
) -> BTreeMap<usize, f64> {
    let mut strongest: BTreeMap<usize, f64> = vertices.keys().map(|&v| (v, 0.0)).collect();
    for (&(i, j), e) in edges {
        for v in [i, j] {
            let s = strongest.get_mut(&v).expect("edge endpoint exists");
            if e.e > *s {
                *s = e.e;
            }
        }
    }
    strongest
}

/// Builds the graph from a growth result: one vertex per local cluster,
/// one edge per pair of clusters joined by boundary pairs.
pub fn build_topograph(result: &GrowthResult, field: &DensityField) -> Result<TopoGraph> {
    if result.clusters.is_empty() {
        return Err(Error::Inconsistent("growth produced no clusters".into()));
    }
    let f = field.normalized();
    let points = field.index().points();

    let vertices: BTreeMap<usize, VertexData> = result
        .clusters
        .iter()
        .map(|(&root, members)| {
            (
                root,
                VertexData {
                    peak_density: f[root],
                    member_count: members.len(),
                },
            )
        })
        .collect();

    // Accumulate w over deduplicated boundary pairs, in recorded order.
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut midpoint = vec![0.0; points.dim()];
    for pair in &result.boundary_pairs {
        for rv in [pair.root_a, pair.root_b] {
            if !vertices.contains_key(&rv) {
                return Err(Error::Inconsistent(format!(
                    "boundary pair references unknown cluster {rv}"
                )));
            }
        }
        let pa = points.row(pair.a);
        let pb = points.row(pair.b);
        for l in 0..midpoint.len() {
            midpoint[l] = (pa[l] + pb[l]) / 2.0;
        }
        let fmid = field.density_at(&midpoint)?;
        let key = (
            pair.root_a.min(pair.root_b),
            pair.root_a.max(pair.root_b),
        );
        *weights.entry(key).or_insert(0.0) += phi(fmid);
    }

    let mut edges = BTreeMap::new();
    for ((i, j), w) in weights {
        let gamma = gamma_of_peaks(vertices[&i].peak_density, vertices[&j].peak_density);
        edges.insert(
            (i, j),
            EdgeData {
                w,
                gamma,
                e: gamma * w,
                kept: true,
            },
        );
    }
    let strongest = compute_strongest(&vertices, &edges);
    Ok(TopoGraph {
        vertices,
        edges,
        strongest,
    })
}

/// Applies the relative-strength cut: an edge survives only if its
/// strength is at least `alpha` times the strongest edge at both
/// endpoints. The strongest-edge table of the input graph is preserved.
pub fn prune_edges(graph: &TopoGraph, config: &PruneConfig) -> Result<TopoGraph> {
    if !(0.0..=1.0).contains(&config.alpha) {
        return Err(Error::InvalidParam(format!(
            "alpha = {} outside [0, 1]",
            config.alpha
        )));
    }
    let mut pruned = graph.clone();
    for (&(i, j), edge) in &mut pruned.edges {
        let ri = relative(edge.e, graph.strongest(i));
        let rj = relative(edge.e, graph.strongest(j));
        edge.kept = !(ri < config.alpha || rj < config.alpha);
    }
    Ok(pruned)
}

fn relative(e: f64, strongest: f64) -> f64 {
    if strongest > 0.0 {
        e / strongest
    } else {
        1.0
    }
}

/// Labels every point by the connected component of its cluster in the
/// pruned graph. Components are numbered from 0 in order of their smallest
/// root id; noise keeps [`NOISE_LABEL`].
pub fn assign_labels(result: &GrowthResult, pruned: &TopoGraph) -> Labeling {
    let n = result.root.len();
    let ids: Vec<usize> = pruned.vertices.keys().copied().collect();
    let slot: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(k, &v)| (v, k)).collect();

    let mut uf = UnionFind::new(ids.len());
    for (i, j) in pruned.kept_edges() {
        uf.union(slot[&i], slot[&j]);
    }

    // first appearance in ascending root-id order fixes the numbering
    let mut component_label: BTreeMap<usize, i64> = BTreeMap::new();
    let mut next = 0i64;
    let mut vertex_label: BTreeMap<usize, i64> = BTreeMap::new();
    for &v in &ids {
        let rep = uf.find(slot[&v]);
        let label = *component_label.entry(rep).or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        vertex_label.insert(v, label);
    }

    let mut labels = vec![NOISE_LABEL; n];
    let mut covered = 0usize;
    for i in 0..n {
        if let Some(r) = result.root[i] {
            labels[i] = vertex_label[&r];
            covered += 1;
        }
    }
    Labeling {
        labels,
        num_labels: next as usize,
        coverage: if n == 0 {
            0.0
        } else {
            covered as f64 / n as f64
        },
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}
