//! Similarity graphs, community detection, and partition quality metrics.

mod greedy;
mod ncut;

pub use greedy::greedy_modularity;
pub use ncut::{normalized_cut, suggest_k};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;
use crate::partition::{Partition, UNGROUPED};

/// Weighted undirected graph over outlet handles. Self-loops are excluded;
/// explicit zero-weight edges are allowed when constructed directly (they
/// matter for threshold statistics) but `build_graph` drops them.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize, f64)>, // i < j
}

impl SimilarityGraph {
    pub fn from_edges(nodes: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n = nodes.len();
        let mut seen = std::collections::HashSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::MatrixContract(format!("self-loop on node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::MatrixContract(format!("edge ({a},{b}) out of range")));
            }
            if w < 0.0 {
                return Err(Error::MatrixContract(format!("negative weight {w}")));
            }
            let (i, j) = (a.min(b), a.max(b));
            if !seen.insert((i, j)) {
                return Err(Error::MatrixContract(format!("duplicate edge ({i},{j})")));
            }
            normalized.push((i, j, w));
        }
        normalized.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(SimilarityGraph {
            nodes,
            edges: normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|(_, _, w)| w).sum()
    }

    /// Dense symmetric adjacency with zero diagonal.
    pub fn adjacency(&self) -> Vec<f64> {
        let n = self.n();
        let mut adj = vec![0.0; n * n];
        for &(i, j, w) in &self.edges {
            adj[i * n + j] = w;
            adj[j * n + i] = w;
        }
        adj
    }

    /// Weighted degree per node.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n()];
        for &(i, j, w) in &self.edges {
            d[i] += w;
            d[j] += w;
        }
        d
    }

    /// Subgraph induced by the given node indices (indices into `self`).
    /// Returned node order follows `keep`.
    pub fn induced(&self, keep: &[usize]) -> SimilarityGraph {
        let mut map = vec![usize::MAX; self.n()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let nodes = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|(i, j, _)| map[*i] != usize::MAX && map[*j] != usize::MAX)
            .map(|&(i, j, w)| (map[i], map[j], w))
            .collect();
        SimilarityGraph { nodes, edges }
    }

    /// CSV edge list: `source,target,weight`.
    pub fn write_edge_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "source,target,weight")?;
        for &(i, j, weight) in &self.edges {
            writeln!(w, "{},{},{:.8e}", self.nodes[i], self.nodes[j], weight)?;
        }
        Ok(())
    }
}

/// Complete graph from a similarity matrix; zero-weight edges dropped.
/// Asymmetric or negative input violates the contract.
pub fn build_graph(s: &SimilarityMatrix) -> Result<SimilarityGraph> {
    if !s.is_symmetric(1e-9) {
        return Err(Error::MatrixContract("matrix is not symmetric".into()));
    }
    if s.min_entry() < 0.0 {
        return Err(Error::MatrixContract("matrix has negative entries".into()));
    }
    let n = s.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = s.get(i, j);
            if w > 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    SimilarityGraph::from_edges(s.labels().to_vec(), edges)
}

/// Keep edges with weight strictly over mean + 2 * population std of all
/// edge weights. Export-only; partitioning always uses the full graph.
pub fn threshold_edges(g: &SimilarityGraph) -> SimilarityGraph {
    let n_edges = g.edges.len();
    if n_edges == 0 {
        return g.clone();
    }
    let mean = g.edges.iter().map(|(_, _, w)| w).sum::<f64>() / n_edges as f64;
    let var = g
        .edges
        .iter()
        .map(|(_, _, w)| (w - mean) * (w - mean))
        .sum::<f64>()
        / n_edges as f64;
    let threshold = mean + 2.0 * var.sqrt();
    SimilarityGraph {
        nodes: g.nodes.clone(),
        edges: g
            .edges
            .iter()
            .filter(|(_, _, w)| *w > threshold)
            .copied()
            .collect(),
    }
}

/// Map each node to its effective community: labeled communities keep their
/// id, while every un-grouped node counts as its own singleton.
fn effective_communities(g: &SimilarityGraph, p: &Partition) -> Vec<usize> {
    let mut next = p
        .community_ids()
        .iter()
        .max()
        .map(|&m| m as usize + 1)
        .unwrap_or(1);
    g.nodes
        .iter()
        .map(|name| match p.label_of(name) {
            Some(UNGROUPED) | None => {
                let id = next;
                next += 1;
                id
            }
            Some(id) => id as usize,
        })
        .collect()
}

/// Weighted modularity Q = sum_c (w_in(c)/W - (vol(c)/2W)^2). Un-grouped
/// nodes are scored as singleton communities. Edgeless graphs score 0.
pub fn modularity(g: &SimilarityGraph, p: &Partition) -> f64 {
    let total = g.total_weight();
    if total == 0.0 {
        return 0.0;
    }
    let communities = effective_communities(g, p);
    let mut w_in: BTreeMap<usize, f64> = BTreeMap::new();
    let mut vol: BTreeMap<usize, f64> = BTreeMap::new();
    for &(i, j, w) in &g.edges {
        if communities[i] == communities[j] {
            *w_in.entry(communities[i]).or_default() += w;
        }
        *vol.entry(communities[i]).or_default() += w;
        *vol.entry(communities[j]).or_default() += w;
    }
    let mut q = 0.0;
    for (&c, &v) in &vol {
        let inside = w_in.get(&c).copied().unwrap_or(0.0);
        q += inside / total - (v / (2.0 * total)) * (v / (2.0 * total));
    }
    q
}

/// How per-community conductance values are aggregated into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConductanceAggregate {
    #[default]
    VolumeWeighted,
    Unweighted,
    Max,
}

/// Aggregate conductance over communities with id != 0. Per community,
/// phi(c) = cut(c) / min(vol(c), vol(rest)). Communities with zero volume,
/// or spanning the whole graph's volume, are excluded with a warning.
pub fn conductance(g: &SimilarityGraph, p: &Partition, agg: ConductanceAggregate) -> f64 {
    let total_vol = 2.0 * g.total_weight();
    let mut per_community: Vec<(f64, f64)> = Vec::new(); // (phi, vol)
    let ids: Vec<u32> = p.community_ids().into_iter().filter(|&c| c != UNGROUPED).collect();
    for c in ids {
        let mut vol = 0.0;
        let mut cut = 0.0;
        for &(i, j, w) in &g.edges {
            let li = p.label_of(&g.nodes[i]);
            let lj = p.label_of(&g.nodes[j]);
            let in_i = li == Some(c);
            let in_j = lj == Some(c);
            if in_i {
                vol += w;
            }
            if in_j {
                vol += w;
            }
            if in_i != in_j {
                cut += w;
            }
        }
        if vol == 0.0 {
            log::warn!("community {c}: zero volume, excluded from conductance");
            continue;
        }
        let denom = vol.min(total_vol - vol);
        if denom == 0.0 {
            log::warn!("community {c}: complement has zero volume, excluded from conductance");
            continue;
        }
        per_community.push((cut / denom, vol));
    }
    if per_community.is_empty() {
        log::warn!("no communities eligible for conductance; reporting 0");
        return 0.0;
    }
    match agg {
        ConductanceAggregate::VolumeWeighted => {
            let vol_sum: f64 = per_community.iter().map(|(_, v)| v).sum();
            per_community.iter().map(|(phi, v)| phi * v).sum::<f64>() / vol_sum
        }
        ConductanceAggregate::Unweighted => {
            per_community.iter().map(|(phi, _)| phi).sum::<f64>() / per_community.len() as f64
        }
        ConductanceAggregate::Max => per_community
            .iter()
            .map(|(phi, _)| *phi)
            .fold(f64::NEG_INFINITY, f64::max),
    }
}
