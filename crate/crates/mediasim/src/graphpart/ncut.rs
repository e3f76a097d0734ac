//! Normalized-cut clustering: recursive two-way spectral splits, each chosen
//! to minimize the normalized-cut objective, until k parts exist.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dsu::DisjointSet;
use crate::error::{Error, Result};
use crate::partition::Partition;

use super::SimilarityGraph;

#[derive(Debug, Clone)]
struct Split {
    ncut: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn ncut_term(cut: f64, vol: f64) -> f64 {
    if vol == 0.0 {
        if cut == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        cut / vol
    }
}

fn connected_components(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<usize>> {
    let mut dsu = DisjointSet::new(n);
    for &(i, j, w) in edges {
        if w > 0.0 {
            dsu.union(i, j);
        }
    }
    dsu.components()
}

/// Best two-way split of `part` (indices into `g`), by normalized cut over
/// the induced subgraph. Disconnected parts split along a component boundary
/// (ncut 0). Connected parts use a threshold sweep along the Fiedler vector
/// of the normalized Laplacian, deterministic with the eigenvector sign
/// fixed by its first nonzero coordinate.
fn best_split(g: &SimilarityGraph, part: &[usize]) -> Option<Split> {
    let m = part.len();
    if m < 2 {
        return None;
    }
    let sub = g.induced(part);
    let comps = connected_components(m, sub.edges());
    if comps.len() > 1 {
        let left: Vec<usize> = comps[0].iter().map(|&i| part[i]).collect();
        let right: Vec<usize> = comps[1..]
            .iter()
            .flatten()
            .map(|&i| part[i])
            .collect();
        return Some(Split {
            ncut: 0.0,
            left,
            right,
        });
    }

    let adj = sub.adjacency();
    let deg = sub.degrees();
    // Connected with m >= 2, so every degree is positive.
    let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    let lap = DMatrix::from_fn(m, m, |i, j| {
        let w = adj[i * m + j];
        let off = -w * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 + off
        } else {
            off
        }
    });
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("laplacian eigenvalues are finite")
    });
    let fiedler_col = order[1];
    let mut x: Vec<f64> = (0..m)
        .map(|i| eig.eigenvectors[(i, fiedler_col)] * inv_sqrt[i])
        .collect();
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            for v in &mut x {
                *v = -*v;
            }
        }
    }

    let mut sweep: Vec<usize> = (0..m).collect();
    sweep.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap().then(a.cmp(&b)));

    let total_vol: f64 = deg.iter().sum();
    let mut vol_a = 0.0;
    let mut cut = 0.0;
    // w(v, A) for the current prefix A.
    let mut weight_to_a = vec![0.0; m];
    let mut best: Option<(f64, usize)> = None;
    for (prefix, &u) in sweep.iter().enumerate().take(m - 1) {
        cut += deg[u] - 2.0 * weight_to_a[u];
        vol_a += deg[u];
        for v in 0..m {
            weight_to_a[v] += adj[u * m + v];
        }
        let value = ncut_term(cut, vol_a) + ncut_term(cut, total_vol - vol_a);
        if best.map_or(true, |(b, _)| value < b) {
            best = Some((value, prefix + 1));
        }
    }
    let (ncut, len) = best.expect("m >= 2 yields at least one split");
    let left: Vec<usize> = sweep[..len].iter().map(|&i| part[i]).collect();
    let right: Vec<usize> = sweep[len..].iter().map(|&i| part[i]).collect();
    Some(Split { ncut, left, right })
}

/// Partition into k parts by recursive minimum-ncut bisection. Disconnected
/// graphs start from their components. Parts are numbered by decreasing
/// size; the largest gets the reserved id 0, mirroring how the catch-all
/// cluster is reported.
pub fn normalized_cut(g: &SimilarityGraph, k: usize) -> Result<Partition> {
    let n = g.n();
    if k < 2 {
        return Err(Error::InvalidArgument("normalized cut needs k >= 2".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds node count {n}"
        )));
    }

    let mut parts: Vec<Vec<usize>> = connected_components(n, g.edges());
    if parts.len() > k {
        log::warn!(
            "graph has {} components, more than k = {k}; returning components",
            parts.len()
        );
    }
    let mut splits: Vec<Option<Split>> = parts.iter().map(|p| best_split(g, p)).collect();
    while parts.len() < k {
        // Apply the globally cheapest split.
        let chosen = splits
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|s| (i, s.ncut)))
            .min_by(|(ia, a), (ib, b)| a.partial_cmp(b).unwrap().then(ia.cmp(ib)));
        let Some((idx, _)) = chosen else {
            break; // every part is a singleton
        };
        let split = splits[idx].take().expect("chosen split exists");
        parts[idx] = split.left;
        parts.push(split.right);
        splits[idx] = best_split(g, &parts[idx]);
        splits.push(best_split(g, parts.last().expect("just pushed")));
    }

    parts.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| g.nodes()[a[0]].cmp(&g.nodes()[b[0]]))
    });
    let mut labels = BTreeMap::new();
    for (id, part) in parts.iter().enumerate() {
        for &node in part {
            labels.insert(g.nodes()[node].clone(), id as u32);
        }
    }
    Partition::new(labels)
}

/// Default k via the largest eigengap of the normalized Laplacian spectrum,
/// capped at `cap`, clamped to at least 2.
pub fn suggest_k(g: &SimilarityGraph, cap: usize) -> usize {
    let n = g.n();
    if n <= 2 {
        return 2;
    }
    let adj = g.adjacency();
    let deg = g.degrees();
    let inv_sqrt: Vec<f64> = deg
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let lap = DMatrix::from_fn(n, n, |i, j| {
        let off = -adj[i * n + j] * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            if deg[i] > 0.0 {
                1.0 + off
            } else {
                0.0 // isolated node: its own zero-eigenvalue component
            }
        } else {
            off
        }
    });
    let eig = SymmetricEigen::new(lap);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let limit = cap.min(n - 1);
    let mut best_k = 2;
    let mut best_gap = f64::NEG_INFINITY;
    for i in 1..=limit {
        let gap = values[i] - values[i - 1];
        if gap > best_gap {
            best_gap = gap;
            best_k = i;
        }
    }
    best_k.clamp(2, n)
}
