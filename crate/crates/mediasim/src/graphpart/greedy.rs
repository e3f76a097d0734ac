//! Greedy weighted-modularity agglomeration: start from singletons, merge
//! the pair with maximal delta-Q until no merge improves Q.

use std::collections::BTreeMap;

use crate::partition::Partition;

use super::SimilarityGraph;

/// Hierarchical agglomerative community discovery. Size-1 communities at the
/// optimum are relabeled into the reserved un-grouped id 0; real communities
/// get ids 1.. in order of decreasing size (ties by smallest member handle).
/// Equal delta-Q merges resolve to the lowest community-id pair.
pub fn greedy_modularity(g: &SimilarityGraph) -> Partition {
    let n = g.n();
    if n == 0 {
        return Partition::new(BTreeMap::new()).expect("empty partition is valid");
    }
    let total = g.total_weight();
    if total == 0.0 {
        // No edges: everyone stays un-grouped.
        let labels = g.nodes().iter().map(|name| (name.clone(), 0u32)).collect();
        return Partition::new(labels).expect("all-ungrouped is valid");
    }

    // Community state, keyed by the smallest member node index.
    let mut alive: Vec<bool> = vec![true; n];
    let mut vol: Vec<f64> = g.degrees();
    let mut w_in: Vec<f64> = vec![0.0; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    // Inter-community weights, (a < b) -> weight.
    let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(i, j, w) in g.edges() {
        if w > 0.0 {
            *between.entry((i, j)).or_default() += w;
        }
    }

    loop {
        // Best merge: maximal delta-Q, ties to the lexicographically
        // smallest pair. Only connected pairs can have positive delta-Q.
        let mut best: Option<((usize, usize), f64)> = None;
        for (&(a, b), &w_ab) in &between {
            let dq = w_ab / total - vol[a] * vol[b] / (2.0 * total * total);
            match best {
                Some((_, best_dq)) if dq <= best_dq => {}
                _ => best = Some(((a, b), dq)),
            }
        }
        let Some(((a, b), dq)) = best else { break };
        if dq <= 0.0 {
            break;
        }

        // Merge b into a (a < b by map ordering).
        let w_ab = between.remove(&(a, b)).unwrap_or(0.0);
        w_in[a] += w_in[b] + w_ab;
        vol[a] += vol[b];
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        alive[b] = false;

        // Reroute b's remaining edges to a.
        let b_edges: Vec<(usize, f64)> = between
            .iter()
            .filter(|(&(x, y), _)| x == b || y == b)
            .map(|(&(x, y), &w)| (if x == b { y } else { x }, w))
            .collect();
        for (other, w) in b_edges {
            between.remove(&(other.min(b), other.max(b)));
            if other != a {
                *between.entry((other.min(a), other.max(a))).or_default() += w;
            }
        }
    }

    // Assemble the partition: singletons become un-grouped.
    let mut groups: Vec<Vec<&str>> = (0..n)
        .filter(|&c| alive[c] && members[c].len() > 1)
        .map(|c| {
            let mut names: Vec<&str> =
                members[c].iter().map(|&i| g.nodes()[i].as_str()).collect();
            names.sort_unstable();
            names
        })
        .collect();
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(b[0])));
    let ungrouped: Vec<&str> = (0..n)
        .filter(|&c| alive[c] && members[c].len() == 1)
        .map(|c| g.nodes()[members[c][0]].as_str())
        .collect();
    Partition::from_groups(groups, ungrouped).expect("contiguous ids by construction")
}
