//! Keyword-based topic similarity: per-day frequent term-set mining, merging
//! by word co-occurrence into daily topics, per-outlet daily topic vectors,
//! and cosine averaged over the window.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::NaiveDate;
use serde::Serialize;

use crate::corpus::{NormalizedCorpus, TokenDoc};
use crate::dsu::DisjointSet;
use crate::matrix::SimilarityMatrix;

/// A frequent term-set and the number of tweets supporting it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermSet {
    pub terms: BTreeSet<String>,
    pub support: u64,
}

/// A group of term-sets joined by co-occurrence, treated as one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Topic {
    pub termsets: Vec<TermSet>,
    pub terms: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DailyTopicModel {
    pub date: NaiveDate,
    pub topics: Vec<Topic>,
}

#[derive(Debug, Clone, serde::Deserialize, Serialize)]
pub struct SimTopicConfig {
    /// Minimum supporting-tweet count for a frequent term-set.
    pub min_support: u64,
    /// Term-set size bounds (single hot words over-merge topics, so the
    /// lower bound stays at 2).
    pub min_size: usize,
    pub max_size: usize,
    /// Tweets required to bridge two term-sets into one topic.
    pub min_bridge_tweets: u64,
    /// Average over days where both outlets have nonzero vectors instead of
    /// every day in the window.
    pub active_days_only: bool,
}

impl Default for SimTopicConfig {
    fn default() -> Self {
        SimTopicConfig {
            min_support: 5,
            min_size: 2,
            max_size: 5,
            min_bridge_tweets: 1,
            active_days_only: false,
        }
    }
}

/// All term-sets of size `min_size..=max_size` contained in at least
/// `min_support` tweets, pruned to closed sets (a set survives only if no
/// superset has identical support). Levelwise candidate generation.
pub fn mine_frequent_termsets(
    day_docs: &[&TokenDoc],
    min_support: u64,
    min_size: usize,
    max_size: usize,
) -> Vec<TermSet> {
    let min_size = min_size.max(2);
    // Intern tokens; transactions are sorted unique id lists.
    let mut ids: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in day_docs {
        for t in &doc.tokens {
            let next = ids.len() as u32;
            ids.entry(t.as_str()).or_insert(next);
        }
    }
    let names: Vec<&str> = {
        let mut v = vec![""; ids.len()];
        for (name, &id) in &ids {
            v[id as usize] = name;
        }
        v
    };
    let transactions: Vec<Vec<u32>> = day_docs
        .iter()
        .map(|doc| {
            let set: BTreeSet<u32> = doc.tokens.iter().map(|t| ids[t.as_str()]).collect();
            set.into_iter().collect()
        })
        .collect();

    // Frequent single tokens seed the candidate space.
    let mut item_counts: HashMap<u32, u64> = HashMap::new();
    for t in &transactions {
        for &id in t {
            *item_counts.entry(id).or_default() += 1;
        }
    }
    let frequent_items: HashSet<u32> = item_counts
        .iter()
        .filter(|(_, &c)| c >= min_support)
        .map(|(&id, _)| id)
        .collect();
    let reduced: Vec<Vec<u32>> = transactions
        .iter()
        .map(|t| t.iter().copied().filter(|id| frequent_items.contains(id)).collect())
        .collect();

    // Level 2 by direct pair counting.
    let mut by_size: Vec<Vec<(Vec<u32>, u64)>> = Vec::new();
    let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
    for t in &reduced {
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                *pair_counts.entry((t[i], t[j])).or_default() += 1;
            }
        }
    }
    let mut level: Vec<(Vec<u32>, u64)> = pair_counts
        .into_iter()
        .filter(|(_, c)| *c >= min_support)
        .map(|((a, b), c)| (vec![a, b], c))
        .collect();
    level.sort();
    by_size.push(level);

    // Levels 3..=max_size via apriori join + prune, counted by subset scan.
    for k in 3..=max_size {
        let prev = &by_size[by_size.len() - 1];
        if prev.is_empty() {
            break;
        }
        let prev_sets: HashSet<&[u32]> = prev.iter().map(|(s, _)| s.as_slice()).collect();
        let mut candidates: BTreeSet<Vec<u32>> = BTreeSet::new();
        for i in 0..prev.len() {
            for j in i + 1..prev.len() {
                let (a, b) = (&prev[i].0, &prev[j].0);
                if a[..k - 2] != b[..k - 2] {
                    continue;
                }
                let mut cand = a.clone();
                cand.push(b[k - 2]);
                cand.sort_unstable();
                // All (k-1)-subsets must be frequent.
                let ok = (0..cand.len()).all(|drop| {
                    let sub: Vec<u32> = cand
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| *idx != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    prev_sets.contains(sub.as_slice())
                });
                if ok {
                    candidates.insert(cand);
                }
            }
        }
        let mut level: Vec<(Vec<u32>, u64)> = Vec::new();
        for cand in candidates {
            let support = reduced
                .iter()
                .filter(|t| is_subset(&cand, t))
                .count() as u64;
            if support >= min_support {
                level.push((cand, support));
            }
        }
        by_size.push(level);
    }

    // Closed-set pruning: drop sets whose one-larger superset matches their
    // support (equal-support chains collapse transitively).
    let mut pruned: Vec<HashSet<Vec<u32>>> = vec![HashSet::new(); by_size.len()];
    for s in 1..by_size.len() {
        let lower: HashMap<&[u32], u64> = by_size[s - 1]
            .iter()
            .map(|(set, c)| (set.as_slice(), *c))
            .collect();
        for (superset, support) in &by_size[s] {
            for drop in 0..superset.len() {
                let sub: Vec<u32> = superset
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| *idx != drop)
                    .map(|(_, &v)| v)
                    .collect();
                if lower.get(sub.as_slice()) == Some(support) {
                    pruned[s - 1].insert(sub);
                }
            }
        }
    }

    let mut out = Vec::new();
    for (lvl, sets) in by_size.iter().enumerate() {
        let size = lvl + 2;
        if size < min_size {
            continue;
        }
        for (set, support) in sets {
            if pruned[lvl].contains(set) {
                continue;
            }
            out.push(TermSet {
                terms: set.iter().map(|&id| names[id as usize].to_string()).collect(),
                support: *support,
            });
        }
    }
    out.sort_by(|a, b| a.terms.cmp(&b.terms));
    out
}

fn is_subset(needle: &[u32], haystack: &[u32]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|x| it.by_ref().any(|y| y == x))
}

/// Join term-sets into topics: two sets merge (transitively) when at least
/// `min_bridge_tweets` tweets of the day each contain a term from both.
pub fn merge_by_cooccurrence(
    date: NaiveDate,
    termsets: Vec<TermSet>,
    day_docs: &[&TokenDoc],
    min_bridge_tweets: u64,
) -> DailyTopicModel {
    let n = termsets.len();
    let mut dsu = DisjointSet::new(n);
    if min_bridge_tweets <= 1 {
        for doc in day_docs {
            let tokens: BTreeSet<&str> = doc.tokens.iter().map(|s| s.as_str()).collect();
            let touched: Vec<usize> = (0..n)
                .filter(|&i| termsets[i].terms.iter().any(|t| tokens.contains(t.as_str())))
                .collect();
            for w in touched.windows(2) {
                dsu.union(w[0], w[1]);
            }
        }
    } else {
        let mut bridge_counts: HashMap<(usize, usize), u64> = HashMap::new();
        for doc in day_docs {
            let tokens: BTreeSet<&str> = doc.tokens.iter().map(|s| s.as_str()).collect();
            let touched: Vec<usize> = (0..n)
                .filter(|&i| termsets[i].terms.iter().any(|t| tokens.contains(t.as_str())))
                .collect();
            for i in 0..touched.len() {
                for j in i + 1..touched.len() {
                    *bridge_counts.entry((touched[i], touched[j])).or_default() += 1;
                }
            }
        }
        for ((a, b), count) in bridge_counts {
            if count >= min_bridge_tweets {
                dsu.union(a, b);
            }
        }
    }

    let mut topics: Vec<Topic> = dsu
        .components()
        .into_iter()
        .map(|members| {
            let mut sets: Vec<TermSet> =
                members.into_iter().map(|i| termsets[i].clone()).collect();
            sets.sort_by(|a, b| a.terms.cmp(&b.terms));
            let terms = sets.iter().flat_map(|s| s.terms.iter().cloned()).collect();
            Topic {
                termsets: sets,
                terms,
            }
        })
        .collect();
    topics.sort_by(|a, b| a.termsets[0].terms.cmp(&b.termsets[0].terms));
    DailyTopicModel { date, topics }
}

/// Daily topic vector for one outlet: component t counts the outlet's tweets
/// that day containing every term of at least one term-set of topic t.
pub fn daily_vector(
    outlet: &str,
    model: &DailyTopicModel,
    day_docs: &[&TokenDoc],
) -> BTreeMap<usize, f64> {
    let mut components: BTreeMap<usize, f64> = BTreeMap::new();
    for doc in day_docs.iter().filter(|d| d.outlet == outlet) {
        let tokens: BTreeSet<&str> = doc.tokens.iter().map(|s| s.as_str()).collect();
        for (idx, topic) in model.topics.iter().enumerate() {
            let hits = topic
                .termsets
                .iter()
                .any(|ts| ts.terms.iter().all(|t| tokens.contains(t.as_str())));
            if hits {
                *components.entry(idx).or_default() += 1.0;
            }
        }
    }
    components
}

fn sparse_cosine_usize(u: &BTreeMap<usize, f64>, v: &BTreeMap<usize, f64>) -> f64 {
    let dot: f64 = u
        .iter()
        .filter_map(|(k, a)| v.get(k).map(|b| a * b))
        .sum();
    let nu: f64 = u.values().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.values().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

/// Build the topic model for one calendar day of the corpus.
pub fn daily_model(
    date: NaiveDate,
    day_docs: &[&TokenDoc],
    config: &SimTopicConfig,
) -> DailyTopicModel {
    let termsets =
        mine_frequent_termsets(day_docs, config.min_support, config.min_size, config.max_size);
    merge_by_cooccurrence(date, termsets, day_docs, config.min_bridge_tweets)
}

/// Average daily cosine of per-outlet topic vectors over the window. By
/// default every day in the window enters the denominator; days where either
/// outlet's vector is zero contribute 0.
pub fn keyword_topic_similarity(
    corpus: &NormalizedCorpus,
    config: &SimTopicConfig,
) -> SimilarityMatrix {
    let labels: Vec<String> = corpus.outlets.iter().cloned().collect();
    let n = labels.len();
    let buckets = corpus.partition_by_day();

    let mut sums = vec![0.0f64; n * n];
    let mut active = vec![0u64; n * n];
    for (date, docs) in &buckets {
        let model = daily_model(*date, docs, config);
        if model.topics.is_empty() {
            continue;
        }
        let vectors: Vec<BTreeMap<usize, f64>> = labels
            .iter()
            .map(|o| daily_vector(o, &model, docs))
            .collect();
        for i in 0..n {
            if vectors[i].is_empty() {
                continue;
            }
            sums[i * n + i] += 1.0;
            active[i * n + i] += 1;
            for j in i + 1..n {
                if vectors[j].is_empty() {
                    continue;
                }
                let c = sparse_cosine_usize(&vectors[i], &vectors[j]);
                sums[i * n + j] += c;
                sums[j * n + i] += c;
                active[i * n + j] += 1;
                active[j * n + i] += 1;
            }
        }
    }

    let window_days = corpus.window_days() as f64;
    let mut m = SimilarityMatrix::zeros(labels);
    for i in 0..n {
        for j in 0..n {
            let v = if config.active_days_only {
                let a = active[i * n + j];
                if a == 0 {
                    0.0
                } else {
                    sums[i * n + j] / a as f64
                }
            } else {
                sums[i * n + j] / window_days
            };
            m.set(i, j, v);
        }
    }
    m
}
