//! Minhash-based topic similarity: word 3-shingles, 4-component min-wise
//! signatures, near-duplicate tweet clustering, and conditional-probability
//! co-occurrence between outlets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::NormalizedCorpus;
use crate::matrix::SimilarityMatrix;

/// Word-shingle window size.
pub const SHINGLE_K: usize = 3;

/// Signature width: 4 independently seeded min-wise hashes.
pub const SIGNATURE_LEN: usize = 4;

pub const DEFAULT_SEEDS: [u64; SIGNATURE_LEN] = [
    0x243f_6a88_85a3_08d3,
    0x1319_8a2e_0370_7344,
    0xa409_3822_299f_31d0,
    0x082e_fa98_ec4e_6c89,
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimHashConfig {
    pub seeds: [u64; SIGNATURE_LEN],
    /// Signature components that must agree to link two tweets (2..=4).
    pub link_threshold: usize,
    /// Count single-outlet clusters in the conditional denominators.
    pub include_single_outlet: bool,
}

impl Default for SimHashConfig {
    fn default() -> Self {
        SimHashConfig {
            seeds: DEFAULT_SEEDS,
            link_threshold: 3,
            include_single_outlet: false,
        }
    }
}

/// A clustered story: tweets whose signatures agree on at least the link
/// threshold, plus the distinct outlets that posted them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopicCluster {
    pub id: usize,
    pub tweet_ids: Vec<String>,
    pub outlets: BTreeSet<String>,
}

/// All contiguous k-token windows, joined on a space, duplicates collapsed.
/// Fewer than k tokens yields the empty set.
pub fn shingle(tokens: &[String], k: usize) -> BTreeSet<String> {
    if tokens.len() < k {
        return BTreeSet::new();
    }
    tokens.windows(k).map(|w| w.join(" ")).collect()
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded 64-bit hash of a byte string: seed-mixed FNV-1a accumulation with
/// an avalanche finalizer, so each seed induces an independent ordering.
pub fn seeded_hash(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ mix64(seed);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

/// Min-wise signature: component i is the minimum of hash_i over the shingle
/// set. Empty sets have no signature and are excluded from topics.
pub fn minhash(shingles: &BTreeSet<String>, seeds: &[u64; SIGNATURE_LEN]) -> Option<[u64; SIGNATURE_LEN]> {
    if shingles.is_empty() {
        return None;
    }
    let mut components = [u64::MAX; SIGNATURE_LEN];
    for s in shingles {
        for (i, &seed) in seeds.iter().enumerate() {
            let h = seeded_hash(seed, s.as_bytes());
            if h < components[i] {
                components[i] = h;
            }
        }
    }
    Some(components)
}

/// Cluster tweets whose signatures agree on >= `link_threshold` of the 4
/// components. Linking goes through banding over component subsets (two
/// signatures agree on >= t components iff they collide in some t-subset
/// band), so runtime stays near-linear in tweet count. Clusters are the
/// connected components of the link graph, ordered by smallest tweet id.
pub fn cluster_topics(corpus: &NormalizedCorpus, config: &SimHashConfig) -> Vec<TopicCluster> {
    assert!(
        (2..=SIGNATURE_LEN).contains(&config.link_threshold),
        "link threshold must be in 2..=4"
    );
    let mut signed: Vec<(&str, &str, [u64; SIGNATURE_LEN])> = Vec::new();
    for doc in &corpus.docs {
        let shingles = shingle(&doc.tokens, SHINGLE_K);
        if let Some(sig) = minhash(&shingles, &config.seeds) {
            signed.push((doc.id.as_str(), doc.outlet.as_str(), sig));
        }
    }
    signed.sort_by_key(|(id, _, _)| *id);

    let bands = component_subsets(SIGNATURE_LEN, config.link_threshold);
    let mut dsu = crate::dsu::DisjointSet::new(signed.len());
    let mut buckets: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    for (idx, (_, _, sig)) in signed.iter().enumerate() {
        for (band_id, band) in bands.iter().enumerate() {
            let key: Vec<u64> = band.iter().map(|&c| sig[c]).collect();
            match buckets.entry((band_id, key)) {
                std::collections::hash_map::Entry::Occupied(e) => dsu.union(*e.get(), idx),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(idx);
                }
            }
        }
    }

    dsu.components()
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let tweet_ids: Vec<String> =
                members.iter().map(|&i| signed[i].0.to_string()).collect();
            let outlets: BTreeSet<String> =
                members.iter().map(|&i| signed[i].1.to_string()).collect();
            TopicCluster {
                id,
                tweet_ids,
                outlets,
            }
        })
        .collect()
}

fn component_subsets(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == t {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

/// Conditional-probability co-occurrence: Pr(A|B) is the fraction of
/// counted clusters containing B that also contain A, and
/// S[A][B] = max(Pr(A|B), Pr(B|A)). By default only clusters spanning at
/// least two distinct outlets are counted.
pub fn cooccurrence_similarity(
    clusters: &[TopicCluster],
    outlets: &BTreeSet<String>,
    config: &SimHashConfig,
) -> SimilarityMatrix {
    let labels: Vec<String> = outlets.iter().cloned().collect();
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, o)| (o.as_str(), i))
        .collect();
    let n = labels.len();
    let mut cluster_count = vec![0u64; n];
    let mut pair_count: HashMap<(usize, usize), u64> = HashMap::new();
    for cluster in clusters {
        if !config.include_single_outlet && cluster.outlets.len() < 2 {
            continue;
        }
        let ids: Vec<usize> = cluster
            .outlets
            .iter()
            .filter_map(|o| index.get(o.as_str()).copied())
            .collect();
        for &i in &ids {
            cluster_count[i] += 1;
        }
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                *pair_count.entry(key).or_default() += 1;
            }
        }
    }

    let mut m = SimilarityMatrix::zeros(labels);
    for i in 0..n {
        if cluster_count[i] == 0 {
            log::warn!(
                "outlet {} absent from all counted clusters; similarity row is zero",
                m.labels()[i]
            );
        } else {
            m.set(i, i, 1.0);
        }
    }
    for (&(a, b), &both) in &pair_count {
        let pr_a_given_b = both as f64 / cluster_count[b] as f64;
        let pr_b_given_a = both as f64 / cluster_count[a] as f64;
        m.set_sym(a, b, pr_a_given_b.max(pr_b_given_a));
    }
    m
}

/// The full minhash pipeline: shingle, sign, cluster, co-occurrence.
pub fn minhash_similarity(
    corpus: &NormalizedCorpus,
    config: &SimHashConfig,
) -> (SimilarityMatrix, Vec<TopicCluster>) {
    let clusters = cluster_topics(corpus, config);
    let matrix = cooccurrence_similarity(&clusters, &corpus.outlets, config);
    (matrix, clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Normalizer, Tweet};
    use chrono::NaiveDate;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn shingle_window_count() {
        let s = shingle(&toks("a b c d e"), 3);
        assert_eq!(s.len(), 3);
        assert!(s.contains("a b c"));
        assert!(s.contains("b c d"));
        assert!(s.contains("c d e"));
    }

    #[test]
    fn short_texts_have_no_shingles() {
        assert!(shingle(&toks("a b"), 3).is_empty());
        assert!(shingle(&[], 3).is_empty());
    }

    #[test]
    fn duplicate_shingles_collapse() {
        let s = shingle(&toks("a b a b a"), 3);
        assert_eq!(s.len(), 2);
        assert!(s.contains("a b a"));
        assert!(s.contains("b a b"));
    }

    #[test]
    fn signatures_are_deterministic() {
        let s1 = shingle(&toks("uno dos tres cuatro"), 3);
        let s2 = shingle(&toks("uno dos tres cuatro"), 3);
        assert_eq!(minhash(&s1, &DEFAULT_SEEDS), minhash(&s2, &DEFAULT_SEEDS));
        assert_eq!(minhash(&BTreeSet::new(), &DEFAULT_SEEDS), None);
    }

    #[test]
    fn distinct_singletons_rarely_collide() {
        let a = shingle(&toks("x y z"), 3);
        let b = shingle(&toks("p q r"), 3);
        let sa = minhash(&a, &DEFAULT_SEEDS).unwrap();
        let sb = minhash(&b, &DEFAULT_SEEDS).unwrap();
        assert_ne!(sa, sb);
    }

    /// Per-component match probability equals the Jaccard similarity of the
    /// shingle sets (min-wise property), checked by Monte Carlo against the
    /// exact Jaccard. The acceptance suite runs the full-scale version.
    #[test]
    fn match_rate_tracks_jaccard() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs = 200;
        let draws = 100;
        let mut bias_sum = 0.0;
        for _ in 0..pairs {
            let shared = rng.gen_range(1..=20usize);
            let only_a = rng.gen_range(0..=20usize);
            let only_b = rng.gen_range(0..=20usize);
            let a: Vec<String> = (0..shared + only_a).map(|i| format!("e{i}")).collect();
            let b: Vec<String> = (0..shared)
                .map(|i| format!("e{i}"))
                .chain((0..only_b).map(|i| format!("x{i}")))
                .collect();
            let true_j = shared as f64 / (shared + only_a + only_b) as f64;
            let mut matches = 0;
            for _ in 0..draws {
                let seed = rng.gen::<u64>();
                let min_a = a.iter().map(|s| seeded_hash(seed, s.as_bytes())).min();
                let min_b = b.iter().map(|s| seeded_hash(seed, s.as_bytes())).min();
                if min_a == min_b {
                    matches += 1;
                }
            }
            bias_sum += matches as f64 / draws as f64 - true_j;
        }
        let mean_bias = bias_sum / pairs as f64;
        assert!(
            mean_bias.abs() < 0.02,
            "per-component match rate is biased: {mean_bias}"
        );
    }

    fn corpus_of(posts: &[(&str, &str)]) -> NormalizedCorpus {
        let day = NaiveDate::from_ymd_opt(2015, 10, 25).unwrap();
        let tweets: Vec<Tweet> = posts
            .iter()
            .enumerate()
            .map(|(i, (outlet, text))| Tweet {
                id: format!("t{i:03}"),
                outlet: outlet.to_string(),
                timestamp: day.and_hms_opt(9, 0, 0).unwrap().and_utc().timestamp() + i as i64,
                text: text.to_string(),
                is_retweet: false,
            })
            .collect();
        Corpus::from_tweets(tweets, (day, day))
            .unwrap()
            .normalize(&Normalizer::no_stopwords(), 0)
    }

    #[test]
    fn identical_texts_cluster_together() {
        let corpus = corpus_of(&[
            ("a", "gran gol de chile en el mundial"),
            ("b", "gran gol de chile en el mundial"),
            ("c", "algo completamente distinto sucede aqui hoy"),
        ]);
        let clusters = cluster_topics(&corpus, &SimHashConfig::default());
        assert_eq!(clusters.len(), 2);
        let big = clusters.iter().find(|c| c.tweet_ids.len() == 2).unwrap();
        assert_eq!(big.outlets.len(), 2);
    }

    #[test]
    fn cluster_membership_ignores_input_order() {
        let posts = [
            ("a", "gran gol de chile en el mundial"),
            ("b", "gran gol de chile en el mundial"),
            ("c", "otra cosa pasa en la bolsa hoy"),
            ("d", "otra cosa pasa en la bolsa hoy"),
        ];
        let mut reversed = posts;
        reversed.reverse();
        let c1 = cluster_topics(&corpus_of(&posts), &SimHashConfig::default());
        // Rebuild with reversed insertion order but identical ids, so the
        // same tweets exist under a different input order.
        let day = NaiveDate::from_ymd_opt(2015, 10, 25).unwrap();
        let tweets: Vec<Tweet> = reversed
            .iter()
            .enumerate()
            .map(|(i, (outlet, text))| Tweet {
                id: format!("t{:03}", 3 - i),
                outlet: outlet.to_string(),
                timestamp: day.and_hms_opt(9, 0, 0).unwrap().and_utc().timestamp(),
                text: text.to_string(),
                is_retweet: false,
            })
            .collect();
        let corpus2 = Corpus::from_tweets(tweets, (day, day))
            .unwrap()
            .normalize(&Normalizer::no_stopwords(), 0);
        let c2 = cluster_topics(&corpus2, &SimHashConfig::default());
        let sets1: Vec<Vec<String>> = c1.iter().map(|c| c.tweet_ids.clone()).collect();
        let sets2: Vec<Vec<String>> = c2.iter().map(|c| c.tweet_ids.clone()).collect();
        assert_eq!(sets1, sets2);
    }

    fn cluster(id: usize, outlets: &[&str]) -> TopicCluster {
        TopicCluster {
            id,
            tweet_ids: vec![],
            outlets: outlets.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn conditional_probability_ratios() {
        // B in 10 multi-outlet clusters, A in 4 of them, A in 5 total.
        let mut clusters = Vec::new();
        for i in 0..4 {
            clusters.push(cluster(i, &["A", "B"]));
        }
        for i in 4..10 {
            clusters.push(cluster(i, &["B", "C"]));
        }
        clusters.push(cluster(10, &["A", "C"]));
        let outlets: BTreeSet<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let m = cooccurrence_similarity(&clusters, &outlets, &SimHashConfig::default());
        let a = m.index_of("A").unwrap();
        let b = m.index_of("B").unwrap();
        // Pr(A|B) = 4/10, Pr(B|A) = 4/5; max = 0.8.
        assert!((m.get(a, b) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn always_together_scores_one() {
        let clusters = vec![cluster(0, &["A", "B"]), cluster(1, &["A", "B"])];
        let outlets: BTreeSet<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let m = cooccurrence_similarity(&clusters, &outlets, &SimHashConfig::default());
        assert!((m.get(0, 1) - 1.0).abs() < 1e-12);
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn matches_exhaustive_counting_oracle() {
        let clusters = vec![
            cluster(0, &["A", "B"]),
            cluster(1, &["A", "B", "C"]),
            cluster(2, &["A", "C"]),
            cluster(3, &["B", "C"]),
            cluster(4, &["A"]),
            cluster(5, &["B", "C"]),
        ];
        let outlets: BTreeSet<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let m = cooccurrence_similarity(&clusters, &outlets, &SimHashConfig::default());

        // Brute-force count over all multi-outlet clusters.
        let names = ["A", "B", "C"];
        for (i, a) in names.iter().enumerate() {
            for (j, b) in names.iter().enumerate() {
                if i == j {
                    continue;
                }
                let counted: Vec<&TopicCluster> =
                    clusters.iter().filter(|c| c.outlets.len() >= 2).collect();
                let in_b = counted.iter().filter(|c| c.outlets.contains(*b)).count() as f64;
                let in_a = counted.iter().filter(|c| c.outlets.contains(*a)).count() as f64;
                let both = counted
                    .iter()
                    .filter(|c| c.outlets.contains(*a) && c.outlets.contains(*b))
                    .count() as f64;
                let expected = (both / in_b).max(both / in_a);
                assert!(
                    (m.get(m.index_of(a).unwrap(), m.index_of(b).unwrap()) - expected).abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn absent_outlet_gets_zero_row() {
        let clusters = vec![cluster(0, &["A", "B"])];
        let outlets: BTreeSet<String> =
            ["A", "B", "ghost"].iter().map(|s| s.to_string()).collect();
        let m = cooccurrence_similarity(&clusters, &outlets, &SimHashConfig::default());
        let g = m.index_of("ghost").unwrap();
        for j in 0..m.n() {
            assert_eq!(m.get(g, j), 0.0);
            assert_eq!(m.get(j, g), 0.0);
        }
    }
}
