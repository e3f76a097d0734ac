//! Vocabulary similarity: one tf-idf vector per outlet over all its tweets,
//! pairwise cosine.

use std::collections::BTreeMap;

use crate::corpus::NormalizedCorpus;
use crate::matrix::SimilarityMatrix;

/// All of an outlet's tweets as a single bag of tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutletDocument {
    pub outlet: String,
    pub term_counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct TfIdfVector {
    pub outlet: String,
    pub weights: BTreeMap<String, f64>,
}

/// Idf form. `Smooth` is the default: ln((1+N)/(1+df)) + 1, which never
/// zeroes out corpus-wide vocabulary. `Raw` is ln(N/df).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfIdfVariant {
    #[default]
    Smooth,
    Raw,
}

/// One document per retained outlet (empty documents are kept and flagged
/// with a warning).
pub fn build_outlet_documents(corpus: &NormalizedCorpus) -> Vec<OutletDocument> {
    let mut by_outlet: BTreeMap<&str, BTreeMap<String, u64>> = corpus
        .outlets
        .iter()
        .map(|o| (o.as_str(), BTreeMap::new()))
        .collect();
    for doc in &corpus.docs {
        let counts = by_outlet.entry(doc.outlet.as_str()).or_default();
        for token in &doc.tokens {
            *counts.entry(token.clone()).or_default() += 1;
        }
    }
    by_outlet
        .into_iter()
        .map(|(outlet, term_counts)| {
            if term_counts.is_empty() {
                log::warn!("outlet {outlet}: empty document after normalization");
            }
            OutletDocument {
                outlet: outlet.to_string(),
                term_counts,
            }
        })
        .collect()
}

/// Term weights: count(t, d) * idf(t).
pub fn tfidf(docs: &[OutletDocument], variant: TfIdfVariant) -> Vec<TfIdfVector> {
    let n = docs.len() as f64;
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for d in docs {
        for term in d.term_counts.keys() {
            *df.entry(term.as_str()).or_default() += 1;
        }
    }
    docs.iter()
        .map(|d| {
            let weights = d
                .term_counts
                .iter()
                .map(|(term, &count)| {
                    let dft = df[term.as_str()] as f64;
                    let idf = match variant {
                        TfIdfVariant::Smooth => ((1.0 + n) / (1.0 + dft)).ln() + 1.0,
                        TfIdfVariant::Raw => (n / dft).ln(),
                    };
                    (term.clone(), count as f64 * idf)
                })
                .collect();
            TfIdfVector {
                outlet: d.outlet.clone(),
                weights,
            }
        })
        .collect()
}

/// Cosine of two sparse vectors; 0 when either norm is 0.
pub fn cosine(u: &TfIdfVector, v: &TfIdfVector) -> f64 {
    sparse_cosine(&u.weights, &v.weights)
}

pub(crate) fn sparse_cosine(u: &BTreeMap<String, f64>, v: &BTreeMap<String, f64>) -> f64 {
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, a)| large.get(t).map(|b| a * b))
        .sum();
    let nu: f64 = u.values().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.values().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

/// The full outlet-by-outlet cosine matrix. Diagonal is 1 for outlets with
/// nonempty documents, 0 otherwise.
pub fn vocabulary_similarity(corpus: &NormalizedCorpus, variant: TfIdfVariant) -> SimilarityMatrix {
    let docs = build_outlet_documents(corpus);
    let vectors = tfidf(&docs, variant);
    let labels: Vec<String> = vectors.iter().map(|v| v.outlet.clone()).collect();
    let mut m = SimilarityMatrix::zeros(labels);
    for i in 0..vectors.len() {
        let nonempty = !vectors[i].weights.is_empty();
        m.set(i, i, if nonempty { 1.0 } else { 0.0 });
        for j in i + 1..vectors.len() {
            m.set_sym(i, j, cosine(&vectors[i], &vectors[j]));
        }
    }
    m
}
