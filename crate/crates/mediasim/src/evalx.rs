//! Agreement between content-derived partitions and the ownership ground
//! truth: ARI, AMI, NMI, homogeneity, and completeness over a contingency
//! table, with the evaluation preprocessing rules applied first.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ownership::{Registry, UNKNOWN_OWNER};
use crate::partition::{Partition, UNGROUPED};

/// Shared-outlet counts between ground-truth classes (rows) and predicted
/// communities (columns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    pub cells: Vec<Vec<u64>>,
    pub row_margins: Vec<u64>,
    pub col_margins: Vec<u64>,
    pub n: u64,
}

impl ContingencyTable {
    /// Build from aligned label vectors; labels are densified, so arbitrary
    /// ids are fine.
    pub fn from_labels(truth: &[u32], pred: &[u32]) -> Self {
        assert_eq!(truth.len(), pred.len(), "label vectors must align");
        let mut row_ids: BTreeMap<u32, usize> = BTreeMap::new();
        let mut col_ids: BTreeMap<u32, usize> = BTreeMap::new();
        for &t in truth {
            let next = row_ids.len();
            row_ids.entry(t).or_insert(next);
        }
        for &p in pred {
            let next = col_ids.len();
            col_ids.entry(p).or_insert(next);
        }
        let mut cells = vec![vec![0u64; col_ids.len()]; row_ids.len()];
        for (&t, &p) in truth.iter().zip(pred.iter()) {
            cells[row_ids[&t]][col_ids[&p]] += 1;
        }
        let row_margins: Vec<u64> = cells.iter().map(|r| r.iter().sum()).collect();
        let col_margins: Vec<u64> = (0..col_ids.len())
            .map(|j| cells.iter().map(|r| r[j]).sum())
            .collect();
        ContingencyTable {
            cells,
            row_margins,
            col_margins,
            n: truth.len() as u64,
        }
    }
}

fn choose2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Adjusted Rand Index from pair-count combinatorics, normalized against
/// chance. Identical trivial partitions score 1.
pub fn ari(t: &ContingencyTable) -> f64 {
    let index: f64 = t.cells.iter().flatten().map(|&c| choose2(c)).sum();
    let sum_a: f64 = t.row_margins.iter().map(|&a| choose2(a)).sum();
    let sum_b: f64 = t.col_margins.iter().map(|&b| choose2(b)).sum();
    let pairs = choose2(t.n);
    if pairs == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / pairs;
    let max_index = 0.5 * (sum_a + sum_b);
    if max_index == expected {
        // Both partitions trivial: all singletons or one block each.
        return if index == max_index { 1.0 } else { 0.0 };
    }
    (index - expected) / (max_index - expected)
}

/// Normalizer for the AMI denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmiNormalizer {
    /// Arithmetic mean of the entropies.
    #[default]
    Mean,
    Max,
    Min,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiFamily {
    pub nmi: f64,
    pub ami: f64,
    pub homogeneity: f64,
    pub completeness: f64,
}

fn entropy(margins: &[u64], n: u64) -> f64 {
    let n = n as f64;
    margins
        .iter()
        .filter(|&&m| m > 0)
        .map(|&m| {
            let p = m as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n as f64;
    let mut mi = 0.0;
    for (i, row) in t.cells.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let nij = c as f64;
                mi += nij / n
                    * ((n * nij) / (t.row_margins[i] as f64 * t.col_margins[j] as f64)).ln();
            }
        }
    }
    mi
}

/// Expected mutual information under the hypergeometric model with the
/// observed margins fixed.
fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n;
    let nf = n as f64;
    // ln k! table; iterative sums are exact enough at these sizes.
    let mut lnfact = vec![0.0f64; n as usize + 1];
    for k in 1..=n as usize {
        lnfact[k] = lnfact[k - 1] + (k as f64).ln();
    }
    let lf = |x: u64| lnfact[x as usize];

    let mut emi = 0.0;
    for &a in &t.row_margins {
        for &b in &t.col_margins {
            let lower = 1.max((a + b).saturating_sub(n));
            let upper = a.min(b);
            for nij in lower..=upper {
                let term = (nij as f64 / nf) * ((nf * nij as f64) / (a as f64 * b as f64)).ln();
                let ln_p = lf(a) + lf(b) + lf(n - a) + lf(n - b)
                    - lf(n)
                    - lf(nij)
                    - lf(a - nij)
                    - lf(b - nij)
                    - lf(n - a - b + nij);
                emi += term * ln_p.exp();
            }
        }
    }
    emi
}

/// NMI, AMI, homogeneity, and completeness in one pass. A degenerate
/// entropy (single class or single cluster) resolves the affected score to
/// 1.0 by convention, with a warning.
pub fn mutual_information_family(t: &ContingencyTable, normalizer: AmiNormalizer) -> MiFamily {
    let h_true = entropy(&t.row_margins, t.n);
    let h_pred = entropy(&t.col_margins, t.n);
    let n = t.n as f64;

    // Conditional entropies straight from the cells.
    let mut h_true_given_pred = 0.0;
    let mut h_pred_given_true = 0.0;
    for (i, row) in t.cells.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let nij = c as f64;
                h_true_given_pred -= nij / n * (nij / t.col_margins[j] as f64).ln();
                h_pred_given_true -= nij / n * (nij / t.row_margins[i] as f64).ln();
            }
        }
    }

    let homogeneity = if h_true == 0.0 {
        1.0
    } else {
        1.0 - h_true_given_pred / h_true
    };
    let completeness = if h_pred == 0.0 {
        1.0
    } else {
        1.0 - h_pred_given_true / h_pred
    };

    if h_true == 0.0 || h_pred == 0.0 {
        log::warn!("degenerate entropy (single class or cluster); NMI/AMI default to 1.0");
        return MiFamily {
            nmi: 1.0,
            ami: 1.0,
            homogeneity,
            completeness,
        };
    }

    let mi = mutual_information(t);
    let nmi = mi / (h_true * h_pred).sqrt();

    let emi = expected_mutual_information(t);
    let norm = match normalizer {
        AmiNormalizer::Mean => 0.5 * (h_true + h_pred),
        AmiNormalizer::Max => h_true.max(h_pred),
        AmiNormalizer::Min => h_true.min(h_pred),
        AmiNormalizer::Sqrt => (h_true * h_pred).sqrt(),
    };
    let mut denom = norm - emi;
    // Guard against a vanishing denominator, keeping its sign.
    if denom.abs() < f64::EPSILON {
        denom = if denom < 0.0 {
            -f64::EPSILON
        } else {
            f64::EPSILON
        };
    }
    let ami = (mi - emi) / denom;

    MiFamily {
        nmi,
        ami,
        homogeneity,
        completeness,
    }
}

/// Aligned label vectors ready for the indices, after the preprocessing
/// rules.
#[derive(Debug, Clone)]
pub struct PreparedEval {
    pub outlets: Vec<String>,
    pub truth_labels: Vec<u32>,
    pub pred_labels: Vec<u32>,
    /// Predicted communities after un-grouped outlets became singletons.
    pub communities: usize,
}

/// Apply the evaluation preprocessing: (1) drop outlets with unknown owners;
/// (2) drop outlets whose resolved owner owns exactly one outlet, counted on
/// the post-rule-1 universe; (3) give every remaining outlet of predicted
/// community 0 its own singleton community.
pub fn prepare_for_eval(
    pred: &Partition,
    truth: &Partition,
    registry: &Registry,
) -> Result<PreparedEval> {
    let pred_outlets: BTreeSet<&str> = pred.outlets().collect();
    let truth_outlets: BTreeSet<&str> = truth.outlets().collect();
    if pred_outlets != truth_outlets {
        return Err(Error::InvalidArgument(
            "predicted and ground-truth partitions cover different outlets".into(),
        ));
    }

    let known: Vec<&str> = pred_outlets
        .iter()
        .copied()
        .filter(|o| registry.resolved_owner(o) != UNKNOWN_OWNER)
        .collect();
    let mut owner_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for o in &known {
        *owner_counts.entry(registry.resolved_owner(o)).or_default() += 1;
    }
    let outlets: Vec<String> = known
        .into_iter()
        .filter(|o| owner_counts[registry.resolved_owner(o)] > 1)
        .map(String::from)
        .collect();
    if outlets.is_empty() {
        return Err(Error::NoEvaluableOutlets);
    }

    let truth_labels: Vec<u32> = outlets
        .iter()
        .map(|o| truth.label_of(o).expect("outlet in truth partition"))
        .collect();
    let max_pred = pred.labels().values().copied().max().unwrap_or(0);
    let mut next_singleton = max_pred + 1;
    let pred_labels: Vec<u32> = outlets
        .iter()
        .map(|o| {
            let label = pred.label_of(o).expect("outlet in predicted partition");
            if label == UNGROUPED {
                let fresh = next_singleton;
                next_singleton += 1;
                fresh
            } else {
                label
            }
        })
        .collect();
    let communities = pred_labels.iter().collect::<BTreeSet<_>>().len();
    Ok(PreparedEval {
        outlets,
        truth_labels,
        pred_labels,
        communities,
    })
}

/// One row of the agreement report.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub outlets: usize,
    pub communities: usize,
    pub ari: f64,
    pub ami: f64,
    pub nmi: f64,
    pub homogeneity: f64,
    pub completeness: f64,
}

/// Preprocess, build the contingency table, and compute all five indices.
pub fn evaluate(
    pred: &Partition,
    truth: &Partition,
    registry: &Registry,
    normalizer: AmiNormalizer,
) -> Result<(EvalReport, ContingencyTable)> {
    let prepared = prepare_for_eval(pred, truth, registry)?;
    let table = ContingencyTable::from_labels(&prepared.truth_labels, &prepared.pred_labels);
    let ari_score = ari(&table);
    let family = mutual_information_family(&table, normalizer);
    Ok((
        EvalReport {
            outlets: prepared.outlets.len(),
            communities: prepared.communities,
            ari: ari_score,
            ami: family.ami,
            nmi: family.nmi,
            homogeneity: family.homogeneity,
            completeness: family.completeness,
        },
        table,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ownership::Registry;

    fn table(truth: &[u32], pred: &[u32]) -> ContingencyTable {
        ContingencyTable::from_labels(truth, pred)
    }

    #[test]
    fn identical_partitions_score_one() {
        let t = table(&[1, 1, 2, 2, 3], &[7, 7, 5, 5, 9]);
        assert!((ari(&t) - 1.0).abs() < 1e-12);
        let m = mutual_information_family(&t, AmiNormalizer::Mean);
        assert!((m.nmi - 1.0).abs() < 1e-12);
        assert!((m.ami - 1.0).abs() < 1e-12);
        assert!((m.homogeneity - 1.0).abs() < 1e-12);
        assert!((m.completeness - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ari_pair_counting_example() {
        // truth {{a,b},{c}} vs pred {{a},{b,c}}: ARI = -0.5.
        let t = table(&[1, 1, 2], &[1, 2, 2]);
        assert!((ari(&t) - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn ari_trivial_identical_partitions() {
        // All singletons on both sides.
        let t = table(&[1, 2, 3], &[4, 5, 6]);
        assert!((ari(&t) - 1.0).abs() < 1e-12);
        // One block on both sides.
        let t = table(&[1, 1, 1], &[2, 2, 2]);
        assert!((ari(&t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shredded_prediction_keeps_homogeneity() {
        // Pred = all singletons vs a 2-class truth.
        let t = table(&[1, 1, 2, 2], &[1, 2, 3, 4]);
        let m = mutual_information_family(&t, AmiNormalizer::Mean);
        assert!((m.homogeneity - 1.0).abs() < 1e-12);
        assert!(m.completeness < 1.0);
    }

    #[test]
    fn merged_prediction_degenerate_convention() {
        // truth {{a,b},{c,d}} vs pred {{a,b,c,d}}: hom 0, com 1 by the
        // degenerate-entropy convention.
        let t = table(&[1, 1, 2, 2], &[1, 1, 1, 1]);
        let m = mutual_information_family(&t, AmiNormalizer::Mean);
        assert!(m.homogeneity.abs() < 1e-12);
        assert!((m.completeness - 1.0).abs() < 1e-12);
        assert!((m.nmi - 1.0).abs() < 1e-12);
        assert!((m.ami - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hom_and_com_swap_under_exchange() {
        let truth = [1, 1, 2, 2, 3, 3];
        let pred = [1, 1, 1, 2, 2, 3];
        let m1 = mutual_information_family(&table(&truth, &pred), AmiNormalizer::Mean);
        let m2 = mutual_information_family(&table(&pred, &truth), AmiNormalizer::Mean);
        assert!((m1.homogeneity - m2.completeness).abs() < 1e-12);
        assert!((m1.completeness - m2.homogeneity).abs() < 1e-12);
    }

    #[test]
    fn relabeling_invariance() {
        let truth = [1, 1, 2, 2, 3, 3, 3];
        let pred = [1, 2, 2, 2, 3, 3, 1];
        let truth_relabeled: Vec<u32> = truth.iter().map(|&l| l * 10 + 5).collect();
        let pred_relabeled: Vec<u32> = pred.iter().map(|&l| 99 - l).collect();
        let t1 = table(&truth, &pred);
        let t2 = table(&truth_relabeled, &pred_relabeled);
        assert!((ari(&t1) - ari(&t2)).abs() < 1e-12);
        let m1 = mutual_information_family(&t1, AmiNormalizer::Mean);
        let m2 = mutual_information_family(&t2, AmiNormalizer::Mean);
        assert!((m1.nmi - m2.nmi).abs() < 1e-12);
        assert!((m1.ami - m2.ami).abs() < 1e-12);
        assert!((m1.homogeneity - m2.homogeneity).abs() < 1e-12);
        assert!((m1.completeness - m2.completeness).abs() < 1e-12);
    }

    #[test]
    fn shuffled_labels_average_to_zero() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 50;
        let truth: Vec<u32> = (0..n).map(|i| (i % 5) as u32).collect();
        let mut pred: Vec<u32> = (0..n).map(|i| (i % 5) as u32).collect();
        let trials = 300;
        let mut ari_sum = 0.0;
        let mut ami_sum = 0.0;
        for _ in 0..trials {
            pred.shuffle(&mut rng);
            let t = table(&truth, &pred);
            ari_sum += ari(&t);
            ami_sum += mutual_information_family(&t, AmiNormalizer::Mean).ami;
        }
        assert!((ari_sum / trials as f64).abs() < 0.02);
        assert!((ami_sum / trials as f64).abs() < 0.02);
    }

    fn registry_of(rows: &str) -> Registry {
        Registry::load(rows.as_bytes(), "".as_bytes()).unwrap()
    }

    #[test]
    fn prepare_drops_unknown_and_single_outlet_owners() {
        // d has no registry row (unknown); e's owner has a single outlet.
        let registry = registry_of("a,O1,1.0\nb,O1,1.0\nc,O2,1.0\nf,O2,1.0\ne,Solo,1.0\n");
        let truth = registry.ground_truth_partition(
            &["a", "b", "c", "d", "e", "f"].iter().map(|s| s.to_string()).collect(),
        );
        let pred = Partition::from_groups(
            vec![vec!["a", "b"], vec!["c", "f"]],
            vec!["d", "e"],
        )
        .unwrap();
        let prepared = prepare_for_eval(&pred, &truth, &registry).unwrap();
        assert_eq!(prepared.outlets, vec!["a", "b", "c", "f"]);
        assert_eq!(prepared.communities, 2);
    }

    #[test]
    fn prepare_singletonizes_ungrouped() {
        let registry = registry_of("a,O1,1.0\nb,O1,1.0\nc,O1,1.0\n");
        let truth = registry.ground_truth_partition(
            &["a", "b", "c"].iter().map(|s| s.to_string()).collect(),
        );
        let pred =
            Partition::from_groups(vec![vec!["c"]], vec!["a", "b"]).unwrap();
        // "c" alone is contiguous id 1; a and b are un-grouped.
        let prepared = prepare_for_eval(&pred, &truth, &registry).unwrap();
        assert_eq!(prepared.communities, 3);
        // The two un-grouped outlets got distinct fresh ids.
        assert_ne!(prepared.pred_labels[0], prepared.pred_labels[1]);
    }

    #[test]
    fn prepare_errors_when_nothing_remains() {
        let registry = registry_of("a,Solo,1.0\n");
        let outlets: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let truth = registry.ground_truth_partition(&outlets);
        let pred = Partition::from_groups(vec![], vec!["a", "b"]).unwrap();
        let err = prepare_for_eval(&pred, &truth, &registry).unwrap_err();
        assert!(matches!(err, Error::NoEvaluableOutlets));
    }

    #[test]
    fn evaluate_perfect_prediction() {
        let registry = registry_of("a,O1,1.0\nb,O1,1.0\nc,O2,1.0\nd,O2,1.0\n");
        let outlets: BTreeSet<String> =
            ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let truth = registry.ground_truth_partition(&outlets);
        let pred = Partition::from_groups(vec![vec!["a", "b"], vec!["c", "d"]], vec![]).unwrap();
        let (report, _) = evaluate(&pred, &truth, &registry, AmiNormalizer::Mean).unwrap();
        assert_eq!(report.outlets, 4);
        assert_eq!(report.communities, 2);
        assert!((report.ari - 1.0).abs() < 1e-12);
        assert!((report.ami - 1.0).abs() < 1e-12);
        assert!((report.nmi - 1.0).abs() < 1e-12);
        assert!((report.homogeneity - 1.0).abs() < 1e-12);
        assert!((report.completeness - 1.0).abs() < 1e-12);
    }
}
