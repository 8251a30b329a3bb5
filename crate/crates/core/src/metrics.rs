//! Evaluation metrics: accuracy, tie-aware ROC AUC, paired bootstrap
//! significance, variable-rater Fleiss kappa, worker agreement and
//! endorsement-rate tallies.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One judgment with a model score attached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredJudgment {
    pub pair_id: String,
    pub worker_id: String,
    pub label: u8,
    pub probability: f64,
}

/// Binary ratings per item; rater counts may vary.
#[derive(Debug, Clone, Default)]
pub struct RatingTable {
    items: BTreeMap<String, Vec<u8>>,
}

impl RatingTable {
    pub fn new() -> RatingTable {
        RatingTable::default()
    }

    pub fn push(&mut self, item_id: impl Into<String>, rating: u8) {
        self.items.entry(item_id.into()).or_default().push(rating);
    }

    pub fn from_pairs<I, S>(pairs: I) -> RatingTable
    where
        I: IntoIterator<Item = (S, u8)>,
        S: Into<String>,
    {
        let mut t = RatingTable::new();
        for (id, r) in pairs {
            t.push(id, r);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items with at least two ratings.
    fn multi_rater(&self) -> impl Iterator<Item = (&String, &Vec<u8>)> {
        self.items.iter().filter(|(_, r)| r.len() >= 2)
    }
}

/// Pairwise agreement among an item's raters:
/// Σ_c n_c(n_c−1) / (n(n−1)).
fn pairwise_agreement(ratings: &[u8]) -> f64 {
    let n = ratings.len() as f64;
    let yes = ratings.iter().filter(|&&r| r == 1).count() as f64;
    let no = n - yes;
    (yes * (yes - 1.0) + no * (no - 1.0)) / (n * (n - 1.0))
}

/// Hard-classification accuracy at threshold `t`; a probability exactly at
/// the threshold counts as a positive prediction.
pub fn accuracy(items: &[ScoredJudgment], t: f64) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::InvalidInput("no judgments to score".into()));
    }
    let correct = items
        .iter()
        .filter(|j| u8::from(j.probability >= t) == j.label)
        .count();
    Ok(correct as f64 / items.len() as f64)
}

/// Rank-based ROC AUC over (score, is_positive) pairs, ties counted half.
/// Works for any real-valued scores, not just probabilities.
pub fn roc_auc_scores(scored: &[(f64, bool)]) -> Result<f64> {
    let n_pos = scored.iter().filter(|(_, y)| *y).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "ROC AUC needs both a positive and a negative example".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.partial_cmp(&scored[b].0).unwrap());

    // Average ranks within tie groups, then the Mann-Whitney identity.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scored[order[j]].0 == scored[order[i]].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0; // mean of ranks i+1..=j
        for &k in &order[i..j] {
            if scored[k].1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// ROC AUC of model probabilities against worker labels.
pub fn roc_auc(items: &[ScoredJudgment]) -> Result<f64> {
    let scored: Vec<(f64, bool)> = items
        .iter()
        .map(|j| (j.probability, j.label == 1))
        .collect();
    roc_auc_scores(&scored)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub auc_a: f64,
    pub auc_b: f64,
    pub mean_delta: f64,
    /// Fraction of resamples where AUC_a ≤ AUC_b: the probability that the
    /// observed gain of A over B arises by chance.
    pub p_value: f64,
    pub resamples: usize,
    pub valid_resamples: usize,
    pub seed: u64,
}

/// Paired bootstrap over judgment rows: do scorer A's AUC gains over
/// scorer B survive resampling?
///
/// Both slices must describe the same judgments in the same order (equal
/// pair, worker and label per row); only the attached scores differ.
pub fn bootstrap_auc_delta(
    items_a: &[ScoredJudgment],
    items_b: &[ScoredJudgment],
    resamples: usize,
    seed: u64,
) -> Result<BootstrapReport> {
    if items_a.len() != items_b.len() || items_a.is_empty() {
        return Err(Error::InvalidInput(
            "bootstrap inputs must be equal-length and non-empty".into(),
        ));
    }
    for (a, b) in items_a.iter().zip(items_b) {
        if a.pair_id != b.pair_id || a.worker_id != b.worker_id || a.label != b.label {
            return Err(Error::InvalidInput(format!(
                "misaligned judgment rows: ({}, {}) vs ({}, {})",
                a.pair_id, a.worker_id, b.pair_id, b.worker_id
            )));
        }
    }
    let auc_a = roc_auc(items_a)?;
    let auc_b = roc_auc(items_b)?;

    let n = items_a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut not_better = 0usize;
    let mut valid = 0usize;
    let mut delta_sum = 0.0;
    let mut sample_a: Vec<(f64, bool)> = Vec::with_capacity(n);
    let mut sample_b: Vec<(f64, bool)> = Vec::with_capacity(n);
    for _ in 0..resamples {
        sample_a.clear();
        sample_b.clear();
        for _ in 0..n {
            let i = rng.random_range(0..n);
            sample_a.push((items_a[i].probability, items_a[i].label == 1));
            sample_b.push((items_b[i].probability, items_b[i].label == 1));
        }
        let (Ok(ra), Ok(rb)) = (roc_auc_scores(&sample_a), roc_auc_scores(&sample_b)) else {
            continue; // single-class resample; skip
        };
        valid += 1;
        delta_sum += ra - rb;
        if ra <= rb {
            not_better += 1;
        }
    }
    if valid == 0 {
        return Err(Error::UndefinedMetric(
            "every bootstrap resample was single-class".into(),
        ));
    }
    Ok(BootstrapReport {
        auc_a,
        auc_b,
        mean_delta: delta_sum / valid as f64,
        p_value: not_better as f64 / valid as f64,
        resamples,
        valid_resamples: valid,
        seed,
    })
}

/// Fleiss kappa for a variable number of raters per item.
///
/// Per-item observed agreement is the pairwise agreement rate among that
/// item's raters; single-rater items are ignored. Expected agreement uses
/// the category proportions over all ratings of the included items.
pub fn fleiss_kappa(table: &RatingTable) -> Result<f64> {
    let mut p_bar = 0.0;
    let mut included = 0usize;
    let mut yes = 0u64;
    let mut total = 0u64;
    for (_, ratings) in table.multi_rater() {
        p_bar += pairwise_agreement(ratings);
        included += 1;
        yes += ratings.iter().filter(|&&r| r == 1).count() as u64;
        total += ratings.len() as u64;
    }
    if included == 0 {
        return Err(Error::UndefinedMetric(
            "no item has two or more ratings".into(),
        ));
    }
    p_bar /= included as f64;
    let p_yes = yes as f64 / total as f64;
    let p_e = p_yes * p_yes + (1.0 - p_yes) * (1.0 - p_yes);
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(Error::UndefinedMetric(
            "expected agreement is 1: all ratings in one category".into(),
        ));
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Kappa between workers and the thresholded model: each judgment row
/// becomes a two-rating pseudo-item (the worker's label, the model's hard
/// classification), keyed by (pair, worker).
pub fn model_as_rater_kappa(items: &[ScoredJudgment], t: f64) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::InvalidInput("no judgments to score".into()));
    }
    let mut table = RatingTable::new();
    for j in items {
        let key = format!("{}\u{1f}{}", j.pair_id, j.worker_id);
        table.push(key.clone(), j.label);
        table.push(key, u8::from(j.probability >= t));
    }
    fleiss_kappa(&table)
}

/// Mean pairwise agreement over multi-rater items: the probability that two
/// randomly chosen raters of the same item agree.
pub fn worker_worker_agreement(table: &RatingTable) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (_, ratings) in table.multi_rater() {
        sum += pairwise_agreement(ratings);
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedMetric(
            "no item has two or more ratings".into(),
        ));
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeprelRate {
    pub yes: u64,
    pub total: u64,
    pub rate: f64,
}

/// Endorsement rate per dependency type from (deprel, label) rows.
pub fn per_dependency_rates(rows: &[(String, u8)]) -> BTreeMap<String, DeprelRate> {
    let mut acc: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (deprel, label) in rows {
        let e = acc.entry(deprel.clone()).or_insert((0, 0));
        e.0 += u64::from(*label == 1);
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(deprel, (yes, total))| {
            (
                deprel,
                DeprelRate {
                    yes,
                    total,
                    rate: yes as f64 / total as f64,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSummary {
    pub per_worker: BTreeMap<String, f64>,
    pub mean: f64,
    /// Population standard deviation across workers.
    pub std: f64,
}

/// Per-worker deletion endorsement rates with mean and population std.
pub fn worker_rate_distribution(rows: &[(String, u8)]) -> RateSummary {
    let mut acc: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (worker, label) in rows {
        let e = acc.entry(worker.clone()).or_insert((0, 0));
        e.0 += u64::from(*label == 1);
        e.1 += 1;
    }
    let per_worker: BTreeMap<String, f64> = acc
        .into_iter()
        .map(|(w, (yes, total))| (w, yes as f64 / total as f64))
        .collect();
    let n = per_worker.len() as f64;
    let mean = if n > 0.0 {
        per_worker.values().sum::<f64>() / n
    } else {
        0.0
    };
    let var = if n > 0.0 {
        per_worker.values().map(|r| (r - mean).powi(2)).sum::<f64>() / n
    } else {
        0.0
    };
    RateSummary {
        per_worker,
        mean,
        std: var.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sj(pair: &str, worker: &str, label: u8, p: f64) -> ScoredJudgment {
        ScoredJudgment {
            pair_id: pair.into(),
            worker_id: worker.into(),
            label,
            probability: p,
        }
    }

    #[test]
    fn accuracy_trivial_and_boundary() {
        let all_right: Vec<ScoredJudgment> =
            (0..4).map(|i| sj(&format!("p{i}"), "w", 1, 0.9)).collect();
        assert_eq!(accuracy(&all_right, 0.5).unwrap(), 1.0);
        // Exactly at threshold counts as predicted positive.
        let edge = vec![sj("p", "w", 1, 0.5), sj("q", "w", 0, 0.5)];
        assert_eq!(accuracy(&edge, 0.5).unwrap(), 0.5);
        assert!(accuracy(&[], 0.5).is_err());
        // accuracy + error rate = 1
        let mixed = vec![
            sj("a", "w", 1, 0.9),
            sj("b", "w", 0, 0.8),
            sj("c", "w", 1, 0.2),
        ];
        let acc = accuracy(&mixed, 0.5).unwrap();
        let err = mixed
            .iter()
            .filter(|j| u8::from(j.probability >= 0.5) != j.label)
            .count() as f64
            / 3.0;
        assert!((acc + err - 1.0).abs() < 1e-15);
    }

    #[test]
    fn auc_hand_cases() {
        let perfect = vec![
            (0.9, true),
            (0.8, true),
            (0.2, false),
            (0.1, false),
        ];
        assert_eq!(roc_auc_scores(&perfect).unwrap(), 1.0);

        // 3 of 4 positive–negative pairs won → 0.75.
        let mixed = vec![(0.9, true), (0.8, false), (0.3, true), (0.1, false)];
        assert_eq!(roc_auc_scores(&mixed).unwrap(), 0.75);

        let ties = vec![(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        assert_eq!(roc_auc_scores(&ties).unwrap(), 0.5);

        assert!(roc_auc_scores(&[(0.4, true)]).is_err());
    }

    #[test]
    fn auc_matches_pair_counting_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.random_range(5..60usize);
            let scored: Vec<(f64, bool)> = (0..n)
                .map(|_| {
                    // Coarse scores force plenty of ties.
                    let s = (rng.random_range(0..8) as f64) / 8.0;
                    (s, rng.random_bool(0.5))
                })
                .collect();
            let n_pos = scored.iter().filter(|(_, y)| *y).count();
            if n_pos == 0 || n_pos == n {
                continue;
            }
            let mut wins = 0.0;
            let mut pairs = 0.0;
            for &(sp, yp) in &scored {
                if !yp {
                    continue;
                }
                for &(sn, yn) in &scored {
                    if yn {
                        continue;
                    }
                    pairs += 1.0;
                    if sp > sn {
                        wins += 1.0;
                    } else if sp == sn {
                        wins += 0.5;
                    }
                }
            }
            let brute = wins / pairs;
            let fast = roc_auc_scores(&scored).unwrap();
            assert!((brute - fast).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let n = rng.random_range(6..40usize);
            let scored: Vec<(f64, bool)> = (0..n)
                .map(|_| (rng.random_range(-3.0..3.0), rng.random_bool(0.4)))
                .collect();
            if scored.iter().all(|(_, y)| *y) || scored.iter().all(|(_, y)| !*y) {
                continue;
            }
            let base = roc_auc_scores(&scored).unwrap();
            // exp is strictly monotone; so is 2x+1.
            let t1: Vec<(f64, bool)> = scored.iter().map(|&(s, y)| (s.exp(), y)).collect();
            let t2: Vec<(f64, bool)> = scored.iter().map(|&(s, y)| (2.0 * s + 1.0, y)).collect();
            assert!((roc_auc_scores(&t1).unwrap() - base).abs() < 1e-12);
            assert!((roc_auc_scores(&t2).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn bootstrap_self_comparison() {
        let items: Vec<ScoredJudgment> = (0..50)
            .map(|i| sj(&format!("p{i}"), "w", (i % 2) as u8, i as f64 / 50.0))
            .collect();
        let r = bootstrap_auc_delta(&items, &items, 200, 4).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.mean_delta, 0.0);
    }

    #[test]
    fn bootstrap_detects_strong_scorer() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let mut strong = Vec::new();
        let mut random = Vec::new();
        for i in 0..500 {
            let label = rng.random_bool(0.5) as u8;
            let good = (label as f64) * 0.6 + rng.random_range(0.0..0.4);
            let noise: f64 = rng.random_range(0.0..1.0);
            strong.push(sj(&format!("p{i}"), "w", label, good));
            random.push(sj(&format!("p{i}"), "w", label, noise));
        }
        let r = bootstrap_auc_delta(&strong, &random, 1000, 8).unwrap();
        assert!(r.p_value < 0.01, "p = {}", r.p_value);
        assert!(r.auc_a > r.auc_b);
    }

    #[test]
    fn bootstrap_is_deterministic_and_checks_alignment() {
        let a: Vec<ScoredJudgment> = (0..30)
            .map(|i| sj(&format!("p{i}"), "w", (i % 2) as u8, i as f64 / 30.0))
            .collect();
        let b: Vec<ScoredJudgment> = a
            .iter()
            .map(|j| sj(&j.pair_id, "w", j.label, 1.0 - j.probability))
            .collect();
        let r1 = bootstrap_auc_delta(&a, &b, 300, 123).unwrap();
        let r2 = bootstrap_auc_delta(&a, &b, 300, 123).unwrap();
        assert_eq!(r1.p_value, r2.p_value);

        let mut misaligned = b.clone();
        misaligned[0].worker_id = "other".into();
        assert!(matches!(
            bootstrap_auc_delta(&a, &misaligned, 10, 1).unwrap_err(),
            Error::InvalidInput(_)
        ));
    }

    #[test]
    fn fleiss_kappa_hand_case() {
        // items {(yes,yes), (yes,no)} → P̄ = 0.5, P_e = 0.625, κ = −1/3.
        let table = RatingTable::from_pairs([
            ("i1", 1u8),
            ("i1", 1),
            ("i2", 1),
            ("i2", 0),
        ]);
        let k = fleiss_kappa(&table).unwrap();
        assert!((k - (-1.0 / 3.0)).abs() < 1e-12, "{k}");
    }

    #[test]
    fn fleiss_kappa_perfect_agreement() {
        let table = RatingTable::from_pairs([
            ("i1", 1u8),
            ("i1", 1),
            ("i2", 0),
            ("i2", 0),
        ]);
        assert_eq!(fleiss_kappa(&table).unwrap(), 1.0);
    }

    #[test]
    fn fleiss_kappa_undefined_cases() {
        // Only single-rater items.
        let singles = RatingTable::from_pairs([("i1", 1u8), ("i2", 0)]);
        assert!(fleiss_kappa(&singles).is_err());
        // All ratings one category → P_e = 1.
        let all_yes = RatingTable::from_pairs([("i1", 1u8), ("i1", 1), ("i2", 1), ("i2", 1)]);
        assert!(fleiss_kappa(&all_yes).is_err());
        // Single-rater items are ignored, not counted.
        let mixed = RatingTable::from_pairs([
            ("solo", 0u8),
            ("i1", 1),
            ("i1", 1),
            ("i2", 1),
            ("i2", 0),
        ]);
        let k = fleiss_kappa(&mixed).unwrap();
        assert!((k - (-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn model_as_rater_extremes() {
        // Echoing model → κ = 1.
        let items = vec![
            sj("p1", "w1", 1, 0.9),
            sj("p1", "w2", 0, 0.1),
            sj("p2", "w1", 0, 0.2),
            sj("p2", "w3", 1, 0.8),
        ];
        assert_eq!(model_as_rater_kappa(&items, 0.5).unwrap(), 1.0);
        // Inverting model on a balanced set → κ = −1.
        let inverted: Vec<ScoredJudgment> = items
            .iter()
            .map(|j| sj(&j.pair_id, &j.worker_id, j.label, 1.0 - j.probability))
            .collect();
        assert_eq!(model_as_rater_kappa(&inverted, 0.5).unwrap(), -1.0);
    }

    #[test]
    fn agreement_fraction_cases() {
        let perfect = RatingTable::from_pairs([
            ("i1", 1u8),
            ("i1", 1),
            ("i2", 0),
            ("i2", 0),
        ]);
        assert_eq!(worker_worker_agreement(&perfect).unwrap(), 1.0);
        // (yes, yes, no) → 1 agreeing pair of 3.
        let trio = RatingTable::from_pairs([("i", 1u8), ("i", 1), ("i", 0)]);
        let a = worker_worker_agreement(&trio).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn per_dependency_tallies() {
        let rows = vec![
            ("mwe".to_string(), 0u8),
            ("mwe".to_string(), 1),
            ("cop".to_string(), 1),
            ("advmod".to_string(), 1),
        ];
        let rates = per_dependency_rates(&rows);
        assert_eq!(rates["mwe"].total, 2);
        assert_eq!(rates["mwe"].rate, 0.5);
        assert_eq!(rates["cop"].rate, 1.0);
        assert_eq!(rates["advmod"].yes, 1);
    }

    #[test]
    fn worker_rates_hand_tally() {
        let rows = vec![
            ("w1".to_string(), 1u8),
            ("w1".to_string(), 1),
            ("w1".to_string(), 1),
            ("w1".to_string(), 0),
            ("w2".to_string(), 0),
            ("w2".to_string(), 1),
        ];
        let summary = worker_rate_distribution(&rows);
        assert_eq!(summary.per_worker["w1"], 0.75);
        assert_eq!(summary.per_worker["w2"], 0.5);
        assert!((summary.mean - 0.625).abs() < 1e-12);
        // Population std of {0.75, 0.5}.
        assert!((summary.std - 0.125).abs() < 1e-12);
    }
}
