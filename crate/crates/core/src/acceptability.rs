//! Whole-compression acceptability scores.
//!
//! A chain of M prunes is acceptable when every single prune is: the chain
//! score sums the per-edit log endorsement probabilities, so it equals the
//! log probability that a judge endorses all M deletions (assuming
//! independence). Companions: the least-acceptable edit (`a_min`), the raw
//! operation count (`a_m = −M`), and a pure language-model score (`a_lm`,
//! NormLP of the final text). All live in (−∞, 0] relative terms; higher is
//! better formed, the identity compression scores 0.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::colloc::OffsetStats;
use crate::deptree::{DepTree, PruneEdit};
use crate::error::{Error, Result};
use crate::features::{extract, FeatureConfig};
use crate::lm::LmBundle;
use crate::model::AcceptabilityModel;

/// Per-edit log endorsement probabilities and their aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainScore {
    pub per_edit_logp: Vec<f64>,
    /// Σ ln p_i — log probability that every operation is acceptable.
    pub a_sum: f64,
    /// min ln p_i — the least acceptable operation (0 for the empty chain).
    pub a_min: f64,
    /// −M, the negated operation count.
    pub a_m: f64,
    /// NormLP of the final compression text.
    pub a_lm: f64,
}

/// Everything needed to score edits and chains without worker identity:
/// the trained model, the language models, collocation statistics and the
/// feature configuration. No worker feature is ever consulted here, so
/// scores describe the edit, not a judge.
pub struct Scorer<'a> {
    pub model: &'a AcceptabilityModel,
    pub lm: &'a LmBundle,
    pub stats: &'a OffsetStats,
    pub cfg: &'a FeatureConfig,
}

impl<'a> Scorer<'a> {
    pub fn new(
        model: &'a AcceptabilityModel,
        lm: &'a LmBundle,
        stats: &'a OffsetStats,
        cfg: &'a FeatureConfig,
    ) -> Scorer<'a> {
        Scorer {
            model,
            lm,
            stats,
            cfg,
        }
    }

    /// Endorsement probability of a single edit, worker feature excluded.
    pub fn predict_edit(&self, tree: &DepTree, edit: &PruneEdit) -> Result<f64> {
        let v = extract(tree, edit, None, self.lm, self.stats, self.cfg)?;
        Ok(self.model.predict(&v))
    }

    /// Score a sequential prune chain.
    ///
    /// Edit i must start from edit i−1's kept state (edit 0 from the full
    /// sentence) and remove exactly the descendant closure of its vertex;
    /// anything else is an invalid chain. Per-edit features are computed
    /// against the intermediate state, so positional predicates see the
    /// compression as it stood before that edit.
    pub fn score_chain(&self, tree: &DepTree, chain: &[PruneEdit]) -> Result<ChainScore> {
        let mut state: BTreeSet<usize> = tree.all_indices();
        let mut per_edit_logp = Vec::with_capacity(chain.len());
        for (i, edit) in chain.iter().enumerate() {
            let expect_before: Vec<usize> = state.iter().copied().collect();
            if edit.before_tokens != expect_before {
                return Err(Error::InvalidChain(format!(
                    "edit {i} does not start from the previous kept state"
                )));
            }
            let recomputed = tree.prune(&state, edit.pruned_vertex).map_err(|e| {
                Error::InvalidChain(format!("edit {i}: {e}"))
            })?;
            if recomputed.removed != edit.removed {
                return Err(Error::InvalidChain(format!(
                    "edit {i} removes a set that is not the descendant closure of vertex {}",
                    edit.pruned_vertex
                )));
            }
            let p = self.predict_edit(tree, edit)?;
            per_edit_logp.push(p.ln());
            state = edit.after_tokens.iter().copied().collect();
        }
        let a_sum: f64 = per_edit_logp.iter().sum();
        let a_min = per_edit_logp.iter().copied().fold(0.0f64, f64::min);
        let a_m = -(chain.len() as f64);
        let final_text = tree.linearize(&state);
        let a_lm = self.lm.norm_lp_text(&final_text)?;
        Ok(ChainScore {
            per_edit_logp,
            a_sum,
            a_min,
            a_m,
            a_lm,
        })
    }
}

/// NormLP acceptability of a compression's text alone.
pub fn a_lm(compression_text: &str, lm: &LmBundle) -> Result<f64> {
    lm.norm_lp_text(compression_text)
}

/// A lookup-backed acceptability function for scores computed offline by an
/// external predictor. Usable anywhere an acceptability score is.
#[derive(Debug, Clone)]
pub struct ExternalScorer {
    name: String,
    scores: HashMap<String, f64>,
}

impl ExternalScorer {
    pub fn new(name: impl Into<String>, scores: HashMap<String, f64>) -> ExternalScorer {
        ExternalScorer {
            name: name.into(),
            scores,
        }
    }

    /// Read a JSON object mapping compression ids to scores.
    pub fn from_json<R: BufRead>(name: impl Into<String>, r: R) -> Result<ExternalScorer> {
        let scores: HashMap<String, f64> = serde_json::from_reader(r)?;
        Ok(ExternalScorer::new(name, scores))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, compression_id: &str) -> Result<f64> {
        self.scores
            .get(compression_id)
            .copied()
            .ok_or_else(|| Error::Lookup(compression_id.to_string()))
    }
}

/// JSON-lines row for emitted chain scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainScoreRow {
    pub pair_id: String,
    pub m: usize,
    pub per_edit_logp: Vec<f64>,
    pub a_sum: f64,
    pub a_min: f64,
    pub a_m: f64,
    pub a_lm: f64,
}

impl ChainScoreRow {
    pub fn new(pair_id: impl Into<String>, score: &ChainScore) -> ChainScoreRow {
        ChainScoreRow {
            pair_id: pair_id.into(),
            m: score.per_edit_logp.len(),
            per_edit_logp: score.per_edit_logp.clone(),
            a_sum: score.a_sum,
            a_min: score.a_min,
            a_m: score.a_m,
            a_lm: score.a_lm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colloc::build_offset_stats;
    use crate::deptree::Token;
    use crate::lm::train_ngram;
    use crate::model::AcceptabilityModel;
    use std::collections::BTreeMap;

    fn tree(rows: &[(&str, usize, &str)]) -> DepTree {
        let tokens = rows
            .iter()
            .enumerate()
            .map(|(i, (form, head, deprel))| Token {
                index: i + 1,
                form: form.to_string(),
                head: *head,
                deprel: deprel.to_string(),
            })
            .collect();
        DepTree::new("a", tokens).unwrap()
    }

    fn fixture() -> (LmBundle, OffsetStats, FeatureConfig) {
        let corpus: Vec<Vec<String>> = [
            "he ran home quickly today",
            "she ran home today",
            "he slept early",
        ]
        .iter()
        .map(|s| s.split_whitespace().map(|t| t.to_string()).collect())
        .collect();
        let lm = LmBundle::from_model(train_ngram(&corpus, 2).unwrap());
        let stats = build_offset_stats(&corpus, 4).unwrap();
        (lm, stats, FeatureConfig::default())
    }

    fn weights(pairs: &[(&str, f64)]) -> AcceptabilityModel {
        let map: BTreeMap<String, f64> =
            pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        AcceptabilityModel::from_weights(map)
    }

    #[test]
    fn empty_chain_scores_zero() {
        let t = tree(&[("ran", 0, "root"), ("quickly", 1, "advmod")]);
        let (lm, stats, cfg) = fixture();
        let model = weights(&[]);
        let scorer = Scorer::new(&model, &lm, &stats, &cfg);
        let s = scorer.score_chain(&t, &[]).unwrap();
        assert_eq!(s.a_sum, 0.0);
        assert_eq!(s.a_min, 0.0);
        assert_eq!(s.a_m, 0.0);
        assert!(s.per_edit_logp.is_empty());
        assert!(s.a_lm.is_finite());
    }

    #[test]
    fn single_edit_at_half() {
        // Empty weight map → every prediction is exactly 0.5.
        let t = tree(&[("ran", 0, "root"), ("quickly", 1, "advmod")]);
        let (lm, stats, cfg) = fixture();
        let model = weights(&[]);
        let scorer = Scorer::new(&model, &lm, &stats, &cfg);
        let edit = t.prune(&t.all_indices(), 2).unwrap();
        let s = scorer.score_chain(&t, &[edit]).unwrap();
        assert!((s.a_sum - 0.5f64.ln()).abs() < 1e-12);
        assert_eq!(s.a_sum, s.a_min);
        assert_eq!(s.a_m, -1.0);
    }

    #[test]
    fn three_edit_hand_arithmetic() {
        // Weights chosen so the three prunes predict 0.9, 0.8 and 0.5:
        // sigmoid(ln 9) = 0.9, sigmoid(ln 4) = 0.8, unseen deprel = 0.5.
        let t = tree(&[
            ("ran", 0, "root"),
            ("fast", 1, "advmod"),
            ("home", 1, "dobj"),
            ("today", 1, "nmod:tmod"),
        ]);
        let (lm, stats, cfg) = fixture();
        let model = weights(&[("dep:advmod", 9.0f64.ln()), ("dep:dobj", 4.0f64.ln())]);
        let scorer = Scorer::new(&model, &lm, &stats, &cfg);

        let mut kept = t.all_indices();
        let e1 = t.prune(&kept, 2).unwrap(); // advmod → 0.9
        kept = e1.after_tokens.iter().copied().collect();
        let e2 = t.prune(&kept, 3).unwrap(); // dobj → 0.8
        kept = e2.after_tokens.iter().copied().collect();
        let e3 = t.prune(&kept, 4).unwrap(); // unseen → 0.5
        let s = scorer.score_chain(&t, &[e1, e2, e3]).unwrap();

        assert!((s.a_sum - 0.36f64.ln()).abs() < 1e-12, "{}", s.a_sum);
        assert!((s.a_min - 0.5f64.ln()).abs() < 1e-12);
        assert_eq!(s.a_m, -3.0);
        assert_eq!(s.per_edit_logp.len(), 3);
    }

    #[test]
    fn invalid_linkage_rejected() {
        let t = tree(&[
            ("ran", 0, "root"),
            ("fast", 1, "advmod"),
            ("home", 1, "dobj"),
        ]);
        let (lm, stats, cfg) = fixture();
        let model = weights(&[]);
        let scorer = Scorer::new(&model, &lm, &stats, &cfg);
        let kept = t.all_indices();
        let e1 = t.prune(&kept, 2).unwrap();
        // Reusing e1 twice: the second copy no longer starts from the
        // current state.
        let err = scorer.score_chain(&t, &[e1.clone(), e1]).unwrap_err();
        assert!(matches!(err, Error::InvalidChain(_)));
    }

    #[test]
    fn chain_algebra_on_random_chains() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xACCE);
        let (lm, stats, cfg) = fixture();
        let model = weights(&[
            ("dep:advmod", 1.2),
            ("dep:dobj", -0.7),
            ("dep:det", 0.3),
            ("lm:s_minus_c_pos", 0.4),
            ("edit:removes_end", -0.2),
        ]);
        let scorer = Scorer::new(&model, &lm, &stats, &cfg);
        for _ in 0..1000 {
            let n = rng.random_range(2..9usize);
            let deprels = ["advmod", "dobj", "det", "nmod"];
            let tokens: Vec<Token> = (1..=n)
                .map(|i| Token {
                    index: i,
                    form: format!("w{i}"),
                    head: if i == 1 { 0 } else { rng.random_range(1..i) },
                    deprel: deprels[rng.random_range(0..deprels.len())].to_string(),
                })
                .collect();
            let t = DepTree::new("r", tokens).unwrap();
            let mut kept = t.all_indices();
            let mut chain = Vec::new();
            while kept.len() > 1 && rng.random_bool(0.7) {
                let candidates: Vec<usize> =
                    kept.iter().copied().filter(|&v| v != t.root()).collect();
                if candidates.is_empty() {
                    break;
                }
                let v = candidates[rng.random_range(0..candidates.len())];
                let edit = t.prune(&kept, v).unwrap();
                kept = edit.after_tokens.iter().copied().collect();
                chain.push(edit);
            }
            let mut prev_a_sum = 0.0;
            for m in 0..=chain.len() {
                let s = scorer.score_chain(&t, &chain[..m]).unwrap();
                assert!(s.a_sum <= s.a_min + 1e-12);
                assert!(s.a_min <= 0.0);
                assert_eq!(s.a_m, -(m as f64));
                if m == 1 {
                    assert_eq!(s.a_sum, s.a_min);
                }
                // Extending the chain never increases a_sum.
                assert!(s.a_sum <= prev_a_sum + 1e-12);
                prev_a_sum = s.a_sum;
            }
        }
    }

    #[test]
    fn external_scorer_lookup() {
        let json = r#"{"c1": 0.9, "c2": 0.4}"#;
        let ext = ExternalScorer::from_json("offline", json.as_bytes()).unwrap();
        assert_eq!(ext.score("c1").unwrap(), 0.9);
        assert!(matches!(ext.score("c3").unwrap_err(), Error::Lookup(_)));
        assert_eq!(ext.len(), 2);
    }

    #[test]
    fn external_scores_rank_like_any_acceptability_function() {
        // Ten offline-scored compressions, half endorsed: AUC via the
        // external scorer equals the brute-force pair count.
        let mut scores = HashMap::new();
        let labels = [1u8, 1, 0, 1, 0, 0, 1, 0, 1, 0];
        let values = [0.95, 0.9, 0.85, 0.7, 0.6, 0.5, 0.45, 0.3, 0.2, 0.1];
        for (i, v) in values.iter().enumerate() {
            scores.insert(format!("c{i}"), *v);
        }
        let ext = ExternalScorer::new("offline", scores);
        let scored: Vec<(f64, bool)> = (0..10)
            .map(|i| (ext.score(&format!("c{i}")).unwrap(), labels[i] == 1))
            .collect();
        let fast = crate::metrics::roc_auc_scores(&scored).unwrap();
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for &(sp, yp) in &scored {
            for &(sn, yn) in &scored {
                if yp && !yn {
                    pairs += 1.0;
                    wins += if sp > sn {
                        1.0
                    } else if sp == sn {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        assert!((fast - wins / pairs).abs() < 1e-12);
    }
}
