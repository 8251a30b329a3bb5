//! End-to-end workflows shared by the CLI and the evaluation suites:
//! judgment records → feature vectors → trained model variants → scored
//! test sets → chain-function rankings.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::acceptability::Scorer;
use crate::colloc::OffsetStats;
use crate::corpus::{JudgmentRecord, TreeIndex};
use crate::error::{Error, Result};
use crate::features::{extract, FeatureConfig, FeatureVector};
use crate::lm::LmBundle;
use crate::metrics::ScoredJudgment;
use crate::model::{self, AcceptabilityModel};

/// Feature subsets matching the ablation rows of the intrinsic evaluation:
/// the cumulative additive ladder (LM-only, +dependencies, +worker ID) and
/// the subtractive ablations from the full model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureVariant {
    Full,
    NoDependencies,
    NoWorker,
    LmOnly,
    LmDependencies,
    LmDependenciesWorker,
}

impl FeatureVariant {
    pub const ALL: [FeatureVariant; 6] = [
        FeatureVariant::Full,
        FeatureVariant::NoDependencies,
        FeatureVariant::NoWorker,
        FeatureVariant::LmOnly,
        FeatureVariant::LmDependencies,
        FeatureVariant::LmDependenciesWorker,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            FeatureVariant::Full => "full",
            FeatureVariant::NoDependencies => "no-dependencies",
            FeatureVariant::NoWorker => "no-worker",
            FeatureVariant::LmOnly => "lm-only",
            FeatureVariant::LmDependencies => "lm-dependencies",
            FeatureVariant::LmDependenciesWorker => "lm-dependencies-worker",
        }
    }

    pub fn parse(s: &str) -> Result<FeatureVariant> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.label() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown model variant {s:?}")))
    }

    /// Whether a feature name belongs to this variant.
    pub fn keeps(&self, name: &str) -> bool {
        let group = name.split(':').next().unwrap_or("");
        match self {
            FeatureVariant::Full => true,
            // Interactions cross dependency types with edit properties, so
            // they leave with the dependencies.
            FeatureVariant::NoDependencies => group != "dep" && group != "ix",
            FeatureVariant::NoWorker => group != "worker",
            FeatureVariant::LmOnly => group == "lm",
            FeatureVariant::LmDependencies => group == "lm" || group == "dep",
            FeatureVariant::LmDependenciesWorker => {
                group == "lm" || group == "dep" || group == "worker"
            }
        }
    }

    pub fn filter(&self, v: &FeatureVector) -> FeatureVector {
        v.iter()
            .filter(|(name, _)| self.keeps(name))
            .map(|(name, value)| (name.clone(), *value))
            .collect()
    }
}

/// Extract per-judgment feature vectors for single-prune records.
/// Identical (sentence, vertex) edits are extracted once and shared.
pub fn judgment_features(
    records: &[JudgmentRecord],
    trees: &TreeIndex,
    lm: &LmBundle,
    stats: &OffsetStats,
    cfg: &FeatureConfig,
) -> Result<Vec<(String, FeatureVector, u8)>> {
    let mut cache: HashMap<(String, usize), FeatureVector> = HashMap::new();
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        let tree = trees.get(&rec.conllu_ref).ok_or_else(|| {
            Error::InvalidInput(format!("unknown conllu_ref {:?}", rec.conllu_ref))
        })?;
        let key = (
            rec.conllu_ref.clone(),
            rec.pruned_vertex.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "record {} is not single-prune; chain functions evaluate kept-set records",
                    rec.pair_id
                ))
            })?,
        );
        let base = match cache.get(&key) {
            Some(v) => v.clone(),
            None => {
                let edit = rec.derive_edit(tree)?;
                let v = extract(tree, &edit, None, lm, stats, cfg)?;
                cache.insert(key.clone(), v.clone());
                v
            }
        };
        let mut v = base;
        v.insert(format!("worker:{}", rec.worker_id), 1.0);
        out.push((rec.pair_id.clone(), v, rec.label));
    }
    Ok(out)
}

/// Train one variant: filter the feature vectors, then fit.
pub fn train_variant(
    examples: &[(String, FeatureVector, u8)],
    variant: FeatureVariant,
    c: f64,
) -> Result<AcceptabilityModel> {
    let filtered: Vec<(FeatureVector, u8)> = examples
        .iter()
        .map(|(_, v, y)| (variant.filter(v), *y))
        .collect();
    model::train(&filtered, c)
}

/// Score test records with a trained model. Worker features are part of the
/// vector; variants that exclude them simply carry no such weights.
pub fn score_judgments(
    model: &AcceptabilityModel,
    examples: &[(String, FeatureVector, u8)],
    records: &[JudgmentRecord],
) -> Vec<ScoredJudgment> {
    examples
        .iter()
        .zip(records)
        .map(|((pair_id, v, y), rec)| ScoredJudgment {
            pair_id: pair_id.clone(),
            worker_id: rec.worker_id.clone(),
            label: *y,
            probability: model.predict(v),
        })
        .collect()
}

/// Scores of the whole-compression acceptability functions on kept-set
/// records, one aligned row per judgment. Scores are exponentiated into
/// (0, 1] so they can live in the probability field; AUC only needs order.
pub struct ChainFunctionScores {
    pub a: Vec<ScoredJudgment>,
    pub a_min: Vec<ScoredJudgment>,
    pub a_m: Vec<ScoredJudgment>,
    pub a_lm: Vec<ScoredJudgment>,
}

/// Score each record's compression with the canonical chain decomposition
/// (one prune per maximal removed subtree) under all four acceptability
/// functions.
pub fn score_chain_functions(
    records: &[JudgmentRecord],
    trees: &TreeIndex,
    scorer: &Scorer,
) -> Result<ChainFunctionScores> {
    let mut cache: HashMap<String, crate::acceptability::ChainScore> = HashMap::new();
    let mut out = ChainFunctionScores {
        a: Vec::new(),
        a_min: Vec::new(),
        a_m: Vec::new(),
        a_lm: Vec::new(),
    };
    for rec in records {
        let tree = trees.get(&rec.conllu_ref).ok_or_else(|| {
            Error::InvalidInput(format!("unknown conllu_ref {:?}", rec.conllu_ref))
        })?;
        let score = match cache.get(&rec.pair_id) {
            Some(s) => s.clone(),
            None => {
                let kept = rec.effective_kept(tree)?;
                let chain = tree.chain_from_kept(&kept)?;
                let s = scorer.score_chain(tree, &chain)?;
                cache.insert(rec.pair_id.clone(), s.clone());
                s
            }
        };
        let mut push = |list: &mut Vec<ScoredJudgment>, value: f64| {
            list.push(ScoredJudgment {
                pair_id: rec.pair_id.clone(),
                worker_id: rec.worker_id.clone(),
                label: rec.label,
                probability: value.exp(),
            });
        };
        push(&mut out.a, score.a_sum);
        push(&mut out.a_min, score.a_min);
        push(&mut out.a_m, score.a_m);
        push(&mut out.a_lm, score.a_lm);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_feature_membership() {
        let names = [
            ("lm:norm_lp_c", true, true, true, true, true, true),
            ("lm:s_minus_c_pos", true, true, true, true, true, true),
            ("dep:conj", true, false, true, false, true, true),
            ("worker:w1", true, true, false, false, false, true),
            ("edit:removes_end", true, true, true, false, false, false),
            ("ix:conj:follows_punct", true, false, true, false, false, false),
        ];
        for (name, full, nodep, noworker, lm, lmdep, lmdepw) in names {
            assert_eq!(FeatureVariant::Full.keeps(name), full, "{name}");
            assert_eq!(FeatureVariant::NoDependencies.keeps(name), nodep, "{name}");
            assert_eq!(FeatureVariant::NoWorker.keeps(name), noworker, "{name}");
            assert_eq!(FeatureVariant::LmOnly.keeps(name), lm, "{name}");
            assert_eq!(FeatureVariant::LmDependencies.keeps(name), lmdep, "{name}");
            assert_eq!(
                FeatureVariant::LmDependenciesWorker.keeps(name),
                lmdepw,
                "{name}"
            );
        }
    }

    #[test]
    fn variant_labels_round_trip() {
        for v in FeatureVariant::ALL {
            assert_eq!(FeatureVariant::parse(v.label()).unwrap(), v);
        }
        assert!(FeatureVariant::parse("bogus").is_err());
    }
}
