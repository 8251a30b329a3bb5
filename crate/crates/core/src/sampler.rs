//! Multi-prune candidate generation by probability matching, deduplication
//! and constrained selection.
//!
//! Chains are sampled edit by edit: each candidate prune is drawn with
//! probability proportional to the model's endorsement prediction for it,
//! and pruning continues until the remaining text fits the character
//! budget. A pool of such chains, deduplicated by kept set, is the search
//! space for brevity/importance-constrained selection.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acceptability::{ChainScore, Scorer};
use crate::deptree::{DepTree, PruneEdit};
use crate::error::{Error, Result};
use crate::text;

/// A sampled compression with its chain, scores and bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionCandidate {
    pub kept: Vec<usize>,
    pub text: String,
    pub chain: Vec<PruneEdit>,
    pub score: ChainScore,
    pub char_length: usize,
    /// The brevity budget this chain was sampled under.
    pub budget: usize,
    /// True when pruning reached the bare root while still over budget.
    pub budget_unreachable: bool,
    /// The seed that produced this chain.
    pub seed: u64,
}

/// Maximum character length for a compression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrevityBudget {
    pub max_chars: usize,
}

impl BrevityBudget {
    pub fn new(max_chars: usize) -> Result<BrevityBudget> {
        if max_chars == 0 {
            return Err(Error::InvalidInput("budget must be at least 1".into()));
        }
        Ok(BrevityBudget { max_chars })
    }
}

/// Query terms a compression must mention to count as important.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportanceQuery {
    pub terms: Vec<String>,
}

impl ImportanceQuery {
    pub fn new(terms: Vec<String>) -> Result<ImportanceQuery> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("importance query has no terms".into()));
        }
        Ok(ImportanceQuery { terms })
    }
}

/// 1 iff any query term matches a kept token of the candidate,
/// case-insensitive exact form match.
pub fn importance(tree: &DepTree, candidate: &CompressionCandidate, query: &ImportanceQuery) -> u8 {
    let kept_forms: Vec<String> = candidate
        .kept
        .iter()
        .map(|&v| tree.token(v).form.to_lowercase())
        .collect();
    let hit = query
        .terms
        .iter()
        .any(|t| kept_forms.iter().any(|f| f == &t.to_lowercase()));
    u8::from(hit)
}

/// One entry per non-root kept vertex with the model's endorsement
/// probability for pruning it. The empty list means only the root is left.
pub fn candidate_edits(
    scorer: &Scorer,
    tree: &DepTree,
    kept: &BTreeSet<usize>,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(kept.len().saturating_sub(1));
    for &v in kept {
        if v == tree.root() {
            continue;
        }
        let edit = tree.prune(kept, v)?;
        out.push((v, scorer.predict_edit(tree, &edit)?));
    }
    Ok(out)
}

/// Sample one chain under a brevity budget, deterministically from `seed`.
///
/// While the current text is at or over the budget, draw a candidate vertex
/// v with probability p_v / Σp and apply the prune. A source already under
/// budget returns the identity candidate. If pruning exhausts every vertex
/// but the root while still over budget, the partial candidate comes back
/// inside [`Error::BudgetUnreachable`].
pub fn sample_chain(
    scorer: &Scorer,
    tree: &DepTree,
    budget: BrevityBudget,
    seed: u64,
) -> Result<CompressionCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = tree.all_indices();
    let mut chain: Vec<PruneEdit> = Vec::new();

    loop {
        let current = tree.linearize(&kept);
        if text::char_len(&current) < budget.max_chars {
            let score = scorer.score_chain(tree, &chain)?;
            return Ok(CompressionCandidate {
                kept: kept.iter().copied().collect(),
                char_length: text::char_len(&current),
                text: current,
                chain,
                score,
                budget: budget.max_chars,
                budget_unreachable: false,
                seed,
            });
        }
        let candidates = candidate_edits(scorer, tree, &kept)?;
        if candidates.is_empty() {
            let score = scorer.score_chain(tree, &chain)?;
            let partial = CompressionCandidate {
                kept: kept.iter().copied().collect(),
                char_length: text::char_len(&current),
                text: current,
                chain,
                score,
                budget: budget.max_chars,
                budget_unreachable: true,
                seed,
            };
            return Err(Error::BudgetUnreachable {
                partial: Box::new(partial),
            });
        }
        let z: f64 = candidates.iter().map(|(_, p)| p).sum();
        let mut draw = rng.random::<f64>() * z;
        let mut chosen = candidates[candidates.len() - 1].0;
        for &(v, p) in &candidates {
            draw -= p;
            if draw <= 0.0 {
                chosen = v;
                break;
            }
        }
        let edit = tree.prune(&kept, chosen)?;
        kept = edit.after_tokens.iter().copied().collect();
        chain.push(edit);
    }
}

/// Draw `n_samples` independent chains, each under a budget uniform in
/// `budget_range` (inclusive). Chains that bottom out over budget are kept,
/// flagged, rather than discarded.
pub fn generate_pool(
    scorer: &Scorer,
    tree: &DepTree,
    n_samples: usize,
    budget_range: (usize, usize),
    master_seed: u64,
) -> Result<Vec<CompressionCandidate>> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    let (lo, hi) = budget_range;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidInput(format!(
            "bad budget range [{lo}, {hi}]"
        )));
    }
    let mut meta_rng = ChaCha8Rng::seed_from_u64(master_seed);
    let mut pool = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let budget = BrevityBudget::new(meta_rng.random_range(lo..=hi))?;
        let chain_seed: u64 = meta_rng.random();
        match sample_chain(scorer, tree, budget, chain_seed) {
            Ok(c) => pool.push(c),
            Err(Error::BudgetUnreachable { partial }) => pool.push(*partial),
            Err(e) => return Err(e),
        }
    }
    Ok(pool)
}

/// Collapse the pool to one candidate per distinct kept set.
///
/// Chains that repeat an identical operation sequence are duplicates and
/// dropped first; among different chains reaching the same kept set, the one
/// with the highest `a_sum` survives — the best available path to that
/// shortening. Input order of first appearance is preserved.
pub fn dedup(pool: &[CompressionCandidate]) -> Vec<CompressionCandidate> {
    let mut seen_chains: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut by_kept: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut out: Vec<CompressionCandidate> = Vec::new();
    for cand in pool {
        let op_seq: Vec<usize> = cand.chain.iter().map(|e| e.pruned_vertex).collect();
        if !seen_chains.insert(op_seq) {
            continue; // exact-duplicate operation sequence
        }
        match by_kept.get(&cand.kept) {
            Some(&i) => {
                if cand.score.a_sum > out[i].score.a_sum {
                    out[i] = cand.clone();
                }
            }
            None => {
                by_kept.insert(cand.kept.clone(), out.len());
                out.push(cand.clone());
            }
        }
    }
    out
}

/// Best feasible candidate: within budget, mentioning the query (when one
/// is given), maximal `a_sum`; ties break to the shorter text, then
/// lexicographically.
pub fn select<'a>(
    tree: &DepTree,
    pool: &'a [CompressionCandidate],
    budget: BrevityBudget,
    query: Option<&ImportanceQuery>,
) -> Result<&'a CompressionCandidate> {
    let mut best: Option<&CompressionCandidate> = None;
    for cand in pool {
        if cand.char_length > budget.max_chars {
            continue;
        }
        if let Some(q) = query {
            if importance(tree, cand, q) == 0 {
                continue;
            }
        }
        best = Some(match best {
            None => cand,
            Some(cur) => {
                let better = cand.score.a_sum > cur.score.a_sum
                    || (cand.score.a_sum == cur.score.a_sum
                        && (cand.char_length < cur.char_length
                            || (cand.char_length == cur.char_length && cand.text < cur.text)));
                if better {
                    cand
                } else {
                    cur
                }
            }
        });
    }
    best.ok_or(Error::NoFeasibleCandidate)
}

/// Scatter-plot rows for a pool: char_length, a_sum, importance. With no
/// query every candidate counts as important.
pub fn write_scatter_csv<W: Write>(
    mut w: W,
    tree: &DepTree,
    pool: &[CompressionCandidate],
    query: Option<&ImportanceQuery>,
) -> Result<()> {
    writeln!(w, "char_length,a_sum,importance")?;
    for cand in pool {
        let imp = match query {
            Some(q) => importance(tree, cand, q),
            None => 1,
        };
        writeln!(w, "{},{},{}", cand.char_length, cand.score.a_sum, imp)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colloc::build_offset_stats;
    use crate::colloc::OffsetStats;
    use crate::deptree::Token;
    use crate::features::FeatureConfig;
    use crate::lm::{train_ngram, LmBundle};
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
        DepTree::new("s", tokens).unwrap()
    }

    fn fixture() -> (LmBundle, OffsetStats, FeatureConfig) {
        let corpus: Vec<Vec<String>> = [
            "the launch went well today",
            "he ran a long search",
            "she slept early again",
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

    /// Two non-root leaves whose deprel weights pin the predictions to
    /// exactly 0.6 and 0.2: sigmoid(ln 1.5) and sigmoid(ln 0.25).
    fn two_candidate_tree_and_model() -> (DepTree, AcceptabilityModel) {
        let t = tree(&[
            ("considerations", 0, "root"),
            ("lengthy", 1, "amod"),
            ("elsewhere", 1, "advmod"),
        ]);
        let m = weights(&[("dep:amod", 1.5f64.ln()), ("dep:advmod", 0.25f64.ln())]);
        (t, m)
    }

    #[test]
    fn candidate_probabilities_and_normalization() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let cands = candidate_edits(&scorer, &t, &t.all_indices()).unwrap();
        assert_eq!(cands.len(), 2);
        let p: HashMap<usize, f64> = cands.iter().copied().collect();
        assert!((p[&2] - 0.6).abs() < 1e-12);
        assert!((p[&3] - 0.2).abs() < 1e-12);
        let z: f64 = p.values().sum();
        assert!((p[&2] / z - 0.75).abs() < 1e-12);
        assert!((p[&3] / z - 0.25).abs() < 1e-12);
    }

    #[test]
    fn root_only_kept_yields_no_candidates() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let kept = BTreeSet::from([1]);
        assert!(candidate_edits(&scorer, &t, &kept).unwrap().is_empty());
    }

    #[test]
    fn per_vertex_probabilities_match_brute_force() {
        let t = tree(&[
            ("reported", 0, "root"),
            ("officials", 1, "nsubj"),
            ("the", 4, "det"),
            ("findings", 1, "dobj"),
            ("quietly", 1, "advmod"),
            ("today", 1, "nmod:tmod"),
        ]);
        let m = weights(&[
            ("dep:nsubj", -1.0),
            ("dep:det", 0.2),
            ("dep:dobj", -0.4),
            ("dep:advmod", 1.1),
            ("dep:nmod:tmod", 0.9),
        ]);
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let kept = t.all_indices();
        let cands = candidate_edits(&scorer, &t, &kept).unwrap();
        assert_eq!(cands.len(), 5);
        for (v, p) in cands {
            let edit = t.prune(&kept, v).unwrap();
            let direct = scorer.predict_edit(&t, &edit).unwrap();
            assert_eq!(p, direct);
        }
    }

    #[test]
    fn identity_when_source_fits_budget() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let budget = BrevityBudget::new(10_000).unwrap();
        let c = sample_chain(&scorer, &t, budget, 1).unwrap();
        assert!(c.chain.is_empty());
        assert_eq!(c.text, t.text());
        assert_eq!(c.score.a_sum, 0.0);
    }

    #[test]
    fn fixed_seed_reproduces_candidates_byte_for_byte() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let budget = BrevityBudget::new(16).unwrap();
        let a = sample_chain(&scorer, &t, budget, 42).unwrap();
        let b = sample_chain(&scorer, &t, budget, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let pa = generate_pool(&scorer, &t, 20, (10, 20), 7).unwrap();
        let pb = generate_pool(&scorer, &t, 20, (10, 20), 7).unwrap();
        assert_eq!(
            serde_json::to_string(&pa).unwrap(),
            serde_json::to_string(&pb).unwrap()
        );
    }

    #[test]
    fn first_edit_frequencies_match_probability_matching() {
        // 10,000 seeded draws on the 2-candidate tree with p = (0.6, 0.2):
        // expected selection frequencies (0.75, 0.25). Chi-square test with
        // 1 degree of freedom at the 99% level (critical value 6.635).
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let budget = BrevityBudget::new(1).unwrap(); // force at least one edit
        let mut counts = [0u64, 0u64];
        for seed in 0..10_000u64 {
            match sample_chain(&scorer, &t, budget, seed) {
                Ok(c) => {
                    let first = c.chain[0].pruned_vertex;
                    counts[(first == 3) as usize] += 1;
                }
                Err(Error::BudgetUnreachable { partial }) => {
                    let first = partial.chain[0].pruned_vertex;
                    counts[(first == 3) as usize] += 1;
                }
                Err(e) => panic!("{e}"),
            }
        }
        let n = (counts[0] + counts[1]) as f64;
        assert_eq!(n, 10_000.0);
        let expect = [0.75 * n, 0.25 * n];
        let chi2: f64 = (0..2)
            .map(|i| (counts[i] as f64 - expect[i]).powi(2) / expect[i])
            .sum();
        assert!(chi2 < 6.634896601, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn stopping_rule_and_head_closure_invariants() {
        let t = tree(&[
            ("announced", 0, "root"),
            ("ministers", 1, "nsubj"),
            ("several", 2, "amod"),
            ("plans", 1, "dobj"),
            ("new", 4, "amod"),
            ("for", 7, "case"),
            ("talks", 4, "nmod"),
            ("tomorrow", 1, "nmod:tmod"),
        ]);
        let m = weights(&[("dep:amod", 0.5), ("dep:nmod", 0.2)]);
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        for seed in 0..200u64 {
            let budget = BrevityBudget::new(20 + (seed % 30) as usize).unwrap();
            let cand = match sample_chain(&scorer, &t, budget, seed) {
                Ok(c) => c,
                Err(Error::BudgetUnreachable { partial }) => *partial,
                Err(e) => panic!("{e}"),
            };
            let kept: BTreeSet<usize> = cand.kept.iter().copied().collect();
            assert!(t.reachable_by_prunes(&kept));
            assert_eq!(cand.char_length, text::char_len(&cand.text));
            if !cand.budget_unreachable {
                assert!(cand.char_length < cand.budget);
                if let Some(last) = cand.chain.last() {
                    // State before the final edit was still over budget.
                    let before: BTreeSet<usize> =
                        last.before_tokens.iter().copied().collect();
                    let before_len = text::char_len(&t.linearize(&before));
                    assert!(before_len >= cand.budget);
                }
            }
        }
    }

    #[test]
    fn budget_unreachable_carries_partial() {
        let t = tree(&[("prediction", 0, "root"), ("bold", 1, "amod")]);
        let m = weights(&[]);
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let budget = BrevityBudget::new(3).unwrap(); // "prediction" has 10 chars
        match sample_chain(&scorer, &t, budget, 0).unwrap_err() {
            Error::BudgetUnreachable { partial } => {
                assert!(partial.budget_unreachable);
                assert_eq!(partial.kept, vec![1]);
                assert!(partial.char_length >= 3);
            }
            other => panic!("expected budget-unreachable, got {other}"),
        }
    }

    #[test]
    fn dedup_keeps_best_path_and_preserves_distinct() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let pool = generate_pool(&scorer, &t, 60, (5, 30), 99).unwrap();
        let deduped = dedup(&pool);
        // Pairwise-distinct kept sets, subset of input.
        let mut seen = BTreeSet::new();
        for c in &deduped {
            assert!(seen.insert(c.kept.clone()));
            assert!(pool.iter().any(|p| p.kept == c.kept));
        }
        // Brute force group-by-kept + max a_sum, over chain-deduped input.
        let mut seen_chains = BTreeSet::new();
        let mut best: HashMap<Vec<usize>, f64> = HashMap::new();
        for c in &pool {
            let ops: Vec<usize> = c.chain.iter().map(|e| e.pruned_vertex).collect();
            if !seen_chains.insert(ops) {
                continue;
            }
            let e = best.entry(c.kept.clone()).or_insert(f64::NEG_INFINITY);
            if c.score.a_sum > *e {
                *e = c.score.a_sum;
            }
        }
        assert_eq!(deduped.len(), best.len());
        for c in &deduped {
            assert_eq!(c.score.a_sum, best[&c.kept]);
        }

        // An all-distinct pool passes through unchanged.
        let distinct = dedup(&deduped);
        assert_eq!(distinct, deduped);
    }

    #[test]
    fn dedup_stated_rule() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        // Build two different chains reaching the same kept set {1}:
        // prune 2 then 3, and prune 3 then 2.
        let mk = |first: usize, second: usize| {
            let mut kept = t.all_indices();
            let e1 = t.prune(&kept, first).unwrap();
            kept = e1.after_tokens.iter().copied().collect();
            let e2 = t.prune(&kept, second).unwrap();
            kept = e2.after_tokens.iter().copied().collect();
            let chain = vec![e1, e2];
            let score = scorer.score_chain(&t, &chain).unwrap();
            CompressionCandidate {
                kept: kept.iter().copied().collect(),
                text: t.linearize(&kept),
                char_length: text::char_len(&t.linearize(&kept)),
                chain,
                score,
                budget: 1,
                budget_unreachable: false,
                seed: 0,
            }
        };
        let a = mk(2, 3);
        let b = mk(3, 2);
        let keep_a = a.score.a_sum >= b.score.a_sum;
        let deduped = dedup(&[a.clone(), b.clone()]);
        assert_eq!(deduped.len(), 1);
        assert_eq!(
            deduped[0].score.a_sum,
            if keep_a { a.score.a_sum } else { b.score.a_sum }
        );
    }

    #[test]
    fn select_identity_when_budget_is_loose() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let pool = dedup(&generate_pool(&scorer, &t, 40, (1, 200), 5).unwrap());
        let budget = BrevityBudget::new(10_000).unwrap();
        let best = select(&t, &pool, budget, None).unwrap();
        assert!(best.chain.is_empty(), "identity a_sum = 0 should win");
    }

    #[test]
    fn select_respects_constraints_and_matches_brute_force() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let pool = dedup(&generate_pool(&scorer, &t, 50, (1, 200), 13).unwrap());
        let budget = BrevityBudget::new(25).unwrap();
        let got = select(&t, &pool, budget, None).unwrap();
        let feasible: Vec<&CompressionCandidate> = pool
            .iter()
            .filter(|c| c.char_length <= budget.max_chars)
            .collect();
        let brute = feasible
            .iter()
            .max_by(|a, b| {
                a.score
                    .a_sum
                    .partial_cmp(&b.score.a_sum)
                    .unwrap()
                    .then(b.char_length.cmp(&a.char_length))
                    .then(b.text.cmp(&a.text))
            })
            .unwrap();
        assert_eq!(got.kept, brute.kept);

        // Query nothing matches → no feasible candidate.
        let q = ImportanceQuery::new(vec!["zanzibar".into()]).unwrap();
        assert!(matches!(
            select(&t, &pool, budget, Some(&q)).unwrap_err(),
            Error::NoFeasibleCandidate
        ));
    }

    #[test]
    fn importance_matching() {
        let t = tree(&[
            ("Pakistan", 2, "nsubj"),
            ("launched", 0, "root"),
            ("search", 2, "dobj"),
            ("Tuesday", 2, "nmod:tmod"),
        ]);
        let cand = CompressionCandidate {
            kept: vec![1, 2, 3, 4],
            text: t.text().to_string(),
            chain: vec![],
            score: ChainScore {
                per_edit_logp: vec![],
                a_sum: 0.0,
                a_min: 0.0,
                a_m: 0.0,
                a_lm: -1.0,
            },
            char_length: text::char_len(t.text()),
            budget: 100,
            budget_unreachable: false,
            seed: 0,
        };
        let afghanistan = ImportanceQuery::new(vec!["Afghanistan".into()]).unwrap();
        assert_eq!(importance(&t, &cand, &afghanistan), 0);
        let case_insensitive = ImportanceQuery::new(vec!["pakistan".into()]).unwrap();
        assert_eq!(importance(&t, &cand, &case_insensitive), 1);
        let multi =
            ImportanceQuery::new(vec!["zanzibar".into(), "tuesday".into()]).unwrap();
        assert_eq!(importance(&t, &cand, &multi), 1);
    }

    #[test]
    fn scatter_csv_shape() {
        let (t, m) = two_candidate_tree_and_model();
        let (lm, stats, cfg) = fixture();
        let scorer = Scorer::new(&m, &lm, &stats, &cfg);
        let pool = generate_pool(&scorer, &t, 5, (5, 40), 3).unwrap();
        let mut buf = Vec::new();
        write_scatter_csv(&mut buf, &t, &pool, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "char_length,a_sum,importance");
        assert_eq!(lines.len(), 6);
    }
}
