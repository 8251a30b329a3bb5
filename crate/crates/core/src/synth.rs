//! Deterministic synthetic judgment releases.
//!
//! Everything the pipeline consumes — parsed sentences, single-prune
//! judgments from a pool of simulated workers, a multi-prune evaluation set,
//! gold compression pairs and a language-model corpus — can be generated
//! from a seed, at the scale of the real crowdsourced dataset. Workers are
//! simulated with a latent acceptability model: every edit has a latent
//! score built from its dependency type, positional properties, collocation
//! breaks and the fluency change it causes; each worker applies their own
//! endorsement threshold to it and answers with Bernoulli noise.
//!
//! None of the observables (agreement, per-dependency endorsement rates,
//! model AUC orderings) are ever written into the data; they emerge from
//! the latent process and are recovered by the evaluation code.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::acceptability::Scorer;
use crate::colloc::OffsetStats;
use crate::corpus::{GoldPair, JudgmentRecord, Split};
use crate::deptree::{DepTree, PruneEdit, Token};
use crate::error::{Error, Result};
use crate::lm::LmBundle;
use crate::sampler;
use crate::text;

// ---------------------------------------------------------------------------
// Parameters

/// Generation parameters. The defaults are calibrated so that the released
/// statistics of the simulated corpus land near the reference values used in
/// the acceptance suite.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub train_judgments: usize,
    pub test_judgments: usize,
    /// Fraction of pairs with a single rater.
    pub single_rater_fraction: f64,
    /// Distribution over rater counts for multi-rater pairs.
    pub multi_rater_weights: Vec<(usize, f64)>,
    pub n_workers: usize,
    /// Spread of worker endorsement thresholds.
    pub worker_threshold_sd: f64,
    /// How much stricter high-volume workers are.
    pub worker_strictness_by_volume: f64,
    /// Latent per-pair noise (item ambiguity).
    pub item_noise_sd: f64,
    /// Shrinkage on the dependency-type contribution; the rest of each
    /// type's effect is carried by correlated fluency/edit-property channels.
    pub dep_weight: f64,
    /// Weight of the standardized fluency change in the latent score.
    pub lm_effect: f64,
    pub prop_removes_start: f64,
    pub prop_removes_end: f64,
    pub prop_follows_punct: f64,
    pub prop_breaks_collocation: f64,
    /// Rejection-sampling strength pushing test pairs toward ambiguity.
    pub test_ambiguity_bias: f64,
    pub lm_sentences: usize,
    pub multi_sentences: usize,
    pub multi_judgments: usize,
    /// Scale on the summed per-edit latents for whole-compression judging.
    pub multi_latent_scale: f64,
    pub multi_item_noise_sd: f64,
    pub multi_budget: (usize, usize),
    pub gold_pairs: usize,
    /// Fraction of gold compressions built by actual prunes.
    pub gold_prune_fraction: f64,
    /// Fraction keeping an orphan token (not head-closed).
    pub gold_headbreak_fraction: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            train_judgments: 6010,
            test_judgments: 640,
            single_rater_fraction: 0.732,
            multi_rater_weights: vec![(2, 0.80), (3, 0.15), (4, 0.05)],
            n_workers: 330,
            worker_threshold_sd: 1.3,
            worker_strictness_by_volume: 0.36,
            item_noise_sd: 0.78,
            dep_weight: 0.8,
            lm_effect: 0.9,
            prop_removes_start: -1.1,
            prop_removes_end: 0.3,
            prop_follows_punct: 1.0,
            prop_breaks_collocation: -1.6,
            test_ambiguity_bias: 0.03,
            lm_sentences: 6000,
            multi_sentences: 958,
            multi_judgments: 2388,
            multi_latent_scale: 1.5,
            multi_item_noise_sd: 0.8,
            multi_budget: (50, 100),
            gold_pairs: 1000,
            gold_prune_fraction: 0.905,
            gold_headbreak_fraction: 0.065,
        }
    }
}

/// Latent endorsement rate targets per dependency type, before threshold and
/// noise spread. Tuned inputs, not assertions.
const DEP_RATES: &[(&str, f64)] = &[
    ("mwe", 0.50),
    ("cop", 0.22),
    ("cc:preconj", 0.85),
    ("nmod:tmod", 0.92),
    ("nsubj", 0.17),
    ("dobj", 0.20),
    ("det", 0.28),
    ("case", 0.24),
    ("aux", 0.25),
    ("neg", 0.18),
    ("mark", 0.26),
    ("cc", 0.26),
    ("conj", 0.38),
    ("amod", 0.46),
    ("advmod", 0.56),
    ("nmod", 0.46),
    ("nmod:poss", 0.32),
    ("acl:relcl", 0.44),
    ("advcl", 0.50),
    ("appos", 0.52),
    ("nummod", 0.40),
    ("compound", 0.30),
    ("punct", 0.34),
];

const DEFAULT_DEP_RATE: f64 = 0.30;

// ---------------------------------------------------------------------------
// Vocabulary

const PROPER: &[&str] = &[
    "Pakistan", "Afghanistan", "Washington", "Moscow", "Beijing", "Delhi", "London", "Paris",
    "Berlin", "Tokyo", "Cairo", "Tehran", "Baghdad", "Kabul", "Nairobi", "Madrid", "Rome",
    "Vienna", "Geneva", "Brussels", "Oslo", "Dublin", "Athens", "Warsaw", "Lisbon",
];

const NOUN: &[&str] = &[
    "government", "police", "company", "market", "president", "minister", "report", "search",
    "attack", "area", "city", "plan", "talks", "deal", "election", "court", "leader", "forces",
    "group", "border", "economy", "parliament", "spokesman", "agency", "committee", "crisis",
    "decision", "statement", "strike", "protest", "budget", "summit", "treaty", "inquiry",
    "campaign", "mission", "project", "program", "survey", "airline", "factory", "union",
    "bank", "region", "village", "capital", "conflict", "dispute", "agreement", "proposal",
    "ambassador", "officials", "witnesses", "investors", "residents",
];

const VERB_TRANS: &[&str] = &[
    "launched", "announced", "rejected", "approved", "released", "reported", "confirmed",
    "denied", "criticized", "visited", "signed", "won", "suspended", "held", "opened",
    "closed", "backed", "blocked", "praised", "reviewed",
];

const VERB_INTRANS: &[&str] = &[
    "disappeared", "arrived", "collapsed", "resigned", "spoke", "fell", "rose", "protested",
    "voted", "marched",
];

const ADJ: &[&str] = &[
    "new", "missing", "former", "senior", "local", "national", "foreign", "economic",
    "political", "military", "recent", "major", "top", "key", "brief", "joint", "rural",
    "urban", "financial", "regional",
];

const TEMPORAL: &[&str] = &[
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday", "yesterday",
    "today", "tomorrow",
];

const ADV: &[&str] = &[
    "quickly", "sharply", "strongly", "officially", "immediately", "again", "still", "also",
    "publicly", "quietly",
];

const PREP: &[&str] = &["in", "on", "for", "with", "at", "from", "over", "near", "against", "during"];
const DET: &[&str] = &["the", "a"];
const POSS: &[&str] = &["its", "their", "his", "her"];
const CC: &[&str] = &["and", "or", "but"];
const MARK: &[&str] = &["after", "when", "while", "because"];
const PRECONJ: &[&str] = &["both", "either"];
const NUM: &[&str] = &["two", "three", "four", "several", "ten"];
const COPULA: &[&str] = &["is", "was", "are", "were"];
const AUX: &[&str] = &["will", "has", "had", "would"];
const MWE_PREP: &[&str] = &["because of", "instead of", "due to", "according to"];

fn pb(rng: &mut ChaCha8Rng, p: f64, style: f64) -> bool {
    rng.random_bool((p * style).min(0.92))
}

fn zipf_pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    let r: f64 = rng.random();
    let idx = ((words.len() as f64) * r * r) as usize;
    words[idx.min(words.len() - 1)]
}

// ---------------------------------------------------------------------------
// Sentence generation

struct Builder {
    forms: Vec<String>,
    deprels: Vec<String>,
    parents: Vec<Option<usize>>, // slot of the head
}

impl Builder {
    fn new() -> Builder {
        Builder {
            forms: Vec::new(),
            deprels: Vec::new(),
            parents: Vec::new(),
        }
    }

    fn push(&mut self, form: &str, deprel: &str) -> usize {
        self.forms.push(form.to_string());
        self.deprels.push(deprel.to_string());
        self.parents.push(None);
        self.forms.len() - 1
    }

    fn attach(&mut self, child: usize, parent: usize) {
        self.parents[child] = Some(parent);
    }

    fn build(self, id: &str) -> Result<DepTree> {
        let tokens = (0..self.forms.len())
            .map(|i| Token {
                index: i + 1,
                form: self.forms[i].clone(),
                head: self.parents[i].map(|p| p + 1).unwrap_or(0),
                deprel: self.deprels[i].clone(),
            })
            .collect();
        DepTree::new(id, tokens)
    }
}

/// Emit a noun phrase; returns the head slot.
fn gen_np(b: &mut Builder, rng: &mut ChaCha8Rng, depth: usize, style: f64) -> usize {
    let proper = rng.random_bool(0.22);
    let mut pre: Vec<(usize, ())> = Vec::new();

    let preconj = (!proper && depth <= 1 && rng.random_bool(0.07))
        .then(|| b.push(zipf_pick(rng, PRECONJ), "cc:preconj"));

    if !proper {
        if rng.random_bool(0.08) {
            pre.push((b.push(zipf_pick(rng, NUM), "nummod"), ()));
        } else if rng.random_bool(0.12) {
            pre.push((b.push(zipf_pick(rng, POSS), "nmod:poss"), ()));
        } else if rng.random_bool(0.80) {
            pre.push((b.push(zipf_pick(rng, DET), "det"), ()));
        }
        if rng.random_bool(0.42) {
            pre.push((b.push(zipf_pick(rng, ADJ), "amod"), ()));
            if rng.random_bool(0.12) {
                pre.push((b.push(zipf_pick(rng, ADJ), "amod"), ()));
            }
        }
        if rng.random_bool(0.14) {
            let w = if rng.random_bool(0.5) {
                zipf_pick(rng, PROPER)
            } else {
                zipf_pick(rng, NOUN)
            };
            pre.push((b.push(w, "compound"), ()));
        }
    }

    let head = if proper {
        b.push(zipf_pick(rng, PROPER), "noun_head")
    } else {
        b.push(zipf_pick(rng, NOUN), "noun_head")
    };
    for (slot, _) in pre {
        b.attach(slot, head);
    }
    if let Some(p) = preconj {
        b.attach(p, head);
    }

    if depth < 3 {
        if pb(rng, 0.34, style) {
            let pp = gen_pp(b, rng, depth + 1, style, "nmod");
            b.attach(pp, head);
        }
        if pb(rng, 0.09, style) {
            // Reduced relative: "that <verb> <np>"
            let that = b.push("that", "mark");
            let v = b.push(zipf_pick(rng, VERB_TRANS), "acl:relcl");
            b.attach(that, v);
            let obj = gen_np(b, rng, depth + 1, style);
            b.attach(obj, v);
            b.attach(v, head);
        }
        if pb(rng, 0.045, style) {
            // Apposition wrapped in commas: ", NP ,"
            let c1 = b.push(",", "punct");
            let ap = gen_np(b, rng, depth + 1, style);
            let c2 = b.push(",", "punct");
            b.attach(c1, ap);
            b.attach(c2, ap);
            b.attach(ap, head);
            // Reuse the deprel slot of the appositive head.
            b.deprels[ap] = "appos".into();
        }
        if preconj.is_some() || rng.random_bool(0.07) {
            // Coordination: "and NP" (or an mwe chain "as well as NP").
            if preconj.is_none() && rng.random_bool(0.22) {
                let as1 = b.push("as", "cc");
                let well = b.push("well", "mwe");
                let as2 = b.push("as", "mwe");
                b.attach(well, as1);
                b.attach(as2, as1);
                b.attach(as1, head);
                let conj = gen_np(b, rng, depth + 1, style);
                b.deprels[conj] = "conj".into();
                b.attach(conj, head);
            } else {
                let cc = b.push(zipf_pick(rng, CC), "cc");
                b.attach(cc, head);
                let conj = gen_np(b, rng, depth + 1, style);
                b.deprels[conj] = "conj".into();
                b.attach(conj, head);
            }
        }
    }
    head
}

/// Emit a prepositional phrase; returns the noun head (deprel set by caller
/// via the returned slot's deprel).
fn gen_pp(b: &mut Builder, rng: &mut ChaCha8Rng, depth: usize, style: f64, deprel: &str) -> usize {
    let mwe = rng.random_bool(0.07);
    if mwe {
        let phrase = zipf_pick(rng, MWE_PREP);
        let mut words = phrase.split(' ');
        let first = b.push(words.next().unwrap(), "case");
        let rest: Vec<usize> = words.map(|w| b.push(w, "mwe")).collect();
        let np = gen_np(b, rng, depth, style);
        b.attach(first, np);
        for r in rest {
            b.attach(r, first);
        }
        b.deprels[np] = deprel.into();
        np
    } else {
        let prep = b.push(zipf_pick(rng, PREP), "case");
        let np = gen_np(b, rng, depth, style);
        b.attach(prep, np);
        b.deprels[np] = deprel.into();
        np
    }
}

/// Temporal modifier: "on Tuesday" or a bare temporal noun.
fn gen_tmod(b: &mut Builder, rng: &mut ChaCha8Rng) -> usize {
    if rng.random_bool(0.5) {
        let prep = b.push("on", "case");
        let t = b.push(zipf_pick(rng, TEMPORAL), "nmod:tmod");
        b.attach(prep, t);
        t
    } else {
        b.push(zipf_pick(rng, TEMPORAL), "nmod:tmod")
    }
}

/// Emit a clause; returns the root slot (verb, or predicate in a copular
/// clause).
fn gen_clause(b: &mut Builder, rng: &mut ChaCha8Rng, depth: usize, style: f64) -> usize {
    let subj = gen_np(b, rng, depth + 1, style);
    b.deprels[subj] = "nsubj".into();

    let copular = rng.random_bool(0.10);
    if copular {
        let cop = b.push(zipf_pick(rng, COPULA), "cop");
        let neg = rng.random_bool(0.06).then(|| b.push("not", "neg"));
        let pred = if rng.random_bool(0.55) {
            b.push(zipf_pick(rng, ADJ), "pred_head")
        } else {
            let np = gen_np(b, rng, depth + 1, style);
            b.deprels[np] = "pred_head".into();
            np
        };
        b.attach(subj, pred);
        b.attach(cop, pred);
        if let Some(n) = neg {
            b.attach(n, pred);
        }
        if rng.random_bool(0.30) {
            let t = gen_tmod(b, rng);
            b.attach(t, pred);
        }
        return pred;
    }

    let aux = rng.random_bool(0.12).then(|| b.push(zipf_pick(rng, AUX), "aux"));
    let neg = rng.random_bool(0.05).then(|| b.push("not", "neg"));
    let pre_adv = rng
        .random_bool(0.08)
        .then(|| b.push(zipf_pick(rng, ADV), "advmod"));

    let trans = rng.random_bool(0.72);
    let verb = if trans {
        b.push(zipf_pick(rng, VERB_TRANS), "verb_head")
    } else {
        b.push(zipf_pick(rng, VERB_INTRANS), "verb_head")
    };
    b.attach(subj, verb);
    if let Some(a) = aux {
        b.attach(a, verb);
    }
    if let Some(n) = neg {
        b.attach(n, verb);
    }
    if let Some(a) = pre_adv {
        b.attach(a, verb);
    }

    if trans {
        let obj = gen_np(b, rng, depth + 1, style);
        b.deprels[obj] = "dobj".into();
        b.attach(obj, verb);
    }
    if pb(rng, 0.62, style) {
        let pp = gen_pp(b, rng, depth + 1, style, "nmod");
        b.attach(pp, verb);
        if pb(rng, 0.40, style) {
            let pp2 = gen_pp(b, rng, depth + 1, style, "nmod");
            b.attach(pp2, verb);
        }
    }
    if rng.random_bool(0.20) {
        let adv = b.push(zipf_pick(rng, ADV), "advmod");
        b.attach(adv, verb);
    }
    if rng.random_bool(0.34) {
        let t = gen_tmod(b, rng);
        b.attach(t, verb);
    }
    if depth <= 1 && pb(rng, if depth == 0 { 0.22 } else { 0.12 }, style) {
        // Subordinate clause, usually after a comma.
        let comma = rng.random_bool(0.6).then(|| b.push(",", "punct"));
        let mark = b.push(zipf_pick(rng, MARK), "mark");
        let sub = gen_clause(b, rng, depth + 1, style);
        b.deprels[sub] = "advcl".into();
        b.attach(mark, sub);
        if let Some(c) = comma {
            b.attach(c, sub);
        }
        b.attach(sub, verb);
    }
    if depth == 0 && pb(rng, 0.16, style) {
        // Coordinated clause: ", and <clause>" with the comma on the main
        // verb, so pruning the conjunct leaves a dangling comma behind.
        if rng.random_bool(0.5) {
            let comma = b.push(",", "punct");
            b.attach(comma, verb);
        }
        let cc = b.push(zipf_pick(rng, CC), "cc");
        let sub = gen_clause(b, rng, depth + 1, style);
        b.deprels[sub] = "conj".into();
        b.attach(cc, verb);
        b.attach(sub, verb);
    }
    verb
}

/// Generate one sentence tree. Deterministic in the rng state.
pub fn gen_sentence(rng: &mut ChaCha8Rng, id: &str) -> DepTree {
    loop {
        let mut b = Builder::new();
        // Per-sentence style: terse wire copy through long multi-clause
        // reporting; widens both length and prune-size distributions.
        let style = 0.45 + 1.9 * rng.random::<f64>().powi(2);
        let root = gen_clause(&mut b, rng, 0, style);
        let period = b.push(".", "punct");
        b.attach(period, root);
        b.deprels[root] = "root".into();
        // Capitalize the first token.
        if let Some(first) = b.forms.first_mut() {
            let mut chars = first.chars();
            if let Some(c) = chars.next() {
                *first = c.to_uppercase().collect::<String>() + chars.as_str();
            }
        }
        if b.forms.len() >= 5 && b.forms.len() <= 60 {
            if let Ok(tree) = b.build(id) {
                return tree;
            }
        }
    }
}

/// Generate a sentence with at least `min_chars` characters of text.
fn gen_long_sentence(rng: &mut ChaCha8Rng, id: &str, min_chars: usize) -> DepTree {
    loop {
        let t = gen_sentence(rng, id);
        if text::char_len(t.text()) >= min_chars {
            return t;
        }
    }
}

/// A whitespace-tokenized corpus drawn from the same sentence distribution,
/// for language-model and collocation training.
pub fn lm_corpus(params: &SimParams, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..params.lm_sentences)
        .map(|i| {
            gen_sentence(&mut rng, &format!("lm{i}"))
                .tokens()
                .iter()
                .map(|t| t.form.clone())
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Latent acceptability

fn dep_rate(deprel: &str) -> f64 {
    DEP_RATES
        .iter()
        .find(|(d, _)| *d == deprel)
        .map(|(_, r)| *r)
        .unwrap_or(DEFAULT_DEP_RATE)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Latent edit scorer shared by the single- and multi-prune generators.
pub struct LatentModel<'a> {
    lm: &'a LmBundle,
    stats: &'a OffsetStats,
    params: &'a SimParams,
    /// Standardization of the fluency delta, estimated from the pair pool.
    delta_mean: f64,
    delta_sd: f64,
    /// Spread correction so marginal rates land near the configured targets.
    spread: f64,
}

impl<'a> LatentModel<'a> {
    fn new(
        lm: &'a LmBundle,
        stats: &'a OffsetStats,
        params: &'a SimParams,
        deltas: &[f64],
    ) -> LatentModel<'a> {
        let n = deltas.len().max(1) as f64;
        let mean = deltas.iter().sum::<f64>() / n;
        let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
        let s2 = params.worker_threshold_sd.powi(2) + params.item_noise_sd.powi(2) + 0.4;
        LatentModel {
            lm,
            stats,
            params,
            delta_mean: mean,
            delta_sd: var.sqrt().max(1e-9),
            spread: (1.0 + std::f64::consts::PI * s2 / 8.0).sqrt(),
        }
    }

    /// Fluency damage caused by an edit: the NormLP change scaled by the
    /// pre-edit length. NormLP is length-normalized, so an unscaled change
    /// underrates local damage in long sentences.
    fn fluency_delta(&self, tree: &DepTree, edit: &PruneEdit) -> f64 {
        let before: BTreeSet<usize> = edit.before_tokens.iter().copied().collect();
        let after: BTreeSet<usize> = edit.after_tokens.iter().copied().collect();
        let nb = self.lm.norm_lp_text(&tree.linearize(&before)).unwrap_or(-1.0);
        let na = self.lm.norm_lp_text(&tree.linearize(&after)).unwrap_or(-1.0);
        (na - nb) * (edit.before_tokens.len() as f64).sqrt()
    }

    /// Latent acceptability of one edit, noise not included.
    pub fn edit_latent(&self, tree: &DepTree, edit: &PruneEdit) -> f64 {
        let p = self.params;
        let deprel = &tree.token(edit.pruned_vertex).deprel;
        let mut a = logit(dep_rate(deprel)) * self.spread * p.dep_weight;
        if edit.removed.contains(&1) {
            a += p.prop_removes_start;
        }
        let last_content = edit
            .before_tokens
            .iter()
            .rev()
            .find(|&&v| !text::is_punct_form(&tree.token(v).form));
        if let Some(&last) = last_content {
            if edit.removed.contains(&last) {
                a += p.prop_removes_end;
            }
        }
        let first_removed = edit
            .before_tokens
            .iter()
            .position(|v| edit.removed.contains(v));
        if let Some(pos) = first_removed {
            if pos > 0 && text::is_punct_form(&tree.token(edit.before_tokens[pos - 1]).form) {
                a += p.prop_follows_punct;
            }
        }
        if self.stats.edit_breaks_collocation(tree, edit, 10) {
            a += p.prop_breaks_collocation;
        }
        let z = (self.fluency_delta(tree, edit) - self.delta_mean) / self.delta_sd;
        a + p.lm_effect * z.clamp(-2.5, 0.5)
    }
}

// ---------------------------------------------------------------------------
// Worker pool

/// Simulated workers: an endorsement threshold and a volume propensity per
/// worker. High-volume workers run slightly stricter, which separates the
/// unweighted mean endorsement rate from the judgment-weighted one.
#[derive(Debug, Clone)]
pub struct WorkerPool {
    pub ids: Vec<String>,
    thresholds: Vec<f64>,
    weights: Vec<f64>,
}

impl WorkerPool {
    fn generate(params: &SimParams, rng: &mut ChaCha8Rng) -> WorkerPool {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = params.n_workers;
        let weights: Vec<f64> = (0..n).map(|k| 1.0 / (k as f64 + 3.0).powf(0.85)).collect();
        let logw: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let lw_mean = logw.iter().sum::<f64>() / n as f64;
        let lw_sd = (logw.iter().map(|l| (l - lw_mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let zlogw: Vec<f64> = logw.iter().map(|l| (l - lw_mean) / lw_sd).collect();
        // Center the strictness term on the judgment-weighted mean, so the
        // volume-weighted average threshold stays near zero and the
        // per-dependency rate targets survive; the unweighted worker mean
        // then drifts lenient, as in the reference data.
        let wsum: f64 = weights.iter().sum();
        let zw_weighted: f64 = weights
            .iter()
            .zip(&zlogw)
            .map(|(w, z)| w * z)
            .sum::<f64>()
            / wsum;
        let thresholds = (0..n)
            .map(|k| {
                let z: f64 = normal.sample(rng);
                params.worker_threshold_sd * z
                    + params.worker_strictness_by_volume * (zlogw[k] - zw_weighted)
            })
            .collect();
        WorkerPool {
            ids: (0..n).map(|k| format!("w{:03}", k + 1)).collect(),
            thresholds,
            weights,
        }
    }

    fn draw_distinct(
        &self,
        rng: &mut ChaCha8Rng,
        count: usize,
        allowed: Option<&BTreeSet<usize>>,
    ) -> Vec<usize> {
        let eligible: Vec<usize> = match allowed {
            Some(set) => set.iter().copied().collect(),
            None => (0..self.ids.len()).collect(),
        };
        let total: f64 = eligible.iter().map(|&k| self.weights[k]).sum();
        let mut chosen = BTreeSet::new();
        let mut guard = 0;
        while chosen.len() < count && guard < 10_000 {
            guard += 1;
            let mut draw = rng.random::<f64>() * total;
            let mut pick = eligible[eligible.len() - 1];
            for &k in &eligible {
                draw -= self.weights[k];
                if draw <= 0.0 {
                    pick = k;
                    break;
                }
            }
            chosen.insert(pick);
        }
        chosen.into_iter().collect()
    }

    pub fn threshold(&self, idx: usize) -> f64 {
        self.thresholds[idx]
    }
}

// ---------------------------------------------------------------------------
// Single-prune release

pub struct SingleRelease {
    pub treebank: Vec<DepTree>,
    pub judgments: Vec<JudgmentRecord>,
    pub workers: WorkerPool,
    pub latent_delta_stats: (f64, f64),
}

/// Plan per-pair rater counts summing exactly to `total`.
fn plan_rater_counts(params: &SimParams, rng: &mut ChaCha8Rng, total: usize) -> Vec<usize> {
    let mut plan = Vec::new();
    let mut sum = 0usize;
    let wsum: f64 = params.multi_rater_weights.iter().map(|(_, w)| w).sum();
    while sum < total {
        let remaining = total - sum;
        let mut c = if rng.random_bool(params.single_rater_fraction) {
            1
        } else {
            let mut draw = rng.random::<f64>() * wsum;
            let mut pick = params.multi_rater_weights[0].0;
            for &(k, w) in &params.multi_rater_weights {
                draw -= w;
                if draw <= 0.0 {
                    pick = k;
                    break;
                }
            }
            pick
        };
        c = c.min(remaining);
        plan.push(c);
        sum += c;
    }
    plan
}

struct PairDraft {
    tree: DepTree,
    vertex: usize,
    latent: f64,
}

fn draft_pair(rng: &mut ChaCha8Rng, id: &str) -> (DepTree, usize) {
    loop {
        let tree = gen_sentence(rng, id);
        let candidates: Vec<usize> = (1..=tree.len())
            .filter(|&v| v != tree.root() && tree.token(v).deprel != "punct")
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let v = candidates[rng.random_range(0..candidates.len())];
        return (tree, v);
    }
}

/// Generate the single-prune judgment release: sentences, one random prune
/// per pair, and simulated worker judgments with exact train/test judgment
/// totals.
pub fn generate_single_prune(
    params: &SimParams,
    seed: u64,
    lm: &LmBundle,
    stats: &OffsetStats,
) -> Result<SingleRelease> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let workers = WorkerPool::generate(params, &mut rng);
    let normal = Normal::new(0.0, 1.0).unwrap();

    let train_plan = plan_rater_counts(params, &mut rng, params.train_judgments);
    let test_plan = plan_rater_counts(params, &mut rng, params.test_judgments);

    // Draft train pairs and collect fluency deltas for standardization.
    let mut drafts: Vec<(DepTree, usize)> = Vec::with_capacity(train_plan.len());
    let mut deltas: Vec<f64> = Vec::with_capacity(train_plan.len());
    for i in 0..train_plan.len() {
        let (tree, v) = draft_pair(&mut rng, &format!("n{i}"));
        let edit = tree.prune(&tree.all_indices(), v)?;
        let before: BTreeSet<usize> = edit.before_tokens.iter().copied().collect();
        let after: BTreeSet<usize> = edit.after_tokens.iter().copied().collect();
        let nb = lm.norm_lp_text(&tree.linearize(&before)).unwrap_or(-1.0);
        let na = lm.norm_lp_text(&tree.linearize(&after)).unwrap_or(-1.0);
        deltas.push((na - nb) * (edit.before_tokens.len() as f64).sqrt());
        drafts.push((tree, v));
    }
    let latent = LatentModel::new(lm, stats, params, &deltas);

    let mut train_pairs: Vec<PairDraft> = Vec::with_capacity(drafts.len());
    for (tree, v) in drafts {
        let edit = tree.prune(&tree.all_indices(), v)?;
        let a = latent.edit_latent(&tree, &edit) + params.item_noise_sd * normal.sample(&mut rng);
        train_pairs.push(PairDraft {
            tree,
            vertex: v,
            latent: a,
        });
    }

    // Test pairs: rejection-sample toward ambiguity, so the held-out set is
    // a little harder than the training pool.
    let mut test_pairs: Vec<PairDraft> = Vec::with_capacity(test_plan.len());
    let mut t = 0usize;
    while test_pairs.len() < test_plan.len() {
        let id = format!("n{}", train_plan.len() + t);
        t += 1;
        let (tree, v) = draft_pair(&mut rng, &id);
        let edit = tree.prune(&tree.all_indices(), v)?;
        let a = latent.edit_latent(&tree, &edit) + params.item_noise_sd * normal.sample(&mut rng);
        let accept = (-params.test_ambiguity_bias * a.abs()).exp();
        if rng.random::<f64>() <= accept {
            test_pairs.push(PairDraft {
                tree,
                vertex: v,
                latent: a,
            });
        }
    }

    // Judge. Train first so test raters can be restricted to train workers.
    let mut treebank = Vec::new();
    let mut judgments = Vec::new();
    let mut train_worker_set: BTreeSet<usize> = BTreeSet::new();
    let mut pair_no = 0usize;
    for (pair, &count) in train_pairs.iter().zip(&train_plan) {
        pair_no += 1;
        let raters = workers.draw_distinct(&mut rng, count, None);
        for &k in &raters {
            train_worker_set.insert(k);
            let p_yes = sigmoid(pair.latent - workers.thresholds[k]);
            judgments.push(JudgmentRecord {
                pair_id: format!("p{pair_no:05}"),
                sentence_id: pair.tree.sentence_id().to_string(),
                conllu_ref: pair.tree.sentence_id().to_string(),
                kept: None,
                pruned_vertex: Some(pair.vertex),
                worker_id: workers.ids[k].clone(),
                label: u8::from(rng.random::<f64>() < p_yes),
                split: Split::Train,
            });
        }
        treebank.push(pair.tree.clone());
    }
    for (pair, &count) in test_pairs.iter().zip(&test_plan) {
        pair_no += 1;
        let raters = workers.draw_distinct(&mut rng, count, Some(&train_worker_set));
        for &k in &raters {
            let p_yes = sigmoid(pair.latent - workers.thresholds[k]);
            judgments.push(JudgmentRecord {
                pair_id: format!("p{pair_no:05}"),
                sentence_id: pair.tree.sentence_id().to_string(),
                conllu_ref: pair.tree.sentence_id().to_string(),
                kept: None,
                pruned_vertex: Some(pair.vertex),
                worker_id: workers.ids[k].clone(),
                label: u8::from(rng.random::<f64>() < p_yes),
                split: Split::Test,
            });
        }
        treebank.push(pair.tree.clone());
    }

    Ok(SingleRelease {
        treebank,
        judgments,
        workers,
        latent_delta_stats: (latent.delta_mean, latent.delta_sd),
    })
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

// ---------------------------------------------------------------------------
// Multi-prune evaluation release

pub struct MultiRelease {
    pub treebank: Vec<DepTree>,
    pub judgments: Vec<JudgmentRecord>,
}

/// Generate the multi-prune evaluation set: sample chains under random
/// budgets with the trained scorer, then judge each final compression with
/// simulated workers whose perception sums the true per-edit latents.
#[allow(clippy::too_many_arguments)]
pub fn generate_multi_prune(
    params: &SimParams,
    seed: u64,
    scorer: &Scorer,
    lm: &LmBundle,
    stats: &OffsetStats,
    workers: &WorkerPool,
    delta_stats: (f64, f64),
) -> Result<MultiRelease> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let latent = LatentModel {
        lm,
        stats,
        params,
        delta_mean: delta_stats.0,
        delta_sd: delta_stats.1,
        spread: (1.0
            + std::f64::consts::PI
                * (params.worker_threshold_sd.powi(2) + params.item_noise_sd.powi(2) + 0.4)
            / 8.0)
            .sqrt(),
    };

    struct Comp {
        tree: DepTree,
        kept: Vec<usize>,
        edit_latents: Vec<f64>,
    }

    let mut comps: Vec<Comp> = Vec::new();
    let (blo, bhi) = params.multi_budget;
    for i in 0..params.multi_sentences {
        let tree = gen_long_sentence(&mut rng, &format!("m{i}"), 101);
        let budget = sampler::BrevityBudget::new(rng.random_range(blo..=bhi))?;
        let chain_seed: u64 = rng.random();
        let cand = match sampler::sample_chain(scorer, &tree, budget, chain_seed) {
            Ok(c) => c,
            Err(Error::BudgetUnreachable { .. }) => continue,
            Err(e) => return Err(e),
        };
        if cand.chain.is_empty() {
            continue;
        }
        // Judges react to what is visibly missing from the final text: the
        // maximal removed subtrees of the canonical decomposition. Each
        // chunk carries its own latent, plus noise shared by all raters.
        let kept_set: BTreeSet<usize> = cand.kept.iter().copied().collect();
        let canonical = tree.chain_from_kept(&kept_set)?;
        let edit_latents: Vec<f64> = canonical
            .iter()
            .map(|e| {
                latent.edit_latent(&tree, e)
                    + params.multi_item_noise_sd * normal.sample(&mut rng)
            })
            .collect();
        comps.push(Comp {
            tree,
            kept: cand.kept,
            edit_latents,
        });
    }

    // Judge with 2–3 raters per compression until the judgment budget is
    // spent. A worker endorses a compression only when they would endorse
    // every one of its deletions independently.
    let mut judgments = Vec::new();
    let mut treebank = Vec::new();
    let mut remaining = params.multi_judgments;
    for (i, comp) in comps.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let want = if rng.random_bool(0.55) { 3 } else { 2 };
        let count = want.min(remaining);
        let raters = workers.draw_distinct(&mut rng, count, None);
        for &k in &raters {
            let scale = params.multi_latent_scale;
            let all_endorsed = comp.edit_latents.iter().all(|&a| {
                let p = sigmoid(scale * (a - workers.thresholds[k]));
                rng.random::<f64>() < p
            });
            judgments.push(JudgmentRecord {
                pair_id: format!("mc{i:04}"),
                sentence_id: comp.tree.sentence_id().to_string(),
                conllu_ref: comp.tree.sentence_id().to_string(),
                kept: Some(comp.kept.clone()),
                pruned_vertex: None,
                worker_id: workers.ids[k].clone(),
                label: u8::from(all_endorsed),
                split: Split::Test,
            });
            remaining -= 1;
        }
        treebank.push(comp.tree.clone());
    }

    Ok(MultiRelease {
        treebank,
        judgments,
    })
}

// ---------------------------------------------------------------------------
// Gold compression pairs

pub struct GoldRelease {
    pub treebank: Vec<DepTree>,
    pub gold: Vec<GoldPair>,
}

/// Generate gold pairs: mostly prune-derived compressions, a slice keeping
/// an orphaned token (not head-closed), and a few with a reworded token so
/// alignment fails.
pub fn generate_gold(params: &SimParams, seed: u64) -> Result<GoldRelease> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut treebank = Vec::new();
    let mut gold = Vec::new();
    for i in 0..params.gold_pairs {
        let tree = gen_long_sentence(&mut rng, &format!("g{i}"), 60);
        let roll: f64 = rng.random();
        let kept: BTreeSet<usize>;
        let mut reword = false;
        if roll < params.gold_prune_fraction {
            // A random prune chain of 1–4 edits.
            let mut state = tree.all_indices();
            let edits = rng.random_range(1..=4usize);
            for _ in 0..edits {
                let candidates: Vec<usize> = state
                    .iter()
                    .copied()
                    .filter(|&v| v != tree.root())
                    .collect();
                if candidates.is_empty() || state.len() <= 3 {
                    break;
                }
                let v = candidates[rng.random_range(0..candidates.len())];
                let edit = tree.prune(&state, v)?;
                state = edit.after_tokens.iter().copied().collect();
            }
            kept = state;
        } else if roll < params.gold_prune_fraction + params.gold_headbreak_fraction {
            // Remove one non-leaf, keep its children: orphaned heads.
            let non_leaf: Vec<usize> = (1..=tree.len())
                .filter(|&v| v != tree.root() && !tree.descendants(v).len().eq(&1))
                .collect();
            let mut state = tree.all_indices();
            if let Some(&v) = non_leaf.first() {
                state.remove(&v);
            } else {
                state.remove(&tree.root());
            }
            kept = state;
        } else {
            // Reword one kept token so greedy alignment cannot match.
            reword = true;
            kept = tree.all_indices();
        }
        let mut text = tree.linearize(&kept);
        if reword {
            let v = 1 + rng.random_range(0..tree.len());
            let forms: Vec<String> = kept
                .iter()
                .map(|&k| {
                    if k == v {
                        "zzzunseen".to_string()
                    } else {
                        tree.token(k).form.clone()
                    }
                })
                .collect();
            text = forms.join(" ");
        }
        gold.push(GoldPair {
            conllu_ref: tree.sentence_id().to_string(),
            compression_text: text,
        });
        treebank.push(tree);
    }
    Ok(GoldRelease { treebank, gold })
}

// ---------------------------------------------------------------------------
// File output

/// Write a treebank as CoNLL-U.
pub fn write_conllu<W: Write>(mut w: W, trees: &[DepTree]) -> Result<()> {
    for t in trees {
        w.write_all(t.to_conllu().as_bytes())?;
        writeln!(w)?;
    }
    Ok(())
}

/// Materialize a full simulated release into a directory:
/// `treebank.conllu`, `judgments.jsonl`, `lm_corpus.txt`,
/// `multi_treebank.conllu`, `multi_judgments.jsonl`,
/// `gold_treebank.conllu`, `gold.jsonl`.
pub struct ReleaseWriter<'a> {
    pub dir: &'a Path,
}

impl<'a> ReleaseWriter<'a> {
    pub fn new(dir: &'a Path) -> ReleaseWriter<'a> {
        ReleaseWriter { dir }
    }

    fn file(&self, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
        std::fs::create_dir_all(self.dir)?;
        Ok(std::io::BufWriter::new(std::fs::File::create(
            self.dir.join(name),
        )?))
    }

    pub fn write_corpus(&self, corpus: &[Vec<String>]) -> Result<()> {
        let mut w = self.file("lm_corpus.txt")?;
        for sent in corpus {
            writeln!(w, "{}", sent.join(" "))?;
        }
        Ok(())
    }

    pub fn write_single(&self, release: &SingleRelease) -> Result<()> {
        write_conllu(self.file("treebank.conllu")?, &release.treebank)?;
        crate::corpus::save_judgments(self.file("judgments.jsonl")?, &release.judgments)
    }

    pub fn write_multi(&self, release: &MultiRelease) -> Result<()> {
        write_conllu(self.file("multi_treebank.conllu")?, &release.treebank)?;
        crate::corpus::save_judgments(self.file("multi_judgments.jsonl")?, &release.judgments)
    }

    pub fn write_gold(&self, release: &GoldRelease) -> Result<()> {
        write_conllu(self.file("gold_treebank.conllu")?, &release.treebank)?;
        crate::corpus::save_gold(self.file("gold.jsonl")?, &release.gold)
    }
}
