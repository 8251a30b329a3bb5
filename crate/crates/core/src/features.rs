//! Sparse feature extraction for a single prune edit.
//!
//! One `(sentence, edit, worker)` triple maps to a named feature vector:
//! language-model fluency of the result, the dependency type being cut, the
//! judging worker (when known), positional properties of the edit, and a
//! configurable list of dependency × edit-property interactions. Binary
//! features are present-iff-1; the only real-valued feature is the NormLP of
//! the post-edit text.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::colloc::OffsetStats;
use crate::deptree::{DepTree, PruneEdit};
use crate::error::{Error, Result};
use crate::lm::LmBundle;
use crate::text;

/// Sparse named feature vector; absent binary features are 0.
pub type FeatureVector = BTreeMap<String, f64>;

pub const F_NORM_LP_C: &str = "lm:norm_lp_c";
pub const F_S_MINUS_C_POS: &str = "lm:s_minus_c_pos";
pub const PROP_REMOVES_START: &str = "removes_start";
pub const PROP_REMOVES_END: &str = "removes_end";
pub const PROP_FOLLOWS_PUNCT: &str = "follows_punct";
pub const PROP_BREAKS_COLLOCATION: &str = "breaks_collocation";

/// The shipped interaction list: sixteen frequent dependency types crossed
/// with `follows_punct`, plus (conj, removes_end). Swappable via
/// [`load_interactions`].
pub const DEFAULT_INTERACTIONS: &[(&str, &str)] = &[
    ("conj", PROP_FOLLOWS_PUNCT),
    ("advmod", PROP_FOLLOWS_PUNCT),
    ("amod", PROP_FOLLOWS_PUNCT),
    ("nmod", PROP_FOLLOWS_PUNCT),
    ("acl", PROP_FOLLOWS_PUNCT),
    ("advcl", PROP_FOLLOWS_PUNCT),
    ("appos", PROP_FOLLOWS_PUNCT),
    ("cc", PROP_FOLLOWS_PUNCT),
    ("det", PROP_FOLLOWS_PUNCT),
    ("case", PROP_FOLLOWS_PUNCT),
    ("nummod", PROP_FOLLOWS_PUNCT),
    ("mark", PROP_FOLLOWS_PUNCT),
    ("ccomp", PROP_FOLLOWS_PUNCT),
    ("xcomp", PROP_FOLLOWS_PUNCT),
    ("compound", PROP_FOLLOWS_PUNCT),
    ("dobj", PROP_FOLLOWS_PUNCT),
    ("conj", PROP_REMOVES_END),
];

/// Knobs shared by every extraction site.
#[derive(Debug, Clone)]
pub struct FeatureConfig {
    /// Minimum pair count for the collocation-break feature.
    pub colloc_min_count: u64,
    /// (deprel, edit property) interaction pairs.
    pub interactions: Vec<(String, String)>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            colloc_min_count: crate::colloc::DEFAULT_MIN_COUNT,
            interactions: DEFAULT_INTERACTIONS
                .iter()
                .map(|(d, p)| (d.to_string(), p.to_string()))
                .collect(),
        }
    }
}

/// Read an interaction list: one `deprel<TAB>edit_property` pair per line,
/// `#` comments and blank lines ignored.
pub fn load_interactions<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (dep, prop) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: "expected deprel<TAB>edit_property".into(),
        })?;
        out.push((dep.trim().to_string(), prop.trim().to_string()));
    }
    Ok(out)
}

/// Extract the feature vector for one edit as seen by one optional worker.
///
/// Positional predicates are evaluated against the pre-edit kept state, so
/// mid-chain edits see the intermediate compression; the `s` side of the
/// NormLP difference feature is always the original source sentence.
pub fn extract(
    tree: &DepTree,
    edit: &PruneEdit,
    worker: Option<&str>,
    lm: &LmBundle,
    stats: &OffsetStats,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    let mut v = FeatureVector::new();

    // Language model features.
    let after: BTreeSet<usize> = edit.after_tokens.iter().copied().collect();
    let c_text = tree.linearize(&after);
    let norm_lp_c = lm.norm_lp_text(&c_text)?;
    let norm_lp_s = lm.norm_lp_text(tree.text())?;
    v.insert(F_NORM_LP_C.to_string(), norm_lp_c);
    if norm_lp_s - norm_lp_c > 0.0 {
        v.insert(F_S_MINUS_C_POS.to_string(), 1.0);
    }

    // Dependency type of the pruned vertex.
    let deprel = tree.token(edit.pruned_vertex).deprel.clone();
    v.insert(format!("dep:{deprel}"), 1.0);

    // Worker identity, when supplied.
    if let Some(w) = worker {
        v.insert(format!("worker:{w}"), 1.0);
    }

    // Edit properties.
    let mut props: Vec<&str> = Vec::new();
    if edit.removed.contains(&1) {
        props.push(PROP_REMOVES_START);
    }
    if let Some(&last) = edit.before_tokens.last() {
        if edit.removed.contains(&last) {
            props.push(PROP_REMOVES_END);
        }
    }
    if follows_punct(tree, edit) {
        props.push(PROP_FOLLOWS_PUNCT);
    }
    if stats.edit_breaks_collocation(tree, edit, cfg.colloc_min_count) {
        props.push(PROP_BREAKS_COLLOCATION);
    }
    for p in &props {
        v.insert(format!("edit:{p}"), 1.0);
    }

    // Interactions between the edit's dependency type and its properties.
    for (dep, prop) in &cfg.interactions {
        if *dep == deprel && props.contains(&prop.as_str()) {
            v.insert(format!("ix:{dep}:{prop}"), 1.0);
        }
    }

    debug_assert!(v.values().all(|x| x.is_finite()));
    Ok(v)
}

/// The kept token immediately preceding the removed span (in pre-edit
/// order) is punctuation.
fn follows_punct(tree: &DepTree, edit: &PruneEdit) -> bool {
    let first_removed_pos = edit
        .before_tokens
        .iter()
        .position(|v| edit.removed.contains(v));
    match first_removed_pos {
        Some(pos) if pos > 0 => {
            let prev = edit.before_tokens[pos - 1];
            text::is_punct_form(&tree.token(prev).form)
        }
        _ => false,
    }
}

/// Ordered dictionary of feature names, frozen after fitting. Scoring-time
/// vectors may carry unseen names; those contribute nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpace {
    names: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl FeatureSpace {
    /// Collect every feature name in the training vectors, sorted for
    /// determinism.
    pub fn fit<'a, I>(vectors: I) -> FeatureSpace
    where
        I: IntoIterator<Item = &'a FeatureVector>,
    {
        let names: BTreeSet<String> = vectors
            .into_iter()
            .flat_map(|v| v.keys().cloned())
            .collect();
        FeatureSpace::from_names(names.into_iter().collect())
    }

    pub fn from_names(names: Vec<String>) -> FeatureSpace {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        FeatureSpace { names, index }
    }

    /// Rebuild the lookup index (after deserialization).
    pub fn reindex(&mut self) {
        self.index = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Stable fingerprint of the dictionary, for model files.
    pub fn fingerprint(&self) -> String {
        let mut h = 0xcbf29ce484222325u64;
        for n in &self.names {
            h = text::fnv1a64(h, n.as_bytes());
        }
        format!("{h:016x}")
    }
}

/// Map a named vector into (column, value) pairs under a frozen space.
/// Returns the indexed entries and the count of silently dropped unseen
/// names.
pub fn vectorize(space: &FeatureSpace, v: &FeatureVector) -> (Vec<(usize, f64)>, usize) {
    let mut out = Vec::with_capacity(v.len());
    let mut dropped = 0usize;
    for (name, &value) in v {
        match space.index_of(name) {
            Some(i) => out.push((i, value)),
            None => dropped += 1,
        }
    }
    (out, dropped)
}
