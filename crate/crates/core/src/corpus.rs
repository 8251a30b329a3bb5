//! Judgment-dataset ingestion, split discipline and corpus statistics.
//!
//! The canonical on-disk judgment format is JSON lines with the fields
//! `pair_id, sentence_id, conllu_ref, kept, pruned_vertex, worker_id,
//! label, split`; either `kept` or `pruned_vertex` identifies the
//! compression. Every record is validated against its referenced tree at
//! load time: the kept set must be head-closed and contain the root.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deptree::{self, DepTree, PruneEdit};
use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One binary worker response about one (sentence, compression) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub pair_id: String,
    pub sentence_id: String,
    pub conllu_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kept: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruned_vertex: Option<usize>,
    pub worker_id: String,
    pub label: u8,
    pub split: Split,
}

/// A source sentence paired with a gold compression given as text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldPair {
    pub conllu_ref: String,
    pub compression_text: String,
}

/// Trees indexed by sentence id, the target of `conllu_ref`.
#[derive(Debug, Clone, Default)]
pub struct TreeIndex {
    trees: HashMap<String, DepTree>,
}

impl TreeIndex {
    pub fn new() -> TreeIndex {
        TreeIndex::default()
    }

    pub fn from_trees(trees: Vec<DepTree>) -> TreeIndex {
        let trees = trees
            .into_iter()
            .map(|t| (t.sentence_id().to_string(), t))
            .collect();
        TreeIndex { trees }
    }

    pub fn from_conllu<R: BufRead>(reader: R) -> Result<TreeIndex> {
        Ok(TreeIndex::from_trees(deptree::parse_conllu(reader)?))
    }

    pub fn from_conllu_path(path: &Path) -> Result<TreeIndex> {
        let f = std::fs::File::open(path)?;
        TreeIndex::from_conllu(std::io::BufReader::new(f))
    }

    pub fn get(&self, conllu_ref: &str) -> Option<&DepTree> {
        self.trees.get(conllu_ref)
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DepTree> {
        self.trees.values()
    }
}

impl JudgmentRecord {
    /// The kept set this record describes: `kept` verbatim, or everything
    /// minus the pruned vertex's descendant closure.
    pub fn effective_kept(&self, tree: &DepTree) -> Result<BTreeSet<usize>> {
        match (&self.kept, self.pruned_vertex) {
            (Some(kept), _) => Ok(kept.iter().copied().collect()),
            (None, Some(v)) => {
                let edit = tree.prune(&tree.all_indices(), v)?;
                Ok(edit.after_tokens.iter().copied().collect())
            }
            (None, None) => Err(Error::InvalidInput(format!(
                "record {} has neither kept nor pruned_vertex",
                self.pair_id
            ))),
        }
    }

    /// For single-prune records: the edit itself.
    pub fn derive_edit(&self, tree: &DepTree) -> Result<PruneEdit> {
        let v = self.pruned_vertex.ok_or_else(|| {
            Error::InvalidInput(format!("record {} is not single-prune", self.pair_id))
        })?;
        tree.prune(&tree.all_indices(), v)
    }
}

/// Load and validate judgment records from JSON lines.
///
/// Schema violations carry the record number; a kept set that is not
/// head-closed, drops the root, or disagrees with `pruned_vertex` is an
/// integrity error.
pub fn load_judgments<R: BufRead>(reader: R, trees: &TreeIndex) -> Result<Vec<JudgmentRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let record_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JudgmentRecord = serde_json::from_str(&line).map_err(|e| Error::Integrity {
            record: record_no,
            msg: format!("schema violation: {e}"),
        })?;
        if rec.label > 1 {
            return Err(Error::Integrity {
                record: record_no,
                msg: format!("label {} is not binary", rec.label),
            });
        }
        let tree = trees.get(&rec.conllu_ref).ok_or_else(|| Error::Integrity {
            record: record_no,
            msg: format!("unknown conllu_ref {:?}", rec.conllu_ref),
        })?;
        let kept = rec.effective_kept(tree).map_err(|e| Error::Integrity {
            record: record_no,
            msg: e.to_string(),
        })?;
        if !kept.contains(&tree.root()) {
            return Err(Error::Integrity {
                record: record_no,
                msg: "kept set does not contain the root".into(),
            });
        }
        if !tree.is_head_closed(&kept) {
            return Err(Error::Integrity {
                record: record_no,
                msg: "kept set is not head-closed".into(),
            });
        }
        if let (Some(explicit), Some(v)) = (&rec.kept, rec.pruned_vertex) {
            let derived = rec
                .derive_edit(tree)
                .map_err(|e| Error::Integrity {
                    record: record_no,
                    msg: e.to_string(),
                })?;
            let derived_kept: Vec<usize> = derived.after_tokens;
            if *explicit != derived_kept {
                return Err(Error::Integrity {
                    record: record_no,
                    msg: format!("kept set disagrees with pruning vertex {v}"),
                });
            }
        }
        out.push(rec);
    }
    Ok(out)
}

/// Write records as JSON lines.
pub fn save_judgments<W: Write>(mut w: W, records: &[JudgmentRecord]) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn load_gold<R: BufRead>(reader: R) -> Result<Vec<GoldPair>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GoldPair = serde_json::from_str(&line).map_err(|e| Error::Integrity {
            record: i + 1,
            msg: format!("schema violation: {e}"),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn save_gold<W: Write>(mut w: W, pairs: &[GoldPair]) -> Result<()> {
    for rec in pairs {
        serde_json::to_writer(&mut w, rec)?;
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassBalance {
    pub no: f64,
    pub yes: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitReport {
    pub train_judgments: usize,
    pub test_judgments: usize,
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub train_sentences: usize,
    pub test_sentences: usize,
    pub balance_overall: ClassBalance,
    pub balance_train: ClassBalance,
    pub balance_test: ClassBalance,
    /// Every worker judging in test also judged in train.
    pub test_workers_covered: bool,
    pub uncovered_workers: Vec<String>,
}

fn balance<'a, I: Iterator<Item = &'a JudgmentRecord>>(iter: I) -> ClassBalance {
    let mut yes = 0usize;
    let mut total = 0usize;
    for r in iter {
        yes += usize::from(r.label == 1);
        total += 1;
    }
    if total == 0 {
        return ClassBalance { no: 0.0, yes: 0.0 };
    }
    let y = yes as f64 / total as f64;
    ClassBalance { no: 1.0 - y, yes: y }
}

/// Check split discipline and report counts and balances.
///
/// A pair id in both splits is a violation: the whole point of splitting by
/// (s, c) pair is that no test judgment shares its pair with any train
/// judgment, whoever the workers are.
pub fn verify_split(records: &[JudgmentRecord]) -> Result<SplitReport> {
    let mut train_pairs = HashSet::new();
    let mut test_pairs = HashSet::new();
    let mut train_sents = HashSet::new();
    let mut test_sents = HashSet::new();
    let mut train_workers = HashSet::new();
    let mut test_workers = HashSet::new();
    let mut train_n = 0usize;
    let mut test_n = 0usize;
    for r in records {
        match r.split {
            Split::Train => {
                train_n += 1;
                train_pairs.insert(r.pair_id.as_str());
                train_sents.insert(r.sentence_id.as_str());
                train_workers.insert(r.worker_id.as_str());
            }
            Split::Test => {
                test_n += 1;
                test_pairs.insert(r.pair_id.as_str());
                test_sents.insert(r.sentence_id.as_str());
                test_workers.insert(r.worker_id.as_str());
            }
        }
    }
    let mut overlap: Vec<String> = train_pairs
        .intersection(&test_pairs)
        .map(|s| s.to_string())
        .collect();
    if !overlap.is_empty() {
        overlap.sort();
        return Err(Error::SplitViolation { pair_ids: overlap });
    }
    let mut uncovered: Vec<String> = test_workers
        .difference(&train_workers)
        .map(|s| s.to_string())
        .collect();
    uncovered.sort();
    Ok(SplitReport {
        train_judgments: train_n,
        test_judgments: test_n,
        train_pairs: train_pairs.len(),
        test_pairs: test_pairs.len(),
        train_sentences: train_sents.len(),
        test_sentences: test_sents.len(),
        balance_overall: balance(records.iter()),
        balance_train: balance(records.iter().filter(|r| r.split == Split::Train)),
        balance_test: balance(records.iter().filter(|r| r.split == Split::Test)),
        test_workers_covered: uncovered.is_empty(),
        uncovered_workers: uncovered,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pairs: usize,
    pub rate_mean: f64,
    /// Population standard deviation of the compression rate.
    pub rate_std: f64,
    pub per_deprel: BTreeMap<String, crate::metrics::DeprelRate>,
}

/// Compression-rate and per-dependency statistics over the distinct pairs
/// of a judgment set.
pub fn corpus_statistics(records: &[JudgmentRecord], trees: &TreeIndex) -> Result<CorpusStats> {
    let mut seen_pairs = HashSet::new();
    let mut rates = Vec::new();
    let mut dep_rows = Vec::new();
    for r in records {
        let tree = trees.get(&r.conllu_ref).ok_or_else(|| {
            Error::InvalidInput(format!("unknown conllu_ref {:?}", r.conllu_ref))
        })?;
        if seen_pairs.insert(r.pair_id.as_str()) {
            let kept = r.effective_kept(tree)?;
            let c_text = tree.linearize(&kept);
            rates.push(deptree::compression_rate(tree.text(), &c_text)?);
        }
        if let Some(v) = r.pruned_vertex {
            dep_rows.push((tree.token(v).deprel.clone(), r.label));
        }
    }
    let n = rates.len() as f64;
    let mean = if n > 0.0 { rates.iter().sum::<f64>() / n } else { 0.0 };
    let var = if n > 0.0 {
        rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n
    } else {
        0.0
    };
    Ok(CorpusStats {
        pairs: rates.len(),
        rate_mean: mean,
        rate_std: var.sqrt(),
        per_deprel: crate::metrics::per_dependency_rates(&dep_rows),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReachReport {
    pub total: usize,
    pub reachable: usize,
    pub alignment_failures: usize,
    pub fraction: f64,
}

/// Fraction of gold pairs whose aligned kept set is reachable by prunes.
/// Gold text is tokenized, aligned by greedy exact-form matching, and an
/// alignment failure counts as unreachable (tallied separately).
pub fn reachability_report(gold: &[GoldPair], trees: &TreeIndex) -> Result<ReachReport> {
    if gold.is_empty() {
        return Err(Error::InvalidInput("no gold pairs".into()));
    }
    let mut reachable = 0usize;
    let mut align_fail = 0usize;
    for pair in gold {
        let tree = trees.get(&pair.conllu_ref).ok_or_else(|| {
            Error::InvalidInput(format!("unknown conllu_ref {:?}", pair.conllu_ref))
        })?;
        let tokens = text::tokenize(&pair.compression_text);
        match tree.align_tokens(&tokens) {
            Some(kept) => {
                if tree.reachable_by_prunes(&kept) {
                    reachable += 1;
                }
            }
            None => align_fail += 1,
        }
    }
    Ok(ReachReport {
        total: gold.len(),
        reachable,
        alignment_failures: align_fail,
        fraction: reachable as f64 / gold.len() as f64,
    })
}
