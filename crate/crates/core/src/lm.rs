//! Backoff n-gram language models: ARPA I/O, training with interpolated
//! absolute discounting, and the NormLP / SLOR acceptability normalizations.
//!
//! All probabilities are natural-log internally; ARPA files carry log10 and
//! are converted on load and export. Tokens are lowercased for lookup and
//! out-of-vocabulary words map to `<unk>`, so every sentence has a finite
//! score.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::text;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

const LN10: f64 = std::f64::consts::LN_10;

/// Log10 probability conventionally assigned to `<s>` (never predicted).
const BOS_LOG10: f64 = -99.0;

/// Absolute-discounting constant used by [`train_ngram`].
const DISCOUNT: f64 = 0.75;

#[derive(Debug, Clone, Copy)]
struct Entry {
    /// Natural-log probability.
    logp: f64,
    /// Natural-log backoff weight; 0.0 when absent.
    backoff: f64,
}

/// A backoff n-gram model; immutable after load or training.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    /// levels[k-1] holds the k-gram entries, keyed by lowercased tokens.
    levels: Vec<HashMap<Vec<String>, Entry>>,
}

/// Unigram log-probabilities with an unknown-word fallback. The denominator
/// model of NormLP and SLOR.
#[derive(Debug, Clone)]
pub struct UnigramModel {
    logp: HashMap<String, f64>,
    unk_logp: f64,
}

/// The pair of models every scoring site needs.
#[derive(Debug, Clone)]
pub struct LmBundle {
    pub model: NGramModel,
    pub unigram: UnigramModel,
}

fn norm(token: &str) -> String {
    token.to_lowercase()
}

impl NGramModel {
    /// Build a model directly from per-order entry maps of
    /// `(natural-log prob, natural-log backoff)`. No validation is applied;
    /// intended for synthetic models in tests and tools.
    pub fn from_parts(levels: Vec<HashMap<Vec<String>, (f64, f64)>>) -> NGramModel {
        let order = levels.len();
        let levels = levels
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .map(|(k, (logp, backoff))| (k, Entry { logp, backoff }))
                    .collect()
            })
            .collect();
        NGramModel { order, levels }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored n-grams at each order.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(|m| m.len()).collect()
    }

    fn contains_word(&self, token: &str) -> bool {
        self.levels[0].contains_key(std::slice::from_ref(&token.to_string()))
    }

    /// Map a raw token into the model vocabulary.
    fn vocab_map(&self, token: &str) -> String {
        let t = norm(token);
        if self.contains_word(&t) {
            t
        } else {
            UNK.to_string()
        }
    }

    fn lookup(&self, gram: &[String]) -> Option<Entry> {
        self.levels.get(gram.len() - 1)?.get(gram).copied()
    }

    /// Backoff-smoothed conditional natural-log probability of `word` given
    /// `context` (both already vocabulary-mapped). Standard recursion: use
    /// the longest stored n-gram, otherwise add the context's backoff weight
    /// and retry with a shortened context.
    fn cond_logp(&self, context: &[String], word: &str) -> f64 {
        let mut gram: Vec<String> = context.to_vec();
        gram.push(word.to_string());
        if let Some(e) = self.lookup(&gram) {
            return e.logp;
        }
        if context.is_empty() {
            // Word is vocabulary-mapped, so a unigram entry must exist; be
            // defensive for hand-built models missing <unk>.
            return self
                .lookup(&gram)
                .map(|e| e.logp)
                .unwrap_or(BOS_LOG10 * LN10);
        }
        let bo = self
            .lookup(context)
            .map(|e| e.backoff)
            .unwrap_or(0.0);
        bo + self.cond_logp(&context[1..], word)
    }

    /// Map raw tokens to vocabulary form.
    fn mapped<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        tokens.iter().map(|t| self.vocab_map(t.as_ref())).collect()
    }

    /// Natural-log probability of a sentence with boundary symbols: `<s>` is
    /// used as context and `</s>` is predicted at the end.
    pub fn logprob<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let mut seq = vec![BOS.to_string()];
        seq.extend(self.mapped(tokens));
        seq.push(EOS.to_string());
        self.score_seq(&seq)
    }

    /// Like [`logprob`](Self::logprob) but without the final `</s>` term;
    /// used by SLOR, which normalizes per word.
    pub fn logprob_body<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let mut seq = vec![BOS.to_string()];
        seq.extend(self.mapped(tokens));
        self.score_seq(&seq)
    }

    fn score_seq(&self, seq: &[String]) -> f64 {
        let mut total = 0.0;
        for i in 1..seq.len() {
            let start = i.saturating_sub(self.order - 1).max(0);
            total += self.cond_logp(&seq[start..i], &seq[i]);
        }
        total
    }

    /// Check the stored-model invariants: exponentiated unigram
    /// probabilities (excluding `<s>`) sum to 1 within 1e-4, and every
    /// proper prefix of a stored n-gram is stored.
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.levels[0]
            .iter()
            .filter(|(k, _)| k[0] != BOS)
            .map(|(_, e)| e.logp.exp())
            .sum();
        if (sum - 1.0).abs() > 1e-4 {
            return Err(Error::Format {
                section: "1-grams".into(),
                msg: format!("unigram probabilities sum to {sum}, expected 1"),
            });
        }
        for k in 1..self.order {
            for gram in self.levels[k].keys() {
                if !self.levels[k - 1].contains_key(&gram[..k]) {
                    return Err(Error::Format {
                        section: format!("{}-grams", k + 1),
                        msg: format!("prefix of {:?} is not stored", gram.join(" ")),
                    });
                }
            }
        }
        Ok(())
    }

    /// Write the model in ARPA text format (log10 values).
    pub fn to_arpa<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "\\data\\")?;
        for (k, level) in self.levels.iter().enumerate() {
            writeln!(w, "ngram {}={}", k + 1, level.len())?;
        }
        for (k, level) in self.levels.iter().enumerate() {
            writeln!(w, "\n\\{}-grams:", k + 1)?;
            let mut grams: Vec<(&Vec<String>, &Entry)> = level.iter().collect();
            grams.sort_by(|a, b| a.0.cmp(b.0));
            for (gram, e) in grams {
                let words = gram.join(" ");
                if k + 1 < self.order {
                    writeln!(w, "{}\t{}\t{}", e.logp / LN10, words, e.backoff / LN10)?;
                } else {
                    writeln!(w, "{}\t{}", e.logp / LN10, words)?;
                }
            }
        }
        writeln!(w, "\n\\end\\")?;
        Ok(())
    }
}

/// Parse an ARPA-format model. Log10 values are preserved exactly as read
/// (converted to natural log); declared and actual n-gram counts must match.
pub fn load_arpa<R: BufRead>(reader: R) -> Result<NGramModel> {
    let mut lines = reader.lines();
    let fmt = |section: &str, msg: String| Error::Format {
        section: section.into(),
        msg,
    };

    // Seek \data\.
    loop {
        match lines.next() {
            Some(line) => {
                if line?.trim() == "\\data\\" {
                    break;
                }
            }
            None => return Err(fmt("data", "missing \\data\\ header".into())),
        }
    }
    // Declared counts.
    let mut declared: Vec<usize> = Vec::new();
    loop {
        let line = match lines.next() {
            Some(l) => l?,
            None => return Err(fmt("data", "unexpected end of file".into())),
        };
        let line = line.trim();
        if line.is_empty() {
            if declared.is_empty() {
                continue;
            }
            break;
        }
        if let Some(rest) = line.strip_prefix("ngram ") {
            let (k, n) = rest
                .split_once('=')
                .ok_or_else(|| fmt("data", format!("bad count line {line:?}")))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| fmt("data", format!("bad order in {line:?}")))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| fmt("data", format!("bad count in {line:?}")))?;
            if k != declared.len() + 1 {
                return Err(fmt("data", format!("orders out of sequence at {line:?}")));
            }
            declared.push(n);
        } else {
            break;
        }
    }
    if declared.is_empty() {
        return Err(fmt("data", "no ngram counts declared".into()));
    }

    let order = declared.len();
    let mut levels: Vec<HashMap<Vec<String>, Entry>> =
        (0..order).map(|_| HashMap::new()).collect();
    let mut current: Option<usize> = None; // 1-based order of open section
    let mut saw_end = false;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "\\end\\" {
            saw_end = true;
            break;
        }
        if let Some(rest) = line.strip_prefix('\\') {
            if let Some(k) = rest.strip_suffix("-grams:") {
                let k: usize = k
                    .parse()
                    .map_err(|_| fmt(rest, format!("bad section header {line:?}")))?;
                if k == 0 || k > order {
                    return Err(fmt(
                        &format!("{k}-grams"),
                        "section order not declared in \\data\\".into(),
                    ));
                }
                current = Some(k);
                continue;
            }
            return Err(fmt("data", format!("unexpected directive {line:?}")));
        }
        let k = current.ok_or_else(|| fmt("data", format!("entry before any section: {line:?}")))?;
        let section = format!("{k}-grams");
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != k + 1 && fields.len() != k + 2 {
            return Err(fmt(&section, format!("expected {} or {} fields, found {}", k + 1, k + 2, fields.len())));
        }
        let logp: f64 = fields[0]
            .parse()
            .map_err(|_| fmt(&section, format!("bad log probability {:?}", fields[0])))?;
        let gram: Vec<String> = fields[1..=k].iter().map(|s| s.to_string()).collect();
        let backoff: f64 = if fields.len() == k + 2 {
            fields[k + 1]
                .parse()
                .map_err(|_| fmt(&section, format!("bad backoff {:?}", fields[k + 1])))?
        } else {
            0.0
        };
        levels[k - 1].insert(
            gram,
            Entry {
                logp: logp * LN10,
                backoff: backoff * LN10,
            },
        );
    }
    if !saw_end {
        return Err(fmt("end", "missing \\end\\ marker".into()));
    }
    for (k, (level, want)) in levels.iter().zip(&declared).enumerate() {
        if level.len() != *want {
            return Err(fmt(
                &format!("{}-grams", k + 1),
                format!("declared {} entries, found {}", want, level.len()),
            ));
        }
    }
    Ok(NGramModel { order, levels })
}

/// Train a backoff model with interpolated absolute discounting
/// (discount 0.75) over a tokenized corpus. Sentences are padded with one
/// `<s>` and a final `</s>`; tokens are lowercased. The reserved probability
/// mass gives `<unk>` a nonzero unigram probability.
pub fn train_ngram(corpus: &[Vec<String>], order: usize) -> Result<NGramModel> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("empty training corpus".into()));
    }
    if order == 0 || order > 5 {
        return Err(Error::InvalidInput(format!(
            "order {order} out of supported range 1..=5"
        )));
    }

    // Count n-grams of every order over padded sentences.
    let mut counts: Vec<HashMap<Vec<String>, u64>> = (0..order).map(|_| HashMap::new()).collect();
    let mut successors: Vec<HashMap<Vec<String>, HashSet<String>>> =
        (0..order.saturating_sub(1)).map(|_| HashMap::new()).collect();
    for sentence in corpus {
        let mut seq = vec![BOS.to_string()];
        seq.extend(sentence.iter().map(|t| norm(t)));
        seq.push(EOS.to_string());
        for k in 1..=order {
            for window in seq.windows(k) {
                *counts[k - 1].entry(window.to_vec()).or_insert(0) += 1;
                if k >= 2 {
                    successors[k - 2]
                        .entry(window[..k - 1].to_vec())
                        .or_default()
                        .insert(window[k - 1].clone());
                }
            }
        }
    }

    let d = DISCOUNT;
    let mut levels: Vec<HashMap<Vec<String>, Entry>> = Vec::with_capacity(order);

    // Unigram level. <s> is context-only: probability fixed at 10^-99 and
    // excluded from the normalized distribution.
    let total: u64 = counts[0]
        .iter()
        .filter(|(k, _)| k[0] != BOS)
        .map(|(_, c)| *c)
        .sum();
    let seen_types = counts[0].keys().filter(|k| k[0] != BOS).count();
    let has_unk = counts[0].contains_key(&vec![UNK.to_string()]);
    let vocab_size = seen_types + usize::from(!has_unk);
    let uniform_share = d * seen_types as f64 / (total as f64 * vocab_size as f64);
    let mut level1: HashMap<Vec<String>, Entry> = HashMap::new();
    for (gram, &c) in &counts[0] {
        if gram[0] == BOS {
            continue;
        }
        let p = (c as f64 - d).max(0.0) / total as f64 + uniform_share;
        level1.insert(
            gram.clone(),
            Entry {
                logp: p.ln(),
                backoff: 0.0,
            },
        );
    }
    if !has_unk {
        level1.insert(
            vec![UNK.to_string()],
            Entry {
                logp: uniform_share.ln(),
                backoff: 0.0,
            },
        );
    }
    level1.insert(
        vec![BOS.to_string()],
        Entry {
            logp: BOS_LOG10 * LN10,
            backoff: 0.0,
        },
    );
    levels.push(level1);

    // Backoff weights live on the context's entry one level down.
    for k in 2..=order {
        // First assign backoff weights to (k-1)-gram contexts.
        let mut context_backoff: HashMap<Vec<String>, f64> = HashMap::new();
        for (ctx, succ) in &successors[k - 2] {
            let c_ctx = counts[k - 2][ctx] as f64;
            context_backoff.insert(ctx.clone(), (d * succ.len() as f64 / c_ctx).ln());
        }
        for (ctx, bo) in &context_backoff {
            if let Some(e) = levels[k - 2].get_mut(ctx) {
                e.backoff = *bo;
            }
        }
        // Then compute interpolated probabilities for seen k-grams, backing
        // off into the freshly finished lower levels.
        let model_so_far = NGramModel {
            order: k - 1,
            levels: levels.clone(),
        };
        let mut level: HashMap<Vec<String>, Entry> = HashMap::new();
        for (gram, &c) in &counts[k - 1] {
            let ctx = &gram[..k - 1];
            let word = &gram[k - 1];
            if word == BOS {
                continue; // <s> is never predicted
            }
            let c_ctx = counts[k - 2][ctx] as f64;
            let bo = context_backoff
                .get(ctx)
                .copied()
                .unwrap_or(f64::NEG_INFINITY);
            let lower = model_so_far.cond_logp(&ctx[1..], word);
            let p = (c as f64 - d).max(0.0) / c_ctx + (bo + lower).exp();
            level.insert(
                gram.clone(),
                Entry {
                    logp: p.ln(),
                    backoff: 0.0,
                },
            );
        }
        levels.push(level);
    }

    let model = NGramModel { order, levels };
    debug_assert!(model.validate().is_ok());
    Ok(model)
}

impl UnigramModel {
    /// Extract the unigram distribution of an n-gram model (everything but
    /// `<s>`).
    pub fn from_ngram(model: &NGramModel) -> UnigramModel {
        let mut logp = HashMap::new();
        let mut unk_logp = f64::NEG_INFINITY;
        for (gram, e) in &model.levels[0] {
            if gram[0] == BOS {
                continue;
            }
            if gram[0] == UNK {
                unk_logp = e.logp;
            }
            logp.insert(gram[0].clone(), e.logp);
        }
        UnigramModel { logp, unk_logp }
    }

    /// Build from explicit probabilities. The map must include `<unk>` and
    /// the probabilities must sum to 1 within 1e-4.
    pub fn from_probs(probs: &BTreeMap<String, f64>) -> Result<UnigramModel> {
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > 1e-4 {
            return Err(Error::InvalidInput(format!(
                "unigram probabilities sum to {sum}, expected 1"
            )));
        }
        let unk = *probs
            .get(UNK)
            .ok_or_else(|| Error::InvalidInput("missing <unk> probability".into()))?;
        Ok(UnigramModel {
            logp: probs.iter().map(|(k, v)| (norm(k), v.ln())).collect(),
            unk_logp: unk.ln(),
        })
    }

    fn word_logp(&self, token: &str) -> f64 {
        *self.logp.get(&norm(token)).unwrap_or(&self.unk_logp)
    }

    /// Natural-log unigram probability of the words; no boundary symbols.
    pub fn logprob<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        tokens.iter().map(|t| self.word_logp(t.as_ref())).sum()
    }

    /// Exponentiated probabilities must sum to 1 within 1e-4.
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.logp.values().map(|lp| lp.exp()).sum();
        if (sum - 1.0).abs() > 1e-4 {
            return Err(Error::InvalidInput(format!(
                "unigram probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// NormLP from precomputed sentence log-probabilities:
/// `−log p_m(ξ) / log p_u(ξ)`. Higher is better formed.
pub fn norm_lp_from_logs(logp_m: f64, logp_u: f64) -> Result<f64> {
    if logp_u.abs() < 1e-9 {
        return Err(Error::UndefinedScore(
            "unigram log probability is (near) zero".into(),
        ));
    }
    Ok(-(logp_m / logp_u))
}

/// NormLP of a sentence. The model side includes boundary symbols; the
/// unigram denominator covers the words only.
pub fn norm_lp<S: AsRef<str>>(
    model: &NGramModel,
    unigram: &UnigramModel,
    tokens: &[S],
) -> Result<f64> {
    norm_lp_from_logs(model.logprob(tokens), unigram.logprob(tokens))
}

/// SLOR: `(log p_m(ξ) − log p_u(ξ)) / |ξ|`. The model side here scores the
/// words only (no `</s>` term), so the score is exactly
/// length-invariant under a unigram model.
pub fn slor<S: AsRef<str>>(model: &NGramModel, unigram: &UnigramModel, tokens: &[S]) -> f64 {
    debug_assert!(!tokens.is_empty());
    if tokens.is_empty() {
        return 0.0;
    }
    (model.logprob_body(tokens) - unigram.logprob(tokens)) / tokens.len() as f64
}

impl LmBundle {
    /// Bundle a model with its own unigram distribution.
    pub fn from_model(model: NGramModel) -> LmBundle {
        let unigram = UnigramModel::from_ngram(&model);
        LmBundle { model, unigram }
    }

    /// NormLP of plain text, tokenized with [`text::tokenize`].
    pub fn norm_lp_text(&self, s: &str) -> Result<f64> {
        let tokens = text::tokenize(s);
        if tokens.is_empty() {
            return Err(Error::InvalidInput("empty sentence".into()));
        }
        norm_lp(&self.model, &self.unigram, &tokens)
    }
}
