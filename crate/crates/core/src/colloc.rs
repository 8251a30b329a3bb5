//! Word-pair offset statistics and collocation detection.
//!
//! For every ordered word pair co-occurring within a fixed window, the
//! builder records the count, mean and variance of the signed token
//! distance. A pair with a stable small offset ("as well", "kind of") is a
//! collocation; an edit that deletes one member of such a pair while keeping
//! the other breaks it.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::deptree::{DepTree, PruneEdit};
use crate::error::{Error, Result};

/// Default co-occurrence window, in tokens.
pub const DEFAULT_WINDOW: usize = 4;

/// Default minimum pair count before a pair can count as a collocation.
pub const DEFAULT_MIN_COUNT: u64 = 10;

/// Variance threshold: collocations have offset variance below this.
const VARIANCE_MAX: f64 = 2.0;

/// Mean threshold: collocations have |mean offset| below this.
const MEAN_ABS_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, Default)]
struct PairStat {
    count: u64,
    mean: f64,
    m2: f64,
}

impl PairStat {
    fn push(&mut self, x: f64) {
        // Welford's online update.
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }
}

/// Signed token-distance statistics per ordered lowercased word pair.
/// Immutable after build; queries are pure.
#[derive(Debug, Clone)]
pub struct OffsetStats {
    window: usize,
    pairs: HashMap<(String, String), PairStat>,
}

/// Collect offset statistics from a tokenized corpus. For each ordered pair
/// `(w1, w2)` co-occurring within `window` tokens, records the distribution
/// of `position(w2) − position(w1)`; both orientations are stored, with
/// opposite signs.
pub fn build_offset_stats(corpus: &[Vec<String>], window: usize) -> Result<OffsetStats> {
    if window == 0 {
        return Err(Error::InvalidInput("window must be at least 1".into()));
    }
    if corpus.is_empty() {
        return Err(Error::InvalidInput("empty corpus".into()));
    }
    let mut pairs: HashMap<(String, String), PairStat> = HashMap::new();
    for sentence in corpus {
        let lower: Vec<String> = sentence.iter().map(|t| t.to_lowercase()).collect();
        for i in 0..lower.len() {
            for j in (i + 1)..lower.len().min(i + window + 1) {
                let d = (j - i) as f64;
                pairs
                    .entry((lower[i].clone(), lower[j].clone()))
                    .or_default()
                    .push(d);
                pairs
                    .entry((lower[j].clone(), lower[i].clone()))
                    .or_default()
                    .push(-d);
            }
        }
    }
    Ok(OffsetStats { window, pairs })
}

impl OffsetStats {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Count, mean, variance for an ordered pair, if recorded.
    pub fn get(&self, w1: &str, w2: &str) -> Option<(u64, f64, f64)> {
        self.pairs
            .get(&(w1.to_lowercase(), w2.to_lowercase()))
            .map(|s| (s.count, s.mean, s.variance()))
    }

    /// True iff the ordered pair is a collocation: seen at least `min_count`
    /// times with offset variance < 2 and |mean offset| < 1.5.
    pub fn is_collocation(&self, w1: &str, w2: &str, min_count: u64) -> bool {
        match self.get(w1, w2) {
            Some((count, mean, var)) => {
                count >= min_count && var < VARIANCE_MAX && mean.abs() < MEAN_ABS_MAX
            }
            None => false,
        }
    }

    /// True iff the edit deletes exactly one member of some collocation pair
    /// that co-occurred within the window in the pre-edit token sequence.
    pub fn edit_breaks_collocation(
        &self,
        tree: &DepTree,
        edit: &PruneEdit,
        min_count: u64,
    ) -> bool {
        let seq: Vec<(usize, String)> = edit
            .before_tokens
            .iter()
            .map(|&v| (v, tree.token(v).form.to_lowercase()))
            .collect();
        for i in 0..seq.len() {
            for j in (i + 1)..seq.len().min(i + self.window + 1) {
                let removed_i = edit.removed.contains(&seq[i].0);
                let removed_j = edit.removed.contains(&seq[j].0);
                if removed_i != removed_j && self.is_collocation(&seq[i].1, &seq[j].1, min_count) {
                    return true;
                }
            }
        }
        false
    }

    /// Serialize as sorted tab-separated rows: w1, w2, count, mean, variance.
    pub fn to_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut rows: Vec<(&(String, String), &PairStat)> = self.pairs.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        writeln!(w, "# window={}", self.window)?;
        for ((w1, w2), s) in rows {
            writeln!(w, "{}\t{}\t{}\t{}\t{}", w1, w2, s.count, s.mean, s.variance())?;
        }
        Ok(())
    }

    /// Read statistics written by [`to_tsv`](Self::to_tsv).
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<OffsetStats> {
        let mut window = DEFAULT_WINDOW;
        let mut pairs = HashMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("window=") {
                    window = v.trim().parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad window {v:?}"),
                    })?;
                }
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected 5 columns, found {}", cols.len()),
                });
            }
            let count: u64 = cols[2].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad count {:?}", cols[2]),
            })?;
            let mean: f64 = cols[3].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad mean {:?}", cols[3]),
            })?;
            let variance: f64 = cols[4].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad variance {:?}", cols[4]),
            })?;
            pairs.insert(
                (cols[0].to_string(), cols[1].to_string()),
                PairStat {
                    count,
                    mean,
                    m2: variance * count as f64,
                },
            );
        }
        Ok(OffsetStats { window, pairs })
    }
}
