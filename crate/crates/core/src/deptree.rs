//! Dependency trees, CoNLL-U I/O, subtree pruning and linearization.
//!
//! A compression of a sentence is produced by repeatedly pruning subtrees
//! from its dependency parse: each prune removes a vertex and all of its
//! descendants, and whatever is left is read off in original token order.
//! The kept sets reachable this way are exactly the head-closed sets that
//! contain the root, which is what [`DepTree::reachable_by_prunes`] tests.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// One token of a parsed sentence. `index` is 1-based; `head` 0 means root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub head: usize,
    pub deprel: String,
}

/// An immutable dependency parse of a single sentence.
#[derive(Debug, Clone)]
pub struct DepTree {
    sentence_id: String,
    tokens: Vec<Token>,
    text: String,
    children: Vec<Vec<usize>>,
    root: usize,
}

/// A single subtree-deletion operation on a kept-token set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneEdit {
    pub pruned_vertex: usize,
    pub removed: BTreeSet<usize>,
    pub before_tokens: Vec<usize>,
    pub after_tokens: Vec<usize>,
}

/// A compression: kept tokens, their linearization, and the edit chain that
/// produced them (possibly empty for the identity compression).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compression {
    pub kept: Vec<usize>,
    pub text: String,
    pub chain: Vec<PruneEdit>,
}

impl DepTree {
    /// Validate raw tokens and build a tree. Tokens must be indexed 1..n in
    /// order, have non-empty forms, exactly one root, and an acyclic head
    /// graph.
    pub fn new(sentence_id: impl Into<String>, tokens: Vec<Token>) -> Result<Self> {
        let sentence_id = sentence_id.into();
        let n = tokens.len();
        let fail = |msg: String| Error::Structure {
            sentence_id: sentence_id.clone(),
            msg,
        };
        if n == 0 {
            return Err(fail("sentence has no tokens".into()));
        }
        let mut root = 0usize;
        for (i, tok) in tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(fail(format!(
                    "token indices not contiguous: expected {}, found {}",
                    i + 1,
                    tok.index
                )));
            }
            if tok.form.is_empty() {
                return Err(fail(format!("token {} has an empty form", tok.index)));
            }
            if tok.head == tok.index {
                return Err(fail(format!("token {} is its own head", tok.index)));
            }
            if tok.head > n {
                return Err(fail(format!(
                    "token {} has head {} out of range 0..{}",
                    tok.index, tok.head, n
                )));
            }
            if tok.head == 0 {
                if root != 0 {
                    return Err(fail(format!(
                        "multiple roots: tokens {} and {}",
                        root, tok.index
                    )));
                }
                root = tok.index;
            }
        }
        if root == 0 {
            return Err(fail("no root token (head = 0)".into()));
        }
        // Cycle check: walk each token toward the root, bounded by n steps.
        for tok in &tokens {
            let mut cur = tok.head;
            let mut steps = 0;
            while cur != 0 {
                cur = tokens[cur - 1].head;
                steps += 1;
                if steps > n {
                    return Err(fail(format!("cycle reachable from token {}", tok.index)));
                }
            }
        }
        let mut children = vec![Vec::new(); n + 1];
        for tok in &tokens {
            if tok.head != 0 {
                children[tok.head].push(tok.index);
            }
        }
        let text = text::join_tokens(tokens.iter().map(|t| t.form.as_str()));
        Ok(DepTree {
            sentence_id,
            tokens,
            text,
            children,
            root,
        })
    }

    pub fn sentence_id(&self) -> &str {
        &self.sentence_id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Detokenized source string.
    pub fn text(&self) -> &str {
        &self.text
    }

    /// Index of the root token.
    pub fn root(&self) -> usize {
        self.root
    }

    /// Token by 1-based index. Panics on out-of-range indices.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// All token indices, 1..=n.
    pub fn all_indices(&self) -> BTreeSet<usize> {
        (1..=self.len()).collect()
    }

    /// The full-tree descendant closure of `vertex`, including `vertex`.
    pub fn descendants(&self, vertex: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![vertex];
        while let Some(v) = stack.pop() {
            if out.insert(v) {
                stack.extend(self.children[v].iter().copied());
            }
        }
        out
    }

    /// True iff every member of `set` has its head in `set` (or is the root).
    pub fn is_head_closed(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().all(|&v| {
            let h = self.tokens[v - 1].head;
            h == 0 || set.contains(&h)
        })
    }

    /// Prune the subtree rooted at `vertex` out of `kept`.
    ///
    /// The removed set is the descendant closure of `vertex` restricted to
    /// `kept`; singleton subtrees are legal prunes. The root may never be
    /// pruned.
    pub fn prune(&self, kept: &BTreeSet<usize>, vertex: usize) -> Result<PruneEdit> {
        if vertex == self.root {
            return Err(Error::InvalidOperation(format!(
                "cannot prune the root token {} of sentence {}",
                vertex, self.sentence_id
            )));
        }
        if !kept.contains(&vertex) {
            return Err(Error::InvalidOperation(format!(
                "vertex {} is not in the kept set of sentence {}",
                vertex, self.sentence_id
            )));
        }
        let removed: BTreeSet<usize> = self
            .descendants(vertex)
            .intersection(kept)
            .copied()
            .collect();
        let before_tokens: Vec<usize> = kept.iter().copied().collect();
        let after_tokens: Vec<usize> = kept.difference(&removed).copied().collect();
        Ok(PruneEdit {
            pruned_vertex: vertex,
            removed,
            before_tokens,
            after_tokens,
        })
    }

    /// Join the kept tokens in index order into text.
    pub fn linearize(&self, kept: &BTreeSet<usize>) -> String {
        text::join_tokens(kept.iter().map(|&v| self.tokens[v - 1].form.as_str()))
    }

    /// True iff `gold_kept` is producible by some sequence of prunes:
    /// it contains the root and is head-closed.
    pub fn reachable_by_prunes(&self, gold_kept: &BTreeSet<usize>) -> bool {
        gold_kept.contains(&self.root) && self.is_head_closed(gold_kept)
    }

    /// Canonical edit chain that produces `kept` from the full sentence: one
    /// prune per maximal removed subtree, applied in ascending vertex order.
    ///
    /// Any head-closed kept set containing the root has exactly one such
    /// decomposition; it is the shortest chain reaching `kept`.
    pub fn chain_from_kept(&self, kept: &BTreeSet<usize>) -> Result<Vec<PruneEdit>> {
        if !self.reachable_by_prunes(kept) {
            return Err(Error::InvalidOperation(format!(
                "kept set of sentence {} is not reachable by prunes",
                self.sentence_id
            )));
        }
        // Maximal removed subtrees are rooted at removed tokens whose head
        // is kept.
        let mut roots: Vec<usize> = (1..=self.len())
            .filter(|v| !kept.contains(v))
            .filter(|&v| {
                let h = self.tokens[v - 1].head;
                h != 0 && kept.contains(&h)
            })
            .collect();
        roots.sort_unstable();
        let mut current = self.all_indices();
        let mut chain = Vec::with_capacity(roots.len());
        for v in roots {
            let edit = self.prune(&current, v)?;
            current = edit.after_tokens.iter().copied().collect();
            chain.push(edit);
        }
        debug_assert_eq!(current, *kept);
        Ok(chain)
    }

    /// Align a tokenized gold compression to this sentence by greedy
    /// left-to-right exact-form matching. Returns the matched kept set, or
    /// `None` when some gold token finds no remaining source token.
    pub fn align_tokens(&self, gold_tokens: &[String]) -> Option<BTreeSet<usize>> {
        let mut kept = BTreeSet::new();
        let mut next = 0usize; // position in self.tokens to resume from
        for g in gold_tokens {
            let found = self.tokens[next..].iter().position(|t| &t.form == g)?;
            let idx = next + found;
            kept.insert(self.tokens[idx].index);
            next = idx + 1;
        }
        Some(kept)
    }

    /// Serialize back to a CoNLL-U block (basic columns only).
    pub fn to_conllu(&self) -> String {
        let mut out = format!("# sent_id = {}\n", self.sentence_id);
        for t in &self.tokens {
            out.push_str(&format!(
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_\n",
                t.index, t.form, t.head, t.deprel
            ));
        }
        out
    }
}

impl Compression {
    /// The identity compression: everything kept, empty chain.
    pub fn identity(tree: &DepTree) -> Compression {
        Compression {
            kept: (1..=tree.len()).collect(),
            text: tree.text().to_string(),
            chain: Vec::new(),
        }
    }

    /// Build from a kept set and the chain that produced it, validating that
    /// the chain really does reproduce `kept` and never drops the root.
    pub fn new(tree: &DepTree, kept: BTreeSet<usize>, chain: Vec<PruneEdit>) -> Result<Compression> {
        if kept.is_empty() {
            return Err(Error::InvalidInput("kept set is empty".into()));
        }
        if !kept.contains(&tree.root()) {
            return Err(Error::InvalidInput("kept set does not contain the root".into()));
        }
        let mut state = tree.all_indices();
        for edit in &chain {
            let expect_before: Vec<usize> = state.iter().copied().collect();
            if edit.before_tokens != expect_before {
                return Err(Error::InvalidChain(
                    "edit does not start from the previous kept state".into(),
                ));
            }
            for v in &edit.removed {
                state.remove(v);
            }
        }
        if state != kept {
            return Err(Error::InvalidChain("chain does not reproduce the kept set".into()));
        }
        let text = tree.linearize(&kept);
        Ok(Compression {
            kept: kept.into_iter().collect(),
            text,
            chain,
        })
    }
}

/// Character-based compression rate: len(compression) / len(source), spaces
/// included. In (0, 1] for any prune-generated compression.
pub fn compression_rate(source: &str, compression: &str) -> Result<f64> {
    if source.is_empty() {
        return Err(Error::InvalidInput("empty source sentence".into()));
    }
    Ok(text::char_len(compression) as f64 / text::char_len(source) as f64)
}

/// Parse a CoNLL-U stream into trees.
///
/// Reads the ID, FORM, HEAD and DEPREL columns of the basic layer;
/// multiword-token ranges (`1-2`) and empty nodes (`1.1`) are skipped.
/// `# sent_id = …` comments name the sentence; otherwise sentences are
/// numbered `s1`, `s2`, … in order of appearance.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Vec<DepTree>> {
    let mut trees = Vec::new();
    let mut block: Vec<Token> = Vec::new();
    let mut pending_id: Option<String> = None;
    let mut ordinal = 0usize;

    let mut flush = |block: &mut Vec<Token>, pending_id: &mut Option<String>| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        ordinal += 1;
        let id = pending_id.take().unwrap_or_else(|| format!("s{ordinal}"));
        trees.push(DepTree::new(id, std::mem::take(block))?);
        Ok(())
    };

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            flush(&mut block, &mut pending_id)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("sent_id") {
                if let Some(v) = rest.trim().strip_prefix('=') {
                    pending_id = Some(v.trim().to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue; // multiword-token range or empty node
        }
        let index: usize = id.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad token id {id:?}"),
        })?;
        let head: usize = cols[6].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad head {:?}", cols[6]),
        })?;
        if cols[1].is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "empty FORM column".into(),
            });
        }
        block.push(Token {
            index,
            form: cols[1].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    flush(&mut block, &mut pending_id)?;
    Ok(trees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

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
        DepTree::new("t", tokens).unwrap()
    }

    /// The sentence from the worked compression example: 22 tokens, no
    /// final period so the two published alternates come out verbatim.
    pub(crate) fn pakistan_tree() -> DepTree {
        tree(&[
            ("Pakistan", 2, "nsubj"),
            ("launched", 0, "root"),
            ("a", 4, "det"),
            ("search", 2, "dobj"),
            ("for", 8, "case"),
            ("its", 8, "nmod:poss"),
            ("missing", 8, "amod"),
            ("ambassador", 4, "nmod"),
            ("to", 10, "case"),
            ("Afghanistan", 8, "nmod"),
            ("on", 12, "case"),
            ("Tuesday", 2, "nmod:tmod"),
            (",", 2, "punct"),
            ("a", 15, "det"),
            ("day", 2, "nmod:tmod"),
            ("after", 18, "mark"),
            ("he", 18, "nsubj"),
            ("disappeared", 15, "acl"),
            ("in", 22, "case"),
            ("a", 22, "det"),
            ("Taliban", 22, "compound"),
            ("area", 18, "nmod"),
        ])
    }

    #[test]
    fn parse_minimal_block() {
        let src = "1\tran\t_\t_\t_\t_\t0\troot\t_\t_\n2\tquickly\t_\t_\t_\t_\t1\tadvmod\t_\t_\n";
        let trees = parse_conllu(Cursor::new(src)).unwrap();
        assert_eq!(trees.len(), 1);
        let t = &trees[0];
        assert_eq!(t.len(), 2);
        assert_eq!(t.root(), 1);
        assert_eq!(t.token(1).form, "ran");
        assert_eq!(t.token(2).deprel, "advmod");
        assert_eq!(t.sentence_id(), "s1");
    }

    #[test]
    fn parse_rejects_self_head() {
        let src = "1\tran\t_\t_\t_\t_\t0\troot\t_\t_\n2\tquickly\t_\t_\t_\t_\t2\tadvmod\t_\t_\n";
        let err = parse_conllu(Cursor::new(src)).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }), "{err}");
    }

    #[test]
    fn parse_rejects_malformed_line_with_number() {
        let src = "1\tran\t_\t_\t_\t_\t0\troot\t_\t_\nnot a conllu line\n";
        match parse_conllu(Cursor::new(src)).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn parse_rejects_multi_root_and_cycle() {
        let two_roots = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n";
        assert!(matches!(
            parse_conllu(Cursor::new(two_roots)).unwrap_err(),
            Error::Structure { .. }
        ));
        let cycle = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t3\tdep\t_\t_\n3\tc\t_\t_\t_\t_\t2\tdep\t_\t_\n";
        assert!(matches!(
            parse_conllu(Cursor::new(cycle)).unwrap_err(),
            Error::Structure { .. }
        ));
    }

    #[test]
    fn parse_skips_mwt_and_empty_nodes() {
        let src = "# sent_id = x1\n1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n\
                   1\tde\t_\t_\t_\t_\t2\tcase\t_\t_\n2\tel\t_\t_\t_\t_\t0\troot\t_\t_\n\
                   2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n";
        let trees = parse_conllu(Cursor::new(src)).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].len(), 2);
        assert_eq!(trees[0].sentence_id(), "x1");
    }

    #[test]
    fn ten_sentence_fixture_token_counts() {
        // Hand-counted: sentence k has k+1 tokens, k = 1..10.
        let mut src = String::new();
        for k in 1..=10usize {
            src.push_str(&format!("# sent_id = f{k}\n"));
            src.push_str("1\tv\t_\t_\t_\t_\t0\troot\t_\t_\n");
            for i in 2..=(k + 1) {
                src.push_str(&format!("{i}\tw{i}\t_\t_\t_\t_\t1\tdep\t_\t_\n"));
            }
            src.push('\n');
        }
        let trees = parse_conllu(Cursor::new(src)).unwrap();
        assert_eq!(trees.len(), 10);
        for (k, t) in trees.iter().enumerate() {
            assert_eq!(t.len(), k + 2);
        }
    }

    #[test]
    fn conllu_round_trip() {
        let t = pakistan_tree();
        let back = parse_conllu(Cursor::new(t.to_conllu())).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].tokens(), t.tokens());
        assert_eq!(back[0].sentence_id(), t.sentence_id());
    }

    #[test]
    fn prune_leaf() {
        let t = tree(&[("ran", 0, "root"), ("quickly", 1, "advmod")]);
        let kept = t.all_indices();
        let edit = t.prune(&kept, 2).unwrap();
        assert_eq!(edit.removed, BTreeSet::from([2]));
        assert_eq!(edit.after_tokens, vec![1]);
    }

    #[test]
    fn prune_rejects_root_and_foreign_vertex() {
        let t = tree(&[("ran", 0, "root"), ("quickly", 1, "advmod")]);
        let kept = t.all_indices();
        assert!(matches!(t.prune(&kept, 1), Err(Error::InvalidOperation(_))));
        let only_root = BTreeSet::from([1]);
        assert!(matches!(
            t.prune(&only_root, 2),
            Err(Error::InvalidOperation(_))
        ));
    }

    #[test]
    fn prune_chain_closures_match_brute_force() {
        // All chain trees a←b←c←… up to 5 nodes: removing vertex v removes
        // v..n, by brute-force closure.
        for n in 2..=5usize {
            let rows: Vec<(String, usize, &str)> = (0..n)
                .map(|i| (format!("w{}", i + 1), i, "dep"))
                .collect();
            let tokens = rows
                .iter()
                .enumerate()
                .map(|(i, (form, head, deprel))| Token {
                    index: i + 1,
                    form: form.clone(),
                    head: *head,
                    deprel: deprel.to_string(),
                })
                .collect();
            let t = DepTree::new("chain", tokens).unwrap();
            for v in 2..=n {
                let edit = t.prune(&t.all_indices(), v).unwrap();
                let expect: BTreeSet<usize> = (v..=n).collect();
                assert_eq!(edit.removed, expect);
            }
        }
    }

    #[test]
    fn pakistan_alternate_1() {
        let t = pakistan_tree();
        let mut kept = t.all_indices();
        let e1 = t.prune(&kept, 15).unwrap(); // clause headed at "day"
        assert_eq!(e1.removed, (14..=22).collect::<BTreeSet<_>>());
        kept = e1.after_tokens.iter().copied().collect();
        let e2 = t.prune(&kept, 13).unwrap(); // the comma
        kept = e2.after_tokens.iter().copied().collect();
        assert_eq!(
            t.linearize(&kept),
            "Pakistan launched a search for its missing ambassador to Afghanistan on Tuesday"
        );
    }

    #[test]
    fn pakistan_alternate_2() {
        let t = pakistan_tree();
        let kept = BTreeSet::from([1, 2, 4, 12]);
        assert!(t.reachable_by_prunes(&kept));
        assert_eq!(t.linearize(&kept), "Pakistan launched search Tuesday");
    }

    #[test]
    fn linearize_identity_and_punct() {
        let t = pakistan_tree();
        assert_eq!(t.linearize(&t.all_indices()), t.text());
        let he = tree(&[("He", 2, "nsubj"), ("ran", 0, "root"), (".", 2, "punct")]);
        assert_eq!(he.linearize(&he.all_indices()), "He ran.");
    }

    #[test]
    fn compression_rate_cases() {
        assert_eq!(compression_rate("abc", "abc").unwrap(), 1.0);
        let r = compression_rate("abc def", "abc").unwrap();
        assert!((r - 3.0 / 7.0).abs() < 1e-12);
        assert!(matches!(
            compression_rate("", "x"),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn reachability_trivial_cases() {
        let t = pakistan_tree();
        assert!(t.reachable_by_prunes(&t.all_indices()));
        let mut no_root = t.all_indices();
        no_root.remove(&t.root());
        assert!(!t.reachable_by_prunes(&no_root));
    }

    #[test]
    fn chain_from_kept_reproduces_kept() {
        let t = pakistan_tree();
        let kept = BTreeSet::from([1, 2, 4, 12]);
        let chain = t.chain_from_kept(&kept).unwrap();
        let c = Compression::new(&t, kept.clone(), chain).unwrap();
        assert_eq!(c.kept, kept.into_iter().collect::<Vec<_>>());
        assert_eq!(c.text, "Pakistan launched search Tuesday");
    }

    #[test]
    fn align_tokens_greedy() {
        let t = pakistan_tree();
        let gold: Vec<String> = ["Pakistan", "launched", "search", "Tuesday"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            t.align_tokens(&gold),
            Some(BTreeSet::from([1, 2, 4, 12]))
        );
        let bad: Vec<String> = ["Pakistan", "sneezed"].iter().map(|s| s.to_string()).collect();
        assert_eq!(t.align_tokens(&bad), None);
    }

    // ----- exhaustive prune-sequence oracle ---------------------------------

    /// Enumerate every kept set reachable by some sequence of prunes,
    /// breadth-first over prune applications. Independent of
    /// `reachable_by_prunes`.
    fn enumerate_reachable(t: &DepTree) -> BTreeSet<BTreeSet<usize>> {
        let mut seen = BTreeSet::new();
        let mut frontier = vec![t.all_indices()];
        seen.insert(t.all_indices());
        while let Some(state) = frontier.pop() {
            for &v in state.iter() {
                if v == t.root() {
                    continue;
                }
                let edit = t.prune(&state, v).unwrap();
                let next: BTreeSet<usize> = edit.after_tokens.iter().copied().collect();
                if seen.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        seen
    }

    fn random_tree(rng: &mut impl rand::Rng, n: usize) -> DepTree {
        // Random recursive tree: parent of token i+1 is uniform over 1..=i.
        let tokens = (1..=n)
            .map(|i| Token {
                index: i,
                form: format!("w{i}"),
                head: if i == 1 { 0 } else { rng.random_range(1..i) },
                deprel: "dep".into(),
            })
            .collect();
        DepTree::new("rnd", tokens).unwrap()
    }

    #[test]
    fn reachable_matches_exhaustive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xDEE5);
        for _ in 0..500 {
            let n = rng.random_range(2..=8usize);
            let t = random_tree(&mut rng, n);
            let reachable = enumerate_reachable(&t);
            // Check every non-empty subset of 1..=n.
            for mask in 1u32..(1 << n) {
                let set: BTreeSet<usize> =
                    (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                assert_eq!(
                    t.reachable_by_prunes(&set),
                    reachable.contains(&set),
                    "tree {:?} set {:?}",
                    t.tokens(),
                    set
                );
            }
        }
    }

    #[test]
    fn prune_sequences_preserve_invariants() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xBEEF);
        for _ in 0..200 {
            let n = rng.random_range(2..=12usize);
            let t = random_tree(&mut rng, n);
            let mut kept = t.all_indices();
            let mut chain = Vec::new();
            let mut union_removed = BTreeSet::new();
            while kept.len() > 1 && rng.random_bool(0.8) {
                let non_root: Vec<usize> =
                    kept.iter().copied().filter(|&v| v != t.root()).collect();
                if non_root.is_empty() {
                    break;
                }
                let v = non_root[rng.random_range(0..non_root.len())];
                let edit = t.prune(&kept, v).unwrap();
                union_removed.extend(edit.removed.iter().copied());
                kept = edit.after_tokens.iter().copied().collect();
                chain.push(edit);
                // Kept stays head-closed and rooted after every prune.
                assert!(kept.contains(&t.root()));
                assert!(t.is_head_closed(&kept));
            }
            // Final kept set = all tokens minus the union of removed sets.
            let expect: BTreeSet<usize> = t
                .all_indices()
                .difference(&union_removed)
                .copied()
                .collect();
            assert_eq!(kept, expect);
            // Linearization preserves original order.
            let text = t.linearize(&kept);
            let forms: Vec<String> = crate::text::tokenize(&text);
            let kept_forms: Vec<String> =
                kept.iter().map(|&v| t.token(v).form.clone()).collect();
            assert_eq!(forms, kept_forms);
            // Rate ≤ 1, equality iff the chain is empty.
            let rate = compression_rate(t.text(), &text).unwrap();
            if chain.is_empty() {
                assert_eq!(rate, 1.0);
            } else {
                assert!(rate < 1.0);
            }
        }
    }
}
