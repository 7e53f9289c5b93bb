//! Words over a finite alphabet and subshifts of finite type.
//!
//! A subshift is described by a finite list of forbidden factors. Compiling
//! it produces a [`SubshiftAutomaton`]: a prefix trie over the allowed
//! `m`-words glued onto the de Bruijn-style transition graph between them,
//! with dead states removed. Paths of length `n` from the root of that graph
//! are exactly the length-`n` prefixes of infinite allowed sequences.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A symbol of the alphabet `{0, .., κ-1}`.
pub type Letter = usize;

/// Index of a node in a [`SubshiftAutomaton`].
pub type NodeId = usize;

/// A finite word. The empty word is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    /// The prefix of length `n` (the whole word if it is shorter).
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The word with its last letter removed.
    pub fn parent(&self) -> Word {
        self.prefix(self.len().saturating_sub(1))
    }

    /// Drops the first `n` letters.
    pub fn shift(&self, n: usize) -> Word {
        Word(self.0[n.min(self.0.len())..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// True if `other` occurs as a contiguous block inside `self`.
    pub fn contains_factor(&self, other: &Word) -> bool {
        other.is_empty() || self.0.windows(other.len()).any(|w| w == other.letters())
    }
}

impl From<Vec<Letter>> for Word {
    fn from(letters: Vec<Letter>) -> Self {
        Word(letters)
    }
}

impl From<&[Letter]> for Word {
    fn from(letters: &[Letter]) -> Self {
        Word(letters.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&l| l < 10) {
            for l in &self.0 {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Parses a string of decimal digits, one letter per digit, or a
/// dot-separated list of letter indices.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse word {s:?}"));
        if s.contains('.') {
            s.split('.')
                .map(|p| p.parse::<Letter>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(Word)
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as Letter).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()
                .map(Word)
        }
    }
}

/// A subshift of finite type over `alphabet` letters, given by forbidden
/// factors. The forbidden list is normalized on construction: duplicates and
/// words containing another forbidden word are dropped, and the rest sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubshiftSpec {
    alphabet: usize,
    forbidden: Vec<Word>,
}

impl SubshiftSpec {
    pub fn full_shift(alphabet: usize) -> Result<Self> {
        Self::new(alphabet, Vec::new())
    }

    pub fn new(alphabet: usize, forbidden: Vec<Word>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidSubshift("alphabet must be nonempty".into()));
        }
        for w in &forbidden {
            if w.len() < 2 {
                return Err(Error::InvalidSubshift(format!(
                    "forbidden word {w} has length {} (need at least 2)",
                    w.len()
                )));
            }
            if let Some(&l) = w.letters().iter().find(|&&l| l >= alphabet) {
                return Err(Error::LetterOutOfRange {
                    letter: l,
                    alphabet,
                });
            }
        }
        let mut words = forbidden;
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        words.dedup();
        let mut kept: Vec<Word> = Vec::with_capacity(words.len());
        for w in words {
            if !kept.iter().any(|k| w.contains_factor(k)) {
                kept.push(w);
            }
        }
        kept.sort();
        Ok(SubshiftSpec {
            alphabet,
            forbidden: kept,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn forbidden(&self) -> &[Word] {
        &self.forbidden
    }

    pub fn is_full_shift(&self) -> bool {
        self.forbidden.is_empty()
    }

    /// Longest forbidden word length minus one.
    pub fn memory(&self) -> usize {
        self.forbidden
            .iter()
            .map(|w| w.len() - 1)
            .max()
            .unwrap_or(0)
    }

    /// True if the word contains no forbidden factor. This does not check
    /// that the word extends to an infinite allowed sequence.
    pub fn avoids_forbidden(&self, w: &[Letter]) -> bool {
        let w = Word::from(w);
        !self.forbidden.iter().any(|f| w.contains_factor(f))
    }

    pub fn compile(&self) -> Result<SubshiftAutomaton> {
        SubshiftAutomaton::compile(self)
    }
}

#[derive(Clone, Debug)]
struct Node {
    edges: Vec<(Letter, NodeId)>,
}

/// Compiled form of a [`SubshiftSpec`].
///
/// The first nodes form a prefix trie (node 0 is the root, the empty
/// word) over the live `m`-words; the remaining nodes are the live states
/// themselves. Every node has at least one outgoing edge and edges are
/// sorted by letter.
#[derive(Clone, Debug)]
pub struct SubshiftAutomaton {
    alphabet: usize,
    memory: usize,
    nodes: Vec<Node>,
    states: Vec<Word>,
}

fn has_forbidden_suffix(w: &[Letter], forbidden: &HashSet<Vec<Letter>>, max_len: usize) -> bool {
    (2..=max_len.min(w.len())).any(|l| forbidden.contains(&w[w.len() - l..]))
}

impl SubshiftAutomaton {
    pub fn compile(spec: &SubshiftSpec) -> Result<Self> {
        let kappa = spec.alphabet;
        let m = spec.memory();
        let forbidden: HashSet<Vec<Letter>> = spec
            .forbidden
            .iter()
            .map(|w| w.letters().to_vec())
            .collect();
        let max_len = m + 1;

        // Candidate states: all m-words without a forbidden factor, in
        // lexicographic order.
        let mut candidates: Vec<Vec<Letter>> = Vec::new();
        let mut stack: Vec<Vec<Letter>> = vec![Vec::new()];
        while let Some(w) = stack.pop() {
            if w.len() == m {
                candidates.push(w);
                continue;
            }
            for a in (0..kappa).rev() {
                let mut next = w.clone();
                next.push(a);
                if !has_forbidden_suffix(&next, &forbidden, max_len) {
                    stack.push(next);
                }
            }
        }
        let index: HashMap<Vec<Letter>, usize> = candidates
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();

        let mut transitions: Vec<Vec<(Letter, usize)>> = candidates
            .iter()
            .map(|s| {
                (0..kappa)
                    .filter_map(|a| {
                        let mut w = s.clone();
                        w.push(a);
                        if has_forbidden_suffix(&w, &forbidden, max_len) {
                            None
                        } else {
                            index.get(&w[1..]).map(|&t| (a, t))
                        }
                    })
                    .collect()
            })
            .collect();

        // Prune states without successors until nothing changes.
        let mut alive = vec![true; candidates.len()];
        loop {
            let mut changed = false;
            for s in 0..candidates.len() {
                if !alive[s] {
                    continue;
                }
                transitions[s].retain(|&(_, t)| alive[t]);
                if transitions[s].is_empty() {
                    alive[s] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for s in 0..candidates.len() {
            transitions[s].retain(|&(_, t)| alive[t]);
        }
        if !alive.iter().any(|&a| a) {
            return Err(Error::EmptySubshift);
        }

        // Trie over the live states' proper prefixes.
        let live: Vec<usize> = (0..candidates.len()).filter(|&s| alive[s]).collect();
        let mut trie: Vec<Node> = Vec::new();
        let mut trie_index: HashMap<Vec<Letter>, NodeId> = HashMap::new();
        if m > 0 {
            trie.push(Node { edges: Vec::new() });
            trie_index.insert(Vec::new(), 0);
            for &s in &live {
                let w = &candidates[s];
                for len in 1..m {
                    if !trie_index.contains_key(&w[..len]) {
                        let id = trie.len();
                        trie.push(Node { edges: Vec::new() });
                        trie_index.insert(w[..len].to_vec(), id);
                        let parent = trie_index[&w[..len - 1]];
                        trie[parent].edges.push((w[len - 1], id));
                    }
                }
            }
        }
        let trie_len = trie.len();
        let state_node: HashMap<usize, NodeId> = live
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, trie_len + i))
            .collect();
        if m > 0 {
            for &s in &live {
                let w = &candidates[s];
                let parent = trie_index[&w[..m - 1]];
                trie[parent].edges.push((w[m - 1], state_node[&s]));
            }
        }
        let mut nodes = trie;
        for &s in &live {
            nodes.push(Node {
                edges: transitions[s]
                    .iter()
                    .map(|&(a, t)| (a, state_node[&t]))
                    .collect(),
            });
        }
        for node in &mut nodes {
            node.edges.sort_unstable();
        }
        let states = live.iter().map(|&s| Word(candidates[s].clone())).collect();

        Ok(SubshiftAutomaton {
            alphabet: kappa,
            memory: m,
            nodes,
            states,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// The live `m`-words, in lexicographic order.
    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Outgoing edges of `node`, sorted by letter.
    pub fn successors(&self, node: NodeId) -> &[(Letter, NodeId)] {
        &self.nodes[node].edges
    }

    pub fn step(&self, node: NodeId, letter: Letter) -> Option<NodeId> {
        self.nodes[node]
            .edges
            .iter()
            .find(|&&(a, _)| a == letter)
            .map(|&(_, t)| t)
    }

    /// Node reached by reading `letters` from the root, if the word is allowed.
    pub fn node_after(&self, letters: &[Letter]) -> Option<NodeId> {
        letters
            .iter()
            .try_fold(self.root(), |node, &a| self.step(node, a))
    }

    /// Whether `w` belongs to `K_{|w|}`.
    pub fn is_allowed(&self, w: &Word) -> Result<bool> {
        if let Some(&l) = w.letters().iter().find(|&&l| l >= self.alphabet) {
            return Err(Error::LetterOutOfRange {
                letter: l,
                alphabet: self.alphabet,
            });
        }
        Ok(self.node_after(w.letters()).is_some())
    }

    /// Number of words in `K_n`, computed by dynamic programming over the
    /// graph. Saturates at `u128::MAX`.
    pub fn count(&self, n: usize) -> u128 {
        let mut paths = vec![1u128; self.nodes.len()];
        for _ in 0..n {
            paths = self
                .nodes
                .iter()
                .map(|node| {
                    node.edges
                        .iter()
                        .fold(0u128, |acc, &(_, t)| acc.saturating_add(paths[t]))
                })
                .collect();
        }
        paths[self.root()]
    }

    /// Lexicographically ordered enumeration of `K_n`.
    pub fn words(&self, n: usize) -> Words<'_> {
        Words {
            automaton: self,
            n,
            stack: vec![(self.root(), 0)],
            word: Vec::with_capacity(n),
            emit_empty: n == 0,
        }
    }

    /// The first `len` letters of the lexicographically least infinite
    /// continuation from `node`.
    pub fn least_tail(&self, node: NodeId, len: usize) -> Vec<Letter> {
        let mut out = Vec::with_capacity(len);
        let mut at = node;
        for _ in 0..len {
            let (a, t) = self.nodes[at].edges[0];
            out.push(a);
            at = t;
        }
        out
    }

    /// Depth-first traversal of every allowed word of length `1..=max_depth`
    /// that starts with `prefix`, in lexicographic order.
    ///
    /// `init` is the state attached to `prefix`; `extend` derives the state
    /// of `w·a` from that of `w`. `visit` sees each word (prefix included)
    /// together with its state. The prefix itself is not visited.
    pub fn walk_under<S, E, V>(
        &self,
        prefix: &[Letter],
        max_depth: usize,
        init: S,
        mut extend: E,
        mut visit: V,
    ) where
        E: FnMut(&S, Letter) -> S,
        V: FnMut(&[Letter], &S),
    {
        let Some(start) = self.node_after(prefix) else {
            return;
        };
        if prefix.len() >= max_depth {
            return;
        }
        let mut word: Vec<Letter> = prefix.to_vec();
        let mut stack: Vec<(NodeId, usize, S)> = vec![(start, 0, init)];
        while let Some((node, idx, state)) = stack.last_mut() {
            let edges = &self.nodes[*node].edges;
            if *idx == edges.len() {
                stack.pop();
                if word.len() > prefix.len() {
                    word.pop();
                }
                continue;
            }
            let (a, next) = edges[*idx];
            *idx += 1;
            let child = extend(state, a);
            word.push(a);
            visit(&word, &child);
            if word.len() < max_depth {
                stack.push((next, 0, child));
            } else {
                word.pop();
            }
        }
    }

    /// [`walk_under`](Self::walk_under) from the empty word.
    pub fn walk<S, E, V>(&self, max_depth: usize, init: S, extend: E, visit: V)
    where
        E: FnMut(&S, Letter) -> S,
        V: FnMut(&[Letter], &S),
    {
        self.walk_under(&[], max_depth, init, extend, visit)
    }

    /// Letters `a` with `a ∈ K_1`.
    pub fn first_letters(&self) -> Vec<Letter> {
        self.successors(self.root())
            .iter()
            .map(|&(a, _)| a)
            .collect()
    }

    /// Whether every letter pair is allowed, i.e. this is the full shift.
    pub fn is_full_shift(&self) -> bool {
        self.memory == 0 && self.nodes[0].edges.len() == self.alphabet
    }
}

/// Iterator over `K_n`, see [`SubshiftAutomaton::words`].
pub struct Words<'a> {
    automaton: &'a SubshiftAutomaton,
    n: usize,
    stack: Vec<(NodeId, usize)>,
    word: Vec<Letter>,
    emit_empty: bool,
}

impl Iterator for Words<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.n == 0 {
            return std::mem::take(&mut self.emit_empty).then(Word::empty);
        }
        loop {
            let (node, idx) = self.stack.last_mut()?;
            let edges = self.automaton.successors(*node);
            if *idx == edges.len() {
                self.stack.pop();
                self.word.pop();
                continue;
            }
            let (a, next) = edges[*idx];
            *idx += 1;
            self.word.push(a);
            if self.word.len() == self.n {
                let out = Word(self.word.clone());
                self.word.pop();
                return Some(out);
            }
            self.stack.push((next, 0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn spec(kappa: usize, forbidden: &[&str]) -> SubshiftSpec {
        SubshiftSpec::new(kappa, forbidden.iter().map(|s| w(s)).collect()).unwrap()
    }

    /// Words of length n with no forbidden factor that extend to length
    /// n + horizon. For an SFT with memory m, horizon = number of m-words
    /// suffices (a path that long must revisit a state, hence loops).
    fn brute_force(spec: &SubshiftSpec, n: usize, horizon: usize) -> Vec<Word> {
        let kappa = spec.alphabet();
        let total = n + horizon;
        let mut ok = Vec::new();
        let mut all = vec![Vec::<Letter>::new()];
        for _ in 0..n {
            all = all
                .into_iter()
                .flat_map(|p| {
                    (0..kappa).map(move |a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                })
                .filter(|q| spec.avoids_forbidden(q))
                .collect();
        }
        for p in all {
            let mut frontier = vec![p.clone()];
            for _ in n..total {
                frontier = frontier
                    .into_iter()
                    .flat_map(|q| {
                        (0..kappa).map(move |a| {
                            let mut r = q.clone();
                            r.push(a);
                            r
                        })
                    })
                    .filter(|r| {
                        spec.avoids_forbidden(&r[r.len().saturating_sub(spec.memory() + 1)..])
                    })
                    .map(|r| r[r.len().saturating_sub(spec.memory())..].to_vec())
                    .collect::<HashSet<_>>()
                    .into_iter()
                    .collect();
                if frontier.is_empty() {
                    break;
                }
            }
            if !frontier.is_empty() {
                ok.push(Word(p));
            }
        }
        ok
    }

    #[test]
    fn full_shift_counts() {
        let a = SubshiftSpec::full_shift(2).unwrap().compile().unwrap();
        assert_eq!(a.count(10), 1024);
        let words: Vec<String> = a.words(2).map(|x| x.to_string()).collect();
        assert_eq!(words, ["00", "01", "10", "11"]);
        assert!(a.is_allowed(&w("0110")).unwrap());
        assert!(a.is_full_shift());
        let b = SubshiftSpec::full_shift(3).unwrap().compile().unwrap();
        assert_eq!(b.count(7), 3u128.pow(7));
    }

    #[test]
    fn two_fixed_points() {
        let a = spec(2, &["01", "10"]).compile().unwrap();
        for n in 1..=10 {
            assert_eq!(a.count(n), 2);
        }
        let words: Vec<String> = a.words(3).map(|x| x.to_string()).collect();
        assert_eq!(words, ["000", "111"]);
        // both letters are allowed but their concatenation is not
        assert!(a.is_allowed(&w("0")).unwrap());
        assert!(a.is_allowed(&w("1")).unwrap());
        assert!(!a.is_allowed(&w("01")).unwrap());
    }

    #[test]
    fn forbidden_01() {
        let s = spec(2, &["01"]);
        let a = s.compile().unwrap();
        assert_eq!(a.count(10), 11);
        let words: Vec<String> = a.words(3).map(|x| x.to_string()).collect();
        assert_eq!(words, ["000", "100", "110", "111"]);
        assert!(!a.is_allowed(&w("0110")).unwrap());
        assert!(a.is_allowed(&w("1100")).unwrap());
        for n in 1..=12 {
            let brute = brute_force(&s, n, 4);
            assert_eq!(a.count(n), brute.len() as u128);
            assert_eq!(a.words(n).collect::<Vec<_>>(), brute);
        }
    }

    #[test]
    fn letter_out_of_range() {
        let a = SubshiftSpec::full_shift(2).unwrap().compile().unwrap();
        assert_eq!(
            a.is_allowed(&w("012")),
            Err(Error::LetterOutOfRange {
                letter: 2,
                alphabet: 2
            })
        );
        assert!(matches!(
            SubshiftSpec::new(2, vec![w("02")]),
            Err(Error::LetterOutOfRange { .. })
        ));
    }

    #[test]
    fn dead_ends_are_pruned() {
        // "0" may only be followed by "0" then must be followed by "1": 001
        // is forbidden and so is 000, so any 0 leads to a dead end.
        let s = spec(2, &["000", "001"]);
        let a = s.compile().unwrap();
        // Every word containing "00" is dead; "0" followed by "1" fine.
        for n in 1..=10 {
            let brute = brute_force(&s, n, 8);
            assert_eq!(a.words(n).collect::<Vec<_>>(), brute, "n = {n}");
        }
        assert!(!a.is_allowed(&w("100")).unwrap());
        assert!(a.is_allowed(&w("1010")).unwrap());
    }

    #[test]
    fn empty_subshift_is_an_error() {
        let s = spec(2, &["00", "01", "10", "11"]);
        assert_eq!(s.compile().unwrap_err(), Error::EmptySubshift);
        let s = spec(2, &["00", "11", "010"]);
        // 0101.. contains 010, 1010.. contains 010: nothing survives
        assert_eq!(s.compile().unwrap_err(), Error::EmptySubshift);
    }

    #[test]
    fn normalization_drops_redundant_words() {
        let s = spec(2, &["01", "001", "01", "1011"]);
        assert_eq!(s.forbidden(), &[w("01")]);
        assert_eq!(s.memory(), 1);
        assert!(SubshiftSpec::new(2, vec![w("0")]).is_err());
    }

    #[test]
    fn short_words_below_memory() {
        // memory 3, so n < 3 goes through the prefix trie
        let s = spec(3, &["0120", "22", "11"]);
        let a = s.compile().unwrap();
        for n in 0..=9 {
            let brute = brute_force(&s, n, 30);
            assert_eq!(a.count(n), brute.len() as u128, "n = {n}");
            assert_eq!(a.words(n).collect::<Vec<_>>(), brute, "n = {n}");
        }
    }

    #[test]
    fn walk_visits_all_prefixes_in_order() {
        let a = spec(2, &["01"]).compile().unwrap();
        let mut seen = Vec::new();
        a.walk(
            3,
            0usize,
            |d, _| d + 1,
            |word, d| {
                assert_eq!(word.len(), *d);
                seen.push(Word::from(word));
            },
        );
        let mut expected: Vec<Word> = (1..=3).flat_map(|n| a.words(n)).collect();
        expected.sort();
        assert_eq!(seen, expected);
    }

    #[test]
    fn least_tail_is_lexicographically_least() {
        let a = spec(2, &["01"]).compile().unwrap();
        let node = a.node_after(&[1, 1]).unwrap();
        assert_eq!(a.least_tail(node, 4), vec![0, 0, 0, 0]);
        let b = spec(2, &["00"]).compile().unwrap();
        let node = b.node_after(&[0]).unwrap();
        assert_eq!(b.least_tail(node, 4), vec![1, 0, 1, 0]);
    }

    #[test]
    fn word_helpers() {
        let x = w("0110");
        assert_eq!(x.prefix(2), w("01"));
        assert_eq!(x.parent(), w("011"));
        assert_eq!(x.shift(1), w("110"));
        assert_eq!(x.concat(&w("1")), w("01101"));
        assert_eq!(Word::from(vec![1, 12]).to_string(), "1.12");
        assert_eq!("1.12".parse::<Word>().unwrap(), Word::from(vec![1, 12]));
        assert!(Word::empty().is_empty());
    }
}
