//! The derivation graph of a presentation: vertices are non-empty words,
//! edges apply one rule in context. Paths compose, invert, and carry a
//! two-sided action by words; `find_path` makes the "fixed path" choices
//! that the subgroup and extension constructions rely on, memoized so the
//! same ordered pair of vertices always yields the same path.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

pub use crate::words::Sign;
use crate::words::{rewrite_occurrences, Interner, Letter, Presentation, Word};

/// A single rule application in context: `prefix · r_sign · suffix` rewrites
/// to `prefix · r_(-sign) · suffix`. Initial and terminal vertices are
/// always derived, never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub prefix: Word,
    pub rule_id: usize,
    pub sign: Sign,
    pub suffix: Word,
}

impl Edge {
    pub fn new(prefix: Word, rule_id: usize, sign: Sign, suffix: Word) -> Edge {
        Edge {
            prefix,
            rule_id,
            sign,
            suffix,
        }
    }

    pub fn iota(&self, p: &Presentation) -> Word {
        self.prefix
            .concat(p.rule(self.rule_id).side(self.sign))
            .concat(&self.suffix)
    }

    pub fn tau(&self, p: &Presentation) -> Word {
        self.prefix
            .concat(p.rule(self.rule_id).side(self.sign.flip()))
            .concat(&self.suffix)
    }

    /// The inverse edge differs only in sign.
    pub fn inverse(&self) -> Edge {
        Edge {
            prefix: self.prefix.clone(),
            rule_id: self.rule_id,
            sign: self.sign.flip(),
            suffix: self.suffix.clone(),
        }
    }

    /// Two-sided action: `x · (w1, r, e, w2) · y = (x w1, r, e, w2 y)`.
    pub fn act(&self, x: &Word, y: &Word) -> Edge {
        Edge {
            prefix: x.concat(&self.prefix),
            rule_id: self.rule_id,
            sign: self.sign,
            suffix: self.suffix.concat(y),
        }
    }
}

/// Checked edge construction: the rule must belong to the presentation.
pub fn make_edge(
    p: &Presentation,
    prefix: Word,
    rule_id: usize,
    sign: Sign,
    suffix: Word,
) -> Result<Edge, GraphError> {
    if rule_id >= p.rules().len() {
        return Err(GraphError::UnknownRule { rule_id });
    }
    Ok(Edge::new(prefix, rule_id, sign, suffix))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    UnknownRule { rule_id: usize },
    BrokenChain { at: usize },
    EndpointMismatch { left: Word, right: Word },
    EmptyVertex,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UnknownRule { rule_id } => write!(f, "rule {rule_id} is not in the presentation"),
            GraphError::BrokenChain { at } => {
                write!(f, "edge {at} does not start at the previous edge's end")
            }
            GraphError::EndpointMismatch { .. } => write!(f, "path endpoints do not match"),
            GraphError::EmptyVertex => write!(f, "paths live on non-empty words"),
        }
    }
}

impl core::error::Error for GraphError {}

/// A path: a base vertex plus a chain of edges. The empty path at `w` is
/// `Path::empty(w)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    base: Word,
    edges: Vec<Edge>,
}

impl Path {
    pub fn empty(w: Word) -> Path {
        Path {
            base: w,
            edges: Vec::new(),
        }
    }

    /// Constructs without re-validating the chain; for internal use where
    /// the chain is guaranteed by construction.
    pub(crate) fn raw(base: Word, edges: Vec<Edge>) -> Path {
        Path { base, edges }
    }

    pub fn single(e: Edge, p: &Presentation) -> Path {
        Path {
            base: e.iota(p),
            edges: vec![e],
        }
    }

    /// Builds a path from a non-empty edge chain, validating consecutive
    /// endpoints.
    pub fn from_edges(edges: Vec<Edge>, p: &Presentation) -> Result<Path, GraphError> {
        let first = edges.first().ok_or(GraphError::EmptyVertex)?;
        let path = Path {
            base: first.iota(p),
            edges,
        };
        path.validate(p)?;
        Ok(path)
    }

    pub fn validate(&self, p: &Presentation) -> Result<(), GraphError> {
        if self.base.is_empty() {
            return Err(GraphError::EmptyVertex);
        }
        let mut cur = self.base.clone();
        for (i, e) in self.edges.iter().enumerate() {
            if e.rule_id >= p.rules().len() {
                return Err(GraphError::UnknownRule { rule_id: e.rule_id });
            }
            if e.iota(p) != cur {
                return Err(GraphError::BrokenChain { at: i });
            }
            cur = e.tau(p);
        }
        Ok(())
    }

    pub fn iota(&self) -> &Word {
        &self.base
    }

    pub fn tau(&self, p: &Presentation) -> Word {
        match self.edges.last() {
            Some(e) => e.tau(p),
            None => self.base.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// All vertices along the path, `len + 1` of them.
    pub fn vertices(&self, p: &Presentation) -> Vec<Word> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        out.push(self.base.clone());
        for e in &self.edges {
            out.push(e.tau(p));
        }
        out
    }

    pub fn compose(&self, q: &Path, p: &Presentation) -> Result<Path, GraphError> {
        let end = self.tau(p);
        if end != *q.iota() {
            return Err(GraphError::EndpointMismatch {
                left: end,
                right: q.iota().clone(),
            });
        }
        let mut edges = self.edges.clone();
        edges.extend(q.edges.iter().cloned());
        Ok(Path {
            base: self.base.clone(),
            edges,
        })
    }

    pub fn inverse(&self, p: &Presentation) -> Path {
        let base = self.tau(p);
        let edges = self.edges.iter().rev().map(Edge::inverse).collect();
        Path { base, edges }
    }

    pub fn act(&self, x: &Word, y: &Word) -> Path {
        Path {
            base: x.concat(&self.base).concat(y),
            edges: self.edges.iter().map(|e| e.act(x, y)).collect(),
        }
    }

    /// Positive paths are empty or all-`+1`.
    pub fn is_positive(&self) -> bool {
        self.edges.iter().all(|e| e.sign == Sign::Plus)
    }

    pub fn is_negative(&self) -> bool {
        self.edges.iter().all(|e| e.sign == Sign::Minus)
    }

    pub fn is_closed(&self, p: &Presentation) -> bool {
        self.tau(p) == self.base
    }
}

pub fn is_parallel(a: &Path, b: &Path, p: &Presentation) -> bool {
    a.iota() == b.iota() && a.tau(p) == b.tau(p)
}

/// An edge filter by rule id; `all()` admits the whole graph. Filters
/// compose by intersection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SubgraphFilter {
    rules: Option<BTreeSet<usize>>,
}

impl SubgraphFilter {
    pub fn all() -> Self {
        SubgraphFilter { rules: None }
    }

    pub fn from_rules<I: IntoIterator<Item = usize>>(rules: I) -> Self {
        SubgraphFilter {
            rules: Some(rules.into_iter().collect()),
        }
    }

    pub fn matches(&self, rule_id: usize) -> bool {
        match &self.rules {
            None => true,
            Some(set) => set.contains(&rule_id),
        }
    }

    pub fn admits_path(&self, path: &Path) -> bool {
        path.edges().iter().all(|e| self.matches(e.rule_id))
    }

    pub fn intersect(&self, other: &SubgraphFilter) -> SubgraphFilter {
        match (&self.rules, &other.rules) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => SubgraphFilter {
                rules: Some(a.intersection(b).copied().collect()),
            },
        }
    }
}

/// All edges with initial vertex `w` passing the filter, in the
/// deterministic occurrence order (position, then rule id, then sign).
pub fn edges_from(w: &Word, p: &Presentation, filter: &SubgraphFilter) -> Vec<Edge> {
    rewrite_occurrences(w, p)
        .into_iter()
        .filter(|occ| filter.matches(occ.rule_id))
        .map(|occ| Edge::new(occ.prefix, occ.rule_id, occ.sign, occ.suffix))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindPathError {
    /// The reachable set closed under the search bounds without touching
    /// the target.
    NoPath { from: Word, to: Word },
    /// Budget exhausted before the search could conclude either way.
    Inconclusive { from: Word, to: Word },
}

impl fmt::Display for FindPathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FindPathError::NoPath { .. } => write!(f, "no path between the given words"),
            FindPathError::Inconclusive { .. } => {
                write!(f, "path search exhausted its node budget")
            }
        }
    }
}

impl core::error::Error for FindPathError {}

/// Memoized breadth-first path search. Each ordered pair of words is
/// computed once per session, on the shortlex-smaller endpoint, so that
/// `find(w2, w1)` is always the inverse of `find(w1, w2)`.
#[derive(Debug, Clone)]
pub struct PathFinder {
    memo: BTreeMap<(Word, Word, SubgraphFilter), Result<Path, ()>>,
    pub node_budget: usize,
}

impl PathFinder {
    pub fn new(node_budget: usize) -> Self {
        PathFinder {
            memo: BTreeMap::new(),
            node_budget,
        }
    }

    pub fn find(
        &mut self,
        p: &Presentation,
        from: &Word,
        to: &Word,
        filter: &SubgraphFilter,
    ) -> Result<Path, FindPathError> {
        if from == to {
            return Ok(Path::empty(from.clone()));
        }
        let (lo, hi, inverted) = if from < to {
            (from.clone(), to.clone(), false)
        } else {
            (to.clone(), from.clone(), true)
        };
        let key = (lo.clone(), hi.clone(), filter.clone());
        let result = match self.memo.get(&key) {
            Some(cached) => cached.clone(),
            None => {
                let computed = bfs_path(p, &lo, &hi, filter, self.node_budget);
                let to_cache = match &computed {
                    Ok(path) => Ok(path.clone()),
                    Err(_) => Err(()),
                };
                self.memo.insert(key, to_cache);
                return match computed {
                    Ok(path) => Ok(if inverted { path.inverse(p) } else { path }),
                    Err(e) => Err(if inverted { swap_fail(e) } else { e }),
                };
            }
        };
        match result {
            Ok(path) => Ok(if inverted { path.inverse(p) } else { path }),
            Err(()) => {
                // Re-derive the failure kind for a fresh error value.
                match bfs_path(p, &lo, &hi, filter, self.node_budget) {
                    Ok(_) => unreachable!("memoized failure recomputed as success"),
                    Err(e) => Err(if inverted { swap_fail(e) } else { e }),
                }
            }
        }
    }
}

fn swap_fail(e: FindPathError) -> FindPathError {
    match e {
        FindPathError::NoPath { from, to } => FindPathError::NoPath { from: to, to: from },
        FindPathError::Inconclusive { from, to } => {
            FindPathError::Inconclusive { from: to, to: from }
        }
    }
}

fn bfs_path(
    p: &Presentation,
    from: &Word,
    to: &Word,
    filter: &SubgraphFilter,
    node_budget: usize,
) -> Result<Path, FindPathError> {
    let max_side = p
        .rules()
        .iter()
        .filter(|r| filter.matches(r.id))
        .map(|r| r.lhs.len().max(r.rhs.len()))
        .max()
        .unwrap_or(1);
    let cap = from.len().max(to.len()) + max_side + 2;

    let mut parents: BTreeMap<Word, (Word, Edge)> = BTreeMap::new();
    let mut visited: BTreeSet<Word> = BTreeSet::from([from.clone()]);
    let mut frontier: VecDeque<Word> = VecDeque::from([from.clone()]);
    let mut nodes = 0usize;
    while let Some(cur) = frontier.pop_front() {
        for edge in edges_from(&cur, p, filter) {
            let next = edge.tau(p);
            if next.len() > cap || visited.contains(&next) {
                continue;
            }
            nodes += 1;
            if nodes > node_budget {
                return Err(FindPathError::Inconclusive {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            parents.insert(next.clone(), (cur.clone(), edge));
            visited.insert(next.clone());
            if next == *to {
                // Reconstruct the path back to `from`.
                let mut chain: Vec<Edge> = Vec::new();
                let mut at = next;
                while at != *from {
                    let (prev, e) = parents.remove(&at).expect("parent chain");
                    chain.push(e);
                    at = prev;
                }
                chain.reverse();
                return Ok(Path {
                    base: from.clone(),
                    edges: chain,
                });
            }
            frontier.push_back(next);
        }
    }
    Err(FindPathError::NoPath {
        from: from.clone(),
        to: to.clone(),
    })
}

/// Bit-exact edge text: `(<prefix>|r<id>|<sign>|<suffix>)` with `_` for the
/// empty word.
pub fn edge_to_text(e: &Edge, interner: &Interner) -> String {
    format!(
        "({}|r{}|{}|{})",
        e.prefix.display(interner),
        e.rule_id,
        e.sign,
        e.suffix.display(interner)
    )
}

/// Path text: edges joined by `;`, or `1_<word>` for empty paths.
pub fn path_to_text(path: &Path, interner: &Interner) -> String {
    if path.is_empty() {
        return format!("1_{}", path.iota().display(interner));
    }
    let parts: Vec<String> = path
        .edges()
        .iter()
        .map(|e| edge_to_text(e, interner))
        .collect();
    parts.join(";")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathParseError {
    Malformed { token: String },
    UnknownLetter { name: String },
    UnknownRule { rule_id: usize },
    InvalidChain,
}

impl fmt::Display for PathParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathParseError::Malformed { token } => write!(f, "malformed path token `{token}`"),
            PathParseError::UnknownLetter { name } => {
                write!(f, "letter `{name}` is not in the presentation")
            }
            PathParseError::UnknownRule { rule_id } => {
                write!(f, "rule {rule_id} is not in the presentation")
            }
            PathParseError::InvalidChain => write!(f, "edges do not chain into a path"),
        }
    }
}

impl core::error::Error for PathParseError {}

fn letter_names(p: &Presentation, interner: &Interner) -> BTreeMap<String, Letter> {
    p.alphabet()
        .iter()
        .map(|&l| (interner.name(l).to_string(), l))
        .collect()
}

fn parse_word(
    text: &str,
    names: &BTreeMap<String, Letter>,
) -> Result<Word, PathParseError> {
    if text == "_" {
        return Ok(Word::empty());
    }
    let mut w = Word::empty();
    for name in text.split(' ').filter(|t| !t.is_empty()) {
        let letter = names.get(name).ok_or_else(|| PathParseError::UnknownLetter {
            name: name.to_string(),
        })?;
        w.push(*letter);
    }
    Ok(w)
}

/// Parses the bit-exact path syntax produced by [`path_to_text`].
pub fn parse_path(
    text: &str,
    p: &Presentation,
    interner: &Interner,
) -> Result<Path, PathParseError> {
    let names = letter_names(p, interner);
    if let Some(rest) = text.strip_prefix("1_") {
        let w = parse_word(rest, &names)?;
        if w.is_empty() {
            return Err(PathParseError::Malformed {
                token: text.to_string(),
            });
        }
        return Ok(Path::empty(w));
    }
    let mut edges = Vec::new();
    for token in text.split(';') {
        let inner = token
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| PathParseError::Malformed {
                token: token.to_string(),
            })?;
        let parts: Vec<&str> = inner.split('|').collect();
        if parts.len() != 4 {
            return Err(PathParseError::Malformed {
                token: token.to_string(),
            });
        }
        let prefix = parse_word(parts[0], &names)?;
        let rule_id: usize = parts[1]
            .strip_prefix('r')
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| PathParseError::Malformed {
                token: token.to_string(),
            })?;
        if rule_id >= p.rules().len() {
            return Err(PathParseError::UnknownRule { rule_id });
        }
        let sign = match parts[2] {
            "+1" => Sign::Plus,
            "-1" => Sign::Minus,
            _ => {
                return Err(PathParseError::Malformed {
                    token: token.to_string(),
                })
            }
        };
        let suffix = parse_word(parts[3], &names)?;
        edges.push(Edge::new(prefix, rule_id, sign, suffix));
    }
    Path::from_edges(edges, p).map_err(|_| PathParseError::InvalidChain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_presentation;

    fn fix2(it: &mut Interner) -> Presentation {
        parse_presentation("alphabet: a\nrule: a a a a a = a\n", it).unwrap()
    }

    fn pow(l: Letter, n: usize) -> Word {
        Word::from_letters(vec![l; n])
    }

    #[test]
    fn edge_endpoints_fix2() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        // (a, a^5 = a, +1, empty): from a^6 to a^2
        let e = Edge::new(Word::single(a), 0, Sign::Plus, Word::empty());
        assert_eq!(e.iota(&p), pow(a, 6));
        assert_eq!(e.tau(&p), pow(a, 2));
        let inv = e.inverse();
        assert_eq!(inv.iota(&p), pow(a, 2));
        assert_eq!(inv.tau(&p), pow(a, 6));
    }

    #[test]
    fn edge_negative_fix1() {
        let mut it = Interner::new();
        let p = parse_presentation("alphabet: a\nrule: a a a = a\n", &mut it).unwrap();
        let a = p.alphabet()[0];
        let e = Edge::new(Word::empty(), 0, Sign::Minus, Word::empty());
        assert_eq!(e.iota(&p), Word::single(a));
        assert_eq!(e.tau(&p), pow(a, 3));
    }

    #[test]
    fn compose_identity_and_mismatch() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let path = Path::single(e.clone(), &p);
        let id = Path::empty(pow(a, 5));
        let composed = id.compose(&path, &p).unwrap();
        assert_eq!(composed, path);
        // p o p^-1 is closed of twice the length
        let round = path.compose(&path.inverse(&p), &p).unwrap();
        assert!(round.is_closed(&p));
        assert_eq!(round.len(), 2);
        // mismatched endpoints error
        let bad = Path::empty(pow(a, 2));
        assert!(matches!(
            path.compose(&bad, &p),
            Err(GraphError::EndpointMismatch { .. })
        ));
        assert!(bad.compose(&path, &p).is_err());
    }

    #[test]
    fn action_distributes() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let e = Edge::new(Word::single(a), 0, Sign::Plus, Word::empty());
        let acted = e.act(&Word::single(a), &pow(a, 2));
        assert_eq!(acted.prefix, pow(a, 2));
        assert_eq!(acted.suffix, pow(a, 2));
        // x . 1_w . y = 1_{xwy}
        let idp = Path::empty(pow(a, 3)).act(&Word::single(a), &Word::single(a));
        assert_eq!(*idp.iota(), pow(a, 5));
        // act commutes with invert and compose
        let p1 = Path::single(e.clone(), &p);
        let p2 = p1.inverse(&p);
        let both = p1.compose(&p2, &p).unwrap().act(&Word::single(a), &Word::empty());
        let other = p1
            .act(&Word::single(a), &Word::empty())
            .compose(&p2.act(&Word::single(a), &Word::empty()), &p)
            .unwrap();
        assert_eq!(both, other);
        assert_eq!(
            p1.act(&Word::single(a), &Word::empty()).inverse(&p),
            p1.inverse(&p).act(&Word::single(a), &Word::empty())
        );
    }

    #[test]
    fn parallel_and_positive() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let path = Path::single(e, &p);
        assert!(is_parallel(&path, &path, &p));
        assert!(path.is_positive());
        assert!(!path.inverse(&p).is_positive());
        assert!(path.inverse(&p).is_negative());
        assert!(Path::empty(pow(a, 2)).is_positive());
        assert!(!is_parallel(&path, &path.inverse(&p), &p));
    }

    #[test]
    fn edges_from_matches_occurrences() {
        let mut it = Interner::new();
        let p = parse_presentation("alphabet: a\nrule: a a a = a\n", &mut it).unwrap();
        let a = p.alphabet()[0];
        let edges = edges_from(&pow(a, 3), &p, &SubgraphFilter::all());
        assert_eq!(edges.len(), 4);
        for e in &edges {
            assert_eq!(e.iota(&p), pow(a, 3));
        }
        // single letter with no applicable positive rule: only the -1 edge
        let edges = edges_from(&Word::single(a), &p, &SubgraphFilter::from_rules([]));
        assert!(edges.is_empty());
    }

    #[test]
    fn find_path_shortest_and_inverse_convention() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let mut finder = PathFinder::new(10_000);
        let path = finder
            .find(&p, &pow(a, 6), &pow(a, 2), &SubgraphFilter::all())
            .unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.tau(&p), pow(a, 2));
        let back = finder
            .find(&p, &pow(a, 2), &pow(a, 6), &SubgraphFilter::all())
            .unwrap();
        assert_eq!(back, path.inverse(&p));
        // same word: empty path
        let same = finder
            .find(&p, &pow(a, 3), &pow(a, 3), &SubgraphFilter::all())
            .unwrap();
        assert!(same.is_empty());
    }

    #[test]
    fn find_path_certified_no_path() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let mut finder = PathFinder::new(10_000);
        // a and a^2 are in different congruence classes; the reachable set
        // closes under the cap.
        let err = finder
            .find(&p, &Word::single(a), &pow(a, 2), &SubgraphFilter::all())
            .unwrap_err();
        assert!(matches!(err, FindPathError::NoPath { .. }));
    }

    #[test]
    fn path_text_roundtrip() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let e1 = Edge::new(Word::single(a), 0, Sign::Plus, Word::empty());
        let e2 = Edge::new(Word::empty(), 0, Sign::Plus, Word::single(a));
        let path = Path::single(e1, &p)
            .compose(&Path::single(e2, &p).act(&Word::empty(), &Word::empty()), &p);
        // e1: a^6 -> a^2; e2 acted: iota = a^5 a = a^6... compose invalid, use single
        assert!(path.is_err());
        let single = Path::single(Edge::new(Word::single(a), 0, Sign::Minus, Word::empty()), &p);
        let text = path_to_text(&single, &it);
        assert_eq!(text, "(a|r0|-1|_)");
        let parsed = parse_path(&text, &p, &it).unwrap();
        assert_eq!(parsed, single);
        let empty = Path::empty(pow(a, 2));
        assert_eq!(path_to_text(&empty, &it), "1_a a");
        assert_eq!(parse_path("1_a a", &p, &it).unwrap(), empty);
    }
}
