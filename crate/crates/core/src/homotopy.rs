//! Homotopy relations between parallel paths, realised as an elementary
//! move engine: interchange of disjoint rewrites, two-sided base-pair
//! replacement, and free insertion/cancellation of inverse edge pairs.
//!
//! Homotopy equivalence is only ever certified (by a replayable move
//! sequence) or left inconclusive; it is never refuted. The bounded search
//! is bidirectional over canonically encoded paths.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;
use core::fmt;

use crate::graph::{edges_from, is_parallel, Edge, Path, SubgraphFilter};
use crate::oracle::{lhs_overlaps, CompletenessCert};
use crate::words::{Interner, Presentation, Sign, Word};

/// A validated pair of parallel paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelPair {
    pub left: Path,
    pub right: Path,
}

impl ParallelPair {
    pub fn new(left: Path, right: Path, p: &Presentation) -> Result<Self, HomotopyError> {
        if !is_parallel(&left, &right, p) {
            return Err(HomotopyError::NotParallel {
                left_from: left.iota().clone(),
                right_from: right.iota().clone(),
            });
        }
        Ok(ParallelPair { left, right })
    }

    /// A pair in closed-path form: the left path is closed and the right
    /// is the empty path at its basepoint.
    pub fn is_closed_form(&self) -> bool {
        self.right.is_empty() && self.left.iota() == self.right.iota()
    }
}

/// A set of parallel path pairs. Closed paths `P` are represented as the
/// pairs `(P, 1_{iota P})`; the two forms generate the same relation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomotopyBase {
    pairs: Vec<ParallelPair>,
}

impl HomotopyBase {
    pub fn empty() -> Self {
        HomotopyBase { pairs: Vec::new() }
    }

    pub fn from_pairs(pairs: Vec<ParallelPair>) -> Self {
        HomotopyBase { pairs }
    }

    pub fn from_closed_paths(paths: Vec<Path>, p: &Presentation) -> Result<Self, HomotopyError> {
        let mut pairs = Vec::with_capacity(paths.len());
        for path in paths {
            if !path.is_closed(p) {
                return Err(HomotopyError::NotClosed {
                    from: path.iota().clone(),
                    to: path.tau(p),
                });
            }
            let at = Path::empty(path.iota().clone());
            pairs.push(ParallelPair {
                left: path,
                right: at,
            });
        }
        Ok(HomotopyBase { pairs })
    }

    pub fn pairs(&self) -> &[ParallelPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, pair: ParallelPair) {
        self.pairs.push(pair);
    }

    /// Concatenation, keeping pair order; indices of `other` shift by
    /// `self.len()`.
    pub fn extend(&mut self, other: HomotopyBase) {
        self.pairs.extend(other.pairs);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomotopyError {
    NotParallel { left_from: Word, right_from: Word },
    NotClosed { from: Word, to: Word },
}

impl fmt::Display for HomotopyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomotopyError::NotParallel { .. } => write!(f, "paths are not parallel"),
            HomotopyError::NotClosed { .. } => write!(f, "path is not closed"),
        }
    }
}

impl core::error::Error for HomotopyError {}

/// The interchange pair of two edges: applying them in either order gives
/// parallel paths from `iota E1 · iota E2` to `tau E1 · tau E2`.
pub fn h1_pair(p: &Presentation, e1: &Edge, e2: &Edge) -> ParallelPair {
    let (i1, t1) = (e1.iota(p), e1.tau(p));
    let (i2, t2) = (e2.iota(p), e2.tau(p));
    let left = Path::single(e1.act(&Word::empty(), &i2), p)
        .compose(&Path::single(e2.act(&t1, &Word::empty()), p), p)
        .expect("interchange left side chains");
    let right = Path::single(e2.act(&i1, &Word::empty()), p)
        .compose(&Path::single(e1.act(&Word::empty(), &t2), p), p)
        .expect("interchange right side chains");
    ParallelPair { left, right }
}

/// The closed interchange square `[E1, E2]` at `iota E1 · iota E2`.
pub fn h1_square(p: &Presentation, e1: &Edge, e2: &Edge) -> Path {
    let pair = h1_pair(p, e1, e2);
    pair.left
        .compose(&pair.right.inverse(p), p)
        .expect("square closes")
}

/// One elementary homotopy move at an explicit position in a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Free cancellation: remove edges `at, at+1` when the second is the
    /// inverse of the first.
    Cancel { at: usize },
    /// Free insertion of `edge · edge^{-1}` before edge position `at`.
    Insert { at: usize, edge: Edge },
    /// Interchange two consecutive edges rewriting disjoint factors.
    Interchange { at: usize },
    /// Replace an occurrence `x · S · y` of one side of a base pair by the
    /// other side, in the stored left/right context. `forward` replaces the
    /// pair's left side; `inverted` matches the side's inverse.
    Replace {
        at: usize,
        pair: usize,
        forward: bool,
        inverted: bool,
        left: Word,
        right: Word,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveError {
    pub reason: String,
}

impl fmt::Display for MoveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "move not applicable: {}", self.reason)
    }
}

impl core::error::Error for MoveError {}

fn err(reason: impl Into<String>) -> MoveError {
    MoveError {
        reason: reason.into(),
    }
}

/// Applies one move, producing a path parallel to the input.
pub fn apply_move(
    p: &Presentation,
    path: &Path,
    m: &Move,
    base: &HomotopyBase,
) -> Result<Path, MoveError> {
    let edges = path.edges();
    match m {
        Move::Cancel { at } => {
            if at + 1 >= edges.len() + 1 && edges.len() < 2 {
                return Err(err("cancel position out of range"));
            }
            if at + 1 >= edges.len() {
                return Err(err("cancel position out of range"));
            }
            if edges[at + 1] != edges[*at].inverse() {
                return Err(err("edges are not an inverse pair"));
            }
            let mut out = edges.to_vec();
            out.drain(*at..at + 2);
            Ok(rebuild(path, out))
        }
        Move::Insert { at, edge } => {
            if *at > edges.len() {
                return Err(err("insert position out of range"));
            }
            let vertex = vertex_at(path, p, *at);
            if edge.iota(p) != vertex {
                return Err(err("inserted edge does not start at the path vertex"));
            }
            let mut out = edges.to_vec();
            out.splice(*at..*at, [edge.clone(), edge.inverse()]);
            Ok(rebuild(path, out))
        }
        Move::Interchange { at } => {
            if at + 1 >= edges.len() {
                return Err(err("interchange position out of range"));
            }
            let (f1, e1) = interchange(p, &edges[*at], &edges[at + 1])
                .ok_or_else(|| err("edges do not rewrite disjoint factors"))?;
            let mut out = edges.to_vec();
            out[*at] = f1;
            out[at + 1] = e1;
            Ok(rebuild(path, out))
        }
        Move::Replace {
            at,
            pair,
            forward,
            inverted,
            left,
            right,
        } => {
            let pr = base
                .pairs()
                .get(*pair)
                .ok_or_else(|| err("base pair index out of range"))?;
            let (from, to) = if *forward {
                (&pr.left, &pr.right)
            } else {
                (&pr.right, &pr.left)
            };
            let (from, to) = if *inverted {
                (from.inverse(p), to.inverse(p))
            } else {
                (from.clone(), to.clone())
            };
            let k = from.len();
            if at + k > edges.len() {
                return Err(err("replacement window out of range"));
            }
            let expected = from.act(left, right);
            if k == 0 {
                let vertex = vertex_at(path, p, *at);
                if vertex != *expected.iota() {
                    return Err(err("context does not match the path vertex"));
                }
            } else if edges[*at..at + k] != *expected.edges() {
                return Err(err("window does not match the base pair side"));
            }
            let replacement = to.act(left, right);
            let mut out = edges.to_vec();
            out.splice(*at..at + k, replacement.edges().iter().cloned());
            Ok(rebuild(path, out))
        }
    }
}

fn rebuild(path: &Path, edges: Vec<Edge>) -> Path {
    // Every move preserves both endpoints, so the basepoint is unchanged.
    Path::raw(path.iota().clone(), edges)
}

fn vertex_at(path: &Path, p: &Presentation, at: usize) -> Word {
    if at == 0 {
        path.iota().clone()
    } else {
        path.edges()[at - 1].tau(p)
    }
}

/// Swaps two consecutive edges whose rewrite windows are disjoint,
/// returning the swapped edges; `None` if the windows overlap.
fn interchange(p: &Presentation, e: &Edge, f: &Edge) -> Option<(Edge, Edge)> {
    let re = p.rule(e.rule_id);
    let rf = p.rule(f.rule_id);
    let e_out = re.side(e.sign.flip());
    let a = e.prefix.len();
    let b = a + e_out.len();
    let c = f.prefix.len();
    let d = c + rf.side(f.sign).len();
    if d <= a {
        // f rewrites inside e's prefix.
        let m = e.prefix.slice(d, a);
        let f1 = Edge::new(
            f.prefix.clone(),
            f.rule_id,
            f.sign,
            m.concat(re.side(e.sign)).concat(&e.suffix),
        );
        let e1 = Edge::new(
            f.prefix.concat(rf.side(f.sign.flip())).concat(&m),
            e.rule_id,
            e.sign,
            e.suffix.clone(),
        );
        Some((f1, e1))
    } else if c >= b {
        // f rewrites inside e's suffix.
        let m = f.prefix.slice(b, f.prefix.len());
        let f1 = Edge::new(
            e.prefix.concat(re.side(e.sign)).concat(&m),
            f.rule_id,
            f.sign,
            f.suffix.clone(),
        );
        let e1 = Edge::new(
            e.prefix.clone(),
            e.rule_id,
            e.sign,
            m.concat(rf.side(f.sign.flip())).concat(&f.suffix),
        );
        Some((f1, e1))
    } else {
        None
    }
}

/// The inverse of a move, relative to the path it was applied to.
pub fn invert_move(m: &Move, pre: &Path) -> Move {
    match m {
        Move::Cancel { at } => Move::Insert {
            at: *at,
            edge: pre.edges()[*at].clone(),
        },
        Move::Insert { at, .. } => Move::Cancel { at: *at },
        Move::Interchange { at } => Move::Interchange { at: *at },
        Move::Replace {
            at,
            pair,
            forward,
            inverted,
            left,
            right,
        } => Move::Replace {
            at: *at,
            pair: *pair,
            forward: !*forward,
            inverted: *inverted,
            left: left.clone(),
            right: right.clone(),
        },
    }
}

/// Outcome of a bounded homotopy search: a replayable certificate, or
/// inconclusive. Never a refutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Homotopy {
    Equivalent(Vec<Move>),
    Inconclusive,
}

/// Canonical path encoding for visited-set membership: the basepoint word
/// followed by `(prefix length, rule, sign)` per edge, which determines the
/// edge given the running vertex.
fn encode(path: &Path) -> Vec<u32> {
    let mut out = Vec::with_capacity(1 + path.iota().len() + 3 * path.len());
    out.push(path.iota().len() as u32);
    for l in path.iota().letters() {
        out.push(l.sym() * 8 + tag_code(*l));
    }
    for e in path.edges() {
        out.push(e.prefix.len() as u32);
        out.push(e.rule_id as u32);
        out.push(match e.sign {
            Sign::Plus => 0,
            Sign::Minus => 1,
        });
    }
    out
}

fn tag_code(l: crate::words::Letter) -> u32 {
    use crate::words::Tag;
    match l.tag() {
        Tag::Plain => 0,
        Tag::A => 1,
        Tag::B => 2,
        Tag::C => 3,
        Tag::Z => 4,
    }
}

/// All applicable moves at `path`, in a fixed order: cancellations,
/// interchanges, base replacements, then free insertions.
fn gen_moves(
    p: &Presentation,
    path: &Path,
    base: &HomotopyBase,
    edge_cache: &mut BTreeMap<Word, Vec<Edge>>,
) -> Vec<Move> {
    let edges = path.edges();
    let mut out = Vec::new();
    for at in 0..edges.len().saturating_sub(1) {
        if edges[at + 1] == edges[at].inverse() {
            out.push(Move::Cancel { at });
        }
    }
    for at in 0..edges.len().saturating_sub(1) {
        if interchange(p, &edges[at], &edges[at + 1]).is_some() {
            out.push(Move::Interchange { at });
        }
    }
    let vertices = path.vertices(p);
    for (pair_idx, pair) in base.pairs().iter().enumerate() {
        for forward in [true, false] {
            for inverted in [false, true] {
                let side = if forward { &pair.left } else { &pair.right };
                let side = if inverted { side.inverse(p) } else { side.clone() };
                let k = side.len();
                if k == 0 {
                    // Match the empty side at any factorisation of a vertex.
                    let target = side.iota();
                    for (at, v) in vertices.iter().enumerate() {
                        for pos in 0..=v.len().saturating_sub(target.len()) {
                            if v.matches_at(pos, target) {
                                out.push(Move::Replace {
                                    at,
                                    pair: pair_idx,
                                    forward,
                                    inverted,
                                    left: v.slice(0, pos),
                                    right: v.slice(pos + target.len(), v.len()),
                                });
                            }
                        }
                    }
                    continue;
                }
                if k > edges.len() {
                    continue;
                }
                let f0 = &side.edges()[0];
                'window: for at in 0..=edges.len() - k {
                    let e0 = &edges[at];
                    if e0.rule_id != f0.rule_id
                        || e0.sign != f0.sign
                        || e0.prefix.len() < f0.prefix.len()
                        || e0.suffix.len() < f0.suffix.len()
                    {
                        continue;
                    }
                    let xlen = e0.prefix.len() - f0.prefix.len();
                    if !e0.prefix.matches_at(xlen, &f0.prefix) {
                        continue;
                    }
                    if !e0.suffix.matches_at(0, &f0.suffix) {
                        continue;
                    }
                    let x = e0.prefix.slice(0, xlen);
                    let y = e0.suffix.slice(f0.suffix.len(), e0.suffix.len());
                    for (i, fe) in side.edges().iter().enumerate() {
                        if edges[at + i] != fe.act(&x, &y) {
                            continue 'window;
                        }
                    }
                    out.push(Move::Replace {
                        at,
                        pair: pair_idx,
                        forward,
                        inverted,
                        left: x,
                        right: y,
                    });
                }
            }
        }
    }
    for (at, v) in vertices.iter().enumerate() {
        let candidates = edge_cache
            .entry(v.clone())
            .or_insert_with(|| edges_from(v, p, &SubgraphFilter::all()));
        for e in candidates.iter() {
            out.push(Move::Insert {
                at,
                edge: e.clone(),
            });
        }
    }
    out
}

struct Node {
    path: Path,
    parent: Option<(usize, Move)>,
}

/// Bidirectional bounded search for a homotopy between two parallel paths
/// modulo `base`. The budget bounds the total number of moves applied. On
/// success the certificate is replayed before being returned.
pub fn homotopic_bounded(
    p: &Presentation,
    left: &Path,
    right: &Path,
    base: &HomotopyBase,
    move_budget: usize,
) -> Result<Homotopy, HomotopyError> {
    if !is_parallel(left, right, p) {
        return Err(HomotopyError::NotParallel {
            left_from: left.iota().clone(),
            right_from: right.iota().clone(),
        });
    }
    if left == right {
        return Ok(Homotopy::Equivalent(Vec::new()));
    }

    let mut nodes: Vec<Node> = Vec::new();
    let mut visited: BTreeMap<Vec<u32>, (usize, u8)> = BTreeMap::new();
    let mut frontiers: [VecDeque<usize>; 2] = [VecDeque::new(), VecDeque::new()];
    let mut edge_cache: BTreeMap<Word, Vec<Edge>> = BTreeMap::new();

    for (side, start) in [(0u8, left), (1u8, right)] {
        nodes.push(Node {
            path: start.clone(),
            parent: None,
        });
        visited.insert(encode(start), (nodes.len() - 1, side));
        frontiers[side as usize].push_back(nodes.len() - 1);
    }

    let mut spent = 0usize;
    loop {
        let side = if frontiers[0].is_empty() && frontiers[1].is_empty() {
            return Ok(Homotopy::Inconclusive);
        } else if frontiers[1].is_empty() {
            0
        } else if frontiers[0].is_empty() {
            1
        } else if frontiers[0].len() <= frontiers[1].len() {
            0
        } else {
            1
        };
        let Some(cur) = frontiers[side].pop_front() else {
            return Ok(Homotopy::Inconclusive);
        };
        let cur_path = nodes[cur].path.clone();
        for mv in gen_moves(p, &cur_path, base, &mut edge_cache) {
            spent += 1;
            if spent > move_budget {
                return Ok(Homotopy::Inconclusive);
            }
            let next = apply_move(p, &cur_path, &mv, base)
                .expect("generated moves are applicable");
            let key = encode(&next);
            match visited.get(&key) {
                Some(&(other, other_side)) if other_side as usize != side => {
                    let moves = stitch(&nodes, cur, mv, other, side as u8);
                    // Replay as a final certificate check.
                    let mut replay = left.clone();
                    for m in &moves {
                        replay = apply_move(p, &replay, m, base)
                            .expect("certificate must replay");
                    }
                    assert_eq!(&replay, right, "certificate replay reaches the target");
                    return Ok(Homotopy::Equivalent(moves));
                }
                Some(_) => {}
                None => {
                    nodes.push(Node {
                        path: next,
                        parent: Some((cur, mv)),
                    });
                    visited.insert(key, (nodes.len() - 1, side as u8));
                    frontiers[side].push_back(nodes.len() - 1);
                }
            }
        }
    }
}

/// Assembles the move certificate when the two search fronts meet: the
/// chain from `left` down to the meet, then the inverted chain back up to
/// `right`.
fn stitch(nodes: &[Node], cur: usize, last: Move, other: usize, cur_side: u8) -> Vec<Move> {
    let chain_of = |mut at: usize| -> Vec<(Path, Move)> {
        let mut chain = Vec::new();
        while let Some((parent, mv)) = &nodes[at].parent {
            chain.push((nodes[*parent].path.clone(), mv.clone()));
            at = *parent;
        }
        chain.reverse();
        chain
    };
    // Moves applied from the `cur` start to the meet point.
    let mut cur_chain = chain_of(cur);
    cur_chain.push((nodes[cur].path.clone(), last));
    // Moves applied from the `other` start to the meet point.
    let other_chain = chain_of(other);

    if cur_side == 0 {
        let forward = cur_chain.iter().map(|(_, m)| m.clone());
        let backward = other_chain.iter().rev().map(|(pre, m)| invert_move(m, pre));
        forward.chain(backward).collect()
    } else {
        // The meet came from the right-hand start: the certificate runs
        // left -> meet via the other chain, then inverts the cur chain.
        let forward = other_chain.iter().map(|(_, m)| m.clone());
        let backward = cur_chain.iter().rev().map(|(pre, m)| invert_move(m, pre));
        forward.chain(backward).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CriticalPairError {
    CertMismatch,
    NotJoinable { word: Word, rule1: usize, rule2: usize },
}

impl fmt::Display for CriticalPairError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalPairError::CertMismatch => {
                write!(f, "completeness certificate does not cover this presentation")
            }
            CriticalPairError::NotJoinable { rule1, rule2, .. } => {
                write!(f, "overlap of rules {rule1} and {rule2} is not joinable")
            }
        }
    }
}

impl core::error::Error for CriticalPairError {}

/// Leftmost positive descent to the normal form, as a path.
pub fn leftmost_descent(w: &Word, p: &Presentation) -> Path {
    let mut path = Path::empty(w.clone());
    let mut cur = w.clone();
    'outer: loop {
        for pos in 0..cur.len() {
            for rule in p.rules() {
                if cur.matches_at(pos, &rule.lhs) {
                    let edge = Edge::new(
                        cur.slice(0, pos),
                        rule.id,
                        Sign::Plus,
                        cur.slice(pos + rule.lhs.len(), cur.len()),
                    );
                    let next = edge.tau(p);
                    path = path
                        .compose(&Path::single(edge, p), p)
                        .expect("descent chains");
                    cur = next;
                    continue 'outer;
                }
            }
        }
        return path;
    }
}

/// Squier's critical-pair homotopy base for a complete rewriting system:
/// one closed path per overlap of two left-hand sides, descending both
/// peak reductions to the common normal form.
pub fn critical_pair_base(
    p: &Presentation,
    cert: &CompletenessCert,
) -> Result<HomotopyBase, CriticalPairError> {
    if !cert.covers(p) {
        return Err(CriticalPairError::CertMismatch);
    }
    let mut closed = Vec::new();
    for (word, r1, pos1, r2, pos2) in lhs_overlaps(p) {
        let e1 = Edge::new(
            word.slice(0, pos1),
            r1,
            Sign::Plus,
            word.slice(pos1 + p.rule(r1).lhs.len(), word.len()),
        );
        let e2 = Edge::new(
            word.slice(0, pos2),
            r2,
            Sign::Plus,
            word.slice(pos2 + p.rule(r2).lhs.len(), word.len()),
        );
        let d1 = leftmost_descent(&e1.tau(p), p);
        let d2 = leftmost_descent(&e2.tau(p), p);
        if d1.tau(p) != d2.tau(p) {
            return Err(CriticalPairError::NotJoinable {
                word,
                rule1: r1,
                rule2: r2,
            });
        }
        let down1 = Path::single(e1, p).compose(&d1, p).expect("descent chains");
        let down2 = Path::single(e2, p).compose(&d2, p).expect("descent chains");
        let loop_path = down1
            .compose(&down2.inverse(p), p)
            .expect("peak descents join");
        closed.push(loop_path);
    }
    HomotopyBase::from_closed_paths(closed, p).map_err(|_| CriticalPairError::CertMismatch)
}

/// Per-pair validation report for a homotopy base over a presentation.
#[derive(Debug, Clone)]
pub struct BaseReport {
    pub results: Vec<Result<(), String>>,
}

impl BaseReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(Result::is_ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &String)> {
        self.results
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e)))
    }
}

/// Checks every pair of a base: both paths well-formed over `p`, and
/// parallel.
pub fn validate_base(base: &HomotopyBase, p: &Presentation) -> BaseReport {
    let results = base
        .pairs()
        .iter()
        .map(|pair| {
            pair.left
                .validate(p)
                .and_then(|()| pair.right.validate(p))
                .map_err(|e| format!("{e}"))
                .and_then(|()| {
                    if is_parallel(&pair.left, &pair.right, p) {
                        Ok(())
                    } else {
                        Err("sides are not parallel".to_string())
                    }
                })
        })
        .collect();
    BaseReport { results }
}

/// Serializes a base in the `.hb` format: `CLOSED <path>` for closed-path
/// form pairs, `PAIR <path> ~ <path>` otherwise.
pub fn serialize_base(base: &HomotopyBase, interner: &Interner) -> String {
    use crate::graph::path_to_text;
    let mut out = String::new();
    for pair in base.pairs() {
        if pair.is_closed_form() {
            out.push_str("CLOSED ");
            out.push_str(&path_to_text(&pair.left, interner));
        } else {
            out.push_str("PAIR ");
            out.push_str(&path_to_text(&pair.left, interner));
            out.push_str(" ~ ");
            out.push_str(&path_to_text(&pair.right, interner));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseParseError {
    Line { line: usize, message: String },
}

impl fmt::Display for BaseParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseParseError::Line { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl core::error::Error for BaseParseError {}

/// Parses the `.hb` format against a presentation.
pub fn parse_base(
    text: &str,
    p: &Presentation,
    interner: &Interner,
) -> Result<HomotopyBase, BaseParseError> {
    use crate::graph::parse_path;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("CLOSED ") {
            let path = parse_path(rest.trim(), p, interner).map_err(|e| BaseParseError::Line {
                line: line_no,
                message: e.to_string(),
            })?;
            if !path.is_closed(p) {
                return Err(BaseParseError::Line {
                    line: line_no,
                    message: "CLOSED path is not closed".to_string(),
                });
            }
            let at = Path::empty(path.iota().clone());
            pairs.push(ParallelPair {
                left: path,
                right: at,
            });
        } else if let Some(rest) = line.strip_prefix("PAIR ") {
            let mut sides = rest.splitn(2, " ~ ");
            let l = sides.next().unwrap_or("");
            let r = sides.next().ok_or_else(|| BaseParseError::Line {
                line: line_no,
                message: "PAIR line has no `~`".to_string(),
            })?;
            let left = parse_path(l.trim(), p, interner).map_err(|e| BaseParseError::Line {
                line: line_no,
                message: e.to_string(),
            })?;
            let right = parse_path(r.trim(), p, interner).map_err(|e| BaseParseError::Line {
                line: line_no,
                message: e.to_string(),
            })?;
            pairs.push(ParallelPair { left, right });
        } else {
            return Err(BaseParseError::Line {
                line: line_no,
                message: format!("unrecognised line `{line}`"),
            });
        }
    }
    Ok(HomotopyBase::from_pairs(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::certify_complete;
    use crate::words::parse_presentation;

    fn fix2(it: &mut Interner) -> Presentation {
        parse_presentation("alphabet: a\nrule: a a a a a = a\n", it).unwrap()
    }

    #[test]
    fn h1_pair_endpoints() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let pair = h1_pair(&p, &e, &e);
        // both sides run from a^10 to a^2
        assert_eq!(pair.left.iota().len(), 10);
        assert_eq!(pair.left.tau(&p).len(), 2);
        assert!(is_parallel(&pair.left, &pair.right, &p));
        let neg = h1_pair(&p, &e.inverse(), &e);
        assert!(is_parallel(&neg.left, &neg.right, &p));
    }

    #[test]
    fn cancel_move() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let path = Path::single(e.clone(), &p)
            .compose(&Path::single(e.inverse(), &p), &p)
            .unwrap();
        let out = apply_move(&p, &path, &Move::Cancel { at: 0 }, &HomotopyBase::empty()).unwrap();
        assert!(out.is_empty());
        assert_eq!(*out.iota(), path.iota().clone());
    }

    #[test]
    fn interchange_move_swaps_disjoint_rewrites() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let ten = Word::from_letters(vec![a; 10]);
        // apply the rule at position 0, then at position 1 of the result
        let e1 = Edge::new(Word::empty(), 0, Sign::Plus, Word::from_letters(vec![a; 5]));
        let e2 = Edge::new(Word::single(a), 0, Sign::Plus, Word::empty());
        assert_eq!(e1.iota(&p), ten);
        let path = Path::single(e1, &p)
            .compose(&Path::single(e2, &p), &p)
            .unwrap();
        let swapped = apply_move(
            &p,
            &path,
            &Move::Interchange { at: 0 },
            &HomotopyBase::empty(),
        )
        .unwrap();
        assert!(is_parallel(&path, &swapped, &p));
        assert_ne!(path, swapped);
        // swapping back restores the original
        let back = apply_move(
            &p,
            &swapped,
            &Move::Interchange { at: 0 },
            &HomotopyBase::empty(),
        )
        .unwrap();
        assert_eq!(back, path);
    }

    #[test]
    fn base_replace_move() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let closed = Path::single(e.clone(), &p)
            .compose(&Path::single(e.inverse(), &p), &p)
            .unwrap();
        let base = HomotopyBase::from_closed_paths(vec![closed.clone()], &p).unwrap();
        // replace an acted occurrence of the closed path by the empty path
        let acted = closed.act(&Word::single(a), &Word::single(a));
        let out = apply_move(
            &p,
            &acted,
            &Move::Replace {
                at: 0,
                pair: 0,
                forward: true,
                inverted: false,
                left: Word::single(a),
                right: Word::single(a),
            },
            &base,
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn homotopic_trivial_cases() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let path = Path::single(e.clone(), &p);
        // p ~ p with empty certificate
        let verdict =
            homotopic_bounded(&p, &path, &path, &HomotopyBase::empty(), 1000).unwrap();
        assert_eq!(verdict, Homotopy::Equivalent(vec![]));
        // E E^-1 ~ empty via one cancellation
        let round = path.compose(&path.inverse(&p), &p).unwrap();
        let idp = Path::empty(round.iota().clone());
        match homotopic_bounded(&p, &round, &idp, &HomotopyBase::empty(), 1000).unwrap() {
            Homotopy::Equivalent(moves) => assert_eq!(moves.len(), 1),
            Homotopy::Inconclusive => panic!("should certify"),
        }
    }

    #[test]
    fn homotopic_h1_sides() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let pair = h1_pair(&p, &e, &e);
        match homotopic_bounded(&p, &pair.left, &pair.right, &HomotopyBase::empty(), 5000)
            .unwrap()
        {
            Homotopy::Equivalent(moves) => {
                assert!(moves
                    .iter()
                    .any(|m| matches!(m, Move::Interchange { .. })));
            }
            Homotopy::Inconclusive => panic!("interchange sides should certify"),
        }
    }

    #[test]
    fn homotopic_is_symmetric_on_fixtures() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let cert = certify_complete(&p).unwrap();
        let base = critical_pair_base(&p, &cert).unwrap();
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let loop_path = Path::single(e.clone(), &p)
            .compose(&Path::single(e.inverse(), &p), &p)
            .unwrap();
        let idp = Path::empty(loop_path.iota().clone());
        for (left, right) in [(&loop_path, &idp), (&idp, &loop_path)] {
            match homotopic_bounded(&p, left, right, &base, 2000).unwrap() {
                Homotopy::Equivalent(_) => {}
                Homotopy::Inconclusive => panic!("verdict should not depend on the order"),
            }
        }
    }

    #[test]
    fn homotopic_rejects_non_parallel() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let path = Path::single(e, &p);
        let err = homotopic_bounded(
            &p,
            &path,
            &Path::empty(path.iota().clone()),
            &HomotopyBase::empty(),
            100,
        )
        .unwrap_err();
        assert!(matches!(err, HomotopyError::NotParallel { .. }));
    }

    #[test]
    fn critical_pairs_fix2() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let cert = certify_complete(&p).unwrap();
        let base = critical_pair_base(&p, &cert).unwrap();
        // overlaps of a^5 with itself at offsets 1..4
        assert_eq!(base.len(), 4);
        assert!(validate_base(&base, &p).all_pass());
        for pair in base.pairs() {
            assert!(pair.is_closed_form());
        }
    }

    #[test]
    fn critical_pairs_single_rule_no_overlap() {
        let mut it = Interner::new();
        let p = parse_presentation("alphabet: a b\nrule: a b = a\n", &mut it).unwrap();
        let cert = certify_complete(&p).unwrap();
        let base = critical_pair_base(&p, &cert).unwrap();
        assert!(base.is_empty());
    }

    #[test]
    fn validate_base_reports_bad_pair() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let e = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let path = Path::single(e, &p);
        let bad = HomotopyBase::from_pairs(vec![ParallelPair {
            left: path.clone(),
            right: Path::empty(path.iota().clone()),
        }]);
        let report = validate_base(&bad, &p);
        assert!(!report.all_pass());
        assert_eq!(report.failures().count(), 1);
    }

    #[test]
    fn base_roundtrip() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let cert = certify_complete(&p).unwrap();
        let base = critical_pair_base(&p, &cert).unwrap();
        let text = serialize_base(&base, &it);
        let parsed = parse_base(&text, &p, &it).unwrap();
        assert_eq!(base, parsed);
        assert_eq!(text, serialize_base(&parsed, &it));
    }
}
