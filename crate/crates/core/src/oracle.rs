//! Brute-force finite-semigroup engine.
//!
//! [`enumerate`] closes a presentation under products, identifying words by
//! bounded bidirectional rewriting search. An equality verdict is always
//! backed by an explicit rewrite meet; distinctness is tentative until the
//! final table is certified (associativity plus every defining relation),
//! which pins the element count from both sides: the certified meets bound
//! the semigroup above, the certified quotient table bounds it below. The
//! oracle therefore never silently mis-identifies — inconclusive searches
//! abort with the offending pair.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::words::{
    apply_occurrence, rewrite_occurrences, Interner, Letter, Presentation, Tag, Word,
};

/// Node budget for word-identification searches; the bidirectional search
/// aborts as undecided when it would visit more words than this.
pub const DEFAULT_NODE_BUDGET: usize = 100_000;

/// A finite semigroup with a full multiplication table, one canonical
/// representative word per element, and a generator map for evaluating
/// arbitrary words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemigroup {
    elems: Vec<Word>,
    names: Option<Vec<String>>,
    table: Vec<usize>,
    gen_map: BTreeMap<Letter, usize>,
    alphabet: Vec<Letter>,
}

impl FiniteSemigroup {
    pub fn size(&self) -> usize {
        self.elems.len()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.elems.len() + y]
    }

    /// Canonical representative word of element `x`.
    pub fn canonical(&self, x: usize) -> &Word {
        &self.elems[x]
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    pub fn generator(&self, l: Letter) -> Option<usize> {
        self.gen_map.get(&l).copied()
    }

    /// Evaluates a non-empty word over the generator alphabet.
    pub fn eval(&self, w: &Word) -> Result<usize, EvalError> {
        let mut letters = w.letters().iter();
        let first = letters.next().ok_or(EvalError::EmptyWord)?;
        let mut acc = *self
            .gen_map
            .get(first)
            .ok_or(EvalError::UnknownLetter(*first))?;
        for l in letters {
            let g = *self.gen_map.get(l).ok_or(EvalError::UnknownLetter(*l))?;
            acc = self.mul(acc, g);
        }
        Ok(acc)
    }

    pub fn is_idempotent(&self, x: usize) -> bool {
        self.mul(x, x) == x
    }

    /// Single-token element name: the declared name, or the canonical word
    /// with `.` between letters.
    pub fn display_element(&self, x: usize, interner: &Interner) -> String {
        match &self.names {
            Some(names) => names[x].clone(),
            None => self.elems[x].display_compact(interner),
        }
    }

    /// True if every element `x` has some `y` with `xyx = x`.
    pub fn is_regular(&self) -> Result<(), usize> {
        'outer: for x in 0..self.size() {
            for y in 0..self.size() {
                if self.mul(self.mul(x, y), x) == x {
                    continue 'outer;
                }
            }
            return Err(x);
        }
        Ok(())
    }

    /// The sub-semigroup on `elems` as a standalone table with one fresh
    /// generator letter per element (named after the parent elements).
    pub fn restrict_to(
        &self,
        elems: &BTreeSet<usize>,
        interner: &mut Interner,
        tag: Tag,
    ) -> Result<FiniteSemigroup, RestrictError> {
        let order: Vec<usize> = elems.iter().copied().collect();
        let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let n = order.len();
        let mut table = vec![0usize; n * n];
        for (i, &x) in order.iter().enumerate() {
            for (j, &y) in order.iter().enumerate() {
                let prod = self.mul(x, y);
                let k = pos
                    .get(&prod)
                    .ok_or(RestrictError::NotClosed { x, y, product: prod })?;
                table[i * n + j] = *k;
            }
        }
        let mut taken = BTreeSet::new();
        let mut alphabet = Vec::with_capacity(n);
        let mut names = Vec::with_capacity(n);
        let mut gen_map = BTreeMap::new();
        let parent_names: Vec<String> = order
            .iter()
            .map(|&e| match &self.names {
                Some(names) => names[e].clone(),
                None => format!("g{e}"),
            })
            .collect();
        for (i, base) in parent_names.iter().enumerate() {
            let (letter, used) = interner.intern_fresh(base, tag, &taken);
            taken.insert(used.clone());
            alphabet.push(letter);
            names.push(used);
            gen_map.insert(letter, i);
        }
        let elems = alphabet.iter().map(|&l| Word::single(l)).collect();
        Ok(FiniteSemigroup {
            elems,
            names: Some(names),
            table,
            gen_map,
            alphabet,
        })
    }

    /// Builds a table directly; used by constructions that already know the
    /// multiplication. `gens` maps each alphabet letter to its element.
    pub(crate) fn from_parts(
        elems: Vec<Word>,
        names: Option<Vec<String>>,
        table: Vec<usize>,
        gens: Vec<(Letter, usize)>,
    ) -> Self {
        let alphabet: Vec<Letter> = gens.iter().map(|&(l, _)| l).collect();
        let gen_map: BTreeMap<Letter, usize> = gens.into_iter().collect();
        FiniteSemigroup {
            elems,
            names,
            table,
            gen_map,
            alphabet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    EmptyWord,
    UnknownLetter(Letter),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyWord => write!(f, "cannot evaluate the empty word"),
            EvalError::UnknownLetter(l) => {
                write!(f, "letter #{} is not a generator of this semigroup", l.sym())
            }
        }
    }
}

impl core::error::Error for EvalError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictError {
    NotClosed { x: usize, y: usize, product: usize },
}

impl fmt::Display for RestrictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestrictError::NotClosed { x, y, product } => write!(
                f,
                "subset not closed: product of elements {x} and {y} is {product}"
            ),
        }
    }
}

impl core::error::Error for RestrictError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnumerateError {
    EmptyAlphabet,
    LimitExceeded { limit: usize },
    /// The identification search ran out of budget on this pair of words.
    Undecided { left: Word, right: Word },
    /// Two previously separated canonical words turned out to be equal, or
    /// the finished table failed its associativity/relation certificate.
    Certification { reason: String },
}

impl fmt::Display for EnumerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerateError::EmptyAlphabet => write!(f, "presentation has no generators"),
            EnumerateError::LimitExceeded { limit } => {
                write!(f, "enumeration exceeded the element limit {limit}")
            }
            EnumerateError::Undecided { .. } => {
                write!(f, "undecided pair: word identification ran out of budget")
            }
            EnumerateError::Certification { reason } => {
                write!(f, "table certification failed: {reason}")
            }
        }
    }
}

impl core::error::Error for EnumerateError {}

enum Identify {
    Known(usize),
    Fresh,
    Undecided(usize),
    Collision(usize, usize),
}

/// Bidirectional bounded search classifying `w` against the canonical words:
/// a rewrite meet with candidate `i` proves equality; exhausting the capped
/// neighbourhood of `w` without a meet separates it from all candidates.
fn identify(w: &Word, candidates: &[Word], p: &Presentation, node_budget: usize) -> Identify {
    const W_SIDE: u32 = u32::MAX;
    if candidates.is_empty() {
        return Identify::Fresh;
    }
    let max_side = p
        .rules()
        .iter()
        .map(|r| r.lhs.len().max(r.rhs.len()))
        .max()
        .unwrap_or(1);
    let cap = w
        .len()
        .max(candidates.iter().map(Word::len).max().unwrap_or(0))
        + max_side
        + 2;

    let mut visited: BTreeMap<Word, u32> = BTreeMap::new();
    let mut w_frontier: VecDeque<Word> = VecDeque::new();
    let mut c_frontier: VecDeque<Word> = VecDeque::new();
    visited.insert(w.clone(), W_SIDE);
    w_frontier.push_back(w.clone());
    for (i, c) in candidates.iter().enumerate() {
        match visited.get(c) {
            Some(&W_SIDE) => return Identify::Known(i),
            Some(&other) => return Identify::Collision(other as usize, i),
            None => {
                visited.insert(c.clone(), i as u32);
                c_frontier.push_back(c.clone());
            }
        }
    }

    let mut nodes = 0usize;
    let expand = |frontier: &mut VecDeque<Word>,
                      visited: &mut BTreeMap<Word, u32>,
                      nodes: &mut usize|
     -> Result<Option<(u32, u32)>, ()> {
        // One full layer; returns a meeting pair of sources if found.
        let layer = frontier.len();
        for _ in 0..layer {
            let cur = frontier.pop_front().expect("layer underflow");
            let side = visited[&cur];
            for occ in rewrite_occurrences(&cur, p) {
                let next = apply_occurrence(&occ, p);
                if next.len() > cap {
                    continue;
                }
                match visited.get(&next) {
                    Some(&other) if other != side => return Ok(Some((side, other))),
                    Some(_) => {}
                    None => {
                        *nodes += 1;
                        if *nodes > node_budget {
                            return Err(());
                        }
                        visited.insert(next.clone(), side);
                        frontier.push_back(next);
                    }
                }
            }
        }
        Ok(None)
    };

    loop {
        if w_frontier.is_empty() {
            return Identify::Fresh;
        }
        let meet = if !c_frontier.is_empty() && c_frontier.len() <= w_frontier.len() {
            expand(&mut c_frontier, &mut visited, &mut nodes)
        } else {
            expand(&mut w_frontier, &mut visited, &mut nodes)
        };
        match meet {
            Ok(Some((a, b))) => {
                let (x, y) = (a.min(b), a.max(b));
                if y == W_SIDE {
                    return Identify::Known(x as usize);
                }
                return Identify::Collision(x as usize, y as usize);
            }
            Ok(None) => {}
            Err(()) => return Identify::Undecided(0),
        }
    }
}

/// Enumerates the semigroup defined by `p` by breadth-first closure over
/// products of canonical words, or fails with the reason the closure could
/// not be completed and certified.
pub fn enumerate(
    p: &Presentation,
    limit: usize,
    node_budget: usize,
) -> Result<FiniteSemigroup, EnumerateError> {
    if p.alphabet().is_empty() {
        return Err(EnumerateError::EmptyAlphabet);
    }
    let letters: Vec<Letter> = p.alphabet().to_vec();
    let mut canon: Vec<Word> = Vec::new();
    let mut right_act: Vec<Vec<usize>> = Vec::new();
    let mut gens: Vec<(Letter, usize)> = Vec::new();

    let classify = |w: Word,
                        canon: &mut Vec<Word>,
                        right_act: &mut Vec<Vec<usize>>|
     -> Result<usize, EnumerateError> {
        match identify(&w, canon, p, node_budget) {
            Identify::Known(i) => Ok(i),
            Identify::Fresh => {
                if canon.len() == limit {
                    return Err(EnumerateError::LimitExceeded { limit });
                }
                canon.push(w);
                right_act.push(vec![usize::MAX; letters.len()]);
                Ok(canon.len() - 1)
            }
            Identify::Undecided(i) => Err(EnumerateError::Undecided {
                left: w,
                right: canon.get(i).cloned().unwrap_or_else(Word::empty),
            }),
            Identify::Collision(i, j) => Err(EnumerateError::Certification {
                reason: format!("canonical words {i} and {j} represent the same element"),
            }),
        }
    };

    for &a in &letters {
        let idx = classify(Word::single(a), &mut canon, &mut right_act)?;
        gens.push((a, idx));
    }
    let mut i = 0;
    while i < canon.len() {
        for (ai, &a) in letters.iter().enumerate() {
            if right_act[i][ai] != usize::MAX {
                continue;
            }
            let product = canon[i].concat(&Word::single(a));
            let idx = classify(product, &mut canon, &mut right_act)?;
            right_act[i][ai] = idx;
        }
        i += 1;
    }

    // Full table by folding the right action over canonical words.
    let n = canon.len();
    let letter_pos: BTreeMap<Letter, usize> =
        letters.iter().enumerate().map(|(k, &l)| (l, k)).collect();
    let act_word = |start: usize, w: &Word| -> usize {
        let mut cur = start;
        for l in w.letters() {
            cur = right_act[cur][letter_pos[l]];
        }
        cur
    };
    let mut table = vec![0usize; n * n];
    for x in 0..n {
        for y in 0..n {
            table[x * n + y] = act_word(x, &canon[y]);
        }
    }

    let s = FiniteSemigroup::from_parts(canon, None, table, gens);

    // Certify: the table is associative and satisfies every relation, so the
    // constructed quotient witnesses that all n elements are distinct.
    if let Some((x, y, z)) = associativity_violation(&s) {
        return Err(EnumerateError::Certification {
            reason: format!("associativity fails at ({x}, {y}, {z})"),
        });
    }
    for rule in p.rules() {
        let lhs = s.eval(&rule.lhs).expect("rule letters are generators");
        let rhs = s.eval(&rule.rhs).expect("rule letters are generators");
        if lhs != rhs {
            return Err(EnumerateError::Certification {
                reason: format!("relation {} violated by the table", rule.id),
            });
        }
    }
    for (idx, w) in s.elems.iter().enumerate() {
        if s.eval(w).expect("canonical words are over the alphabet") != idx {
            return Err(EnumerateError::Certification {
                reason: format!("canonical word of element {idx} does not evaluate to it"),
            });
        }
    }
    Ok(s)
}

fn associativity_violation(s: &FiniteSemigroup) -> Option<(usize, usize, usize)> {
    let n = s.size();
    for x in 0..n {
        for y in 0..n {
            let xy = s.mul(x, y);
            for z in 0..n {
                if s.mul(xy, z) != s.mul(x, s.mul(y, z)) {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableError {
    Syntax { line: usize, message: String },
    UnknownElement { line: usize, name: String },
    NotAssociative { x: String, y: String, z: String },
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            TableError::UnknownElement { line, name } => {
                write!(f, "line {line}: unknown element name `{name}`")
            }
            TableError::NotAssociative { x, y, z } => {
                write!(f, "table is not associative: ({x} {y}) {z} != {x} ({y} {z})")
            }
        }
    }
}

impl core::error::Error for TableError {}

/// Parses the `.tbl` format: an `elements:` line followed by an n-by-n
/// table of element names (row `x`, column `y` holding `x·y`). Produces a
/// semigroup with one generator letter per element.
pub fn from_table(text: &str, interner: &mut Interner) -> Result<FiniteSemigroup, TableError> {
    from_table_tagged(text, interner, Tag::Plain)
}

pub fn from_table_tagged(
    text: &str,
    interner: &mut Interner,
    tag: Tag,
) -> Result<FiniteSemigroup, TableError> {
    let mut names: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("elements:") {
            if !names.is_empty() {
                return Err(TableError::Syntax {
                    line: line_no,
                    message: "second `elements:` line".to_string(),
                });
            }
            for name in rest.split_whitespace() {
                if index.contains_key(name) {
                    return Err(TableError::Syntax {
                        line: line_no,
                        message: format!("element `{name}` declared twice"),
                    });
                }
                index.insert(name.to_string(), names.len());
                names.push(name.to_string());
            }
            if names.is_empty() {
                return Err(TableError::Syntax {
                    line: line_no,
                    message: "no elements declared".to_string(),
                });
            }
        } else {
            if names.is_empty() {
                return Err(TableError::Syntax {
                    line: line_no,
                    message: "table row before `elements:` line".to_string(),
                });
            }
            let mut row = Vec::with_capacity(names.len());
            for name in line.split_whitespace() {
                let &k = index.get(name).ok_or_else(|| TableError::UnknownElement {
                    line: line_no,
                    name: name.to_string(),
                })?;
                row.push(k);
            }
            if row.len() != names.len() {
                return Err(TableError::Syntax {
                    line: line_no,
                    message: format!("expected {} entries, found {}", names.len(), row.len()),
                });
            }
            rows.push(row);
        }
    }
    let n = names.len();
    if rows.len() != n {
        return Err(TableError::Syntax {
            line: 0,
            message: format!("expected {n} table rows, found {}", rows.len()),
        });
    }
    let mut table = vec![0usize; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            table[i * n + j] = v;
        }
    }

    let mut gens = Vec::with_capacity(n);
    let mut elems = Vec::with_capacity(n);
    for (i, name) in names.iter().enumerate() {
        let letter = interner.intern(name, tag);
        gens.push((letter, i));
        elems.push(Word::single(letter));
    }
    let s = FiniteSemigroup::from_parts(elems, Some(names.clone()), table, gens);
    if let Some((x, y, z)) = associativity_violation(&s) {
        return Err(TableError::NotAssociative {
            x: names[x].clone(),
            y: names[y].clone(),
            z: names[z].clone(),
        });
    }
    Ok(s)
}

/// Canonical `.tbl` serialization.
pub fn serialize_table(s: &FiniteSemigroup, interner: &Interner) -> String {
    let n = s.size();
    let names: Vec<String> = (0..n).map(|i| s.display_element(i, interner)).collect();
    let mut out = String::new();
    out.push_str("elements:");
    for name in &names {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for x in 0..n {
        let row: Vec<&str> = (0..n).map(|y| names[s.mul(x, y)].as_str()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// An element partition with classes listed by least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl Partition {
    fn from_keys<K: Ord>(keys: Vec<K>) -> Partition {
        let mut groups: BTreeMap<&K, Vec<usize>> = BTreeMap::new();
        for (i, k) in keys.iter().enumerate() {
            groups.entry(k).or_default().push(i);
        }
        let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
        classes.sort_by_key(|c| c[0]);
        let mut class_of = vec![0usize; keys.len()];
        for (ci, class) in classes.iter().enumerate() {
            for &e in class {
                class_of[e] = ci;
            }
        }
        Partition { class_of, classes }
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn same(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }
}

/// Green's relations as element partitions, plus the idempotent set.
#[derive(Debug, Clone)]
pub struct GreenStructure {
    pub r: Partition,
    pub l: Partition,
    pub h: Partition,
    pub d: Partition,
    pub j: Partition,
    pub idempotents: Vec<usize>,
}

/// Computes Green's relations by exhaustive principal-ideal comparison
/// over the monoid completion.
pub fn green(s: &FiniteSemigroup) -> GreenStructure {
    let n = s.size();
    let right_ideal = |x: usize| -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = (0..n).map(|y| s.mul(x, y)).collect();
        set.insert(x);
        set
    };
    let left_ideal = |x: usize| -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = (0..n).map(|y| s.mul(y, x)).collect();
        set.insert(x);
        set
    };
    let two_sided = |x: usize| -> BTreeSet<usize> {
        let mut set = right_ideal(x);
        set.extend(left_ideal(x));
        for a in 0..n {
            for b in 0..n {
                set.insert(s.mul(s.mul(a, x), b));
            }
        }
        set
    };
    let r_keys: Vec<BTreeSet<usize>> = (0..n).map(right_ideal).collect();
    let l_keys: Vec<BTreeSet<usize>> = (0..n).map(left_ideal).collect();
    let r = Partition::from_keys(r_keys.clone());
    let l = Partition::from_keys(l_keys.clone());
    let h_keys: Vec<(BTreeSet<usize>, BTreeSet<usize>)> =
        r_keys.into_iter().zip(l_keys).collect();
    let h = Partition::from_keys(h_keys);
    let j = Partition::from_keys((0..n).map(two_sided).collect());

    // D as the join of R and L: union-find over both partitions.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for part in [&r, &l] {
        for class in part.classes() {
            for &e in &class[1..] {
                let (a, b) = (find(&mut parent, class[0]), find(&mut parent, e));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let d_keys: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
    let d = Partition::from_keys(d_keys);

    let idempotents = (0..n).filter(|&x| s.is_idempotent(x)).collect();
    GreenStructure {
        r,
        l,
        h,
        d,
        j,
        idempotents,
    }
}

/// The maximal subgroups: exactly the H-classes containing an idempotent.
pub fn maximal_subgroups(s: &FiniteSemigroup, g: &GreenStructure) -> Vec<BTreeSet<usize>> {
    g.h.classes()
        .iter()
        .filter(|class| class.iter().any(|&x| s.is_idempotent(x)))
        .map(|class| class.iter().copied().collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubgroupError {
    Empty,
    OutOfRange { element: usize },
    NotClosed { x: usize, y: usize },
    NoIdentity,
    NoInverse { x: usize },
    LetterNotInOracle,
}

impl fmt::Display for SubgroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupError::Empty => write!(f, "subgroup is empty"),
            SubgroupError::OutOfRange { element } => {
                write!(f, "element {element} is out of range")
            }
            SubgroupError::NotClosed { x, y } => {
                write!(f, "not closed: product of {x} and {y} leaves the subset")
            }
            SubgroupError::NoIdentity => write!(f, "subset has no identity element"),
            SubgroupError::NoInverse { x } => write!(f, "element {x} has no inverse in the subset"),
            SubgroupError::LetterNotInOracle => {
                write!(f, "presentation letter is not a generator of the oracle")
            }
        }
    }
}

impl core::error::Error for SubgroupError {}

/// Validates that `g` is a subgroup of `s`, returning its identity.
pub fn validate_subgroup(s: &FiniteSemigroup, g: &BTreeSet<usize>) -> Result<usize, SubgroupError> {
    if g.is_empty() {
        return Err(SubgroupError::Empty);
    }
    for &x in g {
        if x >= s.size() {
            return Err(SubgroupError::OutOfRange { element: x });
        }
    }
    for &x in g {
        for &y in g {
            if !g.contains(&s.mul(x, y)) {
                return Err(SubgroupError::NotClosed { x, y });
            }
        }
    }
    let identity = g
        .iter()
        .copied()
        .find(|&t| g.iter().all(|&x| s.mul(t, x) == x && s.mul(x, t) == x))
        .ok_or(SubgroupError::NoIdentity)?;
    for &x in g {
        if !g
            .iter()
            .any(|&y| s.mul(x, y) == identity && s.mul(y, x) == identity)
        {
            return Err(SubgroupError::NoInverse { x });
        }
    }
    Ok(identity)
}

/// The right cosets of a subgroup: the strong orbit of `G` under right
/// multiplication by the presentation's generators. Coset indices are
/// 1-based with `C_1 = G`; index 0 is the absorbing failure state.
#[derive(Debug, Clone)]
pub struct CosetFamily {
    cosets: Vec<BTreeSet<usize>>,
    action: Vec<Vec<usize>>,
    witnesses: Vec<Word>,
    alphabet: Vec<Letter>,
    letter_pos: BTreeMap<Letter, usize>,
}

impl CosetFamily {
    /// Number of cosets (the translational index of `G`).
    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coset `i` (1-based).
    pub fn coset(&self, i: usize) -> &BTreeSet<usize> {
        &self.cosets[i - 1]
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    /// Action of a generator on a coset index; both sides 1-based with 0
    /// as the absorbing failure state.
    pub fn act(&self, i: usize, l: Letter) -> usize {
        if i == 0 {
            return 0;
        }
        match self.letter_pos.get(&l) {
            Some(&k) => self.action[i - 1][k],
            None => 0,
        }
    }

    /// Action of a whole word (left to right); empty words act trivially.
    pub fn act_word(&self, i: usize, w: &Word) -> usize {
        let mut cur = i;
        for &l in w.letters() {
            cur = self.act(cur, l);
            if cur == 0 {
                return 0;
            }
        }
        cur
    }

    /// A word `s'` with `C_i · s' = C_1`, certified during construction.
    pub fn witness(&self, i: usize) -> &Word {
        &self.witnesses[i - 1]
    }
}

/// Computes the strong orbit of the subgroup `g` under right multiplication
/// by the generators of `p`, with the per-coset return witnesses.
pub fn right_cosets(
    s: &FiniteSemigroup,
    g: &BTreeSet<usize>,
    p: &Presentation,
) -> Result<CosetFamily, SubgroupError> {
    validate_subgroup(s, g)?;
    let letters: Vec<Letter> = p.alphabet().to_vec();
    let gen_elems: Vec<usize> = letters
        .iter()
        .map(|&l| s.generator(l).ok_or(SubgroupError::LetterNotInOracle))
        .collect::<Result<_, _>>()?;

    // Forward orbit of G under right multiplication.
    let mut states: Vec<BTreeSet<usize>> = vec![g.clone()];
    let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    index.insert(g.clone(), 0);
    let mut next: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let mut row = Vec::with_capacity(gen_elems.len());
        for &e in &gen_elems {
            let image: BTreeSet<usize> = states[i].iter().map(|&x| s.mul(x, e)).collect();
            let id = match index.get(&image) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    index.insert(image.clone(), id);
                    states.push(image);
                    id
                }
            };
            row.push(id);
        }
        next.push(row);
        i += 1;
    }

    // Strong orbit: states with a non-empty generator word back to state 0.
    // Backwards propagation from the states stepping directly into 0.
    let n = states.len();
    let mut reaches_g: Vec<bool> = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for y in 0..n {
        if next[y].contains(&0) {
            reaches_g[y] = true;
            queue.push_back(y);
        }
    }
    while let Some(x) = queue.pop_front() {
        for y in 0..n {
            if !reaches_g[y] && next[y].contains(&x) {
                reaches_g[y] = true;
                queue.push_back(y);
            }
        }
    }
    debug_assert!(reaches_g[0], "G returns to itself via its identity");

    // Cosets: strong-orbit states in discovery order, G first.
    let coset_states: Vec<usize> = (0..n).filter(|&x| reaches_g[x]).collect();
    let coset_index: BTreeMap<usize, usize> = coset_states
        .iter()
        .enumerate()
        .map(|(k, &st)| (st, k))
        .collect();

    let action: Vec<Vec<usize>> = coset_states
        .iter()
        .map(|&st| {
            next[st]
                .iter()
                .map(|&t| coset_index.get(&t).map_or(0, |&k| k + 1))
                .collect()
        })
        .collect();

    // Shortest non-empty witness word from each coset back to G, found by
    // breadth-first search over the coset action graph.
    let mut witnesses: Vec<Word> = Vec::with_capacity(coset_states.len());
    for k in 0..coset_states.len() {
        let mut seen: BTreeSet<usize> = BTreeSet::from([k + 1]);
        let mut bfs: VecDeque<(usize, Word)> = VecDeque::from([(k + 1, Word::empty())]);
        let mut found: Option<Word> = None;
        'search: while let Some((cur, word)) = bfs.pop_front() {
            for (ai, &l) in letters.iter().enumerate() {
                let t = action[cur - 1][ai];
                if t == 0 {
                    continue;
                }
                let mut w2 = word.clone();
                w2.push(l);
                if t == 1 {
                    found = Some(w2);
                    break 'search;
                }
                if seen.insert(t) {
                    bfs.push_back((t, w2));
                }
            }
        }
        witnesses.push(found.expect("strong orbit state must return to G"));
    }

    let letter_pos = letters.iter().enumerate().map(|(k, &l)| (l, k)).collect();
    Ok(CosetFamily {
        cosets: coset_states.into_iter().map(|st| states[st].clone()).collect(),
        action,
        witnesses,
        alphabet: letters,
        letter_pos,
    })
}

/// Certificate that a presentation's rules, oriented left to right, form a
/// terminating and locally confluent rewriting system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessCert {
    rules: Vec<(Word, Word)>,
}

impl CompletenessCert {
    pub fn covers(&self, p: &Presentation) -> bool {
        self.rules.len() == p.rules().len()
            && self
                .rules
                .iter()
                .zip(p.rules())
                .all(|(c, r)| c.0 == r.lhs && c.1 == r.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompletenessError {
    NotLengthReducing { rule: usize },
    NotJoinable { word: Word, rule1: usize, rule2: usize },
}

impl fmt::Display for CompletenessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompletenessError::NotLengthReducing { rule } => {
                write!(f, "rule {rule} is not length-reducing")
            }
            CompletenessError::NotJoinable { rule1, rule2, .. } => {
                write!(f, "overlap of rules {rule1} and {rule2} is not joinable")
            }
        }
    }
}

impl core::error::Error for CompletenessError {}

/// Leftmost reduction of `w` to a normal form under left-to-right oriented
/// rules; terminates whenever the system is length-reducing.
pub fn leftmost_normal_form(w: &Word, p: &Presentation) -> Word {
    let mut cur = w.clone();
    'outer: loop {
        for pos in 0..cur.len() {
            for rule in p.rules() {
                if cur.matches_at(pos, &rule.lhs) {
                    cur = cur
                        .slice(0, pos)
                        .concat(&rule.rhs)
                        .concat(&cur.slice(pos + rule.lhs.len(), cur.len()));
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}

/// Every overlap of two left-hand sides: proper suffix-prefix overlaps and
/// proper containments, as `(word, rule1, pos1, rule2, pos2)`.
pub fn lhs_overlaps(p: &Presentation) -> Vec<(Word, usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for r1 in p.rules() {
        for r2 in p.rules() {
            let l1 = &r1.lhs;
            let l2 = &r2.lhs;
            // Suffix of l1 equal to a prefix of l2, proper on both sides.
            for o in 1..l1.len().min(l2.len()) {
                if l1.slice(l1.len() - o, l1.len()) == l2.slice(0, o) {
                    let word = l1.concat(&l2.slice(o, l2.len()));
                    out.push((word, r1.id, 0, r2.id, l1.len() - o));
                }
            }
            // l2 properly contained in l1.
            if l2.len() < l1.len() {
                for pos in 0..=l1.len() - l2.len() {
                    if l1.matches_at(pos, l2) {
                        out.push((l1.clone(), r1.id, 0, r2.id, pos));
                    }
                }
            }
            // Distinct rules with identical left-hand sides.
            if r1.id < r2.id && l1 == l2 {
                out.push((l1.clone(), r1.id, 0, r2.id, 0));
            }
        }
    }
    out
}

/// Verifies termination (length-reducing rules) and local confluence
/// (joinability of every overlap) for left-to-right oriented rules.
pub fn certify_complete(p: &Presentation) -> Result<CompletenessCert, CompletenessError> {
    for rule in p.rules() {
        if rule.lhs.len() <= rule.rhs.len() {
            return Err(CompletenessError::NotLengthReducing { rule: rule.id });
        }
    }
    for (word, r1, pos1, r2, pos2) in lhs_overlaps(p) {
        let rule1 = p.rule(r1);
        let rule2 = p.rule(r2);
        let reduce_at = |pos: usize, rule: &crate::words::Rule| -> Word {
            word.slice(0, pos)
                .concat(&rule.rhs)
                .concat(&word.slice(pos + rule.lhs.len(), word.len()))
        };
        let a = leftmost_normal_form(&reduce_at(pos1, rule1), p);
        let b = leftmost_normal_form(&reduce_at(pos2, rule2), p);
        if a != b {
            return Err(CompletenessError::NotJoinable {
                word,
                rule1: r1,
                rule2: r2,
            });
        }
    }
    Ok(CompletenessCert {
        rules: p.rules().iter().map(|r| (r.lhs.clone(), r.rhs.clone())).collect(),
    })
}

/// The multiplication-table presentation: one generator per element and a
/// rule `x y = (xy)` for every pair, which is a complete rewriting system
/// (length-reducing; all overlaps resolve by associativity).
pub fn table_presentation(
    s: &FiniteSemigroup,
    interner: &mut Interner,
) -> (Presentation, CompletenessCert) {
    table_presentation_tagged(s, interner, Tag::Plain)
}

pub fn table_presentation_tagged(
    s: &FiniteSemigroup,
    interner: &mut Interner,
    tag: Tag,
) -> (Presentation, CompletenessCert) {
    let n = s.size();
    let mut taken = BTreeSet::new();
    let mut letters = Vec::with_capacity(n);
    for i in 0..n {
        let base = match i {
            _ if s.names.is_some() => s.names.as_ref().unwrap()[i].clone(),
            _ => format!("g{i}"),
        };
        let (letter, used) = interner.intern_fresh(&base, tag, &taken);
        taken.insert(used);
        letters.push(letter);
    }
    let mut rules = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let lhs = Word::from_letters(vec![letters[x], letters[y]]);
            let rhs = Word::single(letters[s.mul(x, y)]);
            rules.push((lhs, rhs));
        }
    }
    let p = Presentation::new(letters, rules).expect("table presentation is well-formed");
    let cert = certify_complete(&p).expect("table systems are complete by associativity");
    (p, cert)
}

/// Element-table isomorphism by backtracking bijection search; adequate for
/// desk-scale tables.
pub fn tables_isomorphic(a: &FiniteSemigroup, b: &FiniteSemigroup) -> bool {
    if a.size() != b.size() {
        return false;
    }
    let n = a.size();
    let mut image: Vec<Option<usize>> = vec![None; n];
    let mut used: Vec<bool> = vec![false; n];
    fn consistent(a: &FiniteSemigroup, b: &FiniteSemigroup, image: &[Option<usize>]) -> bool {
        let n = a.size();
        for x in 0..n {
            let Some(ix) = image[x] else { continue };
            for y in 0..n {
                let Some(iy) = image[y] else { continue };
                if let Some(ixy) = image[a.mul(x, y)] {
                    if b.mul(ix, iy) != ixy {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn rec(
        a: &FiniteSemigroup,
        b: &FiniteSemigroup,
        image: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        x: usize,
    ) -> bool {
        let n = a.size();
        if x == n {
            return true;
        }
        for y in 0..n {
            if used[y] || a.is_idempotent(x) != b.is_idempotent(y) {
                continue;
            }
            image[x] = Some(y);
            used[y] = true;
            if consistent(a, b, image) && rec(a, b, image, used, x + 1) {
                return true;
            }
            image[x] = None;
            used[y] = false;
        }
        false
    }
    rec(a, b, &mut image, &mut used, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_presentation;

    const T2_TABLE: &str = "\
elements: id sw c1 c2
id sw c1 c2
sw id c1 c2
c1 c2 c1 c2
c2 c1 c1 c2
";

    fn fix1(it: &mut Interner) -> Presentation {
        parse_presentation("alphabet: a\nrule: a a a = a\n", it).unwrap()
    }

    fn fix2(it: &mut Interner) -> Presentation {
        parse_presentation("alphabet: a\nrule: a a a a a = a\n", it).unwrap()
    }

    #[test]
    fn enumerate_fix1_has_two_elements() {
        let mut it = Interner::new();
        let p = fix1(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(s.size(), 2);
    }

    #[test]
    fn enumerate_fix2_has_four_elements() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(s.size(), 4);
        // a^6 = a^2 in the oracle
        let a = p.alphabet()[0];
        let w6 = Word::from_letters(alloc::vec![a; 6]);
        let w2 = Word::from_letters(alloc::vec![a; 2]);
        assert_eq!(s.eval(&w6).unwrap(), s.eval(&w2).unwrap());
    }

    #[test]
    fn enumerate_limit_exceeded() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let err = enumerate(&p, 3, DEFAULT_NODE_BUDGET).unwrap_err();
        assert!(matches!(err, EnumerateError::LimitExceeded { limit: 3 }));
    }

    #[test]
    fn from_table_t2() {
        let mut it = Interner::new();
        let s = from_table(T2_TABLE, &mut it).unwrap();
        assert_eq!(s.size(), 4);
        let g = green(&s);
        assert_eq!(g.idempotents, alloc::vec![0, 2, 3]);
    }

    #[test]
    fn from_table_rejects_non_associative() {
        // x*x = y but y absorbs into x inconsistently.
        let text = "elements: x y\ny y\ny x\n";
        let mut it = Interner::new();
        let err = from_table(text, &mut it).unwrap_err();
        assert!(matches!(err, TableError::NotAssociative { .. }));
    }

    #[test]
    fn green_fix2_single_h_class() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let g = green(&s);
        assert_eq!(g.h.classes().len(), 1);
        assert_eq!(g.d.classes().len(), 1);
        assert_eq!(maximal_subgroups(&s, &g).len(), 1);
    }

    #[test]
    fn green_t2_structure() {
        let mut it = Interner::new();
        let s = from_table(T2_TABLE, &mut it).unwrap();
        let g = green(&s);
        // Units {id, sw}; constants split into singleton L/H-classes.
        assert_eq!(g.r.classes().len(), 2);
        assert_eq!(g.l.classes().len(), 3);
        assert_eq!(g.h.classes().len(), 3);
        assert_eq!(g.d.classes(), g.j.classes());
        let subs = maximal_subgroups(&s, &g);
        assert_eq!(subs.len(), 3);
        assert_eq!(subs[0], BTreeSet::from([0, 1]));
    }

    #[test]
    fn cosets_fix2_index_two() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let a = p.alphabet()[0];
        let a2 = s.eval(&Word::from_letters(alloc::vec![a; 2])).unwrap();
        let a4 = s.eval(&Word::from_letters(alloc::vec![a; 4])).unwrap();
        let g: BTreeSet<usize> = BTreeSet::from([a2, a4]);
        let fam = right_cosets(&s, &g, &p).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.act(1, a), 2);
        assert_eq!(fam.act(2, a), 1);
    }

    #[test]
    fn cosets_t2_units_index_one() {
        let mut it = Interner::new();
        let s = from_table(T2_TABLE, &mut it).unwrap();
        // Presentation over the table's own letters.
        let (p, _) = table_presentation(&s, &mut it);
        let g: BTreeSet<usize> = BTreeSet::from([0, 1]);
        let fam = right_cosets(&s, &g, &p).unwrap();
        assert_eq!(fam.len(), 1);
        // G * c1 collapses to a singleton outside the strong orbit.
        let c1 = p.alphabet()[2];
        assert_eq!(fam.act(1, c1), 0);
    }

    #[test]
    fn coset_witnesses_certified() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let a = p.alphabet()[0];
        let a2 = s.eval(&Word::from_letters(alloc::vec![a; 2])).unwrap();
        let a4 = s.eval(&Word::from_letters(alloc::vec![a; 4])).unwrap();
        let g: BTreeSet<usize> = BTreeSet::from([a2, a4]);
        let fam = right_cosets(&s, &g, &p).unwrap();
        for i in 1..=fam.len() {
            let w = fam.witness(i);
            assert!(!w.is_empty());
            assert_eq!(fam.act_word(i, w), 1, "witness returns C{i} to G");
            // The witness certifies set-wise: C_i * s_w = G.
            let s_w = s.eval(w).unwrap();
            let image: BTreeSet<usize> = fam.coset(i).iter().map(|&x| s.mul(x, s_w)).collect();
            assert_eq!(&image, fam.coset(1));
        }
    }

    #[test]
    fn cosets_whole_group_index_one() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let g: BTreeSet<usize> = (0..4).collect();
        let fam = right_cosets(&s, &g, &p).unwrap();
        assert_eq!(fam.len(), 1);
    }

    #[test]
    fn subgroup_validation_reports_witness() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let bad: BTreeSet<usize> = BTreeSet::from([0, 1]); // {a, a^2} not closed
        let err = right_cosets(&s, &bad, &p).unwrap_err();
        assert!(matches!(err, SubgroupError::NotClosed { .. }));
    }

    #[test]
    fn table_presentation_fix1_group() {
        let mut it = Interner::new();
        let p = fix1(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let (tp, cert) = table_presentation(&s, &mut it);
        assert_eq!(tp.rules().len(), 4);
        assert!(cert.covers(&tp));
        // Normal forms of longer words are single letters.
        for x in 0..2 {
            for y in 0..2 {
                let w = tp
                    .rule(x * 2 + y)
                    .lhs
                    .concat(&Word::single(tp.alphabet()[x]));
                assert_eq!(leftmost_normal_form(&w, &tp).len(), 1);
            }
        }
    }

    #[test]
    fn one_element_table_presentation() {
        let mut it = Interner::new();
        let s = from_table("elements: e\ne\n", &mut it).unwrap();
        let (tp, _) = table_presentation(&s, &mut it);
        assert_eq!(tp.rules().len(), 1);
        assert_eq!(tp.rule(0).lhs.len(), 2);
    }

    #[test]
    fn enumerate_matches_table_up_to_isomorphism() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let text = serialize_table(&s, &it);
        let s2 = from_table(&text, &mut it).unwrap();
        assert!(tables_isomorphic(&s, &s2));
    }

    #[test]
    fn reduction_confluent_on_short_words() {
        let mut it = Interner::new();
        let s = from_table(T2_TABLE, &mut it).unwrap();
        let (tp, _) = table_presentation(&s, &mut it);
        // Exhaustive: every word of length <= 4 has a unique normal form
        // independent of reduction order (checked against the table fold).
        let letters = tp.alphabet().to_vec();
        let mut words = alloc::vec![Word::empty()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for w in &words {
                for &l in &letters {
                    let mut w2 = w.clone();
                    w2.push(l);
                    next.push(w2);
                }
            }
            for w in &next {
                let nf = leftmost_normal_form(w, &tp);
                assert_eq!(nf.len(), 1);
                let elt = s.eval(w).unwrap();
                assert_eq!(nf.letters()[0], tp.alphabet()[elt]);
            }
            words = next;
        }
    }
}
