//! Presentation and homotopy base for a subgroup of a semigroup.
//!
//! Given `S` presented by `<A|R>` and a subgroup `G` of finite translational
//! index, the coset alphabet `B = {[i,a]}` carries a presentation `<B|U>` of
//! `G` (the two relation families of `subgroup_presentation`). The word maps
//! `phi` (reading words through the coset action) and `psi` (expanding
//! coset letters to `e r_i a r'_{ia}`) extend to paths between the two
//! derivation graphs, the `Lambda` paths connect each `B`-word to
//! `phi(psi(w))`, and `base_kw` assembles the homotopy base `K ∪ W` from a
//! base of the ambient presentation.
//!
//! All "fixed" choices (`e`, `r_i`, `r_i'`, the paths `psi(E_u)`) are
//! shortest-then-first in the deterministic orders of the word and graph
//! modules, so every derived object is reproducible.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::graph::{edges_from, Edge, FindPathError, Path, PathFinder, SubgraphFilter};
use crate::homotopy::{h1_square, validate_base, HomotopyBase, ParallelPair};
use crate::oracle::{right_cosets, validate_subgroup, CosetFamily, FiniteSemigroup, SubgroupError};
use crate::words::{Interner, Letter, Presentation, Sign, Tag, Word};

/// The data of the subgroup construction: coset action, the fixed words
/// `e`, `r_i`, `r_i'`, and the coset alphabet `B`.
#[derive(Debug, Clone)]
pub struct CosetContext {
    presentation: Presentation,
    oracle: FiniteSemigroup,
    subgroup: BTreeSet<usize>,
    cosets: CosetFamily,
    /// `r_i` indexed by coset (entry 0 is `r_1`, the empty word).
    r_words: Vec<Word>,
    /// `r_i'` indexed by coset (entry 0 is `r_1'`, the empty word).
    r_prime_words: Vec<Word>,
    /// Fixed non-empty word representing the identity of `G`.
    e_word: Word,
    /// `[i, a]` pairs with `i a != 0`, in (coset, alphabet) order.
    b_letters: Vec<((usize, Letter), Letter)>,
    b_by_pair: BTreeMap<(usize, Letter), Letter>,
    pair_by_b: BTreeMap<Letter, (usize, Letter)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContextError {
    NotSubgroup(SubgroupError),
    /// No word realises one of the fixed choices within the element graph.
    ChoiceSearchFailed { what: &'static str },
}

impl fmt::Display for ContextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextError::NotSubgroup(e) => write!(f, "not a subgroup: {e}"),
            ContextError::ChoiceSearchFailed { what } => {
                write!(f, "no word found for the fixed choice {what}")
            }
        }
    }
}

impl core::error::Error for ContextError {}

/// Shortest word (breadth-first over right multiplication, generators in
/// alphabet order) reaching `target`, from a fixed element or from the
/// generators themselves.
fn shortest_word_to(
    s: &FiniteSemigroup,
    p: &Presentation,
    start: Option<usize>,
    target: usize,
) -> Option<Word> {
    let letters: Vec<Letter> = p.alphabet().to_vec();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut queue: VecDeque<(usize, Word)> = VecDeque::new();
    match start {
        Some(x) => {
            if x == target {
                return Some(Word::empty());
            }
            seen.insert(x);
            queue.push_back((x, Word::empty()));
        }
        None => {
            for &l in &letters {
                let x = s.generator(l)?;
                if x == target {
                    return Some(Word::single(l));
                }
                if seen.insert(x) {
                    queue.push_back((x, Word::single(l)));
                }
            }
        }
    }
    while let Some((cur, word)) = queue.pop_front() {
        for &l in &letters {
            let g = s.generator(l)?;
            let next = s.mul(cur, g);
            let mut w2 = word.clone();
            w2.push(l);
            if next == target {
                return Some(w2);
            }
            if seen.insert(next) {
                queue.push_back((next, w2));
            }
        }
    }
    None
}

/// Builds the coset context: computes the coset family and fixes `e`,
/// `r_i`, `r_i'` as the shortest words satisfying their contracts, all
/// oracle-certified.
pub fn build_context(
    p: &Presentation,
    oracle: &FiniteSemigroup,
    g: &BTreeSet<usize>,
    interner: &mut Interner,
) -> Result<CosetContext, ContextError> {
    let identity = validate_subgroup(oracle, g).map_err(ContextError::NotSubgroup)?;
    let cosets = right_cosets(oracle, g, p).map_err(ContextError::NotSubgroup)?;

    let e_word = shortest_word_to(oracle, p, None, identity)
        .ok_or(ContextError::ChoiceSearchFailed { what: "e" })?;

    // r_i: shortest words moving coset 1 to coset i in the action graph.
    let n = cosets.len();
    let mut r_words: Vec<Option<Word>> = vec![None; n];
    r_words[0] = Some(Word::empty());
    let mut queue: VecDeque<(usize, Word)> = VecDeque::from([(1usize, Word::empty())]);
    while let Some((cur, word)) = queue.pop_front() {
        for &l in p.alphabet() {
            let t = cosets.act(cur, l);
            if t == 0 {
                continue;
            }
            if r_words[t - 1].is_none() {
                let mut w2 = word.clone();
                w2.push(l);
                r_words[t - 1] = Some(w2.clone());
                queue.push_back((t, w2));
            }
        }
    }
    let r_words: Vec<Word> = r_words
        .into_iter()
        .collect::<Option<_>>()
        .ok_or(ContextError::ChoiceSearchFailed { what: "r_i" })?;

    // r_i': shortest word with g s_{r_i} s_{r_i'} = g for all g in G, which
    // reduces to returning e_G s_{r_i} to e_G.
    let mut r_prime_words: Vec<Word> = Vec::with_capacity(n);
    r_prime_words.push(Word::empty());
    for r in r_words.iter().skip(1) {
        let start = oracle.mul(identity, oracle.eval(r).expect("r_i is over the alphabet"));
        let w = shortest_word_to(oracle, p, Some(start), identity)
            .ok_or(ContextError::ChoiceSearchFailed { what: "r_i'" })?;
        r_prime_words.push(w);
    }

    // Oracle checks of the context invariants.
    let e_elt = oracle.eval(&e_word).expect("e is over the alphabet");
    assert_eq!(e_elt, identity);
    for (i, (r, rp)) in r_words.iter().zip(&r_prime_words).enumerate().skip(1) {
        let s_r = oracle.eval(r).expect("r_i over alphabet");
        let coset: BTreeSet<usize> = g.iter().map(|&x| oracle.mul(x, s_r)).collect();
        assert_eq!(&coset, cosets.coset(i + 1), "G s_(r_i) = C_i");
        let s_rp = oracle.eval(rp).expect("r_i' over alphabet");
        for &x in g {
            assert_eq!(oracle.mul(oracle.mul(x, s_r), s_rp), x);
        }
    }

    let mut b_letters = Vec::new();
    let mut b_by_pair = BTreeMap::new();
    let mut pair_by_b = BTreeMap::new();
    for i in 1..=n {
        for &a in p.alphabet() {
            if cosets.act(i, a) == 0 {
                continue;
            }
            let name = format!("[{},{}]", i, interner.name(a));
            let b = interner.intern(&name, Tag::Plain);
            b_letters.push(((i, a), b));
            b_by_pair.insert((i, a), b);
            pair_by_b.insert(b, (i, a));
        }
    }

    Ok(CosetContext {
        presentation: p.clone(),
        oracle: oracle.clone(),
        subgroup: g.clone(),
        cosets,
        r_words,
        r_prime_words,
        e_word,
        b_letters,
        b_by_pair,
        pair_by_b,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiUndefined {
    /// The shortest prefix whose coset action is already the zero state.
    pub failing_prefix: Word,
}

impl fmt::Display for PhiUndefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coset action hits zero along the word")
    }
}

impl core::error::Error for PhiUndefined {}

impl CosetContext {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn oracle(&self) -> &FiniteSemigroup {
        &self.oracle
    }

    pub fn subgroup(&self) -> &BTreeSet<usize> {
        &self.subgroup
    }

    pub fn cosets(&self) -> &CosetFamily {
        &self.cosets
    }

    pub fn index(&self) -> usize {
        self.cosets.len()
    }

    pub fn e_word(&self) -> &Word {
        &self.e_word
    }

    pub fn r_word(&self, i: usize) -> &Word {
        &self.r_words[i - 1]
    }

    pub fn r_prime_word(&self, i: usize) -> &Word {
        &self.r_prime_words[i - 1]
    }

    pub fn b_alphabet(&self) -> Vec<Letter> {
        self.b_letters.iter().map(|&(_, b)| b).collect()
    }

    pub fn b_letter(&self, i: usize, a: Letter) -> Option<Letter> {
        self.b_by_pair.get(&(i, a)).copied()
    }

    pub fn b_pair(&self, b: Letter) -> Option<(usize, Letter)> {
        self.pair_by_b.get(&b).copied()
    }

    /// `phi(i, w)`: reads `w` through the coset action starting at `i`,
    /// emitting one `B`-letter per position. Defined iff the action never
    /// hits zero; the empty word maps to the empty word.
    pub fn phi_word(&self, i: usize, w: &Word) -> Result<Word, PhiUndefined> {
        let mut out = Word::empty();
        let mut at = i;
        for (k, &a) in w.letters().iter().enumerate() {
            let next = self.cosets.act(at, a);
            if next == 0 {
                return Err(PhiUndefined {
                    failing_prefix: w.slice(0, k + 1),
                });
            }
            out.push(
                self.b_letter(at, a)
                    .expect("b-letter exists whenever the action is nonzero"),
            );
            at = next;
        }
        Ok(out)
    }

    /// `phi(w) = phi(1, w)`.
    pub fn phi(&self, w: &Word) -> Result<Word, PhiUndefined> {
        self.phi_word(1, w)
    }

    /// The expansion `[i,a] -> e r_i a r'_{ia}` of a single coset letter.
    pub fn psi_letter(&self, b: Letter) -> Word {
        let (i, a) = self.pair_by_b[&b];
        let ia = self.cosets.act(i, a);
        self.e_word
            .concat(self.r_word(i))
            .concat(&Word::single(a))
            .concat(self.r_prime_word(ia))
    }

    /// The homomorphism `psi: B* -> A*`; empty maps to empty.
    pub fn psi_word(&self, w: &Word) -> Word {
        let mut out = Word::empty();
        for &b in w.letters() {
            out = out.concat(&self.psi_letter(b));
        }
        out
    }
}

/// Where a `U`-relation came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UProvenance {
    /// `phi(i, u) = phi(i, v)` for a relation `(u = v)` of `R`.
    Relation { coset: usize, rule: usize },
    /// `[i,a] = phi(e r_i a r'_{ia})` for a coset letter.
    Generator { coset: usize, letter: Letter },
}

/// The presentation `<B|U>` of the subgroup, with provenance maps used to
/// transport paths.
#[derive(Debug, Clone)]
pub struct SubgroupPresentation {
    presentation: Presentation,
    provenance: Vec<Vec<UProvenance>>,
    by_relation: BTreeMap<(usize, usize), usize>,
    by_generator: BTreeMap<Letter, usize>,
}

impl SubgroupPresentation {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    /// All provenances of a `U`-rule (exact duplicates are merged).
    pub fn provenance(&self, rule: usize) -> &[UProvenance] {
        &self.provenance[rule]
    }

    pub fn rule_for_relation(&self, coset: usize, rule: usize) -> Option<usize> {
        self.by_relation.get(&(coset, rule)).copied()
    }

    pub fn rule_for_generator(&self, b: Letter) -> Option<usize> {
        self.by_generator.get(&b).copied()
    }
}

/// Builds `<B|U>`: the relations `phi(i,u) = phi(i,v)` over all cosets and
/// defining relations with nonzero action, then `[i,a] = phi(e r_i a
/// r'_{ia})` per coset letter. Every relation is oracle-checked to hold in
/// `G` (through `psi`).
pub fn subgroup_presentation(ctx: &CosetContext) -> SubgroupPresentation {
    let mut rules: Vec<(Word, Word)> = Vec::new();
    let mut rule_index: BTreeMap<(Word, Word), usize> = BTreeMap::new();
    let mut provenance: Vec<Vec<UProvenance>> = Vec::new();
    let mut by_relation = BTreeMap::new();
    let mut by_generator = BTreeMap::new();

    let mut push = |lhs: Word,
                    rhs: Word,
                    prov: UProvenance,
                    rules: &mut Vec<(Word, Word)>,
                    provenance: &mut Vec<Vec<UProvenance>>|
     -> usize {
        match rule_index.get(&(lhs.clone(), rhs.clone())) {
            Some(&id) => {
                provenance[id].push(prov);
                id
            }
            None => {
                let id = rules.len();
                rule_index.insert((lhs.clone(), rhs.clone()), id);
                rules.push((lhs, rhs));
                provenance.push(vec![prov]);
                id
            }
        }
    };

    for i in 1..=ctx.index() {
        for rule in ctx.presentation.rules() {
            if ctx.cosets.act_word(i, &rule.lhs) == 0 {
                continue;
            }
            let lhs = ctx.phi_word(i, &rule.lhs).expect("nonzero action");
            let rhs = ctx
                .phi_word(i, &rule.rhs)
                .expect("equal elements act equally");
            let id = push(
                lhs,
                rhs,
                UProvenance::Relation {
                    coset: i,
                    rule: rule.id,
                },
                &mut rules,
                &mut provenance,
            );
            by_relation.insert((i, rule.id), id);
        }
    }
    for &((i, a), b) in &ctx.b_letters {
        let expansion = ctx.psi_letter(b);
        let rhs = ctx.phi(&expansion).expect("psi-images act within cosets");
        let id = push(
            Word::single(b),
            rhs,
            UProvenance::Generator { coset: i, letter: a },
            &mut rules,
            &mut provenance,
        );
        by_generator.insert(b, id);
    }

    let presentation =
        Presentation::new(ctx.b_alphabet(), rules).expect("subgroup presentation is well-formed");

    // Oracle check: both sides of every relation represent the same
    // element of G.
    for rule in presentation.rules() {
        let l = ctx
            .oracle
            .eval(&ctx.psi_word(&rule.lhs))
            .expect("psi lands in the ambient alphabet");
        let r = ctx
            .oracle
            .eval(&ctx.psi_word(&rule.rhs))
            .expect("psi lands in the ambient alphabet");
        assert_eq!(l, r, "U-relation fails in the oracle");
        assert!(ctx.subgroup.contains(&l), "U-relation leaves the subgroup");
    }

    SubgroupPresentation {
        presentation,
        provenance,
        by_relation,
        by_generator,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    /// The coset action on the path's initial vertex is zero.
    ZeroAction { failing_prefix: Word },
    /// A needed `U`-rule is missing; indicates a context bug.
    MissingRule { coset: usize, rule: usize },
    Find(FindPathError),
    /// A constructed path failed validation, with its provenance.
    Invalid { what: String },
}

impl fmt::Display for TransportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransportError::ZeroAction { .. } => {
                write!(f, "coset action is zero on the path's vertex")
            }
            TransportError::MissingRule { coset, rule } => {
                write!(f, "no U-rule for relation {rule} at coset {coset}")
            }
            TransportError::Find(e) => write!(f, "{e}"),
            TransportError::Invalid { what } => write!(f, "constructed path invalid: {what}"),
        }
    }
}

impl core::error::Error for TransportError {}

impl From<PhiUndefined> for TransportError {
    fn from(e: PhiUndefined) -> Self {
        TransportError::ZeroAction {
            failing_prefix: e.failing_prefix,
        }
    }
}

impl From<FindPathError> for TransportError {
    fn from(e: FindPathError) -> Self {
        TransportError::Find(e)
    }
}

/// `phi(i, -)` on paths: edge by edge through the coset action, mapping a
/// rule applied at coset `j` to the `U`-rule tagged `(j, rule)`.
pub fn phi_path(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    i: usize,
    path: &Path,
) -> Result<Path, TransportError> {
    if path.is_empty() {
        return Ok(Path::empty(ctx.phi_word(i, path.iota())?));
    }
    let mut edges = Vec::with_capacity(path.len());
    for edge in path.edges() {
        let j = ctx.cosets.act_word(i, &edge.prefix);
        if j == 0 {
            return Err(TransportError::ZeroAction {
                failing_prefix: edge.prefix.clone(),
            });
        }
        let rule = sp
            .rule_for_relation(j, edge.rule_id)
            .ok_or(TransportError::MissingRule {
                coset: j,
                rule: edge.rule_id,
            })?;
        let prefix = ctx.phi_word(i, &edge.prefix)?;
        let after = ctx
            .cosets
            .act_word(j, &ctx.presentation.rule(edge.rule_id).lhs);
        if after == 0 {
            return Err(TransportError::ZeroAction {
                failing_prefix: edge.iota(&ctx.presentation),
            });
        }
        let suffix = ctx.phi_word(after, &edge.suffix)?;
        edges.push(Edge::new(prefix, rule, edge.sign, suffix));
    }
    let out = Path::from_edges(edges, sp.presentation()).map_err(|e| TransportError::Invalid {
        what: e.to_string(),
    })?;
    Ok(out)
}

/// `phi(-) = phi(1, -)` on paths.
pub fn phi_path_base(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    path: &Path,
) -> Result<Path, TransportError> {
    phi_path(ctx, sp, 1, path)
}

/// `psi` on paths: each `U`-edge expands to the fixed ambient path of its
/// rule, acted by the `psi`-images of its context words.
pub fn psi_path(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    finder: &mut PathFinder,
    path: &Path,
) -> Result<Path, TransportError> {
    if path.is_empty() {
        return Ok(Path::empty(ctx.psi_word(path.iota())));
    }
    let mut out: Option<Path> = None;
    for edge in path.edges() {
        let fixed = psi_rule_path(ctx, sp, finder, edge.rule_id)?;
        let oriented = match edge.sign {
            Sign::Plus => fixed,
            Sign::Minus => fixed.inverse(&ctx.presentation),
        };
        let acted = oriented.act(&ctx.psi_word(&edge.prefix), &ctx.psi_word(&edge.suffix));
        out = Some(match out {
            None => acted,
            Some(prev) => prev
                .compose(&acted, &ctx.presentation)
                .map_err(|e| TransportError::Invalid { what: e.to_string() })?,
        });
    }
    Ok(out.expect("non-empty path"))
}

/// The fixed ambient path `psi(E_u)` from `psi(u_{+1})` to `psi(u_{-1})`
/// for a `U`-rule, chosen once per session by the memoized search.
pub fn psi_rule_path(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    finder: &mut PathFinder,
    rule: usize,
) -> Result<Path, TransportError> {
    let r = sp.presentation().rule(rule);
    let from = ctx.psi_word(&r.lhs);
    let to = ctx.psi_word(&r.rhs);
    Ok(finder.find(&ctx.presentation, &from, &to, &SubgraphFilter::all())?)
}

/// The path `Lambda_w` from `w` to `phi(psi(w))`, by induction on `|w|`:
/// a single generator edge for letters, and
/// `(Lambda_b · w')(phi(psi(b)) · Lambda_{w'})` for longer words.
pub fn lambda_path(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    w: &Word,
) -> Result<Path, TransportError> {
    assert!(!w.is_empty(), "Lambda is defined on non-empty words");
    let b = w.first().unwrap();
    let rule = sp
        .rule_for_generator(b)
        .ok_or(TransportError::MissingRule { coset: 0, rule: 0 })?;
    let edge = Edge::new(Word::empty(), rule, Sign::Plus, Word::empty());
    let lambda_b = Path::single(edge, sp.presentation());
    if w.len() == 1 {
        return Ok(lambda_b);
    }
    let rest = w.slice(1, w.len());
    let phi_psi_b = sp.presentation().rule(rule).rhs.clone();
    let lambda_rest = lambda_path(ctx, sp, &rest)?;
    lambda_b
        .act(&Word::empty(), &rest)
        .compose(
            &lambda_rest.act(&phi_psi_b, &Word::empty()),
            sp.presentation(),
        )
        .map_err(|e| TransportError::Invalid { what: e.to_string() })
}

/// The closed path of the `W` family for one `U`-rule:
/// `E_r Lambda_{r_{-1}} phi(psi(E_r))^{-1} Lambda_{r_{+1}}^{-1}`.
fn w_path(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    finder: &mut PathFinder,
    rule: usize,
) -> Result<Path, TransportError> {
    let q = sp.presentation();
    let r = q.rule(rule);
    let e_r = Path::single(Edge::new(Word::empty(), rule, Sign::Plus, Word::empty()), q);
    let lambda_rhs = lambda_path(ctx, sp, &r.rhs)?;
    let psi_e = psi_rule_path(ctx, sp, finder, rule)?;
    let phi_psi_e = phi_path_base(ctx, sp, &psi_e)?;
    let lambda_lhs = lambda_path(ctx, sp, &r.lhs)?;
    e_r.compose(&lambda_rhs, q)
        .and_then(|p| p.compose(&phi_psi_e.inverse(q), q))
        .and_then(|p| p.compose(&lambda_lhs.inverse(q), q))
        .map_err(|e| TransportError::Invalid { what: e.to_string() })
}

/// The homotopy base `K ∪ W` for `<B|U>`: `K` transports each closed path
/// of the ambient base through `phi(j, -)` over all cosets with nonzero
/// action; `W` has one closed path per `U`-rule. All output paths are
/// validated closed paths.
pub fn base_kw(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    finder: &mut PathFinder,
    x: &HomotopyBase,
) -> Result<HomotopyBase, TransportError> {
    let q = sp.presentation();
    let mut closed: Vec<Path> = Vec::new();
    for (idx, pair) in x.pairs().iter().enumerate() {
        if !pair.is_closed_form() {
            return Err(TransportError::Invalid {
                what: format!("ambient base pair {idx} is not in closed-path form"),
            });
        }
        for j in 1..=ctx.index() {
            if ctx.cosets.act_word(j, pair.left.iota()) == 0 {
                continue;
            }
            closed.push(phi_path(ctx, sp, j, &pair.left)?);
        }
    }
    for rule in 0..q.rules().len() {
        closed.push(w_path(ctx, sp, finder, rule)?);
    }
    for (k, path) in closed.iter().enumerate() {
        if !path.is_closed(q) {
            return Err(TransportError::Invalid {
                what: format!("output path {k} is not closed"),
            });
        }
    }
    let base = HomotopyBase::from_closed_paths(closed, q).map_err(|e| TransportError::Invalid {
        what: e.to_string(),
    })?;
    let report = validate_base(&base, q);
    if let Some((k, why)) = report.failures().next() {
        return Err(TransportError::Invalid {
            what: format!("pair {k}: {why}"),
        });
    }
    Ok(base)
}

/// Desk-scale slice of the infinite base `Z`: the `(z1)` paths for all
/// `<B|U>` edges with initial vertex of length at most `bound`, the `(z2)`
/// interchange images, and the `(z3)` transported conjugates of the
/// ambient base. Used to test that `K ∪ W` generates the relation.
pub fn base_z(
    ctx: &CosetContext,
    sp: &SubgroupPresentation,
    finder: &mut PathFinder,
    x: &HomotopyBase,
    bound: usize,
) -> Result<HomotopyBase, TransportError> {
    let q = sp.presentation();
    let p = &ctx.presentation;
    let mut closed: Vec<Path> = Vec::new();

    // (z1): E Lambda_{tau E} phi(psi(E))^{-1} Lambda_{iota E}^{-1}.
    for w in words_up_to(q.alphabet(), bound) {
        for edge in edges_from(&w, q, &SubgraphFilter::all()) {
            let e_path = Path::single(edge.clone(), q);
            let target = edge.tau(q);
            let lambda_tau = lambda_path(ctx, sp, &target)?;
            let psi_e = psi_path(ctx, sp, finder, &e_path)?;
            let phi_psi_e = phi_path_base(ctx, sp, &psi_e)?;
            let lambda_iota = lambda_path(ctx, sp, &w)?;
            let z = e_path
                .compose(&lambda_tau, q)
                .and_then(|z| z.compose(&phi_psi_e.inverse(q), q))
                .and_then(|z| z.compose(&lambda_iota.inverse(q), q))
                .map_err(|e| TransportError::Invalid { what: e.to_string() })?;
            closed.push(z);
        }
    }

    // (z2): phi of interchange squares with product vertex in G.
    let g_words: Vec<Word> = words_up_to(p.alphabet(), bound);
    for u1 in &g_words {
        for u2 in &g_words {
            let product = u1.concat(u2);
            let elt = ctx.oracle.eval(&product).expect("A-words evaluate");
            if !ctx.subgroup.contains(&elt) {
                continue;
            }
            for e1 in edges_from(u1, p, &SubgraphFilter::all()) {
                for e2 in edges_from(u2, p, &SubgraphFilter::all()) {
                    let square = h1_square(p, &e1, &e2);
                    closed.push(phi_path_base(ctx, sp, &square)?);
                }
            }
        }
    }

    // (z3): phi(w1 · P · w2) for basepoint conjugates landing in G.
    let mut contexts: Vec<Word> = vec![Word::empty()];
    contexts.extend(words_up_to(p.alphabet(), bound));
    for pair in x.pairs() {
        for w1 in &contexts {
            for w2 in &contexts {
                let vertex = w1.concat(pair.left.iota()).concat(w2);
                let elt = ctx.oracle.eval(&vertex).expect("A-words evaluate");
                if !ctx.subgroup.contains(&elt) {
                    continue;
                }
                let acted = pair.left.act(w1, w2);
                closed.push(phi_path_base(ctx, sp, &acted)?);
            }
        }
    }

    for (k, path) in closed.iter().enumerate() {
        if !path.is_closed(q) {
            return Err(TransportError::Invalid {
                what: format!("z path {k} is not closed"),
            });
        }
    }
    HomotopyBase::from_closed_paths(closed, q).map_err(|e| TransportError::Invalid {
        what: e.to_string(),
    })
}

/// All non-empty words over `alphabet` of length at most `bound`, in
/// length-then-lex order.
pub fn words_up_to(alphabet: &[Letter], bound: usize) -> Vec<Word> {
    let mut out: Vec<Word> = Vec::new();
    let mut layer: Vec<Word> = vec![Word::empty()];
    for _ in 0..bound {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for &l in alphabet {
                let mut w2 = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Wraps a closed path as a base pair.
pub fn closed_pair(path: Path, p: &Presentation) -> ParallelPair {
    let at = Path::empty(path.iota().clone());
    ParallelPair::new(path, at, p).expect("closed path yields a parallel pair")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate, DEFAULT_NODE_BUDGET};
    use crate::words::parse_presentation;

    fn setup() -> (Interner, Presentation, FiniteSemigroup, CosetContext) {
        let mut it = Interner::new();
        let p = parse_presentation("alphabet: a\nrule: a a a a a = a\n", &mut it).unwrap();
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let a = p.alphabet()[0];
        let a2 = s.eval(&Word::from_letters(vec![a; 2])).unwrap();
        let a4 = s.eval(&Word::from_letters(vec![a; 4])).unwrap();
        let g: BTreeSet<usize> = BTreeSet::from([a2, a4]);
        let ctx = build_context(&p, &s, &g, &mut it).unwrap();
        (it, p, s, ctx)
    }

    fn pow(l: Letter, n: usize) -> Word {
        Word::from_letters(vec![l; n])
    }

    #[test]
    fn context_choices_fix2() {
        let (_, p, _, ctx) = setup();
        let a = p.alphabet()[0];
        assert_eq!(ctx.index(), 2);
        assert_eq!(*ctx.r_word(1), Word::empty());
        assert_eq!(*ctx.r_word(2), Word::single(a));
        assert_eq!(*ctx.r_prime_word(1), Word::empty());
        assert_eq!(*ctx.r_prime_word(2), pow(a, 3));
        assert_eq!(*ctx.e_word(), pow(a, 4));
        assert_eq!(ctx.b_alphabet().len(), 2);
    }

    #[test]
    fn phi_word_fix2() {
        let (_, p, _, ctx) = setup();
        let a = p.alphabet()[0];
        let x = ctx.b_letter(1, a).unwrap();
        let y = ctx.b_letter(2, a).unwrap();
        assert_eq!(ctx.phi(&pow(a, 2)).unwrap(), Word::from_letters(vec![x, y]));
        assert_eq!(
            ctx.phi(&pow(a, 5)).unwrap(),
            Word::from_letters(vec![x, y, x, y, x])
        );
        assert_eq!(ctx.phi(&Word::empty()).unwrap(), Word::empty());
    }

    #[test]
    fn psi_word_fix2() {
        let (_, p, _, ctx) = setup();
        let a = p.alphabet()[0];
        let x = ctx.b_letter(1, a).unwrap();
        let y = ctx.b_letter(2, a).unwrap();
        assert_eq!(ctx.psi_word(&Word::single(x)), pow(a, 8));
        assert_eq!(ctx.psi_word(&Word::single(y)), pow(a, 6));
        let w = Word::from_letters(vec![x, y]);
        assert_eq!(
            ctx.psi_word(&w),
            ctx.psi_word(&Word::single(x))
                .concat(&ctx.psi_word(&Word::single(y)))
        );
    }

    #[test]
    fn subgroup_presentation_fix2() {
        let (_, p, _, ctx) = setup();
        let sp = subgroup_presentation(&ctx);
        let q = sp.presentation();
        assert_eq!(q.alphabet().len(), 2);
        assert_eq!(q.rules().len(), 4);
        let a = p.alphabet()[0];
        let x = ctx.b_letter(1, a).unwrap();
        let y = ctx.b_letter(2, a).unwrap();
        // x y x y x = x and y x y x y = y
        assert_eq!(q.rule(0).lhs, Word::from_letters(vec![x, y, x, y, x]));
        assert_eq!(q.rule(0).rhs, Word::single(x));
        assert_eq!(q.rule(1).lhs, Word::from_letters(vec![y, x, y, x, y]));
        // x = (xy)^4, y = (xy)^3
        assert_eq!(q.rule(2).lhs, Word::single(x));
        assert_eq!(q.rule(2).rhs.len(), 8);
        assert_eq!(q.rule(3).lhs, Word::single(y));
        assert_eq!(q.rule(3).rhs.len(), 6);
        // enumeration of <B|U> gives the 2-element group
        let g_oracle = enumerate(q, 10, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(g_oracle.size(), 2);
    }

    #[test]
    fn phi_path_fix2_rule_edge() {
        let (_, p, _, ctx) = setup();
        let sp = subgroup_presentation(&ctx);
        let edge = Edge::new(Word::empty(), 0, Sign::Plus, Word::empty());
        let path = Path::single(edge, &p);
        let image = phi_path_base(&ctx, &sp, &path).unwrap();
        assert_eq!(image.len(), 1);
        assert_eq!(image.edges()[0].rule_id, 0);
        assert!(image.edges()[0].prefix.is_empty());
        assert!(image.edges()[0].suffix.is_empty());
        assert_eq!(*image.iota(), ctx.phi(path.iota()).unwrap());
        assert_eq!(
            image.tau(sp.presentation()),
            ctx.phi(&path.tau(&p)).unwrap()
        );
    }

    #[test]
    fn lambda_endpoints_fix2() {
        let (_, p, _, ctx) = setup();
        let sp = subgroup_presentation(&ctx);
        let a = p.alphabet()[0];
        let y = ctx.b_letter(2, a).unwrap();
        let lam = lambda_path(&ctx, &sp, &Word::single(y)).unwrap();
        assert_eq!(lam.len(), 1);
        assert_eq!(*lam.iota(), Word::single(y));
        let tau = lam.tau(sp.presentation());
        assert_eq!(tau, ctx.phi(&ctx.psi_word(&Word::single(y))).unwrap());
        assert_eq!(tau.len(), 6);
    }

    #[test]
    fn base_kw_fix2_closed_and_counted() {
        let (_, p, _, ctx) = setup();
        let sp = subgroup_presentation(&ctx);
        let cert = crate::oracle::certify_complete(&p).unwrap();
        let x = crate::homotopy::critical_pair_base(&p, &cert).unwrap();
        let mut finder = PathFinder::new(DEFAULT_NODE_BUDGET);
        let kw = base_kw(&ctx, &sp, &mut finder, &x).unwrap();
        // K: 4 ambient loops, both cosets act nonzero -> 8; W: one per U-rule.
        assert_eq!(kw.len(), 8 + 4);
        assert!(validate_base(&kw, sp.presentation()).all_pass());
    }

    #[test]
    fn base_kw_empty_x_keeps_w() {
        let (_, _, _, ctx) = setup();
        let sp = subgroup_presentation(&ctx);
        let mut finder = PathFinder::new(DEFAULT_NODE_BUDGET);
        let kw = base_kw(&ctx, &sp, &mut finder, &HomotopyBase::empty()).unwrap();
        assert_eq!(kw.len(), 4);
    }

    #[test]
    fn z1_at_rule_edges_coincides_with_w() {
        let (_, p, _, ctx) = setup();
        let sp = subgroup_presentation(&ctx);
        let q = sp.presentation();
        let cert = crate::oracle::certify_complete(&p).unwrap();
        let x = crate::homotopy::critical_pair_base(&p, &cert).unwrap();
        let mut finder = PathFinder::new(DEFAULT_NODE_BUDGET);
        let kw = base_kw(&ctx, &sp, &mut finder, &x).unwrap();
        let z = base_z(&ctx, &sp, &mut finder, &x, 4).unwrap();
        // The (z1) instance at a bare rule edge E_u is literally the W
        // element of u; rules 2 and 3 have single-letter left sides, so
        // their edges fall within the bound.
        let w_offset = kw.len() - q.rules().len();
        let mut matched = 0usize;
        for rule in 0..q.rules().len() {
            if q.rule(rule).lhs.len() > 4 {
                continue;
            }
            let w_path = &kw.pairs()[w_offset + rule].left;
            assert!(
                z.pairs().iter().any(|pair| &pair.left == w_path),
                "W element of rule {rule} appears among the z1 paths"
            );
            matched += 1;
        }
        assert!(matched >= 2);
    }

    #[test]
    fn z2_disjoint_square_certifies() {
        let (_, p, _, ctx) = setup();
        let sp = subgroup_presentation(&ctx);
        let q = sp.presentation();
        let a = p.alphabet()[0];
        // Two disjoint -1 rewrites inside a^2 · a^2 (the product is in G).
        let e1 = Edge::new(Word::empty(), 0, crate::words::Sign::Minus, Word::single(a));
        let e2 = Edge::new(Word::single(a), 0, crate::words::Sign::Minus, Word::empty());
        let square = h1_square(&p, &e1, &e2);
        let image = phi_path_base(&ctx, &sp, &square).unwrap();
        assert!(image.is_closed(q));
        match crate::homotopy::homotopic_bounded(
            q,
            &image,
            &crate::graph::Path::empty(image.iota().clone()),
            &HomotopyBase::empty(),
            10_000,
        )
        .unwrap()
        {
            crate::homotopy::Homotopy::Equivalent(moves) => {
                assert!(moves.len() <= 3, "interchange plus cancellations");
            }
            crate::homotopy::Homotopy::Inconclusive => {
                panic!("disjoint interchange square must certify")
            }
        }
    }

    #[test]
    fn index_one_whole_group() {
        let mut it = Interner::new();
        let p = parse_presentation("alphabet: a\nrule: a a a a a = a\n", &mut it).unwrap();
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let g: BTreeSet<usize> = (0..4).collect();
        let ctx = build_context(&p, &s, &g, &mut it).unwrap();
        assert_eq!(ctx.index(), 1);
        assert_eq!(*ctx.r_word(1), Word::empty());
        let sp = subgroup_presentation(&ctx);
        // |R| + |A| relations
        assert_eq!(sp.presentation().rules().len(), 2);
    }
}
