//! Presentation and homotopy base for an ideal extension of a semigroup
//! `T` by a completely 0-simple semigroup `M0[G; I, L; P]`, and the driver
//! iterating the construction over the J-classes of a finite regular
//! semigroup.
//!
//! The extension presentation has generators `A ∪ B ∪ C ∪ Z` (group,
//! row-coset, column-coset and ideal letters, carried as letter tags) and
//! relations grouped into the families `R, Q, R_e, R_0, R_U, R_T`; the
//! grouping drives the subgraph filters `Gamma`, `Gamma_0`, `Gamma_T`,
//! `Gamma_G`. Words rewrite into quasi-normal form `B^1 A^* C^1 ∪ Z^+`
//! along positive `Gamma`-edges, with termination measured by the
//! lexicographic pair `F(w) = (|w|_{B∪C}, |w|_A)`.
//!
//! The homotopy base is assembled from the families `X1, X1', X2, X3, Xe`
//! plus embedded bases for `G` and `T`; `push_through` realises the
//! letter-peeling step that moves words across `Gamma_T` paths, with a
//! replayable move certificate.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;
use core::ops::Add;

use crate::graph::{edges_from, Edge, FindPathError, Path, PathFinder, SubgraphFilter};
use crate::homotopy::{critical_pair_base, validate_base, HomotopyBase, Move, ParallelPair};
use crate::oracle::{
    green, table_presentation_tagged, FiniteSemigroup,
    GreenStructure,
};
use crate::subgroup::words_up_to;
use crate::words::{Interner, Letter, Presentation, Sign, Tag, Word};

/// An element of a (0-)Rees matrix semigroup: `0` or a triple
/// `(i, g, lambda)` with 1-based row/column indices and a group element
/// index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReesElt {
    Zero,
    Triple(usize, usize, usize),
}

/// Rees matrix data over a finite group: a regular `L x I` sandwich matrix
/// with entries that are group words or zero.
#[derive(Debug, Clone)]
pub struct ReesMatrix {
    group: FiniteSemigroup,
    g_pres: Presentation,
    i_size: usize,
    l_size: usize,
    /// Row-major `(lambda, i)`, entries as group-element indices.
    entries: Vec<Option<usize>>,
    with_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReesError {
    BadShape,
    EntryEval { row: usize, col: usize },
    NotRegular { kind: &'static str, index: usize },
    ZeroInSimple { row: usize, col: usize },
    CornerZero,
    NotAGroup,
}

impl fmt::Display for ReesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReesError::BadShape => write!(f, "matrix shape does not match I and L"),
            ReesError::EntryEval { row, col } => {
                write!(f, "entry ({row},{col}) does not evaluate in the group")
            }
            ReesError::NotRegular { kind, index } => {
                write!(f, "{kind} {index} of the sandwich matrix is all zero")
            }
            ReesError::ZeroInSimple { row, col } => {
                write!(f, "zero entry ({row},{col}) in a completely simple matrix")
            }
            ReesError::CornerZero => write!(f, "entry (1,1) must be nonzero"),
            ReesError::NotAGroup => write!(f, "the structure semigroup is not a group"),
        }
    }
}

impl core::error::Error for ReesError {}

impl ReesMatrix {
    /// Validates and builds: `P` regular, `p_{11} != 0`, all entries
    /// evaluating in the group; completely simple matrices admit no zeros.
    pub fn new(
        group: FiniteSemigroup,
        g_pres: Presentation,
        i_size: usize,
        l_size: usize,
        entry_words: Vec<Option<Word>>,
        with_zero: bool,
    ) -> Result<Self, ReesError> {
        if i_size == 0 || l_size == 0 || entry_words.len() != i_size * l_size {
            return Err(ReesError::BadShape);
        }
        let g = green(&group);
        if g.h.classes().len() != 1 || g.idempotents.len() != 1 {
            return Err(ReesError::NotAGroup);
        }
        let mut entries = Vec::with_capacity(entry_words.len());
        for (k, w) in entry_words.iter().enumerate() {
            let (row, col) = (k / i_size + 1, k % i_size + 1);
            match w {
                None => {
                    if !with_zero {
                        return Err(ReesError::ZeroInSimple { row, col });
                    }
                    entries.push(None);
                }
                Some(w) => {
                    let e = group
                        .eval(w)
                        .map_err(|_| ReesError::EntryEval { row, col })?;
                    entries.push(Some(e));
                }
            }
        }
        for row in 1..=l_size {
            if (1..=i_size).all(|col| entries[(row - 1) * i_size + (col - 1)].is_none()) {
                return Err(ReesError::NotRegular {
                    kind: "row",
                    index: row,
                });
            }
        }
        for col in 1..=i_size {
            if (1..=l_size).all(|row| entries[(row - 1) * i_size + (col - 1)].is_none()) {
                return Err(ReesError::NotRegular {
                    kind: "column",
                    index: col,
                });
            }
        }
        if entries[0].is_none() {
            return Err(ReesError::CornerZero);
        }
        Ok(ReesMatrix {
            group,
            g_pres,
            i_size,
            l_size,
            entries,
            with_zero,
        })
    }

    pub fn group(&self) -> &FiniteSemigroup {
        &self.group
    }

    pub fn group_presentation(&self) -> &Presentation {
        &self.g_pres
    }

    pub fn i_size(&self) -> usize {
        self.i_size
    }

    pub fn l_size(&self) -> usize {
        self.l_size
    }

    pub fn with_zero(&self) -> bool {
        self.with_zero
    }

    /// Sandwich entry `p_{lambda i}` as a group element (1-based indices).
    pub fn entry(&self, lambda: usize, i: usize) -> Option<usize> {
        self.entries[(lambda - 1) * self.i_size + (i - 1)]
    }

    /// Rees multiplication: `(i,g,l)(j,h,m) = (i, g p_{lj} h, m)` when the
    /// sandwich entry is nonzero, else zero; zero is absorbing.
    pub fn mult(&self, x: ReesElt, y: ReesElt) -> ReesElt {
        match (x, y) {
            (ReesElt::Zero, _) | (_, ReesElt::Zero) => ReesElt::Zero,
            (ReesElt::Triple(i, g, l), ReesElt::Triple(j, h, m)) => match self.entry(l, j) {
                None => ReesElt::Zero,
                Some(p) => ReesElt::Triple(i, self.group.mul(self.group.mul(g, p), h), m),
            },
        }
    }

    /// All elements: the zero (when present) then the triples in
    /// lexicographic order.
    pub fn elements(&self) -> Vec<ReesElt> {
        let mut out = Vec::new();
        if self.with_zero {
            out.push(ReesElt::Zero);
        }
        for i in 1..=self.i_size {
            for g in 0..self.group.size() {
                for l in 1..=self.l_size {
                    out.push(ReesElt::Triple(i, g, l));
                }
            }
        }
        out
    }
}

/// A relation family of the extension presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    /// Group relations.
    R,
    /// Ideal relations.
    Q,
    /// `b_i e = b_i`, `e c_l = c_l`.
    Re,
    /// `z x = sigma(z,x)`, `x z = tau(x,z)`.
    R0,
    /// Nonzero-sandwich relations, by shape: 1 `e b_i / a b_i`,
    /// 2 `c_l e / c_l a`, 3 `c_l b_i`, 4 `c_l c_m`, 5 `b_i b_j`.
    RU(u8),
    /// The zero-sandwich twins of the `RU` shapes, rewriting into `Z^+`.
    RT(u8),
}

/// The extension presentation with its family tags and the embeddings of
/// the group and ideal presentations.
#[derive(Debug, Clone)]
pub struct GroupedPresentation {
    presentation: Presentation,
    families: Vec<Family>,
    g_rule_map: Vec<usize>,
    t_rule_map: Vec<usize>,
}

impl GroupedPresentation {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn family(&self, rule: usize) -> Family {
        self.families[rule]
    }

    pub fn rules_in(&self, pred: impl Fn(Family) -> bool) -> Vec<usize> {
        self.families
            .iter()
            .enumerate()
            .filter(|&(_, &f)| pred(f))
            .map(|(id, _)| id)
            .collect()
    }

    /// `Gamma`: edges over `R_0 ∪ R_U ∪ R_T`.
    pub fn gamma(&self) -> SubgraphFilter {
        SubgraphFilter::from_rules(self.rules_in(|f| {
            matches!(f, Family::R0 | Family::RU(_) | Family::RT(_))
        }))
    }

    /// `Gamma_0`: edges over `R_0`.
    pub fn gamma0(&self) -> SubgraphFilter {
        SubgraphFilter::from_rules(self.rules_in(|f| matches!(f, Family::R0)))
    }

    /// `Gamma_T`: edges over `Q`.
    pub fn gamma_t(&self) -> SubgraphFilter {
        SubgraphFilter::from_rules(self.rules_in(|f| matches!(f, Family::Q)))
    }

    /// `Gamma_G`: edges over `R`.
    pub fn gamma_g(&self) -> SubgraphFilter {
        SubgraphFilter::from_rules(self.rules_in(|f| matches!(f, Family::R)))
    }

    /// Edges over `R ∪ R_e`, whose paths starting in `B^1 A^* C^1` stay
    /// there (the closure written `b·P(Gamma_G)·c` with the `e`-collapses).
    pub fn overline(&self) -> SubgraphFilter {
        SubgraphFilter::from_rules(self.rules_in(|f| matches!(f, Family::R | Family::Re)))
    }

    pub fn g_rule(&self, id: usize) -> usize {
        self.g_rule_map[id]
    }

    pub fn t_rule(&self, id: usize) -> usize {
        self.t_rule_map[id]
    }
}

/// Classification of a word of the extension presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classified {
    /// An element of the ideal `T`, by index in the ideal's oracle.
    T(usize),
    /// The triple `(i, g, lambda)`.
    Triple(usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    Rees(ReesError),
    NotAnIdeal { t_elt: usize, s_elt: usize },
    BadEmbedding { what: String },
    RelationFails { family: &'static str, detail: String },
    Find(FindPathError),
    X3Budget { needed: usize, budget: usize },
    Invalid { what: String },
    NotRegular { witness: usize },
    Enumerate(String),
}

impl fmt::Display for ExtensionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionError::Rees(e) => write!(f, "{e}"),
            ExtensionError::NotAnIdeal { t_elt, s_elt } => {
                write!(f, "T is not an ideal: element {t_elt} times {s_elt} escapes")
            }
            ExtensionError::BadEmbedding { what } => write!(f, "bad extension data: {what}"),
            ExtensionError::RelationFails { family, detail } => {
                write!(f, "relation of family {family} fails in the oracle: {detail}")
            }
            ExtensionError::Find(e) => write!(f, "{e}"),
            ExtensionError::X3Budget { needed, budget } => {
                write!(f, "X3 enumeration needs {needed} words, budget is {budget}")
            }
            ExtensionError::Invalid { what } => write!(f, "constructed object invalid: {what}"),
            ExtensionError::NotRegular { witness } => {
                write!(f, "semigroup is not regular at element {witness}")
            }
            ExtensionError::Enumerate(what) => write!(f, "re-enumeration failed: {what}"),
        }
    }
}

impl core::error::Error for ExtensionError {}

impl From<ReesError> for ExtensionError {
    fn from(e: ReesError) -> Self {
        ExtensionError::Rees(e)
    }
}

impl From<FindPathError> for ExtensionError {
    fn from(e: FindPathError) -> Self {
        ExtensionError::Find(e)
    }
}

/// Everything the section-four construction needs, phrased over a single
/// ambient multiplication table for `S = T ∪ (I x G x L)`.
pub struct ExtensionInput<'a> {
    /// Presentation of the group `G` (any letter tags).
    pub g_pres: &'a Presentation,
    /// Each group-presentation letter as an element of `S`.
    pub g_letter_elts: &'a BTreeMap<Letter, usize>,
    /// The elements of `G` inside `S`, in group-index order.
    pub g_elems: &'a [usize],
    /// Presentation of the ideal `T`.
    pub t_pres: &'a Presentation,
    /// Each ideal-presentation letter as an element of `S`.
    pub t_letter_elts: &'a BTreeMap<Letter, usize>,
    /// The elements of `T` inside `S`.
    pub t_elems: &'a [usize],
    /// The ambient multiplication table.
    pub s: &'a FiniteSemigroup,
    pub i_size: usize,
    pub l_size: usize,
    /// Sandwich entries as group indices, row-major `(lambda, i)`.
    pub p_entries: &'a [Option<usize>],
    /// The triple coordinates of every element of `S \ T`.
    pub triple_elt: &'a BTreeMap<(usize, usize, usize), usize>,
}

/// The fixed data of the extension construction, all phrased over the
/// fresh generator alphabet `A ∪ B ∪ C ∪ Z` of the output presentation.
pub struct ExtensionContext {
    s: FiniteSemigroup,
    a_letters: Vec<Letter>,
    b_letters: Vec<(usize, Letter)>,
    c_letters: Vec<(usize, Letter)>,
    z_letters: Vec<Letter>,
    g_letter_map: BTreeMap<Letter, Letter>,
    t_letter_map: BTreeMap<Letter, Letter>,
    g_pres: Presentation,
    t_pres: Presentation,
    /// Output letter to ambient element.
    letter_elt: BTreeMap<Letter, usize>,
    /// Ambient element classification.
    s_class: Vec<Classified>,
    t_elems: Vec<usize>,
    g_elems: Vec<usize>,
    g_identity: usize,
    i_size: usize,
    l_size: usize,
    p_entries: Vec<Option<usize>>,
    /// Fixed `A^+` word for the identity of `G`.
    e_word: Word,
    /// Fixed `A^+` word per group element.
    g_words: Vec<Word>,
    /// Fixed `Z^+` word per ideal element.
    t_words: Vec<Word>,
    /// `sigma(z, x)` and `tau(x, z)` as fixed `Z^+` words.
    sigma: BTreeMap<(Letter, Letter), Word>,
    tau: BTreeMap<(Letter, Letter), Word>,
}

/// Shortest word over `letters` (mapped into elements by `elt_of`)
/// reaching each target element, breadth-first with alphabet-order
/// tie-break.
fn canonical_words(
    s: &FiniteSemigroup,
    letters: &[Letter],
    elt_of: &BTreeMap<Letter, usize>,
    targets: &[usize],
) -> Result<Vec<Word>, ExtensionError> {
    let target_pos: BTreeMap<usize, usize> =
        targets.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let mut found: Vec<Option<Word>> = vec![None; targets.len()];
    let mut remaining = targets.len();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut queue: alloc::collections::VecDeque<(usize, Word)> = Default::default();
    for &l in letters {
        let e = elt_of[&l];
        if seen.insert(e) {
            let w = Word::single(l);
            if let Some(&k) = target_pos.get(&e) {
                if found[k].is_none() {
                    found[k] = Some(w.clone());
                    remaining -= 1;
                }
            }
            queue.push_back((e, w));
        }
    }
    while remaining > 0 {
        let Some((cur, word)) = queue.pop_front() else {
            return Err(ExtensionError::BadEmbedding {
                what: "letters do not generate all required elements".to_string(),
            });
        };
        for &l in letters {
            let next = s.mul(cur, elt_of[&l]);
            if seen.insert(next) {
                let mut w2 = word.clone();
                w2.push(l);
                if let Some(&k) = target_pos.get(&next) {
                    if found[k].is_none() {
                        found[k] = Some(w2.clone());
                        remaining -= 1;
                    }
                }
                queue.push_back((next, w2));
            }
        }
    }
    Ok(found.into_iter().map(Option::unwrap).collect())
}

impl ExtensionContext {
    /// Validates the extension data and fixes every choice: the fresh
    /// `A ∪ B ∪ C ∪ Z` alphabet, the words `e` and `p_{lambda i}`, the
    /// ideal words for `rho`, and the collapse words `sigma`/`tau`.
    pub fn new(input: &ExtensionInput<'_>, interner: &mut Interner) -> Result<Self, ExtensionError> {
        let s = input.s;
        let n = s.size();

        // T is an ideal.
        let t_set: BTreeSet<usize> = input.t_elems.iter().copied().collect();
        for &t in input.t_elems {
            for x in 0..n {
                for prod in [s.mul(t, x), s.mul(x, t)] {
                    if !t_set.contains(&prod) {
                        return Err(ExtensionError::NotAnIdeal { t_elt: t, s_elt: x });
                    }
                }
            }
        }

        // The triple coordinates cover S \ T bijectively and respect the
        // Rees multiplication against the ambient table.
        let mut s_class: Vec<Option<Classified>> = vec![None; n];
        for (k, &t) in input.t_elems.iter().enumerate() {
            s_class[t] = Some(Classified::T(k));
        }
        for (&(i, g, l), &elt) in input.triple_elt {
            if s_class[elt].is_some() {
                return Err(ExtensionError::BadEmbedding {
                    what: format!("element {elt} has two classifications"),
                });
            }
            if i == 0 || i > input.i_size || l == 0 || l > input.l_size || g >= input.g_elems.len()
            {
                return Err(ExtensionError::BadEmbedding {
                    what: "triple coordinates out of range".to_string(),
                });
            }
            s_class[elt] = Some(Classified::Triple(i, g, l));
        }
        let s_class: Vec<Classified> = s_class
            .into_iter()
            .enumerate()
            .map(|(elt, c)| {
                c.ok_or(ExtensionError::BadEmbedding {
                    what: format!("element {elt} is neither in T nor coordinatised"),
                })
            })
            .collect::<Result<_, _>>()?;
        let entry = |l: usize, i: usize| -> Option<usize> {
            input.p_entries[(l - 1) * input.i_size + (i - 1)]
        };
        if input.p_entries.len() != input.i_size * input.l_size {
            return Err(ExtensionError::Rees(ReesError::BadShape));
        }
        if entry(1, 1).is_none() {
            return Err(ExtensionError::Rees(ReesError::CornerZero));
        }
        let g_index: BTreeMap<usize, usize> = input
            .g_elems
            .iter()
            .enumerate()
            .map(|(k, &e)| (e, k))
            .collect();
        for (&(i, g, l), &x) in input.triple_elt {
            for (&(j, h, m), &y) in input.triple_elt {
                let prod = s.mul(x, y);
                let expected = match entry(l, j) {
                    None => None,
                    Some(p) => {
                        let gp = s.mul(input.g_elems[g], input.g_elems[p]);
                        let gph = s.mul(gp, input.g_elems[h]);
                        Some((i, g_index[&gph], m))
                    }
                };
                match (expected, s_class[prod]) {
                    (None, Classified::T(_)) => {}
                    (Some(c), Classified::Triple(a, b, d)) if (a, b, d) == c => {}
                    _ => {
                        return Err(ExtensionError::BadEmbedding {
                            what: format!("Rees multiplication law fails at {x} * {y}"),
                        })
                    }
                }
            }
        }

        // Group letters generate G and the group relations hold; find the
        // identity of G.
        let eval_via = |letters: &BTreeMap<Letter, usize>, w: &Word| -> Option<usize> {
            let mut it = w.letters().iter();
            let mut acc = *letters.get(it.next()?)?;
            for l in it {
                acc = s.mul(acc, *letters.get(l)?);
            }
            Some(acc)
        };
        for rule in input.g_pres.rules() {
            let l = eval_via(input.g_letter_elts, &rule.lhs);
            let r = eval_via(input.g_letter_elts, &rule.rhs);
            if l.is_none() || l != r {
                return Err(ExtensionError::RelationFails {
                    family: "R",
                    detail: format!("group rule {}", rule.id),
                });
            }
        }
        for rule in input.t_pres.rules() {
            let l = eval_via(input.t_letter_elts, &rule.lhs);
            let r = eval_via(input.t_letter_elts, &rule.rhs);
            if l.is_none() || l != r {
                return Err(ExtensionError::RelationFails {
                    family: "Q",
                    detail: format!("ideal rule {}", rule.id),
                });
            }
        }
        let g_set: BTreeSet<usize> = input.g_elems.iter().copied().collect();
        let g_identity = *input
            .g_elems
            .iter()
            .find(|&&e| g_set.iter().all(|&x| s.mul(e, x) == x && s.mul(x, e) == x))
            .ok_or(ExtensionError::BadEmbedding {
                what: "G has no identity".to_string(),
            })?;

        // Fresh output alphabet, uniquified in A, B, C, Z order.
        let mut taken: BTreeSet<String> = BTreeSet::new();
        let mut a_letters = Vec::new();
        let mut g_letter_map = BTreeMap::new();
        for &l in input.g_pres.alphabet() {
            let (fresh, used) = interner.intern_fresh(interner.name(l).to_string().as_str(), Tag::A, &taken);
            taken.insert(used);
            a_letters.push(fresh);
            g_letter_map.insert(l, fresh);
        }
        let mut b_letters = Vec::new();
        for i in 2..=input.i_size {
            let (fresh, used) = interner.intern_fresh(&format!("b{i}"), Tag::B, &taken);
            taken.insert(used);
            b_letters.push((i, fresh));
        }
        let mut c_letters = Vec::new();
        for l in 2..=input.l_size {
            let (fresh, used) = interner.intern_fresh(&format!("c{l}"), Tag::C, &taken);
            taken.insert(used);
            c_letters.push((l, fresh));
        }
        let mut z_letters = Vec::new();
        let mut t_letter_map = BTreeMap::new();
        for &l in input.t_pres.alphabet() {
            let (fresh, used) = interner.intern_fresh(interner.name(l).to_string().as_str(), Tag::Z, &taken);
            taken.insert(used);
            z_letters.push(fresh);
            t_letter_map.insert(l, fresh);
        }

        // Remap the group and ideal presentations onto the fresh letters.
        let remap = |p: &Presentation, map: &BTreeMap<Letter, Letter>| -> Presentation {
            let alphabet = p.alphabet().iter().map(|l| map[l]).collect();
            let rules = p
                .rules()
                .iter()
                .map(|r| (remap_word(&r.lhs, map), remap_word(&r.rhs, map)))
                .collect();
            Presentation::new(alphabet, rules).expect("remapped presentation is well-formed")
        };
        let g_pres = remap(input.g_pres, &g_letter_map);
        let t_pres = remap(input.t_pres, &t_letter_map);

        // Output letters to ambient elements.
        let mut letter_elt: BTreeMap<Letter, usize> = BTreeMap::new();
        for (&old, &fresh) in &g_letter_map {
            letter_elt.insert(fresh, input.g_letter_elts[&old]);
        }
        let id_idx = g_index[&g_identity];
        for &(i, b) in &b_letters {
            let elt = *input.triple_elt.get(&(i, id_idx, 1)).ok_or(
                ExtensionError::BadEmbedding {
                    what: format!("no element for b{i}"),
                },
            )?;
            letter_elt.insert(b, elt);
        }
        for &(l, c) in &c_letters {
            let elt = *input.triple_elt.get(&(1, id_idx, l)).ok_or(
                ExtensionError::BadEmbedding {
                    what: format!("no element for c{l}"),
                },
            )?;
            letter_elt.insert(c, elt);
        }
        for (&old, &fresh) in &t_letter_map {
            letter_elt.insert(fresh, input.t_letter_elts[&old]);
        }

        // Fixed words: group-element representatives over A, ideal-element
        // representatives over Z.
        let g_words = canonical_words(s, &a_letters, &letter_elt, input.g_elems)?;
        let t_words = canonical_words(s, &z_letters, &letter_elt, input.t_elems)?;
        let e_word = g_words[id_idx].clone();

        // sigma(z, x) and tau(x, z): fixed ideal words for the collapses.
        let t_index: BTreeMap<usize, usize> = input
            .t_elems
            .iter()
            .enumerate()
            .map(|(k, &e)| (e, k))
            .collect();
        let mut sigma = BTreeMap::new();
        let mut tau = BTreeMap::new();
        let x_letters: Vec<Letter> = a_letters
            .iter()
            .copied()
            .chain(b_letters.iter().map(|&(_, b)| b))
            .chain(c_letters.iter().map(|&(_, c)| c))
            .collect();
        for &z in &z_letters {
            for &x in &x_letters {
                let zx = s.mul(letter_elt[&z], letter_elt[&x]);
                let xz = s.mul(letter_elt[&x], letter_elt[&z]);
                sigma.insert((z, x), t_words[t_index[&zx]].clone());
                tau.insert((x, z), t_words[t_index[&xz]].clone());
            }
        }

        Ok(ExtensionContext {
            s: s.clone(),
            a_letters,
            b_letters,
            c_letters,
            z_letters,
            g_letter_map,
            t_letter_map,
            g_pres,
            t_pres,
            letter_elt,
            s_class,
            t_elems: input.t_elems.to_vec(),
            g_elems: input.g_elems.to_vec(),
            g_identity,
            i_size: input.i_size,
            l_size: input.l_size,
            p_entries: input.p_entries.to_vec(),
            e_word,
            g_words,
            t_words,
            sigma,
            tau,
        })
    }

    pub fn e_word(&self) -> &Word {
        &self.e_word
    }

    pub fn i_size(&self) -> usize {
        self.i_size
    }

    pub fn l_size(&self) -> usize {
        self.l_size
    }

    pub fn a_letters(&self) -> &[Letter] {
        &self.a_letters
    }

    pub fn b_letter(&self, i: usize) -> Option<Letter> {
        self.b_letters
            .iter()
            .find(|&&(k, _)| k == i)
            .map(|&(_, b)| b)
    }

    pub fn c_letter(&self, l: usize) -> Option<Letter> {
        self.c_letters
            .iter()
            .find(|&&(k, _)| k == l)
            .map(|&(_, c)| c)
    }

    pub fn z_letters(&self) -> &[Letter] {
        &self.z_letters
    }

    /// All non-ideal generators, in `A`, `B`, `C` order.
    pub fn x_letters(&self) -> Vec<Letter> {
        self.a_letters
            .iter()
            .copied()
            .chain(self.b_letters.iter().map(|&(_, b)| b))
            .chain(self.c_letters.iter().map(|&(_, c)| c))
            .collect()
    }

    pub fn alphabet(&self) -> Vec<Letter> {
        let mut out = self.x_letters();
        out.extend(self.z_letters.iter().copied());
        out
    }

    pub fn sandwich(&self, lambda: usize, i: usize) -> Option<usize> {
        self.p_entries[(lambda - 1) * self.i_size + (i - 1)]
    }

    /// The fixed `A^+` word of a sandwich entry.
    pub fn p_word(&self, lambda: usize, i: usize) -> Option<&Word> {
        self.sandwich(lambda, i).map(|g| &self.g_words[g])
    }

    pub fn g_word(&self, g: usize) -> &Word {
        &self.g_words[g]
    }

    pub fn t_word(&self, t: usize) -> &Word {
        &self.t_words[t]
    }

    pub fn sigma_word(&self, z: Letter, x: Letter) -> &Word {
        &self.sigma[&(z, x)]
    }

    pub fn tau_word(&self, x: Letter, z: Letter) -> &Word {
        &self.tau[&(x, z)]
    }

    /// Evaluates a word over the output alphabet in the ambient table.
    pub fn eval(&self, w: &Word) -> Option<usize> {
        let mut it = w.letters().iter();
        let mut acc = *self.letter_elt.get(it.next()?)?;
        for l in it {
            acc = self.s.mul(acc, *self.letter_elt.get(l)?);
        }
        Some(acc)
    }

    /// The oracle classification of the element a word represents.
    pub fn classify_elt(&self, elt: usize) -> Classified {
        self.s_class[elt]
    }

    /// `rho`: the fixed `Z^+` word of the ideal element a word represents.
    pub fn rho(&self, w: &Word) -> Option<&Word> {
        let elt = self.eval(w)?;
        match self.s_class[elt] {
            Classified::T(t) => Some(&self.t_words[t]),
            Classified::Triple(..) => None,
        }
    }

    pub fn g_identity_index(&self) -> usize {
        let g_index: BTreeMap<usize, usize> = self
            .g_elems
            .iter()
            .enumerate()
            .map(|(k, &e)| (e, k))
            .collect();
        g_index[&self.g_identity]
    }

    pub fn group_presentation(&self) -> &Presentation {
        &self.g_pres
    }

    pub fn ideal_presentation(&self) -> &Presentation {
        &self.t_pres
    }

    pub fn g_letter_map(&self) -> &BTreeMap<Letter, Letter> {
        &self.g_letter_map
    }

    pub fn t_letter_map(&self) -> &BTreeMap<Letter, Letter> {
        &self.t_letter_map
    }

    pub fn t_count(&self) -> usize {
        self.t_elems.len()
    }

    pub fn ambient(&self) -> &FiniteSemigroup {
        &self.s
    }
}

pub fn remap_word(w: &Word, map: &BTreeMap<Letter, Letter>) -> Word {
    Word::from_letters(w.letters().iter().map(|l| map[l]).collect())
}

/// Remaps a path into another presentation through a letter map and a rule
/// id map.
pub fn remap_path(
    path: &Path,
    letter_map: &BTreeMap<Letter, Letter>,
    rule_map: &[usize],
    target: &Presentation,
) -> Result<Path, ExtensionError> {
    if path.is_empty() {
        return Ok(Path::empty(remap_word(path.iota(), letter_map)));
    }
    let edges = path
        .edges()
        .iter()
        .map(|e| {
            Edge::new(
                remap_word(&e.prefix, letter_map),
                rule_map[e.rule_id],
                e.sign,
                remap_word(&e.suffix, letter_map),
            )
        })
        .collect();
    Path::from_edges(edges, target).map_err(|e| ExtensionError::Invalid {
        what: e.to_string(),
    })
}

/// Builds the grouped extension presentation: generators `A ∪ B ∪ C ∪ Z`
/// and the families `R, Q, R_e, R_0, R_U, R_T`, with every relation
/// verified against the ambient table. Exact duplicate relations are
/// merged, keeping the first family tag.
pub fn build_ps(ctx: &ExtensionContext) -> Result<GroupedPresentation, ExtensionError> {
    // Stage every relation in family order, then merge exact duplicates
    // keeping the first family tag.
    let mut staged: Vec<(Word, Word, Family)> = Vec::new();
    let e = ctx.e_word.clone();
    let xs = ctx.x_letters();

    for rule in ctx.g_pres.rules() {
        staged.push((rule.lhs.clone(), rule.rhs.clone(), Family::R));
    }
    for rule in ctx.t_pres.rules() {
        staged.push((rule.lhs.clone(), rule.rhs.clone(), Family::Q));
    }

    // R_e: b_i e = b_i, e c_l = c_l.
    for &(_, b) in &ctx.b_letters {
        staged.push((Word::single(b).concat(&e), Word::single(b), Family::Re));
    }
    for &(_, c) in &ctx.c_letters {
        staged.push((e.concat(&Word::single(c)), Word::single(c), Family::Re));
    }

    // R_0: z x = sigma(z,x), x z = tau(x,z).
    for &z in &ctx.z_letters {
        for &x in &xs {
            staged.push((
                Word::from_letters(vec![z, x]),
                ctx.sigma_word(z, x).clone(),
                Family::R0,
            ));
        }
    }
    for &x in &xs {
        for &z in &ctx.z_letters {
            staged.push((
                Word::from_letters(vec![x, z]),
                ctx.tau_word(x, z).clone(),
                Family::R0,
            ));
        }
    }

    // R_U (4.4)-(4.8): nonzero sandwich entries; families range over the
    // generators that exist, so index 1 rows and columns are covered by
    // the `e`-shaped relations only.
    for &(i, b) in &ctx.b_letters {
        if let Some(p) = ctx.p_word(1, i).cloned() {
            staged.push((e.concat(&Word::single(b)), p.clone(), Family::RU(1)));
            for &a in &ctx.a_letters {
                staged.push((
                    Word::from_letters(vec![a, b]),
                    Word::single(a).concat(&p),
                    Family::RU(1),
                ));
            }
        }
    }
    for &(l, c) in &ctx.c_letters {
        if let Some(p) = ctx.p_word(l, 1).cloned() {
            staged.push((Word::single(c).concat(&e), p.clone(), Family::RU(2)));
            for &a in &ctx.a_letters {
                staged.push((
                    Word::from_letters(vec![c, a]),
                    p.concat(&Word::single(a)),
                    Family::RU(2),
                ));
            }
        }
    }
    for &(l, c) in &ctx.c_letters {
        for &(i, b) in &ctx.b_letters {
            if let Some(p) = ctx.p_word(l, i).cloned() {
                staged.push((Word::from_letters(vec![c, b]), p, Family::RU(3)));
            }
        }
    }
    for &(l, c) in &ctx.c_letters {
        if let Some(p) = ctx.p_word(l, 1).cloned() {
            for &(_, c2) in &ctx.c_letters {
                staged.push((
                    Word::from_letters(vec![c, c2]),
                    p.concat(&Word::single(c2)),
                    Family::RU(4),
                ));
            }
        }
    }
    for &(_, b) in &ctx.b_letters {
        for &(j, b2) in &ctx.b_letters {
            if let Some(p) = ctx.p_word(1, j).cloned() {
                staged.push((
                    Word::from_letters(vec![b, b2]),
                    Word::single(b).concat(&p),
                    Family::RU(5),
                ));
            }
        }
    }

    // R_T (4.9)-(4.13): zero sandwich entries rewrite to the fixed ideal
    // word of the element the left side represents.
    let rho_of = |lhs: Word, fam: Family| -> Result<(Word, Word, Family), ExtensionError> {
        let rhs = ctx
            .rho(&lhs)
            .ok_or_else(|| ExtensionError::RelationFails {
                family: "R_T",
                detail: "left side does not represent an ideal element".to_string(),
            })?
            .clone();
        Ok((lhs, rhs, fam))
    };
    for &(i, b) in &ctx.b_letters {
        if ctx.sandwich(1, i).is_none() {
            staged.push(rho_of(e.concat(&Word::single(b)), Family::RT(1))?);
            for &a in &ctx.a_letters {
                staged.push(rho_of(Word::from_letters(vec![a, b]), Family::RT(1))?);
            }
        }
    }
    for &(l, c) in &ctx.c_letters {
        if ctx.sandwich(l, 1).is_none() {
            staged.push(rho_of(Word::single(c).concat(&e), Family::RT(2))?);
            for &a in &ctx.a_letters {
                staged.push(rho_of(Word::from_letters(vec![c, a]), Family::RT(2))?);
            }
        }
    }
    for &(l, c) in &ctx.c_letters {
        for &(i, b) in &ctx.b_letters {
            if ctx.sandwich(l, i).is_none() {
                staged.push(rho_of(Word::from_letters(vec![c, b]), Family::RT(3))?);
            }
        }
    }
    for &(l, c) in &ctx.c_letters {
        if ctx.sandwich(l, 1).is_none() {
            for &(_, c2) in &ctx.c_letters {
                staged.push(rho_of(Word::from_letters(vec![c, c2]), Family::RT(4))?);
            }
        }
    }
    for &(_, b) in &ctx.b_letters {
        for &(j, b2) in &ctx.b_letters {
            if ctx.sandwich(1, j).is_none() {
                staged.push(rho_of(Word::from_letters(vec![b, b2]), Family::RT(5))?);
            }
        }
    }

    let mut rules: Vec<(Word, Word)> = Vec::new();
    let mut families: Vec<Family> = Vec::new();
    let mut index: BTreeMap<(Word, Word), usize> = BTreeMap::new();
    let mut staged_ids: Vec<usize> = Vec::with_capacity(staged.len());
    for (lhs, rhs, fam) in staged {
        let id = match index.get(&(lhs.clone(), rhs.clone())) {
            Some(&id) => id,
            None => {
                let id = rules.len();
                index.insert((lhs.clone(), rhs.clone()), id);
                rules.push((lhs, rhs));
                families.push(fam);
                id
            }
        };
        staged_ids.push(id);
    }
    let g_rule_map: Vec<usize> = staged_ids[..ctx.g_pres.rules().len()].to_vec();
    let t_rule_map: Vec<usize> = staged_ids
        [ctx.g_pres.rules().len()..ctx.g_pres.rules().len() + ctx.t_pres.rules().len()]
        .to_vec();

    let presentation =
        Presentation::new(ctx.alphabet(), rules).map_err(|e| ExtensionError::Invalid {
            what: e.to_string(),
        })?;

    // Oracle verification of every relation.
    for rule in presentation.rules() {
        let l = ctx.eval(&rule.lhs);
        let r = ctx.eval(&rule.rhs);
        if l.is_none() || l != r {
            return Err(ExtensionError::RelationFails {
                family: "PS",
                detail: format!("rule {}", rule.id),
            });
        }
    }

    Ok(GroupedPresentation {
        presentation,
        families,
        g_rule_map,
        t_rule_map,
    })
}

/// The termination measure `F(w) = (|w|_{B∪C}, |w|_A)`, ordered
/// lexicographically with componentwise addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FMeasure(pub usize, pub usize);

impl Add for FMeasure {
    type Output = FMeasure;
    fn add(self, rhs: FMeasure) -> FMeasure {
        FMeasure(self.0 + rhs.0, self.1 + rhs.1)
    }
}

pub fn f_measure(w: &Word) -> FMeasure {
    FMeasure(w.count_tags(&[Tag::B, Tag::C]), w.count_tags(&[Tag::A]))
}

/// True for words in `B^1 A^* C^1 ∪ Z^+`.
pub fn is_quasi_normal(w: &Word) -> bool {
    if w.is_empty() {
        return false;
    }
    if w.letters().iter().all(|l| l.tag() == Tag::Z) {
        return true;
    }
    let mut rest = w.letters();
    if rest[0].tag() == Tag::B {
        rest = &rest[1..];
    }
    if let Some(last) = rest.last() {
        if last.tag() == Tag::C {
            rest = &rest[..rest.len() - 1];
        }
    }
    rest.iter().all(|l| l.tag() == Tag::A)
}

/// Classifies a word: the coordinate readout for quasi-normal words
/// (`b_i w c_l` represents `(i, [w], l)` with the identity for an empty
/// group part), the oracle verdict otherwise.
pub fn classify_word(ctx: &ExtensionContext, w: &Word) -> Classified {
    if is_quasi_normal(w) {
        if w.letters().iter().all(|l| l.tag() == Tag::Z) {
            let elt = ctx.eval(w).expect("word over the output alphabet");
            return ctx.classify_elt(elt);
        }
        let mut letters = w.letters();
        let mut i = 1;
        let mut l = 1;
        if letters[0].tag() == Tag::B {
            i = ctx
                .b_letters
                .iter()
                .find(|&&(_, b)| b == letters[0])
                .map(|&(k, _)| k)
                .expect("b-letter");
            letters = &letters[1..];
        }
        if let Some(&last) = letters.last() {
            if last.tag() == Tag::C {
                l = ctx
                    .c_letters
                    .iter()
                    .find(|&&(_, c)| c == last)
                    .map(|&(k, _)| k)
                    .expect("c-letter");
                letters = &letters[..letters.len() - 1];
            }
        }
        let g = if letters.is_empty() {
            ctx.g_identity_index()
        } else {
            let elt = ctx
                .eval(&Word::from_letters(letters.to_vec()))
                .expect("group part evaluates");
            ctx.g_elems
                .iter()
                .position(|&e| e == elt)
                .expect("group part lands in G")
        };
        return Classified::Triple(i, g, l);
    }
    let elt = ctx.eval(w).expect("word over the output alphabet");
    ctx.classify_elt(elt)
}

/// Rewrites `w` to quasi-normal form along positive `Gamma`-edges,
/// preferring `Gamma_0` edges so that words containing ideal letters stay
/// inside `Gamma_0`. Termination is guaranteed by the strict decrease of
/// the `F`-measure.
pub fn to_quasi_normal(gp: &GroupedPresentation, w: &Word) -> (Path, Word) {
    let ps = gp.presentation();
    let gamma0 = gp.gamma0();
    let gamma = gp.gamma();
    let mut path = Path::empty(w.clone());
    let mut cur = w.clone();
    loop {
        let step = edges_from(&cur, ps, &gamma0)
            .into_iter()
            .find(|e| e.sign == Sign::Plus)
            .or_else(|| {
                edges_from(&cur, ps, &gamma)
                    .into_iter()
                    .find(|e| e.sign == Sign::Plus)
            });
        match step {
            None => {
                debug_assert!(is_quasi_normal(&cur), "descent stops only at normal forms");
                return (path, cur);
            }
            Some(edge) => {
                let next = edge.tau(ps);
                debug_assert!(f_measure(&next) < f_measure(&cur));
                path = path
                    .compose(&Path::single(edge, ps), ps)
                    .expect("descent chains");
                cur = next;
            }
        }
    }
}

/// An indexed `X1`-style family: the base pairs plus the pair index for
/// each `(peeled letter, ideal rule)` key.
pub struct X1Family {
    pub base: HomotopyBase,
    by_key: BTreeMap<(Letter, usize), usize>,
}

impl X1Family {
    pub fn pair_for(&self, x: Letter, rule: usize) -> Option<usize> {
        self.by_key.get(&(x, rule)).copied()
    }
}

/// `X1`: for every non-ideal letter `x` and ideal rule `l = r` with first
/// letters `z`, `z'`, the pair relating `(x, l=r, +1, 1)` to the collapse
/// through `x z = tau(x,z)`, the fixed `Gamma_T` path, and back.
pub fn base_x1(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
    finder: &mut PathFinder,
) -> Result<X1Family, ExtensionError> {
    let ps = gp.presentation();
    let gamma_t = gp.gamma_t();
    let mut base = HomotopyBase::empty();
    let mut by_key = BTreeMap::new();
    for &x in &ctx.x_letters() {
        for &q_rule in &gp.rules_in(|f| matches!(f, Family::Q)) {
            let rule = ps.rule(q_rule);
            let z = rule.lhs.first().expect("ideal rule sides are non-empty");
            let zp = rule.rhs.first().expect("ideal rule sides are non-empty");
            let l_rest = rule.lhs.slice(1, rule.lhs.len());
            let r_rest = rule.rhs.slice(1, rule.rhs.len());
            let left = Path::single(
                Edge::new(Word::single(x), q_rule, Sign::Plus, Word::empty()),
                ps,
            );
            let tau_z = ctx.tau_word(x, z);
            let tau_zp = ctx.tau_word(x, zp);
            let first = Edge::new(
                Word::empty(),
                rule_for_tau(gp, ctx, x, z),
                Sign::Plus,
                l_rest.clone(),
            );
            let middle = finder.find(ps, &tau_z.concat(&l_rest), &tau_zp.concat(&r_rest), &gamma_t)?;
            let last = Edge::new(
                Word::empty(),
                rule_for_tau(gp, ctx, x, zp),
                Sign::Minus,
                r_rest.clone(),
            );
            let right = Path::single(first, ps)
                .compose(&middle, ps)
                .and_then(|p| p.compose(&Path::single(last, ps), ps))
                .map_err(|e| ExtensionError::Invalid { what: e.to_string() })?;
            let pair = ParallelPair::new(left, right, ps).map_err(|e| ExtensionError::Invalid {
                what: e.to_string(),
            })?;
            by_key.insert((x, q_rule), base.len());
            base.push(pair);
        }
    }
    Ok(X1Family { base, by_key })
}

/// `X1'`, the dual family peeling a letter on the right through
/// `z x = sigma(z,x)`.
pub fn base_x1_prime(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
    finder: &mut PathFinder,
) -> Result<X1Family, ExtensionError> {
    let ps = gp.presentation();
    let gamma_t = gp.gamma_t();
    let mut base = HomotopyBase::empty();
    let mut by_key = BTreeMap::new();
    for &x in &ctx.x_letters() {
        for &q_rule in &gp.rules_in(|f| matches!(f, Family::Q)) {
            let rule = ps.rule(q_rule);
            let z = rule.lhs.last().expect("ideal rule sides are non-empty");
            let zp = rule.rhs.last().expect("ideal rule sides are non-empty");
            let l_rest = rule.lhs.slice(0, rule.lhs.len() - 1);
            let r_rest = rule.rhs.slice(0, rule.rhs.len() - 1);
            let left = Path::single(
                Edge::new(Word::empty(), q_rule, Sign::Plus, Word::single(x)),
                ps,
            );
            let sig_z = ctx.sigma_word(z, x);
            let sig_zp = ctx.sigma_word(zp, x);
            let first = Edge::new(
                l_rest.clone(),
                rule_for_sigma(gp, ctx, z, x),
                Sign::Plus,
                Word::empty(),
            );
            let middle = finder.find(ps, &l_rest.concat(sig_z), &r_rest.concat(sig_zp), &gamma_t)?;
            let last = Edge::new(
                r_rest.clone(),
                rule_for_sigma(gp, ctx, zp, x),
                Sign::Minus,
                Word::empty(),
            );
            let right = Path::single(first, ps)
                .compose(&middle, ps)
                .and_then(|p| p.compose(&Path::single(last, ps), ps))
                .map_err(|e| ExtensionError::Invalid { what: e.to_string() })?;
            let pair = ParallelPair::new(left, right, ps).map_err(|e| ExtensionError::Invalid {
                what: e.to_string(),
            })?;
            by_key.insert((x, q_rule), base.len());
            base.push(pair);
        }
    }
    Ok(X1Family { base, by_key })
}

fn rule_for_tau(gp: &GroupedPresentation, ctx: &ExtensionContext, x: Letter, z: Letter) -> usize {
    let lhs = Word::from_letters(vec![x, z]);
    let rhs = ctx.tau_word(x, z).clone();
    find_rule(gp, &lhs, &rhs).expect("tau relation exists in R_0")
}

fn rule_for_sigma(gp: &GroupedPresentation, ctx: &ExtensionContext, z: Letter, x: Letter) -> usize {
    let lhs = Word::from_letters(vec![z, x]);
    let rhs = ctx.sigma_word(z, x).clone();
    find_rule(gp, &lhs, &rhs).expect("sigma relation exists in R_0")
}

fn find_rule(gp: &GroupedPresentation, lhs: &Word, rhs: &Word) -> Option<usize> {
    gp.presentation()
        .rules()
        .iter()
        .find(|r| r.lhs == *lhs && r.rhs == *rhs)
        .map(|r| r.id)
}

/// The combined `X1 ∪ X1'` base used to replay `push_through`
/// certificates: `X1` pairs first, then `X1'`.
pub fn combined_x1(x1: &X1Family, x1p: &X1Family) -> HomotopyBase {
    let mut base = x1.base.clone();
    base.extend(x1p.base.clone());
    base
}

/// The output of the letter-peeling step: `u · P · v` is certified
/// homotopic, modulo `X1 ∪ X1'`, to `Q1 (u' · P' · v') Q2^{-1}` with
/// `|u'v'| < |uv|`. The certificate replays against [`combined_x1`].
pub struct PushThrough {
    pub q1: Path,
    pub u: Word,
    pub middle: Path,
    pub v: Word,
    pub q2: Path,
    pub certificate: Vec<Move>,
}

/// Realises the peeling construction: the last letter of `u` (or, when `u`
/// is empty, the first letter of `v`) is pushed through every edge of the
/// `Gamma_T` path, producing collapse edges, shifted edges or fixed
/// `Gamma_T` paths, and a replayable move certificate.
pub fn push_through(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
    finder: &mut PathFinder,
    x1: &X1Family,
    x1p: &X1Family,
    u: &Word,
    path: &Path,
    v: &Word,
) -> Result<PushThrough, ExtensionError> {
    assert!(!path.is_empty(), "push_through needs a non-empty path");
    assert!(!u.is_empty() || !v.is_empty());
    let ps = gp.presentation();
    let gamma_t = gp.gamma_t();
    for e in path.edges() {
        assert!(
            matches!(gp.family(e.rule_id), Family::Q),
            "push_through path must live in Gamma_T"
        );
    }
    let base = combined_x1(x1, x1p);
    let from_left = !u.is_empty();
    let x = if from_left {
        u.last().unwrap()
    } else {
        v.first().unwrap()
    };

    // An ideal letter folds into the path without any moves.
    if x.tag() == Tag::Z {
        let (u2, middle, v2) = if from_left {
            let u2 = u.slice(0, u.len() - 1);
            (u2, path.act(&Word::single(x), &Word::empty()), v.clone())
        } else {
            let v2 = v.slice(1, v.len());
            (u.clone(), path.act(&Word::empty(), &Word::single(x)), v2)
        };
        let whole = path.act(u, v);
        let q1 = Path::empty(whole.iota().clone());
        let q2 = Path::empty(whole.tau(ps));
        debug_assert_eq!(middle.act(&u2, &v2), whole);
        return Ok(PushThrough {
            q1,
            u: u2,
            middle,
            v: v2,
            q2,
            certificate: Vec::new(),
        });
    }

    let (u2, v2) = if from_left {
        (u.slice(0, u.len() - 1), v.clone())
    } else {
        (u.clone(), v.slice(1, v.len()))
    };

    // The collapse edges F_k and the transported segments S_k.
    let n = path.len();
    let vertices = path.vertices(ps);
    let boundary_letter = |w: &Word| -> Letter {
        if from_left {
            w.first().expect("Gamma_T vertices are non-empty")
        } else {
            w.last().expect("Gamma_T vertices are non-empty")
        }
    };
    let collapse_rule = |z: Letter| -> usize {
        if from_left {
            rule_for_tau(gp, ctx, x, z)
        } else {
            rule_for_sigma(gp, ctx, z, x)
        }
    };
    let f_edge = |k: usize| -> Edge {
        let vertex = &vertices[k];
        let z = boundary_letter(vertex);
        if from_left {
            let w = vertex.slice(1, vertex.len());
            Edge::new(u2.clone(), collapse_rule(z), Sign::Plus, w.concat(v))
        } else {
            let w = vertex.slice(0, vertex.len() - 1);
            Edge::new(u.concat(&w), collapse_rule(z), Sign::Plus, v2.clone())
        }
    };

    let mut segments: Vec<Path> = Vec::with_capacity(n);
    for (k, edge) in path.edges().iter().enumerate() {
        let z_in = boundary_letter(&vertices[k]);
        let z_out = boundary_letter(&vertices[k + 1]);
        let boundary_in_context = if from_left {
            !edge.prefix.is_empty()
        } else {
            !edge.suffix.is_empty()
        };
        if boundary_in_context {
            // The rewrite does not touch the boundary letter: shift it.
            debug_assert_eq!(z_in, z_out);
            let seg = if from_left {
                let collapsed = ctx.tau_word(x, z_in);
                Edge::new(
                    collapsed.concat(&edge.prefix.slice(1, edge.prefix.len())),
                    edge.rule_id,
                    edge.sign,
                    edge.suffix.clone(),
                )
            } else {
                let collapsed = ctx.sigma_word(z_in, x);
                Edge::new(
                    edge.prefix.clone(),
                    edge.rule_id,
                    edge.sign,
                    edge.suffix.slice(0, edge.suffix.len() - 1).concat(collapsed),
                )
            };
            segments.push(Path::single(seg, ps));
        } else {
            // The rewrite consumes the boundary letter: use the fixed
            // Gamma_T path between the two collapses.
            let rule = ps.rule(edge.rule_id);
            let consumed = rule.side(edge.sign);
            let produced = rule.side(edge.sign.flip());
            let seg = if from_left {
                let s_rest = consumed.slice(1, consumed.len());
                let t_rest = produced.slice(1, produced.len());
                let from = ctx.tau_word(x, z_in).concat(&s_rest);
                let to = ctx.tau_word(x, z_out).concat(&t_rest);
                finder
                    .find(ps, &from, &to, &gamma_t)?
                    .act(&Word::empty(), &edge.suffix)
                    .act(&edge.prefix, &Word::empty())
            } else {
                let s_rest = consumed.slice(0, consumed.len() - 1);
                let t_rest = produced.slice(0, produced.len() - 1);
                let from = s_rest.concat(ctx.sigma_word(z_in, x));
                let to = t_rest.concat(ctx.sigma_word(z_out, x));
                finder
                    .find(ps, &from, &to, &gamma_t)?
                    .act(&edge.prefix, &Word::empty())
            };
            segments.push(seg);
        }
    }

    // Build the certificate by transforming a working copy.
    let mut current = path.act(u, v);
    let mut cert: Vec<Move> = Vec::new();
    let mut pos = 0usize;
    let apply = |current: &mut Path, cert: &mut Vec<Move>, mv: Move| {
        *current = crate::homotopy::apply_move(ps, current, &mv, &base)
            .expect("push_through moves are applicable");
        cert.push(mv);
    };
    for (k, edge) in path.edges().iter().enumerate() {
        let boundary_in_context = if from_left {
            !edge.prefix.is_empty()
        } else {
            !edge.suffix.is_empty()
        };
        if boundary_in_context {
            apply(
                &mut current,
                &mut cert,
                Move::Insert {
                    at: pos,
                    edge: f_edge(k),
                },
            );
            apply(&mut current, &mut cert, Move::Interchange { at: pos + 1 });
        } else {
            // Base replacement by the X1 / X1' pair of (x, rule).
            let (family, offset) = if from_left {
                (x1, 0)
            } else {
                (x1p, x1.base.len())
            };
            let pair = offset
                + family
                    .pair_for(x, edge.rule_id)
                    .expect("X1 pair exists for every ideal rule");
            let (left_ctx, right_ctx) = if from_left {
                (u2.clone(), edge.suffix.concat(v))
            } else {
                (u.concat(&edge.prefix), v2.clone())
            };
            apply(
                &mut current,
                &mut cert,
                Move::Replace {
                    at: pos,
                    pair,
                    forward: true,
                    inverted: edge.sign == Sign::Minus,
                    left: left_ctx,
                    right: right_ctx,
                },
            );
        }
        if k > 0 {
            apply(&mut current, &mut cert, Move::Cancel { at: pos - 1 });
            pos -= 1;
        }
        pos += 1 + segments[k].len();
    }

    let middle: Path = segments
        .into_iter()
        .try_fold(None::<Path>, |acc, seg| -> Result<_, ExtensionError> {
            Ok(Some(match acc {
                None => seg,
                Some(p) => p.compose(&seg, ps).map_err(|e| ExtensionError::Invalid {
                    what: e.to_string(),
                })?,
            }))
        })?
        .expect("non-empty path has segments");
    let q1 = Path::single(f_edge(0), ps);
    let q2 = Path::single(f_edge(n), ps);
    let expected = q1
        .compose(&middle.act(&u2, &v2), ps)
        .and_then(|p| p.compose(&q2.inverse(ps), ps))
        .map_err(|e| ExtensionError::Invalid {
            what: e.to_string(),
        })?;
    if current != expected {
        return Err(ExtensionError::Invalid {
            what: "push_through certificate does not reach the expected form".to_string(),
        });
    }
    debug_assert!(u2.len() + v2.len() < u.len() + v.len());
    Ok(PushThrough {
        q1,
        u: u2,
        middle,
        v: v2,
        q2,
        certificate: cert,
    })
}

/// The fixed connecting path of `X2`/`X3` between the quasi-normal forms
/// of two words representing the same element: through `R ∪ R_e` inside
/// `B^1 A^* C^1` for non-ideal elements, through `Q` for ideal ones.
fn connecting_path(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
    finder: &mut PathFinder,
    from: &Word,
    to: &Word,
) -> Result<Path, ExtensionError> {
    let ps = gp.presentation();
    let elt = ctx.eval(from).expect("word over the output alphabet");
    let filter = match ctx.classify_elt(elt) {
        Classified::Triple(..) => gp.overline(),
        Classified::T(_) => gp.gamma_t(),
    };
    Ok(finder.find(ps, from, to, &filter)?)
}

/// `X2`: for every edge with single-letter (or empty) contexts, the pair
/// relating it to the descent-connect-ascend route through quasi-normal
/// forms.
pub fn base_x2(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
    finder: &mut PathFinder,
) -> Result<HomotopyBase, ExtensionError> {
    let ps = gp.presentation();
    let mut contexts: Vec<Word> = vec![Word::empty()];
    contexts.extend(ctx.alphabet().into_iter().map(Word::single));
    let mut base = HomotopyBase::empty();
    for rule in 0..ps.rules().len() {
        for alpha in &contexts {
            for beta in &contexts {
                for sign in [Sign::Plus, Sign::Minus] {
                    let edge = Edge::new(alpha.clone(), rule, sign, beta.clone());
                    let left = Path::single(edge.clone(), ps);
                    let (down_i, qnf_i) = to_quasi_normal(gp, &edge.iota(ps));
                    let (down_t, qnf_t) = to_quasi_normal(gp, &edge.tau(ps));
                    let connect = connecting_path(ctx, gp, finder, &qnf_i, &qnf_t)?;
                    let right = down_i
                        .compose(&connect, ps)
                        .and_then(|p| p.compose(&down_t.inverse(ps), ps))
                        .map_err(|e| ExtensionError::Invalid {
                            what: e.to_string(),
                        })?;
                    let pair =
                        ParallelPair::new(left, right, ps).map_err(|e| ExtensionError::Invalid {
                            what: e.to_string(),
                        })?;
                    base.push(pair);
                }
            }
        }
    }
    Ok(base)
}

/// `X3`: for every ordered pair of positive `Gamma`-edges sharing an
/// initial vertex of length at most `2|e| + 3`, the pair
/// `(E1 P_{tau E1} Q_{E1,E2}, E2 P_{tau E2})` with fixed descents and
/// connecting path. The enumeration aborts if it would visit more than
/// `word_budget` words.
pub fn base_x3(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
    finder: &mut PathFinder,
    word_budget: usize,
) -> Result<HomotopyBase, ExtensionError> {
    let ps = gp.presentation();
    let gamma = gp.gamma();
    let bound = 2 * ctx.e_word.len() + 3;
    let alphabet = ctx.alphabet();
    let mut needed = 0usize;
    let mut count = alphabet.len();
    for _ in 1..bound {
        needed += count;
        count *= alphabet.len();
    }
    needed += count;
    if needed > word_budget {
        return Err(ExtensionError::X3Budget {
            needed,
            budget: word_budget,
        });
    }
    let mut base = HomotopyBase::empty();
    for w in words_up_to(&alphabet, bound) {
        let positives: Vec<Edge> = edges_from(&w, ps, &gamma)
            .into_iter()
            .filter(|e| e.sign == Sign::Plus)
            .collect();
        for e1 in &positives {
            let (down1, qnf1) = to_quasi_normal(gp, &e1.tau(ps));
            for e2 in &positives {
                let (down2, qnf2) = to_quasi_normal(gp, &e2.tau(ps));
                let connect = connecting_path(ctx, gp, finder, &qnf1, &qnf2)?;
                let left = Path::single(e1.clone(), ps)
                    .compose(&down1, ps)
                    .and_then(|p| p.compose(&connect, ps))
                    .map_err(|e| ExtensionError::Invalid {
                        what: e.to_string(),
                    })?;
                let right = Path::single(e2.clone(), ps)
                    .compose(&down2, ps)
                    .map_err(|e| ExtensionError::Invalid {
                        what: e.to_string(),
                    })?;
                let pair =
                    ParallelPair::new(left, right, ps).map_err(|e| ExtensionError::Invalid {
                        what: e.to_string(),
                    })?;
                base.push(pair);
            }
        }
    }
    Ok(base)
}

/// `Xe`: the square relating the two collapses of `b_i e c_l`; exactly
/// `(|I|-1)(|L|-1)` pairs.
pub fn base_xe(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
) -> Result<HomotopyBase, ExtensionError> {
    let ps = gp.presentation();
    let mut base = HomotopyBase::empty();
    for &(_, b) in &ctx.b_letters {
        let b_rule = find_rule(
            gp,
            &Word::single(b).concat(&ctx.e_word),
            &Word::single(b),
        )
        .expect("b_i e = b_i is in R_e");
        for &(_, c) in &ctx.c_letters {
            let c_rule = find_rule(
                gp,
                &ctx.e_word.concat(&Word::single(c)),
                &Word::single(c),
            )
            .expect("e c_l = c_l is in R_e");
            let left = Path::single(
                Edge::new(Word::single(b), c_rule, Sign::Plus, Word::empty()),
                ps,
            );
            let right = Path::single(
                Edge::new(Word::empty(), b_rule, Sign::Plus, Word::single(c)),
                ps,
            );
            let pair = ParallelPair::new(left, right, ps).map_err(|e| ExtensionError::Invalid {
                what: e.to_string(),
            })?;
            base.push(pair);
        }
    }
    Ok(base)
}

/// Assembles the full homotopy base
/// `X = X1 ∪ X1' ∪ X2 ∪ X3 ∪ Xe ∪ X_G ∪ X_T`, embedding the group and
/// ideal bases through the letter and rule maps, and validates everything
/// over the extension presentation.
pub fn assemble_x(
    ctx: &ExtensionContext,
    gp: &GroupedPresentation,
    finder: &mut PathFinder,
    x_g: &HomotopyBase,
    x_t: &HomotopyBase,
    x3_word_budget: usize,
) -> Result<HomotopyBase, ExtensionError> {
    let ps = gp.presentation();
    let x1 = base_x1(ctx, gp, finder)?;
    let x1p = base_x1_prime(ctx, gp, finder)?;
    let mut base = combined_x1(&x1, &x1p);
    base.extend(base_x2(ctx, gp, finder)?);
    base.extend(base_x3(ctx, gp, finder, x3_word_budget)?);
    base.extend(base_xe(ctx, gp)?);
    let g_rule_map: Vec<usize> = (0..ctx.g_pres.rules().len()).map(|i| gp.g_rule(i)).collect();
    for pair in x_g.pairs() {
        let left = remap_path(&pair.left, &ctx.g_letter_map, &g_rule_map, ps)?;
        let right = remap_path(&pair.right, &ctx.g_letter_map, &g_rule_map, ps)?;
        base.push(ParallelPair::new(left, right, ps).map_err(|e| ExtensionError::Invalid {
            what: e.to_string(),
        })?);
    }
    let t_rule_map: Vec<usize> = (0..ctx.t_pres.rules().len()).map(|i| gp.t_rule(i)).collect();
    for pair in x_t.pairs() {
        let left = remap_path(&pair.left, &ctx.t_letter_map, &t_rule_map, ps)?;
        let right = remap_path(&pair.right, &ctx.t_letter_map, &t_rule_map, ps)?;
        base.push(ParallelPair::new(left, right, ps).map_err(|e| ExtensionError::Invalid {
            what: e.to_string(),
        })?);
    }
    let report = validate_base(&base, ps);
    if let Some((k, why)) = report.failures().next() {
        return Err(ExtensionError::Invalid {
            what: format!("pair {k}: {why}"),
        });
    }
    Ok(base)
}

/// Adjoins a zero: a fresh generator `0` with `a0 = 0`, `0a = 0` per
/// generator and `00 = 0`.
pub fn adjoin_zero(p: &Presentation, interner: &mut Interner) -> (Presentation, Letter) {
    let taken: BTreeSet<String> = p
        .alphabet()
        .iter()
        .map(|&l| interner.name(l).to_string())
        .collect();
    let (zero, _) = interner.intern_fresh("0", Tag::Plain, &taken);
    let mut alphabet = p.alphabet().to_vec();
    alphabet.push(zero);
    let mut rules: Vec<(Word, Word)> = p
        .rules()
        .iter()
        .map(|r| (r.lhs.clone(), r.rhs.clone()))
        .collect();
    let z = Word::single(zero);
    for &a in p.alphabet() {
        rules.push((Word::single(a).concat(&z), z.clone()));
        rules.push((z.concat(&Word::single(a)), z.clone()));
    }
    rules.push((z.concat(&z), z.clone()));
    let out = Presentation::new(alphabet, rules).expect("zero adjunction is well-formed");
    (out, zero)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictError {
    RuleEscapes { rule: usize },
    PairEscapes { pair: usize },
}

impl fmt::Display for RestrictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestrictError::RuleEscapes { rule } => {
                write!(f, "kept rule {rule} still touches a dropped letter")
            }
            RestrictError::PairEscapes { pair } => {
                write!(f, "kept base pair {pair} touches a dropped letter")
            }
        }
    }
}

impl core::error::Error for RestrictError {}

/// Restricts a presentation and base to the letters outside `drop`: rules
/// touching dropped letters are removed, and exactly the pairs whose
/// initial vertex avoids the dropped letters are kept (their edges then
/// never touch them).
pub fn restrict_base(
    x: &HomotopyBase,
    p: &Presentation,
    drop: &BTreeSet<Letter>,
) -> Result<(Presentation, HomotopyBase), RestrictError> {
    let keep_word = |w: &Word| w.letters().iter().all(|l| !drop.contains(l));
    let alphabet: Vec<Letter> = p
        .alphabet()
        .iter()
        .copied()
        .filter(|l| !drop.contains(l))
        .collect();
    let mut rule_map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut rules = Vec::new();
    for rule in p.rules() {
        if keep_word(&rule.lhs) && keep_word(&rule.rhs) {
            rule_map.insert(rule.id, rules.len());
            rules.push((rule.lhs.clone(), rule.rhs.clone()));
        }
    }
    let target = Presentation::new(alphabet, rules).expect("restriction is well-formed");
    let mut pairs = Vec::new();
    for (k, pair) in x.pairs().iter().enumerate() {
        if !keep_word(pair.left.iota()) {
            continue;
        }
        let remap = |path: &Path| -> Result<Path, RestrictError> {
            let edges = path
                .edges()
                .iter()
                .map(|e| {
                    let rule = rule_map
                        .get(&e.rule_id)
                        .ok_or(RestrictError::PairEscapes { pair: k })?;
                    if !keep_word(&e.prefix) || !keep_word(&e.suffix) {
                        return Err(RestrictError::PairEscapes { pair: k });
                    }
                    Ok(Edge::new(e.prefix.clone(), *rule, e.sign, e.suffix.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if edges.is_empty() {
                return Ok(Path::empty(path.iota().clone()));
            }
            Path::from_edges(edges, &target).map_err(|_| RestrictError::PairEscapes { pair: k })
        };
        pairs.push(ParallelPair {
            left: remap(&pair.left)?,
            right: remap(&pair.right)?,
        });
    }
    Ok((target, HomotopyBase::from_pairs(pairs)))
}

/// Budgets for the capstone driver.
#[derive(Debug, Clone, Copy)]
pub struct Budgets {
    pub node_budget: usize,
    pub x3_word_budget: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            node_budget: crate::oracle::DEFAULT_NODE_BUDGET,
            x3_word_budget: 2_000_000,
        }
    }
}

/// A finite presentation plus homotopy base for a finite regular
/// semigroup, by induction on its J-classes: a maximal J-class is split
/// off as a completely 0-simple quotient over the ideal of the remaining
/// classes; groups bottom out at the multiplication-table presentation
/// with its critical-pair base.
pub fn fdt_base_finite_regular(
    s: &FiniteSemigroup,
    interner: &mut Interner,
    budgets: Budgets,
) -> Result<(Presentation, HomotopyBase), ExtensionError> {
    let (p, base, _) = fdt_rec(s, interner, budgets)?;
    Ok((p, base))
}

fn fdt_rec(
    s: &FiniteSemigroup,
    interner: &mut Interner,
    budgets: Budgets,
) -> Result<(Presentation, HomotopyBase, BTreeMap<Letter, usize>), ExtensionError> {
    if let Err(witness) = s.is_regular() {
        return Err(ExtensionError::NotRegular { witness });
    }
    let gs = green(s);

    if gs.j.classes().len() == 1 {
        if gs.h.classes().len() == 1 {
            // A group: the table presentation with its critical-pair base.
            let (p, cert) = table_presentation_tagged(s, interner, Tag::Plain);
            let base = critical_pair_base(&p, &cert).map_err(|e| ExtensionError::Invalid {
                what: e.to_string(),
            })?;
            let letter_elts = p
                .alphabet()
                .iter()
                .enumerate()
                .map(|(i, &l)| (l, i))
                .collect();
            return Ok((p, base, letter_elts));
        }
        // Completely simple: adjoin a zero and present S^0 as an ideal
        // extension of the trivial semigroup, then drop the zero again.
        let (s0, zero) = with_zero(s, interner);
        let coords = rees_coordinates(&s0, &gs, (0..s.size()).collect())?;
        let trivial_z = interner.intern("zz", Tag::Plain);
        let t_pres = Presentation::new(
            vec![trivial_z],
            vec![(
                Word::from_letters(vec![trivial_z, trivial_z]),
                Word::single(trivial_z),
            )],
        )
        .expect("trivial ideal presentation");
        let t_letter_elts: BTreeMap<Letter, usize> = BTreeMap::from([(trivial_z, zero)]);
        let t_elems = vec![zero];
        let cert = crate::oracle::certify_complete(&t_pres).expect("zz = z is complete");
        let x_t = critical_pair_base(&t_pres, &cert).map_err(|e| ExtensionError::Invalid {
            what: e.to_string(),
        })?;
        let (ps, x, ctx) = extension_step(
            &s0,
            &coords,
            &t_pres,
            &t_letter_elts,
            &t_elems,
            &x_t,
            interner,
            budgets,
        )?;
        // Drop the ideal letters and their relations.
        let drop: BTreeSet<Letter> = ctx.z_letters.iter().copied().collect();
        let (p1, x1) =
            restrict_base(&x, ps.presentation(), &drop).map_err(|e| ExtensionError::Invalid {
                what: e.to_string(),
            })?;
        let letter_elts = ctx
            .letter_elt
            .iter()
            .filter(|(l, _)| !drop.contains(l))
            .map(|(&l, &e)| (l, e))
            .collect();
        Ok((p1, x1, letter_elts))
    } else {
        // Split off a maximal J-class.
        let j_max = maximal_j_class(s, &gs);
        let t_elems: Vec<usize> = (0..s.size()).filter(|e| !j_max.contains(e)).collect();
        let t_set: BTreeSet<usize> = t_elems.iter().copied().collect();
        let t_table = s
            .restrict_to(&t_set, interner, Tag::Plain)
            .map_err(|e| ExtensionError::BadEmbedding {
                what: e.to_string(),
            })?;
        let (t_pres_sub, x_t, t_letter_sub) = fdt_rec(&t_table, interner, budgets)?;
        // Letters of the recursive presentation, as elements of s.
        let t_letter_elts: BTreeMap<Letter, usize> = t_letter_sub
            .iter()
            .map(|(&l, &sub_idx)| (l, t_elems[sub_idx]))
            .collect();
        let coords = rees_coordinates(s, &gs, j_max.iter().copied().collect())?;
        let (ps, x, ctx) = extension_step(
            s,
            &coords,
            &t_pres_sub,
            &t_letter_elts,
            &t_elems,
            &x_t,
            interner,
            budgets,
        )?;
        let letter_elts = ctx.letter_elt.clone();
        Ok((ps.presentation().clone(), x, letter_elts))
    }
}

/// Rees coordinates of a (maximal) J-class: row and column classes with
/// the group H-class at (1,1), representatives, the sandwich matrix, and
/// the coordinate map — all verified against the table.
struct ReesCoords {
    j_class: Vec<usize>,
    i_size: usize,
    l_size: usize,
    g_elems: Vec<usize>,
    p_entries: Vec<Option<usize>>,
    triple_elt: BTreeMap<(usize, usize, usize), usize>,
}

fn maximal_j_class(s: &FiniteSemigroup, gs: &GreenStructure) -> Vec<usize> {
    // J_x <= J_y iff x is in the two-sided ideal of y.
    let n = s.size();
    let ideal = |x: usize| -> BTreeSet<usize> {
        let mut set = BTreeSet::from([x]);
        for a in 0..n {
            set.insert(s.mul(x, a));
            set.insert(s.mul(a, x));
            for b in 0..n {
                set.insert(s.mul(s.mul(a, x), b));
            }
        }
        set
    };
    for class in gs.j.classes() {
        let rep = class[0];
        let below = ideal(rep);
        let is_max = (0..n).all(|y| !ideal(y).contains(&rep) || below.contains(&y));
        if is_max {
            return class.clone();
        }
    }
    unreachable!("a finite J-order has a maximal class")
}

fn rees_coordinates(
    s: &FiniteSemigroup,
    gs: &GreenStructure,
    j_class: Vec<usize>,
) -> Result<ReesCoords, ExtensionError> {
    let in_j: BTreeSet<usize> = j_class.iter().copied().collect();
    let e = *j_class
        .iter()
        .find(|&&x| s.is_idempotent(x))
        .ok_or(ExtensionError::BadEmbedding {
            what: "J-class has no idempotent".to_string(),
        })?;

    // Row classes (R-classes in J), the one through e first.
    let mut i_classes: Vec<usize> = Vec::new();
    let mut l_classes: Vec<usize> = Vec::new();
    for class in gs.r.classes() {
        if in_j.contains(&class[0]) {
            if gs.r.same(class[0], e) {
                i_classes.insert(0, gs.r.class_of(class[0]));
            } else {
                i_classes.push(gs.r.class_of(class[0]));
            }
        }
    }
    for class in gs.l.classes() {
        if in_j.contains(&class[0]) {
            if gs.l.same(class[0], e) {
                l_classes.insert(0, gs.l.class_of(class[0]));
            } else {
                l_classes.push(gs.l.class_of(class[0]));
            }
        }
    }
    let i_size = i_classes.len();
    let l_size = l_classes.len();

    let h_class = |i: usize, l: usize| -> Vec<usize> {
        j_class
            .iter()
            .copied()
            .filter(|&x| gs.r.class_of(x) == i_classes[i - 1] && gs.l.class_of(x) == l_classes[l - 1])
            .collect()
    };
    let g_elems = h_class(1, 1);
    if !g_elems.contains(&e) {
        return Err(ExtensionError::BadEmbedding {
            what: "corner H-class misses its idempotent".to_string(),
        });
    }
    // Representatives r_i in H(i,1) and q_l in H(1,l), with r_1 = q_1 = e.
    let mut r_reps = vec![e];
    for i in 2..=i_size {
        let h = h_class(i, 1);
        r_reps.push(*h.first().ok_or(ExtensionError::BadEmbedding {
            what: format!("empty H-class ({i},1)"),
        })?);
    }
    let mut q_reps = vec![e];
    for l in 2..=l_size {
        let h = h_class(1, l);
        q_reps.push(*h.first().ok_or(ExtensionError::BadEmbedding {
            what: format!("empty H-class (1,{l})"),
        })?);
    }

    // Coordinates: x in H(i,l) equals r_i g q_l for a unique g in G.
    let mut triple_elt: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for &x in &j_class {
        let i = i_classes
            .iter()
            .position(|&c| c == gs.r.class_of(x))
            .expect("x lies in a row class")
            + 1;
        let l = l_classes
            .iter()
            .position(|&c| c == gs.l.class_of(x))
            .expect("x lies in a column class")
            + 1;
        let mut found = None;
        for (gi, &g) in g_elems.iter().enumerate() {
            if s.mul(s.mul(r_reps[i - 1], g), q_reps[l - 1]) == x {
                if found.is_some() {
                    return Err(ExtensionError::BadEmbedding {
                        what: format!("element {x} has two group coordinates"),
                    });
                }
                found = Some(gi);
            }
        }
        let gi = found.ok_or(ExtensionError::BadEmbedding {
            what: format!("element {x} has no group coordinate"),
        })?;
        triple_elt.insert((i, gi, l), x);
    }

    // Sandwich entries p_{l i} = q_l r_i, zero when the product drops out
    // of the J-class.
    let g_index: BTreeMap<usize, usize> = g_elems.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    let mut p_entries = Vec::with_capacity(i_size * l_size);
    for l in 1..=l_size {
        for i in 1..=i_size {
            let prod = s.mul(q_reps[l - 1], r_reps[i - 1]);
            if in_j.contains(&prod) {
                let gi = *g_index.get(&prod).ok_or(ExtensionError::BadEmbedding {
                    what: "sandwich product escapes the corner group".to_string(),
                })?;
                p_entries.push(Some(gi));
            } else {
                p_entries.push(None);
            }
        }
    }
    if p_entries[0].is_none() {
        return Err(ExtensionError::Rees(ReesError::CornerZero));
    }

    Ok(ReesCoords {
        j_class,
        i_size,
        l_size,
        g_elems,
        p_entries,
        triple_elt,
    })
}

/// One extension step of the driver: present the corner group from its
/// table, build the extension context and presentation over the ambient
/// table, and assemble the homotopy base.
#[allow(clippy::too_many_arguments)]
fn extension_step(
    s: &FiniteSemigroup,
    coords: &ReesCoords,
    t_pres: &Presentation,
    t_letter_elts: &BTreeMap<Letter, usize>,
    t_elems: &[usize],
    x_t: &HomotopyBase,
    interner: &mut Interner,
    budgets: Budgets,
) -> Result<(GroupedPresentation, HomotopyBase, ExtensionContext), ExtensionError> {
    let g_set: BTreeSet<usize> = coords.g_elems.iter().copied().collect();
    let g_table = s
        .restrict_to(&g_set, interner, Tag::Plain)
        .map_err(|e| ExtensionError::BadEmbedding {
            what: e.to_string(),
        })?;
    let (g_pres, g_cert) = table_presentation_tagged(&g_table, interner, Tag::Plain);
    let x_g = critical_pair_base(&g_pres, &g_cert).map_err(|e| ExtensionError::Invalid {
        what: e.to_string(),
    })?;
    // Table-presentation letters are the G-elements in sorted order.
    let g_sorted: Vec<usize> = g_set.iter().copied().collect();
    let g_letter_elts: BTreeMap<Letter, usize> = g_pres
        .alphabet()
        .iter()
        .enumerate()
        .map(|(k, &l)| (l, g_sorted[k]))
        .collect();
    // Coordinates index G by j_class order; rebuild against g_elems order.
    let input = ExtensionInput {
        g_pres: &g_pres,
        g_letter_elts: &g_letter_elts,
        g_elems: &coords.g_elems,
        t_pres,
        t_letter_elts,
        t_elems,
        s,
        i_size: coords.i_size,
        l_size: coords.l_size,
        p_entries: &coords.p_entries,
        triple_elt: &coords.triple_elt,
    };
    let ctx = ExtensionContext::new(&input, interner)?;
    let gp = build_ps(&ctx)?;
    let mut finder = PathFinder::new(budgets.node_budget);
    let x = assemble_x(&ctx, &gp, &mut finder, &x_g, x_t, budgets.x3_word_budget)?;
    let _ = &coords.j_class;
    Ok((gp, x, ctx))
}

/// The semigroup with a zero adjoined; returns the zero's element index.
fn with_zero(s: &FiniteSemigroup, interner: &mut Interner) -> (FiniteSemigroup, usize) {
    let n = s.size();
    let mut table = vec![0usize; (n + 1) * (n + 1)];
    for x in 0..n {
        for y in 0..n {
            table[x * (n + 1) + y] = s.mul(x, y);
        }
    }
    for k in 0..=n {
        table[k * (n + 1) + n] = n;
        table[n * (n + 1) + k] = n;
    }
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut gens = Vec::with_capacity(n + 1);
    let mut names = Vec::with_capacity(n + 1);
    let mut elems = Vec::with_capacity(n + 1);
    for x in 0..=n {
        let base = if x < n {
            s.display_element(x, interner)
        } else {
            "0".to_string()
        };
        let (letter, used) = interner.intern_fresh(&base, Tag::Plain, &taken);
        taken.insert(used.clone());
        names.push(used);
        gens.push((letter, x));
        elems.push(Word::single(letter));
    }
    (
        FiniteSemigroup::from_parts(elems, Some(names), table, gens),
        n,
    )
}

/// Synthetic extension input for a Rees matrix semigroup over a trivial
/// ideal `T = {0}`: the ambient table is the Rees multiplication itself.
pub fn rees_extension_input(
    rees: &ReesMatrix,
    interner: &mut Interner,
) -> Result<
    (
        FiniteSemigroup,
        Presentation,
        BTreeMap<Letter, usize>,
        Vec<usize>,
        Presentation,
        BTreeMap<Letter, usize>,
        Vec<usize>,
        BTreeMap<(usize, usize, usize), usize>,
        Vec<Option<usize>>,
    ),
    ExtensionError,
> {
    // The ambient semigroup: zero first, then the triples.
    let mut elements = vec![ReesElt::Zero];
    for i in 1..=rees.i_size() {
        for g in 0..rees.group().size() {
            for l in 1..=rees.l_size() {
                elements.push(ReesElt::Triple(i, g, l));
            }
        }
    }
    let index: BTreeMap<ReesElt, usize> = elements
        .iter()
        .enumerate()
        .map(|(k, &e)| (e, k))
        .collect();
    let n = elements.len();
    let mut table = vec![0usize; n * n];
    for (xi, &x) in elements.iter().enumerate() {
        for (yi, &y) in elements.iter().enumerate() {
            table[xi * n + yi] = index[&rees.mult(x, y)];
        }
    }
    let mut taken = BTreeSet::new();
    let mut gens = Vec::with_capacity(n);
    let mut names = Vec::with_capacity(n);
    let mut canon = Vec::with_capacity(n);
    for (k, e) in elements.iter().enumerate() {
        let base = match e {
            ReesElt::Zero => "0".to_string(),
            ReesElt::Triple(i, g, l) => format!("m{i}.{g}.{l}"),
        };
        let (letter, used) = interner.intern_fresh(&base, Tag::Plain, &taken);
        taken.insert(used.clone());
        names.push(used);
        gens.push((letter, k));
        canon.push(Word::single(letter));
    }
    let s = FiniteSemigroup::from_parts(canon, Some(names), table, gens);

    // The group letters embed as (1, g_a, 1).
    let g_letter_elts: BTreeMap<Letter, usize> = rees
        .group_presentation()
        .alphabet()
        .iter()
        .map(|&l| {
            let g = rees
                .group()
                .generator(l)
                .expect("group presentation letters generate the group");
            (l, index[&ReesElt::Triple(1, g, 1)])
        })
        .collect();
    let g_elems: Vec<usize> = (0..rees.group().size())
        .map(|g| index[&ReesElt::Triple(1, g, 1)])
        .collect();

    let trivial_z = interner.intern("z", Tag::Plain);
    let t_pres = Presentation::new(
        vec![trivial_z],
        vec![(
            Word::from_letters(vec![trivial_z, trivial_z]),
            Word::single(trivial_z),
        )],
    )
    .expect("trivial ideal presentation");
    let t_letter_elts = BTreeMap::from([(trivial_z, index[&ReesElt::Zero])]);
    let t_elems = vec![index[&ReesElt::Zero]];

    let mut triple_elt = BTreeMap::new();
    for i in 1..=rees.i_size() {
        for g in 0..rees.group().size() {
            for l in 1..=rees.l_size() {
                triple_elt.insert((i, g, l), index[&ReesElt::Triple(i, g, l)]);
            }
        }
    }
    let mut p_entries = Vec::with_capacity(rees.i_size() * rees.l_size());
    for l in 1..=rees.l_size() {
        for i in 1..=rees.i_size() {
            p_entries.push(rees.entry(l, i));
        }
    }
    Ok((
        s,
        rees.group_presentation().clone(),
        g_letter_elts,
        g_elems,
        t_pres,
        t_letter_elts,
        t_elems,
        triple_elt,
        p_entries,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate, DEFAULT_NODE_BUDGET};
    use crate::words::parse_presentation;

    /// FIX-3: the five-element Brandt semigroup as an ideal extension of
    /// the trivial semigroup by M0[{1}; 2, 2; identity matrix].
    fn brandt() -> (Interner, ReesMatrix) {
        let mut it = Interner::new();
        let g_pres = parse_presentation("alphabet: a\nrule: a a = a\n", &mut it).unwrap();
        let g = enumerate(&g_pres, 4, DEFAULT_NODE_BUDGET).unwrap();
        let a = g_pres.alphabet()[0];
        let one = Word::single(a);
        let rees = ReesMatrix::new(
            g,
            g_pres,
            2,
            2,
            vec![Some(one.clone()), None, None, Some(one)],
            true,
        )
        .unwrap();
        (it, rees)
    }

    fn brandt_full() -> (
        Interner,
        ExtensionContext,
        GroupedPresentation,
        Presentation,
        Presentation,
    ) {
        let (mut it, rees) = brandt();
        let parts = rees_extension_input(&rees, &mut it).unwrap();
        let (s, g_pres, g_letter_elts, g_elems, t_pres, t_letter_elts, t_elems, triple_elt, p) =
            parts;
        let input = ExtensionInput {
            g_pres: &g_pres,
            g_letter_elts: &g_letter_elts,
            g_elems: &g_elems,
            t_pres: &t_pres,
            t_letter_elts: &t_letter_elts,
            t_elems: &t_elems,
            s: &s,
            i_size: 2,
            l_size: 2,
            p_entries: &p,
            triple_elt: &triple_elt,
        };
        let ctx = ExtensionContext::new(&input, &mut it).unwrap();
        let gp = build_ps(&ctx).unwrap();
        (it, ctx, gp, g_pres, t_pres)
    }

    fn brandt_context() -> (Interner, ExtensionContext, GroupedPresentation) {
        let (it, ctx, gp, _, _) = brandt_full();
        (it, ctx, gp)
    }

    #[test]
    fn rees_mult_brandt() {
        let (_, rees) = brandt();
        // p11 = 1: (1,1,1)(1,1,2) = (1,1,2)
        assert_eq!(
            rees.mult(ReesElt::Triple(1, 0, 1), ReesElt::Triple(1, 0, 2)),
            ReesElt::Triple(1, 0, 2)
        );
        // p21 = 0: (1,1,2)(1,1,1) = 0
        assert_eq!(
            rees.mult(ReesElt::Triple(1, 0, 2), ReesElt::Triple(1, 0, 1)),
            ReesElt::Zero
        );
        assert_eq!(rees.mult(ReesElt::Zero, ReesElt::Triple(2, 0, 1)), ReesElt::Zero);
    }

    #[test]
    fn build_ps_brandt_relations() {
        let (it, ctx, gp) = brandt_context();
        let ps = gp.presentation();
        // generators a, b2, c2, z
        assert_eq!(ps.alphabet().len(), 4);
        let b = ctx.b_letter(2).unwrap();
        let c = ctx.c_letter(2).unwrap();
        let a = ctx.a_letters()[0];
        let z = ctx.z_letters()[0];
        let has_rule = |lhs: Word, rhs: Word| find_rule(&gp, &lhs, &rhs).is_some();
        // R_e
        assert!(has_rule(
            Word::from_letters(vec![b, a]),
            Word::single(b)
        ));
        assert!(has_rule(
            Word::from_letters(vec![a, c]),
            Word::single(c)
        ));
        // (4.6) with p22 = identity: c2 b2 = a
        assert!(has_rule(Word::from_letters(vec![c, b]), Word::single(a)));
        // (4.13) and (4.12) with zero entries: b2 b2 = z, c2 c2 = z
        assert!(has_rule(Word::from_letters(vec![b, b]), Word::single(z)));
        assert!(has_rule(Word::from_letters(vec![c, c]), Word::single(z)));
        let _ = it;
    }

    #[test]
    fn ps_brandt_enumerates_to_five() {
        let (_, ctx, gp) = brandt_context();
        let s2 = enumerate(gp.presentation(), 10, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(s2.size(), 5);
        assert!(crate::oracle::tables_isomorphic(&s2, ctx.ambient()));
    }

    #[test]
    fn classify_brandt_words() {
        let (_, ctx, _) = brandt_context();
        let b = ctx.b_letter(2).unwrap();
        let c = ctx.c_letter(2).unwrap();
        let a = ctx.a_letters()[0];
        // b2 a c2 -> (2, 1, 2)
        assert_eq!(
            classify_word(&ctx, &Word::from_letters(vec![b, a, c])),
            Classified::Triple(2, 0, 2)
        );
        // b2 b2 -> the ideal element
        assert_eq!(
            classify_word(&ctx, &Word::from_letters(vec![b, b])),
            Classified::T(0)
        );
        // a -> (1, 1, 1)
        assert_eq!(
            classify_word(&ctx, &Word::single(a)),
            Classified::Triple(1, 0, 1)
        );
    }

    #[test]
    fn f_measure_properties() {
        let (_, ctx, _) = brandt_context();
        let b = ctx.b_letter(2).unwrap();
        let c = ctx.c_letter(2).unwrap();
        let a = ctx.a_letters()[0];
        let z = ctx.z_letters()[0];
        assert_eq!(
            f_measure(&Word::from_letters(vec![b, a, z, c])),
            FMeasure(2, 1)
        );
        assert_eq!(f_measure(&Word::from_letters(vec![z; 5])), FMeasure(0, 0));
        let w1 = Word::from_letters(vec![b, a]);
        let w2 = Word::from_letters(vec![z, c]);
        assert_eq!(f_measure(&w1.concat(&w2)), f_measure(&w1) + f_measure(&w2));
    }

    #[test]
    fn quasi_normal_descent() {
        let (_, ctx, gp) = brandt_context();
        let b = ctx.b_letter(2).unwrap();
        let a = ctx.a_letters()[0];
        let z = ctx.z_letters()[0];
        // b2 a b2 -> ... -> z through positive Gamma edges
        let w = Word::from_letters(vec![b, a, b]);
        let (path, nf) = to_quasi_normal(&gp, &w);
        assert!(path.len() >= 2);
        assert!(path.is_positive());
        assert_eq!(nf, Word::single(z));
        // already normal: empty path
        let qn = Word::from_letters(vec![b, a]);
        let (path, nf) = to_quasi_normal(&gp, &qn);
        assert!(path.is_empty());
        assert_eq!(nf, qn);
        // z a collapses inside Gamma_0
        let (path, nf) = to_quasi_normal(&gp, &Word::from_letters(vec![z, a]));
        assert_eq!(path.len(), 1);
        assert_eq!(nf, Word::single(z));
        assert!(gp.gamma0().admits_path(&path));
    }

    #[test]
    fn x1_family_brandt() {
        let (_, ctx, gp) = brandt_context();
        let mut finder = PathFinder::new(DEFAULT_NODE_BUDGET);
        let x1 = base_x1(&ctx, &gp, &mut finder).unwrap();
        assert_eq!(x1.base.len(), 3); // |A ∪ B ∪ C| * |Q| = 3
        assert!(validate_base(&x1.base, gp.presentation()).all_pass());
        let x1p = base_x1_prime(&ctx, &gp, &mut finder).unwrap();
        assert_eq!(x1p.base.len(), 3);
        assert!(validate_base(&x1p.base, gp.presentation()).all_pass());
    }

    #[test]
    fn xe_family_brandt() {
        let (_, ctx, gp) = brandt_context();
        let xe = base_xe(&ctx, &gp).unwrap();
        assert_eq!(xe.len(), 1);
        assert!(validate_base(&xe, gp.presentation()).all_pass());
    }

    #[test]
    fn push_through_brandt() {
        let (_, ctx, gp) = brandt_context();
        let ps = gp.presentation();
        let mut finder = PathFinder::new(DEFAULT_NODE_BUDGET);
        let x1 = base_x1(&ctx, &gp, &mut finder).unwrap();
        let x1p = base_x1_prime(&ctx, &gp, &mut finder).unwrap();
        let a = ctx.a_letters()[0];
        let z = ctx.z_letters()[0];
        // The Q-edge zz -> z, pushed through u = a.
        let q_rule = gp.rules_in(|f| matches!(f, Family::Q))[0];
        let p = Path::single(Edge::new(Word::empty(), q_rule, Sign::Plus, Word::empty()), ps);
        let out = push_through(
            &ctx,
            &gp,
            &mut finder,
            &x1,
            &x1p,
            &Word::single(a),
            &p,
            &Word::empty(),
        )
        .unwrap();
        assert!(out.u.is_empty() && out.v.is_empty());
        assert!(!out.certificate.is_empty());
        // Certificate replays from u·P·v to Q1 (u'·P'·v') Q2^{-1}.
        let base = combined_x1(&x1, &x1p);
        let mut replay = p.act(&Word::single(a), &Word::empty());
        for m in &out.certificate {
            replay = crate::homotopy::apply_move(ps, &replay, m, &base).unwrap();
        }
        let expected = out
            .q1
            .compose(&out.middle.act(&out.u, &out.v), ps)
            .unwrap()
            .compose(&out.q2.inverse(ps), ps)
            .unwrap();
        assert_eq!(replay, expected);
        // An ideal letter folds in for free.
        let out2 = push_through(
            &ctx,
            &gp,
            &mut finder,
            &x1,
            &x1p,
            &Word::single(z),
            &p,
            &Word::empty(),
        )
        .unwrap();
        assert!(out2.certificate.is_empty());
        assert_eq!(out2.middle.len(), 1);
    }

    #[test]
    fn assemble_brandt_base() {
        let (_, ctx, gp, g_pres, t_pres) = brandt_full();
        let mut finder = PathFinder::new(DEFAULT_NODE_BUDGET);
        let g_cert = crate::oracle::certify_complete(&g_pres).unwrap();
        let x_g = critical_pair_base(&g_pres, &g_cert).unwrap();
        let t_cert = crate::oracle::certify_complete(&t_pres).unwrap();
        let x_t = critical_pair_base(&t_pres, &t_cert).unwrap();
        let x = assemble_x(&ctx, &gp, &mut finder, &x_g, &x_t, 2_000_000).unwrap();
        assert!(validate_base(&x, gp.presentation()).all_pass());
        assert!(x.len() > 10);
    }

    #[test]
    fn dagger_readout_agrees_with_oracle() {
        let (_, ctx, _) = brandt_context();
        for w in crate::subgroup::words_up_to(&ctx.alphabet(), 6) {
            if !is_quasi_normal(&w) {
                continue;
            }
            let readout = classify_word(&ctx, &w);
            let oracle_verdict = ctx.classify_elt(ctx.eval(&w).unwrap());
            assert_eq!(readout, oracle_verdict, "dagger readout matches the oracle");
        }
    }

    #[test]
    fn requasify_glued_split() {
        // Splitting a word as w1 w2 w3 with quasi-normal outer parts: if
        // the peeled middle represents a non-ideal element, gluing its
        // quasi-normal form back in stays in B^1 A^* C^1.
        let (_, ctx, gp) = brandt_context();
        let alphabet = ctx.alphabet();
        let mut outers: Vec<Word> = vec![Word::empty()];
        outers.extend(
            crate::subgroup::words_up_to(&alphabet, 3)
                .into_iter()
                .filter(|w| is_quasi_normal(&w) && !w.contains_tag(Tag::Z)),
        );
        let mut middles: Vec<Word> = vec![Word::empty()];
        middles.extend(crate::subgroup::words_up_to(&alphabet, 2));
        let mut checked = 0usize;
        for w1 in &outers {
            for w3 in &outers {
                let alpha = match w1.last() {
                    Some(l) => Word::single(l),
                    None => Word::empty(),
                };
                let beta = match w3.first() {
                    Some(l) => Word::single(l),
                    None => Word::empty(),
                };
                let w1_stub = w1.slice(0, w1.len().saturating_sub(1));
                let w3_stub = if w3.is_empty() {
                    Word::empty()
                } else {
                    w3.slice(1, w3.len())
                };
                for w2 in &middles {
                    let middle = alpha.concat(w2).concat(&beta);
                    if middle.is_empty() {
                        continue;
                    }
                    if let Classified::T(_) = classify_word(&ctx, &middle) {
                        continue;
                    }
                    let (_, u) = to_quasi_normal(&gp, &middle);
                    let glued = w1_stub.concat(&u).concat(&w3_stub);
                    assert!(
                        is_quasi_normal(&glued) && !glued.contains_tag(Tag::Z),
                        "glued word stays in B^1 A^* C^1"
                    );
                    let whole = w1.concat(w2).concat(w3);
                    assert!(!matches!(
                        classify_word(&ctx, &whole),
                        Classified::T(_)
                    ));
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn adjoin_zero_counts() {
        let mut it = Interner::new();
        let p = parse_presentation("alphabet: a\nrule: a a a = a\n", &mut it).unwrap();
        let (p0, zero) = adjoin_zero(&p, &mut it);
        assert_eq!(p0.alphabet().len(), 2);
        assert_eq!(p0.rules().len(), 4); // 1 + 3
        let s = enumerate(&p0, 10, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(s.size(), 3);
        let _ = zero;
    }

    #[test]
    fn capstone_brandt_table() {
        let (mut it, rees) = brandt();
        let parts = rees_extension_input(&rees, &mut it).unwrap();
        let s = parts.0;
        let budgets = Budgets::default();
        let (p, base) = fdt_base_finite_regular(&s, &mut it, budgets).unwrap();
        assert!(validate_base(&base, &p).all_pass());
        let s2 = enumerate(&p, 16, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(s2.size(), 5);
        assert!(crate::oracle::tables_isomorphic(&s2, &s));
    }

    #[test]
    fn capstone_group_table() {
        let mut it = Interner::new();
        let p = parse_presentation("alphabet: a\nrule: a a a = a\n", &mut it).unwrap();
        let s = enumerate(&p, 10, DEFAULT_NODE_BUDGET).unwrap();
        let (tp, base) = fdt_base_finite_regular(&s, &mut it, Budgets::default()).unwrap();
        assert_eq!(tp.rules().len(), 4);
        assert!(validate_base(&base, &tp).all_pass());
    }

    #[test]
    fn capstone_t2_table() {
        let mut it = Interner::new();
        let s = crate::oracle::from_table(
            "elements: id sw c1 c2\nid sw c1 c2\nsw id c1 c2\nc1 c2 c1 c2\nc2 c1 c1 c2\n",
            &mut it,
        )
        .unwrap();
        let (p, base) = fdt_base_finite_regular(&s, &mut it, Budgets::default()).unwrap();
        assert!(validate_base(&base, &p).all_pass());
        let s2 = enumerate(&p, 16, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(s2.size(), 4);
        assert!(crate::oracle::tables_isomorphic(&s2, &s));
    }
}
