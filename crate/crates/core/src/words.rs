//! Alphabets, words, rules and semigroup presentations.
//!
//! Letters are interned `(name, tag)` pairs; a word is a sequence of interned
//! letters, so equality and subword search are integer comparisons. The tag
//! namespaces (`A`, `B`, `C`, `Z`) are used by the ideal-extension machinery
//! to classify generators; everything else uses `Plain`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::oracle::{EvalError, FiniteSemigroup};

/// Generator namespace used by the ideal-extension presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Plain,
    A,
    B,
    C,
    Z,
}

/// An interned generator symbol. Two letters are equal iff they have the
/// same interned id and the same tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    sym: u32,
    tag: Tag,
}

impl Letter {
    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn sym(&self) -> u32 {
        self.sym
    }
}

/// Session-wide letter interner. Interning is append-only, so letter order
/// (and with it every tie-break downstream) is fixed by construction order.
#[derive(Debug, Default, Clone)]
pub struct Interner {
    names: Vec<(String, Tag)>,
    index: BTreeMap<(String, Tag), u32>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str, tag: Tag) -> Letter {
        if let Some(&sym) = self.index.get(&(name.to_string(), tag)) {
            return Letter { sym, tag };
        }
        let sym = self.names.len() as u32;
        self.names.push((name.to_string(), tag));
        self.index.insert((name.to_string(), tag), sym);
        Letter { sym, tag }
    }

    /// Interns `name`, appending `.2`, `.3`, ... if a letter with that name
    /// (under any tag) is already in `taken`. Returns the letter and the
    /// name actually used.
    pub fn intern_fresh(&mut self, name: &str, tag: Tag, taken: &BTreeSet<String>) -> (Letter, String) {
        if !taken.contains(name) {
            return (self.intern(name, tag), name.to_string());
        }
        let mut k = 2usize;
        loop {
            let candidate = format!("{name}.{k}");
            if !taken.contains(&candidate) {
                return (self.intern(&candidate, tag), candidate);
            }
            k += 1;
        }
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.names[letter.sym as usize].0
    }

    pub fn lookup(&self, name: &str, tag: Tag) -> Option<Letter> {
        self.index
            .get(&(name.to_string(), tag))
            .map(|&sym| Letter { sym, tag })
    }
}

/// A word over an alphabet; the empty word is representable but most
/// call sites require non-emptiness (free semigroup, not free monoid).
///
/// Ordering is shortlex: by length first, then letter-by-letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn single(letter: Letter) -> Self {
        Word(vec![letter])
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

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// True if `pat` occurs at position `pos`.
    pub fn matches_at(&self, pos: usize, pat: &Word) -> bool {
        pos + pat.len() <= self.len() && self.0[pos..pos + pat.len()] == pat.0[..]
    }

    /// Count of letters whose tag is in `tags`.
    pub fn count_tags(&self, tags: &[Tag]) -> usize {
        self.0.iter().filter(|l| tags.contains(&l.tag)).count()
    }

    pub fn contains_tag(&self, tag: Tag) -> bool {
        self.0.iter().any(|l| l.tag == tag)
    }

    pub fn contains_letter(&self, letter: Letter) -> bool {
        self.0.contains(&letter)
    }

    pub fn display(&self, interner: &Interner) -> String {
        if self.is_empty() {
            return "_".to_string();
        }
        let parts: Vec<&str> = self.0.iter().map(|&l| interner.name(l)).collect();
        parts.join(" ")
    }

    /// Single-token rendering with `.` between letters, for contexts that
    /// cannot contain spaces (element names, matrix entries).
    pub fn display_compact(&self, interner: &Interner) -> String {
        let parts: Vec<&str> = self.0.iter().map(|&l| interner.name(l)).collect();
        parts.join(".")
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Orientation of a rule application: `Plus` rewrites lhs to rhs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

/// A rewriting rule `lhs = rhs` with both sides non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: usize,
    pub lhs: Word,
    pub rhs: Word,
}

impl Rule {
    /// The side consumed when applying the rule with the given sign.
    pub fn side(&self, sign: Sign) -> &Word {
        match sign {
            Sign::Plus => &self.lhs,
            Sign::Minus => &self.rhs,
        }
    }
}

/// A semigroup presentation: an ordered alphabet and an ordered rule list
/// with ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    alphabet: Vec<Letter>,
    rules: Vec<Rule>,
    letter_set: BTreeSet<Letter>,
}

impl Presentation {
    pub fn new(alphabet: Vec<Letter>, rules: Vec<(Word, Word)>) -> Result<Self, PresentationError> {
        let letter_set: BTreeSet<Letter> = alphabet.iter().copied().collect();
        if letter_set.len() != alphabet.len() {
            return Err(PresentationError::DuplicateLetter);
        }
        let mut out = Vec::with_capacity(rules.len());
        for (id, (lhs, rhs)) in rules.into_iter().enumerate() {
            if lhs.is_empty() || rhs.is_empty() {
                return Err(PresentationError::EmptyRuleSide { rule: id });
            }
            for l in lhs.letters().iter().chain(rhs.letters()) {
                if !letter_set.contains(l) {
                    return Err(PresentationError::UndeclaredLetter { rule: id });
                }
            }
            out.push(Rule { id, lhs, rhs });
        }
        Ok(Presentation {
            alphabet,
            rules: out,
            letter_set,
        })
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &Rule {
        &self.rules[id]
    }

    pub fn contains_letter(&self, letter: Letter) -> bool {
        self.letter_set.contains(&letter)
    }

    pub fn contains_word(&self, w: &Word) -> bool {
        w.letters().iter().all(|l| self.letter_set.contains(l))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PresentationError {
    DuplicateLetter,
    EmptyRuleSide { rule: usize },
    UndeclaredLetter { rule: usize },
}

impl fmt::Display for PresentationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresentationError::DuplicateLetter => write!(f, "duplicate letter in alphabet"),
            PresentationError::EmptyRuleSide { rule } => {
                write!(f, "rule {rule} has an empty side")
            }
            PresentationError::UndeclaredLetter { rule } => {
                write!(f, "rule {rule} uses a letter not in the alphabet")
            }
        }
    }
}

impl core::error::Error for PresentationError {}

/// One way of factoring a word as `prefix · rule-side · suffix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub prefix: Word,
    pub rule_id: usize,
    pub sign: Sign,
    pub suffix: Word,
}

/// Enumerates every factorisation `w ≡ w1 · r_sign · w2` over all rules and
/// both signs, in position-major, then rule-id, then `+1`-before-`-1` order.
pub fn rewrite_occurrences(w: &Word, p: &Presentation) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for pos in 0..w.len() {
        for rule in p.rules() {
            for sign in [Sign::Plus, Sign::Minus] {
                let pat = rule.side(sign);
                if w.matches_at(pos, pat) {
                    out.push(Occurrence {
                        prefix: w.slice(0, pos),
                        rule_id: rule.id,
                        sign,
                        suffix: w.slice(pos + pat.len(), w.len()),
                    });
                }
            }
        }
    }
    out
}

/// Rewrites `w` along one occurrence, producing the word one step away.
pub fn apply_occurrence(occ: &Occurrence, p: &Presentation) -> Word {
    let rule = p.rule(occ.rule_id);
    occ.prefix
        .concat(rule.side(occ.sign.flip()))
        .concat(&occ.suffix)
}

/// True iff the element of the oracle semigroup represented by `w` lies in
/// `target` (a set of element indices).
pub fn lang_membership(
    w: &Word,
    target: &BTreeSet<usize>,
    oracle: &FiniteSemigroup,
) -> Result<bool, EvalError> {
    let elt = oracle.eval(w)?;
    Ok(target.contains(&elt))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax { line: usize, message: String },
    UndeclaredLetter { line: usize, name: String },
    EmptyRuleSide { line: usize },
    DuplicateLetter { line: usize, name: String },
    MissingAlphabet,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            ParseError::UndeclaredLetter { line, name } => {
                write!(f, "line {line}: letter `{name}` used but not declared")
            }
            ParseError::EmptyRuleSide { line } => write!(f, "line {line}: empty rule side"),
            ParseError::DuplicateLetter { line, name } => {
                write!(f, "line {line}: letter `{name}` declared twice")
            }
            ParseError::MissingAlphabet => write!(f, "no `alphabet:` line found"),
        }
    }
}

impl core::error::Error for ParseError {}

/// Parses the `.sgp` presentation format:
///
/// ```text
/// # comment
/// alphabet: a b
/// rule: a a a = a
/// ```
///
/// Letters are declared in order; rules are numbered in file order. Parsed
/// letters carry the `Plain` tag.
pub fn parse_presentation(text: &str, interner: &mut Interner) -> Result<Presentation, ParseError> {
    parse_presentation_tagged(text, interner, Tag::Plain)
}

/// As [`parse_presentation`] but interning letters under `tag`.
pub fn parse_presentation_tagged(
    text: &str,
    interner: &mut Interner,
    tag: Tag,
) -> Result<Presentation, ParseError> {
    let mut alphabet: Vec<Letter> = Vec::new();
    let mut by_name: BTreeMap<String, Letter> = BTreeMap::new();
    let mut rules: Vec<(Word, Word)> = Vec::new();
    let mut seen_alphabet = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("alphabet:") {
            if seen_alphabet {
                return Err(ParseError::Syntax {
                    line: line_no,
                    message: "second `alphabet:` line".to_string(),
                });
            }
            seen_alphabet = true;
            for name in rest.split_whitespace() {
                if name == "=" {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        message: "`=` is reserved".to_string(),
                    });
                }
                if by_name.contains_key(name) {
                    return Err(ParseError::DuplicateLetter {
                        line: line_no,
                        name: name.to_string(),
                    });
                }
                let letter = interner.intern(name, tag);
                by_name.insert(name.to_string(), letter);
                alphabet.push(letter);
            }
        } else if let Some(rest) = line.strip_prefix("rule:") {
            if !seen_alphabet {
                return Err(ParseError::Syntax {
                    line: line_no,
                    message: "rule before alphabet".to_string(),
                });
            }
            let mut sides = rest.splitn(2, '=');
            let lhs_text = sides.next().unwrap_or("");
            let rhs_text = sides.next().ok_or(ParseError::Syntax {
                line: line_no,
                message: "rule has no `=`".to_string(),
            })?;
            let parse_side = |side: &str| -> Result<Word, ParseError> {
                let mut w = Word::empty();
                for name in side.split_whitespace() {
                    let letter = by_name.get(name).ok_or(ParseError::UndeclaredLetter {
                        line: line_no,
                        name: name.to_string(),
                    })?;
                    w.push(*letter);
                }
                if w.is_empty() {
                    return Err(ParseError::EmptyRuleSide { line: line_no });
                }
                Ok(w)
            };
            let lhs = parse_side(lhs_text)?;
            let rhs = parse_side(rhs_text)?;
            rules.push((lhs, rhs));
        } else {
            return Err(ParseError::Syntax {
                line: line_no,
                message: format!("unrecognised line `{line}`"),
            });
        }
    }
    if !seen_alphabet {
        return Err(ParseError::MissingAlphabet);
    }
    Presentation::new(alphabet, rules).map_err(|e| ParseError::Syntax {
        line: 0,
        message: e.to_string(),
    })
}

/// Canonical `.sgp` serialization: one space between tokens, newline
/// terminated, rules in id order. `parse ∘ serialize` is the identity.
pub fn serialize_presentation(p: &Presentation, interner: &Interner) -> String {
    let mut out = String::new();
    out.push_str("alphabet:");
    for &l in p.alphabet() {
        out.push(' ');
        out.push_str(interner.name(l));
    }
    out.push('\n');
    for rule in p.rules() {
        out.push_str("rule: ");
        out.push_str(&rule.lhs.display(interner));
        out.push_str(" = ");
        out.push_str(&rule.rhs.display(interner));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix1(interner: &mut Interner) -> Presentation {
        parse_presentation("alphabet: a\nrule: a a a = a\n", interner).unwrap()
    }

    fn fix2(interner: &mut Interner) -> Presentation {
        parse_presentation("alphabet: a\nrule: a a a a a = a\n", interner).unwrap()
    }

    fn pow(letter: Letter, n: usize) -> Word {
        Word::from_letters(alloc::vec![letter; n])
    }

    #[test]
    fn parse_fix1() {
        let mut it = Interner::new();
        let p = fix1(&mut it);
        assert_eq!(p.alphabet().len(), 1);
        assert_eq!(p.rules().len(), 1);
        assert_eq!(p.rule(0).lhs.len(), 3);
        assert_eq!(p.rule(0).rhs.len(), 1);
    }

    #[test]
    fn parse_fix2() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        assert_eq!(p.rule(0).lhs.len(), 5);
    }

    #[test]
    fn parse_rejects_empty_side() {
        let mut it = Interner::new();
        let err = parse_presentation("alphabet: a\nrule: = a\n", &mut it).unwrap_err();
        assert!(matches!(err, ParseError::EmptyRuleSide { .. }));
    }

    #[test]
    fn parse_rejects_undeclared_letter() {
        let mut it = Interner::new();
        let err = parse_presentation("alphabet: a\nrule: a b = a\n", &mut it).unwrap_err();
        assert!(matches!(err, ParseError::UndeclaredLetter { .. }));
    }

    #[test]
    fn roundtrip_is_identity() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let text = serialize_presentation(&p, &it);
        let p2 = parse_presentation(&text, &mut it).unwrap();
        assert_eq!(p, p2);
        assert_eq!(text, serialize_presentation(&p2, &it));
    }

    #[test]
    fn occurrences_fix1_aaa() {
        // One +1 occurrence of the whole word, three -1 occurrences of `a`.
        let mut it = Interner::new();
        let p = fix1(&mut it);
        let a = p.alphabet()[0];
        let occs = rewrite_occurrences(&pow(a, 3), &p);
        assert_eq!(occs.len(), 4);
        assert_eq!(occs[0].sign, Sign::Plus);
        assert!(occs[0].prefix.is_empty() && occs[0].suffix.is_empty());
        assert_eq!(occs.iter().filter(|o| o.sign == Sign::Minus).count(), 3);
    }

    #[test]
    fn occurrences_fix1_single_letter() {
        let mut it = Interner::new();
        let p = fix1(&mut it);
        let a = p.alphabet()[0];
        let occs = rewrite_occurrences(&Word::single(a), &p);
        assert_eq!(occs.len(), 1);
        assert_eq!(occs[0].sign, Sign::Minus);
        assert!(occs[0].prefix.is_empty() && occs[0].suffix.is_empty());
    }

    #[test]
    fn occurrences_fix2_a4() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        let occs = rewrite_occurrences(&pow(a, 4), &p);
        assert!(occs.iter().all(|o| o.sign == Sign::Minus));
        assert_eq!(occs.len(), 4);
    }

    #[test]
    fn applying_occurrence_inverts() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let a = p.alphabet()[0];
        for w in [pow(a, 5), pow(a, 6), pow(a, 2)] {
            for occ in rewrite_occurrences(&w, &p) {
                let v = apply_occurrence(&occ, &p);
                let back = rewrite_occurrences(&v, &p);
                let inverse = Occurrence {
                    prefix: occ.prefix.clone(),
                    rule_id: occ.rule_id,
                    sign: occ.sign.flip(),
                    suffix: occ.suffix.clone(),
                };
                assert!(back.contains(&inverse), "inverse occurrence not found");
                assert_eq!(apply_occurrence(&inverse, &p), w);
            }
        }
    }

    #[test]
    fn lang_membership_fix2() {
        let mut it = Interner::new();
        let p = fix2(&mut it);
        let s = crate::oracle::enumerate(&p, 10, crate::oracle::DEFAULT_NODE_BUDGET).unwrap();
        let a = p.alphabet()[0];
        let a2 = s.eval(&pow(a, 2)).unwrap();
        let a4 = s.eval(&pow(a, 4)).unwrap();
        let g: BTreeSet<usize> = BTreeSet::from([a2, a4]);
        assert!(lang_membership(&pow(a, 2), &g, &s).unwrap());
        assert!(!lang_membership(&pow(a, 1), &g, &s).unwrap());
        // a^6 = a^2 in the oracle
        assert!(lang_membership(&pow(a, 6), &g, &s).unwrap());
        // letters outside the oracle's alphabet are rejected
        let b = it.intern("b", Tag::Plain);
        assert!(lang_membership(&Word::single(b), &g, &s).is_err());
    }

    #[test]
    fn word_order_is_shortlex() {
        let mut it = Interner::new();
        let a = it.intern("a", Tag::Plain);
        let b = it.intern("b", Tag::Plain);
        assert!(Word::single(b) < Word::from_letters(alloc::vec![a, a]));
        assert!(Word::single(a) < Word::single(b));
    }
}
