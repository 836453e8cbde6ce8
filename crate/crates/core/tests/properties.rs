//! Property tests for the word and graph layers: serialization
//! round-trips, occurrence inversion, and the two-sided action laws.

use proptest::prelude::*;

use squier::graph::{edges_from, is_parallel, Edge, Path, SubgraphFilter};
use squier::words::{
    apply_occurrence, parse_presentation, rewrite_occurrences, serialize_presentation, Interner,
    Occurrence, Presentation, Word,
};

fn two_letter_presentation() -> (Interner, Presentation) {
    let mut it = Interner::new();
    let p = parse_presentation("alphabet: a b\nrule: a a a a a = a\nrule: a b = b a\n", &mut it)
        .unwrap();
    (it, p)
}

proptest! {
    #[test]
    fn occurrence_inversion(ix in prop::collection::vec(0usize..2, 1..10)) {
        let (_, p) = two_letter_presentation();
        let letters = p.alphabet().to_vec();
        let w = Word::from_letters(ix.into_iter().map(|i| letters[i]).collect());
        for occ in rewrite_occurrences(&w, &p) {
            let v = apply_occurrence(&occ, &p);
            let inverse = Occurrence {
                prefix: occ.prefix.clone(),
                rule_id: occ.rule_id,
                sign: occ.sign.flip(),
                suffix: occ.suffix.clone(),
            };
            prop_assert!(rewrite_occurrences(&v, &p).contains(&inverse));
            prop_assert_eq!(apply_occurrence(&inverse, &p), w.clone());
        }
    }

    #[test]
    fn serialization_roundtrip(
        n_letters in 1usize..5,
        rule_shape in prop::collection::vec((1usize..6, 1usize..6), 0..4),
    ) {
        // Build a presentation with materialised letters and rules, then
        // check parse ∘ serialize is the identity.
        let mut it = Interner::new();
        let letters: Vec<_> = (0..n_letters)
            .map(|k| it.intern(&format!("g{k}"), squier::words::Tag::Plain))
            .collect();
        let mk = |len: usize, seed: usize| {
            Word::from_letters((0..len).map(|i| letters[(seed + i) % letters.len()]).collect())
        };
        let rules: Vec<_> = rule_shape
            .iter()
            .enumerate()
            .map(|(k, &(l, r))| (mk(l, k), mk(r, k + 1)))
            .collect();
        let p = Presentation::new(letters, rules).unwrap();
        let text = serialize_presentation(&p, &it);
        let p2 = parse_presentation(&text, &mut it).unwrap();
        prop_assert_eq!(&p, &p2);
        prop_assert_eq!(text, serialize_presentation(&p2, &it));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_laws(
        base_ix in prop::collection::vec(0usize..2, 5..12),
        x_ix in prop::collection::vec(0usize..2, 0..4),
        y_ix in prop::collection::vec(0usize..2, 0..4),
    ) {
        let (_, p) = two_letter_presentation();
        let letters = p.alphabet().to_vec();
        let to_word = |ix: &[usize]| Word::from_letters(ix.iter().map(|&i| letters[i]).collect());
        let w = to_word(&base_ix);
        let x = to_word(&x_ix);
        let y = to_word(&y_ix);

        // Paths: take up to two chained edges from w.
        let mut path = Path::empty(w.clone());
        for _ in 0..2 {
            let from = path.tau(&p);
            let Some(edge) = edges_from(&from, &p, &SubgraphFilter::all()).into_iter().next()
            else {
                break;
            };
            path = path.compose(&Path::single(edge, &p), &p).unwrap();
        }

        // Endpoints of the two-sided action.
        let acted = path.act(&x, &y);
        prop_assert_eq!(acted.iota().clone(), x.concat(path.iota()).concat(&y));
        prop_assert_eq!(acted.tau(&p), x.concat(&path.tau(&p)).concat(&y));

        // The action commutes with inversion and composition.
        prop_assert_eq!(acted.inverse(&p), path.inverse(&p).act(&x, &y));
        let halves = path.edges().len() / 2;
        if halves > 0 {
            let front = Path::from_edges(path.edges()[..halves].to_vec(), &p).unwrap();
            let back = Path::from_edges(path.edges()[halves..].to_vec(), &p).unwrap();
            let composed_then_acted = front.compose(&back, &p).unwrap().act(&x, &y);
            let acted_then_composed = front.act(&x, &y).compose(&back.act(&x, &y), &p).unwrap();
            prop_assert_eq!(composed_then_acted, acted_then_composed);
        }

        // Positivity: a positive path inverts to a negative one.
        if !path.is_empty() && path.is_positive() {
            prop_assert!(path.inverse(&p).is_negative());
        }
        prop_assert!(is_parallel(&path, &path, &p));

    }
}
