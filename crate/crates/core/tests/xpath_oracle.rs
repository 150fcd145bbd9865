mod common;

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use xsat::logic::{check_cycle_free, eval_nodes, Formula, START_PROP};
use xsat::tree::{to_binary, Document};
use xsat::xpath::{compile_exists, compile_select, desugar, eval_oracle, DocumentIndex, Query};

fn universe() -> Vec<String> {
    vec!["x".to_string()]
}

fn compiled_selection(q: &Query, d: &Document, context: usize) -> BTreeSet<usize> {
    let f = compile_select(q, &Formula::Start).unwrap().resolve_attr_complements(&universe());
    check_cycle_free(&f).unwrap_or_else(|e| panic!("{q}: {e}"));
    let mut t = to_binary(d);
    t.mark(context, START_PROP);
    eval_nodes(&f, &t).into_iter().collect()
}

#[test]
fn selection_agrees_with_the_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..500 {
        let q = common::random_query(&mut rng);
        let size = rng.gen_range(1..=10);
        let d = Document::new(common::random_element(&mut rng, size, &common::NAMES, &["x"]));
        let c = rng.gen_range(0..size);
        let expected = eval_oracle(&q, &d, &BTreeSet::from([c]));
        assert_eq!(compiled_selection(&q, &d, c), expected, "query {q} on {d:?} from {c}");
    }
}

#[test]
fn existence_agrees_with_the_oracle() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 300 {
        let q = common::random_query(&mut rng);
        if matches!(q, Query::Intersection(..)) {
            continue;
        }
        let size = rng.gen_range(1..=8);
        let d = Document::new(common::random_element(&mut rng, size, &common::NAMES, &["x"]));
        let f = compile_exists(&q, &Formula::True).unwrap().resolve_attr_complements(&universe());
        let holds: BTreeSet<usize> = eval_nodes(&f, &to_binary(&d)).into_iter().collect();
        for n in 0..size {
            // The document node counts as a result here.
            let selects = !DocumentIndex::from_forest(std::slice::from_ref(&d.root))
                .eval(&q, &BTreeSet::from([n]))
                .is_empty();
            assert_eq!(holds.contains(&n), selects, "query {q} on {d:?} at {n}");
        }
        checked += 1;
    }
}

#[test]
fn rewriting_preserves_selection() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..500 {
        let q = common::random_sugared_query(&mut rng);
        let plain = desugar(&q).unwrap();
        assert!(!plain.has_sugar());
        let size = rng.gen_range(1..=10);
        let d = Document::new(common::random_element(&mut rng, size, &common::NAMES, &["x"]));
        let ctx = BTreeSet::from([0]);
        assert_eq!(eval_oracle(&q, &d, &ctx), eval_oracle(&plain, &d, &ctx), "{q} vs {plain} on {d:?}");
        assert_eq!(compiled_selection(&q, &d, 0), eval_oracle(&q, &d, &ctx), "{q} on {d:?}");
    }
}
