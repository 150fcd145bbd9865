mod common;

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::SeedableRng;

use common::brute::{has_small_model, shapes, FormulaGen, Labelled};
use xsat::logic::{check_model, parse_formula, satisfiable, SolveOptions, SolveOutcome};

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn shape_counts_are_catalan() {
    let counts: Vec<usize> = (1..=5).map(|n| shapes(n).len()).collect();
    assert_eq!(counts, [1, 2, 5, 14, 42]);
}

#[test]
fn brute_force_finds_small_models() {
    let names = strings(&["a", "b"]);
    let props = strings(&["_p"]);
    let attrs = strings(&["x"]);
    for (src, sat) in [
        ("a & <1>b", true),
        ("a & b", false),
        ("<-1>(a & _p) & <2>(b & <x>T)", true),
        ("let $X = <1>$X in $X", false),
        ("a & <1>(<2>(<2>(<2>b)))", false),
    ] {
        let f = parse_formula(src).unwrap();
        assert_eq!(has_small_model(&f, 4, &names, &props, &attrs), sat, "{src}");
    }
}

#[test]
fn solver_agrees_with_enumeration() {
    let mut rng = StdRng::seed_from_u64(5);
    let mut gen = FormulaGen::new();
    let names = strings(&["a", "b"]);
    let props = strings(&["_p"]);
    let attrs = strings(&["x"]);
    let (mut sat, mut unsat) = (0, 0);
    for _ in 0..300 {
        let f = gen.formula(&mut rng, 4);
        let outcome = satisfiable(&f, &SolveOptions { verify: false, ..SolveOptions::default() })
            .unwrap_or_else(|e| panic!("{f}: {e}"));
        match outcome {
            SolveOutcome::Sat { witness, .. } => {
                sat += 1;
                assert!(check_model(&f, &witness.tree, witness.target), "witness of {f} fails the model checker");
                let l = Labelled::from_binary(&witness.tree);
                let holds = l.eval(&f, &mut HashMap::new());
                assert!(holds >> witness.target & 1 == 1, "witness of {f} fails enumeration semantics");
                if witness.tree.len() > 4 {
                    continue;
                }
                assert!(has_small_model(&f, 4, &names, &props, &attrs), "{f}");
            }
            SolveOutcome::Unsat { .. } => {
                unsat += 1;
                assert!(!has_small_model(&f, 4, &names, &props, &attrs), "solver misses a model of {f}");
            }
        }
    }
    println!("{sat} satisfiable, {unsat} unsatisfiable");
    assert!(unsat >= 15 && sat >= 15, "degenerate corpus: {sat} sat, {unsat} unsat");
}
