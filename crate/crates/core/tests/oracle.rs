//! The solver against a label-set oracle written independently in test code.

mod common;

use std::sync::Arc;

use relmat::Vocabulary;

#[test]
fn solver_matches_oracle_on_random_and_generated_grids() {
    let vocab = Arc::new(Vocabulary::standard());
    let cases = common::oracle_cases(&vocab, 1000, 0x0a11);
    let failures: Vec<String> = cases
        .iter()
        .enumerate()
        .filter_map(|(i, (g, c))| common::agrees(&vocab, g, c).err().map(|e| format!("case {i}: {e}")))
        .collect();
    assert!(failures.is_empty(), "{} disagreements, first: {}", failures.len(), failures[0]);
}

#[test]
fn oracle_finds_rules_at_all() {
    // Guards against a vacuous comparison: random grids must yield rules.
    let vocab = Arc::new(Vocabulary::standard());
    let with_rules = (0..200u64)
        .filter(|&s| !common::Oracle::new(&vocab, &common::random_grid(&vocab, s).0).rules.is_empty())
        .count();
    assert!(with_rules > 50, "only {with_rules} of 200 grids had rules");
}

#[test]
fn latin_square_fixture_rules() {
    let p = relmat::fixtures::fixture(relmat::fixtures::Fixture::LatinSquare);
    let oracle = common::Oracle::new(&p.vocab, &p.grid);
    assert!(oracle.rules.contains(&"all shape notsymdiff row".to_string()));
    assert!(oracle.accepts(&p.candidates[3]));
    assert!(!oracle.accepts(&p.candidates[0]));
}
