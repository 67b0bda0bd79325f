mod common;

use common::*;
use kxp::domain::{rule_to_clause, KnowledgeBase, Literal, Polarity};
use kxp::miner::{eclat_mine, enumerate_min_rules, extract_all, ExtractionLimit};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn readings(rules: &[kxp::domain::Rule]) -> Vec<(Vec<Literal>, Literal)> {
    rules.iter().map(|r| (r.antecedent().to_vec(), r.consequent())).collect()
}

fn setup(seed: u64) -> (kxp::ingest::Dataset, ExtractionLimit, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(&mut rng, 2..=6, 2..=4);
    let rows = rng.random_range(0..=30);
    let ds = random_dataset(&mut rng, &space, rows);
    let limit = ExtractionLimit {
        max_size: rng.random_range(1..=4),
        min_support: rng.random_range(1..=2),
        ..Default::default()
    };
    (ds, limit, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn single_target_matches_exhaustive_lattice(seed in any::<u64>()) {
        let (ds, limit, mut rng) = setup(seed);
        let space = ds.space();
        let f = rng.random_range(0..space.len());
        let target = Literal::eq(space, f, rng.random_range(0..space.domain_size(f))).unwrap();
        // block a few clauses found for some other target
        let mut blocked = KnowledgeBase::new();
        let other = Literal::eq(space, (f + 1) % space.len(), 0).unwrap();
        for r in brute_force_rules(&ds, other, &KnowledgeBase::new(), &limit).iter().take(3) {
            blocked.insert(rule_to_clause(space, r), None);
        }
        let got = enumerate_min_rules(&ds, target, &blocked, &limit).unwrap();
        let want = brute_force_rules(&ds, target, &blocked, &limit);
        prop_assert_eq!(readings(&got), readings(&want));
    }

    #[test]
    fn extraction_matches_exhaustive_lattice(seed in any::<u64>()) {
        let (ds, limit, _) = setup(seed);
        let got = extract_all(&ds, &limit, false).unwrap();
        let want = brute_force_extract(&ds, &limit);
        prop_assert_eq!(readings(&got.rules), readings(&want));
        let par = extract_all(&ds, &limit, true).unwrap();
        prop_assert_eq!(readings(&par.rules), readings(&got.rules));
    }

    #[test]
    fn extracted_rules_are_sound_minimal_unique_and_ordered(seed in any::<u64>()) {
        let (ds, limit, _) = setup(seed);
        let space = ds.space();
        let ex = extract_all(&ds, &limit, false).unwrap();
        let mut clauses = std::collections::HashSet::new();
        for r in &ex.rules {
            let c = rule_to_clause(space, r);
            prop_assert!(ds.rows().iter().all(|row| c.satisfied_by(row)));
            prop_assert!(clauses.insert(c));
            prop_assert!(r.stats.support >= limit.min_support);
            prop_assert!(r.size() <= limit.max_size);
            for drop in 0..r.size() {
                let ante: Vec<Literal> = r.antecedent().iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, l)| *l).collect();
                let violated = ds.rows().iter().any(|row| ante.iter().all(|l| l.satisfied_by(row)) && !r.consequent().satisfied_by(row));
                let support = ds.rows().iter().filter(|row| ante.iter().all(|l| l.satisfied_by(row)) && r.consequent().satisfied_by(row)).count();
                prop_assert!(violated || support < limit.min_support);
            }
        }
        for w in ex.rules.windows(2) {
            if w[0].consequent() == w[1].consequent() {
                prop_assert!(w[0].size() <= w[1].size());
            }
        }
        prop_assert_eq!(ex.knowledge.len(), ex.rules.len());
    }

    #[test]
    fn eclat_rules_are_exact_and_equality_only(seed in any::<u64>()) {
        let (ds, limit, _) = setup(seed);
        let rules = eclat_mine(&ds, limit.min_support, limit.max_size).unwrap();
        for r in &rules {
            prop_assert!(r.antecedent().iter().all(|l| l.polarity == Polarity::Equals));
            prop_assert!(ds.rows().iter().all(|row| !r.falsified_by(row)));
            let support = ds.rows().iter().filter(|row| r.antecedent_holds(row) && r.consequent().satisfied_by(row)).count();
            prop_assert_eq!(support, r.stats.support);
            prop_assert!(support >= limit.min_support);
        }
    }
}

#[test]
fn binary_four_feature_dataset() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let space = kxp::domain::FeatureSpace::new(
        (0..4).map(|i| kxp::domain::Feature::new(format!("b{i}"), ["0", "1"])).collect(),
    )
    .unwrap();
    for _ in 0..20 {
        let ds = random_dataset(&mut rng, &space, 12);
        let limit = ExtractionLimit::default();
        for f in 0..4 {
            for v in 0..2 {
                let t = Literal::eq(&space, f, v).unwrap();
                let got = enumerate_min_rules(&ds, t, &KnowledgeBase::new(), &limit).unwrap();
                assert_eq!(readings(&got), readings(&brute_force_rules(&ds, t, &KnowledgeBase::new(), &limit)));
            }
        }
    }
}

#[test]
fn time_budget_truncates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let space = random_space(&mut rng, 8..=8, 4..=4);
    let ds = random_dataset(&mut rng, &space, 200);
    let limit = ExtractionLimit {
        time_budget: Some(std::time::Duration::ZERO),
        ..Default::default()
    };
    let ex = extract_all(&ds, &limit, false).unwrap();
    assert!(ex.truncated);
}
