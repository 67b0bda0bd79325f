//! Random generators and exhaustive reference implementations shared by the
//! integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use kxp::domain::{
    all_features, complement, rule_to_clause, Clause, Feature, FeatureSet, FeatureSpace, Instance, Kind,
    KnowledgeBase, Literal, Polarity, Rule, RuleStats,
};
use kxp::ingest::Dataset;
use kxp::miner::{candidate_literals, ExtractionLimit};
use kxp::models::{BoostedEnsemble, DecisionList, ListRule, Model, Node};
use kxp::oracle::{entails_bruteforce, EntailmentQuery, DEFAULT_BRUTEFORCE_BOUND};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn random_space<R: Rng>(rng: &mut R, features: std::ops::RangeInclusive<usize>, domain: std::ops::RangeInclusive<usize>) -> FeatureSpace {
    let n = rng.random_range(features);
    FeatureSpace::new(
        (0..n)
            .map(|i| {
                let d = rng.random_range(domain.clone());
                Feature::new(format!("x{i}"), (0..d).map(|v| format!("v{v}")))
            })
            .collect(),
    )
    .unwrap()
}

pub fn random_instance<R: Rng>(rng: &mut R, space: &FeatureSpace) -> Instance {
    Instance::new((0..space.len()).map(|f| rng.random_range(0..space.domain_size(f))).collect())
}

pub fn random_literal<R: Rng>(rng: &mut R, space: &FeatureSpace) -> Literal {
    let f = rng.random_range(0..space.len());
    let v = rng.random_range(0..space.domain_size(f));
    let pol = if rng.random_bool(0.7) { Polarity::Equals } else { Polarity::NotEquals };
    Literal::new(space, f, pol, v).unwrap()
}

fn classes(k: usize) -> Vec<String> {
    (0..k).map(|c| format!("c{c}")).collect()
}

pub fn random_list<R: Rng>(rng: &mut R, space: &FeatureSpace, max_rules: usize, num_classes: usize) -> Model {
    let rules = (0..rng.random_range(0..=max_rules))
        .map(|_| ListRule {
            antecedent: (0..rng.random_range(1..=3)).map(|_| random_literal(rng, space)).collect(),
            class: rng.random_range(0..num_classes),
        })
        .collect();
    DecisionList::new(space.clone(), classes(num_classes), rules, rng.random_range(0..num_classes))
        .unwrap()
        .into()
}

fn random_tree<R: Rng>(rng: &mut R, space: &FeatureSpace, depth: usize) -> Node {
    if depth == 0 || rng.random_bool(0.25) {
        return Node::Leaf(rng.random_range(-50..=50));
    }
    Node::split(
        random_literal(rng, space),
        random_tree(rng, space, depth - 1),
        random_tree(rng, space, depth - 1),
    )
}

/// Single-score ensembles for two classes, one tree group per class otherwise.
pub fn random_ensemble<R: Rng>(rng: &mut R, space: &FeatureSpace, max_trees: usize, depth: usize, num_classes: usize) -> Model {
    let groups = if num_classes == 2 && rng.random_bool(0.6) { 1 } else { num_classes };
    let trees = (0..groups)
        .map(|_| (0..rng.random_range(1..=max_trees)).map(|_| random_tree(rng, space, depth)).collect())
        .collect();
    BoostedEnsemble::new(space.clone(), classes(num_classes), 2, trees).unwrap().into()
}

pub fn random_model<R: Rng>(rng: &mut R, space: &FeatureSpace) -> Model {
    let k = if rng.random_bool(0.75) { 2 } else { 3 };
    if rng.random_bool(0.5) {
        random_list(rng, space, 8, k)
    } else {
        random_ensemble(rng, space, 6, 2, k)
    }
}

/// Random clauses, each kept only if the instance satisfies it.
pub fn random_knowledge<R: Rng>(rng: &mut R, space: &FeatureSpace, inst: &Instance, clauses: usize) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    let mut tries = 0;
    while kb.len() < clauses && tries < 50 * clauses.max(1) {
        tries += 1;
        let lits: Vec<Literal> = (0..rng.random_range(1..=3)).map(|_| random_literal(rng, space)).collect();
        if let Ok(c) = Clause::new(space, lits) {
            if c.satisfied_by(inst) {
                kb.insert(c, Some(kb.len()));
            }
        }
    }
    kb
}

pub fn holds_bruteforce(model: &Model, kb: &KnowledgeBase, inst: &Instance, kind: Kind, set: &FeatureSet) -> bool {
    let n = model.space().len();
    let fixed = match kind {
        Kind::Axp => set.clone(),
        Kind::Cxp => complement(n, set),
    };
    let q = EntailmentQuery {
        fixed: &fixed,
        instance: inst,
        model,
        contested: model.classify(inst),
        knowledge: kb,
    };
    let ent = entails_bruteforce(&q, DEFAULT_BRUTEFORCE_BOUND).unwrap().entails();
    match kind {
        Kind::Axp => ent,
        Kind::Cxp => !ent,
    }
}

pub fn subsets(n: usize) -> Vec<FeatureSet> {
    (0..1u64 << n)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// All subset-minimal explanations of a kind, by checking every subset.
pub fn all_minimal(model: &Model, kb: &KnowledgeBase, inst: &Instance, kind: Kind) -> BTreeSet<FeatureSet> {
    let n = model.space().len();
    let good: Vec<FeatureSet> = subsets(n)
        .into_iter()
        .filter(|s| holds_bruteforce(model, kb, inst, kind, s))
        .collect();
    good.iter()
        .filter(|s| !good.iter().any(|t| t.len() < s.len() && t.is_subset(s)))
        .cloned()
        .collect()
}

/// Subset-minimal hitting sets of a family.
pub fn minimal_hitting_sets(n: usize, family: &BTreeSet<FeatureSet>) -> BTreeSet<FeatureSet> {
    let hits: Vec<FeatureSet> = subsets(n)
        .into_iter()
        .filter(|h| family.iter().all(|s| !s.is_disjoint(h)))
        .collect();
    hits.iter()
        .filter(|h| !hits.iter().any(|t| t.len() < h.len() && t.is_subset(h)))
        .cloned()
        .collect()
}

pub fn size_lex_key(s: &FeatureSet) -> (usize, Vec<usize>) {
    (s.len(), s.iter().copied().collect())
}

pub fn everything(n: usize) -> FeatureSet {
    all_features(n)
}

pub fn random_dataset<R: Rng>(rng: &mut R, space: &FeatureSpace, rows: usize) -> Dataset {
    // a few planted dependencies make rules more likely
    let mut data = Vec::with_capacity(rows);
    let plant = space.len() >= 2 && rng.random_bool(0.7);
    for _ in 0..rows {
        let mut inst = random_instance(rng, space);
        if plant && rng.random_bool(0.8) {
            let v = inst.get(0) % space.domain_size(1);
            inst = inst.with_value(1, v);
        }
        data.push(inst);
    }
    Dataset::new(space.clone(), data, None).unwrap()
}

/// Every antecedent in the miner's literal language (one literal per
/// feature) that is consistent, supported and subset-minimal, for one target,
/// in size-then-literal order, with clausal duplicates removed.
pub fn brute_force_rules(ds: &Dataset, target: Literal, blocked: &KnowledgeBase, limit: &ExtractionLimit) -> Vec<Rule> {
    let space = ds.space();
    let lits = candidate_literals(space, target.feature);
    let consistent = |ante: &[Literal]| {
        ds.rows()
            .iter()
            .all(|r| !ante.iter().all(|l| l.satisfied_by(r)) || target.satisfied_by(r))
    };
    let support = |ante: &[Literal]| {
        ds.rows()
            .iter()
            .filter(|r| ante.iter().all(|l| l.satisfied_by(r)) && target.satisfied_by(r))
            .count()
    };
    let mut all: Vec<Vec<Literal>> = vec![Vec::new()];
    // antecedents as ascending literal lists with distinct features
    let mut frontier: Vec<Vec<Literal>> = vec![Vec::new()];
    for _ in 0..limit.max_size {
        let mut next = Vec::new();
        for a in &frontier {
            for l in &lits {
                if a.last().is_some_and(|last| last >= l) || a.iter().any(|x| x.feature == l.feature) {
                    continue;
                }
                let mut b = a.clone();
                b.push(*l);
                next.push(b);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    let good = |a: &[Literal]| consistent(a) && support(a) >= limit.min_support;
    let mut found: Vec<Vec<Literal>> = all
        .into_iter()
        .filter(|a| good(a))
        .filter(|a| {
            // no proper subset is good; checking every subset
            (0..(1u64 << a.len()) - 1).all(|m| {
                let sub: Vec<Literal> = (0..a.len()).filter(|&i| m >> i & 1 == 1).map(|i| a[i]).collect();
                !good(&sub)
            })
        })
        .collect();
    found.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in found {
        let sup = support(&a);
        let rule = Rule::new(space, a, target, out.len(), RuleStats { support: sup, consistency: 1.0 }).unwrap();
        let c = rule_to_clause(space, &rule);
        if blocked.contains(&c) || !seen.insert(c) {
            continue;
        }
        out.push(rule);
    }
    out
}

/// Alg.-style extraction with the brute-force rule finder.
pub fn brute_force_extract(ds: &Dataset, limit: &ExtractionLimit) -> Vec<Rule> {
    let space = ds.space();
    let mut kb = KnowledgeBase::new();
    let mut rules = Vec::new();
    for f in 0..space.len() {
        for v in 0..space.domain_size(f) {
            let target = Literal::eq(space, f, v).unwrap();
            for r in brute_force_rules(ds, target, &kb, limit) {
                kb.insert(rule_to_clause(space, &r), None);
                rules.push(r);
            }
        }
    }
    rules
}

pub fn pick<'a, R: Rng, T>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).unwrap()
}
