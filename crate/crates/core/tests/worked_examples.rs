//! The income examples, the majority-vote and parity constructions, and the
//! small census table, checked end to end.

use std::collections::BTreeSet;

use kxp::domain::{feature_set_from_names, FeatureSet, Kind, KnowledgeBase, Literal, Polarity};
use kxp::explain::{attribute_rules, Explainer};
use kxp::ingest::{Dataset, RawTable, SchemaHints};
use kxp::miner::{enumerate_min_rules, extract_all, ExtractionLimit};
use kxp::models::Model;
use kxp::samples::*;

fn names(model: &Model, v: &[&str]) -> FeatureSet {
    feature_set_from_names(model.space(), v).unwrap()
}

fn family(model: &Model, sets: &[&[&str]]) -> BTreeSet<FeatureSet> {
    sets.iter().map(|s| names(model, s)).collect()
}

fn all_of(model: &Model, kb: &KnowledgeBase, inst: &kxp::domain::Instance, kind: Kind) -> (Vec<FeatureSet>, bool) {
    let mut ex = Explainer::new(model, kb, inst).unwrap();
    let e = ex.enumerate_smallest(kind, 20);
    (e.explanations, e.exhausted)
}

#[test]
fn list_explanations_for_married_salesman() {
    let m = income_list();
    let v = married_sales_instance();
    assert_eq!(m.classes()[m.classify(&v)], ">=50k");
    let none = KnowledgeBase::new();
    let (axps, done) = all_of(&m, &none, &v, Kind::Axp);
    assert!(done);
    assert_eq!(axps, vec![names(&m, &["Education", "Status", "Occupation", "Relationship"])]);
    let (cxps, done) = all_of(&m, &none, &v, Kind::Cxp);
    assert!(done);
    assert_eq!(
        cxps.into_iter().collect::<BTreeSet<_>>(),
        family(&m, &[&["Education"], &["Status"], &["Occupation"], &["Relationship"]])
    );
}

#[test]
fn ensemble_scores_and_explanations() {
    let m = income_trees();
    let Model::Boosted(bt) = &m else { unreachable!() };
    let v = married_sales_instance();
    assert_eq!(bt.scores(&v), vec![1642]);
    assert_eq!(m.classes()[m.classify(&v)], ">=50k");
    let service = v.with_value(2, m.space().value_index(2, "Service").unwrap());
    // traced through the three trees: 1063 - 2231 - 128
    assert_eq!(bt.scores(&service), vec![-1296]);
    assert_eq!(m.classes()[m.classify(&service)], "<50k");

    let none = KnowledgeBase::new();
    let (axps, _) = all_of(&m, &none, &v, Kind::Axp);
    assert_eq!(axps, vec![names(&m, &["Education", "Status", "Occupation", "Relationship"])]);
    let (cxps, done) = all_of(&m, &none, &v, Kind::Cxp);
    assert!(done);
    assert_eq!(
        cxps.into_iter().collect::<BTreeSet<_>>(),
        family(&m, &[&["Education"], &["Status"], &["Occupation"], &["Relationship"]])
    );
}

#[test]
fn knowledge_shrinks_abductive_explanation() {
    let m = status_list();
    let v = separated_service_instance();
    assert_eq!(m.classes()[m.classify(&v)], "<50k");
    let kb = separated_knowledge();
    let none = KnowledgeBase::new();

    let mut plain = Explainer::new(&m, &none, &v).unwrap();
    assert_eq!(plain.find_axp(None).unwrap(), names(&m, &["Status", "Relationship", "Sex"]));
    assert!(!plain.check_explanation(Kind::Axp, &names(&m, &["Relationship", "Sex"])).unwrap());

    let mut with = Explainer::new(&m, &kb, &v).unwrap();
    assert_eq!(with.find_axp(None).unwrap(), names(&m, &["Relationship", "Sex"]));
    assert!(with.check_explanation(Kind::Axp, &names(&m, &["Relationship", "Sex"])).unwrap());
    let (axps, _) = all_of(&m, &kb, &v, Kind::Axp);
    assert_eq!(axps, vec![names(&m, &["Relationship", "Sex"])]);
}

#[test]
fn knowledge_and_contrastive_explanations() {
    let m = status_list();
    let v = separated_service_instance();
    let kb = separated_knowledge();
    let none = KnowledgeBase::new();

    let (plain, _) = all_of(&m, &none, &v, Kind::Cxp);
    assert_eq!(plain.first(), Some(&names(&m, &["Status"])));
    assert_eq!(
        plain.into_iter().collect::<BTreeSet<_>>(),
        family(&m, &[&["Status"], &["Relationship"], &["Sex"]])
    );

    // freeing Status alone is no longer enough once the rule ties it to the others
    let mut with = Explainer::new(&m, &kb, &v).unwrap();
    assert!(!with.check_explanation(Kind::Cxp, &names(&m, &["Status"])).unwrap());
    assert!(with.check_explanation(Kind::Cxp, &names(&m, &["Status", "Relationship"])).unwrap());
    let (assisted, done) = all_of(&m, &kb, &v, Kind::Cxp);
    assert!(done);
    assert_eq!(
        assisted.into_iter().collect::<BTreeSet<_>>(),
        family(&m, &[&["Relationship"], &["Sex"]])
    );
}

#[test]
fn attribution_of_the_separated_rule() {
    let m = status_list();
    let v = separated_service_instance();
    let kb = separated_knowledge();
    let a = attribute_rules(&m, &kb, &v, &names(&m, &["Relationship", "Sex"])).unwrap();
    assert_eq!(a.clauses, vec![0]);
    assert_eq!(a.rule_ids, vec![0]);
    assert!(!a.knowledge_free);
    let b = attribute_rules(&m, &kb, &v, &names(&m, &["Status", "Relationship", "Sex"])).unwrap();
    assert!(b.knowledge_free);
    assert!(b.clauses.is_empty());
    assert!(attribute_rules(&m, &kb, &v, &names(&m, &["Sex"])).is_err());
}

#[test]
fn majority_vote_knowledge_changes_the_explanation() {
    let m = majority_vote();
    let v = bits(1, 1, 0);
    assert_eq!(m.classify(&v), 1);
    let kb = majority_knowledge();
    let mut with = Explainer::new(&m, &kb, &v).unwrap();
    assert_eq!(with.find_axp(None).unwrap(), names(&m, &["c"]));
    assert!(with.is_minimal(Kind::Axp, &names(&m, &["c"])).unwrap());
    // {a} and {b} also entail the prediction once c = 0 forces a = b = 1
    let assisted = with.enumerate_smallest(Kind::Axp, 20);
    assert!(assisted.exhausted);
    assert_eq!(
        assisted.explanations.into_iter().collect::<BTreeSet<_>>(),
        family(&m, &[&["a"], &["b"], &["c"]])
    );
    let mut plain = Explainer::new(&m, &KnowledgeBase::new(), &v).unwrap();
    assert_eq!(plain.enumerate_smallest(Kind::Axp, 20).explanations, vec![names(&m, &["a", "b"])]);
}

#[test]
fn parity_knowledge_leaves_one_contrastive_explanation() {
    let m = parity();
    let v = bits(1, 1, 1);
    assert_eq!(m.classes()[m.classify(&v)], "ODD");
    let kb = parity_knowledge();
    let mut with = Explainer::new(&m, &kb, &v).unwrap();
    let e = with.enumerate_smallest(Kind::Cxp, 20);
    assert!(e.exhausted);
    assert_eq!(e.explanations, vec![names(&m, &["c"])]);
    let mut plain = Explainer::new(&m, &KnowledgeBase::new(), &v).unwrap();
    let e = plain.enumerate_smallest(Kind::Cxp, 20);
    assert_eq!(
        e.explanations.into_iter().collect::<BTreeSet<_>>(),
        family(&m, &[&["a"], &["b"], &["c"]])
    );
}

fn table1() -> Dataset {
    let raw = RawTable::from_reader(include_str!("../../../data/table1.csv").as_bytes(), &SchemaHints::default()).unwrap();
    raw.into_categorical().unwrap().without_class()
}

#[test]
fn census_table_rules() {
    let ds = table1();
    let s = ds.space();
    let husband = Literal::named(s, "Relationship", Polarity::Equals, "Husband").unwrap();
    let limit = ExtractionLimit::with_max_size(2);
    let rules = enumerate_min_rules(&ds, husband, &KnowledgeBase::new(), &limit).unwrap();
    let shown: Vec<String> = rules.iter().map(|r| r.display(s)).collect();
    assert!(shown.contains(&"IF Status = Married AND Sex = Male THEN Relationship = Husband".to_string()), "{shown:?}");

    let ex = extract_all(&ds, &limit, false).unwrap();
    let all: Vec<String> = ex.rules.iter().map(|r| r.display(s)).collect();
    for want in [
        "IF Relationship = Husband THEN Status = Married",
        "IF Relationship = Wife THEN Status = Married",
    ] {
        assert!(all.contains(&want.to_string()), "{all:?}");
    }
    // the married-male rule has a second reading that must not reappear
    let married_male = ex
        .rules
        .iter()
        .filter(|r| {
            let c = kxp::domain::rule_to_clause(s, r);
            c.display(s).contains("Relationship = Husband") && c.display(s).contains("Status != Married")
        })
        .count();
    assert_eq!(married_male, 1, "{all:?}");
}
