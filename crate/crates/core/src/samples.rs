//! Small hand-built spaces, models and knowledge used throughout the tests,
//! the CLI demos and the Python bindings.

use crate::domain::{Clause, Feature, FeatureSpace, Instance, KnowledgeBase, Literal, Polarity};
use crate::models::{BoostedEnsemble, DecisionList, ListRule, Model, Node};

/// Six census-style features; domains follow first appearance in
/// `data/table1.csv`, with `Own-child` appended to Relationship.
pub fn income_space() -> FeatureSpace {
    FeatureSpace::new(vec![
        Feature::new("Education", ["HighSchool", "Bachelors", "Masters", "Dropout"]),
        Feature::new("Status", ["Married", "Separated", "Never-Married"]),
        Feature::new("Occupation", ["Sales", "Professional", "Service", "Blue-Collar"]),
        Feature::new(
            "Relationship",
            ["Husband", "Wife", "Not-in-family", "Unmarried", "Own-child"],
        ),
        Feature::new("Sex", ["Male", "Female"]),
        Feature::new("Hours/w", ["40 to 45", "<=40", ">=45"]),
    ])
    .expect("valid space")
}

/// Class labels for the income models; the second is the positive class.
pub fn income_classes() -> Vec<String> {
    vec!["<50k".into(), ">=50k".into()]
}

fn lit(space: &FeatureSpace, f: &str, pol: Polarity, v: &str) -> Literal {
    Literal::named(space, f, pol, v).expect("known feature value")
}

fn eq(space: &FeatureSpace, f: &str, v: &str) -> Literal {
    lit(space, f, Polarity::Equals, v)
}

pub fn income_instance(labels: [&str; 6]) -> Instance {
    income_space().instance_from_labels(&labels).expect("known labels")
}

/// A married husband in sales with a high-school education.
pub fn married_sales_instance() -> Instance {
    income_instance(["HighSchool", "Married", "Sales", "Husband", "Male", "40 to 45"])
}

/// A separated male dropout in a service job.
pub fn separated_service_instance() -> Instance {
    income_instance(["Dropout", "Separated", "Service", "Not-in-family", "Male", "<=40"])
}

/// Dropouts and service workers earn less; married husbands and wives earn more.
pub fn income_list() -> Model {
    let s = income_space();
    let rules = vec![
        ListRule {
            antecedent: vec![eq(&s, "Education", "Dropout")],
            class: 0,
        },
        ListRule {
            antecedent: vec![eq(&s, "Occupation", "Service")],
            class: 0,
        },
        ListRule {
            antecedent: vec![eq(&s, "Status", "Married"), eq(&s, "Relationship", "Husband")],
            class: 1,
        },
        ListRule {
            antecedent: vec![eq(&s, "Status", "Married"), eq(&s, "Relationship", "Wife")],
            class: 1,
        },
    ];
    DecisionList::new(s, income_classes(), rules, 0).expect("valid list").into()
}

/// Three depth-2 trees scoring the positive class at scale 10^4.
pub fn income_trees() -> Model {
    let s = income_space();
    let married = eq(&s, "Status", "Married");
    let t1 = Node::split(
        married,
        Node::split(eq(&s, "Education", "Dropout"), Node::Leaf(-2192), Node::Leaf(1063)),
        Node::split(eq(&s, "Relationship", "Not-in-family"), Node::Leaf(-1561), Node::Leaf(-3850)),
    );
    let t2 = Node::split(
        married,
        Node::split(eq(&s, "Occupation", "Service"), Node::Leaf(-2231), Node::Leaf(707)),
        Node::split(eq(&s, "Hours/w", ">=45"), Node::Leaf(-80), Node::Leaf(-2549)),
    );
    let t3 = Node::split(
        eq(&s, "Relationship", "Own-child"),
        Node::split(eq(&s, "Education", "Masters"), Node::Leaf(1186), Node::Leaf(-3483)),
        Node::split(eq(&s, "Education", "Dropout"), Node::Leaf(-2844), Node::Leaf(-128)),
    );
    BoostedEnsemble::new(s, income_classes(), 4, vec![vec![t1, t2, t3]])
        .expect("valid ensemble")
        .into()
}

/// Married people earn more; unmarried men who are not husbands earn less.
pub fn status_list() -> Model {
    let s = income_space();
    let rules = vec![
        ListRule {
            antecedent: vec![eq(&s, "Status", "Married")],
            class: 1,
        },
        ListRule {
            antecedent: vec![eq(&s, "Sex", "Male"), lit(&s, "Relationship", Polarity::NotEquals, "Husband")],
            class: 0,
        },
    ];
    DecisionList::new(s, income_classes(), rules, 1).expect("valid list").into()
}

/// `Sex = Male AND Relationship = Not-in-family -> Status = Separated`.
pub fn separated_knowledge() -> KnowledgeBase {
    let s = income_space();
    let clause = Clause::new(
        &s,
        [
            lit(&s, "Sex", Polarity::NotEquals, "Male"),
            lit(&s, "Relationship", Polarity::NotEquals, "Not-in-family"),
            eq(&s, "Status", "Separated"),
        ],
    )
    .expect("valid clause");
    let mut kb = KnowledgeBase::new();
    kb.insert(clause, Some(0));
    kb
}

fn bits3() -> FeatureSpace {
    FeatureSpace::new(vec![
        Feature::new("a", ["0", "1"]),
        Feature::new("b", ["0", "1"]),
        Feature::new("c", ["0", "1"]),
    ])
    .expect("valid space")
}

fn bit(s: &FeatureSpace, f: &str, v: u8) -> Literal {
    eq(s, f, if v == 1 { "1" } else { "0" })
}

/// Class 1 iff at least two of a, b, c are 1.
pub fn majority_vote() -> Model {
    let s = bits3();
    let pair = |x, y| ListRule {
        antecedent: vec![bit(&s, x, 1), bit(&s, y, 1)],
        class: 1,
    };
    let rules = vec![pair("a", "b"), pair("a", "c"), pair("b", "c")];
    DecisionList::new(s.clone(), vec!["0".into(), "1".into()], rules, 0)
        .expect("valid list")
        .into()
}

/// `c = 0 -> a = 1` and `c = 0 -> b = 1`.
pub fn majority_knowledge() -> KnowledgeBase {
    let s = bits3();
    KnowledgeBase::from_clauses([
        Clause::new(&s, [bit(&s, "c", 1), bit(&s, "a", 1)]).expect("valid clause"),
        Clause::new(&s, [bit(&s, "c", 1), bit(&s, "b", 1)]).expect("valid clause"),
    ])
}

/// ODD iff an odd number of a, b, c are 1.
pub fn parity() -> Model {
    let s = bits3();
    let rules = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]
        .iter()
        .map(|v| ListRule {
            antecedent: vec![bit(&s, "a", v[0]), bit(&s, "b", v[1]), bit(&s, "c", v[2])],
            class: 1,
        })
        .collect();
    DecisionList::new(s.clone(), vec!["EVEN".into(), "ODD".into()], rules, 0)
        .expect("valid list")
        .into()
}

/// `a = b`.
pub fn parity_knowledge() -> KnowledgeBase {
    let s = bits3();
    KnowledgeBase::from_clauses([
        Clause::new(&s, [bit(&s, "a", 0), bit(&s, "b", 1)]).expect("valid clause"),
        Clause::new(&s, [bit(&s, "b", 0), bit(&s, "a", 1)]).expect("valid clause"),
    ])
}

pub fn bits(a: usize, b: usize, c: usize) -> Instance {
    Instance::new(vec![a, b, c])
}
