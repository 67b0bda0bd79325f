//! Shared vocabulary: feature spaces, instances, literals, clauses, rules,
//! knowledge bases and explanations.

mod explanation;
mod logic;
mod space;

pub use explanation::{all_features, complement, feature_set_from_names, Explanation, FeatureSet, Kind};
pub use logic::{
    clause_to_rules, literal_satisfied, rule_to_clause, Clause, KnowledgeBase, Literal, Polarity,
    Rule, RuleStats,
};
pub use space::{Feature, FeatureSpace, Instance};
