use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::space::{FeatureSpace, Instance};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Equals,
    NotEquals,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Equals => Polarity::NotEquals,
            Polarity::NotEquals => Polarity::Equals,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Polarity::Equals => "==",
            Polarity::NotEquals => "!=",
        }
    }
}

/// A feature-value atom `x_f = v` or its negation `x_f != v`.
///
/// Field order gives the derived `Ord` the (feature, polarity, value)
/// ordering used for deterministic tie-breaking. On two-valued domains the
/// `NotEquals` form never survives construction: `x != a` becomes `x = b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub feature: usize,
    pub polarity: Polarity,
    pub value: usize,
}

impl Literal {
    pub fn new(
        space: &FeatureSpace,
        feature: usize,
        polarity: Polarity,
        value: usize,
    ) -> Result<Literal> {
        if feature >= space.len() {
            return Err(Error::InvalidLiteral(format!(
                "feature index {feature} out of range ({} features)",
                space.len()
            )));
        }
        if value >= space.domain_size(feature) {
            return Err(Error::InvalidLiteral(format!(
                "value index {value} out of range for feature '{}'",
                space.name(feature)
            )));
        }
        Ok(Literal {
            feature,
            polarity,
            value,
        }
        .normalized(space))
    }

    pub fn eq(space: &FeatureSpace, feature: usize, value: usize) -> Result<Literal> {
        Literal::new(space, feature, Polarity::Equals, value)
    }

    pub fn ne(space: &FeatureSpace, feature: usize, value: usize) -> Result<Literal> {
        Literal::new(space, feature, Polarity::NotEquals, value)
    }

    /// Looks a literal up by feature name and value label.
    pub fn named(
        space: &FeatureSpace,
        feature: &str,
        polarity: Polarity,
        value: &str,
    ) -> Result<Literal> {
        let f = space
            .index_of(feature)
            .ok_or_else(|| Error::InvalidLiteral(format!("unknown feature '{feature}'")))?;
        let v = space.value_index(f, value).ok_or_else(|| {
            Error::InvalidLiteral(format!("'{value}' is not a value of feature '{feature}'"))
        })?;
        Literal::new(space, f, polarity, v)
    }

    fn normalized(self, space: &FeatureSpace) -> Literal {
        if self.polarity == Polarity::NotEquals && space.domain_size(self.feature) == 2 {
            Literal {
                feature: self.feature,
                polarity: Polarity::Equals,
                value: 1 - self.value,
            }
        } else {
            self
        }
    }

    pub fn negate(&self, space: &FeatureSpace) -> Literal {
        Literal {
            feature: self.feature,
            polarity: self.polarity.flip(),
            value: self.value,
        }
        .normalized(space)
    }

    /// Truth value on an instance. Indices are not range-checked; see
    /// [`literal_satisfied`] for the checked form.
    #[inline]
    pub fn satisfied_by(&self, inst: &Instance) -> bool {
        self.holds_for(inst.get(self.feature))
    }

    #[inline]
    pub fn holds_for(&self, value: usize) -> bool {
        match self.polarity {
            Polarity::Equals => value == self.value,
            Polarity::NotEquals => value != self.value,
        }
    }

    pub fn display<'a>(&'a self, space: &'a FeatureSpace) -> LiteralDisplay<'a> {
        LiteralDisplay { lit: self, space }
    }
}

pub struct LiteralDisplay<'a> {
    lit: &'a Literal,
    space: &'a FeatureSpace,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.lit.polarity {
            Polarity::Equals => "=",
            Polarity::NotEquals => "!=",
        };
        write!(
            f,
            "{} {} {}",
            self.space.name(self.lit.feature),
            op,
            self.space.value_label(self.lit.feature, self.lit.value)
        )
    }
}

/// Checked truth value of a literal on an instance.
pub fn literal_satisfied(space: &FeatureSpace, lit: &Literal, inst: &Instance) -> Result<bool> {
    space.check_instance(inst)?;
    if lit.feature >= space.len() || lit.value >= space.domain_size(lit.feature) {
        return Err(Error::InvalidLiteral(format!(
            "literal ({}, {}) does not belong to the feature space",
            lit.feature, lit.value
        )));
    }
    Ok(lit.satisfied_by(inst))
}

/// A disjunction of literals with set semantics, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(space: &FeatureSpace, literals: impl IntoIterator<Item = Literal>) -> Result<Clause> {
        let mut lits: Vec<Literal> = Vec::new();
        for l in literals {
            lits.push(Literal::new(space, l.feature, l.polarity, l.value)?);
        }
        lits.sort();
        lits.dedup();
        if let Some(f) = tautological_feature(space, &lits) {
            return Err(Error::InvalidClause(format!(
                "literals on feature '{}' make the clause a tautology",
                space.name(f)
            )));
        }
        Ok(Clause { literals: lits })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn satisfied_by(&self, inst: &Instance) -> bool {
        self.literals.iter().any(|l| l.satisfied_by(inst))
    }

    pub fn display<'a>(&'a self, space: &'a FeatureSpace) -> String {
        if self.literals.is_empty() {
            return "false".to_string();
        }
        self.literals
            .iter()
            .map(|l| l.display(space).to_string())
            .collect::<Vec<_>>()
            .join(" OR ")
    }
}

/// Feature whose literals alone cover every value, if any.
fn tautological_feature(space: &FeatureSpace, sorted: &[Literal]) -> Option<usize> {
    let mut i = 0;
    while i < sorted.len() {
        let f = sorted[i].feature;
        let mut j = i;
        let mut eq = Vec::new();
        let mut ne = Vec::new();
        while j < sorted.len() && sorted[j].feature == f {
            match sorted[j].polarity {
                Polarity::Equals => eq.push(sorted[j].value),
                Polarity::NotEquals => ne.push(sorted[j].value),
            }
            j += 1;
        }
        let complementary = ne.iter().any(|v| eq.contains(v));
        if complementary || ne.len() >= 2 || eq.len() == space.domain_size(f) {
            return Some(f);
        }
        i = j;
    }
    None
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    /// Training rows satisfying both antecedent and consequent.
    pub support: usize,
    /// Fraction of training rows satisfying the rule's clausal form.
    pub consistency: f64,
}

/// `IF antecedent THEN consequent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: usize,
    antecedent: Vec<Literal>,
    consequent: Literal,
    pub stats: RuleStats,
}

impl Rule {
    pub fn new(
        space: &FeatureSpace,
        antecedent: impl IntoIterator<Item = Literal>,
        consequent: Literal,
        id: usize,
        stats: RuleStats,
    ) -> Result<Rule> {
        let consequent = Literal::new(space, consequent.feature, consequent.polarity, consequent.value)?;
        let mut ante = Vec::new();
        for l in antecedent {
            ante.push(Literal::new(space, l.feature, l.polarity, l.value)?);
        }
        ante.sort();
        ante.dedup();
        if ante.iter().any(|l| l.feature == consequent.feature) {
            return Err(Error::InvalidRule(format!(
                "consequent feature '{}' occurs in the antecedent",
                space.name(consequent.feature)
            )));
        }
        for w in ante.windows(2) {
            if w[0].feature == w[1].feature
                && w[0].polarity == Polarity::Equals
                && w[1].polarity == Polarity::Equals
            {
                return Err(Error::InvalidRule(format!(
                    "two equality literals on feature '{}'",
                    space.name(w[0].feature)
                )));
            }
        }
        let rule = Rule {
            id,
            antecedent: ante,
            consequent,
            stats,
        };
        Clause::new(space, rule.clause_literals(space)).map_err(|_| {
            Error::InvalidRule("antecedent can never hold (its clausal form is a tautology)".into())
        })?;
        Ok(rule)
    }

    pub fn antecedent(&self) -> &[Literal] {
        &self.antecedent
    }

    pub fn consequent(&self) -> Literal {
        self.consequent
    }

    pub fn size(&self) -> usize {
        self.antecedent.len()
    }

    pub fn antecedent_holds(&self, inst: &Instance) -> bool {
        self.antecedent.iter().all(|l| l.satisfied_by(inst))
    }

    /// True when the rule is violated by the instance.
    pub fn falsified_by(&self, inst: &Instance) -> bool {
        self.antecedent_holds(inst) && !self.consequent.satisfied_by(inst)
    }

    /// Same antecedent and consequent, ignoring id and statistics.
    pub fn same_reading(&self, other: &Rule) -> bool {
        self.antecedent == other.antecedent && self.consequent == other.consequent
    }

    fn clause_literals(&self, space: &FeatureSpace) -> Vec<Literal> {
        self.antecedent
            .iter()
            .map(|l| l.negate(space))
            .chain(std::iter::once(self.consequent))
            .collect()
    }

    pub fn display(&self, space: &FeatureSpace) -> String {
        let ante = if self.antecedent.is_empty() {
            "TRUE".to_string()
        } else {
            self.antecedent
                .iter()
                .map(|l| l.display(space).to_string())
                .collect::<Vec<_>>()
                .join(" AND ")
        };
        format!("IF {} THEN {}", ante, self.consequent.display(space))
    }
}

/// Clausal form of a rule: the negated antecedent literals plus the consequent.
pub fn rule_to_clause(space: &FeatureSpace, rule: &Rule) -> Clause {
    Clause::new(space, rule.clause_literals(space))
        .expect("rule invariants guarantee a non-tautological clause")
}

/// Every rule reading of a clause, one per choice of consequent literal.
///
/// Fails when two literals of the clause share a feature, since one of the
/// readings would then mention its consequent feature in the antecedent.
pub fn clause_to_rules(space: &FeatureSpace, clause: &Clause) -> Result<Vec<Rule>> {
    let lits = clause.literals();
    (0..lits.len())
        .map(|i| {
            let ante = lits
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, l)| l.negate(space));
            Rule::new(space, ante, lits[i], i, RuleStats::default())
        })
        .collect()
}

/// A conjunction of feature-level clauses with provenance back to rule ids.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    clauses: Vec<Clause>,
    provenance: Vec<Vec<usize>>,
    index: HashMap<Clause, usize>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.clauses == other.clauses && self.provenance == other.provenance
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut kb = KnowledgeBase::new();
        for c in clauses {
            kb.insert(c, None);
        }
        kb
    }

    pub fn from_rules<'a>(space: &FeatureSpace, rules: impl IntoIterator<Item = &'a Rule>) -> Self {
        let mut kb = KnowledgeBase::new();
        for r in rules {
            kb.insert(rule_to_clause(space, r), Some(r.id));
        }
        kb
    }

    /// Adds a clause; returns false when it was already present, in which
    /// case only the rule id is appended to its provenance.
    pub fn insert(&mut self, clause: Clause, rule_id: Option<usize>) -> bool {
        if let Some(&i) = self.index.get(&clause) {
            if let Some(id) = rule_id {
                if !self.provenance[i].contains(&id) {
                    self.provenance[i].push(id);
                }
            }
            return false;
        }
        self.index.insert(clause.clone(), self.clauses.len());
        self.clauses.push(clause);
        self.provenance.push(rule_id.into_iter().collect());
        true
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.index.contains_key(clause)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn provenance(&self, clause_index: usize) -> &[usize] {
        &self.provenance[clause_index]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn satisfied_by(&self, inst: &Instance) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(inst))
    }

    pub fn first_violated(&self, inst: &Instance) -> Option<usize> {
        self.clauses.iter().position(|c| !c.satisfied_by(inst))
    }

    /// The sub-base made of the given clause indices, provenance preserved.
    pub fn subset(&self, indices: &[usize]) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        for &i in indices {
            let clause = self.clauses[i].clone();
            kb.index.insert(clause.clone(), kb.clauses.len());
            kb.clauses.push(clause);
            kb.provenance.push(self.provenance[i].clone());
        }
        kb
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::space::Feature;

    fn space() -> FeatureSpace {
        FeatureSpace::new(vec![
            Feature::new("a", ["0", "1", "2"]),
            Feature::new("b", ["0", "1", "2"]),
            Feature::new("s", ["M", "F"]),
        ])
        .unwrap()
    }

    #[test]
    fn binary_not_equals_is_normalized() {
        let s = space();
        let l = Literal::ne(&s, 2, 0).unwrap();
        assert_eq!(l, Literal::eq(&s, 2, 1).unwrap());
        let t = Literal::ne(&s, 0, 1).unwrap();
        assert_eq!(t.polarity, Polarity::NotEquals);
        assert_eq!(t.negate(&s), Literal::eq(&s, 0, 1).unwrap());
        assert!(Literal::eq(&s, 0, 3).is_err());
        assert!(Literal::eq(&s, 3, 0).is_err());
    }

    #[test]
    fn tautologies_rejected() {
        let s = space();
        let a0 = Literal::eq(&s, 0, 0).unwrap();
        let na0 = Literal::ne(&s, 0, 0).unwrap();
        assert!(Clause::new(&s, [a0, na0]).is_err());
        let na1 = Literal::ne(&s, 0, 1).unwrap();
        assert!(Clause::new(&s, [na0, na1]).is_err());
        let s0 = Literal::eq(&s, 2, 0).unwrap();
        let s1 = Literal::eq(&s, 2, 1).unwrap();
        assert!(Clause::new(&s, [s0, s1]).is_err());
        let ok = Clause::new(&s, [a0, a0, s0]).unwrap();
        assert_eq!(ok.len(), 2);
    }

    #[test]
    fn polarity_flip_in_clausal_form() {
        // IF a != 0 THEN b = 1  ->  (a = 0 OR b = 1)
        let s = space();
        let r = Rule::new(
            &s,
            [Literal::ne(&s, 0, 0).unwrap()],
            Literal::eq(&s, 1, 1).unwrap(),
            0,
            RuleStats::default(),
        )
        .unwrap();
        let c = rule_to_clause(&s, &r);
        assert_eq!(
            c.literals(),
            &[Literal::eq(&s, 0, 0).unwrap(), Literal::eq(&s, 1, 1).unwrap()]
        );
        let unit = Rule::new(&s, [], Literal::eq(&s, 1, 2).unwrap(), 1, RuleStats::default())
            .unwrap();
        assert_eq!(rule_to_clause(&s, &unit).len(), 1);
        let readings = clause_to_rules(&s, &rule_to_clause(&s, &unit)).unwrap();
        assert_eq!(readings.len(), 1);
        assert!(readings[0].antecedent().is_empty());
    }

    #[test]
    fn invalid_rules() {
        let s = space();
        let a0 = Literal::eq(&s, 0, 0).unwrap();
        let a1 = Literal::eq(&s, 0, 1).unwrap();
        let b0 = Literal::eq(&s, 1, 0).unwrap();
        assert!(Rule::new(&s, [a0], Literal::ne(&s, 0, 1).unwrap(), 0, RuleStats::default()).is_err());
        assert!(Rule::new(&s, [a0, a1], b0, 0, RuleStats::default()).is_err());
        let na0 = Literal::ne(&s, 0, 0).unwrap();
        assert!(Rule::new(&s, [a0, na0], b0, 0, RuleStats::default()).is_err());
        // a != 0 AND a != 1 leaves a = 2, so it is allowed
        let na1 = Literal::ne(&s, 0, 1).unwrap();
        assert!(Rule::new(&s, [na0, na1], b0, 0, RuleStats::default()).is_ok());
        let na2 = Literal::ne(&s, 0, 2).unwrap();
        assert!(Rule::new(&s, [na0, na1, na2], b0, 0, RuleStats::default()).is_err());
    }

    #[test]
    fn clause_with_shared_feature_has_no_rule_reading() {
        let s = space();
        let c = Clause::new(&s, [Literal::eq(&s, 0, 0).unwrap(), Literal::eq(&s, 0, 1).unwrap()])
            .unwrap();
        assert!(clause_to_rules(&s, &c).is_err());
    }

    #[test]
    fn knowledge_base_dedups_and_tracks_provenance() {
        let s = space();
        let c = Clause::new(&s, [Literal::eq(&s, 0, 0).unwrap()]).unwrap();
        let mut kb = KnowledgeBase::new();
        assert!(kb.insert(c.clone(), Some(3)));
        assert!(!kb.insert(c.clone(), Some(7)));
        assert_eq!(kb.len(), 1);
        assert_eq!(kb.provenance(0), &[3, 7]);
        let inst = s.instance(vec![1, 0, 0]).unwrap();
        assert!(!kb.satisfied_by(&inst));
        assert_eq!(kb.first_violated(&inst), Some(0));
        assert!(KnowledgeBase::new().satisfied_by(&inst));
    }
}
