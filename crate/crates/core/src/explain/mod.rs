//! Abductive and contrastive explanations, with or without background
//! knowledge, and attribution of knowledge-assisted explanations to rules.

mod hitting;

use crate::domain::{all_features, complement, FeatureSet, Instance, Kind, KnowledgeBase};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::oracle::{check_compatible, Oracle, OracleResult};

pub use hitting::min_hitting_set;

/// Explanations found by enumeration together with the opposing duals
/// gathered along the way.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DualState {
    pub axps: Vec<FeatureSet>,
    pub cxps: Vec<FeatureSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub kind: Kind,
    /// Emitted explanations, nondecreasing in size.
    pub explanations: Vec<FeatureSet>,
    pub state: DualState,
    /// No further explanation of this kind exists.
    pub exhausted: bool,
}

/// Explains one instance of one model under fixed background knowledge.
#[derive(Clone, Debug)]
pub struct Explainer {
    instance: Instance,
    predicted: usize,
    features: usize,
    oracle: Oracle,
}

impl Explainer {
    /// Explains the model's own prediction for `instance`.
    pub fn new(model: &Model, knowledge: &KnowledgeBase, instance: &Instance) -> Result<Explainer> {
        model.space().check_instance(instance)?;
        Explainer::for_class(model, knowledge, instance, model.classify(instance))
    }

    /// Explains why `instance` is assigned class `class`.
    pub fn for_class(model: &Model, knowledge: &KnowledgeBase, instance: &Instance, class: usize) -> Result<Explainer> {
        model.space().check_instance(instance)?;
        check_compatible(knowledge, instance)?;
        Ok(Explainer {
            instance: instance.clone(),
            predicted: class,
            features: model.space().len(),
            oracle: Oracle::new(model, knowledge, class)?,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn predicted(&self) -> usize {
        self.predicted
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle.calls()
    }

    /// Fixing `fixed` forces the prediction.
    pub fn entails(&mut self, fixed: &FeatureSet) -> OracleResult {
        self.oracle.query(&self.instance, fixed)
    }

    fn check_range(&self, set: &FeatureSet) -> Result<()> {
        match set.iter().find(|&&f| f >= self.features) {
            Some(f) => Err(Error::Precondition(format!("feature {f} out of range"))),
            None => Ok(()),
        }
    }

    /// Whether `set` satisfies the kind's defining condition (not minimality).
    pub fn check_explanation(&mut self, kind: Kind, set: &FeatureSet) -> Result<bool> {
        self.check_range(set)?;
        Ok(match kind {
            Kind::Axp => self.entails(set).entails(),
            Kind::Cxp => !self.entails(&complement(self.features, set)).entails(),
        })
    }

    /// Condition holds and no single feature can be dropped.
    pub fn is_minimal(&mut self, kind: Kind, set: &FeatureSet) -> Result<bool> {
        if !self.check_explanation(kind, set)? {
            return Ok(false);
        }
        for &f in set {
            let mut smaller = set.clone();
            smaller.remove(&f);
            if self.check_explanation(kind, &smaller)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Deletion-based shrink of an entailing seed, in ascending feature order.
    pub fn find_axp(&mut self, seed: Option<&FeatureSet>) -> Result<FeatureSet> {
        let seed = seed.cloned().unwrap_or_else(|| all_features(self.features));
        if !self.check_explanation(Kind::Axp, &seed)? {
            return Err(Error::Precondition("seed does not entail the prediction".into()));
        }
        Ok(self.shrink_axp(seed))
    }

    /// Deletion-based shrink of a seed whose release admits another class.
    pub fn find_cxp(&mut self, seed: Option<&FeatureSet>) -> Result<FeatureSet> {
        let seed = seed.cloned().unwrap_or_else(|| all_features(self.features));
        if !self.check_explanation(Kind::Cxp, &seed)? {
            return Err(Error::Precondition("freeing the seed does not change the prediction".into()));
        }
        Ok(self.shrink_cxp(seed))
    }

    /// As [`Explainer::find_axp`] without the seed check: one oracle call per
    /// seed feature.
    pub fn shrink_axp(&mut self, seed: FeatureSet) -> FeatureSet {
        let mut s = seed;
        for f in s.clone() {
            s.remove(&f);
            if !self.entails(&s).entails() {
                s.insert(f);
            }
        }
        s
    }

    pub fn shrink_cxp(&mut self, seed: FeatureSet) -> FeatureSet {
        let mut freed = seed;
        for f in freed.clone() {
            freed.remove(&f);
            if self.entails(&complement(self.features, &freed)).entails() {
                freed.insert(f);
            }
        }
        freed
    }

    /// Minimal subset of a set that already satisfies the kind's condition.
    pub fn reduce_explanation(&mut self, kind: Kind, set: &FeatureSet) -> Result<FeatureSet> {
        match kind {
            Kind::Axp => self.find_axp(Some(set)),
            Kind::Cxp => self.find_cxp(Some(set)),
        }
    }

    /// Up to `n` explanations of `kind` in nondecreasing size, by repeatedly
    /// hitting all duals found so far with as few features as possible.
    pub fn enumerate_smallest(&mut self, kind: Kind, n: usize) -> Enumeration {
        let mut state = DualState::default();
        let mut found: Vec<FeatureSet> = Vec::new();
        let mut exhausted = false;
        while found.len() < n {
            let duals = match kind {
                Kind::Axp => &state.cxps,
                Kind::Cxp => &state.axps,
            };
            let Some(h) = min_hitting_set(self.features, duals, &found) else {
                exhausted = true;
                break;
            };
            match kind {
                Kind::Axp => match self.entails(&h) {
                    OracleResult::Entails => {
                        state.axps.push(h.clone());
                        found.push(h);
                    }
                    OracleResult::Counterexample(w) => {
                        let seed = (0..self.features).filter(|&f| w[f] != self.instance[f]).collect();
                        let cxp = self.shrink_cxp(seed);
                        state.cxps.push(cxp);
                    }
                },
                Kind::Cxp => match self.entails(&complement(self.features, &h)) {
                    OracleResult::Counterexample(_) => {
                        state.cxps.push(h.clone());
                        found.push(h);
                    }
                    OracleResult::Entails => {
                        let axp = self.shrink_axp(complement(self.features, &h));
                        state.axps.push(axp);
                    }
                },
            }
        }
        Enumeration {
            kind,
            explanations: found,
            state,
            exhausted,
        }
    }
}

/// Knowledge clauses responsible for an abductive explanation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribution {
    /// Indices into the knowledge base's clause list.
    pub clauses: Vec<usize>,
    /// Rule ids behind those clauses, ascending.
    pub rule_ids: Vec<usize>,
    /// The explanation already holds without any knowledge.
    pub knowledge_free: bool,
    pub oracle_calls: u64,
}

/// A subset-minimal set of knowledge clauses under which `axp` still entails
/// the prediction: the result of one deletion pass in clause order. Empty
/// when the explanation needs no knowledge at all.
pub fn attribute_rules(
    model: &Model,
    knowledge: &KnowledgeBase,
    instance: &Instance,
    axp: &FeatureSet,
) -> Result<Attribution> {
    model.space().check_instance(instance)?;
    check_compatible(knowledge, instance)?;
    let class = model.classify(instance);
    let mut calls = 0u64;
    let mut holds = |clauses: &[usize]| -> Result<bool> {
        calls += 1;
        let kb = knowledge.subset(clauses);
        Ok(Oracle::new(model, &kb, class)?.query(instance, axp).entails())
    };
    let all: Vec<usize> = (0..knowledge.len()).collect();
    if !holds(&all)? {
        return Err(Error::Precondition(
            "the feature set does not entail the prediction under the knowledge".into(),
        ));
    }
    if holds(&[])? {
        return Ok(Attribution {
            clauses: Vec::new(),
            rule_ids: Vec::new(),
            knowledge_free: true,
            oracle_calls: calls,
        });
    }
    // Entailment is monotone in the clause set, so when a whole run of
    // clauses can go at once, deleting them one by one would also succeed.
    // Runs that cannot go are halved, keeping the one-by-one result.
    let mut kept: Vec<bool> = vec![true; all.len()];
    let mut pending = vec![(0, all.len())];
    while let Some((lo, hi)) = pending.pop() {
        let trial: Vec<usize> = all.iter().copied().filter(|&c| kept[c] && !(lo..hi).contains(&c)).collect();
        if holds(&trial)? {
            kept[lo..hi].iter_mut().for_each(|k| *k = false);
        } else if hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            pending.push((mid, hi));
            pending.push((lo, mid));
        }
    }
    let kept: Vec<usize> = all.into_iter().filter(|&c| kept[c]).collect();
    let mut rule_ids: Vec<usize> = kept.iter().flat_map(|&c| knowledge.provenance(c).iter().copied()).collect();
    rule_ids.sort_unstable();
    rule_ids.dedup();
    Ok(Attribution {
        clauses: kept,
        rule_ids,
        knowledge_free: false,
        oracle_calls: calls,
    })
}
