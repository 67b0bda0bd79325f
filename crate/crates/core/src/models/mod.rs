//! Decision lists and boosted tree ensembles over a categorical feature space.

mod encode;
mod io;
mod train;

use serde::{Deserialize, Serialize};

use crate::domain::{FeatureSpace, Instance, Literal};
use crate::error::{Error, Result};

pub use encode::{model_constraints, Decision, Encoding};
pub use io::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use train::{train_boosted, train_decision_list, BoostOptions, ListOptions};

/// One rule of a decision list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListRule {
    pub antecedent: Vec<Literal>,
    pub class: usize,
}

impl ListRule {
    pub fn matches(&self, inst: &Instance) -> bool {
        self.antecedent.iter().all(|l| l.satisfied_by(inst))
    }
}

/// Ordered rules; the first rule whose antecedent holds decides the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionList {
    space: FeatureSpace,
    classes: Vec<String>,
    rules: Vec<ListRule>,
    default: usize,
}

fn check_literal(space: &FeatureSpace, l: &Literal) -> Result<Literal> {
    Literal::new(space, l.feature, l.polarity, l.value).map_err(|e| Error::Model(e.to_string()))
}

fn check_classes(classes: &[String]) -> Result<()> {
    if classes.is_empty() {
        return Err(Error::Model("a model needs at least one class".into()));
    }
    for (i, c) in classes.iter().enumerate() {
        if classes[..i].contains(c) {
            return Err(Error::Model(format!("duplicate class label '{c}'")));
        }
    }
    Ok(())
}

impl DecisionList {
    pub fn new(space: FeatureSpace, classes: Vec<String>, rules: Vec<ListRule>, default: usize) -> Result<Self> {
        check_classes(&classes)?;
        if default >= classes.len() {
            return Err(Error::Model(format!("default class {default} out of range")));
        }
        let mut checked = Vec::with_capacity(rules.len());
        for (j, r) in rules.into_iter().enumerate() {
            if r.class >= classes.len() {
                return Err(Error::Model(format!("rule {j}: class {} out of range", r.class)));
            }
            let antecedent = r
                .antecedent
                .iter()
                .map(|l| check_literal(&space, l))
                .collect::<Result<Vec<_>>>()?;
            checked.push(ListRule {
                antecedent,
                class: r.class,
            });
        }
        Ok(DecisionList {
            space,
            classes,
            rules: checked,
            default,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn rules(&self) -> &[ListRule] {
        &self.rules
    }

    pub fn default_class(&self) -> usize {
        self.default
    }

    /// Index of the rule that fires, or `None` when the default applies.
    pub fn firing_rule(&self, inst: &Instance) -> Option<usize> {
        self.rules.iter().position(|r| r.matches(inst))
    }

    pub fn classify(&self, inst: &Instance) -> usize {
        self.firing_rule(inst).map_or(self.default, |j| self.rules[j].class)
    }
}

/// A binary tree whose internal nodes test one literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf(i64),
    Split {
        test: Literal,
        yes: Box<Node>,
        no: Box<Node>,
    },
}

impl Node {
    pub fn split(test: Literal, yes: Node, no: Node) -> Node {
        Node::Split {
            test,
            yes: Box::new(yes),
            no: Box::new(no),
        }
    }

    pub fn eval(&self, inst: &Instance) -> i64 {
        match self {
            Node::Leaf(w) => *w,
            Node::Split { test, yes, no } => {
                if test.satisfied_by(inst) {
                    yes.eval(inst)
                } else {
                    no.eval(inst)
                }
            }
        }
    }

    /// Leaves with the literals on the path to each, left to right.
    pub fn leaves(&self) -> Vec<(Vec<Literal>, i64)> {
        fn walk(n: &Node, path: &mut Vec<(Literal, bool)>, out: &mut Vec<(Vec<(Literal, bool)>, i64)>) {
            match n {
                Node::Leaf(w) => out.push((path.clone(), *w)),
                Node::Split { test, yes, no } => {
                    path.push((*test, true));
                    walk(yes, path, out);
                    path.pop();
                    path.push((*test, false));
                    walk(no, path, out);
                    path.pop();
                }
            }
        }
        let mut raw = Vec::new();
        walk(self, &mut Vec::new(), &mut raw);
        raw.into_iter()
            .map(|(p, w)| {
                let lits = p
                    .into_iter()
                    .map(|(l, holds)| {
                        if holds {
                            l
                        } else {
                            Literal {
                                polarity: l.polarity.flip(),
                                ..l
                            }
                        }
                    })
                    .collect();
                (lits, w)
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { yes, no, .. } => 1 + yes.depth().max(no.depth()),
        }
    }

    fn check(&self, space: &FeatureSpace) -> Result<Node> {
        Ok(match self {
            Node::Leaf(w) => Node::Leaf(*w),
            Node::Split { test, yes, no } => Node::split(check_literal(space, test)?, yes.check(space)?, no.check(space)?),
        })
    }
}

/// Sums of integer leaf weights at scale `10^scale`.
///
/// With two classes and a single tree group, the group scores the second
/// class and the prediction is that class iff the score is positive.
/// Otherwise there is one group per class and the highest score wins, ties
/// going to the lowest class index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoostedEnsemble {
    space: FeatureSpace,
    classes: Vec<String>,
    scale: u32,
    trees: Vec<Vec<Node>>,
}

impl BoostedEnsemble {
    pub fn new(space: FeatureSpace, classes: Vec<String>, scale: u32, trees: Vec<Vec<Node>>) -> Result<Self> {
        check_classes(&classes)?;
        let single = classes.len() == 2 && trees.len() == 1;
        if !single && trees.len() != classes.len() {
            return Err(Error::Model(format!(
                "{} tree groups for {} classes",
                trees.len(),
                classes.len()
            )));
        }
        if scale > 18 {
            return Err(Error::Model("weight scale exponent above 18".into()));
        }
        let trees = trees
            .iter()
            .map(|g| g.iter().map(|t| t.check(&space)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(BoostedEnsemble {
            space,
            classes,
            scale,
            trees,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn trees(&self) -> &[Vec<Node>] {
        &self.trees
    }

    /// One score decides between two classes.
    pub fn is_single_score(&self) -> bool {
        self.trees.len() == 1 && self.classes.len() == 2
    }

    pub fn scores(&self, inst: &Instance) -> Vec<i64> {
        self.trees
            .iter()
            .map(|g| g.iter().map(|t| t.eval(inst)).sum())
            .collect()
    }

    pub fn classify(&self, inst: &Instance) -> usize {
        let s = self.scores(inst);
        if self.is_single_score() {
            return usize::from(s[0] > 0);
        }
        let mut best = 0;
        for k in 1..s.len() {
            if s[k] > s[best] {
                best = k;
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    DecisionList(DecisionList),
    Boosted(BoostedEnsemble),
}

impl Model {
    pub fn space(&self) -> &FeatureSpace {
        match self {
            Model::DecisionList(m) => m.space(),
            Model::Boosted(m) => m.space(),
        }
    }

    pub fn classes(&self) -> &[String] {
        match self {
            Model::DecisionList(m) => m.classes(),
            Model::Boosted(m) => m.classes(),
        }
    }

    pub fn classify(&self, inst: &Instance) -> usize {
        match self {
            Model::DecisionList(m) => m.classify(inst),
            Model::Boosted(m) => m.classify(inst),
        }
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes().iter().position(|c| c == label)
    }
}

impl From<DecisionList> for Model {
    fn from(m: DecisionList) -> Model {
        Model::DecisionList(m)
    }
}

impl From<BoostedEnsemble> for Model {
    fn from(m: BoostedEnsemble) -> Model {
        Model::Boosted(m)
    }
}
