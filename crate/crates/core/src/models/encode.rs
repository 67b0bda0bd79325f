//! Propositional view of a model's decision procedure.
//!
//! Variables `0..indicators.count()` are the one-hot value indicators; the
//! remaining variables are rule-firing or leaf-activation variables.

use super::{BoostedEnsemble, DecisionList, Model};
use crate::oracle::cnf::{Formula, GroupedLinear, Indicators, Lit, Var};

/// How the class is read off the auxiliary variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// `firing[c]` lists variables any of which, when true, selects class `c`.
    /// Exactly one firing variable is true in every model.
    Firing(Vec<Vec<Var>>),
    /// Per score, per tree: leaf variables with their integer weights.
    Scores { scores: Vec<Vec<Vec<(Var, i64)>>>, single: bool },
}

#[derive(Clone, Debug)]
pub struct Encoding {
    pub indicators: Indicators,
    /// One-hot constraints plus the model's semantics.
    pub formula: Formula,
    pub decision: Decision,
    pub num_classes: usize,
}

/// Clauses and linear constraints describing how the model classifies.
pub fn model_constraints(model: &Model) -> Encoding {
    match model {
        Model::DecisionList(dl) => encode_list(dl),
        Model::Boosted(bt) => encode_boosted(bt),
    }
}

fn encode_list(dl: &DecisionList) -> Encoding {
    let ind = Indicators::new(dl.space());
    let mut f = Formula::default();
    ind.one_hot(&mut f);
    let mut firing = vec![Vec::new(); dl.classes().len()];
    // `earlier` is true iff some rule before the current one fires
    let mut earlier: Option<Var> = None;
    for rule in dl.rules() {
        let fire = f.new_var();
        let ante: Vec<Lit> = rule.antecedent.iter().map(|l| ind.lit(l)).collect();
        for &a in &ante {
            f.add_clause([Lit::neg(fire), a]);
        }
        let mut back: Vec<Lit> = ante.iter().map(|&a| !a).collect();
        back.push(Lit::pos(fire));
        if let Some(e) = earlier {
            f.add_clause([Lit::neg(fire), Lit::neg(e)]);
            back.push(Lit::pos(e));
        }
        f.add_clause(back);
        firing[rule.class].push(fire);

        let any = f.new_var();
        match earlier {
            Some(e) => {
                f.add_clause([Lit::neg(any), Lit::pos(e), Lit::pos(fire)]);
                f.add_clause([Lit::pos(any), Lit::neg(e)]);
            }
            None => f.add_clause([Lit::neg(any), Lit::pos(fire)]),
        }
        f.add_clause([Lit::pos(any), Lit::neg(fire)]);
        earlier = Some(any);
    }
    let default = f.new_var();
    match earlier {
        Some(e) => {
            f.add_clause([Lit::pos(default), Lit::pos(e)]);
            f.add_clause([Lit::neg(default), Lit::neg(e)]);
        }
        None => f.add_clause([Lit::pos(default)]),
    }
    firing[dl.default_class()].push(default);
    Encoding {
        indicators: ind,
        formula: f,
        decision: Decision::Firing(firing),
        num_classes: dl.classes().len(),
    }
}

fn encode_boosted(bt: &BoostedEnsemble) -> Encoding {
    let ind = Indicators::new(bt.space());
    let mut f = Formula::default();
    ind.one_hot(&mut f);
    let mut scores = Vec::new();
    for group in bt.trees() {
        let mut per_tree = Vec::new();
        for tree in group {
            let mut leaves = Vec::new();
            for (path, w) in tree.leaves() {
                let leaf = f.new_var();
                let lits: Vec<Lit> = path.iter().map(|l| ind.lit(l)).collect();
                for &l in &lits {
                    f.add_clause([Lit::neg(leaf), l]);
                }
                let mut back: Vec<Lit> = lits.iter().map(|&l| !l).collect();
                back.push(Lit::pos(leaf));
                f.add_clause(back);
                leaves.push((leaf, w));
            }
            f.add_clause(leaves.iter().map(|&(v, _)| Lit::pos(v)));
            for i in 0..leaves.len() {
                for j in i + 1..leaves.len() {
                    f.add_clause([Lit::neg(leaves[i].0), Lit::neg(leaves[j].0)]);
                }
            }
            per_tree.push(leaves);
        }
        scores.push(per_tree);
    }
    Encoding {
        indicators: ind,
        formula: f,
        decision: Decision::Scores {
            scores,
            single: bt.is_single_score(),
        },
        num_classes: bt.classes().len(),
    }
}

/// Extra constraints for one way the prediction can differ from a class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alternative {
    pub clauses: Vec<Vec<Lit>>,
    pub linear: Vec<GroupedLinear>,
}

impl Encoding {
    /// Alternatives whose union is exactly "the predicted class is not `c`".
    pub fn differs_from(&self, c: usize) -> Vec<Alternative> {
        match &self.decision {
            Decision::Firing(firing) => {
                let clause: Vec<Lit> = firing
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != c)
                    .flat_map(|(_, vs)| vs.iter().map(|&v| Lit::pos(v)))
                    .collect();
                vec![Alternative {
                    clauses: vec![clause],
                    linear: Vec::new(),
                }]
            }
            Decision::Scores { scores, single: true } => {
                // class 1 iff score > 0
                let sign = if c == 1 { -1 } else { 1 };
                let groups = scores[0]
                    .iter()
                    .map(|t| t.iter().map(|&(v, w)| (v, sign * w)).collect())
                    .collect();
                vec![Alternative {
                    clauses: Vec::new(),
                    linear: vec![GroupedLinear {
                        groups,
                        bound: if c == 1 { 0 } else { 1 },
                    }],
                }]
            }
            Decision::Scores { scores, single: false } => (0..scores.len())
                .filter(|&k| k != c)
                .map(|k| {
                    // class k beats c: S_k - S_c >= 0 when k < c, else >= 1
                    let mut groups: Vec<Vec<(Var, i64)>> = scores[k].clone();
                    groups.extend(
                        scores[c]
                            .iter()
                            .map(|t| t.iter().map(|&(v, w)| (v, -w)).collect()),
                    );
                    Alternative {
                        clauses: Vec::new(),
                        linear: vec![GroupedLinear {
                            groups,
                            bound: if k < c { 0 } else { 1 },
                        }],
                    }
                })
                .collect(),
        }
    }

    /// The class selected by a total assignment of the formula.
    pub fn decode_class(&self, model: &[bool]) -> usize {
        match &self.decision {
            Decision::Firing(firing) => firing
                .iter()
                .position(|vs| vs.iter().any(|&v| model[v as usize]))
                .expect("exactly one firing variable is true"),
            Decision::Scores { scores, single } => {
                let s: Vec<i64> = scores
                    .iter()
                    .map(|trees| {
                        trees
                            .iter()
                            .flat_map(|t| t.iter())
                            .filter(|(v, _)| model[*v as usize])
                            .map(|(_, w)| w)
                            .sum()
                    })
                    .collect();
                if *single {
                    usize::from(s[0] > 0)
                } else {
                    let mut best = 0;
                    for k in 1..s.len() {
                        if s[k] > s[best] {
                            best = k;
                        }
                    }
                    best
                }
            }
        }
    }
}
