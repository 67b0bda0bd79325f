//! Decides whether fixing some features of an instance, together with the
//! background knowledge, forces the model's prediction.

pub mod cnf;
mod solver;

use std::io::Write;

use num_bigint::BigUint;

use crate::domain::{FeatureSet, Instance, KnowledgeBase};
use crate::error::{Error, Result};
use crate::models::{model_constraints, Encoding, Model};
use cnf::{Formula, Lit};
pub use solver::Solver;

/// Largest feature space the exhaustive oracle will scan by default.
pub const DEFAULT_BRUTEFORCE_BOUND: u64 = 10_000_000;

/// Is there a point agreeing with `instance` on `fixed`, satisfying the
/// knowledge, and classified differently from `contested`?
#[derive(Clone, Copy, Debug)]
pub struct EntailmentQuery<'a> {
    pub fixed: &'a FeatureSet,
    pub instance: &'a Instance,
    pub model: &'a Model,
    pub contested: usize,
    pub knowledge: &'a KnowledgeBase,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Entails,
    Counterexample(Instance),
}

impl OracleResult {
    pub fn entails(&self) -> bool {
        matches!(self, OracleResult::Entails)
    }

    pub fn witness(&self) -> Option<&Instance> {
        match self {
            OracleResult::Entails => None,
            OracleResult::Counterexample(w) => Some(w),
        }
    }
}

fn check_query(q: &EntailmentQuery) -> Result<()> {
    let space = q.model.space();
    space.check_instance(q.instance)?;
    if let Some(&f) = q.fixed.iter().find(|&&f| f >= space.len()) {
        return Err(Error::Precondition(format!("fixed feature {f} out of range")));
    }
    if q.contested >= q.model.classes().len() {
        return Err(Error::Precondition(format!("class {} out of range", q.contested)));
    }
    check_compatible(q.knowledge, q.instance)
}

/// The instance must satisfy every knowledge clause.
pub fn check_compatible(knowledge: &KnowledgeBase, instance: &Instance) -> Result<()> {
    match knowledge.first_violated(instance) {
        None => Ok(()),
        Some(i) => Err(Error::Precondition(format!(
            "instance violates knowledge clause {i}"
        ))),
    }
}

/// The model, knowledge and "prediction differs from c" compiled once, for
/// any number of queries that differ only in the fixed features and instance.
#[derive(Clone, Debug)]
pub struct Oracle {
    encoding: Encoding,
    solvers: Vec<Solver>,
    contested: usize,
    calls: u64,
}

impl Oracle {
    pub fn new(model: &Model, knowledge: &KnowledgeBase, contested: usize) -> Result<Oracle> {
        if contested >= model.classes().len() {
            return Err(Error::Precondition(format!("class {contested} out of range")));
        }
        let encoding = model_constraints(model);
        let base = base_formula(&encoding, knowledge);
        let solvers = encoding
            .differs_from(contested)
            .into_iter()
            .map(|alt| {
                let mut f = base.clone();
                f.clauses.extend(alt.clauses);
                f.linear.extend(alt.linear);
                Solver::new(&f)
            })
            .collect();
        Ok(Oracle {
            encoding,
            solvers,
            contested,
            calls: 0,
        })
    }

    pub fn contested(&self) -> usize {
        self.contested
    }

    /// Queries answered so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Answers the query without re-checking the instance against the
    /// knowledge; callers check compatibility once per instance.
    pub fn query(&mut self, instance: &Instance, fixed: &FeatureSet) -> OracleResult {
        self.calls += 1;
        let ind = &self.encoding.indicators;
        let assumptions: Vec<Lit> = fixed.iter().map(|&f| Lit::pos(ind.var(f, instance[f]))).collect();
        for s in &mut self.solvers {
            if let Some(m) = s.solve(&assumptions) {
                return OracleResult::Counterexample(Instance::new(ind.decode(&m)));
            }
        }
        OracleResult::Entails
    }
}

fn base_formula(encoding: &Encoding, knowledge: &KnowledgeBase) -> Formula {
    let mut f = encoding.formula.clone();
    for c in knowledge.clauses() {
        f.add_clause(c.literals().iter().map(|l| encoding.indicators.lit(l)));
    }
    f
}

pub fn entails(q: &EntailmentQuery) -> Result<OracleResult> {
    check_query(q)?;
    Ok(Oracle::new(q.model, q.knowledge, q.contested)?.query(q.instance, q.fixed))
}

/// Scans the whole feature space in lexicographic order and returns the
/// first counterexample.
pub fn entails_bruteforce(q: &EntailmentQuery, bound: u64) -> Result<OracleResult> {
    check_query(q)?;
    let space = q.model.space();
    let size = space.size();
    if size > BigUint::from(bound) {
        return Err(Error::SpaceTooLarge { size, bound });
    }
    let n = space.len();
    let free: Vec<usize> = (0..n).filter(|f| !q.fixed.contains(f)).collect();
    let mut point = q.instance.values().to_vec();
    for &f in &free {
        point[f] = 0;
    }
    loop {
        let inst = Instance::new(point.clone());
        if q.knowledge.satisfied_by(&inst) && q.model.classify(&inst) != q.contested {
            return Ok(OracleResult::Counterexample(inst));
        }
        // odometer over the free features, last feature fastest
        let mut advanced = false;
        for &f in free.iter().rev() {
            if point[f] + 1 < space.domain_size(f) {
                point[f] += 1;
                advanced = true;
                break;
            }
            point[f] = 0;
        }
        if !advanced {
            return Ok(OracleResult::Entails);
        }
    }
}

/// DIMACS form of a query. Indicator `(f, v)` is variable `1 + offset(f) + v`;
/// multiclass ensembles yield one problem per competing class, separated by
/// a `c alternative` comment.
pub fn write_query_dimacs<W: Write>(q: &EntailmentQuery, mut w: W) -> Result<()> {
    check_query(q)?;
    let encoding = model_constraints(q.model);
    let space = q.model.space();
    let mut base = base_formula(&encoding, q.knowledge);
    for &f in q.fixed {
        base.add_clause([Lit::pos(encoding.indicators.var(f, q.instance[f]))]);
    }
    let mut comments = vec![format!("kxp entailment query, contested class {}", q.model.classes()[q.contested])];
    for f in 0..space.len() {
        for v in 0..space.domain_size(f) {
            comments.push(format!(
                "var {} {}={}",
                encoding.indicators.var(f, v) + 1,
                space.name(f),
                space.value_label(f, v)
            ));
        }
    }
    for (i, alt) in encoding.differs_from(q.contested).into_iter().enumerate() {
        let mut f = base.clone();
        f.clauses.extend(alt.clauses);
        f.linear.extend(alt.linear);
        if i > 0 {
            writeln!(w, "c alternative {i}")?;
        }
        f.write_dimacs(&mut w, if i == 0 { &comments } else { &[] })?;
    }
    Ok(())
}
