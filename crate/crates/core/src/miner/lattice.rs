//! Breadth-first enumeration of subset-minimal, training-consistent rules.
//!
//! Antecedents use at most one literal per feature. Each level is generated
//! by joining frontier nodes that share all but their last literal; a
//! candidate survives only when every one of its immediate subsets is still
//! on the frontier (inconsistent, supported, and not pruned). Three exact
//! prunings keep the frontier small:
//!
//! * support is anti-monotone, so low-support antecedents are dropped;
//! * supersets of consistent antecedents are never minimal;
//! * a literal that removes no remaining negative row from its parent can
//!   never belong to a minimal antecedent, whatever is added later.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use super::ExtractionLimit;
use crate::bitset::BitSet;
use crate::domain::{rule_to_clause, Clause, FeatureSpace, KnowledgeBase, Literal, Polarity, Rule, RuleStats};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Literal language for antecedents of rules about `target_feature`:
/// every equality, plus disequalities on domains with three or more values.
pub fn candidate_literals(space: &FeatureSpace, target_feature: usize) -> Vec<Literal> {
    let mut out = Vec::new();
    for f in (0..space.len()).filter(|&f| f != target_feature) {
        for v in 0..space.domain_size(f) {
            out.push(Literal { feature: f, polarity: Polarity::Equals, value: v });
        }
        if space.domain_size(f) >= 3 {
            for v in 0..space.domain_size(f) {
                out.push(Literal { feature: f, polarity: Polarity::NotEquals, value: v });
            }
        }
    }
    out.sort();
    out
}

struct Node {
    items: Vec<u32>,
    rows: BitSet,
    negatives: usize,
}

/// Outcome of searching one target before any blocking is applied.
pub(crate) struct TargetSearch {
    pub rules: Vec<Rule>,
    pub truncated: bool,
}

pub(crate) fn search_target(
    ds: &Dataset,
    target: Literal,
    limit: &ExtractionLimit,
    deadline: Option<Instant>,
) -> TargetSearch {
    let space = ds.space();
    let n = ds.len();
    let positive = BitSet::from_fn(n, |r| target.satisfied_by(ds.row(r)));
    let negative = positive.complement();
    let mut rules = Vec::new();

    let make_rule = |items: &[u32], lits: &[Literal], support: usize| {
        Rule::new(
            space,
            items.iter().map(|&i| lits[i as usize]),
            target,
            0,
            RuleStats { support, consistency: 1.0 },
        )
        .expect("mined antecedents use one literal per feature")
    };

    let root_support = positive.count();
    if root_support < limit.min_support {
        return TargetSearch { rules, truncated: false };
    }
    if negative.count() == 0 {
        rules.push(make_rule(&[], &[], root_support));
        return TargetSearch { rules, truncated: false };
    }
    if limit.max_size == 0 {
        return TargetSearch { rules, truncated: false };
    }

    let lits = candidate_literals(space, target.feature);
    let lit_rows: Vec<BitSet> = lits
        .iter()
        .map(|l| BitSet::from_fn(n, |r| l.satisfied_by(ds.row(r))))
        .collect();
    let total_negatives = negative.count();

    let mut frontier: Vec<Node> = Vec::new();
    for (i, rows) in lit_rows.iter().enumerate() {
        let support = rows.and_count(&positive);
        let negatives = rows.and_count(&negative);
        if support < limit.min_support || negatives == total_negatives {
            continue;
        }
        if negatives == 0 {
            rules.push(make_rule(&[i as u32], &lits, support));
        } else {
            frontier.push(Node { items: vec![i as u32], rows: rows.clone(), negatives });
        }
    }

    let mut level = 1;
    while level < limit.max_size && frontier.len() > 1 {
        let index: HashMap<&[u32], usize> = frontier
            .iter()
            .enumerate()
            .map(|(i, node)| (node.items.as_slice(), i))
            .collect();
        let mut next = Vec::new();
        let mut probe: Vec<u32> = Vec::with_capacity(level + 1);
        let mut start = 0;
        while start < frontier.len() {
            let prefix = &frontier[start].items[..level - 1];
            let mut end = start + 1;
            while end < frontier.len() && &frontier[end].items[..level - 1] == prefix {
                end += 1;
            }
            for a in start..end {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        return TargetSearch { rules, truncated: true };
                    }
                }
                let node_a = &frontier[a];
                let last_a = *node_a.items.last().unwrap() as usize;
                for node_b in &frontier[a + 1..end] {
                    let last_b = *node_b.items.last().unwrap() as usize;
                    if lits[last_b].feature == lits[last_a].feature {
                        continue;
                    }
                    let mut items = node_a.items.clone();
                    items.push(last_b as u32);
                    let rows = node_a.rows.and(&lit_rows[last_b]);
                    let support = rows.and_count(&positive);
                    if support < limit.min_support {
                        continue;
                    }
                    let negatives = rows.and_count(&negative);
                    if negatives == node_a.negatives || negatives == node_b.negatives {
                        continue;
                    }
                    // the remaining immediate subsets drop one prefix literal
                    let mut alive = true;
                    for skip in 0..level - 1 {
                        probe.clear();
                        probe.extend(items.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &x)| x));
                        match index.get(probe.as_slice()) {
                            Some(&s) if frontier[s].negatives != negatives => {}
                            _ => {
                                alive = false;
                                break;
                            }
                        }
                    }
                    if !alive {
                        continue;
                    }
                    if negatives == 0 {
                        rules.push(make_rule(&items, &lits, support));
                    } else {
                        next.push(Node { items, rows, negatives });
                    }
                }
            }
            start = end;
        }
        frontier = next;
        level += 1;
    }
    TargetSearch { rules, truncated: false }
}

/// Subset-minimal rules concluding `target` that hold on every training row,
/// skipping any whose clausal form is already in `blocked`.
///
/// Output order is nondecreasing in antecedent size, then lexicographic in
/// (feature, polarity, value) of the antecedent literals.
pub fn enumerate_min_rules(
    train: &Dataset,
    target: Literal,
    blocked: &KnowledgeBase,
    limit: &ExtractionLimit,
) -> Result<Vec<Rule>> {
    limit.validate()?;
    let target = Literal::new(train.space(), target.feature, target.polarity, target.value)?;
    if target.polarity != Polarity::Equals {
        return Err(Error::Precondition("rule targets must be equality literals".into()));
    }
    let deadline = limit.time_budget.map(|t| Instant::now() + t);
    let search = search_target(train, target, limit, deadline);
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (id, mut rule) in search.rules.into_iter().enumerate() {
        let clause = rule_to_clause(train.space(), &rule);
        if blocked.contains(&clause) || !seen.insert(clause) {
            continue;
        }
        rule.id = id;
        out.push(rule);
        if limit.max_rules.is_some_and(|m| out.len() >= m) {
            break;
        }
    }
    Ok(out)
}

/// Rules and knowledge extracted from a training set.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub rules: Vec<Rule>,
    pub knowledge: KnowledgeBase,
    /// A rule-count or time limit stopped the enumeration early.
    pub truncated: bool,
}

fn targets(space: &FeatureSpace) -> Vec<Literal> {
    (0..space.len())
        .flat_map(|f| {
            (0..space.domain_size(f)).map(move |v| Literal { feature: f, polarity: Polarity::Equals, value: v })
        })
        .collect()
}

/// Mines rules for every feature value in turn (the class is ignored),
/// blocking the clausal form of each emitted rule for all later targets.
///
/// With `parallel` set, targets are searched concurrently; blocking is then
/// applied in the same target order, so the output is identical unless a
/// time budget interrupts the search.
pub fn extract_all(train: &Dataset, limit: &ExtractionLimit, parallel: bool) -> Result<Extraction> {
    limit.validate()?;
    let ds = train.without_class();
    let space = ds.space();
    let deadline = limit.time_budget.map(|t| Instant::now() + t);
    let targets = targets(space);
    let searches: Vec<TargetSearch> = if parallel {
        targets.par_iter().map(|&t| search_target(&ds, t, limit, deadline)).collect()
    } else {
        let mut v = Vec::with_capacity(targets.len());
        for &t in &targets {
            let s = search_target(&ds, t, limit, deadline);
            let stop = s.truncated;
            v.push(s);
            if stop {
                break;
            }
        }
        v
    };

    let mut knowledge = KnowledgeBase::new();
    let mut rules = Vec::new();
    let mut truncated = false;
    'outer: for search in searches {
        truncated |= search.truncated;
        for mut rule in search.rules {
            let clause: Clause = rule_to_clause(space, &rule);
            if knowledge.contains(&clause) {
                continue;
            }
            rule.id = rules.len();
            knowledge.insert(clause, Some(rule.id));
            rules.push(rule);
            if limit.max_rules.is_some_and(|m| rules.len() >= m) {
                truncated = true;
                break 'outer;
            }
        }
    }
    Ok(Extraction { rules, knowledge, truncated })
}
