//! Exact association rules from frequent itemsets, equality items only.

use std::collections::{HashMap, HashSet};

use crate::bitset::BitSet;
use crate::domain::{rule_to_clause, Literal, Polarity, Rule, RuleStats};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Frequent itemsets by depth-first tid-list intersection, then every
/// confidence-1 rule `I \ {c} -> c` whose antecedent is minimal for `c`.
///
/// Antecedents have at most `max_size` items. Rules are ordered by
/// consequent, then size, then antecedent; the class column is ignored and
/// clausal duplicates keep their first reading.
pub fn eclat_mine(train: &Dataset, min_support: usize, max_size: usize) -> Result<Vec<Rule>> {
    if min_support == 0 || max_size == 0 {
        return Err(Error::Precondition(
            "minimum support and maximum size must be at least 1".into(),
        ));
    }
    let space = train.space();
    let n = train.len();
    let items: Vec<Literal> = (0..space.len())
        .flat_map(|f| {
            (0..space.domain_size(f)).map(move |v| Literal {
                feature: f,
                polarity: Polarity::Equals,
                value: v,
            })
        })
        .collect();
    let tids: Vec<BitSet> = items
        .iter()
        .map(|l| BitSet::from_fn(n, |r| l.satisfied_by(train.row(r))))
        .collect();

    let mut support: HashMap<Vec<u32>, usize> = HashMap::new();
    support.insert(Vec::new(), n);
    let roots: Vec<(u32, BitSet)> = (0..items.len())
        .filter(|&i| tids[i].count() >= min_support)
        .map(|i| (i as u32, tids[i].clone()))
        .collect();
    let mut prefix = Vec::new();
    grow(&items, &roots, &mut prefix, max_size + 1, min_support, &mut support);

    let mut rules: Vec<(u32, Vec<u32>, usize)> = Vec::new();
    for (set, &sup) in &support {
        for (k, &c) in set.iter().enumerate() {
            let mut ante = set.clone();
            ante.remove(k);
            if support[&ante] != sup {
                continue;
            }
            let minimal = (0..ante.len()).all(|j| {
                let mut sub = ante.clone();
                sub.remove(j);
                let mut with_c = sub.clone();
                let pos = with_c.partition_point(|&x| x < c);
                with_c.insert(pos, c);
                support[&sub] != support[&with_c]
            });
            if minimal {
                rules.push((c, ante, sup));
            }
        }
    }
    rules.sort_by(|a, b| (a.0, a.1.len(), &a.1).cmp(&(b.0, b.1.len(), &b.1)));

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (c, ante, sup) in rules {
        let rule = Rule::new(
            space,
            ante.iter().map(|&i| items[i as usize]),
            items[c as usize],
            out.len(),
            RuleStats {
                support: sup,
                consistency: 1.0,
            },
        )?;
        if seen.insert(rule_to_clause(space, &rule)) {
            out.push(rule);
        }
    }
    Ok(out)
}

fn grow(
    items: &[Literal],
    siblings: &[(u32, BitSet)],
    prefix: &mut Vec<u32>,
    max_len: usize,
    min_support: usize,
    support: &mut HashMap<Vec<u32>, usize>,
) {
    for (k, (item, rows)) in siblings.iter().enumerate() {
        prefix.push(*item);
        support.insert(prefix.clone(), rows.count());
        if prefix.len() < max_len {
            let feature = items[*item as usize].feature;
            let children: Vec<(u32, BitSet)> = siblings[k + 1..]
                .iter()
                .filter(|(other, _)| items[*other as usize].feature != feature)
                .filter_map(|(other, other_rows)| {
                    let joined = rows.and(other_rows);
                    (joined.count() >= min_support).then_some((*other, joined))
                })
                .collect();
            grow(items, &children, prefix, max_len, min_support, support);
        }
        prefix.pop();
    }
}
