use serde::{Deserialize, Serialize};

use super::{eclat_mine, extract_all, ExtractionLimit};
use crate::domain::Rule;
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Share of test rows that do not falsify the rule.
pub fn rule_accuracy(rule: &Rule, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Precondition("rule accuracy needs a non-empty test set".into()));
    }
    let violated = test.rows().iter().filter(|r| rule.falsified_by(r)).count();
    Ok(1.0 - violated as f64 / test.len() as f64)
}

/// Keeps rules whose accuracy on `test` is at least `threshold`.
pub fn filter_by_accuracy(rules: Vec<Rule>, test: &Dataset, threshold: f64) -> Result<Vec<Rule>> {
    let mut out = Vec::new();
    for r in rules {
        if rule_accuracy(&r, test)? >= threshold {
            out.push(r);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Lattice,
    Eclat,
}

/// Mean accuracy of rules of one antecedent size (or of all sizes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeAccuracy {
    pub size: Option<usize>,
    /// Mean over folds that produced at least one such rule.
    pub mean: Option<f64>,
    pub rules: usize,
    pub folds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XvalReport {
    pub folds: usize,
    pub seed: u64,
    pub by_size: Vec<SizeAccuracy>,
    pub overall: SizeAccuracy,
    pub truncated: bool,
}

impl XvalReport {
    /// Aligned text table with columns `rule1 .. ruleK` and `rule_all`.
    pub fn to_table(&self) -> String {
        let cell = |s: &SizeAccuracy| match s.mean {
            Some(m) => format!("{:.2}", 100.0 * m),
            None => "-".to_string(),
        };
        let mut head: Vec<String> = self
            .by_size
            .iter()
            .map(|s| format!("rule{}", s.size.unwrap_or(0)))
            .collect();
        head.push("rule_all".into());
        let mut vals: Vec<String> = self.by_size.iter().map(cell).collect();
        vals.push(cell(&self.overall));
        let mut counts: Vec<String> = self.by_size.iter().map(|s| s.rules.to_string()).collect();
        counts.push(self.overall.rules.to_string());
        let width = head
            .iter()
            .chain(&vals)
            .chain(&counts)
            .map(String::len)
            .max()
            .unwrap_or(0);
        let line = |label: &str, cells: &[String]| {
            let mut s = format!("{label:<9}");
            for c in cells {
                s.push_str(&format!(" {c:>width$}"));
            }
            s.push('\n');
            s
        };
        line("", &head) + &line("accuracy", &vals) + &line("rules", &counts)
    }
}

/// Mines rules on each training fold and measures them on the held-out fold.
///
/// Accuracies are averaged over the rules of a fold and then over folds.
pub fn cross_validate_rules(
    data: &Dataset,
    k: usize,
    seed: u64,
    limit: &ExtractionLimit,
    engine: Engine,
    parallel: bool,
) -> Result<XvalReport> {
    limit.validate()?;
    let folds = data.folds(k, seed)?;
    let sizes = limit.max_size;
    let mut sums = vec![(0.0f64, 0usize, 0usize); sizes + 1];
    let mut overall = (0.0f64, 0usize, 0usize);
    let mut truncated = false;
    for (train, test) in &folds {
        let rules = match engine {
            Engine::Lattice => {
                let ex = extract_all(train, limit, parallel)?;
                truncated |= ex.truncated;
                ex.rules
            }
            Engine::Eclat => eclat_mine(&train.without_class(), limit.min_support, limit.max_size)?,
        };
        let mut fold = vec![(0.0f64, 0usize); sizes + 1];
        for r in &rules {
            let acc = rule_accuracy(r, test)?;
            fold[r.size()].0 += acc;
            fold[r.size()].1 += 1;
        }
        let (all_sum, all_n) = fold.iter().fold((0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        for (s, (sum, cnt)) in fold.into_iter().enumerate() {
            if cnt > 0 {
                sums[s].0 += sum / cnt as f64;
                sums[s].1 += cnt;
                sums[s].2 += 1;
            }
        }
        if all_n > 0 {
            overall.0 += all_sum / all_n as f64;
            overall.1 += all_n;
            overall.2 += 1;
        }
    }
    let mk = |size, (sum, rules, nfolds): (f64, usize, usize)| SizeAccuracy {
        size,
        mean: (nfolds > 0).then(|| sum / nfolds as f64),
        rules,
        folds: nfolds,
    };
    Ok(XvalReport {
        folds: k,
        seed,
        by_size: (1..=sizes).map(|s| mk(Some(s), sums[s])).collect(),
        overall: mk(None, overall),
        truncated,
    })
}
