//! Small greedy learners for producing test models from a dataset.

use super::{BoostedEnsemble, DecisionList, ListRule, Node};
use crate::domain::{Literal, Polarity};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

#[derive(Clone, Debug, PartialEq)]
pub struct ListOptions {
    pub max_rules: usize,
    pub max_antecedent: usize,
    pub min_coverage: usize,
}

impl Default for ListOptions {
    fn default() -> Self {
        ListOptions {
            max_rules: 20,
            max_antecedent: 3,
            min_coverage: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoostOptions {
    pub rounds: usize,
    pub depth: usize,
    pub learning_rate: f64,
    pub scale: u32,
    pub min_leaf: usize,
    pub l2: f64,
}

impl Default for BoostOptions {
    fn default() -> Self {
        BoostOptions {
            rounds: 25,
            depth: 3,
            learning_rate: 0.3,
            scale: 4,
            min_leaf: 2,
            l2: 1.0,
        }
    }
}

fn labels(ds: &Dataset) -> Result<(&[usize], usize)> {
    let c = ds
        .classes()
        .ok_or_else(|| Error::Precondition("training needs a class column".into()))?;
    if ds.is_empty() {
        return Err(Error::Precondition("training needs at least one row".into()));
    }
    Ok((&c.values, c.labels.len()))
}

fn majority(rows: &[usize], y: &[usize], k: usize) -> (usize, usize) {
    let mut counts = vec![0; k];
    for &r in rows {
        counts[y[r]] += 1;
    }
    let mut best = 0;
    for c in 1..k {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    (best, counts[best])
}

fn equality_literals(ds: &Dataset) -> Vec<Literal> {
    let space = ds.space();
    (0..space.len())
        .flat_map(|f| {
            (0..space.domain_size(f)).map(move |v| Literal {
                feature: f,
                polarity: Polarity::Equals,
                value: v,
            })
        })
        .collect()
}

/// Sequential covering: grow one rule at a time by the literal that most
/// improves the (Laplace-corrected) purity of the rows it covers, then remove
/// those rows.
pub fn train_decision_list(ds: &Dataset, opts: &ListOptions) -> Result<DecisionList> {
    let (y, k) = labels(ds)?;
    let lits = equality_literals(ds);
    let purity = |rows: &[usize]| {
        let (_, m) = majority(rows, y, k);
        (m as f64 + 1.0) / (rows.len() as f64 + k as f64)
    };
    let mut remaining: Vec<usize> = (0..ds.len()).collect();
    let mut rules = Vec::new();
    while rules.len() < opts.max_rules && !remaining.is_empty() {
        let (_, m) = majority(&remaining, y, k);
        if m == remaining.len() {
            break;
        }
        let mut ante: Vec<Literal> = Vec::new();
        let mut covered = remaining.clone();
        while ante.len() < opts.max_antecedent {
            let (_, m) = majority(&covered, y, k);
            if m == covered.len() {
                break;
            }
            let current = purity(&covered);
            let mut best: Option<(f64, Literal, Vec<usize>)> = None;
            for l in lits.iter().filter(|l| ante.iter().all(|a| a.feature != l.feature)) {
                let rows: Vec<usize> = covered.iter().copied().filter(|&r| l.satisfied_by(ds.row(r))).collect();
                if rows.len() < opts.min_coverage {
                    continue;
                }
                let p = purity(&rows);
                if p > current && best.as_ref().is_none_or(|b| p > b.0) {
                    best = Some((p, *l, rows));
                }
            }
            match best {
                Some((_, l, rows)) => {
                    ante.push(l);
                    covered = rows;
                }
                None => break,
            }
        }
        if ante.is_empty() {
            break;
        }
        let (class, _) = majority(&covered, y, k);
        remaining.retain(|r| !covered.contains(r));
        rules.push(ListRule {
            antecedent: ante,
            class,
        });
    }
    let all: Vec<usize> = (0..ds.len()).collect();
    let default = if remaining.is_empty() {
        majority(&all, y, k).0
    } else {
        majority(&remaining, y, k).0
    };
    let classes = ds.classes().unwrap().labels.clone();
    DecisionList::new(ds.space().clone(), classes, rules, default)
}

struct Grad<'a> {
    g: &'a [f64],
    h: &'a [f64],
}

fn fit_tree(ds: &Dataset, lits: &[Literal], rows: &[usize], grad: &Grad, depth: usize, opts: &BoostOptions) -> Node {
    let sum = |rs: &[usize]| {
        rs.iter()
            .fold((0.0, 0.0), |(g, h), &r| (g + grad.g[r], h + grad.h[r]))
    };
    let (g, h) = sum(rows);
    let score = |g: f64, h: f64| g * g / (h + opts.l2);
    let leaf = || {
        let w = -g / (h + opts.l2) * opts.learning_rate;
        Node::Leaf((w * 10f64.powi(opts.scale as i32)).round() as i64)
    };
    if depth == 0 || rows.len() < 2 * opts.min_leaf {
        return leaf();
    }
    let mut best: Option<(f64, Literal)> = None;
    for l in lits {
        let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0);
        for &r in rows {
            if l.satisfied_by(ds.row(r)) {
                gl += grad.g[r];
                hl += grad.h[r];
                nl += 1;
            }
        }
        if nl < opts.min_leaf || rows.len() - nl < opts.min_leaf {
            continue;
        }
        let gain = score(gl, hl) + score(g - gl, h - hl) - score(g, h);
        if gain > 1e-9 && best.is_none_or(|b| gain > b.0) {
            best = Some((gain, *l));
        }
    }
    match best {
        None => leaf(),
        Some((_, l)) => {
            let (yes, no): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| l.satisfied_by(ds.row(r)));
            Node::split(
                l,
                fit_tree(ds, lits, &yes, grad, depth - 1, opts),
                fit_tree(ds, lits, &no, grad, depth - 1, opts),
            )
        }
    }
}

/// Gradient boosting of depth-limited trees with equality splits; logistic
/// loss with a single score for two classes, softmax otherwise. Leaf weights
/// are rounded to the fixed-point scale as each tree is built.
pub fn train_boosted(ds: &Dataset, opts: &BoostOptions) -> Result<BoostedEnsemble> {
    let (y, k) = labels(ds)?;
    if k < 2 {
        return Err(Error::Precondition("boosting needs at least two classes".into()));
    }
    let lits = equality_literals(ds);
    let n = ds.len();
    let rows: Vec<usize> = (0..n).collect();
    let unit = 10f64.powi(opts.scale as i32);
    let groups = if k == 2 { 1 } else { k };
    let mut margin = vec![vec![0.0f64; n]; groups];
    let mut trees: Vec<Vec<Node>> = vec![Vec::new(); groups];
    for _ in 0..opts.rounds {
        let mut grads = Vec::with_capacity(groups);
        if k == 2 {
            let (mut g, mut h) = (vec![0.0; n], vec![0.0; n]);
            for r in 0..n {
                let p = 1.0 / (1.0 + (-margin[0][r]).exp());
                g[r] = p - (y[r] == 1) as u8 as f64;
                h[r] = (p * (1.0 - p)).max(1e-6);
            }
            grads.push((g, h));
        } else {
            let probs: Vec<Vec<f64>> = (0..n)
                .map(|r| {
                    let mx = (0..k).map(|c| margin[c][r]).fold(f64::NEG_INFINITY, f64::max);
                    let e: Vec<f64> = (0..k).map(|c| (margin[c][r] - mx).exp()).collect();
                    let z: f64 = e.iter().sum();
                    e.into_iter().map(|x| x / z).collect()
                })
                .collect();
            grads.extend((0..k).map(|c| {
                let g = probs.iter().zip(y.iter()).map(|(p, &yr)| p[c] - (yr == c) as u8 as f64).collect();
                let h = probs.iter().map(|p| (p[c] * (1.0 - p[c])).max(1e-6)).collect();
                (g, h)
            }));
        }
        for (c, (g, h)) in grads.iter().enumerate() {
            let tree = fit_tree(ds, &lits, &rows, &Grad { g, h }, opts.depth, opts);
            for (r, m) in margin[c].iter_mut().enumerate() {
                *m += tree.eval(ds.row(r)) as f64 / unit;
            }
            trees[c].push(tree);
        }
    }
    let classes = ds.classes().unwrap().labels.clone();
    BoostedEnsemble::new(ds.space().clone(), classes, opts.scale, trees)
}
