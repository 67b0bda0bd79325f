//! Minimum-cardinality hitting sets by iterative deepening branch and bound.

use crate::domain::FeatureSet;

/// Smallest `H ⊆ {0..n}` meeting every set in `hit` and containing no set
/// in `avoid` entirely. Among minimum solutions the lexicographically least
/// (as an ascending sequence) is returned; `None` when none exists.
pub fn min_hitting_set(n: usize, hit: &[FeatureSet], avoid: &[FeatureSet]) -> Option<FeatureSet> {
    if hit.iter().any(|s| s.is_empty()) || avoid.iter().any(|s| s.is_empty()) {
        return None;
    }
    let words = n.div_ceil(64).max(1);
    let to_mask = |s: &FeatureSet| {
        let mut m = vec![0u64; words];
        for &e in s {
            m[e / 64] |= 1 << (e % 64);
        }
        m
    };
    let search = Search {
        n,
        hit: hit.iter().map(to_mask).collect(),
        avoid: avoid.iter().map(to_mask).collect(),
    };
    let mut chosen = vec![0u64; words];
    for k in 0..=n {
        if search.dfs(0, k, &mut chosen) {
            return Some((0..n).filter(|&e| chosen[e / 64] >> (e % 64) & 1 == 1).collect());
        }
    }
    None
}

struct Search {
    n: usize,
    hit: Vec<Vec<u64>>,
    avoid: Vec<Vec<u64>>,
}

fn meets(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn within(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Bits at positions `>= from`.
fn tail(words: usize, from: usize) -> Vec<u64> {
    (0..words)
        .map(|w| {
            let lo = w * 64;
            if from <= lo {
                !0
            } else if from >= lo + 64 {
                0
            } else {
                !0u64 << (from - lo)
            }
        })
        .collect()
}

impl Search {
    fn dfs(&self, next: usize, budget: usize, chosen: &mut Vec<u64>) -> bool {
        if self.avoid.iter().any(|a| within(a, chosen)) {
            return false;
        }
        let open = tail(chosen.len(), next);
        // unhit sets, restricted to elements still available
        let mut unhit: Vec<Vec<u64>> = Vec::new();
        for s in &self.hit {
            if meets(s, chosen) {
                continue;
            }
            let rest: Vec<u64> = s.iter().zip(&open).map(|(x, y)| x & y).collect();
            if rest.iter().all(|&w| w == 0) {
                return false;
            }
            unhit.push(rest);
        }
        if unhit.is_empty() {
            return true;
        }
        if budget == 0 || next >= self.n {
            return false;
        }
        // disjoint unhit sets each need their own element
        let mut used = vec![0u64; chosen.len()];
        let mut bound = 0;
        for s in &unhit {
            if !meets(s, &used) {
                bound += 1;
                for (u, x) in used.iter_mut().zip(s) {
                    *u |= x;
                }
            }
        }
        if bound > budget {
            return false;
        }
        let (w, b) = (next / 64, 1u64 << (next % 64));
        let useful = unhit.iter().any(|s| s[w] & b != 0);
        if useful {
            chosen[w] |= b;
            if self.dfs(next + 1, budget - 1, chosen) {
                return true;
            }
            chosen[w] &= !b;
        }
        self.dfs(next + 1, budget, chosen)
    }
}
