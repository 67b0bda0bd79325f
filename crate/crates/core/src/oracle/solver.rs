//! Backtracking search with two-watched-literal unit propagation and
//! bound propagation for grouped linear constraints.

use super::cnf::{Formula, GroupedLinear, Lit, Var};

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Clone, Debug)]
struct Level {
    trail_start: usize,
    decision: Lit,
    flipped: bool,
}

/// A formula compiled for repeated solving under assumptions.
#[derive(Clone, Debug)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    linear: Vec<GroupedLinear>,
    var_linear: Vec<Vec<usize>>,
    assign: Vec<i8>,
    trail: Vec<Lit>,
    levels: Vec<Level>,
    qhead: usize,
    lin_dirty: Vec<bool>,
    lin_queue: Vec<usize>,
    units: Vec<Lit>,
    unsat: bool,
    root_trail: usize,
    decisions: u64,
}

impl Solver {
    pub fn new(formula: &Formula) -> Solver {
        let n = formula.num_vars;
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            linear: formula.linear.clone(),
            var_linear: vec![Vec::new(); n],
            assign: vec![UNDEF; n],
            trail: Vec::new(),
            levels: Vec::new(),
            qhead: 0,
            lin_dirty: vec![false; formula.linear.len()],
            lin_queue: Vec::new(),
            units: Vec::new(),
            unsat: false,
            root_trail: 0,
            decisions: 0,
        };
        for (i, lin) in s.linear.iter().enumerate() {
            for g in &lin.groups {
                for &(v, _) in g {
                    s.var_linear[v as usize].push(i);
                }
            }
        }
        for vl in &mut s.var_linear {
            vl.dedup();
        }
        for cl in &formula.clauses {
            s.add_clause(cl);
        }
        if !s.unsat {
            for u in std::mem::take(&mut s.units) {
                if !s.enqueue(u) {
                    s.unsat = true;
                    break;
                }
            }
        }
        if !s.unsat {
            s.lin_queue = (0..s.linear.len()).collect();
            s.lin_dirty.iter_mut().for_each(|d| *d = true);
            if !s.propagate() {
                s.unsat = true;
            }
        }
        s.root_trail = s.trail.len();
        s
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        match c.len() {
            0 => self.unsat = true,
            1 => self.units.push(c[0]),
            _ => {
                let idx = self.clauses.len();
                self.watches[(!c[0]).code()].push(idx);
                self.watches[(!c[1]).code()].push(idx);
                self.clauses.push(c);
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    /// Decisions made over the solver's lifetime.
    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let a = self.assign[l.var() as usize];
        if l.is_positive() {
            a
        } else {
            -a
        }
    }

    fn enqueue(&mut self, l: Lit) -> bool {
        match self.value(l) {
            TRUE => true,
            FALSE => false,
            _ => {
                self.assign[l.var() as usize] = if l.is_positive() { TRUE } else { FALSE };
                self.trail.push(l);
                for &i in &self.var_linear[l.var() as usize] {
                    if !self.lin_dirty[i] {
                        self.lin_dirty[i] = true;
                        self.lin_queue.push(i);
                    }
                }
                true
            }
        }
    }

    /// Runs to fixpoint; false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            while self.qhead < self.trail.len() {
                let p = self.trail[self.qhead];
                self.qhead += 1;
                // clauses watching the literal that just became false
                let mut ws = std::mem::take(&mut self.watches[p.code()]);
                let false_lit = !p;
                let mut i = 0;
                let mut conflict = false;
                while i < ws.len() {
                    let ci = ws[i];
                    let c = &mut self.clauses[ci];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                    let first = c[0];
                    let first_val = {
                        let a = self.assign[first.var() as usize];
                        if first.is_positive() {
                            a
                        } else {
                            -a
                        }
                    };
                    if first_val == TRUE {
                        i += 1;
                        continue;
                    }
                    let mut moved = false;
                    for k in 2..c.len() {
                        let l = c[k];
                        let a = self.assign[l.var() as usize];
                        let v = if l.is_positive() { a } else { -a };
                        if v != FALSE {
                            c.swap(1, k);
                            let new_watch = c[1];
                            self.watches[(!new_watch).code()].push(ci);
                            ws.swap_remove(i);
                            moved = true;
                            break;
                        }
                    }
                    if moved {
                        continue;
                    }
                    i += 1;
                    if first_val == FALSE {
                        conflict = true;
                        break;
                    }
                    self.enqueue(first);
                }
                let rest = std::mem::take(&mut self.watches[p.code()]);
                ws.extend(rest);
                self.watches[p.code()] = ws;
                if conflict {
                    return false;
                }
            }
            if self.lin_queue.is_empty() {
                return true;
            }
            while let Some(i) = self.lin_queue.pop() {
                self.lin_dirty[i] = false;
                if !self.propagate_linear(i) {
                    for j in self.lin_queue.drain(..) {
                        self.lin_dirty[j] = false;
                    }
                    return false;
                }
            }
        }
    }

    fn propagate_linear(&mut self, i: usize) -> bool {
        let lin = &self.linear[i];
        let mut total: i64 = 0;
        let mut gmax = Vec::with_capacity(lin.groups.len());
        for g in &lin.groups {
            let mut best: Option<i64> = None;
            let mut fixed = None;
            for &(v, w) in g {
                match self.assign[v as usize] {
                    TRUE => {
                        fixed = Some(w);
                        break;
                    }
                    UNDEF => best = Some(best.map_or(w, |b: i64| b.max(w))),
                    _ => {}
                }
            }
            let m = match fixed.or(best) {
                Some(m) => m,
                None => return false,
            };
            gmax.push((m, fixed.is_some()));
            total += m;
        }
        if total < lin.bound {
            return false;
        }
        let mut forced = Vec::new();
        for (g, &(m, fixed)) in lin.groups.iter().zip(&gmax) {
            if fixed {
                continue;
            }
            for &(v, w) in g {
                if self.assign[v as usize] == UNDEF && total - m + w < lin.bound {
                    forced.push(Lit::neg(v));
                }
            }
        }
        for l in forced {
            self.enqueue(l);
        }
        true
    }

    fn undo_to(&mut self, trail_len: usize) {
        while self.trail.len() > trail_len {
            let l = self.trail.pop().unwrap();
            self.assign[l.var() as usize] = UNDEF;
        }
        self.qhead = trail_len;
        for j in self.lin_queue.drain(..) {
            self.lin_dirty[j] = false;
        }
    }

    fn pick(&self) -> Option<Var> {
        self.assign.iter().position(|&a| a == UNDEF).map(|v| v as Var)
    }

    /// Finds a total assignment satisfying the formula and `assumptions`.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        if self.unsat {
            return None;
        }
        let result = self.search(assumptions);
        self.levels.clear();
        self.undo_to(self.root_trail);
        result
    }

    fn search(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        for &a in assumptions {
            if !self.enqueue(a) {
                return None;
            }
        }
        if !self.propagate() {
            return None;
        }
        loop {
            match self.pick() {
                None => return Some(self.assign.iter().map(|&a| a == TRUE).collect()),
                Some(v) => {
                    self.decisions += 1;
                    let d = Lit::pos(v);
                    self.levels.push(Level {
                        trail_start: self.trail.len(),
                        decision: d,
                        flipped: false,
                    });
                    self.enqueue(d);
                }
            }
            while !self.propagate() {
                loop {
                    let lvl = self.levels.pop()?;
                    self.undo_to(lvl.trail_start);
                    if !lvl.flipped {
                        self.levels.push(Level {
                            trail_start: lvl.trail_start,
                            decision: !lvl.decision,
                            flipped: true,
                        });
                        self.enqueue(!lvl.decision);
                        break;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: &Formula, assume: &[Lit]) -> bool {
        (0..1u32 << f.num_vars).any(|m| {
            let val = |l: Lit| ((m >> l.var()) & 1 == 1) == l.is_positive();
            f.clauses.iter().all(|c| c.iter().any(|&l| val(l)))
                && assume.iter().all(|&l| val(l))
                && f.linear.iter().all(|lin| {
                    let mut total = 0;
                    for g in &lin.groups {
                        let on: Vec<_> = g.iter().filter(|(v, _)| (m >> v) & 1 == 1).collect();
                        if on.len() != 1 {
                            return false;
                        }
                        total += on[0].1;
                    }
                    total >= lin.bound
                })
        })
    }

    fn check_model(f: &Formula, assume: &[Lit], m: &[bool]) {
        let val = |l: Lit| m[l.var() as usize] == l.is_positive();
        assert!(f.clauses.iter().all(|c| c.iter().any(|&l| val(l))));
        assert!(assume.iter().all(|&l| val(l)));
    }

    #[test]
    fn agrees_with_truth_tables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..400 {
            let n = rng.random_range(1..=8usize);
            let mut f = Formula { num_vars: n, ..Default::default() };
            for _ in 0..rng.random_range(0..14) {
                let len = rng.random_range(1..=3);
                f.add_clause((0..len).map(|_| Lit::new(rng.random_range(0..n) as Var, rng.random())));
            }
            if n >= 4 && rng.random_bool(0.5) {
                // two groups, each with exactly-one clauses
                let groups = vec![vec![(0, rng.random_range(-3..4)), (1, rng.random_range(-3..4))], vec![
                    (2, rng.random_range(-3..4)),
                    (3, rng.random_range(-3..4)),
                ]];
                for g in &groups {
                    f.add_clause(g.iter().map(|&(v, _)| Lit::pos(v)));
                    f.add_clause([Lit::neg(g[0].0), Lit::neg(g[1].0)]);
                }
                f.linear.push(GroupedLinear { groups, bound: rng.random_range(-3..4) });
            }
            let assume: Vec<Lit> = (0..rng.random_range(0..3))
                .map(|_| Lit::new(rng.random_range(0..n) as Var, rng.random()))
                .collect();
            let mut s = Solver::new(&f);
            let got = s.solve(&assume);
            assert_eq!(got.is_some(), brute(&f, &assume), "{f:?} {assume:?}");
            if let Some(m) = got {
                check_model(&f, &assume, &m);
            }
            // the solver is reusable
            assert_eq!(s.solve(&[]).is_some(), brute(&f, &[]));
        }
    }
}
