//! Propositional vocabulary shared by the model encodings and the solver.

use std::fmt;
use std::io::Write;

use crate::domain::{FeatureSpace, Literal, Polarity};

pub type Var = u32;

/// A propositional literal, `2 * var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(v: Var) -> Lit {
        Lit(v << 1)
    }

    pub fn neg(v: Var) -> Lit {
        Lit(v << 1 | 1)
    }

    pub fn new(v: Var, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    /// Signed 1-based form used in DIMACS files.
    pub fn dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.dimacs())
    }
}

/// `sum over groups of the weight of the group's true variable >= bound`,
/// where each group holds exactly one true variable in every model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupedLinear {
    pub groups: Vec<Vec<(Var, i64)>>,
    pub bound: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Formula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    pub linear: Vec<GroupedLinear>,
}

impl Formula {
    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        (self.num_vars - 1) as Var
    }

    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) {
        self.clauses.push(lits.into_iter().collect());
    }

    pub fn extend(&mut self, other: &Formula) {
        self.num_vars = self.num_vars.max(other.num_vars);
        self.clauses.extend(other.clauses.iter().cloned());
        self.linear.extend(other.linear.iter().cloned());
    }

    /// DIMACS CNF; linear constraints follow as `c pb <bound> <coef> <var> ...`
    /// comment lines, one per constraint, groups separated by `;`.
    pub fn write_dimacs<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "c {c}")?;
        }
        writeln!(w, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for cl in &self.clauses {
            for l in cl {
                write!(w, "{} ", l.dimacs())?;
            }
            writeln!(w, "0")?;
        }
        for lin in &self.linear {
            write!(w, "c pb {}", lin.bound)?;
            for (g, group) in lin.groups.iter().enumerate() {
                if g > 0 {
                    write!(w, " ;")?;
                }
                for (v, coef) in group {
                    write!(w, " {} {}", coef, v + 1)?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Indicator variables: one per (feature, value), numbered by feature offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Indicators {
    offsets: Vec<usize>,
}

impl Indicators {
    pub fn new(space: &FeatureSpace) -> Self {
        Indicators {
            offsets: space.offsets(),
        }
    }

    pub fn count(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn var(&self, feature: usize, value: usize) -> Var {
        (self.offsets[feature] + value) as Var
    }

    pub fn features(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn domain(&self, feature: usize) -> std::ops::Range<usize> {
        0..self.offsets[feature + 1] - self.offsets[feature]
    }

    pub fn lit(&self, l: &Literal) -> Lit {
        let v = self.var(l.feature, l.value);
        match l.polarity {
            Polarity::Equals => Lit::pos(v),
            Polarity::NotEquals => Lit::neg(v),
        }
    }

    /// Exactly one value per feature.
    pub fn one_hot(&self, f: &mut Formula) {
        f.num_vars = f.num_vars.max(self.count());
        for feat in 0..self.features() {
            let vars: Vec<Var> = self.domain(feat).map(|v| self.var(feat, v)).collect();
            f.add_clause(vars.iter().map(|&v| Lit::pos(v)));
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    f.add_clause([Lit::neg(vars[i]), Lit::neg(vars[j])]);
                }
            }
        }
    }

    /// Reads the instance off a total assignment.
    pub fn decode(&self, model: &[bool]) -> Vec<usize> {
        (0..self.features())
            .map(|f| {
                self.domain(f)
                    .find(|&v| model[self.var(f, v) as usize])
                    .expect("one-hot constraint holds in every model")
            })
            .collect()
    }
}
