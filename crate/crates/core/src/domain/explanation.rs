use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::space::{FeatureSpace, Instance};
use crate::error::{Error, Result};

/// A set of feature indices, iterated in ascending order.
pub type FeatureSet = BTreeSet<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Abductive: fixing the features entails the prediction.
    Axp,
    /// Contrastive: freeing the features admits another prediction.
    Cxp,
}

impl Kind {
    pub fn dual(self) -> Kind {
        match self {
            Kind::Axp => Kind::Cxp,
            Kind::Cxp => Kind::Axp,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Axp => "axp",
            Kind::Cxp => "cxp",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        match s.to_ascii_lowercase().as_str() {
            "axp" => Ok(Kind::Axp),
            "cxp" => Ok(Kind::Cxp),
            other => Err(Error::Format(format!("unknown explanation kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub kind: Kind,
    pub features: FeatureSet,
    pub knowledge_assisted: bool,
    pub instance: Instance,
    pub predicted: usize,
}

impl Explanation {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_names(&self, space: &FeatureSpace) -> Vec<String> {
        self.features.iter().map(|&i| space.name(i).to_string()).collect()
    }
}

/// `F \ set` over a space with `n` features.
pub fn complement(n: usize, set: &FeatureSet) -> FeatureSet {
    (0..n).filter(|i| !set.contains(i)).collect()
}

pub fn all_features(n: usize) -> FeatureSet {
    (0..n).collect()
}

/// Resolves feature names to indices.
pub fn feature_set_from_names<S: AsRef<str>>(space: &FeatureSpace, names: &[S]) -> Result<FeatureSet> {
    names
        .iter()
        .map(|n| {
            space
                .index_of(n.as_ref())
                .ok_or_else(|| Error::Format(format!("unknown feature '{}'", n.as_ref())))
        })
        .collect()
}
