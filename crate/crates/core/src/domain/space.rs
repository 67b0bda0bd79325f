use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical feature: a name and an ordered list of value labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub domain: Vec<String>,
}

impl Feature {
    pub fn new<S: Into<String>, I, L>(name: S, domain: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        Feature {
            name: name.into(),
            domain: domain.into_iter().map(Into::into).collect(),
        }
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == label)
    }
}

/// The finite feature space: the product of all feature domains.
///
/// Feature names are unique and every domain holds at least two distinct
/// labels. These are checked on construction and on deserialization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Feature>", into = "Vec<Feature>")]
pub struct FeatureSpace {
    features: Vec<Feature>,
}

impl TryFrom<Vec<Feature>> for FeatureSpace {
    type Error = Error;

    fn try_from(features: Vec<Feature>) -> Result<Self> {
        FeatureSpace::new(features)
    }
}

impl From<FeatureSpace> for Vec<Feature> {
    fn from(space: FeatureSpace) -> Self {
        space.features
    }
}

impl FeatureSpace {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        let mut names = HashSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate feature name '{}'",
                    f.name
                )));
            }
            if f.domain.len() < 2 {
                return Err(Error::InvalidSpace(format!(
                    "feature '{}' has a domain of size {} (at least 2 required)",
                    f.name,
                    f.domain.len()
                )));
            }
            let mut labels = HashSet::new();
            for v in &f.domain {
                if !labels.insert(v.as_str()) {
                    return Err(Error::InvalidSpace(format!(
                        "feature '{}' lists value '{}' twice",
                        f.name, v
                    )));
                }
            }
        }
        Ok(FeatureSpace { features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &Feature {
        &self.features[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.features[i].name
    }

    pub fn domain_size(&self, i: usize) -> usize {
        self.features[i].domain.len()
    }

    pub fn value_label(&self, feature: usize, value: usize) -> &str {
        &self.features[feature].domain[value]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn value_index(&self, feature: usize, label: &str) -> Option<usize> {
        self.features[feature].value_index(label)
    }

    /// Exact number of points in the space.
    pub fn size(&self) -> BigUint {
        self.features
            .iter()
            .fold(BigUint::from(1u32), |acc, f| acc * f.domain.len())
    }

    /// Number of points when it fits in a `u64`.
    pub fn size_u64(&self) -> Option<u64> {
        self.features
            .iter()
            .try_fold(1u64, |acc, f| acc.checked_mul(f.domain.len() as u64))
    }

    /// Index of the first indicator variable of each feature, plus the total
    /// number of indicators as the last entry.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.features.len() + 1);
        let mut acc = 0;
        for f in &self.features {
            out.push(acc);
            acc += f.domain.len();
        }
        out.push(acc);
        out
    }

    pub fn instance(&self, values: Vec<usize>) -> Result<Instance> {
        let inst = Instance::new(values);
        self.check_instance(&inst)?;
        Ok(inst)
    }

    /// Builds an instance from value labels, one per feature.
    pub fn instance_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Instance> {
        if labels.len() != self.len() {
            return Err(Error::InvalidInstance(format!(
                "expected {} values, got {}",
                self.len(),
                labels.len()
            )));
        }
        let values = labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                self.value_index(i, l.as_ref()).ok_or_else(|| {
                    Error::InvalidInstance(format!(
                        "'{}' is not a value of feature '{}'",
                        l.as_ref(),
                        self.name(i)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance::new(values))
    }

    pub fn check_instance(&self, inst: &Instance) -> Result<()> {
        if inst.len() != self.len() {
            return Err(Error::InvalidInstance(format!(
                "instance has {} values but the space has {} features",
                inst.len(),
                self.len()
            )));
        }
        for (i, &v) in inst.values().iter().enumerate() {
            if v >= self.domain_size(i) {
                return Err(Error::InvalidInstance(format!(
                    "value index {} out of range for feature '{}' (domain size {})",
                    v,
                    self.name(i),
                    self.domain_size(i)
                )));
            }
        }
        Ok(())
    }

    /// Human-readable `name=value` rendering of an instance.
    pub fn describe(&self, inst: &Instance) -> String {
        inst.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{}={}", self.name(i), self.value_label(i, v)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A point of the feature space, stored as one value index per feature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance {
    values: Vec<usize>,
}

impl Instance {
    /// Wraps raw value indices. Use [`FeatureSpace::instance`] for a checked
    /// constructor.
    pub fn new(values: Vec<usize>) -> Self {
        Instance { values }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, feature: usize) -> usize {
        self.values[feature]
    }

    pub fn with_value(&self, feature: usize, value: usize) -> Instance {
        let mut values = self.values.clone();
        values[feature] = value;
        Instance { values }
    }
}

impl std::ops::Index<usize> for Instance {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.values[i]
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}
