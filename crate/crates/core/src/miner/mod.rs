//! Mining of background knowledge: rules that hold on every training row.

mod accuracy;
mod eclat;
mod lattice;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use accuracy::{cross_validate_rules, filter_by_accuracy, rule_accuracy, Engine, SizeAccuracy, XvalReport};
pub use eclat::eclat_mine;
pub use lattice::{candidate_literals, enumerate_min_rules, extract_all, Extraction};

/// Bounds on rule enumeration.
///
/// The size bound applies to each rule; the count and time bounds apply to a
/// whole extraction run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionLimit {
    pub max_size: usize,
    pub max_rules: Option<usize>,
    #[serde(with = "opt_millis")]
    pub time_budget: Option<Duration>,
    pub min_support: usize,
}

impl Default for ExtractionLimit {
    fn default() -> Self {
        ExtractionLimit {
            max_size: 5,
            max_rules: None,
            time_budget: None,
            min_support: 1,
        }
    }
}

impl ExtractionLimit {
    pub fn with_max_size(max_size: usize) -> Self {
        ExtractionLimit {
            max_size,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_size == 0 {
            return Err(Error::Precondition("maximum antecedent size must be at least 1".into()));
        }
        if self.min_support == 0 {
            return Err(Error::Precondition("minimum support must be at least 1".into()));
        }
        Ok(())
    }
}

mod opt_millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&(d.as_millis() as u64)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_millis))
    }
}
