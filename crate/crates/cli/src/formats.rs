//! File formats owned by the command line: rule files, instance arguments,
//! and small output helpers.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use kxp::domain::{FeatureSpace, Instance, KnowledgeBase, Literal, Polarity, Rule, RuleStats};
use kxp::ingest::Dataset;
use kxp::miner::ExtractionLimit;
use kxp::models::{load_model, Model};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;
use crate::manifest::RunManifest;

pub const RULES_FORMAT: &str = "kxp-rules";
pub const RULES_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub name: String,
    pub domain: Vec<String>,
}

/// First line of a rules file.
#[derive(Clone, Debug, Serialize, Deserialize)]
///
/// Only `format` and `version` are required, so hand-written knowledge files
/// load as well as mined ones.
pub struct RulesHeader {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub engine: String,
    #[serde(default)]
    pub features: Vec<FeatureRecord>,
    #[serde(default)]
    pub limit: ExtractionLimit,
    #[serde(default)]
    pub rules: usize,
    #[serde(default)]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiteralRecord {
    pub feature: String,
    pub op: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuleRecord {
    pub id: usize,
    #[serde(rename = "if")]
    pub antecedent: Vec<LiteralRecord>,
    #[serde(rename = "then")]
    pub consequent: LiteralRecord,
    #[serde(default)]
    pub support: usize,
    #[serde(default = "full_consistency")]
    pub consistency: f64,
    #[serde(default)]
    pub text: String,
}

fn full_consistency() -> f64 {
    1.0
}

impl LiteralRecord {
    pub fn from_literal(space: &FeatureSpace, l: &Literal) -> LiteralRecord {
        LiteralRecord {
            feature: space.name(l.feature).to_string(),
            op: match l.polarity {
                Polarity::Equals => "=".into(),
                Polarity::NotEquals => "!=".into(),
            },
            value: space.value_label(l.feature, l.value).to_string(),
        }
    }

    pub fn to_literal(&self, space: &FeatureSpace) -> Result<Literal, Failure> {
        let polarity = match self.op.as_str() {
            "=" | "==" => Polarity::Equals,
            "!=" => Polarity::NotEquals,
            other => return Err(Failure::input(format!("unknown literal operator '{other}'"))),
        };
        Ok(Literal::named(space, &self.feature, polarity, &self.value)?)
    }
}

impl RuleRecord {
    pub fn from_rule(space: &FeatureSpace, r: &Rule) -> RuleRecord {
        RuleRecord {
            id: r.id,
            antecedent: r.antecedent().iter().map(|l| LiteralRecord::from_literal(space, l)).collect(),
            consequent: LiteralRecord::from_literal(space, &r.consequent()),
            support: r.stats.support,
            consistency: r.stats.consistency,
            text: r.display(space),
        }
    }

    pub fn to_rule(&self, space: &FeatureSpace) -> Result<Rule, Failure> {
        let ante = self.antecedent.iter().map(|l| l.to_literal(space)).collect::<Result<Vec<_>, _>>()?;
        let stats = RuleStats { support: self.support, consistency: self.consistency };
        Ok(Rule::new(space, ante, self.consequent.to_literal(space)?, self.id, stats)?)
    }
}

pub fn feature_records(space: &FeatureSpace) -> Vec<FeatureRecord> {
    space
        .features()
        .iter()
        .map(|f| FeatureRecord { name: f.name.clone(), domain: f.domain.clone() })
        .collect()
}

pub fn write_rules(path: &Path, header: &RulesHeader, space: Option<&FeatureSpace>, rules: &[Rule]) -> Result<(), Failure> {
    let mut out = serde_json::to_string(header)?;
    out.push('\n');
    if let Some(space) = space {
        for r in rules {
            out.push_str(&serde_json::to_string(&RuleRecord::from_rule(space, r))?);
            out.push('\n');
        }
    }
    write_text(path, &out)
}

/// Loaded rules file, resolved against a model's feature space.
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub knowledge: KnowledgeBase,
}

impl RuleSet {
    pub fn rule(&self, id: usize) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

pub fn read_rules(path: &Path, space: &FeatureSpace) -> Result<RuleSet, Failure> {
    let file = std::fs::File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Failure::input(format!("{}: empty rules file", path.display())))??;
    let header: RulesHeader =
        serde_json::from_str(&first).map_err(|e| Failure::input(format!("{}: bad header: {e}", path.display())))?;
    if header.format != RULES_FORMAT || header.version != RULES_VERSION {
        return Err(Failure::input(format!(
            "{}: unsupported rules format {} v{}",
            path.display(),
            header.format,
            header.version
        )));
    }
    let mut rules = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |e: String| Failure::input(format!("{} line {}: {e}", path.display(), n + 2));
        let rec: RuleRecord = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        let rule = rec.to_rule(space).map_err(|e| at(e.into_message()))?;
        rules.push(rule);
    }
    let knowledge = KnowledgeBase::from_rules(space, &rules);
    Ok(RuleSet { rules, knowledge })
}

pub fn read_model(path: &Path) -> Result<Model, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    load_model(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Reads a categorical CSV over a model's features; extra columns (such as
/// the class) are ignored.
pub fn read_rows(path: &Path, space: &FeatureSpace) -> Result<Dataset, Failure> {
    let file = std::fs::File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Dataset::from_csv_with_space(file, space, None).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Parses `Name=value` assignments covering every feature.
pub fn parse_assignments(space: &FeatureSpace, values: &[String]) -> Result<Instance, Failure> {
    let mut labels: Vec<Option<&str>> = vec![None; space.len()];
    for v in values {
        let (name, label) = v
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("'{v}' is not of the form Name=value")))?;
        let f = space
            .index_of(name.trim())
            .ok_or_else(|| Failure::input(format!("unknown feature '{}'", name.trim())))?;
        labels[f] = Some(label);
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(f, l)| l.ok_or_else(|| Failure::usage(format!("no value given for feature '{}'", space.name(f)))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(space.instance_from_labels(&labels)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    let mut f = std::fs::File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn pretty(value: &impl Serialize) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// `path` with `suffix` appended to its file name.
pub fn sidecar(path: &Path, suffix: &str) -> std::path::PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}
