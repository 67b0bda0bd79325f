//! Versioned JSON model files. Literals and classes are written by name.

use serde::{Deserialize, Serialize};

use super::{BoostedEnsemble, DecisionList, ListRule, Model, Node};
use crate::domain::{FeatureSpace, Literal, Polarity};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "kxp-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LiteralJson {
    feature: String,
    op: String,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeJson {
    Leaf(i64),
    Split {
        test: LiteralJson,
        yes: Box<NodeJson>,
        no: Box<NodeJson>,
    },
}

#[derive(Serialize, Deserialize)]
struct RuleJson {
    #[serde(rename = "if")]
    antecedent: Vec<LiteralJson>,
    #[serde(rename = "then")]
    class: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Body {
    DecisionList { rules: Vec<RuleJson>, default: String },
    BoostedTrees { scale: u32, trees: Vec<Vec<NodeJson>> },
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    features: FeatureSpace,
    classes: Vec<String>,
    #[serde(flatten)]
    body: Body,
}

fn lit_to_json(space: &FeatureSpace, l: &Literal) -> LiteralJson {
    LiteralJson {
        feature: space.name(l.feature).to_string(),
        op: match l.polarity {
            Polarity::Equals => "=".into(),
            Polarity::NotEquals => "!=".into(),
        },
        value: space.value_label(l.feature, l.value).to_string(),
    }
}

fn lit_from_json(space: &FeatureSpace, l: &LiteralJson) -> Result<Literal> {
    let polarity = match l.op.as_str() {
        "=" | "==" => Polarity::Equals,
        "!=" | "≠" => Polarity::NotEquals,
        other => return Err(Error::Format(format!("unknown literal operator '{other}'"))),
    };
    Literal::named(space, &l.feature, polarity, &l.value).map_err(|e| Error::Format(e.to_string()))
}

fn node_to_json(space: &FeatureSpace, n: &Node) -> NodeJson {
    match n {
        Node::Leaf(w) => NodeJson::Leaf(*w),
        Node::Split { test, yes, no } => NodeJson::Split {
            test: lit_to_json(space, test),
            yes: Box::new(node_to_json(space, yes)),
            no: Box::new(node_to_json(space, no)),
        },
    }
}

fn node_from_json(space: &FeatureSpace, n: &NodeJson) -> Result<Node> {
    Ok(match n {
        NodeJson::Leaf(w) => Node::Leaf(*w),
        NodeJson::Split { test, yes, no } => Node::split(
            lit_from_json(space, test)?,
            node_from_json(space, yes)?,
            node_from_json(space, no)?,
        ),
    })
}

fn class_index(classes: &[String], label: &str) -> Result<usize> {
    classes
        .iter()
        .position(|c| c == label)
        .ok_or_else(|| Error::Format(format!("unknown class '{label}'")))
}

/// Canonical pretty-printed JSON, newline terminated.
pub fn save_model(model: &Model) -> String {
    let space = model.space();
    let body = match model {
        Model::DecisionList(dl) => Body::DecisionList {
            rules: dl
                .rules()
                .iter()
                .map(|r| RuleJson {
                    antecedent: r.antecedent.iter().map(|l| lit_to_json(space, l)).collect(),
                    class: dl.classes()[r.class].clone(),
                })
                .collect(),
            default: dl.classes()[dl.default_class()].clone(),
        },
        Model::Boosted(bt) => Body::BoostedTrees {
            scale: bt.scale(),
            trees: bt
                .trees()
                .iter()
                .map(|g| g.iter().map(|t| node_to_json(space, t)).collect())
                .collect(),
        },
    };
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        features: space.clone(),
        classes: model.classes().to_vec(),
        body,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model files always serialize");
    s.push('\n');
    s
}

pub fn load_model(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format != MODEL_FORMAT {
        return Err(Error::Format(format!("expected format '{MODEL_FORMAT}', found '{}'", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::Format(format!("unsupported model version {}", file.version)));
    }
    let space = file.features;
    Ok(match file.body {
        Body::DecisionList { rules, default } => {
            let rules = rules
                .iter()
                .map(|r| {
                    Ok(ListRule {
                        antecedent: r
                            .antecedent
                            .iter()
                            .map(|l| lit_from_json(&space, l))
                            .collect::<Result<_>>()?,
                        class: class_index(&file.classes, &r.class)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let default = class_index(&file.classes, &default)?;
            DecisionList::new(space, file.classes, rules, default)?.into()
        }
        Body::BoostedTrees { scale, trees } => {
            let trees = trees
                .iter()
                .map(|g| g.iter().map(|t| node_from_json(&space, t)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            BoostedEnsemble::new(space, file.classes, scale, trees)?.into()
        }
    })
}
