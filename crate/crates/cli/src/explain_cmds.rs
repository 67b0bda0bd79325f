//! Commands that query a model: explain, attribute, assess, dump-cnf.

use std::io::Write;
use std::path::Path;

use kxp::domain::{feature_set_from_names, FeatureSet, FeatureSpace, Instance, Kind, KnowledgeBase};
use kxp::explain::{attribute_rules, Explainer};
use kxp::ingest::split_indices;
use kxp::models::Model;
use kxp::oracle::{write_query_dimacs, EntailmentQuery};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;
use crate::formats::{self, RuleSet, RULES_FORMAT, RULES_VERSION};
use crate::manifest::{Clock, RunManifest, DIMACS_PREFIX};
use crate::{AssessArgs, AttributeArgs, Context, DumpArgs, ExplainArgs, InstanceArgs};

pub const EXPLANATIONS_FORMAT: &str = "kxp-explanations";
pub const SUMMARY_FORMAT: &str = "kxp-explain-summary";
pub const ATTRIBUTION_FORMAT: &str = "kxp-attribution";
pub const ASSESSMENT_FORMAT: &str = "kxp-assessment";
const VERSION: u32 = 1;

fn names(space: &FeatureSpace, set: &FeatureSet) -> Vec<String> {
    set.iter().map(|&f| space.name(f).to_string()).collect()
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

fn load_knowledge(path: Option<&Path>, space: &FeatureSpace, m: &mut RunManifest) -> Result<Option<RuleSet>, Failure> {
    match path {
        Some(p) => {
            m.input(p)?;
            m.format(RULES_FORMAT, RULES_VERSION);
            Ok(Some(formats::read_rules(p, space)?))
        }
        None => Ok(None),
    }
}

fn resolve_instance(args: &InstanceArgs, space: &FeatureSpace, m: &mut RunManifest) -> Result<Instance, Failure> {
    match (&args.dataset, args.row) {
        (Some(path), Some(row)) => {
            m.input(path)?;
            let ds = formats::read_rows(path, space)?;
            if row >= ds.len() {
                return Err(Failure::input(format!("{}: row {row} out of range ({} rows)", path.display(), ds.len())));
            }
            Ok(ds.row(row).clone())
        }
        _ if args.values.is_empty() => Err(Failure::usage("give the instance with --value NAME=VALUE or --dataset/--row")),
        _ => formats::parse_assignments(space, &args.values),
    }
}

fn resolve_names(space: &FeatureSpace, given: &[String]) -> Result<FeatureSet, Failure> {
    let trimmed: Vec<&str> = given.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    Ok(feature_set_from_names(space, &trimmed)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplanationEntry {
    pub features: Vec<String>,
    pub size: usize,
}

/// One instance explained under one knowledge setting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance: usize,
    pub predicted: String,
    pub kind: Kind,
    pub knowledge: bool,
    pub explanations: Vec<ExplanationEntry>,
    pub exhausted: bool,
    pub oracle_calls: u64,
    pub time_ms: f64,
}

#[derive(Serialize)]
struct ExplanationsHeader<'a> {
    format: &'a str,
    version: u32,
    kind: Kind,
    requested: usize,
    features: Vec<String>,
    manifest: &'a RunManifest,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SettingSummary {
    pub knowledge: bool,
    pub explained: usize,
    /// Instances for which at least one explanation exists.
    pub with_explanation: usize,
    pub avg_smallest_size: Option<f64>,
    pub avg_count: f64,
    pub oracle_calls: u64,
    pub time_ms: f64,
}

/// Smallest sizes averaged over instances that have an explanation in both
/// settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairedSummary {
    pub instances: usize,
    pub without_knowledge: Option<f64>,
    pub with_knowledge: Option<f64>,
}

#[derive(Serialize)]
struct ExplainSummary<'a> {
    format: &'a str,
    version: u32,
    kind: Kind,
    selected: usize,
    skipped_incompatible: Vec<usize>,
    settings: Vec<SettingSummary>,
    paired: Option<PairedSummary>,
    manifest: &'a RunManifest,
}

fn select_instances(spec: &str, n: usize, split: &crate::SplitArgs, m: &mut RunManifest) -> Result<Vec<usize>, Failure> {
    match spec {
        "all" => Ok((0..n).collect()),
        "test" => {
            let fraction = split
                .split
                .ok_or_else(|| Failure::usage("--instances test needs --split FRACTION"))?;
            m.seed("split", split.seed);
            m.limit("split_fraction", fraction);
            Ok(split_indices(n, fraction, split.seed)?.1)
        }
        list => {
            let mut out = Vec::new();
            for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let i: usize = part
                    .parse()
                    .map_err(|_| Failure::usage(format!("'{part}' is not a row index, 'all' or 'test'")))?;
                if i >= n {
                    return Err(Failure::input(format!("row {i} out of range ({n} rows)")));
                }
                out.push(i);
            }
            Ok(out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn explain_one(
    model: &Model,
    kb: &KnowledgeBase,
    with_knowledge: bool,
    index: usize,
    inst: &Instance,
    kind: Kind,
    count: usize,
    timings: bool,
) -> Result<InstanceRecord, Failure> {
    let clock = Clock::start(timings);
    let mut ex = Explainer::new(model, kb, inst)?;
    let e = ex.enumerate_smallest(kind, count);
    let space = model.space();
    Ok(InstanceRecord {
        instance: index,
        predicted: model.classes()[ex.predicted()].clone(),
        kind,
        knowledge: with_knowledge,
        explanations: e
            .explanations
            .iter()
            .map(|s| ExplanationEntry { features: names(space, s), size: s.len() })
            .collect(),
        exhausted: e.exhausted,
        oracle_calls: ex.oracle_calls(),
        time_ms: (clock.ms_f64() * 1000.0).round() / 1000.0,
    })
}

fn summarize(records: &[&InstanceRecord], knowledge: bool) -> SettingSummary {
    let smallest: Vec<usize> = records.iter().filter_map(|r| r.explanations.first().map(|e| e.size)).collect();
    let n = records.len();
    SettingSummary {
        knowledge,
        explained: n,
        with_explanation: smallest.len(),
        avg_smallest_size: (!smallest.is_empty()).then(|| smallest.iter().sum::<usize>() as f64 / smallest.len() as f64),
        avg_count: records.iter().map(|r| r.explanations.len()).sum::<usize>() as f64 / n.max(1) as f64,
        oracle_calls: records.iter().map(|r| r.oracle_calls).sum(),
        time_ms: records.iter().map(|r| r.time_ms).sum(),
    }
}

fn paired(without: &[&InstanceRecord], with: &[&InstanceRecord]) -> PairedSummary {
    let pairs: Vec<(usize, usize)> = without
        .iter()
        .zip(with)
        .filter_map(|(a, b)| Some((a.explanations.first()?.size, b.explanations.first()?.size)))
        .collect();
    let avg = |f: fn(&(usize, usize)) -> usize| {
        (!pairs.is_empty()).then(|| pairs.iter().map(f).sum::<usize>() as f64 / pairs.len() as f64)
    };
    PairedSummary { instances: pairs.len(), without_knowledge: avg(|p| p.0), with_knowledge: avg(|p| p.1) }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.2}"))
}

pub fn explain(ctx: &Context, a: ExplainArgs) -> Result<(), Failure> {
    if a.count == 0 {
        return Err(Failure::usage("--enum must be at least 1"));
    }
    let clock = Clock::start(ctx.timings);
    let kind: Kind = a.kind.into();
    let mut m = ctx.manifest("explain");
    m.input(&a.model)?;
    m.input(&a.dataset)?;
    let model = formats::read_model(&a.model)?;
    let space = model.space();
    let ds = formats::read_rows(&a.dataset, space)?;
    let rules = load_knowledge(a.knowledge.as_deref(), space, &mut m)?;
    let empty = KnowledgeBase::new();
    let kb = rules.as_ref().map_or(&empty, |r| &r.knowledge);
    let selected = select_instances(&a.instances, ds.len(), &a.split, &mut m)?;
    m.limit("enum", a.count);
    m.format(EXPLANATIONS_FORMAT, VERSION);
    m.format(SUMMARY_FORMAT, VERSION);
    let summary_path = a.summary.clone().unwrap_or_else(|| formats::sidecar(&a.out, ".summary.json"));
    m.output(&a.out);
    m.output(&summary_path);

    let settings: Vec<bool> = if a.compare { vec![false, true] } else { vec![rules.is_some()] };
    let (kept, skipped): (Vec<usize>, Vec<usize>) = selected.iter().partition(|&&i| kb.satisfied_by(ds.row(i)));
    for &i in &skipped {
        eprintln!("row {i}: violates the knowledge, skipped");
    }
    let per_instance: Vec<Vec<InstanceRecord>> = kept
        .par_iter()
        .map(|&i| {
            settings
                .iter()
                .map(|&k| explain_one(&model, if k { kb } else { &empty }, k, i, ds.row(i), kind, a.count, ctx.timings))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let by_setting = |k: bool| -> Vec<&InstanceRecord> { per_instance.iter().flatten().filter(|r| r.knowledge == k).collect() };
    let summaries: Vec<SettingSummary> = settings.iter().map(|&k| summarize(&by_setting(k), k)).collect();
    let pair = a.compare.then(|| paired(&by_setting(false), &by_setting(true)));
    clock.record(&mut m, "total");

    let header = ExplanationsHeader {
        format: EXPLANATIONS_FORMAT,
        version: VERSION,
        kind,
        requested: a.count,
        features: space.features().iter().map(|f| f.name.clone()).collect(),
        manifest: &m,
    };
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    for r in per_instance.iter().flatten() {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    formats::write_text(&a.out, &out)?;
    let summary = ExplainSummary {
        format: SUMMARY_FORMAT,
        version: VERSION,
        kind,
        selected: selected.len(),
        skipped_incompatible: skipped.clone(),
        settings: summaries.clone(),
        paired: pair.clone(),
        manifest: &m,
    };
    formats::write_text(&summary_path, &formats::pretty(&summary)?)?;

    println!("{} instances, {} skipped as incompatible with the knowledge", selected.len(), skipped.len());
    println!("{:<10} {:>9} {:>13} {:>10} {:>12}", "knowledge", "explained", "avg_smallest", "avg_count", "oracle_calls");
    for s in &summaries {
        println!(
            "{:<10} {:>9} {:>13} {:>10.2} {:>12}",
            if s.knowledge { "yes" } else { "no" },
            s.explained,
            fmt_opt(s.avg_smallest_size),
            s.avg_count,
            s.oracle_calls
        );
    }
    if let Some(p) = &pair {
        println!(
            "paired over {} instances: smallest {} {} -> {}",
            p.instances,
            kind,
            fmt_opt(p.without_knowledge),
            fmt_opt(p.with_knowledge)
        );
        if let (Some(before), Some(after)) = (p.without_knowledge, p.with_knowledge) {
            let holds = match kind {
                Kind::Axp => after <= before,
                Kind::Cxp => after >= before,
            };
            if !holds {
                return Err(Failure::invariant(format!(
                    "knowledge moved the average smallest {kind} the wrong way ({before:.3} -> {after:.3})"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct AttributedClause {
    index: usize,
    clause: String,
    rule_ids: Vec<usize>,
    rules: Vec<String>,
}

#[derive(Serialize)]
struct AttributionFile<'a> {
    format: &'a str,
    version: u32,
    instance: String,
    predicted: String,
    axp: Vec<String>,
    knowledge_free: bool,
    clauses: Vec<AttributedClause>,
    rule_ids: Vec<usize>,
    oracle_calls: u64,
    manifest: &'a RunManifest,
}

pub fn attribute(ctx: &Context, a: AttributeArgs) -> Result<(), Failure> {
    let clock = Clock::start(ctx.timings);
    let mut m = ctx.manifest("attribute");
    m.input(&a.model)?;
    let model = formats::read_model(&a.model)?;
    let space = model.space();
    let rules = load_knowledge(Some(&a.knowledge), space, &mut m)?.expect("path given");
    let inst = resolve_instance(&a.instance, space, &mut m)?;
    let kb = &rules.knowledge;
    let axp = match &a.axp {
        Some(given) => resolve_names(space, given)?,
        None => Explainer::new(&model, kb, &inst)?.find_axp(None)?,
    };
    let att = attribute_rules(&model, kb, &inst, &axp)?;
    let mut check = Explainer::new(&model, &kb.subset(&att.clauses), &inst)?;
    if !check.check_explanation(Kind::Axp, &axp)? {
        return Err(Failure::invariant("the attributed clauses do not support the explanation"));
    }
    let clauses: Vec<AttributedClause> = att
        .clauses
        .iter()
        .map(|&c| AttributedClause {
            index: c,
            clause: kb.clauses()[c].display(space),
            rule_ids: kb.provenance(c).to_vec(),
            rules: kb.provenance(c).iter().filter_map(|&id| rules.rule(id)).map(|r| r.display(space)).collect(),
        })
        .collect();
    let predicted = model.classes()[model.classify(&inst)].clone();
    println!("instance: {}", space.describe(&inst));
    println!("prediction: {predicted}");
    println!("AXp: {}", braces(&names(space, &axp)));
    if att.knowledge_free {
        println!("holds without background knowledge");
    } else {
        println!("background knowledge used ({} clauses):", clauses.len());
        for c in &clauses {
            for r in &c.rules {
                println!("  {r}");
            }
            if c.rules.is_empty() {
                println!("  {}", c.clause);
            }
        }
    }
    if let Some(out) = &a.out {
        m.output(out);
        m.format(ATTRIBUTION_FORMAT, VERSION);
        clock.record(&mut m, "total");
        let file = AttributionFile {
            format: ATTRIBUTION_FORMAT,
            version: VERSION,
            instance: space.describe(&inst),
            predicted,
            axp: names(space, &axp),
            knowledge_free: att.knowledge_free,
            clauses,
            rule_ids: att.rule_ids.clone(),
            oracle_calls: att.oracle_calls,
            manifest: &m,
        };
        formats::write_text(out, &formats::pretty(&file)?)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct SubsetRecord {
    instance: usize,
    features: Vec<String>,
}

#[derive(Clone, Serialize)]
struct AssessedRecord {
    line: usize,
    instance: usize,
    features: Vec<String>,
    size: usize,
    correct: bool,
    compatible: bool,
    correct_with_knowledge: Option<bool>,
    reduced: Option<Vec<String>>,
    reduced_size: Option<usize>,
}

#[derive(Serialize)]
struct AssessSummary {
    records: usize,
    percent_correct: f64,
    percent_correct_with_knowledge: Option<f64>,
    incompatible: usize,
    avg_size: f64,
    avg_reduced_size: Option<f64>,
}

#[derive(Serialize)]
struct AssessFile<'a> {
    format: &'a str,
    version: u32,
    kind: Kind,
    records: Vec<AssessedRecord>,
    summary: AssessSummary,
    manifest: &'a RunManifest,
}

fn read_subsets(path: &Path, space: &FeatureSpace, rows: usize) -> Result<Vec<(usize, usize, FeatureSet)>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: String| Failure::input(format!("{} line {}: {e}", path.display(), n + 1));
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
        if value.get("format").is_some() {
            continue;
        }
        let rec: SubsetRecord = serde_json::from_value(value).map_err(|e| at(e.to_string()))?;
        if rec.instance >= rows {
            return Err(at(format!("row {} out of range ({rows} rows)", rec.instance)));
        }
        let set = resolve_names(space, &rec.features).map_err(|e| at(e.into_message()))?;
        out.push((n + 1, rec.instance, set));
    }
    Ok(out)
}

pub fn assess(ctx: &Context, a: AssessArgs) -> Result<(), Failure> {
    let clock = Clock::start(ctx.timings);
    let kind: Kind = a.kind.into();
    let mut m = ctx.manifest("assess");
    m.input(&a.model)?;
    m.input(&a.dataset)?;
    m.input(&a.explanations)?;
    let model = formats::read_model(&a.model)?;
    let space = model.space();
    let ds = formats::read_rows(&a.dataset, space)?;
    let rules = load_knowledge(a.knowledge.as_deref(), space, &mut m)?;
    let subsets = read_subsets(&a.explanations, space, ds.len())?;
    let empty = KnowledgeBase::new();
    let records: Vec<AssessedRecord> = subsets
        .par_iter()
        .map(|(line, i, set)| -> Result<AssessedRecord, Failure> {
            let inst = ds.row(*i);
            let mut plain = Explainer::new(&model, &empty, inst)?;
            let correct = plain.check_explanation(kind, set)?;
            let compatible = rules.as_ref().is_none_or(|r| r.knowledge.satisfied_by(inst));
            let mut assisted = match &rules {
                Some(r) if compatible => Some(Explainer::new(&model, &r.knowledge, inst)?),
                _ => None,
            };
            let correct_with = match &mut assisted {
                Some(ex) => Some(ex.check_explanation(kind, set)?),
                None => None,
            };
            let reduced = match (&mut assisted, correct_with) {
                (Some(ex), Some(true)) => Some(ex.reduce_explanation(kind, set)?),
                _ if correct => Some(plain.reduce_explanation(kind, set)?),
                _ => None,
            };
            Ok(AssessedRecord {
                line: *line,
                instance: *i,
                features: names(space, set),
                size: set.len(),
                correct,
                compatible,
                correct_with_knowledge: correct_with,
                reduced_size: reduced.as_ref().map(|r| r.len()),
                reduced: reduced.map(|r| names(space, &r)),
            })
        })
        .collect::<Result<_, _>>()?;
    let n = records.len();
    let pct = |k: usize, of: usize| if of == 0 { 0.0 } else { 100.0 * k as f64 / of as f64 };
    let assisted: Vec<&AssessedRecord> = records.iter().filter(|r| r.correct_with_knowledge.is_some()).collect();
    let reduced: Vec<usize> = records.iter().filter_map(|r| r.reduced_size).collect();
    let summary = AssessSummary {
        records: n,
        percent_correct: pct(records.iter().filter(|r| r.correct).count(), n),
        percent_correct_with_knowledge: (!assisted.is_empty()).then(|| {
            pct(assisted.iter().filter(|r| r.correct_with_knowledge == Some(true)).count(), assisted.len())
        }),
        incompatible: records.iter().filter(|r| !r.compatible).count(),
        avg_size: records.iter().map(|r| r.size).sum::<usize>() as f64 / n.max(1) as f64,
        avg_reduced_size: (!reduced.is_empty()).then(|| reduced.iter().sum::<usize>() as f64 / reduced.len() as f64),
    };
    println!("{n} subsets assessed as {kind}");
    println!("correct without knowledge: {:.2}%", summary.percent_correct);
    if rules.is_some() {
        println!(
            "correct with knowledge:    {}% ({} incompatible rows skipped)",
            fmt_opt(summary.percent_correct_with_knowledge),
            summary.incompatible
        );
    }
    println!("average size {:.2}, after reduction {}", summary.avg_size, fmt_opt(summary.avg_reduced_size));
    m.output(&a.out);
    m.format(ASSESSMENT_FORMAT, VERSION);
    clock.record(&mut m, "total");
    let file = AssessFile { format: ASSESSMENT_FORMAT, version: VERSION, kind, records, summary, manifest: &m };
    formats::write_text(&a.out, &formats::pretty(&file)?)
}

pub fn dump_cnf(ctx: &Context, a: DumpArgs) -> Result<(), Failure> {
    let mut m = ctx.manifest("dump-cnf");
    m.input(&a.model)?;
    let model = formats::read_model(&a.model)?;
    let space = model.space();
    let rules = load_knowledge(a.knowledge.as_deref(), space, &mut m)?;
    let inst = resolve_instance(&a.instance, space, &mut m)?;
    let fixed = resolve_names(space, &a.fixed)?;
    let contested = match &a.contested {
        Some(label) => model
            .class_index(label)
            .ok_or_else(|| Failure::input(format!("unknown class '{label}'")))?,
        None => model.classify(&inst),
    };
    let empty = KnowledgeBase::new();
    let q = EntailmentQuery {
        fixed: &fixed,
        instance: &inst,
        model: &model,
        contested,
        knowledge: rules.as_ref().map_or(&empty, |r| &r.knowledge),
    };
    if let Some(out) = &a.out {
        m.output(out);
    }
    let mut text = format!("{DIMACS_PREFIX}{}\n", serde_json::to_string(&m)?).into_bytes();
    write_query_dimacs(&q, &mut text)?;
    match &a.out {
        Some(out) => std::fs::write(out, &text).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?,
        None => std::io::stdout().write_all(&text)?,
    }
    Ok(())
}
