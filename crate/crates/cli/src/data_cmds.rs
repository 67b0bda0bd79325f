//! Commands that read raw tables: quantize, mine, xval-rules, train.

use std::path::Path;

use kxp::ingest::{quantize as apply_bins, split_indices, Dataset, QuantizationSpec, RawTable};
use kxp::miner::{cross_validate_rules, eclat_mine, extract_all, Engine, XvalReport};
use kxp::models::{save_model, train_boosted, train_decision_list, BoostOptions, ListOptions, Model, MODEL_FORMAT, MODEL_VERSION};
use serde::Serialize;

use crate::failure::Failure;
use crate::formats::{self, FeatureRecord, RulesHeader, RULES_FORMAT, RULES_VERSION};
use crate::manifest::{Clock, RunManifest};
use crate::{ClassArgs, Context, MineArgs, ModelKind, QuantizeArgs, SplitArgs, TrainArgs, XvalArgs};

pub const QUANT_FORMAT: &str = "kxp-quantization";
pub const XVAL_FORMAT: &str = "kxp-xval";
const VERSION: u32 = 1;

const ALLOWED_INTERVALS: [usize; 3] = [4, 5, 6];

fn read_raw(path: &Path, class: &ClassArgs) -> Result<RawTable, Failure> {
    RawTable::from_path(path, &class.hints()).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn categorical(raw: RawTable, path: &Path) -> Result<Dataset, Failure> {
    raw.into_categorical().map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// The training part of the split when one is requested.
fn training_part(ds: Dataset, split: &SplitArgs, manifest: &mut RunManifest) -> Result<Dataset, Failure> {
    match split.split {
        Some(fraction) => {
            manifest.seed("split", split.seed);
            manifest.limit("split_fraction", fraction);
            let (train, _) = split_indices(ds.len(), fraction, split.seed)?;
            Ok(ds.subset(&train))
        }
        None => Ok(ds),
    }
}

#[derive(Serialize)]
struct QuantFile<'a> {
    format: &'a str,
    version: u32,
    intervals: usize,
    spec: &'a QuantizationSpec,
    manifest: &'a RunManifest,
}

pub fn quantize(ctx: &Context, a: QuantizeArgs) -> Result<(), Failure> {
    if !a.force && !ALLOWED_INTERVALS.contains(&a.intervals) {
        return Err(Failure::usage(format!(
            "{} intervals requested; allowed are 4, 5 or 6 (pass --force to override)",
            a.intervals
        )));
    }
    let clock = Clock::start(ctx.timings);
    let mut m = ctx.manifest("quantize");
    m.input(&a.input)?;
    m.limit("intervals", a.intervals);
    m.format(QUANT_FORMAT, VERSION);
    let raw = read_raw(&a.input, &a.class)?;
    let spec = QuantizationSpec::fit(&raw, a.intervals, None).map_err(|e| Failure::input(format!("{}: {e}", a.input.display())))?;
    let ds = apply_bins(&raw, &spec).map_err(|e| Failure::input(format!("{}: {e}", a.input.display())))?;
    let csv_path = formats::sidecar(&a.out_prefix, ".csv");
    let spec_path = formats::sidecar(&a.out_prefix, ".quant.json");
    m.output(&csv_path);
    m.output(&spec_path);
    let file = std::fs::File::create(&csv_path).map_err(|e| Failure::input(format!("{}: {e}", csv_path.display())))?;
    ds.write_csv(file)?;
    clock.record(&mut m, "total");
    let out = QuantFile { format: QUANT_FORMAT, version: VERSION, intervals: a.intervals, spec: &spec, manifest: &m };
    formats::write_text(&spec_path, &formats::pretty(&out)?)?;
    eprintln!(
        "{} rows, {} binned columns -> {}",
        ds.len(),
        spec.columns.len(),
        csv_path.display()
    );
    Ok(())
}

pub fn mine(ctx: &Context, a: MineArgs) -> Result<(), Failure> {
    let clock = Clock::start(ctx.timings);
    let limit = a.limits.limit();
    limit.validate()?;
    let mut m = ctx.manifest("mine");
    m.input(&a.dataset)?;
    m.limit("extraction", &limit);
    m.format(RULES_FORMAT, RULES_VERSION);
    m.output(&a.out);
    let engine = match a.engine {
        crate::EngineArg::Lattice => "lattice",
        crate::EngineArg::Eclat => "eclat",
    };
    let raw = read_raw(&a.dataset, &a.class)?;
    if raw.is_empty() {
        clock.record(&mut m, "total");
        let features = raw.headers.iter().map(|h| FeatureRecord { name: h.clone(), domain: Vec::new() }).collect();
        let header = RulesHeader {
            format: RULES_FORMAT.into(),
            version: RULES_VERSION,
            engine: engine.into(),
            features,
            limit,
            rules: 0,
            truncated: false,
            manifest: Some(m),
        };
        eprintln!("empty dataset: no rules");
        return formats::write_rules(&a.out, &header, None, &[]);
    }
    let ds = training_part(categorical(raw, &a.dataset)?, &a.split, &mut m)?;
    let (rules, truncated) = match Engine::from(a.engine) {
        Engine::Lattice => {
            let ex = extract_all(&ds, &limit, ctx.jobs != 1)?;
            (ex.rules, ex.truncated)
        }
        Engine::Eclat => (eclat_mine(&ds.without_class(), limit.min_support, limit.max_size)?, false),
    };
    m.truncated = truncated;
    clock.record(&mut m, "total");
    let header = RulesHeader {
        format: RULES_FORMAT.into(),
        version: RULES_VERSION,
        engine: engine.into(),
        features: formats::feature_records(ds.space()),
        limit,
        rules: rules.len(),
        truncated,
        manifest: Some(m),
    };
    formats::write_rules(&a.out, &header, Some(ds.space()), &rules)?;
    eprintln!(
        "{} rules from {} rows{}",
        rules.len(),
        ds.len(),
        if truncated { " (truncated by a limit)" } else { "" }
    );
    Ok(())
}

#[derive(Serialize)]
struct XvalFile<'a> {
    format: &'a str,
    version: u32,
    engine: &'a str,
    report: &'a XvalReport,
    table: String,
    manifest: &'a RunManifest,
}

pub fn xval_rules(ctx: &Context, a: XvalArgs) -> Result<(), Failure> {
    let clock = Clock::start(ctx.timings);
    let limit = a.limits.limit();
    limit.validate()?;
    let mut m = ctx.manifest("xval-rules");
    m.input(&a.dataset)?;
    m.seed("folds", a.seed);
    m.limit("folds", a.folds);
    m.limit("extraction", &limit);
    m.format(XVAL_FORMAT, VERSION);
    let raw = read_raw(&a.dataset, &a.class)?;
    let ds = match a.intervals {
        Some(q) => {
            m.limit("intervals", q);
            let spec = QuantizationSpec::fit(&raw, q, None)?;
            apply_bins(&raw, &spec)?
        }
        None => categorical(raw, &a.dataset)?,
    };
    let report = cross_validate_rules(&ds, a.folds, a.seed, &limit, a.engine.into(), ctx.jobs != 1)?;
    m.truncated = report.truncated;
    clock.record(&mut m, "total");
    let table = report.to_table();
    print!("{table}");
    if let Some(out) = &a.out {
        m.output(out);
        let engine = match a.engine {
            crate::EngineArg::Lattice => "lattice",
            crate::EngineArg::Eclat => "eclat",
        };
        let file = XvalFile { format: XVAL_FORMAT, version: VERSION, engine, report: &report, table, manifest: &m };
        formats::write_text(out, &formats::pretty(&file)?)?;
    }
    Ok(())
}

pub fn train(ctx: &Context, a: TrainArgs) -> Result<(), Failure> {
    let clock = Clock::start(ctx.timings);
    let mut m = ctx.manifest("train");
    m.input(&a.dataset)?;
    m.format(MODEL_FORMAT, MODEL_VERSION);
    let raw = read_raw(&a.dataset, &a.class)?;
    let ds = training_part(categorical(raw, &a.dataset)?, &a.split, &mut m)?;
    if ds.classes().is_none() {
        return Err(Failure::input(format!("{}: training needs a class column", a.dataset.display())));
    }
    let model: Model = match a.model {
        ModelKind::List => {
            let opts = ListOptions { max_rules: a.max_rules, max_antecedent: a.max_antecedent, min_coverage: a.min_coverage };
            m.limit("max_rules", opts.max_rules);
            m.limit("max_antecedent", opts.max_antecedent);
            m.limit("min_coverage", opts.min_coverage);
            train_decision_list(&ds, &opts)?.into()
        }
        ModelKind::Trees => {
            let opts = BoostOptions {
                rounds: a.rounds,
                depth: a.depth,
                learning_rate: a.learning_rate,
                scale: a.scale,
                min_leaf: a.min_leaf,
                l2: a.l2,
            };
            m.limit("rounds", opts.rounds);
            m.limit("depth", opts.depth);
            m.limit("learning_rate", opts.learning_rate);
            m.limit("scale", opts.scale);
            m.limit("min_leaf", opts.min_leaf);
            m.limit("l2", opts.l2);
            train_boosted(&ds, &opts)?.into()
        }
    };
    let classes = ds.classes().expect("checked above");
    let correct = (0..ds.len())
        .filter(|&i| model.classes()[model.classify(ds.row(i))] == classes.labels[classes.values[i]])
        .count();
    formats::write_text(&a.out, &save_model(&model))?;
    m.output(&a.out);
    clock.record(&mut m, "total");
    let manifest_path = formats::sidecar(&a.out, ".manifest.json");
    formats::write_text(&manifest_path, &formats::pretty(&m)?)?;
    eprintln!(
        "trained on {} rows, training accuracy {:.2}% -> {}",
        ds.len(),
        100.0 * correct as f64 / ds.len().max(1) as f64,
        a.out.display()
    );
    Ok(())
}
