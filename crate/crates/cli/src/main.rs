//! `kxp`: quantize data, mine background knowledge, train models, and
//! compute knowledge-assisted explanations from the command line.

mod data_cmds;
mod explain_cmds;
mod failure;
mod formats;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kxp::ingest::{ClassPosition, SchemaHints};
use kxp::miner::ExtractionLimit;

use failure::Failure;
use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "kxp", version, about = "Rule mining and knowledge-assisted formal explanations")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "KXP_JOBS", default_value_t = 0)]
    jobs: usize,

    /// Write zero for every wall-clock timing, making outputs byte-stable.
    #[arg(long, global = true)]
    no_timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bin numeric columns into equal-width intervals.
    Quantize(QuantizeArgs),
    /// Mine rules that hold on every row of a dataset.
    Mine(MineArgs),
    /// Cross-validate the accuracy of mined rules.
    XvalRules(XvalArgs),
    /// Train a decision list or a boosted tree ensemble.
    Train(TrainArgs),
    /// Enumerate smallest explanations for dataset rows.
    Explain(ExplainArgs),
    /// Find the knowledge clauses an abductive explanation relies on.
    Attribute(AttributeArgs),
    /// Check externally produced feature subsets.
    Assess(AssessArgs),
    /// Write one entailment query in DIMACS form.
    DumpCnf(DumpArgs),
    /// Re-run the command recorded in a manifest or output file.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone)]
struct ClassArgs {
    /// Name of the class column (default: the last column).
    #[arg(long = "class", value_name = "NAME", conflicts_with = "no_class")]
    class_column: Option<String>,

    /// The table has no class column.
    #[arg(long)]
    no_class: bool,
}

impl ClassArgs {
    fn hints(&self) -> SchemaHints {
        let class = match (&self.class_column, self.no_class) {
            (_, true) => ClassPosition::None,
            (Some(n), false) => ClassPosition::Named(n.clone()),
            (None, false) => ClassPosition::Last,
        };
        SchemaHints { class, categorical: Vec::new() }
    }
}

#[derive(Args, Debug, Clone)]
struct SplitArgs {
    /// Use only the training part of a random split with this fraction.
    #[arg(long, value_name = "FRACTION")]
    split: Option<f64>,

    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct LimitArgs {
    #[arg(long, default_value_t = 5)]
    max_size: usize,

    #[arg(long, default_value_t = 1)]
    min_support: usize,

    #[arg(long)]
    max_rules: Option<usize>,

    #[arg(long, value_name = "MS")]
    time_budget_ms: Option<u64>,
}

impl LimitArgs {
    fn limit(&self) -> ExtractionLimit {
        ExtractionLimit {
            max_size: self.max_size,
            max_rules: self.max_rules,
            time_budget: self.time_budget_ms.map(std::time::Duration::from_millis),
            min_support: self.min_support,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EngineArg {
    Lattice,
    Eclat,
}

impl From<EngineArg> for kxp::miner::Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Lattice => kxp::miner::Engine::Lattice,
            EngineArg::Eclat => kxp::miner::Engine::Eclat,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum KindArg {
    Axp,
    Cxp,
}

impl From<KindArg> for kxp::domain::Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Axp => kxp::domain::Kind::Axp,
            KindArg::Cxp => kxp::domain::Kind::Cxp,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModelKind {
    List,
    Trees,
}

#[derive(Args, Debug)]
struct QuantizeArgs {
    input: PathBuf,

    /// Number of intervals per numeric column.
    #[arg(short = 'q', long, default_value_t = 4)]
    intervals: usize,

    /// Writes `<prefix>.csv` and `<prefix>.quant.json`.
    #[arg(long)]
    out_prefix: PathBuf,

    /// Allow interval counts other than 4, 5 and 6.
    #[arg(long)]
    force: bool,

    #[command(flatten)]
    class: ClassArgs,
}

#[derive(Args, Debug)]
struct MineArgs {
    dataset: PathBuf,

    #[command(flatten)]
    limits: LimitArgs,

    #[arg(long, value_enum, default_value_t = EngineArg::Lattice)]
    engine: EngineArg,

    #[command(flatten)]
    split: SplitArgs,

    #[command(flatten)]
    class: ClassArgs,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct XvalArgs {
    dataset: PathBuf,

    #[arg(long, default_value_t = 5)]
    folds: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[command(flatten)]
    limits: LimitArgs,

    #[arg(long, value_enum, default_value_t = EngineArg::Lattice)]
    engine: EngineArg,

    /// Quantize numeric columns into this many intervals first.
    #[arg(short = 'q', long)]
    intervals: Option<usize>,

    #[command(flatten)]
    class: ClassArgs,

    /// Machine-readable report; the table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    dataset: PathBuf,

    #[arg(long, value_enum)]
    model: ModelKind,

    #[command(flatten)]
    split: SplitArgs,

    #[command(flatten)]
    class: ClassArgs,

    /// Decision list: maximum number of rules.
    #[arg(long, default_value_t = 20)]
    max_rules: usize,

    /// Decision list: maximum literals per rule.
    #[arg(long, default_value_t = 3)]
    max_antecedent: usize,

    /// Decision list: minimum rows a rule must cover.
    #[arg(long, default_value_t = 2)]
    min_coverage: usize,

    /// Trees: boosting rounds.
    #[arg(long, default_value_t = 25)]
    rounds: usize,

    /// Trees: maximum depth.
    #[arg(long, default_value_t = 3)]
    depth: usize,

    #[arg(long, default_value_t = 0.3)]
    learning_rate: f64,

    /// Trees: leaf weights are integers at scale 10^SCALE.
    #[arg(long, default_value_t = 4)]
    scale: u32,

    #[arg(long, default_value_t = 2)]
    min_leaf: usize,

    #[arg(long, default_value_t = 1.0)]
    l2: f64,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExplainArgs {
    #[arg(long)]
    model: PathBuf,

    /// Categorical CSV with a column per model feature.
    #[arg(long)]
    dataset: PathBuf,

    #[arg(long, value_enum, default_value_t = KindArg::Axp)]
    kind: KindArg,

    /// Rules file used as background knowledge.
    #[arg(long)]
    knowledge: Option<PathBuf>,

    /// Explanations to enumerate per instance, smallest first.
    #[arg(long = "enum", default_value_t = 20)]
    count: usize,

    /// `all`, `test` (held-out part of --split), or comma-separated row indices.
    #[arg(long, default_value = "all")]
    instances: String,

    #[command(flatten)]
    split: SplitArgs,

    /// Run without and with knowledge and compare smallest sizes.
    #[arg(long, requires = "knowledge")]
    compare: bool,

    /// Explanation records (JSON lines).
    #[arg(long)]
    out: PathBuf,

    /// Summary file (default: `<out>.summary.json`).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct InstanceArgs {
    /// Feature assignment `Name=value`; repeat for every feature.
    #[arg(long = "value", value_name = "NAME=VALUE")]
    values: Vec<String>,

    /// Take the instance from this CSV instead.
    #[arg(long, requires = "row", conflicts_with = "values")]
    dataset: Option<PathBuf>,

    /// Zero-based row of --dataset.
    #[arg(long, requires = "dataset")]
    row: Option<usize>,
}

#[derive(Args, Debug)]
struct AttributeArgs {
    #[arg(long)]
    model: PathBuf,

    #[arg(long)]
    knowledge: PathBuf,

    #[command(flatten)]
    instance: InstanceArgs,

    /// Comma-separated feature names; computed under the knowledge if absent.
    #[arg(long, value_delimiter = ',')]
    axp: Option<Vec<String>>,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AssessArgs {
    #[arg(long)]
    model: PathBuf,

    #[arg(long)]
    dataset: PathBuf,

    /// JSON lines with `instance` (row index) and `features` (names).
    #[arg(long)]
    explanations: PathBuf,

    #[arg(long, value_enum, default_value_t = KindArg::Axp)]
    kind: KindArg,

    #[arg(long)]
    knowledge: Option<PathBuf>,

    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long)]
    model: PathBuf,

    #[command(flatten)]
    instance: InstanceArgs,

    /// Comma-separated names of the features held fixed.
    #[arg(long, value_delimiter = ',')]
    fixed: Vec<String>,

    #[arg(long)]
    knowledge: Option<PathBuf>,

    /// Class whose entailment is queried (default: the prediction).
    #[arg(long)]
    contested: Option<String>,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// A manifest, or any output file that embeds one.
    manifest: PathBuf,
}

/// Settings shared by every command.
pub struct Context {
    pub args: Vec<String>,
    pub timings: bool,
    pub jobs: usize,
}

impl Context {
    fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, &self.args)
    }
}

fn run(args: Vec<String>) -> Result<(), Failure> {
    let cli = match Cli::try_parse_from(std::iter::once("kxp".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(Failure::Usage(e.render().to_string()));
        }
    };
    let ctx = Context { args, timings: !cli.no_timings, jobs: cli.jobs };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start {} workers: {e}", cli.jobs)))?;
    pool.install(|| match cli.command {
        Command::Quantize(a) => data_cmds::quantize(&ctx, a),
        Command::Mine(a) => data_cmds::mine(&ctx, a),
        Command::XvalRules(a) => data_cmds::xval_rules(&ctx, a),
        Command::Train(a) => data_cmds::train(&ctx, a),
        Command::Explain(a) => explain_cmds::explain(&ctx, a),
        Command::Attribute(a) => explain_cmds::attribute(&ctx, a),
        Command::Assess(a) => explain_cmds::assess(&ctx, a),
        Command::DumpCnf(a) => explain_cmds::dump_cnf(&ctx, a),
        Command::Replay(a) => replay(a),
    })
}

fn replay(a: ReplayArgs) -> Result<(), Failure> {
    let m = RunManifest::read_from(&a.manifest)?;
    if m.command == "replay" {
        return Err(Failure::input("a replay cannot itself be replayed"));
    }
    m.verify_inputs()?;
    run(m.args)
}

fn main() {
    if let Err(e) = run(std::env::args().skip(1).collect()) {
        match &e {
            Failure::Usage(m) => eprint!("{}", if m.ends_with('\n') { m.clone() } else { format!("{m}\n") }),
            other => eprintln!("kxp: {other}"),
        }
        std::process::exit(e.exit_code());
    }
}
