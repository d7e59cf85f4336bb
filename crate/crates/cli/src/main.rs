//! `oda`: synthesize data, train, evaluate, predict and inspect annealing models.

mod config;
mod dataspec;
mod pgm;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oda_core::data::{stream, write_csv, ClassId, Dataset, FeatureShape};
use oda_core::metrics::{emit_history, eval_accuracy, evaluate, Model};
use oda_core::mrtree::{OdaTree, Representation, TreeConfig};
use oda_core::oda::{run_oda_with, LevelRecord, ParamOverrides, RunOptions};
use oda_core::par::Exec;
use oda_core::persist::{Learner, Mode, ModelFile};
use oda_core::OdaError;

use config::{RunConfig, Settings};
use dataspec::{DataSpec, GenKind, GenSpec};

type Result<T> = std::result::Result<T, OdaError>;

#[derive(Parser)]
#[command(name = "oda", version, about = "Online deterministic annealing for clustering and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Synth(SynthArgs),
    /// Train a flat, tree or multi-resolution model.
    Train(TrainArgs),
    /// Report accuracy, distortion, entropy and free energy on a dataset.
    Eval(EvalArgs),
    /// Predict a label for every row of a CSV file.
    Predict(PredictArgs),
    /// Write codevectors of image models as PGM files.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Gaussians,
    Circles,
}

#[derive(Args)]
struct SynthArgs {
    generator: Generator,
    /// Total number of rows, split evenly across classes.
    #[arg(long, default_value_t = 1500)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cluster std (gaussians) or radial noise std (circles).
    #[arg(long)]
    std: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Run configuration file with `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    /// CSV path, `idx:IMAGES,LABELS`, or a generator such as `circles:n=1500,seed=7`.
    #[arg(long)]
    data: Option<String>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any configuration key, e.g. `--set k_max.1=6`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct DataArgs {
    /// CSV path, `idx:IMAGES,LABELS`, or a generator spec.
    #[arg(long)]
    data: String,
    /// Label column name or index, `auto` (a column named `label`) or `none`.
    #[arg(long)]
    label_column: Option<String>,
    /// Reshape CSV rows to ROWSxCOLS images.
    #[arg(long)]
    shape: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, short)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Also write the report as a one-row CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, short)]
    model: PathBuf,
    /// CSV of feature rows; a `label` column is ignored.
    #[arg(long, short)]
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long, short)]
    model: PathBuf,
    /// `all`, `root`, `depth:N`, or comma-separated node ids.
    #[arg(long, default_value = "all")]
    node: String,
    /// Directory for the PGM files.
    #[arg(long, short)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Predict(a) => predict(a),
        Command::Inspect(a) => inspect(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oda: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut g = GenSpec::new(match a.generator {
        Generator::Gaussians => GenKind::Gaussians,
        Generator::Circles => GenKind::Circles,
    });
    g.n = a.n;
    g.seed = a.seed;
    if let Some(s) = a.std {
        g.std = s;
    }
    let d = g.generate()?;
    let mut bytes = Vec::new();
    write_csv(&d, &mut bytes)?;
    write_output(a.out.as_deref(), &bytes)
}

fn run_config(a: &TrainArgs) -> Result<RunConfig> {
    let mut s = match &a.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    for pair in &a.sets {
        s.set_pair(pair)?;
    }
    if let Some(m) = &a.mode {
        s.set("mode", m)?;
    }
    if let Some(d) = &a.data {
        s.set("data", d)?;
    }
    if let Some(o) = &a.out {
        s.set("out", &o.to_string_lossy())?;
    }
    let env_seed = std::env::var("ODA_SEED").ok();
    let mut config = RunConfig::from_settings(&s, env_seed.as_deref())?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    Ok(config)
}

struct Trained {
    model: ModelFile,
    history: Vec<LevelRecord>,
    samples: u64,
    complete: bool,
}

fn train_flat(c: &RunConfig, data: &Dataset) -> Result<Trained> {
    let overrides = ParamOverrides {
        seed: Some(c.seed),
        ..c.depth_params.first().map_or(c.params.clone(), |d| d.or(&c.params))
    };
    let mut st = stream(data, c.seed, c.order)?;
    let options = RunOptions {
        initial_point: c.initial_point.clone(),
        level_metrics: true,
    };
    let state = run_oda_with(&mut st, &overrides, &options)?;
    let samples = state.stats.count();
    let complete = state.is_finished();
    let history = state.history_rows();
    Ok(Trained {
        model: ModelFile::flat(state, data.shape, data.class_names.clone()),
        history,
        samples,
        complete,
    })
}

fn train_tree(c: &RunConfig, data: &Dataset) -> Result<Trained> {
    let defaults = TreeConfig::default();
    let config = TreeConfig {
        max_depth: c.max_depth,
        layers: c.layers,
        representation: match c.mode {
            Mode::Multires => Representation::Haar,
            _ => Representation::Identity,
        },
        params: c.params.clone(),
        depth_params: c.depth_params.clone(),
        node_warmup: c.node_warmup.unwrap_or(defaults.node_warmup),
        min_class_share: c.min_class_share.unwrap_or(defaults.min_class_share),
        initial_point: c.initial_point.clone(),
        seed: c.seed,
    };
    let mut tree = OdaTree::new(config, data.shape, data.is_labeled())?;
    let mut st = stream(data, c.seed, c.order)?;
    tree.train(&mut st, c.max_samples, c.batch_size, Exec::default())?;
    let history = tree.root().learner().map(|s| s.history_rows()).unwrap_or_default();
    let samples = tree.samples_seen;
    let complete = tree.is_complete();
    Ok(Trained {
        model: ModelFile::tree(tree, c.mode, data.class_names.clone()),
        history,
        samples,
        complete,
    })
}

fn node_table(tree: &OdaTree) -> String {
    let mut out = String::from("id,depth,resolution_index,codevectors,samples,status,temperature\n");
    for n in tree.stats().nodes {
        out += &format!(
            "{},{},{},{},{},{:?},{}\n",
            n.id,
            n.depth,
            n.resolution_index,
            n.k,
            n.sample_count,
            n.status,
            n.temperature.map(|t| t.to_string()).unwrap_or_default()
        );
    }
    out
}

fn train(a: TrainArgs) -> Result<()> {
    let c = run_config(&a)?;
    let data = c.data.load()?;
    if data.is_empty() {
        return Err(OdaError::Usage("the training dataset is empty".into()));
    }
    let started = Instant::now();
    let t = match c.mode {
        Mode::Flat => train_flat(&c, &data)?,
        Mode::Tree | Mode::Multires => train_tree(&c, &data)?,
    };
    fs::create_dir_all(&c.out)?;
    t.model.save(&c.out.join("model.json"))?;
    let mut csv = Vec::new();
    emit_history(&t.history, &mut csv)?;
    fs::write(c.out.join("history.csv"), csv)?;

    let mut summary = format!("mode: {}\nsamples: {}\n", c.mode.name(), t.samples);
    match &t.model.learner {
        Learner::Flat(s) => summary += &format!("codevectors: {}\n", s.k()),
        Learner::Tree(tree) => {
            let stats = tree.stats();
            summary += &format!(
                "leaf_codevectors: {}\ntotal_codevectors: {}\nnodes: {}\ndepth: {}\n",
                stats.leaf_codevectors,
                stats.total_codevectors,
                stats.nodes.len(),
                stats.max_depth
            );
            for d in 0..=stats.max_depth {
                summary += &format!("layer_{d}_codevectors: {}\n", tree.layer_codevectors(d));
            }
            fs::write(c.out.join("nodes.csv"), node_table(tree))?;
        }
    }
    summary += &format!("complete: {}\n", t.complete);
    if data.is_labeled() {
        summary += &format!("train_accuracy: {:.6}\n", eval_accuracy(&t.model, &data)?);
    }
    fs::write(c.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    if !t.complete && c.mode != Mode::Flat {
        eprintln!("warning: sample budget of {} ran out before every node finished", c.max_samples);
    }
    eprintln!("trained in {:.2?}, wrote {}", started.elapsed(), c.out.display());
    Ok(())
}

fn load_for(model: &ModelFile, spec: &DataSpec) -> Result<Dataset> {
    let d = spec.load()?;
    if !d.is_empty() && d.dim() != model.feature_shape.len() {
        return Err(OdaError::Usage(format!(
            "data has {} features but the model expects {}",
            d.dim(),
            model.feature_shape.len()
        )));
    }
    Ok(if d.is_labeled() { d.relabel_to(&model.class_names) } else { d })
}

fn eval(a: EvalArgs) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let spec = DataSpec::parse(&a.data.data, a.data.label_column.as_deref(), a.data.shape.as_deref())?;
    spec.check_paths()?;
    let data = load_for(&model, &spec)?;
    let r = evaluate(&model, &data)?;
    let mut text = format!("samples: {}\n", r.samples);
    if let Some(acc) = r.accuracy {
        text += &format!("accuracy: {acc:.6}\n");
    }
    text += &format!(
        "distortion: {}\nentropy: {}\ntemperature: {}\nfree_energy: {}\ncodevectors: {}\n",
        r.distortion, r.entropy, r.temperature, r.free_energy, r.codevectors
    );
    print!("{text}");
    if let Some(p) = a.csv {
        let acc = r.accuracy.map(|v| v.to_string()).unwrap_or_default();
        let row = format!(
            "samples,accuracy,distortion,entropy,temperature,free_energy,codevectors\n{},{acc},{},{},{},{},{}\n",
            r.samples, r.distortion, r.entropy, r.temperature, r.free_energy, r.codevectors
        );
        fs::write(p, row)?;
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let input = a.input.to_string_lossy().into_owned();
    let spec = DataSpec::parse(&input, None, None)?;
    spec.check_paths()?;
    let data = load_for(&model, &spec)?;
    let labels: Vec<ClassId> = Exec::default()
        .map(&data.samples, |x| model.predict(x))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut out = String::from("label\n");
    for l in labels {
        out += &model.class_name(l);
        out.push('\n');
    }
    write_output(a.out.as_deref(), out.as_bytes())
}

/// (node id, node shape, codebook) for every node the selector names.
type NodeView<'a> = (usize, FeatureShape, &'a [oda_core::oda::Codevector]);

fn select_nodes<'a>(model: &'a ModelFile, selector: &str) -> Result<Vec<NodeView<'a>>> {
    let all: Vec<(usize, usize, NodeView<'a>)> = match &model.learner {
        Learner::Flat(s) => vec![(0, 0, (0, model.feature_shape, s.codebook.as_slice()))],
        Learner::Tree(t) => t
            .nodes
            .iter()
            .filter_map(|n| n.learner().map(|s| (n.id, n.depth, (n.id, n.shape, s.codebook.as_slice()))))
            .collect(),
    };
    let bad = || OdaError::Usage(format!("bad node selector `{selector}` (all, root, depth:N, or ids)"));
    let picked: Vec<NodeView<'a>> = match selector {
        "all" => all.into_iter().map(|(_, _, v)| v).collect(),
        "root" => all.into_iter().filter(|(id, _, _)| *id == 0).map(|(_, _, v)| v).collect(),
        s if s.starts_with("depth:") => {
            let d: usize = s["depth:".len()..].parse().map_err(|_| bad())?;
            all.into_iter().filter(|(_, depth, _)| *depth == d).map(|(_, _, v)| v).collect()
        }
        s => {
            let ids: Vec<usize> = s
                .split(',')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let mut v = Vec::new();
            for id in ids {
                let (_, _, view) = all
                    .iter()
                    .find(|(i, _, _)| *i == id)
                    .ok_or_else(|| OdaError::Usage(format!("no trained node {id}")))?;
                v.push(*view);
            }
            v
        }
    };
    Ok(picked)
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn inspect(a: InspectArgs) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    if !model.feature_shape.is_image() {
        return Err(OdaError::Usage(format!(
            "inspect needs image features, the model has shape {}",
            model.feature_shape
        )));
    }
    let nodes = select_nodes(&model, &a.node)?;
    fs::create_dir_all(&a.out)?;
    let mut written = 0;
    for (id, shape, codebook) in nodes {
        let FeatureShape::Image { rows, cols } = shape else {
            return Err(OdaError::Usage(format!("node {id} is not image-shaped")));
        };
        for (i, cv) in codebook.iter().enumerate() {
            let name = format!("node-{id}-cv-{i}-class-{}.pgm", file_safe(&model.class_name(cv.label)));
            pgm::write(&a.out.join(name), rows, cols, &cv.weights)?;
            written += 1;
        }
    }
    println!("wrote {written} images to {}", a.out.display());
    Ok(())
}
