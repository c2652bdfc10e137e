use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use molforest::evaluate::{
    auroc, roc_curve, run_protocol, welch_t, write_metrics_csv, write_roc_csv, write_summary_json, MetricSample,
    PipelineSpec, Protocol, ProtocolResult, ALPHA,
};
use molforest::featurizer::{
    build_matrix, read_sparse, read_vocabulary, write_sparse, write_vocabulary, FeatureConfig, FeatureVector,
    FeatureVocabulary, Label,
};
use molforest::ingest::{load_bursi, load_pairs, pair_feature_vector, DropReason, DropReport, Resolver};
use molforest::kernels::{gram_matrix, kernel_feature_rows, write_gram, Kernel};
use molforest::molgraph::{parse_smiles_named, MolecularGraph};
use molforest::{Classifier, Dataset, Matrix, Row};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{required, Algorithm, FeatureArgs, InputFormat, KernelChoice, ModelArgs, RunConfig};
use crate::error::CliError;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::parse(path, e))
}

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a truncated artifact behind.
fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

// ---------------------------------------------------------------- featurize

#[derive(Debug, clap::Args)]
pub struct FeaturizeArgs {
    /// SMILES list (`smiles[<tab>label]` per line), SD file, or pairs CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// SD property holding the class label.
    #[arg(long, default_value = "Activity")]
    pub label_key: String,
    /// SD property value that marks a positive.
    #[arg(long, default_value = "mutagen")]
    pub positive: String,
    /// Structure cache for pairs CSV rows without inline structures.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Sparse feature file to write.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Vocabulary file to write.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Optional TSV listing every skipped record and why.
    #[arg(long)]
    pub drops: Option<PathBuf>,
}

struct Records {
    vectors: Vec<FeatureVector>,
    labels: Vec<Label>,
    drops: DropReport,
    unlabeled: usize,
}

fn guess_format(path: &Path) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("sdf" | "sd" | "mol") => InputFormat::Sdf,
        Some("csv") => InputFormat::Pairs,
        _ => InputFormat::Smiles,
    }
}

fn parse_label(text: &str) -> Option<Label> {
    match text {
        "+1" | "1" => Some(Label::Positive),
        "-1" | "0" => Some(Label::Negative),
        _ => None,
    }
}

/// Featurizes graphs in parallel, moving failures into `drops`.
fn featurize_graphs(
    fc: &FeatureConfig,
    names: Vec<String>,
    graphs: &[MolecularGraph],
    labels: Vec<Label>,
    mut drops: DropReport,
) -> Records {
    let results = fc.featurize_all(graphs);
    let mut out = Records {
        vectors: Vec::new(),
        labels: Vec::new(),
        drops: DropReport::default(),
        unlabeled: 0,
    };
    for ((name, r), label) in names.into_iter().zip(results).zip(labels) {
        match r {
            Ok(v) => {
                out.vectors.push(v);
                out.labels.push(label);
            }
            Err(e) => drops.push(name, DropReason::InvalidStructure(e.to_string())),
        }
    }
    out.drops = drops;
    out
}

fn read_smiles_list(path: &Path, fc: &FeatureConfig) -> Result<Records, CliError> {
    let mut names = Vec::new();
    let mut graphs = Vec::new();
    let mut labels: Vec<Option<Label>> = Vec::new();
    let mut drops = DropReport::default();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::parse(path, e))?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let smiles = fields.next().unwrap_or("");
        let label_text = fields.next();
        if names.is_empty() && drops.is_empty() && smiles.eq_ignore_ascii_case("smiles") {
            continue;
        }
        let record = format!("line {}", i + 1);
        let label = match label_text {
            None => None,
            Some(t) => match parse_label(t) {
                Some(l) => Some(l),
                None => {
                    drops.push(record, DropReason::MalformedRow(format!("bad label {t:?}")));
                    continue;
                }
            },
        };
        match parse_smiles_named(smiles, &record) {
            Ok(g) => {
                names.push(record);
                graphs.push(g);
                labels.push(label);
            }
            Err(e) => drops.push(record, DropReason::ParseError(e.to_string())),
        }
    }
    // an entirely unlabeled list is written with -1 throughout; a partly
    // labeled one loses its unlabeled lines
    let any_labeled = labels.iter().any(Option::is_some);
    let mut unlabeled = 0;
    let mut keep_names = Vec::new();
    let mut keep_graphs = Vec::new();
    let mut keep_labels = Vec::new();
    for ((name, g), l) in names.into_iter().zip(graphs).zip(labels) {
        match (l, any_labeled) {
            (Some(l), _) => keep_labels.push(l),
            (None, false) => {
                unlabeled += 1;
                keep_labels.push(Label::Negative);
            }
            (None, true) => {
                drops.push(name, DropReason::MissingLabel);
                continue;
            }
        }
        keep_names.push(name);
        keep_graphs.push(g);
    }
    let mut recs = featurize_graphs(fc, keep_names, &keep_graphs, keep_labels, drops);
    recs.unlabeled = unlabeled;
    Ok(recs)
}

fn read_sdf(path: &Path, fc: &FeatureConfig, key: &str, positive: &str) -> Result<Records, CliError> {
    let mols = load_bursi(path, key, positive).map_err(|e| CliError::parse(path, e))?;
    let names = mols.ids.clone();
    Ok(featurize_graphs(fc, names, &mols.graphs, mols.labels.clone(), mols.drops))
}

fn read_pairs(path: &Path, fc: &FeatureConfig, cache: Option<PathBuf>) -> Result<Records, CliError> {
    let set = load_pairs(path, &Resolver::offline(cache)).map_err(|e| CliError::parse(path, e))?;
    let results: Vec<_> = set.pairs.par_iter().map(|p| pair_feature_vector(p, fc)).collect();
    let mut drops = set.drops;
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for (p, r) in set.pairs.iter().zip(results) {
        match r {
            Ok(v) => {
                vectors.push(v);
                labels.push(p.label);
            }
            Err(e) => drops.push(
                format!("{},{}", p.id_a, p.id_b),
                DropReason::InvalidStructure(e.to_string()),
            ),
        }
    }
    Ok(Records {
        vectors,
        labels,
        drops,
        unlabeled: 0,
    })
}

pub fn featurize(args: &FeaturizeArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let fc = args.features.resolve(cfg)?;
    let input = required(args.input.clone(), cfg.paths.input.clone(), "input")?;
    let output = required(args.output.clone(), cfg.paths.features.clone(), "output")?;
    let vocab_path = required(args.vocab.clone(), cfg.paths.vocab.clone(), "vocab")?;
    let drops_path = args.drops.clone().or_else(|| cfg.paths.drops.clone());
    let cache = args.cache.clone().or_else(|| cfg.paths.cache.clone());

    let recs = match args.format.unwrap_or_else(|| guess_format(&input)) {
        InputFormat::Smiles => read_smiles_list(&input, &fc)?,
        InputFormat::Sdf => read_sdf(&input, &fc, &args.label_key, &args.positive)?,
        InputFormat::Pairs => read_pairs(&input, &fc, cache)?,
    };
    if recs.vectors.is_empty() {
        return Err(CliError::Parse(format!(
            "{}: no usable records ({} skipped)",
            input.display(),
            recs.drops.len()
        )));
    }
    let (matrix, vocab) =
        build_matrix::<f64>(&recs.vectors, &recs.labels, None).map_err(|e| CliError::Parse(e.to_string()))?;
    write_file(&output, |w| write_sparse(w, &matrix).map_err(io_err(&output)))?;
    write_file(&vocab_path, |w| write_vocabulary(w, &vocab).map_err(io_err(&vocab_path)))?;
    if let Some(p) = drops_path {
        write_file(&p, |w| recs.drops.write_tsv(w).map_err(io_err(&p)))?;
    }
    println!(
        "molecules={} features={} skipped={}",
        matrix.len(),
        vocab.len(),
        recs.drops.len()
    );
    if recs.unlabeled > 0 {
        eprintln!("note: {} unlabeled rows written with label -1", recs.unlabeled);
    }
    Ok(())
}

// ---------------------------------------------------------------- shared input

#[derive(Debug, Clone, clap::Args)]
pub struct DataArgs {
    /// Sparse feature file from `featurize`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Vocabulary file from `featurize`.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
}

fn load_data(args: &DataArgs, cfg: &RunConfig) -> Result<(Dataset, FeatureVocabulary), CliError> {
    let fpath = required(args.features.clone(), cfg.paths.features.clone(), "features")?;
    let vpath = required(args.vocab.clone(), cfg.paths.vocab.clone(), "vocab")?;
    let vocab = read_vocabulary(open(&vpath)?).map_err(|e| CliError::parse(&vpath, e))?;
    let data = read_sparse::<f64, _>(open(&fpath)?, vocab.len()).map_err(|e| CliError::parse(&fpath, e))?;
    if data.is_empty() {
        return Err(CliError::Parse(format!("{}: no rows", fpath.display())));
    }
    Ok((data, vocab))
}

// ---------------------------------------------------------------- train

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Model file to write.
    #[arg(long = "output")]
    pub output: Option<PathBuf>,
}

const BUNDLE_FORMAT: &str = "molforest-pipeline";

/// Everything needed to score new rows: the vocabulary, the kernel basis
/// (training rows) when a kernel map was used, and the classifier.
#[derive(Serialize, Deserialize)]
struct Bundle {
    format: String,
    version: u32,
    algorithm: Algorithm,
    kernel: KernelChoice,
    vocabulary: FeatureVocabulary,
    basis: Option<Vec<Row>>,
    model: Classifier,
}

fn kernel_inputs(kernel: KernelChoice, vocab: &FeatureVocabulary, basis: &Dataset, rows: &Dataset) -> Result<Matrix, CliError> {
    match kernel.kind() {
        None => Ok(rows.to_dense()),
        Some(kind) => kernel_feature_rows(basis, rows, &Kernel::for_vocabulary(kind, vocab))
            .map_err(|e| CliError::Training(e.to_string())),
    }
}

pub fn train(args: &TrainArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let (data, vocab) = load_data(&args.data, cfg)?;
    let settings = args.model.resolve(cfg, &vocab)?;
    let out = required(args.output.clone(), cfg.paths.model.clone(), "output")?;
    let x = kernel_inputs(settings.kernel, &vocab, &data, &data)?;
    let model = Classifier::train(&settings.classifier, &x, &data.labels, settings.seed)?;
    let scores = model.score_matrix(&x);
    let acc = molforest::evaluate::accuracy(&scores, &data.labels, model.threshold())?;
    let bundle = Bundle {
        format: BUNDLE_FORMAT.into(),
        version: 1,
        algorithm: settings.algorithm,
        kernel: settings.kernel,
        vocabulary: vocab.clone(),
        basis: settings.kernel.kind().map(|_| data.rows.clone()),
        model,
    };
    write_file(&out, |w| serde_json::to_writer(w, &bundle).map_err(io_err_json(&out)))?;
    println!("rows={} features={} train_acc={acc}", data.len(), vocab.len());
    Ok(())
}

fn io_err_json(path: &Path) -> impl Fn(serde_json::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

fn load_bundle(path: &Path) -> Result<Bundle, CliError> {
    let b: Bundle = serde_json::from_reader(open(path)?).map_err(|e| CliError::parse(path, e))?;
    if b.format != BUNDLE_FORMAT || b.version != 1 {
        return Err(CliError::parse(path, format!("not a {BUNDLE_FORMAT} v1 file")));
    }
    Ok(b)
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// `kfold[:k]` or `shuffle[:trials[:num/den]]`.
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// Per-trial metrics CSV.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Pooled validation ROC CSV.
    #[arg(long)]
    pub roc: Option<PathBuf>,
    /// Validation predictions CSV (`trial,row,score,label`).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

fn write_predictions(w: &mut dyn Write, result: &ProtocolResult) -> std::io::Result<()> {
    writeln!(w, "trial,row,score,label")?;
    for p in &result.predictions {
        writeln!(w, "{},{},{},{}", p.trial, p.row, p.score, p.label.sign())?;
    }
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let (data, vocab) = load_data(&args.data, cfg)?;
    let settings = args.model.resolve(cfg, &vocab)?;
    let protocol = args.protocol.or(cfg.protocol).unwrap_or_default();
    let metrics = required(args.metrics.clone(), cfg.paths.metrics.clone(), "metrics")?;
    let summary = args.summary.clone().or_else(|| cfg.paths.summary.clone());
    let roc = args.roc.clone().or_else(|| cfg.paths.roc.clone());
    let predictions = args.predictions.clone().or_else(|| cfg.paths.predictions.clone());

    let vectors = data
        .to_feature_vectors(&vocab)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    // heights here are metadata only; the vectors are already extracted
    let mode = args.model.mode.or(cfg.mode).unwrap_or_else(|| crate::config::infer_mode(&vocab));
    let features = FeatureConfig {
        mode: crate::config::feature_mode(mode),
        heights: cfg.heights.clone().map(|l| l.0).unwrap_or_default(),
        distances: cfg.distances.clone().map(|l| l.0).unwrap_or_else(|| vec![0]),
    };
    let pipeline = PipelineSpec {
        features,
        kernel: settings.kernel.kind(),
        classifier: settings.classifier,
    };
    let result = run_protocol::<f64>(&pipeline, &vectors, &data.labels, protocol, settings.seed)?;

    write_file(&metrics, |w| Ok(write_metrics_csv(w, &result)?))?;
    if let Some(p) = summary {
        write_file(&p, |w| {
            write_summary_json(&mut *w, &result)?;
            writeln!(w).map_err(io_err(&p))
        })?;
    }
    if let Some(p) = roc {
        let points = result.pooled_roc()?;
        write_file(&p, |w| Ok(write_roc_csv(w, &points)?))?;
    }
    if let Some(p) = predictions {
        write_file(&p, |w| write_predictions(w, &result).map_err(io_err(&p)))?;
    }
    let a = result.auroc();
    println!(
        "protocol={} trials={} mean_auroc={} stdev_auroc={} mean_val_acc={}",
        result.protocol,
        result.trials.len(),
        a.mean(),
        a.stdev(),
        result.val_acc().mean()
    );
    Ok(())
}

// ---------------------------------------------------------------- gram

#[derive(Debug, clap::Args)]
pub struct GramArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    #[arg(long, value_enum)]
    pub mode: Option<crate::config::Mode>,
    /// Gram matrix file to write.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn gram(args: &GramArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let (data, vocab) = load_data(&args.data, cfg)?;
    let choice = args.kernel.or(cfg.kernel).unwrap_or_default();
    let kind = choice
        .kind()
        .ok_or_else(|| CliError::Config("gram needs --kernel cosine or nspdk".into()))?;
    if choice == KernelChoice::Nspdk {
        let mode = args.mode.or(cfg.mode).unwrap_or_else(|| crate::config::infer_mode(&vocab));
        if mode == crate::config::Mode::Height {
            return Err(CliError::Config("kernel nspdk requires pair-mode features".into()));
        }
    }
    let out = required(args.output.clone(), cfg.paths.gram.clone(), "output")?;
    let g = gram_matrix(&data, &Kernel::for_vocabulary(kind, &vocab)).map_err(|e| CliError::Training(e.to_string()))?;
    write_file(&out, |w| write_gram(w, &g).map_err(io_err(&out)))?;
    println!("rows={} kernel={}", data.len(), serde_json::to_value(choice).unwrap_or_default().as_str().unwrap_or(""));
    Ok(())
}

// ---------------------------------------------------------------- ttest

#[derive(Debug, clap::Args)]
pub struct TtestArgs {
    /// First metrics CSV.
    pub a: PathBuf,
    /// Second metrics CSV.
    pub b: PathBuf,
    /// Column to compare.
    #[arg(long, default_value = "auroc")]
    pub metric: String,
}

fn read_metric(path: &Path, metric: &str) -> Result<MetricSample, CliError> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let headers = r.headers().map_err(|e| CliError::parse(path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == metric)
        .ok_or_else(|| CliError::parse(path, format!("no column {metric:?}")))?;
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::parse(path, e))?;
        let v: f64 = rec
            .get(col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CliError::parse(path, format!("row {}: bad {metric} value", i + 2)))?;
        values.push(v);
    }
    MetricSample::new(metric, values).map_err(|e| CliError::parse(path, e))
}

pub fn ttest(args: &TtestArgs) -> Result<(), CliError> {
    let a = read_metric(&args.a, &args.metric)?;
    let b = read_metric(&args.b, &args.metric)?;
    let r = welch_t(&a, &b).map_err(|e| CliError::Parse(e.to_string()))?;
    println!(
        "metric={} n_a={} n_b={} mean_a={} mean_b={} t={} df={} p={} alpha={ALPHA} verdict={}",
        args.metric,
        a.len(),
        b.len(),
        a.mean(),
        b.mean(),
        r.t,
        r.df,
        r.p,
        if r.significant { "significant" } else { "not_significant" }
    );
    Ok(())
}

// ---------------------------------------------------------------- report

#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["predictions", "model"])))]
pub struct ReportArgs {
    /// Predictions CSV written by `evaluate --predictions`.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Model file from `train`; scores the rows given by --features/--vocab.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// ROC CSV to write.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn read_predictions(path: &Path) -> Result<(Vec<f64>, Vec<Label>), CliError> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::parse(path, e))?;
        let bad = || CliError::parse(path, format!("row {}: expected trial,row,score,label", i + 2));
        let score: f64 = rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let label = rec.get(3).and_then(parse_label).ok_or_else(bad)?;
        scores.push(score);
        labels.push(label);
    }
    Ok((scores, labels))
}

fn score_with_bundle(path: &Path, args: &DataArgs, cfg: &RunConfig) -> Result<(Vec<f64>, Vec<Label>), CliError> {
    let bundle = load_bundle(path)?;
    let (data, vocab) = load_data(args, cfg)?;
    let vectors = data
        .to_feature_vectors(&vocab)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let (rows, _) = build_matrix::<f64>(&vectors, &data.labels, Some(&bundle.vocabulary))
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let basis = Dataset {
        rows: bundle.basis.clone().unwrap_or_default(),
        labels: Vec::new(),
        ids: Vec::new(),
        n_cols: bundle.vocabulary.len(),
    };
    let x = kernel_inputs(bundle.kernel, &bundle.vocabulary, &basis, &rows)?;
    Ok((bundle.model.score_matrix(&x), data.labels))
}

pub fn report(args: &ReportArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let out = required(args.output.clone(), cfg.paths.roc.clone(), "output")?;
    let (scores, labels) = match (&args.predictions, &args.model) {
        (Some(p), _) => read_predictions(p)?,
        (None, Some(m)) => score_with_bundle(m, &args.data, cfg)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let points = roc_curve(&scores, &labels).map_err(|e| CliError::Parse(e.to_string()))?;
    let area = auroc(&scores, &labels).map_err(|e| CliError::Parse(e.to_string()))?;
    write_file(&out, |w| Ok(write_roc_csv(w, &points)?))?;
    println!("rows={} points={} auroc={area}", scores.len(), points.len());
    Ok(())
}
