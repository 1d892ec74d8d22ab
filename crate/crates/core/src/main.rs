use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gaitmtl::data::{parse_trial, parse_trial_jsonl, read_subjects, write_subjects, write_trial_csv};
use gaitmtl::eval::{
    auc_table_markdown, grid_search, importance_report, leave_one_subject_out_eval, log_grid, make_tasks,
    random_partition_eval, EvalReport, TaskDefinition, Tuning,
};
use gaitmtl::features::{build_dataset, Dataset, Pipeline, PipelineConfig};
use gaitmtl::methods::{FitOptions, Hyperparams, Method, MethodRegistry};
use gaitmtl::solver::{LossKind, TrainedModel};
use gaitmtl::synth::{gen_cohort, gen_multitask, CohortSpec, SharingSpec};

#[derive(Debug, Parser, Serialize)]
#[command(name = "gaitmtl", version, about = "Gait-disorder classification with multiplicative multi-task feature learning")]
struct Cli {
    /// Seed for every random choice a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    #[serde(skip)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Extract trial features into a dataset CSV.
    Extract(ExtractArgs),
    /// Train the three canonical tasks and write a model file.
    Train(TrainArgs),
    /// Same as `train --grid`.
    GridSearch(TrainArgs),
    /// Evaluate methods by random partitions or leave-one-subject-out.
    Evaluate(EvaluateArgs),
    /// Generate synthetic data.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Render feature importance of a model and AUC tables of evaluation reports.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
struct ExtractArgs {
    /// Directory of `<subject>__<trial>.csv` or `.jsonl` files.
    #[arg(long)]
    trials: PathBuf,
    #[arg(long)]
    subjects: PathBuf,
    /// Output dataset CSV; `run.json` is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "gmm-bic")]
    detector: String,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 0.01)]
    hysteresis: f64,
    #[arg(long, default_value_t = 3)]
    min_cycles: usize,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 12)]
    k_max: usize,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum LossArg {
    Logistic,
    LeastSquares,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Logistic => LossKind::Logistic,
            LossArg::LeastSquares => LossKind::LeastSquares,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct HyperparamArgs {
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Choose hyperparameters by grid search with stratified cross-validation.
    #[arg(long)]
    grid: bool,
    /// Grid points per axis, log-spaced over [1e-3, 1e3].
    #[arg(long, default_value_t = 7)]
    grid_points: usize,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    /// Loss override; MMTFL defaults to logistic, STL to least squares.
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    method: String,
    #[command(flatten)]
    hyper: HyperparamArgs,
    /// Output model JSON; `run.json` is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SchemeArg {
    Random,
    Loso,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TuningArg {
    /// One grid search on all rows, reused by every round.
    Once,
    /// A grid search on each round's training rows.
    PerRound,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    features: PathBuf,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', default_value = "mmtfl21")]
    methods: Vec<String>,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Training ratios for the random scheme.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// When grid searching, whether to tune once or in every round.
    #[arg(long, value_enum, default_value = "once")]
    tuning: TuningArg,
    #[command(flatten)]
    hyper: HyperparamArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SynthCommand {
    /// Trial CSVs and a subjects CSV for the three gait groups.
    Cohort(CohortArgs),
    /// Multi-task data with a planted shared support.
    Multitask(MultitaskArgs),
}

#[derive(Debug, Args, Serialize)]
struct CohortArgs {
    /// Subjects per group in the order PD, ST, H.
    #[arg(long, value_delimiter = ',', default_value = "5,3,3")]
    groups: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    trials_per_subject: usize,
    #[arg(long, default_value_t = 30.0)]
    duration: f64,
    #[arg(long, default_value_t = 20.0)]
    rate: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct MultitaskArgs {
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    t: usize,
    #[arg(long, default_value_t = 10)]
    shared: usize,
    #[arg(long, default_value_t = 2)]
    private: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    /// Model JSON whose feature importance is rendered.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Evaluation report JSON files combined into one AUC table.
    #[arg(long, value_delimiter = ',')]
    evals: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Failures split by exit code.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<gaitmtl::Error> for Failure {
    fn from(e: gaitmtl::Error) -> Self {
        match e {
            gaitmtl::Error::UnknownName { .. } => Failure::Usage(e.to_string()),
            e => Failure::Runtime(e.into()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Generator parameters come straight from flags, so rejecting them is a usage error.
fn bad_flags(e: gaitmtl::Error) -> Failure {
    match e {
        gaitmtl::Error::Domain(_) => Failure::Usage(e.to_string()),
        e => e.into(),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    command: &'a Command,
    outputs: Vec<String>,
}

fn write_manifest(dir: &Path, cli: &Cli, outputs: &[PathBuf]) -> anyhow::Result<()> {
    let manifest = Manifest {
        tool: "gaitmtl",
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        command: &cli.command,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&manifest)?;
    s.push('\n');
    write_file(&dir.join("run.json"), s.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn parent_dir(path: &Path) -> anyhow::Result<PathBuf> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{what} `{}` does not exist", path.display())))
    }
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    require_file(path, "features file")?;
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Dataset::read_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?)
}

/// Trial files named `<subject>__<trial>.csv` or `.jsonl`, sorted by file name.
fn trial_files(dir: &Path) -> CliResult<Vec<(PathBuf, String, String)>> {
    if !dir.is_dir() {
        return Err(usage(format!("trial directory `{}` does not exist", dir.display())));
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry.map_err(anyhow::Error::from)?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if !matches!(ext, "csv" | "jsonl") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        let Some((subject, trial)) = stem.split_once("__") else {
            return Err(Failure::Runtime(anyhow!(
                "trial file `{}` is not named <subject>__<trial>",
                path.display()
            )));
        };
        files.push((path.clone(), subject.to_string(), trial.to_string()));
    }
    files.sort();
    Ok(files)
}

fn cmd_extract(cli: &Cli, a: &ExtractArgs) -> CliResult<()> {
    require_file(&a.subjects, "subjects file")?;
    let files = trial_files(&a.trials)?;
    let subjects = read_subjects(BufReader::new(File::open(&a.subjects).map_err(anyhow::Error::from)?))
        .with_context(|| format!("reading {}", a.subjects.display()))?;
    let config = PipelineConfig {
        threshold: a.threshold,
        hysteresis: a.hysteresis,
        min_cycles: a.min_cycles,
        detector: a.detector.clone(),
        k_min: a.k_min,
        k_max: a.k_max,
        restarts: a.restarts,
        seed: cli.seed,
    };
    let pipeline = Pipeline::new(config)?;

    let mut trials = Vec::with_capacity(files.len());
    for (path, subject, trial) in &files {
        let f = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
        let parsed = if path.extension().is_some_and(|e| e == "jsonl") {
            parse_trial_jsonl(f, subject, trial)
        } else {
            parse_trial(f, subject, trial)
        };
        trials.push((parsed.with_context(|| format!("reading {}", path.display()))?, Some(path.clone())));
    }
    let outcome = pipeline.process_batch(&trials, &subjects)?;
    for r in &outcome.rejected {
        eprintln!("rejected {}/{}: {}", r.subject_id, r.trial_id, r.reason);
    }
    let dataset = build_dataset(&outcome.rows, &subjects)?;
    let dir = parent_dir(&a.out)?;
    let mut out = create(&a.out)?;
    dataset.write_csv(&mut out).map_err(anyhow::Error::from)?;
    out.flush().map_err(anyhow::Error::from)?;
    log::info!("{} rows, {} rejected", dataset.n_rows(), outcome.rejected.len());
    write_manifest(&dir, cli, &[a.out.clone()])?;
    Ok(())
}

fn explicit_hyperparams(method: &dyn Method, h: &HyperparamArgs) -> CliResult<Option<Hyperparams>> {
    let given = h.gamma1.is_some() || h.gamma2.is_some() || h.lambda.is_some();
    if h.grid && given {
        return Err(usage("--grid cannot be combined with --gamma1, --gamma2 or --lambda"));
    }
    if h.grid {
        return Ok(None);
    }
    match method.default_hyperparams() {
        Hyperparams::Mmtfl { gamma1, gamma2 } => {
            if h.lambda.is_some() {
                return Err(usage(format!("method `{}` takes --gamma1/--gamma2, not --lambda", method.name())));
            }
            Ok(Some(Hyperparams::Mmtfl {
                gamma1: h.gamma1.unwrap_or(gamma1),
                gamma2: h.gamma2.unwrap_or(gamma2),
            }))
        }
        Hyperparams::Stl { lambda } => {
            if h.gamma1.is_some() || h.gamma2.is_some() {
                return Err(usage(format!("method `{}` takes --lambda, not --gamma1/--gamma2", method.name())));
            }
            Ok(Some(Hyperparams::Stl {
                lambda: h.lambda.unwrap_or(lambda),
            }))
        }
    }
}

fn grid_axis(h: &HyperparamArgs) -> CliResult<Vec<f64>> {
    if h.grid_points == 0 {
        return Err(usage("--grid-points must be positive"));
    }
    Ok(log_grid(-3.0, 3.0, h.grid_points))
}

fn fit_options(cli: &Cli, h: &HyperparamArgs) -> FitOptions {
    FitOptions {
        loss: h.loss.map(LossKind::from),
        seed: cli.seed,
        ..FitOptions::default()
    }
}

fn cmd_train(cli: &Cli, a: &TrainArgs, force_grid: bool) -> CliResult<()> {
    let registry = MethodRegistry::default();
    let method = registry.get(&a.method)?;
    let mut hyper_grid = force_grid || a.hyper.grid;
    let explicit = if force_grid {
        None
    } else {
        explicit_hyperparams(method.as_ref(), &a.hyper)?
    };
    if explicit.is_some() {
        hyper_grid = false;
    }
    let dataset = read_dataset(&a.features)?;
    let tasks = make_tasks(&dataset, &TaskDefinition::canonical())?;
    let opts = fit_options(cli, &a.hyper);
    let dir = parent_dir(&a.out)?;
    let mut outputs = vec![a.out.clone()];

    let hp = if hyper_grid {
        let axis = grid_axis(&a.hyper)?;
        let g = grid_search(&tasks, &dataset.feature_names, method.as_ref(), &axis, a.hyper.folds, cli.seed, &opts)?;
        let grid_path = a.out.with_extension("grid.json");
        let mut s = serde_json::to_string_pretty(&g).map_err(anyhow::Error::from)?;
        s.push('\n');
        write_file(&grid_path, s.as_bytes())?;
        outputs.push(grid_path);
        eprintln!("grid search chose {} (mean AUC {:.4})", g.best, g.best_score);
        g.best
    } else {
        explicit.expect("explicit hyperparameters")
    };
    let model = method.fit(&tasks, &dataset.feature_names, &hp, &opts)?;
    for w in model.warnings() {
        log::warn!("{w}");
    }
    let mut out = create(&a.out)?;
    model.write_json(&mut out)?;
    out.flush().map_err(anyhow::Error::from)?;
    write_manifest(&dir, cli, &outputs)?;
    Ok(())
}

fn ratio_tag(r: f64) -> String {
    format!("{:02}", (r * 100.0).round() as i64)
}

fn write_report(dir: &Path, stem: &str, report: &EvalReport, outputs: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let json = dir.join(format!("{stem}.json"));
    let mut f = create(&json)?;
    report.write_json(&mut f)?;
    f.flush()?;
    let md = dir.join(format!("{stem}.md"));
    write_file(&md, report.to_markdown().as_bytes())?;
    let svg = dir.join(format!("{stem}.svg"));
    write_file(&svg, report.auc_svg().as_bytes())?;
    outputs.extend([json, md, svg]);
    Ok(())
}

/// Most frequent choice, earliest on ties.
fn modal(hps: &[Hyperparams]) -> Option<Hyperparams> {
    let mut best: Option<(Hyperparams, usize)> = None;
    for hp in hps {
        let n = hps.iter().filter(|h| *h == hp).count();
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((*hp, n));
        }
    }
    best.map(|(h, _)| h)
}

fn cmd_evaluate(cli: &Cli, a: &EvaluateArgs) -> CliResult<()> {
    match a.scheme {
        SchemeArg::Random if a.ratios.is_empty() => return Err(usage("--scheme random needs --ratios")),
        SchemeArg::Loso if !a.ratios.is_empty() => return Err(usage("--ratios only applies to --scheme random")),
        _ => {}
    }
    if let Some(r) = a.ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(usage(format!("ratio {r} is outside (0, 1)")));
    }
    if a.repeats == 0 {
        return Err(usage("--repeats must be positive"));
    }
    let registry = MethodRegistry::default();
    let mut plans = Vec::new();
    for name in &a.methods {
        let method = registry.get(name)?;
        let tuning = match explicit_hyperparams(method.as_ref(), &a.hyper)? {
            Some(hp) if a.hyper.gamma1.is_some() || a.hyper.gamma2.is_some() || a.hyper.lambda.is_some() => {
                Tuning::fixed(hp)
            }
            _ => {
                let (axis, folds) = (grid_axis(&a.hyper)?, a.hyper.folds);
                match a.tuning {
                    TuningArg::Once => Tuning::GridOnce { axis, folds },
                    TuningArg::PerRound => Tuning::GridPerRound { axis, folds },
                }
            }
        };
        plans.push((method, tuning));
    }
    let dataset = read_dataset(&a.features)?;
    let defs = TaskDefinition::canonical();
    let opts = fit_options(cli, &a.hyper);
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut outputs = Vec::new();
    let mut all = Vec::new();

    for (method, tuning) in &plans {
        let reports = match a.scheme {
            SchemeArg::Random => a
                .ratios
                .iter()
                .map(|&r| {
                    let report = random_partition_eval(&dataset, &defs, method.as_ref(), tuning, &opts, r, a.repeats, cli.seed)?;
                    Ok((format!("{}_random_{}", method.name(), ratio_tag(r)), report))
                })
                .collect::<gaitmtl::Result<Vec<_>>>()?,
            SchemeArg::Loso => {
                let report = leave_one_subject_out_eval(&dataset, &defs, method.as_ref(), tuning, &opts)?;
                vec![(format!("{}_loso", method.name()), report)]
            }
        };
        for (stem, mut report) in reports {
            if let Some(hp) = modal(&report.hyperparams) {
                let tasks = make_tasks(&dataset, &defs)?;
                let model = method.fit(&tasks, &dataset.feature_names, &hp, &opts)?;
                report.importance = Some(importance_report(&model));
            }
            write_report(&a.out_dir, &stem, &report, &mut outputs)?;
            all.push(report);
        }
    }
    if matches!(a.scheme, SchemeArg::Random) {
        let table = a.out_dir.join("auc_table.md");
        write_file(&table, auc_table_markdown(&all).as_bytes())?;
        outputs.push(table);
    }
    write_manifest(&a.out_dir, cli, &outputs)?;
    Ok(())
}

fn cmd_synth_cohort(cli: &Cli, a: &CohortArgs) -> CliResult<()> {
    let groups: [usize; 3] = a
        .groups
        .as_slice()
        .try_into()
        .map_err(|_| usage(format!("--groups needs three counts, got {}", a.groups.len())))?;
    let spec = CohortSpec {
        groups,
        trials_per_subject: a.trials_per_subject,
        duration_s: a.duration,
        sampling_rate: a.rate,
        seed: cli.seed,
        ..CohortSpec::default()
    };
    let cohort = gen_cohort(&spec).map_err(bad_flags)?;
    let trial_dir = a.out_dir.join("trials");
    fs::create_dir_all(&trial_dir).with_context(|| format!("creating {}", trial_dir.display()))?;
    let mut outputs = Vec::new();
    for trial in &cohort.trials {
        let path = trial_dir.join(format!("{}__{}.csv", trial.subject_id, trial.trial_id));
        let mut f = create(&path)?;
        write_trial_csv(trial, &mut f)?;
        f.flush().map_err(anyhow::Error::from)?;
    }
    outputs.push(trial_dir);
    let subjects = a.out_dir.join("subjects.csv");
    let mut f = create(&subjects)?;
    write_subjects(&cohort.subjects, &mut f)?;
    f.flush().map_err(anyhow::Error::from)?;
    outputs.push(subjects);

    #[derive(Serialize)]
    struct TrialRecord<'a> {
        subject_id: &'a str,
        trial_id: &'a str,
        truth: &'a gaitmtl::synth::TrialTruth,
    }
    #[derive(Serialize)]
    struct CohortTruth<'a> {
        spec: &'a CohortSpec,
        profiles: &'a [gaitmtl::synth::PathologyProfile],
        trials: Vec<TrialRecord<'a>>,
    }
    let truth = CohortTruth {
        spec: &spec,
        profiles: &cohort.profiles,
        trials: cohort
            .trials
            .iter()
            .zip(&cohort.truths)
            .map(|(t, truth)| TrialRecord {
                subject_id: &t.subject_id,
                trial_id: &t.trial_id,
                truth,
            })
            .collect(),
    };
    let truth_path = a.out_dir.join("truth.json");
    let mut s = serde_json::to_string_pretty(&truth).map_err(anyhow::Error::from)?;
    s.push('\n');
    write_file(&truth_path, s.as_bytes())?;
    outputs.push(truth_path);
    write_manifest(&a.out_dir, cli, &outputs)?;
    Ok(())
}

fn cmd_synth_multitask(cli: &Cli, a: &MultitaskArgs) -> CliResult<()> {
    let spec = SharingSpec::random(a.d, a.t, a.shared, a.private, a.n, a.noise, cli.seed).map_err(bad_flags)?;
    let (tasks, truth) = gen_multitask(&spec)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let features = a.out_dir.join("features.csv");
    let mut f = create(&features)?;
    let header: Vec<String> = (0..a.d).map(|j| format!("f{j}")).collect();
    writeln!(f, "task,y,{}", header.join(",")).map_err(anyhow::Error::from)?;
    for task in &tasks {
        for (row, y) in task.x.rows().into_iter().zip(&task.y) {
            let values: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(f, "{},{y},{}", task.name, values.join(",")).map_err(anyhow::Error::from)?;
        }
    }
    f.flush().map_err(anyhow::Error::from)?;
    let truth_path = a.out_dir.join("truth.json");
    let mut s = serde_json::to_string_pretty(&truth).map_err(anyhow::Error::from)?;
    s.push('\n');
    write_file(&truth_path, s.as_bytes())?;
    write_manifest(&a.out_dir, cli, &[features, truth_path])?;
    Ok(())
}

fn cmd_report(cli: &Cli, a: &ReportArgs) -> CliResult<()> {
    if a.model.is_none() && a.evals.is_empty() {
        return Err(usage("report needs --model or --evals"));
    }
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut outputs = Vec::new();
    if let Some(path) = &a.model {
        require_file(path, "model file")?;
        let model = TrainedModel::read_json(BufReader::new(File::open(path).map_err(anyhow::Error::from)?))
            .with_context(|| format!("reading {}", path.display()))?;
        let imp = importance_report(&model);
        let csv_path = a.out_dir.join("importance.csv");
        let mut f = create(&csv_path)?;
        imp.write_csv(&mut f)?;
        f.flush().map_err(anyhow::Error::from)?;
        let md = a.out_dir.join("importance.md");
        write_file(&md, imp.to_markdown().as_bytes())?;
        let svg = a.out_dir.join("importance.svg");
        write_file(&svg, imp.to_svg().as_bytes())?;
        outputs.extend([csv_path, md, svg]);
    }
    if !a.evals.is_empty() {
        let mut reports = Vec::new();
        for path in &a.evals {
            require_file(path, "evaluation report")?;
            let f = BufReader::new(File::open(path).map_err(anyhow::Error::from)?);
            let r: EvalReport =
                serde_json::from_reader(f).with_context(|| format!("reading {}", path.display()))?;
            reports.push(r);
        }
        let table = a.out_dir.join("auc_table.md");
        write_file(&table, auc_table_markdown(&reports).as_bytes())?;
        outputs.push(table);
    }
    write_manifest(&a.out_dir, cli, &outputs)?;
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(usage("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match &cli.command {
        Command::Extract(a) => cmd_extract(cli, a),
        Command::Train(a) => cmd_train(cli, a, false),
        Command::GridSearch(a) => cmd_train(cli, a, true),
        Command::Evaluate(a) => cmd_evaluate(cli, a),
        Command::Synth(SynthCommand::Cohort(a)) => cmd_synth_cohort(cli, a),
        Command::Synth(SynthCommand::Multitask(a)) => cmd_synth_multitask(cli, a),
        Command::Report(a) => cmd_report(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
