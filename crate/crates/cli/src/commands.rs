use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gtgbm::boosting::{is_multitask_file, model_to_json};
use gtgbm::experiments::{
    export_correlations, run_isolation_trial, run_phase_grid, run_timing, run_timing_synthetic, topk_baseline,
    write_json, write_phase_grid, ImportanceRanking, PhaseGridSpec, TimingSpec,
};
use gtgbm::metrics::{auc_pr, auc_roc, mrr, precision_at_k, rmse};
use gtgbm::{
    fit_logged, fit_multitask_logged, load_csv, load_csv_features, load_model, load_multitask_model, load_svmlight,
    predict, save_model, save_multitask_model, standardize, BoostConfig, ColumnRef, Dataset, EvalReport, Matrix,
    MetricError, Model, SplitCriterionConfig, TaskBundle,
};
use serde::Serialize;

use crate::args::*;
use crate::error::CliError;

pub struct Ctx {
    pub out_dir: PathBuf,
}

impl Ctx {
    fn path(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir.join(default))
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<(), CliError> {
    match cmd {
        Command::Train(a) => train(a, ctx),
        Command::Predict(a) => predict_cmd(a, ctx),
        Command::Evaluate(a) => evaluate(a, ctx),
        Command::Select(a) => select(a, ctx),
        Command::Experiment { which } => match which {
            Experiment::PhaseGrid(a) => phase_grid(a, ctx),
            Experiment::Isolation(a) => isolation(a, ctx),
            Experiment::Timing(a) => timing(a, ctx),
            Experiment::Topk(a) => topk(a, ctx),
            Experiment::Correlations(a) => correlations(a, ctx),
        },
    }
}

// ------------------------------------------------------------------ data

fn is_csv(path: &Path, format: Format) -> bool {
    match format {
        Format::Csv => true,
        Format::Svmlight => false,
        Format::Auto => path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")),
    }
}

fn single_path(d: &DataArgs) -> Result<&Path, CliError> {
    match d.data.as_slice() {
        [p] => Ok(p),
        [] => Err(CliError::Usage("--data is required".into())),
        _ => Err(CliError::Usage("this command takes a single --data file".into())),
    }
}

fn column(s: &str) -> ColumnRef {
    s.parse().expect("infallible")
}

fn load_labeled(path: &Path, d: &DataArgs) -> Result<Dataset, CliError> {
    if is_csv(path, d.format) {
        let group = d.group.as_deref().map(column);
        Ok(load_csv(path, &column(&d.target), group.as_ref())?)
    } else {
        Ok(load_svmlight(path)?)
    }
}

/// Raw features for scoring; sparse input narrower than the model is zero-padded.
fn load_unlabeled(path: &Path, d: &DataArgs, n_features: usize) -> Result<Matrix, CliError> {
    let mut x = if is_csv(path, d.format) {
        let target = column(&d.target);
        let group = d.group.as_deref().map(column);
        load_csv_features(path, Some(&target), group.as_ref())?
    } else {
        load_svmlight::<f64>(path)?.features
    };
    if !is_csv(path, d.format) && x.n_features() < n_features {
        x.pad_to(n_features);
    }
    Ok(x)
}

fn pad_dataset(mut ds: Dataset, n_features: usize) -> Dataset {
    if ds.n_features() < n_features {
        ds.features.pad_to(n_features);
    }
    ds
}

fn load_any_model(path: &Path, task: usize) -> Result<Model, CliError> {
    if is_multitask_file(path)? {
        let mut m = load_multitask_model::<f64>(path)?;
        if task >= m.tasks.len() {
            return Err(CliError::Usage(format!("--task {task} but the model has {} tasks", m.tasks.len())));
        }
        Ok(m.tasks.swap_remove(task))
    } else {
        if task != 0 {
            return Err(CliError::Usage("--task applies to multitask models only".into()));
        }
        Ok(load_model(path)?)
    }
}

// ------------------------------------------------------------------ train

pub fn boost_config(b: &BoostArgs) -> Result<BoostConfig, CliError> {
    let criterion = match b.mode {
        Mode::Plain => SplitCriterionConfig::plain(),
        Mode::Gbfs => SplitCriterionConfig::gbfs(b.mu),
        Mode::Agbm | Mode::Gtgbm => SplitCriterionConfig::agbm(b.mu),
        Mode::MultitaskAgbm | Mode::MultitaskGtgbm => SplitCriterionConfig::multitask(b.mu_group, b.mu_task),
    };
    let mut cfg = BoostConfig::new(b.iterations, b.shrinkage, b.alpha, criterion).with_seed(b.seed);
    if b.mode.uses_group_test() {
        let s = b.s.ok_or_else(|| CliError::Usage(format!("--s is required for mode {:?}", b.mode).to_lowercase()))?;
        cfg = cfg.with_group_test(s, b.delta);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn train(a: &TrainArgs, ctx: &Ctx) -> Result<(), CliError> {
    let cfg = boost_config(&a.boost)?;
    if a.data.data.is_empty() {
        return Err(CliError::Usage("--data is required".into()));
    }
    let model_path = ctx.path(&a.model_out, "model.json");
    let mut log = String::new();
    if a.boost.mode.is_multitask() {
        let mut tasks = Vec::new();
        let mut names = Vec::new();
        for p in &a.data.data {
            tasks.push(load_labeled(p, &a.data)?);
            names.push(p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
        }
        let bundle = TaskBundle::new(tasks, names)?.standardized();
        log.push_str("task,round,train_rmse,omega_size,elapsed_secs\n");
        let model = fit_multitask_logged(&bundle, &cfg, |t, r| {
            let _ = writeln!(log, "{t},{},{},{},{}", r.round, r.train_rmse, r.omega_size, r.elapsed_secs);
        })?;
        save_multitask_model(&model, &model_path)?;
        eprintln!(
            "trained {} tasks, {} shared features -> {}",
            model.tasks.len(),
            model.omega_group.len(),
            model_path.display()
        );
    } else {
        let ds = standardize(load_labeled(single_path(&a.data)?, &a.data)?).0;
        log.push_str("round,train_rmse,omega_size,elapsed_secs\n");
        let model = fit_logged(&ds, &cfg, None, |r| {
            let _ = writeln!(log, "{},{},{},{}", r.round, r.train_rmse, r.omega_size, r.elapsed_secs);
        })?;
        save_model(&model, &model_path)?;
        eprintln!(
            "trained {} trees on {} features, selected {} -> {}",
            model.trees.len(),
            model.n_features(),
            model.omega.len(),
            model_path.display()
        );
    }
    write_file(&ctx.out_dir.join("train_log.csv"), &log)
}

// ------------------------------------------------------------------ predict / evaluate

fn scores_text(scores: &[f64]) -> String {
    let mut s = String::with_capacity(scores.len() * 20);
    for v in scores {
        let _ = writeln!(s, "{v}");
    }
    s
}

fn predict_cmd(a: &PredictArgs, ctx: &Ctx) -> Result<(), CliError> {
    let model = load_any_model(&a.model, a.task)?;
    let x = load_unlabeled(single_path(&a.data)?, &a.data, model.n_features())?;
    let scores = predict(&model, &x)?;
    let out = ctx.path(&a.output, "predictions.csv");
    write_file(&out, &scores_text(&scores))?;
    eprintln!("wrote {} predictions -> {}", scores.len(), out.display());
    Ok(())
}

fn read_scores(path: &Path) -> Result<Vec<f64>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Data(format!("{}:{}: not a number: {l:?}", path.display(), i + 1)))
        })
        .collect()
}

fn evaluate(a: &EvaluateArgs, ctx: &Ctx) -> Result<(), CliError> {
    let path = single_path(&a.data)?;
    let ds = load_labeled(path, &a.data)?;
    let (scores, used) = match (&a.predictions, &a.model) {
        (Some(p), _) => (read_scores(p)?, 0),
        (None, Some(m)) => {
            let model = load_any_model(m, a.task)?;
            let ds = pad_dataset(ds.clone(), model.n_features());
            (predict(&model, &ds.features)?, model.omega.len())
        }
        (None, None) => return Err(CliError::Usage("--model or --predictions is required".into())),
    };
    let groups = ds.group_ids.as_deref();
    let precision_groups = if a.grouped_precision { groups } else { None };
    if a.grouped_precision && groups.is_none() {
        return Err(MetricError::MissingGroups.into());
    }
    for m in &a.metric {
        match m {
            Metric::Rmse => {
                rmse(&scores, &ds.targets)?;
            }
            Metric::AucRoc => {
                auc_roc(&scores, &ds.targets)?;
            }
            Metric::AucPr => {
                auc_pr(&scores, &ds.targets)?;
            }
            Metric::Precision => {
                for &k in &a.k {
                    precision_at_k(&scores, &ds.targets, k, precision_groups)?;
                }
            }
            Metric::Mrr => {
                mrr(&scores, &ds.targets, groups.ok_or(MetricError::MissingGroups)?)?;
            }
        }
    }
    let report = EvalReport::compute(&scores, &ds.targets, groups, &a.k, a.grouped_precision, used)?;
    let json = report.to_json();
    write_file(&ctx.path(&a.output, "eval.json"), &(json.clone() + "\n"))?;
    write_file(&ctx.out_dir.join("eval.csv"), &format!("{}\n{}\n", report.csv_header(), report.csv_row()))?;
    println!("{json}");
    Ok(())
}

// ------------------------------------------------------------------ select

fn select(a: &SelectArgs, ctx: &Ctx) -> Result<(), CliError> {
    let model = load_any_model(&a.model, a.task)?;
    let ranking = ImportanceRanking::from_gains(&model.feature_gain);
    let mut chosen = ranking.selected();
    if let Some(k) = a.k {
        chosen.truncate(k);
    }
    let mut csv = String::from("rank,feature,gain\n");
    for (r, &j) in chosen.iter().enumerate() {
        let _ = writeln!(csv, "{},{j},{}", r + 1, ranking.gains[j]);
    }
    let out = ctx.path(&a.output, "selected_features.csv");
    write_file(&out, &csv)?;
    print!("{csv}");
    Ok(())
}

// ------------------------------------------------------------------ experiments

fn phase_grid(a: &PhaseGridArgs, ctx: &Ctx) -> Result<(), CliError> {
    let spec = PhaseGridSpec {
        d_values: a.d_values.clone(),
        n_values: a.n_values.clone(),
        replicates: a.replicates,
        s: a.s,
        delta: a.delta,
        noise_sd: a.noise_sd,
        seed: a.seed,
    };
    let result = run_phase_grid(&spec)?;
    write_phase_grid(&result, &ctx.out_dir)?;
    if a.no_svg {
        let _ = std::fs::remove_file(ctx.out_dir.join("phase_grid.svg"));
    }
    print!("{}", result.to_csv());
    Ok(())
}

fn isolation(a: &IsolationArgs, ctx: &Ctx) -> Result<(), CliError> {
    let report = run_isolation_trial(a.d, a.s, a.delta, a.trials, a.seed)?;
    write_json(ctx.out_dir.join("isolation.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

/// Parses `n=20000,d=500`.
fn parse_synthetic(s: &str) -> Result<(usize, usize), CliError> {
    let (mut n, mut d) = (None, None);
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--synthetic entry {part:?} is not key=value")))?;
        let v: usize =
            v.trim().parse().map_err(|_| CliError::Usage(format!("--synthetic value {v:?} is not an integer")))?;
        match k.trim() {
            "n" => n = Some(v),
            "d" => d = Some(v),
            other => return Err(CliError::Usage(format!("--synthetic key {other:?} is not n or d"))),
        }
    }
    match (n, d) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(CliError::Usage("--synthetic needs both n and d".into())),
    }
}

fn timing(a: &TimingArgs, ctx: &Ctx) -> Result<(), CliError> {
    let mut spec = TimingSpec {
        s: a.s,
        delta: a.delta,
        noise_sd: a.noise_sd,
        iterations: a.iterations,
        shrinkage: a.shrinkage,
        alpha: a.alpha,
        mu: a.mu,
        seed: a.seed,
        ..Default::default()
    };
    let report = if a.data.data.is_empty() {
        let (n, d) = parse_synthetic(&a.synthetic)?;
        spec.n = n;
        spec.d = d;
        run_timing_synthetic(&spec)?
    } else {
        let ds = load_labeled(single_path(&a.data)?, &a.data)?;
        spec.n = ds.n_samples();
        spec.d = ds.n_features();
        run_timing(&ds, &spec)?
    };
    write_json(ctx.out_dir.join("timing.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

#[derive(Serialize)]
struct TopkSummary {
    k: usize,
    top_features: Vec<usize>,
    gains: Vec<f64>,
    full_train_rmse: f64,
    retrained_train_rmse: f64,
    retrained_omega: Vec<usize>,
}

fn topk(a: &TopkArgs, ctx: &Ctx) -> Result<(), CliError> {
    if a.boost.mode.is_multitask() {
        return Err(CliError::Usage("topk runs single-task modes only".into()));
    }
    let cfg = boost_config(&a.boost)?;
    let ds = standardize(load_labeled(single_path(&a.data)?, &a.data)?).0;
    let r = topk_baseline(&ds, a.k, &cfg)?;
    let train_rmse =
        |m: &Model| -> Result<f64, CliError> { Ok(rmse(&m.predict_standardized(&ds.features)?, &ds.targets)?) };
    let top = r.ranking.top_k(a.k).to_vec();
    let summary = TopkSummary {
        k: a.k,
        gains: top.iter().map(|&j| r.ranking.gains[j]).collect(),
        top_features: top,
        full_train_rmse: train_rmse(&r.full)?,
        retrained_train_rmse: train_rmse(&r.retrained)?,
        retrained_omega: r.retrained.omega.iter().copied().collect(),
    };
    write_file(&ctx.out_dir.join("topk_full_model.json"), &model_to_json(&r.full))?;
    write_file(&ctx.out_dir.join("topk_model.json"), &model_to_json(&r.retrained))?;
    write_json(ctx.out_dir.join("topk.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn correlations(a: &CorrelationArgs, ctx: &Ctx) -> Result<(), CliError> {
    let model = load_any_model(&a.model, a.task)?;
    let ds = pad_dataset(load_labeled(single_path(&a.data)?, &a.data)?, model.n_features());
    if ds.n_features() != model.n_features() {
        return Err(CliError::Data(format!(
            "data has {} features, model expects {}",
            ds.n_features(),
            model.n_features()
        )));
    }
    let out = ctx.path(&a.output, "correlations.csv");
    let export = export_correlations(&model, &ds, a.k, Some(&out))?;
    print!("{}", export.to_csv(ds.features.feature_names()));
    Ok(())
}
