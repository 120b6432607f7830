use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use edgeboost::baselines::{fit_ols, DEFAULT_RIDGE_EPS};
use edgeboost::dataset::{clean, load_csv, split, synth_generate, write_csv};
use edgeboost::edge_runtime::{format_significant, latency_bench, lower_to_f32, parity_report_with_eps};
use edgeboost::gbdt::{train, FeatureMatrix, Hyperparams, Target};
use edgeboost::model_format::{export_model, ArtifactMetadata, ModelArtifact};
use edgeboost::{Ensemble, Error, MetricReport, SampleRecord};
use serde_json::json;

use crate::args::{
    BenchArgs, Cli, Command, EvalArgs, EvalRows, ExportArgs, InferArgs, ParityArgs, Precision, SynthArgs,
    TrainArgs,
};
use crate::report::{emit, Table};

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Synth(a) => synth(a, seed),
        Command::Train(a) => train_cmd(a, seed),
        Command::Eval(a) => eval(a, seed),
        Command::Infer(a) => infer(a),
        Command::Export(a) => export(a),
        Command::Parity(a) => parity(a, seed),
        Command::Bench(a) => bench(a, seed),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    Ok(BufWriter::new(f))
}

fn synth(a: SynthArgs, seed: u64) -> Result<()> {
    if a.days == 0 {
        bail!(Error::InvalidArgument("--days must be at least 1".into()));
    }
    let ds = synth_generate(a.days, a.capacity, seed)?;
    write_csv(&ds, create(&a.out)?)?;
    println!("wrote {} rows to {}", ds.len(), a.out.display());
    emit(json!({
        "command": "synth",
        "rows": ds.len(),
        "days": a.days,
        "capacity": a.capacity,
        "seed": seed,
        "path": a.out.display().to_string(),
    }));
    Ok(())
}

fn labels(rows: &[SampleRecord], target: Target) -> Vec<f64> {
    rows.iter().map(|r| r.label(target)).collect()
}

fn metrics(y: &[f64], p: &[f64], cap: f64, literal: bool) -> Result<MetricReport> {
    Ok(if literal {
        MetricReport::evaluate_literal(y, p, cap)?
    } else {
        MetricReport::evaluate(y, p, cap)?
    })
}

fn predict_all(m: &Ensemble, rows: &[SampleRecord]) -> Result<Vec<f64>> {
    Ok(rows.iter().map(|r| m.predict(&r.features)).collect::<Result<_, _>>()?)
}

fn metric_row(t: &mut Table, name: &str, r: &MetricReport) {
    t.row([
        name.to_string(),
        format!("{:.6}", r.r_squared),
        format!("{:.4}", r.mape_pct),
        format!("{:.6}", r.rmse),
        r.n.to_string(),
    ]);
}

fn train_cmd(a: TrainArgs, seed: u64) -> Result<()> {
    let target: Target = a.target.into();
    let params = Hyperparams {
        num_trees: a.num_trees,
        max_depth: a.max_depth,
        learning_rate: a.learning_rate,
        lambda: a.lambda,
        gamma: a.gamma,
        min_child_weight: a.min_child_weight,
        seed,
    };
    params.validate()?;
    let raw = load_csv(&a.data.data, a.data.capacity)?.with_inverter_id(a.data.inverter_id)?;
    let s = split(&clean(&raw)?, a.train_fraction, seed)?;
    let model = train(&s, target, &params)?;

    let created_at = match a.created_at {
        Some(c) => c,
        None => s.train.iter().map(|r| r.timestamp).max().map(|t| t.to_rfc3339()).unwrap_or_default(),
    };
    let meta = ArtifactMetadata {
        inverter_id: s.inverter_id,
        target,
        capacity: s.capacity,
        training_seed: seed,
        created_at,
    };
    export_model(&model, meta)?.write_file(&a.model_out)?;

    let y = labels(&s.test, target);
    let mut reports = vec![("gbdt", metrics(&y, &predict_all(&model, &s.test)?, s.capacity, a.mape_literal)?)];
    if a.baseline.is_some() {
        let lr = fit_ols(&FeatureMatrix::from_records(&s.train), &labels(&s.train, target), DEFAULT_RIDGE_EPS)?;
        let p: Vec<f64> = s.test.iter().map(|r| lr.predict(&r.features)).collect::<Result<_, _>>()?;
        reports.push(("lr", metrics(&y, &p, s.capacity, a.mape_literal)?));
    }

    println!(
        "inverter {}  target {target}  seed {seed}  train {}  test {}",
        s.inverter_id,
        s.train.len(),
        s.test.len()
    );
    let mut t = Table::new(["model", "r_squared", "mape_pct", "rmse", "n"]);
    for (name, r) in &reports {
        metric_row(&mut t, name, r);
    }
    print!("{}", t.render());
    println!("model written to {}", a.model_out.display());
    for (name, r) in &reports {
        emit(json!({
            "command": "train",
            "model": name,
            "inverter_id": s.inverter_id,
            "target": target,
            "seed": seed,
            "train_rows": s.train.len(),
            "r_squared": r.r_squared,
            "mape_pct": r.mape_pct,
            "rmse": r.rmse,
            "n": r.n,
            "artifact": a.model_out.display().to_string(),
        }));
    }
    Ok(())
}

/// Loads a model and the rows it should be scored on: the held-out share of
/// the seeded split, or every cleaned row.
fn model_and_rows(
    model: &Path,
    data: &Path,
    seed: u64,
    fraction: f64,
    all: bool,
) -> Result<(ModelArtifact, Ensemble, Vec<SampleRecord>)> {
    let artifact = ModelArtifact::read_file(model)?;
    let ensemble = artifact.to_ensemble()?;
    let meta = &artifact.metadata;
    let ds = clean(&load_csv(data, meta.capacity)?.with_inverter_id(meta.inverter_id)?)?;
    let rows = if all { ds.into_records() } else { split(&ds, fraction, seed)?.test };
    Ok((artifact, ensemble, rows))
}

fn eval(a: EvalArgs, seed: u64) -> Result<()> {
    let (artifact, m, rows) = model_and_rows(&a.model, &a.data, seed, a.train_fraction, a.all)?;
    let meta = &artifact.metadata;
    let r = metrics(&labels(&rows, meta.target), &predict_all(&m, &rows)?, meta.capacity, a.mape_literal)?;
    println!(
        "inverter {}  target {}  seed {seed}  rows {}",
        meta.inverter_id,
        meta.target,
        if a.all { "all" } else { "held-out" }
    );
    let mut t = Table::new(["model", "r_squared", "mape_pct", "rmse", "n"]);
    metric_row(&mut t, "gbdt", &r);
    print!("{}", t.render());
    emit(json!({
        "command": "eval",
        "inverter_id": meta.inverter_id,
        "target": meta.target,
        "seed": seed,
        "r_squared": r.r_squared,
        "mape_pct": r.mape_pct,
        "rmse": r.rmse,
        "n": r.n,
    }));
    Ok(())
}

fn parse_values(line: &str, what: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: `{c}` is not a number")).into())
        })
        .collect()
}

fn read_inputs(a: &InferArgs) -> Result<Vec<Vec<f64>>> {
    if let Some(line) = &a.input {
        return Ok(vec![parse_values(line, "--input")?]);
    }
    let path = a.input_csv.as_ref().expect("clap requires one input source");
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let is_header = i == 0 && line.split(',').any(|c| c.trim().parse::<f64>().is_err());
        if !is_header {
            rows.push(parse_values(line, &format!("{}:{}", path.display(), i + 1))?);
        }
    }
    Ok(rows)
}

fn infer(a: InferArgs) -> Result<()> {
    let artifact = ModelArtifact::read_file(&a.model)?;
    let inputs = read_inputs(&a)?;
    match a.precision {
        Precision::F64 => {
            let m = artifact.to_ensemble()?;
            for x in &inputs {
                println!("{}", m.predict(x)?);
            }
        }
        Precision::F32 => {
            let m = lower_to_f32(&artifact)?;
            for x in &inputs {
                let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
                println!("{}", m.infer(&x32)?);
            }
        }
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let artifact = ModelArtifact::read_file(&a.model)?;
    let m = artifact.to_ensemble()?;
    let canonical = export_model(&m, artifact.metadata.clone())?;
    canonical.write_file(&a.out)?;
    println!(
        "{}: {} trees, {} nodes, {} features, target {}",
        a.out.display(),
        canonical.tree_count(),
        canonical.node_count(),
        canonical.feature_count(),
        canonical.metadata.target
    );
    emit(json!({
        "command": "export",
        "path": a.out.display().to_string(),
        "trees": canonical.tree_count(),
        "nodes": canonical.node_count(),
        "features": canonical.feature_count(),
        "target": canonical.metadata.target,
    }));
    Ok(())
}

fn pairs(rows: &EvalRows) -> Result<Vec<(PathBuf, PathBuf)>> {
    let data = &rows.data;
    if data.len() != 1 && data.len() != rows.models.len() {
        bail!(Error::InvalidArgument(format!(
            "{} models but {} data files; give one data file or one per model",
            rows.models.len(),
            data.len()
        )));
    }
    Ok(rows
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), data[if data.len() == 1 { 0 } else { i }].clone()))
        .collect())
}

fn parity(a: ParityArgs, seed: u64) -> Result<()> {
    let mut t = Table::new(["Inverter No.", "Target", "MAPE", "RMSE", "max |diff|", "n"]);
    let mut records = Vec::new();
    for (model, data) in pairs(&a.rows)? {
        let (artifact, m, rows) = model_and_rows(&model, &data, seed, a.rows.train_fraction, a.rows.all)?;
        let edge = lower_to_f32(&artifact).with_context(|| format!("lowering {}", model.display()))?;
        let mut full = Vec::with_capacity(rows.len());
        let mut low = Vec::with_capacity(rows.len());
        for r in &rows {
            full.push(m.predict(&r.features)?);
            let x32: Vec<f32> = r.features.iter().map(|&v| v as f32).collect();
            low.push(f64::from(edge.infer(&x32)?));
        }
        let rep = parity_report_with_eps(&full, &low, a.eps)?;
        let meta = &artifact.metadata;
        t.row([
            meta.inverter_id.to_string(),
            meta.target.to_string(),
            format!("{:.4}%", rep.mape_pct),
            format!("{:.15}", rep.rmse),
            format!("{:.3e}", rep.max_abs_diff),
            rep.n.to_string(),
        ]);
        records.push(json!({
            "command": "parity",
            "model": model.display().to_string(),
            "inverter_id": meta.inverter_id,
            "target": meta.target,
            "seed": seed,
            "eps": a.eps,
            "mape_pct": rep.mape_pct,
            "rmse": rep.rmse,
            "max_abs_diff": rep.max_abs_diff,
            "n": rep.n,
        }));
    }
    println!("prediction comparison: float64 vs float32");
    print!("{}", t.render());
    records.into_iter().for_each(emit);
    Ok(())
}

fn bench(a: BenchArgs, seed: u64) -> Result<()> {
    if a.reps == 0 {
        bail!(Error::InvalidArgument("--reps must be at least 1".into()));
    }
    let ms = |us: f64| format_significant(us / 1e3, 4);
    let mut t = Table::new(["Inverter No.", "Target", "mean (ms)", "median (ms)", "p99 (ms)", "inputs", "reps"]);
    let mut records = Vec::new();
    for (model, data) in pairs(&a.rows)? {
        let (artifact, _, rows) = model_and_rows(&model, &data, seed, a.rows.train_fraction, a.rows.all)?;
        let edge = lower_to_f32(&artifact)?;
        let inputs: Vec<Vec<f32>> = rows.iter().map(|r| r.features.iter().map(|&v| v as f32).collect()).collect();
        let s = latency_bench(&edge, &inputs, a.reps)?;
        let meta = &artifact.metadata;
        t.row([
            meta.inverter_id.to_string(),
            meta.target.to_string(),
            ms(s.mean_us),
            ms(s.median_us),
            ms(s.p99_us),
            s.n_inputs.to_string(),
            s.repetitions.to_string(),
        ]);
        records.push(json!({
            "command": "bench",
            "model": model.display().to_string(),
            "inverter_id": meta.inverter_id,
            "target": meta.target,
            "stats": s,
        }));
    }
    println!("single-sample float32 inference time");
    print!("{}", t.render());
    records.into_iter().for_each(emit);
    Ok(())
}
