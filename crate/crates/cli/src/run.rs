//! Command implementations shared by the `speed` binary.

use crate::{runtime, usage, Args, CliError, Mode};
use anyhow::{anyhow, Context};
use rayon::prelude::*;
use speed_core::io::{load_color, save_edge_map, save_overlay};
use speed_core::pipeline::{
    evaluate_with_config, parse_stage_order, run_ablation, run_order_study, run_pipeline,
    CorpusItem, PipelineConfig,
};
use speed_core::raster::ColorRaster;
use speed_core::{parse_annotations, rasterize_ground_truth, Error, ScorePair};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

const DEFAULT_BENCH_SIZES: [usize; 4] = [512, 1024, 2048, 4096];
/// Soft cap on per-image working-set size for bench mode (~128 bytes/pixel
/// across the pipeline's intermediate planes).
const BENCH_MEMORY_BUDGET_BYTES: usize = 8 << 30;

pub fn run(args: Args) -> Result<(), CliError> {
    let cfg = build_config(&args)?;
    if !args.input.is_dir() {
        return Err(usage(anyhow!("input directory {} does not exist", args.input.display())));
    }
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))
        .map_err(runtime)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .map_err(|e| usage(anyhow!("worker pool: {e}")))?;

    pool.install(|| match args.mode {
        Mode::Detect => cmd_detect(&args, &cfg),
        Mode::Evaluate => cmd_evaluate(&args, &cfg),
        Mode::Ablate => cmd_ablate(&args, &cfg),
        Mode::OrderStudy => cmd_order_study(&args, &cfg),
        Mode::Bench => cmd_bench(&args, &cfg),
    })
}

fn build_config(args: &Args) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(usage)?;
            toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))
                .map_err(usage)?
        }
        None => PipelineConfig::default(),
    };
    for name in &args.disable {
        let stage = name
            .parse()
            .map_err(|e: Error| usage(anyhow!("--disable {name}: {e}")))?;
        cfg.disabled_stages.insert(stage);
    }
    if args.force_conditionals {
        cfg.force_conditionals = true;
    }
    cfg.validate().map_err(|e| usage(anyhow!("config: {e}")))?;
    Ok(cfg)
}

/// Images in the input directory, sorted by path for stable report order.
fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .map_err(runtime)?
    {
        let path = entry.map_err(runtime)?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("png" | "tif" | "tiff")) {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(usage(anyhow!("no inputs: {} contains no PNG/TIFF images", dir.display())));
    }
    paths.sort();
    Ok(paths)
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn open_csv(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(runtime)?;
    Ok(csv::Writer::from_writer(file))
}

fn finish_csv(mut w: csv::Writer<fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

// ---- detect ----

fn cmd_detect(args: &Args, cfg: &PipelineConfig) -> Result<(), CliError> {
    let images = list_images(&args.input)?;

    struct Outcome {
        image: PathBuf,
        rows: Vec<[String; 7]>,
        error: Option<String>,
    }

    let outcomes: Vec<Outcome> = images
        .par_iter()
        .map(|path| {
            let result = (|| -> speed_core::Result<Vec<[String; 7]>> {
                let img = load_color(path)?;
                let (edges, trace) = run_pipeline(&img, cfg)?;
                save_edge_map(&edges, args.out.join(format!("{}_edges.png", stem(path))))?;
                save_overlay(&img, &edges, args.out.join(format!("{}_overlay.png", stem(path))))?;
                Ok(trace
                    .stages
                    .iter()
                    .map(|t| {
                        [
                            path.display().to_string(),
                            t.stage.to_string(),
                            t.applied.to_string(),
                            format!("{:.3}", t.millis),
                            fmt_opt(t.skew_ratio),
                            fmt_opt(t.sparse_fraction),
                            String::new(),
                        ]
                    })
                    .collect())
            })();
            match result {
                Ok(rows) => Outcome { image: path.clone(), rows, error: None },
                Err(e) => Outcome { image: path.clone(), rows: Vec::new(), error: Some(e.to_string()) },
            }
        })
        .collect();

    let csv_path = args.out.join("trace.csv");
    let mut w = open_csv(&csv_path)?;
    w.write_record(["image", "stage", "applied", "millis", "skew_ratio", "sparse_fraction", "error"])
        .map_err(runtime)?;
    let mut failed = 0usize;
    for outcome in &outcomes {
        if let Some(err) = &outcome.error {
            eprintln!("speed: {}: {err}", outcome.image.display());
            failed += 1;
            w.write_record([
                outcome.image.display().to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                err.clone(),
            ])
            .map_err(runtime)?;
        } else {
            for row in &outcome.rows {
                w.write_record(row).map_err(runtime)?;
            }
        }
    }
    finish_csv(w, &csv_path)?;

    if failed > 0 {
        return Err(runtime(anyhow!("{failed} of {} images failed", outcomes.len())));
    }
    Ok(())
}

// ---- corpus loading for the evaluation modes ----

fn annotations_dir(args: &Args) -> Result<&Path, CliError> {
    args.annotations
        .as_deref()
        .filter(|d| d.is_dir())
        .ok_or_else(|| usage(anyhow!("this mode requires --annotations <existing dir>")))
}

fn load_corpus(args: &Args) -> Result<Vec<CorpusItem>, CliError> {
    let ann_dir = annotations_dir(args)?.to_path_buf();
    let images = list_images(&args.input)?;

    let loaded: Vec<Result<CorpusItem, String>> = images
        .par_iter()
        .map(|path| {
            let ann_path = ann_dir.join(format!("{}.txt", stem(path)));
            (|| -> anyhow::Result<CorpusItem> {
                let image = load_color(path)?;
                let text = fs::read_to_string(&ann_path)
                    .with_context(|| format!("annotation {}", ann_path.display()))?;
                let annotations = parse_annotations(&text);
                let truth = rasterize_ground_truth(&annotations, image.width(), image.height())?;
                Ok(CorpusItem { image, truth })
            })()
            .map_err(|e| format!("{}: {e:#}", path.display()))
        })
        .collect();

    let mut corpus = Vec::with_capacity(loaded.len());
    let mut errors = Vec::new();
    for item in loaded {
        match item {
            Ok(item) => corpus.push(item),
            Err(msg) => errors.push(msg),
        }
    }
    for msg in &errors {
        eprintln!("speed: {msg}");
    }
    if corpus.is_empty() {
        return Err(runtime(anyhow!("no corpus images could be loaded")));
    }
    if !errors.is_empty() {
        return Err(runtime(anyhow!("{} corpus images failed to load", errors.len())));
    }
    Ok(corpus)
}

/// Corpus mean scores, with ground-truth-free corpora reported as
/// undefined rather than failing the run.
fn score_cells(result: speed_core::Result<ScorePair>) -> Result<[String; 3], CliError> {
    match result {
        Ok(score) => Ok([format!("{:.6}", score.tp), format!("{:.6}", score.fp), String::new()]),
        Err(Error::UndefinedScore) => {
            Ok([String::new(), String::new(), "undefined: no ground-truth edges".into()])
        }
        Err(e) => Err(runtime(e)),
    }
}

// ---- evaluate ----

fn cmd_evaluate(args: &Args, cfg: &PipelineConfig) -> Result<(), CliError> {
    let corpus = load_corpus(args)?;
    let csv_path = args.out.join("report.csv");
    let mut w = open_csv(&csv_path)?;
    w.write_record(["method", "images", "tp", "fp", "note"]).map_err(runtime)?;
    for (method, method_cfg) in [("raw-canny", cfg.raw_canny()), ("speed", cfg.clone())] {
        let cells = score_cells(evaluate_with_config(&corpus, &method_cfg))?;
        w.write_record([
            method.to_string(),
            corpus.len().to_string(),
            cells[0].clone(),
            cells[1].clone(),
            cells[2].clone(),
        ])
        .map_err(runtime)?;
    }
    finish_csv(w, &csv_path)
}

// ---- ablate ----

fn cmd_ablate(args: &Args, cfg: &PipelineConfig) -> Result<(), CliError> {
    let corpus = load_corpus(args)?;
    let csv_path = args.out.join("ablation.csv");
    let mut w = open_csv(&csv_path)?;
    w.write_record(["removed", "tp", "fp", "note"]).map_err(runtime)?;

    let full = score_cells(evaluate_with_config(&corpus, cfg))?;
    w.write_record(["none".into(), full[0].clone(), full[1].clone(), full[2].clone()])
        .map_err(runtime)?;
    for stage in cfg.enabled_stages() {
        let cells = score_cells(run_ablation(&corpus, cfg, stage))?;
        w.write_record([
            stage.abbrev().to_string(),
            cells[0].clone(),
            cells[1].clone(),
            cells[2].clone(),
        ])
        .map_err(runtime)?;
    }
    finish_csv(w, &csv_path)
}

// ---- order-study ----

fn cmd_order_study(args: &Args, cfg: &PipelineConfig) -> Result<(), CliError> {
    let orders_path = args
        .orders
        .as_deref()
        .ok_or_else(|| usage(anyhow!("order-study mode requires --orders <file>")))?;
    let text = fs::read_to_string(orders_path)
        .with_context(|| format!("reading {}", orders_path.display()))
        .map_err(usage)?;
    let mut orders = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        orders.push(parse_stage_order(line).map_err(|e| usage(anyhow!("orders file: {e}")))?);
    }
    if orders.is_empty() {
        return Err(usage(anyhow!("orders file {} lists no orders", orders_path.display())));
    }

    let corpus = load_corpus(args)?;
    let rows = run_order_study(&corpus, cfg, &orders).map_err(|e| match e {
        Error::InvalidConfig(_) => usage(anyhow!("{e}")),
        other => runtime(other),
    })?;

    let csv_path = args.out.join("orders.csv");
    let mut w = open_csv(&csv_path)?;
    w.write_record(["order", "tp", "fp"]).map_err(runtime)?;
    for (order, score) in rows {
        let label: Vec<&str> = order.iter().map(|s| s.abbrev()).collect();
        w.write_record([label.join("-"), format!("{:.6}", score.tp), format!("{:.6}", score.fp)])
            .map_err(runtime)?;
    }
    finish_csv(w, &csv_path)
}

// ---- bench ----

fn cmd_bench(args: &Args, cfg: &PipelineConfig) -> Result<(), CliError> {
    let images = list_images(&args.input)?;
    let source = load_color(&images[0])
        .with_context(|| format!("loading {}", images[0].display()))
        .map_err(runtime)?;
    let sizes: Vec<usize> = if args.sizes.is_empty() {
        DEFAULT_BENCH_SIZES.to_vec()
    } else {
        let mut sizes = args.sizes.clone();
        if sizes.iter().any(|&s| s == 0) {
            return Err(usage(anyhow!("--sizes entries must be positive")));
        }
        sizes.sort_unstable();
        sizes
    };

    let csv_path = args.out.join("bench.csv");
    let mut w = open_csv(&csv_path)?;
    w.write_record(["size", "pixels", "millis", "note"]).map_err(runtime)?;
    let mut points = Vec::new();
    for &size in &sizes {
        if size.saturating_mul(size).saturating_mul(128) > BENCH_MEMORY_BUDGET_BYTES {
            w.write_record([
                size.to_string(),
                (size * size).to_string(),
                String::new(),
                "skipped: exceeds memory budget".into(),
            ])
            .map_err(runtime)?;
            continue;
        }
        let img: ColorRaster = source.resize_nearest(size, size).map_err(runtime)?;
        let mut times = Vec::with_capacity(5);
        for _ in 0..5 {
            let start = Instant::now();
            run_pipeline(&img, cfg).map_err(runtime)?;
            times.push(start.elapsed().as_secs_f64() * 1e3);
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = times[times.len() / 2];
        w.write_record([
            size.to_string(),
            (size * size).to_string(),
            format!("{median:.3}"),
            String::new(),
        ])
        .map_err(runtime)?;
        points.push(((size * size) as f64, median));
    }
    finish_csv(w, &csv_path)?;

    if !points.is_empty() {
        crate::plot::save_loglog_plot(&points, &args.out.join("bench.png")).map_err(runtime)?;
    }
    Ok(())
}
