use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use airgan_core::cgan::{load_checkpoint, save_checkpoint, train_with, Checkpoint};
use airgan_core::data::{
    balance, band_stats, load_dataset, ClassLabel, ClassReps, IngestReport, LabeledDataset,
    RepSource,
};
use airgan_core::eval::{
    evaluate as evaluate_fake, evaluate_real, fake_band_stats, generate_fake_dataset,
    rank_and_name, table2_csv, table3_csv, table3_numeric_csv, FakeDataset, RmseReport,
};
use airgan_core::plot::{band_plot_svg, history_plot_svg, save_svg, PlotSize};
use airgan_core::{cgan::TrainingHistory, Error, NUM_CLASSES};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::{BandArgs, EvaluateArgs, GenerateArgs, HistoryArgs, IngestArgs, PlotArgs, PlotKind, TrainArgs};

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
    .into()
}

fn ensure_dir(path: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))?;
    Ok(path.to_path_buf())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write_file(path, &text)
}

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} {} does not exist", path.display())))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned())
}

/// `runs/run-03/checkpoint.json` is named `run-03`; other files by stem.
fn run_name(path: &Path, generic: &str) -> String {
    if path.file_name().is_some_and(|f| f == generic) {
        if let Some(parent) = path.parent().and_then(Path::file_name) {
            return parent.to_string_lossy().into_owned();
        }
    }
    stem(path)
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    source: String,
    #[serde(flatten)]
    report: &'a IngestReport,
    balanced_per_class: usize,
    balance_seed: u64,
    rep_source: RepSource,
}

pub fn ingest(mut cfg: RunConfig, args: IngestArgs) -> CliResult<()> {
    if let Some(r) = args.rep_source {
        cfg.rep_source = r.into();
    }
    cfg.validate()?;
    let csv = args.csv.or_else(|| cfg.input_csv.clone()).ok_or_else(|| {
        CliError::Usage("no input CSV: pass a path or set input_csv in the config".into())
    })?;
    require_file(&csv, "input CSV")?;
    let out = ensure_dir(&cfg.output_dir)?;

    let (full, report) = load_dataset(&csv)?;
    if full.is_empty() {
        return Err(CliError::Usage(format!("{}: no usable days", csv.display())));
    }
    let seed = cfg.train.seed;
    let balanced = balance(&full, seed)?;
    let reps = match cfg.rep_source {
        RepSource::Balanced => ClassReps::from_dataset(&balanced)?,
        RepSource::Full => ClassReps::from_dataset(&full)?,
    };

    full.save_json(out.join("dataset.json"))?;
    balanced.save_json(out.join("balanced.json"))?;
    write_json(&out.join("class_stats.json"), &reps)?;
    let per_class = balanced.per_class_counts()[0];
    write_json(
        &out.join("ingest_report.json"),
        &IngestSummary {
            source: csv.display().to_string(),
            report: &report,
            balanced_per_class: per_class,
            balance_seed: seed,
            rep_source: cfg.rep_source,
        },
    )?;

    println!(
        "{} hourly records, {} rejected rows, {} invalid values",
        report.records,
        report.rejected_rows.len(),
        report.invalid_values
    );
    println!(
        "{} days kept, {} dropped, {} hours interpolated",
        report.days,
        report.dropped_days.len(),
        report.interpolated_cells
    );
    print!("{}", report.class_table());
    println!(
        "balanced: {per_class} per class, {} total (seed {seed})",
        balanced.len()
    );
    println!("wrote {}", out.display());
    Ok(())
}

pub fn train(mut cfg: RunConfig, args: TrainArgs) -> CliResult<()> {
    let t = &mut cfg.train;
    if let Some(v) = args.epochs {
        t.epochs = v;
    }
    if let Some(v) = args.batch_size {
        t.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        t.learning_rate = v;
    }
    if let Some(v) = args.loss_mode {
        t.loss_mode = v.into();
    }
    if let Some(v) = args.eval_samples {
        t.eval_samples_per_epoch = v;
    }
    if args.scale_inputs {
        t.scale_inputs = true;
    }
    if let Some(v) = args.runs {
        cfg.runs = v;
    }
    cfg.validate()?;

    let dataset_path = args
        .dataset
        .unwrap_or_else(|| cfg.output_dir.join("balanced.json"));
    require_file(&dataset_path, "dataset")?;
    let dataset = LabeledDataset::load_json(&dataset_path)?;
    let runs_dir = ensure_dir(&cfg.output_dir.join("runs"))?;

    let mut timings = String::from("run,seed,minutes\n");
    let mut minutes = Vec::new();
    let mut failures = 0;
    for i in 0..cfg.runs {
        let name = format!("run-{:02}", i + 1);
        let mut run_cfg = cfg.train.clone();
        run_cfg.seed = cfg.train.seed.wrapping_add(i as u64);
        let start = Instant::now();
        let progress = args.progress;
        let result = train_with(&dataset, &run_cfg, |_, rec| {
            if progress > 0 && rec.epoch % progress == 0 {
                eprintln!(
                    "{name} epoch {}: d_loss {:.4}, g_loss {:.4}, mean RMSE {:.3}",
                    rec.epoch, rec.d_loss, rec.g_loss, rec.mean_rmse
                );
            }
        });
        let outcome = match result {
            Ok(o) => o,
            Err(e) if e.is_numerical() => {
                eprintln!("{name} (seed {}) failed: {e}", run_cfg.seed);
                failures += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let elapsed = start.elapsed().as_secs_f64() / 60.0;
        let dir = ensure_dir(&runs_dir.join(&name))?;
        let epochs = outcome.history.records.len();
        let final_rmse = outcome.history.records.last().map(|r| r.mean_rmse);
        write_file(&dir.join("history.csv"), &outcome.history.to_csv())?;
        save_checkpoint(
            &Checkpoint {
                generator: outcome.generator,
                discriminator: outcome.discriminator,
                train_config: run_cfg.clone(),
                epochs_completed: epochs,
                run_index: Some(i + 1),
            },
            dir.join("checkpoint.json"),
        )?;
        writeln!(timings, "{},{},{}", i + 1, run_cfg.seed, elapsed).expect("string write");
        minutes.push(elapsed);
        match final_rmse {
            Some(r) => println!(
                "{name}: seed {}, {epochs} epochs, final mean RMSE {r:.3}, {elapsed:.2} min",
                run_cfg.seed
            ),
            None => println!("{name}: seed {}, 0 epochs", run_cfg.seed),
        }
    }

    write_file(&cfg.output_dir.join("timings.csv"), &timings)?;
    if minutes.is_empty() {
        return Err(CliError::AllRunsFailed(failures));
    }
    let min = minutes.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = minutes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = minutes.iter().sum::<f64>() / minutes.len() as f64;
    println!(
        "training time over {} runs (min/mean/max minutes): {min:.2}/{mean:.2}/{max:.2}",
        minutes.len()
    );
    if failures > 0 {
        eprintln!("{failures} of {} runs failed", cfg.runs);
    }
    Ok(())
}

pub fn generate(mut cfg: RunConfig, args: GenerateArgs) -> CliResult<()> {
    if let Some(r) = args.reps_per_class {
        cfg.reps_per_class = r;
    }
    cfg.validate()?;
    if args.name.is_some() && args.checkpoints.len() > 1 {
        return Err(CliError::Usage("--name needs a single checkpoint".into()));
    }
    for c in &args.checkpoints {
        require_file(c, "checkpoint")?;
    }
    let dir = ensure_dir(&cfg.output_dir.join("fakes"))?;
    for path in &args.checkpoints {
        let ckpt = load_checkpoint(path)?;
        let name = args
            .name
            .clone()
            .unwrap_or_else(|| run_name(path, "checkpoint.json"));
        let fake = generate_fake_dataset(
            &ckpt.generator,
            cfg.reps_per_class,
            cfg.train.seed,
            &name,
            Some(name.clone()),
        )?;
        let out = dir.join(format!("{name}.csv"));
        fake.save(&out)?;
        println!("{}: {} samples -> {}", name, fake.len(), out.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct RankEntry<'a> {
    rank: usize,
    name: &'a str,
    source: Option<&'a str>,
    mean: f64,
    stdev: f64,
}

pub fn evaluate(mut cfg: RunConfig, args: EvaluateArgs) -> CliResult<()> {
    if let Some(r) = args.rep_source {
        cfg.rep_source = r.into();
    }
    cfg.validate()?;
    let real_path = args
        .real
        .unwrap_or_else(|| cfg.output_dir.join("balanced.json"));
    let rep_path = match cfg.rep_source {
        RepSource::Balanced => real_path,
        RepSource::Full => args
            .full
            .unwrap_or_else(|| cfg.output_dir.join("dataset.json")),
    };
    require_file(&rep_path, "real dataset")?;
    for f in &args.fakes {
        require_file(f, "fake dataset")?;
    }

    let real = LabeledDataset::load_json(&rep_path)?;
    let reps = ClassReps::from_dataset(&real)?;
    let real_report = evaluate_real("real", &real, &reps)?;
    let mut fake_reports = Vec::with_capacity(args.fakes.len());
    for f in &args.fakes {
        let fake = FakeDataset::load(f)?;
        fake_reports.push(evaluate_fake(&fake, &reps)?);
    }
    let ranked = rank_and_name(fake_reports, "fake");

    let dir = ensure_dir(&cfg.output_dir.join("evaluation"))?;
    let mut rows: Vec<RmseReport> = vec![real_report];
    rows.extend(ranked.iter().cloned());
    for r in &rows {
        write_json(&dir.join(format!("report-{}.json", r.dataset_name)), r)?;
    }
    write_file(&dir.join("table2.csv"), &table2_csv(&rows))?;
    write_file(&dir.join("table3.csv"), &table3_csv(&rows))?;
    write_file(&dir.join("table3_numeric.csv"), &table3_numeric_csv(&rows))?;
    let ranking: Vec<RankEntry> = ranked
        .iter()
        .enumerate()
        .map(|(i, r)| RankEntry {
            rank: i + 1,
            name: &r.dataset_name,
            source: r.source.as_deref(),
            mean: r.overall.mean,
            stdev: r.overall.stdev,
        })
        .collect();
    write_json(&dir.join("ranking.json"), &ranking)?;

    println!("{:<10} {:>8} {:>8} {:>8} {:>8}  source", "dataset", "min", "mean", "stdev", "max");
    for r in &rows {
        let o = &r.overall;
        println!(
            "{:<10} {:>8.2} {:>8.2} {:>8.2} {:>8.2}  {}",
            r.dataset_name,
            o.min,
            o.mean,
            o.stdev,
            o.max,
            r.source.as_deref().unwrap_or("-")
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn plot(cfg: RunConfig, args: PlotArgs) -> CliResult<()> {
    let size = PlotSize {
        width: args.width.unwrap_or(cfg.plot.width),
        height: args.height.unwrap_or(cfg.plot.height),
    };
    size.validate()?;
    let dir = cfg.output_dir.join("plots");
    match args.kind {
        PlotKind::Bands(b) => plot_bands(&cfg, b, size, &dir),
        PlotKind::History(h) => plot_histories(h, size, &dir),
    }
}

fn plot_bands(cfg: &RunConfig, args: BandArgs, size: PlotSize, dir: &Path) -> CliResult<()> {
    let classes = args.classes.unwrap_or_else(|| cfg.plot.classes.clone());
    if classes.is_empty() {
        return Err(CliError::Usage("no classes to plot".into()));
    }
    let labels = classes
        .iter()
        .map(|&c| {
            ClassLabel::new(c)
                .map_err(|_| CliError::Usage(format!("class {c} is not in 0..{NUM_CLASSES}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let overlay = match &args.real_stats {
        Some(p) => {
            require_file(p, "real stats")?;
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            let reps: ClassReps = serde_json::from_str(&text).map_err(|e| {
                CliError::Usage(format!("{}: not a class statistics file: {e}", p.display()))
            })?;
            Some(reps)
        }
        None => None,
    };

    enum Source {
        Real(LabeledDataset),
        Fake(FakeDataset),
    }
    let (source, input) = match (args.dataset, args.fake) {
        (Some(p), _) => {
            require_file(&p, "dataset")?;
            (Source::Real(LabeledDataset::load_json(&p)?), p)
        }
        (None, Some(p)) => {
            require_file(&p, "fake dataset")?;
            (Source::Fake(FakeDataset::load(&p)?), p)
        }
        (None, None) => return Err(CliError::Usage("pass --dataset or --fake".into())),
    };
    let empty = match &source {
        Source::Real(d) => d.is_empty(),
        Source::Fake(f) => f.is_empty(),
    };
    if empty {
        return Err(CliError::Usage(format!("{} has no samples", input.display())));
    }
    let prefix = args.prefix.unwrap_or_else(|| stem(&input));
    ensure_dir(dir)?;
    for label in labels {
        let stats = match &source {
            Source::Real(d) => band_stats(d, label)?,
            Source::Fake(f) => fake_band_stats(f, label)?,
        };
        let reference = overlay.as_ref().map(|r| r.rep(label));
        let title = format!("{prefix}: class {label} ({})", label.description());
        let svg = band_plot_svg(&stats, reference, &title, size);
        let path = dir.join(format!("{prefix}-class{label}.svg"));
        save_svg(&svg, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn plot_histories(args: HistoryArgs, size: PlotSize, dir: &Path) -> CliResult<()> {
    for p in &args.histories {
        require_file(p, "history")?;
    }
    ensure_dir(dir)?;
    for p in &args.histories {
        let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
        let history = TrainingHistory::from_csv(&text)?;
        if history.records.is_empty() {
            return Err(CliError::Usage(format!("{} has no epochs", p.display())));
        }
        let name = run_name(p, "history.csv");
        let svg = history_plot_svg(&history, &format!("{name}: losses and mean RMSE"), size)?;
        let path = dir.join(format!("history-{name}.svg"));
        save_svg(&svg, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
