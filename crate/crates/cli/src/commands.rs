use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use skyhand_core::gesture::{
    classify, extract_features, featurize, generate_synthetic_dataset, read_dataset, read_landmark_stream,
    train_classifier, write_dataset, write_landmark_stream, GestureClass, Hyperparams, LabeledFrame, Mlp,
};
use skyhand_core::orchestrator::{read_log, replay, write_log, MetricsReport, SessionConfig};
use skyhand_core::sim::{min_pairwise_distance, write_trace};
use skyhand_core::trajectory::{read_path, tracing_errors_with, ErrorDirection};

use crate::error::{create_output, open_input, read_input, CliError, CliResult};
use crate::report::{json_line, metrics_line, write_reports, Format};
use crate::scenario::{Overrides, ScenarioConfig};
use crate::serve::{serve, ServeOptions};
use crate::{
    ClassifyArgs, Cli, Cmd, GenDatasetArgs, GlobalArgs, MetricsArgs, ReplayArgs, ServeArgs, SimulateArgs, TrainArgs,
};

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Cmd::Simulate(a) => simulate(g, a, out),
        Cmd::Metrics(a) => metrics(g, a, out),
        Cmd::Train(a) => train(g, a, out),
        Cmd::Classify(a) => classify_frames(g, a, out),
        Cmd::Serve(a) => run_serve(g, a),
        Cmd::Replay(a) => replay_log(g, a, out),
        Cmd::GenDataset(a) => gen_dataset(g, a, out),
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::runtime("write", e)
}

fn load_model(path: &Path) -> CliResult<Mlp<f64>> {
    Mlp::load(open_input(path)?).map_err(|e| CliError::config(path.display(), e))
}

fn require_seed(g: &GlobalArgs, fallback: Option<u64>) -> CliResult<u64> {
    g.seed
        .or(fallback)
        .ok_or_else(|| CliError::Usage("this stage is random: pass --seed (or set seed in the config)".into()))
}

fn simulate(g: &GlobalArgs, a: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let path = g.config.as_ref().ok_or_else(|| CliError::Usage("simulate needs --config <scenario.toml>".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    cfg.apply(&Overrides { seed: g.seed, alpha: a.alpha, spacing: a.spacing, speed: a.speed });
    let outcome = crate::scenario::run(&cfg)?;
    if let Some(p) = &g.output {
        write_trace(create_output(p)?, &outcome.trace).map_err(|e| CliError::runtime(p.display(), e))?;
    }
    if let Some(p) = &a.report {
        write_reports(create_output(p)?, &outcome.reports, Format::Json)?;
    }
    write_reports(out, &outcome.reports, g.format)
}

fn metrics(g: &GlobalArgs, a: &MetricsArgs, out: &mut dyn Write) -> CliResult<()> {
    let load = |p: &Path| read_path::<f64, _>(open_input(p)?).map_err(|e| CliError::config(p.display(), e));
    let drawn = load(&a.drawn)?;
    let truth = load(&a.truth)?;
    if drawn.units != truth.units {
        return Err(CliError::Config(format!(
            "unit mismatch: drawn path in {}, truth in {}",
            drawn.units, truth.units
        )));
    }
    if drawn.points.is_empty() || truth.points.is_empty() {
        return Err(CliError::Config("paths must not be empty".into()));
    }
    let span = match (drawn.times.first(), drawn.times.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let direction = if a.symmetric { ErrorDirection::Symmetric } else { ErrorDirection::DrawnToTruth };
    let report = tracing_errors_with(&drawn.points, &truth.points, a.duration.unwrap_or(span), direction);
    let reports = [MetricsReport::Tracing(report)];
    if let Some(p) = &g.output {
        write_reports(create_output(p)?, &reports, Format::Json)?;
    }
    write_reports(out, &reports, g.format)
}

/// `train --config` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: Option<u64>,
    pub per_class: Option<usize>,
    pub noise: Option<f64>,
    pub dataset: Option<std::path::PathBuf>,
    pub hyper: Hyperparams,
}

#[derive(Serialize)]
struct TrainSummary {
    seed: u64,
    samples: usize,
    epochs: usize,
    train_accuracy: f64,
    validation_accuracy: f64,
    final_loss: Option<f64>,
}

fn train(g: &GlobalArgs, a: &TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg: TrainConfig = match &g.config {
        Some(p) => toml::from_str(&read_input(p)?).map_err(|e| CliError::config(p.display(), e))?,
        None => TrainConfig::default(),
    };
    let seed = require_seed(g, cfg.seed)?;
    let mut hyper = cfg.hyper.clone();
    if let Some(e) = a.epochs {
        hyper.epochs = e;
    }
    if let Some(h) = a.hidden {
        hyper.hidden = h;
    }
    let frames: Vec<LabeledFrame<f64>> = match a.dataset.as_ref().or(cfg.dataset.as_ref()) {
        Some(p) => read_dataset(open_input(p)?).map_err(|e| CliError::config(p.display(), e))?,
        None => generate_synthetic_dataset(
            a.per_class.or(cfg.per_class).unwrap_or(1000),
            a.noise.or(cfg.noise).unwrap_or(0.05),
            seed,
        ),
    };
    let samples = featurize(&frames).map_err(|e| CliError::config("dataset", e))?;
    let outcome = train_classifier(&samples, &hyper, seed).map_err(|e| CliError::config("training", e))?;
    if let Some(p) = &g.output {
        let mut w = create_output(p)?;
        outcome.model.save(&mut w).map_err(|e| CliError::runtime(p.display(), e))?;
        w.flush().map_err(io)?;
    }
    let summary = TrainSummary {
        seed,
        samples: samples.len(),
        epochs: hyper.epochs,
        train_accuracy: outcome.train_accuracy,
        validation_accuracy: outcome.validation_accuracy,
        final_loss: outcome.model.metadata.loss_curve.last().copied(),
    };
    let line = match g.format {
        Format::Json => json_line(&summary)?,
        Format::Text => format!(
            "Samples {} | Epochs {} | Train accuracy {:.4} | Validation accuracy {:.4}",
            summary.samples, summary.epochs, summary.train_accuracy, summary.validation_accuracy
        ),
    };
    writeln!(out, "{line}").map_err(io)
}

#[derive(Serialize)]
struct Classification {
    t: f64,
    gesture: GestureClass,
    confidence: f64,
}

fn classify_frames(g: &GlobalArgs, a: &ClassifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let frames =
        read_landmark_stream::<f64, _>(open_input(&a.frames)?).map_err(|e| CliError::config(a.frames.display(), e))?;
    let mut lines = Vec::with_capacity(frames.len());
    for f in &frames {
        let features = extract_features(f).map_err(|e| CliError::runtime("features", e))?;
        let (gesture, confidence) = classify(&model, &features).map_err(|e| CliError::config("model", e))?;
        let c = Classification { t: f.timestamp, gesture, confidence };
        lines.push(match g.format {
            Format::Json => json_line(&c)?,
            Format::Text => format!("{:.3} {} {:.3}", c.t, c.gesture, c.confidence),
        });
    }
    let text = lines.join("\n") + if lines.is_empty() { "" } else { "\n" };
    if let Some(p) = &g.output {
        create_output(p)?.write_all(text.as_bytes()).map_err(io)?;
    }
    out.write_all(text.as_bytes()).map_err(io)
}

fn run_serve(g: &GlobalArgs, a: &ServeArgs) -> CliResult<()> {
    let session = match &g.config {
        Some(p) => toml::from_str::<SessionConfig>(&read_input(p)?).map_err(|e| CliError::config(p.display(), e))?,
        None => SessionConfig::default(),
    };
    if !(a.rate > 0.0) {
        return Err(CliError::Usage("--rate must be positive".into()));
    }
    let model = a.model.as_deref().map(load_model).transpose()?;
    let opts = ServeOptions { session, model, static_dir: a.static_dir.clone(), rate: a.rate };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::runtime("runtime", e))?;
    let log = runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(a.listen)
            .await
            .map_err(|e| CliError::config(format!("cannot listen on {}", a.listen), e))?;
        let addr = listener.local_addr().map_err(|e| CliError::runtime("listen", e))?;
        eprintln!("serving ws://{addr}/ws");
        serve(listener, opts, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })?;
    if let Some(p) = &g.output {
        write_log(create_output(p)?, &log).map_err(|e| CliError::runtime(p.display(), e))?;
    }
    Ok(())
}

fn replay_log(g: &GlobalArgs, a: &ReplayArgs, out: &mut dyn Write) -> CliResult<()> {
    let log = read_log(open_input(&a.log)?).map_err(|e| CliError::config(a.log.display(), e))?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    let snaps = replay(&log, model).map_err(|e| CliError::runtime("replay", e))?;
    if let Some(p) = &g.output {
        let mut w = create_output(p)?;
        for s in &snaps {
            writeln!(w, "{}", json_line(s)?).map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    let Some(last) = snaps.last() else {
        return writeln!(out, "empty session").map_err(io);
    };
    let events: usize = snaps.iter().map(|s| s.events.len()).sum();
    let trace = skyhand_core::sim::SwarmTrace {
        dt: log.config.sim.dt,
        frames: snaps.iter().map(|s| skyhand_core::sim::TraceFrame { t: s.t, drones: s.drones.clone() }).collect(),
    };
    let separation = min_pairwise_distance(&trace).ok().map(|d| MetricsReport::Separation { min_distance: d });
    match g.format {
        Format::Text => {
            writeln!(
                out,
                "Ticks {} | Time, s {:.2} | Final phase {} | Events {}",
                snaps.len(),
                last.t,
                last.phase.name(),
                events
            )
            .map_err(io)?;
            if let Some(r) = &separation {
                writeln!(out, "{}", metrics_line(r)).map_err(io)?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Summary<'a> {
                ticks: usize,
                time_s: f64,
                final_phase: &'a str,
                events: usize,
            }
            let s = Summary { ticks: snaps.len(), time_s: last.t, final_phase: last.phase.name(), events };
            writeln!(out, "{}", json_line(&s)?).map_err(io)?;
            if let Some(r) = &separation {
                writeln!(out, "{}", json_line(r)?).map_err(io)?;
            }
        }
    }
    Ok(())
}

fn gen_dataset(g: &GlobalArgs, a: &GenDatasetArgs, out: &mut dyn Write) -> CliResult<()> {
    let seed = require_seed(g, None)?;
    if a.per_class == 0 {
        return Err(CliError::Usage("--per-class must be at least 1".into()));
    }
    if !(a.noise >= 0.0) {
        return Err(CliError::Usage("--noise must be non-negative".into()));
    }
    let only = a
        .gesture
        .as_deref()
        .map(|s| s.parse::<GestureClass>().map_err(|e| CliError::Usage(e.to_string())))
        .transpose()?;
    let mut data: Vec<LabeledFrame<f64>> = generate_synthetic_dataset(a.per_class, a.noise, seed);
    if let Some(gesture) = only {
        data.retain(|s| s.label == gesture);
    }
    let mut buf = Vec::new();
    if a.landmarks {
        let mut frames: Vec<_> = data.into_iter().map(|s| s.frame).collect();
        for (i, f) in frames.iter_mut().enumerate() {
            f.timestamp = i as f64 / 30.0;
        }
        write_landmark_stream(&mut buf, &frames).map_err(|e| CliError::runtime("landmarks", e))?;
    } else {
        write_dataset(&mut buf, &data).map_err(|e| CliError::runtime("dataset", e))?;
    }
    match &g.output {
        Some(p) => create_output(p)?.write_all(&buf).map_err(io),
        None => out.write_all(&buf).map_err(io),
    }
}
