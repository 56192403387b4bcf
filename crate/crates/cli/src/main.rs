use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cpmlc_core::channel::{frame_rng, ChannelConfig};
use cpmlc_core::mlc::{cpmlcid_decode, message_schedule, Scheme, SchemeKind};
use cpmlc_core::sim::{
    interleaver_sweep, ncg_from_threshold, required_snr, required_snr_from, run_point, write_csv, write_metadata,
    ExperimentConfig, RunMetadata, SearchOptions, StoppingRule, SweepRecord, Threshold, Workers,
};
use cpmlc_core::BitVector;

#[derive(Parser, Debug)]
#[command(name = "cpmlc", version, about = "Monte Carlo experiments for CP-MLC-ID and its baselines")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    min_errors: Option<u64>,
    #[arg(long, global = true)]
    min_frames: Option<u64>,
    #[arg(long, global = true)]
    max_frames: Option<u64>,
    /// Exactly 300 frames per point.
    #[arg(long, global = true)]
    paper_frames: bool,
    /// CSV output; a `.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit successfully even if a threshold lacks the requested error count.
    #[arg(long, global = true)]
    allow_unresolved: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BER over the configured SNR grid.
    Sweep {
        /// SNR points in dB; overrides the file.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
    },
    /// SNR at which the pre-outer BER crosses the target.
    Threshold,
    /// Net coding gain at the configured threshold.
    Ncg,
    /// SNR loss per interleaver size relative to S = n.
    InterleaverSweep,
    /// Per-iteration decoder trace of one frame.
    ScheduleTrace {
        #[arg(long, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        frame: u64,
    },
}

struct Ctx {
    cfg: ExperimentConfig,
    scheme: Scheme,
    seed: u64,
    rule: StoppingRule,
    workers: Workers,
    out: Option<PathBuf>,
    allow_unresolved: bool,
}

impl Ctx {
    fn new(c: Common) -> Result<Self> {
        let path = c.config.context("--config <file> is required")?;
        let mut cfg = ExperimentConfig::load(&path)?;
        if let Some(s) = c.seed {
            cfg.seed = s;
        }
        let mut rule = if c.paper_frames { StoppingRule::PAPER_FRAMES } else { cfg.stopping };
        if let Some(v) = c.min_errors {
            rule.min_bit_errors = v;
        }
        if let Some(v) = c.min_frames {
            rule.min_frames = v;
        }
        if let Some(v) = c.max_frames {
            rule.max_frames = v;
            rule.min_frames = rule.min_frames.min(v);
        }
        rule.validate()?;
        cfg.stopping = rule;
        let scheme = Scheme::new(cfg.scheme.build()?)?;
        Ok(Self {
            seed: cfg.seed,
            scheme,
            rule,
            workers: c.workers.map(Workers).unwrap_or_default(),
            out: c.out,
            allow_unresolved: c.allow_unresolved,
            cfg,
        })
    }

    fn search_options(&self) -> SearchOptions {
        SearchOptions {
            workers: self.workers,
            target_ber: self.cfg.threshold.target_ber,
            tol_db: self.cfg.threshold.tol_db,
            ..SearchOptions::new(self.seed, self.rule)
        }
    }

    fn threshold(&self, scheme: &Scheme) -> Result<Threshold> {
        let t = &self.cfg.threshold;
        let opts = self.search_options();
        Ok(match t.bracket {
            Some(b) => required_snr(scheme, b, &opts)?,
            None => required_snr_from(scheme, t.guess_db, t.step_db, 40, &opts)?,
        })
    }

    /// CSV to `--out` (plus sidecar) or to stdout.
    fn emit<T: Serialize>(&self, command: &str, rows: &[T], extra: serde_json::Value) -> Result<()> {
        match &self.out {
            Some(path) => {
                write_csv(path, rows)?;
                let mut meta = RunMetadata::new(command, self.seed, self.workers.0, self.cfg.to_toml_string());
                meta.extra = extra;
                write_metadata(path, &meta)?;
                eprintln!("wrote {}", path.display());
            }
            None => {
                let mut w = csv::Writer::from_writer(std::io::stdout());
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    fn check_resolved(&self, under_resolved: bool) -> Result<()> {
        if under_resolved && !self.allow_unresolved {
            bail!("threshold is under-resolved; raise --max-frames or pass --allow-unresolved");
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct NcgRow {
    scheme: String,
    required_snr_db: f64,
    total_rate: f64,
    overhead_percent: f64,
    ncg_db: f64,
    under_resolved: bool,
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    lane: usize,
    flips: usize,
    messages: String,
}

fn sweep(ctx: &Ctx, snr: Option<Vec<f64>>) -> Result<()> {
    let snrs = snr.unwrap_or_else(|| ctx.cfg.sweep.snr_db.clone());
    if snrs.is_empty() && ctx.cfg.sweep.bsc_p.is_empty() {
        bail!("no operating points: set [sweep] snr_db or pass --snr");
    }
    let mut rows: Vec<SweepRecord> = Vec::new();
    let channels = snrs
        .iter()
        .map(|&s| ChannelConfig::awgn(s, ctx.seed))
        .chain(ctx.cfg.sweep.bsc_p.iter().map(|&p| ChannelConfig::bsc(p, ctx.seed)));
    for ch in channels {
        let r = run_point(&ctx.scheme, &ch, &ctx.rule, ctx.workers)?;
        eprintln!("{} snr={} ber={:.4e} frames={}", r.scheme, r.snr_db, r.pre_outer_ber, r.frames);
        rows.push(r);
    }
    ctx.emit("sweep", &rows, serde_json::Value::Null)
}

fn threshold(ctx: &Ctx) -> Result<()> {
    let t = ctx.threshold(&ctx.scheme)?;
    println!("required_snr_db={:.4} under_resolved={}", t.snr_db, t.under_resolved);
    if ctx.out.is_some() {
        ctx.emit("threshold", &t.probes, serde_json::json!({ "required_snr_db": t.snr_db }))?;
    }
    ctx.check_resolved(t.under_resolved)
}

fn ncg(ctx: &Ctx) -> Result<()> {
    let t = ctx.threshold(&ctx.scheme)?;
    let cfg = ctx.scheme.config();
    let row = NcgRow {
        scheme: cfg.id(),
        required_snr_db: t.snr_db,
        total_rate: cfg.total_rate(),
        overhead_percent: cfg.overhead_percent(),
        ncg_db: ncg_from_threshold(cfg, t.snr_db),
        under_resolved: t.under_resolved,
    };
    ctx.emit("ncg", &[row], serde_json::json!({ "probes": t.probes }))?;
    ctx.check_resolved(t.under_resolved)
}

fn interleaver(ctx: &Ctx) -> Result<()> {
    let base = ctx.scheme.config();
    if base.kind != SchemeKind::CpMlcId {
        bail!("interleaver-sweep needs a cp-mlc-id scheme");
    }
    let bracket = ctx
        .cfg
        .threshold
        .bracket
        .context("interleaver-sweep needs [threshold] bracket")?;
    let s = &ctx.cfg.interleaver_sweep;
    let rows = interleaver_sweep(base, &s.sizes, &s.iterations, bracket, &ctx.search_options())?;
    ctx.emit("interleaver-sweep", &rows, serde_json::Value::Null)?;
    ctx.check_resolved(rows.iter().any(|r| r.under_resolved))
}

fn schedule_trace(ctx: &Ctx, snr: f64, frame: u64) -> Result<()> {
    let cfg = ctx.scheme.config();
    if cfg.kind != SchemeKind::CpMlcId {
        bail!("schedule-trace needs a cp-mlc-id scheme");
    }
    let ch = ChannelConfig::awgn(snr, ctx.seed);
    let mut rng = frame_rng(ctx.seed, frame);
    let info = BitVector::random(cfg.info_bits_per_frame(), &mut rng);
    let f = ctx.scheme.encode(&info)?;
    let llrs: Vec<Vec<f64>> = f.lanes.iter().map(|b| ch.transmit(b, &mut rng).into_inner()).collect();
    let decoded = cpmlcid_decode(&ctx.scheme, &llrs, false)?;
    let schedule = message_schedule(cfg.d, cfg.iterations);
    let rows: Vec<TraceRow> = decoded
        .trace
        .iter()
        .zip(&schedule)
        .map(|(t, s)| TraceRow {
            iteration: t.iteration,
            lane: t.lane,
            flips: t.flips,
            messages: s.messages.join(" -> "),
        })
        .collect();
    eprintln!("frame {frame}: {} info bit errors", decoded.info.hamming_distance(&info));
    ctx.emit("schedule-trace", &rows, serde_json::json!({ "snr_db": snr, "frame": frame }))
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx::new(cli.common)?;
    match cli.command {
        Command::Sweep { snr } => sweep(&ctx, snr),
        Command::Threshold => threshold(&ctx),
        Command::Ncg => ncg(&ctx),
        Command::InterleaverSweep => interleaver(&ctx),
        Command::ScheduleTrace { snr, frame } => schedule_trace(&ctx, snr, frame),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
