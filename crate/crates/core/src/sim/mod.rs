//! Monte Carlo engine: BER points, threshold search, NCG and the
//! interleaver-size experiment.

mod config;
mod output;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::channel::{frame_rng, uncoded_required_snr_db, ChannelConfig, ChannelKind};
use crate::error::{Error, Result};
use crate::mlc::{default_damping, Scheme, SchemeConfig};

pub use config::{ExperimentConfig, SchemeSection, SweepSection, ThresholdSection, InterleaverSweepSection};
pub use output::{write_csv, write_metadata, RunMetadata};

/// Post-outer-code target that defines the uncoded reference SNR.
pub const REFERENCE_BER: f64 = 1e-15;

/// First batch of frames; later batches grow with the running total so the
/// stop check stays cheap without depending on the worker count.
const FIRST_BATCH: u64 = 512;
const MAX_BATCH: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoppingRule {
    pub min_bit_errors: u64,
    pub min_frames: u64,
    pub max_frames: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_bit_errors: 100,
            min_frames: 10_000,
            max_frames: 10_000_000,
        }
    }
}

impl StoppingRule {
    /// Exactly 300 frames per point regardless of errors.
    pub const PAPER_FRAMES: StoppingRule = StoppingRule {
        min_bit_errors: 0,
        min_frames: 300,
        max_frames: 300,
    };

    pub fn validate(&self) -> Result<()> {
        if self.min_frames > self.max_frames || self.max_frames == 0 {
            return Err(Error::Config(format!(
                "stopping rule needs 0 < min_frames <= max_frames, got {} and {}",
                self.min_frames, self.max_frames
            )));
        }
        Ok(())
    }

    fn satisfied(&self, frames: u64, bit_errors: u64) -> bool {
        frames >= self.max_frames || (frames >= self.min_frames && bit_errors >= self.min_bit_errors)
    }
}

/// One simulated operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scheme: String,
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub pre_outer_ber: f64,
    pub bypassed_bit_errors: u64,
    pub wall_seconds: f64,
    pub master_seed: u64,
    pub under_resolved: bool,
}

impl SweepRecord {
    /// Same measurement, ignoring wall-clock time.
    pub fn same_counts(&self, other: &SweepRecord) -> bool {
        self.scheme == other.scheme
            && self.snr_db == other.snr_db
            && self.frames == other.frames
            && self.bits == other.bits
            && self.bit_errors == other.bit_errors
            && self.bypassed_bit_errors == other.bypassed_bit_errors
    }

    /// Binomial standard deviation of the BER estimate.
    pub fn ber_std(&self) -> f64 {
        let p = self.pre_outer_ber;
        (p * (1.0 - p) / self.bits as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Counts {
    frames: u64,
    bit_errors: u64,
    bypassed: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            frames: self.frames + o.frames,
            bit_errors: self.bit_errors + o.bit_errors,
            bypassed: self.bypassed + o.bypassed,
        }
    }
}

/// How frames are spread over threads. Results never depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Workers(pub usize);

impl Default for Workers {
    fn default() -> Self {
        Workers(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

impl Workers {
    fn pool(self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.0.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

/// Encode, transmit, decode and count errors for one frame. Info bits are
/// drawn before the noise so the same frame index sees the same data and the
/// same noise realization (up to scale) at every SNR.
pub fn simulate_frame(scheme: &Scheme, channel: &ChannelConfig, frame_index: u64) -> Result<(u64, u64)> {
    let cfg = scheme.config();
    let mut rng = frame_rng(channel.master_seed, frame_index);
    let info = BitVector::random(cfg.info_bits_per_frame(), &mut rng);
    let frame = scheme.encode(&info)?;
    let llrs: Vec<Vec<f64>> = frame
        .lanes
        .iter()
        .map(|b| channel.transmit(b, &mut rng).into_inner())
        .collect();
    let decoded = scheme.decode(&llrs)?.info;
    let diff = decoded.xor(&info);
    let bypassed = diff.ones().filter(|p| cfg.bypassed_range().contains(p)).count() as u64;
    Ok((diff.weight() as u64, bypassed))
}

fn run_batch(scheme: &Scheme, channel: &ChannelConfig, range: std::ops::Range<u64>) -> Result<Counts> {
    range
        .into_par_iter()
        .map(|fi| {
            simulate_frame(scheme, channel, fi).map(|(e, b)| Counts {
                frames: 1,
                bit_errors: e,
                bypassed: b,
            })
        })
        .try_reduce(Counts::default, |a, b| Ok(a + b))
}

/// Simulate frames 0, 1, 2, ... until the stopping rule is met. Batches are
/// sized from the running frame count only, so any worker count yields the
/// same record.
pub fn run_point(scheme: &Scheme, channel: &ChannelConfig, rule: &StoppingRule, workers: Workers) -> Result<SweepRecord> {
    channel.validate()?;
    rule.validate()?;
    let pool = workers.pool()?;
    let start = Instant::now();
    let mut total = Counts::default();
    while !rule.satisfied(total.frames, total.bit_errors) {
        let len = total
            .frames
            .clamp(FIRST_BATCH, MAX_BATCH)
            .min(rule.max_frames - total.frames);
        let range = total.frames..total.frames + len;
        total = total + pool.install(|| run_batch(scheme, channel, range))?;
    }
    let cfg = scheme.config();
    let bits = total.frames * cfg.info_bits_per_frame() as u64;
    let snr_db = match channel.kind {
        ChannelKind::Awgn { snr_db } => snr_db,
        ChannelKind::Bsc { .. } => f64::NAN,
    };
    Ok(SweepRecord {
        scheme: cfg.id(),
        snr_db,
        frames: total.frames,
        bits,
        bit_errors: total.bit_errors,
        pre_outer_ber: total.bit_errors as f64 / bits as f64,
        bypassed_bit_errors: total.bypassed,
        wall_seconds: start.elapsed().as_secs_f64(),
        master_seed: channel.master_seed,
        under_resolved: total.bit_errors < rule.min_bit_errors,
    })
}

/// BER over a grid of AWGN SNRs.
pub fn sweep(
    scheme: &Scheme,
    snrs_db: &[f64],
    master_seed: u64,
    rule: &StoppingRule,
    workers: Workers,
) -> Result<Vec<SweepRecord>> {
    snrs_db
        .iter()
        .map(|&snr| run_point(scheme, &ChannelConfig::awgn(snr, master_seed), rule, workers))
        .collect()
}

/// Knobs shared by every threshold search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub master_seed: u64,
    pub rule: StoppingRule,
    pub workers: Workers,
    pub target_ber: f64,
    pub tol_db: f64,
}

impl SearchOptions {
    pub fn new(master_seed: u64, rule: StoppingRule) -> Self {
        Self {
            master_seed,
            rule,
            workers: Workers::default(),
            target_ber: crate::codes::OuterCodeModel::KP4.threshold_ber,
            tol_db: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Threshold {
    pub snr_db: f64,
    /// Every probe in evaluation order.
    pub probes: Vec<SweepRecord>,
    /// A probe at either end of the final interval lacked the requested
    /// error count.
    pub under_resolved: bool,
}

/// Bisection on measured BER for the SNR where it crosses `target_ber`.
/// Needs BER(lo) > target >= BER(hi). The answer is the midpoint of the
/// final interval, whose width is at most `tol_db`.
pub fn required_snr(scheme: &Scheme, bracket: (f64, f64), opts: &SearchOptions) -> Result<Threshold> {
    let (mut lo, mut hi) = bracket;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Config(format!("bracket ({lo}, {hi}) is empty")));
    }
    if opts.tol_db.is_nan() || opts.tol_db <= 0.0 {
        return Err(Error::Config(format!("tolerance must be positive, got {}", opts.tol_db)));
    }
    let mut probes = Vec::new();
    let probe = |snr: f64, probes: &mut Vec<SweepRecord>| -> Result<SweepRecord> {
        let r = run_point(scheme, &ChannelConfig::awgn(snr, opts.master_seed), &opts.rule, opts.workers)?;
        probes.push(r.clone());
        Ok(r)
    };
    let mut rec_lo = probe(lo, &mut probes)?;
    let mut rec_hi = probe(hi, &mut probes)?;
    if !(rec_lo.pre_outer_ber > opts.target_ber && rec_hi.pre_outer_ber <= opts.target_ber) {
        return Err(Error::Unbracketed {
            lo,
            hi,
            target: opts.target_ber,
            ber_lo: rec_lo.pre_outer_ber,
            ber_hi: rec_hi.pre_outer_ber,
        });
    }
    while hi - lo > opts.tol_db {
        let mid = 0.5 * (lo + hi);
        let rec = probe(mid, &mut probes)?;
        if rec.pre_outer_ber > opts.target_ber {
            lo = mid;
            rec_lo = rec;
        } else {
            hi = mid;
            rec_hi = rec;
        }
    }
    Ok(Threshold {
        snr_db: 0.5 * (lo + hi),
        under_resolved: rec_lo.under_resolved || rec_hi.under_resolved,
        probes,
    })
}

/// Walk outward from `guess` in `step` dB until the target is straddled,
/// then bisect. Probes in the walk use the same stopping rule.
pub fn required_snr_from(scheme: &Scheme, guess: f64, step: f64, max_steps: usize, opts: &SearchOptions) -> Result<Threshold> {
    let ber_at = |snr: f64| -> Result<f64> {
        run_point(scheme, &ChannelConfig::awgn(snr, opts.master_seed), &opts.rule, opts.workers).map(|r| r.pre_outer_ber)
    };
    let mut snr = guess;
    let mut ber = ber_at(snr)?;
    let up = ber > opts.target_ber;
    for _ in 0..max_steps {
        let next = if up { snr + step } else { snr - step };
        let next_ber = ber_at(next)?;
        if (next_ber > opts.target_ber) != up {
            let bracket = if up { (snr, next) } else { (next, snr) };
            return required_snr(scheme, bracket, opts);
        }
        snr = next;
        ber = next_ber;
    }
    Err(Error::Unbracketed {
        lo: guess.min(snr),
        hi: guess.max(snr),
        target: opts.target_ber,
        ber_lo: ber,
        ber_hi: ber,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ncg {
    pub ncg_db: f64,
    pub total_rate: f64,
    pub threshold: Threshold,
}

/// Net coding gain from a measured threshold.
pub fn ncg_from_threshold(cfg: &SchemeConfig, required_snr_db: f64) -> f64 {
    uncoded_required_snr_db(REFERENCE_BER) - required_snr_db + 10.0 * cfg.total_rate().log10()
}

pub fn ncg(scheme: &Scheme, bracket: (f64, f64), opts: &SearchOptions) -> Result<Ncg> {
    let threshold = required_snr(scheme, bracket, opts)?;
    Ok(Ncg {
        ncg_db: ncg_from_threshold(scheme.config(), threshold.snr_db),
        total_rate: scheme.config().total_rate(),
        threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterleaverLoss {
    pub iterations: usize,
    pub size: usize,
    pub required_snr_db: f64,
    pub loss_db: f64,
    pub under_resolved: bool,
}

/// SNR loss of each interleaver size relative to the full-length
/// interleaver (S = n), for each iteration count. Damping comes from the
/// pinned schedules.
pub fn interleaver_sweep(
    base: &SchemeConfig,
    sizes: &[usize],
    iteration_counts: &[usize],
    bracket: (f64, f64),
    opts: &SearchOptions,
) -> Result<Vec<InterleaverLoss>> {
    let n = base.n();
    if let Some(s) = sizes.iter().find(|&&s| s == 0 || !n.is_multiple_of(s)) {
        return Err(Error::Interleaver(format!("size {s} does not divide {n}")));
    }
    let mut rows = Vec::new();
    for &it in iteration_counts {
        let damping = default_damping(it)
            .ok_or_else(|| Error::Config(format!("no damping schedule for {it} iterations")))?;
        let cfg_at = |s: usize| SchemeConfig {
            iterations: it,
            damping: damping.clone(),
            ..base.clone()
        }
        .with_interleaver_size(s);
        let reference = required_snr(&Scheme::new(cfg_at(n))?, bracket, opts)?;
        for &s in sizes {
            let t = if s == n {
                reference.clone()
            } else {
                required_snr(&Scheme::new(cfg_at(s))?, bracket, opts)?
            };
            rows.push(InterleaverLoss {
                iterations: it,
                size: s,
                required_snr_db: t.snr_db,
                loss_db: t.snr_db - reference.snr_db,
                under_resolved: t.under_resolved || reference.under_resolved,
            });
        }
    }
    Ok(rows)
}
