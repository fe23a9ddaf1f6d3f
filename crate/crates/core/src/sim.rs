//! Slot-by-slot Monte Carlo simulation of the N-receiver broadcast.
//!
//! Each slot every receiver is independently ON with probability `p`. The
//! scheduler sees the ON receivers that still miss packets, picks a batch,
//! and every ON receiver expecting that batch takes the packet. Receivers
//! expecting a different batch discard it.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::par::{map_indices, Execution};
use crate::policies::{is_conflict_slot, Eligible, PolicyKind, Scheduler, SchedulerInput};
use crate::rlnc::{encode, DecoderState};
use crate::rng::{RngSpec, Stream};

/// A trial running longer than this is reported as an error.
pub const SLOT_CEILING: u64 = 1_000_000_000;

/// Payload bytes per packet in codec mode unless configured otherwise.
pub const DEFAULT_CODEC_PAYLOAD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every received packet of the expected batch is innovative.
    Idealized,
    /// Real GF(256) coding; progress happens only when the decoder rank grows.
    Codec { payload_len: usize },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Idealized => f.write_str("ideal"),
            Mode::Codec { .. } => f.write_str("codec"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ideal" | "idealized" => Ok(Mode::Idealized),
            "codec" => Ok(Mode::Codec {
                payload_len: DEFAULT_CODEC_PAYLOAD,
            }),
            _ => Err(Error::Unknown {
                kind: "mode",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialResult {
    /// Slots until every receiver holds the whole file.
    pub completion_slots: u64,
    pub conflict_slots: u64,
}

/// What happened in one slot, handed to [`run_trial_observed`] callbacks.
#[derive(Debug)]
pub struct SlotEvent<'a> {
    /// Zero-based slot index.
    pub slot: u64,
    pub on: &'a [bool],
    pub conflict: bool,
    pub transmitted: Option<usize>,
    /// Per-receiver progress after this slot's delivery.
    pub received: &'a [usize],
}

struct CodecSide {
    window: usize,
    payload_len: usize,
    file: Vec<Vec<u8>>,
    decoders: Vec<DecoderState>,
    rng: ChaCha8Rng,
}

impl CodecSide {
    fn new(config: &SystemConfig, payload_len: usize, mut rng: ChaCha8Rng) -> Self {
        let file = (0..config.file_size())
            .map(|_| {
                let mut v = vec![0u8; payload_len];
                rng.fill(v.as_mut_slice());
                v
            })
            .collect();
        let decoders = (0..config.receivers())
            .map(|_| DecoderState::new(0, config.window(), payload_len))
            .collect();
        Self {
            window: config.window(),
            payload_len,
            file,
            decoders,
            rng,
        }
    }
}

pub fn run_trial(config: &SystemConfig, kind: PolicyKind, spec: &RngSpec, trial: u64, mode: Mode) -> Result<TrialResult> {
    run_trial_observed(config, kind, spec, trial, mode, |_| {})
}

/// [`run_trial`] that reports every slot to `observer`.
pub fn run_trial_observed<F>(
    config: &SystemConfig,
    kind: PolicyKind,
    spec: &RngSpec,
    trial: u64,
    mode: Mode,
    mut observer: F,
) -> Result<TrialResult>
where
    F: FnMut(&SlotEvent<'_>),
{
    let n = config.receivers();
    let f = config.file_size();
    let k = config.window();
    let p = config.p();

    let mut channel = spec.stream(trial, Stream::Channel);
    let mut scheduler = Scheduler::new(kind, spec.stream(trial, Stream::Scheduler));
    let mut codec = match mode {
        Mode::Idealized => None,
        Mode::Codec { payload_len } => Some(CodecSide::new(config, payload_len, spec.stream(trial, Stream::Coding))),
    };

    let mut received = vec![0usize; n];
    let mut on = vec![false; n];
    let mut eligible: Vec<Eligible> = Vec::with_capacity(n);
    let mut remaining = n;
    let mut slot = 0u64;
    let mut conflicts = 0u64;

    while remaining > 0 {
        if slot >= SLOT_CEILING {
            return Err(Error::SlotCeiling(SLOT_CEILING));
        }
        for flag in on.iter_mut() {
            *flag = channel.random_bool(p);
        }
        eligible.clear();
        eligible.extend(
            (0..n)
                .filter(|&r| on[r] && received[r] < f)
                .map(|r| Eligible {
                    receiver: r,
                    batch: received[r] / k,
                }),
        );
        let input = SchedulerInput {
            eligible: &eligible,
            slot,
        };
        let conflict = is_conflict_slot(&input);
        conflicts += u64::from(conflict);
        let transmitted = scheduler.select(&input);

        if let Some(batch) = transmitted {
            let targets = eligible.iter().filter(|e| e.batch == batch).map(|e| e.receiver);
            match codec.as_mut() {
                None => {
                    for r in targets {
                        received[r] += 1;
                        if received[r] == f {
                            remaining -= 1;
                        }
                    }
                }
                Some(side) => {
                    let CodecSide {
                        window,
                        payload_len,
                        file,
                        decoders,
                        rng,
                    } = side;
                    let sources = &file[batch * *window..(batch + 1) * *window];
                    let pkt = encode(batch, sources, rng)?;
                    for r in targets {
                        let decoder = &mut decoders[r];
                        if !decoder.ingest(&pkt)? {
                            continue;
                        }
                        received[r] += 1;
                        if decoder.is_decodable() {
                            if decoder.recover()? != sources {
                                return Err(Error::DecodeMismatch(batch));
                            }
                            if received[r] == f {
                                remaining -= 1;
                            } else {
                                *decoder = DecoderState::new(batch + 1, *window, *payload_len);
                            }
                        }
                    }
                }
            }
        }

        observer(&SlotEvent {
            slot,
            on: &on,
            conflict,
            transmitted,
            received: &received,
        });
        slot += 1;
    }

    Ok(TrialResult {
        completion_slots: slot,
        conflict_slots: conflicts,
    })
}

/// Mean, sample standard deviation and normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentStats {
    pub n_trials: u64,
    pub mean: f64,
    pub stddev: f64,
    pub ci95_half_width: f64,
}

impl ExperimentStats {
    /// Samples are summed in the given order.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len() as u64;
        if n < 2 {
            return Err(Error::TooFewTrials(n));
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
        let stddev = var.sqrt();
        Ok(Self {
            n_trials: n,
            mean,
            stddev,
            ci95_half_width: 1.96 * stddev / nf.sqrt(),
        })
    }

    pub fn ci_contains(&self, x: f64) -> bool {
        (self.mean - x).abs() <= self.ci95_half_width
    }

    pub fn ci_low(&self) -> f64 {
        self.mean - self.ci95_half_width
    }

    pub fn ci_high(&self) -> f64 {
        self.mean + self.ci95_half_width
    }
}

/// All trial results, in trial-index order.
pub fn run_trials(
    config: &SystemConfig,
    kind: PolicyKind,
    n_trials: u64,
    spec: &RngSpec,
    mode: Mode,
    execution: Execution,
) -> Result<Vec<TrialResult>> {
    map_indices(n_trials, execution, |i| run_trial(config, kind, spec, i, mode))
        .into_iter()
        .collect()
}

pub fn run_experiment(
    config: &SystemConfig,
    kind: PolicyKind,
    n_trials: u64,
    spec: &RngSpec,
    mode: Mode,
) -> Result<ExperimentStats> {
    run_experiment_with(config, kind, n_trials, spec, mode, Execution::default())
}

pub fn run_experiment_with(
    config: &SystemConfig,
    kind: PolicyKind,
    n_trials: u64,
    spec: &RngSpec,
    mode: Mode,
    execution: Execution,
) -> Result<ExperimentStats> {
    if n_trials < 2 {
        return Err(Error::TooFewTrials(n_trials));
    }
    let results = run_trials(config, kind, n_trials, spec, mode, execution)?;
    let samples: Vec<f64> = results.iter().map(|r| r.completion_slots as f64).collect();
    ExperimentStats::from_samples(&samples)
}

/// One cell of a coding-window sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyKind,
    pub window: usize,
    pub outcome: Result<StatsRecord>,
}

/// Stats together with the parameters that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsRecord {
    pub policy: PolicyKind,
    pub config: SystemConfig,
    pub stats: ExperimentStats,
}

/// Every `(window, policy)` pair, window-major. All cells share `spec`, so the
/// channel realisations are common across policies and windows.
pub fn sweep_coding_window(
    template: &SystemConfig,
    policies: &[PolicyKind],
    windows: &[usize],
    n_trials: u64,
    spec: &RngSpec,
    mode: Mode,
) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(policies.len() * windows.len());
    for &window in windows {
        let config = template.with_window(window);
        for &policy in policies {
            let outcome = config.clone().and_then(|config| {
                run_experiment(&config, policy, n_trials, spec, mode).map(|stats| StatsRecord {
                    policy,
                    config,
                    stats,
                })
            });
            rows.push(SweepRow {
                policy,
                window,
                outcome,
            });
        }
    }
    rows
}

pub const STATS_CSV_HEADER: [&str; 9] = [
    "policy",
    "N",
    "F",
    "K",
    "p",
    "n_trials",
    "mean_slots",
    "stddev",
    "ci95_half_width",
];

pub fn write_stats_csv<W: Write>(records: &[StatsRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(STATS_CSV_HEADER)?;
    for r in records {
        writer.write_record([
            r.policy.name().to_string(),
            r.config.receivers().to_string(),
            r.config.file_size().to_string(),
            r.config.window().to_string(),
            r.config.p().to_string(),
            r.stats.n_trials.to_string(),
            r.stats.mean.to_string(),
            r.stats.stddev.to_string(),
            r.stats.ci95_half_width.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
