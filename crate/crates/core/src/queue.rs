//! Frame-level Monte-Carlo simulation of the ON/OFF service queue.
//!
//! Each frame draws an independent fading power `|w|^2 ~ Exp(1)`. The frame
//! serves `rT` bits when `|w|^2 > α` and nothing otherwise, while a constant
//! `arrival_per_frame` bits enter the buffer. The backlog follows the Lindley
//! recursion `Q ← max(Q + a - s, 0)` from an empty buffer. After a warmup the
//! simulator counts, for each threshold `q`, the frames that end with `Q ≥ q`;
//! the slope of `ln P(Q ≥ q)` over `q` estimates the decay rate `θ`.
//!
//! Random numbers come from ChaCha8 seeded with `seed` on stream `stream`, so
//! replications with the same seed and different streams are independent and
//! every run is bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::capacity::{self, EffCapSolution, QosExponent};
use crate::channel::{self, SystemParams};
use crate::{Error, Result};

/// Thresholds with fewer exceedances than this are left out of the tail fit.
pub const MIN_EXCEEDANCES: u64 = 100;
/// Minimum number of thresholds the tail fit needs.
pub const MIN_FIT_POINTS: usize = 3;

const DEFAULT_LEVELS: usize = 48;
/// Expected exceedance count at the highest default threshold. Exceedances of
/// a heavily loaded queue come in long correlated runs, so the far tail holds
/// far fewer independent excursions than its frame count suggests.
const DEFAULT_TAIL_COUNT: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub frames: u64,
    /// Constant arrivals in bits per frame.
    pub arrival_per_frame: f64,
    /// Fixed transmission rate in bits/s.
    pub r: f64,
    pub rho: f64,
    pub seed: u64,
    /// Independent stream index for replications sharing a seed.
    pub stream: u64,
    /// Frames discarded before statistics are collected.
    pub warmup: u64,
    /// Queue thresholds in bits, strictly increasing and positive.
    pub q_levels: Vec<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames <= self.warmup {
            return Err(Error::invalid(
                "frames",
                format!("must exceed warmup ({} <= {})", self.frames, self.warmup),
            ));
        }
        if !(self.arrival_per_frame >= 0.0 && self.arrival_per_frame.is_finite()) {
            return Err(Error::invalid("arrival_per_frame", "must be finite and >= 0"));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::invalid("r", "must be finite and >= 0"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid("rho", format!("must lie in (0, 1), got {}", self.rho)));
        }
        if self.q_levels.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
            return Err(Error::invalid("q_levels", "must be finite and > 0"));
        }
        if self.q_levels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("q_levels", "must be strictly increasing"));
        }
        Ok(())
    }
}

/// Statistics of one simulated trace.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSummary {
    pub seed: u64,
    pub stream: u64,
    pub frames: u64,
    pub warmup: u64,
    pub arrival_per_frame: f64,
    pub r: f64,
    pub rho: f64,
    pub alpha: f64,
    /// Bits served in an ON frame, `rT`.
    pub service_bits: f64,
    pub q_levels: Vec<f64>,
    /// Frames after warmup ending with `Q ≥ q_levels[i]`.
    pub counts: Vec<u64>,
    /// Frames after warmup.
    pub observed: u64,
    /// Frames after warmup ending with a non-empty buffer.
    pub nonzero: u64,
    pub on_frames: u64,
    pub on_fraction: f64,
    /// Mean served bits per frame after warmup.
    pub mean_service: f64,
    pub final_queue: f64,
    /// `transitions[prev][next]` with 0 = OFF and 1 = ON, after warmup.
    pub transitions: [[u64; 2]; 2],
    /// Whether the arrival rate is below the mean service rate `rT e^(-α)`.
    pub stable: bool,
}

impl QueueSummary {
    /// Empirical `P(Q ≥ q)` for each threshold.
    pub fn exceedance(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.observed as f64).collect()
    }

    /// `P(ON at n+1 | ON at n)` and `P(ON at n+1 | OFF at n)`.
    pub fn conditional_on(&self) -> (f64, f64) {
        let [off, on] = self.transitions;
        let ratio = |row: [u64; 2]| row[1] as f64 / (row[0] + row[1]).max(1) as f64;
        (ratio(on), ratio(off))
    }
}

/// Run the queue recursion for `config.frames` frames.
pub fn simulate(config: &SimConfig, params: &SystemParams) -> Result<QueueSummary> {
    config.validate()?;
    let snr_eff = channel::estimation_stats(params, config.rho)?.snr_eff;
    let alpha = channel::alpha_threshold(config.r, snr_eff, params)?;
    let service_bits = config.r * params.frame_t;
    let arrival = config.arrival_per_frame;
    let levels = &config.q_levels;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.stream);

    // hist[k] = frames whose final backlog lies at or above exactly k thresholds
    let mut hist = vec![0u64; levels.len() + 1];
    let mut queue = 0.0f64;
    let mut nonzero = 0u64;
    let mut on_frames = 0u64;
    let mut transitions = [[0u64; 2]; 2];
    let mut prev_on: Option<bool> = None;

    for n in 0..config.frames {
        let u: f64 = rng.random();
        let w_sq = -(-u).ln_1p();
        let on = w_sq > alpha;
        let served = if on { service_bits } else { 0.0 };
        queue = (queue + arrival - served).max(0.0);

        if n < config.warmup {
            prev_on = Some(on);
            continue;
        }
        if on {
            on_frames += 1;
        }
        if let Some(prev) = prev_on {
            transitions[prev as usize][on as usize] += 1;
        }
        prev_on = Some(on);
        if queue > 0.0 {
            nonzero += 1;
        }
        hist[levels.partition_point(|&q| q <= queue)] += 1;
    }

    let observed = config.frames - config.warmup;
    let mut counts = vec![0u64; levels.len()];
    let mut acc = 0u64;
    for i in (0..levels.len()).rev() {
        acc += hist[i + 1];
        counts[i] = acc;
    }
    let on_fraction = on_frames as f64 / observed as f64;

    Ok(QueueSummary {
        seed: config.seed,
        stream: config.stream,
        frames: config.frames,
        warmup: config.warmup,
        arrival_per_frame: arrival,
        r: config.r,
        rho: config.rho,
        alpha,
        service_bits,
        q_levels: levels.clone(),
        counts,
        observed,
        nonzero,
        on_frames,
        on_fraction,
        mean_service: on_fraction * service_bits,
        final_queue: queue,
        transitions,
        stable: arrival < service_bits * (-alpha).exp(),
    })
}

/// Result of fitting `ln P(Q ≥ q) ≈ intercept - θ q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub theta_hat: f64,
    /// Reported only; the fit makes no claim about the prefactor.
    pub intercept: f64,
    pub r_squared: f64,
    /// Exceedance counts at every threshold, used or not.
    pub counts: Vec<u64>,
    /// Thresholds that entered the fit.
    pub used_levels: Vec<f64>,
    pub stable: bool,
}

/// Fit the decay rate from a stable simulation summary.
///
/// Only thresholds at or beyond the median non-empty backlog (count at most
/// half of the non-empty frames) with at least [`MIN_EXCEEDANCES`] exceedances
/// are used.
pub fn estimate_decay(summary: &QueueSummary) -> Result<TailEstimate> {
    if !summary.stable {
        return Err(Error::Unstable {
            arrival: summary.arrival_per_frame,
            mean_service: summary.service_bits * (-summary.alpha).exp(),
        });
    }
    estimate_decay_from_counts(&summary.q_levels, &summary.counts, summary.observed, summary.nonzero)
}

/// Tail fit on raw exceedance counts out of `observed` frames, `nonzero` of
/// which had a non-empty buffer.
pub fn estimate_decay_from_counts(
    q_levels: &[f64],
    counts: &[u64],
    observed: u64,
    nonzero: u64,
) -> Result<TailEstimate> {
    if q_levels.len() != counts.len() {
        return Err(Error::invalid("counts", "length differs from q_levels"));
    }
    let usable: Vec<(f64, f64)> = q_levels
        .iter()
        .zip(counts)
        .filter(|&(_, &c)| c >= MIN_EXCEEDANCES && 2 * c <= nonzero)
        .map(|(&q, &c)| (q, (c as f64 / observed as f64).ln()))
        .collect();
    if usable.len() < MIN_FIT_POINTS {
        let max_count = counts.iter().copied().max().unwrap_or(0);
        return Err(Error::InsufficientTail {
            needed: MIN_FIT_POINTS,
            found: usable.len(),
            diagnostic: format!(
                "{} thresholds, largest exceedance count {max_count}, {nonzero} of {observed} frames non-empty",
                q_levels.len()
            ),
        });
    }

    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(TailEstimate {
        theta_hat: -slope,
        intercept,
        r_squared,
        counts: counts.to_vec(),
        used_levels: usable.iter().map(|p| p.0).collect(),
        stable: true,
    })
}

/// Knobs for [`validate_theta`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub frames: u64,
    pub seed: u64,
    pub stream: u64,
    /// Fraction of frames used as warmup.
    pub warmup_fraction: f64,
    /// Thresholds; `None` picks [`default_q_levels`].
    pub q_levels: Option<Vec<f64>>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            frames: 10_000_000,
            seed: 1,
            stream: 0,
            warmup_fraction: 0.01,
            q_levels: None,
        }
    }
}

/// Evenly spaced thresholds up to the backlog where about 10⁴ of `observed`
/// frames are expected to exceed it at decay rate `theta`.
pub fn default_q_levels(theta: f64, observed: u64) -> Vec<f64> {
    let q_max = (observed as f64 / DEFAULT_TAIL_COUNT).ln().max(1.0) / theta;
    (1..=DEFAULT_LEVELS)
        .map(|i| q_max * i as f64 / DEFAULT_LEVELS as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaValidation {
    pub theta: f64,
    pub theta_hat: f64,
    /// `theta_hat / theta`.
    pub ratio: f64,
    pub safety: f64,
    pub solution: EffCapSolution,
    pub summary: QueueSummary,
    pub estimate: TailEstimate,
}

/// Simulation parameters that load the queue with `safety` times the
/// effective capacity at `theta`, operating at `(r_opt, rho_opt)`.
pub fn validation_config(
    theta: QosExponent,
    params: &SystemParams,
    safety: f64,
    opts: &ValidationOptions,
) -> Result<(SimConfig, EffCapSolution)> {
    if theta.is_zero() {
        return Err(Error::invalid("theta", "queue validation needs theta > 0"));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::invalid("safety", format!("must lie in (0, 1], got {safety}")));
    }
    if !(0.0..1.0).contains(&opts.warmup_fraction) {
        return Err(Error::invalid("warmup_fraction", "must lie in [0, 1)"));
    }
    let solution = capacity::solve(theta, params);
    let warmup = (opts.frames as f64 * opts.warmup_fraction).floor() as u64;
    let q_levels = opts
        .q_levels
        .clone()
        .unwrap_or_else(|| default_q_levels(theta.value(), opts.frames.saturating_sub(warmup)));
    let config = SimConfig {
        frames: opts.frames,
        arrival_per_frame: safety * solution.re * params.tb(),
        r: solution.r_opt,
        rho: solution.rho_opt,
        seed: opts.seed,
        stream: opts.stream,
        warmup,
        q_levels,
    };
    Ok((config, solution))
}

/// Simulate the queue fed at `safety` times the effective capacity and
/// compare the fitted tail decay with `theta`.
pub fn validate_theta(
    theta: QosExponent,
    params: &SystemParams,
    safety: f64,
    opts: &ValidationOptions,
) -> Result<ThetaValidation> {
    let (config, solution) = validation_config(theta, params, safety, opts)?;
    let summary = simulate(&config, params)?;
    let estimate = estimate_decay(&summary)?;
    Ok(ThetaValidation {
        theta: theta.value(),
        theta_hat: estimate.theta_hat,
        ratio: estimate.theta_hat / theta.value(),
        safety,
        solution,
        summary,
        estimate,
    })
}

/// [`validate_theta`] over `replications` independent streams of `opts.seed`,
/// run in parallel and returned in stream order.
pub fn validate_replications(
    theta: QosExponent,
    params: &SystemParams,
    safety: f64,
    opts: &ValidationOptions,
    replications: u64,
) -> Vec<Result<ThetaValidation>> {
    (0..replications)
        .into_par_iter()
        .map(|stream| {
            let opts = ValidationOptions {
                stream,
                ..opts.clone()
            };
            validate_theta(theta, params, safety, &opts)
        })
        .collect()
}
