//! Effective capacity of the ON/OFF fixed-rate link.
//!
//! With i.i.d. block fading the ON probability `p22 = e^(-α)` does not depend
//! on the previous state, so the log-moment generating function of the
//! service collapses and the spectral efficiency at rate `r` is
//!
//! `-(1/(θTB)) ln(1 - e^(-α(r)) (1 - e^(-θTr)))` bits/s/Hz,
//!
//! which tends to `(r/B) e^(-α(r))` as `θ → 0`. The training fraction is fixed
//! at [`optimal_rho`](crate::channel::optimal_rho); the rate is found
//! numerically.

use std::fmt;

use crate::channel::{self, alpha_unchecked, rate_for_alpha, SystemParams};
use crate::optimize::log_scan_max;
use crate::{Error, Result};

/// Below this value of `θTr` the objective is evaluated by its first-order
/// expansion, the zero-theta objective.
const SMALL_THETA_TR: f64 = 1e-8;

const SCAN_POINTS: usize = 256;
const RATE_REL_TOL: f64 = 1e-10;

/// QoS exponent `θ` in 1/bits. `θ = 0` is the relaxed-QoS limit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QosExponent(f64);

impl QosExponent {
    pub const ZERO: QosExponent = QosExponent(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && theta >= 0.0 {
            Ok(QosExponent(theta))
        } else {
            Err(Error::invalid("theta", format!("must be finite and >= 0, got {theta}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

impl fmt::Display for QosExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Optimised operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffCapSolution {
    /// Spectral efficiency `R_E` in bits/s/Hz.
    pub re: f64,
    /// Maximising fixed rate in bits/s.
    pub r_opt: f64,
    pub rho_opt: f64,
    /// Threshold at `(r_opt, rho_opt)`.
    pub alpha_opt: f64,
    /// Effective SNR at `rho_opt`.
    pub snr_eff: f64,
    pub theta: QosExponent,
}

fn effective_snr(params: &SystemParams, rho: f64) -> Result<f64> {
    channel::estimation_stats(params, rho).map(|s| s.snr_eff)
}

/// Spectral efficiency at rate `r`, expressed through the effective SNR.
pub(crate) fn objective_at(r: f64, snr_eff: f64, theta: f64, params: &SystemParams) -> f64 {
    if r <= 0.0 || snr_eff <= 0.0 {
        return 0.0;
    }
    let theta_tr = theta * params.frame_t * r;
    if theta_tr < SMALL_THETA_TR {
        return zero_theta_at(r, snr_eff, params);
    }
    let p_on = (-alpha_unchecked(r, snr_eff, params)).exp();
    let served = -(-theta_tr).exp_m1();
    -(-p_on * served).ln_1p() / (theta * params.tb())
}

fn zero_theta_at(r: f64, snr_eff: f64, params: &SystemParams) -> f64 {
    if r <= 0.0 || snr_eff <= 0.0 {
        return 0.0;
    }
    r / params.bandwidth_b * (-alpha_unchecked(r, snr_eff, params)).exp()
}

fn check_rate(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("r", format!("must be >= 0, got {r}")))
    }
}

/// Spectral efficiency (bits/s/Hz) of transmitting at rate `r` with training
/// fraction `rho`, for `θ > 0`.
pub fn objective(r: f64, rho: f64, theta: QosExponent, params: &SystemParams) -> Result<f64> {
    if theta.is_zero() {
        return Err(Error::ZeroTheta);
    }
    check_rate(r)?;
    let snr_eff = effective_snr(params, rho)?;
    Ok(objective_at(r, snr_eff, theta.value(), params))
}

/// Relaxed-QoS spectral efficiency `(r/B) e^(-α(r, ρ))`.
pub fn zero_theta_objective(r: f64, rho: f64, params: &SystemParams) -> Result<f64> {
    check_rate(r)?;
    let snr_eff = effective_snr(params, rho)?;
    Ok(zero_theta_at(r, snr_eff, params))
}

/// Maximise the spectral efficiency over the rate with `rho = optimal_rho(params)`.
pub fn solve(theta: QosExponent, params: &SystemParams) -> EffCapSolution {
    let rho = channel::optimal_rho(params);
    let snr_eff = effective_snr(params, rho).expect("optimal rho lies in (0, 1)");
    solve_at(theta, params, rho, snr_eff)
}

/// Rate maximisation for a given training fraction and its effective SNR.
pub fn solve_at(theta: QosExponent, params: &SystemParams, rho: f64, snr_eff: f64) -> EffCapSolution {
    let b = params.bandwidth_b;
    if !(snr_eff > 0.0) {
        return EffCapSolution {
            re: 0.0,
            r_opt: 0.0,
            rho_opt: rho,
            alpha_opt: 0.0,
            snr_eff,
            theta,
        };
    }
    // The threshold map anchors the range at low SNR, where the peak sits far
    // below B·1e-6.
    let lo = (b * 1e-6).min(rate_for_alpha(1e-6, snr_eff, params));
    let hi = (b * 64.0).max(rate_for_alpha(64.0, snr_eff, params));
    let th = theta.value();
    let best = log_scan_max(
        |r| objective_at(r, snr_eff, th, params),
        lo,
        hi,
        SCAN_POINTS,
        RATE_REL_TOL,
    );
    if !(best.value > 0.0) {
        return EffCapSolution {
            re: 0.0,
            r_opt: 0.0,
            rho_opt: rho,
            alpha_opt: 0.0,
            snr_eff,
            theta,
        };
    }
    EffCapSolution {
        re: best.value,
        r_opt: best.x,
        rho_opt: rho,
        alpha_opt: alpha_unchecked(best.x, snr_eff, params),
        snr_eff,
        theta,
    }
}

/// Energy per delivered bit relative to `N0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BitEnergy {
    Finite(f64),
    /// Zero spectral efficiency: no bit is ever delivered.
    Unbounded,
}

impl BitEnergy {
    pub fn linear(self) -> f64 {
        match self {
            BitEnergy::Finite(v) => v,
            BitEnergy::Unbounded => f64::INFINITY,
        }
    }

    pub fn db(self) -> f64 {
        to_db(self.linear())
    }

    pub fn is_finite(self) -> bool {
        matches!(self, BitEnergy::Finite(_))
    }
}

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `Eb/N0 = SNR / R_E`.
pub fn bit_energy(params: &SystemParams, re: f64) -> BitEnergy {
    if re > 0.0 {
        BitEnergy::Finite(params.snr() / re)
    } else {
        BitEnergy::Unbounded
    }
}
