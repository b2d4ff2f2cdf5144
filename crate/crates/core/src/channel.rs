//! Physical-layer model of a block-fading link with one pilot per frame.
//!
//! Each frame of `T` seconds carries `TB` symbols: one pilot followed by
//! `TB - 1` data symbols. A fraction `rho` of the frame energy `P̄T` goes to
//! the pilot, the rest is spread evenly over the data symbols. The receiver
//! forms the MMSE estimate of the fading coefficient from the pilot and treats
//! the estimation error as extra Gaussian noise, which gives the effective SNR
//! and the capacity lower bound used throughout the crate.
//!
//! `TB` need not be an integer; the `TB - 1` data symbols only enter the
//! formulas algebraically.

use std::f64::consts::LN_2;

use crate::{Error, Result};

/// Link constants. All fields are strictly positive and `frame_t * bandwidth_b > 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Mean channel power gain `E{|h|^2}`.
    pub gamma: f64,
    /// Noise spectral density.
    pub n0: f64,
    /// Frame duration in seconds.
    pub frame_t: f64,
    /// Bandwidth in Hz (also the symbol rate).
    pub bandwidth_b: f64,
    /// Average power.
    pub pbar: f64,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

impl SystemParams {
    pub fn new(gamma: f64, n0: f64, frame_t: f64, bandwidth_b: f64, pbar: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        positive("n0", n0)?;
        positive("frame_t", frame_t)?;
        positive("bandwidth_b", bandwidth_b)?;
        positive("pbar", pbar)?;
        let tb = frame_t * bandwidth_b;
        if !(tb > 2.0) {
            return Err(Error::invalid(
                "frame_t",
                format!("frame_t * bandwidth_b must exceed 2, got {tb}"),
            ));
        }
        let params = SystemParams {
            gamma,
            n0,
            frame_t,
            bandwidth_b,
            pbar,
        };
        positive("snr", params.snr())?;
        Ok(params)
    }

    /// Parameters with `n0 = 1` and `pbar` chosen so that `P̄/(N0 B) = snr`.
    pub fn with_snr(gamma: f64, frame_t: f64, bandwidth_b: f64, snr: f64) -> Result<Self> {
        positive("snr", snr)?;
        Self::new(gamma, 1.0, frame_t, bandwidth_b, snr * bandwidth_b)
    }

    /// The parameter set used to reproduce the published curves:
    /// `gamma = 1`, `T = 2 ms`, `B = 100 kHz`, `P̄/N0 = 1e4`.
    pub fn figure_defaults() -> Self {
        SystemParams {
            gamma: 1.0,
            n0: 1.0,
            frame_t: 2e-3,
            bandwidth_b: 1e5,
            pbar: 1e4,
        }
    }

    /// `P̄ / (N0 B)`.
    pub fn snr(&self) -> f64 {
        self.pbar / (self.n0 * self.bandwidth_b)
    }

    /// Symbols per frame, `T B`.
    pub fn tb(&self) -> f64 {
        self.frame_t * self.bandwidth_b
    }

    /// Same link with a different bandwidth, keeping `P̄` and `N0`.
    pub fn with_bandwidth(&self, bandwidth_b: f64) -> Result<Self> {
        Self::new(self.gamma, self.n0, self.frame_t, bandwidth_b, self.pbar)
    }

    /// Same link with `P̄` rescaled so that the SNR becomes `snr`, keeping `B` and `N0`.
    pub fn with_snr_at_fixed_bandwidth(&self, snr: f64) -> Result<Self> {
        positive("snr", snr)?;
        Self::new(
            self.gamma,
            self.n0,
            self.frame_t,
            self.bandwidth_b,
            snr * self.n0 * self.bandwidth_b,
        )
    }
}

/// Estimation statistics for one training fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationStats {
    pub rho: f64,
    /// Pilot energy.
    pub e_t: f64,
    /// Energy of each data symbol.
    pub e_s: f64,
    /// Variance of the MMSE estimate.
    pub var_est: f64,
    /// Variance of the estimation error.
    pub var_err: f64,
    pub snr_eff: f64,
}

fn check_fraction(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::invalid("rho", format!("must lie in [0, 1], got {rho}")))
    }
}

/// Pilot energy `ρP̄T` and per-data-symbol energy `(1-ρ)P̄T/(TB-1)`.
pub fn training_energies(params: &SystemParams, rho: f64) -> Result<(f64, f64)> {
    check_fraction(rho)?;
    let frame_energy = params.pbar * params.frame_t;
    Ok((rho * frame_energy, (1.0 - rho) * frame_energy / (params.tb() - 1.0)))
}

/// MMSE statistics and effective SNR. The boundaries `rho = 0` and `rho = 1`
/// are accepted and give `snr_eff = 0`.
pub fn estimation_stats(params: &SystemParams, rho: f64) -> Result<EstimationStats> {
    let (e_t, e_s) = training_energies(params, rho)?;
    let SystemParams { gamma, n0, .. } = *params;
    let denom = gamma * e_t + n0;
    let var_est = gamma * gamma * e_t / denom;
    let var_err = gamma * n0 / denom;
    let snr_eff = e_s * var_est / (var_err * e_s + n0);
    Ok(EstimationStats {
        rho,
        e_t,
        e_s,
        var_est,
        var_err,
        snr_eff,
    })
}

/// Effective SNR written directly in terms of `rho`, `TB` and the SNR:
///
/// `ρ(1-ρ)γ²T²B²SNR² / (ργTB(TB-2)SNR + γTB·SNR + TB - 1)`.
///
/// Algebraically equal to [`estimation_stats`]'s `snr_eff`; evaluating both is
/// a consistency check on the implementation.
pub fn snr_eff_rational(params: &SystemParams, rho: f64) -> Result<f64> {
    check_fraction(rho)?;
    let tb = params.tb();
    let snr = params.snr();
    let g = params.gamma;
    let num = rho * (1.0 - rho) * (g * tb * snr).powi(2);
    let den = rho * g * tb * (tb - 2.0) * snr + g * tb * snr + tb - 1.0;
    Ok(num / den)
}

/// `η = (γTB·SNR + TB - 1) / (γTB(TB-2)·SNR)`.
pub fn eta(params: &SystemParams) -> f64 {
    let tb = params.tb();
    let gs = params.gamma * tb * params.snr();
    (gs + tb - 1.0) / (gs * (tb - 2.0))
}

/// Training fraction maximising the effective SNR, `sqrt(η(η+1)) - η`.
///
/// Neither the QoS exponent nor the rate enter: the capacity objective
/// depends on `rho` only through `snr_eff`, in which it is increasing.
pub fn optimal_rho(params: &SystemParams) -> f64 {
    // sqrt(η²+η) - η rewritten without the cancellation at large η
    let eta = eta(params);
    1.0 / ((1.0 + 1.0 / eta).sqrt() + 1.0)
}

/// ON/OFF threshold on `|w|^2`: `α = (2^(rT/(TB-1)) - 1) / snr_eff`.
pub fn alpha_threshold(r: f64, snr_eff: f64, params: &SystemParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid("r", format!("must be >= 0, got {r}")));
    }
    if !(snr_eff > 0.0) {
        return Err(Error::invalid("snr_eff", format!("must be > 0, got {snr_eff}")));
    }
    Ok(alpha_unchecked(r, snr_eff, params))
}

#[inline]
pub(crate) fn alpha_unchecked(r: f64, snr_eff: f64, params: &SystemParams) -> f64 {
    (r * params.frame_t / (params.tb() - 1.0) * LN_2).exp_m1() / snr_eff
}

/// Rate whose threshold equals `alpha`; inverse of [`alpha_threshold`] in `r`.
pub fn rate_for_alpha(alpha: f64, snr_eff: f64, params: &SystemParams) -> f64 {
    (params.tb() - 1.0) / params.frame_t * (alpha * snr_eff).ln_1p() / LN_2
}

/// Probability that the link is ON, `P{|w|^2 > α} = e^(-α)`. The OFF
/// probability is its complement.
pub fn on_probability(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha", format!("must be >= 0, got {alpha}")));
    }
    Ok((-alpha).exp())
}

/// Instantaneous capacity lower bound `((TB-1)/T) log2(1 + snr_eff |w|^2)` in bits/s.
pub fn capacity_lower_bound(w_sq: f64, snr_eff: f64, params: &SystemParams) -> f64 {
    (params.tb() - 1.0) / params.frame_t * (snr_eff * w_sq).ln_1p() / LN_2
}
