//! Low-SNR behaviour of the spectral efficiency–bit energy tradeoff.
//!
//! Two regimes are covered. In the wideband regime the average power is held
//! fixed while `B → ∞`; the bit energy then decreases to a finite minimum with
//! a closed form, together with the wideband slope. In the low-power regime
//! `B` is fixed while `P̄ → 0`; the bit energy then grows without bound, which
//! [`low_power_scan`] exposes numerically.

use std::f64::consts::{E, LN_2};

use rayon::prelude::*;

use crate::capacity::{self, BitEnergy, EffCapSolution, QosExponent};
use crate::channel::{self, SystemParams};
use crate::{Error, Result};

/// Constants of the wideband limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidebandConstants {
    pub phi: f64,
    /// `θTP̄ / (N0 ln 2)`.
    pub delta: f64,
    /// Limit of the optimal threshold as `B → ∞`.
    pub alpha_star: f64,
    /// `1 - e^(-α*) (1 - e^(-θTφα*/ln 2))`; exactly 1 at `θ = 0`.
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidebandResult {
    pub ebn0_min_linear: f64,
    pub ebn0_min_db: f64,
    /// Wideband slope in bits/s/Hz per 3 dB.
    pub s0: f64,
    pub constants: WidebandConstants,
}

/// `φ = (γP̄/N0) (sqrt(1 + N0/(γP̄T)) - sqrt(N0/(γP̄T)))²`.
pub fn phi(params: &SystemParams) -> f64 {
    let gp = params.gamma * params.pbar / params.n0;
    let k = 1.0 / (gp * params.frame_t);
    gp * ((1.0 + k).sqrt() - k.sqrt()).powi(2)
}

/// `δ = θTP̄ / (N0 ln 2)`.
pub fn delta(theta: QosExponent, params: &SystemParams) -> f64 {
    theta.value() * params.frame_t * params.pbar / (params.n0 * LN_2)
}

/// Fixed point `α* = (ln 2/(θTφ)) ln(1 + θTφ/ln 2)`, with `α* = 1` at `θ = 0`.
pub fn alpha_star(theta: QosExponent, params: &SystemParams) -> f64 {
    alpha_star_from_phi(theta.value(), params.frame_t, phi(params))
}

fn alpha_star_from_phi(theta: f64, frame_t: f64, phi: f64) -> f64 {
    let x = theta * frame_t * phi / LN_2;
    if x == 0.0 {
        1.0
    } else {
        x.ln_1p() / x
    }
}

/// Minimum bit energy and wideband slope as `B → ∞` at fixed `P̄`.
///
/// `θ = 0` takes the analytic limits `Eb/N0_min = e ln2 · P̄/(N0 φ)` and
/// `S0 = φ / (e D)` with `D = (sqrt(1 + γP̄T/N0) - 1)/T + φ/2`; the general
/// formulas are 0/0 there.
pub fn wideband_result(theta: QosExponent, params: &SystemParams) -> WidebandResult {
    let t = params.frame_t;
    let phi = phi(params);
    let th = theta.value();
    let a = alpha_star_from_phi(th, t, phi);
    let d = ((1.0 + params.gamma * params.pbar * t / params.n0).sqrt() - 1.0) / t + phi * a / 2.0;

    let (xi, ebn0, s0) = if theta.is_zero() {
        let ebn0 = params.pbar / (params.n0 * phi) * E * LN_2;
        (1.0, ebn0, phi / (E * d))
    } else {
        let u = th * t * phi * a / LN_2;
        let one_minus_xi = (-a).exp() * -(-u).exp_m1();
        let ln_xi = (-one_minus_xi).ln_1p();
        let ebn0 = -delta(theta, params) * LN_2 / ln_xi;
        let s0 = (1.0 - one_minus_xi) * ln_xi * ln_xi * LN_2 / (th * t * a * one_minus_xi * d);
        (1.0 - one_minus_xi, ebn0, s0)
    };

    WidebandResult {
        ebn0_min_linear: ebn0,
        ebn0_min_db: capacity::to_db(ebn0),
        s0,
        constants: WidebandConstants {
            phi,
            delta: delta(theta, params),
            alpha_star: a,
            xi,
        },
    }
}

/// `φ(SNR) = ρ_opt(1 - ρ_opt) γ² T² B²`.
pub fn phi_snr(params: &SystemParams) -> f64 {
    let rho = channel::optimal_rho(params);
    rho * (1.0 - rho) * (params.gamma * params.tb()).powi(2)
}

/// `ψ(SNR) = (1 + (TB - 2) ρ_opt) γ T B`.
pub fn psi_snr(params: &SystemParams) -> f64 {
    let rho = channel::optimal_rho(params);
    (1.0 + (params.tb() - 2.0) * rho) * params.gamma * params.tb()
}

/// Effective SNR at the optimal training fraction,
/// `φ(SNR) SNR² / (ψ(SNR) SNR + TB - 1)`.
pub fn snr_eff_opt(params: &SystemParams) -> f64 {
    let snr = params.snr();
    phi_snr(params) * snr * snr / (psi_snr(params) * snr + params.tb() - 1.0)
}

/// One point of a low-power scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPowerPoint {
    pub snr: f64,
    pub solution: EffCapSolution,
    pub bit_energy: BitEnergy,
}

/// Bit energy along a strictly descending SNR grid, varying `P̄` at the
/// template's bandwidth.
pub fn low_power_scan(
    theta: QosExponent,
    params_template: &SystemParams,
    snr_grid: &[f64],
) -> Result<Vec<LowPowerPoint>> {
    if snr_grid.is_empty() {
        return Err(Error::EmptyGrid("low-power SNR grid"));
    }
    if snr_grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("snr_grid", "values must be finite and > 0"));
    }
    if snr_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("snr_grid", "must be strictly descending"));
    }
    snr_grid
        .par_iter()
        .map(|&snr| {
            let params = params_template.with_snr_at_fixed_bandwidth(snr)?;
            let rho = channel::optimal_rho(&params);
            let solution = capacity::solve_at(theta, &params, rho, snr_eff_opt(&params));
            Ok(LowPowerPoint {
                snr,
                solution,
                bit_energy: capacity::bit_energy(&params, solution.re),
            })
        })
        .collect()
}
