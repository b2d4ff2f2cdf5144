//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use effcap_core::asymptotics::{self, wideband_result};
use effcap_core::capacity::{self, QosExponent};
use effcap_core::channel::{self, SystemParams};
use effcap_core::queue::{self, SimConfig, ValidationOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn q(t: f64) -> QosExponent {
    QosExponent::new(t).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const THETAS: [f64; 5] = [0.0, 0.001, 0.01, 0.1, 1.0];
const TABLE_EBN0_DB: [f64; 5] = [4.6776, 4.7029, 4.9177, 6.3828, 10.8333];
const TABLE_S0: [f64; 5] = [0.4720, 0.4749, 0.4978, 0.6151, 0.6061];
const EBN0_TOL_DB: f64 = 0.001;
const S0_TOL: f64 = 0.001;

fn wideband_table() -> Outcome {
    let p = SystemParams::figure_defaults();
    let mut worst_eb: f64 = 0.0;
    let mut worst_s0: f64 = 0.0;
    for ((&th, &eb), &s0) in THETAS.iter().zip(&TABLE_EBN0_DB).zip(&TABLE_S0) {
        let w = wideband_result(q(th), &p);
        let (de, ds) = ((w.ebn0_min_db - eb).abs(), (w.s0 - s0).abs());
        ensure(de <= EBN0_TOL_DB, || {
            format!("theta={th}: Eb/N0_min {:.5} dB vs {eb}", w.ebn0_min_db)
        })?;
        ensure(ds <= S0_TOL, || format!("theta={th}: S0 {:.5} vs {s0}", w.s0))?;
        worst_eb = worst_eb.max(de);
        worst_s0 = worst_s0.max(ds);
    }
    Ok(format!("max |ΔEb/N0| = {worst_eb:.2e} dB, max |ΔS0| = {worst_s0:.2e}"))
}

fn finite_bandwidth_convergence() -> Outcome {
    let base = SystemParams::figure_defaults();
    let theta = q(0.01);
    let target = wideband_result(theta, &base);
    let mut prev = f64::INFINITY;
    let mut gaps = Vec::new();
    let mut last_alpha = 0.0;
    for b in [1e5, 1e6, 1e7] {
        let p = base.with_bandwidth(b).unwrap();
        let sol = capacity::solve(theta, &p);
        let db = capacity::bit_energy(&p, sol.re).db();
        ensure(db < prev, || format!("B={b}: {db} dB not below previous {prev} dB"))?;
        ensure(db >= target.ebn0_min_db - 1e-9, || {
            format!("B={b}: {db} dB below the wideband limit")
        })?;
        prev = db;
        gaps.push(db - 4.9177);
        last_alpha = sol.alpha_opt;
    }
    let gap = *gaps.last().unwrap();
    ensure(gap.abs() < 0.05, || format!("gap at B=1e7 is {gap} dB"))?;
    let da = (last_alpha - target.constants.alpha_star).abs();
    ensure(da < 0.01, || format!("|alpha_opt - alpha*| = {da} at B=1e7"))?;
    Ok(format!(
        "gaps to 4.9177 dB: {:.4}, {:.4}, {:.4}; |α_opt-α*| = {da:.1e}",
        gaps[0], gaps[1], gaps[2]
    ))
}

fn low_power_divergence() -> Outcome {
    let p = SystemParams::figure_defaults();
    let grid: Vec<f64> = (0..=60).map(|i| 10f64.powf(-i as f64 / 10.0)).collect();
    let scan = asymptotics::low_power_scan(q(0.01), &p, &grid).map_err(|e| e.to_string())?;
    let db: Vec<f64> = scan.iter().map(|pt| pt.bit_energy.db()).collect();
    let (imin, &min) = db
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    ensure(imin > 0 && imin < db.len() - 1, || {
        format!("minimum at grid index {imin} is not interior")
    })?;
    for w in db[imin..].windows(2) {
        ensure(w[1] > w[0], || format!("bit energy not increasing below the minimum: {w:?}"))?;
    }
    let excess = db[db.len() - 1] - min;
    ensure(excess > 10.0, || format!("excess at SNR=1e-6 only {excess} dB"))?;
    Ok(format!(
        "minimum {min:.4} dB at SNR={:.3e}; excess at 1e-6 = {excess:.1} dB",
        grid[imin]
    ))
}

fn grid_argmax(params: &SystemParams, step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    let mut best = (0.0, f64::MIN);
    for i in 1..n {
        let rho = i as f64 * step;
        let v = channel::snr_eff_rational(params, rho).unwrap();
        if v > best.1 {
            best = (rho, v);
        }
    }
    best.0
}

fn lemma_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let snr = 10f64.powf(rng.random_range(-6.0..2.0));
        let tb = 10f64.powf(rng.random_range(1.0..6.0));
        let p = SystemParams::with_snr(1.0, 2e-3, tb / 2e-3, snr).unwrap();
        let closed = channel::optimal_rho(&p);
        let grid = grid_argmax(&p, step);
        let d = (closed - grid).abs();
        ensure(d <= step, || format!("snr={snr:.3e} TB={tb:.1}: {closed} vs grid {grid}"))?;
        worst = worst.max(d);
    }
    Ok(format!("max |ρ_opt - grid argmax| = {worst:.2e} (step 1e-6)"))
}

fn queue_tail() -> Outcome {
    let p = SystemParams::figure_defaults();
    let theta = q(0.01);
    let opts = ValidationOptions {
        frames: 10_000_000,
        seed: 20_100,
        ..ValidationOptions::default()
    };
    let full: Vec<_> = queue::validate_replications(theta, &p, 1.0, &opts, 10)
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut ratios: Vec<f64> = full.iter().map(|v| v.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = (ratios[4] + ratios[5]) / 2.0;
    ensure((0.85..=1.25).contains(&median), || format!("median ratio {median}"))?;
    let min_r2 = full.iter().map(|v| v.estimate.r_squared).fold(1.0, f64::min);
    ensure(min_r2 > 0.98, || format!("fit r² down to {min_r2}"))?;

    let loose = queue::validate_replications(theta, &p, 0.8, &opts, 10);
    let faster = loose
        .iter()
        .filter(|v| matches!(v, Ok(v) if v.theta_hat > theta.value()))
        .count();
    ensure(faster >= 9, || format!("theta_hat > theta in only {faster}/10 seeds at 80% load"))?;
    Ok(format!(
        "median θ̂/θ = {median:.4}, min r² = {min_r2:.4}; 80% load: {faster}/10 faster decay"
    ))
}

fn theta_monotonicity() -> Outcome {
    let thetas = [0.001, 0.01, 0.1, 1.0];
    for i in 0..20 {
        let snr = 10f64.powf(-4.0 + 5.0 * i as f64 / 19.0);
        let p = SystemParams::figure_defaults()
            .with_snr_at_fixed_bandwidth(snr)
            .unwrap();
        let sols: Vec<_> = thetas.iter().map(|&t| capacity::solve(q(t), &p)).collect();
        for w in sols.windows(2) {
            ensure(w[1].re <= w[0].re, || {
                format!("snr={snr:.3e}: R_E rises from θ={} to θ={}", w[0].theta, w[1].theta)
            })?;
            let (e0, e1) = (
                capacity::bit_energy(&p, w[0].re).db(),
                capacity::bit_energy(&p, w[1].re).db(),
            );
            ensure(e1 >= e0, || format!("snr={snr:.3e}: Eb/N0 falls with θ"))?;
        }
    }
    Ok("20 SNR points × θ ∈ {0.001, 0.01, 0.1, 1}".into())
}

fn algebraic_checks() -> Outcome {
    let mut worst_dual: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for k in 0..=48 {
        let snr = 10f64.powf(-8.0 + k as f64 * 0.25);
        let p = SystemParams::with_snr(1.0, 2e-3, 1e5, snr).unwrap();
        for i in 1..=99 {
            let rho = i as f64 / 100.0;
            let s = channel::estimation_stats(&p, rho).unwrap();
            let r = channel::snr_eff_rational(&p, rho).unwrap();
            worst_dual = worst_dual.max((s.snr_eff - r).abs() / r);
            worst_var = worst_var.max((s.var_est + s.var_err - p.gamma).abs() / p.gamma);
        }
    }
    ensure(worst_dual < 1e-12, || format!("dual-form mismatch {worst_dual:e}"))?;
    ensure(worst_var < 1e-12, || format!("variance mismatch {worst_var:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_res: f64 = 0.0;
    for _ in 0..100 {
        let theta = 10f64.powf(rng.random_range(-5.0..1.0));
        let p = SystemParams::new(
            rng.random_range(0.3..3.0),
            1.0,
            10f64.powf(rng.random_range(-4.0..-1.0)),
            1e6,
            10f64.powf(rng.random_range(2.0..6.0)),
        )
        .unwrap();
        let a = asymptotics::alpha_star(q(theta), &p);
        let x = theta * p.frame_t * asymptotics::phi(&p) / std::f64::consts::LN_2;
        worst_res = worst_res.max((a - x.ln_1p() / x).abs());
    }
    ensure(worst_res < 1e-12, || format!("α* residual {worst_res:e}"))?;

    let p = SystemParams::figure_defaults();
    let rho = channel::optimal_rho(&p);
    let snr_eff = channel::estimation_stats(&p, rho).unwrap().snr_eff;
    let cfg = SimConfig {
        frames: 1_000_000,
        arrival_per_frame: 0.0,
        r: channel::rate_for_alpha(1.0, snr_eff, &p),
        rho,
        seed: 7,
        stream: 0,
        warmup: 0,
        q_levels: vec![1.0],
    };
    let s = queue::simulate(&cfg, &p).map_err(|e| e.to_string())?;
    let pr = (-s.alpha).exp();
    let sigma = (pr * (1.0 - pr) / s.observed as f64).sqrt();
    let z = (s.on_fraction - pr) / sigma;
    ensure(z.abs() < 3.0, || format!("ON fraction off by {z:.2}σ"))?;
    Ok(format!(
        "dual {worst_dual:.1e}, variance {worst_var:.1e}, α* residual {worst_res:.1e}, ON z = {z:.2}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("AC1 wideband table reproduction", wideband_table),
        ("AC2 finite-B convergence to asymptotics", finite_bandwidth_convergence),
        ("AC3 low-power divergence", low_power_divergence),
        ("AC4 optimal training fraction vs grid oracle", lemma_oracle),
        ("AC5 queue-tail validation", queue_tail),
        ("AC6 theta monotonicity", theta_monotonicity),
        ("AC7 algebraic self-checks", algebraic_checks),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
