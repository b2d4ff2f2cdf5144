//! Scalar maximisation: a coarse log-spaced scan to bracket the peak, then
//! golden-section refinement inside the bracket.

/// `1 / φ` where `φ` is the golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// A located maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Stops once the bracket width is below `xtol`, or after `max_iter`
/// iterations. Returns the best point evaluated, so the result is never worse
/// than the interior probes.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        Maximum { x: c, value: fc }
    } else {
        Maximum { x: d, value: fd }
    }
}

/// Maximise `f` over `x ∈ [lo, hi]` (both > 0).
///
/// `points` log-spaced samples locate the best grid cell; golden-section
/// search on `ln x` between its neighbours then refines it until the bracket is
/// narrower than `rel_tol` in relative terms. Multiple local peaks are resolved
/// in favour of the best grid sample.
pub fn log_scan_max<F>(f: F, lo: f64, hi: f64, points: usize, rel_tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    assert!(lo > 0.0 && hi > lo && points >= 3);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (points - 1) as f64;
    let ln_at = |i: usize| ln_lo + step * i as f64;

    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(ln_at(i).exp());
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let left = ln_at(best.saturating_sub(1));
    let right = ln_at((best + 1).min(points - 1));
    // |Δ ln x| ≈ relative change in x
    let refined = golden_section_max(|u| f(u.exp()), left, right, rel_tol, 500);
    if refined.value >= best_val {
        Maximum {
            x: refined.x.exp(),
            value: refined.value,
        }
    } else {
        Maximum {
            x: ln_at(best).exp(),
            value: best_val,
        }
    }
}
