//! Adaptive Simpson quadrature for smooth integrands.

use crate::error::{Error, Result};

/// Absolute tolerance used by the potential and flow-parameter integrals.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Upper bound on the number of accepted panels.
pub const MAX_PANELS: usize = 1 << 20;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` (either orientation) by adaptive Simpson.
///
/// The tolerance is absolute for integrals of size up to one and relative
/// beyond that, so that large but smooth integrands do not exhaust the panel
/// budget. Returns a config error when the panel cap is reached.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("quadrature bounds must be finite"));
    }

    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    let tol = tol * whole.abs().max(1.0);

    // Explicit stack keeps the summation order deterministic (left to right).
    let mut stack = vec![Panel { a, b, fa, fm, fb, whole, tol, depth: 0 }];
    let mut total = 0.0;
    let mut accepted = 0usize;

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if !delta.is_finite() {
            return Err(Error::domain(format!(
                "non-finite integrand on [{}, {}]",
                p.a, p.b
            )));
        }
        if delta.abs() <= 15.0 * p.tol || p.depth >= 50 || m <= p.a || m >= p.b {
            total += left + right + delta / 15.0;
            accepted += 1;
            if accepted > MAX_PANELS {
                return Err(Error::config(format!(
                    "adaptive quadrature exceeded {MAX_PANELS} panels"
                )));
            }
        } else {
            let depth = p.depth + 1;
            let tol = 0.5 * p.tol;
            stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth });
            stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth });
        }
    }
    Ok(total)
}

/// Composite Simpson on uniformly spaced samples; falls back to the
/// trapezoid rule on the last interval when the count is even.
pub fn simpson_samples(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * dx * (values[0] + values[1]),
        _ => {
            let intervals = n - 1;
            let even = intervals - intervals % 2;
            let mut acc = values[0] + values[even];
            for (i, v) in values.iter().enumerate().take(even).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = acc * dx / 3.0;
            if even < intervals {
                total += 0.5 * dx * (values[n - 2] + values[n - 1]);
            }
            total
        }
    }
}

/// Running trapezoid integral of uniformly spaced samples.
pub fn cumulative_trapezoid(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * dx * (values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}
