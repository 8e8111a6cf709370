//! Bracketing root finders and scalar minimization.

use serde::Serialize;

use crate::error::{Error, Result};

/// A root located by [`scan_roots`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub t: f64,
    pub residual: f64,
    /// Even-multiplicity root: `f` touches zero without changing sign.
    pub tangential: bool,
}

/// Parameters of the scan-and-polish root search.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub subintervals: usize,
    pub bisection_tol: f64,
    pub tangency_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { subintervals: 10_000, bisection_tol: 1e-10, tangency_tol: 1e-10 }
    }
}

/// Bisection on a sign-changing bracket down to width `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::domain("bisect: bracket has no sign change"));
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One Newton step, accepted only if it stays in `[lo, hi]` and does not
/// increase `|f|`.
pub fn newton_polish<F, D>(f: &F, df: &D, t: f64, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let ft = f(t);
    let d = df(t);
    if d == 0.0 || !d.is_finite() {
        return t;
    }
    let cand = t - ft / d;
    if cand >= lo && cand <= hi && f(cand).abs() <= ft.abs() {
        cand
    } else {
        t
    }
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimum of `f` on `[a, b]` by a uniform scan refined with golden section.
/// Returns `(argmin, min)`.
pub fn grid_minimize<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, points: usize, tol: f64) -> (f64, f64) {
    let n = points.max(2);
    let dx = (b - a) / (n - 1) as f64;
    let mut best = 0usize;
    let mut best_v = f64::INFINITY;
    for i in 0..n {
        let v = f(a + i as f64 * dx);
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    let lo = a + (best.saturating_sub(1)) as f64 * dx;
    let hi = (a + (best + 1) as f64 * dx).min(b);
    let t = golden_section(f, lo, hi, tol);
    let v = f(t);
    // Endpoint minima are kept exactly.
    if v < best_v {
        (t, v)
    } else {
        (a + best as f64 * dx, best_v)
    }
}

/// All roots of `f` on `[lo, hi]`: uniform scan for sign changes, bisection,
/// one Newton polish. Local minima of `|f|` below the tangency tolerance with
/// no sign change are reported as tangential roots.
pub fn scan_roots<F, D>(f: &F, df: &D, lo: f64, hi: f64, opts: ScanOptions) -> Result<Vec<Root>>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(hi > lo) {
        return Err(Error::domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let n = opts.subintervals.max(1);
    let dx = (hi - lo) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|i| if i == n { hi } else { lo + i as f64 * dx }).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();

    let mut roots: Vec<Root> = Vec::new();
    let push = |roots: &mut Vec<Root>, r: Root| {
        if roots.last().is_none_or(|last| (r.t - last.t).abs() > 4.0 * opts.bisection_tol) {
            roots.push(r);
        }
    };

    for i in 0..n {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            push(&mut roots, Root { t: a, residual: 0.0, tangential: false });
            continue;
        }
        if fb != 0.0 && fa.signum() != fb.signum() {
            let t = bisect(f, a, b, opts.bisection_tol)?;
            let t = newton_polish(f, df, t, a, b);
            push(&mut roots, Root { t, residual: f(t).abs(), tangential: false });
        }
    }
    if vals[n] == 0.0 {
        push(&mut roots, Root { t: grid[n], residual: 0.0, tangential: false });
    }

    // Tangential roots: interior local minima of |f| without a sign change.
    for i in 1..n {
        let (l, c, r) = (vals[i - 1], vals[i], vals[i + 1]);
        if c == 0.0 || l.signum() != c.signum() || r.signum() != c.signum() {
            continue;
        }
        if c.abs() <= l.abs() && c.abs() <= r.abs() {
            let t = golden_section(&|x| f(x).abs(), grid[i - 1], grid[i + 1], 1e-12);
            let t = newton_polish(df, &|x| (df(x + 1e-6) - df(x - 1e-6)) / 2e-6, t, grid[i - 1], grid[i + 1]);
            let res = f(t).abs();
            if res < opts.tangency_tol {
                roots.push(Root { t, residual: res, tangential: true });
            }
        }
    }
    roots.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let f = |x: f64| (x - 1.0) * (x - 2.5);
        let df = |x: f64| 2.0 * x - 3.5;
        let roots = scan_roots(&f, &df, 0.0, 4.0, ScanOptions::default()).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].t - 1.0).abs() < 1e-12);
        assert!((roots[1].t - 2.5).abs() < 1e-12);
        assert!(roots.iter().all(|r| !r.tangential));
    }

    #[test]
    fn flags_double_root() {
        let f = |x: f64| (x - 1.234_567).powi(2);
        let df = |x: f64| 2.0 * (x - 1.234_567);
        let roots = scan_roots(&f, &df, 0.0, 3.0, ScanOptions::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].tangential);
        assert!((roots[0].t - 1.234_567).abs() < 1e-5);
    }

    #[test]
    fn empty_bracket_is_rejected() {
        let f = |x: f64| x;
        assert!(scan_roots(&f, &f, 1.0, 1.0, ScanOptions::default()).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (t, v) = grid_minimize(&|x: f64| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1000, 1e-10);
        assert!((t - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
