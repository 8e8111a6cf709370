//! Finite-difference stencils on uniform grids and for scalar functions.

/// Second-order first derivative of uniformly spaced samples, one-sided
/// three-point stencils at the ends.
pub fn diff2(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    d
}

/// Fourth-order first derivative of uniformly spaced samples, one-sided
/// five-point stencils near the ends.
pub fn diff4(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    if n < 5 {
        return diff2(f, dx);
    }
    let mut d = vec![0.0; n];
    let fwd = |f: &[f64], i: usize| -> f64 {
        (-25.0 * f[i] + 48.0 * f[i + 1] - 36.0 * f[i + 2] + 16.0 * f[i + 3] - 3.0 * f[i + 4])
            / (12.0 * dx)
    };
    let fwd1 = |f: &[f64], i: usize| -> f64 {
        // Derivative at i + 1 using samples i..i+4.
        (-3.0 * f[i] - 10.0 * f[i + 1] + 18.0 * f[i + 2] - 6.0 * f[i + 3] + f[i + 4]) / (12.0 * dx)
    };
    d[0] = fwd(f, 0);
    d[1] = fwd1(f, 0);
    // Mirror for the right end: reverse samples, negate.
    let rev: Vec<f64> = f[n - 5..].iter().rev().copied().collect();
    d[n - 1] = -fwd(&rev, 0);
    d[n - 2] = -fwd1(&rev, 0);
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dx);
    }
    d
}

/// Fifth-point centered first derivative of a scalar function.
pub fn deriv5<F: Fn(f64) -> f64>(f: &F, t: f64, delta: f64) -> f64 {
    (f(t - 2.0 * delta) - 8.0 * f(t - delta) + 8.0 * f(t + delta) - f(t + 2.0 * delta)) / (12.0 * delta)
}

/// Five-point centered second derivative of a scalar function.
pub fn second_deriv5<F: Fn(f64) -> f64>(f: &F, t: f64, delta: f64) -> f64 {
    (-f(t - 2.0 * delta) + 16.0 * f(t - delta) - 30.0 * f(t) + 16.0 * f(t + delta)
        - f(t + 2.0 * delta))
        / (12.0 * delta * delta)
}

/// Observed convergence order from errors at two resolutions with ratio
/// `refinement` between grid parameters.
pub fn observed_order(coarse: f64, fine: f64, refinement: f64) -> f64 {
    (coarse / fine).ln() / refinement.ln()
}
