//! Classical fourth-order Runge-Kutta stepping for small autonomous systems.

/// One RK4 step of `y' = f(y)` with step `h`.
pub fn rk4_step<const N: usize, F>(f: &F, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(&y);
    let k2 = f(&add(&y, &k1, 0.5 * h));
    let k3 = f(&add(&y, &k2, 0.5 * h));
    let k4 = f(&add(&y, &k3, h));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let run = |h: f64| {
            let steps = (1.0 / h).round() as usize;
            let mut y = [1.0];
            for _ in 0..steps {
                y = rk4_step(&|y: &[f64; 1]| [-y[0]], y, h);
            }
            (y[0] - (-1f64).exp()).abs()
        };
        let ratio = run(0.02) / run(0.01);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio = {ratio}");
    }
}
