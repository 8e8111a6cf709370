//! Residuals of the elliptic soliton identities on samples.

use serde::Serialize;

use super::sample::ImmersionSample;
use crate::error::{Error, Result};
use crate::numerics::fd::observed_order;

/// Declared bar for samples with exact fields.
pub const ANALYTIC_TOL: f64 = 1e-10;
/// Discrete bars are `DISCRETE_FACTOR * spacing^2`.
pub const DISCRETE_FACTOR: f64 = 1e2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub sample: String,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub spacing: f64,
    /// Observed order against a coarser run; present only after [`IdentityReport::refined`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityReport {
    /// This (finer) report with the observed order against `coarse`.
    pub fn refined(mut self, coarse: &IdentityReport) -> Self {
        self.order = Some(observed_order(coarse.residual_sup, self.residual_sup, coarse.spacing / self.spacing));
        self
    }
}

/// Header of [`csv_summary`].
pub const CSV_HEADER: &str = "name,sample,residual_sup,residual_l2,spacing,order,tolerance,passed";

/// Flat CSV of a batch of reports.
pub fn csv_summary(reports: &[IdentityReport]) -> String {
    use crate::report::fmt_f64;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let order = r.order.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},\"{}\",{},{},{},{},{},{}\n",
            r.name,
            r.sample.replace('"', "'"),
            fmt_f64(r.residual_sup),
            fmt_f64(r.residual_l2),
            fmt_f64(r.spacing),
            order,
            fmt_f64(r.tolerance),
            r.passed
        ));
    }
    out
}

/// Declared bar for `sample`.
pub fn tolerance_for(sample: &ImmersionSample) -> f64 {
    if sample.analytic {
        ANALYTIC_TOL
    } else {
        (DISCRETE_FACTOR * sample.spacing * sample.spacing).max(ANALYTIC_TOL)
    }
}

fn report(name: &str, sample: &ImmersionSample, residual: impl Fn(usize) -> f64) -> IdentityReport {
    let (mut sup, mut acc, mut mass) = (0.0f64, 0.0, 0.0);
    for i in sample.valid_indices() {
        let r = residual(i);
        sup = if r.is_nan() { f64::NAN } else { sup.max(r.abs()) };
        acc += sample.weights[i] * r * r;
        mass += sample.weights[i];
    }
    let l2 = if mass > 0.0 { (acc / mass).sqrt() } else { 0.0 };
    let tolerance = tolerance_for(sample);
    IdentityReport {
        name: name.to_string(),
        sample: sample.label.clone(),
        residual_sup: sup,
        residual_l2: l2,
        spacing: sample.spacing,
        order: None,
        tolerance,
        passed: sup <= tolerance,
    }
}

fn h(sample: &ImmersionSample, i: usize) -> f64 {
    sample.ctx.space.profile.h(sample.t[i])
}

fn h1(sample: &ImmersionSample, i: usize) -> f64 {
    sample.ctx.space.profile.h1(sample.t[i])
}

/// `Ric(N, N) + m h''/h` at node `i`.
fn ricci_shift(sample: &ImmersionSample, i: usize) -> f64 {
    let space = &sample.ctx.space;
    let ric = match space.space_form_check() {
        Some(k) => space.n as f64 * k,
        None => space.ricci_unit(sample.t[i], sample.theta[i]),
    };
    ric + sample.ctx.m as f64 * space.profile.h2_over_h(sample.t[i])
}

fn space_form(sample: &ImmersionSample) -> Result<f64> {
    sample
        .ctx
        .space
        .space_form_check()
        .ok_or_else(|| Error::Unsupported(format!("{} is not a space form", sample.ctx.space.profile.name())))
}

/// `Delta eta - m h' - H^2 / c`.
pub fn check_delta_eta(sample: &ImmersionSample) -> IdentityReport {
    let (c, mf) = (sample.ctx.c, sample.ctx.m as f64);
    report("delta_eta", sample, |i| {
        sample.eta.lap[i] - mf * h1(sample, i) - sample.mean_sq.value[i] / c
    })
}

/// `Delta_{-c eta} eta - (m h' + c |X|^2)`, which equals the soliton function
/// `zeta` on slices.
pub fn check_delta_eta_weighted(sample: &ImmersionSample) -> IdentityReport {
    let (c, mf) = (sample.ctx.c, sample.ctx.m as f64);
    report("delta_eta_weighted", sample, |i| {
        let hi = h(sample, i);
        sample.eta.drift_lap(c, &sample.eta, i) - (mf * h1(sample, i) + c * hi * hi)
    })
}

/// `nabla H + c A(nabla eta)` along the reduced direction.
pub fn check_grad_h(sample: &ImmersionSample) -> IdentityReport {
    let c = sample.ctx.c;
    report("grad_h", sample, |i| sample.mean.ds[i] + c * sample.k_profile[i] * sample.eta.ds[i])
}

/// Pointwise values of `|H|^2 + c^2 |nabla eta|^2 - c^2 chi(eta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservedQuantity {
    pub values: Vec<f64>,
    /// `max - min` over valid nodes.
    pub drift: f64,
    pub mean: f64,
    pub report: IdentityReport,
}

/// The first integral of the potential ODE with the catalog `chi`.
pub fn conserved_quantity(sample: &ImmersionSample) -> Result<ConservedQuantity> {
    let ctx = &sample.ctx;
    let (canon, chi) = ctx.space.profile.potential_ode().ok_or_else(|| {
        Error::Unsupported(format!("no catalog chi for the {} profile", ctx.space.profile.name()))
    })?;
    let shift = canon(ctx.t0);
    let c2 = ctx.c * ctx.c;
    let values: Vec<f64> = (0..sample.len())
        .map(|i| sample.mean_sq.value[i] + c2 * sample.eta.ds[i].powi(2) - c2 * chi(sample.eta.value[i] + shift))
        .collect();
    let (mut lo, mut hi, mut sum, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for i in 0..sample.len() {
        lo = lo.min(values[i]);
        hi = hi.max(values[i]);
        sum += values[i];
        count += 1;
    }
    let mean = sum / count.max(1) as f64;
    let mut rep = report("conserved_quantity", sample, |i| values[i] - mean);
    rep.residual_sup = hi - lo;
    rep.passed = rep.residual_sup <= rep.tolerance;
    Ok(ConservedQuantity { values, drift: hi - lo, mean, report: rep })
}

/// `(1/2) Delta_{-c eta}|A|^2 - [|nabla A|^2 - (c h' + |A|^2)|A|^2 + (m|A|^2 - H^2) k]`
/// in a space form of curvature `k`.
pub fn simons_residual(sample: &ImmersionSample) -> Result<IdentityReport> {
    let kbar = space_form(sample)?;
    let (c, mf) = (sample.ctx.c, sample.ctx.m as f64);
    Ok(report("simons", sample, |i| {
        let a2 = sample.norm2.value[i];
        let lhs = 0.5 * sample.norm2.drift_lap(c, &sample.eta, i);
        let rhs = sample.grad_a2[i] - (c * h1(sample, i) + a2) * a2 + (mf * a2 - sample.mean_sq.value[i]) * kbar;
        lhs - rhs
    }))
}

/// `(1/2) Delta_{-c eta} H^2 - [-(c h' + |A|^2) H^2 + |nabla H|^2 - H^2 (Ric(N,N) + m h''/h)]`.
pub fn delta_h_residual(sample: &ImmersionSample) -> IdentityReport {
    let c = sample.ctx.c;
    report("delta_h", sample, |i| {
        let (a2, h2) = (sample.norm2.value[i], sample.mean_sq.value[i]);
        let lhs = 0.5 * sample.mean_sq.drift_lap(c, &sample.eta, i);
        let rhs = -(c * h1(sample, i) + a2) * h2 + sample.mean.ds[i].powi(2) - h2 * ricci_shift(sample, i);
        lhs - rhs
    })
}

/// Residual of the drift equation for `|A|^2/H^2` in a space form of curvature `k`:
/// `Delta_{-c eta} q + <nabla q, nabla log H^2>` against
/// `(2/H^4)|nabla H (x) A - H nabla A|^2 + 2 (m|A|^2 - H^2) k / H^2`.
pub fn quotient_residual(sample: &ImmersionSample) -> Result<IdentityReport> {
    let kbar = space_form(sample)?;
    let q = sample
        .quotient
        .as_ref()
        .ok_or_else(|| Error::Unsupported("|A|^2/H^2 needs H bounded away from zero".into()))?;
    let (c, mf) = (sample.ctx.c, sample.ctx.m as f64);
    Ok(report("quotient", sample, |i| {
        let (hv, hs) = (sample.mean.value[i], sample.mean.ds[i]);
        let (a2, a2s) = (sample.norm2.value[i], sample.norm2.ds[i]);
        let h2 = hv * hv;
        let lhs = q.drift_lap(c, &sample.eta, i) + q.ds[i] * 2.0 * hs / hv;
        let tensor = hs * hs * a2 - hv * hs * a2s + h2 * sample.grad_a2[i];
        let rhs = 2.0 * tensor / (h2 * h2) + 2.0 * (mf * a2 - h2) * kbar / h2;
        lhs - rhs
    }))
}

/// `sup (|A|^2 - H^2/m)`.
pub fn umbilicity_gap(sample: &ImmersionSample) -> f64 {
    let mf = sample.ctx.m as f64;
    sample
        .valid_indices()
        .map(|i| sample.norm2.value[i] - sample.mean_sq.value[i] / mf)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `1 - H^2/(c^2 h^2)` against `1 - Theta^2 = |nabla (pi o psi)|^2`.
pub fn height_gradient_residual(sample: &ImmersionSample) -> IdentityReport {
    let c = sample.ctx.c;
    report("height_gradient", sample, |i| {
        let hi = h(sample, i);
        if hi == 0.0 {
            return 0.0;
        }
        sample.theta[i] * sample.theta[i] - sample.mean_sq.value[i] / (c * c * hi * hi)
    })
}

/// Range of `1 - H^2/(c^2 h^2)` over valid nodes, which lies in `[0, 1]` on solitons.
pub fn height_gradient_range(sample: &ImmersionSample) -> (f64, f64) {
    let c = sample.ctx.c;
    sample.valid_indices().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let hv = h(sample, i);
        let v = 1.0 - sample.mean_sq.value[i] / (c * c * hv * hv);
        if v.is_finite() {
            (lo.min(v), hi.max(v))
        } else {
            (lo, hi)
        }
    })
}

/// `sup (|nabla eta|^2 - h^2)`, non-positive by Cauchy-Schwarz.
pub fn potential_gradient_excess(sample: &ImmersionSample) -> f64 {
    sample
        .valid_indices()
        .map(|i| sample.eta.ds[i].powi(2) - h(sample, i).powi(2))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The identities applicable to `sample`, in a fixed order. Checks the
/// ambient does not support are skipped.
pub fn run_all(sample: &ImmersionSample) -> Vec<IdentityReport> {
    let mut out = vec![check_delta_eta(sample), check_delta_eta_weighted(sample), check_grad_h(sample)];
    if let Ok(q) = conserved_quantity(sample) {
        out.push(q.report);
    }
    if let Ok(r) = simons_residual(sample) {
        out.push(r);
    }
    out.push(delta_h_residual(sample));
    if let Ok(r) = quotient_residual(sample) {
        out.push(r);
    }
    out.push(height_gradient_residual(sample));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{SolitonContext, WarpedSpace, WarpingProfile};

    fn cone(m: usize, c: f64) -> SolitonContext {
        SolitonContext::new(WarpedSpace::euclidean(m), c, m, 0.0).unwrap()
    }

    #[test]
    fn sphere_conserved_quantity_vanishes() {
        let s = ImmersionSample::round_sphere(2, -1.0, 101).unwrap();
        let q = conserved_quantity(&s).unwrap();
        assert!(q.values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn non_soliton_slice_reports_zeta() {
        let s = ImmersionSample::slice(&cone(2, -1.0), 1.0).unwrap();
        let r = check_delta_eta_weighted(&s);
        assert!((r.residual_sup - 1.0).abs() < 1e-14);
        assert!(!r.passed);
    }

    #[test]
    fn cylinder_gap_is_half() {
        let s = ImmersionSample::cylinder(2, -1.0, 4.0, 41).unwrap();
        assert!((umbilicity_gap(&s) - 0.5).abs() < 1e-15);
        let p = ImmersionSample::plane(2, -1.0, 3.0, 31).unwrap();
        assert_eq!(umbilicity_gap(&p), 0.0);
        let o = ImmersionSample::round_sphere(3, -1.0, 31).unwrap();
        assert!(umbilicity_gap(&o).abs() < 1e-15);
    }

    #[test]
    fn exact_samples_pass_everything() {
        let samples = vec![
            ImmersionSample::slice(&cone(2, -1.0), 2f64.sqrt()).unwrap(),
            ImmersionSample::round_sphere(2, -1.0, 101).unwrap(),
            ImmersionSample::round_sphere(4, -0.5, 101).unwrap(),
            ImmersionSample::cylinder(3, -1.0, 4.0, 41).unwrap(),
            ImmersionSample::plane(2, -1.0, 3.0, 31).unwrap(),
        ];
        for s in &samples {
            for r in run_all(s) {
                assert!(r.passed, "{} on {}: {}", r.name, r.sample, r.residual_sup);
            }
        }
    }

    #[test]
    fn hyperbolic_slices_pass() {
        let space = WarpedSpace::new(WarpingProfile::horospherical(), 0.0, 3).unwrap();
        let ctx = SolitonContext::new(space, -3.0, 3, 0.0).unwrap();
        let s = ImmersionSample::slice(&ctx, 0.0).unwrap();
        for r in run_all(&s) {
            assert!(r.passed, "{}: {}", r.name, r.residual_sup);
        }
        let space = WarpedSpace::new(WarpingProfile::geodesic_spherical(), 1.0, 2).unwrap();
        let ctx = SolitonContext::new(space, -1.0, 2, 1.0).unwrap();
        let s = ImmersionSample::slice(&ctx, (1.0 + 2f64.sqrt()).acosh()).unwrap();
        for r in run_all(&s) {
            assert!(r.passed, "{}: {}", r.name, r.residual_sup);
        }
    }

    #[test]
    fn unsupported_quotient_on_plane() {
        let p = ImmersionSample::plane(2, -1.0, 3.0, 31).unwrap();
        assert!(matches!(quotient_residual(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn order_needs_two_runs() {
        let s = ImmersionSample::round_sphere(2, -1.0, 11).unwrap();
        let r = check_delta_eta(&s);
        assert!(r.order.is_none());
        assert!(!crate::report::to_json(&r).contains("order"));
        let csv = csv_summary(&[r]);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 2);
    }
}
