//! Height and mean-curvature estimates, slice geometry and the Barta-type
//! bound on the soliton function.

use serde::Serialize;

use super::sample::{Extent, ImmersionSample};
use crate::error::{Error, Result};
use crate::geometry::{ProfileKind, SolitonContext};
use crate::numerics::roots::grid_minimize;

/// Slack below `-SLACK_TOL` is a violation; `|slack| <= SLACK_TOL` is equality.
pub const SLACK_TOL: f64 = 1e-8;
pub const BARTA_GRID: usize = 10_000;
pub const BARTA_TOL: f64 = 1e-10;
/// `|zeta(t_bar)|` below this confirms a soliton slice.
pub const SLICE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equality,
    Holds,
    Violated,
    NotApplicable,
}

fn verdict(slack: f64) -> Verdict {
    if slack.abs() <= SLACK_TOL {
        Verdict::Equality
    } else if slack > 0.0 {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

/// One inequality `lhs <= rhs` (or `>=`) with `slack` oriented so that
/// non-negative slack means the inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

impl Bound {
    fn at_most(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Bound { name: name.into(), lhs, rhs, slack, verdict: verdict(slack) }
    }

    fn at_least(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        Bound { name: name.into(), lhs, rhs, slack, verdict: verdict(slack) }
    }

    fn not_applicable(name: &str) -> Self {
        Bound { name: name.into(), lhs: f64::NAN, rhs: f64::NAN, slack: f64::NAN, verdict: Verdict::NotApplicable }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightReport {
    pub sample: String,
    pub profile: String,
    pub t_sup: f64,
    pub t_inf: f64,
    /// Lower bound on `t_sup` from the profile's estimate.
    pub height: Bound,
    /// Mean-curvature bounds at `t_inf` and `t_sup`.
    pub mean_curvature: Vec<Bound>,
    pub violated: bool,
}

/// Lower bound on `sup (pi o psi)` for `c < 0` solitons in the three space-form models.
pub fn height_bound(kind: ProfileKind, m: usize, c: f64) -> Result<f64> {
    if !(c < 0.0) {
        return Err(Error::config("height estimates are stated for c < 0"));
    }
    let mf = m as f64;
    match kind {
        ProfileKind::EuclideanCone => Ok((-mf / c).sqrt()),
        ProfileKind::Horospherical => Ok((-mf / c).ln()),
        ProfileKind::GeodesicSpherical => Ok((-(mf + (mf * mf + 4.0 * c * c).sqrt()) / (2.0 * c)).acosh()),
        other => Err(Error::config(format!("no height estimate for the {other} profile"))),
    }
}

/// The `|H|^2` bounds at the lowest and highest points, for either sign of `c`.
/// They need a complete sample; partial samples report not applicable.
pub fn mean_curvature_bounds(sample: &ImmersionSample) -> Vec<Bound> {
    let names = ["at_lowest_point", "at_highest_point"];
    if sample.extent == Extent::Partial {
        return names.iter().map(|n| Bound::not_applicable(n)).collect();
    }
    let (c, mf) = (sample.ctx.c, sample.ctx.m as f64);
    let p = &sample.ctx.space.profile;
    let (lo, hi) = sample
        .valid_indices()
        .map(|i| sample.mean_sq.value[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let mut out = Vec::new();
    for (name, t) in names.iter().zip([sample.t_inf(), sample.t_sup()]) {
        if !p.contains(t) {
            out.push(Bound::not_applicable(name));
            continue;
        }
        let level = -mf * c * p.h1(t);
        let lowest = *name == names[0];
        out.push(if lowest == (c < 0.0) {
            Bound::at_most(&format!("inf_h2_{name}"), lo, level)
        } else {
            Bound::at_least(&format!("sup_h2_{name}"), hi, level)
        });
    }
    out
}

/// Height estimate and mean-curvature bounds for a `c < 0` sample.
pub fn height_estimate_check(sample: &ImmersionSample) -> Result<HeightReport> {
    let ctx = &sample.ctx;
    let kind = ctx.space.profile.kind();
    let bound = height_bound(kind, ctx.m, ctx.c)?;
    let (t_sup, t_inf) = (sample.t_sup(), sample.t_inf());
    let height = if sample.extent == Extent::Partial {
        Bound::not_applicable("height")
    } else {
        Bound::at_least("height", t_sup, bound)
    };
    let mean_curvature = mean_curvature_bounds(sample);
    let violated = height.verdict == Verdict::Violated || mean_curvature.iter().any(|b| b.verdict == Verdict::Violated);
    Ok(HeightReport {
        sample: sample.label.clone(),
        profile: kind.name().to_string(),
        t_sup,
        t_inf,
        height,
        mean_curvature,
        violated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceGeometry {
    pub t_bar: f64,
    /// Coefficient `-h'/h` of the umbilic part `<U,V> d_t` of the second fundamental form.
    pub umbilic_coefficient: f64,
    /// `d_t` component `-m h'/h` of the mean curvature vector.
    pub radial_component: f64,
    /// Fiber component; known to vanish only when the fiber submanifold is minimal.
    pub fiber_component: Option<f64>,
    pub zeta: f64,
    pub soliton: bool,
}

/// Mean curvature of `{t_bar} x M_0` and the soliton criterion `zeta(t_bar) = 0`
/// with `M_0` minimal in the fiber.
pub fn slice_geometry(ctx: &SolitonContext, t_bar: f64, minimal: bool) -> Result<SliceGeometry> {
    let p = &ctx.space.profile;
    p.check(t_bar)?;
    let k = -p.h1(t_bar) / p.h(t_bar);
    let zeta = ctx.soliton_function(t_bar)?;
    Ok(SliceGeometry {
        t_bar,
        umbilic_coefficient: k,
        radial_component: ctx.m as f64 * k,
        fiber_component: minimal.then_some(0.0),
        zeta,
        soliton: minimal && zeta.abs() <= SLICE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BartaReport {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub zeta_star: f64,
    pub t_star: f64,
    /// `eta_hat(b) - eta_hat(a)`.
    pub span: f64,
    /// `(alpha^2/4) * span`.
    pub bound: f64,
    pub consistent: bool,
    /// Smallest admissible `b` for `h = t`, `c < 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_threshold: Option<f64>,
}

impl BartaReport {
    pub fn verdict(&self) -> &'static str {
        if self.consistent {
            "consistent"
        } else {
            "violated (hypotheses cannot all hold)"
        }
    }
}

/// `inf_{[a,b]} zeta <= (alpha^2/4)(eta_hat(b) - eta_hat(a))`.
pub fn barta_lambda1_bound(ctx: &SolitonContext, a: f64, b: f64, alpha: f64) -> Result<BartaReport> {
    if !(a < b) {
        return Err(Error::config(format!("need a < b, got [{a}, {b}]")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::config("volume growth rate must be a finite non-negative number"));
    }
    let p = &ctx.space.profile;
    p.check(a)?;
    p.check(b)?;
    let (t_star, zeta_star) = grid_minimize(&|t| ctx.zeta(t), a, b, BARTA_GRID, BARTA_TOL);
    let span = ctx.eta_hat(b)? - ctx.eta_hat(a)?;
    let bound = 0.25 * alpha * alpha * span;
    let mf = ctx.m as f64;
    let b_threshold = (p.kind() == ProfileKind::EuclideanCone && ctx.c < 0.0)
        .then(|| ((8.0 * mf + alpha * alpha * a * a) / (alpha * alpha - 8.0 * ctx.c)).sqrt());
    Ok(BartaReport { a, b, alpha, zeta_star, t_star, span, bound, consistent: zeta_star <= bound, b_threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{WarpedSpace, WarpingProfile};

    fn ctx(profile: WarpingProfile, kappa: f64, m: usize, c: f64, t0: f64) -> SolitonContext {
        SolitonContext::new(WarpedSpace::new(profile, kappa, m).unwrap(), c, m, t0).unwrap()
    }

    #[test]
    fn leaf_witnesses_are_equalities() {
        let s = ImmersionSample::round_sphere(2, -1.0, 101).unwrap();
        let r = height_estimate_check(&s).unwrap();
        assert_eq!(r.height.verdict, Verdict::Equality);
        assert!(r.mean_curvature.iter().all(|b| b.verdict == Verdict::Equality));

        let c3 = ctx(WarpingProfile::horospherical(), 0.0, 3, -3.0, 0.0);
        let r = height_estimate_check(&ImmersionSample::slice(&c3, 0.0).unwrap()).unwrap();
        assert_eq!(r.height.verdict, Verdict::Equality);
        assert!(r.height.slack.abs() < 1e-15);

        let g = ctx(WarpingProfile::geodesic_spherical(), 1.0, 2, -1.0, 1.0);
        let t = (1.0 + 2f64.sqrt()).acosh();
        let r = height_estimate_check(&ImmersionSample::slice(&g, t).unwrap()).unwrap();
        assert_eq!(r.height.verdict, Verdict::Equality);
        assert!(!r.violated);
    }

    #[test]
    fn mismatched_profiles_are_config_errors() {
        let e = ctx(WarpingProfile::equidistant(), -1.0, 2, -1.0, 0.0);
        let s = ImmersionSample::slice(&e, 0.5).unwrap();
        assert!(matches!(height_estimate_check(&s), Err(Error::Config(_))));
        assert!(matches!(height_bound(ProfileKind::EuclideanCone, 2, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn partial_samples_skip_the_estimates() {
        let s = ImmersionSample::cylinder(2, -1.0, 4.0, 41).unwrap();
        let r = height_estimate_check(&s).unwrap();
        assert_eq!(r.height.verdict, Verdict::NotApplicable);
        assert!(!r.violated);
    }

    #[test]
    fn slice_geometry_examples() {
        let e = ctx(WarpingProfile::euclidean_cone(), 1.0, 2, -1.0, 0.0);
        let g = slice_geometry(&e, 2f64.sqrt(), true).unwrap();
        assert!((g.radial_component + 2f64.sqrt()).abs() < 1e-15);
        assert!(g.soliton);
        assert!(!slice_geometry(&e, 2f64.sqrt(), false).unwrap().soliton);

        let p = ctx(WarpingProfile::product(), 0.0, 2, -1.0, 0.0);
        let g = slice_geometry(&p, 0.3, true).unwrap();
        assert_eq!(g.radial_component, 0.0);
        assert!(!g.soliton);

        let s = ctx(WarpingProfile::spherical(), 1.0, 2, -1.0, 1.0);
        let g = slice_geometry(&s, std::f64::consts::FRAC_PI_2, true).unwrap();
        assert!(g.radial_component.abs() < 1e-15);
        assert!(!g.soliton);
    }

    #[test]
    fn barta_examples() {
        let e = ctx(WarpingProfile::euclidean_cone(), 1.0, 2, -1.0, 0.0);
        let r = barta_lambda1_bound(&e, 1.0, 2.0, 0.0).unwrap();
        assert!((r.zeta_star + 2.0).abs() < 1e-10);
        assert!(r.consistent);
        let r = barta_lambda1_bound(&e, 0.5, 1.0, 0.0).unwrap();
        assert!((r.zeta_star - 1.0).abs() < 1e-10);
        assert_eq!(r.verdict(), "violated (hypotheses cannot all hold)");
        let r = barta_lambda1_bound(&e, 0.5, 2.0, 1.0).unwrap();
        assert!((r.b_threshold.unwrap() - (16.25f64 / 9.0).sqrt()).abs() < 1e-12);
        assert!(barta_lambda1_bound(&e, 2.0, 1.0, 0.0).is_err());
    }
}
