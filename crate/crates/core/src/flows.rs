//! Self-similar mean curvature flows of slices `{t(tau)} x P` and the
//! reparametrization `sigma = s(t(tau))` that turns them into flows along `X`.
//!
//! A slice moves by `dt/dtau = -n h'/h`. Closed forms are re-anchored so
//! that `t(0) = t_init`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ProfileKind, SolitonContext, WarpedSpace};
use crate::numerics::ode::rk4_step;
use crate::numerics::quadrature::{adaptive_simpson, DEFAULT_TOL};
use crate::numerics::roots::bisect;

/// Integration stops this far from a finite endpoint of `I`.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Default RK4 output step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Local error target of the internal step-doubling refinement.
const LOCAL_TOL: f64 = 1e-13;
const MAX_DEPTH: u32 = 24;

/// A closed-form slice flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormFlow {
    pub kind: ProfileKind,
    pub n: usize,
    pub t_init: f64,
    /// Open maximal window of `tau`.
    pub tau_min: f64,
    pub tau_max: f64,
}

impl ClosedFormFlow {
    pub fn new(kind: ProfileKind, n: usize, t_init: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("slice dimension must be positive"));
        }
        let profile = crate::geometry::WarpingProfile::catalog(kind)
            .map_err(|_| Error::Unsupported(format!("no closed-form flow for the {kind} profile")))?;
        profile.check(t_init)?;
        let nf = n as f64;
        let (tau_min, tau_max) = match kind {
            ProfileKind::EuclideanCone => (f64::NEG_INFINITY, t_init * t_init / (2.0 * nf)),
            ProfileKind::GeodesicSpherical => (f64::NEG_INFINITY, t_init.cosh().ln() / nf),
            ProfileKind::Spherical => {
                let c = t_init.cos();
                if c == 0.0 {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, -c.abs().ln() / nf)
                }
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        Ok(ClosedFormFlow { kind, n, t_init, tau_min, tau_max })
    }

    /// Both branches of a two-branch family: the flows through `t_init` and
    /// through its mirror `-t_init` (equidistant profile only).
    pub fn branches(kind: ProfileKind, n: usize, t_init: f64) -> Result<Vec<Self>> {
        let first = Self::new(kind, n, t_init)?;
        if kind == ProfileKind::Equidistant && t_init != 0.0 {
            Ok(vec![first, Self::new(kind, n, -t_init)?])
        } else {
            Ok(vec![first])
        }
    }

    pub fn contains(&self, tau: f64) -> bool {
        tau > self.tau_min && tau < self.tau_max
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        if !self.contains(tau) {
            return Err(Error::domain(format!(
                "tau = {tau} is outside the maximal window ({}, {}) of the {} flow",
                self.tau_min, self.tau_max, self.kind
            )));
        }
        let nf = self.n as f64;
        let t0 = self.t_init;
        Ok(match self.kind {
            ProfileKind::EuclideanCone => (t0 * t0 - 2.0 * nf * tau).sqrt(),
            ProfileKind::Horospherical => t0 - nf * tau,
            ProfileKind::GeodesicSpherical => (t0.cosh() * (-nf * tau).exp()).acosh(),
            ProfileKind::Equidistant => (t0.sinh() * (-nf * tau).exp()).asinh(),
            ProfileKind::Spherical => (t0.cos() * (nf * tau).exp()).acos(),
            ProfileKind::Product => t0,
            ProfileKind::Custom => unreachable!("rejected in constructor"),
        })
    }
}

/// Input of [`integrate_flow`]. The context supplies the profile and
/// the base point of `sigma`. Its `m` is ignored: slices have dimension `n`.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub ctx: SolitonContext,
    pub t_init: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrajectory {
    pub taus: Vec<f64>,
    pub ts: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub c_taus: Vec<f64>,
    /// Integration stopped before the requested window was covered.
    pub halted: bool,
    #[serde(skip)]
    space: Option<WarpedSpace>,
}

fn velocity(space: &WarpedSpace, t: f64) -> f64 {
    -(space.n as f64) * space.profile.h1(t) / space.profile.h(t)
}

fn c_tau_of(space: &WarpedSpace, t: f64) -> f64 {
    let h = space.profile.h(t);
    -(space.n as f64) * space.profile.h1(t) / (h * h)
}

fn inside(space: &WarpedSpace, t: f64) -> bool {
    let (lo, hi) = space.profile.interval();
    t.is_finite() && (lo == f64::NEG_INFINITY || t > lo + BOUNDARY_MARGIN) && (hi == f64::INFINITY || t < hi - BOUNDARY_MARGIN)
}

/// Advances `t` by `dtau` with RK4, bisecting the step until the
/// step-doubling error estimate meets the local tolerance.
fn advance(space: &WarpedSpace, t: f64, dtau: f64, depth: u32) -> f64 {
    let f = |y: &[f64; 1]| [velocity(space, y[0])];
    let full = rk4_step(&f, [t], dtau)[0];
    let half = rk4_step(&f, rk4_step(&f, [t], 0.5 * dtau), 0.5 * dtau)[0];
    let err = (full - half).abs();
    if (err <= LOCAL_TOL * t.abs().max(1.0) && inside(space, half)) || depth >= MAX_DEPTH || !inside(space, t) {
        return half + (half - full) / 15.0;
    }
    let mid = advance(space, t, 0.5 * dtau, depth + 1);
    if !inside(space, mid) {
        return mid;
    }
    advance(space, mid, 0.5 * dtau, depth + 1)
}

/// Integrates the slice flow on `[tau_lo, tau_hi]`, outward from `tau = 0`.
///
/// Samples lie on the uniform grid `k * step`; between samples the RK4 step
/// is refined until the local error is below `1e-13`.
pub fn integrate_flow(spec: &FlowSpec) -> Result<FlowTrajectory> {
    if !(spec.step > 0.0) || !spec.step.is_finite() {
        return Err(Error::config(format!("flow step must be positive, got {}", spec.step)));
    }
    if !(spec.tau_lo <= 0.0 && 0.0 <= spec.tau_hi && spec.tau_lo < spec.tau_hi) {
        return Err(Error::config(format!(
            "tau window [{}, {}] must contain 0 and be nonempty",
            spec.tau_lo, spec.tau_hi
        )));
    }
    let space = &spec.ctx.space;
    space.profile.check(spec.t_init)?;
    let mut halted = !inside(space, spec.t_init);

    let sweep = |end: f64| -> (Vec<(f64, f64)>, bool) {
        let mut out = Vec::new();
        if end == 0.0 {
            return (out, false);
        }
        let dir = end.signum();
        let count = (end.abs() / spec.step - 1e-9).ceil() as usize;
        let mut t = spec.t_init;
        let mut tau_prev = 0.0;
        for k in 1..=count {
            let tau = if k == count { end } else { dir * k as f64 * spec.step };
            let next = advance(space, t, tau - tau_prev, 0);
            if !inside(space, next) {
                return (out, true);
            }
            out.push((tau, next));
            t = next;
            tau_prev = tau;
        }
        (out, false)
    };

    let (mut back, mut fwd) = (Vec::new(), Vec::new());
    if !halted {
        let (b, hb) = sweep(spec.tau_lo);
        let (f, hf) = sweep(spec.tau_hi);
        back = b;
        fwd = f;
        halted = hb || hf;
    }
    let mut samples: Vec<(f64, f64)> = back.into_iter().rev().collect();
    samples.push((0.0, spec.t_init));
    samples.extend(fwd);

    let profile = &space.profile;
    let sigma0 = spec.ctx.flow_param(spec.t_init)?;
    let origin = samples.iter().position(|s| s.0 == 0.0).expect("tau = 0 sample");
    let mut sigmas = vec![0.0; samples.len()];
    sigmas[origin] = sigma0;
    let inv_h = |s: f64| 1.0 / profile.h(s);
    for k in origin + 1..samples.len() {
        sigmas[k] = sigmas[k - 1] + adaptive_simpson(inv_h, samples[k - 1].1, samples[k].1, DEFAULT_TOL)?;
    }
    for k in (0..origin).rev() {
        sigmas[k] = sigmas[k + 1] + adaptive_simpson(inv_h, samples[k + 1].1, samples[k].1, DEFAULT_TOL)?;
    }

    Ok(FlowTrajectory {
        taus: samples.iter().map(|s| s.0).collect(),
        ts: samples.iter().map(|s| s.1).collect(),
        c_taus: samples.iter().map(|s| c_tau_of(space, s.1)).collect(),
        sigmas,
        halted,
        space: Some(space.clone()),
    })
}

impl FlowTrajectory {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn tau_range(&self) -> (f64, f64) {
        (self.taus[0], *self.taus.last().unwrap())
    }

    fn space(&self) -> &WarpedSpace {
        self.space.as_ref().expect("trajectory built by integrate_flow")
    }

    /// `t(tau)` by cubic Hermite interpolation using the flow velocity.
    pub fn t_at(&self, tau: f64) -> Result<f64> {
        let (lo, hi) = self.tau_range();
        if !(tau >= lo && tau <= hi) {
            return Err(Error::domain(format!("tau = {tau} is outside the trajectory range [{lo}, {hi}]")));
        }
        if self.len() == 1 {
            return Ok(self.ts[0]);
        }
        let k = match self.taus.binary_search_by(|x| x.total_cmp(&tau)) {
            Ok(k) => return Ok(self.ts[k]),
            Err(k) => k.clamp(1, self.len() - 1) - 1,
        };
        let space = self.space();
        let (a, b) = (self.taus[k], self.taus[k + 1]);
        let (ya, yb) = (self.ts[k], self.ts[k + 1]);
        let (da, db) = (velocity(space, ya), velocity(space, yb));
        let dt = b - a;
        let s = (tau - a) / dt;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s).powi(2);
        let h10 = s * (1.0 - s).powi(2);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Ok(h00 * ya + h10 * dt * da + h01 * yb + h11 * dt * db)
    }

    /// `c_tau = d sigma / d tau` at an arbitrary `tau` in range.
    pub fn c_tau_at(&self, tau: f64) -> Result<f64> {
        let t = self.t_at(tau)?;
        Ok(c_tau_of(self.space(), t))
    }

    /// Header `tau,t,sigma,c_tau`.
    pub fn to_csv(&self) -> String {
        let rows = (0..self.len()).map(|i| vec![self.taus[i], self.ts[i], self.sigmas[i], self.c_taus[i]]);
        crate::report::csv_table(&["tau", "t", "sigma", "c_tau"], rows)
    }
}

/// Outcome of matching a trajectory's `c_tau` against a soliton constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafConsistency {
    pub c: f64,
    pub found: bool,
    pub tau_bar: Option<f64>,
    pub t_bar: Option<f64>,
    /// `|n h'(t_bar) + c h(t_bar)^2|`.
    pub zeta_residual: Option<f64>,
    pub passed: bool,
}

pub const LEAF_TOL: f64 = 1e-8;

/// Finds the first `tau_bar` with `c_tau(tau_bar) = ctx.c` and checks that
/// its slice is a root of the slice soliton function `n h' + c h^2`.
pub fn leaf_consistency(ctx: &SolitonContext, traj: &FlowTrajectory) -> Result<LeafConsistency> {
    let c = ctx.c;
    let absent = LeafConsistency { c, found: false, tau_bar: None, t_bar: None, zeta_residual: None, passed: false };
    let g = |tau: f64| traj.c_tau_at(tau).map(|v| v - c).unwrap_or(f64::NAN);
    let mut tau_bar = None;
    for k in 0..traj.len() {
        let gk = traj.c_taus[k] - c;
        if gk == 0.0 {
            tau_bar = Some(traj.taus[k]);
            break;
        }
        if k + 1 < traj.len() {
            let gn = traj.c_taus[k + 1] - c;
            if gn != 0.0 && gk.signum() != gn.signum() {
                tau_bar = Some(bisect(&g, traj.taus[k], traj.taus[k + 1], 1e-15)?);
                break;
            }
        }
    }
    let Some(tau_bar) = tau_bar else {
        return Ok(absent);
    };
    let t_bar = traj.t_at(tau_bar)?;
    let p = &traj.space().profile;
    let zeta = (ctx.space.n as f64 * p.h1(t_bar) + c * p.h(t_bar).powi(2)).abs();
    Ok(LeafConsistency {
        c,
        found: true,
        tau_bar: Some(tau_bar),
        t_bar: Some(t_bar),
        zeta_residual: Some(zeta),
        passed: zeta <= LEAF_TOL,
    })
}

/// Sup-norm difference between an integrated trajectory and the closed form.
pub fn closed_form_error(traj: &FlowTrajectory, exact: &ClosedFormFlow) -> Result<f64> {
    let mut worst = 0.0f64;
    for (tau, t) in traj.taus.iter().zip(&traj.ts) {
        worst = worst.max((exact.eval(*tau)? - t).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpingProfile;
    use std::f64::consts::PI;

    fn spec(p: WarpingProfile, n: usize, t_init: f64, lo: f64, hi: f64, c: f64) -> FlowSpec {
        let kappa = if p.kind() == ProfileKind::Horospherical || p.kind() == ProfileKind::Product { 0.0 } else { 1.0 };
        let space = WarpedSpace::new(p, kappa, n).unwrap();
        FlowSpec { ctx: SolitonContext::new(space, c, n, t_init).unwrap(), t_init, tau_lo: lo, tau_hi: hi, step: DEFAULT_STEP }
    }

    #[test]
    fn closed_form_examples() {
        let e = ClosedFormFlow::new(ProfileKind::EuclideanCone, 2, 2.0).unwrap();
        assert_eq!(e.tau_max, 1.0);
        assert!((e.eval(0.75).unwrap() - 1.0).abs() < 1e-15);
        assert!(e.eval(1.0).is_err());
        let h = ClosedFormFlow::new(ProfileKind::Horospherical, 3, 0.0).unwrap();
        assert_eq!(h.eval(0.5).unwrap(), -1.5);
        let b = ClosedFormFlow::branches(ProfileKind::Equidistant, 2, 1f64.asinh()).unwrap();
        assert_eq!(b.len(), 2);
        let tau = 0.3;
        assert!((b[0].eval(tau).unwrap().sinh() - (-2.0 * tau).exp()).abs() < 1e-14);
        assert!((b[1].eval(tau).unwrap().sinh() + (-2.0 * tau).exp()).abs() < 1e-14);
    }

    #[test]
    fn euclidean_flow_matches_closed_form() {
        let traj = integrate_flow(&spec(WarpingProfile::euclidean_cone(), 2, 2.0, 0.0, 0.9, -1.0)).unwrap();
        let exact = ClosedFormFlow::new(ProfileKind::EuclideanCone, 2, 2.0).unwrap();
        assert!(closed_form_error(&traj, &exact).unwrap() <= 1e-8);
        assert!(!traj.halted);
    }

    #[test]
    fn spherical_and_product_flows() {
        let traj = integrate_flow(&spec(WarpingProfile::spherical(), 2, PI / 3.0, -0.2, 0.3, -1.0)).unwrap();
        for (tau, t) in traj.taus.iter().zip(&traj.ts) {
            assert!((t.cos() - 0.5 * (2.0 * tau).exp()).abs() < 1e-9);
        }
        let traj = integrate_flow(&spec(WarpingProfile::product(), 3, 0.4, -1.0, 1.0, -1.0)).unwrap();
        assert!(traj.ts.iter().all(|&t| t == 0.4));
        assert!(traj.c_taus.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn halts_near_the_boundary() {
        let traj = integrate_flow(&spec(WarpingProfile::euclidean_cone(), 2, 2.0, 0.0, 1.5, -1.0)).unwrap();
        assert!(traj.halted);
        assert!(traj.ts.iter().all(|&t| t > BOUNDARY_MARGIN));
    }

    #[test]
    fn c_tau_and_leaves() {
        let traj = integrate_flow(&spec(WarpingProfile::euclidean_cone(), 2, 2.0, 0.0, 0.9, -1.0)).unwrap();
        // t = sqrt(2) at tau = 0.5.
        assert!((traj.c_tau_at(0.5).unwrap() + 1.0).abs() < 1e-8);
        let s = spec(WarpingProfile::euclidean_cone(), 2, 2.0, 0.0, 0.9, -1.0);
        let leaf = leaf_consistency(&s.ctx, &traj).unwrap();
        assert!(leaf.passed);
        assert!((leaf.t_bar.unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert!(traj.c_tau_at(0.95).is_err());
    }

    #[test]
    fn rejects_bad_step() {
        let mut s = spec(WarpingProfile::euclidean_cone(), 2, 2.0, 0.0, 0.9, -1.0);
        s.step = 0.0;
        assert!(matches!(integrate_flow(&s), Err(Error::Config(_))));
    }
}
