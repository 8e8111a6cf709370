//! The soliton equation data `(space, c, m, t0)` and the slice quantities
//! derived from it.

use serde::Serialize;

use super::space::WarpedSpace;
use crate::error::{Error, Result};
use crate::numerics::quadrature::{adaptive_simpson, DEFAULT_TOL};
use crate::numerics::roots::{newton_polish, scan_roots, Root, ScanOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonContext {
    pub space: WarpedSpace,
    /// Soliton constant in `c X^perp = H`.
    pub c: f64,
    /// Dimension of the soliton.
    pub m: usize,
    /// Base point of the potential.
    pub t0: f64,
}

/// A slice that is itself a soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leaf {
    pub t_bar: f64,
    pub zeta_residual: f64,
    pub tangential: bool,
}

impl SolitonContext {
    /// `t0` may sit on a finite endpoint of `I` so that potentials such as
    /// `t^2/2` can be based at the cone tip.
    pub fn new(space: WarpedSpace, c: f64, m: usize, t0: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::config("soliton constant c must be finite and nonzero"));
        }
        if m == 0 || m > space.n {
            return Err(Error::config(format!("soliton dimension m = {m} must lie in 1..={}", space.n)));
        }
        let (lo, hi) = space.profile.interval();
        if !t0.is_finite() || t0 < lo || t0 > hi {
            return Err(Error::config(format!("base point t0 = {t0} lies outside [{lo}, {hi}]")));
        }
        Ok(SolitonContext { space, c, m, t0 })
    }

    /// Base point placed at `t0 = 0`, or at the lower endpoint when `0` is not in `I`.
    pub fn with_default_base(space: WarpedSpace, c: f64, m: usize) -> Result<Self> {
        let (lo, hi) = space.profile.interval();
        let t0 = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { lo };
        Self::new(space, c, m, t0)
    }

    fn profile(&self) -> &super::profile::WarpingProfile {
        &self.space.profile
    }

    /// `int_{t0}^t h`.
    pub fn eta_hat(&self, t: f64) -> Result<f64> {
        self.profile().check(t)?;
        let p = self.profile();
        adaptive_simpson(|s| p.h(s), self.t0, t, DEFAULT_TOL)
    }

    /// `int_{t0}^t 1/h`, the parameter in which slice flows are translations.
    pub fn flow_param(&self, t: f64) -> Result<f64> {
        self.profile().check(t)?;
        let p = self.profile();
        if !p.contains(self.t0) {
            return Err(Error::domain(format!(
                "1/h is not integrable from the endpoint t0 = {}; choose an interior base point",
                self.t0
            )));
        }
        adaptive_simpson(|s| 1.0 / p.h(s), self.t0, t, DEFAULT_TOL)
    }

    /// `m h'(t) + c h(t)^2`.
    pub fn soliton_function(&self, t: f64) -> Result<f64> {
        self.profile().check(t)?;
        Ok(self.zeta(t))
    }

    pub(crate) fn zeta(&self, t: f64) -> f64 {
        let p = self.profile();
        self.m as f64 * p.h1(t) + self.c * p.h(t).powi(2)
    }

    pub(crate) fn zeta_prime(&self, t: f64) -> f64 {
        let p = self.profile();
        self.m as f64 * p.h2(t) + 2.0 * self.c * p.h(t) * p.h1(t)
    }

    /// Roots of the soliton function in `[lo, hi]`, ascending.
    pub fn soliton_leaves(&self, lo: f64, hi: f64) -> Result<Vec<Leaf>> {
        if !(hi > lo) {
            return Err(Error::domain(format!("empty bracket [{lo}, {hi}]")));
        }
        self.profile().check(lo)?;
        self.profile().check(hi)?;
        let f = |t: f64| self.zeta(t);
        let df = |t: f64| self.zeta_prime(t);
        let roots: Vec<Root> = scan_roots(&f, &df, lo, hi, ScanOptions::default())?;
        Ok(roots
            .into_iter()
            .map(|r| {
                let mut t = r.t;
                if !r.tangential {
                    for _ in 0..3 {
                        t = newton_polish(&f, &df, t, lo, hi);
                    }
                }
                Leaf { t_bar: t, zeta_residual: f(t).abs(), tangential: r.tangential }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::profile::WarpingProfile;

    fn ctx(p: WarpingProfile, c: f64, m: usize, t0: f64) -> SolitonContext {
        SolitonContext::new(WarpedSpace::new(p, 1.0, m.max(2)).unwrap(), c, m, t0).unwrap()
    }

    #[test]
    fn potentials() {
        let e = ctx(WarpingProfile::euclidean_cone(), -1.0, 2, 0.0);
        assert!((e.eta_hat(2.0).unwrap() - 2.0).abs() < 1e-12);
        let h = ctx(WarpingProfile::horospherical(), -1.0, 2, 0.0);
        assert!((h.eta_hat(1.0).unwrap() - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        let s = ctx(WarpingProfile::spherical(), -1.0, 2, std::f64::consts::FRAC_PI_2);
        let t = std::f64::consts::PI - 1e-3;
        assert!((s.eta_hat(t).unwrap() + t.cos()).abs() < 1e-10);
    }

    #[test]
    fn flow_parameters() {
        let h = ctx(WarpingProfile::horospherical(), -1.0, 2, 0.0);
        assert!((h.flow_param(0.7).unwrap() - (1.0 - (-0.7f64).exp())).abs() < 1e-12);
        let p = ctx(WarpingProfile::product(), -1.0, 2, 0.3);
        assert!((p.flow_param(2.0).unwrap() - 1.7).abs() < 1e-12);
        let e = ctx(WarpingProfile::euclidean_cone(), -1.0, 2, 1.0);
        assert!((e.flow_param(3.0).unwrap() - 3f64.ln()).abs() < 1e-12);
        let tip = ctx(WarpingProfile::euclidean_cone(), -1.0, 2, 0.0);
        assert!(tip.flow_param(1.0).is_err());
    }

    #[test]
    fn leaves() {
        let e = ctx(WarpingProfile::euclidean_cone(), -1.0, 2, 0.0);
        let l = e.soliton_leaves(0.1, 10.0).unwrap();
        assert_eq!(l.len(), 1);
        assert!((l[0].t_bar - 2f64.sqrt()).abs() < 1e-12 && l[0].zeta_residual <= 1e-12);

        let g = ctx(WarpingProfile::geodesic_spherical(), -1.0, 2, 0.0);
        let l = g.soliton_leaves(0.1, 10.0).unwrap();
        assert_eq!(l.len(), 1);
        assert!((l[0].t_bar - (1.0 + 2f64.sqrt()).acosh()).abs() < 1e-12);

        let p = ctx(WarpingProfile::product(), -1.0, 2, 0.0);
        assert!(p.soliton_leaves(0.1, 10.0).unwrap().is_empty());
        assert!(p.soliton_leaves(1.0, 1.0).is_err());
    }

    #[test]
    fn zeta_examples() {
        let h = ctx(WarpingProfile::horospherical(), -3.0, 3, 0.0);
        assert!(h.soliton_function(0.0).unwrap().abs() < 1e-15);
        let p = ctx(WarpingProfile::product(), -1.0, 4, 0.0);
        assert_eq!(p.soliton_function(5.0).unwrap(), -1.0);
    }

    #[test]
    fn rejects_bad_context() {
        let s = WarpedSpace::euclidean(2);
        assert!(SolitonContext::new(s.clone(), 0.0, 2, 1.0).is_err());
        assert!(SolitonContext::new(s.clone(), -1.0, 3, 1.0).is_err());
        assert!(SolitonContext::new(s, -1.0, 2, -1.0).is_err());
    }
}
