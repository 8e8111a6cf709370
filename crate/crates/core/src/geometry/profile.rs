//! Warping functions `h` of warped products `I x_h P`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::numerics::fd::{deriv5, second_deriv5};

/// Points closer than this to a finite endpoint of `I` are rejected.
pub const ENDPOINT_GUARD: f64 = 1e-9;

/// Named warping functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `h = t` on `(0, inf)`: Euclidean space in polar form, or a cone over `P`.
    EuclideanCone,
    /// `h = e^t` on `R`: hyperbolic space foliated by horospheres.
    Horospherical,
    /// `h = sinh t` on `(0, inf)`: hyperbolic space by geodesic spheres.
    GeodesicSpherical,
    /// `h = cosh t` on `R`: hyperbolic space by equidistant hypersurfaces.
    Equidistant,
    /// `h = sin t` on `(0, pi)`: the round sphere by geodesic spheres.
    Spherical,
    /// `h = 1`: Riemannian product.
    Product,
    Custom,
}

impl ProfileKind {
    pub const CATALOG: [ProfileKind; 6] = [
        ProfileKind::EuclideanCone,
        ProfileKind::Horospherical,
        ProfileKind::GeodesicSpherical,
        ProfileKind::Equidistant,
        ProfileKind::Spherical,
        ProfileKind::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::EuclideanCone => "euclidean_cone",
            ProfileKind::Horospherical => "horospherical",
            ProfileKind::GeodesicSpherical => "geodesic_spherical",
            ProfileKind::Equidistant => "equidistant",
            ProfileKind::Spherical => "spherical",
            ProfileKind::Product => "product",
            ProfileKind::Custom => "custom",
        }
    }

    /// Fiber curvature `kappa` that makes `I x_h P` a space form.
    pub fn space_form_kappa(self) -> Option<f64> {
        match self {
            ProfileKind::EuclideanCone | ProfileKind::GeodesicSpherical | ProfileKind::Spherical => Some(1.0),
            ProfileKind::Horospherical | ProfileKind::Product => Some(0.0),
            ProfileKind::Equidistant => Some(-1.0),
            ProfileKind::Custom => None,
        }
    }

    fn default_interval(self) -> (f64, f64) {
        use std::f64::consts::PI;
        match self {
            ProfileKind::EuclideanCone | ProfileKind::GeodesicSpherical => (0.0, f64::INFINITY),
            ProfileKind::Spherical => (0.0, PI),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "euclidean_cone" | "euclidean" | "cone" => ProfileKind::EuclideanCone,
            "horospherical" => ProfileKind::Horospherical,
            "geodesic_spherical" => ProfileKind::GeodesicSpherical,
            "equidistant" => ProfileKind::Equidistant,
            "spherical" => ProfileKind::Spherical,
            "product" => ProfileKind::Product,
            "custom" => ProfileKind::Custom,
            other => return Err(Error::config(format!("unknown profile '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CustomForms {
    h: Expr,
    h1: Option<Expr>,
    h2: Option<Expr>,
}

/// The warping function with its first two derivatives on an open interval.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingProfile {
    kind: ProfileKind,
    lo: f64,
    hi: f64,
    custom: Option<CustomForms>,
}

impl WarpingProfile {
    /// A catalog profile on its natural interval.
    pub fn catalog(kind: ProfileKind) -> Result<Self> {
        if kind == ProfileKind::Custom {
            return Err(Error::config("custom profiles need closed-form expressions"));
        }
        let (lo, hi) = kind.default_interval();
        Ok(WarpingProfile { kind, lo, hi, custom: None })
    }

    pub fn euclidean_cone() -> Self {
        Self::catalog(ProfileKind::EuclideanCone).unwrap()
    }
    pub fn horospherical() -> Self {
        Self::catalog(ProfileKind::Horospherical).unwrap()
    }
    pub fn geodesic_spherical() -> Self {
        Self::catalog(ProfileKind::GeodesicSpherical).unwrap()
    }
    pub fn equidistant() -> Self {
        Self::catalog(ProfileKind::Equidistant).unwrap()
    }
    pub fn spherical() -> Self {
        Self::catalog(ProfileKind::Spherical).unwrap()
    }
    pub fn product() -> Self {
        Self::catalog(ProfileKind::Product).unwrap()
    }

    /// Restricts to a sub-interval of the natural one.
    pub fn with_interval(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::config(format!("interval ({lo}, {hi}) is empty")));
        }
        if self.kind != ProfileKind::Custom {
            let (nlo, nhi) = self.kind.default_interval();
            if lo < nlo || hi > nhi {
                return Err(Error::config(format!(
                    "interval ({lo}, {hi}) leaves the natural domain ({nlo}, {nhi}) of {}",
                    self.kind
                )));
            }
        }
        self.lo = lo;
        self.hi = hi;
        if self.custom.is_some() {
            self.validate_positive()?;
        }
        Ok(self)
    }

    /// A profile given by closed-form strings. Missing derivatives fall back
    /// to centered finite differences.
    pub fn custom(lo: f64, hi: f64, h: &str, h1: Option<&str>, h2: Option<&str>) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::config(format!("interval ({lo}, {hi}) is empty")));
        }
        let forms = CustomForms {
            h: Expr::parse(h)?,
            h1: h1.map(Expr::parse).transpose()?,
            h2: h2.map(Expr::parse).transpose()?,
        };
        let p = WarpingProfile { kind: ProfileKind::Custom, lo, hi, custom: Some(forms) };
        p.validate_positive()?;
        Ok(p)
    }

    fn validate_positive(&self) -> Result<()> {
        for t in self.sample_points(257) {
            let v = self.h(t);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("warping function is not positive at t = {t} (h = {v})")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// True when `t` lies in `I` and away from the finite endpoints.
    pub fn contains(&self, t: f64) -> bool {
        t.is_finite()
            && (self.lo == f64::NEG_INFINITY || t >= self.lo + ENDPOINT_GUARD)
            && (self.hi == f64::INFINITY || t <= self.hi - ENDPOINT_GUARD)
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "t = {t} is outside the interval ({}, {}) of the {} profile",
                self.lo, self.hi, self.kind
            )))
        }
    }

    /// `h(t)` without a domain check.
    pub fn h(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::EuclideanCone => t,
            ProfileKind::Horospherical => t.exp(),
            ProfileKind::GeodesicSpherical => t.sinh(),
            ProfileKind::Equidistant => t.cosh(),
            ProfileKind::Spherical => t.sin(),
            ProfileKind::Product => 1.0,
            ProfileKind::Custom => self.custom.as_ref().map_or(f64::NAN, |c| c.h.eval(t)),
        }
    }

    /// `h'(t)` without a domain check.
    pub fn h1(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::EuclideanCone => 1.0,
            ProfileKind::Horospherical => t.exp(),
            ProfileKind::GeodesicSpherical => t.cosh(),
            ProfileKind::Equidistant => t.sinh(),
            ProfileKind::Spherical => t.cos(),
            ProfileKind::Product => 0.0,
            ProfileKind::Custom => {
                let c = self.custom.as_ref().expect("custom forms");
                match &c.h1 {
                    Some(e) => e.eval(t),
                    None => deriv5(&|x| c.h.eval(x), t, fd_step(t)),
                }
            }
        }
    }

    /// `h''(t)` without a domain check.
    pub fn h2(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::EuclideanCone | ProfileKind::Product => 0.0,
            ProfileKind::Horospherical => t.exp(),
            ProfileKind::GeodesicSpherical => t.sinh(),
            ProfileKind::Equidistant => t.cosh(),
            ProfileKind::Spherical => -t.sin(),
            ProfileKind::Custom => {
                let c = self.custom.as_ref().expect("custom forms");
                match (&c.h2, &c.h1) {
                    (Some(e), _) => e.eval(t),
                    (None, Some(e1)) => deriv5(&|x| e1.eval(x), t, fd_step(t)),
                    // A second difference at the first-derivative step loses
                    // half the digits to rounding, so it uses a coarser step.
                    (None, None) => second_deriv5(&|x| c.h.eval(x), t, 1e-3 * t.abs().max(1.0)),
                }
            }
        }
    }

    /// `h''/h`, with the removable `0/0` of flat profiles resolved to zero.
    pub fn h2_over_h(&self, t: f64) -> f64 {
        let h2 = self.h2(t);
        if h2 == 0.0 {
            0.0
        } else {
            h2 / self.h(t)
        }
    }

    /// An antiderivative of `h` normalized so that the catalog `chi` satisfies
    /// `eta' = chi(eta)^{1/2}`, with that `chi`. `None` outside the catalog.
    pub fn potential_ode(&self) -> Option<(fn(f64) -> f64, fn(f64) -> f64)> {
        match self.kind {
            ProfileKind::EuclideanCone => Some((|t| 0.5 * t * t, |x| 2.0 * x)),
            ProfileKind::Horospherical => Some((f64::exp, |x| x * x)),
            ProfileKind::GeodesicSpherical => Some((f64::cosh, |x| x * x - 1.0)),
            ProfileKind::Spherical => Some((|t| 1.0 - t.cos(), |x| 2.0 * x - x * x)),
            _ => None,
        }
    }

    /// Evenly spaced points strictly inside `I`. Infinite ends are clipped
    /// to `[-10, 10]`.
    pub fn sample_points(&self, count: usize) -> Vec<f64> {
        let lo = if self.lo.is_finite() { self.lo } else { -10.0 };
        let hi = if self.hi.is_finite() { self.hi } else { 10.0 };
        let (lo, hi) = if lo >= hi { (self.lo, self.lo + 10.0) } else { (lo, hi) };
        let margin = 1e-3 * (hi - lo);
        let (a, b) = (lo + margin, hi - margin);
        let n = count.max(2);
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }
}

fn fd_step(t: f64) -> f64 {
    1e-5 * t.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_derivatives_match_finite_differences() {
        for kind in ProfileKind::CATALOG {
            let p = WarpingProfile::catalog(kind).unwrap();
            for t in p.sample_points(40) {
                let d = 1e-4;
                let fd1 = (p.h(t + d) - p.h(t - d)) / (2.0 * d);
                let fd2 = (p.h1(t + d) - p.h1(t - d)) / (2.0 * d);
                let scale = p.h(t).abs().max(1.0) * p.h1(t).abs().max(1.0);
                assert!((fd1 - p.h1(t)).abs() < 1e-6 * scale, "{kind} h' at {t}");
                assert!((fd2 - p.h2(t)).abs() < 1e-6 * scale, "{kind} h'' at {t}");
            }
        }
    }

    #[test]
    fn custom_fallbacks() {
        let p = WarpingProfile::custom(0.1, 3.0, "sin(t)", None, None).unwrap();
        let t = 1.3;
        assert!((p.h1(t) - t.cos()).abs() < 1e-10);
        assert!((p.h2(t) + t.sin()).abs() < 1e-8);
        let q = WarpingProfile::custom(0.1, 3.0, "t^2", Some("2*t"), None).unwrap();
        assert!((q.h2(t) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn custom_must_be_positive() {
        assert!(WarpingProfile::custom(-1.0, 1.0, "t", None, None).is_err());
    }

    #[test]
    fn endpoint_guard() {
        let p = WarpingProfile::spherical();
        assert!(p.check(1e-10).is_err());
        assert!(p.check(std::f64::consts::PI).is_err());
        assert!(p.check(1e-8).is_ok());
        assert!(WarpingProfile::horospherical().check(-1e6).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for kind in ProfileKind::CATALOG {
            assert_eq!(kind.name().parse::<ProfileKind>().unwrap(), kind);
        }
    }

    #[test]
    fn space_form_pairings() {
        use crate::geometry::WarpedSpace;
        for kind in ProfileKind::CATALOG {
            let kappa = kind.space_form_kappa().unwrap();
            let s = WarpedSpace::new(WarpingProfile::catalog(kind).unwrap(), kappa, 2).unwrap();
            assert!(s.space_form_check().is_some(), "{kind}");
        }
        assert_eq!(ProfileKind::Custom.space_form_kappa(), None);
    }
}
