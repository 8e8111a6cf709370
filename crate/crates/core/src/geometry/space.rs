//! Curvature of `I x_h P` with a fiber of constant curvature `kappa`.

use serde::Serialize;

use super::profile::WarpingProfile;
use crate::error::{Error, Result};

/// A tangent vector at a point with coordinate `t`, in an orthonormal frame
/// `{d_t, e_1, .., e_n}` adapted to the splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub radial: f64,
    pub fiber: Vec<f64>,
}

impl TangentVector {
    pub fn new(radial: f64, fiber: Vec<f64>) -> Self {
        TangentVector { radial, fiber }
    }

    /// `d_t` in a space with `n`-dimensional fiber.
    pub fn radial_unit(n: usize) -> Self {
        TangentVector { radial: 1.0, fiber: vec![0.0; n] }
    }

    /// The `i`-th fiber frame vector.
    pub fn fiber_unit(n: usize, i: usize) -> Self {
        let mut fiber = vec![0.0; n];
        fiber[i] = 1.0;
        TangentVector { radial: 0.0, fiber }
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        self.radial * other.radial + fiber_dot(&self.fiber, &other.fiber)
    }

    pub fn scaled(&self, k: f64) -> TangentVector {
        TangentVector { radial: k * self.radial, fiber: self.fiber.iter().map(|v| k * v).collect() }
    }
}

fn fiber_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The ambient manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedSpace {
    pub profile: WarpingProfile,
    pub kappa: f64,
    pub n: usize,
}

impl WarpedSpace {
    pub fn new(profile: WarpingProfile, kappa: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("fiber dimension must be positive"));
        }
        if !kappa.is_finite() {
            return Err(Error::config("fiber curvature must be finite"));
        }
        Ok(WarpedSpace { profile, kappa, n })
    }

    /// Euclidean `R^{n+1}` in polar form.
    pub fn euclidean(n: usize) -> Self {
        WarpedSpace { profile: WarpingProfile::euclidean_cone(), kappa: 1.0, n }
    }

    fn check_dims(&self, vs: &[&TangentVector]) -> Result<()> {
        if vs.iter().any(|v| v.fiber.len() != self.n) {
            return Err(Error::config(format!("tangent vectors must have {} fiber components", self.n)));
        }
        Ok(())
    }

    /// `<R(U,V)W, Z>` at the slice `t`. Sign convention: `<R(U,V)V,U>` is the
    /// sectional curvature of an orthonormal pair.
    pub fn riemann_component(
        &self,
        t: f64,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
        z: &TangentVector,
    ) -> Result<f64> {
        self.profile.check(t)?;
        self.check_dims(&[u, v, w, z])?;
        let p = &self.profile;
        let (h, h1) = (p.h(t), p.h1(t));
        let fiber_coef = (h1 * h1 - self.kappa) / (h * h);
        let radial_coef = p.h2_over_h(t);

        let (uw, vz) = (fiber_dot(&u.fiber, &w.fiber), fiber_dot(&v.fiber, &z.fiber));
        let (vw, uz) = (fiber_dot(&v.fiber, &w.fiber), fiber_dot(&u.fiber, &z.fiber));

        let fiber_part = fiber_coef * (uw * vz - vw * uz);
        let radial_part = radial_coef
            * (u.radial * w.radial * vz - v.radial * w.radial * uz - u.radial * z.radial * vw
                + v.radial * z.radial * uw);
        Ok(fiber_part + radial_part)
    }

    /// Sectional curvature of the plane spanned by `u, v`.
    pub fn sectional_curvature(&self, t: f64, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        let area2 = u.dot(u) * v.dot(v) - u.dot(v).powi(2);
        if area2 <= 1e-30 {
            return Err(Error::domain("sectional curvature of a degenerate plane"));
        }
        Ok(self.riemann_component(t, u, v, v, u)? / area2)
    }

    /// `Ric(Y, Z)` by contraction over the adapted frame.
    pub fn ricci(&self, t: f64, y: &TangentVector, z: &TangentVector) -> Result<f64> {
        let mut acc = self.riemann_component(t, &TangentVector::radial_unit(self.n), y, z, &TangentVector::radial_unit(self.n))?;
        for i in 0..self.n {
            let e = TangentVector::fiber_unit(self.n, i);
            acc += self.riemann_component(t, &e, y, z, &e)?;
        }
        Ok(acc)
    }

    /// `Ric(Z, X)` for the conformal field `X = h d_t`.
    pub fn ricci_radial(&self, t: f64, z: &TangentVector) -> Result<f64> {
        let x = TangentVector::radial_unit(self.n).scaled(self.profile.h(t));
        self.ricci(t, z, &x)
    }

    /// `Ric(N, N)` for a unit vector with `<N, d_t> = theta`, in closed form.
    pub fn ricci_unit(&self, t: f64, theta: f64) -> f64 {
        let p = &self.profile;
        let (h, h1) = (p.h(t), p.h1(t));
        let q = p.h2_over_h(t);
        let fiber_sec = if self.n > 1 { (self.n - 1) as f64 * (self.kappa - h1 * h1) / (h * h) } else { 0.0 };
        -(self.n as f64) * q * theta * theta + (-q + fiber_sec) * (1.0 - theta * theta)
    }

    /// `min{-h''/h, (kappa - h'^2)/h^2}`.
    pub fn varkappa(&self, t: f64) -> Result<f64> {
        self.profile.check(t)?;
        let p = &self.profile;
        let (h, h1) = (p.h(t), p.h1(t));
        Ok((-p.h2_over_h(t)).min((self.kappa - h1 * h1) / (h * h)))
    }

    /// The constant sectional curvature when the ambient is a space form.
    pub fn space_form_check(&self) -> Option<f64> {
        const TOL: f64 = 1e-8;
        let p = &self.profile;
        let mut value: Option<f64> = None;
        for t in p.sample_points(401) {
            let (h, h1) = (p.h(t), p.h1(t));
            let radial = -p.h2_over_h(t);
            let fiber = (self.kappa - h1 * h1) / (h * h);
            if !radial.is_finite() || !fiber.is_finite() || (radial - fiber).abs() > TOL {
                return None;
            }
            match value {
                None => value = Some(radial),
                Some(v) if (v - radial).abs() > TOL => return None,
                _ => {}
            }
        }
        value.map(|v| if v.abs() < TOL { 0.0 } else { v })
    }
}

/// Curvature summary of a space at one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceCurvature {
    pub t: f64,
    pub radial_sectional: f64,
    pub fiber_sectional: f64,
    pub varkappa: f64,
}

impl WarpedSpace {
    pub fn slice_curvature(&self, t: f64) -> Result<SliceCurvature> {
        let radial_sectional = -self.profile.h2_over_h(t);
        let (h, h1) = (self.profile.h(t), self.profile.h1(t));
        Ok(SliceCurvature {
            t,
            radial_sectional,
            fiber_sectional: (self.kappa - h1 * h1) / (h * h),
            varkappa: self.varkappa(t)?,
        })
    }
}
