//! Codimension-one soliton samples with the pointwise fields the identities
//! consume.
//!
//! Every sample reduces to one parameter: a single node for slices, arclength
//! for rotational profiles, the graph coordinate for 1-D graphs. Each scalar
//! field carries a jet `(value, d/ds, Laplace-Beltrami)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{SolitonContext, WarpedSpace, WarpingProfile};
use crate::graph::{GraphGrid, Topology};
use crate::numerics::fd::diff2;
use crate::rotational::{ProfileCurve, StopReason};

/// Below this `min |H|` the quotient `|A|^2/H^2` is not formed.
pub const QUOTIENT_MIN_H: f64 = 1e-6;
/// Finite-difference rotational nodes closer than this to the axis are not
/// checked: the orbit curvature `-cos(theta)/r` amplifies rounding in `theta`
/// by `1/r`, and Laplacians of curvature divide it by `ds^2` again.
pub const CAP_RADIUS: f64 = 0.1;
/// Nodes this close to an open end are not checked, because curvature there
/// comes from one-sided stencils.
pub const END_MARGIN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Slice,
    Rotational,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    /// Closed manifold.
    Compact,
    /// Complete and noncompact.
    Complete,
    /// A finite piece of a larger soliton.
    Partial,
}

/// Value, arclength derivative and Laplacian of a scalar field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jet {
    pub value: Vec<f64>,
    pub ds: Vec<f64>,
    pub lap: Vec<f64>,
}

impl Jet {
    fn constant(v: f64, n: usize) -> Self {
        Jet { value: vec![v; n], ds: vec![0.0; n], lap: vec![0.0; n] }
    }

    /// `Delta_{-c eta} f = Delta f + c <grad eta, grad f>` at node `i`.
    pub fn drift_lap(&self, c: f64, eta: &Jet, i: usize) -> f64 {
        self.lap[i] + c * eta.ds[i] * self.ds[i]
    }
}

#[derive(Debug, Clone)]
pub struct ImmersionSample {
    pub label: String,
    pub kind: SampleKind,
    pub extent: Extent,
    pub ctx: SolitonContext,
    /// Fields are exact rather than finite differences.
    pub analytic: bool,
    /// Grid parameter; zero for slices.
    pub spacing: f64,
    /// Intrinsic coordinate of each node.
    pub s: Vec<f64>,
    /// `pi o psi`.
    pub t: Vec<f64>,
    /// `<d_t, N>`.
    pub theta: Vec<f64>,
    pub eta: Jet,
    pub mean: Jet,
    pub mean_sq: Jet,
    pub norm2: Jet,
    /// `|A|^2 / H^2` when `H` stays away from zero.
    pub quotient: Option<Jet>,
    /// Principal curvature along the reduced direction.
    pub k_profile: Vec<f64>,
    /// Principal curvature of multiplicity `m - 1`.
    pub k_orbit: Vec<f64>,
    /// `|nabla A|^2`.
    pub grad_a2: Vec<f64>,
    /// Riemannian measure carried by each node.
    pub weights: Vec<f64>,
    /// Nodes where every jet is defined.
    pub valid: Vec<bool>,
    /// Node from which intrinsic distance is measured.
    pub origin: Option<usize>,
    /// Measure of the unit orbit sphere `S^{m-1}`.
    pub orbit_area: f64,
    /// Orbit radius per node for rotational samples.
    pub orbit_radius: Option<Vec<f64>>,
    /// Whether the first and last nodes lie on the axis of rotation.
    pub poles: (bool, bool),
}

/// Area of the unit sphere `S^k`.
pub fn sphere_area(k: usize) -> f64 {
    use std::f64::consts::PI;
    let (mut a, start) = if k.is_multiple_of(2) { (2.0, 0) } else { (2.0 * PI, 1) };
    let mut j = start;
    while j < k {
        j += 2;
        a *= 2.0 * PI / (j - 1) as f64;
    }
    a
}

fn euclidean_ctx(m: usize, c: f64) -> Result<SolitonContext> {
    SolitonContext::new(WarpedSpace::euclidean(m), c, m, 0.0)
}

fn check_codim_one(ctx: &SolitonContext) -> Result<()> {
    if ctx.m != ctx.space.n {
        return Err(Error::config(format!(
            "samples are hypersurfaces: m = {} must equal the fiber dimension n = {}",
            ctx.m, ctx.space.n
        )));
    }
    Ok(())
}

/// Potential `eta` in closed form when the catalog provides one.
fn eta_fn(ctx: &SolitonContext) -> impl Fn(f64) -> Result<f64> + '_ {
    let canon = ctx.space.profile.potential_ode().map(|(f, _)| f);
    move |t| match canon {
        Some(f) => Ok(f(t) - f(ctx.t0)),
        None => ctx.eta_hat(t),
    }
}

impl ImmersionSample {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_sup(&self) -> f64 {
        self.t.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn t_inf(&self) -> f64 {
        self.t.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn valid_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.valid[i])
    }

    /// The slice `{t_bar} x P` with normal `d_t`.
    pub fn slice(ctx: &SolitonContext, t_bar: f64) -> Result<Self> {
        check_codim_one(ctx)?;
        let p = &ctx.space.profile;
        p.check(t_bar)?;
        let mf = ctx.m as f64;
        let k = -p.h1(t_bar) / p.h(t_bar);
        let h = mf * k;
        let eta = eta_fn(ctx)(t_bar)?;
        let extent = if ctx.space.kappa > 0.0 { Extent::Compact } else { Extent::Complete };
        let quotient = (h.abs() > QUOTIENT_MIN_H).then(|| Jet::constant(1.0 / mf, 1));
        Ok(ImmersionSample {
            label: format!("slice t={t_bar} ({})", p.name()),
            kind: SampleKind::Slice,
            extent,
            ctx: ctx.clone(),
            analytic: true,
            spacing: 0.0,
            s: vec![0.0],
            t: vec![t_bar],
            theta: vec![1.0],
            eta: Jet::constant(eta, 1),
            mean: Jet::constant(h, 1),
            mean_sq: Jet::constant(h * h, 1),
            norm2: Jet::constant(mf * k * k, 1),
            quotient,
            k_profile: vec![k],
            k_orbit: vec![k],
            grad_a2: vec![0.0],
            weights: vec![1.0],
            valid: vec![true],
            origin: Some(0),
            orbit_area: 0.0,
            orbit_radius: None,
            poles: (false, false),
        })
    }

    /// Shared scaffolding for the exact rotational solitons of `R^{m+1}`.
    #[allow(clippy::too_many_arguments)]
    fn exact_rotational(
        label: String,
        curve: &ProfileCurve,
        extent: Extent,
        eta_s: Vec<f64>,
        eta_lap: Vec<f64>,
        k1: f64,
        k2: f64,
        origin: Option<usize>,
    ) -> Result<Self> {
        let (m, c) = (curve.m, curve.c);
        let ctx = euclidean_ctx(m, c)?;
        let n = curve.len();
        let mf = m as f64;
        let h = k1 + (mf - 1.0) * k2;
        let a2 = k1 * k1 + (mf - 1.0) * k2 * k2;
        let t: Vec<f64> = (0..n).map(|i| curve.x[i].hypot(curve.r[i])).collect();
        let theta = (0..n).map(|i| if t[i] > 0.0 { curve.support(i) / t[i] } else { 0.0 }).collect();
        let eta = Jet { value: t.iter().map(|v| 0.5 * v * v).collect(), ds: eta_s, lap: eta_lap };
        let quotient = (h.abs() > QUOTIENT_MIN_H).then(|| Jet::constant(a2 / (h * h), n));
        let orbit_area = sphere_area(m - 1);
        Ok(ImmersionSample {
            label,
            kind: SampleKind::Rotational,
            extent,
            ctx,
            analytic: true,
            spacing: curve.spacing,
            s: curve.s.clone(),
            t,
            theta,
            eta,
            mean: Jet::constant(h, n),
            mean_sq: Jet::constant(h * h, n),
            norm2: Jet::constant(a2, n),
            quotient,
            k_profile: vec![k1; n],
            k_orbit: vec![k2; n],
            grad_a2: vec![0.0; n],
            weights: rotational_weights(curve, orbit_area),
            valid: vec![true; n],
            origin,
            orbit_area,
            orbit_radius: Some(curve.r.clone()),
            poles: (curve.axis_start, curve.axis_end),
        })
    }

    /// The round shrinking sphere of radius `sqrt(-m/c)`, with exact fields.
    pub fn round_sphere(m: usize, c: f64, samples: usize) -> Result<Self> {
        let curve = ProfileCurve::sphere(m, c, samples)?;
        let radius = (-(m as f64) / c).sqrt();
        let n = curve.len();
        Self::exact_rotational(
            format!("round sphere m={m} c={c}"),
            &curve,
            Extent::Compact,
            vec![0.0; n],
            vec![0.0; n],
            1.0 / radius,
            1.0 / radius,
            Some(0),
        )
    }

    /// A piece of the shrinking cylinder `S^{m-1} x R`, with exact fields.
    pub fn cylinder(m: usize, c: f64, length: f64, samples: usize) -> Result<Self> {
        let curve = ProfileCurve::cylinder(m, c, length, samples)?;
        let radius = (-((m - 1) as f64) / c).sqrt();
        let n = curve.len();
        Self::exact_rotational(
            format!("cylinder m={m} c={c}"),
            &curve,
            Extent::Partial,
            curve.x.clone(),
            vec![1.0; n],
            0.0,
            -1.0 / radius,
            Some(n / 2),
        )
    }

    /// A disc of the hyperplane through the origin, with exact fields.
    pub fn plane(m: usize, c: f64, radius: f64, samples: usize) -> Result<Self> {
        let curve = ProfileCurve::plane(m, c, radius, samples)?;
        let n = curve.len();
        Self::exact_rotational(
            format!("plane m={m} c={c}"),
            &curve,
            Extent::Partial,
            curve.s.clone(),
            vec![m as f64; n],
            0.0,
            0.0,
            Some(0),
        )
    }

    /// Finite-difference fields on a rotational profile in `R^{m+1}`.
    ///
    /// First derivatives are second-order central differences; Laplacians use
    /// `f'' + (m-1)(r'/r) f'` off the axis and `2m (f_1 - f_0)/ds^2` on it.
    pub fn from_curve(curve: &ProfileCurve, label: impl Into<String>) -> Result<Self> {
        let n = curve.len();
        if n < 5 {
            return Err(Error::config("profile samples need at least 5 nodes"));
        }
        let (m, c, ds) = (curve.m, curve.c, curve.spacing);
        let ctx = euclidean_ctx(m, c)?;
        let mf = m as f64;
        let ff = curve.fundamental_forms()?;

        let t: Vec<f64> = (0..n).map(|i| curve.x[i].hypot(curve.r[i])).collect();
        let theta = (0..n).map(|i| if t[i] > 0.0 { curve.support(i) / t[i] } else { 0.0 }).collect();
        let eta_s: Vec<f64> = (0..n)
            .map(|i| {
                let (sn, cs) = curve.theta[i].sin_cos();
                curve.x[i] * cs + curve.r[i] * sn
            })
            .collect();

        let ops = ProfileOps { curve, ds, mf };
        let valid: Vec<bool> =
            (0..n).map(|i| i >= END_MARGIN && i + END_MARGIN < n && curve.r[i] >= CAP_RADIUS).collect();

        let eta_v: Vec<f64> = t.iter().map(|v| 0.5 * v * v).collect();
        let eta = Jet { lap: ops.lap_from_derivative(&eta_v, &eta_s), value: eta_v, ds: eta_s };

        let h_sq: Vec<f64> = ff.mean.iter().map(|h| h * h).collect();
        let mean = ops.jet(ff.mean.clone());
        let mean_sq = ops.jet(h_sq);
        let norm2 = ops.jet(ff.norm2.clone());
        let min_h = (0..n).filter(|&i| valid[i]).map(|i| ff.mean[i].abs()).fold(f64::INFINITY, f64::min);
        let quotient = (min_h > QUOTIENT_MIN_H)
            .then(|| ops.jet((0..n).map(|i| ff.norm2[i] / (ff.mean[i] * ff.mean[i])).collect()));

        let k1s = ops.derivative(&ff.k_profile);
        let k2s = ops.derivative(&ff.k_orbit);
        let grad_a2 = (0..n).map(|i| k1s[i] * k1s[i] + 3.0 * (mf - 1.0) * k2s[i] * k2s[i]).collect();

        let closed = curve.axis_start && (curve.axis_end || curve.stop == StopReason::AxisReturn);
        let orbit_area = sphere_area(m - 1);
        Ok(ImmersionSample {
            label: label.into(),
            kind: SampleKind::Rotational,
            extent: if closed { Extent::Compact } else { Extent::Partial },
            ctx,
            analytic: false,
            spacing: ds,
            s: curve.s.clone(),
            t,
            theta,
            eta,
            mean,
            mean_sq,
            norm2,
            quotient,
            k_profile: ff.k_profile,
            k_orbit: ff.k_orbit,
            grad_a2,
            weights: rotational_weights(curve, orbit_area),
            valid,
            origin: Some(0),
            orbit_area,
            orbit_radius: Some(curve.r.clone()),
            poles: (curve.axis_start, curve.axis_end),
        })
    }

    /// Finite-difference fields on a 1-D translator graph `t = u(x)` in the
    /// product `R x R`. The Laplacian is the divergence form
    /// `W^{-1} d/dx (W^{-1} df/dx)` with face slopes.
    pub fn from_graph(grid: &GraphGrid, c: f64, label: impl Into<String>) -> Result<Self> {
        if grid.dim != 1 || grid.topology != Topology::Dirichlet {
            return Err(Error::Unsupported("graph samples are built on 1-D Dirichlet grids".into()));
        }
        let n = grid.u.len();
        if n < 5 {
            return Err(Error::config("graph samples need at least 5 nodes"));
        }
        let space = WarpedSpace::new(WarpingProfile::product(), 0.0, 1)?;
        let ctx = SolitonContext::new(space, c, 1, 0.0)?;
        let dx = grid.spacing(0);
        let u = &grid.u;
        let ux = diff2(u, dx);
        let mut uxx = vec![0.0; n];
        for i in 1..n - 1 {
            uxx[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
        }
        uxx[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (dx * dx);
        uxx[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / (dx * dx);
        let w: Vec<f64> = ux.iter().map(|p| (1.0 + p * p).sqrt()).collect();
        let w_face: Vec<f64> = (0..n - 1).map(|i| (1.0 + ((u[i + 1] - u[i]) / dx).powi(2)).sqrt()).collect();
        let k: Vec<f64> = (0..n).map(|i| uxx[i] / w[i].powi(3)).collect();

        let ops = GraphOps { dx, w: &w, w_face: &w_face };
        let eta_s: Vec<f64> = (0..n).map(|i| ux[i] / w[i]).collect();
        let eta = Jet { lap: ops.lap(u), value: u.clone(), ds: eta_s };
        let mean = ops.jet(k.clone());
        let mean_sq = ops.jet(k.iter().map(|v| v * v).collect());
        let norm2 = mean_sq.clone();
        let ks = mean.ds.clone();
        let valid: Vec<bool> = (0..n).map(|i| i >= END_MARGIN && i + END_MARGIN < n).collect();
        let min_h = (END_MARGIN..n - END_MARGIN).map(|i| k[i].abs()).fold(f64::INFINITY, f64::min);
        let quotient = (min_h > QUOTIENT_MIN_H).then(|| Jet::constant(1.0, n));
        let mut weights: Vec<f64> = w.iter().map(|wi| wi * dx).collect();
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        let xs: Vec<f64> = (0..n).map(|i| grid.coords(i).0).collect();
        let origin = (0..n).min_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs()));
        Ok(ImmersionSample {
            label: label.into(),
            kind: SampleKind::Graph,
            extent: Extent::Partial,
            ctx,
            analytic: false,
            spacing: dx,
            s: xs,
            t: u.clone(),
            theta: w.iter().map(|wi| 1.0 / wi).collect(),
            eta,
            mean,
            mean_sq,
            norm2,
            quotient,
            k_profile: k,
            k_orbit: vec![0.0; n],
            grad_a2: ks.iter().map(|v| v * v).collect(),
            weights,
            valid,
            origin,
            orbit_area: 0.0,
            orbit_radius: None,
            poles: (false, false),
        })
    }

    /// Arclength speed `ds/dp` of the reduced coordinate at node `i`.
    pub fn speed(&self, i: usize) -> f64 {
        match self.kind {
            SampleKind::Graph => 1.0 / self.theta[i],
            _ => 1.0,
        }
    }
}

fn rotational_weights(curve: &ProfileCurve, orbit_area: f64) -> Vec<f64> {
    let n = curve.len();
    let (m, ds) = (curve.m, curve.spacing);
    let mut w: Vec<f64> = (0..n).map(|i| orbit_area * curve.r[i].powi(m as i32 - 1) * ds).collect();
    for i in [0, n - 1] {
        w[i] = if curve.is_axis(i) {
            orbit_area * (0.5 * ds).powi(m as i32) / m as f64
        } else {
            0.5 * w[i]
        };
    }
    w
}

struct ProfileOps<'a> {
    curve: &'a ProfileCurve,
    ds: f64,
    mf: f64,
}

impl ProfileOps<'_> {
    fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let mut d = diff2(f, self.ds);
        let n = f.len();
        for i in [0, n - 1] {
            if self.curve.is_axis(i) {
                d[i] = 0.0;
            }
        }
        d
    }

    fn axis_lap(&self, f: &[f64], i: usize) -> f64 {
        let j = if i == 0 { 1 } else { i - 1 };
        2.0 * self.mf * (f[j] - f[i]) / (self.ds * self.ds)
    }

    fn orbit_term(&self, i: usize, fs: f64) -> f64 {
        if self.mf == 1.0 {
            0.0
        } else {
            (self.mf - 1.0) * self.curve.theta[i].sin() / self.curve.r[i] * fs
        }
    }

    fn lap(&self, f: &[f64], fs: &[f64]) -> Vec<f64> {
        let n = f.len();
        let h2 = self.ds * self.ds;
        (0..n)
            .map(|i| {
                if self.curve.is_axis(i) {
                    self.axis_lap(f, i)
                } else if i == 0 || i + 1 == n {
                    f64::NAN
                } else {
                    (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2 + self.orbit_term(i, fs[i])
                }
            })
            .collect()
    }

    fn lap_from_derivative(&self, f: &[f64], fs: &[f64]) -> Vec<f64> {
        let n = f.len();
        (0..n)
            .map(|i| {
                if self.curve.is_axis(i) {
                    self.axis_lap(f, i)
                } else if i == 0 || i + 1 == n {
                    f64::NAN
                } else {
                    (fs[i + 1] - fs[i - 1]) / (2.0 * self.ds) + self.orbit_term(i, fs[i])
                }
            })
            .collect()
    }

    fn jet(&self, value: Vec<f64>) -> Jet {
        let ds = self.derivative(&value);
        Jet { lap: self.lap(&value, &ds), ds, value }
    }
}

struct GraphOps<'a> {
    dx: f64,
    w: &'a [f64],
    w_face: &'a [f64],
}

impl GraphOps<'_> {
    fn lap(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let h2 = self.dx * self.dx;
        (0..n)
            .map(|i| {
                if i == 0 || i + 1 == n {
                    f64::NAN
                } else {
                    ((f[i + 1] - f[i]) / self.w_face[i] - (f[i] - f[i - 1]) / self.w_face[i - 1]) / (self.w[i] * h2)
                }
            })
            .collect()
    }

    fn jet(&self, value: Vec<f64>) -> Jet {
        let d = diff2(&value, self.dx);
        let ds = d.iter().zip(self.w).map(|(a, w)| a / w).collect();
        Jet { lap: self.lap(&value), ds, value }
    }
}
