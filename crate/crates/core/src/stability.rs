//! The weighted stability operator `L = Delta_{-c eta} + |A|^2 + Ric(N,N) - c h'`
//! on reduced samples, its lowest eigenpairs, weighted volumes and the
//! parabolicity heuristic.
//!
//! Eigenvalues follow `L phi = -lambda phi` in ascending order, so the number
//! of negative `lambda` is the discrete index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::identities::sample::{ImmersionSample, SampleKind};
use crate::numerics::linalg::solve_tridiagonal;
use crate::numerics::quadrature::adaptive_simpson;

/// Inverse iteration shift below the current Rayleigh quotient.
pub const SHIFT: f64 = 1e-3;
pub const EIGEN_TOL: f64 = 1e-10;
pub const EIGEN_MAX_ITERS: usize = 200;
/// Parabolicity: tail exponents at or above this count as divergent.
pub const DIVERGENT_EXPONENT: f64 = -1.05;
pub const MIN_VOLUME_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Pole of a closed profile; no condition.
    Natural,
    Dirichlet,
}

/// Finite-volume form of `L` on the nodes `first..=last` of a sample:
/// `(L u)_i = (a_{i+1/2}(u_{i+1} - u_i) - a_{i-1/2}(u_i - u_{i-1})) / mu_i + V_i u_i`.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityOperator {
    pub label: String,
    pub boundary: (Boundary, Boundary),
    pub first: usize,
    pub last: usize,
    /// Weighted node measures `mu_i`.
    pub mass: Vec<f64>,
    /// Weighted face conductances `a_{i+1/2}`.
    pub face: Vec<f64>,
    pub potential: Vec<f64>,
}

/// `|A|^2 + Ric(N,N) - c h'` per node.
pub fn potential(sample: &ImmersionSample) -> Vec<f64> {
    let (c, space) = (sample.ctx.c, &sample.ctx.space);
    let mut space_form = None;
    (0..sample.len())
        .map(|i| {
            let (t, theta) = (sample.t[i], sample.theta[i]);
            let mut ric = space.ricci_unit(t, theta);
            if !ric.is_finite() {
                ric = space.n as f64 * *space_form.get_or_insert_with(|| space.space_form_check().unwrap_or(f64::NAN));
            }
            sample.norm2.value[i] + ric - c * space.profile.h1(t)
        })
        .collect()
}

/// Assembles `L` with Dirichlet conditions at open ends and none at poles.
pub fn assemble_l(sample: &ImmersionSample) -> Result<StabilityOperator> {
    let n = sample.len();
    if sample.kind == SampleKind::Slice || n < 3 {
        return Err(Error::config("the stability operator needs a rotational or graph sample with at least 3 nodes"));
    }
    let c = sample.ctx.c;
    let origin = sample.origin.unwrap_or(0);
    let eta_ref = sample.eta.value[origin];
    let weight = |eta: f64| (c * (eta - eta_ref)).exp();
    let dp = sample.spacing;
    let mf = sample.ctx.m as f64;

    let (mass, face) = match (&sample.kind, &sample.orbit_radius) {
        (SampleKind::Rotational, Some(r)) => {
            let orbit = |rr: f64| rr.powi(sample.ctx.m as i32 - 1);
            let face: Vec<f64> = (0..n - 1)
                .map(|i| {
                    weight(0.5 * (sample.eta.value[i] + sample.eta.value[i + 1])) * orbit(0.5 * (r[i] + r[i + 1])) / dp
                })
                .collect();
            let mut mass: Vec<f64> = (0..n).map(|i| weight(sample.eta.value[i]) * orbit(r[i]) * dp).collect();
            for (pole, i, j) in [(sample.poles.0, 0, 0), (sample.poles.1, n - 1, n - 2)] {
                if pole {
                    mass[i] = weight(sample.eta.value[i]) * orbit(0.5 * (r[j] + r[j + 1])) * dp / (2.0 * mf);
                }
            }
            (mass, face)
        }
        (SampleKind::Graph, _) => {
            let u = &sample.t;
            let face: Vec<f64> = (0..n - 1)
                .map(|i| {
                    let w_face = (1.0 + ((u[i + 1] - u[i]) / dp).powi(2)).sqrt();
                    weight(0.5 * (sample.eta.value[i] + sample.eta.value[i + 1])) / (w_face * dp)
                })
                .collect();
            let mass = (0..n).map(|i| weight(sample.eta.value[i]) * sample.speed(i) * dp).collect();
            (mass, face)
        }
        _ => return Err(Error::config("rotational samples must carry orbit radii")),
    };
    let boundary = (
        if sample.poles.0 { Boundary::Natural } else { Boundary::Dirichlet },
        if sample.poles.1 { Boundary::Natural } else { Boundary::Dirichlet },
    );
    let first = if sample.poles.0 { 0 } else { 1 };
    let last = if sample.poles.1 { n - 1 } else { n - 2 };
    Ok(StabilityOperator {
        label: sample.label.clone(),
        boundary,
        first,
        last,
        mass,
        face,
        potential: potential(sample),
    })
}

impl StabilityOperator {
    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.last + 1 - self.first
    }

    /// Restricts to the Dirichlet problem on nodes `first..=last`.
    pub fn window(&self, first: usize, last: usize) -> Result<Self> {
        if first < self.first || last > self.last || first >= last {
            return Err(Error::config(format!("window {first}..={last} is outside {}..={}", self.first, self.last)));
        }
        let mut op = self.clone();
        op.first = first;
        op.last = last;
        if first > self.first {
            op.boundary.0 = Boundary::Dirichlet;
        }
        if last < self.last {
            op.boundary.1 = Boundary::Dirichlet;
        }
        Ok(op)
    }

    fn row(&self, i: usize, left: f64, mid: f64, right: f64) -> f64 {
        let mut flux = 0.0;
        if i > 0 {
            flux -= self.face[i - 1] * (mid - left);
        }
        if i + 1 < self.mass.len() {
            flux += self.face[i] * (right - mid);
        }
        flux / self.mass[i] + self.potential[i] * mid
    }

    /// `L u` for `u` on the unknowns, zero outside.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|k| {
                let left = if k > 0 { u[k - 1] } else { 0.0 };
                let right = if k + 1 < d { u[k + 1] } else { 0.0 };
                self.row(self.first + k, left, u[k], right)
            })
            .collect()
    }

    /// `L f` at every unknown for a field given on all nodes of the sample.
    pub fn apply_full(&self, f: &[f64]) -> Vec<f64> {
        let n = self.mass.len();
        (self.first..=self.last)
            .map(|i| {
                let left = if i > 0 { f[i - 1] } else { 0.0 };
                let right = if i + 1 < n { f[i + 1] } else { 0.0 };
                self.row(i, left, f[i], right)
            })
            .collect()
    }

    /// `sum mu_i f_i g_i` over the unknowns.
    pub fn weighted_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        (0..self.dim()).map(|k| self.mass[self.first + k] * f[k] * g[k]).sum()
    }

    /// Symmetric tridiagonal `M^{1/2}(-L)M^{-1/2}` as `(diag, off)`.
    fn symmetric_form(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let n = self.mass.len();
        let diag = (0..d)
            .map(|k| {
                let i = self.first + k;
                let mut a = 0.0;
                if i > 0 {
                    a += self.face[i - 1];
                }
                if i + 1 < n {
                    a += self.face[i];
                }
                a / self.mass[i] - self.potential[i]
            })
            .collect();
        let off = (0..d.saturating_sub(1))
            .map(|k| {
                let i = self.first + k;
                -self.face[i] / (self.mass[i] * self.mass[i + 1]).sqrt()
            })
            .collect();
        (diag, off)
    }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal `(diag, off)`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for k in 0..diag.len() {
        let b2 = if k > 0 { off[k - 1] * off[k - 1] } else { 0.0 };
        q = diag[k] - x - if k > 0 { b2 / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[k].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..diag.len() {
        let r = if k > 0 { off[k - 1].abs() } else { 0.0 } + if k < off.len() { off[k].abs() } else { 0.0 };
        lo = lo.min(diag[k] - r);
        hi = hi.max(diag[k] + r);
    }
    (lo, hi)
}

/// The `j`-th smallest eigenvalue by bisection.
fn bisect_eigenvalue(diag: &[f64], off: &[f64], j: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub label: String,
    pub eigenvalues: Vec<f64>,
    /// `||L phi + lambda phi|| / ||phi||` in the weighted norm.
    pub residuals: Vec<f64>,
    /// Count of `lambda < 0` on the discrete domain.
    pub index: usize,
    pub iterations: Vec<usize>,
    /// Eigenfunctions on the unknowns, weighted-unit-normalized with a
    /// positive first nonzero entry.
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn tridiag_mul(diag: &[f64], off: &[f64], v: &[f64]) -> Vec<f64> {
    let d = diag.len();
    (0..d)
        .map(|k| {
            let mut s = diag[k] * v[k];
            if k > 0 {
                s += off[k - 1] * v[k - 1];
            }
            if k + 1 < d {
                s += off[k] * v[k + 1];
            }
            s
        })
        .collect()
}

/// The `k` lowest eigenpairs. Eigenvalues are bracketed by Sturm bisection,
/// then refined by inverse iteration from the all-ones vector with the shift
/// placed `SHIFT` below the bracketed eigenvalue.
pub fn eigen_lowest(op: &StabilityOperator, k: usize) -> Result<SpectrumReport> {
    let d = op.dim();
    if k == 0 || k > d {
        return Err(Error::config(format!("requested {k} eigenpairs of a {d}-dimensional operator")));
    }
    let (diag, off) = op.symmetric_form();
    let sqrt_mass: Vec<f64> = (0..d).map(|j| op.mass[op.first + j].sqrt()).collect();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut report = SpectrumReport {
        label: op.label.clone(),
        eigenvalues: Vec::new(),
        residuals: Vec::new(),
        index: sturm_count(&diag, &off, 0.0),
        iterations: Vec::new(),
        eigenfunctions: Vec::new(),
    };
    for j in 0..k {
        let target = bisect_eigenvalue(&diag, &off, j);
        let scale = target.abs().max(1.0);
        let shifted: Vec<f64> = diag.iter().map(|a| a - (target - SHIFT)).collect();
        let mut v = vec![1.0; d];
        let mut rho = target;
        let mut converged = false;
        let mut res = f64::INFINITY;
        let mut iters = 0;
        for it in 1..=EIGEN_MAX_ITERS {
            iters = it;
            for q in &found {
                let p: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
            }
            let nv = norm(&v);
            // A start vector orthogonal to the wanted eigenvector by symmetry is replaced by a ramp.
            if nv < 1e-300 || it == EIGEN_MAX_ITERS / 2 {
                v = (0..d).map(|i| 1.0 + i as f64 / d as f64).collect();
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let tv = tridiag_mul(&diag, &off, &v);
            rho = tv.iter().zip(&v).map(|(a, b)| a * b).sum();
            res = norm(&tv.iter().zip(&v).map(|(a, b)| a - rho * b).collect::<Vec<_>>());
            if res <= EIGEN_TOL * scale && (rho - target).abs() <= 1e-6 * scale {
                converged = true;
                break;
            }
            v = solve_tridiagonal(&off, &shifted, &off, &v)?;
        }
        if !converged {
            return Err(Error::NonConvergence { message: format!("inverse iteration for eigenpair {j}"), residual: res });
        }
        found.push(v.clone());
        let mut phi: Vec<f64> = v.iter().zip(&sqrt_mass).map(|(a, s)| a / s).collect();
        if let Some(first) = phi.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                phi.iter_mut().for_each(|x| *x = -*x);
            }
        }
        report.eigenvalues.push(rho);
        report.residuals.push(res);
        report.iterations.push(iters);
        report.eigenfunctions.push(phi);
    }
    Ok(report)
}

/// `sup |L H + (2 c h' + m h''/h) H|` over the checked nodes.
pub fn eigen_check_h(sample: &ImmersionSample, op: &StabilityOperator) -> f64 {
    let lh = op.apply_full(&sample.mean.value);
    let (c, mf, p) = (sample.ctx.c, sample.ctx.m as f64, &sample.ctx.space.profile);
    (op.first..=op.last)
        .zip(lh)
        .filter(|(i, _)| sample.valid[*i])
        .map(|(i, l)| {
            let t = sample.t[i];
            (l + (2.0 * c * p.h1(t) + mf * p.h2_over_h(t)) * sample.mean.value[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Sampled `log vol_f(dB_r)` and `vol_f(B_r)` with `f = -c eta`.
#[derive(Debug, Clone, Serialize)]
pub struct VolumeProfile {
    pub r: Vec<f64>,
    pub log_sphere: Vec<f64>,
    pub ball: Vec<f64>,
}

impl VolumeProfile {
    /// Tabulates a closed-form `log vol(dB_r)`; balls by quadrature from the first radius.
    pub fn from_log_fn<F: Fn(f64) -> f64>(r: Vec<f64>, log_sphere: F) -> Result<Self> {
        let ls: Vec<f64> = r.iter().map(|&x| log_sphere(x)).collect();
        let mut ball = Vec::with_capacity(r.len());
        let mut acc = 0.0;
        for k in 0..r.len() {
            if k > 0 {
                acc += adaptive_simpson(|x| log_sphere(x).exp(), r[k - 1], r[k], 1e-12)?;
            }
            ball.push(acc);
        }
        Ok(VolumeProfile { r, log_sphere: ls, ball })
    }
}

/// Four-point Lagrange interpolation on an increasing grid.
fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let j = xs.partition_point(|&a| a < x).saturating_sub(2).min(n - 4);
    let mut acc = 0.0;
    for a in j..j + 4 {
        let mut w = 1.0;
        for b in j..j + 4 {
            if a != b {
                w *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        acc += w * ys[a];
    }
    acc
}

/// Weighted sphere and ball volumes in intrinsic distance from the marked
/// origin. Rotational spheres are orbits; graph spheres are point pairs.
pub fn weighted_volume(sample: &ImmersionSample, r_grid: &[f64]) -> Result<VolumeProfile> {
    let origin = sample.origin.ok_or_else(|| Error::config("sample has no marked origin"))?;
    let n = sample.len();
    if sample.kind == SampleKind::Slice || n < 4 {
        return Err(Error::config("weighted volumes need a rotational or graph sample with at least 4 nodes"));
    }
    if r_grid.iter().any(|r| !r.is_finite() || *r < 0.0) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("radius grid must be nonnegative and strictly increasing"));
    }
    let c = sample.ctx.c;
    let arclength: Vec<f64> = match sample.kind {
        SampleKind::Graph => {
            let mut acc = vec![0.0; n];
            for i in 1..n {
                acc[i] = acc[i - 1] + (sample.s[i] - sample.s[i - 1]).hypot(sample.t[i] - sample.t[i - 1]);
            }
            acc
        }
        _ => sample.s.clone(),
    };
    let tol = 1e-12 * (arclength[n - 1] - arclength[0]);
    let s0 = arclength[origin];
    let log_point = |target: f64| -> Option<f64> {
        if target < arclength[0] - tol || target > arclength[n - 1] + tol {
            return None;
        }
        let p = lagrange4(&arclength, &sample.s, target);
        let log_weight = c * lagrange4(&sample.s, &sample.eta.value, p);
        Some(match &sample.orbit_radius {
            Some(r) => {
                let radius = lagrange4(&sample.s, r, p).max(0.0);
                sample.orbit_area.ln() + (sample.ctx.m - 1) as f64 * radius.ln() + log_weight
            }
            None => log_weight,
        })
    };
    let log_sphere = |r: f64| -> f64 {
        let targets: &[f64] = if r == 0.0 { &[s0] } else { &[s0 + r, s0 - r] };
        targets.iter().filter_map(|&x| log_point(x)).fold(f64::NEG_INFINITY, log_add)
    };
    VolumeProfile::from_log_fn(r_grid.to_vec(), log_sphere)
}

fn log_add(a: f64, b: f64) -> f64 {
    let top = a.max(b);
    if top == f64::NEG_INFINITY {
        top
    } else {
        top + ((a - top).exp() + (b - top).exp()).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParabolicityVerdict {
    /// Parabolic indicator.
    Divergent,
    /// Inconclusive.
    Convergent,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParabolicityReport {
    pub verdict: ParabolicityVerdict,
    /// Fitted `d log(1/vol(dB_r)) / d log r` over `[r_max/2, r_max]`.
    pub tail_exponent: f64,
    /// `log` of the integral of `1/vol(dB_r)` from `r_max/4` to the cutoffs `r_max/2, r_max`.
    pub log_partial_integrals: Vec<f64>,
    pub r_max: f64,
    /// The verdict extrapolates a finite tail and proves nothing.
    pub heuristic: bool,
}

fn log_trapezoid(r: &[f64], log_f: &[f64]) -> f64 {
    (1..r.len())
        .map(|k| log_add(log_f[k], log_f[k - 1]) + (0.5 * (r[k] - r[k - 1])).ln())
        .fold(f64::NEG_INFINITY, log_add)
}

/// Divergence of `int^infty dr / vol_f(dB_r)` judged by the log-log tail
/// slope of the integrand on `[r_max/2, r_max]`.
pub fn parabolicity_volume_test(vol: &VolumeProfile, r_max: f64) -> Result<ParabolicityReport> {
    let idx: Vec<usize> = (0..vol.r.len()).filter(|&k| vol.r[k] > 0.0 && vol.r[k] <= r_max * (1.0 + 1e-12)).collect();
    if idx.len() < MIN_VOLUME_SAMPLES {
        return Err(Error::config(format!(
            "parabolicity test needs at least {MIN_VOLUME_SAMPLES} samples up to r_max, got {}",
            idx.len()
        )));
    }
    let tail: Vec<usize> = idx.iter().copied().filter(|&k| vol.r[k] >= 0.5 * r_max).collect();
    if tail.len() < 2 {
        return Err(Error::config("parabolicity tail [r_max/2, r_max] has fewer than 2 samples"));
    }
    let xs: Vec<f64> = tail.iter().map(|&k| vol.r[k].ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|&k| -vol.log_sphere[k]).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let integrals = [0.5, 1.0]
        .iter()
        .map(|f| {
            let sel: Vec<usize> =
                idx.iter().copied().filter(|&k| vol.r[k] >= 0.25 * r_max && vol.r[k] <= f * r_max * (1.0 + 1e-12)).collect();
            let r: Vec<f64> = sel.iter().map(|&k| vol.r[k]).collect();
            let lf: Vec<f64> = sel.iter().map(|&k| -vol.log_sphere[k]).collect();
            log_trapezoid(&r, &lf)
        })
        .collect();
    Ok(ParabolicityReport {
        verdict: if slope >= DIVERGENT_EXPONENT { ParabolicityVerdict::Divergent } else { ParabolicityVerdict::Convergent },
        tail_exponent: slope,
        log_partial_integrals: integrals,
        r_max,
        heuristic: true,
    })
}

/// `(1/(m-1)) sup (|A|^2 + c h' - (m-1) varkappa)` over checked nodes.
pub fn lambda_coefficient(sample: &ImmersionSample) -> Result<f64> {
    let m = sample.ctx.m;
    if m < 2 {
        return Err(Error::config("the coefficient needs m >= 2"));
    }
    let space = &sample.ctx.space;
    let (c, mf) = (sample.ctx.c, m as f64);
    let mut sup = f64::NEG_INFINITY;
    for i in sample.valid_indices() {
        let t = sample.t[i];
        let vk = match space.varkappa(t) {
            Ok(v) => v,
            Err(e) => space.space_form_check().ok_or(e)?,
        };
        sup = sup.max(sample.norm2.value[i] + c * space.profile.h1(t) - (mf - 1.0) * vk);
    }
    Ok(sup / (mf - 1.0))
}
