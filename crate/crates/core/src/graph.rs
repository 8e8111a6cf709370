//! Translating solitons as graphs `t = u(x)` over a flat 1-D or 2-D fiber in
//! the product `R x P`:
//!
//! ```text
//! div(grad u / W) = c / W,     W = sqrt(1 + |grad u|^2),
//! ```
//!
//! and the graph mean curvature flow `du/dtau = W div(grad u / W)`.
//!
//! Fluxes live on cell faces. The normal derivative across a face is the
//! one-sided difference of its two nodes; in 2-D the tangential derivative
//! averages the central differences of those nodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::linalg::BandMatrix;

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITERS: usize = 50;
pub const MIN_DAMPING: f64 = 1.0 / (1u64 << 20) as f64;
pub const CFL: f64 = 0.2;
const PERIODIC_DENSE_LIMIT: usize = 1024;
const SCALE_POWER: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Dirichlet,
    Periodic,
}

/// Nodal values of `u` on a uniform grid. Dirichlet axes with `n`
/// intervals carry `n + 1` nodes; periodic axes carry `n` nodes.
#[derive(Debug, Clone, Serialize)]
pub struct GraphGrid {
    pub dim: usize,
    pub topology: Topology,
    pub n: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub u: Vec<f64>,
}

/// Sparse gradient `(node, d/du_node)`.
type Sens = Vec<(usize, f64)>;

struct Face {
    flux: f64,
    inv_w: f64,
    /// `(node, d flux, d inv_w)`.
    sens: Vec<(usize, f64, f64)>,
}

struct NodeTerms {
    div: f64,
    div_sens: Sens,
    inv_w: f64,
    inv_sens: Sens,
}

impl GraphGrid {
    pub fn new(dim: usize, topology: Topology, lo: [f64; 2], hi: [f64; 2], n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::config(format!("graph dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 {
            return Err(Error::config(format!("need at least 8 intervals per axis, got {n}")));
        }
        for k in 0..dim {
            if !(hi[k] > lo[k]) || !lo[k].is_finite() || !hi[k].is_finite() {
                return Err(Error::config(format!("axis {k}: empty or unbounded domain")));
            }
        }
        let per_axis = if topology == Topology::Dirichlet { n + 1 } else { n };
        let total = if dim == 1 { per_axis } else { per_axis * per_axis };
        Ok(GraphGrid { dim, topology, n, lo, hi, u: vec![0.0; total] })
    }

    pub fn interval(topology: Topology, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(1, topology, [lo, 0.0], [hi, 1.0], n)
    }

    pub fn square(topology: Topology, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(2, topology, [lo, lo], [hi, hi], n)
    }

    /// Samples `u` from a function of the node coordinates.
    pub fn with_fn<F: Fn(f64, f64) -> f64>(mut self, f: F) -> Self {
        for k in 0..self.u.len() {
            let (x, y) = self.coords(k);
            self.u[k] = f(x, y);
        }
        self
    }

    pub fn nodes_per_axis(&self) -> usize {
        if self.topology == Topology::Dirichlet {
            self.n + 1
        } else {
            self.n
        }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.n as f64
    }

    fn ij(&self, k: usize) -> (usize, usize) {
        let p = self.nodes_per_axis();
        if self.dim == 1 {
            (k, 0)
        } else {
            (k % p, k / p)
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nodes_per_axis() * j
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        let x = self.lo[0] + i as f64 * self.spacing(0);
        let y = if self.dim == 2 { self.lo[1] + j as f64 * self.spacing(1) } else { 0.0 };
        (x, y)
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        if self.topology == Topology::Periodic {
            return false;
        }
        let (i, j) = self.ij(k);
        let last = self.n;
        i == 0 || i == last || (self.dim == 2 && (j == 0 || j == last))
    }

    /// Neighbour index along `axis` at offset `d`, wrapping on periodic grids.
    fn shift(&self, k: usize, axis: usize, d: isize) -> Option<usize> {
        let p = self.nodes_per_axis() as isize;
        let (i, j) = self.ij(k);
        let (mut a, b) = if axis == 0 { (i as isize, j) } else { (j as isize, i) };
        a += d;
        if self.topology == Topology::Periodic {
            a = a.rem_euclid(p);
        } else if a < 0 || a >= p {
            return None;
        }
        let a = a as usize;
        Some(if axis == 0 { self.index(a, b) } else { self.index(b, a) })
    }

    fn central(&self, u: &[f64], k: usize, axis: usize) -> Option<f64> {
        let (p, m) = (self.shift(k, axis, 1)?, self.shift(k, axis, -1)?);
        Some((u[p] - u[m]) / (2.0 * self.spacing(axis)))
    }

    fn active(&self) -> Vec<usize> {
        (0..self.u.len()).filter(|&k| !self.is_boundary(k)).collect()
    }

    /// Flux `q / W` and `1 / W` on the face between `k` and its `+axis`
    /// neighbour.
    fn face(&self, u: &[f64], k: usize, axis: usize) -> Option<Face> {
        let kp = self.shift(k, axis, 1)?;
        let dx = self.spacing(axis);
        let q = (u[kp] - u[k]) / dx;
        let mut t = 0.0;
        let mut tangential = Vec::new();
        if self.dim == 2 {
            let other = 1 - axis;
            let dy = self.spacing(other);
            t = 0.5 * (self.central(u, k, other)? + self.central(u, kp, other)?);
            for base in [k, kp] {
                tangential.push((self.shift(base, other, 1)?, 0.25 / dy));
                tangential.push((self.shift(base, other, -1)?, -0.25 / dy));
            }
        }
        let w = (1.0 + q * q + t * t).sqrt();
        let w3 = w * w * w;
        let (fq, iq) = ((1.0 + t * t) / w3, -q / w3);
        let (ft, it) = (-q * t / w3, -t / w3);
        let mut sens = vec![(kp, fq / dx, iq / dx), (k, -fq / dx, -iq / dx)];
        sens.extend(tangential.into_iter().map(|(node, d)| (node, ft * d, it * d)));
        Some(Face { flux: q / w, inv_w: 1.0 / w, sens })
    }

    /// `1 / W` at a node from central differences.
    fn central_inv_w(&self, u: &[f64], k: usize) -> (f64, Sens) {
        let mut g = [0.0; 2];
        let mut w2 = 1.0;
        for axis in 0..self.dim {
            g[axis] = self.central(u, k, axis).unwrap_or(0.0);
            w2 += g[axis] * g[axis];
        }
        let w = w2.sqrt();
        let w3 = w * w * w;
        let mut sens = Vec::new();
        for axis in 0..self.dim {
            if let (Some(p), Some(m)) = (self.shift(k, axis, 1), self.shift(k, axis, -1)) {
                let d = -g[axis] / w3 / (2.0 * self.spacing(axis));
                sens.push((p, d));
                sens.push((m, -d));
            }
        }
        (1.0 / w, sens)
    }

    /// `div(grad u / W)` and nodal `1 / W` at a non-boundary node, with
    /// their sparse gradients.
    ///
    /// Three second-order estimates of the nodal `1 / W` are combined: the
    /// mean `F` of the face values, the central-difference value `C`, and
    /// the reciprocal `G` of the mean face `W`. The blend `(4F + 4C - 5G) / 3`
    /// cancels the leading truncation term on every 1-D translator, each of
    /// which is a rescaled grim reaper.
    fn node_terms(&self, u: &[f64], k: usize) -> NodeTerms {
        let mut div = 0.0;
        let mut div_sens = Vec::with_capacity(20);
        let mut f_mean = 0.0;
        let mut f_sens = Vec::with_capacity(20);
        let mut w_mean = 0.0;
        let mut w_sens = Vec::with_capacity(20);
        let nfaces = 2.0 * self.dim as f64;
        for axis in 0..self.dim {
            let dx = self.spacing(axis);
            let km = self.shift(k, axis, -1).expect("interior node");
            for (base, sign) in [(k, 1.0), (km, -1.0)] {
                let f = self.face(u, base, axis).expect("interior node");
                div += sign * f.flux / dx;
                f_mean += f.inv_w / nfaces;
                w_mean += 1.0 / (f.inv_w * nfaces);
                let dw = -1.0 / (f.inv_w * f.inv_w * nfaces);
                for (node, df, di) in f.sens {
                    div_sens.push((node, sign * df / dx));
                    f_sens.push((node, di / nfaces));
                    w_sens.push((node, dw * di));
                }
            }
        }
        let (central, central_sens) = self.central_inv_w(u, k);
        let g = 1.0 / w_mean;
        let blended = (4.0 * f_mean + 4.0 * central - 5.0 * g) / 3.0;
        let (inv_w, inv_sens) = if blended > 0.0 {
            let mut s: Sens = f_sens.iter().map(|&(n, v)| (n, 4.0 * v / 3.0)).collect();
            s.extend(central_sens.iter().map(|&(n, v)| (n, 4.0 * v / 3.0)));
            s.extend(w_sens.iter().map(|&(n, v)| (n, 5.0 * g * g * v / 3.0)));
            (blended, s)
        } else {
            (f_mean, f_sens)
        };
        NodeTerms { div, div_sens, inv_w, inv_sens }
    }

    fn divergence(&self, u: &[f64], k: usize) -> f64 {
        self.node_terms(u, k).div
    }

    /// Header `x,u,residual` (1-D) or `x,y,u,residual` (2-D).
    pub fn to_csv(&self, residual: &[f64]) -> String {
        let rows = (0..self.u.len()).map(|k| {
            let (x, y) = self.coords(k);
            if self.dim == 1 {
                vec![x, self.u[k], residual[k]]
            } else {
                vec![x, y, self.u[k], residual[k]]
            }
        });
        let header: &[&str] = if self.dim == 1 { &["x", "u", "residual"] } else { &["x", "y", "u", "residual"] };
        crate::report::csv_table(header, rows)
    }
}

/// Nodal residual, zero on Dirichlet boundary nodes.
#[derive(Debug, Clone, Serialize)]
pub struct NodalResidual {
    pub values: Vec<f64>,
    pub sup: f64,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual_of(grid: &GraphGrid, u: &[f64], c: f64) -> NodalResidual {
    let mut values = vec![0.0; u.len()];
    let mut sup = 0.0f64;
    for k in 0..u.len() {
        if grid.is_boundary(k) {
            continue;
        }
        let t = grid.node_terms(u, k);
        let v = t.div - c * t.inv_w;
        values[k] = v;
        sup = sup.max(v.abs());
    }
    NodalResidual { values, sup }
}

/// `div(grad u/W) - c/W` at every non-boundary node.
pub fn translator_residual(grid: &GraphGrid, c: f64) -> NodalResidual {
    residual_of(grid, &grid.u, c)
}

/// `div(grad u/W)` summed over all nodes, times the cell area. Vanishes up
/// to rounding on periodic grids.
pub fn total_flux(grid: &GraphGrid) -> f64 {
    let area: f64 = (0..grid.dim).map(|a| grid.spacing(a)).product();
    grid.active().iter().map(|&k| grid.divergence(&grid.u, k)).sum::<f64>() * area
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslatorSolution {
    pub grid: GraphGrid,
    pub c: f64,
    pub residual_sup: f64,
    pub newton_iters: usize,
    /// Sup-norm residual before the first iteration and after each one.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: NEWTON_TOL, max_iters: NEWTON_MAX_ITERS }
    }
}

/// The residual scaled by the central-difference `W^SCALE_POWER`; a positive
/// row scaling keeps the discrete zeros.
fn scaled_residual(grid: &GraphGrid, u: &[f64], c: f64, active: &[usize]) -> Vec<f64> {
    active
        .iter()
        .map(|&k| {
            let t = grid.node_terms(u, k);
            let (ci, _) = grid.central_inv_w(u, k);
            (t.div - c * t.inv_w) / ci.powi(SCALE_POWER)
        })
        .collect()
}

fn jacobian_row(grid: &GraphGrid, u: &[f64], c: f64, k: usize) -> Sens {
    let t = grid.node_terms(u, k);
    let (ci, ci_sens) = grid.central_inv_w(u, k);
    let r = t.div - c * t.inv_w;
    let scale = ci.powi(-SCALE_POWER);
    let dscale = -(SCALE_POWER as f64) * ci.powi(-SCALE_POWER - 1);
    let mut row: Sens = t.div_sens.into_iter().map(|(n, v)| (n, scale * v)).collect();
    row.extend(t.inv_sens.into_iter().map(|(n, v)| (n, -c * scale * v)));
    row.extend(ci_sens.into_iter().map(|(n, v)| (n, r * dscale * v)));
    row
}

/// Damped Newton for the translator equation. Boundary values of
/// Dirichlet grids are kept; the other entries of `grid.u` are the
/// initial guess. Steps are halved until the 2-norm of the scaled residual
/// decreases.
pub fn solve_translator(grid: &GraphGrid, c: f64, opts: NewtonOptions) -> Result<TranslatorSolution> {
    if grid.topology == Topology::Periodic && c != 0.0 {
        return Err(Error::Infeasible(format!(
            "on a closed fiber the divergence theorem gives 0 = integral of div(grad u/W) = c * integral of 1/W, \
             which is impossible for c = {c}"
        )));
    }
    let active = grid.active();
    let periodic = grid.topology == Topology::Periodic;
    if periodic && active.len() > PERIODIC_DENSE_LIMIT {
        return Err(Error::Unsupported(format!(
            "periodic solves are limited to {PERIODIC_DENSE_LIMIT} unknowns"
        )));
    }
    let mut col = vec![usize::MAX; grid.u.len()];
    for (a, &k) in active.iter().enumerate() {
        col[k] = a;
    }
    let band = if periodic {
        active.len().saturating_sub(1)
    } else if grid.dim == 1 {
        1
    } else {
        grid.nodes_per_axis()
    };

    if grid.dim == 1 && !periodic {
        return solve_flux_form(grid, c, opts);
    }
    let mut u = grid.u.clone();
    let mut res = residual_of(grid, &u, c);
    let mut history = vec![res.sup];
    let mut iters = 0;
    while res.sup > opts.tol {
        if iters >= opts.max_iters {
            return Err(Error::NonConvergence {
                message: format!("Newton reached {} iterations", opts.max_iters),
                residual: res.sup,
            });
        }
        let mut jac = BandMatrix::zeros(active.len(), band, band);
        let scaled = scaled_residual(grid, &u, c, &active);
        let mut rhs: Vec<f64> = scaled.iter().map(|v| -v).collect();
        for (a, &k) in active.iter().enumerate() {
            if periodic && a == 0 {
                // Gauge: the first node is held fixed.
                jac.set(0, 0, 1.0);
                rhs[0] = 0.0;
                continue;
            }
            for (node, v) in jacobian_row(grid, &u, c, k) {
                if col[node] != usize::MAX {
                    jac.add(a, col[node], v);
                }
            }
        }
        let delta = jac.solve(&rhs)?;
        let merit = l2(&scaled);
        let mut alpha = 1.0;
        loop {
            let mut trial = u.clone();
            for (a, &k) in active.iter().enumerate() {
                trial[k] += alpha * delta[a];
            }
            if l2(&scaled_residual(grid, &trial, c, &active)) < merit {
                u = trial;
                res = residual_of(grid, &u, c);
                break;
            }
            alpha *= 0.5;
            if alpha < MIN_DAMPING {
                return Err(Error::NonConvergence {
                    message: format!("Newton stagnated at iteration {iters}: damping fell below 2^-20"),
                    residual: res.sup,
                });
            }
        }
        iters += 1;
        history.push(res.sup);
    }
    if periodic {
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        u.iter_mut().for_each(|v| *v -= mean);
    }
    let mut solved = grid.clone();
    solved.u = u;
    Ok(TranslatorSolution { grid: solved, c, residual_sup: res.sup, newton_iters: iters, history })
}

/// Node residual of a 1-D grid from its two face slopes, with derivatives
/// with respect to the face fluxes `q / W`.
fn flux_node(qm: f64, qp: f64, dx: f64, c: f64) -> (f64, f64, f64) {
    let (wm, wp) = ((1.0 + qm * qm).sqrt(), (1.0 + qp * qp).sqrt());
    let f = 0.5 * (1.0 / wm + 1.0 / wp);
    let mean_w = 0.5 * (wm + wp);
    let g = 1.0 / mean_w;
    let gc = 0.5 * (qm + qp);
    let cen = 1.0 / (1.0 + gc * gc).sqrt();
    let blended = (4.0 * f + 4.0 * cen - 5.0 * g) / 3.0;
    // d(inv)/dq on each side.
    let d_inv = |q: f64, w: f64| {
        let df = -0.5 * q / (w * w * w);
        let dg = -g * g * 0.5 * q / w;
        let dc = -0.5 * gc * cen * cen * cen;
        if blended > 0.0 {
            (4.0 * df + 4.0 * dc - 5.0 * dg) / 3.0
        } else {
            df
        }
    };
    let inv = if blended > 0.0 { blended } else { f };
    let r = (qp / wp - qm / wm) / dx - c * inv;
    // dq/dphi = W^3 on each face.
    let dm = -1.0 / dx - c * d_inv(qm, wm) * wm * wm * wm;
    let dp = 1.0 / dx - c * d_inv(qp, wp) * wp * wp * wp;
    (r, dm, dp)
}

/// Newton for 1-D Dirichlet grids in the face fluxes `phi = q / W`, in
/// which the divergence is linear. Nodal values are recovered by summing
/// the face slopes `q = phi / sqrt(1 - phi^2)`; one bordered row imposes
/// the boundary jump.
///
/// The two faces next to the boundary start from the slope of their
/// interior neighbour, so the initial guess need not match the data there.
fn solve_flux_form(grid: &GraphGrid, c: f64, opts: NewtonOptions) -> Result<TranslatorSolution> {
    let n = grid.n;
    let dx = grid.spacing(0);
    let (u0, un) = (grid.u[0], grid.u[n]);
    let slope = |phi: f64| phi / (1.0 - phi * phi).sqrt();
    let rebuild = |phi: &[f64]| {
        let mut u = vec![u0; n + 1];
        for j in 0..n {
            u[j + 1] = u[j] + slope(phi[j]) * dx;
        }
        u[n] = un;
        u
    };
    let system = |phi: &[f64]| {
        let q: Vec<f64> = phi.iter().map(|&p| slope(p)).collect();
        let mut r = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for i in 1..n {
            let (ri, dm, dp) = flux_node(q[i - 1], q[i], dx, c);
            r.push(ri);
            d.push((dm, dp));
        }
        r.push(q.iter().sum::<f64>() * dx - (un - u0));
        (r, d)
    };

    let mut phi: Vec<f64> = (0..n)
        .map(|j| {
            let j = j.clamp(1, n - 2);
            let q = (grid.u[j + 1] - grid.u[j]) / dx;
            q / (1.0 + q * q).sqrt()
        })
        .collect();
    let mut u = grid.u.clone();
    let mut res = residual_of(grid, &u, c);
    let mut history = vec![res.sup];
    let mut iters = 0;
    while res.sup > opts.tol {
        if iters >= opts.max_iters {
            return Err(Error::NonConvergence {
                message: format!("Newton reached {} iterations", opts.max_iters),
                residual: res.sup,
            });
        }
        let (r, d) = system(&phi);
        let mut jac = BandMatrix::zeros(n, n - 1, 1);
        for (row, &(dm, dp)) in d.iter().enumerate() {
            jac.set(row, row, dm);
            jac.set(row, row + 1, dp);
        }
        for (j, &p) in phi.iter().enumerate() {
            let w = 1.0 / (1.0 - p * p).sqrt();
            jac.set(n - 1, j, w * w * w * dx);
        }
        let delta = jac.solve(&r.iter().map(|v| -v).collect::<Vec<_>>())?;
        let merit = l2(&r);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(p, d)| p + alpha * d).collect();
            if trial.iter().all(|p| p.abs() < 1.0) && l2(&system(&trial).0) < merit {
                phi = trial;
                break;
            }
            alpha *= 0.5;
            if alpha < MIN_DAMPING {
                return Err(Error::NonConvergence {
                    message: format!("Newton stagnated at iteration {iters}: damping fell below 2^-20"),
                    residual: res.sup,
                });
            }
        }
        u = rebuild(&phi);
        res = residual_of(grid, &u, c);
        iters += 1;
        history.push(res.sup);
    }
    let mut solved = grid.clone();
    solved.u = u;
    Ok(TranslatorSolution { grid: solved, c, residual_sup: res.sup, newton_iters: iters, history })
}

/// Largest stable explicit step.
pub fn max_stable_step(grid: &GraphGrid) -> f64 {
    let dx = (0..grid.dim).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    CFL * dx * dx
}

/// `W div(grad u/W)` at every non-boundary node.
pub fn normal_velocity(grid: &GraphGrid) -> Vec<f64> {
    (0..grid.u.len())
        .map(|k| {
            if grid.is_boundary(k) {
                0.0
            } else {
                let t = grid.node_terms(&grid.u, k);
                t.div / t.inv_w
            }
        })
        .collect()
}

/// One explicit Euler step of the graph flow; Dirichlet values stay fixed.
pub fn parabolic_step(grid: &GraphGrid, dtau: f64) -> Result<GraphGrid> {
    parabolic_step_with(grid, dtau, 0.0)
}

/// As [`parabolic_step`], with Dirichlet values moving at `boundary_velocity`.
pub fn parabolic_step_with(grid: &GraphGrid, dtau: f64, boundary_velocity: f64) -> Result<GraphGrid> {
    let bound = max_stable_step(grid);
    if !(dtau > 0.0) || dtau > bound * (1.0 + 1e-12) {
        return Err(Error::config(format!(
            "time step {dtau:e} must lie in (0, {bound:e}] = (0, {CFL} dx^2]"
        )));
    }
    let velocity = normal_velocity(grid);
    let mut next = grid.clone();
    for k in 0..grid.u.len() {
        next.u[k] += dtau * if grid.is_boundary(k) { boundary_velocity } else { velocity[k] };
    }
    Ok(next)
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfSimilarityReport {
    pub c: f64,
    pub horizon: f64,
    pub dtau: f64,
    pub steps: usize,
    /// `sup_tau sup_x |u(tau, x) - u(0, x) - c tau|`.
    pub deviation: f64,
}

/// Runs the graph flow from `u0` for time `horizon`, translating Dirichlet
/// data at speed `c`, and measures the departure from `u0 + c tau`.
pub fn self_similarity_check(u0: &GraphGrid, c: f64, horizon: f64, dtau: f64) -> Result<SelfSimilarityReport> {
    if !(horizon > 0.0) {
        return Err(Error::config("horizon must be positive"));
    }
    let steps = (horizon / dtau - 1e-9).ceil().max(1.0) as usize;
    let mut g = u0.clone();
    let mut tau = 0.0;
    let mut deviation = 0.0f64;
    for k in 0..steps {
        let h = if k + 1 == steps { horizon - tau } else { dtau };
        g = parabolic_step_with(&g, h, c)?;
        tau += h;
        for (a, b) in g.u.iter().zip(&u0.u) {
            deviation = deviation.max((a - b - c * tau).abs());
        }
    }
    Ok(SelfSimilarityReport { c, horizon, dtau, steps, deviation })
}

/// The grim reaper `-log cos x` on `[-(pi/2 - margin), pi/2 - margin]`.
pub fn grim_reaper_grid(margin: f64, n: usize) -> Result<GraphGrid> {
    let a = std::f64::consts::FRAC_PI_2 - margin;
    Ok(GraphGrid::interval(Topology::Dirichlet, -a, a, n)?.with_fn(|x, _| -x.cos().ln()))
}

/// Grim reaper data on the boundary, zero inside.
pub fn grim_reaper_problem(margin: f64, n: usize) -> Result<GraphGrid> {
    let mut g = grim_reaper_grid(margin, n)?;
    for k in 0..g.u.len() {
        if !g.is_boundary(k) {
            g.u[k] = 0.0;
        }
    }
    Ok(g)
}

/// Sup distance between nodal values and a function of the coordinates.
pub fn deviation_from<F: Fn(f64, f64) -> f64>(grid: &GraphGrid, f: F) -> f64 {
    (0..grid.u.len()).fold(0.0f64, |acc, k| {
        let (x, y) = grid.coords(k);
        acc.max((grid.u[k] - f(x, y)).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd::observed_order;

    fn reaper(x: f64, _y: f64) -> f64 {
        -x.cos().ln()
    }

    #[test]
    fn residual_of_simple_graphs() {
        let g = GraphGrid::interval(Topology::Dirichlet, -1.0, 1.0, 16).unwrap().with_fn(|_, _| 3.0);
        assert_eq!(translator_residual(&g, 0.0).sup, 0.0);
        let g = GraphGrid::interval(Topology::Dirichlet, -1.0, 1.0, 16).unwrap().with_fn(|x, _| 0.7 * x);
        assert!(translator_residual(&g, 0.0).sup < 1e-12);
    }

    #[test]
    fn grim_reaper_residual() {
        let r: Vec<f64> =
            [100, 200, 400, 800].iter().map(|&n| translator_residual(&grim_reaper_grid(0.05, n).unwrap(), 1.0).sup).collect();
        assert!(r[2] <= 5e-5, "N=400 residual {}", r[2]);
        assert!(observed_order(r[2], r[3], 2.0) >= 1.9, "{r:?}");
    }

    #[test]
    fn periodic_flux_telescopes() {
        let g = GraphGrid::interval(Topology::Periodic, 0.0, 2.0 * std::f64::consts::PI, 64)
            .unwrap()
            .with_fn(|x, _| 0.3 * x.sin() + 0.1 * (3.0 * x).cos());
        assert!(total_flux(&g).abs() < 1e-13);
    }

    #[test]
    fn periodic_translators_are_infeasible() {
        let g = GraphGrid::interval(Topology::Periodic, 0.0, 1.0, 16).unwrap();
        assert!(matches!(solve_translator(&g, 1.0, NewtonOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn periodic_minimal_graph_is_flat() {
        let g = GraphGrid::interval(Topology::Periodic, 0.0, 1.0, 16)
            .unwrap()
            .with_fn(|x, _| 0.05 * (2.0 * std::f64::consts::PI * x).sin());
        let sol = solve_translator(&g, 0.0, NewtonOptions::default()).unwrap();
        assert!(sol.grid.u.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn solves_grim_reaper_from_zero() {
        let sol = solve_translator(&grim_reaper_problem(0.05, 100).unwrap(), 1.0, NewtonOptions::default()).unwrap();
        assert!(sol.residual_sup <= NEWTON_TOL);
        assert!(deviation_from(&sol.grid, reaper) < 1e-3);
    }

    #[test]
    fn flux_form_node_derivatives() {
        let (qm, qp, dx, c) = (0.8, 1.3, 0.1, 0.9);
        let (_, dm, dp) = flux_node(qm, qp, dx, c);
        let phi = |q: f64| q / (1.0 + q * q).sqrt();
        let q_of = |p: f64| p / (1.0 - p * p).sqrt();
        let e = 1e-7;
        let fd_m = (flux_node(q_of(phi(qm) + e), qp, dx, c).0 - flux_node(q_of(phi(qm) - e), qp, dx, c).0) / (2.0 * e);
        let fd_p = (flux_node(qm, q_of(phi(qp) + e), dx, c).0 - flux_node(qm, q_of(phi(qp) - e), dx, c).0) / (2.0 * e);
        assert!((fd_m - dm).abs() < 1e-6 * dm.abs().max(1.0));
        assert!((fd_p - dp).abs() < 1e-6 * dp.abs().max(1.0));
    }

    #[test]
    fn flux_form_matches_nodal_residual() {
        let g = GraphGrid::interval(Topology::Dirichlet, -1.0, 1.0, 10).unwrap().with_fn(|x, _| x * x * x - 0.5 * x);
        let r = translator_residual(&g, 0.6);
        let dx = g.spacing(0);
        for i in 1..10 {
            let (qm, qp) = ((g.u[i] - g.u[i - 1]) / dx, (g.u[i + 1] - g.u[i]) / dx);
            assert!((flux_node(qm, qp, dx, 0.6).0 - r.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn minimal_graph_with_zero_data() {
        let g = GraphGrid::interval(Topology::Dirichlet, 0.0, 1.0, 16).unwrap();
        let sol = solve_translator(&g, 0.0, NewtonOptions::default()).unwrap();
        assert_eq!(sol.newton_iters, 0);
        assert!(sol.grid.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let grids = [
            GraphGrid::interval(Topology::Dirichlet, -1.0, 1.0, 8).unwrap().with_fn(|x, _| 0.4 * x * x * x - x),
            GraphGrid::square(Topology::Dirichlet, -1.0, 1.0, 8).unwrap().with_fn(|x, y| 0.3 * x * x + 0.2 * x * y - 0.1 * y),
        ];
        for g in grids {
            let c = 0.7;
            let k = if g.dim == 1 { 3 } else { g.index(3, 4) };
            let row = jacobian_row(&g, &g.u, c, k);
            let a = g.active().iter().position(|&x| x == k).unwrap();
            let f = |u: &[f64]| scaled_residual(&g, u, c, &g.active())[a];
            for node in 0..g.u.len() {
                let mut up = g.u.clone();
                let mut um = g.u.clone();
                up[node] += 1e-6;
                um[node] -= 1e-6;
                let fd = (f(&up) - f(&um)) / 2e-6;
                let an: f64 = row.iter().filter(|(n, _)| *n == node).map(|(_, v)| v).sum();
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "node {node}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn parabolic_step_rules() {
        let g = GraphGrid::interval(Topology::Dirichlet, 0.0, 1.0, 16).unwrap().with_fn(|_, _| 2.0);
        let dt = max_stable_step(&g);
        assert_eq!(parabolic_step(&g, dt).unwrap().u, g.u);
        assert!(parabolic_step(&g, 2.0 * dt).is_err());
    }

    #[test]
    fn sine_decays_on_torus() {
        let g = GraphGrid::interval(Topology::Periodic, 0.0, 1.0, 32)
            .unwrap()
            .with_fn(|x, _| 0.01 * (2.0 * std::f64::consts::PI * x).sin());
        let dt = max_stable_step(&g);
        let mut h = g.clone();
        for _ in 0..100 {
            h = parabolic_step(&h, dt).unwrap();
        }
        let sup = |g: &GraphGrid| g.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(sup(&h) < sup(&g));
    }
}

