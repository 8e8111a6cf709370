//! Rotationally symmetric solitons in `R^{m+1}`, described by a profile
//! curve `s -> (x(s), r(s))` in the half-plane `r >= 0`, with `x` along the
//! axis of symmetry and `r` the distance to it.
//!
//! Orientation: `T = (cos theta, sin theta)` and `nu = (-sin theta, cos theta)`.
//! Principal curvatures are `theta'` along the profile and `-cos(theta)/r`
//! on the orbit spheres, so a round sphere has `H = -m/R` with respect to its
//! outward normal. The soliton equation `H = c <X, nu>` then reads
//!
//! ```text
//! theta' = (m - 1) cos(theta) / r + c (r cos(theta) - x sin(theta)).
//! ```

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::fd::diff4;
use crate::numerics::ode::rk4_step;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const BLOW_UP: f64 = 1e6;
/// Default distance from the axis at which a returning profile is stopped.
pub const DEFAULT_AXIS_TOL: f64 = 2e-2;
/// Below this distance to the axis, output steps are split into substeps of
/// size proportional to `r`.
const GRADING_RADIUS: f64 = 0.5;
const SINGULAR_R: f64 = 1e-9;

/// Derivatives `(x', r', theta')` off the axis.
pub fn profile_rhs(state: [f64; 3], c: f64, m: usize) -> Result<[f64; 3]> {
    if !(state[1] > 0.0) {
        return Err(Error::Singular {
            index: 0,
            message: format!("profile reached the axis (r = {})", state[1]),
        });
    }
    Ok(rhs(&state, c, m))
}

fn rhs(y: &[f64; 3], c: f64, m: usize) -> [f64; 3] {
    let [x, r, th] = *y;
    let (sn, cs) = th.sin_cos();
    [cs, sn, (m as f64 - 1.0) * cs / r + c * (r * cs - x * sn)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Launch {
    /// Smooth cap through the axis point `(x0, 0)`, leaving perpendicular to the axis.
    Axis { x0: f64 },
    /// Arbitrary initial point and tangent angle with `r0 > 0`.
    Free { x0: f64, r0: f64, theta0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingConfig {
    pub launch: Launch,
    pub step: f64,
    pub max_length: f64,
    pub c: f64,
    pub m: usize,
    pub axis_tol: f64,
}

impl ShootingConfig {
    pub fn new(launch: Launch, c: f64, m: usize, max_length: f64) -> Self {
        ShootingConfig { launch, step: DEFAULT_STEP, max_length, c, m, axis_tol: DEFAULT_AXIS_TOL }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.max_length >= self.step) {
            return Err(Error::config("max_length must be at least one step"));
        }
        if self.m == 0 {
            return Err(Error::config("soliton dimension must be positive"));
        }
        if self.c == 0.0 || !self.c.is_finite() {
            return Err(Error::config("soliton constant must be finite and nonzero"));
        }
        if !(self.axis_tol > 0.0) {
            return Err(Error::config("axis tolerance must be positive"));
        }
        if let Launch::Free { r0, .. } = self.launch {
            if !(r0 > 0.0) {
                return Err(Error::config("free launches need r0 > 0; use an axis launch on the axis"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxLength,
    AxisReturn,
    BlowUp,
    Exact,
}

/// Arclength-sampled profile curve.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileCurve {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub nu_x: Vec<f64>,
    pub nu_r: Vec<f64>,
    pub kappa_prof: Vec<f64>,
    pub m: usize,
    pub c: f64,
    /// First and last samples lie on the axis.
    pub axis_start: bool,
    pub axis_end: bool,
    pub stop: StopReason,
    /// Uniform sample spacing.
    pub spacing: f64,
}

/// Per-sample curvature data.
#[derive(Debug, Clone, Serialize)]
pub struct FundamentalForms {
    pub k_profile: Vec<f64>,
    /// Orbit principal curvature, with multiplicity `m - 1`.
    pub k_orbit: Vec<f64>,
    pub mean: Vec<f64>,
    pub norm2: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualField {
    pub values: Vec<f64>,
    pub sup: f64,
}

impl ProfileCurve {
    fn from_parts(
        s: Vec<f64>,
        x: Vec<f64>,
        r: Vec<f64>,
        theta: Vec<f64>,
        kappa_prof: Vec<f64>,
        m: usize,
        c: f64,
        ends: (bool, bool),
        stop: StopReason,
        spacing: f64,
    ) -> Self {
        let nu_x = theta.iter().map(|t| -t.sin()).collect();
        let nu_r = theta.iter().map(|t| t.cos()).collect();
        ProfileCurve { s, x, r, theta, nu_x, nu_r, kappa_prof, m, c, axis_start: ends.0, axis_end: ends.1, stop, spacing }
    }

    /// Round sphere of radius `radius` centred at the origin, pole to pole.
    pub fn round(m: usize, c: f64, radius: f64, samples: usize) -> Result<Self> {
        if !(radius > 0.0) || samples < 5 || m == 0 {
            return Err(Error::config("round profile needs radius > 0, m > 0 and at least 5 samples"));
        }
        let len = std::f64::consts::PI * radius;
        let ds = len / (samples - 1) as f64;
        let s: Vec<f64> = (0..samples).map(|i| i as f64 * ds).collect();
        let phi: Vec<f64> = s.iter().map(|v| v / radius).collect();
        let x = phi.iter().map(|p| radius * p.cos()).collect();
        let mut r: Vec<f64> = phi.iter().map(|p| radius * p.sin()).collect();
        r[samples - 1] = 0.0;
        let theta = phi.iter().map(|p| p + FRAC_PI_2).collect();
        Ok(Self::from_parts(s, x, r, theta, vec![1.0 / radius; samples], m, c, (true, true), StopReason::Exact, ds))
    }

    /// The shrinking sphere of radius `sqrt(-m/c)`.
    pub fn sphere(m: usize, c: f64, samples: usize) -> Result<Self> {
        if !(c < 0.0) {
            return Err(Error::domain("round soliton spheres need c < 0"));
        }
        Self::round(m, c, (-(m as f64) / c).sqrt(), samples)
    }

    /// The shrinking cylinder `S^{m-1}(sqrt(-(m-1)/c)) x R` over `x in [-len/2, len/2]`.
    pub fn cylinder(m: usize, c: f64, length: f64, samples: usize) -> Result<Self> {
        if !(c < 0.0) || m < 2 {
            return Err(Error::domain("soliton cylinders need c < 0 and m >= 2"));
        }
        if !(length > 0.0) || samples < 5 {
            return Err(Error::config("cylinder needs positive length and at least 5 samples"));
        }
        let radius = (-((m - 1) as f64) / c).sqrt();
        let ds = length / (samples - 1) as f64;
        let s: Vec<f64> = (0..samples).map(|i| i as f64 * ds).collect();
        let x = s.iter().map(|v| v - 0.5 * length).collect();
        Ok(Self::from_parts(
            s,
            x,
            vec![radius; samples],
            vec![0.0; samples],
            vec![0.0; samples],
            m,
            c,
            (false, false),
            StopReason::Exact,
            ds,
        ))
    }

    /// The hyperplane `{x = 0}` out to geodesic radius `radius`.
    pub fn plane(m: usize, c: f64, radius: f64, samples: usize) -> Result<Self> {
        if !(radius > 0.0) || samples < 5 || m == 0 {
            return Err(Error::config("plane needs positive radius and at least 5 samples"));
        }
        let ds = radius / (samples - 1) as f64;
        let s: Vec<f64> = (0..samples).map(|i| i as f64 * ds).collect();
        Ok(Self::from_parts(
            s.clone(),
            vec![0.0; samples],
            s,
            vec![FRAC_PI_2; samples],
            vec![0.0; samples],
            m,
            c,
            (true, false),
            StopReason::Exact,
            ds,
        ))
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn is_axis(&self, i: usize) -> bool {
        (i == 0 && self.axis_start) || (i + 1 == self.len() && self.axis_end)
    }

    /// `<X, nu>` with `X` the position vector.
    pub fn support(&self, i: usize) -> f64 {
        self.x[i] * self.nu_x[i] + self.r[i] * self.nu_r[i]
    }

    /// Principal curvatures, `H` and `|A|^2`.
    pub fn fundamental_forms(&self) -> Result<FundamentalForms> {
        let n = self.len();
        let mf = self.m as f64;
        let mut out = FundamentalForms {
            k_profile: self.kappa_prof.clone(),
            k_orbit: vec![0.0; n],
            mean: vec![0.0; n],
            norm2: vec![0.0; n],
        };
        for i in 0..n {
            let k1 = self.kappa_prof[i];
            let k2 = if self.is_axis(i) {
                k1
            } else if self.m == 1 {
                0.0
            } else if self.r[i] < SINGULAR_R {
                return Err(Error::Singular { index: i, message: format!("r = {} off the axis", self.r[i]) });
            } else {
                -self.theta[i].cos() / self.r[i]
            };
            out.k_orbit[i] = k2;
            out.mean[i] = k1 + (mf - 1.0) * k2;
            out.norm2[i] = k1 * k1 + (mf - 1.0) * k2 * k2;
        }
        Ok(out)
    }

    /// `H - c <X, nu>` per sample.
    pub fn soliton_residual(&self) -> Result<ResidualField> {
        let ff = self.fundamental_forms()?;
        let values: Vec<f64> = (0..self.len()).map(|i| ff.mean[i] - self.c * self.support(i)).collect();
        let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(ResidualField { values, sup })
    }

    /// Sup over interior samples of `| |gamma'| - 1 |` and of `|nu . gamma'|`.
    pub fn frame_defects(&self) -> (f64, f64) {
        let dx = diff4(&self.x, self.spacing);
        let dr = diff4(&self.r, self.spacing);
        let mut speed = 0.0f64;
        let mut normal = 0.0f64;
        for i in 1..self.len().saturating_sub(1) {
            speed = speed.max(((dx[i] * dx[i] + dr[i] * dr[i]).sqrt() - 1.0).abs());
            normal = normal.max((dx[i] * self.nu_x[i] + dr[i] * self.nu_r[i]).abs());
            normal = normal.max(((self.nu_x[i].powi(2) + self.nu_r[i].powi(2)).sqrt() - 1.0).abs());
        }
        (speed, normal)
    }

    /// Largest distance of a sample to the circle of the given radius
    /// centred at `(cx, 0)`.
    pub fn circle_deviation(&self, cx: f64, radius: f64) -> f64 {
        (0..self.len()).fold(0.0f64, |a, i| a.max((((self.x[i] - cx).powi(2) + self.r[i].powi(2)).sqrt() - radius).abs()))
    }

    /// `max |gamma(s)|`.
    pub fn max_distance_from_origin(&self) -> f64 {
        (0..self.len()).fold(0.0f64, |a, i| a.max(self.x[i].hypot(self.r[i])))
    }

    /// Header `s,x,r,theta,H,A2,residual`.
    pub fn to_csv(&self) -> Result<String> {
        let ff = self.fundamental_forms()?;
        let res = self.soliton_residual()?;
        let rows = (0..self.len()).map(|i| {
            vec![self.s[i], self.x[i], self.r[i], self.theta[i], ff.mean[i], ff.norm2[i], res.values[i]]
        });
        Ok(crate::report::csv_table(&["s", "x", "r", "theta", "H", "A2", "residual"], rows))
    }
}

/// Series expansion of the smooth cap through `(x0, 0)` at arclength `s`.
fn axis_series(x0: f64, c: f64, m: usize, s: f64) -> [f64; 3] {
    let mf = m as f64;
    let a = -c * x0 / mf;
    let b = c * (x0 * a * a - a) / (2.0 * (mf + 2.0));
    let s2 = s * s;
    let x = x0 - a * s2 / 2.0 - (b - a.powi(3) / 6.0) * s2 * s2 / 4.0;
    let r = s - a * a * s * s2 / 6.0 + (a.powi(4) / 24.0 - a * b) * s2 * s2 * s / 5.0;
    [x, r, FRAC_PI_2 + a * s + b * s * s2]
}

enum Advance {
    Ok([f64; 3]),
    Stop(StopReason),
}

fn rk4_checked(y: [f64; 3], h: f64, c: f64, m: usize) -> Advance {
    let next = rk4_step(&|y: &[f64; 3]| rhs(y, c, m), y, h);
    if !next.iter().all(|v| v.is_finite()) {
        return Advance::Stop(StopReason::BlowUp);
    }
    if next[1] <= 0.0 {
        return Advance::Stop(StopReason::AxisReturn);
    }
    if rhs(&next, c, m)[2].abs() > BLOW_UP {
        return Advance::Stop(StopReason::BlowUp);
    }
    Advance::Ok(next)
}

/// Integrates the profile ODE from a launch.
///
/// Samples are uniform in arclength with the configured step. Within
/// `GRADING_RADIUS` of the axis each output step is split into substeps of
/// size proportional to `r`, which keeps the scheme fourth order despite
/// the `1/r` coefficient.
pub fn shoot(cfg: &ShootingConfig) -> Result<ProfileCurve> {
    cfg.validate()?;
    let (c, m, step) = (cfg.c, cfg.m, cfg.step);
    let total = (cfg.max_length / step + 1e-9).floor() as usize;

    let mut pts: Vec<[f64; 3]> = Vec::with_capacity(total + 1);
    let mut y = match cfg.launch {
        Launch::Axis { x0 } => [x0, 0.0, FRAC_PI_2],
        Launch::Free { x0, r0, theta0 } => [x0, r0, theta0],
    };
    pts.push(y);
    let mut stop = StopReason::MaxLength;

    if let Launch::Axis { x0 } = cfg.launch {
        // Geometric substeps from a series start deep inside the first step.
        let ratio = step / GRADING_RADIUS;
        let mut s = step * 1e-3;
        let mut z = axis_series(x0, c, m, s);
        while s < step {
            let h = (s * ratio).min(step - s);
            match rk4_checked(z, h, c, m) {
                Advance::Ok(next) => z = next,
                Advance::Stop(reason) => {
                    return Err(Error::NonConvergence {
                        message: format!("{reason:?} during the axis start at s = {s}, state {z:?}"),
                        residual: rhs(&z, c, m)[2].abs(),
                    })
                }
            }
            s += h;
        }
        y = z;
        pts.push(y);
    }

    'outer: while pts.len() <= total {
        let sub = if y[1] < GRADING_RADIUS { (GRADING_RADIUS / y[1]).ceil().min(1e5) as usize } else { 1 };
        let h = step / sub as f64;
        let mut z = y;
        for _ in 0..sub {
            match rk4_checked(z, h, c, m) {
                Advance::Ok(next) => z = next,
                Advance::Stop(reason) => {
                    stop = reason;
                    break 'outer;
                }
            }
        }
        y = z;
        pts.push(y);
        if y[1] < cfg.axis_tol && y[2].sin() < 0.0 {
            stop = StopReason::AxisReturn;
            break;
        }
    }

    if pts.len() < 2 {
        let z = pts[0];
        return Err(Error::NonConvergence {
            message: format!("immediate {stop:?} from state (x, r, theta) = {z:?}"),
            residual: rhs(&z, c, m)[2].abs(),
        });
    }

    let n = pts.len();
    let s: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    let theta: Vec<f64> = pts.iter().map(|p| p[2]).collect();
    let kappa = diff4(&theta, step);
    let axis_start = matches!(cfg.launch, Launch::Axis { .. });
    Ok(ProfileCurve::from_parts(
        s,
        pts.iter().map(|p| p[0]).collect(),
        pts.iter().map(|p| p[1]).collect(),
        theta,
        kappa,
        m,
        c,
        (axis_start, false),
        stop,
        step,
    ))
}

#[cfg(feature = "space-form-rotational")]
pub mod space_form {
    //! Rotational profiles in `I x_h S^m` with the round fiber, written in the
    //! totally geodesic half-plane `(t, alpha)` with metric `dt^2 + h^2 d alpha^2`.
    //! The axis is `alpha = 0`, and `theta` is the tangent angle against the
    //! orthonormal frame `(d_t, h^{-1} d_alpha)`.

    use serde::Serialize;

    use crate::error::{Error, Result};
    use crate::geometry::WarpingProfile;
    use crate::numerics::fd::diff4;
    use crate::numerics::ode::rk4_step;

    /// Principal curvatures `(k_profile from theta', k_orbit)` at a state.
    pub fn orbit_curvature(p: &WarpingProfile, t: f64, alpha: f64, theta: f64) -> f64 {
        let (h, h1) = (p.h(t), p.h1(t));
        let (st, ct) = theta.sin_cos();
        let (sa, ca) = alpha.sin_cos();
        (st * h1 * sa - ct * ca) / (h * sa)
    }

    /// Derivatives `(t', alpha', theta')` of a soliton profile.
    pub fn profile_rhs(p: &WarpingProfile, state: [f64; 3], c: f64, m: usize) -> [f64; 3] {
        let [t, alpha, theta] = state;
        let (h, h1) = (p.h(t), p.h1(t));
        let (st, ct) = theta.sin_cos();
        let k2 = orbit_curvature(p, t, alpha, theta);
        let support = -h * st;
        [ct, st / h, -(h1 / h) * st - (m as f64 - 1.0) * k2 + c * support]
    }

    #[derive(Debug, Clone, Serialize)]
    pub struct WarpedProfile {
        pub s: Vec<f64>,
        pub t: Vec<f64>,
        pub alpha: Vec<f64>,
        pub theta: Vec<f64>,
        pub residual_sup: f64,
    }

    /// Fixed-step RK4 from a point off the axis.
    pub fn shoot(
        p: &WarpingProfile,
        start: [f64; 3],
        c: f64,
        m: usize,
        step: f64,
        length: f64,
    ) -> Result<WarpedProfile> {
        if !(step > 0.0) || !(length >= step) {
            return Err(Error::config("need step > 0 and length >= step"));
        }
        p.check(start[0])?;
        if !(start[1] > 0.0 && start[1] < std::f64::consts::PI) {
            return Err(Error::config("free launches need 0 < alpha < pi"));
        }
        let steps = (length / step + 1e-9).floor() as usize;
        let mut pts = vec![start];
        let mut y = start;
        for _ in 0..steps {
            y = rk4_step(&|z: &[f64; 3]| profile_rhs(p, *z, c, m), y, step);
            if !y.iter().all(|v| v.is_finite()) || !p.contains(y[0]) || !(y[1] > 0.0 && y[1] < std::f64::consts::PI) {
                break;
            }
            pts.push(y);
        }
        let theta: Vec<f64> = pts.iter().map(|q| q[2]).collect();
        let dtheta = diff4(&theta, step);
        let mut residual_sup = 0.0f64;
        for (i, q) in pts.iter().enumerate() {
            let (h, h1) = (p.h(q[0]), p.h1(q[0]));
            let k1 = dtheta[i] + (h1 / h) * q[2].sin();
            let k2 = orbit_curvature(p, q[0], q[1], q[2]);
            let res = k1 + (m as f64 - 1.0) * k2 + c * h * q[2].sin();
            residual_sup = residual_sup.max(res.abs());
        }
        Ok(WarpedProfile {
            s: (0..pts.len()).map(|i| i as f64 * step).collect(),
            t: pts.iter().map(|q| q[0]).collect(),
            alpha: pts.iter().map(|q| q[1]).collect(),
            theta,
            residual_sup,
        })
    }

}
