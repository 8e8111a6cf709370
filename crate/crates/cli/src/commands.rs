use clap::Args;
use mcf_solitons::flows::{closed_form_error, integrate_flow, leaf_consistency, ClosedFormFlow, FlowSpec, DEFAULT_STEP};
use mcf_solitons::geometry::{ProfileKind, SolitonContext, WarpedSpace, WarpingProfile};
use mcf_solitons::graph::{
    deviation_from, grim_reaper_grid, grim_reaper_problem, self_similarity_check, solve_translator, translator_residual,
    GraphGrid, NewtonOptions, Topology, NEWTON_MAX_ITERS, NEWTON_TOL,
};
use mcf_solitons::identities::{csv_summary, height_estimate_check, run_all, IdentityReport, ImmersionSample};
use mcf_solitons::report::csv_table;
use mcf_solitons::rotational::{shoot, Launch, ShootingConfig, DEFAULT_STEP as SHOOT_STEP};
use mcf_solitons::stability::{assemble_l, eigen_check_h, eigen_lowest, lambda_coefficient};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// What a command produced.
pub struct Output {
    pub config: Value,
    pub result: Value,
    /// File name and CSV text.
    pub tables: Vec<(&'static str, String)>,
    pub failure: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn required<T>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(format!("missing required parameter '{name}'")))
}

fn pair(v: &Option<Vec<f64>>, name: &str) -> CliResult<Option<(f64, f64)>> {
    match v.as_deref() {
        None => Ok(None),
        Some([a, b]) => Ok(Some((*a, *b))),
        Some(other) => Err(CliError::config(format!("'{name}' takes two numbers, got {}", other.len()))),
    }
}

/// Warped product ambient `I x_h P^n`.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AmbientArgs {
    /// Catalog profile name or `custom`.
    #[arg(long)]
    pub profile: Option<String>,
    /// Warping function of `t` for custom profiles.
    #[arg(long)]
    pub h: Option<String>,
    /// First derivative of the custom warping function.
    #[arg(long)]
    pub h1: Option<String>,
    /// Second derivative of the custom warping function.
    #[arg(long)]
    pub h2: Option<String>,
    /// Open interval of a custom profile.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,
    /// Fiber curvature; defaults to the space-form value of the profile.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
}

impl AmbientArgs {
    fn build(&self, n: usize) -> CliResult<WarpedSpace> {
        let kind: ProfileKind = self.profile.as_deref().unwrap_or("euclidean_cone").parse()?;
        let profile = if kind == ProfileKind::Custom {
            let (lo, hi) = required(pair(&self.interval, "interval")?, "interval")?;
            let h = required(self.h.as_deref(), "h")?;
            WarpingProfile::custom(lo, hi, h, self.h1.as_deref(), self.h2.as_deref())?
        } else {
            let p = WarpingProfile::catalog(kind)?;
            match pair(&self.interval, "interval")? {
                Some((lo, hi)) => p.with_interval(lo, hi)?,
                None => p,
            }
        };
        let kappa = match self.kappa.or(kind.space_form_kappa()) {
            Some(k) => k,
            None => return Err(CliError::config("custom profiles need an explicit 'kappa'")),
        };
        Ok(WarpedSpace::new(profile, kappa, n)?)
    }

    fn echo(&self, space: &WarpedSpace) -> Value {
        let (lo, hi) = space.profile.interval();
        json!({
            "profile": space.profile.name(),
            "h": self.h, "h1": self.h1, "h2": self.h2,
            "interval": [lo, hi],
            "kappa": space.kappa,
            "n": space.n,
        })
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LeavesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ambient: AmbientArgs,
    /// Soliton dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Fiber dimension; defaults to `m`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Soliton constant.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Base point of the potential.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// Search interval for slice solitons.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub bracket: Option<Vec<f64>>,
}

fn context(ambient: &AmbientArgs, m: usize, n: Option<usize>, c: f64, t0: Option<f64>) -> CliResult<SolitonContext> {
    let space = ambient.build(n.unwrap_or(m))?;
    Ok(match t0 {
        Some(t0) => SolitonContext::new(space, c, m, t0)?,
        None => SolitonContext::with_default_base(space, c, m)?,
    })
}

pub fn leaves(args: &LeavesArgs) -> CliResult<Output> {
    let m = args.m.unwrap_or(2);
    let ctx = context(&args.ambient, m, args.n, required(args.c, "c")?, args.t0)?;
    let (lo, hi) = match pair(&args.bracket, "bracket")? {
        Some(b) => b,
        None => {
            let pts = ctx.space.profile.sample_points(2);
            (pts[0], pts[1])
        }
    };
    let found = ctx.soliton_leaves(lo, hi)?;
    let mut config = args.ambient.echo(&ctx.space);
    config["m"] = json!(m);
    config["c"] = json!(ctx.c);
    config["t0"] = json!(ctx.t0);
    config["bracket"] = json!([lo, hi]);
    let rows: Vec<[f64; 3]> = found.iter().map(|l| [l.t_bar, l.zeta_residual, l.tangential as u8 as f64]).collect();
    Ok(Output {
        config,
        result: json!({ "leaves": to_value(&found) }),
        tables: vec![("leaves.csv", csv_table(&["t_bar", "zeta_residual", "tangential"], rows))],
        failure: None,
    })
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ambient: AmbientArgs,
    /// Slice dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Initial slice.
    #[arg(long, allow_negative_numbers = true)]
    pub t_init: Option<f64>,
    /// Start of the flow window.
    #[arg(long, allow_negative_numbers = true)]
    pub tau_lo: Option<f64>,
    /// End of the flow window.
    #[arg(long, allow_negative_numbers = true)]
    pub tau_hi: Option<f64>,
    /// Output spacing in `tau`.
    #[arg(long)]
    pub step: Option<f64>,
    /// Soliton constant to locate along the flow.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
}

pub fn flow(args: &FlowArgs) -> CliResult<Output> {
    let n = args.n.unwrap_or(2);
    let t_init = required(args.t_init, "t_init")?;
    let space = args.ambient.build(n)?;
    let c = args.c.unwrap_or(-1.0);
    let ctx = SolitonContext::new(space.clone(), c, n, t_init)?;
    let spec = FlowSpec {
        ctx: ctx.clone(),
        t_init,
        tau_lo: args.tau_lo.unwrap_or(-1.0),
        tau_hi: args.tau_hi.unwrap_or(1.0),
        step: args.step.unwrap_or(DEFAULT_STEP),
    };
    let traj = integrate_flow(&spec)?;
    let kind = space.profile.kind();
    let closed_form = match ClosedFormFlow::new(kind, n, t_init) {
        Ok(exact) if kind != ProfileKind::Custom => closed_form_error(&traj, &exact).ok(),
        _ => None,
    };
    let leaf = match args.c {
        Some(_) => Some(to_value(&leaf_consistency(&ctx, &traj)?)),
        None => None,
    };
    let mut config = args.ambient.echo(&space);
    config["t_init"] = json!(t_init);
    config["tau_lo"] = json!(spec.tau_lo);
    config["tau_hi"] = json!(spec.tau_hi);
    config["step"] = json!(spec.step);
    config["c"] = json!(args.c);
    let (tau_min, tau_max) = traj.tau_range();
    Ok(Output {
        config,
        result: json!({
            "samples": traj.len(),
            "halted": traj.halted,
            "tau_range": [tau_min, tau_max],
            "closed_form_error": closed_form,
            "leaf": leaf,
        }),
        tables: vec![("flow.csv", traj.to_csv())],
        failure: None,
    })
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootArgs {
    /// Profile dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Soliton constant.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Axis crossing, or the starting abscissa with `--r0`.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Starting distance from the axis; selects a free launch.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Tangent angle of a free launch.
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
    /// Arclength step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Arclength budget.
    #[arg(long)]
    pub max_length: Option<f64>,
}

pub fn shoot_profile(args: &ShootArgs) -> CliResult<Output> {
    let m = args.m.unwrap_or(2);
    let c = args.c.unwrap_or(-1.0);
    let x0 = args.x0.unwrap_or_else(|| (-(m as f64) / c).abs().sqrt());
    let launch = match args.r0 {
        Some(r0) => Launch::Free { x0, r0, theta0: args.theta0.unwrap_or(0.0) },
        None => Launch::Axis { x0 },
    };
    let step = args.step.unwrap_or(SHOOT_STEP);
    let max_length = args.max_length.unwrap_or(10.0 * x0.abs().max(1.0));
    let curve = shoot(&ShootingConfig::new(launch, c, m, max_length).with_step(step))?;
    let sample = ImmersionSample::from_curve(&curve, "shot")?;
    let checks = run_all(&sample);
    let height = height_estimate_check(&sample).ok();
    let (speed, normal) = curve.frame_defects();
    Ok(Output {
        config: json!({ "m": m, "c": c, "launch": to_value(&launch), "step": step, "max_length": max_length }),
        result: json!({
            "stop": to_value(&curve.stop),
            "samples": curve.len(),
            "axis_ends": [curve.axis_start, curve.axis_end],
            "soliton_residual_sup": curve.soliton_residual()?.sup,
            "frame_defects": { "speed": speed, "normal": normal },
            "max_distance_from_origin": curve.max_distance_from_origin(),
            "identities": to_value(&checks),
            "height": height.map(|h| to_value(&h)),
        }),
        tables: vec![("profile.csv", curve.to_csv()?), ("identities.csv", csv_summary(&checks))],
        failure: None,
    })
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TranslateArgs {
    /// Fiber dimension, 1 or 2.
    #[arg(long)]
    pub d: Option<usize>,
    /// Translation speed.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Nodes per axis.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub nodes: Option<usize>,
    /// `grimreaper` (Dirichlet data of the grim reaper) or `periodic`.
    #[arg(long)]
    pub domain: Option<String>,
    /// Distance kept from the asymptotes `x = +-pi/2`.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Newton residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Newton iteration budget.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Also run the graph flow for this long and measure self-similarity.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Time step of the self-similarity run.
    #[arg(long)]
    pub dtau: Option<f64>,
}

pub fn translate(args: &TranslateArgs) -> CliResult<Output> {
    let d = args.d.unwrap_or(1);
    let c = args.c.unwrap_or(1.0);
    let n = args.nodes.unwrap_or(400);
    let margin = args.margin.unwrap_or(0.05);
    let domain = args.domain.clone().unwrap_or_else(|| "grimreaper".into());
    let reaper = |x: f64, _: f64| -x.cos().ln();
    let grid = match (domain.as_str(), d) {
        ("grimreaper", 1) => grim_reaper_problem(margin, n)?,
        ("grimreaper", 2) => {
            let a = std::f64::consts::FRAC_PI_2 - margin;
            let mut g = GraphGrid::square(Topology::Dirichlet, -a, a, n)?.with_fn(reaper);
            for k in 0..g.u.len() {
                if !g.is_boundary(k) {
                    g.u[k] = 0.0;
                }
            }
            g
        }
        ("periodic", 1) => GraphGrid::interval(Topology::Periodic, 0.0, 2.0 * std::f64::consts::PI, n)?,
        ("periodic", 2) => GraphGrid::square(Topology::Periodic, 0.0, 2.0 * std::f64::consts::PI, n)?,
        (_, 1 | 2) => return Err(CliError::config(format!("unknown domain '{domain}'; use grimreaper or periodic"))),
        _ => return Err(CliError::config(format!("fiber dimension d = {d} must be 1 or 2"))),
    };
    let opts = NewtonOptions { tol: args.tol.unwrap_or(NEWTON_TOL), max_iters: args.max_iters.unwrap_or(NEWTON_MAX_ITERS) };
    let sol = solve_translator(&grid, c, opts)?;
    let deviation = (domain == "grimreaper" && c == 1.0).then(|| deviation_from(&sol.grid, reaper));
    let similarity = match args.horizon {
        Some(h) => Some(to_value(&self_similarity_check(&sol.grid, c, h, args.dtau.unwrap_or(1e-5))?)),
        None => None,
    };
    let residual = translator_residual(&sol.grid, c);
    Ok(Output {
        config: json!({
            "d": d, "c": c, "N": n, "domain": domain, "margin": margin,
            "tol": opts.tol, "max_iters": opts.max_iters, "horizon": args.horizon, "dtau": args.dtau,
        }),
        result: json!({
            "newton_iters": sol.newton_iters,
            "residual_sup": sol.residual_sup,
            "history": sol.history,
            "oracle_deviation": deviation,
            "self_similarity": similarity,
        }),
        tables: vec![("solution.csv", sol.grid.to_csv(&residual.values))],
        failure: None,
    })
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyArgs {
    /// `exact`, `shot`, `graph`, `all`, or `slice` for the slice `--t`.
    #[arg(long)]
    pub suite: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ambient: AmbientArgs,
    /// Sample dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Soliton constant.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Base point of the potential.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// Slice checked by the `slice` suite.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Step of shot samples and spacing of graph samples.
    #[arg(long)]
    pub step: Option<f64>,
}

fn exact_suite() -> CliResult<Vec<ImmersionSample>> {
    let slice = |p: WarpingProfile, kappa: f64, m: usize, c: f64, t0: f64, t: f64| -> CliResult<ImmersionSample> {
        let ctx = SolitonContext::new(WarpedSpace::new(p, kappa, m)?, c, m, t0)?;
        Ok(ImmersionSample::slice(&ctx, t)?)
    };
    Ok(vec![
        slice(WarpingProfile::euclidean_cone(), 1.0, 2, -1.0, 0.0, 2f64.sqrt())?,
        slice(WarpingProfile::horospherical(), 0.0, 3, -3.0, 0.0, 0.0)?,
        slice(WarpingProfile::geodesic_spherical(), 1.0, 2, -1.0, 1.0, (1.0 + 2f64.sqrt()).acosh())?,
        ImmersionSample::round_sphere(2, -1.0, 201)?,
        ImmersionSample::cylinder(2, -1.0, 4.0, 101)?,
        ImmersionSample::plane(2, -1.0, 3.0, 101)?,
    ])
}

fn shot_suite(step: f64) -> CliResult<Vec<ImmersionSample>> {
    let mut out = Vec::new();
    for x0 in [2f64.sqrt(), 1.0, 0.5] {
        let curve = shoot(&ShootingConfig::new(Launch::Axis { x0 }, -1.0, 2, 1.0).with_step(step))?;
        out.push(ImmersionSample::from_curve(&curve, format!("shot x0={x0}"))?);
    }
    Ok(out)
}

fn graph_suite(step: f64) -> CliResult<Vec<ImmersionSample>> {
    let n = ((std::f64::consts::PI - 0.1) / step).round().max(8.0) as usize;
    let sol = solve_translator(&grim_reaper_problem(0.05, n)?, 1.0, NewtonOptions::default())?;
    Ok(vec![
        ImmersionSample::from_graph(&grim_reaper_grid(0.05, n)?, 1.0, "grim reaper")?,
        ImmersionSample::from_graph(&sol.grid, 1.0, "solved translator")?,
    ])
}

pub fn verify(args: &VerifyArgs) -> CliResult<Output> {
    let suite = args.suite.clone().unwrap_or_else(|| "exact".into());
    let step = args.step.unwrap_or(2e-3);
    let samples = match suite.as_str() {
        "exact" => exact_suite()?,
        "shot" => shot_suite(step)?,
        "graph" => graph_suite(step)?,
        "all" => {
            let mut all = exact_suite()?;
            all.extend(shot_suite(step)?);
            all.extend(graph_suite(step)?);
            all
        }
        "slice" => {
            let ctx = context(&args.ambient, args.m.unwrap_or(2), None, args.c.unwrap_or(-1.0), args.t0)?;
            vec![ImmersionSample::slice(&ctx, required(args.t, "t")?)?]
        }
        other => return Err(CliError::config(format!("unknown suite '{other}'; use exact, shot, graph, all or slice"))),
    };
    let mut reports: Vec<IdentityReport> = samples.iter().flat_map(run_all).collect();
    reports.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.sample.cmp(&b.sample)));
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| format!("{} on {}", r.name, r.sample)).collect();
    Ok(Output {
        config: json!({ "suite": suite, "step": step }),
        result: json!({ "passed": failed.is_empty(), "checks": reports.len(), "reports": to_value(&reports) }),
        tables: vec![("identities.csv", csv_summary(&reports))],
        failure: (!failed.is_empty()).then(|| failed.join("; ")),
    })
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumArgs {
    /// `sphere`, `cylinder`, `plane`, `reaper` or `shot`.
    #[arg(long)]
    pub sample: Option<String>,
    /// Sample dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Soliton constant; defaults to 1 for `reaper`, else -1.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Number of eigenpairs.
    #[arg(long)]
    pub k: Option<usize>,
    /// Grid nodes.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub nodes: Option<usize>,
    /// Cylinder length or plane radius.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Grim reaper margin.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Axis crossing of a shot sample.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Arclength step of a shot sample.
    #[arg(long)]
    pub step: Option<f64>,
}

pub fn spectrum(args: &SpectrumArgs) -> CliResult<Output> {
    let kind = args.sample.clone().unwrap_or_else(|| "sphere".into());
    let m = args.m.unwrap_or(2);
    let c = args.c.unwrap_or(if kind == "reaper" { 1.0 } else { -1.0 });
    let n = args.nodes.unwrap_or(401);
    let k = args.k.unwrap_or(3);
    let sample = match kind.as_str() {
        "sphere" => ImmersionSample::round_sphere(m, c, n)?,
        "cylinder" => ImmersionSample::cylinder(m, c, args.extent.unwrap_or(4.0), n)?,
        "plane" => ImmersionSample::plane(m, c, args.extent.unwrap_or(4.0), n)?,
        "reaper" => ImmersionSample::from_graph(&grim_reaper_grid(args.margin.unwrap_or(0.2), n)?, c, "grim reaper")?,
        "shot" => {
            let x0 = args.x0.unwrap_or_else(|| (-(m as f64) / c).abs().sqrt());
            let curve = shoot(&ShootingConfig::new(Launch::Axis { x0 }, c, m, 10.0 * x0.abs().max(1.0)).with_step(args.step.unwrap_or(SHOOT_STEP)))?;
            ImmersionSample::from_curve(&curve, "shot")?
        }
        other => return Err(CliError::config(format!("unknown sample '{other}'"))),
    };
    let op = assemble_l(&sample)?;
    let report = eigen_lowest(&op, k)?;
    let check = eigen_check_h(&sample, &op);
    let lambda = lambda_coefficient(&sample).ok();
    let header: Vec<String> = std::iter::once("s".to_string()).chain((1..=k).map(|j| format!("phi_{j}"))).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..sample.len()).map(|i| {
        let mut row = vec![sample.s[i]];
        for phi in &report.eigenfunctions {
            row.push(if (op.first..=op.last).contains(&i) { phi[i - op.first] } else { 0.0 });
        }
        row
    });
    Ok(Output {
        config: json!({
            "sample": kind, "m": m, "c": c, "k": k, "N": n,
            "extent": args.extent, "margin": args.margin, "x0": args.x0, "step": args.step,
        }),
        result: json!({
            "boundary": to_value(&op.boundary),
            "spectrum": to_value(&report),
            "eigen_check_h": check,
            "lambda_coefficient": lambda,
        }),
        tables: vec![("eigenfunctions.csv", csv_table(&header, rows))],
        failure: None,
    })
}
