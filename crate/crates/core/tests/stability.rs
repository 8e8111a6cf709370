use std::f64::consts::PI;

use mcf_solitons::graph::grim_reaper_grid;
use mcf_solitons::identities::ImmersionSample;
use mcf_solitons::numerics::fd::observed_order;
use mcf_solitons::rotational::{shoot, Launch, ShootingConfig};
use mcf_solitons::stability::*;
use proptest::prelude::*;

fn reaper_with(margin: f64, n: usize) -> ImmersionSample {
    ImmersionSample::from_graph(&grim_reaper_grid(margin, n).unwrap(), 1.0, "reaper").unwrap()
}

fn reaper(n: usize) -> ImmersionSample {
    reaper_with(0.05, n)
}

fn arc() -> ImmersionSample {
    let cfg = ShootingConfig::new(Launch::Axis { x0: 1.0 }, -1.0, 2, 1.0).with_step(4e-3);
    ImmersionSample::from_curve(&shoot(&cfg).unwrap(), "arc").unwrap()
}

fn samples() -> Vec<ImmersionSample> {
    vec![
        ImmersionSample::round_sphere(2, -1.0, 201).unwrap(),
        ImmersionSample::cylinder(2, -1.0, 4.0, 101).unwrap(),
        ImmersionSample::plane(2, -1.0, 3.0, 101).unwrap(),
        reaper(200),
        arc(),
    ]
}

#[test]
fn shrinker_sphere_constant_mode() {
    let s = ImmersionSample::round_sphere(2, -1.0, 801).unwrap();
    let op = assemble_l(&s).unwrap();
    assert_eq!(op.boundary, (Boundary::Natural, Boundary::Natural));
    let sp = eigen_lowest(&op, 3).unwrap();
    assert!((sp.eigenvalues[0] - 2.0 * s.ctx.c).abs() <= 1e-8);
    assert_eq!(sp.index, 2);
    for (lam, want) in sp.eigenvalues.iter().zip([-2.0, -1.0, 1.0]) {
        assert!((lam - want).abs() < 1e-4, "{:?}", sp.eigenvalues);
    }
    assert!(sp.residuals.iter().all(|r| *r <= 1e-8));
}

#[test]
fn mean_curvature_is_an_eigenfunction() {
    for s in &samples()[..2] {
        assert!(eigen_check_h(s, &assemble_l(s).unwrap()) <= 1e-10, "{}", s.label);
    }
    let (a, b) = (reaper_with(0.2, 200), reaper_with(0.2, 400));
    let (ra, rb) = (eigen_check_h(&a, &assemble_l(&a).unwrap()), eigen_check_h(&b, &assemble_l(&b).unwrap()));
    assert!(observed_order(ra, rb, 2.0) >= 1.9, "{ra} {rb}");
}

#[test]
fn reaper_potential_is_second_fundamental_form() {
    let s = reaper(100);
    let op = assemble_l(&s).unwrap();
    assert_eq!(op.boundary, (Boundary::Dirichlet, Boundary::Dirichlet));
    for i in 0..s.len() {
        assert!((op.potential[i] - s.norm2.value[i]).abs() < 1e-14);
    }
}

#[test]
fn plane_disc_smoke() {
    let s = ImmersionSample::plane(2, -1.0, 4.0, 201).unwrap();
    let sp = eigen_lowest(&assemble_l(&s).unwrap(), 2).unwrap();
    assert!(sp.residuals.iter().all(|r| *r <= 1e-8));
    assert!(sp.eigenvalues[0] < sp.eigenvalues[1]);
}

#[test]
fn dirichlet_eigenvalue_grows_on_subdomains() {
    let op = assemble_l(&reaper(300)).unwrap();
    let mut previous = f64::NEG_INFINITY;
    for cut in [0, 20, 50, 90, 130] {
        let w = op.window(op.first + cut, op.last - cut).unwrap();
        let lam = eigen_lowest(&w, 1).unwrap().eigenvalues[0];
        assert!(lam >= previous, "{lam} < {previous}");
        previous = lam;
    }
    assert!(op.window(0, op.last).is_err());
}

#[test]
fn plane_weighted_sphere_volume() {
    let s = ImmersionSample::plane(2, -1.0, 6.0, 601).unwrap();
    let r: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
    let v = weighted_volume(&s, &r).unwrap();
    for k in 1..r.len() {
        let want = 2.0 * PI * r[k] * (-0.5 * r[k] * r[k]).exp();
        assert!((v.log_sphere[k].exp() - want).abs() <= 1e-8, "{} {}", r[k], v.log_sphere[k].exp() - want);
        let ball = 2.0 * PI * (1.0 - (-0.5 * r[k] * r[k]).exp());
        assert!((v.ball[k] - ball).abs() <= 1e-8);
    }
}

#[test]
fn round_sphere_total_volume() {
    let s = ImmersionSample::round_sphere(2, -1.0, 401).unwrap();
    let radius = 2f64.sqrt();
    let v = weighted_volume(&s, &[0.0, PI * radius]).unwrap();
    let want = (s.ctx.c * s.eta.value[0]).exp() * 4.0 * PI * radius * radius;
    assert!((v.ball[1] - want).abs() <= 1e-8 * want);
}

#[test]
fn reaper_balls_increase() {
    let s = reaper(400);
    let r: Vec<f64> = (0..35).map(|k| 0.1 * k as f64).collect();
    let v = weighted_volume(&s, &r).unwrap();
    assert!(v.ball.windows(2).all(|w| w[1] > w[0]));
    assert!(weighted_volume(&s, &[1.0, 0.5]).is_err());
}

fn catalog() -> [(&'static str, fn(f64) -> f64, ParabolicityVerdict); 3] {
    [
        ("shrinker plane", |r: f64| (2.0 * PI * r).ln() - 0.5 * r * r, ParabolicityVerdict::Divergent),
        ("flat plane", |r: f64| (2.0 * PI * r).ln(), ParabolicityVerdict::Divergent),
        ("cubic growth", |r: f64| (4.0 * PI * r * r).ln(), ParabolicityVerdict::Convergent),
    ]
}

#[test]
fn parabolicity_catalog_is_stable() {
    for (name, f, want) in catalog() {
        for r_max in [20.0, 40.0] {
            let r = (1..=400).map(|k| r_max * k as f64 / 400.0).collect();
            let rep = parabolicity_volume_test(&VolumeProfile::from_log_fn(r, f).unwrap(), r_max).unwrap();
            assert_eq!(rep.verdict, want, "{name} at {r_max}: {}", rep.tail_exponent);
            assert!(rep.heuristic);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn operators_are_weighted_self_adjoint(
        which in 0usize..5,
        a in prop::collection::vec(-1.0f64..1.0, 16),
        b in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let s = &samples()[which];
        let op = assemble_l(s).unwrap();
        let d = op.dim();
        let f: Vec<f64> = (0..d).map(|k| a[k % 16] * (1.0 + (k as f64).sin())).collect();
        let g: Vec<f64> = (0..d).map(|k| b[(k * 7) % 16] + (k as f64 / d as f64)).collect();
        let (lf, lg) = (op.apply(&f), op.apply(&g));
        let lhs = op.weighted_dot(&lf, &g);
        let rhs = op.weighted_dot(&f, &lg);
        let scale = op.weighted_dot(&lf, &lf).sqrt() * op.weighted_dot(&g, &g).sqrt()
            + op.weighted_dot(&f, &f).sqrt() * op.weighted_dot(&lg, &lg).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1.0), "{} {} {}", s.label, lhs, rhs);
    }
}
