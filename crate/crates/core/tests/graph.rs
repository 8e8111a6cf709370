use mcf_solitons::graph::*;
use mcf_solitons::numerics::fd::observed_order;

fn reaper(x: f64, _y: f64) -> f64 {
    -x.cos().ln()
}

fn solve(n: usize) -> TranslatorSolution {
    solve_translator(&grim_reaper_problem(0.05, n).unwrap(), 1.0, NewtonOptions::default()).unwrap()
}

#[test]
fn grim_reaper_from_zero() {
    let sol = solve(400);
    assert!(sol.newton_iters <= 12, "{} iterations", sol.newton_iters);
    assert!(sol.residual_sup <= 1e-10);
    let dev = deviation_from(&sol.grid, reaper);
    assert!(dev <= 5e-5, "deviation {dev}");
    let finer = deviation_from(&solve(800).grid, reaper);
    assert!(observed_order(dev, finer, 2.0) >= 1.9);
}

#[test]
fn newton_tail_is_quadratic() {
    let h = solve(400).history;
    let tail: Vec<f64> = h.iter().copied().skip_while(|&r| r >= 1e-3).collect();
    assert!(tail.len() >= 3);
    let ratios: Vec<f64> = tail.windows(2).take(tail.len() - 2).map(|w| w[1] / (w[0] * w[0])).collect();
    assert!(ratios.iter().all(|&c| c < 1e3), "{ratios:?}");
}

#[test]
fn product_grim_reaper_in_two_dimensions() {
    let a = std::f64::consts::FRAC_PI_2 - 0.3;
    let errs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let mut g = GraphGrid::square(Topology::Dirichlet, -a, a, n).unwrap().with_fn(reaper);
            for k in 0..g.u.len() {
                if !g.is_boundary(k) {
                    g.u[k] = 0.0;
                }
            }
            let sol = solve_translator(&g, 1.0, NewtonOptions::default()).unwrap();
            assert!(sol.residual_sup <= 1e-10);
            deviation_from(&sol.grid, reaper)
        })
        .collect();
    assert!(errs[2] < 1e-3, "{errs:?}");
    assert!(observed_order(errs[1], errs[2], 2.0) >= 1.8, "{errs:?}");
}

#[test]
fn solved_translator_moves_rigidly() {
    let sol = solve_translator(&grim_reaper_problem(0.05, 64).unwrap(), 1.0, NewtonOptions::default()).unwrap();
    let next = parabolic_step_with(&sol.grid, 1e-4, 1.0).unwrap();
    let dev = next.u.iter().zip(&sol.grid.u).map(|(a, b)| (a - b - 1e-4).abs()).fold(0.0, f64::max);
    assert!(dev <= 1e-6, "{dev}");
    let v = normal_velocity(&sol.grid);
    for k in 0..v.len() {
        if !sol.grid.is_boundary(k) {
            assert!((v[k] - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn self_similarity_of_grim_reaper() {
    let sol = solve(400);
    let rep = self_similarity_check(&sol.grid, 1.0, 0.1, 1e-5).unwrap();
    assert!(rep.deviation <= 1e-4, "{}", rep.deviation);
}

#[test]
fn self_similarity_negative_control() {
    let a = std::f64::consts::FRAC_PI_2 - 0.05;
    let g = GraphGrid::interval(Topology::Dirichlet, -a, a, 100).unwrap().with_fn(|x, _| 0.5 * x * x);
    let rep = self_similarity_check(&g, 1.0, 0.1, max_stable_step(&g)).unwrap();
    assert!(rep.deviation > 1e-2, "{}", rep.deviation);
}

#[test]
fn constant_graph_is_self_similar_with_zero_speed() {
    let g = GraphGrid::interval(Topology::Dirichlet, 0.0, 1.0, 16).unwrap().with_fn(|_, _| 1.5);
    assert_eq!(self_similarity_check(&g, 0.0, 0.01, max_stable_step(&g)).unwrap().deviation, 0.0);
}

#[test]
fn periodic_sine_decays_consistently() {
    let run = |n: usize| {
        let g = GraphGrid::interval(Topology::Periodic, 0.0, 1.0, n)
            .unwrap()
            .with_fn(|x, _| 0.05 * (2.0 * std::f64::consts::PI * x).sin());
        let dt = max_stable_step(&GraphGrid::interval(Topology::Periodic, 0.0, 1.0, 64).unwrap());
        let mut h = g;
        for _ in 0..200 {
            h = parabolic_step(&h, dt).unwrap();
        }
        h.u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let (coarse, fine) = (run(32), run(64));
    assert!(fine < 0.05);
    assert!((coarse - fine).abs() < 1e-3 * 0.05 * 4.0);
}
