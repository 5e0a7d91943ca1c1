//! Acceptance criteria 1-11. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing output capture) before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tll_core::dyadic::{block_cap, build_standard_family};
use tll_core::helmholtz::{gradient, helmholtz_project, helmholtz_split, relative_divergence, stokes_semigroup};
use tll_core::nse::checkpoint::load_checkpoint;
use tll_core::nse::monitor::{blowup_monitor, Verdict};
use tll_core::nse::{
    nonlinear_term, taylor_green, Forcing, Scheme, Solver, SolverConfig, Trajectory, TrajectorySample,
};
use tll_core::operators::{bessel_potential, fractional_power_resolved, heat_semigroup, laplace_resolvent};
use tll_core::rearrangement::{lorentz_quasinorm, LorentzParams};
use tll_core::spectral::{GridField, Shape};
use tll_core::tll::{trace_norm, TllParams, TraceParams};
use tll_core::verify::corpus::solenoidal_field;
use tll_core::verify::{run_all, VerifyConfig};

fn report(n: u32, title: &str, passed: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let ok = passed && elapsed < limit;
    let line = format!(
        "criterion {n:>2} {title}: {} ({detail}; {:.2}s of {:.0}s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(passed, "criterion {n} failed: {detail}");
    assert!(elapsed < limit, "criterion {n} exceeded its runtime budget");
}

fn random_field(shape: Shape, rng: &mut ChaCha8Rng) -> GridField {
    let values: Vec<f64> = (0..shape.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GridField::from_real(shape, &values).unwrap()
}

fn rel(a: &GridField, b: &GridField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(a.l2_norm()).max(f64::MIN_POSITIVE)
}

#[test]
fn c01_lorentz_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c = rng.gen_range(0.1..10.0);
        let p = rng.gen_range(1.1..6.0);
        let r = rng.gen_range(1.0..8.0);
        let m_pts = 32usize;
        let shape = Shape::scalar(2, m_pts).unwrap();
        let cells = rng.gen_range(1..shape.points());
        let mut order: Vec<usize> = (0..shape.points()).collect();
        for i in 0..cells {
            let j = rng.gen_range(i..order.len());
            order.swap(i, j);
        }
        let mut values = vec![0.0; shape.points()];
        for &i in &order[..cells] {
            values[i] = c;
        }
        let field = GridField::from_real(shape, &values).unwrap();
        let measure = cells as f64 * (2.0 * PI / m_pts as f64).powi(2);
        let oracle = c * measure.powf(1.0 / p) * (p / r).powf(1.0 / r);
        let got = lorentz_quasinorm(&field, LorentzParams::new(p, r).unwrap());
        worst = worst.max((got - oracle).abs() / oracle);
        // r = p against a directly summed L_p norm of a generic field
        let g = random_field(shape, &mut rng);
        let cell = (2.0 * PI / m_pts as f64).powi(2);
        let lp = (g.data().iter().map(|v| v.norm().powf(p)).sum::<f64>() * cell).powf(1.0 / p);
        let got = lorentz_quasinorm(&g, LorentzParams::new(p, p).unwrap());
        worst = worst.max((got - lp).abs() / lp);
    }
    report(1, "Lorentz exactness", worst <= 1e-12, &format!("max rel err {worst:.2e}"), start.elapsed(), Duration::from_secs(1));
}

#[test]
fn c02_partition_of_unity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for dim in 1..=3 {
        let family = build_standard_family(dim, 7).unwrap();
        let radius = 2f64.powi(family.max_block() as i32 - 1);
        for _ in 0..10_000 {
            let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let len = radius * rng.gen_range(0.0f64..1.0);
            let xi: Vec<f64> = dir.iter().map(|x| x / norm * len).collect();
            let sum: f64 = (0..=family.max_block()).map(|k| family.eval(k, &xi)).sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    report(2, "dyadic partition of unity", worst <= 1e-12, &format!("max |Σφ−1| {worst:.2e}"), start.elapsed(), Duration::from_secs(5));
}

#[test]
fn c03_multiplier_calculus() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let u = random_field(Shape::scalar(dim, 64).unwrap(), &mut rng);
        let (l, m) = (Complex64::new(1.5, 0.7), Complex64::new(3.0, -2.0));
        // R(λ) − R(μ) = (μ − λ) R(λ) R(μ)
        let lhs = laplace_resolvent(&u, l).unwrap().sub(&laplace_resolvent(&u, m).unwrap()).unwrap();
        let rhs = laplace_resolvent(&laplace_resolvent(&u, m).unwrap(), l).unwrap().scale(m - l);
        worst = worst.max(rel(&lhs, &rhs));
        let (t, s) = (0.013, 0.029);
        let ts = heat_semigroup(&heat_semigroup(&u, s).unwrap(), t).unwrap();
        worst = worst.max(rel(&ts, &heat_semigroup(&u, t + s).unwrap()));
        let half = fractional_power_resolved(&fractional_power_resolved(&u, 0.5).unwrap(), 0.5).unwrap();
        worst = worst.max(rel(&half, &fractional_power_resolved(&u, 1.0).unwrap()));
        let half = bessel_potential(&bessel_potential(&u, 0.5), 0.5);
        worst = worst.max(rel(&half, &bessel_potential(&u, 1.0)));
        let ops: Vec<Box<dyn Fn(&GridField) -> GridField>> = vec![
            Box::new(move |f| laplace_resolvent(f, l).unwrap()),
            Box::new(move |f| heat_semigroup(f, t).unwrap()),
            Box::new(|f| fractional_power_resolved(f, 0.3).unwrap()),
            Box::new(|f| bessel_potential(f, -1.5)),
        ];
        for (i, a) in ops.iter().enumerate() {
            for b in &ops[i + 1..] {
                worst = worst.max(rel(&a(&b(&u)), &b(&a(&u))));
            }
        }
    }
    report(3, "multiplier calculus", worst <= 1e-10, &format!("max rel err {worst:.2e}"), start.elapsed(), Duration::from_secs(10));
}

#[test]
fn c04_helmholtz() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for _ in 0..20 {
            let u = random_field(Shape::vector(dim, 64).unwrap(), &mut rng);
            let pu = helmholtz_project(&u).unwrap();
            worst = worst.max(rel(&helmholtz_project(&pu).unwrap(), &pu));
            worst = worst.max(relative_divergence(&pu).unwrap());
            let p = random_field(Shape::scalar(dim, 64).unwrap(), &mut rng);
            let grad = gradient(&p).unwrap();
            worst = worst.max(helmholtz_project(&grad).unwrap().l2_norm() / grad.l2_norm());
            let split = helmholtz_split(&u).unwrap();
            worst = worst.max(rel(&split.solenoidal.add(&split.gradient).unwrap(), &u));
        }
    }
    report(4, "Helmholtz projection", worst <= 1e-12, &format!("max rel err {worst:.2e}"), start.elapsed(), Duration::from_secs(10));
}

#[test]
fn c05_heat_stokes_eigen() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let shape = Shape::scalar(2, 32).unwrap();
    let vshape = Shape::vector(2, 32).unwrap();
    for _ in 0..10 {
        let xi = [rng.gen_range(-7i64..=7), rng.gen_range(-7i64..=7)];
        let r2 = (xi[0] * xi[0] + xi[1] * xi[1]) as f64;
        let plane = |x: &[f64]| Complex64::new(0.0, xi[0] as f64 * x[0] + xi[1] as f64 * x[1]).exp();
        let u = GridField::from_fn(shape, |x, _| plane(x));
        // divergence-free: amplitude orthogonal to ξ
        let v = GridField::from_fn(vshape, |x, c| plane(x) * if c == 0 { -xi[1] as f64 } else { xi[0] as f64 });
        for t in [0.0, 0.01, 0.1, 0.5, 1.0] {
            let decay = (-t * r2).exp();
            worst = worst.max(heat_semigroup(&u, t).unwrap().max_abs_diff(&u.scale(decay)).unwrap());
            if r2 > 0.0 {
                let w = stokes_semigroup(&v, t).unwrap();
                worst = worst.max(w.max_abs_diff(&v.scale(decay)).unwrap() / v.max_abs());
            }
        }
    }
    report(5, "heat/Stokes eigen-exactness", worst <= 1e-12, &format!("max err {worst:.2e}"), start.elapsed(), Duration::from_secs(1));
}

fn taylor_green_error(scheme: Scheme, resolution: usize, dt: f64) -> (f64, f64) {
    let cfg = SolverConfig {
        resolution,
        dt,
        t_max: 1.0,
        scheme,
        sample_every: 50,
        ..SolverConfig::default()
    };
    let solver = Solver::new(cfg.clone()).unwrap();
    let u0 = taylor_green(2, resolution).unwrap();
    let out = solver.run(solver.initial_state(&u0).unwrap(), &Forcing::None, cfg.total_steps(), None).unwrap();
    let mut err: f64 = 0.0;
    let mut g_max: f64 = 0.0;
    for s in &out.trajectory.samples {
        let exact = u0.scale((-2.0 * s.t).exp());
        err = err.max(s.state.sub(&exact).unwrap().l2_norm() / exact.l2_norm());
        g_max = g_max.max(nonlinear_term(&s.state).unwrap().max_abs());
    }
    (err, g_max)
}

#[test]
fn c06_taylor_green() {
    let start = Instant::now();
    let (err, g) = taylor_green_error(Scheme::Etd, 64, 1e-3);
    report(
        6,
        "Taylor-Green reproduction",
        err <= 1e-8 && g <= 1e-10,
        &format!("rel L2 err {err:.2e}, max |G(u)| {g:.2e}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn c07_imex_order() {
    let start = Instant::now();
    let (e1, _) = taylor_green_error(Scheme::Imex2, 32, 0.02);
    let (e2, _) = taylor_green_error(Scheme::Imex2, 32, 0.01);
    let ratio = e1 / e2;
    report(7, "IMEX second order", ratio >= 3.5, &format!("error ratio {ratio:.3} ({e1:.2e} / {e2:.2e})"), start.elapsed(), Duration::from_secs(120));
}

#[test]
fn c08_energy_decay() {
    let start = Instant::now();
    let cfg = SolverConfig {
        resolution: 32,
        dt: 1e-3,
        ..SolverConfig::default()
    };
    let solver = Solver::new(cfg).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for index in 0..2 {
        let u0 = solenoidal_field(8, index, 2, 6, 32).unwrap().scale(20.0);
        let mut state = solver.initial_state(&u0).unwrap();
        let mut prev = state.spectrum.l2_norm();
        for _ in 0..1000 {
            state = solver.step(&state, &Forcing::None).unwrap();
            let now = state.spectrum.l2_norm();
            worst = worst.max((now - prev) / prev);
            prev = now;
        }
    }
    report(8, "energy decay", worst <= 1e-10, &format!("max relative per-step growth {worst:.2e}"), start.elapsed(), Duration::from_secs(60));
}

#[test]
fn c09_restart_determinism() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut bitwise = true;
    for scheme in [Scheme::Etd, Scheme::Imex2] {
        let cfg = SolverConfig {
            resolution: 32,
            dt: 1e-3,
            scheme,
            sample_every: 100,
            checkpoint_every: 500,
            ..SolverConfig::default()
        };
        let solver = Solver::new(cfg.clone()).unwrap();
        let u0 = solenoidal_field(9, 0, 2, 5, 32).unwrap().scale(10.0);
        let s0 = solver.initial_state(&u0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let full = solver.run(s0, &Forcing::None, cfg.total_steps(), Some(dir.path())).unwrap();
        let (mid, manifest) = load_checkpoint(&dir.path().join("step_00000500")).unwrap();
        assert!((manifest.t - 0.5).abs() < 1e-12);
        let resumed = solver.run(mid, &Forcing::None, cfg.total_steps(), None).unwrap();
        let a = &full.final_state.spectrum;
        let b = &resumed.final_state.spectrum;
        bitwise &= a == b;
        worst = worst.max(a.max_abs_diff(b).unwrap() / a.max_abs());
    }
    report(
        9,
        "restart determinism",
        bitwise || worst <= 1e-12,
        &format!("bitwise {bitwise}, max rel diff {worst:.2e}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn c10_bracket_suites() {
    let start = Instant::now();
    let reports = run_all(&VerifyConfig::default()).unwrap();
    let mut lines = Vec::new();
    for r in &reports {
        lines.push(r.summary());
    }
    let _ = std::io::stderr().write_all(format!("{}\n", lines.join("\n")).as_bytes());
    let passed = reports.iter().all(|r| r.passed && r.skipped.is_none());
    let worst = reports.iter().map(|r| r.stability_factor).fold(1.0, f64::max);
    report(10, "bracket suites", passed, &format!("worst stability factor {worst:.4}"), start.elapsed(), Duration::from_secs(600));
}

#[test]
fn c11_monitor_controls() {
    let start = Instant::now();
    // negative control: small data decays, proxy strictly decreasing
    let cfg = SolverConfig {
        resolution: 32,
        dt: 1e-3,
        t_max: 0.5,
        sample_every: 25,
        ..SolverConfig::default()
    };
    let solver = Solver::new(cfg.clone()).unwrap();
    let u0 = solenoidal_field(11, 0, 2, 4, 32).unwrap().scale(0.1);
    let out = solver.run(solver.initial_state(&u0).unwrap(), &Forcing::None, cfg.total_steps(), None).unwrap();
    let negative = out.report.verdict == Verdict::Completed && !out.report.halted && out.report.is_strictly_decreasing();

    // positive control: u_k = 2^k u0 at t_k = k/10, threshold between t_4 and t_5
    let family = build_standard_family(2, block_cap(32)).unwrap();
    let trace = TraceParams::new(TllParams::new(0.0, 2.0, 2.0, 2.0).unwrap(), 4.0).unwrap();
    let base = trace_norm(&u0, &trace, &family).unwrap();
    let mut traj = Trajectory::new(0.1, "none", "inflated");
    for k in 0..10u64 {
        traj.samples.push(TrajectorySample {
            step: k,
            t: k as f64 / 10.0,
            state: u0.scale(2f64.powi(k as i32)),
        });
    }
    let threshold = base * 24.0;
    let rep = blowup_monitor(&traj, &trace, threshold, &family).unwrap();
    let positive = rep.halted
        && rep.verdict == Verdict::ThresholdExceeded
        && rep.t_halt == Some(0.5)
        && rep.trace_norm_history.len() == 6;
    report(
        11,
        "blow-up monitor controls",
        negative && positive,
        &format!("negative {negative}, positive {positive} (t_halt {:?})", rep.t_halt),
        start.elapsed(),
        Duration::from_secs(60),
    );
}
