// Scratch probe for calibrating acceptance-test expectations. Not shipped.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riemann_accel::diagnostics::{potential_monitor, PotentialKind, PotentialSpec};
use riemann_accel::flow::{discrete_vs_flow, FlowKind, OdeComparison};
use riemann_accel::optim::{run, Method, OptimizerConfig};
use riemann_accel::problems::{
    ensure_optimum, make_euclidean_quadratic, make_karcher, make_rayleigh, KarcherManifold,
};

fn slope(records: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|(_, g)| *g > 0.0)
        .map(|(k, g)| ((*k as f64).ln(), g.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let var = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    cov / var
}

fn main() {
    let t0 = std::time::Instant::now();

    // --- criterion 5 slopes on an ill-conditioned quadratic ---
    for (d, kappa) in [(20, 1e2), (40, 1e8), (30, 1e8), (40, 1e6)] {
        let problem = make_euclidean_quadratic(d, 1.0, 1.0 / kappa, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x0 = problem.sample_domain(&mut rng);
        let window = |trace: &riemann_accel::Trace| {
            trace
                .records
                .iter()
                .filter(|r| r.iter >= 50 && r.iter <= 500)
                .map(|r| (r.iter, r.f_gap))
                .collect::<Vec<_>>()
        };
        let rgd = run(&problem, &OptimizerConfig::new(Method::Rgd, 1.0, 510), x0.clone(), None)
            .unwrap();
        let nag = run(
            &problem,
            &OptimizerConfig::new(Method::RnagC, 1.0, 510).with_xi(1.0).with_t_param(4.0),
            x0,
            None,
        )
        .unwrap();
        println!(
            "slopes d={d} kappa={kappa:.0e}: rgd {:.3}, rnag_c {:.3}",
            slope(&window(&rgd)),
            slope(&window(&nag))
        );
    }

    // --- criterion 8a: rayleigh d=50 ---
    for seed in [7u64, 21, 42] {
        let problem = make_rayleigh(50, seed).unwrap();
        let l = problem.smoothness();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x0 = problem.sample_domain(&mut rng);
        let rgd = run(&problem, &OptimizerConfig::new(Method::Rgd, 1.0 / l, 2000), x0.clone(), None)
            .unwrap();
        let nag = run(
            &problem,
            &OptimizerConfig::new(Method::RnagC, 1.0 / l, 2000).with_xi(1.0).with_t_param(4.0),
            x0,
            None,
        )
        .unwrap();
        println!(
            "rayleigh seed {seed}: rgd hits 1e-6 at {:?}, rnag_c at {:?}",
            rgd.first_iter_below(1e-6),
            nag.first_iter_below(1e-6)
        );
    }

    // --- criterion 8b/8c: karcher ---
    for (kind, d, n, cond, label) in [
        (KarcherManifold::Spd, 10, 10, 1e2, "spd"),
        (KarcherManifold::Spd, 10, 10, 1e3, "spd(cond 1e3)"),
        (KarcherManifold::Hyperbolic, 50, 10, 1.0, "hyp"),
    ] {
        let problem = make_karcher(kind, d, n, cond, 5).unwrap();
        let problem = ensure_optimum(problem, 99).unwrap();
        let l = problem.smoothness();
        let zeta = problem.bounds().zeta();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x0 = problem.sample_domain(&mut rng);
        let rgd = run(&problem, &OptimizerConfig::new(Method::Rgd, 1.0 / l, 2000), x0.clone(), None)
            .unwrap();
        let sc = run(
            &problem,
            &OptimizerConfig::new(Method::RnagSc, 1.0 / l, 2000).with_xi(1.0).with_mu(1.0),
            x0,
            None,
        )
        .unwrap();
        println!(
            "karcher {label}: zeta {zeta:.2}, rgd hits 1e-8 at {:?}, rnag_sc at {:?}",
            rgd.first_iter_below(1e-8),
            sc.first_iter_below(1e-8)
        );
    }

    // --- criterion 3/4 monotonicity on the curved problems ---
    for (kind, d, n, label) in [
        (KarcherManifold::Hyperbolic, 10, 5, "hyp d10 n5"),
        (KarcherManifold::Spd, 5, 5, "spd d5 n5"),
    ] {
        let problem = make_karcher(kind, d, n, 1e2, 5).unwrap();
        let problem = ensure_optimum(problem, 99).unwrap();
        let derived = problem.bounds().derived().unwrap();
        let l = problem.smoothness();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x0 = problem.sample_domain(&mut rng);

        let spec = PotentialSpec::new(
            PotentialKind::RnagC, &problem, 1.0 / l, derived.xi, 4.0 * derived.xi, 0.0,
        )
        .unwrap();
        let monitor = potential_monitor(problem.clone(), spec);
        let config = OptimizerConfig::new(Method::RnagC, 1.0 / l, 300)
            .with_xi(derived.xi)
            .with_t_param(4.0 * derived.xi);
        let trace = run(&problem, &config, x0.clone(), Some(&monitor)).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for w in trace.records.windows(2) {
            worst = worst.max((w[1].potential - w[0].potential) / w[0].potential.abs().max(1.0));
        }
        println!("thm1 {label}: xi {:.3}, worst relative increase {worst:.3e}", derived.xi);

        let s = 1.0 / (9.0 * derived.xi * l);
        let spec = PotentialSpec::new(
            PotentialKind::RnagSc, &problem, s, derived.xi, 0.0, 1.0,
        )
        .unwrap();
        let monitor = potential_monitor(problem.clone(), spec);
        let config = OptimizerConfig::new(Method::RnagSc, s, 300).with_xi(derived.xi).with_mu(1.0);
        let trace = run(&problem, &config, x0.clone(), Some(&monitor)).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for w in trace.records.windows(2) {
            if w[0].potential.is_finite() && w[1].potential.is_finite() {
                worst = worst.max(w[1].potential - w[0].potential);
            }
        }
        // corollary 2 bound check
        let (x_star, f_star) = problem.optimum().unwrap();
        let phi0 = problem.objective(&x0) - f_star
            + 0.5 * problem.manifold().distance(&x0, x_star).powi(2);
        let q = s * 1.0;
        let rate = 1.0 - (q / derived.xi).sqrt();
        let mut bound_ok = true;
        for r in &trace.records {
            let bound = rate.powi(r.iter as i32) * phi0 * (1.0 + 1e-6);
            if r.f_gap > bound {
                bound_ok = false;
            }
        }
        println!("thm2 {label}: worst log-space increase {worst:.3e}, corollary2 bound ok: {bound_ok}");
    }

    // --- criterion 9: ode ladder on rayleigh d=10 xi=2 ---
    let problem = make_rayleigh(10, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x0 = problem.sample_domain(&mut rng);
    let comparison = OdeComparison {
        kind: FlowKind::Convex,
        xi: 2.0,
        t_param: 8.0,
        mu: 0.0,
        horizon: 2.0,
        flow_step_size: 1e-6,
        sample_count: 100,
    };
    let t_ode = std::time::Instant::now();
    let rows = discrete_vs_flow(&problem, &x0, &comparison, &[1e-2, 1e-3, 1e-4]).unwrap();
    for r in &rows {
        println!("ode s={:.0e}: max deviation {:.4e}", r.s, r.max_deviation);
    }
    println!("ode runtime: {:.1?}", t_ode.elapsed());

    println!("total: {:.1?}", t0.elapsed());
}
