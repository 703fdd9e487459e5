//! Scratch calibration probe (removed before release).

use lifshitz_lab::fit::{fit_power_with_policy, FitModel, TailCurve, WindowPolicy};
use lifshitz_lab::ids;
use lifshitz_lab::operator::{Bc, GridSpec};
use lifshitz_lab::params::{ModelParams, PotentialSpec, Sign};
use lifshitz_lab::quad::{linspace, logspace};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "c5" => c5(),
        "c6" => c6(),
        "c7d2" => c7_multid(2),
        "c7d3" => c7_multid(3),
        "c7pipe" => c7_pipe(),
        "c9" => c9(),
        _ => println!("usage: probe c5|c6|c7d2|c7d3|c7pipe|c9"),
    }
}

fn c5() {
    let t0 = Instant::now();
    let params = ModelParams::new(1, 1.0, 1.0, 11);
    let spec = PotentialSpec::decay(1.0, 2.0, 0.1, 1e6);
    let ts = logspace(1e2, 1e4, 13);
    let curve = ids::n1_quadrature_curve(&params, &spec, &ts).unwrap();
    for (t, v) in ts.iter().zip(&curve.log_values) {
        println!("t = {t:10.1}  logN1 = {v:14.6}  -logN1/t^(2/3) = {:.6}", -v / t.powf(2.0 / 3.0));
    }
    let tail = TailCurve::from_laplace(&curve);
    let fit = fit_power_with_policy(&tail, FitModel::PowerT, &WindowPolicy::default()).unwrap();
    println!(
        "fit: exponent {:.5} ± {:.5}, coefficient {:.5}, window {:?}, n = {}, r2 = {:.6}",
        fit.exponent, fit.stderr_exponent, fit.coefficient, fit.window, fit.n_points, fit.r_squared
    );
    println!("pastur K = {:.6}", lifshitz_lab::asymptotics::pastur_constant(1, 1.0, 2.0, 1.0).unwrap());
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}

fn c6() {
    let t0 = Instant::now();
    let params = ModelParams::new(1, 1.0, 1.0, 23);
    let spec = PotentialSpec::compact(1.0, 0.5).with_sign(Sign::Attractive);
    let ts = logspace(5.0, 50.0, 11);
    let curve = ids::n1_mc(&params, &spec, &ts, 64).unwrap();
    for i in 0..ts.len() {
        println!(
            "t = {:8.3}  logN1- = {:12.4}  /t^2 = {:.5}  stderr {:.4} ess {:.0}",
            ts[i],
            curve.log_values[i],
            curve.log_values[i] / (ts[i] * ts[i]),
            curve.stderr[i],
            curve.ess[i]
        );
    }
    let tail = TailCurve::from_laplace(&curve);
    let fit = fit_power_with_policy(&tail, FitModel::PowerT, &WindowPolicy::default()).unwrap();
    println!(
        "fit: exponent {:.5} ± {:.5}, coefficient {:.5}, window {:?}, n = {}",
        fit.exponent, fit.stderr_exponent, fit.coefficient, fit.window, fit.n_points
    );
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}

fn c7_multid(d: usize) {
    let t0 = Instant::now();
    let (box_r, dx, reps): (f64, f64, usize) = if d == 2 {
        (18.0, 0.6, 32)
    } else {
        (9.0, 0.75, 24)
    };
    let lam = if d == 2 {
        logspace(0.35, 3.0, 14)
    } else {
        logspace(1.0, 6.0, 14)
    };
    for theta in [0.5, 1.0, 2.0] {
        let params = ModelParams::new(d, theta, 1.0, 1357);
        let spec = PotentialSpec::decay(1.0, 6.0, 0.1, 1e6);
        let n = (box_r / dx - 1.0).round() as usize;
        let grid = GridSpec::new(d, box_r, n, Bc::Dirichlet);
        let curve = ids::empirical_ids(&params, &spec, &grid, &lam, reps).unwrap();
        print!("d={d} θ={theta}: n_hat =");
        for v in &curve.n_hat {
            print!(" {v:.2e}");
        }
        println!();
        let tail = TailCurve::from_ids(&curve);
        match fit_power_with_policy(&tail, FitModel::PowerLambda, &WindowPolicy::relaxed(1.5)) {
            Ok(f) => println!(
                "   fit exponent {:.4} ± {:.4} window {:?} n={} r2={:.4}",
                f.exponent, f.stderr_exponent, f.window, f.n_points, f.r_squared
            ),
            Err(e) => println!("   fit failed: {e}"),
        }
    }
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}

fn c7_pipe() {
    let t0 = Instant::now();
    let text = r#"{
        "command": "pipeline_lifshitz_1d",
        "params": {"d": 1, "theta": 1.0, "h": 1.0, "seed": 2468},
        "spec": {"c0": 1.0, "alpha": 4.0, "r0": 0.1, "sign": 1, "u_cap": 1000000.0},
        "pipeline": {
            "box_r": 400.0, "dx": 0.05, "replicates": 200,
            "lambda_grid": {"start": 0.05, "stop": 0.5, "count": 24, "scale": "log"},
            "exponent_tol": 0.2, "coefficient_rel_tol": 0.3
        }
    }"#;
    let cfg = lifshitz_lab::config::load_config_str(text, &[]).unwrap();
    let block = cfg.pipeline.clone().unwrap();
    let rep = lifshitz_lab::runner::pipeline_lifshitz_1d(&cfg, &block).unwrap();
    println!("{}", serde_json::to_string_pretty(&rep).unwrap());
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}

fn c9() {
    let t0 = Instant::now();
    let params = ModelParams::new(1, 1.0, 1.0, 555);
    let spec = PotentialSpec::decay(1.0, 4.0, 0.1, 1e6);
    let ts = linspace(1.0, 6.0, 6);
    let surv = lifshitz_lab::fk::survival(&params, &spec, [0.0; 3], &ts, 192, 48, 0.01).unwrap();
    for i in 0..ts.len() {
        println!(
            "t = {}  logS = {:.4} ± {:.4} (ess {:.0})",
            ts[i], surv.log_s[i], surv.stderr[i], surv.ess[i]
        );
    }
    println!("fk elapsed {:.1}s", t0.elapsed().as_secs_f64());
    let grid = GridSpec::new(1, 200.0, 3999, Bc::Dirichlet);
    let lam = linspace(0.02, 30.0, 300);
    let curve = ids::empirical_ids(&params, &spec, &grid, &lam, 32).unwrap();
    let lap = ids::laplace_from_ids(&curve, &linspace(0.25, 6.5, 26)).unwrap();
    let report = lifshitz_lab::fk::lemma61_check(&surv, &lap, &params, 0.25).unwrap();
    for p in &report.points {
        println!(
            "t = {}  lhs {:.4}  rhs {:.4}  margin {:+.4}  σ {:.4}  {:?}",
            p.t,
            p.lhs_log_s,
            p.rhs_bound,
            p.lhs_log_s - p.rhs_bound,
            p.sigma,
            p.verdict
        );
    }
    println!("verdict {:?}", report.verdict);
    println!("total elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
