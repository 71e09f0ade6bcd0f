//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the report is always shown.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use motzkin_core::asymptotics::{log_pn_hermite, log_pn_linear_drift};
use motzkin_core::closedform::{taylor_coefficients, EgfEvaluator};
use motzkin_core::exact::{
    brute_force_oracle, build_triangle, final_log_row, log_rows_at, polynomial_eval, HeightDistribution,
    Representation,
};
use motzkin_core::ldp::{lattice_index, limit_cgf, rate_closed_form_double_root, rate_function, LimitCgf, RateValue};
use motzkin_core::model::corpus;
use motzkin_core::saddlepoint::{daniels_pmf, max_relative_error, CumulantEvaluator};
use motzkin_core::specfun::{lambert_w0, log_gamma, log_sum_exp_pos};
use motzkin_core::{classify, ModelParams, Regime};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    for p in corpus() {
        let tri = build_triangle(&p, 10, Representation::Exact).map_err(|e| e.to_string())?;
        for n in 0..=10 {
            let oracle = brute_force_oracle(&p, n).map_err(|e| e.to_string())?;
            let row = tri.exact_row(n).expect("exact rows");
            ensure(row == oracle.as_slice(), || format!("{p} differs at n={n}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (params, n) pairs identical"))
}

fn closed_form_validation() -> Outcome {
    let mut worst = 0f64;
    for p in corpus().into_iter().filter(ModelParams::is_balanced) {
        let ev = EgfEvaluator::new(&p).map_err(|e| e.to_string())?;
        let tri = build_triangle(&p, 8, Representation::Exact).map_err(|e| e.to_string())?;
        for x in [0.5, 1.0, 2.0] {
            let coeffs = taylor_coefficients(&ev, x, 9).map_err(|e| format!("{p} x={x}: {e}"))?;
            for (n, c) in coeffs.iter().enumerate() {
                let exact = (polynomial_eval(&tri, n, x) - log_gamma(n as f64 + 1.0).unwrap()).exp();
                let rel = (c - exact).abs() / exact;
                worst = worst.max(rel);
                ensure(rel <= 1e-8, || format!("{p} n={n} x={x}: rel err {rel:.2e}"))?;
            }
        }
    }
    Ok(format!("max rel err {worst:.2e}"))
}

fn daniels_interior() -> Outcome {
    let p = ModelParams::reference();
    let e100 = max_relative_error(&CumulantEvaluator::from_params(&p, 100), 20..=80).map_err(|e| e.to_string())?;
    let e200 = max_relative_error(&CumulantEvaluator::from_params(&p, 200), 40..=160).map_err(|e| e.to_string())?;
    ensure(e100 <= 0.05, || format!("n=100 max rel err {e100:.4} > 0.05"))?;
    ensure(e200 <= 0.6 * e100, || format!("n=200 {e200:.4} > 0.6 x n=100 {e100:.4}"))?;
    Ok(format!("n=100 {e100:.4}, n=200 {e200:.4} (ratio {:.3})", e200 / e100))
}

fn tail_tracking() -> Outcome {
    let ev = CumulantEvaluator::from_params(&ModelParams::reference(), 100);
    let threshold = 1e-12f64.ln();
    let mut worst = 0f64;
    let mut count = 0;
    for k in 0..=100 {
        let exact = ev.log_prob(k);
        if exact < threshold {
            continue;
        }
        let log_daniels = daniels_pmf(&ev, k).map_err(|e| format!("k={k}: {e}"))?;
        let gap = (log_daniels - exact).abs() / std::f64::consts::LN_10;
        ensure(gap.is_finite(), || format!("k={k}: non-finite gap"))?;
        worst = worst.max(gap);
        count += 1;
    }
    ensure(worst <= 0.05, || format!("max |dlog10| {worst:.4} > 0.05"))?;
    Ok(format!("{count} k values, max |dlog10| {worst:.4}"))
}

fn ldp_scaling() -> Outcome {
    let p = ModelParams::reference();
    let rows = log_rows_at(&p, &[200, 800]);
    let dists: Vec<HeightDistribution> = rows.iter().map(|r| HeightDistribution::from_log_row(r)).collect();
    let mut details = Vec::new();
    for u in [0.15, 0.5, 0.85] {
        let rate = rate_function(&p, u).map_err(|e| e.to_string())?.rate;
        let gap = |d: &HeightDistribution| {
            let n = d.n;
            (-d.log_p[lattice_index(u, n)] / n as f64 - rate).abs()
        };
        let (g200, g800) = (gap(&dists[0]), gap(&dists[1]));
        let bound = 4.0 * 800f64.ln() / 800.0;
        ensure(g800 < g200, || format!("u={u}: gap {g800:.4} at N=800 not below {g200:.4} at N=200"))?;
        ensure(g800 <= bound, || format!("u={u}: gap {g800:.4} > {bound:.4}"))?;
        details.push(format!("u={u}: {g200:.4} -> {g800:.4}"));
    }
    Ok(details.join(", "))
}

fn double_root_closed_form() -> Outcome {
    let p = ModelParams::new(1, 1, 2, 1, 1, 0);
    let cgf = LimitCgf::new(&p).map_err(|e| e.to_string())?;
    let r = match cgf.regime() {
        Regime::DoubleRoot { r, .. } => *r,
        other => return Err(format!("expected a double root, got {}", other.name())),
    };
    ensure(r == -1.0, || format!("r = {r}"))?;
    let mut worst = 0f64;
    for i in 1..=9 {
        let u = i as f64 / 10.0;
        let numeric = cgf.rate(u).map_err(|e| e.to_string())?.rate;
        let closed = match rate_closed_form_double_root(r, u).map_err(|e| e.to_string())? {
            RateValue::Finite(v) => v,
            RateValue::Infinite => return Err(format!("closed form infinite at u={u}")),
        };
        let diff = (numeric - closed).abs();
        ensure(diff <= 1e-8, || format!("u={u}: |diff| {diff:.2e}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("max |diff| {worst:.2e}"))
}

fn moment_asymptotics() -> Outcome {
    let p = ModelParams::new(1, 1, 2, 1, 1, 0);
    let ns = [100, 200, 400, 800];
    let rows = log_rows_at(&p, &ns);
    let mut mean_dev = Vec::new();
    let mut last = None;
    for (n, row) in ns.iter().zip(&rows) {
        let d = HeightDistribution::from_log_row(row);
        let dev = (d.mean - *n as f64 / 2.0).abs();
        ensure(dev <= 5.0, || format!("n={n}: |mean - n/2| = {dev:.3}"))?;
        mean_dev.push(format!("{dev:.3}"));
        last = Some(d);
    }
    let d = last.expect("four rows");
    let var_dev = (d.variance / 800.0 - 0.25).abs();
    ensure(var_dev <= 0.05, || format!("|var/n - 1/4| = {var_dev:.4}"))?;
    Ok(format!("|mean - n/2| = [{}], |var/n - 1/4| = {var_dev:.2e}", mean_dev.join(", ")))
}

fn cgf_convergence() -> Outcome {
    let p = ModelParams::reference();
    let ev200 = CumulantEvaluator::from_params(&p, 200);
    let ev800 = CumulantEvaluator::from_params(&p, 800);
    let mut details = Vec::new();
    for theta in [-1.0, 0.5, 2.0] {
        let f = limit_cgf(&p, theta).map_err(|e| e.to_string())?.f;
        let g200 = (ev200.centered_kappa(theta) / 200.0 - f).abs();
        let g800 = (ev800.centered_kappa(theta) / 800.0 - f).abs();
        let ratio = g200 / g800;
        ensure(ratio >= 1.3, || format!("theta={theta}: ratio {ratio:.3} < 1.3"))?;
        details.push(format!("theta={theta}: ratio {ratio:.2}"));
    }
    let f2 = limit_cgf(&p, 0.0).map_err(|e| e.to_string())?.f2;
    let k2 = ev800.kappa_derivatives(0.0).variance / 800.0;
    let rel = (k2 / f2 - 1.0).abs();
    ensure(rel <= 0.10, || format!("kappa''(0)/n = {k2:.5} vs F''(0) = {f2:.5}"))?;
    details.push(format!("kappa''(0)/n off by {:.2}%", 100.0 * rel));
    Ok(details.join(", "))
}

fn hermite_and_linear_drift() -> Outcome {
    let mut worst_h = 0f64;
    let constant = corpus()
        .into_iter()
        .filter(|p| p.is_balanced() && classify(p) == Regime::Constant);
    for p in constant {
        for n in 0..=10 {
            let exact = log_sum_exp_pos(&final_log_row(&p, n));
            let h = log_pn_hermite(&p, 1.0, n).map_err(|e| e.to_string())?;
            let rel = ((h - exact).exp() - 1.0).abs();
            worst_h = worst_h.max(rel);
            ensure(rel <= 1e-9, || format!("{p} n={n}: Hermite rel err {rel:.2e}"))?;
        }
    }
    let mut worst_lin = 0f64;
    let mut worst_lin_p = 0f64;
    let linear = corpus()
        .into_iter()
        .filter(|p| p.is_balanced() && matches!(classify(p), Regime::Linear { .. }));
    for p in linear {
        let exact = log_sum_exp_pos(&final_log_row(&p, 300));
        let est = log_pn_linear_drift(&p, 1.0, 300).map_err(|e| e.to_string())?.log_pn;
        let rel = (est - exact).abs() / exact.abs();
        worst_lin = worst_lin.max(rel);
        worst_lin_p = worst_lin_p.max(((est - exact).exp() - 1.0).abs());
        ensure(rel <= 0.01, || format!("{p}: linear-drift log P_300 rel err {rel:.4}"))?;
    }
    Ok(format!("Hermite max rel err {worst_h:.2e}, linear-drift max log rel err {worst_lin:.2e} (P_n rel err {worst_lin_p:.2e})"))
}

fn special_functions() -> Outcome {
    let branch = -(-1f64).exp();
    let mut worst_w = 0f64;
    for i in 0..100 {
        // 20 points on (-1/e, 0), 80 log-spaced on [1e-6, 1e12]
        let z = if i < 20 {
            branch * (1.0 - (i as f64 + 0.5) / 20.0)
        } else {
            10f64.powf(-6.0 + 18.0 * (i - 20) as f64 / 79.0)
        };
        let w = lambert_w0(z).map_err(|e| e.to_string())?;
        let res = (w * w.exp() - z).abs() / z.abs().max(1.0);
        ensure(res <= 1e-12, || format!("Lambert W residual {res:.2e} at z={z}"))?;
        worst_w = worst_w.max(res);
    }
    let mut worst_g = 0f64;
    for i in 0..=1000 {
        let x = 0.5 + 99.5 * i as f64 / 1000.0;
        let lhs = log_gamma(x + 1.0).map_err(|e| e.to_string())?;
        let rhs = log_gamma(x).map_err(|e| e.to_string())? + x.ln();
        let res = (lhs - rhs).abs() / lhs.abs().max(1.0);
        ensure(res <= 1e-12, || format!("log Gamma recurrence residual {res:.2e} at x={x}"))?;
        worst_g = worst_g.max(res);
    }
    Ok(format!("Lambert W residual {worst_w:.2e}, log Gamma residual {worst_g:.2e}"))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, name: "oracle equivalence", limit: secs(30), check: oracle_equivalence },
        Criterion { id: 2, name: "closed-form validation", limit: secs(10), check: closed_form_validation },
        Criterion { id: 3, name: "Daniels interior accuracy", limit: secs(5), check: daniels_interior },
        Criterion { id: 4, name: "log-scale tail tracking", limit: secs(5), check: tail_tracking },
        Criterion { id: 5, name: "LDP scaling", limit: secs(60), check: ldp_scaling },
        Criterion { id: 6, name: "double-root closed form", limit: secs(1), check: double_root_closed_form },
        Criterion { id: 7, name: "moment asymptotics", limit: secs(60), check: moment_asymptotics },
        Criterion { id: 8, name: "CGF convergence", limit: secs(60), check: cgf_convergence },
        Criterion { id: 9, name: "Hermite and linear-drift identities", limit: secs(30), check: hermite_and_linear_drift },
        Criterion { id: 10, name: "special functions", limit: secs(1), check: special_functions },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {}: {detail} [{elapsed:.2?}]", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {}: {why} [{elapsed:.2?}]", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
