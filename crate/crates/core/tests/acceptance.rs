//! Acceptance suite. Runs each criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use irig::harness::generators::{
    gen_classification_dataset, gen_constrained_problem, gen_selection_problem, hinge_problem, ClassificationSpec,
    ConstrainedSpec, SelectionSpec, UpperSpec,
};
use irig::harness::rate::fit_rate;
use irig::oracles::estimate_constants;
use irig::schedules::{rate_schedule, validate, PowerSchedule, Violation};
use irig::solver::bounds::{averaging_gap_bound, drift_bound};
use irig::solver::{reference_ladder, run_irig, run_irig_observed, RecordPlan, RunOptions};
use irig::{DenseVector, ProblemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{check_projection, check_strong_convexity, check_subgradient_inequality, dv};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn p2() -> ProblemInstance {
    gen_selection_problem(&SelectionSpec::p2()).unwrap()
}

fn p2_schedule() -> PowerSchedule {
    rate_schedule(0.1, 1.0, 1.0, 0.5).unwrap()
}

/// `x*_λ` on the two-dimensional test problem.
fn p2_regularized_minimizer(lambda: f64) -> DenseVector {
    dv(&[(1.0 - 2.0 / lambda).max(0.0), 1.5])
}

fn selection_run() -> Outcome {
    let p = p2();
    let out = run_irig(&p, &p2_schedule(), 100_000, &dv(&[2.0, -2.0]), &RunOptions::with_stride(100_000)).unwrap();
    let dist = out.x_bar.distance(&dv(&[0.0, 1.5])).unwrap();
    ensure(dist <= 5e-2, format!("‖x̄_N − x*_h‖ = {dist:.3e} (limit 5e-2), x̄_N = {:?}", out.x_bar))
}

fn rate_in_f() -> Outcome {
    let p = p2();
    let opts = RunOptions {
        record: RecordPlan::LogSpaced { start: 100, per_decade: 10 },
        ..Default::default()
    };
    let out = run_irig(&p, &p2_schedule(), 100_000, &dv(&[2.0, -2.0]), &opts).unwrap();
    let fit = fit_rate(&out.trace, 0.2).map_err(|e| e.to_string())?;
    let gap = out.trace.rows.last().unwrap().f_gap.unwrap();
    ensure(
        fit.slope <= -0.3 && gap <= 1e-2,
        format!(
            "slope {:.3} over {} rows (limit -0.3), final f gap {gap:.3e} (limit 1e-2)",
            fit.slope, fit.rows
        ),
    )
}

fn averaging_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let runs = 20;
    for run in 0..runs {
        let center: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let p = gen_selection_problem(&SelectionSpec {
            dim: 5,
            half_width: 2.0,
            zero_coords: vec![0, 3],
            multiplicity: 3,
            upper: UpperSpec::Shifted { center, mu: rng.gen_range(0.2..2.0) },
        })
        .unwrap();
        let bound = 2.0 * p.m() as f64 / p.mu_h();
        let gamma0 = rng.gen_range(0.05..3.0);
        let lambda0 = rng.gen_range(0.05..1.0) * bound / gamma0;
        let s = rate_schedule(rng.gen_range(0.01..0.49), gamma0, lambda0, rng.gen_range(-1.0..0.95)).unwrap();
        let x0 = DenseVector::new((0..5).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        let mut states = Vec::new();
        run_irig_observed(&p, &s, 200, &x0, &RunOptions::with_stride(200), |st| states.push(st.clone())).unwrap();
        for (k, st) in states.iter().enumerate() {
            let psi = irig::schedules::closed_form_weights(&s, k);
            for j in 0..5 {
                let closed: f64 = psi.iter().zip(&states).map(|(w, t)| w * t.x[j]).sum();
                let err = (closed - st.x_bar[j]).abs();
                worst = worst.max(err);
                if err > 1e-9 {
                    return Err(format!("run {run}, k = {k}, coordinate {j}: recursion and closed form differ by {err:e}"));
                }
            }
        }
    }
    Ok(format!("{runs} random 5-D runs, k ≤ 200, max deviation {worst:.2e} (limit 1e-9)"))
}

fn drift() -> Outcome {
    let p = p2();
    let consts = estimate_constants(&p, 1000, 11).unwrap();
    // λ0 = 8 makes x*_λ move along the ladder instead of sitting at x*_h.
    let lambdas: Vec<f64> = (0..=10).map(|k| 8.0 / ((k + 1) as f64).powf(0.4)).collect();
    let xs = reference_ladder(&p, &lambdas, 100_000).unwrap();
    let ref_tol = 1e-2;
    let ref_err = xs
        .iter()
        .zip(&lambdas)
        .map(|(x, &l)| x.distance(&p2_regularized_minimizer(l)).unwrap())
        .fold(0.0, f64::max);
    if ref_err > ref_tol {
        return Err(format!("reference solver error {ref_err:.2e} exceeds its tolerance {ref_tol:e}"));
    }
    let mut parts = Vec::new();
    for k in [2, 5, 10] {
        let step = xs[k].distance(&xs[k - 1]).unwrap();
        let bound = drift_bound(consts.c_h, p.mu_h(), lambdas[k - 1], lambdas[k]);
        if step > bound + 2.0 * ref_tol {
            return Err(format!("k = {k}: drift {step:.3e} > bound {bound:.3e} + {:e}", 2.0 * ref_tol));
        }
        parts.push(format!("k={k}: {step:.2e} ≤ {bound:.2e}"));
    }
    Ok(format!("{} (reference error {ref_err:.1e})", parts.join(", ")))
}

fn gap_bound() -> Outcome {
    let p = p2();
    let s = p2_schedule();
    let consts = estimate_constants(&p, 1000, 5).unwrap();
    let opts = RunOptions {
        record: RecordPlan::At(vec![100, 1000, 10_000]),
        ..Default::default()
    };
    let out = run_irig(&p, &s, 10_000, &dv(&[2.0, -2.0]), &opts).unwrap();
    let mut parts = Vec::new();
    for row in &out.trace.rows {
        let gap = row.f_gap.unwrap();
        // x̄_N averages N + 1 iterates.
        let bound = averaging_gap_bound(&s, p.m(), &consts, row.k + 1);
        if gap > bound {
            return Err(format!("N = {}: gap {gap:.3e} exceeds bound {bound:.3e}", row.k));
        }
        parts.push(format!("N={}: {gap:.2e} ≤ {bound:.2e}", row.k));
    }
    ensure(parts.len() == 3, parts.join(", "))
}

fn schedule_gate() -> Outcome {
    let mut accepted = 0;
    for (m, mu) in [(2usize, 1.0), (20, 0.1), (3, 0.7)] {
        let gamma0 = 2.0 * m as f64 / mu;
        for j in 1..=50 {
            let eps = 0.5 * j as f64 / 51.0;
            let s = rate_schedule(eps, gamma0, 1.0, 0.5).unwrap();
            let report = validate(&s, m, mu).unwrap();
            if !report.is_ok() {
                return Err(format!("ε = {eps}, m = {m}, μ_h = {mu} rejected: {report}"));
            }
            accepted += 1;
        }
    }
    // One counterexample per condition. Conditions 1 (a > b) and 4
    // (a·r ≤ 1) cannot fail alone: with a > 1/2 and a + b < 1 we get a > b,
    // and with r < 1 and a < 1 we get a·r < 1. Their counterexamples
    // necessarily break one more condition.
    let cases: [(PowerSchedule, &[u32]); 6] = [
        (PowerSchedule::new(10.0, 1.0, 0.55, 0.4, 0.5).unwrap(), &[0]),
        (PowerSchedule::new(1.0, 1.0, 0.45, 0.5, 0.5).unwrap(), &[1, 2]),
        (PowerSchedule::new(1.0, 1.0, 0.5, 0.3, 0.5).unwrap(), &[2]),
        (PowerSchedule::new(1.0, 1.0, 0.7, 0.3, 0.5).unwrap(), &[3]),
        (PowerSchedule::new(1.0, 1.0, 0.55, 0.4, 2.0).unwrap(), &[4, 5]),
        (PowerSchedule::new(1.0, 1.0, 0.55, 0.4, 1.0).unwrap(), &[5]),
    ];
    for (i, (s, expected)) in cases.iter().enumerate() {
        let report = validate(s, 2, 1.0).unwrap();
        let codes: Vec<u32> = report.violations.iter().map(Violation::code).collect();
        if codes != *expected {
            return Err(format!("counterexample {i}: expected violations {expected:?}, got {codes:?}"));
        }
    }
    Ok(format!("{accepted} boundary schedules accepted, 6 counterexamples rejected with the expected codes"))
}

fn constrained() -> Outcome {
    let p = gen_constrained_problem(&ConstrainedSpec::halfplane()).unwrap();
    let out = run_irig(&p, &p2_schedule(), 100_000, &dv(&[-2.0, 2.0]), &RunOptions::with_stride(100_000)).unwrap();
    let dist = out.x_bar.distance(&dv(&[1.0, 0.0])).unwrap();
    let violation = (1.0 - out.x_bar[0]).max(0.0);
    ensure(
        dist <= 5e-2 && violation <= 5e-2,
        format!("‖x̄_N − (1,0)‖ = {dist:.3e}, constraint violation {violation:.3e} (limits 5e-2)"),
    )
}

fn classification() -> Outcome {
    let d = gen_classification_dataset(&ClassificationSpec::default()).unwrap();
    let p = hinge_problem(&d, 20, 0.1, 1e3).unwrap();
    let s = rate_schedule(0.1, 0.1, 1.0, 0.5).unwrap();
    let opts = RunOptions {
        record: RecordPlan::LogSpaced { start: 0, per_decade: 10 },
        ..Default::default()
    };
    let out = run_irig(&p, &s, 2000, &DenseVector::zeros(p.dim()), &opts).unwrap();
    let f: Vec<f64> = out.trace.rows.iter().map(|r| r.f_bar).collect();
    let skip = (0.1 * f.len() as f64).floor() as usize;
    if let Some(w) = f[skip..].windows(2).find(|w| w[1] > w[0] + 1e-6) {
        return Err(format!("loss rose from {} to {} after burn-in", w[0], w[1]));
    }
    let (first, last) = (f[0], *f.last().unwrap());
    let n = d.len() as f64;
    ensure(
        last <= 0.5 * first,
        format!(
            "average loss {:.4} → {:.4} over {} checkpoints (limit {:.4})",
            first / n,
            last / n,
            f.len(),
            0.5 * first / n
        ),
    )
}

fn property_suites() -> Outcome {
    let sub = check_subgradient_inequality(1000, 1)?;
    let sc = check_strong_convexity(1000, 2)?;
    check_projection(1000, 3)?;
    Ok(format!(
        "1000 samples each; min subgradient slack {sub:.1e}, min strong-convexity slack {sc:.1e}, projections ok"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("selection correctness", selection_run),
        ("rate in f", rate_in_f),
        ("averaging identity", averaging_identity),
        ("regularized-minimizer drift bound", drift),
        ("f-gap upper bound", gap_bound),
        ("schedule gate", schedule_gate),
        ("constrained reformulation", constrained),
        ("hinge-loss classification run", classification),
        ("oracle and geometry properties", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.2}s]", i + 1);
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
