//! Explicit right-hand sides of the convergence inequalities, evaluated
//! with (estimated) problem constants. Used to check runs against theory.

use crate::oracles::Constants;
use crate::schedules::PowerSchedule;

/// Bound on `‖x*_{λ_k} - x*_{λ_{k-1}}‖`.
pub fn drift_bound(c_h: f64, mu_h: f64, lambda_prev: f64, lambda_k: f64) -> f64 {
    c_h / mu_h * (1.0 - lambda_prev / lambda_k).abs()
}

/// Right-hand side bounding `‖x_{k+1} - x*_{λ_k}‖²` given
/// `prev_err_sq = ‖x_k - x*_{λ_{k-1}}‖²`. Requires `k >= 1`.
pub fn recursive_error_rhs(
    prev_err_sq: f64,
    schedule: &PowerSchedule,
    k: usize,
    m: usize,
    mu_h: f64,
    c: &Constants,
) -> f64 {
    assert!(k >= 1, "recursive bound starts at k = 1");
    let m = m as f64;
    let gamma = schedule.gamma_at(k);
    let lambda = schedule.lambda_at(k);
    let ratio = 1.0 - schedule.lambda_at(k - 1) / lambda;
    let glm = gamma * lambda * mu_h;
    (1.0 - glm / (2.0 * m)) * prev_err_sq
        + 3.0 * m * c.c_h * c.c_h / (glm * mu_h * mu_h) * ratio * ratio
        + 6.0 * m * m * gamma * gamma * (c.c_f * c.c_f + lambda * lambda * c.c_h * c.c_h)
}

/// Upper bound on `f(x̄) - f*` for the `γ^r`-weighted average of the first
/// `n_terms` iterates `x_0, ..., x_{n_terms-1}`.
pub fn averaging_gap_bound(schedule: &PowerSchedule, m: usize, c: &Constants, n_terms: usize) -> f64 {
    assert!(n_terms >= 1, "need at least one averaged iterate");
    let m = m as f64;
    let r = schedule.r;
    let (mut w_sum, mut sq_term, mut lin_term, mut reg_term) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n_terms {
        let g = schedule.gamma_at(k);
        let l = schedule.lambda_at(k);
        let gr = g.powf(r);
        w_sum += gr;
        sq_term += gr * g * (c.c_f * c.c_f + l * l * c.c_h * c.c_h);
        lin_term += gr * g * (c.c_f + l * c.c_h);
        reg_term += gr * l;
    }
    let tail = schedule.gamma_at(n_terms - 1).powf(r - 1.0);
    (m * sq_term + m * m * c.c_f * lin_term + 2.0 * c.h_max * reg_term + 2.0 * c.radius * c.radius * tail)
        / w_sum
}
