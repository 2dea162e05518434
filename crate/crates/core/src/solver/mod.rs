//! Iterative regularized incremental projected subgradient method.
//!
//! Each outer iteration `k` sweeps the components in fixed order
//! `1..=m`, taking from `x_{k,i}` the projected step
//!
//! ```text
//! x_{k,i+1} = P_X(x_{k,i} - γ_k (g_{f_{i+1}}(x_{k,i}) + (λ_k/m) g_h(x_{k,i})))
//! ```
//!
//! and then folds `x_{k+1}` into a running average weighted by `γ_{k+1}^r`.

pub mod bounds;
pub mod reference;

use std::time::Instant;

use log::warn;

use crate::error::{check_dim, Error, Result};
use crate::numerics::DenseVector;
use crate::oracles::ProblemInstance;
use crate::schedules::{validate, PowerSchedule};

pub use reference::{reference_ladder, solve_regularized_reference, ReferenceOptions};

/// Membership tolerance used for iterates and for deciding whether `x0`
/// needs projecting.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    /// Outer iteration counter.
    pub k: usize,
    /// Current iterate `x_k`.
    pub x: DenseVector,
    /// Weighted running average `x̄_k`.
    pub x_bar: DenseVector,
    /// Weight accumulator `S_k = Σ_{t<=k} γ_t^r`.
    pub weight_sum: f64,
}

impl SolverState {
    /// `x̄_0 = x_0`, `S_0 = γ_0^r`.
    pub fn initial(x0: DenseVector, schedule: &PowerSchedule) -> Self {
        SolverState {
            k: 0,
            x_bar: x0.clone(),
            x: x0,
            weight_sum: schedule.weight_at(0),
        }
    }
}

/// Applies `S_{k+1} = S_k + w`, `x̄_{k+1} = (S_k x̄_k + w x_{k+1}) / S_{k+1}`.
pub fn update_average(state: SolverState, x_next: DenseVector, weight: f64) -> Result<SolverState> {
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::invalid(format!("averaging weight must be positive, got {weight}")));
    }
    if !(state.weight_sum > 0.0) {
        return Err(Error::invalid("weight accumulator must be positive"));
    }
    check_dim(state.x_bar.dim(), x_next.dim())?;
    let s = state.weight_sum;
    let s_next = s + weight;
    let x_bar: Vec<f64> = state
        .x_bar
        .iter()
        .zip(x_next.iter())
        .map(|(xb, xn)| (s * xb + weight * xn) / s_next)
        .collect();
    Ok(SolverState {
        k: state.k + 1,
        x: x_next,
        x_bar: DenseVector::new(x_bar)?,
        weight_sum: s_next,
    })
}

/// One incremental sweep from `x_k`; returns `x_{k+1} = x_{k,m}`.
pub fn inner_cycle(x_k: &DenseVector, p: &ProblemInstance, gamma: f64, lambda: f64) -> Result<DenseVector> {
    inner_cycle_with(x_k, p, gamma, lambda, |_, _| {})
}

/// As [`inner_cycle`], calling `visit(i + 1, &x_{k,i+1})` after every
/// projected step.
pub fn inner_cycle_with(
    x_k: &DenseVector,
    p: &ProblemInstance,
    gamma: f64,
    lambda: f64,
    mut visit: impl FnMut(usize, &DenseVector),
) -> Result<DenseVector> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("step size must be positive and finite, got {gamma}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "regularization parameter must be positive and finite, got {lambda}"
        )));
    }
    check_dim(p.dim(), x_k.dim())?;
    let n = p.dim();
    let h_scale = lambda / p.m() as f64;
    let mut x = x_k.clone();
    let mut step = vec![0.0; n];
    for (i, comp) in p.components().iter().enumerate() {
        step.iter_mut().for_each(|s| *s = 0.0);
        comp.add_subgradient(&x, 1.0, &mut step)?;
        p.upper().add_subgradient(&x, h_scale, &mut step)?;
        for (xi, si) in x.as_mut_slice().iter_mut().zip(&step) {
            *xi -= gamma * si;
        }
        p.feasible().project_in_place(x.as_mut_slice());
        if !x.is_finite() {
            return Err(Error::NonFinite("inner iterate"));
        }
        visit(i + 1, &x);
    }
    Ok(x)
}

/// Which outer iterations get a trace row.
#[derive(Clone, Debug, PartialEq)]
pub enum RecordPlan {
    /// `k = 0, stride, 2*stride, ...` plus the final iteration.
    Stride(usize),
    /// `round(start * 10^(j/per_decade))` for `j = 0, 1, ...`, plus `k = 0`
    /// when `start == 0`, plus the final iteration.
    LogSpaced { start: usize, per_decade: usize },
    /// Explicit iteration numbers; entries above `N` are dropped.
    At(Vec<usize>),
}

impl RecordPlan {
    pub fn checkpoints(&self, n_iters: usize) -> Result<Vec<usize>> {
        let mut ks = match self {
            RecordPlan::Stride(0) => return Err(Error::invalid("record stride must be positive")),
            RecordPlan::Stride(s) => (0..=n_iters).step_by(*s).collect::<Vec<_>>(),
            RecordPlan::LogSpaced { per_decade: 0, .. } => {
                return Err(Error::invalid("points per decade must be positive"))
            }
            RecordPlan::LogSpaced { start, per_decade } => {
                let mut ks = Vec::new();
                if *start == 0 {
                    ks.push(0);
                }
                let base = (*start).max(1) as f64;
                let mut j = 0u32;
                loop {
                    let k = (base * 10f64.powf(j as f64 / *per_decade as f64)).round() as usize;
                    if k > n_iters {
                        break;
                    }
                    ks.push(k);
                    j += 1;
                }
                ks
            }
            RecordPlan::At(list) => list.iter().copied().filter(|&k| k <= n_iters).collect(),
        };
        ks.push(n_iters);
        ks.sort_unstable();
        ks.dedup();
        Ok(ks)
    }
}

/// Optimal lower-level value used for `f_gap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FStar {
    pub value: f64,
    /// True when the value comes from a long reference run rather than
    /// from the problem's analytic solution.
    pub estimated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub f_bar: f64,
    pub f_gap: Option<f64>,
    pub h_bar: f64,
    pub dist_xstar: Option<f64>,
    pub gamma_k: f64,
    pub lambda_k: f64,
    pub elapsed_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub f_star: Option<FStar>,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub record: RecordPlan,
    /// Run even when the schedule fails validation.
    pub allow_invalid_schedule: bool,
    /// Fill `elapsed_s`; disabling keeps traces bit-reproducible.
    pub timing: bool,
    /// Overrides the problem's `known_f_star`.
    pub f_star: Option<FStar>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            record: RecordPlan::Stride(1),
            allow_invalid_schedule: false,
            timing: false,
            f_star: None,
        }
    }
}

impl RunOptions {
    pub fn with_stride(stride: usize) -> Self {
        RunOptions {
            record: RecordPlan::Stride(stride),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// `x̄_N`.
    pub x_bar: DenseVector,
    /// `x_N`.
    pub x_last: DenseVector,
    /// `S_N`.
    pub weight_sum: f64,
    pub trace: Trace,
}

/// Runs `n_iters` outer iterations from `x0`.
///
/// An infeasible `x0` is projected onto `X` with a logged warning. A
/// schedule failing [`validate`] is an error unless
/// `opts.allow_invalid_schedule` is set.
pub fn run_irig(
    p: &ProblemInstance,
    schedule: &PowerSchedule,
    n_iters: usize,
    x0: &DenseVector,
    opts: &RunOptions,
) -> Result<RunOutput> {
    run_irig_observed(p, schedule, n_iters, x0, opts, |_| {})
}

/// As [`run_irig`], calling `observe` with the state after initialization
/// and after every outer iteration.
pub fn run_irig_observed(
    p: &ProblemInstance,
    schedule: &PowerSchedule,
    n_iters: usize,
    x0: &DenseVector,
    opts: &RunOptions,
    mut observe: impl FnMut(&SolverState),
) -> Result<RunOutput> {
    let report = validate(schedule, p.m(), p.mu_h())?;
    if !report.is_ok() {
        if opts.allow_invalid_schedule {
            warn!("running with inadmissible schedule: {report}");
        } else {
            return Err(Error::InvalidSchedule(report.violations));
        }
    }
    check_dim(p.dim(), x0.dim())?;
    let x0 = if p.feasible().contains(x0, FEASIBILITY_TOL)? {
        x0.clone()
    } else {
        warn!("initial point lies outside the feasible set; projecting it");
        p.feasible().project(x0)?
    };

    let checkpoints = opts.record.checkpoints(n_iters)?;
    let f_star = opts
        .f_star
        .or(p.known_f_star().map(|value| FStar { value, estimated: false }));
    let x_star = p.known_x_h_star();
    let clock = Instant::now();
    let mut trace = Trace {
        rows: Vec::with_capacity(checkpoints.len()),
        f_star,
    };
    let mut next_cp = checkpoints.iter().copied().peekable();
    let mut record = |state: &SolverState, trace: &mut Trace| -> Result<()> {
        if next_cp.peek() != Some(&state.k) {
            return Ok(());
        }
        next_cp.next();
        let f_bar = p.lower_value(&state.x_bar)?;
        trace.rows.push(TraceRow {
            k: state.k,
            f_bar,
            f_gap: f_star.map(|fs| f_bar - fs.value),
            h_bar: p.upper_value(&state.x_bar)?,
            dist_xstar: x_star.map(|xs| state.x_bar.distance(xs)).transpose()?,
            gamma_k: schedule.gamma_at(state.k),
            lambda_k: schedule.lambda_at(state.k),
            elapsed_s: opts.timing.then(|| clock.elapsed().as_secs_f64()),
        });
        Ok(())
    };

    let mut state = SolverState::initial(x0, schedule);
    observe(&state);
    record(&state, &mut trace)?;
    for k in 0..n_iters {
        let x_next = inner_cycle(&state.x, p, schedule.gamma_at(k), schedule.lambda_at(k))?;
        state = update_average(state, x_next, schedule.weight_at(k + 1))?;
        observe(&state);
        record(&state, &mut trace)?;
    }
    Ok(RunOutput {
        x_bar: state.x_bar,
        x_last: state.x,
        weight_sum: state.weight_sum,
        trace,
    })
}
