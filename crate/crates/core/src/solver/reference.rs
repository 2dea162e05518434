//! Brute-force approximation of the regularized minimizer `x*_λ` of
//! `f + λh` over `X`.
//!
//! Plain projected subgradient with step `c / (μ_h λ (k+1))` and uniform
//! averaging of the iterates. This is a test oracle, not a competitor to
//! the incremental method.

use crate::error::{check_dim, Error, Result};
use crate::numerics::DenseVector;
use crate::oracles::ProblemInstance;

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOptions {
    /// Step scale `c`.
    pub step_scale: f64,
    /// Starting point; `P_X(0)` when absent.
    pub start: Option<DenseVector>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            step_scale: 1.0,
            start: None,
        }
    }
}

pub fn solve_regularized_reference(p: &ProblemInstance, lambda: f64, iters: usize) -> Result<DenseVector> {
    solve_regularized_reference_with(p, lambda, iters, &ReferenceOptions::default())
}

pub fn solve_regularized_reference_with(
    p: &ProblemInstance,
    lambda: f64,
    iters: usize,
    opts: &ReferenceOptions,
) -> Result<DenseVector> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if iters == 0 {
        return Err(Error::invalid("reference solver needs at least one iteration"));
    }
    if !(opts.step_scale > 0.0 && opts.step_scale.is_finite()) {
        return Err(Error::invalid("step scale must be positive"));
    }
    let n = p.dim();
    let mut x = match &opts.start {
        Some(s) => {
            check_dim(n, s.dim())?;
            p.feasible().project(s)?
        }
        None => p.feasible().project(&DenseVector::zeros(n))?,
    };
    let modulus = p.mu_h() * lambda;
    let mut g = vec![0.0; n];
    let mut avg = vec![0.0; n];
    for k in 0..iters {
        g.iter_mut().for_each(|v| *v = 0.0);
        for c in p.components() {
            c.add_subgradient(&x, 1.0, &mut g)?;
        }
        p.upper().add_subgradient(&x, lambda, &mut g)?;
        let step = opts.step_scale / (modulus * (k + 1) as f64);
        for (xi, gi) in x.as_mut_slice().iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        p.feasible().project_in_place(x.as_mut_slice());
        if !x.is_finite() {
            return Err(Error::NonFinite("reference iterate"));
        }
        // running mean of x_1..x_{k+1}
        let w = 1.0 / (k + 1) as f64;
        for (a, xi) in avg.iter_mut().zip(x.iter()) {
            *a += w * (xi - *a);
        }
    }
    DenseVector::new(avg)
}

/// Solves along a sequence of regularization parameters, warm-starting each
/// solve from the previous solution.
pub fn reference_ladder(p: &ProblemInstance, lambdas: &[f64], iters: usize) -> Result<Vec<DenseVector>> {
    let mut opts = ReferenceOptions::default();
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let x = solve_regularized_reference_with(p, lambda, iters, &opts)?;
        opts.start = Some(x.clone());
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeasibleSet;
    use crate::oracles::{AbsCoords, ComponentOracle, ShiftedQuadratic};

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::from_slice(v).unwrap()
    }

    fn p2() -> ProblemInstance {
        let comps: Vec<Box<dyn ComponentOracle>> = (0..2)
            .map(|_| Box::new(AbsCoords::new(2, vec![0]).unwrap()) as Box<dyn ComponentOracle>)
            .collect();
        ProblemInstance::new(
            comps,
            Box::new(ShiftedQuadratic::new(dv(&[1., 1.5]), 1.0).unwrap()),
            FeasibleSet::cube(2, 2.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn p2_regularized_minimizers() {
        let p = p2();
        let x = solve_regularized_reference(&p, 1.0, 100_000).unwrap();
        assert!(x.distance(&dv(&[0.0, 1.5])).unwrap() <= 1e-2, "{x:?}");
        let x = solve_regularized_reference(&p, 4.0, 100_000).unwrap();
        assert!(x.distance(&dv(&[0.5, 1.5])).unwrap() <= 1e-2, "{x:?}");
    }

    /// Two quadratics: the minimizer of `½‖x - a‖² + λ ½‖x - c‖²` is
    /// `(a + λc) / (1 + λ)`, on the segment between `a` and `c`.
    #[test]
    fn smooth_lower_level_lands_on_segment() {
        let a = dv(&[1.0, -1.0]);
        let c = dv(&[-0.5, 0.5]);
        let p = ProblemInstance::new(
            vec![Box::new(ShiftedQuadratic::new(a.clone(), 1.0).unwrap()) as Box<dyn ComponentOracle>],
            Box::new(ShiftedQuadratic::new(c.clone(), 1.0).unwrap()),
            FeasibleSet::cube(2, 3.0).unwrap(),
        )
        .unwrap();
        for lambda in [0.1, 1.0, 7.0] {
            let x = solve_regularized_reference(&p, lambda, 20_000).unwrap();
            let t = lambda / (1.0 + lambda);
            let on_seg = dv(&[a[0] + t * (c[0] - a[0]), a[1] + t * (c[1] - a[1])]);
            assert!(x.distance(&on_seg).unwrap() <= 1e-3, "lambda {lambda}: {x:?}");
        }
    }

    #[test]
    fn argument_errors() {
        let p = p2();
        assert!(solve_regularized_reference(&p, 0.0, 10).is_err());
        assert!(solve_regularized_reference(&p, 1.0, 0).is_err());
    }
}
