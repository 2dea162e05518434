//! Compact convex feasible sets with exact Euclidean projection.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::numerics::{norms, DenseVector};

/// Largest dimension for which box corners are enumerated when sampling.
pub const MAX_CORNER_DIM: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet {
    Box { lower: DenseVector, upper: DenseVector },
    Ball { center: DenseVector, radius: f64 },
}

impl FeasibleSet {
    pub fn new_box(lower: DenseVector, upper: DenseVector) -> Result<Self> {
        check_dim(lower.dim(), upper.dim())?;
        if lower.dim() == 0 {
            return Err(Error::invalid("feasible set must have dimension >= 1"));
        }
        if let Some(j) = (0..lower.dim()).find(|&j| lower[j] > upper[j]) {
            return Err(Error::invalid(format!(
                "empty box: lower[{j}] = {} > upper[{j}] = {}",
                lower[j], upper[j]
            )));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The box `[-half_width, half_width]^n`.
    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        if !(half_width >= 0.0) {
            return Err(Error::invalid("cube half-width must be non-negative"));
        }
        Self::new_box(
            DenseVector::filled(n, -half_width)?,
            DenseVector::filled(n, half_width)?,
        )
    }

    pub fn new_ball(center: DenseVector, radius: f64) -> Result<Self> {
        if center.dim() == 0 {
            return Err(Error::invalid("feasible set must have dimension >= 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.dim(),
            FeasibleSet::Ball { center, .. } => center.dim(),
        }
    }

    /// Euclidean projection onto the set. Exactly idempotent.
    pub fn project(&self, x: &DenseVector) -> Result<DenseVector> {
        check_dim(self.dim(), x.dim())?;
        let mut out = x.clone();
        self.project_in_place(out.as_mut_slice());
        Ok(out)
    }

    pub(crate) fn project_in_place(&self, x: &mut [f64]) {
        match self {
            FeasibleSet::Box { lower, upper } => {
                for ((xi, lo), hi) in x.iter_mut().zip(lower.iter()).zip(upper.iter()) {
                    *xi = xi.clamp(*lo, *hi);
                }
            }
            FeasibleSet::Ball { center, radius } => {
                let c = center.as_slice();
                let dist = offset_norm(x, c);
                if dist <= *radius {
                    return;
                }
                let dir: Vec<f64> = x.iter().zip(c).map(|(xi, ci)| xi - ci).collect();
                let mut scale = radius / dist;
                // rounding can leave the scaled point a hair outside; shrink until it is not
                loop {
                    for ((xi, ci), di) in x.iter_mut().zip(c).zip(&dir) {
                        *xi = ci + scale * di;
                    }
                    if offset_norm(x, c) <= *radius {
                        break;
                    }
                    scale *= 1.0 - f64::EPSILON;
                }
            }
        }
    }

    /// True iff `x` violates no constraint of the set by more than `tol`.
    pub fn contains(&self, x: &DenseVector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        if !(tol >= 0.0) {
            return Err(Error::invalid("tolerance must be non-negative"));
        }
        Ok(match self {
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(xi, (lo, hi))| *xi >= lo - tol && *xi <= hi + tol),
            FeasibleSet::Ball { center, radius } => {
                offset_norm(x.as_slice(), center.as_slice()) <= radius + tol
            }
        })
    }

    /// Upper bound on `‖x‖` over the set; attained for both families.
    pub fn radius_bound(&self) -> f64 {
        match self {
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .map(|(lo, hi)| (lo * lo).max(hi * hi))
                .sum::<f64>()
                .sqrt(),
            FeasibleSet::Ball { center, radius } => norms(center).l2 + radius,
        }
    }

    /// Deterministic extreme points used to seed constant estimation:
    /// box corners (only for dim <= [`MAX_CORNER_DIM`]) or the 2n axis
    /// points of a ball.
    pub fn extreme_points(&self) -> Vec<DenseVector> {
        match self {
            FeasibleSet::Box { lower, upper } => {
                let n = lower.dim();
                if n > MAX_CORNER_DIM {
                    return Vec::new();
                }
                (0..1usize << n)
                    .map(|mask| {
                        let v = (0..n)
                            .map(|j| if mask >> j & 1 == 1 { upper[j] } else { lower[j] })
                            .collect();
                        DenseVector::from_vec_unchecked(v)
                    })
                    .collect()
            }
            FeasibleSet::Ball { center, radius } => {
                let n = center.dim();
                let mut pts = Vec::with_capacity(2 * n);
                for j in 0..n {
                    for sign in [1.0, -1.0] {
                        let mut v = center.clone().into_vec();
                        v[j] += sign * radius;
                        pts.push(DenseVector::from_vec_unchecked(v));
                    }
                }
                pts
            }
        }
    }

    /// Draws a point uniformly from the set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DenseVector {
        match self {
            FeasibleSet::Box { lower, upper } => {
                let v = lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                    .collect();
                DenseVector::from_vec_unchecked(v)
            }
            FeasibleSet::Ball { center, radius } => {
                let n = center.dim();
                let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let len = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let rho = radius * rng.gen::<f64>().powf(1.0 / n as f64);
                let mut v: Vec<f64> = center
                    .iter()
                    .zip(&dir)
                    .map(|(c, d)| c + rho * d / len)
                    .collect();
                self.project_in_place(&mut v);
                DenseVector::from_vec_unchecked(v)
            }
        }
    }
}

fn offset_norm(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
