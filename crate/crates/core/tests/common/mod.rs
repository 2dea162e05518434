//! Sampled invariant checks shared by the integration targets.

#![allow(dead_code)]

use irig::geometry::FeasibleSet;
use irig::numerics::{norms, DenseVector, SparseVector};
use irig::oracles::{
    AbsCoords, Affine, ComponentOracle, ConstraintPenalty, ElasticNet, HingeBatch, Label, ShiftedQuadratic,
    UpperOracle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUBGRADIENT_TOL: f64 = 1e-9;
pub const PROJECTION_TOL: f64 = 1e-9;

pub fn dv(v: &[f64]) -> DenseVector {
    DenseVector::from_slice(v).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DenseVector {
    DenseVector::new((0..n).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

fn random_hinge(rng: &mut ChaCha8Rng, n: usize) -> HingeBatch {
    let samples = (0..rng.gen_range(1..6))
        .map(|_| {
            let entries: Vec<(usize, f64)> =
                (0..rng.gen_range(1..=n)).map(|_| (rng.gen_range(0..n), rng.gen_range(-2.0..2.0))).collect();
            let label = if rng.gen_bool(0.5) { Label::Pos } else { Label::Neg };
            (SparseVector::new(n, entries).unwrap(), label)
        })
        .collect();
    HingeBatch::new(n, samples).unwrap()
}

/// One random lower-level oracle of each kind.
pub fn random_components(rng: &mut ChaCha8Rng, n: usize) -> Vec<Box<dyn ComponentOracle>> {
    let coords: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    let normal = random_point(rng, n, 2.0);
    vec![
        Box::new(random_hinge(rng, n)),
        Box::new(AbsCoords::new(n, coords).unwrap()),
        Box::new(Affine::new(normal.clone(), rng.gen_range(-1.0..1.0)).unwrap()),
        Box::new(ConstraintPenalty::new(Box::new(Affine::new(normal, rng.gen_range(-1.0..1.0)).unwrap()))),
    ]
}

pub fn random_upper(rng: &mut ChaCha8Rng, n: usize) -> Vec<Box<dyn UpperOracle>> {
    let mu = rng.gen_range(0.05..3.0);
    vec![
        Box::new(ElasticNet::new(n, mu).unwrap()),
        Box::new(ShiftedQuadratic::new(random_point(rng, n, 3.0), mu).unwrap()),
    ]
}

pub fn random_set(rng: &mut ChaCha8Rng, n: usize) -> FeasibleSet {
    if rng.gen_bool(0.5) {
        let lo = random_point(rng, n, 2.0);
        let hi = DenseVector::new(lo.iter().map(|l| l + rng.gen_range(0.0..3.0)).collect()).unwrap();
        FeasibleSet::new_box(lo, hi).unwrap()
    } else {
        FeasibleSet::new_ball(random_point(rng, n, 2.0), rng.gen_range(0.1..3.0)).unwrap()
    }
}

fn inner(a: &DenseVector, b: &DenseVector) -> f64 {
    a.dot(b).unwrap()
}

/// `f(y) >= f(x) + <g, y - x>` for every oracle kind; returns the worst
/// slack observed, or the first violation.
pub fn check_subgradient_inequality(samples: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for s in 0..samples {
        let n = rng.gen_range(1..8);
        let (x, y) = (random_point(&mut rng, n, 4.0), random_point(&mut rng, n, 4.0));
        let d = y.sub(&x).unwrap();
        let mut oracles = random_components(&mut rng, n);
        for h in random_upper(&mut rng, n) {
            oracles.push(Box::new(UpperAsComponent(h)));
        }
        for o in &oracles {
            let (fx, g) = o.eval(&x).unwrap();
            let fy = o.value(&y).unwrap();
            let slack = fy - fx - inner(&g, &d);
            if slack < -SUBGRADIENT_TOL * (1.0 + fx.abs()) {
                return Err(format!("sample {s}: {o:?} violates the subgradient inequality by {slack:e}"));
            }
            worst = worst.min(slack);
        }
    }
    Ok(worst)
}

/// `h(y) >= h(x) + <g, y - x> + (μ/2)‖y - x‖²`.
pub fn check_strong_convexity(samples: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for s in 0..samples {
        let n = rng.gen_range(1..8);
        let (x, y) = (random_point(&mut rng, n, 4.0), random_point(&mut rng, n, 4.0));
        let d = y.sub(&x).unwrap();
        for h in random_upper(&mut rng, n) {
            let (hx, g) = h.eval(&x).unwrap();
            let hy = h.value(&y).unwrap();
            let quad = 0.5 * h.strong_convexity() * inner(&d, &d);
            let slack = hy - hx - inner(&g, &d) - quad;
            if slack < -SUBGRADIENT_TOL * (1.0 + hx.abs()) {
                return Err(format!("sample {s}: {h:?} violates strong convexity by {slack:e}"));
            }
            worst = worst.min(slack);
        }
    }
    Ok(worst)
}

/// Projection invariants on random boxes and balls: the image lies in the
/// set, projecting twice changes nothing, the variational inequality
/// `<x - P(x), z - P(x)> <= 0` holds for sampled `z` in the set, and `P`
/// is nonexpansive.
pub fn check_projection(samples: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        let n = rng.gen_range(1..8);
        let set = random_set(&mut rng, n);
        let (x, y) = (random_point(&mut rng, n, 6.0), random_point(&mut rng, n, 6.0));
        let (px, py) = (set.project(&x).unwrap(), set.project(&y).unwrap());
        if !set.contains(&px, 1e-12).unwrap() {
            return Err(format!("sample {s}: projection of {x:?} left {set:?}"));
        }
        if set.project(&px).unwrap() != px {
            return Err(format!("sample {s}: projection not idempotent on {set:?}"));
        }
        let r = x.sub(&px).unwrap();
        for _ in 0..4 {
            let z = set.sample(&mut rng);
            let vi = inner(&r, &z.sub(&px).unwrap());
            if vi > PROJECTION_TOL * (1.0 + norms(&r).l2) {
                return Err(format!("sample {s}: optimality condition off by {vi:e} on {set:?}"));
            }
        }
        if px.distance(&py).unwrap() > x.distance(&y).unwrap() + 1e-12 {
            return Err(format!("sample {s}: projection expanded a distance on {set:?}"));
        }
    }
    Ok(())
}

#[derive(Debug)]
struct UpperAsComponent(Box<dyn UpperOracle>);

impl ComponentOracle for UpperAsComponent {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, x: &DenseVector) -> irig::Result<f64> {
        self.0.value(x)
    }

    fn subgradient(&self, x: &DenseVector) -> irig::Result<DenseVector> {
        self.0.subgradient(x)
    }
}
