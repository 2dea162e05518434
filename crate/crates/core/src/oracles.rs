//! Value-and-subgradient oracles for the lower-level components and the
//! strongly convex upper-level objective.
//!
//! At every kink (hinge margin exactly 1, `|t|` at 0, penalty boundary
//! `q(x) = 0`) the oracles return the zero-magnitude element of the
//! subdifferential.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::geometry::FeasibleSet;
use crate::numerics::{norms, DenseVector, SparseVector};

/// A convex function with a subgradient oracle.
pub trait ComponentOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &DenseVector) -> Result<f64>;

    fn subgradient(&self, x: &DenseVector) -> Result<DenseVector>;

    fn eval(&self, x: &DenseVector) -> Result<(f64, DenseVector)> {
        Ok((self.value(x)?, self.subgradient(x)?))
    }

    /// `out += scale * g(x)`. Implementations with sparse structure override
    /// this to skip the dense temporary.
    fn add_subgradient(&self, x: &DenseVector, scale: f64, out: &mut [f64]) -> Result<()> {
        check_dim(self.dim(), out.len())?;
        let g = self.subgradient(x)?;
        for (o, gi) in out.iter_mut().zip(g.iter()) {
            *o += scale * gi;
        }
        Ok(())
    }
}

/// A strongly convex upper-level objective.
pub trait UpperOracle: ComponentOracle {
    /// Strong convexity modulus `mu_h > 0`.
    fn strong_convexity(&self) -> f64;
}

#[inline]
fn sign0(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("strong convexity modulus must be positive, got {mu}")))
    }
}

/// Binary class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }
}

/// Sum of hinge losses over a batch: `Σ_j max{0, 1 - b_j ⟨x, a_j⟩}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HingeBatch {
    dim: usize,
    samples: Vec<(SparseVector, Label)>,
}

impl HingeBatch {
    pub fn new(dim: usize, samples: Vec<(SparseVector, Label)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("hinge batch must be nonempty"));
        }
        for (a, _) in &samples {
            check_dim(dim, a.dim())?;
        }
        Ok(HingeBatch { dim, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(SparseVector, Label)] {
        &self.samples
    }

    fn margins<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = (&'a SparseVector, f64, f64)> + 'a {
        self.samples.iter().map(move |(a, b)| {
            let b = b.sign();
            (a, b, b * a.dot_unchecked(x))
        })
    }
}

impl ComponentOracle for HingeBatch {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DenseVector) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        Ok(self
            .margins(x.as_slice())
            .fold(0.0, |s, (_, _, m)| s + (1.0 - m).max(0.0)))
    }

    fn subgradient(&self, x: &DenseVector) -> Result<DenseVector> {
        let mut g = vec![0.0; self.dim];
        self.add_subgradient(x, 1.0, &mut g)?;
        Ok(DenseVector::from_vec_unchecked(g))
    }

    fn add_subgradient(&self, x: &DenseVector, scale: f64, out: &mut [f64]) -> Result<()> {
        check_dim(self.dim, x.dim())?;
        check_dim(self.dim, out.len())?;
        for (a, b, m) in self.margins(x.as_slice()) {
            if m < 1.0 {
                a.add_scaled_into(-b * scale, out);
            }
        }
        Ok(())
    }
}

/// Affine scalar function `q(x) = ⟨c, x⟩ - d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    pub normal: DenseVector,
    pub offset: f64,
}

impl Affine {
    pub fn new(normal: DenseVector, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("affine offset"));
        }
        Ok(Affine { normal, offset })
    }
}

impl ComponentOracle for Affine {
    fn dim(&self) -> usize {
        self.normal.dim()
    }

    fn value(&self, x: &DenseVector) -> Result<f64> {
        Ok(self.normal.dot(x)? - self.offset)
    }

    fn subgradient(&self, x: &DenseVector) -> Result<DenseVector> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.normal.clone())
    }
}

/// Exact penalty `max{0, q(x)}` for a convex constraint `q(x) <= 0`.
#[derive(Debug)]
pub struct ConstraintPenalty {
    q: Box<dyn ComponentOracle>,
}

impl ConstraintPenalty {
    pub fn new(q: Box<dyn ComponentOracle>) -> Self {
        ConstraintPenalty { q }
    }

    pub fn constraint(&self) -> &dyn ComponentOracle {
        self.q.as_ref()
    }
}

impl ComponentOracle for ConstraintPenalty {
    fn dim(&self) -> usize {
        self.q.dim()
    }

    fn value(&self, x: &DenseVector) -> Result<f64> {
        Ok(self.q.value(x)?.max(0.0))
    }

    fn subgradient(&self, x: &DenseVector) -> Result<DenseVector> {
        if self.q.value(x)? > 0.0 {
            self.q.subgradient(x)
        } else {
            Ok(DenseVector::zeros(self.dim()))
        }
    }
}

/// `Σ_{j ∈ coords} |x_j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsCoords {
    dim: usize,
    coords: Vec<usize>,
}

impl AbsCoords {
    pub fn new(dim: usize, mut coords: Vec<usize>) -> Result<Self> {
        coords.sort_unstable();
        coords.dedup();
        if let Some(&j) = coords.last() {
            if j >= dim {
                return Err(Error::invalid(format!("coordinate {j} out of range for dimension {dim}")));
            }
        }
        Ok(AbsCoords { dim, coords })
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl ComponentOracle for AbsCoords {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DenseVector) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        Ok(self.coords.iter().fold(0.0, |s, &j| s + x[j].abs()))
    }

    fn subgradient(&self, x: &DenseVector) -> Result<DenseVector> {
        check_dim(self.dim, x.dim())?;
        let mut g = vec![0.0; self.dim];
        for &j in &self.coords {
            g[j] = sign0(x[j]);
        }
        Ok(DenseVector::from_vec_unchecked(g))
    }
}

/// `h(x) = (mu/2)‖x‖₂² + ‖x‖₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElasticNet {
    dim: usize,
    mu: f64,
}

impl ElasticNet {
    pub fn new(dim: usize, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(ElasticNet { dim, mu })
    }
}

impl ComponentOracle for ElasticNet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DenseVector) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        let n = norms(x);
        Ok(0.5 * self.mu * n.l2 * n.l2 + n.l1)
    }

    fn subgradient(&self, x: &DenseVector) -> Result<DenseVector> {
        check_dim(self.dim, x.dim())?;
        Ok(DenseVector::from_vec_unchecked(
            x.iter().map(|&v| self.mu * v + sign0(v)).collect(),
        ))
    }
}

impl UpperOracle for ElasticNet {
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}

/// `h(x) = (mu/2)‖x - c‖₂²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedQuadratic {
    center: DenseVector,
    mu: f64,
}

impl ShiftedQuadratic {
    pub fn new(center: DenseVector, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(ShiftedQuadratic { center, mu })
    }

    pub fn center(&self) -> &DenseVector {
        &self.center
    }
}

impl ComponentOracle for ShiftedQuadratic {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn value(&self, x: &DenseVector) -> Result<f64> {
        let d = x.distance(&self.center)?;
        Ok(0.5 * self.mu * d * d)
    }

    fn subgradient(&self, x: &DenseVector) -> Result<DenseVector> {
        check_dim(self.dim(), x.dim())?;
        let g = x
            .iter()
            .zip(self.center.iter())
            .map(|(xi, ci)| self.mu * (xi - ci))
            .collect();
        Ok(DenseVector::from_vec_unchecked(g))
    }
}

impl UpperOracle for ShiftedQuadratic {
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}

/// The bilevel problem: minimize `upper` over the minimizers in `feasible`
/// of `Σ_i components[i]`.
#[derive(Debug)]
pub struct ProblemInstance {
    components: Vec<Box<dyn ComponentOracle>>,
    upper: Box<dyn UpperOracle>,
    feasible: FeasibleSet,
    known_f_star: Option<f64>,
    known_x_h_star: Option<DenseVector>,
}

/// Tolerance for the consistency check between `known_f_star` and
/// `f(known_x_h_star)`.
pub const KNOWN_VALUE_TOL: f64 = 1e-9;

impl ProblemInstance {
    pub fn new(
        components: Vec<Box<dyn ComponentOracle>>,
        upper: Box<dyn UpperOracle>,
        feasible: FeasibleSet,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("problem needs at least one component"));
        }
        let n = feasible.dim();
        check_dim(n, upper.dim())?;
        for c in &components {
            check_dim(n, c.dim())?;
        }
        check_mu(upper.strong_convexity())?;
        Ok(ProblemInstance {
            components,
            upper,
            feasible,
            known_f_star: None,
            known_x_h_star: None,
        })
    }

    pub fn with_known_f_star(mut self, f_star: f64) -> Result<Self> {
        if !f_star.is_finite() {
            return Err(Error::NonFinite("known f*"));
        }
        self.known_f_star = Some(f_star);
        self.check_known()?;
        Ok(self)
    }

    pub fn with_known_x_h_star(mut self, x: DenseVector) -> Result<Self> {
        check_dim(self.dim(), x.dim())?;
        self.known_x_h_star = Some(x);
        self.check_known()?;
        Ok(self)
    }

    fn check_known(&self) -> Result<()> {
        if let (Some(f), Some(x)) = (self.known_f_star, &self.known_x_h_star) {
            let fx = self.lower_value(x)?;
            if (fx - f).abs() > KNOWN_VALUE_TOL * (1.0 + f.abs()) {
                return Err(Error::invalid(format!(
                    "known x_h* has f = {fx}, inconsistent with known f* = {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.feasible.dim()
    }

    pub fn components(&self) -> &[Box<dyn ComponentOracle>] {
        &self.components
    }

    pub fn upper(&self) -> &dyn UpperOracle {
        self.upper.as_ref()
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    pub fn mu_h(&self) -> f64 {
        self.upper.strong_convexity()
    }

    pub fn known_f_star(&self) -> Option<f64> {
        self.known_f_star
    }

    pub fn known_x_h_star(&self) -> Option<&DenseVector> {
        self.known_x_h_star.as_ref()
    }

    /// `f(x) = Σ_i f_i(x)`, summed in component order.
    pub fn lower_value(&self, x: &DenseVector) -> Result<f64> {
        self.components
            .iter()
            .try_fold(0.0, |s, c| Ok(s + c.value(x)?))
    }

    pub fn upper_value(&self, x: &DenseVector) -> Result<f64> {
        self.upper.value(x)
    }

    /// `f(x) + lambda * h(x)`.
    pub fn regularized_value(&self, x: &DenseVector, lambda: f64) -> Result<f64> {
        Ok(self.lower_value(x)? + lambda * self.upper_value(x)?)
    }
}

/// Sampled estimates of the bounding constants of the problem. All four are
/// lower bounds on the true suprema over `X`, except `radius` which is the
/// set's analytic bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// `max ‖g_{f_i}(x)‖` over samples and components.
    pub c_f: f64,
    /// `max ‖g_h(x)‖` over samples.
    pub c_h: f64,
    /// `max ‖x‖` over `X`.
    pub radius: f64,
    /// `max |h(x)|` over samples.
    pub h_max: f64,
}

/// The sample sequence for `count` is a prefix of the sequence for any
/// larger count with the same seed, so every estimate is monotone in
/// `count`. Extreme points of the set come first.
pub fn estimate_constants(p: &ProblemInstance, sample_count: usize, seed: u64) -> Result<Constants> {
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be positive"));
    }
    let set = p.feasible();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extremes = set.extreme_points();
    let mut out = Constants {
        c_f: 0.0,
        c_h: 0.0,
        radius: set.radius_bound(),
        h_max: 0.0,
    };
    let mut sampled_radius: f64 = 0.0;
    for i in 0..sample_count {
        let x = match extremes.get(i) {
            Some(v) => v.clone(),
            None => set.sample(&mut rng),
        };
        for c in p.components() {
            out.c_f = out.c_f.max(norms(&c.subgradient(&x)?).l2);
        }
        let (hv, hg) = p.upper().eval(&x)?;
        out.c_h = out.c_h.max(norms(&hg).l2);
        out.h_max = out.h_max.max(hv.abs());
        sampled_radius = sampled_radius.max(norms(&x).l2);
    }
    out.radius = out.radius.max(sampled_radius);
    Ok(out)
}
