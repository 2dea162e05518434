//! Problem families with analytic ground truth, plus a synthetic sparse
//! classification dataset.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::harness::batching::partition_batches;
use crate::harness::svmlight::LabeledDataset;
use crate::numerics::{DenseVector, SparseVector};
use crate::oracles::{
    AbsCoords, Affine, ComponentOracle, ConstraintPenalty, ElasticNet, Label, ProblemInstance,
    ShiftedQuadratic, UpperOracle,
};

/// Upper-level objective choice.
#[derive(Clone, Debug, PartialEq)]
pub enum UpperSpec {
    /// `(mu/2)‖x - center‖²`
    Shifted { center: Vec<f64>, mu: f64 },
    /// `(mu/2)‖x‖² + ‖x‖₁`
    ElasticNet { mu: f64 },
}

impl UpperSpec {
    fn build(&self, dim: usize) -> Result<Box<dyn UpperOracle>> {
        Ok(match self {
            UpperSpec::Shifted { center, mu } => {
                if center.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: center.len(),
                    });
                }
                Box::new(ShiftedQuadratic::new(DenseVector::from_slice(center)?, *mu)?)
            }
            UpperSpec::ElasticNet { mu } => Box::new(ElasticNet::new(dim, *mu)?),
        })
    }
}

/// Ill-posed lower level `f = multiplicity · Σ_{j ∈ zero_coords} |x_j|`
/// over the cube `[-half_width, half_width]^dim`, split into
/// `multiplicity` identical components. Its solution set is the face
/// `{x : x_j = 0, j ∈ zero_coords}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionSpec {
    pub dim: usize,
    pub half_width: f64,
    pub zero_coords: Vec<usize>,
    pub multiplicity: usize,
    pub upper: UpperSpec,
}

impl SelectionSpec {
    /// `X = [-2,2]²`, `f_1 = f_2 = |x_1|`, `h = ½‖x - (1, 1.5)‖²`.
    pub fn p2() -> Self {
        SelectionSpec {
            dim: 2,
            half_width: 2.0,
            zero_coords: vec![0],
            multiplicity: 2,
            upper: UpperSpec::Shifted {
                center: vec![1.0, 1.5],
                mu: 1.0,
            },
        }
    }

    /// P2's lower level with an elastic-net selector, `μ_h = 0.1`.
    pub fn p2_elastic() -> Self {
        SelectionSpec {
            upper: UpperSpec::ElasticNet { mu: 0.1 },
            ..Self::p2()
        }
    }
}

pub fn gen_selection_problem(spec: &SelectionSpec) -> Result<ProblemInstance> {
    if spec.multiplicity == 0 {
        return Err(Error::invalid("multiplicity must be at least 1"));
    }
    if !(spec.half_width > 0.0 && spec.half_width.is_finite()) {
        return Err(Error::invalid("half_width must be positive"));
    }
    let abs = AbsCoords::new(spec.dim, spec.zero_coords.clone())?;
    let components: Vec<Box<dyn ComponentOracle>> = (0..spec.multiplicity)
        .map(|_| Box::new(abs.clone()) as Box<dyn ComponentOracle>)
        .collect();
    let feasible = FeasibleSet::cube(spec.dim, spec.half_width)?;
    let upper = spec.upper.build(spec.dim)?;
    // the face is a box, so the minimizer of h over it is coordinatewise
    let x_star = match &spec.upper {
        UpperSpec::Shifted { center, .. } => center
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if abs.coords().contains(&j) {
                    0.0
                } else {
                    c.clamp(-spec.half_width, spec.half_width)
                }
            })
            .collect(),
        UpperSpec::ElasticNet { .. } => vec![0.0; spec.dim],
    };
    ProblemInstance::new(components, upper, feasible)?
        .with_known_f_star(0.0)?
        .with_known_x_h_star(DenseVector::new(x_star)?)
}

/// Affine constraints `⟨c_i, x⟩ <= d_i` inside a box, reformulated as the
/// exact-penalty lower level `Σ_i max{0, ⟨c_i, x⟩ - d_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedSpec {
    /// `(c_i, d_i)` pairs.
    pub constraints: Vec<(Vec<f64>, f64)>,
    pub lower: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub upper: UpperSpec,
}

impl ConstrainedSpec {
    /// `x_1 >= 1` on `[-2,2]²` with `h = ½‖x‖²`.
    pub fn halfplane() -> Self {
        ConstrainedSpec {
            constraints: vec![(vec![-1.0, 0.0], -1.0)],
            lower: vec![-2.0, -2.0],
            upper_bounds: vec![2.0, 2.0],
            upper: UpperSpec::Shifted {
                center: vec![0.0, 0.0],
                mu: 1.0,
            },
        }
    }
}

/// Iterations and tolerance of the feasibility probe.
pub const PROBE_ITERS: usize = 10_000;
pub const PROBE_TOL: f64 = 1e-9;

pub fn gen_constrained_problem(spec: &ConstrainedSpec) -> Result<ProblemInstance> {
    if spec.constraints.is_empty() {
        return Err(Error::invalid("need at least one constraint"));
    }
    let n = spec.lower.len();
    let feasible = FeasibleSet::new_box(
        DenseVector::from_slice(&spec.lower)?,
        DenseVector::from_slice(&spec.upper_bounds)?,
    )?;
    let affines = spec
        .constraints
        .iter()
        .map(|(c, d)| Affine::new(DenseVector::from_slice(c)?, *d))
        .collect::<Result<Vec<_>>>()?;
    let components: Vec<Box<dyn ComponentOracle>> = affines
        .iter()
        .map(|a| Box::new(ConstraintPenalty::new(Box::new(a.clone()))) as Box<dyn ComponentOracle>)
        .collect();
    let upper = spec.upper.build(n)?;
    let problem = ProblemInstance::new(components, upper, feasible)?;
    let worst = feasibility_probe(&problem)?;
    if worst > PROBE_TOL {
        return Err(Error::Infeasible(format!(
            "no point of the box satisfies all constraints (best penalty found {worst:e})"
        )));
    }
    let problem = problem.with_known_f_star(0.0)?;
    match analytic_selection(spec, &affines, &problem)? {
        Some(x) => problem.with_known_x_h_star(x),
        None => Ok(problem),
    }
}

/// Minimizes the penalty sum over the box with Polyak steps (target 0);
/// returns the smallest value seen.
fn feasibility_probe(p: &ProblemInstance) -> Result<f64> {
    let mut x = p.feasible().project(&DenseVector::zeros(p.dim()))?;
    let mut best = f64::INFINITY;
    for _ in 0..PROBE_ITERS {
        let (v, g) = p
            .components()
            .iter()
            .try_fold((0.0, vec![0.0; p.dim()]), |(v, mut g), c| -> Result<_> {
                let (cv, cg) = c.eval(&x)?;
                g.iter_mut().zip(cg.iter()).for_each(|(a, b)| *a += b);
                Ok((v + cv, g))
            })?;
        best = best.min(v);
        let gg: f64 = g.iter().map(|t| t * t).sum();
        if v <= PROBE_TOL || gg == 0.0 {
            break;
        }
        let step = v / gg;
        for (xi, gi) in x.as_mut_slice().iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        p.feasible().project_in_place(x.as_mut_slice());
    }
    Ok(best)
}

fn satisfies_all(affines: &[Affine], x: &DenseVector) -> Result<bool> {
    for a in affines {
        if a.value(x)? > PROBE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closed-form `x*_h` where one exists: the unconstrained box minimizer of
/// `h` when it is feasible, or, for a single constraint and a quadratic
/// selector, the projection of the center onto the halfspace when it lies
/// in the box.
fn analytic_selection(
    spec: &ConstrainedSpec,
    affines: &[Affine],
    p: &ProblemInstance,
) -> Result<Option<DenseVector>> {
    let n = p.dim();
    let box_min = match &spec.upper {
        UpperSpec::Shifted { center, .. } => p.feasible().project(&DenseVector::from_slice(center)?)?,
        UpperSpec::ElasticNet { .. } => p.feasible().project(&DenseVector::zeros(n))?,
    };
    if satisfies_all(affines, &box_min)? {
        return Ok(Some(box_min));
    }
    if let (UpperSpec::Shifted { center, .. }, [a]) = (&spec.upper, affines) {
        let c = DenseVector::from_slice(center)?;
        let nn = a.normal.dot(&a.normal)?;
        if nn > 0.0 {
            let excess = a.value(&c)?;
            let x = crate::numerics::axpy(-excess / nn, &a.normal, &c)?;
            if p.feasible().contains(&x, 0.0)? {
                return Ok(Some(x));
            }
        }
    }
    Ok(None)
}

/// Synthetic sparse binary classification: labels from a hidden Gaussian
/// weight vector, flipped with probability `label_noise`. Rows have
/// `nnz` non-negative entries and unit Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationSpec {
    pub dim: usize,
    pub samples: usize,
    pub nnz: usize,
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for ClassificationSpec {
    fn default() -> Self {
        ClassificationSpec {
            dim: 200,
            samples: 2000,
            nnz: 20,
            label_noise: 0.05,
            seed: 1,
        }
    }
}

pub fn gen_classification_dataset(spec: &ClassificationSpec) -> Result<LabeledDataset> {
    if spec.dim == 0 || spec.samples == 0 {
        return Err(Error::invalid("dimension and sample count must be positive"));
    }
    if spec.nnz == 0 || spec.nnz > spec.dim {
        return Err(Error::invalid(format!("nnz must lie in 1..={}", spec.dim)));
    }
    if !(0.0..=0.5).contains(&spec.label_noise) {
        return Err(Error::invalid("label_noise must lie in [0, 0.5]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w: Vec<f64> = (0..spec.dim).map(|_| rng.sample(StandardNormal)).collect();
    let mut samples = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        let mut idx = sample_indices(&mut rng, spec.dim, spec.nnz).into_vec();
        idx.sort_unstable();
        let raw: Vec<f64> = idx.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pairs: Vec<(usize, f64)> = idx.into_iter().zip(raw.into_iter().map(|v| v / norm)).collect();
        let margin: f64 = pairs.iter().map(|(j, v)| w[*j] * v).sum();
        let mut label = if margin >= 0.0 { Label::Pos } else { Label::Neg };
        if rng.gen::<f64>() < spec.label_noise {
            label = if label == Label::Pos { Label::Neg } else { Label::Pos };
        }
        samples.push((SparseVector::new(spec.dim, pairs)?, label));
    }
    LabeledDataset::new(spec.dim, samples)
}

/// Hinge-loss lower level with `m` contiguous batches, elastic-net upper
/// level, and a cube standing in for the unconstrained domain.
pub fn hinge_problem(d: &LabeledDataset, m: usize, mu_h: f64, half_width: f64) -> Result<ProblemInstance> {
    let components = partition_batches(d, m)?
        .into_iter()
        .map(|b| Box::new(b) as Box<dyn ComponentOracle>)
        .collect();
    ProblemInstance::new(
        components,
        Box::new(ElasticNet::new(d.dim(), mu_h)?),
        FeasibleSet::cube(d.dim(), half_width)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::from_slice(v).unwrap()
    }

    #[test]
    fn p2_known_solution() {
        let p = gen_selection_problem(&SelectionSpec::p2()).unwrap();
        assert_eq!(p.known_x_h_star(), Some(&dv(&[0.0, 1.5])));
        assert_eq!(p.known_f_star(), Some(0.0));
        assert_eq!(p.m(), 2);
        let e = gen_selection_problem(&SelectionSpec::p2_elastic()).unwrap();
        assert_eq!(e.known_x_h_star(), Some(&dv(&[0.0, 0.0])));
        assert_eq!(e.mu_h(), 0.1);
    }

    #[test]
    fn selection_center_outside_box_is_clamped() {
        let spec = SelectionSpec {
            dim: 3,
            half_width: 1.0,
            zero_coords: vec![1],
            multiplicity: 3,
            upper: UpperSpec::Shifted {
                center: vec![5.0, 2.0, -0.25],
                mu: 2.0,
            },
        };
        let p = gen_selection_problem(&spec).unwrap();
        assert_eq!(p.known_x_h_star(), Some(&dv(&[1.0, 0.0, -0.25])));
    }

    #[test]
    fn selection_errors() {
        let mut s = SelectionSpec::p2();
        s.multiplicity = 0;
        assert!(gen_selection_problem(&s).is_err());
        let mut s = SelectionSpec::p2();
        s.zero_coords = vec![2];
        assert!(gen_selection_problem(&s).is_err());
        let mut s = SelectionSpec::p2();
        s.upper = UpperSpec::Shifted { center: vec![1.0], mu: 1.0 };
        assert!(gen_selection_problem(&s).is_err());
    }

    #[test]
    fn constrained_examples() {
        let spec = ConstrainedSpec {
            constraints: vec![(vec![1.0, 1.0], 1.0), (vec![1.0, -1.0], 1.0)],
            ..ConstrainedSpec::halfplane()
        };
        let p = gen_constrained_problem(&spec).unwrap();
        assert_eq!(p.known_x_h_star(), Some(&dv(&[0.0, 0.0])));
        assert_eq!(p.m(), 2);

        let p = gen_constrained_problem(&ConstrainedSpec::halfplane()).unwrap();
        assert_eq!(p.known_x_h_star(), Some(&dv(&[1.0, 0.0])));
        assert_eq!(p.known_f_star(), Some(0.0));

        let spec = ConstrainedSpec {
            constraints: vec![(vec![1.0, 0.0], -3.0)],
            ..ConstrainedSpec::halfplane()
        };
        assert!(matches!(gen_constrained_problem(&spec), Err(Error::Infeasible(_))));
    }

    #[test]
    fn constrained_without_closed_form() {
        // two active constraints around an infeasible center: no closed form
        let spec = ConstrainedSpec {
            constraints: vec![(vec![-1.0, 0.0], -1.0), (vec![0.0, -1.0], -1.0)],
            ..ConstrainedSpec::halfplane()
        };
        let p = gen_constrained_problem(&spec).unwrap();
        assert!(p.known_x_h_star().is_none());
        assert_eq!(p.known_f_star(), Some(0.0));
    }

    #[test]
    fn classification_dataset_shape() {
        let spec = ClassificationSpec {
            samples: 300,
            ..Default::default()
        };
        let d = gen_classification_dataset(&spec).unwrap();
        assert_eq!((d.len(), d.dim()), (300, 200));
        for (a, _) in d.samples() {
            assert_eq!(a.nnz(), 20);
            let norm: f64 = a.values().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert_eq!(d, gen_classification_dataset(&spec).unwrap());
        let p = hinge_problem(&d, 20, 0.1, 1e3).unwrap();
        assert_eq!(p.m(), 20);
        assert_eq!(p.lower_value(&DenseVector::zeros(200)).unwrap(), 300.0);
    }
}
