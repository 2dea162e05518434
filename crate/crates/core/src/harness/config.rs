//! Run configuration file.
//!
//! A TOML document restricted to four flat sections, `[problem]`,
//! `[schedule]`, `[run]` and `[bench]`, holding scalars and arrays only.
//! Unknown keys, and keys that do not apply to the chosen problem kind,
//! are errors. `docs/config.md` lists every key.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::generators::{
    gen_classification_dataset, gen_constrained_problem, gen_selection_problem, hinge_problem,
    ClassificationSpec, ConstrainedSpec, SelectionSpec, UpperSpec,
};
use crate::harness::svmlight::{load_svmlight_with_dim, LabeledDataset};
use crate::numerics::DenseVector;
use crate::oracles::ProblemInstance;
use crate::schedules::{rate_schedule, PowerSchedule, DEFAULT_EPSILON, DEFAULT_R};
use crate::solver::{solve_regularized_reference, FStar, RecordPlan, RunOptions};

pub const DEFAULT_BOX_HALF_WIDTH: f64 = 1e3;
pub const DEFAULT_F_STAR_LAMBDA: f64 = 1e-4;
pub const DEFAULT_F_STAR_ITERS: usize = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// `selection`, `constrained`, `classification` or `svmlight`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_coords: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<usize>,
    /// `shifted` or `elastic-net`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normals: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bounds: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nnz: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate_f_star: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_star_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_star_iters: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub epsilon: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub gamma0: Option<f64>,
    pub lambda0: Option<f64>,
    pub r: Option<f64>,
    pub allow_invalid: Option<bool>,
}

/// `x0 = "zero"`, `x0 = 2.5` (constant vector) or `x0 = [2.0, -2.0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Named(String),
    Constant(f64),
    Explicit(Vec<f64>),
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec::Named("zero".into())
    }
}

impl StartSpec {
    pub fn resolve(&self, dim: usize) -> Result<DenseVector> {
        match self {
            StartSpec::Named(s) if s == "zero" => Ok(DenseVector::zeros(dim)),
            StartSpec::Named(s) => Err(Error::Config(format!("unknown x0 {s:?}; use \"zero\", a number or an array"))),
            StartSpec::Constant(c) => DenseVector::filled(dim, *c),
            StartSpec::Explicit(v) if v.len() == dim => DenseVector::from_slice(v),
            StartSpec::Explicit(v) => Err(Error::Config(format!(
                "x0 has {} entries, problem dimension is {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub iterations: Option<usize>,
    pub x0: Option<StartSpec>,
    /// `stride` or `log`.
    pub record: Option<String>,
    pub record_stride: Option<usize>,
    pub record_start: Option<usize>,
    pub points_per_decade: Option<usize>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub timing: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    /// Constant starting points.
    #[serde(default = "default_bench_x0")]
    pub x0: Vec<f64>,
    /// `(γ0, λ0)` pairs.
    #[serde(default = "default_bench_pairs")]
    pub gamma_lambda: Vec<[f64; 2]>,
    #[serde(default = "default_bench_r")]
    pub r: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn default_bench_x0() -> Vec<f64> {
    vec![-10.0, 0.0, 10.0]
}

fn default_bench_pairs() -> Vec<[f64; 2]> {
    vec![[10.0, 1.0], [1.0, 10.0], [0.1, 0.1]]
}

fn default_bench_r() -> Vec<f64> {
    vec![0.5, 0.0, -1.0]
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            x0: default_bench_x0(),
            gamma_lambda: default_bench_pairs(),
            r: default_bench_r(),
            output_dir: None,
            threads: None,
        }
    }
}

/// Everything needed to call [`crate::solver::run_irig`].
#[derive(Debug)]
pub struct ResolvedRun {
    pub problem: ProblemInstance,
    pub schedule: PowerSchedule,
    pub iterations: usize,
    pub x0: DenseVector,
    pub options: RunOptions,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_ITERATIONS: usize = 10_000;

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(1)
    }

    /// Builds the problem instance alone.
    pub fn build_instance(&self) -> Result<ProblemInstance> {
        let p = &self.problem;
        p.check_keys()?;
        match p.kind.as_str() {
            "selection" => gen_selection_problem(&p.selection_spec()?),
            "constrained" => gen_constrained_problem(&p.constrained_spec()?),
            "classification" | "svmlight" => hinge_problem(
                &self.load_dataset()?,
                p.components.unwrap_or(1),
                p.mu.unwrap_or(0.1),
                p.half_width.unwrap_or(DEFAULT_BOX_HALF_WIDTH),
            ),
            other => Err(Error::Config(format!("unknown problem kind {other:?}"))),
        }
    }

    /// Builds the problem instance and, for dataset problems with
    /// `estimate_f_star`, a reference estimate of `f*`.
    pub fn build_problem(&self) -> Result<(ProblemInstance, Option<FStar>)> {
        let problem = self.build_instance()?;
        let p = &self.problem;
        if !p.estimate_f_star.unwrap_or(false) {
            return Ok((problem, None));
        }
        let lambda = p.f_star_lambda.unwrap_or(DEFAULT_F_STAR_LAMBDA);
        let iters = p.f_star_iters.unwrap_or(DEFAULT_F_STAR_ITERS);
        info!("estimating f* with a reference run (lambda = {lambda}, {iters} iterations)");
        let x = solve_regularized_reference(&problem, lambda, iters)?;
        let f_star = FStar {
            value: problem.lower_value(&x)?,
            estimated: true,
        };
        Ok((problem, Some(f_star)))
    }

    /// The labeled dataset behind a `classification` or `svmlight` problem.
    pub fn load_dataset(&self) -> Result<LabeledDataset> {
        let p = &self.problem;
        match p.kind.as_str() {
            "classification" => gen_classification_dataset(&p.classification_spec(self.seed())),
            "svmlight" => {
                let path = p
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("svmlight problems need `path`".into()))?;
                load_svmlight_with_dim(self.resolve_path(path), p.dim)
            }
            other => Err(Error::Config(format!("problem kind {other:?} has no dataset"))),
        }
    }

    pub fn build_schedule(&self, m: usize, mu_h: f64) -> Result<PowerSchedule> {
        let s = &self.schedule;
        let gamma0 = s.gamma0.unwrap_or_else(|| (2.0 * m as f64 / mu_h).min(1.0));
        let lambda0 = s.lambda0.unwrap_or(1.0);
        let r = s.r.unwrap_or(DEFAULT_R);
        match (s.epsilon, s.a, s.b) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(Error::Config(
                "give either `epsilon` or the exponents `a` and `b`, not both".into(),
            )),
            (None, Some(a), Some(b)) => PowerSchedule::new(gamma0, lambda0, a, b, r),
            (None, Some(_), None) | (None, None, Some(_)) => {
                Err(Error::Config("exponents `a` and `b` must be given together".into()))
            }
            (eps, None, None) => rate_schedule(eps.unwrap_or(DEFAULT_EPSILON), gamma0, lambda0, r),
        }
    }

    pub fn record_plan(&self) -> Result<RecordPlan> {
        let r = &self.run;
        match r.record.as_deref().unwrap_or("stride") {
            "stride" => Ok(RecordPlan::Stride(r.record_stride.unwrap_or(1))),
            "log" => Ok(RecordPlan::LogSpaced {
                start: r.record_start.unwrap_or(0),
                per_decade: r.points_per_decade.unwrap_or(10),
            }),
            other => Err(Error::Config(format!("unknown record mode {other:?}; use stride or log"))),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let (problem, f_star) = self.build_problem()?;
        let schedule = self.build_schedule(problem.m(), problem.mu_h())?;
        let x0 = self.run.x0.clone().unwrap_or_default().resolve(problem.dim())?;
        let options = RunOptions {
            record: self.record_plan()?,
            allow_invalid_schedule: self.schedule.allow_invalid.unwrap_or(false),
            timing: self.run.timing.unwrap_or(false),
            f_star,
        };
        Ok(ResolvedRun {
            problem,
            schedule,
            iterations: self.run.iterations.unwrap_or(DEFAULT_ITERATIONS),
            x0,
            options,
            output: self.run.output.as_ref().map(|p| self.resolve_path(p)),
        })
    }
}

impl ProblemSection {
    fn present_keys(&self) -> BTreeSet<&'static str> {
        let mut keys = BTreeSet::new();
        macro_rules! note {
            ($($f:ident),*) => {$( if self.$f.is_some() { keys.insert(stringify!($f)); } )*};
        }
        note!(
            preset, dim, half_width, zero_coords, multiplicity, upper, center, mu, normals, offsets,
            lower, upper_bounds, samples, nnz, label_noise, components, path, estimate_f_star,
            f_star_lambda, f_star_iters
        );
        keys
    }

    fn check_keys(&self) -> Result<()> {
        let allowed: &[&str] = match self.kind.as_str() {
            "selection" => &["preset", "dim", "half_width", "zero_coords", "multiplicity", "upper", "center", "mu"],
            "constrained" => &["preset", "normals", "offsets", "lower", "upper_bounds", "upper", "center", "mu"],
            "classification" => &[
                "dim", "samples", "nnz", "label_noise", "components", "mu", "half_width",
                "estimate_f_star", "f_star_lambda", "f_star_iters",
            ],
            "svmlight" => &[
                "path", "dim", "components", "mu", "half_width", "estimate_f_star", "f_star_lambda",
                "f_star_iters",
            ],
            other => return Err(Error::Config(format!("unknown problem kind {other:?}"))),
        };
        match self.present_keys().into_iter().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::Config(format!(
                "key `{k}` does not apply to problem kind {:?}",
                self.kind
            ))),
            None => Ok(()),
        }
    }

    fn upper_spec(&self, dim: usize, default: UpperSpec) -> Result<UpperSpec> {
        let kind = match self.upper.as_deref() {
            None => match default {
                UpperSpec::Shifted { .. } => "shifted",
                UpperSpec::ElasticNet { .. } => "elastic-net",
            },
            Some(k) => k,
        };
        let (default_center, default_mu) = match &default {
            UpperSpec::Shifted { center, mu } => (center.clone(), *mu),
            UpperSpec::ElasticNet { mu } => (vec![0.0; dim], *mu),
        };
        match kind {
            "shifted" => Ok(UpperSpec::Shifted {
                center: self.center.clone().unwrap_or(if default_center.len() == dim {
                    default_center
                } else {
                    vec![0.0; dim]
                }),
                mu: self.mu.unwrap_or(default_mu),
            }),
            "elastic-net" => {
                if self.center.is_some() {
                    return Err(Error::Config("`center` does not apply to an elastic-net selector".into()));
                }
                Ok(UpperSpec::ElasticNet {
                    mu: self.mu.unwrap_or(default_mu),
                })
            }
            other => Err(Error::Config(format!("unknown upper objective {other:?}; use shifted or elastic-net"))),
        }
    }

    pub fn selection_spec(&self) -> Result<SelectionSpec> {
        let base = match self.preset.as_deref() {
            None | Some("p2") => SelectionSpec::p2(),
            Some("p2-elastic") => SelectionSpec::p2_elastic(),
            Some(other) => return Err(Error::Config(format!("unknown selection preset {other:?}"))),
        };
        let dim = self.dim.unwrap_or(base.dim);
        Ok(SelectionSpec {
            dim,
            half_width: self.half_width.unwrap_or(base.half_width),
            zero_coords: self.zero_coords.clone().unwrap_or(base.zero_coords.clone()),
            multiplicity: self.multiplicity.unwrap_or(base.multiplicity),
            upper: self.upper_spec(dim, base.upper)?,
        })
    }

    pub fn constrained_spec(&self) -> Result<ConstrainedSpec> {
        let base = match self.preset.as_deref() {
            None | Some("halfplane") => ConstrainedSpec::halfplane(),
            Some(other) => return Err(Error::Config(format!("unknown constrained preset {other:?}"))),
        };
        let constraints = match (&self.normals, &self.offsets) {
            (Some(n), Some(d)) if n.len() == d.len() => n.iter().cloned().zip(d.iter().copied()).collect(),
            (Some(_), Some(_)) => {
                return Err(Error::Config("`normals` and `offsets` must have equal length".into()))
            }
            (None, None) => base.constraints,
            _ => return Err(Error::Config("`normals` and `offsets` must be given together".into())),
        };
        let lower = self.lower.clone().unwrap_or(base.lower);
        Ok(ConstrainedSpec {
            upper: self.upper_spec(lower.len(), base.upper)?,
            constraints,
            upper_bounds: self.upper_bounds.clone().unwrap_or(base.upper_bounds),
            lower,
        })
    }

    pub fn classification_spec(&self, seed: u64) -> ClassificationSpec {
        let d = ClassificationSpec::default();
        ClassificationSpec {
            dim: self.dim.unwrap_or(d.dim),
            samples: self.samples.unwrap_or(d.samples),
            nnz: self.nnz.unwrap_or(d.nnz),
            label_noise: self.label_noise.unwrap_or(d.label_noise),
            seed,
        }
    }
}
