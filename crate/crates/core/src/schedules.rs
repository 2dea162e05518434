//! Power-law step size and regularization sequences.
//!
//! `γ_k = γ0 / (k+1)^a`, `λ_k = λ0 / (k+1)^b`, iterates averaged with
//! weights proportional to `γ_k^r`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_R: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSchedule {
    pub gamma0: f64,
    pub lambda0: f64,
    /// Step size exponent.
    pub a: f64,
    /// Regularization exponent.
    pub b: f64,
    /// Averaging exponent.
    pub r: f64,
}

impl PowerSchedule {
    /// Checks positivity of `gamma0, lambda0, a, b` and finiteness of `r`.
    /// Whether `r < 1` holds is left to [`validate`], so that inadmissible
    /// schedules stay representable.
    pub fn new(gamma0: f64, lambda0: f64, a: f64, b: f64, r: f64) -> Result<Self> {
        for (name, v) in [("gamma0", gamma0), ("lambda0", lambda0), ("a", a), ("b", b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !r.is_finite() {
            return Err(Error::NonFinite("averaging exponent r"));
        }
        Ok(PowerSchedule {
            gamma0,
            lambda0,
            a,
            b,
            r,
        })
    }

    /// Rate schedule with ε = 0.1, r = 0.5, λ0 = 1 and γ0 = min(1, 2m/μ_h).
    pub fn default_for(m: usize, mu_h: f64) -> Result<Self> {
        let gamma0 = (2.0 * m as f64 / mu_h).min(1.0);
        rate_schedule(DEFAULT_EPSILON, gamma0, 1.0, DEFAULT_R)
    }

    #[inline]
    pub fn gamma_at(&self, k: usize) -> f64 {
        self.gamma0 / ((k + 1) as f64).powf(self.a)
    }

    #[inline]
    pub fn lambda_at(&self, k: usize) -> f64 {
        self.lambda0 / ((k + 1) as f64).powf(self.b)
    }

    /// Averaging weight `γ_k^r`.
    #[inline]
    pub fn weight_at(&self, k: usize) -> f64 {
        self.gamma_at(k).powf(self.r)
    }
}

/// One failed admissibility condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Violation {
    /// `γ0 λ0 <= 2m / μ_h` fails.
    StepProduct { product: f64, bound: f64 },
    /// `a > b` fails.
    ExponentOrder { a: f64, b: f64 },
    /// `a > 0.5` fails.
    StepExponent { a: f64 },
    /// `a + b < 1` fails.
    ExponentSum { sum: f64 },
    /// `a r <= 1` fails.
    AveragingProduct { ar: f64 },
    /// `r < 1` fails.
    AveragingExponent { r: f64 },
}

impl Violation {
    /// Stable short name, also used as the bit position in the C API.
    pub fn code(&self) -> u32 {
        match self {
            Violation::StepProduct { .. } => 0,
            Violation::ExponentOrder { .. } => 1,
            Violation::StepExponent { .. } => 2,
            Violation::ExponentSum { .. } => 3,
            Violation::AveragingProduct { .. } => 4,
            Violation::AveragingExponent { .. } => 5,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StepProduct { product, bound } => {
                write!(f, "gamma0*lambda0 <= 2m/mu_h fails: {product} > {bound}")
            }
            Violation::ExponentOrder { a, b } => write!(f, "a > b fails: a = {a}, b = {b}"),
            Violation::StepExponent { a } => write!(f, "a > 0.5 fails: a = {a}"),
            Violation::ExponentSum { sum } => write!(f, "a + b < 1 fails: a + b = {sum}"),
            Violation::AveragingProduct { ar } => write!(f, "a*r <= 1 fails: a*r = {ar}"),
            Violation::AveragingExponent { r } => write!(f, "r < 1 fails: r = {r}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScheduleReport {
    pub violations: Vec<Violation>,
}

impl ScheduleReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mask(&self) -> u32 {
        self.violations.iter().fold(0, |m, v| m | 1 << v.code())
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidSchedule(self.violations))
        }
    }
}

impl fmt::Display for ScheduleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "violation: {v}")?;
        }
        Ok(())
    }
}

/// Checks each admissibility condition independently.
pub fn validate(s: &PowerSchedule, m: usize, mu_h: f64) -> Result<ScheduleReport> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if !(mu_h > 0.0 && mu_h.is_finite()) {
        return Err(Error::invalid(format!("mu_h must be positive, got {mu_h}")));
    }
    let mut violations = Vec::new();
    let product = s.gamma0 * s.lambda0;
    let bound = 2.0 * m as f64 / mu_h;
    if !(product <= bound) {
        violations.push(Violation::StepProduct { product, bound });
    }
    if !(s.a > s.b) {
        violations.push(Violation::ExponentOrder { a: s.a, b: s.b });
    }
    if !(s.a > 0.5) {
        violations.push(Violation::StepExponent { a: s.a });
    }
    if !(s.a + s.b < 1.0) {
        violations.push(Violation::ExponentSum { sum: s.a + s.b });
    }
    if !(s.a * s.r <= 1.0) {
        violations.push(Violation::AveragingProduct { ar: s.a * s.r });
    }
    if !(s.r < 1.0) {
        violations.push(Violation::AveragingExponent { r: s.r });
    }
    Ok(ScheduleReport { violations })
}

/// Exponents `a = 0.5 + 0.5ε`, `b = 0.5 - ε` giving an `O(1/N^{0.5-ε})`
/// lower-level rate.
pub fn rate_schedule(epsilon: f64, gamma0: f64, lambda0: f64, r: f64) -> Result<PowerSchedule> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 0.5), got {epsilon}")));
    }
    PowerSchedule::new(gamma0, lambda0, 0.5 + 0.5 * epsilon, 0.5 - epsilon, r)
}

/// `ψ_{t,k} = γ_t^r / Σ_{i<=k} γ_i^r` for `t = 0..=k`.
pub fn closed_form_weights(s: &PowerSchedule, k: usize) -> Vec<f64> {
    let gammas: Vec<f64> = (0..=k).map(|t| s.gamma_at(t)).collect();
    weights_from_steps(&gammas, s.r)
}

/// Normalized `γ_t^r` for an explicit step sequence.
pub fn weights_from_steps(gammas: &[f64], r: f64) -> Vec<f64> {
    let raw: Vec<f64> = gammas.iter().map(|g| g.powf(r)).collect();
    let total = compensated_sum(&raw);
    raw.into_iter().map(|w| w / total).collect()
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
