//! Dense and sparse vector arithmetic.
//!
//! Every reduction accumulates in ascending index order in `f64`, so equal
//! inputs always produce bit-identical outputs.

use std::fmt;

use crate::error::{check_dim, Error, Result};

/// A fixed-dimension vector of finite reals.
#[derive(Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(DenseVector(entries))
        } else {
            Err(Error::NonFinite("dense vector entries"))
        }
    }

    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// Caller guarantees finiteness.
    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(entries.iter().all(|v| v.is_finite()));
        DenseVector(entries)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Inner product with another dense vector.
    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).fold(0.0, |s, v| s + v))
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        axpy(-1.0, other, self)
    }

    pub fn scale(&self, alpha: f64) -> Result<DenseVector> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite("scale factor"));
        }
        finite_or(self.0.iter().map(|v| alpha * v).collect(), "scaled vector")
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &DenseVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        let sq = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .fold(0.0, |s, v| s + v);
        Ok(sq.sqrt())
    }
}

impl fmt::Debug for DenseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn finite_or(v: Vec<f64>, what: &'static str) -> Result<DenseVector> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(DenseVector(v))
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Sparse vector in canonical form: strictly increasing indices, no stored zeros.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds the canonical form of `pairs`: sorts by index, sums duplicates
    /// and drops entries that end up zero.
    pub fn new(dim: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        if let Some(&(j, _)) = pairs.iter().find(|(j, _)| *j >= dim) {
            return Err(Error::invalid(format!(
                "sparse index {j} out of range for dimension {dim}"
            )));
        }
        if pairs.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite("sparse vector values"));
        }
        pairs.sort_by_key(|(j, _)| *j);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (j, v) in pairs {
            if indices.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
            }
        }
        let (indices, values): (Vec<_>, Vec<_>) = indices
            .into_iter()
            .zip(values)
            .filter(|(_, v)| *v != 0.0)
            .unzip();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sparse vector values"));
        }
        Ok(SparseVector {
            dim,
            indices,
            values,
        })
    }

    pub fn empty(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Re-declares the nominal dimension; fails if a stored index would not fit.
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        if let Some(&last) = self.indices.last() {
            if last >= dim {
                return Err(Error::invalid(format!(
                    "sparse index {last} out of range for dimension {dim}"
                )));
            }
        }
        self.dim = dim;
        Ok(self)
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut out = vec![0.0; self.dim];
        for (j, v) in self.iter() {
            out[j] = v;
        }
        DenseVector(out)
    }

    /// `out += alpha * self`, no dimension check.
    pub(crate) fn add_scaled_into(&self, alpha: f64, out: &mut [f64]) {
        for (j, v) in self.iter() {
            out[j] += alpha * v;
        }
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, x: &[f64]) -> f64 {
        self.iter().fold(0.0, |s, (j, v)| s + v * x[j])
    }
}

/// Sparse-dense inner product, accumulated in ascending index order.
pub fn dot(a: &SparseVector, x: &DenseVector) -> Result<f64> {
    check_dim(a.dim(), x.dim())?;
    Ok(a.dot_unchecked(x.as_slice()))
}

/// Returns `x + alpha * g`.
pub fn axpy(alpha: f64, g: &DenseVector, x: &DenseVector) -> Result<DenseVector> {
    check_dim(x.dim(), g.dim())?;
    if !alpha.is_finite() {
        return Err(Error::NonFinite("axpy coefficient"));
    }
    finite_or(
        x.0.iter().zip(&g.0).map(|(xi, gi)| xi + alpha * gi).collect(),
        "axpy result",
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
}

pub fn norms(x: &DenseVector) -> Norms {
    let (l1, sq) = x
        .iter()
        .fold((0.0, 0.0), |(l1, sq), v| (l1 + v.abs(), sq + v * v));
    Norms { l1, l2: sq.sqrt() }
}
