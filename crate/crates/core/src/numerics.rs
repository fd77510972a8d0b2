//! Pure numeric kernels shared by every stage: cosine similarity, stable row
//! softmax, rotary position embedding, and scaled dot-product attention.
//!
//! All kernels are deterministic `f64` paths. The attention kernel has an
//! explicit sequential variant next to the default (possibly parallel) entry
//! point; the two are bitwise identical because parallelism only splits work
//! across query rows.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Norms below this are treated as zero when normalizing or comparing.
pub const NORM_EPSILON: f64 = 1e-12;

/// Owned dense vector of `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("vector must have at least one element"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("vector contains non-finite values"));
        }
        Ok(DenseVector { values })
    }

    pub fn zeros(dim: usize) -> Self {
        DenseVector {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Returns the vector scaled to unit norm, or all zeros when the norm is
    /// below [`NORM_EPSILON`].
    pub fn normalized(&self) -> DenseVector {
        let n = self.norm();
        if n < NORM_EPSILON {
            return DenseVector::zeros(self.dim());
        }
        DenseVector {
            values: self.values.iter().map(|v| v / n).collect(),
        }
    }
}

/// Row-major dense matrix of `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix expects {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix contains non-finite values"));
        }
        Ok(DenseMatrix { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        Ok(m)
    }

    /// Builds a matrix from row vectors, which must share one dimension.
    pub fn from_rows(rows: &[DenseVector]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("matrix needs at least one row"))?;
        let cols = first.dim();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.dim() != cols {
                return Err(Error::invalid("rows have mismatched dimensions"));
            }
            values.extend_from_slice(r.values());
        }
        DenseMatrix::new(rows.len(), cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> DenseVector {
        DenseVector {
            values: self.row(i).to_vec(),
        }
    }

    /// Vertical concatenation; all parts must share the column count.
    pub fn vstack(parts: &[&DenseMatrix]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("vstack needs at least one matrix"))?;
        let cols = first.cols;
        let mut values = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::invalid("vstack column mismatch"));
            }
            values.extend_from_slice(&p.values);
            rows += p.rows;
        }
        DenseMatrix::new(rows, cols, values)
    }

    /// Standard matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::invalid(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = vec![0.0; self.rows * rhs.cols];
        for i in 0..self.rows {
            let lhs_row = self.row(i);
            let out_row = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &l) in lhs_row.iter().enumerate() {
                let rhs_row = rhs.row(k);
                for (o, &r) in out_row.iter_mut().zip(rhs_row.iter()) {
                    *o += l * r;
                }
            }
        }
        DenseMatrix::new(self.rows, rhs.cols, out)
    }

    /// Row vector times matrix: `x^T * self`, for projecting a single token.
    pub fn left_mul_vec(&self, x: &DenseVector) -> Result<DenseVector> {
        if x.dim() != self.rows {
            return Err(Error::invalid(format!(
                "left_mul_vec: vector dim {} vs matrix rows {}",
                x.dim(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (k, &xv) in x.values().iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.row(k).iter()) {
                *o += xv * m;
            }
        }
        Ok(DenseVector { values: out })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity in [-1, 1]. A vector with norm below [`NORM_EPSILON`]
/// compares as 0.0 rather than NaN, so downstream thresholding treats it as
/// maximally dissimilar.
pub fn cosine(a: &DenseVector, b: &DenseVector) -> Result<f64> {
    cosine_with_epsilon(a, b, NORM_EPSILON)
}

/// [`cosine`] with a caller-chosen zero-norm guard.
pub fn cosine_with_epsilon(a: &DenseVector, b: &DenseVector, epsilon: f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "cosine dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let na = a.norm();
    let nb = b.norm();
    if na < epsilon || nb < epsilon {
        return Ok(0.0);
    }
    let c = dot(a.values(), b.values()) / (na * nb);
    Ok(c.clamp(-1.0, 1.0))
}

/// Numerically stable softmax over one vector: max-subtraction, then
/// exponentiation and normalization. Output entries are strictly positive and
/// sum to 1.
pub fn softmax_row(x: &DenseVector) -> Result<DenseVector> {
    let out = softmax_slice(x.values())?;
    Ok(DenseVector { values: out })
}

fn softmax_slice(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::invalid("softmax of an empty vector"));
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Applies rotary position embedding to `v` at the given absolute position.
///
/// Dimension pairs `(2i, 2i+1)` are rotated by `position * base^(-2i/dim)`.
/// The rotation is norm-preserving and `position = 0` is the identity.
pub fn rope_apply(v: &DenseVector, position: u64, base: f64) -> Result<DenseVector> {
    rope_apply_signed(v, position as i64, base)
}

/// Signed-offset rotation used when re-indexing already-rotated keys; a
/// negative position rotates backwards. `rope_apply(v, p)` followed by
/// `rope_apply_signed(v, -p)` recovers `v` up to roundoff.
pub fn rope_apply_signed(v: &DenseVector, position: i64, base: f64) -> Result<DenseVector> {
    if v.dim() % 2 != 0 {
        return Err(Error::invalid(format!(
            "rotary embedding needs an even dimension, got {}",
            v.dim()
        )));
    }
    let dim = v.dim();
    let mut out = v.values.clone();
    rope_rotate_in_place(&mut out, dim, position as f64, base);
    Ok(DenseVector { values: out })
}

pub(crate) fn rope_rotate_in_place(values: &mut [f64], dim: usize, position: f64, base: f64) {
    for i in 0..dim / 2 {
        let theta = position * base.powf(-2.0 * i as f64 / dim as f64);
        let (sin, cos) = theta.sin_cos();
        let x = values[2 * i];
        let y = values[2 * i + 1];
        values[2 * i] = x * cos - y * sin;
        values[2 * i + 1] = x * sin + y * cos;
    }
}

/// Scaled dot-product attention: `softmax(Q K^T * scale) V`, row by row.
pub fn scaled_dot_attention(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    scale: f64,
) -> Result<DenseMatrix> {
    Ok(attention_with_weights(q, k, v, scale)?.0)
}

/// Sequential-only variant of [`scaled_dot_attention`].
pub fn scaled_dot_attention_seq(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    scale: f64,
) -> Result<DenseMatrix> {
    Ok(attention_with_weights_seq(q, k, v, scale)?.0)
}

/// Attention that also returns the softmax weight matrix (`n_q` x `n_keys`),
/// for diagnostics that attribute attention mass to cache blocks.
pub fn attention_with_weights(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    scale: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    check_attention_shapes(q, k, v)?;
    #[cfg(feature = "parallel")]
    {
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..q.rows())
            .into_par_iter()
            .map(|i| attention_row(q.row(i), k, v, scale))
            .collect::<Result<_>>()?;
        assemble_attention(rows, q.rows(), k.rows(), v.cols())
    }
    #[cfg(not(feature = "parallel"))]
    {
        attention_with_weights_seq(q, k, v, scale)
    }
}

/// Sequential-only variant of [`attention_with_weights`].
pub fn attention_with_weights_seq(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    scale: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    check_attention_shapes(q, k, v)?;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..q.rows())
        .map(|i| attention_row(q.row(i), k, v, scale))
        .collect::<Result<_>>()?;
    assemble_attention(rows, q.rows(), k.rows(), v.cols())
}

fn check_attention_shapes(q: &DenseMatrix, k: &DenseMatrix, v: &DenseMatrix) -> Result<()> {
    if q.cols() != k.cols() {
        return Err(Error::invalid(format!(
            "attention: query dim {} != key dim {}",
            q.cols(),
            k.cols()
        )));
    }
    if k.rows() != v.rows() {
        return Err(Error::invalid(format!(
            "attention: {} key rows vs {} value rows",
            k.rows(),
            v.rows()
        )));
    }
    Ok(())
}

fn attention_row(
    q_row: &[f64],
    k: &DenseMatrix,
    v: &DenseMatrix,
    scale: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let logits: Vec<f64> = (0..k.rows()).map(|j| dot(q_row, k.row(j)) * scale).collect();
    let weights = softmax_slice(&logits)?;
    let mut out = vec![0.0; v.cols()];
    for (j, &w) in weights.iter().enumerate() {
        for (o, &val) in out.iter_mut().zip(v.row(j).iter()) {
            *o += w * val;
        }
    }
    Ok((out, weights))
}

fn assemble_attention(
    rows: Vec<(Vec<f64>, Vec<f64>)>,
    n_q: usize,
    n_k: usize,
    v_cols: usize,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let mut out = Vec::with_capacity(n_q * v_cols);
    let mut weights = Vec::with_capacity(n_q * n_k);
    for (o, w) in rows {
        out.extend_from_slice(&o);
        weights.extend_from_slice(&w);
    }
    Ok((
        DenseMatrix::new(n_q, v_cols, out)?,
        DenseMatrix::new(n_q, n_k, weights)?,
    ))
}
