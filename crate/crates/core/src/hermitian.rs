//! Dense complex matrices, tensor-factor bookkeeping and the few Hermitian
//! primitives the rest of the crate is built on.
//!
//! Composite indices are row-major over tensor factors with the leftmost
//! factor most significant.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use faer::{Mat, Side};
use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Tolerance for the Hermiticity invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid permutation {0:?}")]
    Permutation(Vec<usize>),
    #[error("eigendecomposition did not converge")]
    Eigen,
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    if z.im == 0.0 {
                        format!("{:.4}", z.re)
                    } else {
                        format!("{:.4}{:+.4}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major entries; fails when the count is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, re: &[f64]) -> Self {
        assert_eq!(re.len(), rows * cols);
        CMatrix { rows, cols, data: re.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Projector |v⟩⟨v| (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute imaginary part of any entry.
    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Hilbert-Schmidt inner product tr(A† B).
    pub fn inner(&self, other: &CMatrix) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    /// (H + H†)/2.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigvalsh(&self) -> Result<Vec<f64>, LinalgError> {
        let h = self.hermitian_part();
        if h.max_abs_imag() == 0.0 {
            let m = Mat::<f64>::from_fn(h.rows, h.cols, |i, j| h[(i, j)].re);
            m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| LinalgError::Eigen)
        } else {
            let m = Mat::<C64>::from_fn(h.rows, h.cols, |i, j| h[(i, j)]);
            m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| LinalgError::Eigen)
        }
    }

    /// Eigen-decomposition of the Hermitian part: ascending eigenvalues and
    /// eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix), LinalgError> {
        let h = self.hermitian_part();
        let m = Mat::<C64>::from_fn(h.rows, h.cols, |i, j| h[(i, j)]);
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| LinalgError::Eigen)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let vals = (0..h.rows).map(|i| s[i].re).collect();
        let vecs = CMatrix::from_fn(h.rows, h.cols, |i, j| u[(i, j)]);
        Ok((vals, vecs))
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        Ok(self.eigvalsh()?.first().copied().unwrap_or(0.0))
    }

    /// Largest entrywise distance to `other`.
    pub fn dist_max(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Ordered tensor-factor dimensions of a composite space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TensorShape {
    dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self, LinalgError> {
        if dims.contains(&0) {
            return Err(LinalgError::Shape(format!("zero factor dimension in {dims:?}")));
        }
        Ok(TensorShape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Splits a composite index into per-factor indices.
    pub fn split(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = idx % d;
            idx /= d;
        }
        out
    }

    pub fn join(&self, parts: &[usize]) -> usize {
        parts.iter().zip(&self.dims).fold(0, |acc, (&p, &d)| acc * d + p)
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows(), b.cols());
    CMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(ms: &[&CMatrix]) -> CMatrix {
    ms.iter().fold(CMatrix::identity(1), |acc, m| kron(&acc, m))
}

fn check_square_shape(m: &CMatrix, shape: &TensorShape) -> Result<(), LinalgError> {
    if !m.is_square() || m.rows() != shape.total() {
        return Err(LinalgError::Shape(format!(
            "matrix {}x{} does not match factors {:?}",
            m.rows(),
            m.cols(),
            shape.dims()
        )));
    }
    Ok(())
}

/// Traces out every factor not listed in `keep`. Kept factors appear in
/// ascending order in the result.
pub fn partial_trace(m: &CMatrix, shape: &TensorShape, keep: &[usize]) -> Result<CMatrix, LinalgError> {
    check_square_shape(m, shape)?;
    let nf = shape.num_factors();
    if let Some(&bad) = keep.iter().find(|&&k| k >= nf) {
        return Err(LinalgError::Shape(format!("factor {bad} out of range for {nf} factors")));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..nf).filter(|k| !kept.contains(k)).collect();
    let kshape = TensorShape { dims: kept.iter().map(|&k| shape.dims[k]).collect() };
    let tshape = TensorShape { dims: traced.iter().map(|&k| shape.dims[k]).collect() };
    let (dk, dt) = (kshape.total(), tshape.total());
    let mut out = CMatrix::zeros(dk, dk);
    let mut parts = vec![0; nf];
    let compose = |parts: &mut Vec<usize>, ki: &[usize], ti: &[usize]| {
        for (p, &k) in kept.iter().enumerate() {
            parts[k] = ki[p];
        }
        for (p, &t) in traced.iter().enumerate() {
            parts[t] = ti[p];
        }
        shape.join(parts)
    };
    for r in 0..dk {
        let ri = kshape.split(r);
        for c in 0..dk {
            let ci = kshape.split(c);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                let ti = tshape.split(t);
                let gr = compose(&mut parts, &ri, &ti);
                let gc = compose(&mut parts, &ci, &ti);
                acc += m[(gr, gc)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `order[k]`
/// of the input.
pub fn permute_factors(m: &CMatrix, shape: &TensorShape, order: &[usize]) -> Result<CMatrix, LinalgError> {
    check_square_shape(m, shape)?;
    check_permutation(order, shape.num_factors())?;
    let new_shape = TensorShape { dims: order.iter().map(|&k| shape.dims[k]).collect() };
    let n = shape.total();
    let map: Vec<usize> = (0..n)
        .map(|i| {
            let parts = new_shape.split(i);
            let mut old = vec![0; parts.len()];
            for (k, &src) in order.iter().enumerate() {
                old[src] = parts[k];
            }
            shape.join(&old)
        })
        .collect();
    Ok(CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

fn check_permutation(perm: &[usize], n: usize) -> Result<(), LinalgError> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(LinalgError::Permutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(LinalgError::Permutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Unitary that jointly permutes `n_copies` copies of a multi-factor system.
///
/// The space is laid out factor-major: for `copy_shape = [d_B, d_Y]` the
/// order is B_1..B_n Y_1..Y_n. `perm[i] = s(i)` sends the content of copy
/// `i` to copy `s(i)`, so that `U(s) U(t) = U(s∘t)`.
pub fn permutation_unitary(
    n_copies: usize,
    copy_shape: &TensorShape,
    perm: &[usize],
) -> Result<CMatrix, LinalgError> {
    check_permutation(perm, n_copies)?;
    let k = copy_shape.num_factors();
    let dims: Vec<usize> = copy_shape.dims.iter().flat_map(|&d| std::iter::repeat_n(d, n_copies)).collect();
    let shape = TensorShape { dims };
    let n = shape.total();
    let mut u = CMatrix::zeros(n, n);
    for col in 0..n {
        let src = shape.split(col);
        let mut dst = vec![0; src.len()];
        for f in 0..k {
            for i in 0..n_copies {
                dst[f * n_copies + perm[i]] = src[f * n_copies + i];
            }
        }
        u[(shape.join(&dst), col)] = C64::new(1.0, 0.0);
    }
    Ok(u)
}

/// Real symmetric representation `[[Re H, -Im H], [Im H, Re H]]`.
pub fn real_embedding(h: &CMatrix) -> Mat<f64> {
    let n = h.rows();
    Mat::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// The Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli(k: usize) -> CMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        1 => CMatrix::from_vec(2, 2, vec![z, one, one, z]).unwrap(),
        2 => CMatrix::from_vec(2, 2, vec![z, -i, i, z]).unwrap(),
        3 => CMatrix::from_vec(2, 2, vec![one, z, z, -one]).unwrap(),
        _ => CMatrix::identity(2),
    }
}

/// Normalized ket from complex amplitudes.
pub fn ket(amps: &[C64]) -> Vec<C64> {
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter().map(|z| z / norm).collect()
}
