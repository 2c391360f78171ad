//! Product Hermitian operator basis.
//!
//! Each factor of dimension `d` carries the basis `I`, the generalized
//! Gell-Mann diagonals `D_k`, and the off-diagonal pairs `S_jk`, `A_jk`.
//! Products of factor labels ("keys") form an orthogonal basis of the
//! Hermitian operators on the composite space, and every linear constraint
//! in the crate is phrased through the functionals `f_β(V) = tr(βV)`.

use crate::hermitian::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    I,
    /// Generalized Gell-Mann diagonal `D_k`, `1 ≤ k < d`.
    D(u16),
    /// `|j⟩⟨k| + |k⟩⟨j|`, `j < k`.
    S(u16, u16),
    /// `-i|j⟩⟨k| + i|k⟩⟨j|`, `j < k`.
    A(u16, u16),
}

impl Label {
    /// Basis labels of a factor. Classical factors only carry `I` and `D_k`.
    pub fn all(dim: usize, classical: bool) -> Vec<Label> {
        let mut out = vec![Label::I];
        for k in 1..dim {
            out.push(Label::D(k as u16));
        }
        if !classical {
            for j in 0..dim {
                for k in j + 1..dim {
                    out.push(Label::S(j as u16, k as u16));
                    out.push(Label::A(j as u16, k as u16));
                }
            }
        }
        out
    }

    /// Nonzero entries `(row, col, value)`.
    pub fn entries(&self, dim: usize) -> Vec<(usize, usize, C64)> {
        match *self {
            Label::I => (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect(),
            Label::D(k) => {
                let k = k as usize;
                let s = (2.0 / (k * (k + 1)) as f64).sqrt();
                let mut v: Vec<_> = (0..k).map(|j| (j, j, C64::new(s, 0.0))).collect();
                v.push((k, k, C64::new(-(k as f64) * s, 0.0)));
                v
            }
            Label::S(j, k) => {
                let (j, k) = (j as usize, k as usize);
                vec![(j, k, C64::new(1.0, 0.0)), (k, j, C64::new(1.0, 0.0))]
            }
            Label::A(j, k) => {
                let (j, k) = (j as usize, k as usize);
                vec![(j, k, C64::new(0.0, -1.0)), (k, j, C64::new(0.0, 1.0))]
            }
        }
    }

    /// `tr(L²)`.
    pub fn norm_sq(&self, dim: usize) -> f64 {
        match self {
            Label::I => dim as f64,
            _ => 2.0,
        }
    }

    pub fn is_antisymmetric(&self) -> bool {
        matches!(self, Label::A(..))
    }

    /// Sign picked up under transposition.
    pub fn transpose_sign(&self) -> f64 {
        if self.is_antisymmetric() {
            -1.0
        } else {
            1.0
        }
    }

    pub fn matrix(&self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        for (i, j, v) in self.entries(dim) {
            m[(i, j)] = v;
        }
        m
    }
}

/// One label per tensor factor.
pub type Key = Vec<Label>;

/// Number of antisymmetric labels; keys with an odd count are purely
/// imaginary and vanish on real symmetric operators.
pub fn antisym_count(key: &[Label]) -> usize {
    key.iter().filter(|l| l.is_antisymmetric()).count()
}

pub fn key_norm_sq(key: &[Label], dims: &[usize]) -> f64 {
    key.iter().zip(dims).map(|(l, &d)| l.norm_sq(d)).product()
}

/// Nonzero entries of the product operator, as per-factor index tuples.
pub fn key_entries(key: &[Label], dims: &[usize]) -> Vec<(Vec<usize>, Vec<usize>, C64)> {
    let mut out = vec![(Vec::with_capacity(key.len()), Vec::with_capacity(key.len()), C64::new(1.0, 0.0))];
    for (l, &d) in key.iter().zip(dims) {
        let ents = l.entries(d);
        let mut next = Vec::with_capacity(out.len() * ents.len());
        for (r, c, v) in &out {
            for &(i, j, w) in &ents {
                let mut r2 = r.clone();
                let mut c2 = c.clone();
                r2.push(i);
                c2.push(j);
                next.push((r2, c2, v * w));
            }
        }
        out = next;
    }
    out
}

fn join(parts: &[usize], dims: &[usize]) -> usize {
    parts.iter().zip(dims).fold(0, |acc, (&p, &d)| acc * d + p)
}

/// `tr(β M)` for a dense operator on the composite space.
pub fn functional(key: &[Label], dims: &[usize], m: &CMatrix) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (r, c, v) in key_entries(key, dims) {
        acc += v * m[(join(&c, dims), join(&r, dims))];
    }
    acc.re
}

/// Dense product operator.
pub fn key_matrix(key: &[Label], dims: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    let mut m = CMatrix::zeros(n, n);
    for (r, c, v) in key_entries(key, dims) {
        m[(join(&r, dims), join(&c, dims))] = v;
    }
    m
}

/// Adds `coef · β` into `m`.
pub fn add_key_matrix(m: &mut CMatrix, key: &[Label], dims: &[usize], coef: f64) {
    for (r, c, v) in key_entries(key, dims) {
        m[(join(&r, dims), join(&c, dims))] += v * coef;
    }
}

/// All keys over the given factors; classical factors are restricted to
/// diagonal labels and `real` drops keys with an odd number of `A` labels.
pub fn all_keys(dims: &[usize], classical: &[bool], real: bool) -> Vec<Key> {
    let per: Vec<Vec<Label>> = dims.iter().zip(classical).map(|(&d, &c)| Label::all(d, c)).collect();
    let mut out: Vec<Key> = vec![Vec::new()];
    for labels in &per {
        let mut next = Vec::with_capacity(out.len() * labels.len());
        for k in &out {
            for &l in labels {
                let mut k2 = k.clone();
                k2.push(l);
                next.push(k2);
            }
        }
        out = next;
    }
    if real {
        out.retain(|k| antisym_count(k).is_multiple_of(2));
    }
    out
}

/// Rebuilds an operator from its functionals: `Σ_β f_β β / tr(β²)`.
pub fn reconstruct(dims: &[usize], values: &[(Key, f64)]) -> CMatrix {
    let n: usize = dims.iter().product();
    let mut m = CMatrix::zeros(n, n);
    for (k, v) in values {
        if *v != 0.0 {
            add_key_matrix(&mut m, k, dims, v / key_norm_sq(k, dims));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_orthogonal() {
        for d in 1..5 {
            let labels = Label::all(d, false);
            assert_eq!(labels.len(), d * d);
            for a in &labels {
                for b in &labels {
                    let ip = a.matrix(d).inner(&b.matrix(d));
                    let expect = if a == b { a.norm_sq(d) } else { 0.0 };
                    assert!((ip.re - expect).abs() < 1e-12 && ip.im.abs() < 1e-12, "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn reconstruct_roundtrip() {
        let dims = [2, 3];
        let m = CMatrix::from_fn(6, 6, |i, j| C64::new((i * 7 + j * 3) as f64 % 5.0, (i as f64) - (j as f64)));
        let h = m.hermitian_part();
        let vals: Vec<(Key, f64)> =
            all_keys(&dims, &[false, false], false).into_iter().map(|k| { let v = functional(&k, &dims, &h); (k, v) }).collect();
        assert!(reconstruct(&dims, &vals).dist_max(&h) < 1e-12);
    }

    #[test]
    fn real_keys_drop_odd_antisymmetric() {
        let keys = all_keys(&[2, 2], &[false, false], true);
        assert!(keys.iter().all(|k| antisym_count(k).is_multiple_of(2)));
        assert_eq!(keys.len(), 10);
    }
}
