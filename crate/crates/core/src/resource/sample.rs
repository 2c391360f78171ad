//! Random valid resources for property tests.

use rand::Rng;
use rand_distr::{Dirichlet, Distribution, StandardNormal};

use super::{make_box, BoxTable, ChoiResource, ResourceSpec, FA, FB, FX, FY};
use crate::basis::{all_keys, functional, reconstruct, Label};
use crate::hermitian::{CMatrix, C64};

/// Samples a valid resource of the given spec.
///
/// A Ginibre matrix `GG†` is projected orthogonally onto the affine space
/// cut out by unit trace, no-signaling and classicality (by zeroing the
/// offending basis coefficients), then mixed with `I/D` just enough to
/// restore positivity.
pub fn random_resource<R: Rng + ?Sized>(spec: &ResourceSpec, rng: &mut R) -> ChoiResource {
    let dims = spec.dims();
    let d = spec.total_dim();
    let entries: Vec<C64> = (0..d * d)
        .map(|_| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let g = CMatrix::from_vec(d, d, entries).expect("square");
    let w = g.matmul(&g.adjoint());
    let w = w.scale(1.0 / w.trace().re);
    let classical = spec.diagonal_flags();
    let values: Vec<_> = all_keys(&dims, &classical, false)
        .into_iter()
        .filter(|k| !((k[FA] == Label::I && k[FX] != Label::I) || (k[FB] == Label::I && k[FY] != Label::I)))
        .map(|k| {
            let v = functional(&k, &dims, &w);
            (k, v)
        })
        .collect();
    let p = reconstruct(&dims, &values).hermitian_part();
    let lmin = p.min_eigenvalue().expect("Hermitian eigenvalues");
    let inv_d = 1.0 / d as f64;
    let j = if lmin < 0.0 {
        let t = -lmin / (inv_d - lmin);
        &p.scale(1.0 - t) + &CMatrix::identity(d).scale(t * inv_d)
    } else {
        p
    };
    ChoiResource::new(*spec, j).expect("dimensions agree")
}

/// `p·(PR-type vertex) + (1−p)·(local point)` with `p` uniform on `[0, 1]`,
/// one of the eight PR-type boxes `δ_{a⊕b, xy⊕αx⊕βy⊕γ}/2` and a
/// Dirichlet-weighted mixture of the 16 deterministic boxes.
pub fn random_box_table<R: Rng + ?Sized>(rng: &mut R) -> BoxTable {
    let p: f64 = rng.random();
    let (al, be, ga) = (rng.random_range(0..2usize), rng.random_range(0..2usize), rng.random_range(0..2usize));
    let weights: Vec<f64> = Dirichlet::new([1.0; 16]).expect("positive").sample(rng).to_vec();
    BoxTable::from_fn(2, 2, 2, 2, |a, b, x, y| {
        let pr = if (a ^ b) == ((x & y) ^ (al & x) ^ (be & y) ^ ga) { 0.5 } else { 0.0 };
        let local: f64 = weights
            .iter()
            .enumerate()
            .filter(|(l, _)| a == (l >> (2 + x) & 1) && b == (l >> y & 1))
            .map(|(_, w)| w)
            .sum();
        p * pr + (1.0 - p) * local
    })
}

pub fn random_box<R: Rng + ?Sized>(rng: &mut R) -> ChoiResource {
    make_box(&random_box_table(rng)).expect("no-signaling by construction")
}
