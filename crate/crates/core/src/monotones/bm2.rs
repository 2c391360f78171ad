//! Bounds on `M_abs` of the distributed Bell measurement.
//!
//! The lower bound is the level-`n` extension value. The upper bound comes
//! from an explicit certificate: with `Φ` the map sending a shared state
//! `ρ_{A'B'}` to the box "Alice Bell-measures `X A'`, Bob Bell-measures
//! `B' Y`", the resource is `Φ(Ψ⁻)`. The noise `N = Φ((I − Ψ⁻)/3)` and the
//! mixture `(J + N)/2 = Φ(Ψ⁻/3 + I/6)` are both images of separable states,
//! written below as convex sums of product local resources.

use super::{absolute_robustness, MonotoneError, MonotoneResult};
use crate::compiler::hierarchy_free_model;
use crate::hermitian::{kron, partial_trace, pauli, permute_factors, CMatrix, TensorShape, C64};
use crate::resource::{bm2_distributed_povm, ChoiResource, ResourceSpec};

/// `weight · J_A ⊗ J_B` with `J_A` on `A ⊗ X` and `J_B` on `B ⊗ Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub weight: f64,
    pub alice: CMatrix,
    pub bob: CMatrix,
}

impl ProductTerm {
    /// The term's Choi state in `A, B, X, Y` order, without the weight.
    pub fn choi(&self, spec: &ResourceSpec) -> Result<CMatrix, MonotoneError> {
        let [da, db, dx, dy] = spec.dims();
        let shape = TensorShape::new(vec![da, dx, db, dy])?;
        Ok(permute_factors(&kron(&self.alice, &self.bob), &shape, &[0, 2, 1, 3])?)
    }
}

/// `M_abs(R) ≤ scale`, witnessed by a free noise and a free mixture
/// `(J_R + scale · N)/(1 + scale)`, both as convex sums of products.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperCertificate {
    pub scale: f64,
    pub noise: Vec<ProductTerm>,
    pub mixture: Vec<ProductTerm>,
}

/// Tolerance on the entrywise identities of an upper certificate.
pub const UPPER_CERTIFICATE_TOL: f64 = 1e-12;

fn sum_terms(spec: &ResourceSpec, terms: &[ProductTerm]) -> Result<CMatrix, MonotoneError> {
    let d = spec.total_dim();
    let mut out = CMatrix::zeros(d, d);
    for t in terms {
        out = &out + &t.choi(spec)?.scale(t.weight);
    }
    Ok(out)
}

/// Deviation of a single-party Choi state (output ⊗ input) from validity.
fn local_defect(j: &CMatrix, d_out: usize, d_in: usize) -> Result<f64, MonotoneError> {
    let shape = TensorShape::new(vec![d_out, d_in])?;
    let marg = partial_trace(j, &shape, &[1])?;
    let ns = marg.dist_max(&CMatrix::identity(d_in).scale(1.0 / d_in as f64));
    let herm = j.dist_max(&j.adjoint());
    let psd = (-j.hermitian_part().min_eigenvalue()?).max(0.0);
    Ok(ns.max(herm).max(psd))
}

impl UpperCertificate {
    /// Checks every term, the convex weights and both identities
    /// entrywise; returns the largest deviation.
    pub fn verify(&self, r: &ChoiResource) -> Result<f64, MonotoneError> {
        let spec = r.spec();
        let [da, db, dx, dy] = spec.dims();
        let mut worst: f64 = 0.0;
        for terms in [&self.noise, &self.mixture] {
            let total: f64 = terms.iter().map(|t| t.weight).sum();
            worst = worst.max((total - 1.0).abs());
            for t in terms.iter() {
                worst = worst.max((-t.weight).max(0.0));
                worst = worst.max(local_defect(&t.alice, da, dx)?);
                worst = worst.max(local_defect(&t.bob, db, dy)?);
            }
        }
        let n = sum_terms(spec, &self.noise)?;
        let m = sum_terms(spec, &self.mixture)?;
        let expected = (r.choi() + &n.scale(self.scale)).scale(1.0 / (1.0 + self.scale));
        worst = worst.max(m.dist_max(&expected));
        if worst > UPPER_CERTIFICATE_TOL {
            return Err(MonotoneError::Invalid(format!("upper certificate deviates by {worst:.3e}")));
        }
        Ok(worst)
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn singlet_projector() -> CMatrix {
    let r = 1.0 / 2f64.sqrt();
    CMatrix::outer(&[c(0.0), c(r), c(-r), c(0.0)])
}

/// Alice's Bell projector on `X ⊗ A'`: `(σ_a ⊗ I) Ψ⁻ (σ_a ⊗ I)`.
fn alice_projector(a: usize) -> CMatrix {
    let s = kron(&pauli(a), &CMatrix::identity(2));
    &(&s * &singlet_projector()) * &s
}

/// Bob's Bell projector on `B' ⊗ Y`: `(I ⊗ σ_b) Ψ⁻ (I ⊗ σ_b)`.
fn bob_projector(b: usize) -> CMatrix {
    let s = kron(&CMatrix::identity(2), &pauli(b));
    &(&s * &singlet_projector()) * &s
}

/// Choi state of the local measurement "Bell-measure the input with the
/// fixed state `u`", outcome ⊗ input.
fn local_choi(u: &CMatrix, alice: bool) -> Result<CMatrix, MonotoneError> {
    let shape = TensorShape::new(vec![2, 2])?;
    let mut j = CMatrix::zeros(8, 8);
    for o in 0..4 {
        let e = if alice {
            let p = &alice_projector(o) * &kron(&CMatrix::identity(2), u);
            partial_trace(&p, &shape, &[0])?
        } else {
            let p = &bob_projector(o) * &kron(u, &CMatrix::identity(2));
            partial_trace(&p, &shape, &[1])?
        };
        let et = e.transpose();
        for r in 0..2 {
            for col in 0..2 {
                j[(o * 2 + r, o * 2 + col)] = et[(r, col)] * 0.5;
            }
        }
    }
    Ok(j)
}

/// The box obtained from a shared two-qubit state by the two local Bell
/// measurements, as a Choi state of the distributed Bell measurement's type.
pub fn bm2_via_bell_measurements(rho: &CMatrix) -> Result<CMatrix, MonotoneError> {
    let spec = *bm2_distributed_povm().spec();
    let shape = TensorShape::new(vec![2, 2, 2, 2])?;
    let id = CMatrix::identity(2);
    let embedded = kron(&kron(&id, rho), &id);
    let mut j = CMatrix::zeros(spec.total_dim(), spec.total_dim());
    for a in 0..4 {
        for b in 0..4 {
            let p = &kron(&alice_projector(a), &bob_projector(b)) * &embedded;
            let e = partial_trace(&p, &shape, &[0, 3])?;
            let et = e.transpose();
            let base = (a * 4 + b) * 4;
            for r in 0..4 {
                for col in 0..4 {
                    j[(base + r, base + col)] = et[(r, col)] * 0.25;
                }
            }
        }
    }
    Ok(j)
}

/// Pure states along `±x, ±y, ±z`.
fn octahedron() -> Vec<(CMatrix, CMatrix)> {
    let id = CMatrix::identity(2);
    let mut out = Vec::new();
    for k in 1..=3 {
        let plus = (&id + &pauli(k)).scale(0.5);
        let minus = (&id - &pauli(k)).scale(0.5);
        out.push((plus.clone(), minus.clone()));
        out.push((minus, plus));
    }
    out
}

/// Certificate for `M_abs ≤ 1` on the distributed Bell measurement.
pub fn bm2_upper_certificate() -> Result<UpperCertificate, MonotoneError> {
    let mut noise = Vec::new();
    let mut mixture = Vec::new();
    for (u, minus_u) in octahedron() {
        let alice = local_choi(&u, true)?;
        noise.push(ProductTerm { weight: 1.0 / 6.0, alice: alice.clone(), bob: local_choi(&u, false)? });
        mixture.push(ProductTerm { weight: 1.0 / 6.0, alice, bob: local_choi(&minus_u, false)? });
    }
    Ok(UpperCertificate { scale: 1.0, noise, mixture })
}

/// Lower and upper bounds on `M_abs` of the distributed Bell measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Bm2Bounds {
    pub lower: MonotoneResult,
    pub upper: f64,
    pub certificate: UpperCertificate,
    /// Deviation reported by [`UpperCertificate::verify`].
    pub certificate_residual: f64,
}

impl Bm2Bounds {
    /// Reported as an interval when the bounds differ by more than `1e-3`.
    pub fn is_interval(&self) -> bool {
        self.upper - self.lower.value > 1e-3
    }
}

/// Level-`n` lower bound (optionally with PPT cuts) and the verified upper
/// certificate.
pub fn bm2_bounds(n: usize, ppt_cuts: bool) -> Result<Bm2Bounds, MonotoneError> {
    let r = bm2_distributed_povm();
    let model = hierarchy_free_model(r.spec(), n)?.with_ppt_cuts(ppt_cuts);
    let lower = absolute_robustness(&r, &model)?;
    let certificate = bm2_upper_certificate()?;
    let certificate_residual = certificate.verify(&r)?;
    Ok(Bm2Bounds { lower, upper: certificate.scale, certificate, certificate_residual })
}
