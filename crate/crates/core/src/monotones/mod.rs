//! Type-independent monotones over a free-set model, membership verdicts
//! and their certificates.
//!
//! Each monotone is a conic program over model instances (see
//! [`crate::compiler`]). With an exact model the optimum is the monotone;
//! with a hierarchy model it is a lower bound.

mod bm2;
mod sweep;

use std::fmt;

use thiserror::Error;

use crate::basis::{functional, reconstruct, Key};
use crate::compiler::{
    auto_free_model, check_membership, combine, evaluate, ns_free_model, resource_keys, Builder, CompileError, Field,
    FreeSetModel, Instance, LinExpr, MembershipOutcome, ModelKind, Normalization,
};
use crate::hermitian::{permute_factors, CMatrix, LinalgError, TensorShape};
use crate::resource::{validate, ChoiResource, ResourceError, ResourceSpec};
use crate::solver::{solve_with, IpmSettings, SolveStatus, DEFAULT_TOL};

pub use bm2::{bm2_bounds, bm2_upper_certificate, bm2_via_bell_measurements, Bm2Bounds, ProductTerm, UpperCertificate};
pub use sweep::{box_value, optimize_theta0, sweep, sweep_point, SweepRow};

/// Values in `[-ZERO_CLIP, 0)` are reported as zero.
pub const ZERO_CLIP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonotoneName {
    AbsRobustness,
    AbsRobustnessVariant,
    GenRobustness,
    NonlocalWeight,
}

impl MonotoneName {
    pub fn short(&self) -> &'static str {
        match self {
            MonotoneName::AbsRobustness => "abs",
            MonotoneName::AbsRobustnessVariant => "variant",
            MonotoneName::GenRobustness => "gen",
            MonotoneName::NonlocalWeight => "weight",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "abs" => Some(MonotoneName::AbsRobustness),
            "variant" => Some(MonotoneName::AbsRobustnessVariant),
            "gen" => Some(MonotoneName::GenRobustness),
            "weight" | "nlw" => Some(MonotoneName::NonlocalWeight),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// Lower bound from hierarchy level `n`.
    LowerBound(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// Unit-trace noise (or, for the nonlocal weight, the nonfree part).
    pub noise: CMatrix,
    /// `s`, `s′` or `e`.
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneResult {
    pub name: MonotoneName,
    pub value: f64,
    pub exactness: Exactness,
    pub model: FreeSetModel,
    pub certificate: Certificate,
    /// `|direct − M_abs/(1 + M_abs)|` for the variant.
    pub cross_check: Option<f64>,
    pub iterations: usize,
}

impl MonotoneResult {
    /// `Exact(LP)`, `LowerBound(2)` and so on.
    pub fn exactness_tag(&self) -> String {
        match self.exactness {
            Exactness::Exact => format!("Exact({})", self.model.tag()),
            Exactness::LowerBound(n) => format!("LowerBound({n})"),
        }
    }

    /// The mixture whose membership the certificate asserts.
    pub fn mixture(&self, r: &ChoiResource) -> Option<CMatrix> {
        let j = r.choi();
        let n = &self.certificate.noise;
        let s = self.certificate.scale;
        match self.name {
            MonotoneName::AbsRobustness | MonotoneName::GenRobustness => {
                Some((j + &n.scale(s)).scale(1.0 / (1.0 + s)))
            }
            MonotoneName::AbsRobustnessVariant => Some(&j.scale(1.0 - s) + &n.scale(s)),
            MonotoneName::NonlocalWeight => {
                (1.0 - s > 1e-6).then(|| (j - &n.scale(s)).scale(1.0 / (1.0 - s)))
            }
        }
    }

    pub fn certificate_json(&self) -> String {
        crate::resource::certificate_json(
            self.name.short(),
            self.value,
            &self.exactness_tag(),
            &self.certificate.noise,
            self.certificate.scale,
        )
    }
}

impl fmt::Display for MonotoneResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:.6} {}", self.name.short(), self.value, self.exactness_tag())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonotoneError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid resource: {0}")]
    Invalid(String),
    #[error("solver did not converge ({0:?})")]
    Undecided(SolveStatus),
}

/// Solver settings shared by the monotone programs.
#[derive(Clone, Copy, Debug)]
pub struct MonotoneSettings {
    pub tol: f64,
}

impl Default for MonotoneSettings {
    fn default() -> Self {
        MonotoneSettings { tol: DEFAULT_TOL }
    }
}

fn check_valid(r: &ChoiResource) -> Result<(), MonotoneError> {
    let rep = validate(r)?;
    if !rep.is_valid() {
        return Err(MonotoneError::Invalid(rep.to_string()));
    }
    Ok(())
}

/// The Choi state represented by an instance at a primal point.
pub fn instance_choi(b: &Builder, inst: &Instance, spec: &ResourceSpec, x: &[f64]) -> CMatrix {
    let dims = spec.dims();
    let vals: Vec<(Key, f64)> = resource_keys(spec, b.field())
        .into_iter()
        .map(|k| {
            let v = evaluate(&inst.functional(b, &k), x);
            (k, v)
        })
        .collect();
    reconstruct(&dims, &vals)
}

struct Solved {
    value: f64,
    x: Vec<f64>,
    iterations: usize,
}

fn run(b: &Builder, objective: &LinExpr, settings: &MonotoneSettings) -> Result<Solved, MonotoneError> {
    let mut b = b.clone();
    b.add_objective(objective);
    let r = solve_with(b.program(), &IpmSettings { tol: settings.tol, ..IpmSettings::default() });
    if r.status != SolveStatus::Optimal {
        return Err(MonotoneError::Undecided(r.status));
    }
    Ok(Solved { value: r.optimal_value, x: r.primal, iterations: r.iterations })
}

fn clip(v: f64) -> f64 {
    if (-ZERO_CLIP..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

fn exactness(model: &FreeSetModel) -> Exactness {
    if model.is_exact() {
        Exactness::Exact
    } else {
        Exactness::LowerBound(model.level().unwrap_or(1))
    }
}

/// Normalized noise `S / tr S`, or `I/D` when `tr S` vanishes.
fn normalized(s: &CMatrix, scale: f64) -> CMatrix {
    if scale > 1e-12 {
        s.scale(1.0 / scale)
    } else {
        let d = s.rows();
        CMatrix::identity(d).scale(1.0 / d as f64)
    }
}

fn data(r: &ChoiResource, key: &Key) -> f64 {
    functional(key, &r.spec().dims(), r.choi())
}

/// `M_abs(R) = min tr Ŝ` subject to `J_R + Ŝ` and `Ŝ` in the cone of the
/// model's set.
pub fn absolute_robustness(r: &ChoiResource, model: &FreeSetModel) -> Result<MonotoneResult, MonotoneError> {
    absolute_robustness_with(r, model, &MonotoneSettings::default())
}

pub fn absolute_robustness_with(
    r: &ChoiResource,
    model: &FreeSetModel,
    settings: &MonotoneSettings,
) -> Result<MonotoneResult, MonotoneError> {
    robustness(r, model, model, MonotoneName::AbsRobustness, settings)
}

/// Same as [`absolute_robustness`] with noise ranging over the whole
/// no-signaling set.
pub fn generalized_robustness(r: &ChoiResource, model: &FreeSetModel) -> Result<MonotoneResult, MonotoneError> {
    generalized_robustness_with(r, model, &MonotoneSettings::default())
}

pub fn generalized_robustness_with(
    r: &ChoiResource,
    model: &FreeSetModel,
    settings: &MonotoneSettings,
) -> Result<MonotoneResult, MonotoneError> {
    let ns = ns_free_model(r.spec());
    robustness(r, model, &ns, MonotoneName::GenRobustness, settings)
}

fn robustness(
    r: &ChoiResource,
    model: &FreeSetModel,
    noise_model: &FreeSetModel,
    name: MonotoneName,
    settings: &MonotoneSettings,
) -> Result<MonotoneResult, MonotoneError> {
    check_valid(r)?;
    model.check_spec(r.spec())?;
    let spec = r.spec();
    let mut b = Builder::new(Field::for_data(r.choi()));
    let s = noise_model.emit(&mut b, Normalization::Cone)?;
    let c = model.emit(&mut b, Normalization::Cone)?;
    for key in resource_keys(spec, b.field()) {
        let e = combine(&[(1.0, &c.functional(&b, &key)), (-1.0, &s.functional(&b, &key))]);
        b.add_row(e, data(r, &key));
    }
    let sol = run(&b, &s.trace(&b), settings)?;
    let value = clip(sol.value);
    let noise = instance_choi(&b, &s, spec, &sol.x);
    let scale = value.max(0.0);
    let exactness = if name == MonotoneName::GenRobustness && !model.is_exact() {
        Exactness::LowerBound(model.level().unwrap_or(1))
    } else {
        exactness(model)
    };
    Ok(MonotoneResult {
        name,
        value,
        exactness,
        model: *model,
        certificate: Certificate { noise: normalized(&noise, scale), scale },
        cross_check: None,
        iterations: sol.iterations,
    })
}

/// `M′(R) = min s′` with `(1 − s′) J_R + s′ N` free for some free `N`,
/// solved directly and cross-checked against `M_abs/(1 + M_abs)`.
pub fn absolute_robustness_variant(r: &ChoiResource, model: &FreeSetModel) -> Result<MonotoneResult, MonotoneError> {
    absolute_robustness_variant_with(r, model, &MonotoneSettings::default())
}

pub fn absolute_robustness_variant_with(
    r: &ChoiResource,
    model: &FreeSetModel,
    settings: &MonotoneSettings,
) -> Result<MonotoneResult, MonotoneError> {
    check_valid(r)?;
    model.check_spec(r.spec())?;
    let spec = r.spec();
    let mut b = Builder::new(Field::for_data(r.choi()));
    let s = model.emit(&mut b, Normalization::Cone)?;
    let c = model.emit(&mut b, Normalization::Cone)?;
    let tr_s = s.trace(&b);
    for key in resource_keys(spec, b.field()) {
        let f = data(r, &key);
        let e = combine(&[(1.0, &c.functional(&b, &key)), (-1.0, &s.functional(&b, &key)), (f, &tr_s)]);
        b.add_row(e, f);
    }
    let sol = run(&b, &tr_s, settings)?;
    let value = clip(sol.value);
    let noise = instance_choi(&b, &s, spec, &sol.x);
    let abs = absolute_robustness_with(r, model, settings)?;
    let gap = (value - abs.value / (1.0 + abs.value)).abs();
    let scale = value.max(0.0);
    Ok(MonotoneResult {
        name: MonotoneName::AbsRobustnessVariant,
        value,
        exactness: exactness(model),
        model: *model,
        certificate: Certificate { noise: normalized(&noise, scale), scale },
        cross_check: Some(gap),
        iterations: sol.iterations,
    })
}

/// `min e` with `J_R = e J_R̃ + (1 − e) J_N`, `R̃` no-signaling and `N` in
/// the model's set.
pub fn nonlocal_weight(r: &ChoiResource, model: &FreeSetModel) -> Result<MonotoneResult, MonotoneError> {
    nonlocal_weight_with(r, model, &MonotoneSettings::default())
}

pub fn nonlocal_weight_with(
    r: &ChoiResource,
    model: &FreeSetModel,
    settings: &MonotoneSettings,
) -> Result<MonotoneResult, MonotoneError> {
    check_valid(r)?;
    model.check_spec(r.spec())?;
    let spec = r.spec();
    let mut b = Builder::new(Field::for_data(r.choi()));
    let rt = ns_free_model(spec).emit(&mut b, Normalization::Cone)?;
    let n = model.emit(&mut b, Normalization::Cone)?;
    for key in resource_keys(spec, b.field()) {
        let e = combine(&[(1.0, &rt.functional(&b, &key)), (1.0, &n.functional(&b, &key))]);
        b.add_row(e, data(r, &key));
    }
    let sol = run(&b, &rt.trace(&b), settings)?;
    let value = clip(sol.value);
    let part = instance_choi(&b, &rt, spec, &sol.x);
    let scale = value.max(0.0);
    let exactness = if model.is_exact() { Exactness::Exact } else { Exactness::LowerBound(model.level().unwrap_or(1)) };
    Ok(MonotoneResult {
        name: MonotoneName::NonlocalWeight,
        value,
        exactness,
        model: *model,
        certificate: Certificate { noise: normalized(&part, scale), scale },
        cross_check: None,
        iterations: sol.iterations,
    })
}

pub fn compute(
    name: MonotoneName,
    r: &ChoiResource,
    model: &FreeSetModel,
    settings: &MonotoneSettings,
) -> Result<MonotoneResult, MonotoneError> {
    match name {
        MonotoneName::AbsRobustness => absolute_robustness_with(r, model, settings),
        MonotoneName::AbsRobustnessVariant => absolute_robustness_variant_with(r, model, settings),
        MonotoneName::GenRobustness => generalized_robustness_with(r, model, settings),
        MonotoneName::NonlocalWeight => nonlocal_weight_with(r, model, settings),
    }
}

/// `(Σ λ_i)² − 1` for Schmidt coefficients `λ`.
pub fn pure_state_abs_robustness(lambda: &[f64]) -> Result<f64, MonotoneError> {
    let n2: f64 = lambda.iter().map(|l| l * l).sum();
    if lambda.is_empty() || lambda.iter().any(|&l| l < 0.0 || !l.is_finite()) || (n2 - 1.0).abs() > 1e-8 {
        return Err(ResourceError::Schmidt(format!("{lambda:?}")).into());
    }
    let s: f64 = lambda.iter().sum();
    Ok(s * s - 1.0)
}

/// Outcome of re-checking a certificate with independent feasibility
/// solves.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    /// The noise lies in its claimed set.
    pub noise_ok: bool,
    /// The mixture lies in the model's set; `None` when there is no
    /// mixture to check.
    pub mixture_ok: Option<bool>,
    /// Largest validation residual of the noise and mixture.
    pub residual: f64,
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        self.noise_ok && self.mixture_ok.unwrap_or(true)
    }
}

/// Tolerance for re-validating certificate mixtures.
pub const CERTIFICATE_TOL: f64 = 1e-7;

fn worst_residual(r: &ChoiResource) -> Result<f64, MonotoneError> {
    Ok(crate::resource::residuals(r)?.iter().map(|v| v.residual).fold(0.0, f64::max))
}

fn is_member(r: &ChoiResource, model: &FreeSetModel) -> Result<bool, MonotoneError> {
    Ok(matches!(check_membership(r, model)?, MembershipOutcome::Member(_)))
}

/// Checks that the certified noise and mixture lie in their claimed sets:
/// validity to [`CERTIFICATE_TOL`] and membership by a fresh feasibility
/// solve.
pub fn verify_certificate(r: &ChoiResource, res: &MonotoneResult) -> Result<CertificateCheck, MonotoneError> {
    let spec = *r.spec();
    let noise = ChoiResource::new(spec, res.certificate.noise.clone())?;
    let mut residual = worst_residual(&noise)?;
    let noise_in_model = matches!(res.name, MonotoneName::AbsRobustness | MonotoneName::AbsRobustnessVariant);
    let noise_ok = residual <= CERTIFICATE_TOL && (!noise_in_model || is_member(&noise, &res.model)?);
    let mixture_ok = match res.mixture(r) {
        Some(m) => {
            let mix = ChoiResource::new(spec, m)?;
            residual = residual.max(worst_residual(&mix)?);
            Some(worst_residual(&mix)? <= CERTIFICATE_TOL && is_member(&mix, &res.model)?)
        }
        None => None,
    };
    Ok(CertificateCheck { noise_ok, mixture_ok, residual })
}

/// One term `weight · J^λ ⊗ K^λ` of a local decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionTerm {
    pub weight: f64,
    /// Index of the classical party (0 for `A|X`, 1 for `B|Y`).
    pub party: usize,
    /// Deterministic response function of the classical party.
    pub strategy: Vec<usize>,
    /// Unit-trace Choi state of the other party, output ⊗ input.
    pub other: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FreeCertificate {
    /// Explicit local decomposition.
    Decomposition(Vec<DecompositionTerm>),
    /// Positive partial transpose with this smallest eigenvalue.
    Ppt { min_eigenvalue: f64 },
    /// Every no-signaling resource of the type is free.
    TTrivial,
    /// Symmetric extension at a level where the hierarchy is exact.
    Extension { level: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MembershipVerdict {
    /// Separating witness `W`: `tr(W J_R) = margin > 0`, `tr(W F) ≤ 0` on
    /// the model's set.
    NotFree { witness: CMatrix, margin: f64, model: FreeSetModel },
    Free(FreeCertificate),
    UndecidedAtLevel(usize),
}

/// Decides freeness with an exact model when one applies, otherwise with
/// the level-`n` hierarchy.
pub fn membership_test(r: &ChoiResource, n: usize, ppt_cuts: bool) -> Result<MembershipVerdict, MonotoneError> {
    check_valid(r)?;
    let spec = r.spec();
    let exact = auto_free_model(spec, Some(n))?;
    let model = if exact.is_exact() {
        exact
    } else {
        crate::compiler::hierarchy_free_model(spec, n)?.with_ppt_cuts(ppt_cuts)
    };
    let mp = crate::compiler::membership_program(r, &model)?;
    Ok(match check_membership(r, &model)? {
        MembershipOutcome::NotMember { witness, margin } => MembershipVerdict::NotFree { witness, margin, model },
        MembershipOutcome::Undecided => MembershipVerdict::UndecidedAtLevel(n),
        MembershipOutcome::Member(x) if model.is_exact() => {
            MembershipVerdict::Free(free_certificate(r, &model, &mp.builder, &mp.instance, &x)?)
        }
        MembershipOutcome::Member(_) => MembershipVerdict::UndecidedAtLevel(n),
    })
}

fn free_certificate(
    r: &ChoiResource,
    model: &FreeSetModel,
    b: &Builder,
    inst: &Instance,
    x: &[f64],
) -> Result<FreeCertificate, MonotoneError> {
    Ok(match (model.kind(), inst) {
        (ModelKind::ExactLp | ModelKind::ExactSdp, Instance::Party { party, strategies, vars }) => {
            let mut terms = Vec::new();
            for (s, v) in strategies.iter().zip(vars) {
                let k = v.operator(b, x);
                let w = k.trace().re;
                if w > 1e-10 {
                    terms.push(DecompositionTerm {
                        weight: w,
                        party: *party,
                        strategy: s.f.clone(),
                        other: k.scale(1.0 / w),
                    });
                }
            }
            FreeCertificate::Decomposition(terms)
        }
        (ModelKind::Ppt, _) => {
            let [da, db, _, _] = r.spec().dims();
            let pt = transpose_b(r.choi(), da, db);
            let min_eigenvalue = pt.min_eigenvalue()?;
            FreeCertificate::Ppt { min_eigenvalue }
        }
        (ModelKind::Hierarchy(n), _) if !crate::resource::is_t_trivial(r.spec()) => FreeCertificate::Extension { level: n },
        _ => FreeCertificate::TTrivial,
    })
}

/// Partial transpose on the second factor of `A ⊗ B`.
fn transpose_b(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da * db, da * db, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        m[(i * db + l, k * db + j)]
    })
}

/// Rebuilds `Σ_λ weight_λ · J^λ ⊗ K^λ` in `A, B, X, Y` order.
pub fn recompose(spec: &ResourceSpec, terms: &[DecompositionTerm]) -> Result<CMatrix, MonotoneError> {
    let [da, db, dx, dy] = spec.dims();
    let d = spec.total_dim();
    let mut out = CMatrix::zeros(d, d);
    for t in terms {
        let strat = crate::compiler::DeterministicStrategy { f: t.strategy.clone() };
        let prod = if t.party == 0 {
            crate::hermitian::kron(&strat.choi(da), &t.other)
        } else {
            crate::hermitian::kron(&t.other, &strat.choi(db))
        };
        let shape = TensorShape::new(vec![da, dx, db, dy])?;
        let p = permute_factors(&prod, &shape, &[0, 2, 1, 3])?;
        out = &out + &p.scale(t.weight);
    }
    Ok(out)
}
