//! Compiles membership conditions for the no-signaling set, the exact free
//! sets and the symmetric-extension hierarchy into [`ConicProgram`]s.
//!
//! Every constraint is written through basis functionals `f_β(V) = tr(βV)`
//! of structured Hermitian variables (see [`crate::basis`]). A model
//! instance exposes `f_β` of the Choi state it represents as a linear
//! expression over program coordinates, so the same instance can be tied
//! to data (membership) or to other instances (monotones).

mod models;
mod var;

use thiserror::Error;

use crate::basis::{all_keys, Key};
use crate::resource::{ChoiResource, ResourceSpec};
use crate::hermitian::CMatrix;
use crate::solver::{feasibility, ConicProgram, Feasibility};

pub use models::{
    auto_free_model, classical_party_free_model, enumerate_deterministic_strategies, hierarchy_free_model,
    ns_free_model, ppt_free_model, DeterministicStrategy, FreeSetModel, Instance, ModelKind, Normalization,
    DEFAULT_LEVEL, MAX_COORDS, MAX_STRATEGIES,
};
pub use var::{Layout, StructVar};

/// Sparse linear expression over program coordinates, sorted by coordinate.
pub type LinExpr = Vec<(usize, f64)>;

/// Coefficients below this magnitude are dropped.
const COEF_EPS: f64 = 1e-13;

/// Sorts, merges and prunes an expression.
pub fn normalize(mut e: LinExpr) -> LinExpr {
    e.sort_by_key(|t| t.0);
    let mut out: LinExpr = Vec::with_capacity(e.len());
    for (k, v) in e {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += v,
            _ => out.push((k, v)),
        }
    }
    out.retain(|t| t.1.abs() > COEF_EPS);
    out
}

/// `Σ coef_i · e_i`, normalized.
pub fn combine(parts: &[(f64, &LinExpr)]) -> LinExpr {
    let mut all = Vec::new();
    for (c, e) in parts {
        all.extend(e.iter().map(|&(k, v)| (k, v * c)));
    }
    normalize(all)
}

pub fn evaluate(e: &LinExpr, x: &[f64]) -> f64 {
    e.iter().map(|&(k, v)| v * x[k]).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    /// Real symmetric variables; used when all data is real.
    Real,
    Complex,
}

impl Field {
    /// Real when the largest imaginary entry of `j` is at most `1e-14`.
    pub fn for_data(j: &crate::hermitian::CMatrix) -> Self {
        if j.max_abs_imag() <= 1e-14 {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("model {model} does not apply to {spec}")]
    NotApplicable { model: String, spec: String },
    #[error("{0} deterministic strategies exceed the cap of {1}")]
    TooManyStrategies(u128, usize),
    #[error("extension needs about {0} coordinates, above the cap of {1}")]
    TooLarge(usize, usize),
    #[error("hierarchy level must be at least 1")]
    ZeroLevel,
    #[error("resource spec {0} does not match model spec {1}")]
    SpecMismatch(String, String),
}

/// A conic program under construction.
#[derive(Clone, Debug)]
pub struct Builder {
    prog: ConicProgram,
    field: Field,
    dropped: f64,
}

impl Builder {
    pub fn new(field: Field) -> Self {
        Builder { prog: ConicProgram::new(), field, dropped: 0.0 }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn program(&self) -> &ConicProgram {
        &self.prog
    }

    pub fn program_mut(&mut self) -> &mut ConicProgram {
        &mut self.prog
    }

    pub fn into_program(self) -> ConicProgram {
        self.prog
    }

    /// Adds `expr = rhs`. A row whose terms all vanished is skipped and its
    /// right-hand side recorded in [`Builder::max_dropped_rhs`].
    pub fn add_row(&mut self, expr: LinExpr, rhs: f64) -> bool {
        if expr.is_empty() {
            self.dropped = self.dropped.max(rhs.abs());
            return false;
        }
        self.prog.add_row(expr, rhs);
        true
    }

    pub fn add_objective(&mut self, expr: &LinExpr) {
        for &(k, v) in expr {
            self.prog.add_objective(k, v);
        }
    }

    /// Largest right-hand side among skipped rows.
    pub fn max_dropped_rhs(&self) -> f64 {
        self.dropped
    }
}

/// Basis keys of the resource space in `A, B, X, Y` order. Classical
/// factors carry diagonal labels only; `Field::Real` drops imaginary keys.
pub fn resource_keys(spec: &ResourceSpec, field: Field) -> Vec<Key> {
    all_keys(&spec.dims(), &spec.diagonal_flags(), field == Field::Real)
}

/// Data rows tying an instance to a fixed Choi state.
#[derive(Clone, Debug, Default)]
pub struct DataTie {
    /// `(row index, key)` of every emitted row.
    pub rows: Vec<(usize, Key)>,
    /// Keys whose functional is structurally zero on the model but not on
    /// the data, with the data value.
    pub structural: Vec<(Key, f64)>,
}

/// Ties `inst` to the data of `r`: `f_β(inst) = f_β(J_R)` for every key,
/// including off-diagonal labels on classical factors.
pub fn tie_to_data(b: &mut Builder, inst: &Instance, r: &ChoiResource) -> DataTie {
    let dims = r.spec().dims();
    let mut tie = DataTie::default();
    for key in all_keys(&dims, &[false; 4], b.field() == Field::Real) {
        let rhs = crate::basis::functional(&key, &dims, r.choi());
        let e = inst.functional(b, &key);
        if e.is_empty() {
            if rhs.abs() > STRUCTURAL_TOL {
                tie.structural.push((key, rhs));
            }
            continue;
        }
        tie.rows.push((b.program().num_rows(), key));
        b.add_row(e, rhs);
    }
    tie
}

/// Data functionals that a model forces to zero are accepted up to this
/// magnitude.
pub const STRUCTURAL_TOL: f64 = 1e-8;

/// Feasibility program deciding whether `r` lies in `model`'s set.
#[derive(Clone, Debug)]
pub struct MembershipProgram {
    pub builder: Builder,
    pub instance: Instance,
    pub tie: DataTie,
}

pub fn membership_program(r: &ChoiResource, model: &FreeSetModel) -> Result<MembershipProgram, CompileError> {
    model.check_spec(r.spec())?;
    let mut builder = Builder::new(Field::for_data(r.choi()));
    let instance = model.emit(&mut builder, Normalization::Cone)?;
    let tie = tie_to_data(&mut builder, &instance, r);
    Ok(MembershipProgram { builder, instance, tie })
}

#[derive(Clone, Debug)]
pub enum MembershipOutcome {
    /// A primal point of the membership program.
    Member(Vec<f64>),
    /// `tr(W J) = margin > 0` while `tr(W F) ≤ 0` on the model's cone.
    NotMember { witness: CMatrix, margin: f64 },
    Undecided,
}

/// Decides membership of `r` in `model`'s set.
pub fn check_membership(r: &ChoiResource, model: &FreeSetModel) -> Result<MembershipOutcome, CompileError> {
    let mp = membership_program(r, model)?;
    let dims = r.spec().dims();
    if let Some((key, v)) = mp.tie.structural.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) {
        let w = crate::basis::key_matrix(key, &dims).scale(v.signum() / crate::basis::key_norm_sq(key, &dims).sqrt());
        let margin = v.abs() / crate::basis::key_norm_sq(key, &dims).sqrt();
        return Ok(MembershipOutcome::NotMember { witness: w, margin });
    }
    Ok(match feasibility(mp.builder.program()) {
        Feasibility::Feasible(x) => MembershipOutcome::Member(x),
        Feasibility::Infeasible(cert) => {
            let n = r.spec().total_dim();
            let mut w = CMatrix::zeros(n, n);
            for (row, key) in &mp.tie.rows {
                crate::basis::add_key_matrix(&mut w, key, &dims, cert.y[*row]);
            }
            MembershipOutcome::NotMember { witness: w, margin: cert.margin }
        }
        Feasibility::Undecided => MembershipOutcome::Undecided,
    })
}

/// Human-readable listing of blocks, cones and rows.
pub fn dump(p: &ConicProgram) -> String {
    p.dump()
}
