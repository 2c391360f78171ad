//! Resource types, Choi states and their validation against the
//! no-signaling set.
//!
//! A bipartite resource has inputs `X`, `Y` and outputs `A`, `B`. Its Choi
//! state has unit trace and lives on `A ⊗ B ⊗ X ⊗ Y`.

mod builders;
mod json;
mod sample;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermitian::{kron, partial_trace, permute_factors, CMatrix, LinalgError, TensorShape};

pub use builders::*;
pub use json::{certificate_json, parse_resource, resource_to_json, CertificateJson, MatrixJson};
pub use sample::{random_box, random_box_table, random_resource};

/// Absolute tolerance used by [`validate`].
pub const VALIDATION_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResourceError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("trivial system must have dimension 1, got {0}")]
    TrivialDim(usize),
    #[error("zero-dimensional system")]
    ZeroDim,
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("invalid measurement: {0}")]
    Measurement(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid Schmidt coefficients: {0}")]
    Schmidt(String),
    #[error("invalid resource: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Trivial,
    Classical,
    Quantum,
}

impl SystemKind {
    pub fn symbol(&self) -> char {
        match self {
            SystemKind::Trivial => 'I',
            SystemKind::Classical => 'C',
            SystemKind::Quantum => 'Q',
        }
    }
}

/// One input or output system. A one-dimensional system is always trivial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SystemSpec {
    dim: usize,
    kind: SystemKind,
}

impl SystemSpec {
    pub fn new(dim: usize, kind: SystemKind) -> Result<Self, ResourceError> {
        match (dim, kind) {
            (0, _) => Err(ResourceError::ZeroDim),
            (1, _) => Ok(SystemSpec { dim: 1, kind: SystemKind::Trivial }),
            (d, SystemKind::Trivial) => Err(ResourceError::TrivialDim(d)),
            (d, k) => Ok(SystemSpec { dim: d, kind: k }),
        }
    }

    pub fn trivial() -> Self {
        SystemSpec { dim: 1, kind: SystemKind::Trivial }
    }

    pub fn classical(dim: usize) -> Self {
        Self::new(dim, SystemKind::Classical).expect("positive dimension")
    }

    pub fn quantum(dim: usize) -> Self {
        Self::new(dim, SystemKind::Quantum).expect("positive dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    /// Trivial or classical: the Choi state is diagonal in this factor.
    pub fn is_diagonal(&self) -> bool {
        self.kind != SystemKind::Quantum
    }

    pub fn is_trivial(&self) -> bool {
        self.kind == SystemKind::Trivial
    }
}

/// Factor positions in the canonical `A ⊗ B ⊗ X ⊗ Y` order.
pub const FA: usize = 0;
pub const FB: usize = 1;
pub const FX: usize = 2;
pub const FY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResourceSpec {
    pub a: SystemSpec,
    pub b: SystemSpec,
    pub x: SystemSpec,
    pub y: SystemSpec,
}

impl ResourceSpec {
    pub fn new(a: SystemSpec, b: SystemSpec, x: SystemSpec, y: SystemSpec) -> Self {
        ResourceSpec { a, b, x, y }
    }

    /// Systems in factor order A, B, X, Y.
    pub fn systems(&self) -> [SystemSpec; 4] {
        [self.a, self.b, self.x, self.y]
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.a.dim, self.b.dim, self.x.dim, self.y.dim]
    }

    pub fn diagonal_flags(&self) -> [bool; 4] {
        self.systems().map(|s| s.is_diagonal())
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn shape(&self) -> TensorShape {
        TensorShape::new(self.dims().to_vec()).expect("positive dimensions")
    }

    /// Type string `T[X]T[Y]→T[A]T[B]`, e.g. `CI→CQ`.
    pub fn type_string(&self) -> String {
        format!("{}{}→{}{}", self.x.kind.symbol(), self.y.kind.symbol(), self.a.kind.symbol(), self.b.kind.symbol())
    }

    /// Party 1 is (X, A), party 2 is (Y, B). A party is classical when its
    /// input and output are both trivial or classical.
    pub fn party_classical(&self, party: usize) -> bool {
        match party {
            0 => self.a.is_diagonal() && self.x.is_diagonal(),
            _ => self.b.is_diagonal() && self.y.is_diagonal(),
        }
    }

    /// Same resource with the parties exchanged.
    pub fn swapped(&self) -> Self {
        ResourceSpec { a: self.b, b: self.a, x: self.y, y: self.x }
    }
}

impl fmt::Display for ResourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (dA={}, dB={}, dX={}, dY={})",
            self.type_string(),
            self.a.dim,
            self.b.dim,
            self.x.dim,
            self.y.dim
        )
    }
}

/// Every no-signaling resource of this type is free: one party has a
/// trivial input and a classical or trivial output.
pub fn is_t_trivial(spec: &ResourceSpec) -> bool {
    (spec.x.is_trivial() && spec.a.is_diagonal()) || (spec.y.is_trivial() && spec.b.is_diagonal())
}

/// A resource type together with its unit-trace Choi state.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiResource {
    spec: ResourceSpec,
    choi: CMatrix,
}

impl ChoiResource {
    /// Pairs a spec with a Choi matrix; only the dimension is checked.
    pub fn new(spec: ResourceSpec, choi: CMatrix) -> Result<Self, ResourceError> {
        let d = spec.total_dim();
        if choi.rows() != d || choi.cols() != d {
            return Err(ResourceError::Dimension(format!(
                "Choi matrix is {}x{} but the resource type needs {d}x{d}",
                choi.rows(),
                choi.cols()
            )));
        }
        Ok(ChoiResource { spec, choi })
    }

    /// Like [`ChoiResource::new`] but also requires an empty validation
    /// report.
    pub fn checked(spec: ResourceSpec, choi: CMatrix) -> Result<Self, ResourceError> {
        let r = Self::new(spec, choi)?;
        let report = validate(&r)?;
        if !report.is_valid() {
            return Err(ResourceError::Invalid(report.to_string()));
        }
        Ok(r)
    }

    pub fn spec(&self) -> &ResourceSpec {
        &self.spec
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    Hermiticity,
    Positivity,
    Trace,
    /// Party 1's marginal must not depend on Y: `tr_B J = tr_BY J ⊗ I_Y/d_Y`.
    NoSignalingToA,
    /// Party 2's marginal must not depend on X: `tr_A J = I_X/d_X ⊗ tr_AX J`.
    NoSignalingToB,
    ClassicalA,
    ClassicalB,
    ClassicalX,
    ClassicalY,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub residual: f64,
}

/// Constraint violations above [`VALIDATION_TOL`].
///
/// No-signaling residuals are reported in channel units: the Choi residual
/// is multiplied by `d_X·d_Y`, giving the largest change of a conditional
/// marginal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn residual(&self, c: Constraint) -> Option<f64> {
        self.violations.iter().find(|v| v.constraint == c).map(|v| v.residual)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> =
            self.violations.iter().map(|v| format!("{:?} residual {:.3e}", v.constraint, v.residual)).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// All constraint residuals, reported or not.
pub fn residuals(r: &ChoiResource) -> Result<Vec<Violation>, ResourceError> {
    let spec = r.spec;
    let j = &r.choi;
    let d = spec.total_dim();
    if j.rows() != d || j.cols() != d {
        return Err(ResourceError::Dimension(format!("{}x{} vs {d}", j.rows(), j.cols())));
    }
    let shape = spec.shape();
    let [da, db, dx, dy] = spec.dims();
    let mut out = Vec::new();
    let herm = j.dist_max(&j.adjoint());
    out.push(Violation { constraint: Constraint::Hermiticity, residual: herm });
    let h = j.hermitian_part();
    let lmin = h.min_eigenvalue()?;
    out.push(Violation { constraint: Constraint::Positivity, residual: (-lmin).max(0.0) });
    out.push(Violation { constraint: Constraint::Trace, residual: (j.trace() - 1.0).norm() });

    let chan = (dx * dy) as f64;
    // tr_B J on [A, X, Y] against tr_BY J ⊗ I_Y/dY
    let lhs = partial_trace(&h, &shape, &[FA, FX, FY])?;
    let k = partial_trace(&h, &shape, &[FA, FX])?;
    let rhs = kron(&k, &CMatrix::identity(dy).scale(1.0 / dy as f64));
    out.push(Violation { constraint: Constraint::NoSignalingToA, residual: lhs.dist_max(&rhs) * chan });
    // tr_A J on [B, X, Y] against I_X/dX ⊗ tr_AX J
    let lhs = partial_trace(&h, &shape, &[FB, FX, FY])?;
    let k = partial_trace(&h, &shape, &[FB, FY])?;
    let xk = kron(&CMatrix::identity(dx).scale(1.0 / dx as f64), &k);
    let xshape = TensorShape::new(vec![dx, db, dy])?;
    let rhs = permute_factors(&xk, &xshape, &[1, 0, 2])?;
    out.push(Violation { constraint: Constraint::NoSignalingToB, residual: lhs.dist_max(&rhs) * chan });

    let cons = [Constraint::ClassicalA, Constraint::ClassicalB, Constraint::ClassicalX, Constraint::ClassicalY];
    let _ = da;
    for (f, sys) in spec.systems().iter().enumerate() {
        if sys.kind() != SystemKind::Classical {
            continue;
        }
        let mut worst: f64 = 0.0;
        for row in 0..d {
            let rp = shape.split(row)[f];
            for col in 0..d {
                if shape.split(col)[f] != rp {
                    worst = worst.max(j[(row, col)].norm());
                }
            }
        }
        out.push(Violation { constraint: cons[f], residual: worst });
    }
    Ok(out)
}

/// Checks positivity, unit trace, both no-signaling conditions and
/// classicality of classical factors, each to [`VALIDATION_TOL`].
pub fn validate(r: &ChoiResource) -> Result<ValidationReport, ResourceError> {
    validate_with_tol(r, VALIDATION_TOL)
}

pub fn validate_with_tol(r: &ChoiResource, tol: f64) -> Result<ValidationReport, ResourceError> {
    let violations = residuals(r)?.into_iter().filter(|v| v.residual > tol).collect();
    Ok(ValidationReport { violations })
}

/// A POVM: positive elements summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    outcomes: Vec<CMatrix>,
}

/// Tolerance for POVM positivity and completeness.
pub const MEASUREMENT_TOL: f64 = 1e-10;

impl Measurement {
    pub fn new(outcomes: Vec<CMatrix>) -> Result<Self, ResourceError> {
        let Some(first) = outcomes.first() else {
            return Err(ResourceError::Measurement("no outcomes".into()));
        };
        let d = first.rows();
        let mut sum = CMatrix::zeros(d, d);
        for e in &outcomes {
            if e.rows() != d || e.cols() != d {
                return Err(ResourceError::Measurement("elements of different dimensions".into()));
            }
            if !e.is_hermitian(MEASUREMENT_TOL) {
                return Err(ResourceError::Measurement("element not Hermitian".into()));
            }
            let lmin = e.min_eigenvalue()?;
            if lmin < -MEASUREMENT_TOL {
                return Err(ResourceError::Measurement(format!("element has eigenvalue {lmin:e}")));
            }
            sum = &sum + e;
        }
        let err = sum.dist_max(&CMatrix::identity(d));
        if err > MEASUREMENT_TOL {
            return Err(ResourceError::Measurement(format!("elements sum to identity only within {err:e}")));
        }
        Ok(Measurement { outcomes })
    }

    /// Projective measurement onto the given (normalized) kets.
    pub fn projective(kets: &[Vec<crate::hermitian::C64>]) -> Result<Self, ResourceError> {
        Self::new(kets.iter().map(|k| CMatrix::outer(&crate::hermitian::ket(k))).collect())
    }

    /// Single-outcome measurement `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Measurement { outcomes: vec![CMatrix::identity(dim)] }
    }

    pub fn outcomes(&self) -> &[CMatrix] {
        &self.outcomes
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].rows()
    }

    /// Same elements with outcome labels reversed.
    pub fn relabeled_reversed(&self) -> Self {
        let mut o = self.outcomes.clone();
        o.reverse();
        Measurement { outcomes: o }
    }
}
