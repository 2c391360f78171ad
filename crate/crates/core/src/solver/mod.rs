//! Standard-form conic programs and their solution.
//!
//! A [`ConicProgram`] is `min cᵀx` subject to sparse linear equalities
//! `Ax = b` and `x` in a product of free, nonnegative and real-PSD cones.
//! PSD blocks are addressed by their upper-triangle entries `X[i][j]`,
//! `i ≤ j`, and a coefficient on such a coordinate multiplies the matrix
//! entry once, so `tr(CX)` for symmetric `C` has coefficient `C[i][i]` on
//! diagonal entries and `2·C[i][j]` off the diagonal.

mod ipm;

use std::fmt::Write as _;

use faer::Mat;
use thiserror::Error;

pub use ipm::IpmSettings;

/// Default termination tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Free(usize),
    NonNeg(usize),
    /// Real symmetric PSD matrices of the given order.
    Psd(usize),
}

impl Cone {
    pub fn num_coords(&self) -> usize {
        match *self {
            Cone::Free(n) | Cone::NonNeg(n) => n,
            Cone::Psd(n) => n * (n + 1) / 2,
        }
    }
}

/// Local coordinate of entry `(i, j)` (any order) inside a PSD block.
pub fn psd_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

/// Inverse of [`psd_index`].
pub fn psd_entry(k: usize) -> (usize, usize) {
    let mut j = ((((8 * k + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while j * (j + 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * (j + 2) / 2 <= k {
        j += 1;
    }
    (k - j * (j + 1) / 2, j)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("row {0} has no nonzero coefficient")]
    EmptyRow(usize),
    #[error("row {row} references coordinate {coord} beyond {num_vars}")]
    OutOfRange { row: usize, coord: usize, num_vars: usize },
    #[error("objective references coordinate {0} out of range")]
    ObjectiveOutOfRange(usize),
    #[error("block sizes sum to {blocks} but {num_vars} coordinates are declared")]
    SizeMismatch { blocks: usize, num_vars: usize },
    #[error("row {0} has a non-finite entry")]
    NonFinite(usize),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConicProgram {
    blocks: Vec<Cone>,
    offsets: Vec<usize>,
    num_vars: usize,
    objective: Vec<(usize, f64)>,
    rows: Vec<Row>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a cone block and returns its index.
    pub fn add_block(&mut self, cone: Cone) -> usize {
        self.blocks.push(cone);
        self.offsets.push(self.num_vars);
        self.num_vars += cone.num_coords();
        self.blocks.len() - 1
    }

    /// Global coordinate of local coordinate `k` in `block`.
    pub fn coord(&self, block: usize, k: usize) -> usize {
        debug_assert!(k < self.blocks[block].num_coords());
        self.offsets[block] + k
    }

    /// Global coordinate of entry `(i, j)` of a PSD block.
    pub fn psd_coord(&self, block: usize, i: usize, j: usize) -> usize {
        self.coord(block, psd_index(i, j))
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push(Row { terms, rhs });
    }

    /// Adds `coef` to the objective coefficient of `coord`.
    pub fn add_objective(&mut self, coord: usize, coef: f64) {
        self.objective.push((coord, coef));
    }

    pub fn blocks(&self) -> &[Cone] {
        &self.blocks
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.num_vars];
        for &(k, v) in &self.objective {
            c[k] += v;
        }
        c
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(k, v)| v * x[k]).sum()
    }

    /// Same constraints with a zero objective.
    pub fn without_objective(&self) -> Self {
        ConicProgram { objective: Vec::new(), ..self.clone() }
    }

    /// Structural self-check: coordinates in range, no empty rows, block
    /// sizes consistent.
    pub fn audit(&self) -> Result<(), AuditError> {
        let total: usize = self.blocks.iter().map(Cone::num_coords).sum();
        if total != self.num_vars {
            return Err(AuditError::SizeMismatch { blocks: total, num_vars: self.num_vars });
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(AuditError::NonFinite(r));
            }
            let mut nonzero = false;
            for &(k, v) in &row.terms {
                if k >= self.num_vars {
                    return Err(AuditError::OutOfRange { row: r, coord: k, num_vars: self.num_vars });
                }
                if !v.is_finite() {
                    return Err(AuditError::NonFinite(r));
                }
                nonzero |= v != 0.0;
            }
            if !nonzero {
                return Err(AuditError::EmptyRow(r));
            }
        }
        if let Some(&(k, _)) = self.objective.iter().find(|&&(k, _)| k >= self.num_vars) {
            return Err(AuditError::ObjectiveOutOfRange(k));
        }
        Ok(())
    }

    /// Plain-text listing of blocks, objective and rows.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vars {} rows {}", self.num_vars, self.rows.len());
        for (b, cone) in self.blocks.iter().enumerate() {
            let _ = writeln!(out, "block {b} {:?} offset {}", cone, self.offsets[b]);
        }
        let obj: Vec<String> = self.objective.iter().map(|(k, v)| format!("{v:+e}*x{k}")).collect();
        let _ = writeln!(out, "min {}", if obj.is_empty() { "0".into() } else { obj.join(" ") });
        for (r, row) in self.rows.iter().enumerate() {
            let terms: Vec<String> = row.terms.iter().map(|(k, v)| format!("{v:+e}*x{k}")).collect();
            let _ = writeln!(out, "r{r}: {} = {:e}", terms.join(" "), row.rhs);
        }
        out
    }

    /// Largest absolute equality residual at `x`.
    pub fn max_row_residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.terms.iter().map(|&(k, v)| v * x[k]).sum::<f64>() - row.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Largest cone violation at `x`: negative entries of nonnegative
    /// blocks and negative eigenvalues of PSD blocks.
    pub fn max_cone_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (b, cone) in self.blocks.iter().enumerate() {
            let off = self.offsets[b];
            match *cone {
                Cone::Free(_) => {}
                Cone::NonNeg(n) => {
                    for &v in &x[off..off + n] {
                        worst = worst.max(-v);
                    }
                }
                Cone::Psd(n) => {
                    let m = self.psd_block_value(x, b);
                    let ev = m.self_adjoint_eigenvalues(faer::Side::Lower).map(|v| v[0]).unwrap_or(f64::NEG_INFINITY);
                    let _ = n;
                    worst = worst.max(-ev);
                }
            }
        }
        worst
    }

    /// Symmetric matrix held by PSD block `b` at point `x`.
    pub fn psd_block_value(&self, x: &[f64], b: usize) -> Mat<f64> {
        let Cone::Psd(n) = self.blocks[b] else { panic!("block {b} is not PSD") };
        let off = self.offsets[b];
        Mat::from_fn(n, n, |i, j| x[off + psd_index(i, j)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// Farkas certificate of primal infeasibility: `y` with `‖y‖₂ = 1`,
/// `-Aᵀy` in the cone (up to `cone_residual`) and `bᵀy = margin > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfeasibilityCertificate {
    pub y: Vec<f64>,
    pub margin: f64,
    pub cone_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Primal objective `cᵀx`.
    pub optimal_value: f64,
    /// Dual objective `bᵀy`.
    pub dual_value: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub certificate: Option<InfeasibilityCertificate>,
}

/// Solves `p` to the given tolerance with default settings.
pub fn solve(p: &ConicProgram, tolerance: f64) -> SolveResult {
    let settings = IpmSettings { tol: tolerance, ..IpmSettings::default() };
    ipm::solve(p, &settings)
}

pub fn solve_with(p: &ConicProgram, settings: &IpmSettings) -> SolveResult {
    ipm::solve(p, settings)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible(InfeasibilityCertificate),
    Undecided,
}

/// Margin a Farkas certificate must exceed to be reported.
pub const CERTIFICATE_MARGIN: f64 = 1e-8;

/// Decides whether the constraints of `p` admit a point. The objective is
/// ignored.
pub fn feasibility(p: &ConicProgram) -> Feasibility {
    feasibility_with(p, &IpmSettings { tol: 1e-9, ..IpmSettings::default() })
}

pub fn feasibility_with(p: &ConicProgram, settings: &IpmSettings) -> Feasibility {
    let q = p.without_objective();
    if q.num_rows() == 0 {
        return Feasibility::Feasible(vec![0.0; q.num_vars()]);
    }
    let r = ipm::solve(&q, settings);
    match r.status {
        SolveStatus::Optimal => {
            if q.max_row_residual(&r.primal) <= 1e-8 && q.max_cone_violation(&r.primal) <= 1e-8 {
                Feasibility::Feasible(r.primal)
            } else {
                Feasibility::Undecided
            }
        }
        SolveStatus::Infeasible => match r.certificate {
            Some(c) if c.margin > CERTIFICATE_MARGIN => Feasibility::Infeasible(c),
            _ => Feasibility::Undecided,
        },
        _ => Feasibility::Undecided,
    }
}
