//! Free-set models and their emission into a [`Builder`].

use super::var::{estimate_coords, Layout, StructVar};
use super::{combine, Builder, CompileError, Field, LinExpr};
use crate::basis::{antisym_count, Label};
use crate::hermitian::CMatrix;
use crate::resource::{is_t_trivial, ResourceSpec, SystemKind};

/// Default hierarchy level.
pub const DEFAULT_LEVEL: usize = 2;
/// Cap on `d_A^{d_X}` for strategy enumeration.
pub const MAX_STRATEGIES: usize = 1_000_000;
/// Cap on the coordinates of one extension variable.
pub const MAX_COORDS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// The whole no-signaling set.
    NoSignaling,
    /// Local-polytope linear program (both parties classical).
    ExactLp,
    /// One classical party, the other general.
    ExactSdp,
    /// Positive partial transpose, exact for `II→QQ` with `d_A·d_B ≤ 6`.
    Ppt,
    /// States with an `n`-symmetric extension on party 2.
    Hierarchy(usize),
}

/// Whether the represented Choi state is normalized or ranges over the
/// cone generated by the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Unit,
    Cone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeSetModel {
    spec: ResourceSpec,
    kind: ModelKind,
    ppt_cuts: bool,
    party: usize,
}

impl FreeSetModel {
    pub fn spec(&self) -> &ResourceSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn ppt_cuts(&self) -> bool {
        self.ppt_cuts
    }

    /// Enables the partial-transpose cut between party 1 and the copies of
    /// party 2 on hierarchy models.
    pub fn with_ppt_cuts(mut self, on: bool) -> Self {
        self.ppt_cuts = on && matches!(self.kind, ModelKind::Hierarchy(_));
        self
    }

    pub fn level(&self) -> Option<usize> {
        match self.kind {
            ModelKind::Hierarchy(n) => Some(n),
            ModelKind::NoSignaling => Some(1),
            _ => None,
        }
    }

    /// The model's set equals the free set of its spec.
    pub fn is_exact(&self) -> bool {
        match self.kind {
            ModelKind::NoSignaling => is_t_trivial(&self.spec),
            ModelKind::ExactLp | ModelKind::ExactSdp | ModelKind::Ppt => true,
            ModelKind::Hierarchy(n) => {
                is_t_trivial(&self.spec)
                    || (self.spec.b.is_diagonal() && self.spec.y.is_diagonal() && n >= self.spec.y.dim())
            }
        }
    }

    /// Short tag such as `LP`, `SDP`, `PPT`, `NS` or `level 2+PPT`.
    pub fn tag(&self) -> String {
        match self.kind {
            ModelKind::NoSignaling => "NS".into(),
            ModelKind::ExactLp => "LP".into(),
            ModelKind::ExactSdp => "SDP".into(),
            ModelKind::Ppt => "PPT".into(),
            ModelKind::Hierarchy(n) if self.ppt_cuts => format!("level {n}+PPT"),
            ModelKind::Hierarchy(n) => format!("level {n}"),
        }
    }

    pub(crate) fn check_spec(&self, spec: &ResourceSpec) -> Result<(), CompileError> {
        if *spec != self.spec {
            return Err(CompileError::SpecMismatch(spec.to_string(), self.spec.to_string()));
        }
        Ok(())
    }

    /// Declares the model's variables and internal constraints. With
    /// [`Normalization::Unit`] the represented Choi state has unit trace;
    /// with [`Normalization::Cone`] every constraint is homogeneous and the
    /// instance ranges over the generated cone.
    pub fn emit(&self, b: &mut Builder, norm: Normalization) -> Result<Instance, CompileError> {
        let inst = match self.kind {
            ModelKind::NoSignaling => emit_extension(b, &self.spec, 1, false)?,
            ModelKind::Hierarchy(n) => emit_extension(b, &self.spec, n, self.ppt_cuts)?,
            ModelKind::ExactLp | ModelKind::ExactSdp => emit_party(b, &self.spec, self.party)?,
            ModelKind::Ppt => emit_ppt(b, &self.spec),
        };
        if norm == Normalization::Unit {
            let e = inst.functional(b, &[Label::I; 4]);
            b.add_row(e, 1.0);
        }
        Ok(inst)
    }
}

/// The no-signaling set of `spec`.
pub fn ns_free_model(spec: &ResourceSpec) -> FreeSetModel {
    FreeSetModel { spec: *spec, kind: ModelKind::NoSignaling, ppt_cuts: false, party: 0 }
}

/// `J = Σ_λ J^λ ⊗ Ĵ^λ` over deterministic strategies `λ` of a classical
/// party, each `Ĵ^λ` in the cone of the other party's no-signaling set.
pub fn classical_party_free_model(spec: &ResourceSpec) -> Result<FreeSetModel, CompileError> {
    let c0 = spec.party_classical(0);
    let c1 = spec.party_classical(1);
    let count = |p: usize| {
        let (o, i) = if p == 0 { (spec.a.dim(), spec.x.dim()) } else { (spec.b.dim(), spec.y.dim()) };
        (o as f64).powf(i as f64)
    };
    let party = match (c0, c1) {
        (true, true) if count(1) < count(0) => 1,
        (true, _) => 0,
        (false, true) => 1,
        (false, false) => {
            return Err(CompileError::NotApplicable { model: "classical-party".into(), spec: spec.to_string() })
        }
    };
    let kind = if c0 && c1 { ModelKind::ExactLp } else { ModelKind::ExactSdp };
    Ok(FreeSetModel { spec: *spec, kind, ppt_cuts: false, party })
}

/// States with positive partial transpose.
pub fn ppt_free_model(spec: &ResourceSpec) -> Result<FreeSetModel, CompileError> {
    let ok = spec.x.is_trivial()
        && spec.y.is_trivial()
        && spec.a.kind() == SystemKind::Quantum
        && spec.b.kind() == SystemKind::Quantum
        && spec.a.dim() * spec.b.dim() <= 6;
    if !ok {
        return Err(CompileError::NotApplicable { model: "PPT".into(), spec: spec.to_string() });
    }
    Ok(FreeSetModel { spec: *spec, kind: ModelKind::Ppt, ppt_cuts: false, party: 0 })
}

/// Level-`n` symmetric-extension outer approximation.
pub fn hierarchy_free_model(spec: &ResourceSpec, n: usize) -> Result<FreeSetModel, CompileError> {
    if n == 0 {
        return Err(CompileError::ZeroLevel);
    }
    let coords = estimate_coords(&extension_layout(spec, n), Field::Complex);
    if coords > MAX_COORDS {
        return Err(CompileError::TooLarge(coords, MAX_COORDS));
    }
    Ok(FreeSetModel { spec: *spec, kind: ModelKind::Hierarchy(n), ppt_cuts: false, party: 0 })
}

/// Picks the no-signaling set for T-trivial types, then an exact
/// classical-party model, then PPT, and otherwise the hierarchy at
/// `level` (default [`DEFAULT_LEVEL`]).
pub fn auto_free_model(spec: &ResourceSpec, level: Option<usize>) -> Result<FreeSetModel, CompileError> {
    if is_t_trivial(spec) {
        return Ok(ns_free_model(spec));
    }
    if let Ok(m) = classical_party_free_model(spec) {
        return Ok(m);
    }
    if let Ok(m) = ppt_free_model(spec) {
        return Ok(m);
    }
    hierarchy_free_model(spec, level.unwrap_or(DEFAULT_LEVEL))
}

/// A function from inputs to outputs of one classical party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub f: Vec<usize>,
}

impl DeterministicStrategy {
    /// `J^λ = (1/d_X) Σ_x |f(x)⟩⟨f(x)| ⊗ |x⟩⟨x|` on output ⊗ input.
    pub fn choi(&self, d_out: usize) -> CMatrix {
        let d_in = self.f.len();
        let mut diag = vec![0.0; d_out * d_in];
        for (x, &a) in self.f.iter().enumerate() {
            diag[a * d_in + x] = 1.0 / d_in as f64;
        }
        CMatrix::diag(&diag)
    }

    /// `f_{lo ⊗ li}(J^λ)` for diagonal labels.
    fn functional(&self, lo: Label, li: Label) -> f64 {
        let d_in = self.f.len() as f64;
        self.f.iter().enumerate().map(|(x, &a)| diag_value(lo, a) * diag_value(li, x)).sum::<f64>() / d_in
    }
}

fn diag_value(l: Label, v: usize) -> f64 {
    match l {
        Label::I => 1.0,
        Label::D(k) => {
            let k = k as usize;
            let s = (2.0 / (k * (k + 1)) as f64).sqrt();
            match v.cmp(&k) {
                std::cmp::Ordering::Less => s,
                std::cmp::Ordering::Equal => -(k as f64) * s,
                std::cmp::Ordering::Greater => 0.0,
            }
        }
        _ => 0.0,
    }
}

/// All `d_A^{d_X}` functions `{0..d_X} → {0..d_A}`, in lexicographic order
/// of `(f(0), f(1), ...)`.
pub fn enumerate_deterministic_strategies(d_x: usize, d_a: usize) -> Result<Vec<DeterministicStrategy>, CompileError> {
    let total = (d_a as u128).checked_pow(d_x as u32).unwrap_or(u128::MAX);
    if total > MAX_STRATEGIES as u128 {
        return Err(CompileError::TooManyStrategies(total, MAX_STRATEGIES));
    }
    let mut out = Vec::with_capacity(total as usize);
    for mut idx in 0..total as usize {
        let mut f = vec![0; d_x];
        for slot in f.iter_mut().rev() {
            *slot = idx % d_a;
            idx /= d_a;
        }
        out.push(DeterministicStrategy { f });
    }
    Ok(out)
}

/// A model's variables inside a [`Builder`].
#[derive(Clone, Debug)]
pub enum Instance {
    /// Extension on `A, X, B_1, Y_1, …, B_n, Y_n`; copy 1 is the resource's
    /// party 2. `cut` holds the partial transpose over the copies.
    Extension { var: StructVar, n: usize, cut: Option<StructVar> },
    /// Classical party `party` with one cone variable per strategy.
    Party { party: usize, strategies: Vec<DeterministicStrategy>, vars: Vec<StructVar> },
    Ppt { rho: StructVar, pt: StructVar },
}

impl Instance {
    /// `f_β` of the represented Choi state, for a key in `A, B, X, Y`
    /// order.
    pub fn functional(&self, b: &Builder, key: &[Label]) -> LinExpr {
        match self {
            Instance::Extension { var, n, .. } => {
                let mut k = vec![Label::I; 2 + 2 * n];
                k[0] = key[0];
                k[1] = key[2];
                k[2] = key[1];
                k[3] = key[3];
                var.functional(b, &k)
            }
            Instance::Party { party, strategies, vars } => {
                let (lo, li, oo, oi) =
                    if *party == 0 { (key[0], key[2], key[1], key[3]) } else { (key[1], key[3], key[0], key[2]) };
                let mut parts = Vec::new();
                let mut exprs = Vec::new();
                for (s, v) in strategies.iter().zip(vars) {
                    let c = s.functional(lo, li);
                    if c.abs() > 1e-15 {
                        exprs.push((c, v.functional(b, &[oo, oi])));
                    }
                }
                for (c, e) in &exprs {
                    parts.push((*c, e));
                }
                combine(&parts)
            }
            Instance::Ppt { rho, .. } => {
                if key[2] != Label::I || key[3] != Label::I {
                    return Vec::new();
                }
                rho.functional(b, &[key[0], key[1]])
            }
        }
    }

    /// Trace of the represented Choi state.
    pub fn trace(&self, b: &Builder) -> LinExpr {
        self.functional(b, &[Label::I; 4])
    }
}

fn extension_layout(spec: &ResourceSpec, n: usize) -> Layout {
    let [da, db, dx, dy] = spec.dims();
    let [ca, cb, cx, cy] = spec.diagonal_flags();
    let mut dims = vec![da, dx];
    let mut classical = vec![ca, cx];
    let mut copies = Vec::new();
    let mut parties = vec![(0, 1)];
    for k in 0..n {
        dims.extend([db, dy]);
        classical.extend([cb, cy]);
        copies.push(vec![2 + 2 * k, 3 + 2 * k]);
        parties.push((2 + 2 * k, 3 + 2 * k));
    }
    Layout { dims, classical, copies, parties }
}

fn emit_extension(b: &mut Builder, spec: &ResourceSpec, n: usize, cuts: bool) -> Result<Instance, CompileError> {
    let layout = extension_layout(spec, n);
    let coords = estimate_coords(&layout, b.field());
    if coords > MAX_COORDS {
        return Err(CompileError::TooLarge(coords, MAX_COORDS));
    }
    let var = StructVar::declare(b, layout.clone(), true);
    let cut = if cuts {
        let plain = Layout { parties: Vec::new(), ..layout };
        let w = StructVar::declare(b, plain, false);
        for key in var.canonical_keys() {
            let sign = if antisym_count(&key[2..]).is_multiple_of(2) { 1.0 } else { -1.0 };
            let row = combine(&[(1.0, &w.raw_functional(b, &key)), (-sign, &var.functional(b, &key))]);
            b.add_row(row, 0.0);
        }
        Some(w)
    } else {
        None
    };
    Ok(Instance::Extension { var, n, cut })
}

fn emit_party(b: &mut Builder, spec: &ResourceSpec, party: usize) -> Result<Instance, CompileError> {
    let [da, db, dx, dy] = spec.dims();
    let [ca, cb, cx, cy] = spec.diagonal_flags();
    let (d_out, d_in, layout) = if party == 0 {
        (da, dx, Layout { dims: vec![db, dy], classical: vec![cb, cy], copies: Vec::new(), parties: vec![(0, 1)] })
    } else {
        (db, dy, Layout { dims: vec![da, dx], classical: vec![ca, cx], copies: Vec::new(), parties: vec![(0, 1)] })
    };
    let strategies = enumerate_deterministic_strategies(d_in, d_out)?;
    let vars = strategies.iter().map(|_| StructVar::declare(b, layout.clone(), true)).collect();
    Ok(Instance::Party { party, strategies, vars })
}

fn emit_ppt(b: &mut Builder, spec: &ResourceSpec) -> Instance {
    let layout = Layout::plain(vec![spec.a.dim(), spec.b.dim()], vec![false, false]);
    let rho = StructVar::declare(b, layout.clone(), false);
    let pt = StructVar::declare(b, layout, false);
    for key in rho.canonical_keys() {
        let sign = if key[1].is_antisymmetric() { -1.0 } else { 1.0 };
        let row = combine(&[(1.0, &pt.raw_functional(b, &key)), (-sign, &rho.raw_functional(b, &key))]);
        b.add_row(row, 0.0);
    }
    Instance::Ppt { rho, pt }
}
