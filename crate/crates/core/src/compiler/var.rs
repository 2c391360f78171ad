//! Structured Hermitian variables.
//!
//! A variable on factors with dimensions `dims` is block diagonal in its
//! classical factors: `V = Σ_c |c⟩⟨c| ⊗ V_c` over classical index tuples
//! `c`, each `V_c` positive semidefinite on the quantum factors. Groups of
//! factors listed in `copies` are exchangeable: only one block per orbit of
//! classical tuples under copy permutations is stored, the others are its
//! relabelings, and each stored block is constrained to be invariant under
//! the permutations fixing its tuple. The resulting operator is invariant
//! under every permutation of the copies.

use std::collections::{BTreeSet, HashMap};

use super::{normalize, Builder, Field, LinExpr};
use crate::basis::{antisym_count, key_entries, Key, Label};
use crate::hermitian::{CMatrix, C64};
use crate::solver::Cone;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub dims: Vec<usize>,
    /// Classical or trivial factors: the operator is diagonal there.
    pub classical: Vec<bool>,
    /// Exchangeable factor groups, all with the same shape.
    pub copies: Vec<Vec<usize>>,
    /// `(output, input)` factor pairs of the parties whose no-signaling
    /// conditions are imposed.
    pub parties: Vec<(usize, usize)>,
}

impl Layout {
    pub fn plain(dims: Vec<usize>, classical: Vec<bool>) -> Self {
        Layout { dims, classical, copies: Vec::new(), parties: Vec::new() }
    }

    /// True when some party has output label `I` and a non-identity input
    /// label: `f_β` vanishes on no-signaling operators.
    pub fn in_zero_set(&self, key: &[Label]) -> bool {
        self.parties.iter().any(|&(o, i)| key[o] == Label::I && key[i] != Label::I)
    }

    /// Key with copies sorted by their label tuples.
    pub fn canonical(&self, key: &[Label]) -> Key {
        if self.copies.len() < 2 {
            return key.to_vec();
        }
        let mut tuples: Vec<Vec<Label>> =
            self.copies.iter().map(|g| g.iter().map(|&f| key[f]).collect()).collect();
        tuples.sort();
        let mut out = key.to_vec();
        for (g, t) in self.copies.iter().zip(tuples) {
            for (&f, l) in g.iter().zip(t) {
                out[f] = l;
            }
        }
        out
    }

    fn quantum_factors(&self) -> Vec<usize> {
        (0..self.dims.len()).filter(|&f| !self.classical[f]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BlockKind {
    Scalar,
    Real(usize),
    Complex(usize),
}

#[derive(Clone, Debug)]
struct VarBlock {
    /// Tuples represented by this block with their factor maps: factor `f`
    /// of the represented block corresponds to factor `fmap[f]` of the
    /// stored one.
    orbit: Vec<(Vec<usize>, Vec<usize>)>,
    kind: BlockKind,
    prog_block: usize,
}

/// A structured variable declared in a [`Builder`].
#[derive(Clone, Debug)]
pub struct StructVar {
    layout: Layout,
    qf: Vec<usize>,
    qdims: Vec<usize>,
    blocks: Vec<VarBlock>,
    real: bool,
    ns_rows: bool,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn classical_tuples(layout: &Layout) -> Vec<Vec<usize>> {
    let n = layout.dims.len();
    let mut out = vec![vec![0usize; n]];
    for f in 0..n {
        if !layout.classical[f] {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * layout.dims[f]);
        for t in &out {
            for v in 0..layout.dims[f] {
                let mut t2 = t.clone();
                t2[f] = v;
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

fn copy_values(layout: &Layout, c: &[usize], k: usize) -> Vec<usize> {
    layout.copies[k].iter().map(|&f| c[f]).collect()
}

fn is_canonical_tuple(layout: &Layout, c: &[usize]) -> bool {
    (1..layout.copies.len()).all(|k| copy_values(layout, c, k - 1) <= copy_values(layout, c, k))
}

/// Factor map sending copy `k` to copy `perm[k]`.
fn factor_map(layout: &Layout, perm: &[usize]) -> Vec<usize> {
    let mut fmap: Vec<usize> = (0..layout.dims.len()).collect();
    for (k, g) in layout.copies.iter().enumerate() {
        for (j, &f) in g.iter().enumerate() {
            fmap[f] = layout.copies[perm[k]][j];
        }
    }
    fmap
}

/// Tuple whose copy `k` holds the values of copy `perm[k]` of `c0`.
fn apply_tuple(layout: &Layout, c0: &[usize], perm: &[usize]) -> Vec<usize> {
    let fmap = factor_map(layout, perm);
    (0..c0.len()).map(|f| c0[fmap[f]]).collect()
}

fn label_diag(l: Label, v: usize) -> f64 {
    match l {
        Label::I => 1.0,
        Label::D(k) => {
            let k = k as usize;
            let s = (2.0 / (k * (k + 1)) as f64).sqrt();
            if v < k {
                s
            } else if v == k {
                -(k as f64) * s
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

fn join(parts: &[usize], dims: &[usize]) -> usize {
    parts.iter().zip(dims).fold(0, |acc, (&p, &d)| acc * d + p)
}

/// Number of canonical classical tuples and the quantum dimension, for
/// size estimates before building.
pub(super) fn estimate_coords(layout: &Layout, field: Field) -> usize {
    let q: usize = layout.quantum_factors().iter().map(|&f| layout.dims[f]).product();
    let blocks = classical_tuples(layout).iter().filter(|c| is_canonical_tuple(layout, c)).count();
    let n = match (q, field) {
        (1, _) => 1,
        (q, Field::Real) => q,
        (q, Field::Complex) => 2 * q,
    };
    blocks * n * (n + 1) / 2
}

impl StructVar {
    /// Declares the blocks of a variable, its symmetry rows and, when
    /// `ns_rows` is set, `f_β = 0` for every canonical key in the
    /// no-signaling zero set.
    pub fn declare(b: &mut Builder, layout: Layout, ns_rows: bool) -> StructVar {
        let real = b.field() == Field::Real;
        let qf = layout.quantum_factors();
        let qdims: Vec<usize> = qf.iter().map(|&f| layout.dims[f]).collect();
        let q: usize = qdims.iter().product();
        let kind = match (q, real) {
            (1, _) => BlockKind::Scalar,
            (q, true) => BlockKind::Real(q),
            (q, false) => BlockKind::Complex(q),
        };
        let perms = permutations(layout.copies.len());
        let mut blocks = Vec::new();
        let mut stabilizers = Vec::new();
        for c0 in classical_tuples(&layout).into_iter().filter(|c| is_canonical_tuple(&layout, c)) {
            let mut orbit: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
            let mut stab = Vec::new();
            for p in &perms {
                let c = apply_tuple(&layout, &c0, p);
                if c == c0 {
                    stab.push(factor_map(&layout, p));
                }
                if !orbit.iter().any(|(t, _)| *t == c) {
                    orbit.push((c, factor_map(&layout, p)));
                }
            }
            let cone = match kind {
                BlockKind::Scalar => Cone::NonNeg(1),
                BlockKind::Real(q) => Cone::Psd(q),
                BlockKind::Complex(q) => Cone::Psd(2 * q),
            };
            let prog_block = b.program_mut().add_block(cone);
            blocks.push(VarBlock { orbit, kind, prog_block });
            stabilizers.push(stab);
        }
        let var = StructVar { layout, qf, qdims, blocks, real, ns_rows };
        for (bi, stab) in stabilizers.iter().enumerate() {
            if stab.len() > 1 && q > 1 {
                var.emit_stabilizer_rows(b, bi, stab);
            }
        }
        if ns_rows && !var.layout.parties.is_empty() {
            for key in var.canonical_keys() {
                if var.layout.in_zero_set(&key) {
                    let e = var.raw_functional(b, &key);
                    b.add_row(e, 0.0);
                }
            }
        }
        var
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    fn local_keys(&self) -> Vec<Vec<Label>> {
        let mut out: Vec<Vec<Label>> = vec![Vec::new()];
        for &d in &self.qdims {
            let labels = Label::all(d, false);
            let mut next = Vec::with_capacity(out.len() * labels.len());
            for k in &out {
                for &l in &labels {
                    let mut k2 = k.clone();
                    k2.push(l);
                    next.push(k2);
                }
            }
            out = next;
        }
        if self.real {
            out.retain(|k| antisym_count(k).is_multiple_of(2));
        }
        out
    }

    /// Local key of the stored block seen through a factor map.
    fn map_local(&self, key_local: &[Label], fmap: &[usize]) -> Vec<Label> {
        let mut full = vec![Label::I; self.layout.dims.len()];
        for (i, &f) in self.qf.iter().enumerate() {
            full[fmap[f]] = key_local[i];
        }
        self.qf.iter().map(|&f| full[f]).collect()
    }

    fn emit_stabilizer_rows(&self, b: &mut Builder, bi: usize, stab: &[Vec<usize>]) {
        let mut seen = BTreeSet::new();
        for k in self.local_keys() {
            if seen.contains(&k) {
                continue;
            }
            let orbit: BTreeSet<Vec<Label>> = stab.iter().map(|fm| self.map_local(&k, fm)).collect();
            let rep = orbit.iter().next().expect("nonempty").clone();
            let base = self.local_functional(b, bi, &rep);
            for other in orbit.iter().skip(1) {
                let e = self.local_functional(b, bi, other);
                let row = normalize(base.iter().copied().chain(e.iter().map(|&(c, v)| (c, -v))).collect());
                b.add_row(row, 0.0);
            }
            seen.extend(orbit);
        }
    }

    /// `tr(β V_c0)` for a local key over the quantum factors of a block.
    fn local_functional(&self, b: &Builder, bi: usize, key_local: &[Label]) -> LinExpr {
        let blk = &self.blocks[bi];
        let p = b.program();
        let mut out = Vec::new();
        for (r, c, v) in key_entries(key_local, &self.qdims) {
            let (r, c) = (join(&r, &self.qdims), join(&c, &self.qdims));
            match blk.kind {
                BlockKind::Scalar => out.push((p.coord(blk.prog_block, 0), v.re)),
                BlockKind::Real(_) => out.push((p.psd_coord(blk.prog_block, c, r), v.re)),
                BlockKind::Complex(q) => {
                    out.push((p.psd_coord(blk.prog_block, c, r), 0.5 * v.re));
                    out.push((p.psd_coord(blk.prog_block, q + c, q + r), 0.5 * v.re));
                    out.push((p.psd_coord(blk.prog_block, q + c, r), -0.5 * v.im));
                    out.push((p.psd_coord(blk.prog_block, c, q + r), 0.5 * v.im));
                }
            }
        }
        normalize(out)
    }

    /// `f_β(V)` with no structural shortcuts.
    pub fn raw_functional(&self, b: &Builder, key: &[Label]) -> LinExpr {
        if self.real && antisym_count(key) % 2 == 1 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cache: HashMap<Vec<Label>, LinExpr> = HashMap::new();
        for (bi, blk) in self.blocks.iter().enumerate() {
            cache.clear();
            for (c, fmap) in &blk.orbit {
                let coef: f64 = (0..key.len())
                    .filter(|&f| self.layout.classical[f])
                    .map(|f| label_diag(key[f], c[f]))
                    .product();
                if coef == 0.0 {
                    continue;
                }
                let mut local = vec![Label::I; self.qf.len()];
                for (i, &f) in self.qf.iter().enumerate() {
                    let target = self.qf.iter().position(|&g| g == fmap[f]).expect("quantum factor");
                    local[target] = key[self.qf[i]];
                }
                let e = cache.entry(local.clone()).or_insert_with(|| self.local_functional(b, bi, &local));
                out.extend(e.iter().map(|&(k, v)| (k, v * coef)));
            }
        }
        normalize(out)
    }

    /// `f_β(V)`, empty when rows already pin it to zero.
    pub fn functional(&self, b: &Builder, key: &[Label]) -> LinExpr {
        let key = self.layout.canonical(key);
        if self.ns_rows && self.layout.in_zero_set(&key) {
            return Vec::new();
        }
        self.raw_functional(b, &key)
    }

    /// Canonical keys with diagonal labels on classical factors; imaginary
    /// keys are dropped in the real field.
    pub fn canonical_keys(&self) -> Vec<Key> {
        let flags = &self.layout.classical;
        crate::basis::all_keys(&self.layout.dims, flags, self.real)
            .into_iter()
            .filter(|k| self.layout.canonical(k) == *k)
            .collect()
    }

    /// The full operator at a primal point, assembled from functionals.
    pub fn operator(&self, b: &Builder, x: &[f64]) -> CMatrix {
        let keys = crate::basis::all_keys(&self.layout.dims, &self.layout.classical, self.real);
        let vals: Vec<(Key, f64)> = keys
            .into_iter()
            .map(|k| {
                let v = super::evaluate(&self.raw_functional(b, &k), x);
                (k, v)
            })
            .collect();
        crate::basis::reconstruct(&self.layout.dims, &vals)
    }

    /// Stored blocks as Hermitian matrices on the quantum factors.
    pub fn block_values(&self, b: &Builder, x: &[f64]) -> Vec<CMatrix> {
        let p = b.program();
        self.blocks
            .iter()
            .map(|blk| {
                let z = |i: usize, j: usize| x[p.psd_coord(blk.prog_block, i, j)];
                match blk.kind {
                    BlockKind::Scalar => CMatrix::diag(&[x[p.coord(blk.prog_block, 0)]]),
                    BlockKind::Real(q) => CMatrix::from_fn(q, q, |i, j| C64::new(z(i, j), 0.0)),
                    BlockKind::Complex(q) => CMatrix::from_fn(q, q, |i, j| {
                        C64::new(0.5 * (z(i, j) + z(q + i, q + j)), 0.5 * (z(q + i, j) - z(i, q + j)))
                    }),
                }
            })
            .collect()
    }
}
