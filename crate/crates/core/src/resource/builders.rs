//! Constructors for states, boxes, assemblages and the distributed Bell
//! measurement, plus the standard measurements used with them.

use std::f64::consts::PI;

use super::{ChoiResource, Measurement, ResourceError, ResourceSpec, SystemKind, SystemSpec, VALIDATION_TOL};
use crate::hermitian::{kron, pauli, partial_trace, CMatrix, TensorShape, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_density(rho: &CMatrix) -> Result<(), ResourceError> {
    if !rho.is_square() {
        return Err(ResourceError::NotDensity("not square".into()));
    }
    if !rho.is_hermitian(VALIDATION_TOL) {
        return Err(ResourceError::NotDensity("not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > VALIDATION_TOL {
        return Err(ResourceError::NotDensity(format!("trace {tr}")));
    }
    let lmin = rho.min_eigenvalue()?;
    if lmin < -VALIDATION_TOL {
        return Err(ResourceError::NotDensity(format!("eigenvalue {lmin:e}")));
    }
    Ok(())
}

/// A bipartite state as a resource of type `II→QQ`.
pub fn make_state_resource(rho: &CMatrix, d_a: usize, d_b: usize) -> Result<ChoiResource, ResourceError> {
    if rho.rows() != d_a * d_b {
        return Err(ResourceError::Dimension(format!("state of dimension {} is not {d_a}x{d_b}", rho.rows())));
    }
    check_density(rho)?;
    let spec = ResourceSpec::new(
        SystemSpec::new(d_a, SystemKind::Quantum)?,
        SystemSpec::new(d_b, SystemKind::Quantum)?,
        SystemSpec::trivial(),
        SystemSpec::trivial(),
    );
    ChoiResource::new(spec, rho.hermitian_part())
}

/// The state `Σ λ_i |ii⟩` from Schmidt coefficients.
pub fn make_pure_state(coeffs: &[f64]) -> Result<ChoiResource, ResourceError> {
    let d = coeffs.len();
    if d == 0 || coeffs.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(ResourceError::Schmidt(format!("{coeffs:?}")));
    }
    let n2: f64 = coeffs.iter().map(|l| l * l).sum();
    if (n2 - 1.0).abs() > VALIDATION_TOL {
        return Err(ResourceError::Schmidt(format!("squares sum to {n2}")));
    }
    let mut v = vec![c(0.0); d * d];
    for (i, &l) in coeffs.iter().enumerate() {
        v[i * d + i] = c(l);
    }
    make_state_resource(&CMatrix::outer(&v), d, d)
}

/// Conditional distribution `P(a, b | x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxTable {
    dims: [usize; 4],
    p: Vec<f64>,
}

impl BoxTable {
    /// Builds a table from `f(a, b, x, y)` without validation.
    pub fn from_fn(da: usize, db: usize, dx: usize, dy: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut p = Vec::with_capacity(da * db * dx * dy);
        for a in 0..da {
            for b in 0..db {
                for x in 0..dx {
                    for y in 0..dy {
                        p.push(f(a, b, x, y));
                    }
                }
            }
        }
        BoxTable { dims: [da, db, dx, dy], p }
    }

    /// Parses nested `[a][b][x][y]` arrays.
    pub fn from_nested(p: &[Vec<Vec<Vec<f64>>>]) -> Result<Self, ResourceError> {
        let da = p.len();
        let db = p.first().map_or(0, |v| v.len());
        let dx = p.first().and_then(|v| v.first()).map_or(0, |v| v.len());
        let dy = p.first().and_then(|v| v.first()).and_then(|v| v.first()).map_or(0, |v| v.len());
        if da * db * dx * dy == 0 {
            return Err(ResourceError::InvalidBox("empty table".into()));
        }
        for pa in p {
            if pa.len() != db || pa.iter().any(|pb| pb.len() != dx || pb.iter().any(|px| px.len() != dy)) {
                return Err(ResourceError::InvalidBox("ragged table".into()));
            }
        }
        Ok(Self::from_fn(da, db, dx, dy, |a, b, x, y| p[a][b][x][y]))
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        let [da, db, dx, dy] = self.dims;
        (0..da)
            .map(|a| (0..db).map(|b| (0..dx).map(|x| (0..dy).map(|y| self.get(a, b, x, y)).collect()).collect()).collect())
            .collect()
    }

    /// `[d_A, d_B, d_X, d_Y]`.
    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        let [_, db, dx, dy] = self.dims;
        self.p[((a * db + b) * dx + x) * dy + y]
    }

    /// Largest deviation from normalization, positivity and no-signaling.
    pub fn check(&self) -> Result<(), ResourceError> {
        let [da, db, dx, dy] = self.dims;
        let tol = VALIDATION_TOL;
        if let Some(v) = self.p.iter().find(|&&v| v < -tol || !v.is_finite()) {
            return Err(ResourceError::InvalidBox(format!("negative or non-finite entry {v}")));
        }
        for x in 0..dx {
            for y in 0..dy {
                let s: f64 = (0..da).flat_map(|a| (0..db).map(move |b| (a, b))).map(|(a, b)| self.get(a, b, x, y)).sum();
                if (s - 1.0).abs() > tol {
                    return Err(ResourceError::InvalidBox(format!("P(·|{x},{y}) sums to {s}")));
                }
            }
        }
        for x in 0..dx {
            for a in 0..da {
                let m: Vec<f64> = (0..dy).map(|y| (0..db).map(|b| self.get(a, b, x, y)).sum()).collect();
                if m.iter().any(|v| (v - m[0]).abs() > tol) {
                    return Err(ResourceError::InvalidBox(format!("marginal of a={a} at x={x} depends on y")));
                }
            }
        }
        for y in 0..dy {
            for b in 0..db {
                let m: Vec<f64> = (0..dx).map(|x| (0..da).map(|a| self.get(a, b, x, y)).sum()).collect();
                if m.iter().any(|v| (v - m[0]).abs() > tol) {
                    return Err(ResourceError::InvalidBox(format!("marginal of b={b} at y={y} depends on x")));
                }
            }
        }
        Ok(())
    }

    /// Diagonal Choi matrix with entries `P(ab|xy)/(d_X d_Y)`, no checks.
    pub fn choi_unchecked(&self) -> ChoiResource {
        let [da, db, dx, dy] = self.dims;
        let spec = ResourceSpec::new(
            SystemSpec::classical(da),
            SystemSpec::classical(db),
            SystemSpec::classical(dx),
            SystemSpec::classical(dy),
        );
        let norm = 1.0 / (dx * dy) as f64;
        ChoiResource::new(spec, CMatrix::diag(&self.p.iter().map(|v| v * norm).collect::<Vec<_>>()))
            .expect("dimensions agree")
    }
}

/// A `CC→CC` resource from a validated no-signaling box.
pub fn make_box(p: &BoxTable) -> Result<ChoiResource, ResourceError> {
    p.check()?;
    Ok(p.choi_unchecked())
}

/// Reads the box back out of a resource whose four systems are all
/// classical or trivial.
pub fn box_of(r: &ChoiResource) -> Result<BoxTable, ResourceError> {
    if !r.spec().diagonal_flags().iter().all(|&d| d) {
        return Err(ResourceError::Dimension(format!("{} is not a box", r.spec().type_string())));
    }
    let [da, db, dx, dy] = r.spec().dims();
    let shape = r.spec().shape();
    let scale = (dx * dy) as f64;
    Ok(BoxTable::from_fn(da, db, dx, dy, |a, b, x, y| {
        let i = shape.join(&[a, b, x, y]);
        r.choi()[(i, i)].re * scale
    }))
}

fn measure_dims(ms: &[Measurement]) -> Result<(usize, usize), ResourceError> {
    let Some(m0) = ms.first() else {
        return Err(ResourceError::Measurement("no measurements".into()));
    };
    let (d, k) = (m0.dim(), m0.num_outcomes());
    if ms.iter().any(|m| m.dim() != d || m.num_outcomes() != k) {
        return Err(ResourceError::Measurement("measurements differ in dimension or outcome count".into()));
    }
    Ok((d, k))
}

/// Alice measures her half of `rho`; the resource maps her classical
/// choice `x` to `Σ_a |a⟩⟨a| ⊗ tr_A[(M_{a|x} ⊗ I) ρ]`, type `CI→CQ`.
pub fn assemblage_from_state(rho: &CMatrix, alice: &[Measurement]) -> Result<ChoiResource, ResourceError> {
    let (dap, ka) = measure_dims(alice)?;
    if !rho.rows().is_multiple_of(dap) {
        return Err(ResourceError::Dimension(format!("state dimension {} not divisible by {dap}", rho.rows())));
    }
    check_density(rho)?;
    let db = rho.rows() / dap;
    let dx = alice.len();
    let spec = ResourceSpec::new(
        SystemSpec::new(ka, SystemKind::Classical)?,
        SystemSpec::new(db, SystemKind::Quantum)?,
        SystemSpec::new(dx, SystemKind::Classical)?,
        SystemSpec::trivial(),
    );
    let shape = TensorShape::new(vec![dap, db])?;
    let d = ka * db * dx;
    let mut j = CMatrix::zeros(d, d);
    for (x, m) in alice.iter().enumerate() {
        for (a, e) in m.outcomes().iter().enumerate() {
            let op = &kron(e, &CMatrix::identity(db)) * rho;
            let sigma = partial_trace(&op, &shape, &[1])?;
            for r in 0..db {
                for col in 0..db {
                    j[((a * db + r) * dx + x, (a * db + col) * dx + x)] = sigma[(r, col)] / dx as f64;
                }
            }
        }
    }
    ChoiResource::new(spec, j.hermitian_part())
}

/// Both parties measure `rho`: `P(ab|xy) = tr[(M_{a|x} ⊗ N_{b|y}) ρ]`.
pub fn box_from_state(rho: &CMatrix, alice: &[Measurement], bob: &[Measurement]) -> Result<ChoiResource, ResourceError> {
    make_box(&box_table_from_state(rho, alice, bob)?)
}

pub fn box_table_from_state(rho: &CMatrix, alice: &[Measurement], bob: &[Measurement]) -> Result<BoxTable, ResourceError> {
    let (dap, ka) = measure_dims(alice)?;
    let (dbp, kb) = measure_dims(bob)?;
    if rho.rows() != dap * dbp {
        return Err(ResourceError::Dimension(format!("state dimension {} is not {dap}x{dbp}", rho.rows())));
    }
    check_density(rho)?;
    let mut probs = vec![0.0; ka * kb * alice.len() * bob.len()];
    let (dx, dy) = (alice.len(), bob.len());
    for a in 0..ka {
        for b in 0..kb {
            for x in 0..dx {
                for y in 0..dy {
                    let op = kron(&alice[x].outcomes()[a], &bob[y].outcomes()[b]);
                    probs[((a * kb + b) * dx + x) * dy + y] = (&op * rho).trace().re;
                }
            }
        }
    }
    Ok(BoxTable::from_fn(ka, kb, dx, dy, |a, b, x, y| probs[((a * kb + b) * dx + x) * dy + y]))
}

/// Bob measures the quantum output of an assemblage (`CI→CQ`), producing
/// the box `P(ab|xy) = tr[N_{b|y} σ_{a|x}]`.
pub fn measure_assemblage(asm: &ChoiResource, bob: &[Measurement]) -> Result<ChoiResource, ResourceError> {
    let spec = asm.spec();
    if !(spec.a.is_diagonal() && spec.x.is_diagonal() && spec.y.is_trivial()) {
        return Err(ResourceError::Dimension(format!("{} is not an assemblage", spec.type_string())));
    }
    let [da, db, dx, _] = spec.dims();
    let (dbp, kb) = measure_dims(bob)?;
    if dbp != db {
        return Err(ResourceError::Dimension(format!("measurement on {dbp} levels, output has {db}")));
    }
    let j = asm.choi();
    let table = BoxTable::from_fn(da, kb, dx, bob.len(), |a, b, x, y| {
        let n = &bob[y].outcomes()[b];
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..db {
            for col in 0..db {
                acc += n[(col, r)] * j[((a * db + r) * dx + x, (a * db + col) * dx + x)];
            }
        }
        acc.re * dx as f64
    });
    make_box(&table)
}

/// `|Ψ⁻⟩ = (|01⟩ − |10⟩)/√2` as a density matrix.
pub fn singlet() -> CMatrix {
    psi_alpha(PI / 4.0)
}

/// `|ψ_α⟩ = cos α |01⟩ − sin α |10⟩`.
pub fn psi_alpha(alpha: f64) -> CMatrix {
    CMatrix::outer(&[c(0.0), c(alpha.cos()), c(-alpha.sin()), c(0.0)])
}

pub fn singlet_resource() -> ChoiResource {
    make_state_resource(&singlet(), 2, 2).expect("valid state")
}

/// Eigenbasis measurement of σ₁ (`|±⟩`), σ₃ (`|0⟩, |1⟩`) or σ₂ (`|±i⟩`);
/// outcome 0 is the +1 eigenvector.
pub fn pauli_measurement(axis: usize) -> Measurement {
    let r = 1.0 / 2f64.sqrt();
    let kets = match axis {
        1 => vec![vec![c(r), c(r)], vec![c(r), c(-r)]],
        2 => vec![vec![c(r), C64::new(0.0, r)], vec![c(r), C64::new(0.0, -r)]],
        _ => vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]],
    };
    Measurement::projective(&kets).expect("orthonormal basis")
}

/// Alice's X, Z (and optionally Y) basis measurements.
pub fn xz_measurements(with_y: bool) -> Vec<Measurement> {
    let mut v = vec![pauli_measurement(1), pauli_measurement(3)];
    if with_y {
        v.push(pauli_measurement(2));
    }
    v
}

/// Bob's measurement `B_{b|y} = (I + (−1)^b (sin θ σ₁ + cos θ σ₃))/2`.
pub fn angle_measurement(theta: f64) -> Measurement {
    let n = &pauli(1).scale(theta.sin()) + &pauli(3).scale(theta.cos());
    let id = CMatrix::identity(2);
    Measurement::new(vec![(&id + &n).scale(0.5), (&id - &n).scale(0.5)]).expect("projective")
}

/// Bob's two settings `θ₀` and `θ₁ = π − θ₀`.
pub fn angle_pair(theta0: f64) -> Vec<Measurement> {
    vec![angle_measurement(theta0), angle_measurement(PI - theta0)]
}

/// Bob's bases `{c|0⟩+s|1⟩, s|0⟩−c|1⟩}` and `{s|0⟩+c|1⟩, c|0⟩−s|1⟩}` with
/// `c = cos π/8`, `s = sin π/8`, outcomes in the listed order.
pub fn tsirelson_bob_bases() -> Vec<Measurement> {
    let (co, si) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    vec![
        Measurement::projective(&[vec![c(co), c(si)], vec![c(si), c(-co)]]).expect("basis"),
        Measurement::projective(&[vec![c(si), c(co)], vec![c(co), c(-si)]]).expect("basis"),
    ]
}

/// Bob's settings relabeled (`b ↦ 1 − b`) so that the singlet yields
/// `P(ab|xy) = (1 + (−1)^{a+b+xy}/√2)/4`.
pub fn tsirelson_bob_measurements() -> Vec<Measurement> {
    tsirelson_bob_bases().iter().map(Measurement::relabeled_reversed).collect()
}

/// `P(ab|xy) = (1 + (−1)^{a+b+xy}/√2)/4`.
pub fn tsirelson_table() -> BoxTable {
    let r = 1.0 / 2f64.sqrt();
    BoxTable::from_fn(2, 2, 2, 2, |a, b, x, y| (1.0 + sign(a + b + x * y) * r) / 4.0)
}

/// `P(ab|xy) = δ_{a⊕b, xy}/2`.
pub fn pr_table() -> BoxTable {
    BoxTable::from_fn(2, 2, 2, 2, |a, b, x, y| if (a ^ b) == (x & y) { 0.5 } else { 0.0 })
}

pub fn uniform_table() -> BoxTable {
    BoxTable::from_fn(2, 2, 2, 2, |_, _, _, _| 0.25)
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn tsirelson_box() -> ChoiResource {
    make_box(&tsirelson_table()).expect("no-signaling")
}

pub fn pr_box() -> ChoiResource {
    make_box(&pr_table()).expect("no-signaling")
}

pub fn uniform_box() -> ChoiResource {
    make_box(&uniform_table()).expect("no-signaling")
}

/// Singlet assemblage for Alice's X, Z (and optionally Y) measurements.
pub fn singlet_assemblage(with_y: bool) -> ChoiResource {
    assemblage_from_state(&singlet(), &xz_measurements(with_y)).expect("valid assemblage")
}

/// POVM element `E_ab = (σ_a⊗σ_b)|Ψ⁻⟩⟨Ψ⁻|(σ_a⊗σ_b)/4` on the two inputs.
pub fn bm2_element(a: usize, b: usize) -> CMatrix {
    let s = &kron(&pauli(a), &pauli(b));
    let r = 1.0 / 2f64.sqrt();
    let psi = CMatrix::outer(&[c(0.0), c(r), c(-r), c(0.0)]);
    (&(s * &psi) * &s.adjoint()).scale(0.25)
}

/// The distributed Bell measurement: inputs ξ on X and ψ on Y, outputs
/// `(a, b)` with probability `⟨Ψ⁻|(σ_a ξ σ_a)⊗(σ_b ψ σ_b)|Ψ⁻⟩/4`.
///
/// Type `QQ→CC` with `d_A = d_B = 4`, `d_X = d_Y = 2`; the Choi state is
/// `Σ_ab |a⟩⟨a| ⊗ |b⟩⟨b| ⊗ E_abᵀ / 4`.
pub fn bm2_distributed_povm() -> ChoiResource {
    let spec = ResourceSpec::new(
        SystemSpec::classical(4),
        SystemSpec::classical(4),
        SystemSpec::quantum(2),
        SystemSpec::quantum(2),
    );
    let mut j = CMatrix::zeros(64, 64);
    for a in 0..4 {
        for b in 0..4 {
            let et = bm2_element(a, b).transpose();
            let base = (a * 4 + b) * 4;
            for r in 0..4 {
                for col in 0..4 {
                    j[(base + r, base + col)] = et[(r, col)] * 0.25;
                }
            }
        }
    }
    ChoiResource::new(spec, j).expect("dimensions agree")
}

/// Output distribution of the distributed Bell measurement on `ξ ⊗ ψ`.
pub fn bm2_action(xi: &CMatrix, psi: &CMatrix) -> [[f64; 4]; 4] {
    let input = kron(xi, psi);
    let mut out = [[0.0; 4]; 4];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = (&bm2_element(a, b) * &input).trace().re;
        }
    }
    out
}

/// Choi state of a single-party measure-and-prepare channel from a
/// `d_in`-level input to a classical outcome, given its POVM, in the
/// order outcome ⊗ input.
pub fn povm_choi(m: &Measurement) -> CMatrix {
    let (d, k) = (m.dim(), m.num_outcomes());
    let mut j = CMatrix::zeros(k * d, k * d);
    for (o, e) in m.outcomes().iter().enumerate() {
        let et = e.transpose();
        for r in 0..d {
            for col in 0..d {
                j[(o * d + r, o * d + col)] = et[(r, col)] / d as f64;
            }
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resource::{validate, Constraint};

    #[test]
    fn singlet_is_valid() {
        assert!(validate(&singlet_resource()).unwrap().is_valid());
    }

    #[test]
    fn tsirelson_box_is_valid() {
        assert!(validate(&tsirelson_box()).unwrap().is_valid());
    }

    #[test]
    fn signaling_box_reports_half() {
        let t = BoxTable::from_fn(2, 2, 2, 2, |a, b, _, y| if a == y && b == 0 { 1.0 } else { 0.0 });
        let r = t.choi_unchecked();
        let rep = validate(&r).unwrap();
        let res = rep.residual(Constraint::NoSignalingToA).expect("violation reported");
        assert!((res - 0.5).abs() < 1e-12, "{res}");
        assert!(make_box(&t).is_err());
    }

    #[test]
    fn psi_alpha_zero_is_product() {
        let r = make_state_resource(&psi_alpha(0.0), 2, 2).unwrap();
        let expect = CMatrix::diag(&[0.0, 1.0, 0.0, 0.0]);
        assert!(r.choi().dist_max(&expect) < 1e-15);
    }

    #[test]
    fn maximally_mixed_state_is_valid() {
        let r = make_state_resource(&CMatrix::identity(4).scale(0.25), 2, 2).unwrap();
        assert!(validate(&r).unwrap().is_valid());
    }

    #[test]
    fn pure_state_from_schmidt() {
        let r = 1.0 / 2f64.sqrt();
        let s = make_pure_state(&[r, r]).unwrap();
        assert!(validate(&s).unwrap().is_valid());
        let p = make_pure_state(&[1.0, 0.0]).unwrap();
        assert!(p.choi().dist_max(&CMatrix::diag(&[1.0, 0.0, 0.0, 0.0])) < 1e-15);
        assert!(make_pure_state(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn pure_state_matches_psi_alpha_up_to_relabeling() {
        let al: f64 = 0.3;
        let s = make_pure_state(&[al.cos(), al.sin()]).unwrap();
        // |ψ_α⟩ with Bob's basis flipped and a phase on |1⟩_A
        let flip = kron(&pauli(3), &pauli(1));
        let t = &(&flip * &psi_alpha(al)) * &flip.adjoint();
        assert!(s.choi().dist_max(&t) < 1e-15);
    }

    #[test]
    fn singlet_with_listed_bob_bases_flips_the_sign() {
        let t = box_table_from_state(&singlet(), &xz_measurements(false), &tsirelson_bob_bases()).unwrap();
        let r = 1.0 / 2f64.sqrt();
        for (a, b, x, y) in quad() {
            let expect = (1.0 - sign(a + b + x * y) * r) / 4.0;
            assert!((t.get(a, b, x, y) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_with_relabeled_bob_gives_tsirelson() {
        let t = box_table_from_state(&singlet(), &xz_measurements(false), &tsirelson_bob_measurements()).unwrap();
        let ts = tsirelson_table();
        for (a, b, x, y) in quad() {
            assert!((t.get(a, b, x, y) - ts.get(a, b, x, y)).abs() < 1e-12);
        }
    }

    fn quad() -> impl Iterator<Item = (usize, usize, usize, usize)> {
        (0..16).map(|k| (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1))
    }

    #[test]
    fn xzy_assemblage_first_input() {
        // input x = 0 (X basis): (|0−⟩⟨0−| + |1+⟩⟨1+|)/2 on A ⊗ B
        let asm = singlet_assemblage(true);
        assert!(validate(&asm).unwrap().is_valid());
        let r = 1.0 / 2f64.sqrt();
        let minus = CMatrix::outer(&[c(r), c(-r)]);
        let plus = CMatrix::outer(&[c(r), c(r)]);
        let e0 = CMatrix::diag(&[1.0, 0.0]);
        let e1 = CMatrix::diag(&[0.0, 1.0]);
        let expect = (&kron(&e0, &minus) + &kron(&e1, &plus)).scale(0.5);
        let j = asm.choi();
        for row in 0..4 {
            for col in 0..4 {
                let got = j[(row * 3, col * 3)] * 3.0;
                assert!((got - expect[(row, col)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conversion_chain_reproduces_box() {
        let asm = singlet_assemblage(false);
        let bob = tsirelson_bob_measurements();
        let via = measure_assemblage(&asm, &bob).unwrap();
        let direct = box_from_state(&singlet(), &xz_measurements(false), &bob).unwrap();
        assert!(via.choi().dist_max(direct.choi()) < 1e-12);
    }

    #[test]
    fn bm2_on_maximally_mixed_inputs_is_uniform() {
        let h = CMatrix::identity(2).scale(0.5);
        let p = bm2_action(&h, &h);
        for row in p {
            for v in row {
                assert!((v - 1.0 / 16.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bm2_on_basis_product_sums_to_one() {
        let p = bm2_action(&CMatrix::diag(&[1.0, 0.0]), &CMatrix::diag(&[0.0, 1.0]));
        let total: f64 = p.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-14);
        // |01⟩ overlaps |Ψ⁻⟩ with weight 1/2 whenever σ_a ⊗ σ_b maps it into
        // span{|01⟩, |10⟩}: weights are 1/8 on the 8 such pairs.
        for (a, row) in p.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                let flip = |k: usize| k == 1 || k == 2;
                let expect = if flip(a) == flip(b) { 0.125 } else { 0.0 };
                assert!((v - expect).abs() < 1e-14, "{a} {b} {v}");
            }
        }
    }

    #[test]
    fn bm2_choi_is_valid_and_diagonal_in_outputs() {
        let r = bm2_distributed_povm();
        assert!(validate(&r).unwrap().is_valid());
        let j = r.choi();
        for row in 0..64 {
            for col in 0..64 {
                if row / 4 != col / 4 {
                    assert_eq!(j[(row, col)], c(0.0));
                }
            }
        }
    }

    #[test]
    fn trivial_measurements_give_deterministic_box() {
        let m = vec![Measurement::trivial(2)];
        let r = box_from_state(&singlet(), &m, &m).unwrap();
        assert_eq!(r.spec().total_dim(), 1);
        assert!((r.choi()[(0, 0)].re - 1.0).abs() < 1e-15);
    }
}
