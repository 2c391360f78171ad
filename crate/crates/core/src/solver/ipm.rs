//! Homogeneous self-dual interior-point method with Nesterov-Todd scaling
//! and Mehrotra predictor-corrector steps.
//!
//! The embedding solved is
//!
//! ```text
//!  A x - b τ = 0,   -Aᵀy - s + c τ = 0,   bᵀy - cᵀx - κ = 0,
//!  x, s ∈ K,  τ, κ ≥ 0,
//! ```
//!
//! so that `τ > 0` at the limit yields an optimal pair and `κ > 0` yields
//! an infeasibility certificate.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::{Cone, ConicProgram, InfeasibilityCertificate, Residuals, SolveResult, SolveStatus};

#[derive(Clone, Debug, PartialEq)]
pub struct IpmSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for IpmSettings {
    fn default() -> Self {
        IpmSettings { tol: super::DEFAULT_TOL, max_iter: super::DEFAULT_MAX_ITER, step_fraction: 0.99 }
    }
}

#[derive(Clone, Copy, Debug)]
enum Loc {
    Lp(usize),
    Split(usize, usize),
    Psd(usize, usize, usize),
}

struct PsdData {
    n: usize,
    c: Mat<f64>,
    /// Global rows touching this block, ascending.
    rows: Vec<usize>,
    /// Per touching row: `(i, j, v)` with `i ≤ j`, meaning `v·X[i][j]`.
    entries: Vec<Vec<(usize, usize, f64)>>,
}

struct Problem {
    m: usize,
    b: Vec<f64>,
    nl: usize,
    lp_cols: Vec<Vec<(usize, f64)>>,
    c_lp: Vec<f64>,
    psd: Vec<PsdData>,
    loc: Vec<Loc>,
    nu: f64,
}

#[derive(Clone)]
struct Vars {
    lp: Vec<f64>,
    psd: Vec<Mat<f64>>,
}

impl Vars {
    fn zeros(p: &Problem) -> Self {
        Vars { lp: vec![0.0; p.nl], psd: p.psd.iter().map(|b| Mat::zeros(b.n, b.n)).collect() }
    }

    fn identity(p: &Problem) -> Self {
        Vars { lp: vec![1.0; p.nl], psd: p.psd.iter().map(|b| Mat::identity(b.n, b.n)).collect() }
    }

    fn dot(&self, o: &Vars) -> f64 {
        let mut s: f64 = self.lp.iter().zip(&o.lp).map(|(a, b)| a * b).sum();
        for (a, b) in self.psd.iter().zip(&o.psd) {
            s += frob(a, b);
        }
        s
    }

    /// self += a·o
    fn axpy(&mut self, a: f64, o: &Vars) {
        for (x, y) in self.lp.iter_mut().zip(&o.lp) {
            *x += a * y;
        }
        for (x, y) in self.psd.iter_mut().zip(&o.psd) {
            let n = x.nrows();
            for j in 0..n {
                for i in 0..n {
                    x[(i, j)] += a * y[(i, j)];
                }
            }
        }
    }

    fn scaled(&self, a: f64) -> Vars {
        let mut z = self.clone();
        for x in z.lp.iter_mut() {
            *x *= a;
        }
        for m in z.psd.iter_mut() {
            let n = m.nrows();
            for j in 0..n {
                for i in 0..n {
                    m[(i, j)] *= a;
                }
            }
        }
        z
    }

    fn norm_inf(&self) -> f64 {
        let mut r = self.lp.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for m in &self.psd {
            let n = m.nrows();
            for j in 0..n {
                for i in 0..n {
                    r = r.max(m[(i, j)].abs());
                }
            }
        }
        r
    }
}

fn frob(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}

fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn mm(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    a * b
}

fn diag_scale(d: &[f64], m: &Mat<f64>, left: bool) -> Mat<f64> {
    let n = m.nrows();
    let k = m.ncols();
    Mat::from_fn(n, k, |i, j| if left { d[i] * m[(i, j)] } else { m[(i, j)] * d[j] })
}

impl Problem {
    fn build(p: &ConicProgram) -> Self {
        let mut loc = Vec::with_capacity(p.num_vars());
        let mut nl = 0;
        let mut psd: Vec<PsdData> = Vec::new();
        let mut nu = 0.0;
        for cone in p.blocks() {
            match *cone {
                Cone::Free(n) => {
                    for _ in 0..n {
                        loc.push(Loc::Split(nl, nl + 1));
                        nl += 2;
                    }
                    nu += 2.0 * n as f64;
                }
                Cone::NonNeg(n) => {
                    for _ in 0..n {
                        loc.push(Loc::Lp(nl));
                        nl += 1;
                    }
                    nu += n as f64;
                }
                Cone::Psd(n) => {
                    let bi = psd.len();
                    for k in 0..n * (n + 1) / 2 {
                        let (i, j) = super::psd_entry(k);
                        loc.push(Loc::Psd(bi, i, j));
                    }
                    psd.push(PsdData { n, c: Mat::zeros(n, n), rows: Vec::new(), entries: Vec::new() });
                    nu += n as f64;
                }
            }
        }
        let mut lp_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nl];
        let mut c_lp = vec![0.0; nl];
        for (k, v) in p.objective_dense().into_iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            match loc[k] {
                Loc::Lp(i) => c_lp[i] += v,
                Loc::Split(a, b) => {
                    c_lp[a] += v;
                    c_lp[b] -= v;
                }
                Loc::Psd(bi, i, j) => {
                    let c = &mut psd[bi].c;
                    if i == j {
                        c[(i, i)] += v;
                    } else {
                        c[(i, j)] += 0.5 * v;
                        c[(j, i)] += 0.5 * v;
                    }
                }
            }
        }
        let m = p.num_rows();
        let mut b = Vec::with_capacity(m);
        for (r, row) in p.rows().iter().enumerate() {
            b.push(row.rhs);
            let mut terms = row.terms.clone();
            terms.sort_by_key(|t| t.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
            for (k, v) in terms {
                match merged.last_mut() {
                    Some(last) if last.0 == k => last.1 += v,
                    _ => merged.push((k, v)),
                }
            }
            for (k, v) in merged {
                if v == 0.0 {
                    continue;
                }
                match loc[k] {
                    Loc::Lp(i) => lp_cols[i].push((r, v)),
                    Loc::Split(a, bb) => {
                        lp_cols[a].push((r, v));
                        lp_cols[bb].push((r, -v));
                    }
                    Loc::Psd(bi, i, j) => {
                        let blk = &mut psd[bi];
                        if blk.rows.last() != Some(&r) {
                            blk.rows.push(r);
                            blk.entries.push(Vec::new());
                        }
                        blk.entries.last_mut().unwrap().push((i, j, v));
                    }
                }
            }
        }
        Problem { m, b, nl, lp_cols, c_lp, psd, loc, nu }
    }

    fn c_vars(&self) -> Vars {
        Vars { lp: self.c_lp.clone(), psd: self.psd.iter().map(|b| b.c.clone()).collect() }
    }

    fn a_mul(&self, x: &Vars) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (k, col) in self.lp_cols.iter().enumerate() {
            let xv = x.lp[k];
            for &(r, v) in col {
                out[r] += v * xv;
            }
        }
        for (bi, blk) in self.psd.iter().enumerate() {
            let xm = &x.psd[bi];
            for (ri, &r) in blk.rows.iter().enumerate() {
                out[r] += blk.entries[ri].iter().map(|&(i, j, v)| v * xm[(i, j)]).sum::<f64>();
            }
        }
        out
    }

    fn at_mul(&self, y: &[f64]) -> Vars {
        let mut out = Vars::zeros(self);
        for (k, col) in self.lp_cols.iter().enumerate() {
            out.lp[k] = col.iter().map(|&(r, v)| v * y[r]).sum();
        }
        for (bi, blk) in self.psd.iter().enumerate() {
            let u = &mut out.psd[bi];
            for (ri, &r) in blk.rows.iter().enumerate() {
                let yr = y[r];
                if yr == 0.0 {
                    continue;
                }
                for &(i, j, v) in &blk.entries[ri] {
                    if i == j {
                        u[(i, i)] += yr * v;
                    } else {
                        u[(i, j)] += 0.5 * yr * v;
                        u[(j, i)] += 0.5 * yr * v;
                    }
                }
            }
        }
        out
    }

    /// Program coordinates from internal variables.
    fn export(&self, x: &Vars, scale: f64) -> Vec<f64> {
        self.loc
            .iter()
            .map(|&l| match l {
                Loc::Lp(i) => x.lp[i] * scale,
                Loc::Split(a, b) => (x.lp[a] - x.lp[b]) * scale,
                Loc::Psd(bi, i, j) => 0.5 * (x.psd[bi][(i, j)] + x.psd[bi][(j, i)]) * scale,
            })
            .collect()
    }
}

struct PsdScale {
    r: Mat<f64>,
    rinv: Mat<f64>,
    w: Mat<f64>,
    lam: Vec<f64>,
}

struct Scaling {
    lp_w: Vec<f64>,
    lp_lam: Vec<f64>,
    psd: Vec<PsdScale>,
}

fn psd_scale(x: &Mat<f64>, s: &Mat<f64>) -> Option<PsdScale> {
    let n = x.nrows();
    let lx = x.llt(Side::Lower).ok()?.L().to_owned();
    let ls = s.llt(Side::Lower).ok()?.L().to_owned();
    let prod = ls.transpose() * &lx;
    let svd = prod.svd().ok()?;
    let sig: Vec<f64> = (0..n).map(|i| svd.S().column_vector()[i]).collect();
    if sig.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let isq: Vec<f64> = sig.iter().map(|v| 1.0 / v.sqrt()).collect();
    let r = diag_scale(&isq, &(&lx * svd.V()), false);
    let rinv = diag_scale(&isq, &(svd.U().transpose() * ls.transpose()), true);
    let w = &r * r.transpose();
    Some(PsdScale { r, rinv, w, lam: sig })
}

impl Scaling {
    fn new(p: &Problem, x: &Vars, s: &Vars) -> Option<Self> {
        let mut lp_w = Vec::with_capacity(p.nl);
        let mut lp_lam = Vec::with_capacity(p.nl);
        for k in 0..p.nl {
            let (xv, sv) = (x.lp[k], s.lp[k]);
            if !(xv > 0.0 && sv > 0.0) {
                return None;
            }
            lp_w.push((xv / sv).sqrt());
            lp_lam.push((xv * sv).sqrt());
        }
        let mut psd = Vec::with_capacity(p.psd.len());
        for (xm, sm) in x.psd.iter().zip(&s.psd) {
            psd.push(psd_scale(xm, sm)?);
        }
        Some(Scaling { lp_w, lp_lam, psd })
    }

    /// G(u) = W u W, the map taking dual directions to primal ones.
    fn g(&self, u: &Vars) -> Vars {
        Vars {
            lp: u.lp.iter().zip(&self.lp_w).map(|(a, w)| a * w * w).collect(),
            psd: u
                .psd
                .iter()
                .zip(&self.psd)
                .map(|(m, sc)| {
                    let mut v = mm(&mm(&sc.w, m), &sc.w);
                    symmetrize(&mut v);
                    v
                })
                .collect(),
        }
    }

    /// Scaled space to primal space: R r Rᵀ.
    fn to_primal(&self, r: &Vars) -> Vars {
        Vars {
            lp: r.lp.iter().zip(&self.lp_w).map(|(a, w)| a * w).collect(),
            psd: r
                .psd
                .iter()
                .zip(&self.psd)
                .map(|(m, sc)| {
                    let mut v = mm(&mm(&sc.r, m), &sc.r.transpose().to_owned());
                    symmetrize(&mut v);
                    v
                })
                .collect(),
        }
    }

    /// Primal direction into scaled space: R⁻¹ dx R⁻ᵀ.
    fn scale_x(&self, d: &Vars) -> Vars {
        Vars {
            lp: d.lp.iter().zip(&self.lp_w).map(|(a, w)| a / w).collect(),
            psd: d
                .psd
                .iter()
                .zip(&self.psd)
                .map(|(m, sc)| {
                    let mut v = mm(&mm(&sc.rinv, m), &sc.rinv.transpose().to_owned());
                    symmetrize(&mut v);
                    v
                })
                .collect(),
        }
    }

    /// Dual direction into scaled space: Rᵀ ds R.
    fn scale_s(&self, d: &Vars) -> Vars {
        Vars {
            lp: d.lp.iter().zip(&self.lp_w).map(|(a, w)| a * w).collect(),
            psd: d
                .psd
                .iter()
                .zip(&self.psd)
                .map(|(m, sc)| {
                    let mut v = mm(&mm(&sc.r.transpose().to_owned(), m), &sc.r);
                    symmetrize(&mut v);
                    v
                })
                .collect(),
        }
    }

    fn lambda_sq(&self) -> Vars {
        Vars {
            lp: self.lp_lam.iter().map(|l| l * l).collect(),
            psd: self.psd.iter().map(|sc| Mat::from_fn(sc.lam.len(), sc.lam.len(), |i, j| if i == j { sc.lam[i] * sc.lam[i] } else { 0.0 })).collect(),
        }
    }

    /// Solves λ∘Δ = rhs for Δ in scaled space.
    fn lambda_solve(&self, rhs: &Vars) -> Vars {
        Vars {
            lp: rhs.lp.iter().zip(&self.lp_lam).map(|(a, l)| a / l).collect(),
            psd: rhs
                .psd
                .iter()
                .zip(&self.psd)
                .map(|(m, sc)| Mat::from_fn(m.nrows(), m.nrows(), |i, j| 2.0 * m[(i, j)] / (sc.lam[i] + sc.lam[j])))
                .collect(),
        }
    }

    /// Largest step keeping λ + α d in the cone, capped at `cap`.
    fn max_step(&self, d: &Vars, cap: f64) -> f64 {
        let mut alpha = cap;
        for (v, l) in d.lp.iter().zip(&self.lp_lam) {
            if *v < 0.0 {
                alpha = alpha.min(-l / v);
            }
        }
        for (m, sc) in d.psd.iter().zip(&self.psd) {
            let n = sc.lam.len();
            let isq: Vec<f64> = sc.lam.iter().map(|l| 1.0 / l.sqrt()).collect();
            let t = Mat::from_fn(n, n, |i, j| isq[i] * 0.5 * (m[(i, j)] + m[(j, i)]) * isq[j]);
            let e = match t.self_adjoint_eigenvalues(Side::Lower) {
                Ok(v) => v[0],
                Err(_) => return 0.0,
            };
            if e < 0.0 {
                alpha = alpha.min(-1.0 / e);
            }
        }
        alpha
    }
}

fn jordan(a: &Vars, b: &Vars) -> Vars {
    Vars {
        lp: a.lp.iter().zip(&b.lp).map(|(x, y)| x * y).collect(),
        psd: a
            .psd
            .iter()
            .zip(&b.psd)
            .map(|(p, q)| {
                let mut v = mm(p, q);
                let n = v.nrows();
                let w = mm(q, p);
                for j in 0..n {
                    for i in 0..n {
                        v[(i, j)] = 0.5 * (v[(i, j)] + w[(i, j)]);
                    }
                }
                v
            })
            .collect(),
    }
}

/// Schur complement `A G Aᵀ` as a dense symmetric matrix.
fn schur(p: &Problem, sc: &Scaling) -> Mat<f64> {
    let m = p.m;
    let mut mat = Mat::<f64>::zeros(m, m);
    for (k, col) in p.lp_cols.iter().enumerate() {
        let g = sc.lp_w[k] * sc.lp_w[k];
        for (a, &(ra, va)) in col.iter().enumerate() {
            for &(rb, vb) in &col[..=a] {
                mat[(ra, rb)] += g * va * vb;
            }
        }
    }
    for (bi, blk) in p.psd.iter().enumerate() {
        let w = &sc.psd[bi].w;
        let n = blk.n;
        for (jj, &rj) in blk.rows.iter().enumerate() {
            let ent = &blk.entries[jj];
            let v = if ent.len() < n {
                let mut v = Mat::<f64>::zeros(n, n);
                for &(k, l, c) in ent {
                    if k == l {
                        for b in 0..n {
                            let f = c * w[(k, b)];
                            for a in 0..n {
                                v[(a, b)] += w[(a, k)] * f;
                            }
                        }
                    } else {
                        let h = 0.5 * c;
                        for b in 0..n {
                            let fl = h * w[(l, b)];
                            let fk = h * w[(k, b)];
                            for a in 0..n {
                                v[(a, b)] += w[(a, k)] * fl + w[(a, l)] * fk;
                            }
                        }
                    }
                }
                v
            } else {
                let mut u = Mat::<f64>::zeros(n, n);
                for &(k, l, c) in ent {
                    if k == l {
                        u[(k, k)] += c;
                    } else {
                        u[(k, l)] += 0.5 * c;
                        u[(l, k)] += 0.5 * c;
                    }
                }
                mm(&mm(w, &u), w)
            };
            for (ii, &ri) in blk.rows.iter().enumerate().skip(jj) {
                let s: f64 = blk.entries[ii].iter().map(|&(k, l, c)| c * v[(k, l)]).sum();
                mat[(ri, rj)] += s;
            }
        }
    }
    for j in 0..m {
        for i in 0..j {
            mat[(i, j)] = mat[(j, i)];
        }
    }
    mat
}

struct Factor {
    llt: faer::linalg::solvers::Llt<f64>,
    mat: Mat<f64>,
}

impl Factor {
    fn new(mat: Mat<f64>) -> Option<Self> {
        let m = mat.nrows();
        let maxd = (0..m).map(|i| mat[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut delta = 1e-13 * maxd;
        for _ in 0..8 {
            let mut reg = mat.clone();
            for i in 0..m {
                reg[(i, i)] += delta;
            }
            if let Ok(llt) = reg.llt(Side::Lower) {
                return Some(Factor { llt, mat });
            }
            delta *= 100.0;
        }
        None
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        if m == 0 {
            return Vec::new();
        }
        let b = Mat::from_fn(m, 1, |i, _| rhs[i]);
        let mut x = self.llt.solve(&b);
        for _ in 0..2 {
            let r = &b - &self.mat * &x;
            let dx = self.llt.solve(&r);
            x += &dx;
        }
        (0..m).map(|i| x[(i, 0)]).collect()
    }
}

struct Dir {
    x: Vars,
    y: Vec<f64>,
    s: Vars,
    tau: f64,
    kappa: f64,
}

struct State {
    x: Vars,
    y: Vec<f64>,
    s: Vars,
    tau: f64,
    kappa: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[allow(clippy::too_many_arguments)]
fn direction(
    p: &Problem,
    sc: &Scaling,
    fac: &Factor,
    c: &Vars,
    dy2: &[f64],
    dx2: &Vars,
    st: &State,
    d_p: &[f64],
    d_d: &Vars,
    d_g: f64,
    r_lam: &Vars,
    r_tk: f64,
) -> Dir {
    let mut t1 = sc.g(d_d);
    t1.axpy(1.0, &sc.to_primal(r_lam));
    let at1 = p.a_mul(&t1);
    let rhs1: Vec<f64> = d_p.iter().zip(&at1).map(|(a, b)| a - b).collect();
    let dy1 = fac.solve(&rhs1);
    let mut dx1 = sc.g(&p.at_mul(&dy1));
    dx1.axpy(1.0, &t1);
    let num = d_g - dot(&p.b, &dy1) + c.dot(&dx1) + r_tk / st.tau;
    let den = dot(&p.b, dy2) - c.dot(dx2) + st.kappa / st.tau;
    let dtau = num / den;
    let dy: Vec<f64> = dy1.iter().zip(dy2).map(|(a, b)| a + dtau * b).collect();
    let mut dx = dx1;
    dx.axpy(dtau, dx2);
    let mut ds = p.at_mul(&dy).scaled(-1.0);
    ds.axpy(dtau, c);
    ds.axpy(-1.0, d_d);
    let dkappa = (r_tk - st.kappa * dtau) / st.tau;
    Dir { x: dx, y: dy, s: ds, tau: dtau, kappa: dkappa }
}

fn step_length(sc: &Scaling, st: &State, d: &Dir) -> f64 {
    let dxs = sc.scale_x(&d.x);
    let dss = sc.scale_s(&d.s);
    let mut a = sc.max_step(&dxs, 1e6);
    a = a.min(sc.max_step(&dss, 1e6));
    if d.tau < 0.0 {
        a = a.min(-st.tau / d.tau);
    }
    if d.kappa < 0.0 {
        a = a.min(-st.kappa / d.kappa);
    }
    a
}

pub(super) fn solve(prog: &ConicProgram, settings: &IpmSettings) -> SolveResult {
    let p = Problem::build(prog);
    let c = p.c_vars();
    let bnorm = norm_inf(&p.b);
    let cnorm = c.norm_inf();
    let mut st = State { x: Vars::identity(&p), y: vec![0.0; p.m], s: Vars::identity(&p), tau: 1.0, kappa: 1.0 };
    let mut best: Option<(f64, SolveResult)> = None;
    let mut stalls = 0;

    let finish = |st: &State, status: SolveStatus, res: Residuals, it: usize, cert: Option<InfeasibilityCertificate>| {
        let (scale, yscale) = match status {
            SolveStatus::Optimal | SolveStatus::NumericalFailure => (1.0 / st.tau, 1.0 / st.tau),
            _ => (1.0, 1.0),
        };
        let primal = p.export(&st.x, scale);
        let dual: Vec<f64> = st.y.iter().map(|v| v * yscale).collect();
        SolveResult {
            status,
            optimal_value: prog.objective_value(&primal),
            dual_value: dot(&p.b, &dual),
            primal,
            dual,
            residuals: res,
            iterations: it,
            certificate: cert,
        }
    };

    for it in 0..=settings.max_iter {
        let ax = p.a_mul(&st.x);
        let aty = p.at_mul(&st.y);
        let f1: Vec<f64> = ax.iter().zip(&p.b).map(|(a, b)| a - b * st.tau).collect();
        let mut f2 = aty.scaled(-1.0);
        f2.axpy(-1.0, &st.s);
        f2.axpy(st.tau, &c);
        let cx = c.dot(&st.x);
        let by = dot(&p.b, &st.y);
        let f3 = by - cx - st.kappa;
        let mu = (st.x.dot(&st.s) + st.tau * st.kappa) / (p.nu + 1.0);

        let pobj = cx / st.tau;
        let dobj = by / st.tau;
        let res = Residuals {
            primal: norm_inf(&f1) / st.tau / (1.0 + bnorm),
            dual: f2.norm_inf() / st.tau / (1.0 + cnorm),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs().min(dobj.abs())),
        };
        if res.max() <= settings.tol {
            return finish(&st, SolveStatus::Optimal, res, it, None);
        }
        if by > 0.0 {
            let mut r = aty.clone();
            r.axpy(1.0, &st.s);
            let ynorm = st.y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r.norm_inf() <= settings.tol * by && st.tau < st.kappa {
                let cert = InfeasibilityCertificate {
                    y: st.y.iter().map(|v| v / ynorm).collect(),
                    margin: by / ynorm,
                    cone_residual: r.norm_inf() / ynorm,
                };
                return finish(&st, SolveStatus::Infeasible, res, it, Some(cert));
            }
        }
        if cx < 0.0 && norm_inf(&ax) <= settings.tol * (-cx) && st.tau < st.kappa {
            return finish(&st, SolveStatus::Unbounded, res, it, None);
        }
        let score = res.max();
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, finish(&st, SolveStatus::NumericalFailure, res, it, None)));
        }
        if it == settings.max_iter {
            break;
        }

        let Some(sc) = Scaling::new(&p, &st.x, &st.s) else { break };
        let Some(fac) = Factor::new(schur(&p, &sc)) else { break };
        let gc = sc.g(&c);
        let rhs2: Vec<f64> = p.a_mul(&gc).iter().zip(&p.b).map(|(a, b)| a + b).collect();
        let dy2 = fac.solve(&rhs2);
        let mut dx2 = sc.g(&p.at_mul(&dy2));
        dx2.axpy(-1.0, &gc);

        let lam2 = sc.lambda_sq();
        // predictor
        let d_p: Vec<f64> = f1.iter().map(|v| -v).collect();
        let d_d = f2.scaled(-1.0);
        let r_lam = sc.lambda_solve(&lam2.scaled(-1.0));
        let aff = direction(&p, &sc, &fac, &c, &dy2, &dx2, &st, &d_p, &d_d, -f3, &r_lam, -st.tau * st.kappa);
        let a_aff = step_length(&sc, &st, &aff).min(1.0);
        let sigma = (1.0 - a_aff).powi(3);
        // corrector
        let eta = 1.0 - sigma;
        let d_p: Vec<f64> = f1.iter().map(|v| -eta * v).collect();
        let d_d = f2.scaled(-eta);
        let mut rhs = lam2.scaled(-1.0);
        let e = Vars::identity(&p);
        rhs.axpy(sigma * mu, &e);
        rhs.axpy(-1.0, &jordan(&sc.scale_x(&aff.x), &sc.scale_s(&aff.s)));
        let r_lam = sc.lambda_solve(&rhs);
        let r_tk = -st.tau * st.kappa + sigma * mu - aff.tau * aff.kappa;
        let d = direction(&p, &sc, &fac, &c, &dy2, &dx2, &st, &d_p, &d_d, -eta * f3, &r_lam, r_tk);
        let alpha = (settings.step_fraction * step_length(&sc, &st, &d)).min(1.0);
        if alpha < 1e-10 {
            stalls += 1;
            if stalls > 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        st.x.axpy(alpha, &d.x);
        st.s.axpy(alpha, &d.s);
        for (y, dy) in st.y.iter_mut().zip(&d.y) {
            *y += alpha * dy;
        }
        st.tau += alpha * d.tau;
        st.kappa += alpha * d.kappa;
        for m in st.x.psd.iter_mut().chain(st.s.psd.iter_mut()) {
            symmetrize(m);
        }
    }
    match best {
        Some((_, r)) => r,
        None => finish(&st, SolveStatus::NumericalFailure, Residuals::default(), 0, None),
    }
}
