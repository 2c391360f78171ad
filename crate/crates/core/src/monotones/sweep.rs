//! `M_abs` along the family `|ψ_α⟩ = cos α |01⟩ − sin α |10⟩`: the state,
//! its XZY and XZ assemblages, and the best box from Bob's measurement
//! pair `θ₁ = π − θ₀`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{absolute_robustness_with, MonotoneError, MonotoneSettings};
use crate::compiler::{classical_party_free_model, ppt_free_model};
use crate::resource::{angle_pair, assemblage_from_state, box_from_state, make_state_resource, psi_alpha, xz_measurements};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub m_state: f64,
    pub m_asm3: f64,
    pub m_asm2: f64,
    pub m_box: f64,
    pub theta0: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "alpha,m_state,m_asm3,m_asm2,m_box,theta0";

    pub fn to_csv(&self) -> String {
        format!(
            "{:.6},{:.7},{:.7},{:.7},{:.7},{:.6}",
            self.alpha, self.m_state, self.m_asm3, self.m_asm2, self.m_box, self.theta0
        )
    }
}

/// `M_abs` of the box from `ψ_α` with Alice measuring X, Z and Bob the
/// pair `(θ₀, π − θ₀)`.
pub fn box_value(alpha: f64, theta0: f64, settings: &MonotoneSettings) -> Result<f64, MonotoneError> {
    let r = box_from_state(&psi_alpha(alpha), &xz_measurements(false), &angle_pair(theta0))?;
    let model = classical_party_free_model(r.spec())?;
    Ok(absolute_robustness_with(&r, &model, settings)?.value)
}

/// Grid points scanned before the golden-section refinement.
const THETA_GRID: usize = 24;
/// Width of the final bracket on `θ₀`.
const THETA_TOL: f64 = 1e-5;
/// Box values below this are treated as zero; `θ₀` is then reported as 0.
const FLAT_TOL: f64 = 1e-7;

/// Maximizes [`box_value`] over `θ₀ ∈ [0, π/2]`: a grid scan, then
/// golden-section search in the bracket around the best grid point.
/// Returns `(θ₀, value)`.
pub fn optimize_theta0(alpha: f64, settings: &MonotoneSettings) -> Result<(f64, f64), MonotoneError> {
    let f = |t: f64| box_value(alpha, t, settings);
    let h = FRAC_PI_2 / THETA_GRID as f64;
    let mut best = (0.0, f(0.0)?);
    for k in 1..=THETA_GRID {
        let t = k as f64 * h;
        let v = f(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    if best.1 < FLAT_TOL {
        return Ok((0.0, best.1.max(0.0)));
    }
    let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(FRAC_PI_2));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > THETA_TOL {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d)?;
        }
    }
    let t = 0.5 * (lo + hi);
    let v = f(t)?;
    Ok(if v >= best.1 { (t, v) } else { best })
}

pub fn sweep_point(alpha: f64, settings: &MonotoneSettings) -> Result<SweepRow, MonotoneError> {
    let rho = psi_alpha(alpha);
    let state = make_state_resource(&rho, 2, 2)?;
    let m_state = absolute_robustness_with(&state, &ppt_free_model(state.spec())?, settings)?.value;
    let asm3 = assemblage_from_state(&rho, &xz_measurements(true))?;
    let m_asm3 = absolute_robustness_with(&asm3, &classical_party_free_model(asm3.spec())?, settings)?.value;
    let asm2 = assemblage_from_state(&rho, &xz_measurements(false))?;
    let m_asm2 = absolute_robustness_with(&asm2, &classical_party_free_model(asm2.spec())?, settings)?.value;
    let (theta0, m_box) = optimize_theta0(alpha, settings)?;
    Ok(SweepRow { alpha, m_state, m_asm3, m_asm2, m_box, theta0 })
}

/// Evaluates [`sweep_point`] on each `α` in order.
pub fn sweep(alphas: &[f64], settings: &MonotoneSettings) -> Result<Vec<SweepRow>, MonotoneError> {
    alphas.iter().map(|&a| sweep_point(a, settings)).collect()
}
