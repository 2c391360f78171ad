//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use losr_core::compiler::{check_membership, MembershipOutcome};
use losr_core::monotones::*;
use losr_core::resource::*;
use losr_core::{
    auto_free_model, classical_party_free_model, hierarchy_free_model, ppt_free_model, CMatrix, FreeSetModel, C64,
};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn abs(r: &ChoiResource, m: &FreeSetModel) -> Result<f64, String> {
    absolute_robustness(r, m).map(|v| v.value).map_err(|e| e.to_string())
}

fn exact(r: &ChoiResource) -> Result<FreeSetModel, String> {
    auto_free_model(r.spec(), None).map_err(|e| e.to_string())
}

fn is_member(r: &ChoiResource, m: &FreeSetModel) -> Result<bool, String> {
    match check_membership(r, m).map_err(|e| e.to_string())? {
        MembershipOutcome::Member(_) => Ok(true),
        MembershipOutcome::NotMember { .. } => Ok(false),
        MembershipOutcome::Undecided => Err("membership undecided".into()),
    }
}

/// Two-qubit pure state with Gaussian amplitudes.
fn random_pure_state(rng: &mut ChaCha8Rng) -> CMatrix {
    let v: Vec<C64> = (0..4).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let rho = CMatrix::outer(&v);
    let t = rho.trace().re;
    rho.scale(1.0 / t)
}

fn criterion_1() -> Outcome {
    let rows = [
        ("singlet", singlet_resource(), 1.0),
        ("XZY assemblage", singlet_assemblage(true), 0.366),
        ("XZ assemblage", singlet_assemblage(false), 0.207),
        ("Tsirelson box", tsirelson_box(), 0.2071),
    ];
    let mut detail = Vec::new();
    let mut tsirelson = 0.0;
    for (name, r, printed) in &rows {
        let v = abs(r, &exact(r)?)?;
        ensure((v - printed).abs() <= 1e-3, || format!("{name}: {v:.7} vs {printed}"))?;
        detail.push(format!("{name} {v:.7}"));
        tsirelson = v;
    }
    let closed = (SQRT_2 - 1.0) / 2.0;
    ensure((tsirelson - closed).abs() <= 1e-6, || format!("Tsirelson {tsirelson:.9} vs {closed:.9}"))?;
    Ok(detail.join(", "))
}

fn criterion_2() -> Outcome {
    let b = bm2_bounds(2, true).map_err(|e| e.to_string())?;
    ensure(b.lower.value >= 0.9, || format!("level-2 lower bound {:.6}", b.lower.value))?;
    ensure(b.upper <= 1.0 + 1e-6, || format!("upper bound {}", b.upper))?;
    let cert = bm2_upper_certificate().map_err(|e| e.to_string())?;
    let dev = cert.verify(&bm2_distributed_povm()).map_err(|e| e.to_string())?;
    Ok(format!(
        "interval [{:.6}, {:.6}] (level 2 with PPT cuts; certificate deviation {dev:.1e})",
        b.lower.value, b.upper
    ))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..11 {
        let alpha = FRAC_PI_4 * k as f64 / 10.0;
        let r = make_state_resource(&psi_alpha(alpha), 2, 2).map_err(|e| e.to_string())?;
        let m = ppt_free_model(r.spec()).map_err(|e| e.to_string())?;
        let v = abs(&r, &m)?;
        let gap = (v - (2.0 * alpha).sin()).abs();
        ensure(gap <= 1e-4, || format!("alpha {alpha:.4}: {v:.7} vs {:.7}", (2.0 * alpha).sin()))?;
        worst = worst.max(gap);
    }
    Ok(format!("11 points, max deviation {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut nonlocal, mut worst) = (0, 0.0f64);
    for i in 0..100 {
        let r = random_box(&mut rng);
        let lp = classical_party_free_model(r.spec()).map_err(|e| e.to_string())?;
        let h2 = hierarchy_free_model(r.spec(), 2).map_err(|e| e.to_string())?;
        let (in_lp, in_h2) = (is_member(&r, &lp)?, is_member(&r, &h2)?);
        ensure(in_lp == in_h2, || format!("box {i}: LP {in_lp}, level 2 {in_h2}"))?;
        let (v_lp, v_h2) = (abs(&r, &lp)?, abs(&r, &h2)?);
        ensure((v_lp - v_h2).abs() <= 1e-5, || format!("box {i}: LP {v_lp:.8}, level 2 {v_h2:.8}"))?;
        worst = worst.max((v_lp - v_h2).abs());
        nonlocal += usize::from(!in_lp);
    }
    Ok(format!("100 boxes ({nonlocal} nonlocal), verdicts agree, max value gap {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let s = singlet_resource();
    let m2 = hierarchy_free_model(s.spec(), 2).map_err(|e| e.to_string())?;
    let margin = match check_membership(&s, &m2).map_err(|e| e.to_string())? {
        MembershipOutcome::NotMember { margin, .. } => margin,
        other => return Err(format!("singlet level 2: {other:?}")),
    };
    ensure(margin > 1e-8, || format!("margin {margin:.3e}"))?;
    let u = uniform_box();
    for n in 1..=4 {
        let m = hierarchy_free_model(u.spec(), n).map_err(|e| e.to_string())?;
        ensure(is_member(&u, &m)?, || format!("uniform box infeasible at level {n}"))?;
    }
    Ok(format!("singlet level 2 infeasible, margin {margin:.3e}; uniform box feasible at levels 1-4"))
}

fn criterion_6() -> Outcome {
    let specs = [
        ("II->CC", ResourceSpec::new(SystemSpec::classical(2), SystemSpec::classical(2), SystemSpec::trivial(), SystemSpec::trivial())),
        ("IQ->CQ", ResourceSpec::new(SystemSpec::classical(2), SystemSpec::quantum(2), SystemSpec::trivial(), SystemSpec::quantum(2))),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for (name, spec) in &specs {
        ensure(is_t_trivial(spec), || format!("{name} not T-trivial"))?;
        let m = classical_party_free_model(spec).map_err(|e| e.to_string())?;
        for i in 0..50 {
            let r = random_resource(spec, &mut rng);
            let v = abs(&r, &m)?;
            ensure(v.abs() <= 1e-6, || format!("{name} sample {i}: {v:.3e}"))?;
            worst = worst.max(v.abs());
        }
    }
    Ok(format!("100 samples scored against the exact party model, max {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = MonotoneSettings::default();
    let mut exact_cases = vec![pr_box(), tsirelson_box(), singlet_assemblage(false), singlet_assemblage(true), singlet_resource()];
    for _ in 0..3 {
        exact_cases.push(random_box(&mut rng));
    }
    let mut worst_transform: f64 = 0.0;
    for r in &exact_cases {
        let m = exact(r)?;
        let a = absolute_robustness_with(r, &m, &s).map_err(|e| e.to_string())?.value;
        let v = absolute_robustness_variant_with(r, &m, &s).map_err(|e| e.to_string())?.value;
        let g = generalized_robustness_with(r, &m, &s).map_err(|e| e.to_string())?.value;
        let w = nonlocal_weight_with(r, &m, &s).map_err(|e| e.to_string())?.value;
        let t = (v - a / (1.0 + a)).abs();
        ensure(t <= 1e-6, || format!("variant {v:.8} vs {:.8}", a / (1.0 + a)))?;
        ensure(g <= a + 1e-7, || format!("gen {g:.8} > abs {a:.8}"))?;
        ensure((-1e-9..=1.0 + 1e-7).contains(&w), || format!("weight {w}"))?;
        worst_transform = worst_transform.max(t);
    }
    let pr = pr_box();
    let w_pr = nonlocal_weight(&pr, &exact(&pr)?).map_err(|e| e.to_string())?.value;
    ensure((w_pr - 1.0).abs() <= 1e-6, || format!("PR weight {w_pr:.8}"))?;
    let free = uniform_box();
    let w_free = nonlocal_weight(&free, &exact(&free)?).map_err(|e| e.to_string())?.value;
    ensure(w_free.abs() <= 1e-7, || format!("free weight {w_free:.3e}"))?;

    let mut strict = 0;
    for i in 0..10 {
        let rho = random_pure_state(&mut rng);
        let r = if i % 2 == 0 {
            make_state_resource(&rho, 2, 2).map_err(|e| e.to_string())?
        } else {
            assemblage_from_state(&rho, &xz_measurements(false)).map_err(|e| e.to_string())?
        };
        let spec = *r.spec();
        let mut prev = -1.0;
        let mut vals = Vec::new();
        for n in 1..=3 {
            let m = hierarchy_free_model(&spec, n).map_err(|e| e.to_string())?;
            let v = abs(&r, &m)?;
            let g = generalized_robustness_with(&r, &m, &s).map_err(|e| e.to_string())?.value;
            ensure(g <= v + 1e-7, || format!("random {i} level {n}: gen {g:.8} > abs {v:.8}"))?;
            ensure(v >= prev - 1e-7, || format!("random {i}: levels {vals:?} then {v:.8}"))?;
            prev = v;
            vals.push(v);
        }
        strict += usize::from(vals[2] > vals[0] + 1e-6);
    }
    Ok(format!(
        "transform gap {worst_transform:.1e}; weight(PR) {w_pr:.7}, weight(free) {w_free:.1e}; nesting on 10 random pure states and assemblages ({strict} strictly increasing)"
    ))
}

fn criterion_8() -> Outcome {
    let s = MonotoneSettings::default();
    let mut lines = Vec::new();
    let mut last_theta = f64::INFINITY;
    for k in (0..=8).rev() {
        let alpha = FRAC_PI_4 * k as f64 / 8.0;
        let r = sweep_point(alpha, &s).map_err(|e| e.to_string())?;
        let tol = 1e-6;
        ensure(r.m_state + tol >= r.m_asm3 && r.m_asm3 + tol >= r.m_asm2, || format!("ordering at {alpha:.4}: {r:?}"))?;
        ensure((r.m_asm2 - r.m_box).abs() <= 1e-3, || format!("asm2 vs box at {alpha:.4}: {r:?}"))?;
        if r.m_box > 1e-6 {
            ensure(r.theta0 <= last_theta + 1e-3, || format!("theta0 increases at {alpha:.4}"))?;
            last_theta = r.theta0;
        }
        lines.push(r);
    }
    // conversion chain at α = π/4: BM² ↔ singlet → XZY → XZ → Tsirelson box
    let xz = singlet_assemblage(false);
    let converted = measure_assemblage(&xz, &tsirelson_bob_measurements()).map_err(|e| e.to_string())?;
    ensure(converted.choi().dist_max(tsirelson_box().choi()) < 1e-12, || "XZ assemblage does not yield the Tsirelson box".into())?;
    let chain = [singlet_resource(), singlet_assemblage(true), xz, tsirelson_box()];
    let vals: Vec<f64> = chain.iter().map(|r| exact(r).and_then(|m| abs(r, &m))).collect::<Result<_, _>>()?;
    ensure(vals.windows(2).all(|w| w[0] + 1e-6 >= w[1]), || format!("chain values {vals:?}"))?;
    let top = lines[0];
    Ok(format!(
        "9 grid points ordered; at pi/4 theta0 {:.4}; chain {:.4} >= {:.4} >= {:.4} >= {:.4}",
        top.theta0, vals[0], vals[1], vals[2], vals[3]
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cases = vec![
        pr_box(),
        tsirelson_box(),
        random_box(&mut rng),
        singlet_assemblage(false),
        singlet_assemblage(true),
        singlet_resource(),
        make_state_resource(&psi_alpha(0.3), 2, 2).map_err(|e| e.to_string())?,
    ];
    let names = [
        MonotoneName::AbsRobustness,
        MonotoneName::AbsRobustnessVariant,
        MonotoneName::GenRobustness,
        MonotoneName::NonlocalWeight,
    ];
    let (mut count, mut worst) = (0, 0.0f64);
    for r in &cases {
        let m = exact(r)?;
        for name in names {
            let res = compute(name, r, &m, &MonotoneSettings::default()).map_err(|e| e.to_string())?;
            if res.exactness != Exactness::Exact {
                continue;
            }
            let check = verify_certificate(r, &res).map_err(|e| e.to_string())?;
            ensure(check.passed(), || format!("{} on {}: {check:?}", name.short(), r.spec()))?;
            worst = worst.max(check.residual);
            count += 1;
        }
    }
    Ok(format!("{count} exact certificates re-validated, max residual {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("table values", criterion_1),
        ("distributed Bell measurement interval", criterion_2),
        ("pure-state formula", criterion_3),
        ("finite convergence on boxes", criterion_4),
        ("hierarchy soundness", criterion_5),
        ("T-trivial types", criterion_6),
        ("monotone algebra", criterion_7),
        ("sweep ordering", criterion_8),
        ("certificate integrity", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
