//! Subcommand implementations.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use losr_core::compiler::{auto_free_model, DEFAULT_LEVEL};
use losr_core::monotones::{
    self, bm2_bounds, compute, membership_test, FreeCertificate, MembershipVerdict, MonotoneError, MonotoneName,
    MonotoneSettings, SweepRow,
};
use losr_core::resource::{self, parse_resource, resource_to_json, validate, ChoiResource, MatrixJson};
use losr_core::{CompileError, FreeSetModel, ModelKind, ResourceError};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{Format, SolveOpts};

/// A failed command and its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or invalid input (exit 2).
    Input(String),
    /// The solver did not reach a verdict (exit 3).
    Solver(String),
    /// Writing output failed (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<MonotoneError> for CliError {
    fn from(e: MonotoneError) -> Self {
        match e {
            MonotoneError::Undecided(_) | MonotoneError::Linalg(_) => CliError::Solver(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ResourceError> for CliError {
    fn from(e: ResourceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn settings(opts: &SolveOpts) -> MonotoneSettings {
    MonotoneSettings { tol: opts.tol }
}

fn read_resource(path: &Path) -> Result<ChoiResource, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let r = parse_resource(&text)?;
    let report = validate(&r)?;
    if !report.is_valid() {
        return Err(CliError::Input(format!("{}: {report}", path.display())));
    }
    Ok(r)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn default_path(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("resource");
    PathBuf::from(format!("{stem}.{suffix}"))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Exact model when one applies, otherwise the extension model at the
/// requested level with optional cuts.
fn select_model(r: &ChoiResource, opts: &SolveOpts) -> Result<FreeSetModel, CliError> {
    let m = auto_free_model(r.spec(), opts.level)?;
    Ok(match m.kind() {
        ModelKind::Hierarchy(_) => m.with_ppt_cuts(opts.ppt_cuts),
        _ => m,
    })
}

struct ExampleRow {
    name: &'static str,
    value: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
    exactness: String,
    error: Option<String>,
}

impl ExampleRow {
    fn failed(name: &'static str, e: impl fmt::Display) -> Self {
        ExampleRow { name, value: None, lower: None, upper: None, exactness: String::new(), error: Some(e.to_string()) }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.7}")).unwrap_or_default()
}

pub fn examples(opts: &SolveOpts, format: Format) -> Result<(), CliError> {
    let s = settings(opts);
    let exact_row = |name: &'static str, r: ChoiResource| -> ExampleRow {
        let res = select_model(&r, opts)
            .and_then(|m| compute(MonotoneName::AbsRobustness, &r, &m, &s).map_err(CliError::from));
        match res {
            Ok(v) => ExampleRow {
                name,
                value: Some(v.value),
                lower: Some(v.value),
                upper: None,
                exactness: v.exactness_tag(),
                error: None,
            },
            Err(e) => ExampleRow::failed(name, e),
        }
    };
    let bm2 = match bm2_bounds(opts.level.unwrap_or(DEFAULT_LEVEL), opts.ppt_cuts) {
        Ok(b) => ExampleRow {
            name: "distributed Bell measurement",
            value: (!b.is_interval()).then_some(b.lower.value),
            lower: Some(b.lower.value),
            upper: Some(b.upper),
            exactness: format!("{}+UpperCertificate", b.lower.exactness_tag()),
            error: None,
        },
        Err(e) => ExampleRow::failed("distributed Bell measurement", e),
    };
    let rows = vec![
        exact_row("singlet", resource::singlet_resource()),
        bm2,
        exact_row("XZY assemblage", resource::singlet_assemblage(true)),
        exact_row("XZ assemblage", resource::singlet_assemblage(false)),
        exact_row("Tsirelson box", resource::tsirelson_box()),
    ];
    match format {
        Format::Table => {
            println!("{:<30} {:>10} {:>22} exactness", "resource", "M_abs", "bounds");
            for r in &rows {
                if let Some(e) = &r.error {
                    println!("{:<30} {:>10} {:>22} error: {e}", r.name, "-", "");
                    continue;
                }
                let value = r.value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "interval".into());
                let bounds = match (r.lower, r.upper) {
                    (Some(l), Some(u)) => format!("[{l:.4}, {u:.4}]"),
                    _ => String::new(),
                };
                println!("{:<30} {:>10} {:>22} {}", r.name, value, bounds, r.exactness);
            }
        }
        Format::Csv => {
            println!("resource,value,lower,upper,exactness,error");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{}",
                    r.name,
                    cell(r.value),
                    cell(r.lower),
                    cell(r.upper),
                    r.exactness,
                    r.error.as_deref().unwrap_or("").replace(',', ";")
                );
            }
        }
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({ "resource": r.name, "value": r.value, "lower": r.lower, "upper": r.upper,
                            "exactness": r.exactness, "error": r.error })
                })
                .collect();
            println!("{}", pretty(&Value::Array(v)));
        }
    }
    match rows.iter().find_map(|r| r.error.as_ref()) {
        Some(e) => Err(CliError::Solver(e.clone())),
        None => Ok(()),
    }
}

pub fn monotone(
    file: &Path,
    name: &str,
    opts: &SolveOpts,
    certificate: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let which = MonotoneName::parse(name)
        .ok_or_else(|| CliError::Input(format!("unknown monotone {name:?}; expected abs, variant, gen or weight")))?;
    let r = read_resource(file)?;
    let model = select_model(&r, opts)?;
    let res = compute(which, &r, &model, &settings(opts))?;
    let path = certificate.map(Path::to_path_buf).unwrap_or_else(|| default_path(file, &format!("{}.cert.json", which.short())));
    write_file(&path, &res.certificate_json())?;
    match format {
        Format::Table => {
            println!("{} = {:.7}", which.short(), res.value);
            println!("exactness: {}", res.exactness_tag());
            println!("model: {}", model.tag());
            if let Some(gap) = res.cross_check {
                println!("cross-check gap: {gap:.3e}");
            }
            println!("certificate: {}", path.display());
        }
        Format::Csv => {
            println!("monotone,value,exactness,model,certificate");
            println!("{},{:.9},{},{},{}", which.short(), res.value, res.exactness_tag(), model.tag(), path.display());
        }
        Format::Json => {
            let v = json!({ "monotone": which.short(), "value": res.value, "exactness": res.exactness_tag(),
                            "model": model.tag(), "cross_check": res.cross_check,
                            "certificate": path.display().to_string() });
            println!("{}", pretty(&v));
        }
    }
    Ok(())
}

fn matrix(m: &losr_core::CMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(m)).expect("serializable")
}

fn verdict_json(v: &MembershipVerdict) -> Value {
    match v {
        MembershipVerdict::NotFree { witness, margin, model } => json!({
            "verdict": "NotFree", "model": model.tag(), "margin": margin, "witness": matrix(witness)
        }),
        MembershipVerdict::Free(FreeCertificate::Decomposition(terms)) => {
            let t: Vec<Value> = terms
                .iter()
                .map(|t| json!({ "weight": t.weight, "party": t.party, "strategy": t.strategy, "other": matrix(&t.other) }))
                .collect();
            json!({ "verdict": "Free", "kind": "decomposition", "terms": t })
        }
        MembershipVerdict::Free(FreeCertificate::Ppt { min_eigenvalue }) => {
            json!({ "verdict": "Free", "kind": "ppt", "min_eigenvalue": min_eigenvalue })
        }
        MembershipVerdict::Free(FreeCertificate::TTrivial) => json!({ "verdict": "Free", "kind": "t-trivial" }),
        MembershipVerdict::Free(FreeCertificate::Extension { level }) => {
            json!({ "verdict": "Free", "kind": "extension", "level": level })
        }
        MembershipVerdict::UndecidedAtLevel(n) => json!({ "verdict": "UndecidedAtLevel", "level": n }),
    }
}

fn verdict_line(v: &MembershipVerdict) -> String {
    match v {
        MembershipVerdict::NotFree { margin, model, .. } => format!("NotFree (model {}, margin {margin:.3e})", model.tag()),
        MembershipVerdict::Free(FreeCertificate::Decomposition(t)) => format!("Free (local decomposition, {} terms)", t.len()),
        MembershipVerdict::Free(FreeCertificate::Ppt { min_eigenvalue }) => {
            format!("Free (partial transpose, smallest eigenvalue {min_eigenvalue:.3e})")
        }
        MembershipVerdict::Free(FreeCertificate::TTrivial) => "Free (T-trivial type)".into(),
        MembershipVerdict::Free(FreeCertificate::Extension { level }) => format!("Free (extension at level {level})"),
        MembershipVerdict::UndecidedAtLevel(n) => format!("UndecidedAtLevel({n})"),
    }
}

pub fn membership(file: &Path, opts: &SolveOpts, certificate: Option<&Path>, format: Format) -> Result<(), CliError> {
    let r = read_resource(file)?;
    let level = opts.level.unwrap_or(DEFAULT_LEVEL);
    let verdict = membership_test(&r, level, opts.ppt_cuts)?;
    let path = certificate.map(Path::to_path_buf).unwrap_or_else(|| default_path(file, "membership.json"));
    let doc = verdict_json(&verdict);
    write_file(&path, &pretty(&doc))?;
    let name = doc["verdict"].as_str().unwrap_or_default().to_string();
    match format {
        Format::Table => {
            println!("{}", verdict_line(&verdict));
            println!("certificate: {}", path.display());
        }
        Format::Csv => {
            println!("verdict,level,certificate");
            println!("{name},{level},{}", path.display());
        }
        Format::Json => {
            println!("{}", pretty(&json!({ "verdict": name, "level": level, "certificate": path.display().to_string() })));
        }
    }
    Ok(())
}

pub fn sweep(grid: usize, tol: f64, format: Format) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::Input(format!("grid size must be at least 2, got {grid}")));
    }
    let s = MonotoneSettings { tol };
    let alphas: Vec<f64> = (0..grid).map(|k| FRAC_PI_4 * k as f64 / (grid - 1) as f64).collect();
    let rows: Vec<(f64, Result<SweepRow, MonotoneError>)> =
        alphas.par_iter().map(|&a| (a, monotones::sweep_point(a, &s))).collect();
    match format {
        Format::Csv | Format::Table => {
            println!("{}", SweepRow::CSV_HEADER);
            for (a, r) in &rows {
                match r {
                    Ok(row) => println!("{}", row.to_csv()),
                    Err(_) => println!("{a:.6},,,,,"),
                }
            }
        }
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|(a, r)| match r {
                    Ok(row) => serde_json::to_value(row).expect("serializable"),
                    Err(e) => json!({ "alpha": a, "error": e.to_string() }),
                })
                .collect();
            println!("{}", pretty(&Value::Array(v)));
        }
    }
    for (a, r) in &rows {
        if let Err(e) = r {
            eprintln!("alpha {a:.6}: {e}");
        }
    }
    match rows.iter().find_map(|(_, r)| r.as_ref().err()) {
        Some(e) => Err(CliError::Solver(e.to_string())),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Singlet,
    PrBox,
    TsirelsonBox,
    UniformBox,
    XzAssemblage,
    XzyAssemblage,
    Bm2,
}

pub fn export(which: Builtin, out: Option<&Path>) -> Result<(), CliError> {
    let r = match which {
        Builtin::Singlet => resource::singlet_resource(),
        Builtin::PrBox => resource::pr_box(),
        Builtin::TsirelsonBox => resource::tsirelson_box(),
        Builtin::UniformBox => resource::uniform_box(),
        Builtin::XzAssemblage => resource::singlet_assemblage(false),
        Builtin::XzyAssemblage => resource::singlet_assemblage(true),
        Builtin::Bm2 => resource::bm2_distributed_povm(),
    };
    let text = resource_to_json(&r);
    match out {
        Some(p) => write_file(p, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
