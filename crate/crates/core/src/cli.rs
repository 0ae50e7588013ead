//! Batch front end: a strict JSON job description in, reports and sample
//! files out.
//!
//! Exit status is 0 when every check passes, 1 when a check fails, 2 for a
//! configuration problem and 3 for a numerical failure at run time.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contours::ContourSpec;
use crate::exec::Execution;
use crate::grid::{GridFunction, GridSpec};
use crate::operators::{
    build_charges, check_superalgebra, conjugation_operator, physical_hamiltonians, zero_mode_residual, ContourTag,
};
use crate::riemann::{
    apply_conjugation_sheets, conjugate_word, enumerate_classes, BranchPointSet, ConjugationChoice, SheetState,
};
use crate::spectral::{
    agreement_tolerance, find_eigenvalues_with, n_dependence_report, oracle_spectrum, rectify, EigenResult,
    NDependenceOptions, NRow, PotentialSpec, SecantOptions,
};
use crate::susy::{closed_form_riccati_residual, riccati_residual, verify_modified_relation, ClosedFormModel, ModelKind};

pub const THREADS_ENV: &str = "TOBOGGAN_SUSY_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Spectrum,
    Classify,
    Sample,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Classify => "classify",
            Command::Sample => "sample",
        }
    }
}

// ---------------------------------------------------------------- config

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Must match the command line when present.
    pub command: Option<Command>,
    pub contour: Option<ContourSpec>,
    pub potential: Option<PotentialSpec>,
    pub grid: Option<GridSpec>,
    pub susy: Option<SusyConfig>,
    pub spectrum: Option<SpectrumConfig>,
    pub riemann: Option<RiemannConfig>,
    pub sample: Option<SampleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Grid Riccati residual of the sampled superpotentials.
    Riccati,
    /// Same identity from closed-form derivatives.
    RiccatiClosedForm,
    ModifiedRelation,
    Superalgebra,
    ZeroModes,
}

impl Check {
    const ALL: [Check; 5] = [
        Check::Riccati,
        Check::RiccatiClosedForm,
        Check::ModifiedRelation,
        Check::Superalgebra,
        Check::ZeroModes,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub riccati: f64,
    pub riccati_closed_form: f64,
    pub modified_relation: f64,
    pub superalgebra: f64,
    pub zero_modes: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            riccati: 1e-7,
            riccati_closed_form: 1e-12,
            modified_relation: 1e-12,
            superalgebra: crate::operators::SUPERALGEBRA_TOLERANCE,
            zero_modes: 1e-4,
        }
    }
}

fn default_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

fn default_trials() -> usize {
    100
}

fn default_accuracy() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SusyConfig {
    pub epsilon: f64,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Stencil accuracy of the discrete charges (2 or 4).
    #[serde(default = "default_accuracy")]
    pub accuracy: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Complex number written as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexValue> for Complex64 {
    fn from(c: ComplexValue) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        ComplexValue { re: c.re, im: c.im }
    }
}

fn default_levels() -> usize {
    3
}

fn default_max_iter() -> usize {
    60
}

fn default_secant_tol() -> f64 {
    1e-11
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default)]
    pub guesses: Vec<ComplexValue>,
    /// Oracle levels to compute.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_secant_tol")]
    pub tol: f64,
    pub n_dependence: Option<NDependenceConfig>,
}

fn default_half_width() -> f64 {
    NDependenceOptions::default().half_width
}

fn default_ndep_points() -> usize {
    NDependenceOptions::default().points
}

fn default_ndep_levels() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NDependenceConfig {
    pub epsilon: f64,
    pub windings: Vec<u32>,
    #[serde(default = "default_ndep_levels")]
    pub levels: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_ndep_points")]
    pub points: usize,
}

fn default_sheet_trials() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannConfig {
    #[serde(rename = "M")]
    pub punctures: usize,
    pub max_length: usize,
    /// Conjugation choice, one sign per puncture; all `+1` when absent.
    pub rho: Option<Vec<i8>>,
    /// Branch points; `0` for one puncture and `+-i` for two when absent.
    pub points: Option<Vec<ComplexValue>>,
    #[serde(default = "default_sheet_trials")]
    pub sheet_trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Contour,
    Potential,
    Weight,
    Effective,
    PsiMinus,
    PsiPlus,
    WMinus,
    WPlus,
    VMinus,
    VPlus,
}

impl Field {
    fn name(self) -> &'static str {
        match self {
            Field::Contour => "contour",
            Field::Potential => "potential",
            Field::Weight => "weight",
            Field::Effective => "effective",
            Field::PsiMinus => "psi_minus",
            Field::PsiPlus => "psi_plus",
            Field::WMinus => "w_minus",
            Field::WPlus => "w_plus",
            Field::VMinus => "v_minus",
            Field::VPlus => "v_plus",
        }
    }

    fn model(self) -> Option<ModelKind> {
        match self {
            Field::PsiMinus => Some(ModelKind::PsiMinus),
            Field::PsiPlus => Some(ModelKind::PsiPlus),
            Field::WMinus => Some(ModelKind::WMinus),
            Field::WPlus => Some(ModelKind::WPlus),
            Field::VMinus => Some(ModelKind::VMinus),
            Field::VPlus => Some(ModelKind::VPlus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub fields: Vec<Field>,
    /// Shift used by the closed-form model fields.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    /// Report file name, or the file-name prefix for `sample`. Relative
    /// paths are resolved against the output directory.
    pub path: Option<PathBuf>,
}

// ---------------------------------------------------------------- errors

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Exit 2.
    Config { field: Option<String>, message: String },
    /// Exit 3.
    Runtime(String),
}

impl CliError {
    fn config(field: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError::Config {
            field: Some(field.into()),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field: Some(field), message } => write!(f, "config error at `{field}`: {message}"),
            CliError::Config { field: None, message } => write!(f, "config error: {message}"),
            CliError::Runtime(message) => write!(f, "runtime error: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Parses a config, naming the offending field and its line and column.
pub fn parse_config(text: &str) -> Result<JobConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed: Result<JobConfig, _> = serde_path_to_error::deserialize(&mut de);
    let config = parsed.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config {
            field: (path != ".").then_some(path),
            message: format!("{inner} (line {}, column {})", inner.line(), inner.column()),
        }
    })?;
    de.end().map_err(|e| CliError::Config {
        field: None,
        message: e.to_string(),
    })?;
    Ok(config)
}

fn required<'a, T>(value: &'a Option<T>, field: &str, command: Command) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::config(field, format!("required by `{}`", command.name())))
}

fn checked<T>(field: &str, r: crate::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::config(field, e))
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(field, format!("must be positive and finite, got {v}")))
    }
}

// ---------------------------------------------------------------- reports

/// A compared number together with the bound it was compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Measurement {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Measurement {
            name: name.into(),
            value,
            tolerance,
            passed: value < tolerance,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Measurement {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct VerifyReport {
    command: &'static str,
    seed: u64,
    epsilon: f64,
    grid: GridSpec,
    accuracy: usize,
    trials: usize,
    checks: Vec<Measurement>,
    passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct OracleMatch {
    energy: ComplexValue,
    distance: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ShootingRoot {
    #[serde(flatten)]
    result: EigenResult,
    oracle_match: Option<OracleMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SpectrumReport {
    command: &'static str,
    seed: u64,
    contour: ContourSpec,
    potential: PotentialSpec,
    grid: GridSpec,
    agreement_tolerance: f64,
    oracle: Vec<EigenResult>,
    shooting: Vec<ShootingRoot>,
    unconverged: Vec<EigenResult>,
    n_dependence: Option<Vec<NRow>>,
    passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ClassifiedEntry {
    word: String,
    winding: Vec<i64>,
    length: usize,
    conjugate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ClassifyReport {
    command: &'static str,
    seed: u64,
    punctures: usize,
    max_length: usize,
    branch_points: Vec<ComplexValue>,
    rho: Vec<i8>,
    total: usize,
    classes: Vec<crate::riemann::WindingClass>,
    words: Vec<ClassifiedEntry>,
    checks: Vec<Measurement>,
    passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SampledFile {
    field: &'static str,
    file: String,
    points: usize,
    /// Largest difference after reading the file back.
    round_trip: Measurement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SampleReport {
    command: &'static str,
    seed: u64,
    grid: GridSpec,
    files: Vec<SampledFile>,
    passed: bool,
}

/// In-memory result of a job: named artifacts and the overall verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, Vec<u8>)>,
    pub passed: bool,
}

fn to_json<T: Serialize>(report: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(report).map_err(|e| CliError::Runtime(format!("cli: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn report_path(config: &JobConfig, command: Command) -> PathBuf {
    config
        .output
        .path
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", command.name())))
}

// ---------------------------------------------------------------- commands

/// Runs a job without touching the file system.
pub fn execute(command: Command, config: &JobConfig, seed: u64, exec: Execution) -> Result<Artifacts, CliError> {
    if let Some(c) = config.command {
        if c != command {
            return Err(CliError::config(
                "command",
                format!("config is for `{}` but `{}` was requested", c.name(), command.name()),
            ));
        }
    }
    let format = config.output.format.unwrap_or(match command {
        Command::Sample => Format::Csv,
        _ => Format::Json,
    });
    if format == Format::Csv && command != Command::Sample {
        return Err(CliError::config("output.format", "csv output is only produced by `sample`"));
    }
    if format == Format::Json && command == Command::Sample {
        return Err(CliError::config("output.format", "`sample` writes csv files"));
    }
    match command {
        Command::Verify => verify(config, seed, exec),
        Command::Spectrum => spectrum(config, seed, exec),
        Command::Classify => classify(config, seed, exec),
        Command::Sample => sample(config, seed),
    }
}

fn verify(config: &JobConfig, seed: u64, exec: Execution) -> Result<Artifacts, CliError> {
    let susy = required(&config.susy, "susy", Command::Verify)?;
    let grid = *required(&config.grid, "grid", Command::Verify)?;
    checked("grid", grid.validate())?;
    let eps = positive("susy.epsilon", susy.epsilon)?;
    if !matches!(susy.accuracy, 2 | 4) {
        return Err(CliError::config("susy.accuracy", format!("must be 2 or 4, got {}", susy.accuracy)));
    }
    if susy.trials == 0 {
        return Err(CliError::config("susy.trials", "must be at least 1"));
    }
    let tol = susy.tolerances;
    for (name, v) in [
        ("riccati", tol.riccati),
        ("riccati_closed_form", tol.riccati_closed_form),
        ("modified_relation", tol.modified_relation),
        ("superalgebra", tol.superalgebra),
        ("zero_modes", tol.zero_modes),
    ] {
        positive(&format!("susy.tolerances.{name}"), v)?;
    }
    let checks: BTreeSet<Check> = susy.checks.iter().copied().collect();
    let model = |kind| ClosedFormModel::new(kind, eps).and_then(|m| m.sample(&grid));

    let mut out = Vec::new();
    if checks.contains(&Check::Riccati) {
        for (label, wk, vk) in [
            ("minus", ModelKind::WMinus, ModelKind::VMinus),
            ("plus", ModelKind::WPlus, ModelKind::VPlus),
        ] {
            let r = riccati_residual(&model(wk)?, &model(vk)?, Complex64::new(0.0, 0.0))?;
            out.push(Measurement::below(format!("riccati_{label}"), r, tol.riccati));
        }
    }
    if checks.contains(&Check::RiccatiClosedForm) {
        for (label, plus) in [("minus", false), ("plus", true)] {
            let r = closed_form_riccati_residual(eps, &grid, plus)?;
            out.push(Measurement::below(format!("riccati_closed_form_{label}"), r, tol.riccati_closed_form));
        }
    }
    if checks.contains(&Check::ModifiedRelation) {
        let r = verify_modified_relation(eps, &grid)?;
        out.push(Measurement::below("modified_relation", r.absolute, tol.modified_relation));
    }
    if checks.contains(&Check::Superalgebra) || checks.contains(&Check::ZeroModes) {
        let t = conjugation_operator(&grid, ContourTag::GAMMA, ContourTag::GAMMA_STAR)?;
        let ti = conjugation_operator(&grid, ContourTag::GAMMA_STAR, ContourTag::GAMMA)?;
        let charges = build_charges(&model(ModelKind::WMinus)?, &t, &ti, susy.accuracy)?;
        if checks.contains(&Check::Superalgebra) {
            let report = check_superalgebra(&charges.q, &charges.q_tilde, &charges.h, susy.trials, seed, exec)?;
            for r in report.residuals {
                out.push(Measurement::below(
                    format!("superalgebra: {}", r.identity),
                    r.relative,
                    tol.superalgebra,
                ));
            }
        }
        if checks.contains(&Check::ZeroModes) {
            let (hm, hp) = physical_hamiltonians(&charges, &t, &ti)?;
            let rm = zero_mode_residual(&hm, model(ModelKind::PsiMinus)?.values());
            let rp = zero_mode_residual(&hp, model(ModelKind::PsiPlus)?.values());
            out.push(Measurement::below("zero_mode_minus", rm, tol.zero_modes));
            out.push(Measurement::below("zero_mode_plus", rp, tol.zero_modes));
        }
    }
    let passed = out.iter().all(|m| m.passed);
    let report = VerifyReport {
        command: "verify",
        seed,
        epsilon: eps,
        grid,
        accuracy: susy.accuracy,
        trials: susy.trials,
        checks: out,
        passed,
    };
    Ok(Artifacts {
        files: vec![(report_path(config, Command::Verify), to_json(&report)?)],
        passed,
    })
}

fn spectrum(config: &JobConfig, seed: u64, exec: Execution) -> Result<Artifacts, CliError> {
    let contour = required(&config.contour, "contour", Command::Spectrum)?;
    let potential = required(&config.potential, "potential", Command::Spectrum)?;
    let grid = *required(&config.grid, "grid", Command::Spectrum)?;
    let spec = required(&config.spectrum, "spectrum", Command::Spectrum)?;
    checked("contour", contour.validate())?;
    checked("potential", potential.validate())?;
    checked("grid", grid.validate())?;
    positive("spectrum.tol", spec.tol)?;
    if spec.levels == 0 || spec.levels > crate::spectral::MAX_ORACLE_LEVELS {
        return Err(CliError::config(
            "spectrum.levels",
            format!("must be in 1..={}", crate::spectral::MAX_ORACLE_LEVELS),
        ));
    }
    if let Some(i) = spec.guesses.iter().position(|g| !(g.re.is_finite() && g.im.is_finite())) {
        return Err(CliError::config(format!("spectrum.guesses[{i}]"), "must be finite"));
    }

    let problem = rectify(potential, contour, &grid)?;
    let tolerance = agreement_tolerance(&grid);
    let oracle = oracle_spectrum(&problem, spec.levels)?;
    let options = SecantOptions {
        max_iter: spec.max_iter,
        tol: spec.tol,
        ..SecantOptions::default()
    };
    let guesses: Vec<Complex64> = spec.guesses.iter().map(|&g| g.into()).collect();
    let found = find_eigenvalues_with(&problem, &guesses, &options, exec)?;
    let shooting: Vec<ShootingRoot> = found
        .roots
        .iter()
        .map(|r| {
            let nearest = oracle
                .iter()
                .min_by(|a, b| (a.energy - r.energy).norm().total_cmp(&(b.energy - r.energy).norm()));
            ShootingRoot {
                result: *r,
                oracle_match: nearest.map(|o| {
                    let distance = (o.energy - r.energy).norm();
                    OracleMatch {
                        energy: o.energy.into(),
                        distance,
                        tolerance,
                        passed: distance <= tolerance,
                    }
                }),
            }
        })
        .collect();

    let n_dependence = match &spec.n_dependence {
        None => None,
        Some(nd) => {
            let eps = positive("spectrum.n_dependence.epsilon", nd.epsilon)?;
            positive("spectrum.n_dependence.half_width", nd.half_width)?;
            let opts = NDependenceOptions {
                half_width: nd.half_width,
                points: nd.points,
                secant: options,
            };
            Some(n_dependence_report(potential, eps, &nd.windings, nd.levels, &opts, exec)?)
        }
    };

    let passed = found.unconverged.is_empty()
        && shooting.iter().all(|s| s.oracle_match.as_ref().is_some_and(|m| m.passed))
        && n_dependence
            .iter()
            .flatten()
            .all(|row| row.error.is_none() && row.levels.iter().all(|l| l.agrees));
    let report = SpectrumReport {
        command: "spectrum",
        seed,
        contour: contour.clone(),
        potential: potential.clone(),
        grid,
        agreement_tolerance: tolerance,
        oracle,
        shooting,
        unconverged: found.unconverged,
        n_dependence,
        passed,
    };
    Ok(Artifacts {
        files: vec![(report_path(config, Command::Spectrum), to_json(&report)?)],
        passed,
    })
}

fn default_points(m: usize) -> Vec<Complex64> {
    if m == 1 {
        vec![Complex64::new(0.0, 0.0)]
    } else {
        vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]
    }
}

fn classify(config: &JobConfig, seed: u64, _exec: Execution) -> Result<Artifacts, CliError> {
    let rc = required(&config.riemann, "riemann", Command::Classify)?;
    let m = rc.punctures;
    if !(1..=crate::riemann::MAX_ENUM_PUNCTURES).contains(&m) {
        return Err(CliError::config(
            "riemann.M",
            format!("must be in 1..={}", crate::riemann::MAX_ENUM_PUNCTURES),
        ));
    }
    if rc.max_length > crate::riemann::MAX_ENUM_LENGTH {
        return Err(CliError::config(
            "riemann.max_length",
            format!("must be at most {}", crate::riemann::MAX_ENUM_LENGTH),
        ));
    }
    let points: Vec<Complex64> = match &rc.points {
        Some(p) => p.iter().map(|&c| c.into()).collect(),
        None => default_points(m),
    };
    if points.len() != m {
        return Err(CliError::config("riemann.points", format!("expected {m} points, got {}", points.len())));
    }
    let set = checked("riemann.points", BranchPointSet::new(points.clone()))?;
    let rho = checked(
        "riemann.rho",
        ConjugationChoice::new(rc.rho.clone().unwrap_or_else(|| vec![1; m])),
    )?;
    if rho.len() != m {
        return Err(CliError::config("riemann.rho", format!("expected {m} signs, got {}", rho.len())));
    }

    let classes = enumerate_classes(m, rc.max_length)?;
    let mut words = Vec::with_capacity(classes.words.len());
    for w in &classes.words {
        words.push(ClassifiedEntry {
            word: w.word.clone(),
            winding: w.winding.clone(),
            length: w.length,
            conjugate: conjugate_word(&w.letters, &set, &rho)?.to_string(),
        });
    }
    let expected: usize = 1 + (1..=rc.max_length).map(|l| 2 * m * (2 * m - 1).pow(l as u32 - 1)).sum::<usize>();

    // fixed-choice involution on seeded random sheet states
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..rc.sheet_trials {
        let theta: Vec<f64> = (0..m).map(|_| rng.random_range(-20.0..20.0)).collect();
        let s = SheetState::new(theta)?;
        let back = apply_conjugation_sheets(&apply_conjugation_sheets(&s, &rho)?, &rho)?;
        for (a, b) in back.theta.iter().zip(&s.theta) {
            worst = worst.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    let checks = vec![
        Measurement::at_most("reduced_word_count_mismatch", classes.total.abs_diff(expected) as f64, 0.0),
        Measurement::at_most("sheet_involution", worst, 1e-12),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let report = ClassifyReport {
        command: "classify",
        seed,
        punctures: m,
        max_length: rc.max_length,
        branch_points: points.into_iter().map(ComplexValue::from).collect(),
        rho: rho.signs.clone(),
        total: classes.total,
        classes: classes.classes,
        words,
        checks,
        passed,
    };
    Ok(Artifacts {
        files: vec![(report_path(config, Command::Classify), to_json(&report)?)],
        passed,
    })
}

fn csv_bytes(f: &GridFunction) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf).map_err(|e| CliError::Runtime(format!("cli: {e}")))?;
    Ok(buf)
}

fn sample(config: &JobConfig, seed: u64) -> Result<Artifacts, CliError> {
    let sc = required(&config.sample, "sample", Command::Sample)?;
    let grid = *required(&config.grid, "grid", Command::Sample)?;
    checked("grid", grid.validate())?;
    if sc.fields.is_empty() {
        return Err(CliError::config("sample.fields", "list at least one field"));
    }
    let prefix = config
        .output
        .path
        .as_ref()
        .map(|p| p.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sample".into());

    let mut rectified = None;
    let mut files = Vec::new();
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, &field) in sc.fields.iter().enumerate() {
        if !seen.insert(field) {
            return Err(CliError::config(format!("sample.fields[{i}]"), "listed twice"));
        }
        let values = if let Some(kind) = field.model() {
            let eps = positive("sample.epsilon", *required(&sc.epsilon, "sample.epsilon", Command::Sample)?)?;
            ClosedFormModel::new(kind, eps)?.sample(&grid)?
        } else if field == Field::Contour {
            let contour = required(&config.contour, "contour", Command::Sample)?;
            checked("contour", contour.validate())?;
            GridFunction::from_fn(grid, |x| contour.eval(x).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))?
        } else {
            if rectified.is_none() {
                let contour = required(&config.contour, "contour", Command::Sample)?;
                let potential = required(&config.potential, "potential", Command::Sample)?;
                checked("contour", contour.validate())?;
                checked("potential", potential.validate())?;
                rectified = Some(rectify(potential, contour, &grid)?);
            }
            let p = rectified.as_ref().expect("set above");
            match field {
                Field::Weight => p.weight.clone(),
                Field::Effective => p.effective.clone(),
                _ => {
                    let contour = &p.contour;
                    let potential = &p.potential;
                    let mut v = Vec::with_capacity(grid.n);
                    for x in grid.points() {
                        v.push(potential.value(contour.eval(x)?));
                    }
                    GridFunction::new(grid, v)?
                }
            }
        };
        let bytes = csv_bytes(&values)?;
        let back = GridFunction::read_csv(bytes.as_slice())?;
        let diff = back.max_abs_diff_in(&values, 0..values.len());
        let name = format!("{prefix}_{}.csv", field.name());
        entries.push(SampledFile {
            field: field.name(),
            file: name.clone(),
            points: grid.n,
            round_trip: Measurement::at_most(format!("{} round trip", field.name()), diff, 0.0),
        });
        files.push((PathBuf::from(name), bytes));
    }
    let passed = entries.iter().all(|e| e.round_trip.passed);
    let report = SampleReport {
        command: "sample",
        seed,
        grid,
        files: entries,
        passed,
    };
    files.push((PathBuf::from(format!("{prefix}.json")), to_json(&report)?));
    Ok(Artifacts { files, passed })
}

// ---------------------------------------------------------------- driver

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Reads `TOBOGGAN_SUSY_THREADS`: `None` when unset.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config {
                field: None,
                message: format!("{THREADS_ENV} must be a positive integer, got {v:?}"),
            }),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
}

/// Loads, runs and writes one job. Returns the written paths and verdict.
pub fn run(inv: &Invocation) -> Result<(Vec<PathBuf>, bool), CliError> {
    let text = std::fs::read_to_string(&inv.config).map_err(|e| CliError::Config {
        field: None,
        message: format!("cannot read {}: {e}", inv.config.display()),
    })?;
    let config = parse_config(&text)?;
    let artifacts = execute(inv.command, &config, inv.seed, Execution::default())?;
    let mut written = Vec::with_capacity(artifacts.files.len());
    for (name, bytes) in &artifacts.files {
        let path = inv.out.join(name);
        write_atomic(&path, bytes).map_err(|e| CliError::Runtime(format!("cli: cannot write {}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        written.push(path);
    }
    Ok((written, artifacts.passed))
}
