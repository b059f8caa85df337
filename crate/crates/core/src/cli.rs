//! Command-line surface: argument parsing, configuration layering and report
//! serialization.
//!
//! Numbers in JSON and CSV output are written with 17 significant digits so
//! every double survives a round trip.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::analysis::{compare_spectrum, damping_sweep, BackendSpec, SpectrumReport, SweepRow};
use crate::error::Error;
use crate::gauge::{gauge_check, GaugeCheck, TargetVariant, ORDER_RANGE};
use crate::model::{regime_of, OrderingScheme, PhysParams, Regime};
use crate::nu::{solve, NUProblem, NUSolution, Preset};
use crate::operators::{Backend, Grid, DEFAULT_FOCK_BASIS, DEFAULT_GRID_POINTS};
use crate::verification::{run_all, TimedOutcome, VerifyOptions, DEFAULT_SEED};

pub const SCHEMA_VERSION: &str = "1";
pub const DEFAULT_LEVELS: usize = 8;
pub const CSV_HEADER: [&str; 6] = ["n", "re", "im", "analytic_re", "analytic_im", "abs_err"];

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAIL: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dho",
    version,
    about = "Spectra of the quantized damped harmonic oscillator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagonalize H for one ordering and compare with ħΩ(n + ½).
    Spectrum(CommonArgs),
    /// Solve one of the preset equations with the Nikiforov–Uvarov method.
    Nu {
        #[arg(long)]
        preset: Preset,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the phase transformation onto the shifted oscillator (grid only).
    GaugeCheck {
        #[arg(long, default_value = "lambda-sq-over-4")]
        variant: TargetVariant,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tabulate numeric and closed-form levels over damping values.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,1.9,2,3")]
        lambdas: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the acceptance suite.
    Verify {
        /// Print the criterion list as JSON.
        #[arg(long)]
        json: bool,
        /// Multiplies every tolerance (harness self-test).
        #[arg(long, hide = true)]
        tolerance_scale: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Grid,
    Fock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub ordering: Option<OrderingScheme>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Grid half-width; defaults to the sizing rule.
    #[arg(long = "L", allow_hyphen_values = true)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub n_basis: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_basis: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol_abs: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    params: Option<ParamsFile>,
    ordering: Option<OrderingScheme>,
    backend: Option<BackendFile>,
    levels: Option<usize>,
    tolerances: Option<TolerancesFile>,
    output: Option<OutputFile>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    m: Option<f64>,
    omega: Option<f64>,
    #[serde(alias = "lambda")]
    lambda_damp: Option<f64>,
    hbar: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackendFile {
    kind: Option<BackendKind>,
    #[serde(rename = "L")]
    half_width: Option<f64>,
    n_points: Option<usize>,
    n_basis: Option<usize>,
    omega_basis: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolerancesFile {
    abs: Option<f64>,
    rel: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    format: Option<Format>,
    path: Option<PathBuf>,
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysParams,
    pub ordering: OrderingScheme,
    pub backend: BackendKind,
    /// Whether the backend came from the config file or a flag.
    pub backend_explicit: bool,
    pub half_width: Option<f64>,
    pub n_points: usize,
    pub n_basis: usize,
    pub omega_basis: Option<f64>,
    pub levels: usize,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysParams::default(),
            ordering: OrderingScheme::Symmetrized,
            backend: BackendKind::Fock,
            backend_explicit: false,
            half_width: None,
            n_points: DEFAULT_GRID_POINTS,
            n_basis: DEFAULT_FOCK_BASIS,
            omega_basis: None,
            levels: DEFAULT_LEVELS,
            tol_abs: None,
            tol_rel: None,
            format: Format::Json,
            out: None,
            seed: DEFAULT_SEED,
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_some<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl RunConfig {
    /// Defaults, then the config file, then flags, field by field.
    pub fn resolve(args: &CommonArgs) -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            let file: ConfigFile = serde_json::from_str(&text)
                .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
            cfg.apply_file(file);
        }
        cfg.apply_flags(args);
        cfg.params.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn apply_file(&mut self, file: ConfigFile) {
        if let Some(p) = file.params {
            set(&mut self.params.m, p.m);
            set(&mut self.params.omega, p.omega);
            set(&mut self.params.lambda_damp, p.lambda_damp);
            set(&mut self.params.hbar, p.hbar);
        }
        set(&mut self.ordering, file.ordering);
        if let Some(b) = file.backend {
            if b.kind.is_some() {
                self.backend_explicit = true;
            }
            set(&mut self.backend, b.kind);
            set_some(&mut self.half_width, b.half_width);
            set(&mut self.n_points, b.n_points);
            set(&mut self.n_basis, b.n_basis);
            set_some(&mut self.omega_basis, b.omega_basis);
        }
        set(&mut self.levels, file.levels);
        if let Some(t) = file.tolerances {
            set_some(&mut self.tol_abs, t.abs);
            set_some(&mut self.tol_rel, t.rel);
        }
        if let Some(o) = file.output {
            set(&mut self.format, o.format);
            set_some(&mut self.out, o.path);
        }
        set(&mut self.seed, file.seed);
    }

    fn apply_flags(&mut self, a: &CommonArgs) {
        set(&mut self.params.m, a.m);
        set(&mut self.params.omega, a.omega);
        set(&mut self.params.lambda_damp, a.lambda);
        set(&mut self.params.hbar, a.hbar);
        set(&mut self.ordering, a.ordering);
        if a.backend.is_some() {
            self.backend_explicit = true;
        }
        set(&mut self.backend, a.backend);
        set_some(&mut self.half_width, a.half_width);
        set(&mut self.n_points, a.n_points);
        set(&mut self.n_basis, a.n_basis);
        set_some(&mut self.omega_basis, a.omega_basis);
        set(&mut self.levels, a.levels);
        set_some(&mut self.tol_abs, a.tol_abs);
        set(&mut self.format, a.format);
        set_some(&mut self.out, a.out.clone());
        set(&mut self.seed, a.seed);
    }

    pub fn backend_spec(&self) -> BackendSpec {
        match self.backend {
            BackendKind::Grid => BackendSpec::Grid {
                half_width: self.half_width,
                n_points: self.n_points,
            },
            BackendKind::Fock => BackendSpec::Fock {
                n_basis: self.n_basis,
                omega_basis: self.omega_basis,
            },
        }
    }
}

/// A double written with 17 significant digits; non-finite values become null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(fmt_num(self.0)).map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Serialize)]
struct ParamsOut {
    m: Num,
    omega: Num,
    lambda_damp: Num,
    hbar: Num,
}

impl From<&PhysParams> for ParamsOut {
    fn from(p: &PhysParams) -> Self {
        Self {
            m: Num(p.m),
            omega: Num(p.omega),
            lambda_damp: Num(p.lambda_damp),
            hbar: Num(p.hbar),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum BackendOut {
    Grid {
        #[serde(rename = "L")]
        half_width: Num,
        n_points: usize,
    },
    Fock {
        n_basis: usize,
        omega_basis: Num,
        pad: usize,
    },
}

impl From<&Backend> for BackendOut {
    fn from(b: &Backend) -> Self {
        match b {
            Backend::Grid(g) => BackendOut::Grid {
                half_width: Num(g.half_width),
                n_points: g.n_points,
            },
            Backend::Fock(f) => BackendOut::Fock {
                n_basis: f.n_basis,
                omega_basis: Num(f.omega_basis),
                pad: f.pad,
            },
        }
    }
}

#[derive(Debug, Serialize)]
struct LevelOut {
    n: usize,
    re: Num,
    im: Num,
    analytic_re: Num,
    analytic_im: Num,
    abs_err: Num,
}

#[derive(Debug, Serialize)]
struct MetricsOut {
    compared_levels: usize,
    max_abs_err: Num,
    max_rel_err: Num,
    max_imag_part: Num,
    tol_abs: Num,
    tol_rel: Option<Num>,
    regime: Regime,
    comparison_enabled: bool,
    warning: Option<String>,
    trace_defect: Num,
    trace2_defect: Num,
    ground_residual: Num,
    converged: bool,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct SpectrumOut {
    schema_version: &'static str,
    params: ParamsOut,
    backend: BackendOut,
    ordering: OrderingScheme,
    levels: Vec<LevelOut>,
    metrics: MetricsOut,
    pass: bool,
}

fn level_rows(report: &SpectrumReport) -> Vec<LevelOut> {
    report
        .numeric
        .iter()
        .zip(&report.analytic)
        .enumerate()
        .map(|(n, (x, a))| LevelOut {
            n,
            re: Num(x.re),
            im: Num(x.im),
            analytic_re: Num(a.re),
            analytic_im: Num(a.im),
            abs_err: Num((x - a).norm()),
        })
        .collect()
}

/// Pass decision including the optional relative tolerance.
fn spectrum_pass(report: &SpectrumReport, tol_rel: Option<f64>) -> bool {
    report.pass && tol_rel.is_none_or(|r| report.max_rel_err <= r)
}

pub fn spectrum_exit_code(report: &SpectrumReport) -> u8 {
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

pub fn spectrum_json(report: &SpectrumReport, tol_rel: Option<f64>) -> String {
    let out = SpectrumOut {
        schema_version: SCHEMA_VERSION,
        params: (&report.params).into(),
        backend: (&report.backend).into(),
        ordering: report.ordering,
        levels: level_rows(report),
        metrics: MetricsOut {
            compared_levels: report.compared_levels,
            max_abs_err: Num(report.max_abs_err),
            max_rel_err: Num(report.max_rel_err),
            max_imag_part: Num(report.max_imag_part),
            tol_abs: Num(report.tol_abs),
            tol_rel: tol_rel.map(Num),
            regime: report.regime,
            comparison_enabled: report.comparison_enabled,
            warning: report.warning.clone(),
            trace_defect: Num(report.solver.trace_defect),
            trace2_defect: Num(report.solver.trace2_defect),
            ground_residual: Num(report.solver.ground_residual),
            converged: report.solver.converged,
            iterations: report.solver.iterations,
        },
        pass: spectrum_pass(report, tol_rel),
    };
    to_json(&out)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let rows = report
        .numeric
        .iter()
        .zip(&report.analytic)
        .enumerate()
        .map(|(n, (x, a))| {
            vec![
                n.to_string(),
                fmt_num(x.re),
                fmt_num(x.im),
                fmt_num(a.re),
                fmt_num(a.im),
                fmt_num((x - a).norm()),
            ]
        });
    write_csv(&CSV_HEADER, rows)
}

#[derive(Debug, Deserialize)]
struct LevelIn {
    re: f64,
    im: f64,
    analytic_re: f64,
    analytic_im: f64,
}

#[derive(Debug, Deserialize)]
struct MetricsIn {
    tol_abs: f64,
    tol_rel: Option<f64>,
    comparison_enabled: bool,
}

#[derive(Debug, Deserialize)]
struct SpectrumIn {
    schema_version: String,
    ordering: OrderingScheme,
    levels: Vec<LevelIn>,
    metrics: MetricsIn,
    pass: bool,
}

/// Re-derives the pass decision of a serialized spectrum report from its
/// levels; returns (recomputed, stored).
pub fn reread_spectrum_pass(json: &str) -> Result<(bool, bool), String> {
    let r: SpectrumIn = serde_json::from_str(json).map_err(|e| e.to_string())?;
    if r.schema_version != SCHEMA_VERSION {
        return Err(format!("unsupported schema_version {}", r.schema_version));
    }
    let mut ok = r.metrics.comparison_enabled;
    for l in &r.levels {
        let x = Complex64::new(l.re, l.im);
        let a = Complex64::new(l.analytic_re, l.analytic_im);
        let err = (x - a).norm();
        ok &= err <= r.metrics.tol_abs;
        if let Some(rel) = r.metrics.tol_rel {
            ok &= err / a.norm().max(f64::MIN_POSITIVE) <= rel;
        }
        if r.ordering == OrderingScheme::Symmetrized {
            ok &= l.im.abs() <= r.metrics.tol_abs;
        }
    }
    Ok((ok, r.pass))
}

#[derive(Debug, Serialize)]
struct ComplexOut {
    re: Num,
    im: Num,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        Self {
            re: Num(z.re),
            im: Num(z.im),
        }
    }
}

#[derive(Debug, Serialize)]
struct NuLevelOut {
    n: usize,
    re: Num,
    im: Num,
}

#[derive(Debug, Serialize)]
struct NuOut {
    schema_version: &'static str,
    preset: Preset,
    params: ParamsOut,
    tau_slope: ComplexOut,
    alpha: ComplexOut,
    levels: Vec<NuLevelOut>,
    pass: bool,
}

fn nu_json(preset: Preset, params: &PhysParams, sol: &NUSolution) -> String {
    to_json(&NuOut {
        schema_version: SCHEMA_VERSION,
        preset,
        params: params.into(),
        tau_slope: sol.tau.coeff(1).into(),
        alpha: sol.alpha.into(),
        levels: sol
            .levels
            .iter()
            .enumerate()
            .map(|(n, e)| NuLevelOut {
                n,
                re: Num(e.re),
                im: Num(e.im),
            })
            .collect(),
        pass: true,
    })
}

fn nu_csv(sol: &NUSolution) -> String {
    let rows = sol
        .levels
        .iter()
        .enumerate()
        .map(|(n, e)| vec![n.to_string(), fmt_num(e.re), fmt_num(e.im)]);
    write_csv(&["n", "re", "im"], rows)
}

#[derive(Debug, Serialize)]
struct GaugeOut {
    schema_version: &'static str,
    params: ParamsOut,
    backend: BackendOut,
    variant: TargetVariant,
    coarse_points: usize,
    fine_points: usize,
    defect: Num,
    coarse_defect: Num,
    /// null when the defect vanishes identically
    order: Option<Num>,
    order_exact: bool,
    order_range: [Num; 2],
    raw_frobenius: Num,
    eigenvalue_gap: Num,
    eigenvalue_gap_tol: Num,
    pass: bool,
}

const GAUGE_HEADER: [&str; 8] = [
    "variant",
    "coarse_points",
    "fine_points",
    "defect",
    "coarse_defect",
    "order",
    "eigenvalue_gap",
    "pass",
];

fn gauge_csv(check: &GaugeCheck) -> String {
    let order = check
        .defect
        .order
        .map_or_else(|| "exact".to_string(), fmt_num);
    let row = vec![
        check.variant.to_string(),
        check.coarse_points.to_string(),
        check.fine_points.to_string(),
        fmt_num(check.defect.defect),
        fmt_num(check.defect.coarse_defect),
        order,
        fmt_num(check.eigenvalue_gap),
        check.pass.to_string(),
    ];
    write_csv(&GAUGE_HEADER, [row])
}

#[derive(Debug, Serialize)]
struct SweepRowOut {
    lambda: Num,
    n: usize,
    re: Option<Num>,
    im: Option<Num>,
    analytic_re: Num,
    analytic_im: Num,
    abs_err: Option<Num>,
    regime: Regime,
    comparison_enabled: bool,
}

impl From<&SweepRow> for SweepRowOut {
    fn from(r: &SweepRow) -> Self {
        Self {
            lambda: Num(r.lambda),
            n: r.n,
            re: r.numeric.map(|z| Num(z.re)),
            im: r.numeric.map(|z| Num(z.im)),
            analytic_re: Num(r.analytic.re),
            analytic_im: Num(r.analytic.im),
            abs_err: r.abs_err.map(Num),
            regime: r.regime,
            comparison_enabled: r.comparison_enabled,
        }
    }
}

#[derive(Debug, Serialize)]
struct SweepOut {
    schema_version: &'static str,
    params: ParamsOut,
    ordering: OrderingScheme,
    backend: BackendSpec,
    rows: Vec<SweepRowOut>,
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    let body = rows.iter().map(|r| {
        vec![
            fmt_num(r.lambda),
            r.n.to_string(),
            opt(r.numeric.map(|z| z.re)),
            opt(r.numeric.map(|z| z.im)),
            fmt_num(r.analytic.re),
            fmt_num(r.analytic.im),
            opt(r.abs_err),
            r.regime.to_string(),
        ]
    });
    write_csv(
        &[
            "lambda",
            "n",
            "re",
            "im",
            "analytic_re",
            "analytic_im",
            "abs_err",
            "regime",
        ],
        body,
    )
}

#[derive(Debug, Serialize)]
struct VerifyOut<'a> {
    schema_version: &'static str,
    criteria: Vec<&'a crate::verification::CriterionOutcome>,
    pass: bool,
}

pub fn verify_json(outcomes: &[TimedOutcome]) -> String {
    to_json(&VerifyOut {
        schema_version: SCHEMA_VERSION,
        criteria: outcomes.iter().map(|t| &t.outcome).collect(),
        pass: outcomes.iter().all(|t| t.outcome.pass),
    })
}

pub fn verify_table(outcomes: &[TimedOutcome]) -> String {
    let mut s = String::new();
    for t in outcomes {
        let o = &t.outcome;
        s.push_str(&format!(
            "criterion {:>2} [{}] {} ({:.2} s): {}\n",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            t.elapsed.as_secs_f64(),
            o.detail
        ));
    }
    let passed = outcomes.iter().filter(|t| t.outcome.pass).count();
    s.push_str(&format!("{passed}/{} criteria passed\n", outcomes.len()));
    s
}

/// What a command produced: text for stdout (or `--out`), diagnostics and
/// the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl CommandOutput {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("error: {}\n", msg.into()),
            code: EXIT_USAGE,
        }
    }

    fn done(stdout: String, code: u8) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code,
        }
    }

    fn warn(mut self, msg: &str) -> Self {
        self.stderr.push_str(&format!("warning: {msg}\n"));
        self
    }
}

/// Exit code for a library error: bad input is a usage error, anything the
/// computation itself rejects is a failure.
pub fn error_exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParams(_)
        | Error::InvalidProblem(_)
        | Error::InvalidSolverArgument(_)
        | Error::UnresolvableLevels { .. }
        | Error::DimensionMismatch { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn from_error(err: Error) -> CommandOutput {
    CommandOutput {
        stdout: String::new(),
        stderr: format!("error: {err}\n"),
        code: error_exit_code(&err),
    }
}

pub fn execute(cli: &Cli) -> CommandOutput {
    let common = match &cli.command {
        Command::Spectrum(c) => c,
        Command::Nu { common, .. }
        | Command::GaugeCheck { common, .. }
        | Command::Sweep { common, .. }
        | Command::Verify { common, .. } => common,
    };
    let cfg = match RunConfig::resolve(common) {
        Ok(c) => c,
        Err(msg) => return CommandOutput::usage(msg),
    };
    let out = match &cli.command {
        Command::Spectrum(_) => cmd_spectrum(&cfg),
        Command::Nu { preset, .. } => cmd_nu(&cfg, *preset),
        Command::GaugeCheck { variant, .. } => cmd_gauge_check(&cfg, *variant),
        Command::Sweep { lambdas, .. } => cmd_sweep(&cfg, lambdas),
        Command::Verify {
            json,
            tolerance_scale,
            ..
        } => cmd_verify(&cfg, *json, tolerance_scale.unwrap_or(1.0)),
    };
    match (&cfg.out, out.code) {
        (Some(path), c) if c != EXIT_USAGE || !out.stdout.is_empty() => write_out(path, out),
        _ => out,
    }
}

fn write_out(path: &Path, out: CommandOutput) -> CommandOutput {
    match fs::write(path, &out.stdout) {
        Ok(()) => CommandOutput {
            stdout: String::new(),
            ..out
        },
        Err(e) => CommandOutput::usage(format!("cannot write {}: {e}", path.display())),
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> CommandOutput {
    let backend = match cfg.backend_spec().resolve(&cfg.params) {
        Ok(b) => b,
        Err(e) => return from_error(e),
    };
    let report =
        match compare_spectrum(&cfg.params, cfg.ordering, &backend, cfg.levels, cfg.tol_abs) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
    let pass = spectrum_pass(&report, cfg.tol_rel);
    let text = match cfg.format {
        Format::Json => spectrum_json(&report, cfg.tol_rel),
        Format::Csv => spectrum_csv(&report),
    };
    let out = CommandOutput::done(text, if pass { EXIT_PASS } else { EXIT_FAIL });
    match &report.warning {
        Some(w) => out.warn(w),
        None => out,
    }
}

pub fn cmd_nu(cfg: &RunConfig, preset: Preset) -> CommandOutput {
    if cfg.levels == 0 {
        return CommandOutput::usage("--levels must be at least 1");
    }
    let sol = match NUProblem::preset(preset, &cfg.params).and_then(|p| solve(&p, cfg.levels - 1)) {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let text = match cfg.format {
        Format::Json => nu_json(preset, &cfg.params, &sol),
        Format::Csv => nu_csv(&sol),
    };
    CommandOutput::done(text, EXIT_PASS)
}

pub fn cmd_gauge_check(cfg: &RunConfig, variant: TargetVariant) -> CommandOutput {
    if cfg.backend_explicit && cfg.backend != BackendKind::Grid {
        return CommandOutput::usage("gauge-check is grid only");
    }
    if regime_of(&cfg.params) != Regime::Underdamped {
        return CommandOutput::usage("gauge-check needs underdamped parameters (λ < 2ω)");
    }
    let half_width = cfg
        .half_width
        .unwrap_or_else(|| Grid::default_half_width(&cfg.params));
    let grid = match Grid::new(half_width, cfg.n_points) {
        Ok(g) => g,
        Err(e) => return from_error(e),
    };
    let mut check = match gauge_check(&grid, &cfg.params, variant) {
        Ok(c) => c,
        Err(e) => return from_error(e),
    };
    let gap_tol = cfg.tol_abs.unwrap_or(crate::gauge::EIGENVALUE_GAP_TOL);
    let order_ok = check
        .defect
        .order
        .is_none_or(|p| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&p));
    check.pass = order_ok && check.eigenvalue_gap <= gap_tol;
    let text = match cfg.format {
        Format::Json => to_json(&GaugeOut {
            schema_version: SCHEMA_VERSION,
            params: (&cfg.params).into(),
            backend: (&Backend::Grid(grid)).into(),
            variant,
            coarse_points: check.coarse_points,
            fine_points: check.fine_points,
            defect: Num(check.defect.defect),
            coarse_defect: Num(check.defect.coarse_defect),
            order: check.defect.order.map(Num),
            order_exact: check.defect.order.is_none(),
            order_range: [Num(ORDER_RANGE.0), Num(ORDER_RANGE.1)],
            raw_frobenius: Num(check.defect.raw_frobenius),
            eigenvalue_gap: Num(check.eigenvalue_gap),
            eigenvalue_gap_tol: Num(gap_tol),
            pass: check.pass,
        }),
        Format::Csv => gauge_csv(&check),
    };
    CommandOutput::done(text, if check.pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_sweep(cfg: &RunConfig, lambdas: &[f64]) -> CommandOutput {
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return CommandOutput::usage(format!("damping values must be finite and >= 0, got {bad}"));
    }
    let spec = cfg.backend_spec();
    let rows = match damping_sweep(&cfg.params, lambdas, cfg.ordering, &spec, cfg.levels) {
        Ok(r) => r,
        Err(e) => return from_error(e),
    };
    let text = match cfg.format {
        Format::Json => to_json(&SweepOut {
            schema_version: SCHEMA_VERSION,
            params: (&cfg.params).into(),
            ordering: cfg.ordering,
            backend: spec,
            rows: rows.iter().map(SweepRowOut::from).collect(),
        }),
        Format::Csv => sweep_csv(&rows),
    };
    let mut out = CommandOutput::done(text, EXIT_PASS);
    for r in rows.iter().filter(|r| r.n == 0 && !r.comparison_enabled) {
        out = out.warn(&format!(
            "λ={}: {} regime, comparison disabled",
            r.lambda, r.regime
        ));
    }
    out
}

pub fn cmd_verify(cfg: &RunConfig, json: bool, tolerance_scale: f64) -> CommandOutput {
    let opts = VerifyOptions {
        tolerance_scale,
        seed: cfg.seed,
    };
    let outcomes = run_all(&opts);
    let pass = outcomes.iter().all(|t| t.outcome.pass);
    let text = if json {
        verify_json(&outcomes)
    } else {
        verify_table(&outcomes)
    };
    CommandOutput::done(text, if pass { EXIT_PASS } else { EXIT_FAIL })
}
