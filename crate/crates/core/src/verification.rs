//! The acceptance suite: one function per criterion, each returning a
//! deterministic pass/fail outcome.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{compare_spectrum, numeric_spectrum, ordering_shift_check};
use crate::error::Result;
use crate::gauge::{
    completed_square_defect, gauge_eigenvalue_gap, gauge_equivalence_defect, TargetVariant,
    PROBE_MODES,
};
use crate::linalg::{
    adjoint, eig_general_default, eig_hermitian, inverse_iteration_residual, ComplexMatrix,
    DEFAULT_TOL,
};
use crate::model::{analytic_energy, regime_of, OrderingScheme, PhysParams, Regime};
use crate::nu::{discriminant_condition, select_branch, solve, NUProblem, Preset};
use crate::operators::{Backend, FockBasis, Grid};

pub const DEFAULT_SEED: u64 = 20_240_611;

const SPECTRUM_LAMBDAS: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 1.9];
const GAUGE_LAMBDAS: [f64; 3] = [0.5, 1.0, 1.5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Multiplies every tolerance; 1 for the real suite.
    pub tolerance_scale: f64,
    /// Seed for the random eigensolver matrices.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            seed: DEFAULT_SEED,
        }
    }
}

impl VerifyOptions {
    fn tol(&self, t: f64) -> f64 {
        t * self.tolerance_scale
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    /// Numbers behind the decision, formatted deterministically.
    pub detail: String,
}

/// An outcome plus the wall time it took; the time stays out of any
/// serialized form.
#[derive(Debug, Clone)]
pub struct TimedOutcome {
    pub outcome: CriterionOutcome,
    pub elapsed: Duration,
}

fn outcome(id: u8, name: &str, pass: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name: name.to_string(),
        pass,
        detail,
    }
}

fn failed(id: u8, name: &str, err: crate::error::Error) -> CriterionOutcome {
    outcome(id, name, false, format!("error: {err}"))
}

fn fock(params: &PhysParams, n_basis: usize) -> Result<Backend> {
    Ok(Backend::Fock(FockBasis::for_params(params, n_basis)?))
}

fn within_budget(start: Instant, budget_secs: u64) -> bool {
    start.elapsed() <= Duration::from_secs(budget_secs)
}

pub const NAMES: [&str; 10] = [
    "real spectrum of the symmetrized Hamiltonian (Fock)",
    "grid cross-check and second-order convergence",
    "ordering shift between yp, py and symmetrized",
    "sign of the constant term in the NU equation",
    "NU pipeline regression",
    "gauge equivalence to the shifted oscillator",
    "completed-square identity (Fock)",
    "eigensolver health",
    "critical and overdamped handling",
    "determinism",
];

pub fn criterion_1(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[0];
    let start = Instant::now();
    let (tol, imag_tol) = (opts.tol(1e-8), opts.tol(1e-10));
    let mut parts = Vec::new();
    let mut pass = true;
    for lambda in SPECTRUM_LAMBDAS {
        let p = PhysParams::unit(lambda);
        let report = match fock(&p, 128)
            .and_then(|b| compare_spectrum(&p, OrderingScheme::Symmetrized, &b, 10, Some(tol)))
        {
            Ok(r) => r,
            Err(e) => return failed(1, name, e),
        };
        let ok = report.max_abs_err <= tol && report.max_imag_part <= imag_tol;
        pass &= ok;
        parts.push(format!(
            "λ={lambda}: err={:.2e} im={:.2e} {}",
            report.max_abs_err,
            report.max_imag_part,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    let in_time = within_budget(start, 5);
    if !in_time {
        parts.push("runtime over 5 s".into());
    }
    outcome(1, name, pass && in_time, parts.join("; "))
}

/// Largest error of the lowest `count` symmetrized grid levels.
fn grid_error(params: &PhysParams, grid: Grid, count: usize) -> Result<f64> {
    let (_, s) = numeric_spectrum(params, OrderingScheme::Symmetrized, &Backend::Grid(grid))?;
    Ok(s.lowest(count)
        .iter()
        .enumerate()
        .map(|(n, z)| (z - analytic_energy(params, n)).norm())
        .fold(0.0, f64::max))
}

pub fn criterion_2(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[1];
    let start = Instant::now();
    let run = || -> Result<(f64, f64, f64)> {
        let p = PhysParams::unit(1.0);
        let grid = Grid::sized_for(&p, 801)?;
        let coarse = grid_error(&p, grid, 5)?;
        let fine = grid_error(&p, grid.refined(), 5)?;
        // same study at λ = 0.5, reported only
        let q = PhysParams::unit(0.5);
        let g = Grid::sized_for(&q, 801)?;
        let side = grid_error(&q, g, 5)? / grid_error(&q, g.refined(), 5)?;
        Ok((coarse, fine, side))
    };
    match run() {
        Ok((coarse, fine, side)) => {
            let ratio = coarse / fine;
            let err_ok = coarse <= opts.tol(5e-3);
            let ratio_ok = (3.5..=4.5).contains(&ratio);
            let in_time = within_budget(start, 60);
            let detail = format!(
                "λ=1: err(801)={coarse:.2e} {} ; err(1601)={fine:.2e}; ratio={ratio:.2} {} [supplementary λ=0.5 ratio={side:.2}]{}",
                if err_ok { "ok" } else { "FAIL" },
                if ratio_ok { "ok" } else { "FAIL (expected 3.5-4.5)" },
                if in_time { "" } else { "; runtime over 60 s" }
            );
            outcome(2, name, err_ok && ratio_ok && in_time, detail)
        }
        Err(e) => failed(2, name, e),
    }
}

pub fn criterion_3(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[2];
    let p = PhysParams::unit(1.0);
    match fock(&p, 128).and_then(|b| ordering_shift_check(&p, &b, 11)) {
        Ok(r) => {
            let pass = r.max_deviation <= opts.tol(1e-8);
            let detail = format!(
                "n<=10: max|Δyp−0.25i|={:.2e}, max|Δpy+0.25i|={:.2e}",
                r.max_deviation_yp, r.max_deviation_py
            );
            outcome(3, name, pass, detail)
        }
        Err(e) => failed(3, name, e),
    }
}

fn nu_levels(preset: Preset, params: &PhysParams, count: usize) -> Result<Vec<Complex64>> {
    let problem = NUProblem::preset(preset, params)?;
    Ok(solve(&problem, count - 1)?.levels)
}

pub fn criterion_4(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[3];
    let tol = opts.tol(1e-10);
    let run = || -> Result<(f64, f64)> {
        let (mut corrected, mut printed) = (0.0f64, 0.0f64);
        for lambda in SPECTRUM_LAMBDAS {
            let p = PhysParams::unit(lambda);
            let offset = Complex64::new(0.0, 0.5 * p.hbar * lambda);
            let c = nu_levels(Preset::DampedSymCorrected, &p, 11)?;
            let s = nu_levels(Preset::DampedSymPrinted, &p, 11)?;
            for n in 0..11 {
                let oracle = analytic_energy(&p, n);
                corrected = corrected.max((c[n] - oracle).norm());
                printed = printed.max((s[n] - oracle - offset).norm());
            }
        }
        Ok((corrected, printed))
    };
    match run() {
        Ok((corrected, printed)) => outcome(
            4,
            name,
            corrected <= tol && printed <= tol,
            format!(
                "corrected vs ħΩ(n+½): {corrected:.2e}; printed vs ħΩ(n+½)+iħλ/2: {printed:.2e}"
            ),
        ),
        Err(e) => failed(4, name, e),
    }
}

pub fn criterion_5(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[4];
    let run = || -> Result<(f64, f64)> {
        let p = PhysParams::unit(0.0);
        let levels = nu_levels(Preset::PlainHo, &p, 11)?;
        let rel = levels
            .iter()
            .enumerate()
            .map(|(n, e)| {
                let want = p.hbar * p.omega * (n as f64 + 0.5);
                (e - want).norm() / want
            })
            .fold(0.0, f64::max);
        let mut worst_slope = f64::NEG_INFINITY;
        for preset in Preset::ALL {
            for lambda in SPECTRUM_LAMBDAS {
                let problem = NUProblem::preset(preset, &PhysParams::unit(lambda))?;
                for root in discriminant_condition(&problem)? {
                    let branch = select_branch(&problem, &root, Complex64::new(0.0, 0.0))?;
                    worst_slope = worst_slope.max(branch.tau_slope().re);
                }
            }
        }
        Ok((rel, worst_slope))
    };
    match run() {
        Ok((rel, slope)) => outcome(
            5,
            name,
            rel <= opts.tol(1e-12) && slope < 0.0,
            format!("plain-ho max rel err={rel:.2e}; max Re τ' over presets={slope:.4}"),
        ),
        Err(e) => failed(5, name, e),
    }
}

pub fn criterion_6(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[5];
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    let grid = match Grid::new(10.0, 401) {
        Ok(g) => g,
        Err(e) => return failed(6, name, e),
    };
    let (lo, hi) = (
        2.0 - 0.2 * opts.tolerance_scale,
        2.0 + 0.2 * opts.tolerance_scale,
    );
    for lambda in GAUGE_LAMBDAS {
        let p = PhysParams::unit(lambda);
        let good = gauge_equivalence_defect(&grid, &p, TargetVariant::LambdaSqOver4);
        let order = good.order.unwrap_or(f64::NAN);
        let order_ok = (lo..=hi).contains(&order);
        let bad = gauge_equivalence_defect(&grid, &p, TargetVariant::LambdaSqOver2);
        let bad_ok = bad.defect >= 1e-2 && bad.coarse_defect >= 1e-2;
        pass &= order_ok && bad_ok;
        parts.push(format!(
            "λ={lambda}: order={order:.3} {}, λ²/2 defect {:.3e}→{:.3e} {}",
            if order_ok { "ok" } else { "FAIL" },
            bad.coarse_defect,
            bad.defect,
            if bad_ok { "ok" } else { "FAIL" }
        ));
    }
    match gauge_eigenvalue_gap(
        &Grid::new(10.0, 801).expect("valid grid"),
        &PhysParams::unit(1.0),
        TargetVariant::LambdaSqOver4,
        PROBE_MODES,
    ) {
        Ok(gap) => {
            let ok = gap <= opts.tol(5e-3);
            pass &= ok;
            parts.push(format!(
                "λ=1 low-8 gap={gap:.2e}·ħΩ {}",
                if ok { "ok" } else { "FAIL" }
            ));
        }
        Err(e) => return failed(6, name, e),
    }
    let in_time = within_budget(start, 120);
    if !in_time {
        parts.push("runtime over 120 s".into());
    }
    outcome(6, name, pass && in_time, parts.join("; "))
}

pub fn criterion_7(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[6];
    let p = PhysParams::unit(1.0);
    match fock(&p, 64) {
        Ok(b) => {
            let d = completed_square_defect(&b, &p);
            outcome(
                7,
                name,
                d <= opts.tol(1e-12),
                format!("n_basis=64, λ=1: defect={d:.2e}"),
            )
        }
        Err(e) => failed(7, name, e),
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    a.add(&adjoint(&a)).expect("square").scale_real(0.5)
}

pub fn criterion_8(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[7];
    let run = || -> Result<(f64, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut agree: f64 = 0.0;
        let mut trace: f64 = 0.0;
        let mut residual: f64 = 0.0;
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 50);
            let g = eig_general_default(&h)?;
            let s = eig_hermitian(&h, DEFAULT_TOL)?;
            for (x, y) in g.eigenvalues.iter().zip(&s.eigenvalues) {
                agree = agree.max((x - y).norm());
            }
            trace = trace
                .max(g.trace_defect)
                .max(g.trace2_defect)
                .max(s.trace_defect)
                .max(s.trace2_defect);
            residual = residual.max(inverse_iteration_residual(&h, s.eigenvalues[0])?);
        }
        for lambda in SPECTRUM_LAMBDAS {
            let p = PhysParams::unit(lambda);
            let b = fock(&p, 128)?;
            for ordering in OrderingScheme::ALL {
                let (h, s) = numeric_spectrum(&p, ordering, &b)?;
                trace = trace.max(s.trace_defect).max(s.trace2_defect);
                residual = residual.max(inverse_iteration_residual(&h, s.eigenvalues[0])?);
            }
        }
        let p = PhysParams::unit(1.0);
        let (h, s) = numeric_spectrum(
            &p,
            OrderingScheme::Symmetrized,
            &Backend::Grid(Grid::sized_for(&p, 801)?),
        )?;
        trace = trace.max(s.trace_defect).max(s.trace2_defect);
        residual = residual.max(inverse_iteration_residual(&h, s.eigenvalues[0])?);
        Ok((agree, trace, residual))
    };
    match run() {
        Ok((agree, trace, residual)) => outcome(
            8,
            name,
            agree <= opts.tol(1e-9) && trace <= opts.tol(1e-10) && residual <= opts.tol(1e-8),
            format!("general vs hermitian={agree:.2e}; max trace defect={trace:.2e}; max ground residual={residual:.2e}"),
        ),
        Err(e) => failed(8, name, e),
    }
}

pub fn criterion_9(_opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[8];
    let run = || -> Result<(bool, bool, bool)> {
        let critical = PhysParams::unit(2.0);
        let zero = (0..=10).all(|n| analytic_energy(&critical, n) == Complex64::new(0.0, 0.0));
        let is_critical = regime_of(&critical) == Regime::Critical;
        let over = PhysParams::unit(3.0);
        let report = compare_spectrum(
            &over,
            OrderingScheme::Symmetrized,
            &fock(&over, 128)?,
            8,
            None,
        )?;
        let flagged = !report.pass
            && !report.comparison_enabled
            && crate::cli::spectrum_exit_code(&report) == 2;
        Ok((zero, is_critical, flagged))
    };
    match run() {
        Ok((zero, is_critical, flagged)) => outcome(
            9,
            name,
            zero && is_critical && flagged,
            format!("λ=2: analytic all zero={zero}, regime critical={is_critical}; λ=3: comparison flagged off with exit 2={flagged}"),
        ),
        Err(e) => failed(9, name, e),
    }
}

/// Re-runs the cheap criteria and compares their serialized outcomes.
pub fn criterion_10(opts: &VerifyOptions) -> CriterionOutcome {
    let name = NAMES[9];
    let cheap: [fn(&VerifyOptions) -> CriterionOutcome; 6] = [
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let render = || {
        serde_json::to_string(&cheap.iter().map(|f| f(opts)).collect::<Vec<_>>())
            .unwrap_or_default()
    };
    let (a, b) = (render(), render());
    outcome(
        10,
        name,
        !a.is_empty() && a == b,
        format!(
            "criteria 3,4,5,7,8,9 serialized twice: identical={}",
            a == b
        ),
    )
}

pub const CRITERIA: [fn(&VerifyOptions) -> CriterionOutcome; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> TimedOutcome {
    let start = Instant::now();
    let outcome = CRITERIA[usize::from(id) - 1](opts);
    TimedOutcome {
        outcome,
        elapsed: start.elapsed(),
    }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<TimedOutcome> {
    (1..=10).map(|id| run_criterion(id, opts)).collect()
}
