//! Nikiforov–Uvarov reduction for ψ'' + (τ̃/σ)ψ' + (σ̃/σ²)ψ = 0.
//!
//! The energy enters only the constant term of σ̃, so σ̃(y; E) is stored as a
//! base polynomial plus `energy_coeff·E`. The pipeline:
//!
//! 1. [`discriminant_condition`] chooses k so that
//!    Q = ((σ' − τ̃)/2)² − σ̃ + kσ is a perfect square in y.
//! 2. [`select_branch`] forms π = (σ' − τ̃)/2 ± sqrt(Q) and keeps the sign with
//!    Re(τ') < 0, where τ = τ̃ + 2π.
//! 3. [`energy_levels`] solves λ(E) = k + π' against
//!    λₙ = −nτ' − n(n − 1)σ''/2.
//!
//! With constant σ every quantity is affine in E and step 3 is a linear solve;
//! otherwise each level is found by a complex secant iteration.

mod poly;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysParams;

pub use poly::ComplexPoly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const SECANT_MAX_ITER: usize = 100;
const SECANT_TOL: f64 = 1e-12;

/// `constant + slope·E`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub constant: Complex64,
    pub slope: Complex64,
}

impl Affine {
    pub fn new(constant: Complex64, slope: Complex64) -> Self {
        Self { constant, slope }
    }

    pub fn constant_only(constant: Complex64) -> Self {
        Self::new(constant, ZERO)
    }

    pub fn at(&self, energy: Complex64) -> Complex64 {
        self.constant + self.slope * energy
    }

    pub fn is_constant(&self) -> bool {
        self.slope == ZERO
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})·E", self.constant, self.slope)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NUProblem {
    pub sigma: ComplexPoly,
    pub tau_tilde: ComplexPoly,
    pub sigma_tilde_base: ComplexPoly,
    pub energy_coeff: Complex64,
    /// Level spacing used to seed the secant search, E ≈ level_guess·(n + ½).
    pub level_guess: f64,
}

impl NUProblem {
    pub fn new(
        sigma: ComplexPoly,
        tau_tilde: ComplexPoly,
        sigma_tilde_base: ComplexPoly,
        energy_coeff: Complex64,
    ) -> Result<Self> {
        if sigma.is_zero() {
            return Err(Error::InvalidProblem("sigma must not vanish".into()));
        }
        if sigma.degree() > 2 || tau_tilde.degree() > 1 || sigma_tilde_base.degree() > 2 {
            return Err(Error::InvalidProblem(format!(
                "degree bounds are sigma <= 2, tau~ <= 1, sigma~ <= 2; got {}, {}, {}",
                sigma.degree(),
                tau_tilde.degree(),
                sigma_tilde_base.degree()
            )));
        }
        if energy_coeff == ZERO {
            return Err(Error::InvalidProblem(
                "energy coefficient must be nonzero".into(),
            ));
        }
        Ok(Self {
            sigma,
            tau_tilde,
            sigma_tilde_base,
            energy_coeff,
            level_guess: 1.0,
        })
    }

    pub fn with_level_guess(mut self, level_guess: f64) -> Self {
        self.level_guess = level_guess;
        self
    }

    pub fn sigma_tilde(&self, energy: Complex64) -> ComplexPoly {
        &self.sigma_tilde_base + &ComplexPoly::constant(self.energy_coeff * energy)
    }

    /// σ̃(0; E), recorded as the β of the damped presets.
    pub fn beta_note(&self) -> Affine {
        Affine::new(self.sigma_tilde_base.coeff(0), self.energy_coeff)
    }

    /// ((σ' − τ̃)/2)² − σ̃_base: the energy- and k-free part of Q.
    fn q_fixed(&self) -> ComplexPoly {
        let half = self.half_drift();
        &(&half * &half) - &self.sigma_tilde_base
    }

    /// (σ' − τ̃)/2
    fn half_drift(&self) -> ComplexPoly {
        (&self.sigma.derivative() - &self.tau_tilde).scale(Complex64::new(0.5, 0.0))
    }

    /// Builds one of the shipped equations from the oscillator parameters.
    pub fn preset(preset: Preset, params: &PhysParams) -> Result<Self> {
        params.validate()?;
        let PhysParams {
            m,
            omega,
            lambda_damp,
            hbar,
        } = *params;
        let i = Complex64::new(0.0, 1.0);
        let two_m_hbar2 = 2.0 * m / (hbar * hbar);
        // −(2m/ħ²)·½mω²y²
        let quadratic = ComplexPoly::new(vec![
            ZERO,
            ZERO,
            Complex64::new(-m * m * omega * omega / (hbar * hbar), 0.0),
        ]);
        // −mλy/(iħ) = i·mλ/ħ·y
        let drift = ComplexPoly::linear(i * (m * lambda_damp / hbar));
        // (2m/ħ²)·(iħλ/4)
        let constant_shift = i * (two_m_hbar2 * hbar * lambda_damp * 0.25);
        let (tau_tilde, base) = match preset {
            Preset::PlainHo => (ComplexPoly::zero(), quadratic),
            Preset::DampedSymCorrected => {
                (drift, &quadratic + &ComplexPoly::constant(constant_shift))
            }
            Preset::DampedSymPrinted => {
                (drift, &quadratic - &ComplexPoly::constant(constant_shift))
            }
            Preset::DampedNaive => (drift, quadratic),
        };
        let problem = Self::new(
            ComplexPoly::constant(Complex64::new(1.0, 0.0)),
            tau_tilde,
            base,
            Complex64::new(two_m_hbar2, 0.0),
        )?;
        Ok(problem.with_level_guess(hbar * omega.max(f64::MIN_POSITIVE)))
    }
}

/// The shipped equations.
///
/// `DampedSymCorrected` carries +iħλ/4 in the bracket (what the symmetrized
/// Hamiltonian actually gives), `DampedSymPrinted` carries −iħλ/4, and
/// `DampedNaive` is the unsymmetrized yp equation with no constant term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "plain-ho")]
    PlainHo,
    #[serde(rename = "damped-sym-corrected")]
    DampedSymCorrected,
    #[serde(rename = "damped-sym-printed")]
    DampedSymPrinted,
    #[serde(rename = "damped-naive")]
    DampedNaive,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::PlainHo,
        Preset::DampedSymCorrected,
        Preset::DampedSymPrinted,
        Preset::DampedNaive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::PlainHo => "plain-ho",
            Preset::DampedSymCorrected => "damped-sym-corrected",
            Preset::DampedSymPrinted => "damped-sym-printed",
            Preset::DampedNaive => "damped-naive",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown preset '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// A solution k(E) of the perfect-square condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KRoot {
    /// Constant σ: the condition is linear in k with an affine solution.
    Affine(Affine),
    /// Linear in k with an E-dependent coefficient: k = numerator/denominator.
    Rational {
        numerator: Affine,
        denominator: Affine,
    },
    /// a·k² + b(E)·k + c(E) = 0; `sign` picks the root.
    Quadratic {
        a: Complex64,
        b: Affine,
        c: Affine,
        sign: f64,
    },
}

impl KRoot {
    pub fn at(&self, energy: Complex64) -> Complex64 {
        match *self {
            KRoot::Affine(k) => k.at(energy),
            KRoot::Rational {
                numerator,
                denominator,
            } => numerator.at(energy) / denominator.at(energy),
            KRoot::Quadratic { a, b, c, sign } => {
                let (b, c) = (b.at(energy), c.at(energy));
                (-b + sign * (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
            }
        }
    }

    pub fn as_affine(&self) -> Option<Affine> {
        match self {
            KRoot::Affine(k) => Some(*k),
            _ => None,
        }
    }
}

/// Solves q₁² − 4q₂q₀ = 0 for k, where Q(y; k, E) = q₂y² + q₁y + q₀.
pub fn discriminant_condition(problem: &NUProblem) -> Result<Vec<KRoot>> {
    let fixed = problem.q_fixed();
    let (a0, a1, a2) = (fixed.coeff(0), fixed.coeff(1), fixed.coeff(2));
    let s = &problem.sigma;
    let (s0, s1, s2) = (s.coeff(0), s.coeff(1), s.coeff(2));
    let eps = problem.energy_coeff;

    // q₂ = a2 + k·s2, q₁ = a1 + k·s1, q₀ = a0 + k·s0 − ε·E
    if a2 == ZERO && s2 == ZERO && a1 == ZERO && s1 == ZERO {
        return Err(Error::DegenerateProblem);
    }
    // (a1 + k s1)² − 4(a2 + k s2)(a0 − εE + k s0) = A k² + B(E) k + C(E)
    let quad = s1 * s1 - 4.0 * s2 * s0;
    let lin = Affine::new(2.0 * a1 * s1 - 4.0 * (a2 * s0 + s2 * a0), 4.0 * s2 * eps);
    let cst = Affine::new(a1 * a1 - 4.0 * a2 * a0, 4.0 * a2 * eps);

    if quad != ZERO {
        return Ok(vec![
            KRoot::Quadratic {
                a: quad,
                b: lin,
                c: cst,
                sign: 1.0,
            },
            KRoot::Quadratic {
                a: quad,
                b: lin,
                c: cst,
                sign: -1.0,
            },
        ]);
    }
    if lin.constant == ZERO && lin.slope == ZERO {
        // no k-dependence left: either no root or every k works
        return Err(Error::DegenerateProblem);
    }
    let numerator = Affine::new(-cst.constant, -cst.slope);
    if lin.is_constant() {
        let inv = 1.0 / lin.constant;
        Ok(vec![KRoot::Affine(Affine::new(
            numerator.constant * inv,
            numerator.slope * inv,
        ))])
    } else {
        Ok(vec![KRoot::Rational {
            numerator,
            denominator: lin,
        }])
    }
}

/// π and τ for the bound-state sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub pi_poly: ComplexPoly,
    pub tau: ComplexPoly,
    /// Principal sqrt of q₂, the slope of sqrt(Q).
    pub alpha: Complex64,
}

impl Branch {
    pub fn tau_slope(&self) -> Complex64 {
        self.tau.coeff(1)
    }
}

/// Forms both π± and returns the one whose τ' has negative real part.
///
/// `energy` only matters when the root is not affine.
pub fn select_branch(problem: &NUProblem, root: &KRoot, energy: Complex64) -> Result<Branch> {
    let k = root.at(energy);
    let q = &(&problem.q_fixed() + &problem.sigma.scale(k))
        - &ComplexPoly::constant(problem.energy_coeff * energy);
    let (q0, q1, q2) = (q.coeff(0), q.coeff(1), q.coeff(2));
    let a = q2.sqrt();
    let b = if a != ZERO { q1 / (2.0 * a) } else { q0.sqrt() };
    let root_poly = ComplexPoly::new(vec![b, a]);
    let half = problem.half_drift();

    let candidate = |sign: f64| {
        let pi_poly = &half + &root_poly.scale(Complex64::new(sign, 0.0));
        let tau = &problem.tau_tilde + &pi_poly.scale(Complex64::new(2.0, 0.0));
        Branch {
            pi_poly,
            tau,
            alpha: a,
        }
    };
    let plus = candidate(1.0);
    let minus = candidate(-1.0);
    let (sp, sm) = (plus.tau_slope().re, minus.tau_slope().re);
    match (sp < 0.0, sm < 0.0) {
        (true, true) => Ok(if sp <= sm { plus } else { minus }),
        (true, false) => Ok(plus),
        (false, true) => Ok(minus),
        (false, false) => Err(Error::NoBoundStateBranch {
            plus: plus.tau_slope().to_string(),
            minus: minus.tau_slope().to_string(),
        }),
    }
}

/// λₙ = −n·τ' − n(n − 1)·σ''/2
pub fn lambda_n(problem: &NUProblem, branch: &Branch, n: usize) -> Complex64 {
    let nf = n as f64;
    let sigma2 = problem.sigma.derivative().derivative().coeff(0);
    -nf * branch.tau_slope() - nf * (nf - 1.0) * sigma2 * 0.5
}

/// λ(E) = k(E) + π'
pub fn lambda_of(root: &KRoot, branch: &Branch, energy: Complex64) -> Complex64 {
    root.at(energy) + branch.pi_poly.derivative().coeff(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NUSolution {
    pub k: KRoot,
    /// Evaluated at the ground level when k is not affine.
    pub pi_poly: ComplexPoly,
    pub tau: ComplexPoly,
    pub alpha: Complex64,
    pub beta_note: Affine,
    /// λ(E) when it is affine in E.
    pub lambda_affine: Option<Affine>,
    pub levels: Vec<Complex64>,
}

/// Runs the full reduction for levels n = 0..=n_max.
pub fn solve(problem: &NUProblem, n_max: usize) -> Result<NUSolution> {
    let roots = discriminant_condition(problem)?;
    let mut last_err = Error::DegenerateProblem;
    for root in &roots {
        let attempt = match root {
            KRoot::Affine(k) => solve_affine(problem, root, *k, n_max),
            _ => solve_secant(problem, root, n_max),
        };
        match attempt {
            Ok(sol) => return Ok(sol),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// E₀ … E_{n_max}.
pub fn energy_levels(problem: &NUProblem, n_max: usize) -> Result<Vec<Complex64>> {
    solve(problem, n_max).map(|s| s.levels)
}

fn solve_affine(problem: &NUProblem, root: &KRoot, k: Affine, n_max: usize) -> Result<NUSolution> {
    let branch = select_branch(problem, root, ZERO)?;
    let lambda = Affine::new(k.constant + branch.pi_poly.derivative().coeff(0), k.slope);
    if lambda.slope == ZERO {
        return Err(Error::InvalidProblem(
            "lambda(E) does not depend on the energy".into(),
        ));
    }
    let levels = (0..=n_max)
        .map(|n| (lambda_n(problem, &branch, n) - lambda.constant) / lambda.slope)
        .collect();
    Ok(NUSolution {
        k: *root,
        pi_poly: branch.pi_poly,
        tau: branch.tau,
        alpha: branch.alpha,
        beta_note: problem.beta_note(),
        lambda_affine: Some(lambda),
        levels,
    })
}

fn mismatch(problem: &NUProblem, root: &KRoot, n: usize, energy: Complex64) -> Option<Complex64> {
    let branch = select_branch(problem, root, energy).ok()?;
    let f = lambda_of(root, &branch, energy) - lambda_n(problem, &branch, n);
    (f.re.is_finite() && f.im.is_finite()).then_some(f)
}

fn secant(problem: &NUProblem, root: &KRoot, n: usize) -> Result<Complex64> {
    let fail = Error::NonAffineEnergy { level: n };
    let guess = problem.level_guess * (n as f64 + 0.5);
    let mut e0 = Complex64::new(guess, 0.0);
    let mut e1 = Complex64::new(guess * (1.0 + 1e-3) + 1e-3, 1e-3);
    let mut f0 = mismatch(problem, root, n, e0).ok_or_else(|| fail.clone())?;
    let mut f1 = mismatch(problem, root, n, e1).ok_or_else(|| fail.clone())?;
    for _ in 0..SECANT_MAX_ITER {
        let df = f1 - f0;
        if df == ZERO {
            break;
        }
        let e2 = e1 - f1 * (e1 - e0) / df;
        if (e2 - e1).norm() <= SECANT_TOL * e2.norm().max(1.0) {
            return Ok(e2);
        }
        e0 = e1;
        f0 = f1;
        e1 = e2;
        f1 = mismatch(problem, root, n, e1).ok_or_else(|| fail.clone())?;
    }
    Err(fail)
}

fn solve_secant(problem: &NUProblem, root: &KRoot, n_max: usize) -> Result<NUSolution> {
    let levels = (0..=n_max)
        .map(|n| secant(problem, root, n))
        .collect::<Result<Vec<_>>>()?;
    let branch = select_branch(problem, root, levels[0])?;
    Ok(NUSolution {
        k: *root,
        pi_poly: branch.pi_poly,
        tau: branch.tau,
        alpha: branch.alpha,
        beta_note: problem.beta_note(),
        lambda_affine: None,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn affine_k(preset: Preset, lambda: f64) -> Affine {
        let p = NUProblem::preset(preset, &PhysParams::unit(lambda)).unwrap();
        let roots = discriminant_condition(&p).unwrap();
        assert_eq!(roots.len(), 1);
        roots[0].as_affine().unwrap()
    }

    #[test]
    fn k_for_presets() {
        let k = affine_k(Preset::PlainHo, 0.0);
        assert!(close(k.constant, c(0.0, 0.0), 1e-15) && close(k.slope, c(2.0, 0.0), 1e-15));
        let k = affine_k(Preset::DampedSymCorrected, 1.0);
        assert!(close(k.constant, c(0.0, 0.5), 1e-15) && close(k.slope, c(2.0, 0.0), 1e-15));
        let k = affine_k(Preset::DampedSymPrinted, 1.0);
        assert!(close(k.constant, c(0.0, -0.5), 1e-15) && close(k.slope, c(2.0, 0.0), 1e-15));
    }

    #[test]
    fn degenerate_problem() {
        // σ = 1, τ̃ = 0, σ̃ = E: Q = k − E has no y-structure
        let p = NUProblem::new(
            ComplexPoly::from_real(&[1.0]),
            ComplexPoly::zero(),
            ComplexPoly::zero(),
            c(1.0, 0.0),
        )
        .unwrap();
        assert_eq!(
            discriminant_condition(&p).unwrap_err(),
            Error::DegenerateProblem
        );
    }

    #[test]
    fn branch_plain_ho() {
        let p = NUProblem::preset(Preset::PlainHo, &PhysParams::unit(0.0)).unwrap();
        let root = discriminant_condition(&p).unwrap()[0];
        let b = select_branch(&p, &root, ZERO).unwrap();
        assert_eq!(b.pi_poly, ComplexPoly::from_real(&[0.0, -1.0]));
        assert_eq!(b.tau, ComplexPoly::from_real(&[0.0, -2.0]));
        assert_eq!(b.tau_slope(), c(-2.0, 0.0));
    }

    #[test]
    fn branch_damped_corrected() {
        let p = NUProblem::preset(Preset::DampedSymCorrected, &PhysParams::unit(1.0)).unwrap();
        let root = discriminant_condition(&p).unwrap()[0];
        let b = select_branch(&p, &root, ZERO).unwrap();
        let alpha = 0.75f64.sqrt();
        assert!((b.alpha.re - 0.8660254038).abs() < 1e-10);
        assert!(close(b.pi_poly.coeff(1), c(-alpha, -0.5), 1e-15));
        assert!(close(b.tau.coeff(1), c(-2.0 * alpha, 0.0), 1e-15));
        assert!(close(b.tau.coeff(0), ZERO, 0.0));
    }

    #[test]
    fn overdamped_has_no_bound_branch() {
        let p = NUProblem::preset(Preset::DampedSymCorrected, &PhysParams::unit(3.0)).unwrap();
        let root = discriminant_condition(&p).unwrap()[0];
        assert!(matches!(
            select_branch(&p, &root, ZERO),
            Err(Error::NoBoundStateBranch { .. })
        ));
        assert!(matches!(
            energy_levels(&p, 3),
            Err(Error::NoBoundStateBranch { .. })
        ));
    }

    #[test]
    fn plain_ho_levels() {
        let p = NUProblem::preset(Preset::PlainHo, &PhysParams::unit(0.0)).unwrap();
        let e = energy_levels(&p, 3).unwrap();
        assert_eq!(e, vec![c(0.5, 0.0), c(1.5, 0.0), c(2.5, 0.0), c(3.5, 0.0)]);
    }

    #[test]
    fn plain_ho_levels_general_units() {
        let params = PhysParams::new(1.7, 0.9, 0.0, 0.6).unwrap();
        let p = NUProblem::preset(Preset::PlainHo, &params).unwrap();
        for (n, e) in energy_levels(&p, 20).unwrap().into_iter().enumerate() {
            let expected = params.hbar * params.omega * (n as f64 + 0.5);
            assert!(
                (e.re - expected).abs() <= 4.0 * f64::EPSILON * expected,
                "n={n}"
            );
            assert_eq!(e.im, 0.0);
        }
    }

    #[test]
    fn damped_corrected_levels_are_real() {
        let p = NUProblem::preset(Preset::DampedSymCorrected, &PhysParams::unit(1.0)).unwrap();
        let e = energy_levels(&p, 2).unwrap();
        let expected = [0.4330127019, 1.2990381057, 2.1650635095];
        for (got, want) in e.iter().zip(expected) {
            assert!((got.re - want).abs() < 1e-10);
            assert!(got.im.abs() <= 1e-12 * got.re.abs());
        }
    }

    #[test]
    fn damped_printed_levels_pick_up_imaginary_offset() {
        let p = NUProblem::preset(Preset::DampedSymPrinted, &PhysParams::unit(1.0)).unwrap();
        for (n, e) in energy_levels(&p, 5).unwrap().into_iter().enumerate() {
            let want = c(0.8660254038 * (n as f64 + 0.5), 0.5);
            assert!(close(e, want, 1e-9), "n={n}: {e}");
        }
    }

    #[test]
    fn damped_naive_matches_yp_offset() {
        // unsymmetrized equation: levels shifted by +iħλ/4
        let p = NUProblem::preset(Preset::DampedNaive, &PhysParams::unit(1.0)).unwrap();
        for (n, e) in energy_levels(&p, 5).unwrap().into_iter().enumerate() {
            assert!(
                close(e, c(0.75f64.sqrt() * (n as f64 + 0.5), 0.25), 1e-12),
                "n={n}"
            );
        }
    }

    #[test]
    fn corrected_preset_is_real_below_critical() {
        for lambda in [0.0, 0.5, 1.0, 1.5, 1.9] {
            let p =
                NUProblem::preset(Preset::DampedSymCorrected, &PhysParams::unit(lambda)).unwrap();
            for e in energy_levels(&p, 10).unwrap() {
                assert!(e.im.abs() <= 1e-12 * e.re.abs(), "lambda={lambda}: {e}");
            }
        }
    }

    #[test]
    fn reconstruction_identity() {
        for preset in Preset::ALL {
            let params = PhysParams::new(1.3, 1.1, 0.8, 0.9).unwrap();
            let p = NUProblem::preset(preset, &params).unwrap();
            let sol = solve(&p, 10).unwrap();
            let branch = Branch {
                pi_poly: sol.pi_poly.clone(),
                tau: sol.tau.clone(),
                alpha: sol.alpha,
            };
            assert!(sol.tau.degree() <= 1);
            assert!(sol.tau.coeff(1).re < 0.0);
            assert_eq!(sol.tau, &p.tau_tilde + &sol.pi_poly.scale(c(2.0, 0.0)));
            for (n, &e) in sol.levels.iter().enumerate() {
                let lhs = lambda_of(&sol.k, &branch, e);
                let rhs = lambda_n(&p, &branch, n);
                assert!(
                    (lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0),
                    "{preset} n={n}"
                );
            }
        }
    }

    #[test]
    fn beta_note_records_printed_constant() {
        // β = (2m/ħ²)(E − iħλ/4) for the printed-sign equation
        let p = NUProblem::preset(Preset::DampedSymPrinted, &PhysParams::unit(1.0)).unwrap();
        let beta = p.beta_note();
        assert!(close(beta.constant, c(0.0, -0.5), 1e-15));
        assert_eq!(beta.slope, c(2.0, 0.0));
    }

    /// σ = y, τ̃ = 1, σ̃ = −y² + E: k = ±2·sqrt(−E), levels E = −(n + ½)².
    fn radial_problem() -> NUProblem {
        NUProblem::new(
            ComplexPoly::from_real(&[0.0, 1.0]),
            ComplexPoly::from_real(&[1.0]),
            ComplexPoly::from_real(&[0.0, 0.0, -1.0]),
            c(1.0, 0.0),
        )
        .unwrap()
        .with_level_guess(-1.0)
    }

    #[test]
    fn non_affine_problem_uses_secant() {
        let p = radial_problem();
        let roots = discriminant_condition(&p).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|r| r.as_affine().is_none()));
        let sol = solve(&p, 4).unwrap();
        assert!(sol.lambda_affine.is_none());
        for (n, e) in sol.levels.iter().enumerate() {
            let want = -(n as f64 + 0.5).powi(2);
            assert!(close(*e, c(want, 0.0), 1e-10), "n={n}: {e}");
        }
    }

    #[test]
    fn secant_failure_is_reported() {
        // guesses far from the only convergent region and a flat mismatch
        let p = radial_problem().with_level_guess(f64::NAN);
        assert!(matches!(solve(&p, 0), Err(Error::NonAffineEnergy { .. })));
    }

    #[test]
    fn problem_validation() {
        let one = ComplexPoly::from_real(&[1.0]);
        assert!(NUProblem::new(
            ComplexPoly::zero(),
            ComplexPoly::zero(),
            one.clone(),
            c(1.0, 0.0)
        )
        .is_err());
        assert!(NUProblem::new(
            one.clone(),
            ComplexPoly::from_real(&[0.0, 0.0, 1.0]),
            one.clone(),
            c(1.0, 0.0)
        )
        .is_err());
        assert!(NUProblem::new(one.clone(), ComplexPoly::zero(), one, ZERO).is_err());
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("harmonic".parse::<Preset>().is_err());
    }
}
