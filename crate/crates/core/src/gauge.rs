//! The phase η = exp(imλy²/4ħ) and the frequency-shifted oscillator it maps
//! the symmetrized Hamiltonian onto.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, frobenius_norm, matmul, ComplexMatrix, DEFAULT_TOL};
use crate::model::{OrderingScheme, PhysParams};
use crate::operators::{Backend, Grid, OperatorSet};

/// Modes used to probe operator identities on the grid.
pub const PROBE_MODES: usize = 8;
const UNITARY_TOL: f64 = 1e-12;

/// Which frequency shift the target oscillator carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TargetVariant {
    /// ω² − λ²/4, the shift the completed square produces.
    #[default]
    #[serde(rename = "lambda-sq-over-4")]
    LambdaSqOver4,
    /// ω² − λ²/2
    #[serde(rename = "lambda-sq-over-2")]
    LambdaSqOver2,
}

impl TargetVariant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LambdaSqOver4 => "lambda-sq-over-4",
            Self::LambdaSqOver2 => "lambda-sq-over-2",
        }
    }

    fn divisor(&self) -> f64 {
        match self {
            Self::LambdaSqOver4 => 4.0,
            Self::LambdaSqOver2 => 2.0,
        }
    }

    /// ω² − λ²/divisor
    pub fn squared_frequency(&self, params: &PhysParams) -> f64 {
        params.omega * params.omega - params.lambda_damp * params.lambda_damp / self.divisor()
    }
}

impl fmt::Display for TargetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "lambda-sq-over-4" => Ok(Self::LambdaSqOver4),
            "lambda-sq-over-2" => Ok(Self::LambdaSqOver2),
            _ => Err(format!(
                "unknown variant '{s}' (expected lambda-sq-over-4 or lambda-sq-over-2)"
            )),
        }
    }
}

/// Diagonal of exp(imλy_j²/4ħ).
pub fn gauge_phase_entries(grid: &Grid, params: &PhysParams) -> Vec<Complex64> {
    let c = params.m * params.lambda_damp / (4.0 * params.hbar);
    grid.nodes()
        .iter()
        .map(|&y| Complex64::from_polar(1.0, c * y * y))
        .collect()
}

pub fn gauge_phase(grid: &Grid, params: &PhysParams) -> ComplexMatrix {
    ComplexMatrix::from_diag(&gauge_phase_entries(grid, params))
}

/// U·H·U† for diagonal unitary U.
pub fn conjugate(h: &ComplexMatrix, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = h.dim();
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: u.dim(),
        });
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && u[(i, j)] != Complex64::new(0.0, 0.0) {
                return Err(Error::NotUnitaryDiagonal(format!(
                    "off-diagonal entry at ({i}, {j})"
                )));
            }
        }
        let modulus = u[(i, i)].norm();
        if (modulus - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NotUnitaryDiagonal(format!("|u[{i}]| = {modulus}")));
        }
    }
    let d = u.diagonal();
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        d[i] * h[(i, j)] * d[j].conj()
    }))
}

/// p²/2m + ½m(ω² − λ²/4)y².
pub fn shifted_oscillator(ctx: &Backend, params: &PhysParams) -> ComplexMatrix {
    shifted_oscillator_variant(ctx, params, TargetVariant::LambdaSqOver4)
}

pub fn shifted_oscillator_variant(
    ctx: &Backend,
    params: &PhysParams,
    variant: TargetVariant,
) -> ComplexMatrix {
    let ops = OperatorSet::build(ctx, params);
    let potential = ops
        .y2
        .scale_real(0.5 * params.m * variant.squared_frequency(params));
    ops.kinetic.add(&potential).expect("same size")
}

/// Frequency of the probe modes: Ω_eff, floored like the grid sizing rule.
fn probe_frequency(params: &PhysParams) -> f64 {
    let floor = 1e-6 * params.omega * params.omega;
    let w = params.radicand().max(floor).sqrt();
    if w > 0.0 {
        w
    } else {
        1.0
    }
}

/// Oscillator modes at `omega`, optionally multiplied by a node-wise phase.
fn probe_block(
    grid: &Grid,
    params: &PhysParams,
    omega: f64,
    phase: Option<&[Complex64]>,
) -> Vec<Vec<Complex64>> {
    grid.oscillator_modes(params, omega, PROBE_MODES)
        .into_iter()
        .map(|mode| {
            mode.iter()
                .enumerate()
                .map(|(j, &v)| phase.map_or(Complex64::new(v, 0.0), |ph| ph[j] * v))
                .collect()
        })
        .collect()
}

/// ‖D·Φ‖_F / ‖R·Φ‖_F over the columns of Φ.
fn subspace_ratio(d: &ComplexMatrix, reference: &ComplexMatrix, probes: &[Vec<Complex64>]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for v in probes {
        num += d.matvec(v).iter().map(|z| z.norm_sqr()).sum::<f64>();
        den += reference
            .matvec(v)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>();
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Distance between (P + mλY/2)²/2m + ½m(ω² − λ²/4)Y² and H_sym.
///
/// Fock: relative Frobenius distance on the leading n_basis − 2 block, where
/// the identity is exact. Grid: the distance is measured on the lowest
/// [`PROBE_MODES`] eigenfunctions exp(−imλy²/4ħ)φₙ of H_sym, because P·P and
/// the three-point kinetic stencil differ by O(1/h²) at the top of the band.
pub fn completed_square_defect(ctx: &Backend, params: &PhysParams) -> f64 {
    let m = params.m;
    let h_sym = build_sym(ctx, params);
    let shift = 0.5 * m * TargetVariant::LambdaSqOver4.squared_frequency(params);
    let half_ml = Complex64::new(0.5 * m * params.lambda_damp, 0.0);
    match ctx {
        Backend::Fock(b) => {
            let y = b.padded_position(params);
            let p = b.padded_momentum(params);
            let a = p.add(&y.scale(half_ml)).expect("same basis");
            let a2 = matmul(&a, &a).expect("same basis").scale_real(0.5 / m);
            let y2 = matmul(&y, &y).expect("same basis").scale_real(shift);
            let keep = b.n_basis.saturating_sub(2).max(1);
            let completed = a2.add(&y2).expect("same basis").crop(keep);
            let h = h_sym.crop(keep);
            frobenius_norm(&completed.sub(&h).expect("same size"))
                / frobenius_norm(&h).max(f64::MIN_POSITIVE)
        }
        Backend::Grid(g) => {
            let ops = OperatorSet::build(ctx, params);
            let a = ops.p.add(&ops.y.scale(half_ml)).expect("same grid");
            let a2 = matmul(&a, &a).expect("same grid").scale_real(0.5 / m);
            let completed = a2.add(&ops.y2.scale_real(shift)).expect("same grid");
            let diff = completed.sub(&h_sym).expect("same grid");
            let phase: Vec<_> = gauge_phase_entries(g, params)
                .iter()
                .map(|u| u.conj())
                .collect();
            let probes = probe_block(g, params, probe_frequency(params), Some(&phase));
            subspace_ratio(&diff, &h_sym, &probes)
        }
    }
}

fn build_sym(ctx: &Backend, params: &PhysParams) -> ComplexMatrix {
    OperatorSet::build(ctx, params).hamiltonian(params, OrderingScheme::Symmetrized)
}

/// Defects at two nested resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeDefect {
    /// Defect on the refined grid.
    pub defect: f64,
    pub coarse_defect: f64,
    /// log₂(coarse/fine); `None` when both vanish identically.
    pub order: Option<f64>,
    /// ‖U·H_sym·U† − H'‖_F / ‖H'‖_F on the refined grid.
    pub raw_frobenius: f64,
}

/// Subspace defect of U·H_sym·U† against H' on a single grid.
fn gauge_defect_at(grid: &Grid, params: &PhysParams, variant: TargetVariant) -> (f64, f64) {
    let ctx = Backend::Grid(*grid);
    let u = gauge_phase(grid, params);
    let conj = conjugate(&build_sym(&ctx, params), &u).expect("phase is unitary");
    let target = shifted_oscillator_variant(&ctx, params, variant);
    let diff = conj.sub(&target).expect("same grid");
    let probes = probe_block(grid, params, probe_frequency(params), None);
    let raw = frobenius_norm(&diff) / frobenius_norm(&target).max(f64::MIN_POSITIVE);
    (subspace_ratio(&diff, &target, &probes), raw)
}

/// Measures how U·H_sym·U† − H' shrinks between `grid` and its refinement.
///
/// The defect is taken on the lowest [`PROBE_MODES`] oscillator modes at Ω_eff:
/// a whole-matrix Frobenius ratio is dominated by the 1/h² band edge and
/// shrinks even for a wrong target.
pub fn gauge_equivalence_defect(
    grid: &Grid,
    params: &PhysParams,
    variant: TargetVariant,
) -> GaugeDefect {
    let (coarse, _) = gauge_defect_at(grid, params, variant);
    let (fine, raw_frobenius) = gauge_defect_at(&grid.refined(), params, variant);
    let order = if coarse == 0.0 && fine == 0.0 {
        None
    } else {
        Some((coarse / fine).log2())
    };
    GaugeDefect {
        defect: fine,
        coarse_defect: coarse,
        order,
        raw_frobenius,
    }
}

/// Largest gap between the lowest `count` eigenvalues of U·H_sym·U† and H',
/// in units of ħΩ_eff.
pub fn gauge_eigenvalue_gap(
    grid: &Grid,
    params: &PhysParams,
    variant: TargetVariant,
    count: usize,
) -> Result<f64> {
    let ctx = Backend::Grid(*grid);
    let conj = conjugate(&build_sym(&ctx, params), &gauge_phase(grid, params))?;
    let target = shifted_oscillator_variant(&ctx, params, variant);
    let a = eig_hermitian(&conj, DEFAULT_TOL)?;
    let b = eig_hermitian(&target, DEFAULT_TOL)?;
    let gap = a
        .lowest(count)
        .iter()
        .zip(b.lowest(count))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(gap / (params.hbar * probe_frequency(params)))
}

/// Outcome of the combined convergence and spectrum check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeCheck {
    pub variant: TargetVariant,
    pub coarse_points: usize,
    pub fine_points: usize,
    pub defect: GaugeDefect,
    /// In units of ħΩ_eff.
    pub eigenvalue_gap: f64,
    pub pass: bool,
}

pub const ORDER_RANGE: (f64, f64) = (1.8, 2.2);
pub const EIGENVALUE_GAP_TOL: f64 = 5e-3;

pub fn gauge_check(grid: &Grid, params: &PhysParams, variant: TargetVariant) -> Result<GaugeCheck> {
    params.validate()?;
    let defect = gauge_equivalence_defect(grid, params, variant);
    let eigenvalue_gap = gauge_eigenvalue_gap(grid, params, variant, PROBE_MODES)?;
    let order_ok = defect
        .order
        .is_none_or(|p| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&p));
    Ok(GaugeCheck {
        variant,
        coarse_points: grid.n_points,
        fine_points: grid.refined().n_points,
        defect,
        eigenvalue_gap,
        pass: order_ok && eigenvalue_gap <= EIGENVALUE_GAP_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::{random_matrix, rng};
    use crate::linalg::{adjoint, eig_general_default};
    use crate::model::analytic_energy;
    use crate::operators::{build_hamiltonian, FockBasis};
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn l10(n: usize) -> Grid {
        Grid::new(10.0, n).unwrap()
    }

    #[test]
    fn phase_trivial_cases() {
        let g = l10(41);
        assert_eq!(
            gauge_phase(&g, &PhysParams::unit(0.0)),
            ComplexMatrix::identity(41)
        );
        let u = gauge_phase(&g, &PhysParams::unit(1.0));
        assert_eq!(u[(20, 20)], c(1.0, 0.0));
    }

    #[test]
    fn phase_at_y_equals_two() {
        // nodes −2, −1, 0, 1, 2
        let u = gauge_phase(&Grid::new(2.0, 5).unwrap(), &PhysParams::unit(1.0));
        let z = u[(4, 4)];
        assert!((z.re - 0.5403023059).abs() < 1e-10);
        assert!((z.im - 0.8414709848).abs() < 1e-10);
    }

    #[test]
    fn phase_is_unitary() {
        for lambda in [0.3, 1.0, 1.9] {
            let g = l10(201);
            let u = gauge_phase(&g, &PhysParams::unit(lambda));
            for z in u.diagonal() {
                assert!((z.norm() - 1.0).abs() <= 1e-15);
            }
            let uu = matmul(&u, &adjoint(&u)).unwrap();
            let defect = frobenius_norm(&uu.sub(&ComplexMatrix::identity(201)).unwrap());
            assert!(defect <= 1e-13 * (201f64).sqrt());
        }
    }

    #[test]
    fn conjugate_identity_and_diagonal() {
        let mut r = rng(3);
        let h = random_matrix(&mut r, 12);
        assert_eq!(conjugate(&h, &ComplexMatrix::identity(12)).unwrap(), h);
        let d = ComplexMatrix::from_real_diag(&(0..12).map(|i| i as f64).collect::<Vec<_>>());
        let u = ComplexMatrix::from_diag(
            &(0..12)
                .map(|i| Complex64::from_polar(1.0, 0.7 * i as f64))
                .collect::<Vec<_>>(),
        );
        let got = conjugate(&d, &u).unwrap();
        assert!(got.max_abs_diff(&d) <= 1e-15);
    }

    #[test]
    fn conjugate_preserves_spectrum() {
        let mut r = rng(11);
        for _ in 0..5 {
            let h = random_matrix(&mut r, 20);
            let u = ComplexMatrix::from_diag(
                &(0..20)
                    .map(|_| Complex64::from_polar(1.0, r.gen_range(-3.0..3.0)))
                    .collect::<Vec<_>>(),
            );
            let a = eig_general_default(&h).unwrap().eigenvalues;
            let b = eig_general_default(&conjugate(&h, &u).unwrap())
                .unwrap()
                .eigenvalues;
            let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() <= 1e-10 * scale, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn conjugate_rejects_non_unitary() {
        let h = ComplexMatrix::identity(3);
        let u = ComplexMatrix::from_real_diag(&[1.0, 2.0, 1.0]);
        assert!(matches!(
            conjugate(&h, &u),
            Err(Error::NotUnitaryDiagonal(_))
        ));
        let mut dense = ComplexMatrix::identity(3);
        dense[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            conjugate(&h, &dense),
            Err(Error::NotUnitaryDiagonal(_))
        ));
        assert!(matches!(
            conjugate(&h, &ComplexMatrix::identity(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shifted_oscillator_at_zero_damping_is_plain() {
        let p = PhysParams::unit(0.0);
        for ctx in [
            Backend::Grid(l10(51)),
            Backend::Fock(FockBasis::for_params(&p, 32).unwrap()),
        ] {
            let a = shifted_oscillator(&ctx, &p);
            let b = build_hamiltonian(&ctx, &p, OrderingScheme::Symmetrized);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn shifted_oscillator_fock_spectrum() {
        let p = PhysParams::unit(1.0);
        let ctx = Backend::Fock(FockBasis::for_params(&p, 128).unwrap());
        let s = eig_hermitian(&shifted_oscillator(&ctx, &p), DEFAULT_TOL).unwrap();
        assert!((s.eigenvalues[0].re - 0.4330127019).abs() < 1e-9);
        for n in 0..=10 {
            assert!(
                (s.eigenvalues[n] - analytic_energy(&p, n)).norm() < 1e-9,
                "n={n}"
            );
        }
    }

    #[test]
    fn critical_shift_is_free_particle() {
        let p = PhysParams::unit(2.0);
        let mut last = f64::INFINITY;
        for l in [5.0, 10.0, 20.0] {
            let g = Grid::new(l, 201).unwrap();
            let e0 = eig_hermitian(&shifted_oscillator(&Backend::Grid(g), &p), DEFAULT_TOL)
                .unwrap()
                .eigenvalues[0]
                .re;
            assert!(e0 > 0.0 && e0 < last);
            last = e0;
        }
        assert!(last < 0.01);
    }

    #[test]
    fn completed_square_fock() {
        let p0 = PhysParams::unit(0.0);
        let ctx = Backend::Fock(FockBasis::for_params(&p0, 64).unwrap());
        assert!(completed_square_defect(&ctx, &p0) <= 1e-14);
        assert!(completed_square_defect(&ctx, &PhysParams::unit(1.0)) <= 1e-12);
    }

    #[test]
    fn completed_square_grid_is_second_order() {
        let p = PhysParams::unit(1.0);
        let g = l10(201);
        let coarse = completed_square_defect(&Backend::Grid(g), &p);
        let fine = completed_square_defect(&Backend::Grid(g.refined()), &p);
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_damping_gauge_is_exact() {
        let d = gauge_equivalence_defect(
            &l10(101),
            &PhysParams::unit(0.0),
            TargetVariant::LambdaSqOver4,
        );
        assert_eq!(d.defect, 0.0);
        assert_eq!(d.order, None);
    }

    #[test]
    fn gauge_order_is_two() {
        let d = gauge_equivalence_defect(
            &l10(401),
            &PhysParams::unit(1.0),
            TargetVariant::LambdaSqOver4,
        );
        let order = d.order.unwrap();
        assert!((order - 2.0).abs() <= 0.2, "order {order}");
    }

    #[test]
    fn wrong_shift_does_not_converge() {
        let d = gauge_equivalence_defect(
            &l10(401),
            &PhysParams::unit(1.0),
            TargetVariant::LambdaSqOver2,
        );
        assert!(d.defect > 1e-2 && d.coarse_defect > 1e-2);
        assert!(d.order.unwrap().abs() < 0.2);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [TargetVariant::LambdaSqOver4, TargetVariant::LambdaSqOver2] {
            assert_eq!(v.name().parse::<TargetVariant>().unwrap(), v);
        }
        assert!("lambda".parse::<TargetVariant>().is_err());
    }
}
