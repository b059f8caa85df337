//! Property tests over the public API.

use dho::gauge::{conjugate, gauge_phase};
use dho::linalg::{eig_general_default, eig_hermitian, ComplexMatrix, DEFAULT_TOL};
use dho::nu::{energy_levels, NUProblem, Preset};
use dho::operators::{build_hamiltonian, FockBasis};
use dho::{
    analytic_energy, cli::fmt_num, ordering_shift, Backend, Grid, OrderingScheme, PhysParams,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let data = v
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(n, data).unwrap()
    })
}

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n).prop_map(|a| {
        let n = a.dim();
        ComplexMatrix::from_fn(n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()))
    })
}

fn underdamped() -> impl Strategy<Value = PhysParams> {
    (0.3f64..3.0, 0.3f64..3.0, 0.0f64..0.95, 0.3f64..3.0).prop_map(|(m, omega, frac, hbar)| {
        PhysParams::new(m, omega, 2.0 * omega * frac, hbar).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn general_solver_trace_identities(a in (2usize..12).prop_flat_map(matrix)) {
        let s = eig_general_default(&a).unwrap();
        prop_assert!(s.converged);
        prop_assert!(s.trace_defect <= 1e-10);
        prop_assert!(s.trace2_defect <= 1e-10);
    }

    #[test]
    fn solvers_agree_on_hermitian(h in (2usize..12).prop_flat_map(hermitian)) {
        let g = eig_general_default(&h).unwrap();
        let s = eig_hermitian(&h, DEFAULT_TOL).unwrap();
        for (x, y) in g.eigenvalues.iter().zip(&s.eigenvalues) {
            prop_assert!((x - y).norm() <= 1e-9);
        }
    }

    #[test]
    fn conjugation_keeps_spectrum(
        a in matrix(8),
        phases in prop::collection::vec(-3.0f64..3.0, 8),
    ) {
        let u = ComplexMatrix::from_diag(&phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect::<Vec<_>>());
        let x = eig_general_default(&a).unwrap().eigenvalues;
        let y = eig_general_default(&conjugate(&a, &u).unwrap()).unwrap().eigenvalues;
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).norm() <= 1e-10 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn gauge_phase_has_unit_modulus(p in underdamped(), l in 1.0f64..20.0) {
        let u = gauge_phase(&Grid::new(l, 101).unwrap(), &p);
        for z in u.diagonal() {
            prop_assert!((z.norm() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn fock_ordering_offset_is_exact(p in underdamped()) {
        let ctx = Backend::Fock(FockBasis::for_params(&p, 24).unwrap());
        let sym = build_hamiltonian(&ctx, &p, OrderingScheme::Symmetrized);
        for ordering in [OrderingScheme::Yp, OrderingScheme::Py] {
            let h = build_hamiltonian(&ctx, &p, ordering);
            let expected = sym.shifted(ordering_shift(&p, ordering));
            let scale = 1.0 + p.hbar * p.lambda_damp;
            prop_assert!(h.max_abs_diff(&expected) <= 1e-13 * scale * 24.0);
        }
    }

    #[test]
    fn corrected_nu_levels_match_formula(p in underdamped()) {
        let levels = energy_levels(&NUProblem::preset(Preset::DampedSymCorrected, &p).unwrap(), 10).unwrap();
        for (n, e) in levels.iter().enumerate() {
            let want = analytic_energy(&p, n);
            prop_assert!((e - want).norm() <= 1e-12 * (1.0 + want.norm()));
            prop_assert!(e.im.abs() <= 1e-12 * (1.0 + e.re.abs()));
        }
    }

    #[test]
    fn formula_nonincreasing_in_damping(omega in 0.1f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0, n in 0usize..20) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let at = |f: f64| analytic_energy(&PhysParams::new(1.0, omega, 2.0 * omega * f, 1.0).unwrap(), n).re;
        prop_assert!(at(hi) <= at(lo));
    }

    #[test]
    fn seventeen_digit_text_round_trips(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }
}
