//! Matrix representations of y, p and the damped-oscillator Hamiltonian on a
//! position grid and in a truncated oscillator (Fock) basis.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adjoint, frobenius_norm, matmul, ComplexMatrix};
use crate::model::{OrderingScheme, PhysParams};

pub const DEFAULT_GRID_POINTS: usize = 801;
pub const DEFAULT_FOCK_BASIS: usize = 128;
pub const DEFAULT_FOCK_PAD: usize = 2;

/// Uniform mesh on [−L, L] with Dirichlet walls just outside the end nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParams(format!(
                "grid half-width must be > 0, got {half_width}"
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 3 points, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    /// Half-width 8/sqrt(m·Ω_eff/ħ), with Ω_eff floored at 1e-3·ω, so the
    /// ground-state tail at the wall is below 1e-13.
    pub fn default_half_width(params: &PhysParams) -> f64 {
        let small = 1e-6 * params.omega * params.omega;
        let omega_eff = params.radicand().max(small).sqrt();
        8.0 / (params.m * omega_eff / params.hbar).sqrt()
    }

    pub fn sized_for(params: &PhysParams, n_points: usize) -> Result<Self> {
        Self::new(Self::default_half_width(params), n_points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        let l = self.half_width;
        let last = self.n_points - 1;
        (0..self.n_points)
            .map(|j| {
                // fill from both ends so the mesh is symmetric to the last bit
                if 2 * j <= last {
                    -l + j as f64 * h
                } else {
                    l - (last - j) as f64 * h
                }
            })
            .collect()
    }

    /// Same half-width, halved spacing; coarse nodes are a subset.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            n_points: 2 * self.n_points - 1,
        }
    }

    /// Oscillator eigenfunctions at frequency `omega` (mass and ħ from
    /// `params`), sampled on the nodes and scaled by sqrt(h).
    pub fn oscillator_modes(&self, params: &PhysParams, omega: f64, count: usize) -> Vec<Vec<f64>> {
        let scale = (params.m * omega / params.hbar).sqrt();
        let norm0 = (scale * scale / PI).powf(0.25) * self.spacing().sqrt();
        let nodes = self.nodes();
        let mut modes = vec![vec![0.0; nodes.len()]; count];
        for (j, &y) in nodes.iter().enumerate() {
            let xi = scale * y;
            let mut prev = 0.0;
            let mut cur = norm0 * (-0.5 * xi * xi).exp();
            for (k, mode) in modes.iter_mut().enumerate() {
                mode[j] = cur;
                let kf = k as f64;
                let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
            }
        }
        modes
    }
}

/// Truncated number basis of a reference oscillator of frequency `omega_basis`.
///
/// Operators are built at `n_basis + pad` and cropped after forming products,
/// which makes every retained matrix element of a quadratic form exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockBasis {
    pub n_basis: usize,
    pub omega_basis: f64,
    pub pad: usize,
}

impl FockBasis {
    pub fn new(n_basis: usize, omega_basis: f64, pad: usize) -> Result<Self> {
        if n_basis < 2 {
            return Err(Error::InvalidParams(format!(
                "n_basis must be >= 2, got {n_basis}"
            )));
        }
        if pad < 2 {
            return Err(Error::InvalidParams(format!("pad must be >= 2, got {pad}")));
        }
        if !(omega_basis.is_finite() && omega_basis > 0.0) {
            return Err(Error::InvalidParams(format!(
                "basis frequency must be > 0, got {omega_basis}"
            )));
        }
        Ok(Self {
            n_basis,
            omega_basis,
            pad,
        })
    }

    /// Basis frequency equal to the bare frequency (1 when ω = 0).
    pub fn for_params(params: &PhysParams, n_basis: usize) -> Result<Self> {
        let omega_basis = if params.omega > 0.0 {
            params.omega
        } else {
            1.0
        };
        Self::new(n_basis, omega_basis, DEFAULT_FOCK_PAD)
    }

    fn padded_dim(&self) -> usize {
        self.n_basis + self.pad
    }

    pub(crate) fn padded_position(&self, params: &PhysParams) -> ComplexMatrix {
        let n = self.padded_dim();
        let mut y = ComplexMatrix::zeros(n);
        let c = params.hbar / (2.0 * params.m * self.omega_basis);
        for k in 0..n - 1 {
            let v = Complex64::new((c * (k as f64 + 1.0)).sqrt(), 0.0);
            y[(k, k + 1)] = v;
            y[(k + 1, k)] = v;
        }
        y
    }

    pub(crate) fn padded_momentum(&self, params: &PhysParams) -> ComplexMatrix {
        let n = self.padded_dim();
        let mut p = ComplexMatrix::zeros(n);
        let c = 0.5 * params.m * params.hbar * self.omega_basis;
        for k in 0..n - 1 {
            let v = (c * (k as f64 + 1.0)).sqrt();
            p[(k, k + 1)] = Complex64::new(0.0, -v);
            p[(k + 1, k)] = Complex64::new(0.0, v);
        }
        p
    }
}

/// The two discretizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    Grid(Grid),
    Fock(FockBasis),
}

impl Backend {
    pub fn dim(&self) -> usize {
        match self {
            Backend::Grid(g) => g.n_points,
            Backend::Fock(f) => f.n_basis,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Grid(_) => "grid",
            Backend::Fock(_) => "fock",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Grid(g) => write!(f, "grid(L={}, n_points={})", g.half_width, g.n_points),
            Backend::Fock(b) => write!(
                f,
                "fock(n_basis={}, omega_basis={})",
                b.n_basis, b.omega_basis
            ),
        }
    }
}

/// y, p and the products a quadratic Hamiltonian needs, at the working size.
pub(crate) struct OperatorSet {
    pub y: ComplexMatrix,
    pub p: ComplexMatrix,
    pub y2: ComplexMatrix,
    /// p²/2m: stencil on the grid, padded product in Fock.
    pub kinetic: ComplexMatrix,
    pub yp: ComplexMatrix,
    pub py: ComplexMatrix,
}

impl OperatorSet {
    pub fn build(ctx: &Backend, params: &PhysParams) -> Self {
        match ctx {
            Backend::Grid(g) => {
                let y = grid_position(g);
                let p = grid_momentum(g, params);
                let y2 = ComplexMatrix::from_real_diag(
                    &g.nodes().iter().map(|v| v * v).collect::<Vec<_>>(),
                );
                let kinetic = kinetic_matrix(g, params);
                let yp = matmul(&y, &p).expect("same grid");
                let py = matmul(&p, &y).expect("same grid");
                Self {
                    y,
                    p,
                    y2,
                    kinetic,
                    yp,
                    py,
                }
            }
            Backend::Fock(b) => {
                let yf = b.padded_position(params);
                let pf = b.padded_momentum(params);
                let prod = |a: &ComplexMatrix, c: &ComplexMatrix| {
                    matmul(a, c).expect("same basis").crop(b.n_basis)
                };
                let kinetic = prod(&pf, &pf).scale_real(0.5 / params.m);
                Self {
                    y2: prod(&yf, &yf),
                    yp: prod(&yf, &pf),
                    py: prod(&pf, &yf),
                    kinetic,
                    y: yf.crop(b.n_basis),
                    p: pf.crop(b.n_basis),
                }
            }
        }
    }

    pub fn hamiltonian(&self, params: &PhysParams, ordering: OrderingScheme) -> ComplexMatrix {
        let lambda = params.lambda_damp;
        let coupling = match ordering {
            OrderingScheme::Yp => self.yp.scale_real(0.5 * lambda),
            OrderingScheme::Py => self.py.scale_real(0.5 * lambda),
            OrderingScheme::Symmetrized => self
                .yp
                .add(&self.py)
                .expect("same size")
                .scale_real(0.25 * lambda),
        };
        let potential = self
            .y2
            .scale_real(0.5 * params.m * params.omega * params.omega);
        self.kinetic
            .add(&potential)
            .and_then(|h| h.add(&coupling))
            .expect("same size")
    }
}

fn grid_position(g: &Grid) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&g.nodes())
}

fn grid_momentum(g: &Grid, params: &PhysParams) -> ComplexMatrix {
    let n = g.n_points;
    let c = params.hbar / (2.0 * g.spacing());
    let mut p = ComplexMatrix::zeros(n);
    for j in 0..n - 1 {
        p[(j, j + 1)] = Complex64::new(0.0, -c);
        p[(j + 1, j)] = Complex64::new(0.0, c);
    }
    p
}

pub fn position_matrix(ctx: &Backend, params: &PhysParams) -> ComplexMatrix {
    match ctx {
        Backend::Grid(g) => grid_position(g),
        Backend::Fock(b) => b.padded_position(params).crop(b.n_basis),
    }
}

/// Central difference −iħ d/dy on the grid; ladder form in Fock.
pub fn momentum_matrix(ctx: &Backend, params: &PhysParams) -> ComplexMatrix {
    match ctx {
        Backend::Grid(g) => grid_momentum(g, params),
        Backend::Fock(b) => b.padded_momentum(params).crop(b.n_basis),
    }
}

/// Three-point second-difference stencil for p²/2m.
///
/// Built from the stencil directly: P·P on the grid would be a 2h stencil
/// with an undamped checkerboard mode.
pub fn kinetic_matrix(grid: &Grid, params: &PhysParams) -> ComplexMatrix {
    let n = grid.n_points;
    let h = grid.spacing();
    let diag = params.hbar * params.hbar / (params.m * h * h);
    let off = Complex64::new(-0.5 * diag, 0.0);
    let mut k = ComplexMatrix::zeros(n);
    for j in 0..n {
        k[(j, j)] = Complex64::new(diag, 0.0);
        if j + 1 < n {
            k[(j, j + 1)] = off;
            k[(j + 1, j)] = off;
        }
    }
    k
}

/// p²/2m + ½mω²y² + coupling, with the coupling ordered per `ordering`.
pub fn build_hamiltonian(
    ctx: &Backend,
    params: &PhysParams,
    ordering: OrderingScheme,
) -> ComplexMatrix {
    OperatorSet::build(ctx, params).hamiltonian(params, ordering)
}

/// ‖A − A†‖_F / max(‖A‖_F, 1e-300).
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let diff = a.sub(&adjoint(a)).expect("same size");
    frobenius_norm(&diff) / frobenius_norm(a).max(1e-300)
}

/// Reflection y → −y on a symmetric grid.
pub fn parity_matrix(grid: &Grid) -> ComplexMatrix {
    let n = grid.n_points;
    ComplexMatrix::from_fn(n, |i, j| {
        if i + j == n - 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_general_default, eig_hermitian, DEFAULT_TOL};
    use crate::model::ordering_shift;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit() -> PhysParams {
        PhysParams::unit(1.0)
    }

    fn fock(n: usize) -> Backend {
        Backend::Fock(FockBasis::new(n, 1.0, 2).unwrap())
    }

    fn small_grid() -> Backend {
        Backend::Grid(Grid::new(1.0, 3).unwrap())
    }

    #[test]
    fn grid_nodes_and_spacing() {
        let g = Grid::new(1.0, 3).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.spacing(), 1.0);
        let g = Grid::new(7.3, 801).unwrap();
        let y = g.nodes();
        for j in 0..y.len() {
            assert!((y[j] + y[y.len() - 1 - j]).abs() <= 1e-14 * g.half_width);
        }
        let fine = g.refined().nodes();
        for (j, v) in y.iter().enumerate() {
            assert!((fine[2 * j] - v).abs() <= 1e-13);
        }
    }

    #[test]
    fn context_validation() {
        assert!(Grid::new(1.0, 2).is_err());
        assert!(Grid::new(0.0, 10).is_err());
        assert!(FockBasis::new(1, 1.0, 2).is_err());
        assert!(FockBasis::new(10, 1.0, 1).is_err());
        assert!(FockBasis::new(10, 0.0, 2).is_err());
    }

    #[test]
    fn default_sizing_rule() {
        let p = PhysParams::unit(0.0);
        assert!((Grid::default_half_width(&p) - 8.0).abs() < 1e-14);
        let p = PhysParams::unit(1.0);
        assert!((Grid::default_half_width(&p) - 8.0 / 0.75f64.sqrt().sqrt()).abs() < 1e-12);
        // critical damping is floored, not infinite
        assert!(Grid::default_half_width(&PhysParams::unit(2.0)).is_finite());
    }

    #[test]
    fn position_examples() {
        let y = position_matrix(&small_grid(), &unit());
        assert_eq!(y, ComplexMatrix::from_real_diag(&[-1.0, 0.0, 1.0]));
        let y = position_matrix(&fock(8), &unit());
        assert!((y[(0, 1)].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(hermiticity_defect(&y), 0.0);
        assert_eq!(
            hermiticity_defect(&position_matrix(&small_grid(), &unit())),
            0.0
        );
    }

    #[test]
    fn momentum_examples() {
        let p = momentum_matrix(&small_grid(), &unit());
        assert_eq!(p[(0, 1)], c(0.0, -0.5));
        assert_eq!(p[(1, 0)], c(0.0, 0.5));
        assert_eq!(p[(0, 2)], c(0.0, 0.0));
        assert_eq!(hermiticity_defect(&p), 0.0);
        let p = momentum_matrix(&fock(8), &unit());
        assert!((p[(0, 1)] - c(0.0, -std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(hermiticity_defect(&p), 0.0);
    }

    #[test]
    fn kinetic_examples() {
        let g = Grid::new(1.0, 3).unwrap();
        let k = kinetic_matrix(&g, &unit());
        assert_eq!(k[(1, 1)], c(1.0, 0.0));
        assert_eq!(k[(0, 1)], c(-0.5, 0.0));
        assert_eq!(hermiticity_defect(&k), 0.0);

        let g = Grid::new(3.0, 41).unwrap();
        let k = kinetic_matrix(&g, &unit());
        let ones = vec![c(1.0, 0.0); 41];
        let out = k.matvec(&ones);
        for v in &out[1..40] {
            assert!(v.norm() < 1e-12);
        }
        let s = eig_hermitian(&k, DEFAULT_TOL).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.re >= -1e-12));
    }

    #[test]
    fn symmetrized_is_hermitian_in_both_representations() {
        for ctx in [
            fock(64),
            Backend::Grid(Grid::sized_for(&unit(), 201).unwrap()),
        ] {
            let h = build_hamiltonian(&ctx, &unit(), OrderingScheme::Symmetrized);
            assert!(hermiticity_defect(&h) <= 1e-14, "{ctx}");
        }
    }

    #[test]
    fn orderings_coincide_without_damping() {
        let p = PhysParams::unit(0.0);
        for ctx in [fock(16), small_grid()] {
            let sym = build_hamiltonian(&ctx, &p, OrderingScheme::Symmetrized);
            assert_eq!(build_hamiltonian(&ctx, &p, OrderingScheme::Yp), sym);
            assert_eq!(build_hamiltonian(&ctx, &p, OrderingScheme::Py), sym);
        }
    }

    #[test]
    fn fock_ordering_difference_is_the_commutator_constant() {
        let p = unit();
        let ctx = fock(64);
        let sym = build_hamiltonian(&ctx, &p, OrderingScheme::Symmetrized);
        for ordering in [OrderingScheme::Yp, OrderingScheme::Py] {
            let diff = build_hamiltonian(&ctx, &p, ordering).sub(&sym).unwrap();
            let expected = ComplexMatrix::identity(64).scale(ordering_shift(&p, ordering));
            // interior (indices < n_basis - 2) and, with padding, the whole block
            assert!(diff.crop(62).max_abs_diff(&expected.crop(62)) <= 1e-14);
            assert!(diff.max_abs_diff(&expected) <= 1e-14);
        }
    }

    #[test]
    fn hermiticity_defect_examples() {
        assert_eq!(hermiticity_defect(&ComplexMatrix::identity(4)), 0.0);
        let a = ComplexMatrix::from_rows(&[vec![(0., 0.), (1., 0.)], vec![(0., 0.), (0., 0.)]])
            .unwrap();
        assert!((hermiticity_defect(&a) - std::f64::consts::SQRT_2).abs() < 1e-10);
        let h = build_hamiltonian(&fock(64), &unit(), OrderingScheme::Yp);
        assert!(hermiticity_defect(&h) > 1e-3);
        assert_eq!(hermiticity_defect(&ComplexMatrix::zeros(3)), 0.0);
    }

    #[test]
    fn symmetrized_commutes_with_parity() {
        let g = Grid::sized_for(&unit(), 101).unwrap();
        for lambda in [0.0, 0.7, 1.9] {
            let p = PhysParams::unit(lambda);
            let h = build_hamiltonian(&Backend::Grid(g), &p, OrderingScheme::Symmetrized);
            let j = parity_matrix(&g);
            let comm = matmul(&h, &j)
                .unwrap()
                .sub(&matmul(&j, &h).unwrap())
                .unwrap();
            assert!(frobenius_norm(&comm) <= 1e-12 * frobenius_norm(&h));
        }
    }

    #[test]
    fn fock_low_modes_converge_with_basis_size() {
        let p = unit();
        let lo = eig_general_default(&build_hamiltonian(
            &fock(64),
            &p,
            OrderingScheme::Symmetrized,
        ))
        .unwrap();
        let hi = eig_general_default(&build_hamiltonian(
            &fock(128),
            &p,
            OrderingScheme::Symmetrized,
        ))
        .unwrap();
        for n in 0..16 {
            assert!(
                (lo.eigenvalues[n] - hi.eigenvalues[n]).norm() <= 1e-10,
                "n={n}"
            );
        }
    }

    #[test]
    fn oscillator_modes_are_orthonormal() {
        let p = unit();
        let g = Grid::new(10.0, 801).unwrap();
        let modes = g.oscillator_modes(&p, 0.8, 8);
        for a in 0..8 {
            for b in 0..8 {
                let dot: f64 = modes[a].iter().zip(&modes[b]).map(|(x, y)| x * y).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10, "({a},{b}) {dot}");
            }
        }
    }
}
