//! Physical parameters of the damped oscillator and its closed-form spectrum.
//!
//! Every numeric path in the crate is checked against [`analytic_energy`] plus
//! the exact ordering offset from [`ordering_shift`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to call a damping value critical.
pub const CRITICAL_RTOL: f64 = 1e-12;

/// Mass, bare frequency, damping coefficient and action quantum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub m: f64,
    pub omega: f64,
    pub lambda_damp: f64,
    pub hbar: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            omega: 1.0,
            lambda_damp: 1.0,
            hbar: 1.0,
        }
    }
}

impl PhysParams {
    pub fn new(m: f64, omega: f64, lambda_damp: f64, hbar: f64) -> Result<Self> {
        let p = Self {
            m,
            omega,
            lambda_damp,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit mass, frequency and ħ with the given damping.
    pub fn unit(lambda_damp: f64) -> Self {
        Self {
            lambda_damp,
            ..Self::default()
        }
    }

    pub fn with_lambda(self, lambda_damp: f64) -> Self {
        Self {
            lambda_damp,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.m, self.omega, self.lambda_damp, self.hbar]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.m <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "m must be > 0, got {}",
                self.m
            )));
        }
        if self.hbar <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "hbar must be > 0, got {}",
                self.hbar
            )));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega must be >= 0, got {}",
                self.omega
            )));
        }
        if self.lambda_damp < 0.0 {
            return Err(Error::InvalidParams(format!(
                "lambda must be >= 0, got {}",
                self.lambda_damp
            )));
        }
        Ok(())
    }

    /// ω² − λ²/4, the radicand of the level spacing.
    pub fn radicand(&self) -> f64 {
        self.omega * self.omega - 0.25 * self.lambda_damp * self.lambda_damp
    }

    /// Principal square root of the radicand.
    pub fn effective_frequency(&self) -> Complex64 {
        Complex64::new(self.radicand(), 0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingScheme {
    /// (λ/2)·y·p
    Yp,
    /// (λ/2)·p·y
    Py,
    /// λ(yp + py)/4
    #[serde(rename = "sym")]
    Symmetrized,
}

impl OrderingScheme {
    pub const ALL: [OrderingScheme; 3] = [Self::Yp, Self::Py, Self::Symmetrized];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Yp => "yp",
            Self::Py => "py",
            Self::Symmetrized => "sym",
        }
    }
}

impl fmt::Display for OrderingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OrderingScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "yp" => Ok(Self::Yp),
            "py" => Ok(Self::Py),
            "sym" | "symmetrized" => Ok(Self::Symmetrized),
            other => Err(format!(
                "unknown ordering '{other}' (expected yp, py or sym)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl Regime {
    /// Whether the bound-state comparison against the closed form applies.
    pub fn has_bound_states(&self) -> bool {
        matches!(self, Regime::Underdamped)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Underdamped => "underdamped",
            Regime::Critical => "critical",
            Regime::Overdamped => "overdamped",
        };
        f.write_str(s)
    }
}

pub fn regime_of(params: &PhysParams) -> Regime {
    let two_omega = 2.0 * params.omega;
    let lambda = params.lambda_damp;
    let scale = two_omega.max(lambda).max(1.0);
    let gap = (two_omega - lambda) / scale;
    if gap.abs() <= CRITICAL_RTOL {
        Regime::Critical
    } else if gap > 0.0 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

/// ħ·sqrt(ω² − λ²/4)·(n + ½) on the principal branch.
///
/// Real for underdamped and critical damping; purely imaginary beyond, where
/// it is only the analytic continuation of the formula.
pub fn analytic_energy(params: &PhysParams, n: usize) -> Complex64 {
    params.effective_frequency() * (params.hbar * (n as f64 + 0.5))
}

/// Constant `c` with `H(ordering) = H(sym) + c·I`.
///
/// Follows from (λ/2)·yp = λ(yp + py)/4 + (λ/4)[y, p] and [y, p] = iħ.
pub fn ordering_shift(params: &PhysParams, ordering: OrderingScheme) -> Complex64 {
    let quarter = 0.25 * params.hbar * params.lambda_damp;
    match ordering {
        OrderingScheme::Yp => Complex64::new(0.0, quarter),
        OrderingScheme::Py => Complex64::new(0.0, -quarter),
        OrderingScheme::Symmetrized => Complex64::new(0.0, 0.0),
    }
}
