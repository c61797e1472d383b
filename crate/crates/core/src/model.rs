//! Physical inputs, quantum numbers and the coupling constants of the
//! effective radial equation.
//!
//! Everything is in natural units (ħ = c = 1). Inputs are taken literally as
//! numbers in inverse femtometres; no unit conversion is performed.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{require, Error, Result};

/// Kratzer well plus Coulomb-type tensor coupling `U(r) = -C/r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialParams {
    depth: f64,
    range: f64,
    tensor: f64,
    mass: f64,
}

impl PotentialParams {
    /// `depth` is D, `range` is a, `tensor` is C and `mass` is m0.
    pub fn new(depth: f64, range: f64, tensor: f64, mass: f64) -> Result<Self> {
        require(depth > 0.0 && depth.is_finite(), "D", "positive and finite", depth)?;
        require(range > 0.0 && range.is_finite(), "a", "positive and finite", range)?;
        require(tensor.is_finite(), "C", "finite", tensor)?;
        require(mass > 0.0 && mass.is_finite(), "m0", "positive and finite", mass)?;
        Ok(Self {
            depth,
            range,
            tensor,
            mass,
        })
    }

    /// Parameter set of the reference table: m0 = 5, D = 1.25, a = 0.35.
    pub fn reference_table(tensor: f64) -> Self {
        Self {
            depth: 1.25,
            range: 0.35,
            tensor,
            mass: 5.0,
        }
    }

    /// Kratzer parameters reducing to a pure Coulomb well of strength
    /// `coulomb = D·a` (Ze²) as the range shrinks, with no tensor term.
    pub fn coulomb_limit(coulomb: f64, range: f64, mass: f64) -> Result<Self> {
        require(coulomb > 0.0, "Ze2", "positive", coulomb)?;
        Self::new(coulomb / range, range, 0.0, mass)
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn tensor(&self) -> f64 {
        self.tensor
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn with_tensor(self, tensor: f64) -> Self {
        Self { tensor, ..self }
    }

    /// D·a, the strength of the attractive 1/r part of the well.
    pub fn coulomb_strength(&self) -> f64 {
        self.depth * self.range
    }

    /// V(r) = -2Da (1/r - (a/2)/r²).
    pub fn potential_value(&self, r: f64) -> Result<f64> {
        require(r > 0.0, "r", "positive", r)?;
        Ok(self.potential_unchecked(r))
    }

    pub(crate) fn potential_unchecked(&self, r: f64) -> f64 {
        let (d, a) = (self.depth, self.range);
        if r.is_infinite() {
            return 0.0;
        }
        -2.0 * d * a * (1.0 / r - 0.5 * a / (r * r))
    }

    /// Tensor potential U(r) = -C/r.
    pub fn tensor_value(&self, r: f64) -> f64 {
        -self.tensor / r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuantumNumbers {
    n: u32,
    kappa: i32,
}

impl QuantumNumbers {
    pub fn new(n: u32, kappa: i32) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::Domain {
                name: "kappa",
                requirement: "nonzero",
                value: 0.0,
            });
        }
        Ok(Self { n, kappa })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kappa(&self) -> i32 {
        self.kappa
    }
}

/// Which spinor component decouples: spin symmetry is S = +V, pseudo-spin
/// symmetry is S = -V.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetrySector {
    Spin,
    PseudoSpin,
}

impl SymmetrySector {
    pub const ALL: [SymmetrySector; 2] = [SymmetrySector::Spin, SymmetrySector::PseudoSpin];

    pub fn as_str(&self) -> &'static str {
        match self {
            SymmetrySector::Spin => "spin",
            SymmetrySector::PseudoSpin => "pseudospin",
        }
    }
}

impl fmt::Display for SymmetrySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SymmetrySector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "spin" => Ok(SymmetrySector::Spin),
            "pseudospin" => Ok(SymmetrySector::PseudoSpin),
            other => Err(Error::Config(format!("unknown symmetry sector '{other}'"))),
        }
    }
}

/// Coefficients of φ'' + φ'/r - (c1² + c2² r + ε² r²) φ / r² = 0 at a trial
/// energy. The squared names follow the equation: `c1_sq` and `c2_sq` may be
/// negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingSet {
    pub c1_sq: f64,
    pub c2_sq: f64,
    pub eps_sq: f64,
    pub sector: SymmetrySector,
    pub trial_energy: f64,
}

impl CouplingSet {
    /// Positive branch of √c1², or `None` when c1² ≤ 0.
    pub fn c1(&self) -> Option<f64> {
        (self.c1_sq > 0.0).then(|| self.c1_sq.sqrt())
    }

    /// Positive branch of √ε², or `None` when ε² ≤ 0.
    pub fn eps(&self) -> Option<f64> {
        (self.eps_sq > 0.0).then(|| self.eps_sq.sqrt())
    }

    /// Coefficient of the 1/r term in the radial operator whose exact bound
    /// spectrum is the quantization condition used by the solver.
    ///
    /// In the spin sector this is `c2_sq` itself. In the pseudo-spin sector the
    /// quantization condition is sign-mirrored (otherwise it has no solution
    /// with n ≥ 0), and the operator it quantizes carries `-c2_sq`.
    pub fn binding_c2(&self) -> f64 {
        match self.sector {
            SymmetrySector::Spin => self.c2_sq,
            SymmetrySector::PseudoSpin => -self.c2_sq,
        }
    }
}

/// Coupling constants for integer quantum numbers.
pub fn couplings(params: &PotentialParams, qn: QuantumNumbers, sector: SymmetrySector, energy: f64) -> CouplingSet {
    couplings_with_spin_orbit(params, f64::from(qn.kappa()), sector, energy)
}

/// Same as [`couplings`] with a real-valued spin-orbit argument κ.
pub fn couplings_with_spin_orbit(
    params: &PotentialParams,
    kappa: f64,
    sector: SymmetrySector,
    energy: f64,
) -> CouplingSet {
    let (d, a, c, m0) = (params.depth, params.range, params.tensor, params.mass);
    let eps_sq = m0 * m0 - energy * energy;
    let (c1_sq, c2_sq) = match sector {
        SymmetrySector::Spin => (
            kappa * (kappa + 1.0) + c * (1.0 + 2.0 * kappa + c) + 2.0 * d * a * a * (m0 + energy) + 0.25,
            -4.0 * d * a * (m0 + energy),
        ),
        SymmetrySector::PseudoSpin => (
            kappa * (kappa - 1.0) + c * (2.0 * kappa + c - 1.0) - 2.0 * d * a * a * (m0 - energy) + 0.25,
            4.0 * d * a * (m0 - energy),
        ),
    };
    CouplingSet {
        c1_sq,
        c2_sq,
        eps_sq,
        sector,
        trial_energy: energy,
    }
}
