//! Bound-state energies from the quantization condition, plus the closed-form
//! Coulomb and non-relativistic limits.
//!
//! The energy equations are implicit in E. The production path brackets sign
//! changes of the quantization residual on the bound-state window (-m0, m0)
//! and bisects; the closed-form right-hand side is kept as an a-posteriori
//! cross-check.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{couplings_with_spin_orbit, CouplingSet, PotentialParams, QuantumNumbers, SymmetrySector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub abs_tol: f64,
    pub max_iter: u32,
    pub bracket_samples: u32,
}

impl SolverConfig {
    /// Defaults scaled to the rest mass: abs_tol = 1e-12·m0.
    pub fn for_params(params: &PotentialParams) -> Self {
        Self {
            abs_tol: 1e-12 * params.mass(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_iter < 1 || self.bracket_samples < 2 {
            return Err(Error::Config(format!(
                "solver needs abs_tol > 0, max_iter >= 1, bracket_samples >= 2 (got {self:?})"
            )));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 200,
            bracket_samples: 400,
        }
    }
}

/// Part of the bound-state window on which c1² ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDomain {
    pub lo: f64,
    pub hi: f64,
    pub sector: SymmetrySector,
    /// `lo` is where c1² vanishes rather than the window edge -m0.
    pub lo_is_radicand_edge: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NoBoundReason {
    NegativeDiscriminant,
    NoRootInDomain,
    NonPositiveC1Sq,
}

impl fmt::Display for NoBoundReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NoBoundReason::NegativeDiscriminant => "NegativeDiscriminant",
            NoBoundReason::NoRootInDomain => "NoRootInDomain",
            NoBoundReason::NonPositiveC1Sq => "NonPositiveC1Sq",
        };
        f.write_str(s)
    }
}

/// Diagnostics that do not invalidate a level but deserve a second look.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ReviewFlag {
    /// More than one sign change was found; the extra roots are listed.
    MultipleRoots(Vec<f64>),
    /// |E - rhs(E)| exceeded 10·abs_tol.
    FixedPointMismatch(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundState {
    pub energy: f64,
    pub residual: f64,
    /// E - rhs(E) at the solved energy.
    pub fixed_point_gap: f64,
    pub couplings: CouplingSet,
    pub flags: Vec<ReviewFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Outcome {
    Bound(BoundState),
    NoBoundState(NoBoundReason),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLevel {
    pub params: PotentialParams,
    pub sector: SymmetrySector,
    pub n: u32,
    /// Spin-orbit argument κ. Integer for physical levels; real-valued only
    /// through [`solve_energy_with_spin_orbit`].
    pub kappa: f64,
    pub outcome: Outcome,
}

impl EnergyLevel {
    pub fn bound(&self) -> Result<&BoundState> {
        match &self.outcome {
            Outcome::Bound(b) => Ok(b),
            Outcome::NoBoundState(reason) => Err(Error::NotBound(*reason)),
        }
    }

    pub fn energy(&self) -> Option<f64> {
        self.bound().ok().map(|b| b.energy)
    }

    pub fn is_bound(&self) -> bool {
        matches!(self.outcome, Outcome::Bound(_))
    }

    /// κ + C, the spin-orbit argument shifted by the tensor coupling.
    pub fn shifted_kappa(&self) -> f64 {
        self.kappa + self.params.tensor()
    }
}

/// Residual of the single-valuedness condition at trial energy E.
///
/// Spin: -c2²/(2ε) - (2a₁+1)/2 - n. Pseudo-spin uses the mirrored sign
/// +c2²/(2ε), the only choice that admits roots with n ≥ 0.
pub fn quantization_residual(
    params: &PotentialParams,
    qn: QuantumNumbers,
    sector: SymmetrySector,
    energy: f64,
) -> Result<f64> {
    residual_with_spin_orbit(params, qn.n(), f64::from(qn.kappa()), sector, energy)
}

pub fn residual_with_spin_orbit(
    params: &PotentialParams,
    n: u32,
    kappa: f64,
    sector: SymmetrySector,
    energy: f64,
) -> Result<f64> {
    let cs = couplings_with_spin_orbit(params, kappa, sector, energy);
    residual_from_couplings(&cs, n)
}

fn residual_from_couplings(cs: &CouplingSet, n: u32) -> Result<f64> {
    let c1 = cs.c1().ok_or(Error::NonPositiveC1Sq(cs.c1_sq))?;
    let eps = cs.eps().ok_or(Error::Domain {
        name: "eps_sq",
        requirement: "positive (|E| < m0)",
        value: cs.eps_sq,
    })?;
    Ok(-cs.binding_c2() / (2.0 * eps) - (2.0 * c1 + 1.0) / 2.0 - f64::from(n))
}

/// Right-hand side of the closed-form energy equation at trial E.
pub fn energy_rhs(params: &PotentialParams, qn: QuantumNumbers, sector: SymmetrySector, energy: f64) -> Result<f64> {
    rhs_with_spin_orbit(params, qn.n(), f64::from(qn.kappa()), sector, energy)
}

pub fn rhs_with_spin_orbit(
    params: &PotentialParams,
    n: u32,
    kappa: f64,
    sector: SymmetrySector,
    energy: f64,
) -> Result<f64> {
    let (d, a, c, m0) = (params.depth(), params.range(), params.tensor(), params.mass());
    let radicand = match sector {
        SymmetrySector::Spin => {
            (1.0 + 2.0 * kappa).powi(2) + 4.0 * c * (1.0 + 2.0 * kappa + c) + 8.0 * d * a * a * (energy + m0)
        }
        SymmetrySector::PseudoSpin => {
            (1.0 - 2.0 * kappa).powi(2) + 4.0 * c * (2.0 * kappa + c - 1.0) + 8.0 * d * a * a * (energy - m0)
        }
    };
    if radicand < 0.0 {
        return Err(Error::NegativeDiscriminant(radicand));
    }
    let t_sq = (1.0 + 2.0 * f64::from(n) + radicand.sqrt()).powi(2);
    let beta = 16.0 * d * d * a * a;
    Ok(match sector {
        SymmetrySector::Spin => m0 * (t_sq - beta) / (t_sq + beta),
        SymmetrySector::PseudoSpin => m0 * (1.0 - 2.0 * t_sq / (t_sq + beta)),
    })
}

/// Sub-window of (-m0, m0) where c1² ≥ 0, or `None` if there is none.
///
/// c1² is affine in E with slope 2Da² in both sectors.
pub fn energy_domain(params: &PotentialParams, kappa: f64, sector: SymmetrySector) -> Option<EnergyDomain> {
    let m0 = params.mass();
    let at_lo = couplings_with_spin_orbit(params, kappa, sector, -m0).c1_sq;
    let at_hi = couplings_with_spin_orbit(params, kappa, sector, m0).c1_sq;
    if at_hi <= 0.0 && at_lo <= 0.0 {
        return None;
    }
    if at_lo > 0.0 {
        return Some(EnergyDomain {
            lo: -m0,
            hi: m0,
            sector,
            lo_is_radicand_edge: false,
        });
    }
    // slope is positive, so the zero lies inside the window
    let slope = (at_hi - at_lo) / (2.0 * m0);
    let zero = -m0 - at_lo / slope;
    Some(EnergyDomain {
        lo: zero.clamp(-m0, m0),
        hi: m0,
        sector,
        lo_is_radicand_edge: true,
    })
}

pub fn solve_energy(
    params: &PotentialParams,
    qn: QuantumNumbers,
    sector: SymmetrySector,
    config: &SolverConfig,
) -> Result<EnergyLevel> {
    solve_energy_with_spin_orbit(params, qn.n(), f64::from(qn.kappa()), sector, config)
}

/// Solver entry accepting a real spin-orbit argument, so that (κ, C) can be
/// compared with (κ + C, 0) directly.
pub fn solve_energy_with_spin_orbit(
    params: &PotentialParams,
    n: u32,
    kappa: f64,
    sector: SymmetrySector,
    config: &SolverConfig,
) -> Result<EnergyLevel> {
    config.validate()?;
    let level = |outcome| EnergyLevel {
        params: *params,
        sector,
        n,
        kappa,
        outcome,
    };
    let Some(domain) = energy_domain(params, kappa, sector) else {
        return Ok(level(Outcome::NoBoundState(NoBoundReason::NonPositiveC1Sq)));
    };
    let residual = |e: f64| residual_with_spin_orbit(params, n, kappa, sector, e).ok();

    let samples = scan_points(&domain, params.mass(), config.bracket_samples);
    let valid: Vec<(f64, f64)> = samples
        .into_iter()
        .filter_map(|e| residual(e).map(|r| (e, r)))
        .collect();
    if valid.is_empty() {
        return Ok(level(Outcome::NoBoundState(NoBoundReason::NonPositiveC1Sq)));
    }

    let mut roots = Vec::new();
    for pair in valid.windows(2) {
        let ((e0, r0), (e1, r1)) = (pair[0], pair[1]);
        if r0 == 0.0 {
            roots.push(e0);
        } else if r0.signum() != r1.signum() && r1 != 0.0 {
            roots.push(bisect(&residual, e0, r0, e1, config));
        }
    }
    if let Some(&(e, r)) = valid.last() {
        if r == 0.0 {
            roots.push(e);
        }
    }

    let Some((&energy, extra)) = roots.split_first() else {
        // No sign change. If the window was cut short by c1² ≤ 0, the level
        // would have sat in the excluded part.
        let reason = if domain.lo_is_radicand_edge {
            NoBoundReason::NonPositiveC1Sq
        } else {
            NoBoundReason::NoRootInDomain
        };
        return Ok(level(Outcome::NoBoundState(reason)));
    };

    let couplings = couplings_with_spin_orbit(params, kappa, sector, energy);
    let residual = residual_from_couplings(&couplings, n)?;
    let fixed_point_gap = match rhs_with_spin_orbit(params, n, kappa, sector, energy) {
        Ok(rhs) => energy - rhs,
        Err(Error::NegativeDiscriminant(_)) => {
            return Ok(level(Outcome::NoBoundState(NoBoundReason::NegativeDiscriminant)))
        }
        Err(e) => return Err(e),
    };
    let mut flags = Vec::new();
    if !extra.is_empty() {
        flags.push(ReviewFlag::MultipleRoots(extra.to_vec()));
    }
    if fixed_point_gap.abs() >= 10.0 * config.abs_tol {
        flags.push(ReviewFlag::FixedPointMismatch(fixed_point_gap));
    }
    Ok(level(Outcome::Bound(BoundState {
        energy,
        residual,
        fixed_point_gap,
        couplings,
        flags,
    })))
}

/// Uniform samples over the domain plus geometric approaches to the open
/// window edges, where the residual diverges and weakly or deeply bound
/// roots may hide between the last uniform sample and the edge.
fn scan_points(domain: &EnergyDomain, m0: f64, samples: u32) -> Vec<f64> {
    let width = domain.hi - domain.lo;
    let step = width / f64::from(samples);
    let mut points: Vec<f64> = (0..=samples).map(|i| domain.lo + step * f64::from(i)).collect();
    for j in 1..=48 {
        let offset = step * 0.5f64.powi(j);
        points.push(domain.hi - offset);
        if domain.lo <= -m0 {
            points.push(domain.lo + offset);
        }
    }
    points.retain(|e| *e > -m0 && *e < m0);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

fn bisect(f: &impl Fn(f64) -> Option<f64>, mut lo: f64, mut f_lo: f64, mut hi: f64, config: &SolverConfig) -> f64 {
    let mut best = (lo, f_lo.abs());
    for _ in 0..config.max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Some(f_mid) = f(mid) else { break };
        if f_mid.abs() < best.1 {
            best = (mid, f_mid.abs());
        }
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= config.abs_tol && best.1 <= config.abs_tol {
            break;
        }
    }
    best.0
}

/// Dirac–Coulomb levels: m0 (1 - 8x / ((n+ℓ+1)² + 4x)) with x = (Ze²)².
pub fn coulomb_energy(m0: f64, ze2: f64, n: u32, ell: u32) -> f64 {
    let x = ze2 * ze2;
    let big_n = f64::from(n + ell + 1);
    m0 * (1.0 - 8.0 * x / (big_n * big_n + 4.0 * x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeriesOrder {
    First,
    Second,
}

impl TryFrom<u8> for SeriesOrder {
    type Error = Error;

    fn try_from(order: u8) -> Result<Self> {
        match order {
            1 => Ok(SeriesOrder::First),
            2 => Ok(SeriesOrder::Second),
            other => Err(Error::Config(format!("series order must be 1 or 2, got {other}"))),
        }
    }
}

/// Small-coupling expansion of [`coulomb_energy`] in x = (Ze²)².
pub fn coulomb_series(m0: f64, ze2: f64, n: u32, ell: u32, order: SeriesOrder) -> f64 {
    let x = ze2 * ze2;
    let n2 = f64::from(n + ell + 1).powi(2);
    let first = 1.0 - 8.0 * x / n2;
    match order {
        SeriesOrder::First => m0 * first,
        SeriesOrder::Second => m0 * (first + 32.0 * x * x / (n2 * n2)),
    }
}

/// Non-relativistic Kratzer levels for C = 0, in the printed form
/// -8D²a²m0 / [1 + 2n + ½√(1 + 4ℓ(ℓ+1) + 16Dm0a²)]².
pub fn nonrel_kratzer_energy(m0: f64, depth: f64, range: f64, n: u32, ell: u32) -> f64 {
    let l = f64::from(ell);
    let root = (1.0 + 4.0 * l * (l + 1.0) + 16.0 * depth * m0 * range * range).sqrt();
    let denom = 1.0 + 2.0 * f64::from(n) + 0.5 * root;
    -8.0 * depth * depth * range * range * m0 / (denom * denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qn(n: u32, kappa: i32) -> QuantumNumbers {
        QuantumNumbers::new(n, kappa).unwrap()
    }

    fn table(c: f64) -> PotentialParams {
        PotentialParams::reference_table(c)
    }

    #[test]
    fn rhs_reference_value() {
        let rhs = energy_rhs(&table(0.25), qn(0, -2), SymmetrySector::Spin, 5.0).unwrap();
        let t = (1.0 + 18.5f64.sqrt()).powi(2);
        let expected = 5.0 * (t - 3.0625) / (t + 3.0625);
        assert!((rhs - expected).abs() < 1e-13);
        assert!((rhs - 4.017_321_620_205_377).abs() < 1e-12);
    }

    #[test]
    fn pseudospin_rhs_reference_value() {
        let p = table(0.25);
        let e = -4.5;
        // (1-2κ)² + 4C(2κ+C-1) + 8Da²(E-m0) with κ = -2
        let radicand = 25.0 + 4.0 * 0.25 * (-4.75) + 8.0 * 1.25 * 0.1225 * (e - 5.0);
        let t = (1.0 + 2.0 + f64::sqrt(radicand)).powi(2);
        let beta = 16.0 * 1.5625 * 0.1225;
        let expected = 5.0 * (1.0 - 2.0 * t / (t + beta));
        let rhs = energy_rhs(&p, qn(1, -2), SymmetrySector::PseudoSpin, e).unwrap();
        assert!((rhs - expected).abs() < 1e-13);
    }

    #[test]
    fn rhs_negative_radicand() {
        let err = energy_rhs(&table(0.5), qn(1, -1), SymmetrySector::PseudoSpin, -5.0).unwrap_err();
        assert!(matches!(err, Error::NegativeDiscriminant(r) if r < 0.0));
    }

    #[test]
    fn rhs_returns_rest_mass_without_binding() {
        // D → 0 with κ ≥ 0: rhs → m0
        let p = PotentialParams::new(1e-300, 1.0, 0.0, 2.0).unwrap();
        let rhs = energy_rhs(&p, qn(0, 1), SymmetrySector::Spin, 0.3).unwrap();
        assert!((rhs - 2.0).abs() < 1e-15);
    }

    #[test]
    fn residual_errors() {
        let err = quantization_residual(&table(0.5), qn(1, -1), SymmetrySector::PseudoSpin, -4.0).unwrap_err();
        assert!(matches!(err, Error::NonPositiveC1Sq(_)));
        let err = quantization_residual(&table(0.25), qn(0, -2), SymmetrySector::Spin, 5.0).unwrap_err();
        assert!(matches!(err, Error::Domain { name: "eps_sq", .. }));
    }

    #[test]
    fn residual_without_attraction_never_vanishes() {
        let p = PotentialParams::new(1e-300, 1.0, 0.0, 1.0).unwrap();
        for e in [-0.9, -0.2, 0.4, 0.99] {
            let r = quantization_residual(&p, qn(2, 3), SymmetrySector::Spin, e).unwrap();
            assert!(r < -2.5, "{r}");
        }
        let level = solve_energy(&p, qn(0, 1), SymmetrySector::Spin, &SolverConfig::default()).unwrap();
        assert_eq!(level.outcome, Outcome::NoBoundState(NoBoundReason::NoRootInDomain));
    }

    #[test]
    fn reference_spin_level() {
        let p = table(0.25);
        let level = solve_energy(&p, qn(0, -2), SymmetrySector::Spin, &SolverConfig::for_params(&p)).unwrap();
        let b = level.bound().unwrap();
        // independent desk bisection gives 3.965279652164756
        assert!((b.energy - 3.965_279_652_164_756).abs() < 1e-10);
        assert!(b.residual.abs() < 5e-12);
        assert!(b.fixed_point_gap.abs() < 5e-11);
        assert!(b.flags.is_empty());
        assert!(b.couplings.c1_sq > 0.0);
    }

    #[test]
    fn blank_cells_are_not_bound() {
        let p = table(0.5);
        for n in [1, 2] {
            let level = solve_energy(&p, qn(n, -1), SymmetrySector::PseudoSpin, &SolverConfig::for_params(&p)).unwrap();
            assert_eq!(level.outcome, Outcome::NoBoundState(NoBoundReason::NonPositiveC1Sq));
            assert!(matches!(
                level.bound(),
                Err(Error::NotBound(NoBoundReason::NonPositiveC1Sq))
            ));
        }
    }

    #[test]
    fn domain_edges() {
        let d = energy_domain(&table(0.5), -1.0, SymmetrySector::PseudoSpin).unwrap();
        assert!(d.lo_is_radicand_edge);
        // c1² = 1 - 0.30625 (5 - E) vanishes at E = 5 - 1/0.30625
        assert!((d.lo - (5.0 - 1.0 / 0.30625)).abs() < 1e-12);
        let d = energy_domain(&table(0.25), -2.0, SymmetrySector::Spin).unwrap();
        assert!(!d.lo_is_radicand_edge);
        assert_eq!((d.lo, d.hi), (-5.0, 5.0));
    }

    #[test]
    fn coulomb_closed_form() {
        assert_eq!(coulomb_energy(3.0, 0.0, 2, 1), 3.0);
        assert!(coulomb_energy(1.0, 0.5, 0, 0).abs() < 1e-15);
    }

    #[test]
    fn coulomb_series_values() {
        for order in [SeriesOrder::First, SeriesOrder::Second] {
            assert_eq!(coulomb_series(2.5, 0.0, 1, 1, order), 2.5);
        }
        // Ze² = 0.01, so x = 1e-4
        let v = coulomb_series(1.0, 0.01, 0, 0, SeriesOrder::Second);
        assert!((v - 0.999_200_32).abs() < 1e-14);
        // Ze² = 0.1, so x = 1e-2
        let v = coulomb_series(1.0, 0.1, 0, 0, SeriesOrder::Second);
        assert!((v - 0.9232).abs() < 1e-14);
        assert!(SeriesOrder::try_from(3).is_err());
    }

    #[test]
    fn coulomb_series_truncation_is_cubic_in_x() {
        // remainder = 8x/N² · y²/(1+y), y = 4x/N²
        let (m0, n, ell) = (1.0, 1, 0);
        for ze2 in [0.05, 0.1, 0.2] {
            let x: f64 = ze2 * ze2;
            let y = 4.0 * x / 4.0;
            let remainder = 8.0 * x / 4.0 * y * y / (1.0 + y);
            let err = coulomb_energy(m0, ze2, n, ell) - coulomb_series(m0, ze2, n, ell, SeriesOrder::Second);
            assert!((err + remainder).abs() < 1e-15, "{err} vs {remainder}");
        }
    }

    #[test]
    fn nonrel_kratzer_values() {
        assert_eq!(nonrel_kratzer_energy(5.0, 0.0, 0.35, 0, 0), -0.0);
        let e = nonrel_kratzer_energy(5.0, 1.25, 0.35, 0, 0);
        let expected = -7.65625 / (1.0 + 0.5 * 13.25f64.sqrt()).powi(2);
        assert!((e - expected).abs() < 1e-14);
        assert!((e + 0.962_74).abs() < 1e-5);
    }

    #[test]
    fn config_validation() {
        let p = table(0.25);
        let mut cfg = SolverConfig::for_params(&p);
        assert_eq!(cfg.abs_tol, 5e-12);
        cfg.bracket_samples = 1;
        assert!(solve_energy(&p, qn(0, -2), SymmetrySector::Spin, &cfg).is_err());
    }
}
