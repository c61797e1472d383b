//! Spinor components of solved levels.
//!
//! The decoupled ("solved") component is the closed form
//! r^{c₁+½} e^{-εr} L_n^{(2c₁)}(2εr): the upper component F in the spin
//! sector, the lower component G in the pseudo-spin sector. The partner
//! component comes from the first-order coupled equations. Normalization is
//! always numerical.

use serde::Serialize;

use crate::error::{require, Error, Result};
use crate::model::{PotentialParams, SymmetrySector};
use crate::specfun::{laguerre_derivative_unchecked, laguerre_unchecked, ln_gamma_unchecked};
use crate::spectrum::EnergyLevel;

pub const DEFAULT_POINTS: usize = 4001;
/// Upper bound on the fraction of the norm allowed beyond r_max.
pub const TAIL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Upper,
    Lower,
}

impl Component {
    /// The component that decouples in `sector`.
    pub fn solved_in(sector: SymmetrySector) -> Self {
        match sector {
            SymmetrySector::Spin => Component::Upper,
            SymmetrySector::PseudoSpin => Component::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormMode {
    /// ∫ (F² + G²) dr = 1
    FullSpinor,
    /// ∫ (solved component)² dr = 1
    SolvedComponentOnly,
}

impl NormMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormMode::FullSpinor => "full",
            NormMode::SolvedComponentOnly => "solved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSamples {
    pub grid: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub norm_mode: NormMode,
    pub solved: Component,
    /// Quadrature of the chosen density before rescaling.
    pub norm_value: f64,
}

impl RadialSamples {
    /// Normalizes raw samples on a uniform grid.
    pub fn from_components(
        grid: Vec<f64>,
        upper: Vec<f64>,
        lower: Vec<f64>,
        solved: Component,
        norm_mode: NormMode,
    ) -> Result<Self> {
        if grid.len() < 2 || upper.len() != grid.len() || lower.len() != grid.len() {
            return Err(Error::Config(format!(
                "grid of {} points needs matching components (got {} and {})",
                grid.len(),
                upper.len(),
                lower.len()
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] <= 0.0 {
            return Err(Error::Config("grid must be positive and strictly increasing".into()));
        }
        let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
        let density: Vec<f64> = match (norm_mode, solved) {
            (NormMode::FullSpinor, _) => upper.iter().zip(&lower).map(|(f, g)| f * f + g * g).collect(),
            (NormMode::SolvedComponentOnly, Component::Upper) => upper.iter().map(|f| f * f).collect(),
            (NormMode::SolvedComponentOnly, Component::Lower) => lower.iter().map(|g| g * g).collect(),
        };
        let norm_value = simpson(step, &density);
        if !(norm_value > 0.0) || !norm_value.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scale = norm_value.sqrt().recip();
        let rescale = |v: Vec<f64>| v.into_iter().map(|x| x * scale).collect::<Vec<_>>();
        Ok(Self {
            grid,
            upper: rescale(upper),
            lower: rescale(lower),
            norm_mode,
            solved,
            norm_value,
        })
    }

    pub fn component(&self, which: Component) -> &[f64] {
        match which {
            Component::Upper => &self.upper,
            Component::Lower => &self.lower,
        }
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().expect("grid is never empty")
    }
}

/// Closed-form ingredients of a bound level.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Spinor {
    pub n: u32,
    pub c1: f64,
    pub eps: f64,
    pub shifted_kappa: f64,
    pub mass: f64,
    pub energy: f64,
    pub sector: SymmetrySector,
    pub params: PotentialParams,
}

impl Spinor {
    pub fn from_level(level: &EnergyLevel) -> Result<Self> {
        let bound = level.bound()?;
        let cs = &bound.couplings;
        let c1 = cs.c1().ok_or(Error::NonPositiveC1Sq(cs.c1_sq))?;
        let eps = cs.eps().ok_or(Error::Domain {
            name: "eps_sq",
            requirement: "positive",
            value: cs.eps_sq,
        })?;
        Ok(Self {
            n: level.n,
            c1,
            eps,
            shifted_kappa: level.shifted_kappa(),
            mass: level.params.mass(),
            energy: bound.energy,
            sector: level.sector,
            params: level.params,
        })
    }

    fn envelope(&self, r: f64) -> f64 {
        ((self.c1 + 0.5) * r.ln() - self.eps * r).exp()
    }

    pub fn solved(&self, r: f64) -> f64 {
        self.envelope(r) * laguerre_unchecked(self.n, 2.0 * self.c1, 2.0 * self.eps * r)
    }

    pub fn solved_derivative(&self, r: f64) -> f64 {
        let x = 2.0 * self.eps * r;
        let eta = 2.0 * self.c1;
        let lag = laguerre_unchecked(self.n, eta, x);
        let dlag = laguerre_derivative_unchecked(self.n, eta, x);
        self.envelope(r) * (lag * ((self.c1 + 0.5) / r - self.eps) + 2.0 * self.eps * dlag)
    }

    fn partner_denominator(&self) -> Result<f64> {
        let (denom, what) = match self.sector {
            SymmetrySector::Spin => (self.mass + self.energy, "m0 + E"),
            SymmetrySector::PseudoSpin => (self.mass - self.energy, "m0 - E"),
        };
        if denom == 0.0 {
            return Err(Error::DegenerateLevel(what));
        }
        Ok(denom)
    }

    /// Spin: G = (F' + κF/r - UF)/(m0+E). Pseudo-spin: F = (G' - κG/r + UG)/(m0-E).
    /// With U = -C/r both reduce to a (κ+C)/r shift.
    pub fn partner(&self, r: f64) -> Result<f64> {
        let denom = self.partner_denominator()?;
        let k_term = self.shifted_kappa / r * self.solved(r);
        Ok(match self.sector {
            SymmetrySector::Spin => (self.solved_derivative(r) + k_term) / denom,
            SymmetrySector::PseudoSpin => (self.solved_derivative(r) - k_term) / denom,
        })
    }

    pub fn upper_lower(&self, r: f64) -> Result<(f64, f64)> {
        let solved = self.solved(r);
        let partner = self.partner(r)?;
        Ok(match self.sector {
            SymmetrySector::Spin => (solved, partner),
            SymmetrySector::PseudoSpin => (partner, solved),
        })
    }

    /// Coefficient of the 1/r term in the radial operator this level solves.
    fn binding_c2(&self) -> f64 {
        let (d, a) = (self.params.depth(), self.params.range());
        match self.sector {
            SymmetrySector::Spin => -4.0 * d * a * (self.mass + self.energy),
            SymmetrySector::PseudoSpin => -4.0 * d * a * (self.mass - self.energy),
        }
    }
}

/// The decoupled component at r, without normalization.
pub fn solved_component(level: &EnergyLevel, r: f64) -> Result<f64> {
    let spinor = Spinor::from_level(level)?;
    require(r > 0.0, "r", "positive", r)?;
    Ok(spinor.solved(r))
}

/// The partner component at r from the first-order coupled equations, using
/// the analytic derivative of the solved component.
pub fn partner_component(level: &EnergyLevel, r: f64) -> Result<f64> {
    let spinor = Spinor::from_level(level)?;
    require(r > 0.0, "r", "positive", r)?;
    spinor.partner(r)
}

/// Analytic derivative of the solved component next to central differences at
/// `step` and `step / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub analytic: f64,
    pub central: f64,
    pub central_half_step: f64,
}

impl DerivativeCheck {
    /// Error reduction when halving the step; ≈ 4 for a second-order scheme.
    pub fn refinement_ratio(&self) -> f64 {
        (self.central - self.analytic).abs() / (self.central_half_step - self.analytic).abs()
    }
}

pub fn partner_derivative_check(level: &EnergyLevel, r: f64, dr_step: f64) -> Result<DerivativeCheck> {
    let spinor = Spinor::from_level(level)?;
    require(dr_step > 0.0 && dr_step < r, "dr_step", "positive and below r", dr_step)?;
    let central = |h: f64| (spinor.solved(r + h) - spinor.solved(r - h)) / (2.0 * h);
    Ok(DerivativeCheck {
        analytic: spinor.solved_derivative(r),
        central: central(dr_step),
        central_half_step: central(0.5 * dr_step),
    })
}

/// (n + c₁ + 1)·10/ε
pub fn default_r_max(level: &EnergyLevel) -> Result<f64> {
    let s = Spinor::from_level(level)?;
    Ok((f64::from(s.n) + s.c1 + 1.0) * 10.0 / s.eps)
}

/// Samples F and G on r_i = i·r_max/count (i = 1..=count) and normalizes
/// with composite Simpson quadrature.
pub fn sample_and_normalize(
    level: &EnergyLevel,
    r_max: f64,
    count: usize,
    norm_mode: NormMode,
) -> Result<RadialSamples> {
    let spinor = Spinor::from_level(level)?;
    require(r_max > 0.0 && r_max.is_finite(), "r_max", "positive", r_max)?;
    if count < 2 {
        return Err(Error::Config(format!("need at least 2 sample points, got {count}")));
    }
    let step = r_max / count as f64;
    let grid: Vec<f64> = (1..=count).map(|i| step * i as f64).collect();
    let mut upper = Vec::with_capacity(count);
    let mut lower = Vec::with_capacity(count);
    for &r in &grid {
        let (f, g) = spinor.upper_lower(r)?;
        upper.push(f);
        lower.push(g);
    }
    let solved = Component::solved_in(spinor.sector);
    let samples = RadialSamples::from_components(grid, upper, lower, solved, norm_mode)?;

    // Beyond r_max the density behaves like r^p e^{-2εr}; for r > R it is
    // bounded by ρ(R) e^{-(2ε - p/R)(r - R)}.
    let p = 2.0 * (spinor.c1 + f64::from(spinor.n)) + 1.0;
    let decay = 2.0 * spinor.eps - p / r_max;
    let last = samples.grid.len() - 1;
    let edge_density = match norm_mode {
        NormMode::FullSpinor => samples.upper[last].powi(2) + samples.lower[last].powi(2),
        NormMode::SolvedComponentOnly => samples.component(solved)[last].powi(2),
    };
    let tail_fraction = if decay > 0.0 {
        edge_density / decay
    } else {
        f64::INFINITY
    };
    if tail_fraction > TAIL_LIMIT {
        return Err(Error::RMaxTooSmall {
            r_max,
            tail_fraction,
            limit: TAIL_LIMIT,
        });
    }
    Ok(samples)
}

/// Composite Simpson rule on a uniform grid; an odd number of intervals
/// closes with the 3/8 rule on the last three.
pub fn simpson(step: f64, values: &[f64]) -> f64 {
    let intervals = values.len().saturating_sub(1);
    match intervals {
        0 => 0.0,
        1 => 0.5 * step * (values[0] + values[1]),
        _ => {
            let (even_part, tail) = if intervals.is_multiple_of(2) {
                (values, &values[..0])
            } else {
                (&values[..values.len() - 3], &values[values.len() - 4..])
            };
            let mut total = 0.0;
            if even_part.len() >= 3 {
                let mut sum = even_part[0] + even_part[even_part.len() - 1];
                for (i, v) in even_part.iter().enumerate().take(even_part.len() - 1).skip(1) {
                    sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                total = sum * step / 3.0;
            }
            if !tail.is_empty() {
                total += 3.0 * step / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3]);
            }
            total
        }
    }
}

/// Strict sign changes of a component, ignoring samples below 1e-12 of its
/// largest magnitude.
pub fn node_count(samples: &RadialSamples, component: Component) -> usize {
    sign_changes(samples.component(component), 1e-12)
}

pub(crate) fn sign_changes(values: &[f64], relative_floor: f64) -> usize {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = relative_floor * peak;
    let mut last_sign = 0.0;
    let mut changes = 0;
    for v in values.iter().filter(|v| v.abs() > floor) {
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    changes
}

/// ∫₀^∞ r^{2c₁+1} e^{-2εr} dr = Γ(2c₁+2)/(2ε)^{2c₁+2}, the unnormalized
/// norm of a nodeless solved component.
pub fn nodeless_norm(c1: f64, eps: f64) -> f64 {
    let p = 2.0 * c1 + 2.0;
    (ln_gamma_unchecked(p) - p * (2.0 * eps).ln()).exp()
}

/// Residual of a differential equation at one point, next to the magnitude
/// of its largest individual term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquationResidual {
    pub residual: f64,
    pub largest_term: f64,
}

impl EquationResidual {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.largest_term
    }
}

fn five_point(f: impl Fn(f64) -> f64, r: f64, h: f64) -> (f64, f64, f64) {
    let (m2, m1, c, p1, p2) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    (c, d1, d2)
}

/// Substitutes φ = (solved component)/√r into
/// φ'' + φ'/r - (c₁² + c₂ r + ε² r²) φ/r² = 0 using five-point differences of
/// step `h`. In the pseudo-spin sector c₂ carries the sign of the mirrored
/// quantization condition.
pub fn radial_equation_residual(level: &EnergyLevel, r: f64, h: f64) -> Result<EquationResidual> {
    let s = Spinor::from_level(level)?;
    require(h > 0.0 && 2.0 * h < r, "h", "positive and below r/2", h)?;
    let (phi, d1, d2) = five_point(|x| s.solved(x) / x.sqrt(), r, h);
    let terms = [
        d2,
        d1 / r,
        -s.c1 * s.c1 * phi / (r * r),
        -s.binding_c2() * phi / r,
        -s.eps * s.eps * phi,
    ];
    Ok(EquationResidual {
        residual: terms.iter().sum(),
        largest_term: terms.iter().fold(0.0f64, |m, t| m.max(t.abs())),
    })
}

/// Potential entering the first-order pair for the level's sector. The
/// pseudo-spin closed form belongs to the well with its 1/r term reversed,
/// +2Da/r + Da²/r², consistent with the mirrored quantization condition.
fn coupling_potential(params: &PotentialParams, sector: SymmetrySector, r: f64) -> f64 {
    let (d, a) = (params.depth(), params.range());
    match sector {
        SymmetrySector::Spin => params.potential_unchecked(r),
        SymmetrySector::PseudoSpin => 2.0 * d * a / r + d * a * a / (r * r),
    }
}

/// Residual of the first-order equation not used to build the partner:
/// spin checks (d/dr - κ/r + U) G = (m0 - E + 2V) F; pseudo-spin checks
/// (d/dr + κ/r - U) F = (m0 + E - 2V) G. Derivatives by five-point differences.
pub fn coupled_equation_residual(level: &EnergyLevel, r: f64, h: f64) -> Result<EquationResidual> {
    let s = Spinor::from_level(level)?;
    require(h > 0.0 && 2.0 * h < r, "h", "positive and below r/2", h)?;
    s.partner_denominator()?;
    let partner = |x: f64| s.partner(x).unwrap_or(f64::NAN);
    let (p, dp, _) = five_point(partner, r, h);
    let solved = s.solved(r);
    let v = coupling_potential(&s.params, s.sector, r);
    let k = s.shifted_kappa;
    let terms = match s.sector {
        SymmetrySector::Spin => [dp, -k / r * p, -(s.mass - s.energy + 2.0 * v) * solved],
        SymmetrySector::PseudoSpin => [dp, k / r * p, -(s.mass + s.energy - 2.0 * v) * solved],
    };
    Ok(EquationResidual {
        residual: terms.iter().sum(),
        largest_term: terms.iter().fold(0.0f64, |m, t| m.max(t.abs())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuantumNumbers;
    use crate::spectrum::{solve_energy, SolverConfig};

    fn level(sector: SymmetrySector, n: u32, kappa: i32, c: f64) -> EnergyLevel {
        let p = PotentialParams::reference_table(c);
        solve_energy(
            &p,
            QuantumNumbers::new(n, kappa).unwrap(),
            sector,
            &SolverConfig::for_params(&p),
        )
        .unwrap()
    }

    #[test]
    fn ground_state_is_nodeless_and_regular() {
        let lv = level(SymmetrySector::Spin, 0, -2, 0.25);
        let s = Spinor::from_level(&lv).unwrap();
        for r in [1e-3f64, 0.1, 1.0, 4.0] {
            let expected = r.powf(s.c1 + 0.5) * (-s.eps * r).exp();
            assert!((solved_component(&lv, r).unwrap() - expected).abs() < 1e-14 * expected.max(1e-300));
        }
        assert!(solved_component(&lv, 1e-9).unwrap() < 1e-20);
        let samples = sample_and_normalize(&lv, default_r_max(&lv).unwrap(), 2001, NormMode::FullSpinor).unwrap();
        assert_eq!(node_count(&samples, Component::Upper), 0);
        assert!(samples.upper.iter().all(|f| *f > 0.0));
    }

    #[test]
    fn first_excited_node_location() {
        let lv = level(SymmetrySector::Spin, 1, -2, 0.25);
        let s = Spinor::from_level(&lv).unwrap();
        let node = (1.0 + 2.0 * s.c1) / (2.0 * s.eps);
        assert!(
            solved_component(&lv, node * 0.999).unwrap().signum()
                != solved_component(&lv, node * 1.001).unwrap().signum()
        );
        assert!(solved_component(&lv, node).unwrap().abs() < 1e-12);
        let samples =
            sample_and_normalize(&lv, default_r_max(&lv).unwrap(), DEFAULT_POINTS, NormMode::FullSpinor).unwrap();
        assert_eq!(node_count(&samples, Component::Upper), 1);
    }

    #[test]
    fn ground_state_partner_profile() {
        let lv = level(SymmetrySector::Spin, 0, -2, 0.25);
        let s = Spinor::from_level(&lv).unwrap();
        let e = lv.energy().unwrap();
        for r in [0.2, 0.7, 2.0] {
            let f = s.solved(r);
            let expected = ((s.c1 + 0.5 + 0.25) / r + (-2.0) / r - s.eps) * f / (5.0 + e);
            assert!((partner_component(&lv, r).unwrap() - expected).abs() < 1e-13 * f);
        }
        assert!(partner_component(&lv, 200.0).unwrap().abs() < 1e-100);
    }

    #[test]
    fn central_differences_are_second_order() {
        let lv = level(SymmetrySector::Spin, 1, -3, 0.5);
        let check = partner_derivative_check(&lv, 0.8, 1e-2).unwrap();
        let ratio = check.refinement_ratio();
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn quadrature_refinement_is_stable() {
        let lv = level(SymmetrySector::PseudoSpin, 1, -3, 0.25);
        let r_max = default_r_max(&lv).unwrap();
        let coarse = sample_and_normalize(&lv, r_max, 4001, NormMode::FullSpinor).unwrap();
        let fine = sample_and_normalize(&lv, r_max, 8001, NormMode::FullSpinor).unwrap();
        assert!((coarse.norm_value - fine.norm_value).abs() < 1e-8 * fine.norm_value);
        let renorm: Vec<f64> = coarse
            .upper
            .iter()
            .zip(&coarse.lower)
            .map(|(f, g)| f * f + g * g)
            .collect();
        assert!((simpson(coarse.grid[0], &renorm) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solved_only_norm_matches_gamma_integral() {
        let lv = level(SymmetrySector::Spin, 0, -4, 0.5);
        let s = Spinor::from_level(&lv).unwrap();
        let samples = sample_and_normalize(
            &lv,
            default_r_max(&lv).unwrap(),
            DEFAULT_POINTS,
            NormMode::SolvedComponentOnly,
        )
        .unwrap();
        let exact = nodeless_norm(s.c1, s.eps);
        assert!(
            (samples.norm_value - exact).abs() < 1e-9 * exact,
            "{} vs {exact}",
            samples.norm_value
        );
    }

    #[test]
    fn small_r_max_is_rejected() {
        let lv = level(SymmetrySector::Spin, 0, -2, 0.25);
        let err = sample_and_normalize(&lv, 1.0, 101, NormMode::FullSpinor).unwrap_err();
        assert!(matches!(err, Error::RMaxTooSmall { .. }));
    }

    #[test]
    fn zero_function_is_rejected() {
        let grid = vec![0.5, 1.0, 1.5];
        let err =
            RadialSamples::from_components(grid, vec![0.0; 3], vec![0.0; 3], Component::Upper, NormMode::FullSpinor)
                .unwrap_err();
        assert_eq!(err, Error::ZeroNorm);
    }

    #[test]
    fn unbound_levels_are_rejected() {
        let lv = level(SymmetrySector::PseudoSpin, 1, -1, 0.5);
        assert!(matches!(solved_component(&lv, 1.0), Err(Error::NotBound(_))));
        assert!(matches!(partner_component(&lv, 1.0), Err(Error::NotBound(_))));
    }

    #[test]
    fn simpson_rules_are_exact_for_cubics() {
        let cubic = |x: f64| 2.0 * x * x * x - x + 1.0;
        let integral = |x: f64| 0.5 * x.powi(4) - 0.5 * x * x + x;
        for points in [2usize, 3, 4, 5, 8, 11] {
            let h = 0.3;
            let values: Vec<f64> = (0..points).map(|i| cubic(h * i as f64)).collect();
            let exact = integral(h * (points - 1) as f64);
            let tol = if points == 2 { 0.1 } else { 1e-12 };
            assert!((simpson(h, &values) - exact).abs() < tol, "{points}");
        }
    }

    #[test]
    fn sign_changes_ignore_noise() {
        assert_eq!(sign_changes(&[1.0, 2.0, 3.0], 1e-12), 0);
        assert_eq!(sign_changes(&[1.0, -1e-14, 3.0, -2.0, 0.0, 4.0], 1e-12), 2);
    }

    #[test]
    fn spin_pair_satisfies_both_first_order_equations() {
        for (n, kappa) in [(0, -2), (1, -5)] {
            let lv = level(SymmetrySector::Spin, n, kappa, 0.5);
            for r in [0.1, 0.5, 1.3, 3.0] {
                let res = coupled_equation_residual(&lv, r, 1e-3 * r).unwrap();
                assert!(res.relative() < 1e-6, "r = {r}: {res:?}");
            }
        }
    }

    #[test]
    fn pseudospin_pair_uses_mirrored_well() {
        let lv = level(SymmetrySector::PseudoSpin, 1, -3, 0.25);
        for r in [0.1, 0.9, 2.5] {
            let res = coupled_equation_residual(&lv, r, 1e-3 * r).unwrap();
            assert!(res.relative() < 1e-6, "r = {r}: {res:?}");
        }
    }
}
