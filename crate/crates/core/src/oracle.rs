//! Finite-difference eigensolver for the effective radial operator
//!
//! ```text
//! -u'' + [(c1² - 1/4)/r² + c2/r] u = λ u,   u(r_min) = u(r_max) = 0
//! ```
//!
//! A bound level with energy E must appear as λ = -ε²(E). The operator is
//! discretized with the three-point Laplacian and its eigenvalues are found by
//! Sturm-sequence bisection, so nothing here reuses the closed-form spectrum or
//! wavefunctions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CouplingSet, SymmetrySector};
use crate::spectrum::EnergyLevel;
use crate::wavefun::sign_changes;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Config(format!(
                "tridiagonal matrix needs n diagonal and n-1 off-diagonal entries (got {} and {})",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Entry (i, j) of the dense matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    /// Number of eigenvalues strictly below `x`, from the signs of the LDLᵀ
    /// pivots of T - xI.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.off.iter().fold(1.0f64, |m, e| m.max(e * e));
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.dim() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - e * e / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Default bisection width, 1e-10 absolute. Bisection also stops once the
    /// midpoint no longer separates the endpoints.
    pub fn default_tolerance(&self) -> f64 {
        1e-10
    }

    /// The `index`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, index: usize, tol: f64) -> Result<f64> {
        if index >= self.dim() {
            return Err(Error::Config(format!(
                "eigenvalue index {index} out of range for dimension {}",
                self.dim()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin_bounds();
        let pad = f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
        lo -= pad;
        hi += pad;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        let tol = self.default_tolerance();
        (0..k).map(|i| self.eigenvalue(i, tol)).collect()
    }

    /// Unit eigenvector for an (approximate) eigenvalue, by inverse iteration.
    pub fn eigenvector(&self, eigenvalue: f64) -> Vec<f64> {
        let n = self.dim();
        let lu = ShiftedLu::factor(self, eigenvalue);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin()).collect();
        for _ in 0..4 {
            lu.solve(&mut v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

/// LU factorization of T - σI with partial pivoting.
struct ShiftedLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    upper2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.dim();
        let tiny = f64::EPSILON * t.gershgorin_bounds().1.abs().max(1.0);
        let mut lower = t.off.clone();
        let mut upper = t.off.clone();
        let mut upper2 = vec![0.0; n.saturating_sub(2)];
        let mut diag: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if diag[i].abs() >= lower[i].abs() {
                if diag[i] == 0.0 {
                    diag[i] = tiny;
                }
                let fact = lower[i] / diag[i];
                lower[i] = fact;
                diag[i + 1] -= fact * upper[i];
            } else {
                let fact = diag[i] / lower[i];
                diag[i] = lower[i];
                lower[i] = fact;
                let temp = upper[i];
                upper[i] = diag[i + 1];
                diag[i + 1] = temp - fact * diag[i + 1];
                if i + 2 < n {
                    upper2[i] = upper[i + 1];
                    upper[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if diag[n - 1] == 0.0 {
            diag[n - 1] = tiny;
        }
        Self {
            lower,
            diag,
            upper,
            upper2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.lower[i] * b[i];
            } else {
                b[i + 1] -= self.lower[i] * b[i];
            }
        }
        b[n - 1] /= self.diag[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.upper[n - 2] * b[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.upper[i] * b[i + 1] - self.upper2[i] * b[i + 2]) / self.diag[i];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveOperator {
    pub c1_sq: f64,
    pub c2_sq: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub grid_points: usize,
}

impl EffectiveOperator {
    pub fn new(c1_sq: f64, c2_sq: f64, r_min: f64, r_max: f64, grid_points: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::Config(format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]")));
        }
        if grid_points < 3 {
            return Err(Error::Config(format!("need at least 3 grid points, got {grid_points}")));
        }
        Ok(Self {
            c1_sq,
            c2_sq,
            r_min,
            r_max,
            grid_points,
        })
    }

    /// Operator of a coupling set, using the 1/r coefficient that matches the
    /// solver's quantization condition (see [`CouplingSet::binding_c2`]).
    pub fn from_couplings(cs: &CouplingSet, r_min: f64, r_max: f64, grid_points: usize) -> Result<Self> {
        Self::new(cs.c1_sq, cs.binding_c2(), r_min, r_max, grid_points)
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.grid_points as f64 + 1.0)
    }

    /// Interior nodes r_i = r_min + i·h, i = 1..=grid_points.
    pub fn grid(&self) -> Vec<f64> {
        let h = self.step();
        (1..=self.grid_points).map(|i| self.r_min + h * i as f64).collect()
    }

    pub fn discretize(&self) -> SymTridiagonal {
        let h = self.step();
        let inv_h2 = 1.0 / (h * h);
        let diag = self
            .grid()
            .into_iter()
            .map(|r| 2.0 * inv_h2 + (self.c1_sq - 0.25) / (r * r) + self.c2_sq / r)
            .collect();
        let off = vec![-inv_h2; self.grid_points - 1];
        SymTridiagonal { diag, off }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub sector: SymmetrySector,
    pub n: u32,
    pub kappa: f64,
    pub energy: f64,
    pub grid_points: usize,
    pub step: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// (n+1)-th lowest eigenvalue of the discretized operator.
    pub eigenvalue: f64,
    /// -ε² at the solved energy.
    pub target: f64,
    pub relative_error: f64,
    /// ε from -c2/(2(n + c1 + 1/2)), the hydrogen-like form of the
    /// quantization condition.
    pub closed_form_eps: f64,
    pub closed_form_relative_error: f64,
    pub eigenvector_sign_changes: usize,
}

/// Box used by [`validate_level`]: r_min = 1e-4·a, r_max = (n + c1 + 1)·10/ε.
pub fn default_box(level: &EnergyLevel) -> Result<(f64, f64)> {
    let bound = level.bound()?;
    let cs = &bound.couplings;
    let c1 = cs.c1().ok_or(Error::NonPositiveC1Sq(cs.c1_sq))?;
    let eps = cs.eps().ok_or(Error::Domain {
        name: "eps_sq",
        requirement: "positive",
        value: cs.eps_sq,
    })?;
    Ok((
        1e-4 * level.params.range(),
        (f64::from(level.n) + c1 + 1.0) * 10.0 / eps,
    ))
}

pub fn validate_level(level: &EnergyLevel, grid_points: usize) -> Result<ValidationReport> {
    let (r_min, r_max) = default_box(level)?;
    validate_level_in_box(level, r_min, r_max, grid_points)
}

pub fn validate_level_in_box(
    level: &EnergyLevel,
    r_min: f64,
    r_max: f64,
    grid_points: usize,
) -> Result<ValidationReport> {
    let bound = level.bound()?;
    let cs = bound.couplings;
    let op = EffectiveOperator::from_couplings(&cs, r_min, r_max, grid_points)?;
    let matrix = op.discretize();
    let index = level.n as usize;
    let eigenvalue = matrix.eigenvalue(index, matrix.default_tolerance())?;
    let target = -cs.eps_sq;
    let vector = matrix.eigenvector(eigenvalue);

    let c1 = cs.c1().ok_or(Error::NonPositiveC1Sq(cs.c1_sq))?;
    let eps = cs.eps_sq.sqrt();
    let closed_form_eps = -cs.binding_c2() / (2.0 * (f64::from(level.n) + c1 + 0.5));
    Ok(ValidationReport {
        sector: level.sector,
        n: level.n,
        kappa: level.kappa,
        energy: bound.energy,
        grid_points,
        step: op.step(),
        r_min,
        r_max,
        eigenvalue,
        target,
        relative_error: (eigenvalue - target).abs() / cs.eps_sq,
        closed_form_eps,
        closed_form_relative_error: (closed_form_eps - eps).abs() / eps,
        eigenvector_sign_changes: sign_changes(&vector, 1e-8),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_by_two() {
        let t = SymTridiagonal::new(vec![2.0, 2.0], vec![-1.0]).unwrap();
        let ev = t.lowest_eigenvalues(2).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-10);
        assert!((ev[1] - 3.0).abs() < 1e-10);
        assert_eq!(t.get(0, 1), -1.0);
        assert_eq!(t.get(1, 0), t.get(0, 1));
        assert!(t.eigenvalue(2, 1e-12).is_err());
    }

    #[test]
    fn rejects_mismatched_shapes() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
        assert!(EffectiveOperator::new(0.25, 0.0, 1.0, 0.5, 10).is_err());
        assert!(EffectiveOperator::new(0.25, 0.0, 0.1, 1.0, 2).is_err());
    }

    #[test]
    fn sturm_count_brackets_spectrum() {
        let op = EffectiveOperator::new(0.25, 0.0, 0.5, 2.5, 50).unwrap();
        let t = op.discretize();
        let ev = t.lowest_eigenvalues(5).unwrap();
        for (k, &lambda) in ev.iter().enumerate() {
            assert!(t.sturm_count(lambda + 1e-6) > k);
            assert!(t.sturm_count(lambda - 1e-6) <= k);
        }
        let (lo, hi) = t.gershgorin_bounds();
        assert_eq!(t.sturm_count(lo - 1.0), 0);
        assert_eq!(t.sturm_count(hi + 1.0), t.dim());
    }

    #[test]
    fn matrix_is_symmetric() {
        let t = EffectiveOperator::new(3.1, -2.0, 1e-3, 5.0, 20).unwrap().discretize();
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                assert_eq!(t.get(i, j), t.get(j, i));
            }
        }
    }

    #[test]
    fn free_particle_discrete_spectrum() {
        let (r_min, r_max, points) = (1.0, 4.0, 300);
        let op = EffectiveOperator::new(0.25, 0.0, r_min, r_max, points).unwrap();
        let h = op.step();
        let length = r_max - r_min;
        let ev = op.discretize().lowest_eigenvalues(3).unwrap();
        for (k, lambda) in ev.iter().enumerate() {
            let k = (k + 1) as f64;
            let exact = 2.0 / (h * h) * (1.0 - (k * PI * h / length).cos());
            assert!((lambda - exact).abs() < 1e-8 * exact, "{lambda} vs {exact}");
        }
    }

    #[test]
    fn free_particle_second_order_convergence() {
        let continuum = (PI / 3.0).powi(2);
        let errors: Vec<f64> = [99, 199, 399]
            .iter()
            .map(|&points| {
                let op = EffectiveOperator::new(0.25, 0.0, 1.0, 4.0, points).unwrap();
                (op.discretize().lowest_eigenvalues(1).unwrap()[0] - continuum).abs()
            })
            .collect();
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        }
    }

    #[test]
    fn hydrogen_like_operator() {
        // -u'' - 2/r u: λ_k = -1/(k+1)², eigenvector with k interior nodes
        let op = EffectiveOperator::new(2.25, -2.0, 1e-4, 60.0, 6000).unwrap();
        let t = op.discretize();
        for k in 0..3 {
            let lambda = t.eigenvalue(k, t.default_tolerance()).unwrap();
            let exact = -1.0 / ((k + 2) as f64).powi(2);
            assert!((lambda - exact).abs() < 2e-3 * exact.abs(), "{lambda} vs {exact}");
            assert_eq!(sign_changes(&t.eigenvector(lambda), 1e-8), k);
        }
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let t = SymTridiagonal::new(vec![4.0, 1.0, 3.0, -2.0, 0.5], vec![1.0, -2.0, 0.3, 1.5]).unwrap();
        for k in 0..5 {
            let lambda = t.eigenvalue(k, 1e-14).unwrap();
            let v = t.eigenvector(lambda);
            for i in 0..5 {
                let tv: f64 = (0..5).map(|j| t.get(i, j) * v[j]).sum();
                assert!((tv - lambda * v[i]).abs() < 1e-9, "k = {k}");
            }
        }
    }
}
