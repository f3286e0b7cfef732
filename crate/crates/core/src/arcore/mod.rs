//! AR filters and the mismatch distance between them.
//!
//! A filter of order `L` stores coefficients `psi_1..psi_L`, an intercept
//! `psi_0` and a noise variance, for the recursion
//!
//! ```text
//! x(n) + psi_0 + sum_l psi_l x(n - l) = eps(n),   eps(n) ~ N(0, sigma^2)
//! ```
//!
//! so the characteristic polynomial is `z^L + sum_l psi_l z^(L-l)`. Every
//! module in the crate uses this one sign convention.
//!
//! The mismatch distance `D(A, B)` is the excess one-step mean squared
//! prediction error when data generated by `A` are predicted with `B`. It is
//! asymmetric. [`distance_cov`] is the default path; [`distance_roots`],
//! [`distance_resultant`] and [`distance_mc`] are independent cross-checks.

mod distance;
mod moments;
mod montecarlo;
mod resultant;

use nalgebra::{Complex, DMatrix, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use distance::distance_with_moments;
pub use distance::{distance_cov, distance_full, distance_roots, DEGENERATE_ROOT_TOL};
pub use moments::{stationary_moments, StationaryMoments};
pub use montecarlo::{distance_mc, mc_burn_in, McEstimate};
pub use resultant::{distance_resultant, MAX_RESULTANT_ORDER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArFilter {
    coeffs: Vec<f64>,
    #[serde(default)]
    intercept: f64,
    #[serde(default = "unit_variance")]
    noise_variance: f64,
}

fn unit_variance() -> f64 {
    1.0
}

impl ArFilter {
    /// Zero-intercept, unit-variance filter.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        Self::with_params(coeffs, 0.0, 1.0)
    }

    pub fn with_params(coeffs: Vec<f64>, intercept: f64, noise_variance: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("filter order must be at least 1"));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!(
                "coefficient psi_{} is not finite",
                i + 1
            )));
        }
        if !intercept.is_finite() {
            return Err(Error::invalid("intercept is not finite"));
        }
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::invalid(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        Ok(Self {
            coeffs,
            intercept,
            noise_variance,
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn set_intercept(&mut self, intercept: f64) {
        self.intercept = intercept;
    }

    pub fn set_noise_variance(&mut self, v: f64) {
        self.noise_variance = v;
    }

    /// Coefficients zero-padded (never truncated) to `len`.
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        if c.len() < len {
            c.resize(len, 0.0);
        }
        c
    }

    /// Same filter with coefficients zero-padded to order `len`.
    pub fn padded_filter(&self, len: usize) -> ArFilter {
        ArFilter {
            coeffs: self.padded(len),
            ..self.clone()
        }
    }

    /// `1 + sum_l psi_l`, the characteristic polynomial at `z = 1`.
    pub fn one_plus_sum(&self) -> f64 {
        1.0 + self.coeffs.iter().sum::<f64>()
    }

    /// Stationary mean `-psi_0 / (1 + sum_l psi_l)`.
    pub fn stationary_mean(&self) -> Result<f64> {
        let denom = self.one_plus_sum();
        if denom.abs() < 1e-14 {
            return Err(Error::invalid(
                "1 + sum(psi) vanishes: the process has no stationary mean",
            ));
        }
        Ok(-self.intercept / denom)
    }

    /// Intercept that gives the process stationary mean `mean`.
    pub fn intercept_for_mean(coeffs: &[f64], mean: f64) -> f64 {
        -mean * (1.0 + coeffs.iter().sum::<f64>())
    }

    pub fn roots(&self) -> Result<Vec<Complex<f64>>> {
        roots(self)
    }

    pub fn max_root_modulus(&self) -> Result<f64> {
        Ok(self.roots()?.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn is_stable(&self, radius: f64) -> Result<bool> {
        is_stable(self, radius)
    }

    /// One-step prediction `-psi_0 - sum_l psi_l x(n-l)` given `history`
    /// ordered most recent first.
    pub fn predict(&self, history: &[f64]) -> f64 {
        -self.intercept
            - self
                .coeffs
                .iter()
                .zip(history)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }
}

/// All `L` roots of `z^L + sum_l psi_l z^(L-l)`, as eigenvalues of the
/// companion matrix, each refined by Newton steps when well separated.
pub fn roots(f: &ArFilter) -> Result<Vec<Complex<f64>>> {
    let c = f.coeffs();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite filter coefficient"));
    }
    // Trailing zero coefficients are exact roots at the origin; the Schur
    // iteration can stall on the resulting nilpotent block.
    let l = c.len();
    let nonzero = c.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1);
    let mut roots = vec![Complex::new(0.0, 0.0); l - nonzero];
    let c = &c[..nonzero];
    match nonzero {
        0 => return Ok(roots),
        1 => {
            roots.push(Complex::new(-c[0], 0.0));
            return Ok(roots);
        }
        _ => {}
    }
    let mut companion = DMatrix::<f64>::zeros(nonzero, nonzero);
    for (j, &v) in c.iter().enumerate() {
        companion[(0, j)] = -v;
    }
    for i in 1..nonzero {
        companion[(i, i - 1)] = 1.0;
    }
    let schur = Schur::try_new(companion, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("companion eigenvalue solver did not converge"))?;
    let mut found: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    if found
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::numerical("companion eigenvalue solver diverged"));
    }
    polish_roots(c, &mut found);
    roots.extend(found);
    Ok(roots)
}

fn char_poly_and_derivative(c: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let mut p = Complex::new(1.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &v in c {
        dp = dp * z + p;
        p = p * z + v;
    }
    (p, dp)
}

fn polish_roots(c: &[f64], roots: &mut [Complex<f64>]) {
    let snapshot = roots.to_vec();
    for (i, root) in roots.iter_mut().enumerate() {
        let separated = snapshot
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .all(|(_, other)| (*other - *root).norm() > 1e-3);
        if !separated {
            continue;
        }
        let real = root.im == 0.0;
        for _ in 0..3 {
            let (p, dp) = char_poly_and_derivative(c, *root);
            if dp.norm() == 0.0 {
                break;
            }
            let mut next = *root - p / dp;
            if real {
                next.im = 0.0;
            }
            if char_poly_and_derivative(c, next).0.norm() < p.norm() {
                *root = next;
            } else {
                break;
            }
        }
    }
}

/// True iff every root has modulus strictly below `radius`.
pub fn is_stable(f: &ArFilter, radius: f64) -> Result<bool> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::invalid(format!(
            "radius must lie in (0, 1], got {radius}"
        )));
    }
    Ok(f.max_root_modulus()? < radius)
}
