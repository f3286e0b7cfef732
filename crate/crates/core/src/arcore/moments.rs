use nalgebra::{DMatrix, DVector};

use super::ArFilter;
use crate::error::{Error, Result};

/// Second-order moments of the stationary (centred) AR process.
#[derive(Clone, Debug)]
pub struct StationaryMoments {
    pub gamma0: f64,
    /// Autocorrelations `rho_1..rho_L`.
    pub rho: Vec<f64>,
    /// `Gamma[i][j] = gamma0 * rho_{|i-j|}`.
    pub cov: DMatrix<f64>,
}

impl StationaryMoments {
    /// `d^T Gamma d`.
    pub fn quadratic_form(&self, d: &[f64]) -> f64 {
        let l = self.rho.len();
        debug_assert_eq!(d.len(), l);
        let mut acc = 0.0;
        for i in 0..l {
            let mut row = 0.0;
            for j in 0..l {
                row += self.cov[(i, j)] * d[j];
            }
            acc += d[i] * row;
        }
        acc
    }

    /// Autocorrelation at lag `k` (`rho_0 = 1`).
    pub fn rho_at(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.rho[k - 1]
        }
    }
}

/// Variance, autocorrelations and covariance matrix from the Yule-Walker
/// system `Phi rho = -psi`, `Phi[i][j] = psi_{i+j} + psi_{i-j} + delta_ij`,
/// and `gamma0 = sigma^2 / (1 + rho^T psi)`. The intercept only shifts the
/// mean and is ignored.
pub fn stationary_moments(f: &ArFilter) -> Result<StationaryMoments> {
    if !f.is_stable(1.0)? {
        return Err(Error::invalid(
            "stationary moments require a filter with all roots inside the unit circle",
        ));
    }
    let psi = f.coeffs();
    let l = psi.len();
    let coef = |k: isize| -> f64 {
        if k >= 1 && (k as usize) <= l {
            psi[k as usize - 1]
        } else {
            0.0
        }
    };
    let phi = DMatrix::from_fn(l, l, |i, j| {
        let (i, j) = (i as isize + 1, j as isize + 1);
        coef(i + j) + coef(i - j) + if i == j { 1.0 } else { 0.0 }
    });
    let rhs = DVector::from_iterator(l, psi.iter().map(|v| -v));
    let rho = phi
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("Yule-Walker matrix is singular"))?;
    let denom = 1.0 + rho.dot(&DVector::from_column_slice(psi));
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::numerical(format!(
            "non-positive Yule-Walker variance denominator {denom}"
        )));
    }
    let gamma0 = f.noise_variance() / denom;
    let rho: Vec<f64> = rho.iter().copied().collect();
    let lag = |k: usize| if k == 0 { 1.0 } else { rho[k - 1] };
    let cov = DMatrix::from_fn(l, l, |i, j| gamma0 * lag(i.abs_diff(j)));
    Ok(StationaryMoments { gamma0, rho, cov })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ar1_closed_form() {
        // gamma0 = sigma^2 / (1 - a^2) with a = -psi_1 = 0.5.
        let m = stationary_moments(&ArFilter::new(vec![-0.5]).unwrap()).unwrap();
        assert_abs_diff_eq!(m.gamma0, 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.rho[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn white_noise() {
        let f = ArFilter::with_params(vec![0.0, 0.0, 0.0], 0.0, 2.5).unwrap();
        let m = stationary_moments(&f).unwrap();
        assert_abs_diff_eq!(m.gamma0, 2.5, epsilon = 1e-14);
        assert!(m.rho.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn yule_walker_residual() {
        // rho_k + sum_l psi_l rho_{|k-l|} = 0 for k >= 1, and
        // gamma0 (1 + sum_l psi_l rho_l) = sigma^2.
        let f = ArFilter::with_params(vec![-0.9, 0.5, -0.1, 0.05], 0.0, 1.7).unwrap();
        let m = stationary_moments(&f).unwrap();
        let psi = f.coeffs();
        let extended = |k: usize| -> f64 {
            if k <= psi.len() {
                m.rho_at(k)
            } else {
                -(1..=psi.len())
                    .map(|l| psi[l - 1] * m.rho_at(k.abs_diff(l)))
                    .sum::<f64>()
            }
        };
        for k in 1..=psi.len() {
            let r: f64 = extended(k)
                + (1..=psi.len())
                    .map(|l| psi[l - 1] * extended(k.abs_diff(l)))
                    .sum::<f64>();
            assert!(r.abs() < 1e-9, "lag {k} residual {r}");
        }
        let lhs = m.gamma0 * (1.0 + psi.iter().zip(&m.rho).map(|(a, b)| a * b).sum::<f64>());
        assert_abs_diff_eq!(lhs, 1.7, epsilon = 1e-9);
        assert!(m.rho.iter().all(|r| r.abs() <= 1.0));
        let eig = m.cov.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > 0.0);
        assert_eq!(m.cov, m.cov.transpose());
    }

    #[test]
    fn unstable_rejected() {
        assert!(matches!(
            stationary_moments(&ArFilter::new(vec![-1.2]).unwrap()),
            Err(Error::InvalidInput(_))
        ));
    }
}
