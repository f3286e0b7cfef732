use nalgebra::Complex;

use super::{stationary_moments, ArFilter, StationaryMoments};
use crate::error::{Error, Result};

/// Roots closer than this to zero or to each other route to [`distance_cov`].
pub const DEGENERATE_ROOT_TOL: f64 = 1e-7;

fn common_order(a: &ArFilter, b: &ArFilter) -> usize {
    a.order().max(b.order())
}

/// Mismatch distance without intercepts, `(psi_A - psi_B)^T Gamma_A (psi_A - psi_B)`.
pub fn distance_cov(a: &ArFilter, b: &ArFilter) -> Result<f64> {
    let l = common_order(a, b);
    let moments = stationary_moments(&a.padded_filter(l))?;
    Ok(distance_with_moments(&moments, &a.padded(l), &b.padded(l)))
}

/// Quadratic form against precomputed moments of the generating filter.
pub(crate) fn distance_with_moments(moments: &StationaryMoments, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    moments.quadratic_form(&diff).max(0.0)
}

/// Mismatch distance from the roots `a_k` of A and `b_l` of B:
///
/// ```text
/// sigma_A^2 sum_k prod_l (a_k - b_l) / (a_k prod_{l != k} (a_k - a_l))
///               * ( prod_l (1 - a_k conj(b_l)) / prod_l (1 - a_k conj(a_l)) - 1 )
/// ```
///
/// Only defined for distinct non-zero roots of A.
pub fn distance_roots(a: &ArFilter, b: &ArFilter) -> Result<f64> {
    let l = common_order(a, b);
    let fa = a.padded_filter(l);
    if !fa.is_stable(1.0)? {
        return Err(Error::invalid("generating filter must be stable"));
    }
    let ra = fa.roots()?;
    let rb = b.padded_filter(l).roots()?;
    for (k, ak) in ra.iter().enumerate() {
        if ak.norm() < DEGENERATE_ROOT_TOL {
            return Err(Error::DegenerateRoots(format!("root {k} of A is ~0")));
        }
        if ra[k + 1..]
            .iter()
            .any(|aj| (*aj - *ak).norm() < DEGENERATE_ROOT_TOL)
        {
            return Err(Error::DegenerateRoots(format!("root {k} of A is repeated")));
        }
    }
    let one = Complex::new(1.0, 0.0);
    let mut total = Complex::new(0.0, 0.0);
    for (k, &ak) in ra.iter().enumerate() {
        let num: Complex<f64> = rb.iter().map(|&bl| ak - bl).product();
        let den: Complex<f64> = ak
            * ra.iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &aj)| ak - aj)
                .product::<Complex<f64>>();
        let pb: Complex<f64> = rb.iter().map(|&bl| one - ak * bl.conj()).product();
        let pa: Complex<f64> = ra.iter().map(|&aj| one - ak * aj.conj()).product();
        total += num / den * (pb / pa - one);
    }
    if total.im.abs() > 1e-8 * total.re.abs().max(1.0) {
        return Err(Error::numerical(format!(
            "root-form distance has imaginary residue {:e}",
            total.im
        )));
    }
    Ok((fa.noise_variance() * total.re).max(0.0))
}

/// Mismatch distance including intercepts:
/// `D0(A, B) + ((1 + sum psi_B) / (1 + sum psi_A) * psi_A0 - psi_B0)^2`.
///
/// The mean term is the squared bias of B's prediction under A's stationary
/// mean; it vanishes when A and B coincide.
pub fn distance_full(a: &ArFilter, b: &ArFilter) -> Result<f64> {
    let sa = a.one_plus_sum();
    if sa.abs() < 1e-14 {
        return Err(Error::invalid(
            "1 + sum(psi_A) vanishes: generating process has no stationary mean",
        ));
    }
    let d0 = distance_cov(a, b)?;
    let bias = b.one_plus_sum() / sa * a.intercept() - b.intercept();
    Ok(d0 + bias * bias)
}
