//! Root-free evaluation of the zero-mean mismatch distance.
//!
//! With `p_A(z) = z^L (1 + Psi_A(z))`, `p'_A = d(z p_A)/dz` and
//! `g = p'_A * rev(p_A)`, the root form of the distance is
//! `sum_k p_B rev(p_B) / g (a_k) - sum_k p_B / p'_A (a_k)`. Each sum of a
//! rational function over the roots of `p_A` is rewritten as
//!
//! ```text
//! sum_k f(a_k) / h(a_k) = [ Po(p_A, f) S(u_1..u_{L-1}; 0)
//!                           - Po(p_A, f h S(u_1..u_{L-2}; h)) ] / Res(p_A, h)
//! ```
//!
//! where `Po(p, q) = sum_k q(a_k)` comes from Newton power sums of `p`'s
//! coefficients, `u_i = Po(p_A, h^i)`, `Res` is the Sylvester determinant and
//! `S(s; t)` is the Newton-Girard determinant giving the elementary symmetric
//! polynomial of the values `h(a_j)` with one value `t` removed. Nothing here
//! touches a root.

use num_traits::Float;
use twofloat::TwoFloat;

use super::ArFilter;
use crate::error::{Error, Result};
use crate::poly::{resultant, resultant_bound, root_power_sums, sum_over_roots, Poly};

/// Highest order accepted by [`distance_resultant`].
pub const MAX_RESULTANT_ORDER: usize = 6;

struct RootSums<T> {
    p: Poly<T>,
    sums: Vec<T>,
}

impl<T: Float> RootSums<T> {
    fn new(p: Poly<T>) -> Self {
        let sums = root_power_sums(&p, p.nominal_degree());
        Self { p, sums }
    }

    /// `Po(p, q)`.
    fn po(&mut self, q: &Poly<T>) -> T {
        if q.nominal_degree() >= self.sums.len() {
            self.sums = root_power_sums(&self.p, q.nominal_degree());
        }
        sum_over_roots(&self.sums, q)
    }
}

/// `S([s_1..s_h], t)`: `det(H) / h!` for the lower Hessenberg matrix with
/// `H[i][j] = s_{i-j+1} - t^{i-j+1}` on and below the diagonal and
/// `H[i][i+1] = i`. Entries are polynomials in `z` through `t`.
fn newton_girard<T: Float>(s: &[T], t: &Poly<T>) -> Poly<T> {
    let h = s.len();
    if h == 0 {
        return Poly::constant(T::one());
    }
    let int = |k: usize| T::from(k).expect("small integer");
    let t_pow: Vec<Poly<T>> = (0..=h).map(|i| t.pow(i)).collect();
    let entry = |i: usize, j: usize| -> Poly<T> {
        // 1-based i >= j
        let d = i - j + 1;
        &Poly::constant(s[d - 1]) - &t_pow[d]
    };
    // det of leading k x k block, expanded along its last row
    let mut dets: Vec<Poly<T>> = vec![Poly::constant(T::one())];
    for k in 1..=h {
        let mut acc = Poly::zero();
        for j in 1..=k {
            let superdiag = (j..k).fold(T::one(), |p, i| p * int(i));
            let sign = if (k + j) % 2 == 0 { T::one() } else { -T::one() };
            let term = &entry(k, j) * &dets[j - 1];
            acc = &acc + &term.scale(sign * superdiag);
        }
        dets.push(acc);
    }
    let factorial = (1..=h).fold(T::one(), |p, i| p * int(i));
    dets[h].scale(factorial.recip())
}

/// `sum_k f(a_k) / h(a_k)` over the roots of `p_A`.
fn rational_root_sum<T: Float>(roots: &mut RootSums<T>, f: &Poly<T>, h: &Poly<T>, l: usize) -> Result<T> {
    let u: Vec<T> = (1..l).map(|i| roots.po(&h.pow(i))).collect();
    let full = newton_girard(&u, &Poly::zero());
    debug_assert_eq!(full.degree(), 0);
    let lead = roots.po(f) * full.coeffs()[0];
    let correction = if l >= 2 {
        let partial = newton_girard(&u[..l - 2], h);
        roots.po(&(&(f * h) * &partial))
    } else {
        T::zero()
    };
    let res = resultant(&roots.p, h);
    let tiny = T::from(1e-28).expect("constant");
    if !res.is_finite() || res.abs() <= tiny * resultant_bound(&roots.p, h) {
        return Err(Error::DegenerateRoots(
            "resultant vanishes: roots of the generating filter are zero or repeated".into(),
        ));
    }
    Ok((lead - correction) / res)
}

/// Zero-mean mismatch distance computed from the coefficients alone.
///
/// Runs in double-double arithmetic: the Newton-Girard sums and the
/// Sylvester determinant cancel heavily when a root of the generating filter
/// sits near zero or near the unit circle, and plain `f64` then loses the
/// 1e-6 agreement with the covariance form.
pub fn distance_resultant(a: &ArFilter, b: &ArFilter) -> Result<f64> {
    let l = a.order().max(b.order());
    if l > MAX_RESULTANT_ORDER {
        return Err(Error::UnsupportedOrder(l));
    }
    if a.intercept() != 0.0 || b.intercept() != 0.0 {
        return Err(Error::invalid(
            "the resultant form is defined for zero intercepts",
        ));
    }
    let fa = a.padded_filter(l);
    if !fa.is_stable(1.0)? {
        return Err(Error::invalid("generating filter must be stable"));
    }
    let monic = |c: &[f64]| {
        let mut desc = vec![TwoFloat::from(1.0)];
        desc.extend(c.iter().map(|&v| TwoFloat::from(v)));
        Poly::from_descending(&desc)
    };
    let pa = monic(fa.coeffs());
    let pb = monic(&b.padded(l));
    let dpa = pa.shift().derivative();
    let g = &dpa * &pa.reciprocal();
    let mut roots = RootSums::new(pa);

    let first = rational_root_sum(&mut roots, &(&pb * &pb.reciprocal()), &g, l)?;
    let second = rational_root_sum(&mut roots, &pb, &dpa, l)?;
    let d = f64::from(first - second);
    Ok((fa.noise_variance() * d).max(0.0))
}
