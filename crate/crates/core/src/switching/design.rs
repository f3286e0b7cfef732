use nalgebra::{DMatrix, DVector};

use crate::arcore::ArFilter;
use crate::error::{Error, Result};

/// Regression layout of a series for an order-`L` model: row `t` holds the
/// target `x(L + t)` and the regressor `[1, x(L+t-1), .., x(t)]`.
#[derive(Clone, Debug)]
pub struct Design {
    order: usize,
    targets: Vec<f64>,
    regressors: Vec<f64>,
}

impl Design {
    pub fn new(series: &[f64], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order must be at least 1"));
        }
        if series.len() <= order {
            return Err(Error::invalid(format!(
                "series of length {} is too short for order {order}",
                series.len()
            )));
        }
        if let Some(i) = series.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("series value {i} is not finite")));
        }
        let rows = series.len() - order;
        let dim = order + 1;
        let mut regressors = Vec::with_capacity(rows * dim);
        for t in order..series.len() {
            regressors.push(1.0);
            regressors.extend((1..=order).map(|l| series[t - l]));
        }
        Ok(Self {
            order,
            targets: series[order..].to_vec(),
            regressors,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn target(&self, t: usize) -> f64 {
        self.targets[t]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn regressor(&self, t: usize) -> &[f64] {
        let d = self.dim();
        &self.regressors[t * d..(t + 1) * d]
    }

    /// Prediction residual `x + gamma^T x~` of `filter` at row `t`.
    #[inline]
    pub fn residual(&self, t: usize, filter: &ArFilter) -> f64 {
        let r = self.regressor(t);
        let mut e = self.targets[t] + filter.intercept();
        for (c, x) in filter.coeffs().iter().zip(&r[1..]) {
            e += c * x;
        }
        e
    }

    /// Weighted least squares of targets on regressors over `rows`.
    /// Returns `(gamma, ridge_used)` with `gamma = -beta` in filter sign.
    pub fn weighted_fit(
        &self,
        weights: Option<&[f64]>,
        rows: std::ops::Range<usize>,
    ) -> Result<(Vec<f64>, bool)> {
        let d = self.dim();
        let mut gram = DMatrix::<f64>::zeros(d, d);
        let mut rhs = DVector::<f64>::zeros(d);
        for t in rows {
            let w = weights.map_or(1.0, |w| w[t]);
            if w == 0.0 {
                continue;
            }
            let r = self.regressor(t);
            let y = self.targets[t];
            for i in 0..d {
                rhs[i] += w * r[i] * y;
                for j in 0..=i {
                    gram[(i, j)] += w * r[i] * r[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                gram[(j, i)] = gram[(i, j)];
            }
        }
        solve_normal_equations(gram, rhs)
            .map(|(beta, ridge)| (beta.iter().map(|b| -b).collect(), ridge))
    }
}

/// Cholesky solve, retrying once with ridge `1e-8 * trace / d` on failure.
pub(crate) fn solve_normal_equations(
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
) -> Result<(DVector<f64>, bool)> {
    if let Some(ch) = gram.clone().cholesky() {
        let sol = ch.solve(&rhs);
        if sol.iter().all(|v| v.is_finite()) {
            return Ok((sol, false));
        }
    }
    let d = gram.nrows();
    let lambda = 1e-8 * gram.trace() / d as f64;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::numerical("weighted Gram matrix is zero"));
    }
    let ridged = gram + DMatrix::<f64>::identity(d, d) * lambda;
    let ch = ridged
        .cholesky()
        .ok_or_else(|| Error::numerical("weighted Gram matrix is singular even with ridge"))?;
    let sol = ch.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite least-squares solution"));
    }
    Ok((sol, true))
}

/// Ordinary least-squares AR(L) fit with intercept over the whole series;
/// the noise variance is the mean squared residual.
pub fn least_squares_fit(series: &[f64], order: usize) -> Result<ArFilter> {
    let design = Design::new(series, order)?;
    if design.len() < design.dim() {
        return Err(Error::invalid(
            "not enough observations for a least-squares fit",
        ));
    }
    let (gamma, _) = design.weighted_fit(None, 0..design.len())?;
    let mut f = super::filter_from_gamma(&gamma, 1.0)?;
    let rss: f64 = (0..design.len())
        .map(|t| design.residual(t, &f).powi(2))
        .sum();
    f.set_noise_variance((rss / design.len() as f64).max(f64::MIN_POSITIVE));
    Ok(f)
}
