//! k-medoids clustering of filters under the mismatch distance, and the
//! reference curve `W_M` built from it.

mod cache;
mod kmedoids;
mod reference;

use rayon::prelude::*;

use crate::arcore::{stationary_moments, ArFilter};
use crate::error::{Error, Result};

pub use cache::{CurveKey, ReferenceCache, ReferenceCurveFile, REFERENCE_FORMAT_VERSION};
pub use kmedoids::{
    best_of, cluster, greedy_build, k_medoids, kmedoids_plus_plus, wcsd_of, Clustering,
    DEFAULT_DELTA, DEFAULT_RESTARTS,
};
pub use reference::{reference_curve, reference_point, ReferenceParams};

/// Square matrix of mismatch distances, `get(u, v) = D(filter_u, filter_v)`
/// with `u` the generating (row) filter and `v` the predicting one.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (u, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "row {u} has length {}, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                return Err(Error::invalid(format!(
                    "row {u} has a negative or non-finite entry"
                )));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }
}

/// Pairwise covariance-form distances. Row moments are computed once per
/// generating filter.
pub fn build_distance_matrix(filters: &[ArFilter]) -> Result<DistanceMatrix> {
    let n = filters.len();
    let order = filters.iter().map(ArFilter::order).max().unwrap_or(0);
    let padded: Vec<Vec<f64>> = filters.iter().map(|f| f.padded(order)).collect();
    let rows: Vec<Vec<f64>> = filters
        .par_iter()
        .enumerate()
        .map(|(u, fu)| {
            let moments = stationary_moments(&fu.padded_filter(order)).map_err(|e| match e {
                Error::InvalidInput(m) => Error::invalid(format!("filter {u}: {m}")),
                Error::NumericalFailure(m) => Error::numerical(format!("filter {u}: {m}")),
                other => other,
            })?;
            Ok((0..n)
                .map(|v| {
                    if u == v {
                        0.0
                    } else {
                        crate::arcore::distance_with_moments(&moments, &padded[u], &padded[v])
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(DistanceMatrix {
        n,
        data: rows.into_iter().flatten().collect(),
    })
}
