use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    best_of, build_distance_matrix, cluster, greedy_build, kmedoids_plus_plus, Clustering,
    DistanceMatrix, DEFAULT_RESTARTS,
};
use crate::error::{Error, Result};
use crate::sampler::sample_batch;
use crate::seeding::{derive_seed, derived_rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceParams {
    pub order: usize,
    pub radius: f64,
    pub max_states: usize,
    /// Filters per batch (`F`).
    pub count: usize,
    /// Independent batches averaged (`Iter`).
    pub iterations: usize,
    pub delta: f64,
    pub seed: u64,
}

impl ReferenceParams {
    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::invalid("order must be at least 1"));
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(Error::invalid(format!(
                "radius must lie in (0, 1], got {}",
                self.radius
            )));
        }
        if self.max_states == 0 || self.max_states > self.count {
            return Err(Error::invalid(format!(
                "state count must lie in 1..={}, got {}",
                self.count, self.max_states
            )));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("at least one batch is required"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Next warm-start center: the point farthest from its current center,
/// falling back to the lowest-index non-center when every distance is zero.
fn farthest_point(dm: &DistanceMatrix, c: &Clustering) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for u in 0..dm.len() {
        let d = dm.get(c.centers[c.assignment[u]], u);
        if d > 0.0 && best.is_none_or(|(_, bd)| d > bd) {
            best = Some((u, d));
        }
    }
    match best {
        Some((u, _)) => u,
        None => (0..dm.len())
            .find(|u| !c.centers.contains(u))
            .expect("fewer centers than points"),
    }
}

/// WCSD / F for M = 1..=max_states on one batch. Each M keeps the best of
/// the warm start (the (M-1)-solution plus its farthest point), the greedy
/// start and a few k-medoids++ starts.
fn batch_curve(p: &ReferenceParams, index: usize) -> Result<Vec<f64>> {
    let batch = sample_batch(
        p.order,
        p.radius,
        p.count,
        derive_seed(p.seed, "reference-batch", index as u64),
    )?;
    let dm = build_distance_matrix(&batch.filters)?;
    let mut rng = derived_rng(p.seed, "reference-init", index as u64);
    let mut clustering = cluster(&dm, 1, DEFAULT_RESTARTS, p.delta, &mut rng)?;
    let f = p.count as f64;
    let mut curve = vec![clustering.wcsd / f];
    for m in 2..=p.max_states {
        // The warm start alone already guarantees W_M <= W_{M-1}.
        let mut warm = clustering.centers.clone();
        warm.push(farthest_point(&dm, &clustering));
        let mut starts = vec![warm, greedy_build(&dm, m)?];
        for _ in 0..DEFAULT_RESTARTS {
            starts.push(kmedoids_plus_plus(&dm, m, &mut rng)?);
        }
        clustering = best_of(&dm, &starts, p.delta)?;
        curve.push(clustering.wcsd / f);
    }
    Ok(curve)
}

/// Reference values `W_1..W_max_states`: the mean over independent batches of
/// WCSD / F, plus one.
pub fn reference_curve(p: &ReferenceParams) -> Result<Vec<f64>> {
    p.validate()?;
    let per_batch: Vec<Vec<f64>> = (0..p.iterations)
        .into_par_iter()
        .map(|i| batch_curve(p, i))
        .collect::<Result<_>>()?;
    let iters = p.iterations as f64;
    Ok((0..p.max_states)
        .map(|m| per_batch.iter().map(|c| c[m]).sum::<f64>() / iters + 1.0)
        .collect())
}

/// Single reference value `W_M` (computed along the warm-start chain).
pub fn reference_point(
    order: usize,
    radius: f64,
    states: usize,
    count: usize,
    iterations: usize,
    delta: f64,
    seed: u64,
) -> Result<f64> {
    let curve = reference_curve(&ReferenceParams {
        order,
        radius,
        max_states: states,
        count,
        iterations,
        delta,
        seed,
    })?;
    Ok(*curve.last().expect("non-empty curve"))
}
