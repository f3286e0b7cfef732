use rand::Rng;

use super::{filter_from_gamma, least_squares_fit, Design, SwitchingArModel};
use crate::error::{Error, Result};
use crate::seeding::derived_rng;

const KMEANS_MAX_ITER: usize = 300;

/// Default sliding-window length `max(50, 5(L+1))`.
pub fn default_window(order: usize) -> usize {
    50.max(5 * (order + 1))
}

/// Least-squares fit of one window: `[psi_0, .., psi_L]` and residual variance.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowEstimate {
    pub gamma: Vec<f64>,
    pub variance: f64,
}

fn check_window(n: usize, order: usize, window: usize) -> Result<()> {
    if window > n {
        return Err(Error::invalid(format!(
            "window length {window} exceeds series length {n}"
        )));
    }
    if window < 5 * (order + 1) {
        return Err(Error::invalid(format!(
            "window length {window} is below 5(L+1) = {}",
            5 * (order + 1)
        )));
    }
    Ok(())
}

/// Least-squares estimates over every window `x(s..s+window)`.
pub fn window_estimates(
    series: &[f64],
    order: usize,
    window: usize,
) -> Result<Vec<WindowEstimate>> {
    check_window(series.len(), order, window)?;
    let design = Design::new(series, order)?;
    let rows = window - order;
    (0..=series.len() - window)
        .map(|s| {
            let (gamma, _) = design.weighted_fit(None, s..s + rows)?;
            let f = filter_from_gamma(&gamma, 1.0)?;
            let rss: f64 = (s..s + rows).map(|t| design.residual(t, &f).powi(2)).sum();
            Ok(WindowEstimate {
                gamma,
                variance: (rss / rows as f64).max(f64::MIN_POSITIVE),
            })
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(k, c)| (k, sq_dist(p, c)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
}

/// Lloyd's k-means with k-means++ seeding. Returns centers and assignment.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut R,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = 0;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    pick = i;
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[pick]));
        }
    }

    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (a, p) in assignment.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centers);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignment.iter().zip(points) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // empty cluster: move it to the worst-served point
                let far = (0..n)
                    .max_by(|&i, &j| {
                        sq_dist(&points[i], &centers[assignment[i]])
                            .total_cmp(&sq_dist(&points[j], &centers[assignment[j]]))
                    })
                    .expect("non-empty point set");
                centers[c] = points[far].clone();
                assignment[far] = c;
            }
        }
    }
    Ok((centers, assignment))
}

/// Initial models for `M = 1..=max_states` from window estimates.
///
/// `M = 1` is the global least-squares fit. Each larger `M` clusters the
/// window coefficient vectors into `M` groups and adds to the previous
/// filter set the cluster center with the largest summed distance to the
/// filters already chosen. Transitions and initial probabilities are
/// uniform.
pub fn init_split(
    series: &[f64],
    order: usize,
    max_states: usize,
    window: usize,
    seed: u64,
) -> Result<Vec<SwitchingArModel>> {
    if max_states == 0 {
        return Err(Error::invalid("at least one state is required"));
    }
    check_window(series.len(), order, window)?;
    let global = least_squares_fit(series, order)?;
    let uniform = |filters: Vec<crate::arcore::ArFilter>| {
        let m = filters.len();
        SwitchingArModel::new(
            filters,
            vec![vec![1.0 / m as f64; m]; m],
            vec![1.0 / m as f64; m],
        )
    };
    let mut models = vec![uniform(vec![global.clone()])?];
    if max_states == 1 {
        return Ok(models);
    }

    let estimates = window_estimates(series, order, window)?;
    let points: Vec<Vec<f64>> = estimates.iter().map(|e| e.gamma.clone()).collect();
    let mut chosen_gammas = vec![std::iter::once(global.intercept())
        .chain(global.coeffs().iter().copied())
        .collect::<Vec<f64>>()];
    let mut filters = vec![global];
    for m in 2..=max_states {
        let mut rng = derived_rng(seed, "init-kmeans", m as u64);
        let (centers, assignment) = kmeans(&points, m, &mut rng)?;
        let score = |c: &Vec<f64>| {
            chosen_gammas
                .iter()
                .map(|g| sq_dist(c, g).sqrt())
                .sum::<f64>()
        };
        let best = (0..m)
            .max_by(|&a, &b| score(&centers[a]).total_cmp(&score(&centers[b])))
            .expect("at least one cluster");
        let members: Vec<f64> = assignment
            .iter()
            .zip(&estimates)
            .filter(|(&a, _)| a == best)
            .map(|(_, e)| e.variance)
            .collect();
        let variance = if members.is_empty() {
            filters[0].noise_variance()
        } else {
            members.iter().sum::<f64>() / members.len() as f64
        };
        filters.push(filter_from_gamma(&centers[best], variance)?);
        chosen_gammas.push(centers[best].clone());
        models.push(uniform(filters.clone())?);
    }
    Ok(models)
}
