use rand::Rng;

use super::DistanceMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    /// Medoid indices, one per cluster.
    pub centers: Vec<usize>,
    /// Cluster index (position in `centers`) of every point.
    pub assignment: Vec<usize>,
    /// Within-cluster sum of distances `sum_u D(center(u), u)`.
    pub wcsd: f64,
}

impl Clustering {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m == cluster)
            .map(|(u, _)| u)
            .collect()
    }
}

/// Assign every point to the center minimising `D(center, point)`, ties to
/// the lowest cluster index.
pub fn wcsd_of(dm: &DistanceMatrix, centers: &[usize]) -> Clustering {
    let n = dm.len();
    let mut assignment = vec![0usize; n];
    let mut wcsd = 0.0;
    for (u, slot) in assignment.iter_mut().enumerate() {
        let mut best = (0usize, dm.get(centers[0], u));
        for (m, &c) in centers.iter().enumerate().skip(1) {
            let d = dm.get(c, u);
            if d < best.1 {
                best = (m, d);
            }
        }
        *slot = best.0;
        wcsd += best.1;
    }
    Clustering {
        centers: centers.to_vec(),
        assignment,
        wcsd,
    }
}

/// Nearest distance to any center other than `skip`, for every point.
fn distance_excluding(dm: &DistanceMatrix, centers: &[usize], skip: usize) -> Vec<f64> {
    (0..dm.len())
        .map(|u| {
            centers
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != skip)
                .map(|(_, &c)| dm.get(c, u))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn validate(dm: &DistanceMatrix, init: &[usize], delta: f64) -> Result<()> {
    let n = dm.len();
    if init.is_empty() || init.len() > n {
        return Err(Error::invalid(format!(
            "need between 1 and {n} centers, got {}",
            init.len()
        )));
    }
    if let Some(&bad) = init.iter().find(|&&c| c >= n) {
        return Err(Error::invalid(format!("center index {bad} out of range")));
    }
    let mut sorted = init.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("initial centers must be distinct"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// Swap-search k-medoids.
///
/// For each cluster in turn, every member is tried as that cluster's new
/// center with the other centers fixed; all points are reassigned to their
/// nearest candidate center and the swap is kept when the WCSD strictly
/// drops, after which the (updated) cluster's member list is scanned again
/// from the start. Passes over all clusters repeat while the relative
/// improvement of a pass exceeds `delta`.
pub fn k_medoids(dm: &DistanceMatrix, init: &[usize], delta: f64) -> Result<Clustering> {
    validate(dm, init, delta)?;
    let n = dm.len();
    let mut current = wcsd_of(dm, init);
    let mut w_prev = 2.0 * current.wcsd / (1.0 - delta);
    while w_prev - current.wcsd > delta * w_prev {
        w_prev = current.wcsd;
        for m in 0..current.centers.len() {
            let mut excl = distance_excluding(dm, &current.centers, m);
            let mut members = current.members(m);
            let mut k = 0;
            while k < members.len() {
                let cand = members[k];
                if cand == current.centers[m] {
                    k += 1;
                    continue;
                }
                let row = dm.row(cand);
                let mut w_hat = 0.0;
                for u in 0..n {
                    w_hat += row[u].min(excl[u]);
                }
                if w_hat < current.wcsd {
                    let mut centers = current.centers.clone();
                    centers[m] = cand;
                    current = wcsd_of(dm, &centers);
                    debug_assert_eq!(current.wcsd, w_hat);
                    excl = distance_excluding(dm, &current.centers, m);
                    members = current.members(m);
                    k = 0;
                } else {
                    k += 1;
                }
            }
        }
    }
    Ok(current)
}

/// Seeding: first center uniform, each further center drawn with probability
/// proportional to its distance from the nearest chosen center.
pub fn kmedoids_plus_plus<R: Rng + ?Sized>(
    dm: &DistanceMatrix,
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = dm.len();
    if count == 0 || count > n {
        return Err(Error::invalid(format!(
            "need between 1 and {n} centers, got {count}"
        )));
    }
    let mut centers = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = dm.row(centers[0]).to_vec();
    while centers.len() < count {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (u, &d) in nearest.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(u);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|u| !centers.contains(u)).collect();
            free[rng.random_range(0..free.len())]
        };
        centers.push(next);
        for (u, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dm.get(next, u));
        }
        nearest[next] = 0.0;
    }
    Ok(centers)
}

/// Greedy seeding: each new center is the point that lowers the WCSD most
/// given the centers already chosen, so the first one is the best single
/// medoid.
pub fn greedy_build(dm: &DistanceMatrix, count: usize) -> Result<Vec<usize>> {
    let n = dm.len();
    if count == 0 || count > n {
        return Err(Error::invalid(format!(
            "need between 1 and {n} centers, got {count}"
        )));
    }
    let mut centers = Vec::with_capacity(count);
    let mut nearest = vec![f64::INFINITY; n];
    while centers.len() < count {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..n).filter(|c| !centers.contains(c)) {
            let row = dm.row(c);
            let w: f64 = nearest.iter().zip(row).map(|(a, b)| a.min(*b)).sum();
            if best.is_none_or(|(_, bw)| w < bw) {
                best = Some((c, w));
            }
        }
        let (c, _) = best.expect("a free point remains");
        for (d, &r) in nearest.iter_mut().zip(dm.row(c)) {
            *d = d.min(r);
        }
        centers.push(c);
    }
    Ok(centers)
}

/// Extra k-medoids++ starts tried next to the greedy one.
pub const DEFAULT_RESTARTS: usize = 3;

/// Runs the swap search from every start and keeps the lowest WCSD, the
/// earliest start winning ties.
pub fn best_of(dm: &DistanceMatrix, starts: &[Vec<usize>], delta: f64) -> Result<Clustering> {
    let mut best: Option<Clustering> = None;
    for init in starts {
        let c = k_medoids(dm, init, delta)?;
        if best.as_ref().is_none_or(|b| c.wcsd < b.wcsd) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::invalid("no starting configuration given"))
}

/// Swap search from the greedy start and `restarts` k-medoids++ starts.
pub fn cluster<R: Rng + ?Sized>(
    dm: &DistanceMatrix,
    count: usize,
    restarts: usize,
    delta: f64,
    rng: &mut R,
) -> Result<Clustering> {
    let mut starts = vec![greedy_build(dm, count)?];
    for _ in 0..restarts {
        starts.push(kmedoids_plus_plus(dm, count, rng)?);
    }
    best_of(dm, &starts, delta)
}
