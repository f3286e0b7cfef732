use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SwitchingArModel;
use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub series: Vec<f64>,
    pub states: Vec<usize>,
}

fn categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Draw `n` values and their hidden states. `history` holds the `L` values
/// preceding the output, most recent last; an empty slice means zeros.
pub fn simulate(
    model: &SwitchingArModel,
    n: usize,
    history: &[f64],
    seed: u64,
) -> Result<Simulation> {
    let l = model.order();
    let mut buf: Vec<f64> = match history.len() {
        0 => vec![0.0; l],
        len if len == l => history.to_vec(),
        len => {
            return Err(Error::invalid(format!(
                "conditioning history has {len} values, expected {l}"
            )))
        }
    };
    let mut rng = rng_from_seed(seed);
    let mut states: Vec<usize> = Vec::with_capacity(n);
    buf.reserve(n);
    let mut recent = vec![0.0; l];
    for t in 0..n {
        let s = match states.last() {
            None => categorical(model.initial(), &mut rng),
            Some(&prev) => categorical(&model.transition()[prev], &mut rng),
        };
        let k = buf.len();
        for (j, slot) in recent.iter_mut().enumerate() {
            *slot = buf[k - 1 - j];
        }
        let f = model.filter(s);
        let eps: f64 = StandardNormal.sample(&mut rng);
        let x = f.predict(&recent) + f.noise_variance().sqrt() * eps;
        if !x.is_finite() {
            return Err(Error::numerical(format!(
                "simulated value {t} is not finite"
            )));
        }
        buf.push(x);
        states.push(s);
    }
    Ok(Simulation {
        series: buf.split_off(l),
        states,
    })
}
