//! Balls-in-bins occupancy against the concentration bound used in the
//! approximation analysis of the online algorithm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::Stat;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinsSpec {
    /// Balls thrown per trial (`n`).
    pub balls: usize,
    /// Total bins (`m`).
    pub bins: usize,
    /// Size of the watched subset `A`; bins `0..subset` form it.
    pub subset: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinsReport {
    pub spec: BinsSpec,
    /// `|A| (1 - e^{-n/m}) - epsilon m`.
    pub threshold: f64,
    /// `1 - 2 e^{-epsilon^2 m / 2}`.
    pub prob_bound: f64,
    /// Fraction of trials with `S >= threshold`.
    pub event_freq: f64,
    pub occupied: Stat,
    /// `|A| (1 - (1 - 1/m)^n)`.
    pub exact_mean: f64,
    pub bound_holds: bool,
}

/// Throws `n` balls uniformly into `m` bins per trial and counts occupied
/// bins of the subset `A`.
pub fn check_balls_in_bins(spec: &BinsSpec) -> Result<BinsReport> {
    let BinsSpec { balls: n, bins: m, subset, epsilon, trials, seed } = *spec;
    if m == 0 {
        return Err(Error::parameter("bins", "must be at least 1"));
    }
    if n > m {
        return Err(Error::parameter("balls", format!("{n} balls exceed {m} bins")));
    }
    if subset > m {
        return Err(Error::parameter("subset", format!("{subset} exceeds {m} bins")));
    }
    if trials == 0 {
        return Err(Error::parameter("trials", "must be at least 1"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::parameter("epsilon", "must be positive"));
    }

    let (nf, mf) = (n as f64, m as f64);
    let threshold = subset as f64 * (1.0 - (-nf / mf).exp()) - epsilon * mf;
    let prob_bound = 1.0 - 2.0 * (-epsilon * epsilon * mf / 2.0).exp();
    let exact_mean = subset as f64 * (1.0 - (1.0 - 1.0 / mf).powf(nf));

    let mut hit = vec![false; subset];
    let mut counts = Vec::with_capacity(trials);
    let mut events = 0usize;
    for trial in 0..trials as u64 {
        let mut rng = rng::stream(seed.wrapping_add(trial), rng::BINS_DOMAIN, "balls");
        hit.iter_mut().for_each(|h| *h = false);
        let mut occupied = 0usize;
        for _ in 0..n {
            let bin = rng.random_range(0..m);
            if bin < subset && !std::mem::replace(&mut hit[bin], true) {
                occupied += 1;
            }
        }
        events += usize::from(occupied as f64 >= threshold);
        counts.push(occupied as f64);
    }
    let event_freq = events as f64 / trials as f64;
    Ok(BinsReport {
        spec: *spec,
        threshold,
        prob_bound,
        event_freq,
        occupied: Stat::from_samples(&counts),
        exact_mean,
        bound_holds: event_freq >= prob_bound,
    })
}
