//! Heterogeneous-pair sweep: how the online/offline ratio and CAT move with
//! the weaker device's harvest probability and with access heterogeneity.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::Stat;
use crate::energy_model::generate_pair;
use crate::error::{Error, Result};
use crate::metrics::compute_heterogeneity;
use crate::offline::offline_duty_cycle;
use crate::online::{online_duty_cycle, Activation, OnlineConfig, OnlineMode};
use crate::params::{Efficiency, Probability};
use crate::state_graph::build_graph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub period_len: usize,
    /// Probability grid; every ordered pair of distinct values is a point.
    pub grid: Vec<f64>,
    pub eta: Efficiency,
    pub trials: usize,
    pub seed: u64,
    pub mode: OnlineMode,
    /// Width of the heterogeneity bins.
    pub bin_width: f64,
}

impl SweepSpec {
    /// The grid `0.2, 0.3, ..., 1.0`.
    pub fn default_grid() -> Vec<f64> {
        (2..=10).map(|k| k as f64 / 10.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p_u: f64,
    pub p_v: f64,
    /// Mean over trials.
    pub heterogeneity: f64,
    pub offline_cat: Stat,
    pub online_cat: Stat,
    pub ratio: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepBin {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Mean of the member points' mean CAT.
    pub offline_cat: f64,
    pub online_cat: f64,
    /// Ratio of the two means above.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
    /// One bin per grid value of `min(p_u, p_v)`.
    pub by_min_prob: Vec<SweepBin>,
    pub by_heterogeneity: Vec<SweepBin>,
    pub ratio_rises_with_min_prob: bool,
    pub cat_falls_with_heterogeneity: bool,
}

fn run_point(spec: &SweepSpec, p_u: f64, p_v: f64) -> Result<SweepPoint> {
    let activation = Activation::Fixed { u: Probability::new(p_u)?, v: Probability::new(p_v)? };
    let samples = (0..spec.trials as u64)
        .map(|i| {
            let seed = spec.seed.wrapping_add(i);
            let (u, v) = generate_pair(p_u, p_v, spec.period_len, seed)?;
            let off = offline_duty_cycle(&build_graph(&u, &v, spec.eta)?);
            let cfg = OnlineConfig { activation, eta: spec.eta, seed, mode: spec.mode };
            let on = online_duty_cycle(&u, &v, &cfg)?;
            Ok((off.cat_total, on.cat_total, compute_heterogeneity(&u, &v)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let off: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let on: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let het: Vec<f64> = samples.iter().map(|s| s.2).collect();
    Ok(SweepPoint {
        p_u,
        p_v,
        heterogeneity: Stat::from_samples(&het).mean,
        offline_cat: Stat::from_samples(&off),
        online_cat: Stat::from_samples(&on),
        ratio: Stat::ratio_of_means(&on, &off),
    })
}

fn bin(lo: f64, hi: f64, members: &[&SweepPoint]) -> SweepBin {
    let mean = |f: &dyn Fn(&SweepPoint) -> f64| members.iter().map(|p| f(p)).sum::<f64>() / members.len() as f64;
    let offline_cat = mean(&|p| p.offline_cat.mean);
    let online_cat = mean(&|p| p.online_cat.mean);
    SweepBin { lo, hi, points: members.len(), offline_cat, online_cat, ratio: crate::metrics::cat_ratio(online_cat, offline_cat) }
}

/// Runs every ordered pair of distinct grid probabilities and bins the
/// outcomes by `min(p_u, p_v)` and by heterogeneity.
pub fn heterogeneity_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    if spec.trials == 0 {
        return Err(Error::parameter("trials", "must be at least 1"));
    }
    if spec.period_len == 0 {
        return Err(Error::parameter("period_len", "must be at least 1"));
    }
    if !(spec.bin_width > 0.0 && spec.bin_width <= 1.0) {
        return Err(Error::parameter("bin_width", "must lie in (0, 1]"));
    }
    let mut grid = spec.grid.clone();
    for &p in &grid {
        Probability::new(p)?;
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < 2 {
        return Err(Error::parameter("grid", "needs at least two distinct probabilities"));
    }

    let pairs: Vec<(f64, f64)> =
        grid.iter().flat_map(|&a| grid.iter().filter(move |&&b| b != a).map(move |&b| (a, b))).collect();
    let points = pairs.into_par_iter().map(|(a, b)| run_point(spec, a, b)).collect::<Result<Vec<_>>>()?;

    let by_min_prob: Vec<SweepBin> = grid[..grid.len() - 1]
        .iter()
        .map(|&g| {
            let members: Vec<&SweepPoint> = points.iter().filter(|p| p.p_u.min(p.p_v) == g).collect();
            bin(g, g, &members)
        })
        .collect();

    let n_bins = (1.0 / spec.bin_width).ceil() as usize;
    let by_heterogeneity: Vec<SweepBin> = (0..n_bins)
        .filter_map(|k| {
            let (lo, hi) = (k as f64 * spec.bin_width, ((k + 1) as f64 * spec.bin_width).min(1.0));
            let last = k + 1 == n_bins;
            let members: Vec<&SweepPoint> =
                points.iter().filter(|p| p.heterogeneity >= lo && (p.heterogeneity < hi || last)).collect();
            (!members.is_empty()).then(|| bin(lo, hi, &members))
        })
        .collect();

    let ratio_rises_with_min_prob = by_min_prob.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let cat_falls_with_heterogeneity = by_heterogeneity.windows(2).all(|w| w[1].offline_cat < w[0].offline_cat);
    Ok(SweepReport {
        spec: spec.clone(),
        points,
        by_min_prob,
        by_heterogeneity,
        ratio_rises_with_min_prob,
        cat_falls_with_heterogeneity,
    })
}
