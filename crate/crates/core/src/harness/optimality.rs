//! Certification of the offline algorithm against the exhaustive oracle.

use rayon::prelude::*;
use serde::Serialize;

use super::{draw_instance, ORACLE_MAX_PERIOD};
use crate::error::{Error, Result};
use crate::offline::offline_duty_cycle;
use crate::oracle::{brute_force_matching, ORACLE_MAX_VERTEXES};
use crate::params::Efficiency;
use crate::state_graph::{build_graph, StateGraph};

const KEPT_MISMATCHES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    /// `(sync, async)` edge counts.
    pub offline: (usize, usize),
    pub oracle: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimalityReport {
    pub label: String,
    pub instances: usize,
    pub agreements: usize,
    /// The first few disagreements, in enumeration order.
    pub mismatches: Vec<Mismatch>,
}

impl OptimalityReport {
    pub fn passed(&self) -> bool {
        self.agreements == self.instances
    }
}

fn compare(graph: &StateGraph) -> Result<Option<Mismatch>> {
    let off = offline_duty_cycle(graph);
    let best = brute_force_matching(graph)?;
    let offline = (off.sync_count, off.async_count);
    let oracle = (best.best_sync_count, best.best_async_count);
    Ok((offline != oracle).then(|| Mismatch { set_a: graph.set_a.clone(), set_b: graph.set_b.clone(), offline, oracle }))
}

fn collect(label: String, outcomes: Vec<Option<Mismatch>>) -> OptimalityReport {
    let instances = outcomes.len();
    let mismatches: Vec<Mismatch> = outcomes.into_iter().flatten().collect();
    OptimalityReport {
        label,
        instances,
        agreements: instances - mismatches.len(),
        mismatches: mismatches.into_iter().take(KEPT_MISMATCHES).collect(),
    }
}

/// Every pair of harvest patterns for every period length `1..=max_period`.
pub fn exhaustive_optimality(max_period: usize, eta: Efficiency) -> Result<OptimalityReport> {
    if max_period == 0 || max_period > ORACLE_MAX_VERTEXES {
        return Err(Error::parameter("max_period", format!("must lie in 1..={ORACLE_MAX_VERTEXES}")));
    }
    let jobs: Vec<(usize, u32)> = (1..=max_period).flat_map(|len| (0..1u32 << len).map(move |a| (len, a))).collect();
    let outcomes: Vec<Vec<Option<Mismatch>>> = jobs
        .into_par_iter()
        .map(|(len, mask_a)| {
            let slots = |mask: u32| (0..len).filter(|k| mask & (1 << k) != 0).map(|k| k + 1).collect::<Vec<_>>();
            (0..1u32 << len)
                .map(|mask_b| compare(&StateGraph::from_sets(slots(mask_a), slots(mask_b), eta, len)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(collect(format!("exhaustive |T|<={max_period}"), outcomes.into_iter().flatten().collect()))
}

/// `instances` random pairs at `period_len`, cycling through `p_values`.
/// Instance `i` is drawn from seed `seed + i`, redrawn until it fits the
/// oracle budget.
pub fn random_optimality(
    period_len: usize,
    p_values: &[f64],
    instances: usize,
    eta: Efficiency,
    seed: u64,
) -> Result<OptimalityReport> {
    if period_len > ORACLE_MAX_PERIOD {
        return Err(Error::OracleBudget { a: period_len, b: period_len, limit: ORACLE_MAX_VERTEXES });
    }
    if p_values.is_empty() {
        return Err(Error::parameter("p_values", "needs at least one probability"));
    }
    let outcomes = (0..instances)
        .into_par_iter()
        .map(|i| {
            let p = p_values[i % p_values.len()];
            let (u, v) = draw_instance(p, p, period_len, seed.wrapping_add(i as u64), true)?;
            compare(&build_graph(&u, &v, eta)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(format!("random |T|={period_len}"), outcomes))
}
