//! Per-pair metrics: common and synchronous active time, their share of the
//! period, heterogeneity of harvest access, and online/offline ratios.

use std::io::Write;

use serde::Serialize;

use crate::energy_model::{estimate_prob, EnergyTrace};
use crate::error::{Error, Result};
use crate::offline::OfflineResult;
use crate::online::OnlineResult;
use crate::state_graph::Schedule;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMetrics {
    pub pair_id: String,
    pub cat: f64,
    pub sat: f64,
    pub cat_pct: f64,
    pub sat_pct: f64,
    pub heterogeneity: f64,
    pub p_hat_u: f64,
    pub p_hat_v: f64,
}

impl PairMetrics {
    pub fn new(pair_id: impl Into<String>, cat: f64, sat: f64, trace_u: &EnergyTrace, trace_v: &EnergyTrace) -> Result<Self> {
        let len = trace_u.period_len() as f64;
        Ok(PairMetrics {
            pair_id: pair_id.into(),
            cat,
            sat,
            cat_pct: cat / len,
            sat_pct: sat / len,
            heterogeneity: compute_heterogeneity(trace_u, trace_v)?,
            p_hat_u: estimate_prob(trace_u),
            p_hat_v: estimate_prob(trace_v),
        })
    }
}

pub const PAIR_METRICS_CSV_HEADER: &str = "pair_id,cat,sat,cat_pct,sat_pct,heterogeneity,p_hat_u,p_hat_v";

pub fn write_pair_metrics_csv<W: Write>(out: W, rows: &[PairMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(PAIR_METRICS_CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

/// Sum of per-slot common active time.
pub fn compute_cat(schedule: &Schedule) -> f64 {
    schedule.cat.iter().fold(0.0, |acc, c| acc + c)
}

/// Jaccard complement of the two harvest-slot sets: `0` for identical
/// access, `1` for fully disjoint access, `0` when neither device harvests.
pub fn compute_heterogeneity(trace_u: &EnergyTrace, trace_v: &EnergyTrace) -> Result<f64> {
    if trace_u.period_len() != trace_v.period_len() {
        return Err(Error::PeriodMismatch { left: trace_u.period_len(), right: trace_v.period_len() });
    }
    let (mut both, mut either) = (0usize, 0usize);
    for (&a, &b) in trace_u.states().iter().zip(trace_v.states()) {
        both += usize::from(a && b);
        either += usize::from(a || b);
    }
    Ok(if either == 0 { 0.0 } else { 1.0 - both as f64 / either as f64 })
}

/// Online CAT over offline CAT; `1` when both are zero.
pub fn ratio_online_to_offline(online: &OnlineResult, offline: &OfflineResult) -> f64 {
    cat_ratio(online.cat_total, offline.cat_total)
}

pub(crate) fn cat_ratio(online: f64, offline: f64) -> f64 {
    if offline == 0.0 && online == 0.0 {
        1.0
    } else {
        online / offline
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_model::DeviceId;
    use crate::offline::offline_duty_cycle;
    use crate::online::{online_duty_cycle, OnlineConfig, OnlineMode};
    use crate::params::{Efficiency, Probability};
    use crate::state_graph::{build_graph, schedule_from_matching};
    use proptest::prelude::*;

    const ETA: Efficiency = Efficiency::DEFAULT;

    fn trace(name: &str, len: usize, slots: &[usize]) -> EnergyTrace {
        EnergyTrace::from_slots(DeviceId::new(name), len, slots).unwrap()
    }

    #[test]
    fn walkthrough_cat() {
        let (u, v) = (trace("u", 9, &[1, 4, 6, 8]), trace("v", 9, &[1, 3, 6, 9]));
        let off = offline_duty_cycle(&build_graph(&u, &v, ETA).unwrap());
        let s = schedule_from_matching(&off.matching, 9).unwrap();
        assert_eq!(compute_cat(&s), 3.5);
        assert_eq!(compute_cat(&Schedule::idle(9)), 0.0);
        let h = compute_heterogeneity(&u, &v).unwrap();
        assert!((h - 2.0 / 3.0).abs() < 1e-15);
        let m = PairMetrics::new("1", off.cat_total, off.sat_total, &u, &v).unwrap();
        assert_eq!(m.sat, 2.0);
        assert!((m.cat_pct - 3.5 / 9.0).abs() < 1e-15);
        assert_eq!((m.p_hat_u, m.p_hat_v), (4.0 / 9.0, 4.0 / 9.0));
    }

    #[test]
    fn heterogeneity_extremes() {
        let t = trace("u", 6, &[1, 2, 5]);
        assert_eq!(compute_heterogeneity(&t, &t).unwrap(), 0.0);
        assert_eq!(compute_heterogeneity(&trace("u", 6, &[1, 2]), &trace("v", 6, &[3])).unwrap(), 1.0);
        assert_eq!(compute_heterogeneity(&trace("u", 6, &[]), &trace("v", 6, &[])).unwrap(), 0.0);
    }

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(cat_ratio(0.0, 0.0), 1.0);
        assert_eq!(cat_ratio(0.0, 3.0), 0.0);
        assert_eq!(cat_ratio(3.0, 3.0), 1.0);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_pair_metrics_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), PAIR_METRICS_CSV_HEADER);
        let t = trace("u", 4, &[1]);
        let m = PairMetrics::new("p1", 1.0, 1.0, &t, &t).unwrap();
        let mut buf = Vec::new();
        write_pair_metrics_csv(&mut buf, &[m]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{PAIR_METRICS_CSV_HEADER}\np1,1.0,1.0,0.25,0.25,0.0,0.25,0.25\n"));
    }

    proptest! {
        #[test]
        fn metric_invariants(pu in 0.0f64..=1.0, pv in 0.0f64..=1.0, len in 1usize..200, seed: u64) {
            let (u, v) = crate::energy_model::generate_pair(pu, pv, len, seed).unwrap();
            let off = offline_duty_cycle(&build_graph(&u, &v, ETA).unwrap());
            let s = schedule_from_matching(&off.matching, len).unwrap();
            prop_assert_eq!(compute_cat(&s), off.cat_total);
            let m = PairMetrics::new("x", off.cat_total, off.sat_total, &u, &v).unwrap();
            prop_assert!(0.0 <= m.sat && m.sat <= m.cat && m.cat <= len as f64);
            prop_assert!((0.0..=1.0).contains(&m.heterogeneity));
            prop_assert!((0.0..=1.0).contains(&m.cat_pct));
            if m.heterogeneity == 0.0 {
                prop_assert_eq!(off.async_count, 0);
                prop_assert_eq!(off.cat_total, u.harvest_count() as f64);
            }
            let all_sync_full = off.sync_count == len;
            prop_assert_eq!(m.cat_pct == 1.0, all_sync_full);

            let on = online_duty_cycle(&u, &v, &OnlineConfig::new(Probability::new(0.5).unwrap(), ETA, seed, OnlineMode::SlotSim)).unwrap();
            prop_assert_eq!(compute_cat(&on.schedule), on.cat_total);
            let r = ratio_online_to_offline(&on, &off);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
        }
    }
}
