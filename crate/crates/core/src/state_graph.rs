//! The energy-state bipartite graph and its matchings.
//!
//! Side `U` holds the harvest slots of the device, side `V` those of its
//! neighbor. An edge pairs one unit of energy from each side. A synchronous
//! edge joins equal slots and yields one slot of common active time; an
//! asynchronous edge joins different slots, so the earlier unit is banked and
//! spent at the later slot, yielding `eta`.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::energy_model::EnergyTrace;
use crate::error::{Error, Result};
use crate::params::Efficiency;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    U,
    V,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::U => "u",
            Side::V => "v",
        })
    }
}

/// A harvest slot of one device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub side: Side,
    pub slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "sync")]
    Synchronous,
    #[serde(rename = "async")]
    Asynchronous,
}

/// An edge between the U vertex at `u_slot` and the V vertex at `v_slot`.
/// The kind is implied by the slots, so an edge cannot disagree with itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "EdgeRecord", try_from = "EdgeRecord")]
pub struct Edge {
    pub u_slot: usize,
    pub v_slot: usize,
}

impl Edge {
    pub fn new(u_slot: usize, v_slot: usize) -> Self {
        Edge { u_slot, v_slot }
    }

    pub fn kind(&self) -> EdgeKind {
        if self.u_slot == self.v_slot {
            EdgeKind::Synchronous
        } else {
            EdgeKind::Asynchronous
        }
    }

    pub fn is_sync(&self) -> bool {
        self.u_slot == self.v_slot
    }

    pub fn weight(&self, eta: Efficiency) -> f64 {
        if self.is_sync() {
            1.0
        } else {
            eta.get()
        }
    }

    /// Slot in which both devices are active. The earlier endpoint's energy
    /// is banked until the later one arrives.
    pub fn active_slot(&self) -> usize {
        self.u_slot.max(self.v_slot)
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    u: usize,
    v: usize,
    kind: EdgeKind,
}

impl From<Edge> for EdgeRecord {
    fn from(e: Edge) -> Self {
        EdgeRecord { u: e.u_slot, v: e.v_slot, kind: e.kind() }
    }
}

impl TryFrom<EdgeRecord> for Edge {
    type Error = String;
    fn try_from(r: EdgeRecord) -> std::result::Result<Self, String> {
        let e = Edge::new(r.u, r.v);
        if e.kind() != r.kind {
            return Err(format!("edge ({}, {}) is labelled {:?}", r.u, r.v, r.kind));
        }
        if r.u == 0 || r.v == 0 {
            return Err("slots are 1-based".into());
        }
        Ok(e)
    }
}

/// `G(A, B, E)` before any edge is chosen: the harvest slots of each device.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGraph {
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    pub eta: Efficiency,
    pub period_len: usize,
}

impl StateGraph {
    /// Builds a graph from explicit vertex sets, sorting and checking them.
    pub fn from_sets(mut set_a: Vec<usize>, mut set_b: Vec<usize>, eta: Efficiency, period_len: usize) -> Result<Self> {
        for set in [&mut set_a, &mut set_b] {
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::parameter("vertex set", "duplicate slot"));
            }
            if set.first() == Some(&0) || set.last().is_some_and(|&s| s > period_len) {
                return Err(Error::parameter("vertex set", format!("slot outside 1..={period_len}")));
            }
        }
        Ok(StateGraph { set_a, set_b, eta, period_len })
    }

    pub fn sync_count(&self) -> usize {
        intersection_len(&self.set_a, &self.set_b)
    }
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn build_graph(trace_u: &EnergyTrace, trace_v: &EnergyTrace, eta: Efficiency) -> Result<StateGraph> {
    if trace_u.period_len() != trace_v.period_len() {
        return Err(Error::PeriodMismatch { left: trace_u.period_len(), right: trace_v.period_len() });
    }
    Ok(StateGraph {
        set_a: trace_u.harvest_slots(),
        set_b: trace_v.harvest_slots(),
        eta,
        period_len: trace_u.period_len(),
    })
}

/// A set of edges in which no vertex appears twice.
///
/// Edges are kept ordered by `(active_slot, u_slot, v_slot)`, so the weight is
/// accumulated in the same order as the per-slot values of the schedule the
/// matching produces and the two sums agree bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    edges: Vec<Edge>,
    eta: Efficiency,
}

impl Matching {
    pub fn empty(eta: Efficiency) -> Self {
        Matching { edges: Vec::new(), eta }
    }

    pub fn from_edges(mut edges: Vec<Edge>, eta: Efficiency) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &edges {
            for v in [Vertex { side: Side::U, slot: e.u_slot }, Vertex { side: Side::V, slot: e.v_slot }] {
                if !seen.insert(v) {
                    return Err(Error::Exclusivity { side: v.side, slot: v.slot });
                }
            }
        }
        edges.sort_unstable_by_key(|e| (e.active_slot(), e.u_slot, e.v_slot));
        Ok(Matching { edges, eta })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn eta(&self) -> Efficiency {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn sync_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_sync()).count()
    }

    pub fn async_count(&self) -> usize {
        self.edges.len() - self.sync_count()
    }

    /// `|sync| + eta * |async|`, summed edge by edge.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().fold(0.0, |acc, e| acc + e.weight(self.eta))
    }

    pub fn sync_weight(&self) -> f64 {
        self.sync_count() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            edges: Vec<Edge>,
            eta: Efficiency,
        }
        let raw: Raw = serde_json::from_str(text)?;
        Matching::from_edges(raw.edges, raw.eta)
    }
}

pub fn matching_weight(m: &Matching) -> f64 {
    m.total_weight()
}

/// Per-slot decisions of both devices and the common active time each slot
/// realizes. Index 0 is slot 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub active_u: Vec<bool>,
    pub active_v: Vec<bool>,
    pub cat: Vec<f64>,
}

impl Schedule {
    pub fn idle(period_len: usize) -> Self {
        Schedule { active_u: vec![false; period_len], active_v: vec![false; period_len], cat: vec![0.0; period_len] }
    }

    pub fn period_len(&self) -> usize {
        self.cat.len()
    }

    /// Writes `slot,a_u,a_v,cat` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["slot", "a_u", "a_v", "cat"])?;
        for t in 0..self.period_len() {
            w.write_record([
                (t + 1).to_string(),
                u8::from(self.active_u[t]).to_string(),
                u8::from(self.active_v[t]).to_string(),
                self.cat[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            slot: usize,
            a_u: u8,
            a_v: u8,
            cat: f64,
        }
        let mut r = csv::Reader::from_reader(input);
        let mut s = Schedule::idle(0);
        for (i, rec) in r.deserialize::<Row>().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| Error::Ingest { row, reason: e.to_string() })?;
            if rec.slot != row || rec.a_u > 1 || rec.a_v > 1 {
                return Err(Error::Ingest { row, reason: "malformed schedule row".into() });
            }
            s.active_u.push(rec.a_u == 1);
            s.active_v.push(rec.a_v == 1);
            s.cat.push(rec.cat);
        }
        Ok(s)
    }
}

/// Both devices wake at each edge's active slot; every other slot is idle.
pub fn schedule_from_matching(m: &Matching, period_len: usize) -> Result<Schedule> {
    let mut s = Schedule::idle(period_len);
    let mut used = vec![false; period_len];
    for e in m.edges() {
        let t = e.active_slot();
        if t == 0 || t > period_len {
            return Err(Error::SlotOutOfPeriod { u: e.u_slot, v: e.v_slot, slot: t, period_len });
        }
        if std::mem::replace(&mut used[t - 1], true) {
            return Err(Error::ScheduleConflict { slot: t });
        }
        s.active_u[t - 1] = true;
        s.active_v[t - 1] = true;
        s.cat[t - 1] = e.weight(m.eta());
    }
    Ok(s)
}

/// Checks the prefix energy budget: for each device and every slot `t`, the
/// number of active slots in `1..=t` never exceeds the harvested units in
/// `1..=t`.
pub fn check_energy_budget(schedule: &Schedule, trace_u: &EnergyTrace, trace_v: &EnergyTrace) -> Result<()> {
    for (side, active, trace) in [(Side::U, &schedule.active_u, trace_u), (Side::V, &schedule.active_v, trace_v)] {
        if active.len() != trace.period_len() {
            return Err(Error::PeriodMismatch { left: active.len(), right: trace.period_len() });
        }
        let (mut spent, mut harvested) = (0usize, 0usize);
        for (i, (&a, &b)) in active.iter().zip(trace.states()).enumerate() {
            spent += usize::from(a);
            harvested += usize::from(b);
            if spent > harvested {
                return Err(Error::BudgetViolation { side, slot: i + 1, spent, harvested });
            }
        }
    }
    Ok(())
}

/// Checks that every edge endpoint is a real harvest slot of its device.
pub fn check_edges_harvested(m: &Matching, trace_u: &EnergyTrace, trace_v: &EnergyTrace) -> Result<()> {
    for e in m.edges() {
        if !trace_u.harvests_at(e.u_slot) {
            return Err(Error::NotHarvested { side: Side::U, u: e.u_slot, v: e.v_slot });
        }
        if !trace_v.harvests_at(e.v_slot) {
            return Err(Error::NotHarvested { side: Side::V, u: e.u_slot, v: e.v_slot });
        }
    }
    Ok(())
}
