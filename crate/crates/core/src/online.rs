//! Online duty cycling: each device flips a biased coin every slot to decide
//! between active and sleep, without knowing future harvests.
//!
//! Two accounting modes share the same coin flips:
//!
//! * [`OnlineMode::Matching`] keeps the edge bookkeeping of the online
//!   algorithm verbatim. Both active and both harvesting adds the synchronous
//!   edge `(t, t)`. A sleeping device whose vertex arrives connects it to the
//!   most recent unconnected earlier vertex of its partner, or leaves it
//!   unconnected for a later partner arrival to claim. An active device that
//!   harvests without forming a synchronous edge spends its unit for nothing.
//! * [`OnlineMode::SlotSim`] is an operational reading with explicit energy
//!   banks. Sleeping harvesters bank their unit. When both devices are active
//!   and exactly one harvests, the other may debit its most recent banked unit
//!   for an asynchronous slot. Active devices with nothing to spend behave as
//!   asleep.
//!
//! At most one edge forms per slot in either mode, so every run yields a
//! conflict-free schedule that respects the prefix energy budget.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::energy_model::EnergyTrace;
use crate::error::{Error, Result};
use crate::params::{Efficiency, Probability};
use crate::rng;
use crate::state_graph::{Edge, Matching, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnlineMode {
    Matching,
    SlotSim,
}

impl OnlineMode {
    pub const ALL: [OnlineMode; 2] = [OnlineMode::Matching, OnlineMode::SlotSim];

    pub fn name(self) -> &'static str {
        match self {
            OnlineMode::Matching => "matching",
            OnlineMode::SlotSim => "slotsim",
        }
    }
}

/// Where each device's probability of being active comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// Known per-device probabilities, e.g. the generative `p` of synthetic
    /// traces.
    Fixed { u: Probability, v: Probability },
    /// Each device estimates its harvest frequency from its own first
    /// `slots` slots as they go by. Before any history exists a device stays
    /// active, so it can use whatever it harvests directly.
    Warmup { slots: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub activation: Activation,
    pub eta: Efficiency,
    pub seed: u64,
    pub mode: OnlineMode,
}

impl OnlineConfig {
    /// Both devices active with the same probability `p`.
    pub fn new(p: Probability, eta: Efficiency, seed: u64, mode: OnlineMode) -> Self {
        OnlineConfig { activation: Activation::Fixed { u: p, v: p }, eta, seed, mode }
    }

    pub fn with_mode(self, mode: OnlineMode) -> Self {
        OnlineConfig { mode, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if let Activation::Warmup { slots: 0 } = self.activation {
            return Err(Error::parameter("warmup", "needs at least one slot"));
        }
        Ok(())
    }
}

/// Banked one-slot energy units of a device, most recent last.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviceBank {
    banked_slots: Vec<usize>,
}

impl DeviceBank {
    pub fn stored_units(&self) -> usize {
        self.banked_slots.len()
    }

    pub fn banked_slots(&self) -> &[usize] {
        &self.banked_slots
    }

    fn deposit(&mut self, slot: usize) {
        self.banked_slots.push(slot);
    }

    fn withdraw_latest(&mut self) -> Option<usize> {
        self.banked_slots.pop()
    }
}

#[derive(Debug, Clone)]
struct Device {
    rng: ChaCha8Rng,
    fixed: Option<f64>,
    warmup: usize,
    seen: usize,
    ones: usize,
    harvested: usize,
    bank: DeviceBank,
}

impl Device {
    fn new(seed: u64, name: &str, fixed: Option<f64>, warmup: usize) -> Self {
        Device {
            rng: rng::stream(seed, rng::DECISION_DOMAIN, name),
            fixed,
            warmup,
            seen: 0,
            ones: 0,
            harvested: 0,
            bank: DeviceBank::default(),
        }
    }

    fn activation_prob(&self) -> f64 {
        match self.fixed {
            Some(p) => p,
            None if self.seen == 0 => 1.0,
            None => self.ones as f64 / self.seen as f64,
        }
    }

    /// Draws this slot's decision; must run before the slot's harvest is seen.
    fn decide(&mut self) -> bool {
        let p = self.activation_prob();
        self.rng.random_bool(p)
    }

    fn observe(&mut self, harvest: bool) {
        self.harvested += usize::from(harvest);
        if self.seen < self.warmup {
            self.seen += 1;
            self.ones += usize::from(harvest);
        }
    }
}

/// What happened in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    pub slot: usize,
    pub active_u: bool,
    pub active_v: bool,
    pub edge: Option<Edge>,
    pub cat: f64,
}

/// Incremental online run. Each call to [`OnlineRun::step`] reveals one slot
/// of both traces; nothing about later slots is available.
#[derive(Debug, Clone)]
pub struct OnlineRun {
    cfg: OnlineConfig,
    slot: usize,
    u: Device,
    v: Device,
    edges: Vec<Edge>,
    schedule: Schedule,
}

impl OnlineRun {
    pub fn new(cfg: OnlineConfig) -> Result<Self> {
        cfg.validate()?;
        let (fixed_u, fixed_v, warmup) = match cfg.activation {
            Activation::Fixed { u, v } => (Some(u.get()), Some(v.get()), 0),
            Activation::Warmup { slots } => (None, None, slots),
        };
        Ok(OnlineRun {
            cfg,
            slot: 0,
            u: Device::new(cfg.seed, "u", fixed_u, warmup),
            v: Device::new(cfg.seed, "v", fixed_v, warmup),
            edges: Vec::new(),
            schedule: Schedule::idle(0),
        })
    }

    pub fn bank_u(&self) -> &DeviceBank {
        &self.u.bank
    }

    pub fn bank_v(&self) -> &DeviceBank {
        &self.v.bank
    }

    pub fn step(&mut self, harvest_u: bool, harvest_v: bool) -> SlotOutcome {
        self.slot += 1;
        let t = self.slot;
        let du = self.u.decide();
        let dv = self.v.decide();
        self.u.observe(harvest_u);
        self.v.observe(harvest_v);

        let (edge, active_u, active_v) = match self.cfg.mode {
            OnlineMode::Matching => self.matching_slot(t, du, dv, harvest_u, harvest_v),
            OnlineMode::SlotSim => self.slot_sim_slot(t, du, dv, harvest_u, harvest_v),
        };
        let cat = edge.map_or(0.0, |e| e.weight(self.cfg.eta));
        if let Some(e) = edge {
            self.edges.push(e);
        }
        self.schedule.active_u.push(active_u);
        self.schedule.active_v.push(active_v);
        self.schedule.cat.push(cat);
        SlotOutcome { slot: t, active_u, active_v, edge, cat }
    }

    fn matching_slot(&mut self, t: usize, du: bool, dv: bool, bu: bool, bv: bool) -> (Option<Edge>, bool, bool) {
        if du && dv && bu && bv {
            return (Some(Edge::new(t, t)), true, true);
        }
        let mut edge = None;
        let (mut bank_u_now, mut bank_v_now) = (false, false);
        if bu && !du {
            match self.v.bank.withdraw_latest() {
                Some(s) => edge = Some(Edge::new(t, s)),
                None => bank_u_now = true,
            }
        }
        if bv && !dv {
            match edge {
                None => match self.u.bank.withdraw_latest() {
                    Some(s) => edge = Some(Edge::new(s, t)),
                    None => bank_v_now = true,
                },
                // One edge per slot: the neighbor's vertex waits for a later
                // arrival of the device.
                Some(_) => bank_v_now = true,
            }
        }
        if bank_u_now {
            self.u.bank.deposit(t);
        }
        if bank_v_now {
            self.v.bank.deposit(t);
        }
        let wasted_u = du && bu;
        let wasted_v = dv && bv;
        (edge, edge.is_some() || wasted_u, edge.is_some() || wasted_v)
    }

    fn slot_sim_slot(&mut self, t: usize, du: bool, dv: bool, bu: bool, bv: bool) -> (Option<Edge>, bool, bool) {
        if du && dv {
            if bu && bv {
                return (Some(Edge::new(t, t)), true, true);
            }
            if bu && !bv {
                if let Some(s) = self.v.bank.withdraw_latest() {
                    return (Some(Edge::new(t, s)), true, true);
                }
            }
            if bv && !bu {
                if let Some(s) = self.u.bank.withdraw_latest() {
                    return (Some(Edge::new(s, t)), true, true);
                }
            }
        }
        // No common slot: active harvesters burn their unit, sleepers bank it.
        if bu && !du {
            self.u.bank.deposit(t);
        }
        if bv && !dv {
            self.v.bank.deposit(t);
        }
        (None, du && bu, dv && bv)
    }

    pub fn finish(self) -> OnlineResult {
        let matching = Matching::from_edges(self.edges, self.cfg.eta).expect("online edges are exclusive by construction");
        let wasted_units = self.u.harvested + self.v.harvested - 2 * matching.len();
        OnlineResult {
            mode: self.cfg.mode,
            sync_count: matching.sync_count(),
            async_count: matching.async_count(),
            cat_total: matching.total_weight(),
            sat_total: matching.sync_weight(),
            wasted_units,
            matching,
            schedule: self.schedule,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineResult {
    pub mode: OnlineMode,
    pub matching: Matching,
    pub schedule: Schedule,
    pub sync_count: usize,
    pub async_count: usize,
    pub cat_total: f64,
    pub sat_total: f64,
    /// Harvested units that never produced common active time: spent while
    /// the partner could not join, or still unspent at the end of the period.
    pub wasted_units: usize,
}

impl Serialize for OnlineResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OnlineResult", 7)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("sync", &self.sync_count)?;
        st.serialize_field("async", &self.async_count)?;
        st.serialize_field("cat", &self.cat_total)?;
        st.serialize_field("sat", &self.sat_total)?;
        st.serialize_field("wasted_units", &self.wasted_units)?;
        st.serialize_field("edges", self.matching.edges())?;
        st.end()
    }
}

/// Feeds both traces through an [`OnlineRun`] slot by slot.
pub fn online_duty_cycle(trace_u: &EnergyTrace, trace_v: &EnergyTrace, cfg: &OnlineConfig) -> Result<OnlineResult> {
    if trace_u.period_len() != trace_v.period_len() {
        return Err(Error::PeriodMismatch { left: trace_u.period_len(), right: trace_v.period_len() });
    }
    let mut run = OnlineRun::new(*cfg)?;
    for (&bu, &bv) in trace_u.states().iter().zip(trace_v.states()) {
        run.step(bu, bv);
    }
    Ok(run.finish())
}

/// Approximation ratio guaranteed for the online algorithm: `1 - e^{-p^2}`.
pub fn approx_ratio_bound(p: Probability) -> f64 {
    1.0 - (-p.get() * p.get()).exp()
}
